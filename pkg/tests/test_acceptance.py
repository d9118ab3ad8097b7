"""Acceptance gate: the ten package-level guarantees, one test apiece.

Each test prints a single ``[criterion NN] PASS/FAIL`` line (visible on
the console via the project's tee-sys capture setting), then asserts.
Configurations and tolerances here are frozen; change the library to
satisfy them, not the other way around.
"""

import time

import numpy as np
import pytest

from multilat import (
    RdMatrix,
    conic_ls,
    gcc_phat_pair,
    hyperbolic_ls,
    srd_ls,
    tdoa_average,
    true_rd_full,
    true_rd_ref,
    usrd_ls,
)
from multilat.bench import (
    config_from_dict,
    run_benchmark,
    summarize,
    write_records_csv,
)

from conftest import make_scene

SUCCESS = ("closed_form", "converged")


def _report(num, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    print(f"[criterion {num:02d}] {verdict} — {detail}", flush=True)
    return ok


def test_criterion_01_noiseless_exact_recovery():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        scene = make_scene(rng, mic_count=5 + i % 4)
        full = true_rd_full(scene)
        row = true_rd_ref(scene, 0)
        for estimator, rd in ((usrd_ls, row), (srd_ls, row),
                              (conic_ls, full), (hyperbolic_ls, row)):
            result = estimator(rd, scene.mics)
            err = float(np.linalg.norm(result.position - scene.source))
            worst = max(worst, err)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 30.0
    assert _report(1, ok, "all four estimators exact on 1000 random "
                          f"scenes: worst {worst:.3g} m, {elapsed:.1f} s")


def _identifiable(scene):
    """True when no second point reproduces the scene's RD matrix.

    A companion source with every range offset by the same constant c
    yields identical RDs.  Solving ||x - r_m|| = D_m + c (linear after
    differencing, one quadratic for the family parameter) either finds
    a feasible companion or proves the scene unambiguous.
    """
    mics, src = scene.mics, scene.source
    dist = np.linalg.norm(src - mics, axis=1)
    a = np.hstack([2.0 * (mics[0] - mics[1:]),
                   2.0 * (dist[1:] - dist[0])[:, None]])
    rhs = (mics[0] @ mics[0] - np.sum(mics[1:] ** 2, axis=1)
           + dist[1:] ** 2 - dist[0] ** 2)
    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    null = np.linalg.svd(a)[2][-1]
    w = sol[:3] - mics[0]
    qa = null[:3] @ null[:3] - null[3] ** 2
    qb = 2.0 * (w @ null[:3] - (dist[0] + sol[3]) * null[3])
    qc = w @ w - (dist[0] + sol[3]) ** 2
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return True
    for t in ((-qb - np.sqrt(disc)) / (2.0 * qa),
              (-qb + np.sqrt(disc)) / (2.0 * qa)):
        offset = (sol + t * null)[3]
        if abs(offset) < 1e-9:
            continue  # the source itself
        if np.min(dist + offset) >= 0.0:
            return False
    return True


def test_criterion_02_minimal_four_mic_arrays():
    rng = np.random.default_rng(202)
    worst = 0.0
    kept = 0
    while kept < 200:
        scene = make_scene(rng, mic_count=4)
        if not _identifiable(scene):
            continue  # two exact solutions: recovery is ill-posed
        kept += 1
        result = conic_ls(true_rd_full(scene), scene.mics)
        worst = max(worst,
                    float(np.linalg.norm(result.position - scene.source)))
        with pytest.raises(ValueError):
            usrd_ls(true_rd_ref(scene, 0), scene.mics)
    ok = worst <= 1e-6
    assert _report(2, ok, "conic exact on 200 identifiable four-mic "
                          f"scenes (worst {worst:.3g} m); usrd-ls "
                          "refuses M=4")


def test_criterion_03_srd_constraint_feasibility():
    config = config_from_dict({
        "methods": ["srd-ls"],
        "features": ["vad_on:raw"],
        "trials": 10,
        "seed": 7,
        "scene": {"kind": "paper_table1"},
        "subsets": {"mode": "all_k_of_m", "k": 5},
        "noise": {"domain": "rd", "kind": "gaussian", "levels": [0.05, 0.1]},
    })
    records = run_benchmark(config)
    checked = 0
    worst_rel = 0.0
    min_c1 = np.inf
    for record in records:
        if record.status not in SUCCESS:
            continue
        checked += 1
        worst_rel = max(worst_rel, record.extra["constraint_rel"])
        min_c1 = min(min_c1, record.extra["c1"])
    ok = checked > 0 and worst_rel <= 1e-6 and min_c1 >= -1e-9
    assert _report(3, ok, f"constraint holds on {checked} trials "
                          f"(worst rel {worst_rel:.3g}, "
                          f"min range {min_c1:.3g})")


def test_criterion_04_constrained_beats_unconstrained():
    config = config_from_dict({
        "methods": ["usrd-ls", "srd-ls"],
        "features": ["vad_on:raw"],
        "trials": 500,
        "seed": 42,
        "scene": {"kind": "paper_table1", "position": 2},
        "subsets": {"mode": "full"},
        "noise": {"domain": "rd", "kind": "gaussian", "levels": [0.1]},
    })
    rows = summarize(run_benchmark(config))
    median = {row["method"]: row["median_m"] for row in rows}
    ok = median["srd-ls"] <= median["usrd-ls"]
    assert _report(4, ok, "median error srd-ls "
                          f"{median['srd-ls']:.3g} m <= usrd-ls "
                          f"{median['usrd-ls']:.3g} m at sigma 0.1")


def test_criterion_05_denoising_redistributes_error():
    rng = np.random.default_rng(505)
    scene = make_scene(rng, mic_count=8)
    clean = true_rd_full(scene).values
    bumped = clean.copy()
    bumped[0, 1] += 0.2
    bumped[1, 0] -= 0.2
    averaged = tdoa_average(RdMatrix(values=bumped)).values
    moved = sum(1 for i in range(8) for j in range(i + 1, 8)
                if (i, j) != (0, 1)
                and abs(averaged[i, j] - clean[i, j]) > 1e-6)
    ok = moved >= 7
    assert _report(5, ok, f"single 0.2 m bump spread onto {moved} "
                          "previously-clean entries (need >= 7)")


def _consistency_projector(m):
    """Orthogonal projector onto {g 1^T - 1 g^T} built from a raw basis."""
    columns = []
    for k in range(m):
        e = np.zeros(m)
        e[k] = 1.0
        columns.append((np.ones((m, 1)) * e[None, :]
                        - e[:, None] * np.ones((1, m))).ravel())
    basis = np.array(columns).T
    return basis @ np.linalg.pinv(basis.T @ basis) @ basis.T


def test_criterion_06_average_equals_projection():
    rng = np.random.default_rng(606)
    worst = 0.0
    drift = 0.0
    for i in range(100):
        m = 3 + i % 8
        raw = rng.normal(size=(m, m))
        noisy = raw - raw.T
        once = tdoa_average(RdMatrix(values=noisy))
        projected = (_consistency_projector(m) @ noisy.ravel()).reshape(m, m)
        worst = max(worst, float(np.max(np.abs(once.values - projected))))
        twice = tdoa_average(once)
        drift = max(drift, float(np.max(np.abs(twice.values - once.values))))
    ok = worst <= 1e-12 and drift <= 1e-12
    assert _report(6, ok, f"projection match {worst:.3g}, "
                          f"idempotence drift {drift:.3g} over 100 matrices")


def test_criterion_07_gcc_phat_delay_recovery():
    rng = np.random.default_rng(707)
    base = rng.standard_normal(1024)
    exact = all(
        round(gcc_phat_pair(base, np.roll(base, shift), 128)) == shift
        for shift in range(-100, 101))
    hits = 0
    noise_scale = 10.0 ** (-10.0 / 20.0)  # SNR 10 dB
    for _ in range(1000):
        clean = rng.standard_normal(1024)
        a = clean + noise_scale * rng.standard_normal(1024)
        b = np.roll(clean, 37) + noise_scale * rng.standard_normal(1024)
        if abs(gcc_phat_pair(a, b, 128) - 37.0) <= 1.0:
            hits += 1
    ok = exact and hits >= 950
    assert _report(7, ok, "integer shifts -100..100 "
                          f"{'exact' if exact else 'NOT exact'}; "
                          f"{hits}/1000 noisy frames within 1 sample")


def test_criterion_08_end_to_end_pipeline():
    config = config_from_dict({
        "methods": ["srd-ls"],
        "features": ["vad_on:raw"],
        "trials": 3,
        "seed": 5,
        "scene": {"kind": "paper_table1"},
        "subsets": {"mode": "all_k_of_m", "k": 5},
        "noise": {"domain": "signal", "kind": "gaussian", "levels": [30.0],
                  "duration_s": 2.0, "sample_rate": 16000},
    })
    start = time.perf_counter()
    records = run_benchmark(config)
    elapsed = time.perf_counter() - start
    errors = [r.position_error_m for r in records if r.status in SUCCESS]
    median = float(np.median(errors)) if errors else np.inf
    ok = len(records) == 168 and median <= 0.1 and elapsed < 300.0
    assert _report(8, ok, f"{len(records)} records, median "
                          f"{median:.3g} m, {elapsed:.0f} s")


def test_criterion_09_monotone_degradation():
    config = config_from_dict({
        "methods": ["usrd-ls", "srd-ls", "conic", "conic-norm", "hyperbolic"],
        "features": ["vad_on:raw"],
        "trials": 500,
        "seed": 11,
        "scene": {"kind": "random", "count": 1, "mic_count": 8,
                  "bounds": 3.0},
        "subsets": {"mode": "full"},
        "noise": {"domain": "rd", "kind": "gaussian",
                  "levels": [0.01, 0.05, 0.1]},
    })
    rows = summarize(run_benchmark(config))
    curves = {}
    for row in rows:
        curves.setdefault(row["method"], []).append(
            (row["noise_level"], row["median_m"]))
    violations = []
    for method, curve in sorted(curves.items()):
        medians = [m for _, m in sorted(curve)]
        if not all(a < b for a, b in zip(medians, medians[1:])):
            violations.append(method)
    ok = len(curves) == 5 and not violations
    assert _report(9, ok, "medians strictly increase across sigma "
                          "0.01/0.05/0.1 for all 5 methods"
                          + (f" (violations: {violations})"
                             if violations else ""))


def test_criterion_10_thread_count_invariance(tmp_path, monkeypatch):
    outputs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("MULTILAT_THREADS", threads)
        config = config_from_dict({
            "methods": ["usrd-ls", "srd-ls"],
            "features": ["vad_on:raw"],
            "trials": 20,
            "seed": 13,
            "scene": {"kind": "paper_table1", "position": 1},
            "subsets": {"mode": "all_k_of_m", "k": 7},
            "noise": {"domain": "rd", "kind": "gaussian",
                      "levels": [0.05, 0.1]},
        })
        path = tmp_path / f"records-{threads}.csv"
        write_records_csv(run_benchmark(config), path)
        outputs.append(path.read_bytes())
    ok = outputs[0] == outputs[1]
    assert _report(10, ok, "records CSV byte-identical with "
                           "MULTILAT_THREADS=1 and =4")
