"""Monte Carlo benchmark harness.

Reproduces the survey-style protocol on synthetic data: a grid of
(method x feature x microphone subset x noise level x trial) cells,
each recording the position error ||r - r_hat|| and the mean absolute
RD error of the observation actually fed to the estimator.  Two noise
domains are supported:

* ``rd`` — noise injected directly into range differences (fast,
  controlled; the primary benchmarking axis);
* ``signal`` — full pipeline: synthesize microphone signals at a given
  SNR, run GCC-PHAT (+ optional VAD), aggregate, then localize.

Determinism: every (noise level, trial) cell derives its RNG from
``SeedSequence((seed, salt, noise_idx, trial_idx))`` and all cells
share that one perturbed observation across subsets, features and
methods, so reruns — with any worker count — produce identical
records.  Records are sorted canonically before they are returned or
persisted.  Wall times are written as 0.0 unless ``timing`` is enabled
(real timing necessarily breaks byte-identical reruns).

Multiple source positions are folded into the trial axis: trial t uses
scene position ``t mod n_positions``, keeping the record count at
|methods| x |features| x |subsets| x |levels| x trials.

Scene files are YAML::

    mics: [[x, y, z], ...]     # meters
    source: [x, y, z]          # optional ground truth
    sound_speed: 343.0         # optional, m/s

Benchmark config files are YAML; see ``load_config`` and the README
for the schema.
"""

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import yaml

from .denoise import tdoa_average
from .estimators import conic_ls, hyperbolic_ls, srd_ls, usrd_ls
from .geometry import (Scene, select_reference, tdoa_to_rd, true_rd_full,
                       RdMatrix)
from .simulate import RdNoiseModel, SignalModel, perturb_rd, synth_signals
from .tdoa import (FrameConfig, MicSignals, estimate_tdoa_matrix,
                   select_reference_energy)

_SCENE_SALT = 101
_TRIAL_SALT = 202

VALID_FEATURES = ("vad_on:raw", "vad_on:denoised",
                  "vad_off:raw", "vad_off:denoised")
_METHOD_NAMES = ("usrd-ls", "srd-ls", "conic", "conic-norm", "hyperbolic")
_REF_POLICIES = ("nearest-barycenter", "max-energy", "min-energy")

RECORDS_HEADER = ("method,feature,subset,noise_level,trial,status,"
                  "position_error_m,mean_abs_rd_error_m,wall_time_s")
SUMMARY_HEADER = "method,feature,noise_level,median_m,q1_m,q3_m,failure_rate,n"


class ConfigError(ValueError):
    """Raised for malformed scene or benchmark configuration."""


# ---------------------------------------------------------------------------
# scenes


# Surveyed stand heights, metres.  The array is only approximately
# horizontal: keeping a few centimetres of height variation is what
# makes the source's vertical coordinate observable at all — with
# exactly equal heights every estimator faces a mirror ambiguity
# about the microphone plane.
_TABLE1_MIC_HEIGHTS = (1.078, 1.005, 1.063, 0.994,
                       1.071, 1.012, 1.055, 1.022)


def paper_table1_scenes(position=None, sound_speed=343.0):
    """The synthetic benchmark scene: 8 mics on a circle, 3 positions.

    Eight microphones on a circle of radius 2.28 m at 45-degree
    spacing, stands roughly 1.04 m tall (individual heights vary by a
    few centimetres), and a source at one of three positions on the
    y = -0.8 m line at z = 1.19 m — about 15 cm above the mean
    microphone height.
    """
    radius = 2.28
    angles = np.deg2rad(45.0 * np.arange(8))
    mics = np.column_stack([radius * np.cos(angles),
                            radius * np.sin(angles),
                            np.asarray(_TABLE1_MIC_HEIGHTS)])
    sources = [(-0.8, -0.8, 1.19), (0.0, -0.8, 1.19), (0.8, -0.8, 1.19)]
    if position is not None:
        if not 0 <= position < len(sources):
            raise ConfigError("paper_table1 position must be 0, 1 or 2")
        sources = [sources[position]]
    return [Scene(mics=mics, source=np.array(s), sound_speed=sound_speed)
            for s in sources]


def random_scenes(count, mic_count, bounds, seed):
    """Random non-degenerate scenes: spread-out mics, source in the hull."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, _SCENE_SALT)))
    scenes = []
    while len(scenes) < count:
        mics = rng.uniform(-bounds, bounds, size=(mic_count, 3))
        centered = mics - mics.mean(axis=0)
        sv = np.linalg.svd(centered, compute_uv=False)
        if sv[2] < 0.05 * sv[0]:  # nearly coplanar: reject
            continue
        diff = mics[:, None, :] - mics[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if dist.min() < 0.05 * bounds:
            continue
        weights = rng.dirichlet(np.ones(mic_count))
        source = weights @ mics
        scenes.append(Scene(mics=mics, source=source))
    return scenes


def load_scene(path):
    """Read a scene YAML file (keys: mics, source, sound_speed)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read scene file {path}: {exc}") from exc
    if not isinstance(raw, dict) or "mics" not in raw:
        raise ConfigError("scene file must be a mapping with a 'mics' key")
    try:
        return Scene(mics=np.asarray(raw["mics"], dtype=float),
                     source=(np.asarray(raw["source"], dtype=float)
                             if raw.get("source") is not None else None),
                     sound_speed=float(raw.get("sound_speed", 343.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scene: {exc}") from exc


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class BenchmarkConfig:
    """Full description of one benchmark run (see module docstring)."""

    methods: tuple
    features: tuple
    noise_levels: tuple
    trials: int
    seed: int = 0
    scene_kind: str = "paper_table1"
    scene_position: int | None = None
    scene_count: int = 3
    scene_mic_count: int = 8
    scene_bounds: float = 3.0
    subset_mode: str = "all_k_of_m"
    subset_k: int = 5
    noise_domain: str = "rd"
    noise_kind: str = "gaussian"
    outlier_fraction: float = 0.05
    outlier_scale: float = 10.0
    duration_s: float = 2.0
    sample_rate: int = 16000
    gain_law: str = "unit"
    sound_speed: float = 343.0
    timing: bool = False
    vad_energy_mode: str = "sum_of_energies"

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "noise_levels",
                           tuple(float(x) for x in self.noise_levels))
        if not self.methods:
            raise ConfigError("methods list must not be empty")
        if not self.features:
            raise ConfigError("features list must not be empty")
        if not self.noise_levels:
            raise ConfigError("noise_levels list must not be empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        for feature in self.features:
            if feature not in VALID_FEATURES:
                raise ConfigError(f"unknown feature {feature!r}; "
                                  f"valid: {', '.join(VALID_FEATURES)}")
        for method in self.methods:
            name, ref = _parse_method(method)
            if self.noise_domain == "rd" and ref in ("max-energy",
                                                     "min-energy"):
                raise ConfigError("energy reference policies need signals; "
                                  "use the signal noise domain")
        if self.scene_kind not in ("paper_table1", "random"):
            raise ConfigError(f"unknown scene kind {self.scene_kind!r}")
        if self.scene_kind == "paper_table1" and self.scene_position is not None \
                and self.scene_position not in (0, 1, 2):
            raise ConfigError("paper_table1 position must be 0, 1 or 2")
        if self.scene_kind == "random":
            if self.scene_count < 1:
                raise ConfigError("scene count must be >= 1")
            if self.scene_mic_count < 2:
                raise ConfigError("scene mic_count must be >= 2")
            if self.scene_bounds <= 0:
                raise ConfigError("scene bounds must be positive")
        if self.subset_mode not in ("all_k_of_m", "full"):
            raise ConfigError(f"unknown subset mode {self.subset_mode!r}")
        if self.noise_domain not in ("rd", "signal"):
            raise ConfigError(f"unknown noise domain {self.noise_domain!r}")
        if self.noise_domain == "rd":
            RdNoiseModel(kind=self.noise_kind, sigma=0.0,
                         outlier_fraction=self.outlier_fraction,
                         outlier_scale=self.outlier_scale)
        mic_count = 8 if self.scene_kind == "paper_table1" \
            else self.scene_mic_count
        if self.subset_mode == "all_k_of_m" and not 1 <= self.subset_k <= mic_count:
            raise ConfigError("subset k must satisfy 1 <= k <= mic count")


def _parse_method(method_id):
    """Split 'name[:ref-policy]' and validate both parts."""
    name, sep, ref = method_id.partition(":")
    if name not in _METHOD_NAMES:
        raise ConfigError(f"unknown method {name!r}; "
                          f"valid: {', '.join(_METHOD_NAMES)}")
    if name in ("conic", "conic-norm"):
        if sep:
            raise ConfigError("conic methods take no reference policy")
        return name, None
    if not sep:
        return name, "nearest-barycenter"
    if ref in _REF_POLICIES:
        return name, ref
    if ref.startswith("index:"):
        try:
            int(ref.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad fixed reference {ref!r}") from None
        return name, ref
    raise ConfigError(f"unknown reference policy {ref!r}")


def _feature_parts(feature_id):
    vad, _, processing = feature_id.partition(":")
    return vad.removeprefix("vad_"), processing == "denoised"


def load_config(path):
    """Read a benchmark YAML file into a validated BenchmarkConfig."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("benchmark config must be a mapping")
    return config_from_dict(raw)


_CONFIG_KEYS = {
    "": {"methods", "features", "trials", "seed", "scene", "subsets",
         "noise", "sound_speed", "timing", "vad_energy_mode"},
    "scene": {"kind", "position", "count", "mic_count", "bounds"},
    "subsets": {"mode", "k"},
    "noise": {"domain", "kind", "levels", "outlier_fraction",
              "outlier_scale", "duration_s", "sample_rate", "gain_law"},
}


def _check_keys(section, mapping):
    if not isinstance(mapping, dict):
        raise ConfigError(f"config section {section or 'top level'!r} "
                          "must be a mapping")
    unknown = set(mapping) - _CONFIG_KEYS[section]
    if unknown:
        raise ConfigError(
            f"unknown config key(s) in {section or 'top level'!r}: "
            f"{', '.join(sorted(map(str, unknown)))}")


def config_from_dict(raw):
    _check_keys("", raw)
    scene = raw.get("scene", {}) or {}
    subsets = raw.get("subsets", {}) or {}
    noise = raw.get("noise", {}) or {}
    for name, section in (("scene", scene), ("subsets", subsets),
                          ("noise", noise)):
        _check_keys(name, section)
    try:
        return BenchmarkConfig(
            methods=tuple(raw.get("methods", ())),
            features=tuple(raw.get("features", ())),
            noise_levels=tuple(noise.get("levels", ())),
            trials=int(raw.get("trials", 1)),
            seed=int(raw.get("seed", 0)),
            scene_kind=scene.get("kind", "paper_table1"),
            scene_position=scene.get("position"),
            scene_count=int(scene.get("count", 3)),
            scene_mic_count=int(scene.get("mic_count", 8)),
            scene_bounds=float(scene.get("bounds", 3.0)),
            subset_mode=subsets.get("mode", "all_k_of_m"),
            subset_k=int(subsets.get("k", 5)),
            noise_domain=noise.get("domain", "rd"),
            noise_kind=noise.get("kind", "gaussian"),
            outlier_fraction=float(noise.get("outlier_fraction", 0.05)),
            outlier_scale=float(noise.get("outlier_scale", 10.0)),
            duration_s=float(noise.get("duration_s", 2.0)),
            sample_rate=int(noise.get("sample_rate", 16000)),
            gain_law=noise.get("gain_law", "unit"),
            sound_speed=float(raw.get("sound_speed", 343.0)),
            timing=bool(raw.get("timing", False)),
            vad_energy_mode=raw.get("vad_energy_mode", "sum_of_energies"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid benchmark config: {exc}") from exc


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class TrialRecord:
    """One localization outcome; ``extra`` carries estimator diagnostics
    (not persisted to CSV)."""

    method: str
    feature: str
    subset: str
    noise_level: float
    trial: int
    status: str
    position_error_m: float
    mean_abs_rd_error_m: float
    wall_time_s: float
    extra: dict = field(default_factory=dict, compare=False)

    def sort_key(self):
        return (self.method, self.feature, self.subset,
                self.noise_level, self.trial)


def enumerate_subsets(m, k):
    """All C(m, k) index subsets in lexicographic order."""
    if not 1 <= k <= m:
        raise ValueError("need 1 <= k <= m")
    return [tuple(c) for c in combinations(range(m), k)]


def _subset_id(subset):
    return "-".join(str(i) for i in subset)


def _worker_count():
    raw = os.environ.get("MULTILAT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(32, os.cpu_count() or 1)
    return n


def _scenes_for(config):
    if config.scene_kind == "paper_table1":
        scenes = paper_table1_scenes(position=config.scene_position,
                                     sound_speed=config.sound_speed)
    else:
        scenes = random_scenes(config.scene_count, config.scene_mic_count,
                               config.scene_bounds, config.seed)
    return [(scene, true_rd_full(scene)) for scene in scenes]


def _select_subset_reference(ref_policy, sub_mics, sub_signals):
    if ref_policy.startswith("index:"):
        return select_reference(sub_mics, policy="fixed",
                                index=int(ref_policy.split(":", 1)[1]))
    if ref_policy == "nearest-barycenter":
        return select_reference(sub_mics)
    return select_reference_energy(sub_signals, policy=ref_policy.replace("-", "_"))


def _localize(method_name, ref, sub_rd, sub_mics):
    if method_name == "conic":
        return conic_ls(sub_rd, sub_mics, normalize=False)
    if method_name == "conic-norm":
        return conic_ls(sub_rd, sub_mics, normalize=True)
    rd_vec = sub_rd.reference_row(ref)
    if method_name == "usrd-ls":
        return usrd_ls(rd_vec, sub_mics)
    if method_name == "srd-ls":
        return srd_ls(rd_vec, sub_mics)
    return hyperbolic_ls(rd_vec, sub_mics)


def _observations_for_cell(config, scene, true_full, noise_idx, trial_idx):
    """Observed full RD matrix per feature id, shared by all methods.

    Returns (dict feature -> RdMatrix or None, signals or None).  The
    denoised variants project the *full* observed matrix before any
    subset is taken (estimation -> averaging -> multilateration order).
    """
    cell_seed = np.random.SeedSequence(
        (config.seed, _TRIAL_SALT, noise_idx, trial_idx))
    level = config.noise_levels[noise_idx]
    observed = {}
    signals = None
    if config.noise_domain == "rd":
        rng = np.random.default_rng(cell_seed)
        model = RdNoiseModel(kind=config.noise_kind, sigma=level,
                             outlier_fraction=config.outlier_fraction,
                             outlier_scale=config.outlier_scale)
        raw = perturb_rd(true_full, model, rng=rng)
        averaged = None
        for feature in config.features:
            _, denoised = _feature_parts(feature)
            if denoised and averaged is None:
                averaged = tdoa_average(raw)
            observed[feature] = averaged if denoised else raw
    else:
        model = SignalModel(gain_law=config.gain_law, snr_db=level,
                            rng_seed=cell_seed)
        signals = synth_signals(scene, model, config.duration_s,
                                config.sample_rate)
        frame_config = FrameConfig(sample_rate=config.sample_rate)
        diameter = _array_diameter(scene.mics)
        per_vad = {}
        for feature in config.features:
            vad, denoised = _feature_parts(feature)
            if vad not in per_vad:
                tdoa_mat = estimate_tdoa_matrix(
                    signals, frame_config, vad=vad,
                    max_distance_m=1.05 * diameter,
                    sound_speed=scene.sound_speed,
                    vad_energy_mode=config.vad_energy_mode)
                per_vad[vad] = RdMatrix(
                    tdoa_to_rd(tdoa_mat.values, scene.sound_speed))
            raw = per_vad[vad]
            if denoised:
                observed[feature] = tdoa_average(raw) if raw.is_valid() else None
            else:
                observed[feature] = raw
    return observed, signals


def _array_diameter(mics):
    diff = mics[:, None, :] - mics[None, :, :]
    return float(np.linalg.norm(diff, axis=-1).max())


def _run_cell(config, scenes, subsets, methods, noise_idx, trial_idx):
    scene, true_full = scenes[trial_idx % len(scenes)]
    level = config.noise_levels[noise_idx]
    observed, signals = _observations_for_cell(
        config, scene, true_full, noise_idx, trial_idx)
    records = []
    for subset in subsets:
        sub_id = _subset_id(subset)
        sub_mics = scene.mics[list(subset)]
        sub_true = true_full.subset(subset)
        sub_signals = None
        if signals is not None:
            sub_signals = MicSignals(channels=signals.channels[list(subset)],
                                     sample_rate=signals.sample_rate)
        for feature in config.features:
            full = observed[feature]
            sub_rd = None
            if full is not None:
                sub_rd = full.subset(subset)
                if not sub_rd.is_valid():
                    sub_rd = None
            if sub_rd is not None:
                iu = np.triu_indices(len(subset), k=1)
                rd_err = float(np.mean(np.abs(
                    (sub_rd.values - sub_true.values)[iu])))
            else:
                rd_err = float("nan")
            for method_id in methods:
                name, ref_policy = method_id
                if sub_rd is None:
                    records.append(TrialRecord(
                        method=_method_id(name, ref_policy), feature=feature,
                        subset=sub_id, noise_level=level, trial=trial_idx,
                        status="invalid_pair", position_error_m=float("nan"),
                        mean_abs_rd_error_m=rd_err, wall_time_s=0.0))
                    continue
                try:
                    ref = (None if ref_policy is None else
                           _select_subset_reference(ref_policy, sub_mics,
                                                    sub_signals))
                    started = time.perf_counter() if config.timing else 0.0
                    result = _localize(name, ref, sub_rd, sub_mics)
                    elapsed = (time.perf_counter() - started
                               if config.timing else 0.0)
                    pos_err = float("nan")
                    if np.all(np.isfinite(result.position)):
                        pos_err = float(np.linalg.norm(
                            result.position - scene.source))
                    records.append(TrialRecord(
                        method=_method_id(name, ref_policy), feature=feature,
                        subset=sub_id, noise_level=level, trial=trial_idx,
                        status=result.status, position_error_m=pos_err,
                        mean_abs_rd_error_m=rd_err, wall_time_s=elapsed,
                        extra=dict(result.info)))
                except (ValueError, IndexError) as exc:
                    records.append(TrialRecord(
                        method=_method_id(name, ref_policy), feature=feature,
                        subset=sub_id, noise_level=level, trial=trial_idx,
                        status="degenerate", position_error_m=float("nan"),
                        mean_abs_rd_error_m=rd_err, wall_time_s=0.0,
                        extra={"reason": str(exc)}))
    return records


def _method_id(name, ref_policy):
    if ref_policy is None or ref_policy == "nearest-barycenter":
        return name
    return f"{name}:{ref_policy}"


def run_benchmark(config):
    """Execute the full benchmark grid; returns canonically sorted records.

    Per-trial failures (degenerate geometry, invalid TDOA pairs,
    estimator refusals) are recorded with their status — never dropped.
    """
    scenes = _scenes_for(config)
    mic_count = scenes[0][0].mic_count
    if config.subset_mode == "full":
        subsets = [tuple(range(mic_count))]
    else:
        subsets = enumerate_subsets(mic_count, config.subset_k)
    methods = [_parse_method(mid) for mid in config.methods]

    work = [(ni, ti)
            for ni in range(len(config.noise_levels))
            for ti in range(config.trials)]
    workers = _worker_count()
    if workers > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(
                lambda item: _run_cell(config, scenes, subsets, methods, *item),
                work))
    else:
        chunks = [_run_cell(config, scenes, subsets, methods, *item)
                  for item in work]
    records = [record for chunk in chunks for record in chunk]
    records.sort(key=TrialRecord.sort_key)
    return records


# ---------------------------------------------------------------------------
# aggregation and persistence

_SUCCESS_STATUSES = ("closed_form", "converged")


def summarize(records):
    """Per-(method, feature, noise level) summary rows.

    Median and quartiles (linear interpolation) of the position error
    over successful trials, plus the failure rate and the cell count.
    Invariant under record permutation.
    """
    if not records:
        raise ValueError("no records to summarize")
    groups = {}
    for rec in records:
        groups.setdefault((rec.method, rec.feature, rec.noise_level),
                          []).append(rec)
    rows = []
    for key in sorted(groups):
        cell = groups[key]
        errors = [r.position_error_m for r in cell
                  if r.status in _SUCCESS_STATUSES
                  and np.isfinite(r.position_error_m)]
        if errors:
            q1, med, q3 = np.percentile(errors, [25.0, 50.0, 75.0])
        else:
            q1 = med = q3 = float("nan")
        rows.append({
            "method": key[0], "feature": key[1], "noise_level": key[2],
            "median_m": float(med), "q1_m": float(q1), "q3_m": float(q3),
            "failure_rate": 1.0 - len(errors) / len(cell),
            "n": len(cell),
        })
    return rows


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def write_records_csv(records, path):
    """Persist records with the pinned schema, 9 significant digits, LF."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORDS_HEADER.split(","))
        for r in records:
            writer.writerow([r.method, r.feature, r.subset,
                             _fmt(r.noise_level), r.trial, r.status,
                             _fmt(r.position_error_m),
                             _fmt(r.mean_abs_rd_error_m),
                             _fmt(r.wall_time_s)])


def read_records_csv(path):
    """Round-trip reader for the records CSV."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(TrialRecord(
                method=row["method"], feature=row["feature"],
                subset=row["subset"], noise_level=float(row["noise_level"]),
                trial=int(row["trial"]), status=row["status"],
                position_error_m=float(row["position_error_m"]),
                mean_abs_rd_error_m=float(row["mean_abs_rd_error_m"]),
                wall_time_s=float(row["wall_time_s"])))
    return records


def write_summary_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER.split(","))
        for row in rows:
            writer.writerow([row["method"], row["feature"],
                             _fmt(row["noise_level"]), _fmt(row["median_m"]),
                             _fmt(row["q1_m"]), _fmt(row["q3_m"]),
                             _fmt(row["failure_rate"]), row["n"]])


def write_histogram_csv(records, path, bins=30):
    """2D histogram of mean RD error vs position error, per method/feature.

    Bin edges are shared across groups (global successful-data range) so
    the heatmaps are comparable; only non-empty bins are written.
    """
    ok = [r for r in records if r.status in _SUCCESS_STATUSES
          and np.isfinite(r.position_error_m)
          and np.isfinite(r.mean_abs_rd_error_m)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "feature",
                         "rd_error_lo", "rd_error_hi",
                         "pos_error_lo", "pos_error_hi", "count"])
        if not ok:
            return
        rd_all = np.array([r.mean_abs_rd_error_m for r in ok])
        pos_all = np.array([r.position_error_m for r in ok])

        def edges(values):
            lo, hi = float(values.min()), float(values.max())
            if hi <= lo:
                hi = lo + 1e-12
            return np.linspace(lo, hi, bins + 1)

        rd_edges, pos_edges = edges(rd_all), edges(pos_all)
        groups = {}
        for r in ok:
            groups.setdefault((r.method, r.feature), []).append(r)
        for key in sorted(groups):
            cell = groups[key]
            hist, _, _ = np.histogram2d(
                [r.mean_abs_rd_error_m for r in cell],
                [r.position_error_m for r in cell],
                bins=[rd_edges, pos_edges])
            for i, j in zip(*np.nonzero(hist)):
                writer.writerow([key[0], key[1],
                                 _fmt(rd_edges[i]), _fmt(rd_edges[i + 1]),
                                 _fmt(pos_edges[j]), _fmt(pos_edges[j + 1]),
                                 int(hist[i, j])])
