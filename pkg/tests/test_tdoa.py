"""Framing, GCC-PHAT, VAD, and TDOA matrix aggregation."""

import numpy as np
import pytest

from multilat import (
    FrameConfig,
    MicSignals,
    SignalModel,
    energy_vad,
    estimate_tdoa_matrix,
    frame_signal,
    gcc_phat_pair,
    select_reference_energy,
    synth_signals,
    tdoa_to_rd,
    true_rd_full,
)
from multilat.bench import paper_table1_scenes

FS = 16000


def default_config():
    return FrameConfig(sample_rate=FS)


def periodic_hann(n):
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


def noise_frame(seed, n=1024):
    return np.random.default_rng(seed).standard_normal(n)


# ---------------------------------------------------------------------------
# framing


def test_frame_length_and_hop():
    cfg = default_config()
    assert cfg.frame_length == 1024
    frames = frame_signal(np.arange(2048, dtype=float), cfg)
    assert len(frames) == 3  # starts 0, 512, 1024
    assert all(f.size == 1024 for f in frames)


def test_constant_signal_yields_window():
    cfg = default_config()
    frames = frame_signal(np.ones(1024), cfg)
    assert len(frames) == 1
    np.testing.assert_allclose(frames[0], periodic_hann(1024), atol=1e-12)


def test_window_energy_is_three_eighths():
    w = frame_signal(np.ones(1024), default_config())[0]
    expected = 3.0 * 1024 / 8.0
    assert abs(np.sum(w * w) - expected) <= 1e-9 * expected


def test_trailing_partial_frame_dropped():
    frames = frame_signal(np.ones(2047), default_config())
    assert len(frames) == 2


def test_channel_shorter_than_frame_rejected():
    with pytest.raises(ValueError, match="frame"):
        frame_signal(np.ones(512), default_config())


def test_frame_config_validation():
    with pytest.raises(ValueError, match="overlap"):
        FrameConfig(sample_rate=FS, overlap=1.0)
    with pytest.raises(ValueError, match="window"):
        FrameConfig(sample_rate=FS, window="hamming")
    with pytest.raises(ValueError, match="sample_rate"):
        FrameConfig(sample_rate=0)


# ---------------------------------------------------------------------------
# GCC-PHAT


def test_identical_frames_zero_lag():
    frame = noise_frame(0)
    assert abs(gcc_phat_pair(frame, frame, 64)) <= 1e-12
    assert gcc_phat_pair(frame, frame, 64, refine=False) == 0.0


def test_circular_shift_recovered():
    frame = noise_frame(1)
    for shift in (37, -37, 100):
        lag = gcc_phat_pair(frame, np.roll(frame, shift), 128)
        assert abs(lag - shift) <= 0.5


def test_negated_frame_zero_lag():
    frame = noise_frame(2)
    assert abs(gcc_phat_pair(frame, -frame, 64)) <= 1e-9


def test_swap_antisymmetry():
    frame = noise_frame(3)
    rng = np.random.default_rng(4)
    other = np.roll(frame, 21) + 0.3 * rng.standard_normal(frame.size)
    integer_ab = gcc_phat_pair(frame, other, 64, refine=False)
    integer_ba = gcc_phat_pair(other, frame, 64, refine=False)
    assert integer_ab == -integer_ba
    refined_ab = gcc_phat_pair(frame, other, 64)
    refined_ba = gcc_phat_pair(other, frame, 64)
    assert abs(refined_ab + refined_ba) <= 1e-6


def test_silent_pair_rejected():
    with pytest.raises(ValueError, match="peak"):
        gcc_phat_pair(np.zeros(1024), np.zeros(1024), 64)


# ---------------------------------------------------------------------------
# energy VAD


def test_vad_silent_pair_discarded():
    assert not energy_vad(np.zeros(16), np.zeros(16), 1.0)


def test_vad_single_loud_frame_kept():
    loud = np.full(16, 2.0)
    assert energy_vad(loud, np.zeros(16), 1.0)
    assert energy_vad(np.zeros(16), loud, 1.0)


def test_vad_alternating_frames():
    # loud/silent alternation: the median pair energy sits halfway, so
    # exactly the loud-containing frame indices survive
    loud = np.ones(16)
    silent = np.zeros(16)
    frames_a = [loud, silent, loud, silent]
    frames_b = [loud, silent, loud, silent]
    sums = [float(a @ a + b @ b) for a, b in zip(frames_a, frames_b)]
    median = float(np.median(sums))
    kept = [energy_vad(a, b, median) for a, b in zip(frames_a, frames_b)]
    assert kept == [True, False, True, False]


# ---------------------------------------------------------------------------
# TDOA matrix estimation


def test_estimate_constructed_delay():
    base = np.random.default_rng(1).standard_normal(FS)
    sig = MicSignals(channels=np.vstack([base, np.roll(base, 37)]),
                     sample_rate=FS)
    td = estimate_tdoa_matrix(sig, default_config(), vad="off",
                              max_distance_m=2.0)
    assert td.values[0, 1] == pytest.approx(37.0 / FS, abs=1e-7)
    assert td.values[1, 0] == -td.values[0, 1]
    assert td.values[0, 0] == 0.0
    assert td.frame_count_used[0, 1] > 0
    assert td.is_valid()


def test_identical_channels_zero_matrix():
    base = np.random.default_rng(2).standard_normal(FS)
    sig = MicSignals(channels=np.vstack([base, base, base]), sample_rate=FS)
    td = estimate_tdoa_matrix(sig, default_config(), vad="off",
                              max_distance_m=2.0)
    assert np.abs(td.values).max() <= 1e-12


def test_all_silent_pair_marked_invalid():
    sig = MicSignals(channels=np.zeros((2, FS)), sample_rate=FS)
    td = estimate_tdoa_matrix(sig, default_config(), vad="on",
                              max_distance_m=2.0)
    assert np.isnan(td.values[0, 1])
    assert td.frame_count_used[0, 1] == 0
    assert not td.is_valid()


def test_vad_never_adds_frames():
    rng = np.random.default_rng(3)
    talk = rng.standard_normal(FS)
    gap = np.zeros(FS // 2)
    a = np.concatenate([talk, gap, talk])
    b = np.concatenate([talk, gap, talk])
    sig = MicSignals(channels=np.vstack([a, b]), sample_rate=FS)
    on = estimate_tdoa_matrix(sig, default_config(), vad="on",
                              max_distance_m=2.0)
    off = estimate_tdoa_matrix(sig, default_config(), vad="off",
                               max_distance_m=2.0)
    assert on.frame_count_used[0, 1] < off.frame_count_used[0, 1]
    assert np.all(on.frame_count_used <= off.frame_count_used)


def test_estimate_matches_geometry_at_20db():
    scene = paper_table1_scenes()[1]
    sig = synth_signals(scene, SignalModel(snr_db=20.0, rng_seed=6),
                        duration_s=2.0, sample_rate=FS)
    diameter = max(np.linalg.norm(p - q)
                   for p in scene.mics for q in scene.mics)
    td = estimate_tdoa_matrix(sig, default_config(), vad="on",
                              max_distance_m=1.05 * diameter,
                              sound_speed=scene.sound_speed)
    truth = true_rd_full(scene).values / scene.sound_speed
    upper = np.triu_indices(scene.mic_count, k=1)
    err = np.abs(td.values[upper] - truth[upper])
    assert np.mean(err <= 2.0 / FS) >= 0.9


def test_max_lag_must_fit_frame():
    base = np.random.default_rng(4).standard_normal(FS)
    sig = MicSignals(channels=np.vstack([base, base]), sample_rate=FS)
    with pytest.raises(ValueError, match="max"):
        estimate_tdoa_matrix(sig, default_config(), vad="off",
                             max_distance_m=300.0)


# ---------------------------------------------------------------------------
# energy reference policies


def test_reference_energy_policies():
    rng = np.random.default_rng(5)
    base = rng.standard_normal((4, FS))
    base[3] = 2.0 * base[0]
    sig = MicSignals(channels=base, sample_rate=FS)
    assert select_reference_energy(sig, policy="max_energy") == 3

    flat = MicSignals(channels=np.ones((4, FS)), sample_rate=FS)
    assert select_reference_energy(flat, policy="max_energy") == 0
    assert select_reference_energy(flat, policy="min_energy") == 0


def test_max_energy_tracks_distance_gain():
    scene = paper_table1_scenes()[1]
    sig = synth_signals(scene,
                        SignalModel(gain_law="inverse_distance",
                                    snr_db=30.0, rng_seed=7),
                        duration_s=1.0, sample_rate=FS)
    nearest = int(np.argmin(scene.source_distances()))
    farthest = int(np.argmax(scene.source_distances()))
    assert select_reference_energy(sig, policy="max_energy") == nearest
    assert select_reference_energy(sig, policy="min_energy") == farthest
