# tests/python/smoke_test.py
#
# Copyright 2026 rtfdoa authors
#
# Licensed under the Apache License, Version 2.0;
# see http://www.apache.org/licenses/LICENSE-2.0

"""Smoke tests for the python bindings: physics helpers, the simulation ->
feature -> baseline pipeline, and the evaluation utilities."""

import math

import rtfdoa


def test_physics_helpers():
    # Endfire geometry: tau = (r/c) sin(theta).
    tau = rtfdoa.expected_delay(90.0, 0.085, 343.0)
    assert abs(tau * 16000.0 - 3.9650) < 1e-3

    # First wrapping frequency c / (2 r |sin theta|).
    f_wrap = rtfdoa.phase_wrap_frequency(90.0, 0.085, 343.0)
    assert abs(f_wrap - 2017.6) < 0.1
    assert rtfdoa.phase_wrap_frequency(0.0, 0.085) is None

    # Unwrapped free-space phase is linear in frequency.
    p1 = rtfdoa.free_space_rtf_phase(1000.0, 30.0, 0.085)
    p2 = rtfdoa.free_space_rtf_phase(2000.0, 30.0, 0.085)
    assert abs(p2 - 2.0 * p1) < 1e-12
    assert abs(p1 - 2.0 * math.pi * 1000.0 * 0.085 * 0.5 / 343.0) < 1e-12

    assert abs(rtfdoa.wrap_phase(2.0 * math.pi + 0.25) - 0.25) < 1e-12


def test_sim_features_baselines():
    fs = 16000.0
    grid = [-60.0, -30.0, 0.0, 30.0, 60.0]
    truth = 3  # 30 degrees

    h1, h2 = rtfdoa.simulate_ir(
        [6.0, 5.0, 3.0], 0.0, 0.085, grid[truth], 1.5, fs
    )
    assert len(h1) == len(h2) > 0

    src = rtfdoa.synth_source("white", 1.0, fs, seed=7)
    rms = math.sqrt(sum(v * v for v in src) / len(src))
    assert abs(rms - 1.0) < 1e-6

    d1, d2 = rtfdoa.render_mixture(h1, h2, src, fs, snr_db=math.inf, seed=7)
    assert len(d1) == len(d2) == len(src)

    idx, angle = rtfdoa.srp_phat(d1, d2, grid)
    assert (idx, angle) == (truth, grid[truth])
    idx, angle = rtfdoa.music(d1, d2, grid)
    assert (idx, angle) == (truth, grid[truth])

    flat, n_frames, n_bins = rtfdoa.rtf_phase_frames(d1, d2, fs)
    assert n_bins == 127
    assert len(flat) == n_frames * n_bins
    assert all(-1.0 <= v <= 1.0 for v in flat)

    seq = rtfdoa.phase_sequence(d1, d2, fs, start=0, seq_len=31)
    assert len(seq) == 127 * 31

    # The sequence's dominant inter-channel lag matches the geometry.
    rad = [v * math.pi for v in seq]
    lags, lags_s, profile = rtfdoa.delay_analysis(rad, 127, 31)
    want = round(3.9650 * math.sin(math.radians(grid[truth])))
    assert all(l == want for l in lags)
    assert len(profile) == 256

    assert rtfdoa.expected_sequence_count(5.0, fs, 256, 31) == 594


def test_eval_helpers():
    assert rtfdoa.mae([25.0, 20.0], [20.0, 20.0]) == 2.5
    assert rtfdoa.accuracy([1, 2, 3], [1, 2, 0]) == 200.0 / 3.0

    seqs = [[0.0] * (127 * 31)]
    hist = rtfdoa.phase_histogram(seqs, 127, 31, bins=64)
    assert abs(sum(hist) - 1.0) < 1e-12
    assert hist[32] == 1.0  # all mass in the bin holding zero phase


if __name__ == "__main__":
    test_physics_helpers()
    test_sim_features_baselines()
    test_eval_helpers()
    print("smoke ok")
