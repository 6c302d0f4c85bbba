import numpy as np
import pytest

from cvpost import emulator
from cvpost.emulator import (
    ExperimentParams,
    dump_samples,
    estimate,
    bench_params,
    postselect,
    predict_records,
    predict_stats,
    run_experiment,
    synthesize,
)
from cvpost.errors import EmptySelectionError


def quiet_params(**overrides):
    """All efficiencies 1, no electronic noise, vacuum-like everything."""
    base = dict(
        R=0.75,
        v_in=(1.0, 1.0),
        anc_sqz_db=0.0,
        anc_antisqz_db=0.0,
        eta_vis=1.0,
        eta_det=1.0,
        eta_hom=1.0,
        gate_elec_db=-300.0,
        hom_elec_db=-300.0,
        gamma_plus=0.0,
        gamma_minus=0.0,
        x0=0.01,
        n_samples=200_000,
        rng_seed=11,
    )
    base.update(overrides)
    return ExperimentParams(**base)


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------


def test_vacuum_in_vacuum_out():
    stream = synthesize(quiet_params())
    n = stream.shape[0]
    sigma_var = np.sqrt(2.0 / n)  # sampling error of a unit-variance estimate
    for col in range(3):
        assert abs(stream[:, col].var(ddof=1) - 1.0) < 3 * sigma_var
        assert abs(stream[:, col].mean()) < 3 / np.sqrt(n)


def test_stream_is_seeded_and_deterministic():
    params = bench_params(n_samples=50_000)
    np.testing.assert_array_equal(synthesize(params), synthesize(params))
    other = bench_params(n_samples=50_000, rng_seed=params.rng_seed + 1)
    assert not np.array_equal(synthesize(other), synthesize(params))


def test_gate_record_matches_closed_form_moments():
    # oracle: Gaussian propagation of the same loss model
    params = bench_params(n_samples=400_000)
    mean_pred, cov_pred = predict_records(params)
    stream = synthesize(params)
    n = stream.shape[0]
    for col in range(3):
        v = cov_pred[col, col]
        assert abs(stream[:, col].mean() - mean_pred[col]) < 4 * np.sqrt(v / n)
        assert abs(stream[:, col].var(ddof=1) - v) < 4 * v * np.sqrt(2.0 / n)
    # cross covariance between the transmitted and gate records
    c = np.cov(stream[:, 0], stream[:, 2])[0, 1]
    se = np.sqrt((cov_pred[0, 0] * cov_pred[2, 2] + cov_pred[0, 2] ** 2) / n)
    assert abs(c - cov_pred[0, 2]) < 4 * se


def test_parameter_validation():
    with pytest.raises(ValueError):
        ExperimentParams(R=1.2)
    with pytest.raises(ValueError):
        ExperimentParams(eta_det=0.0)
    with pytest.raises(ValueError):
        ExperimentParams(n_samples=0)
    with pytest.raises(ValueError):
        ExperimentParams(v_in=(1.0, -0.5))


# ---------------------------------------------------------------------------
# Post-selection
# ---------------------------------------------------------------------------


def test_infinite_threshold_keeps_all():
    stream = synthesize(quiet_params(n_samples=10_000))
    kept, prob = postselect(stream, np.inf)
    assert kept.shape == stream.shape
    assert prob == 1.0


def test_selected_gate_mean_is_centred():
    stream = synthesize(quiet_params(n_samples=500_000, x0=0.5))
    kept, _ = postselect(stream, 0.5)
    assert abs(kept[:, 2].mean()) < 3 * 0.5 / np.sqrt(kept.shape[0])


def test_success_probability_matches_gaussian_tail():
    params = bench_params(n_samples=4_000_000)
    stream = synthesize(params)
    _, prob = postselect(stream, params.x0)
    predicted = predict_stats(params).success_prob
    assert abs(prob - predicted) / predicted < 0.05


def test_empty_selection_raises():
    stream = synthesize(quiet_params(n_samples=100))
    with pytest.raises(EmptySelectionError):
        postselect(stream, 1e-9)


# ---------------------------------------------------------------------------
# Estimation
# ---------------------------------------------------------------------------


def test_estimate_requires_enough_samples():
    stream = synthesize(quiet_params(n_samples=5_000))
    with pytest.raises(ValueError):
        estimate(stream, quiet_params(n_samples=5_000))


def test_paper_configuration_bands():
    params = bench_params(n_samples=3_000_000)
    stats = run_experiment(params)
    assert 0.85 <= stats.fidelity_est <= 0.95
    assert stats.fidelity_est > 0.8
    assert 0.45 <= stats.gains.g_minus <= 0.55
    assert 0.70 <= stats.purity_norm <= 0.90
    assert stats.n_selected >= emulator.MIN_SELECTED
    assert stats.gains.ideal_g_plus == pytest.approx(2.0)
    assert stats.gains.ideal_g_minus == pytest.approx(0.5)
    assert any("antisqz" in note for note in stats.notes)
    assert any("SNL units" in note for note in stats.notes)


def test_ideal_limit_gains():
    # lossless, strongly squeezed ancilla: mean gains approach (2, 1/2)
    params = quiet_params(
        anc_sqz_db=-30.0,
        anc_antisqz_db=30.0,
        gamma_plus=0.5,
        gamma_minus=0.5,
        x0=1.0,
        n_samples=1_000_000,
    )
    stats = run_experiment(params)
    assert abs(stats.gains.g_plus - 2.0) < 0.05
    assert abs(stats.gains.g_minus - 0.5) < 0.02


def test_gain_is_nan_without_input_displacement():
    params = quiet_params(x0=1.0, n_samples=100_000)
    stats = run_experiment(params)
    assert np.isnan(stats.gains.g_plus)
    assert np.isnan(stats.gains.g_minus)


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


def test_lossless_run_converges_to_closed_form():
    # efficiencies 1, no electronic noise: the sampler must converge to the
    # Gaussian-engine conditional predictions
    params = quiet_params(
        anc_sqz_db=-4.0,
        anc_antisqz_db=4.0,
        gamma_plus=0.3,
        gamma_minus=0.2,
        x0=0.1,
        n_samples=1_000_000,
    )
    pred = predict_stats(params)
    stats = run_experiment(params)
    n = stats.n_selected
    for got, want in zip(stats.v_out, pred.v_out):
        assert abs(got - want) < 4 * want * np.sqrt(2.0 / n)
    assert abs(stats.fidelity_est - pred.fidelity) < 3 * stats.fidelity_se
    assert abs(stats.purity_norm - pred.purity_norm) < 3 * stats.purity_norm_se


def test_postselection_purifies():
    params = bench_params(n_samples=1_000_000, x0=0.025)
    stream = synthesize(params)
    selected, prob = postselect(stream, params.x0)
    sel_stats = estimate(selected, params, success_prob=prob)
    all_stats = estimate(stream, params)
    assert sel_stats.purity_norm >= all_stats.purity_norm


def test_fidelity_monotone_in_threshold():
    # tightening the window over a decade never hurts the fidelity
    fid, se = [], []
    for x0 in (1.0, 0.5, 0.2, 0.1):
        stats = run_experiment(bench_params(gamma_plus=1.07, x0=x0, n_samples=1_000_000))
        fid.append(stats.fidelity_est)
        se.append(stats.fidelity_se)
    for tight, loose, s_t, s_l in zip(fid[1:], fid[:-1], se[1:], se[:-1]):
        assert tight >= loose - 3 * np.hypot(s_t, s_l)


def test_run_experiment_is_deterministic():
    params = bench_params(n_samples=300_000, x0=0.1)
    a = run_experiment(params)
    b = run_experiment(params)
    assert a.fidelity_est == b.fidelity_est
    assert a.v_out == b.v_out
    assert a.gains == b.gains
    assert a.purity_norm == b.purity_norm
    assert a.success_prob == b.success_prob
    assert a.n_selected == b.n_selected


# ---------------------------------------------------------------------------
# Raw sample dump
# ---------------------------------------------------------------------------


def test_sample_dump_round_trip(tmp_path):
    stream = synthesize(quiet_params(n_samples=500))
    path = tmp_path / "samples.csv"
    dump_samples(stream, path)
    header = path.read_text().splitlines()[0]
    assert header == "x_t_plus,x_t_minus,x_r_plus"
    back = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(back, stream, rtol=1e-6)
