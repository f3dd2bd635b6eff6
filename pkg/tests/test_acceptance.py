"""Acceptance gate: every shipped criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL line
per criterion.  The master seed is fixed; all tolerances are pinned here and
nothing is calibrated at test time.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from llo_sim.experiments import (
    PhaseExperimentConfig,
    RemapExperimentConfig,
    WeakReferenceSweepConfig,
    result_to_csv,
    result_to_json,
    run_bpsk_phase_experiment,
    run_finite_size_sweep,
    run_keyrate_distance_sweep,
    run_laser_noise_sweep,
    run_quantum_remap_experiment,
    run_weak_reference_sweep,
)
from llo_sim.link_sim import ChannelDetector, PulseTrainConfig, simulate_run
from llo_sim.noise_models import LaserModel
from llo_sim.phase_recovery import (
    predicted_sigma_phi,
    remap_quadratures,
    wrap_phase,
)
from llo_sim.security import (
    SecurityParams,
    asymptotic_key_rate,
    holevo_bound,
    mutual_information,
    symplectic_eigenvalues,
)

SEED = 42


def check(criterion: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] {criterion}: {status} ({detail})")
    assert ok, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def bpsk_result():
    start = time.monotonic()
    result = run_bpsk_phase_experiment(PhaseExperimentConfig(), seed=SEED)
    return result, time.monotonic() - start


def reference_security_params(length_km: float) -> SecurityParams:
    return SecurityParams(
        modulation_variance=1.0,
        reconciliation_efficiency=0.95,
        sigma_phi=0.04,
        channel=ChannelDetector(
            attenuation_db_per_km=0.2,
            fiber_length_km=length_km,
            detector_efficiency=0.5,
            electronic_noise_snu=0.1,
        ),
    )


def test_criterion_1_residual_phase_variance(bpsk_result):
    result, elapsed = bpsk_result
    pooled = result.scalar_metrics["residual_variance_pooled"].value
    ok = 0.034 <= pooled <= 0.046 and elapsed < 10.0
    check(
        "1 residual phase variance",
        ok,
        f"variance={pooled:.4f} in [0.034, 0.046], runtime={elapsed:.2f}s < 10s",
    )


def test_criterion_2_analytic_prediction(bpsk_result):
    exact = predicted_sigma_phi(0.035, 0.044)
    result, _ = bpsk_result
    pooled = result.scalar_metrics["residual_variance_pooled"]
    predicted = result.scalar_metrics["predicted_residual_variance"].value
    deviation = abs(pooled.value - predicted)
    ok = exact == 0.0395 and deviation < 3.0 * pooled.stderr
    check(
        "2 analytic sigma_phi check",
        ok,
        f"predicted_sigma_phi(0.035,0.044)={exact}, "
        f"|MC-prediction|={deviation:.2e} < 3*SE={3 * pooled.stderr:.2e}",
    )


def test_criterion_3_shot_noise_floor():
    # Noiseless lasers: the only phase error on a reference estimate is shot
    # noise, about 1/(2*eta*n) = 0.001 at 1000 photons and eta = 0.5.
    lasers = (LaserModel.noiseless(), LaserModel.noiseless(center_detuning_hz=2.3e6))
    train = PulseTrainConfig(20e-9, 100_000, 1000.0, 1000.0)
    det = ChannelDetector(transmittance_override=1.0, detector_efficiency=0.5)
    samples = simulate_run(train, lasers, det, seed=SEED)
    refs = [s for s in samples if s.kind == "reference"]
    estimates = -np.arctan2([s.p for s in refs], [s.x for s in refs])
    errors = wrap_phase(estimates - np.array([s.true_phase for s in refs]))
    variance = float(np.var(errors))
    ok = 0.0007 <= variance <= 0.0013
    check(
        "3 shot-noise floor",
        ok,
        f"phase variance={variance:.5f} within 0.001 +- 30%",
    )


def test_criterion_4_weak_reference_sweep():
    result = run_weak_reference_sweep(WeakReferenceSweepConfig(), seed=SEED)
    values = [row[1] for row in result.series_rows]
    monotone = all(b >= a for a, b in zip(values, values[1:]))
    at_100 = values[-1]
    ok = monotone and 0.045 <= at_100 <= 0.062
    check(
        "4 weak-reference sweep",
        ok,
        f"variances={[f'{v:.4f}' for v in values]} nondecreasing, "
        f"value at 100 photons in [0.045, 0.062]",
    )


def test_criterion_5_laser_noise_linearity():
    result = run_laser_noise_sweep(seed=SEED)
    details = []
    ok = True
    for label in ("signal", "lo"):
        slope = result.scalar_metrics[f"slope_{label}"].value
        expected = result.scalar_metrics[f"expected_slope_{label}"].value
        r2 = result.scalar_metrics[f"r_squared_{label}"].value
        rel = abs(slope - expected) / expected
        ok = ok and rel < 0.05 and r2 > 0.99
        details.append(f"{label}: slope off by {100 * rel:.2f}%, R^2={r2:.5f}")
    check("5 laser-noise linearity", ok, "; ".join(details))


def test_criterion_6_quantum_remap():
    start = time.monotonic()
    result = run_quantum_remap_experiment(RemapExperimentConfig(), seed=SEED)
    elapsed = time.monotonic() - start
    x_noise = result.scalar_metrics["x_noise_variance_snu"].value
    sigma = result.scalar_metrics["sigma_phi_estimate"].value
    ok = (
        abs(x_noise - 1.83) <= 0.15
        and 0.02 <= sigma <= 0.05
        and elapsed < 10.0
    )
    check(
        "6 quantum remap",
        ok,
        f"x-noise={x_noise:.3f} SNU (1.83 +- 0.15), sigma_phi={sigma:.4f} in "
        f"[0.02, 0.05], runtime={elapsed:.2f}s < 10s",
    )


def test_criterion_7_asymptotic_range():
    start = time.monotonic()
    rate_120 = asymptotic_key_rate(reference_security_params(120.0))
    sweep = run_keyrate_distance_sweep(reference_security_params(0.0), seed=SEED)
    crossing = sweep.scalar_metrics["secure_range_km"].value
    elapsed = time.monotonic() - start
    ok = rate_120 > 0.0 and 110.0 < crossing < 140.0 and elapsed < 1.0
    check(
        "7 asymptotic range",
        ok,
        f"R(120km)={rate_120:.2e} > 0, zero crossing={crossing:.1f} km in "
        f"(110, 140), runtime={elapsed:.2f}s < 1s",
    )


def test_criterion_8_finite_size_threshold():
    params = SecurityParams(
        modulation_variance=1.0,
        reconciliation_efficiency=0.95,
        sigma_phi=0.04,
        channel=ChannelDetector(
            attenuation_db_per_km=0.2,
            fiber_length_km=10.0,
            detector_efficiency=1.0,
            electronic_noise_snu=0.0,
        ),
    )
    start = time.monotonic()
    sweep = run_finite_size_sweep(params, seed=SEED)
    threshold = sweep.scalar_metrics["n_threshold"].value
    elapsed = time.monotonic() - start
    ok = 10**10.5 <= threshold <= 10**11.5 and elapsed < 5.0
    check(
        "8 finite-size threshold",
        ok,
        f"n*={threshold:.3e} (log10={math.log10(threshold):.2f}) in "
        f"[10^10.5, 10^11.5], runtime={elapsed:.2f}s < 5s",
    )


def test_criterion_9a_rotation_noise_statistics():
    rng = np.random.default_rng(SEED)
    n = 200_000
    nx = rng.normal(0.0, 1.0, n)
    np_ = rng.normal(0.0, 1.0, n)
    se = math.sqrt(2.0 / (n - 1))
    ok = True
    for phi in (0.9, rng.uniform(-math.pi, math.pi, n)):
        xr, pr = remap_quadratures(nx, np_, phi)
        ok = ok and abs(xr.var(ddof=1) - 1.0) < 3 * se
        ok = ok and abs(pr.var(ddof=1) - 1.0) < 3 * se
        ok = ok and abs(float(np.mean(xr * pr))) < 3.0 / math.sqrt(n)
        # Exact isometry: total second moment is preserved sample by sample.
        total = float(np.mean(xr**2 + pr**2))
        ref = float(np.mean(nx**2 + np_**2))
        ok = ok and abs(total - ref) <= 1e-12 * ref
    # For one fixed rotation the centred variance sum is preserved too.
    xr, pr = remap_quadratures(nx, np_, 0.9)
    var_sum = xr.var() + pr.var()
    ok = ok and abs(var_sum - (nx.var() + np_.var())) <= 1e-12 * var_sum
    check("9a rotation preserves noise statistics", ok, "fixed and random angles")


def test_criterion_9b_remap_round_trip():
    rng = np.random.default_rng(SEED + 1)
    v = rng.standard_normal((2, 10_000))
    worst = 0.0
    for phi in rng.uniform(-math.pi, math.pi, 16):
        x, p = remap_quadratures(v[0], v[1], phi)
        x2, p2 = remap_quadratures(x, p, -phi)
        worst = max(worst, float(np.max(np.abs(x2 - v[0]))), float(np.max(np.abs(p2 - v[1]))))
    ok = worst <= 1e-12
    check("9b remap round trip", ok, f"max deviation {worst:.2e} <= 1e-12")


def test_criterion_9c_symplectic_grid():
    ok = True
    worst = math.inf
    for length in np.arange(0.0, 151.0, 10.0):
        for sigma in np.linspace(0.0, 0.1, 6):
            params = replace(reference_security_params(length), sigma_phi=float(sigma))
            lams = symplectic_eigenvalues(params)
            ok = ok and lams[4] == 1.0
            worst = min(worst, min(lams))
    ok = ok and worst >= 1.0 - 1e-9
    check(
        "9c symplectic spectrum grid",
        ok,
        f"lambda_5 == 1 and min eigenvalue {worst:.12f} >= 1 - 1e-9",
    )


def test_criterion_9d_holevo_bounds_grid():
    ok = True
    for length in np.arange(0.0, 151.0, 10.0):
        for sigma in np.linspace(0.0, 0.1, 6):
            params = replace(reference_security_params(length), sigma_phi=float(sigma))
            chi = holevo_bound(params)
            rate = asymptotic_key_rate(params)
            ok = ok and chi >= 0.0
            ok = ok and rate <= 0.95 * mutual_information(params) + 1e-15
    check("9d Holevo bound positivity and rate cap", ok, "0-150 km x sigma grid")


def test_criterion_9e_raw_phase_uniformity(bpsk_result):
    result, _ = bpsk_result
    pvalue = result.scalar_metrics["raw_phase_uniformity_pvalue"].value
    ok = pvalue > 0.01
    check(
        "9e pre-correction phase uniformity",
        ok,
        f"chi-square p={pvalue:.3f} > 0.01",
    )


def test_criterion_9f_thread_count_invariance():
    config = PhaseExperimentConfig(n_pairs=4000, uniformity_stride=25)
    runs = [
        run_bpsk_phase_experiment(config, seed=SEED, threads=threads)
        for threads in (1, 3)
    ]
    ok = (
        result_to_json(runs[0]) == result_to_json(runs[1])
        and result_to_csv(runs[0]) == result_to_csv(runs[1])
    )
    check("9f seeded rerun bit-identity", ok, "threads=1 vs threads=3")
