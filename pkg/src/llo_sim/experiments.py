"""Scenario runners wiring the simulation chain into reproducible studies.

Five studies are provided: the binary phase-encoding run with feedforward
correction, the weak-reference photon-number sweep, the quantum-signal
remapping run, the delayed self-interference laser-noise sweep, and the two
key-rate sweeps (distance and pulse count).

Every Monte Carlo experiment runs as independent sub-batches with sub-seeds
derived from the master seed, so results are bit-identical for a given seed
regardless of thread count; metric standard errors come from the batch
spread.  Results are written as JSON (metadata + metrics) and CSV (series),
named ``<experiment>-<seed>.{json,csv}``.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.stats import chi2

from . import __version__
from ._seeding import seed_sequence
from .errors import DomainError
from .link_sim import (
    BPSKModulation,
    ChannelDetector,
    NoModulation,
    PulseTrainConfig,
    RunSeeds,
    simulate_run,
)
from .noise_models import LaserModel, phase_noise_variance, simulate_self_interference
from .phase_recovery import (
    predicted_sigma_phi,
    recover_run,
    residual_variance,
    sigma_phi_from_quadratures,
)
from .security import SecurityParams, asymptotic_key_rate, finite_size_key_rate

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Result containers and writers


@dataclass(frozen=True)
class Metric:
    """One scalar result.  ``exact=True`` marks values computed without Monte
    Carlo uncertainty (closed forms, deterministic statistics of a fixed run);
    everything else carries a standard error from >= 10 sub-batches."""

    value: float
    stderr: float | None = None
    exact: bool = False


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    scalar_metrics: dict[str, Metric]
    series_columns: tuple[str, ...]
    series_rows: list[tuple]
    metadata: dict


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    return obj


def result_to_json(result: ExperimentResult) -> str:
    payload = {
        "name": result.name,
        "metrics": {
            name: {
                "value": _json_safe(m.value),
                "stderr": _json_safe(m.stderr) if m.stderr is not None else None,
                "exact": m.exact,
            }
            for name, m in result.scalar_metrics.items()
        },
        "metadata": _json_safe(result.metadata),
    }
    return json.dumps(payload, indent=2) + "\n"


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def result_to_csv(result: ExperimentResult) -> str:
    lines = [",".join(result.series_columns)]
    for row in result.series_rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_result(result: ExperimentResult, output_dir) -> tuple[Path, Path]:
    """Write ``<name>-<seed>.json`` and ``.csv`` under ``output_dir``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{result.name}-{result.metadata['seed']}"
    json_path = out / f"{stem}.json"
    csv_path = out / f"{stem}.csv"
    json_path.write_text(result_to_json(result), encoding="utf-8")
    csv_path.write_text(result_to_csv(result), encoding="utf-8")
    return json_path, csv_path


# ---------------------------------------------------------------------------
# Statistics helpers


def batch_metric(values: Sequence[float]) -> Metric:
    """Mean of per-batch estimates with the standard error of that mean."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise DomainError("need >= 2 batches for a standard error")
    return Metric(
        value=float(arr.mean()),
        stderr=float(arr.std(ddof=1) / math.sqrt(arr.size)),
    )


def linear_fit(x, y) -> tuple[float, float, float]:
    """Ordinary least squares line: returns (slope, intercept, r_squared)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.size != y.size or x.size < 2:
        raise DomainError("need >= 2 points of equal length")
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residuals**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def uniformity_pvalue(phases, *, n_bins: int = 10, stride: int = 100) -> float:
    """Chi-square p-value for uniformity of phases on [0, 2*pi).

    Consecutive pulses of a run are serially correlated (the beat phase is a
    random walk), which would inflate a naive chi-square statistic; the test
    therefore thins the sequence to every ``stride``-th phase, which is
    decorrelated at the default experiment parameters.
    """
    ph = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    thinned = ph[::stride]
    if thinned.size < 5 * n_bins:
        raise DomainError(
            f"too few decorrelated samples ({thinned.size}) for {n_bins} bins"
        )
    counts, _ = np.histogram(thinned, bins=n_bins, range=(0.0, TWO_PI))
    expected = thinned.size / n_bins
    stat = float(((counts - expected) ** 2 / expected).sum())
    return float(chi2.sf(stat, n_bins - 1))


def _map_ordered(fn: Callable, args: Sequence, threads: int | None) -> list:
    """Apply ``fn`` over ``args`` preserving order; ``threads=None`` uses the
    available parallelism.  Results are identical at any thread count."""
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, args))


def _batch_sizes(total: int, n_batches: int) -> list[int]:
    base, extra = divmod(total, n_batches)
    if base < 2:
        raise DomainError(f"{total} pairs cannot fill {n_batches} batches")
    return [base + (1 if i < extra else 0) for i in range(n_batches)]


def _pooled_group_variance(corrected, encoded) -> tuple[dict[float, float], float]:
    """Per-symbol circular residual variances plus their pooled value."""
    groups = residual_variance(corrected, encoded)
    encoded = np.asarray(encoded)
    num = 0.0
    dof = 0
    for symbol, var in groups.items():
        size = int(np.count_nonzero(encoded == symbol))
        num += (size - 1) * var
        dof += size - 1
    return groups, num / dof


# ---------------------------------------------------------------------------
# Default experimental rig (bench-measured lasers and detector)


def default_signal_laser() -> LaserModel:
    return LaserModel.from_delay_variance(0.035, 20e-9)


def default_lo_laser() -> LaserModel:
    return LaserModel.from_delay_variance(0.044, 20e-9, center_detuning_hz=2.3e6)


def default_rig_detector() -> ChannelDetector:
    """Receiver-referenced detection: photon numbers are quoted at the
    receiver, so the channel collapses to unit transmittance."""
    return ChannelDetector(
        transmittance_override=1.0,
        detector_efficiency=0.5,
        electronic_noise_snu=0.83,
    )


# ---------------------------------------------------------------------------
# Binary phase-encoding experiment


@dataclass(frozen=True)
class PhaseExperimentConfig:
    n_pairs: int = 25000
    repetition_period_s: float = 20e-9
    bpsk_phases: tuple[float, float] = (0.0, 1.65)
    signal_photons: float = 1e5
    reference_photons: float = 1e5
    laser_s: LaserModel = field(default_factory=default_signal_laser)
    laser_l: LaserModel = field(default_factory=default_lo_laser)
    detector: ChannelDetector = field(default_factory=default_rig_detector)
    n_batches: int = 10
    histogram_bins: int = 100
    uniformity_bins: int = 10
    uniformity_stride: int = 100


def _shot_noise_prediction(cfg) -> float:
    """Shot-noise contribution to the corrected-phase variance: raw signal
    phase noise plus the midpoint-averaged reference phase noise."""
    det = cfg.detector
    gain = det.transmittance * det.detector_efficiency
    noise = 1.0 + det.electronic_noise_snu
    per_signal = noise / (2.0 * gain * cfg.signal_photons)
    per_reference = noise / (2.0 * gain * cfg.reference_photons)
    return per_signal + 0.5 * per_reference


def run_bpsk_phase_experiment(
    config: PhaseExperimentConfig = PhaseExperimentConfig(),
    seed: int = 0,
    threads: int | None = None,
) -> ExperimentResult:
    """Feedforward correction of a binary-phase-encoded run.

    Emits pre/post-correction phase histograms, per-bit and pooled residual
    variances, the closed-form prediction they should match, and the
    uniformity p-value of the raw phases.
    """
    train_base = PulseTrainConfig(
        repetition_period_s=config.repetition_period_s,
        n_pairs=2,  # per-batch size set below
        signal_photons=config.signal_photons,
        reference_photons=config.reference_photons,
        modulation=BPSKModulation(*config.bpsk_phases),
    )
    lasers = (config.laser_s, config.laser_l)
    sizes = _batch_sizes(config.n_pairs, config.n_batches)

    def worker(i: int):
        train = replace(train_base, n_pairs=sizes[i])
        samples = simulate_run(
            train, lasers, config.detector, RunSeeds.from_seed(seed, "bpsk", i)
        )
        rec = recover_run(samples)
        n_use = rec.corrected_phases.size
        encoded = np.where(
            np.arange(n_use) % 2 == 0, config.bpsk_phases[0], config.bpsk_phases[1]
        )
        groups, pooled = _pooled_group_variance(rec.corrected_phases, encoded)
        return groups, pooled, rec.raw_phases, rec.corrected_phases, encoded, rec.diagnostics

    outputs = _map_ordered(worker, list(range(config.n_batches)), threads)

    bit0, bit1 = config.bpsk_phases
    var_bit0 = batch_metric([out[0][bit0] for out in outputs])
    var_bit1 = batch_metric([out[0][bit1] for out in outputs])
    var_pooled = batch_metric([out[1] for out in outputs])

    raw_all = np.concatenate([out[2] for out in outputs])
    corrected_all = np.concatenate([out[3] for out in outputs])
    encoded_all = np.concatenate([out[4] for out in outputs])

    p_uniform = uniformity_pvalue(
        raw_all, n_bins=config.uniformity_bins, stride=config.uniformity_stride
    )

    laser_var = predicted_sigma_phi(
        phase_noise_variance(config.repetition_period_s, config.laser_s),
        phase_noise_variance(config.repetition_period_s, config.laser_l),
    )
    predicted_total = laser_var + _shot_noise_prediction(config)

    edges = np.linspace(0.0, TWO_PI, config.histogram_bins + 1)
    rows = []
    hists = {}
    for label, phases, mask in (
        ("raw_bit0", raw_all, encoded_all == bit0),
        ("raw_bit1", raw_all, encoded_all == bit1),
        ("corrected_bit0", corrected_all, encoded_all == bit0),
        ("corrected_bit1", corrected_all, encoded_all == bit1),
    ):
        hists[label], _ = np.histogram(np.mod(phases[mask], TWO_PI), bins=edges)
    for b in range(config.histogram_bins):
        rows.append(
            (
                float(edges[b]),
                int(hists["raw_bit0"][b]),
                int(hists["raw_bit1"][b]),
                int(hists["corrected_bit0"][b]),
                int(hists["corrected_bit1"][b]),
            )
        )

    n_dropped = sum(out[5].n_dropped_boundary for out in outputs)
    n_ties = sum(out[5].n_antipodal_ties for out in outputs)
    return ExperimentResult(
        name="phase-exp",
        scalar_metrics={
            "residual_variance_bit0": var_bit0,
            "residual_variance_bit1": var_bit1,
            "residual_variance_pooled": var_pooled,
            "predicted_sigma_phi_lasers": Metric(laser_var, exact=True),
            "predicted_residual_variance": Metric(predicted_total, exact=True),
            "raw_phase_uniformity_pvalue": Metric(p_uniform, exact=True),
        },
        series_columns=(
            "bin_left_rad",
            "raw_bit0",
            "raw_bit1",
            "corrected_bit0",
            "corrected_bit1",
        ),
        series_rows=rows,
        metadata=_metadata("phase-exp", seed, config,
                           dropped_boundary_pulses=n_dropped, antipodal_ties=n_ties),
    )


# ---------------------------------------------------------------------------
# Weak-reference photon-number sweep


@dataclass(frozen=True)
class WeakReferenceSweepConfig:
    photon_numbers: tuple[float, ...] = (10000.0, 1000.0, 100.0)
    n_pairs: int = 25000
    repetition_period_s: float = 20e-9
    bpsk_phases: tuple[float, float] = (0.0, 1.65)
    signal_photons: float = 1e5
    laser_s: LaserModel = field(default_factory=default_signal_laser)
    laser_l: LaserModel = field(default_factory=default_lo_laser)
    detector: ChannelDetector = field(default_factory=default_rig_detector)
    n_batches: int = 10


def run_weak_reference_sweep(
    config: WeakReferenceSweepConfig = WeakReferenceSweepConfig(),
    seed: int = 0,
    threads: int | None = None,
) -> ExperimentResult:
    """Residual phase variance vs reference photon number.

    All sweep points of a batch share the laser trajectories and initial
    phase (common random numbers): only the detection noise is redrawn.
    That mirrors re-detecting one run at different reference powers and keeps
    the sweep's monotonicity free of trajectory-to-trajectory noise.
    """
    lasers = (config.laser_s, config.laser_l)
    sizes = _batch_sizes(config.n_pairs, config.n_batches)

    def worker(task):
        i, point, n_ref = task
        train = PulseTrainConfig(
            repetition_period_s=config.repetition_period_s,
            n_pairs=sizes[i],
            signal_photons=config.signal_photons,
            reference_photons=n_ref,
            modulation=BPSKModulation(*config.bpsk_phases),
        )
        seeds = RunSeeds(
            laser_s=seed_sequence(seed, "weak-ref", i, "laser-s"),
            laser_l=seed_sequence(seed, "weak-ref", i, "laser-l"),
            phase0=seed_sequence(seed, "weak-ref", i, "phase0"),
            modulation=seed_sequence(seed, "weak-ref", i, "modulation"),
            detector=seed_sequence(seed, "weak-ref", i, "detector", point),
        )
        samples = simulate_run(train, lasers, config.detector, seeds)
        rec = recover_run(samples)
        encoded = np.where(
            np.arange(rec.corrected_phases.size) % 2 == 0,
            config.bpsk_phases[0],
            config.bpsk_phases[1],
        )
        _, pooled = _pooled_group_variance(rec.corrected_phases, encoded)
        return pooled

    tasks = [
        (i, point, n_ref)
        for point, n_ref in enumerate(config.photon_numbers)
        for i in range(config.n_batches)
    ]
    pooled = _map_ordered(worker, tasks, threads)

    metrics: dict[str, Metric] = {}
    rows = []
    for point, n_ref in enumerate(config.photon_numbers):
        values = [
            pooled[k] for k, t in enumerate(tasks) if t[1] == point
        ]
        metric = batch_metric(values)
        metrics[f"residual_variance_nref_{n_ref:g}"] = metric
        rows.append((float(n_ref), metric.value, metric.stderr))

    return ExperimentResult(
        name="weak-ref",
        scalar_metrics=metrics,
        series_columns=("reference_photons", "residual_variance", "stderr"),
        series_rows=rows,
        metadata=_metadata("weak-ref", seed, config),
    )


# ---------------------------------------------------------------------------
# Quantum-signal remapping experiment


@dataclass(frozen=True)
class RemapExperimentConfig:
    n_pairs: int = 24000
    repetition_period_s: float = 20e-9
    signal_photons: float = 66.0
    reference_photons: float = 1000.0
    laser_s: LaserModel = field(default_factory=default_signal_laser)
    laser_l: LaserModel = field(default_factory=default_lo_laser)
    detector: ChannelDetector = field(default_factory=default_rig_detector)
    n_batches: int = 10
    scatter_rows: int = 24000
    uniformity_bins: int = 10
    uniformity_stride: int = 100


def run_quantum_remap_experiment(
    config: RemapExperimentConfig = RemapExperimentConfig(),
    seed: int = 0,
    threads: int | None = None,
) -> ExperimentResult:
    """Quadrature remapping of an unmodulated weak-signal train.

    Emits the raw and remapped phase-space scatter, the X/P quadrature noise
    variances in shot-noise units, and the phase-noise variance estimated
    from the P/X variance asymmetry.
    """
    train_base = PulseTrainConfig(
        repetition_period_s=config.repetition_period_s,
        n_pairs=2,
        signal_photons=config.signal_photons,
        reference_photons=config.reference_photons,
        modulation=NoModulation(),
    )
    lasers = (config.laser_s, config.laser_l)
    sizes = _batch_sizes(config.n_pairs, config.n_batches)

    def worker(i: int):
        train = replace(train_base, n_pairs=sizes[i])
        samples = simulate_run(
            train, lasers, config.detector, RunSeeds.from_seed(seed, "remap", i)
        )
        rec = recover_run(samples)
        var_x = float(np.var(rec.remapped_x, ddof=1))
        var_p = float(np.var(rec.remapped_p, ddof=1))
        sigma = sigma_phi_from_quadratures((rec.remapped_x, rec.remapped_p))
        return var_x, var_p, sigma, rec

    outputs = _map_ordered(worker, list(range(config.n_batches)), threads)

    var_x = batch_metric([o[0] for o in outputs])
    var_p = batch_metric([o[1] for o in outputs])
    sigma_phi = batch_metric([o[2] for o in outputs])
    raw_all = np.concatenate([o[3].raw_phases for o in outputs])
    p_uniform = uniformity_pvalue(
        raw_all, n_bins=config.uniformity_bins, stride=config.uniformity_stride
    )

    rows = []
    count = 0
    for o in outputs:
        rec = o[3]
        for k in range(rec.remapped_x.size):
            if count >= config.scatter_rows:
                break
            rows.append(
                (
                    count,
                    float(rec.signal_x[k]),
                    float(rec.signal_p[k]),
                    float(rec.remapped_x[k]),
                    float(rec.remapped_p[k]),
                )
            )
            count += 1

    n_dropped = sum(o[3].diagnostics.n_dropped_boundary for o in outputs)
    return ExperimentResult(
        name="remap-exp",
        scalar_metrics={
            "x_noise_variance_snu": var_x,
            "p_noise_variance_snu": var_p,
            "sigma_phi_estimate": sigma_phi,
            "raw_phase_uniformity_pvalue": Metric(p_uniform, exact=True),
        },
        series_columns=("index", "x_raw", "p_raw", "x_remapped", "p_remapped"),
        series_rows=rows,
        metadata=_metadata("remap-exp", seed, config, dropped_boundary_pulses=n_dropped),
    )


# ---------------------------------------------------------------------------
# Laser-noise (delayed self-interference) sweep


@dataclass(frozen=True)
class LaserNoiseSweepConfig:
    delays_s: tuple[float, ...] = (5e-9, 20e-9, 25e-9)
    n_samples: int = 100000
    laser_s: LaserModel = field(default_factory=default_signal_laser)
    laser_l: LaserModel = field(default_factory=default_lo_laser)
    n_batches: int = 10


def run_laser_noise_sweep(
    config: LaserNoiseSweepConfig = LaserNoiseSweepConfig(),
    seed: int = 0,
    threads: int | None = None,
) -> ExperimentResult:
    """Delayed self-interference variance vs delay, per laser, with the
    linear fit whose slope estimates 2/tau_c."""
    lasers = {"signal": config.laser_s, "lo": config.laser_l}
    per_batch = config.n_samples // config.n_batches
    if per_batch < 2:
        raise DomainError("n_samples too small for the configured batches")

    tasks = [
        (label, d_idx, batch)
        for label in lasers
        for d_idx in range(len(config.delays_s))
        for batch in range(config.n_batches)
    ]

    def worker(task):
        label, d_idx, batch = task
        return simulate_self_interference(
            lasers[label],
            config.delays_s[d_idx],
            per_batch,
            seed_sequence(seed, "laser-noise", label, d_idx, batch),
        )

    variances = _map_ordered(worker, tasks, threads)

    metrics: dict[str, Metric] = {}
    rows = []
    for label, laser in lasers.items():
        pooled_by_delay = []
        for d_idx, delay in enumerate(config.delays_s):
            values = [
                variances[k]
                for k, t in enumerate(tasks)
                if t[0] == label and t[1] == d_idx
            ]
            metric = batch_metric(values)
            pooled_by_delay.append(metric.value)
            metrics[f"variance_{label}_{delay * 1e9:g}ns"] = metric
            rows.append((label, float(delay), metric.value, metric.stderr))
        slope, intercept, r2 = linear_fit(config.delays_s, pooled_by_delay)
        metrics[f"slope_{label}"] = Metric(slope, exact=True)
        metrics[f"intercept_{label}"] = Metric(intercept, exact=True)
        metrics[f"r_squared_{label}"] = Metric(r2, exact=True)
        metrics[f"expected_slope_{label}"] = Metric(
            0.0 if laser.is_noiseless else 2.0 / laser.coherence_time_s, exact=True
        )

    return ExperimentResult(
        name="laser-noise",
        scalar_metrics=metrics,
        series_columns=("laser", "delay_s", "variance", "stderr"),
        series_rows=rows,
        metadata=_metadata("laser-noise", seed, config),
    )


# ---------------------------------------------------------------------------
# Key-rate sweeps (deterministic formula evaluations)


def run_keyrate_distance_sweep(
    params: SecurityParams,
    l_grid=None,
    seed: int = 0,
) -> ExperimentResult:
    """Asymptotic rate over a fibre-length grid with bisected zero crossing.

    Any ``transmittance_override`` on the channel is cleared so the length
    actually varies the transmittance.  Negative rates are reported as-is.
    """
    if l_grid is None:
        l_grid = np.arange(0.0, 150.0 + 1e-9, 5.0)
    l_grid = np.asarray(l_grid, dtype=float)

    def rate_at(length: float) -> float:
        channel = replace(
            params.channel, fiber_length_km=length, transmittance_override=None
        )
        return asymptotic_key_rate(replace(params, channel=channel))

    rates = np.array([rate_at(length) for length in l_grid])
    rows = [(float(l), float(r)) for l, r in zip(l_grid, rates)]

    crossing = math.nan
    for k in range(len(l_grid) - 1):
        if rates[k] > 0.0 >= rates[k + 1]:
            lo, hi = float(l_grid[k]), float(l_grid[k + 1])
            while hi - lo > 0.1:
                mid = 0.5 * (lo + hi)
                if rate_at(mid) > 0.0:
                    lo = mid
                else:
                    hi = mid
            crossing = 0.5 * (lo + hi)
            break

    return ExperimentResult(
        name="sweep-distance",
        scalar_metrics={
            "secure_range_km": Metric(crossing, exact=True),
            "rate_at_first_grid_point": Metric(float(rates[0]), exact=True),
        },
        series_columns=("fiber_length_km", "rate_bits_per_pulse"),
        series_rows=rows,
        metadata=_metadata("sweep-distance", seed, params,
                           l_grid=[float(v) for v in l_grid]),
    )


def run_finite_size_sweep(
    params: SecurityParams,
    n_grid=None,
    seed: int = 0,
) -> ExperimentResult:
    """Composable finite-size rate vs pulse count; reports the smallest
    ``n`` with a positive rate (bisected to a factor 1.05)."""
    if n_grid is None:
        n_grid = np.logspace(6, 13, 29)
    n_grid = np.asarray(n_grid, dtype=float)

    def rate_at(n: float) -> float:
        return finite_size_key_rate(params, int(n))

    rates = np.array([rate_at(n) for n in n_grid])
    rows = [(float(n), float(r)) for n, r in zip(n_grid, rates)]

    threshold = math.nan
    for k in range(len(n_grid)):
        if rates[k] > 0.0:
            if k == 0:
                threshold = float(n_grid[0])
            else:
                lo, hi = float(n_grid[k - 1]), float(n_grid[k])
                while hi / lo > 1.05:
                    mid = math.sqrt(lo * hi)
                    if rate_at(mid) > 0.0:
                        hi = mid
                    else:
                        lo = mid
                threshold = hi
            break

    return ExperimentResult(
        name="sweep-n",
        scalar_metrics={
            "n_threshold": Metric(threshold, exact=True),
        },
        series_columns=("n_pulses", "rate_bits_per_pulse"),
        series_rows=rows,
        metadata=_metadata("sweep-n", seed, params,
                           n_grid=[float(v) for v in n_grid]),
    )


# ---------------------------------------------------------------------------


def _metadata(name: str, seed: int, config, **extra) -> dict:
    meta = {
        "experiment": name,
        "seed": int(seed),
        "package_version": __version__,
        "config": dataclasses.asdict(config),
    }
    meta.update(extra)
    return meta
