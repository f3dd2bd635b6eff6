"""Pilot-aided feedforward phase recovery and quadrature remapping.

Sign conventions, fixed once here and used everywhere:

* A pulse measured at LO-vs-signal phase offset ``phi`` lands at angle
  ``theta_enc - phi`` in Bob's phase space (``theta_enc`` is the encoded
  phase, 0 for reference pulses).
* :func:`estimate_phase` therefore returns ``-atan2(p, x)``, which recovers
  ``+phi`` from a reference pulse.
* Raw signal phases are the plain ``atan2(p, x)`` (i.e. ``theta_enc - phi``),
  so the correction is an addition: ``corrected = raw + interpolated_phi``.
* :func:`remap_quadratures` rotates by ``+phi`` and undoes the measurement
  rotation.

All angles live in the principal range (-pi, pi].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, EstimationError, ScheduleError

TWO_PI = 2.0 * math.pi

#: Above this residual variance (rad^2) the linearised circular statistics
#: used by :func:`residual_variance` stop being trustworthy.
CIRCULAR_LINEAR_LIMIT = 0.5


def wrap_phase(phi):
    """Reduce angle(s) to the principal range (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    wrapped = np.mod(phi, TWO_PI)
    wrapped = np.where(wrapped > math.pi, wrapped - TWO_PI, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class PhaseEstimate:
    """Phase recovered from one reference pulse."""

    value: float
    source_index: int

    def __post_init__(self) -> None:
        if not (-math.pi < self.value <= math.pi) or not math.isfinite(self.value):
            raise DomainError(
                f"phase estimate {self.value} outside principal range (-pi, pi]"
            )


def estimate_phase(x_r: float, p_r: float) -> float:
    """LO phase offset from one reference-pulse measurement, ``-atan2(p, x)``."""
    if x_r == 0.0 and p_r == 0.0:
        raise EstimationError("phase of the zero vector is undefined")
    return wrap_phase(-math.atan2(p_r, x_r))


def interpolate_phase(phi_i: float, phi_next: float) -> float:
    """Midpoint of the shorter circular arc from ``phi_i`` to ``phi_next``.

    Equivalent to adding half the unwrapped reference-to-reference advance,
    i.e. the constant-detuning interpolation with the mean beat frequency
    read off the two neighbouring references.  Valid while the true advance
    per reference gap stays below pi (beat frequency below ``1/(4*T_d)``).
    An exactly antipodal pair is broken towards the positive direction.
    """
    for name, value in (("phi_i", phi_i), ("phi_next", phi_next)):
        if not (-math.pi < value <= math.pi):
            raise DomainError(f"{name}={value} outside principal range (-pi, pi]")
    delta = wrap_phase(phi_next - phi_i)
    return wrap_phase(phi_i + 0.5 * delta)


def remap_quadratures(x_b, p_b, phi):
    """Rotate measured quadratures by ``+phi`` (scalars or arrays)."""
    c, s = np.cos(phi), np.sin(phi)
    x = x_b * c - p_b * s
    p = x_b * s + p_b * c
    if np.ndim(x) == 0:
        return float(x), float(p)
    return x, p


def correct_phases(raw, references: Sequence[PhaseEstimate]) -> np.ndarray:
    """Apply the feedforward correction to raw signal phases.

    ``references`` must hold one more entry than ``raw``: signal ``i`` sits
    midway between references ``i`` and ``i+1``, and its corrected phase is
    ``raw[i] + midpoint(ref[i], ref[i+1])`` reduced to the principal range.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1:
        raise ScheduleError("raw phases must be a 1-d sequence")
    if len(references) != raw.size + 1:
        raise ScheduleError(
            f"need len(raw)+1 references, got {len(references)} for {raw.size} signals"
        )
    ref_values = np.array(
        [r.value if isinstance(r, PhaseEstimate) else float(r) for r in references]
    )
    midpoints = _circular_midpoints(ref_values)
    return wrap_phase(raw + midpoints)


def _circular_midpoints(ref_values: np.ndarray) -> np.ndarray:
    deltas = wrap_phase(np.diff(ref_values))
    return wrap_phase(ref_values[:-1] + 0.5 * deltas)


def predicted_sigma_phi(var_s: float, var_l: float) -> float:
    """Phase-recovery noise variance from the two lasers' per-delay variances."""
    if var_s < 0 or var_l < 0:
        raise DomainError(f"variances must be >= 0, got ({var_s}, {var_l})")
    return 0.5 * (var_s + var_l)


def residual_variance(corrected, encoded) -> dict[float, float]:
    """Circular-aware variance of (corrected - encoded), per encoded symbol.

    Deviations are wrapped, centred on their circular mean per symbol group,
    and the linear sample variance of the wrapped residuals is returned.  The
    linearisation is only valid for variances well below 1 rad^2; a warning
    is emitted above :data:`CIRCULAR_LINEAR_LIMIT`.
    """
    corrected = np.asarray(corrected, dtype=float)
    encoded = np.asarray(encoded, dtype=float)
    if corrected.shape != encoded.shape or corrected.ndim != 1:
        raise ScheduleError("corrected and encoded must be 1-d arrays of equal length")
    if corrected.size == 0:
        raise EstimationError("cannot estimate variance of an empty sequence")

    variances: dict[float, float] = {}
    for symbol in np.unique(encoded):
        deviations = wrap_phase(corrected[encoded == symbol] - symbol)
        if deviations.size < 2:
            raise EstimationError(
                f"symbol group {symbol} has {deviations.size} samples, need >= 2"
            )
        mean = math.atan2(np.mean(np.sin(deviations)), np.mean(np.cos(deviations)))
        centred = wrap_phase(deviations - mean)
        var = float(np.var(centred, ddof=1))
        if var > CIRCULAR_LINEAR_LIMIT:
            warnings.warn(
                f"residual variance {var:.3f} rad^2 exceeds the circular-to-linear "
                "approximation range",
                stacklevel=2,
            )
        variances[float(symbol)] = var
    return variances


def sigma_phi_from_quadratures(samples) -> float:
    """Phase-noise variance from remapped quadratures of an unmodulated train.

    Implements ``(Var[p'] - Var[x']) / mean[x']^2``.  ``samples`` is either a
    sequence of objects with ``x``/``p`` attributes or an ``(x, p)`` pair of
    arrays.  Requires at least 100 samples and a mean X quadrature that is
    resolvable above its own standard error.
    """
    x, p = _as_xy_arrays(samples)
    n = x.size
    if n < 100:
        raise EstimationError(f"need >= 100 samples, got {n}")
    mean_x = float(np.mean(x))
    var_x = float(np.var(x, ddof=1))
    var_p = float(np.var(p, ddof=1))
    if mean_x**2 <= 25.0 * var_x / n:
        raise EstimationError(
            "mean X quadrature indistinguishable from 0; estimator ill-conditioned"
        )
    return (var_p - var_x) / mean_x**2


def _as_xy_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, tuple) and len(samples) == 2:
        return np.asarray(samples[0], float), np.asarray(samples[1], float)
    xs = np.array([s.x for s in samples], dtype=float)
    ps = np.array([s.p for s in samples], dtype=float)
    return xs, ps


@dataclass(frozen=True)
class RecoveryDiagnostics:
    """Bookkeeping from one feedforward pass over a pulse train."""

    n_signals_total: int
    n_dropped_boundary: int
    n_antipodal_ties: int


@dataclass(frozen=True)
class RecoveredRun:
    """Vectorised result of recovering one simulated run.

    Arrays cover the usable signals only (the final signal of a run has no
    following reference and is dropped; see ``diagnostics``).
    """

    signal_x: np.ndarray
    signal_p: np.ndarray
    raw_phases: np.ndarray
    interpolated_phases: np.ndarray
    corrected_phases: np.ndarray
    remapped_x: np.ndarray
    remapped_p: np.ndarray
    true_phases: np.ndarray
    diagnostics: RecoveryDiagnostics


def estimate_reference_phases(samples) -> list[PhaseEstimate]:
    """Phase estimates for every reference pulse in a run, schedule order."""
    return [
        PhaseEstimate(value=estimate_phase(s.x, s.p), source_index=s.index)
        for s in samples
        if s.kind == "reference"
    ]


def recover_run(samples) -> RecoveredRun:
    """Run the full feedforward pipeline over one simulated pulse train.

    Expects the strict R S R S ... schedule produced by
    :func:`llo_sim.link_sim.simulate_run`.  Signal ``i`` is interpolated from
    references ``i`` and ``i+1``; the last signal is dropped for lack of a
    following reference.
    """
    refs = [s for s in samples if s.kind == "reference"]
    sigs = [s for s in samples if s.kind == "signal"]
    if len(refs) != len(sigs):
        raise ScheduleError(
            f"expected alternating schedule, got {len(refs)} references "
            f"and {len(sigs)} signals"
        )
    if len(sigs) < 2:
        raise ScheduleError("need at least 2 signal/reference pairs")

    n_usable = len(sigs) - 1
    sig_x = np.array([s.x for s in sigs[:n_usable]])
    sig_p = np.array([s.p for s in sigs[:n_usable]])
    true_phases = np.array(
        [math.nan if s.true_phase is None else s.true_phase for s in sigs[:n_usable]]
    )

    ref_values = np.array([estimate_phase(s.x, s.p) for s in refs])
    deltas = wrap_phase(np.diff(ref_values))
    n_ties = int(np.count_nonzero(deltas == math.pi))
    interpolated = wrap_phase(ref_values[:-1] + 0.5 * deltas)

    raw = np.arctan2(sig_p, sig_x)
    corrected = wrap_phase(raw + interpolated)
    remapped_x, remapped_p = remap_quadratures(sig_x, sig_p, interpolated)

    return RecoveredRun(
        signal_x=sig_x,
        signal_p=sig_p,
        raw_phases=raw,
        interpolated_phases=interpolated,
        corrected_phases=corrected,
        remapped_x=remapped_x,
        remapped_p=remapped_p,
        true_phases=true_phases,
        diagnostics=RecoveryDiagnostics(
            n_signals_total=len(sigs),
            n_dropped_boundary=1,
            n_antipodal_ties=n_ties,
        ),
    )
