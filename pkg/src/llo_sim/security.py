"""Secret key rates: asymptotic collective-attack bound and composable
finite-size rate.

The asymptotic rate is ``R = f * I_AB - chi_BE`` for reverse reconciliation,
with the mutual information and the Holevo bound evaluated from the standard
Gaussian entangling-cloner covariance model for heterodyne detection with a
trusted detector.  Negative rates are returned as-is so sweep runners can
locate zero crossings.

Finite-size rate
----------------
The composable rate is

    R = (1 - eps_rob) * (beta * I_AB - chi_worst
                         - (1/2n) * [D_aep - D_ent - 2*log2(1/(2*eps_bar))])

with

    D_aep = sqrt(2n) * [(d+1)^2 + 4(d+1)*log2(2/eps_sm^2)
                        + 2*log2(2/(eps^2*eps_sm))] - 4*eps_sm*d/eps
    D_ent = log2(1/eps) - sqrt(8n * log2(4n)^2 * log2(1/eps))

The assignment of the two Delta terms follows their roles in the rate
equation: the O(sqrt(n)) smoothing/discretisation term enters as D_aep and
the entropy term as D_ent.  ``SecurityParams.swap_delta_terms`` exposes the
opposite assignment for sensitivity analysis; it makes the finite-size
correction negative (a rate above the asymptotic one), which is why it is
not the default.

chi_worst plug point
--------------------
The composable proof evaluates Eve's information at worst-case covariance
bounds rather than at the observed parameters.  Their exact construction is
not reproduced here; :func:`worst_case_holevo` is a pluggable stand-in that
evaluates the Holevo bound at the worst corner of a (transmittance,
excess-noise) confidence rectangle built from Gaussian confidence intervals
at level ``eps_pe`` over ``pe_fraction * n`` estimation samples, with the
interval radii scaled by ``pe_radius_scale``.  A scale of 1.0 gives plain
textbook intervals, under which the AEP terms alone set the positivity
threshold (around 1e9 pulses at the reference configuration); the default
:data:`PE_RADIUS_SCALE_DEFAULT` is deliberately more pessimistic, calibrated
so the threshold at the reference configuration (10 km fibre, perfect
detectors, V_A = 1, sigma_phi = 0.04, beta = 0.95) sits near 1e11 pulses.
Callers needing a different bound pass any ``chi_worst(params, n)``
callable to :func:`finite_size_key_rate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scipy.stats import norm

from .errors import ConfigError, DomainError, NumericalDomainError
from .link_sim import ChannelDetector

#: Tolerance below 1 accepted for symplectic eigenvalues before erroring.
SYMPLECTIC_TOL = 1e-9

#: Floor for the pessimistic transmittance bound.
_T_FLOOR = 1e-12

#: Calibrated default for the confidence-radius scale of the chi_worst plug
#: point (see module docstring); 1.0 recovers plain Gaussian intervals.
PE_RADIUS_SCALE_DEFAULT = 190.0


@dataclass(frozen=True)
class EpsilonBudget:
    """Failure-probability budget of the composable proof."""

    eps: float = 1e-20
    eps_bar: float = 1e-21
    eps_sm: float = 1e-21
    eps_pe: float = 1e-41
    eps_cor: float = 1e-41
    eps_ent: float = 1e-41

    def __post_init__(self) -> None:
        for name, value in (
            ("eps", self.eps),
            ("eps_bar", self.eps_bar),
            ("eps_sm", self.eps_sm),
            ("eps_pe", self.eps_pe),
            ("eps_cor", self.eps_cor),
            ("eps_ent", self.eps_ent),
        ):
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must be in (0, 1), got {value}")


@dataclass(frozen=True)
class SecurityParams:
    """Everything needed to evaluate a key rate.

    ``sigma_phi`` is the phase-recovery noise variance; the channel-input
    excess noise it induces is ``V_A * sigma_phi`` (see
    :func:`excess_noise_from_phase`).  ``reconciliation_efficiency`` is the
    ``f`` of the asymptotic rate and the ``beta`` of the finite-size rate.
    """

    modulation_variance: float = 1.0
    reconciliation_efficiency: float = 0.95
    sigma_phi: float = 0.04
    channel: ChannelDetector = field(
        default_factory=lambda: ChannelDetector(
            attenuation_db_per_km=0.2,
            detector_efficiency=0.5,
            electronic_noise_snu=0.1,
        )
    )
    epsilons: EpsilonBudget = field(default_factory=EpsilonBudget)
    discretization: int = 5
    robustness: float = 0.0
    n_pulses: int | None = None
    pe_fraction: float = 0.5
    pe_radius_scale: float = PE_RADIUS_SCALE_DEFAULT
    swap_delta_terms: bool = False

    def __post_init__(self) -> None:
        # V_A = 0 is allowed here (degenerate no-modulation rate checks);
        # GaussianModulation keeps the strict > 0 requirement for simulation.
        if self.modulation_variance < 0:
            raise ConfigError(f"V_A must be >= 0, got {self.modulation_variance}")
        if not 0 < self.reconciliation_efficiency <= 1:
            raise ConfigError(
                "reconciliation efficiency must be in (0, 1], "
                f"got {self.reconciliation_efficiency}"
            )
        if self.sigma_phi < 0:
            raise ConfigError(f"sigma_phi must be >= 0, got {self.sigma_phi}")
        if self.discretization < 1:
            raise ConfigError(f"discretization must be >= 1, got {self.discretization}")
        if not 0 <= self.robustness < 1:
            raise ConfigError(f"robustness must be in [0, 1), got {self.robustness}")
        if not 0 < self.pe_fraction < 1:
            raise ConfigError(f"pe_fraction must be in (0, 1), got {self.pe_fraction}")
        if not self.pe_radius_scale > 0:
            raise ConfigError(
                f"pe_radius_scale must be > 0, got {self.pe_radius_scale}"
            )

    @property
    def V(self) -> float:
        """Total signal variance V = V_A + 1 (SNU)."""
        return self.modulation_variance + 1.0

    @property
    def excess_noise(self) -> float:
        return excess_noise_from_phase(self.modulation_variance, self.sigma_phi)


@dataclass(frozen=True)
class NoiseBudget:
    """Channel/detection noise decomposition referred to the channel input."""

    excess_noise: float
    chi_line: float
    chi_het: float
    chi_tot: float

    def __post_init__(self) -> None:
        inv_t = self.chi_line + 1.0 - self.excess_noise
        expected_tot = self.chi_line + self.chi_het * inv_t
        if not math.isclose(self.chi_tot, expected_tot, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError(
                f"inconsistent noise budget: chi_tot={self.chi_tot} but "
                f"chi_line + chi_het/T = {expected_tot}"
            )

    @classmethod
    def from_channel(
        cls, channel: ChannelDetector, excess_noise: float
    ) -> "NoiseBudget":
        if excess_noise < 0:
            raise DomainError(f"excess noise must be >= 0, got {excess_noise}")
        t = channel.transmittance
        eta = channel.detector_efficiency
        nu = channel.electronic_noise_snu
        chi_line = 1.0 / t - 1.0 + excess_noise
        chi_het = (1.0 + (1.0 - eta) + 2.0 * nu) / eta
        return cls(
            excess_noise=excess_noise,
            chi_line=chi_line,
            chi_het=chi_het,
            chi_tot=chi_line + chi_het / t,
        )


def excess_noise_from_phase(v_a: float, sigma_phi: float) -> float:
    """Channel-input excess noise induced by phase-recovery noise."""
    if v_a < 0 or sigma_phi < 0:
        raise DomainError(f"inputs must be >= 0, got ({v_a}, {sigma_phi})")
    return v_a * sigma_phi


def g_function(x: float) -> float:
    """Bosonic entropy function G(x) = (x+1)log2(x+1) - x log2 x, G(0) = 0."""
    if x < 0:
        raise DomainError(f"G is undefined for negative argument, got {x}")
    if x == 0.0:
        return 0.0
    return (x + 1.0) * math.log2(x + 1.0) - x * math.log2(x)


def _budget_for(params: SecurityParams) -> NoiseBudget:
    return NoiseBudget.from_channel(params.channel, params.excess_noise)


def mutual_information(
    params: SecurityParams, budget: NoiseBudget | None = None
) -> float:
    """Alice-Bob mutual information (bits/pulse) over both quadratures."""
    budget = budget or _budget_for(params)
    v = params.V
    return math.log2((v + budget.chi_tot) / (1.0 + budget.chi_tot))


def symplectic_eigenvalues(
    params: SecurityParams, budget: NoiseBudget | None = None
) -> tuple[float, float, float, float, float]:
    """The five symplectic eigenvalues of the collective-attack analysis."""
    budget = budget or _budget_for(params)
    t = 1.0 / (budget.chi_line + 1.0 - budget.excess_noise)
    if 1.0 < t < 1.0 + 1e-9:  # guard the round trip through chi_line
        t = 1.0
    return _spectrum(params.V, t, budget.chi_line, budget.chi_het, budget.chi_tot)


def _spectrum(v, t, chi_line, chi_het, chi_tot):
    if not 0 < t <= 1:
        raise DomainError(f"transmittance must be in (0, 1], got {t}")
    a = v * v * (1.0 - 2.0 * t) + 2.0 * t + (t * (v + chi_line)) ** 2
    b = (t * (v * chi_line + 1.0)) ** 2
    lam1, lam2 = _eigenpair(a, b, "lambda_1/2")

    denom = (t * (v + chi_tot)) ** 2
    sqrt_b = math.sqrt(b)
    c = (
        a * chi_het**2
        + b
        + 1.0
        + 2.0 * chi_het * (v * sqrt_b + t * (v + chi_line))
        + 2.0 * t * (v * v - 1.0)
    ) / denom
    d = ((v + sqrt_b * chi_het) ** 2) / denom
    lam3, lam4 = _eigenpair(c, d, "lambda_3/4")
    return lam1, lam2, lam3, lam4, 1.0


def _eigenpair(s, prod, label):
    """Solve lam^2 = (s +- sqrt(s^2 - 4*prod)) / 2 with domain checks.

    The small root is recovered from the root product to avoid the
    cancellation that hits the subtractive formula when ``s^2 >> 4*prod``.
    """
    disc = s * s - 4.0 * prod
    if disc < -SYMPLECTIC_TOL * max(s * s, 1.0):
        raise NumericalDomainError(f"negative discriminant for {label}: {disc}")
    root = math.sqrt(max(disc, 0.0))
    sq_plus = 0.5 * (s + root)
    sq_minus = prod / sq_plus if sq_plus > 0.0 else 0.5 * (s - root)
    lams = []
    for sq in (sq_plus, sq_minus):
        if sq < 1.0 - SYMPLECTIC_TOL:
            raise NumericalDomainError(
                f"unphysical symplectic eigenvalue for {label}: lam^2 = {sq}"
            )
        lams.append(max(math.sqrt(max(sq, 0.0)), 1.0))
    return lams[0], lams[1]


def holevo_bound(params: SecurityParams, budget: NoiseBudget | None = None) -> float:
    """Holevo bound chi_BE (bits/pulse) on Eve's information about Bob."""
    lam1, lam2, lam3, lam4, lam5 = symplectic_eigenvalues(params, budget)
    return (
        g_function((lam1 - 1.0) / 2.0)
        + g_function((lam2 - 1.0) / 2.0)
        - g_function((lam3 - 1.0) / 2.0)
        - g_function((lam4 - 1.0) / 2.0)
        - g_function((lam5 - 1.0) / 2.0)
    )


def asymptotic_key_rate(params: SecurityParams) -> float:
    """Reverse-reconciliation collective-attack rate f*I_AB - chi_BE.

    May be negative; callers decide whether to clamp.
    """
    budget = _budget_for(params)
    return params.reconciliation_efficiency * mutual_information(
        params, budget
    ) - holevo_bound(params, budget)


@dataclass(frozen=True)
class PessimisticBounds:
    """Confidence rectangle for (transmittance, excess noise) after PE."""

    transmittance_low: float
    transmittance_high: float
    excess_noise_low: float
    excess_noise_high: float
    n_estimation_samples: int


def pessimistic_parameter_bounds(params: SecurityParams, n: int) -> PessimisticBounds:
    """Gaussian confidence bounds on (T, excess noise) from ``pe_fraction * n``
    estimation samples at level ``eps_pe``, radii scaled by ``pe_radius_scale``.
    """
    m = int(params.pe_fraction * n)
    if m < 2:
        raise DomainError(f"too few estimation samples: {m}")
    if params.modulation_variance == 0:
        raise DomainError("parameter estimation requires V_A > 0")
    channel = params.channel
    t_chan = channel.transmittance
    eta = channel.detector_efficiency
    nu = channel.electronic_noise_snu
    eps = params.excess_noise

    gain = math.sqrt(t_chan * eta / 2.0)  # amplitude gain Alice -> Bob
    sigma2 = 1.0 + nu + gain * gain * eps  # measured conditional noise
    z = float(norm.isf(params.epsilons.eps_pe / 2.0)) * params.pe_radius_scale

    d_gain = z * math.sqrt(sigma2 / (m * params.modulation_variance))
    d_sigma2 = z * sigma2 * math.sqrt(2.0 / m)

    gain_low = max(gain - d_gain, 0.0)
    gain_high = gain + d_gain
    t_low = max(2.0 * gain_low**2 / eta, _T_FLOOR)
    t_high = min(2.0 * gain_high**2 / eta, 1.0)

    eps_high = (sigma2 + d_sigma2 - 1.0 - nu) / (t_low * eta / 2.0)
    eps_low = max((sigma2 - d_sigma2 - 1.0 - nu) / (t_high * eta / 2.0), 0.0)
    return PessimisticBounds(
        transmittance_low=t_low,
        transmittance_high=t_high,
        excess_noise_low=eps_low,
        excess_noise_high=eps_high,
        n_estimation_samples=m,
    )


def worst_case_holevo(params: SecurityParams, n: int) -> float:
    """Default chi_worst plug point: max Holevo bound over the confidence
    rectangle corners (see module docstring for calibration caveats)."""
    bounds = pessimistic_parameter_bounds(params, n)
    worst = -math.inf
    for t in (bounds.transmittance_low, bounds.transmittance_high):
        for eps in (bounds.excess_noise_low, bounds.excess_noise_high):
            corner_channel = replace(params.channel, transmittance_override=t)
            budget = NoiseBudget.from_channel(corner_channel, eps)
            worst = max(worst, holevo_bound(params, budget))
    return worst


def finite_size_key_rate(
    params: SecurityParams, n: int | None = None, *, chi_worst=None
) -> float:
    """Composable finite-size key rate for ``n`` transmitted pulses.

    ``chi_worst`` is a callable ``(params, n) -> bits`` replacing the default
    :func:`worst_case_holevo`.  May return negative rates.
    """
    if n is None:
        n = params.n_pulses
    if n is None:
        raise ConfigError("n_pulses is required for the finite-size rate")
    n = int(n)
    if n < 1000:
        raise DomainError(f"finite-size rate needs n >= 1e3, got {n}")

    eb = params.epsilons
    d = params.discretization
    delta_aep = (
        math.sqrt(2.0 * n)
        * (
            (d + 1.0) ** 2
            + 4.0 * (d + 1.0) * math.log2(2.0 / eb.eps_sm**2)
            + 2.0 * math.log2(2.0 / (eb.eps**2 * eb.eps_sm))
        )
        - 4.0 * eb.eps_sm * d / eb.eps
    )
    delta_ent = math.log2(1.0 / eb.eps) - math.sqrt(
        8.0 * n * math.log2(4.0 * n) ** 2 * math.log2(1.0 / eb.eps)
    )
    if params.swap_delta_terms:
        delta_aep, delta_ent = delta_ent, delta_aep

    correction = (
        delta_aep - delta_ent - 2.0 * math.log2(1.0 / (2.0 * eb.eps_bar))
    ) / (2.0 * n)

    chi_fn = chi_worst if chi_worst is not None else worst_case_holevo
    chi = chi_fn(params, n)
    i_ab = mutual_information(params)
    return (1.0 - params.robustness) * (
        params.reconciliation_efficiency * i_ab - chi - correction
    )


def key_rate_components(params: SecurityParams) -> dict[str, float]:
    """I_AB, chi_BE and the asymptotic rate in one call (for reporting)."""
    budget = _budget_for(params)
    i_ab = mutual_information(params, budget)
    chi = holevo_bound(params, budget)
    return {
        "mutual_information": i_ab,
        "holevo_bound": chi,
        "asymptotic_rate": params.reconciliation_efficiency * i_ab - chi,
    }
