"""Recover overlap, purity, spectrum, entropy, distance and multimeter statistics from counts."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DomainError, NormalizationError
from .mcsim import CountSeries, RngStream

LN2 = math.log(2.0)
SPECTRUM_STDERR_CAP = 0.5
_PURITY_FLOOR_EPS = 1e-9


class Method(enum.Enum):
    POISSON_PROPAGATION = "poisson_propagation"
    BOOTSTRAP = "bootstrap"


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    method: Method = Method.POISSON_PROPAGATION
    n_periods: int = 0
    clamped: bool = False

    def __post_init__(self):
        if not math.isfinite(self.stderr) or self.stderr < 0:
            raise DomainError(f"stderr must be finite and >= 0, got {self.stderr!r}")
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "stderr", float(self.stderr))

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "method": self.method.value,
                "n_periods": self.n_periods, "clamped": self.clamped}


@dataclass(frozen=True)
class MultimeterResult:
    """Outcome probabilities for the identical and orthogonal program/data runs."""

    p_one_same: Estimate
    p_two_same: Estimate
    p_one_orth: Estimate
    p_two_orth: Estimate
    fidelity: Estimate


def _check_series(series):
    if not series.dip:
        raise DomainError("no dip records")
    if not series.shoulder:
        raise DomainError("no shoulder records")


def ratio_from_totals(n_dip, t_dip, n_shoulder, t_shoulder):
    """Rate ratio ``C0/C_shoulder`` and its Poisson standard error.

    Inputs are total counts and total seconds; floats are accepted so that
    expected counts can be pushed through the same arithmetic.
    """
    if n_shoulder <= 0:
        raise NormalizationError("shoulder count is zero; cannot normalize")
    scale = t_shoulder / t_dip
    r = n_dip / n_shoulder * scale
    se = scale * math.sqrt(n_dip / n_shoulder ** 2 + n_dip ** 2 / n_shoulder ** 3)
    return r, se


def _overlap_value(series):
    n0, t0, ns, ts = series.totals()
    return 1.0 - ratio_from_totals(n0, t0, ns, ts)[0]


def overlap_estimate(series: CountSeries) -> Estimate:
    """``1 - C0/C_shoulder`` from total counts, unclamped."""
    _check_series(series)
    r, se = ratio_from_totals(*series.totals())
    return Estimate(1.0 - r, se, Method.POISSON_PROPAGATION, series.n_periods)


def purity_estimate(series: CountSeries) -> Estimate:
    """Purity from a run with the same state in both arms (same arithmetic as the overlap)."""
    return overlap_estimate(series)


def correct_visibility(est: Estimate, visibility) -> Estimate:
    """Divide an overlap-type estimate by a known effective visibility."""
    if not 0 < visibility <= 1:
        raise DomainError(f"visibility must lie in (0, 1], got {visibility!r}")
    return replace(est, value=est.value / visibility, stderr=est.stderr / visibility)


def spectrum_estimate(purity: Estimate):
    """Eigenvalue estimates ``(lambda1, lambda2)`` from a purity estimate.

    The purity is clamped into ``[0.5, 1]`` first; the flag is set when that
    moved it. Near the maximally mixed state the derivative diverges, so the
    standard error is capped at 0.5, the widest spread an eigenvalue can have.
    """
    p = purity.value
    clamped = purity.clamped
    if p < 0.5 or p > 1.0:
        p = min(max(p, 0.5), 1.0)
        clamped = True
    root = math.sqrt(2 * p - 1)
    l1 = 0.5 * (1 + root)
    l2 = 1.0 - l1
    if p <= 0.5 + _PURITY_FLOOR_EPS:
        se = SPECTRUM_STDERR_CAP
    else:
        se = min(purity.stderr / (2 * root), SPECTRUM_STDERR_CAP)
    return tuple(Estimate(lam, se, purity.method, purity.n_periods, clamped) for lam in (l1, l2))


def entropy_estimate(spec) -> Estimate:
    """Von Neumann entropy in nats from eigenvalue estimates.

    The propagated error is ``|ln(l1/l2)| * stderr(l1)``, capped at ``ln 2``
    (the full range of a qubit's entropy) where ``l2`` vanishes.
    """
    e1, e2 = spec
    l1, l2 = e1.value, e2.value
    s = -sum(lam * math.log(lam) for lam in (l1, l2) if lam > 0)
    if e1.stderr == 0:
        se = 0.0
    elif l2 <= 0:
        se = LN2
    else:
        se = min(abs(math.log(l1 / l2)) * e1.stderr, LN2)
    return Estimate(s, se, e1.method, e1.n_periods, e1.clamped or e2.clamped)


def hs_distance_from_estimates(purity_a: Estimate, purity_b: Estimate,
                               overlap_ab: Estimate) -> Estimate:
    """``sqrt(max(0, (P_A + P_B - 2 F_AB)/2))`` with first-order error propagation.

    When the radicand is clamped at zero the derivative is undefined; the
    error then falls back to ``sqrt(stderr(radicand))``, the distance scale
    that noise of that size can produce.
    """
    rad = 0.5 * (purity_a.value + purity_b.value - 2 * overlap_ab.value)
    se_rad = 0.5 * math.sqrt(purity_a.stderr ** 2 + purity_b.stderr ** 2
                             + 4 * overlap_ab.stderr ** 2)
    clamped = rad < 0
    d = math.sqrt(max(rad, 0.0))
    se = se_rad / (2 * d) if d > 0 else math.sqrt(se_rad)
    n = min(purity_a.n_periods, purity_b.n_periods, overlap_ab.n_periods)
    return Estimate(d, se, overlap_ab.method, n, clamped)


def hs_distance_estimate(run_aa: CountSeries, run_bb: CountSeries,
                         run_ab: CountSeries) -> Estimate:
    return hs_distance_from_estimates(purity_estimate(run_aa), purity_estimate(run_bb),
                                      overlap_estimate(run_ab))


def multimeter_outcomes(series: CountSeries):
    """``(p_one, p_two)``: coincidence probability per impinging pair and its complement.

    The shoulder rate is half the impinging-pair rate, so ``p_one = C0 / (2 C_shoulder)``.
    """
    _check_series(series)
    r, se = ratio_from_totals(*series.totals())
    p_one = Estimate(r / 2, se / 2, Method.POISSON_PROPAGATION, series.n_periods)
    p_two = Estimate(1.0 - p_one.value, p_one.stderr, Method.POISSON_PROPAGATION,
                     series.n_periods)
    return p_one, p_two


def multimeter_evaluate(series_same: CountSeries, series_orth: CountSeries) -> MultimeterResult:
    """Average multimeter fidelity ``[p_two(psi, psi) + p_one(psi, psi_perp)] / 2``."""
    one_s, two_s = multimeter_outcomes(series_same)
    one_o, two_o = multimeter_outcomes(series_orth)
    fid = 0.5 * (two_s.value + one_o.value)
    se = 0.5 * math.hypot(two_s.stderr, one_o.stderr)
    n = min(series_same.n_periods, series_orth.n_periods)
    return MultimeterResult(one_s, two_s, one_o, two_o,
                            Estimate(fid, se, Method.POISSON_PROPAGATION, n))


def bootstrap_stderr(series: CountSeries, statistic, n_resamples=1000,
                     stream: RngStream | None = None) -> float:
    """Standard deviation of ``statistic`` over period resamplings.

    Dip and shoulder periods are resampled independently, with replacement.
    """
    if n_resamples < 100:
        raise DomainError("n_resamples must be >= 100")
    _check_series(series)
    rng = (stream or RngStream(0)).generator()
    nd, ns = len(series.dip), len(series.shoulder)
    values = np.empty(n_resamples)
    for k in range(n_resamples):
        idx_d = rng.integers(0, nd, nd)
        idx_s = rng.integers(0, ns, ns)
        resampled = replace(series, dip=[series.dip[i] for i in idx_d],
                            shoulder=[series.shoulder[i] for i in idx_s])
        values[k] = statistic(resampled)
    return float(values.std(ddof=1))


class OverlapEstimator(BaseEstimator):
    """Estimator wrapper around :func:`overlap_estimate`.

    Parameters
    ----------
    stderr_method : {"poisson", "bootstrap"}
        Poisson propagation, or resampling of periods. Bootstrap also captures
        period-to-period variation such as time-mixed preparations.
    n_resamples : int
        Bootstrap resamples.
    random_state : int
        Seed of the bootstrap stream.
    visibility : float or None
        If given, the estimate is divided by this effective visibility.
    """

    def __init__(self, stderr_method="poisson", n_resamples=1000, random_state=0,
                 visibility=None):
        self.stderr_method = stderr_method
        self.n_resamples = n_resamples
        self.random_state = random_state
        self.visibility = visibility

    def fit(self, series, y=None):
        if self.stderr_method not in ("poisson", "bootstrap"):
            raise ValueError(f"unknown stderr_method {self.stderr_method!r}")
        est = overlap_estimate(series)
        if self.stderr_method == "bootstrap":
            se = bootstrap_stderr(series, _overlap_value, self.n_resamples,
                                  RngStream(self.random_state))
            est = replace(est, stderr=se, method=Method.BOOTSTRAP)
        if self.visibility is not None:
            est = correct_visibility(est, self.visibility)
        self.estimate_ = est
        self.value_ = est.value
        self.stderr_ = est.stderr
        return self

    def spectrum(self):
        """Eigenvalue estimates implied by reading the fitted value as a purity."""
        check_is_fitted(self, "estimate_")
        return spectrum_estimate(self.estimate_)

    def entropy(self):
        return entropy_estimate(self.spectrum())
