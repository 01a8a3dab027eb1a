"""Linear least squares for ``A + B sin^2(2 theta)`` scans and dip visibility."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from ._validation import check_finite
from .estimate import Estimate, Method, ratio_from_totals
from .exceptions import (DegenerateDesignError, DomainError, NoPhaseResolvableError,
                         NormalizationError)


@dataclass(frozen=True)
class ScanPoint:
    theta_rad: float
    f_est: float
    f_err: float

    def __post_init__(self):
        check_finite(self.theta_rad, "theta_rad")
        check_finite(self.f_est, "f_est")
        if not check_finite(self.f_err, "f_err") >= 0:
            raise DomainError("f_err must be >= 0")


@dataclass(frozen=True)
class Sin2Fit:
    a: float
    b: float
    a_err: float
    b_err: float
    chi2: float
    n_points: int
    weighted: bool = False

    def predict(self, theta):
        return self.a + self.b * np.sin(2 * np.asarray(theta, dtype=float)) ** 2

    def to_dict(self):
        return {"a": self.a, "b": self.b, "a_err": self.a_err, "b_err": self.b_err,
                "chi2": self.chi2, "n_points": self.n_points, "weighted": self.weighted}


def _solve_normal_equations(x, y, w):
    """Closed-form weighted fit of ``y = a + b x``. Returns ``(a, b, cov_unscaled, chi2)``."""
    s = w.sum()
    sx = (w * x).sum()
    sxx = (w * x * x).sum()
    sy = (w * y).sum()
    sxy = (w * x * y).sum()
    det = s * sxx - sx * sx
    # det / s^2 is the weighted variance of x, and x = sin^2(2 theta) lies in [0, 1]
    if not det / (s * s) > 1e-12:
        raise DegenerateDesignError("design is rank deficient: need >= 2 distinct sin^2(2 theta)")
    a = (sxx * sy - sx * sxy) / det
    b = (s * sxy - sx * sy) / det
    cov = np.array([[sxx, -sx], [-sx, s]]) / det
    resid = y - a - b * x
    chi2 = float((w * resid * resid).sum())
    return a, b, cov, chi2


def fit_sin2(points, weighted=True) -> Sin2Fit:
    """Fit ``f = A + B sin^2(2 theta)`` by exact linear least squares.

    With ``weighted=True`` points carry weights ``1/f_err^2`` and the
    parameter errors come straight from the inverse normal matrix. Unweighted
    fits scale that matrix by the residual variance ``chi2 / (n - 2)``.
    """
    points = list(points)
    if len(points) < 3:
        raise DegenerateDesignError("need at least 3 points")
    theta = np.array([p.theta_rad for p in points])
    y = np.array([p.f_est for p in points])
    x = np.sin(2 * theta) ** 2
    if weighted:
        err = np.array([p.f_err for p in points])
        if np.any(err <= 0):
            raise DomainError("weighted fit needs every f_err > 0")
        w = 1.0 / err ** 2
    else:
        w = np.ones_like(x)
    a, b, cov, chi2 = _solve_normal_equations(x, y, w)
    if not weighted:
        cov = cov * (chi2 / (len(points) - 2) if len(points) > 2 else 0.0)
    return Sin2Fit(float(a), float(b), math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]),
                   chi2, len(points), weighted)


def phi_from_b(b, b_err=0.0):
    """``|phi|`` in degrees from the amplitude ``B = sin^2(phi/2)``, with its propagated error."""
    b = check_finite(b, "b")
    if b <= 0:
        raise NoPhaseResolvableError(f"amplitude {b!r} <= 0 carries no phase information")
    if b > 1:
        raise DomainError(f"amplitude {b!r} exceeds 1")
    phi = 2 * math.asin(math.sqrt(b))
    if b == 1:
        err = math.inf if b_err else 0.0
    else:
        err = abs(b_err) / (math.sqrt(b) * math.sqrt(1 - b))
    return math.degrees(phi), math.degrees(err)


def dip_visibility(c0, c_shoulder, errs=(0.0, 0.0)) -> Estimate:
    """Visibility ``1 - c0/c_shoulder`` with errors propagated from ``errs = (err_c0, err_shoulder)``."""
    if c_shoulder <= 0:
        raise NormalizationError("shoulder rate is zero; cannot normalize")
    e0, es = errs
    r = c0 / c_shoulder
    se = math.hypot(e0 / c_shoulder, c0 * es / c_shoulder ** 2)
    return Estimate(1.0 - r, se, Method.POISSON_PROPAGATION)


def dip_visibility_from_series(series) -> Estimate:
    """Visibility from an identical-state run, Poisson errors on total counts."""
    r, se = ratio_from_totals(*series.totals())
    return Estimate(1.0 - r, se, Method.POISSON_PROPAGATION, series.n_periods)


class Sin2Regressor(RegressorMixin, BaseEstimator):
    """Estimator form of :func:`fit_sin2`.

    ``X`` holds polarization angles in radians (one column); ``y`` the measured
    overlaps. ``sample_weight`` plays the role of ``1/f_err^2``.

    Attributes
    ----------
    a_, b_, a_err_, b_err_, chi2_ : float
        Fitted parameters, their standard errors and the weighted residual sum.
    """

    def __init__(self, absolute_sigma=True):
        self.absolute_sigma = absolute_sigma

    def fit(self, X, y, sample_weight=None):
        X, y = validate_data(self, X, y, ensure_min_samples=3, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("X must have exactly one column (theta in radians)")
        x = np.sin(2 * X[:, 0]) ** 2
        w = np.ones_like(x) if sample_weight is None else np.asarray(sample_weight, float)
        if w.shape != x.shape or np.any(w <= 0):
            raise ValueError("sample_weight must be positive with one entry per sample")
        a, b, cov, chi2 = _solve_normal_equations(x, y, w)
        if sample_weight is None or not self.absolute_sigma:
            cov = cov * chi2 / (len(x) - 2)
        self.a_, self.b_ = float(a), float(b)
        self.a_err_, self.b_err_ = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])
        self.chi2_ = chi2
        return self

    def predict(self, X):
        check_is_fitted(self, ("a_", "b_"))
        X = validate_data(self, X, reset=False)
        return self.a_ + self.b_ * np.sin(2 * X[:, 0]) ** 2

    def phase_deg(self):
        """``(|phi|, error)`` in degrees from the fitted amplitude."""
        check_is_fitted(self, "b_")
        return phi_from_b(abs(self.b_), self.b_err_)
