"""Small argument checks shared across modules."""

import math

from .exceptions import DomainError


def check_finite(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def check_unit_interval(value, name, *, closed=True):
    value = check_finite(value, name)
    ok = 0.0 <= value <= 1.0 if closed else 0.0 < value < 1.0
    if not ok:
        bounds = "[0, 1]" if closed else "(0, 1)"
        raise DomainError(f"{name} must lie in {bounds}, got {value!r}")
    return value


def check_non_negative(value, name):
    value = check_finite(value, name)
    if value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return value


def check_positive(value, name):
    value = check_finite(value, name)
    if value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return value
