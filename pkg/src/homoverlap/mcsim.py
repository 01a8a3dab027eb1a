"""Seeded Monte Carlo of per-period coincidence counts.

Every period draws from its own counter-derived random stream, so a scan can
be split across workers in any order and still reproduce bit for bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import apparatus, qcore
from ._validation import check_finite, check_positive, check_unit_interval
from .apparatus import ApparatusParams
from .exceptions import DomainError


@dataclass(frozen=True)
class RngStream:
    """Identifies an independent random stream by ``(seed, stream_id)``.

    ``stream_id`` is a tuple of non-negative integers used as the spawn key of
    a :class:`numpy.random.SeedSequence`; distinct keys give independent
    streams and equal keys give identical draws.
    """

    seed: int
    stream_id: tuple = ()

    def __post_init__(self):
        if int(self.seed) < 0:
            raise DomainError("seed must be non-negative")
        key = tuple(int(k) for k in self.stream_id)
        if any(k < 0 for k in key):
            raise DomainError("stream_id entries must be non-negative")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream_id", key)

    def child(self, index) -> RngStream:
        return RngStream(self.seed, self.stream_id + (int(index),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(ss))


def derive_stream(seed, scan_point, period) -> RngStream:
    return RngStream(seed, (scan_point, period))


# --- preparations ----------------------------------------------------------

class Mixing(enum.Enum):
    DENSITY_MATRIX = "density_matrix"
    PER_PERIOD_COMPONENT = "per_period_component"


@dataclass(frozen=True)
class PureArm:
    """Linear polarization at ``theta`` radians from vertical."""

    theta: float

    def __post_init__(self):
        check_finite(self.theta, "theta")

    def density(self):
        return qcore.pure_from_angles(self.theta).density()

    def to_dict(self):
        return {"kind": "pure", "theta": self.theta}


@dataclass(frozen=True)
class MixedArm:
    """Mixture ``p|V><V| + (1-p)/2 (|X><X| + |Y><Y|)``."""

    p: float

    def __post_init__(self):
        check_unit_interval(self.p, "p")

    def density(self):
        return qcore.mixed_state(self.p)

    def to_dict(self):
        return {"kind": "mixed", "p": self.p}


@dataclass(frozen=True)
class Preparation:
    """States fed into arm 1 and arm 2, and how mixtures are realized."""

    arm1: PureArm | MixedArm
    arm2: PureArm | MixedArm
    mixing: Mixing = Mixing.DENSITY_MATRIX

    def __post_init__(self):
        for arm in (self.arm1, self.arm2):
            if not isinstance(arm, (PureArm, MixedArm)):
                raise DomainError(f"unsupported arm preparation {arm!r}")
        object.__setattr__(self, "mixing", Mixing(self.mixing))

    @classmethod
    def pure_pair(cls, theta1, theta2):
        return cls(PureArm(theta1), PureArm(theta2))

    @classmethod
    def mixed_pair(cls, p_a, p_b, mixing=Mixing.DENSITY_MATRIX):
        return cls(MixedArm(p_a), MixedArm(p_b), mixing)

    @classmethod
    def program_data(cls, theta_prog, theta_data):
        """Multimeter input: program photon in arm 1, data photon in arm 2."""
        return cls(PureArm(theta_prog), PureArm(theta_data))

    def densities(self):
        return self.arm1.density(), self.arm2.density()

    def to_dict(self):
        return {"arm1": self.arm1.to_dict(), "arm2": self.arm2.to_dict(),
                "mixing": self.mixing.value}


# --- count records ---------------------------------------------------------

@dataclass(frozen=True)
class CountRecord:
    period_index: int
    delay_um: float
    duration_s: float
    coincidences: int

    def __post_init__(self):
        check_finite(self.delay_um, "delay_um")
        check_positive(self.duration_s, "duration_s")
        c = self.coincidences
        if isinstance(c, (bool, np.bool_)) or int(c) != c or c < 0:
            raise DomainError(f"coincidences must be a non-negative integer, got {c!r}")
        object.__setattr__(self, "period_index", int(self.period_index))
        object.__setattr__(self, "delay_um", float(self.delay_um))
        object.__setattr__(self, "duration_s", float(self.duration_s))
        object.__setattr__(self, "coincidences", int(c))


@dataclass(frozen=True)
class CountSeries:
    """Dip (zero delay) and shoulder records of one measurement."""

    dip: list
    shoulder: list
    params_snapshot: ApparatusParams | None = None
    prep_snapshot: Preparation | None = None
    seed: int | None = None

    def totals(self):
        """``(dip counts, dip seconds, shoulder counts, shoulder seconds)``."""
        return (sum(r.coincidences for r in self.dip), sum(r.duration_s for r in self.dip),
                sum(r.coincidences for r in self.shoulder),
                sum(r.duration_s for r in self.shoulder))

    @property
    def n_periods(self):
        return len(self.dip)


class _RateTable:
    """Mean coincidence rates for every combination of arm components.

    Arms are mixtures only under per-period mixing; otherwise each arm has a
    single component, its full density matrix.
    """

    def __init__(self, params: ApparatusParams, prep: Preparation):
        if not isinstance(prep, Preparation):
            raise DomainError("prep must be a Preparation")
        self.params = params
        self.arms = [self._components(arm, prep.mixing) for arm in (prep.arm1, prep.arm2)]
        self._cache = {}

    @staticmethod
    def _components(arm, mixing):
        if isinstance(arm, MixedArm) and mixing is Mixing.PER_PERIOD_COMPONENT:
            weights, comps = qcore.mixture_components(arm.p)
            return np.array(weights), [c.density() for c in comps]
        return None, [arm.density()]

    def rate_hz(self, rng, delay_um):
        idx = tuple(0 if w is None else int(rng.choice(len(w), p=w)) for w, _ in self.arms)
        key = (idx, float(delay_um))
        if key not in self._cache:
            rho1 = self.arms[0][1][idx[0]]
            rho2 = self.arms[1][1][idx[1]]
            self._cache[key] = apparatus.coincidence_rate_hz(self.params, rho1, rho2, delay_um)
        return self._cache[key]


def _draw(table, delay_um, duration_s, stream, period_index):
    rng = stream.generator()
    mu = table.rate_hz(rng, delay_um) * duration_s
    return CountRecord(period_index, delay_um, duration_s, int(rng.poisson(max(mu, 0.0))))


def simulate_period(params: ApparatusParams, prep: Preparation, delay_um, duration_s,
                    stream: RngStream, period_index=0) -> CountRecord:
    """Draw one period's coincidence count from a Poisson distribution.

    Under per-period mixing the component of each mixed arm is drawn first,
    from the same stream.
    """
    duration_s = check_positive(duration_s, "duration_s")
    delay_um = check_finite(delay_um, "delay_um")
    return _draw(_RateTable(params, prep), delay_um, duration_s, stream, period_index)


def run_measurement(params: ApparatusParams, prep: Preparation, n_periods,
                    stream: RngStream, duration_s=1.0) -> CountSeries:
    """Acquire ``n_periods`` dip and ``n_periods`` shoulder periods.

    Period ``i`` uses ``stream.child(i)``; its dip and shoulder draws use the
    children 0 and 1 of that stream.
    """
    n_periods = int(n_periods)
    if n_periods < 1:
        raise DomainError("n_periods must be >= 1")
    duration_s = check_positive(duration_s, "duration_s")
    table = _RateTable(params, prep)
    shoulder_delay = float(params.shoulder_delay_um)
    dip, shoulder = [], []
    for i in range(n_periods):
        sub = stream.child(i)
        dip.append(_draw(table, 0.0, duration_s, sub.child(0), i))
        shoulder.append(_draw(table, shoulder_delay, duration_s, sub.child(1), i))
    return CountSeries(dip, shoulder, params, prep, stream.seed)


def shoulder_mean_counts(params: ApparatusParams, duration_s=1.0) -> float:
    return (params.pair_rate_hz * apparatus.shoulder_prob(params) + params.dark_coinc_hz) * duration_s
