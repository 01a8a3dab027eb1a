"""Exact single- and two-qubit state algebra for polarization photons.

Basis order is fixed everywhere: ``(|V>, |H>)`` for one photon and
``(|VV>, |VH>, |HV>, |HH>)`` for the pair, first factor being arm 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_finite, check_unit_interval
from .exceptions import DomainError

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
POSITIVITY_ATOL = 1e-10
NORM_ATOL = 1e-12
IDENTITY_ATOL = 1e-12


def _frozen(m):
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


def _validate_density(m, dim):
    if m.shape != (dim, dim):
        raise DomainError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("density matrix has non-finite entries")
    if not np.allclose(m, m.conj().T, rtol=0, atol=HERMITIAN_ATOL):
        raise DomainError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > TRACE_ATOL:
        raise DomainError(f"density matrix trace is {tr.real:.15g}, expected 1")
    if np.linalg.eigvalsh(m).min() < -POSITIVITY_ATOL:
        raise DomainError("density matrix is not positive semidefinite")


@dataclass(frozen=True)
class PureQubit:
    """Normalized polarization state ``amp_v |V> + amp_h |H>``."""

    amp_v: complex
    amp_h: complex

    def __post_init__(self):
        amps = (complex(self.amp_v), complex(self.amp_h))
        if not all(math.isfinite(a.real) and math.isfinite(a.imag) for a in amps):
            raise DomainError("amplitudes must be finite")
        norm = abs(amps[0]) ** 2 + abs(amps[1]) ** 2
        if abs(norm - 1.0) > NORM_ATOL:
            raise DomainError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amp_v", amps[0])
        object.__setattr__(self, "amp_h", amps[1])

    @property
    def vector(self):
        return np.array([self.amp_v, self.amp_h], dtype=complex)

    def density(self) -> QubitDensity:
        v = self.vector
        return QubitDensity(np.outer(v, v.conj()))

    def orthogonal(self) -> PureQubit:
        """The state orthogonal to this one (unique up to a global phase)."""
        return PureQubit(-self.amp_h.conjugate(), self.amp_v.conjugate())


@dataclass(frozen=True, eq=False)
class QubitDensity:
    """Validated, read-only 2x2 density matrix."""

    m: np.ndarray

    def __post_init__(self):
        m = _frozen(self.m)
        _validate_density(m, 2)
        object.__setattr__(self, "m", m)

    def __eq__(self, other):
        if not isinstance(other, QubitDensity):
            return NotImplemented
        return bool(np.array_equal(self.m, other.m))

    __hash__ = None

    def allclose(self, other, atol=1e-12):
        return bool(np.allclose(self.m, as_density(other).m, rtol=0, atol=atol))


@dataclass(frozen=True, eq=False)
class JointDensity:
    """Validated, read-only 4x4 two-photon density matrix."""

    m: np.ndarray

    def __post_init__(self):
        m = _frozen(self.m)
        _validate_density(m, 4)
        object.__setattr__(self, "m", m)

    __hash__ = None


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a qubit density matrix, ``lambda1 >= lambda2``."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        l1, l2 = float(self.lambda1), float(self.lambda2)
        if l1 < l2:
            raise DomainError("lambda1 must be >= lambda2")
        if abs(l1 + l2 - 1.0) > 1e-12:
            raise DomainError("eigenvalues must sum to one")
        if not (0.0 <= l2 and l1 <= 1.0):
            raise DomainError("eigenvalues must lie in [0, 1]")
        object.__setattr__(self, "lambda1", l1)
        object.__setattr__(self, "lambda2", l2)


def as_density(state) -> QubitDensity:
    """Accept a :class:`PureQubit`, :class:`QubitDensity` or raw 2x2 array."""
    if isinstance(state, QubitDensity):
        return state
    if isinstance(state, PureQubit):
        return state.density()
    return QubitDensity(np.asarray(state))


# --- state preparation -----------------------------------------------------

def pure_from_angles(theta, phi=0.0) -> PureQubit:
    """Linear polarization at angle ``theta`` with ``e^{i phi}`` on the V amplitude.

    ``theta`` is the half-wave-plate-controlled angle measured from vertical.
    """
    theta = check_finite(theta, "theta")
    phi = check_finite(phi, "phi")
    return PureQubit(np.exp(1j * phi) * math.cos(theta), math.sin(theta))


STATE_V = pure_from_angles(0.0)
STATE_H = pure_from_angles(math.pi / 2)
STATE_A = pure_from_angles(math.pi / 4)
# mixture components |X>, |Y> realized as +-45 degree linear polarizations
STATE_X = pure_from_angles(math.pi / 4)
STATE_Y = pure_from_angles(-math.pi / 4)


def mixture_components(p):
    """Weights and pure components of ``p|V><V| + (1-p)/2 (|X><X| + |Y><Y|)``."""
    p = check_unit_interval(p, "p")
    return (p, (1.0 - p) / 2, (1.0 - p) / 2), (STATE_V, STATE_X, STATE_Y)


def mixed_state(p) -> QubitDensity:
    """Mixture of |V> with the two diagonal polarizations, weight ``p`` on |V>."""
    weights, comps = mixture_components(p)
    m = sum(w * c.density().m for w, c in zip(weights, comps))
    # |X><X| + |Y><Y| is the identity, so the mixture is p P_V + (1-p)/2 I
    closed_form = p * STATE_V.density().m + (1.0 - p) / 2 * np.eye(2)
    if not np.allclose(m, closed_form, rtol=0, atol=IDENTITY_ATOL):
        raise RuntimeError("mixture of V, X, Y does not reduce to p P_V + (1-p)/2 I")
    return QubitDensity(closed_form)


def maximally_mixed() -> QubitDensity:
    return QubitDensity(np.eye(2) / 2)


# --- channels and products -------------------------------------------------

def phase_unitary(phi):
    phi = check_finite(phi, "phi")
    return np.diag([np.exp(1j * phi), 1.0])


def apply_arm_phase(rho, phi) -> QubitDensity:
    """Conjugate ``rho`` by ``diag(e^{i phi}, 1)`` (V picks up the phase)."""
    u = phase_unitary(phi)
    rho = as_density(rho)
    m = u @ rho.m @ u.conj().T
    # remove rounding asymmetry so validation tolerances are not eaten up
    return QubitDensity((m + m.conj().T) / 2)


def tensor(rho_a, rho_b) -> JointDensity:
    return JointDensity(np.kron(as_density(rho_a).m, as_density(rho_b).m))


# --- two-photon operators --------------------------------------------------

def singlet():
    """Antisymmetric Bell state ``(|HV> - |VH>)/sqrt(2)`` as a length-4 vector."""
    psi = np.zeros(4, dtype=complex)
    psi[2] = 1 / math.sqrt(2)   # |H>_1 |V>_2
    psi[1] = -1 / math.sqrt(2)  # |V>_1 |H>_2
    return psi


def flip_operator():
    """Swap operator built from its action on product basis states."""
    v = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            v[2 * j + i, 2 * i + j] = 1.0
    return _frozen(v)


def bell_projectors():
    """Return ``(Pi_plus, Pi_minus)``, projectors on the symmetric and antisymmetric subspaces."""
    psi = singlet()
    pi_minus = np.outer(psi, psi.conj())
    pi_plus = np.eye(4) - pi_minus
    return _frozen(pi_plus), _frozen(pi_minus)


_PI_PLUS, _PI_MINUS = bell_projectors()


# --- scalar quantities -----------------------------------------------------

def overlap(rho_a, rho_b) -> float:
    """``Tr(rho_a rho_b)``, cross-checked against the symmetric/antisymmetric projector difference.

    Raises:
        RuntimeError: if the two routes disagree by more than 1e-12.
    """
    a, b = as_density(rho_a), as_density(rho_b)
    direct = float(np.real(np.trace(a.m @ b.m)))
    joint = np.kron(a.m, b.m)
    via_projectors = float(np.real(np.trace(_PI_PLUS @ joint) - np.trace(_PI_MINUS @ joint)))
    if abs(direct - via_projectors) > IDENTITY_ATOL:
        raise RuntimeError(
            f"projector identity violated: {direct!r} vs {via_projectors!r}")
    return direct


def purity(rho) -> float:
    rho = as_density(rho)
    return float(np.real(np.trace(rho.m @ rho.m)))


def fidelity_pure(psi, rho) -> float:
    """``<psi|rho|psi>`` for a pure reference state."""
    if not isinstance(psi, PureQubit):
        raise DomainError("psi must be a PureQubit")
    v = psi.vector
    return float(np.real(v.conj() @ as_density(rho).m @ v))


def hs_distance(rho_a, rho_b) -> float:
    """Hilbert-Schmidt distance ``sqrt(Tr(rho_a - rho_b)^2 / 2)``."""
    d = as_density(rho_a).m - as_density(rho_b).m
    return math.sqrt(max(0.0, float(np.real(np.trace(d @ d)))) / 2)


def spectrum_from_purity(purity_value) -> Spectrum:
    """Qubit eigenvalues from purity. Does not clamp: P must lie in [0.5, 1]."""
    p = check_finite(purity_value, "purity")
    if not 0.5 <= p <= 1.0:
        raise DomainError(f"purity must lie in [0.5, 1], got {p!r}")
    root = math.sqrt(2 * p - 1)
    l1 = 0.5 * (1 + root)
    return Spectrum(l1, 1.0 - l1)


def spectrum(rho) -> Spectrum:
    """Eigenvalues by direct diagonalization."""
    w = np.clip(np.linalg.eigvalsh(as_density(rho).m), 0.0, 1.0)
    l1 = float(w[1])
    return Spectrum(l1, 1.0 - l1)


def von_neumann_entropy(s: Spectrum) -> float:
    """``-sum lambda ln lambda`` in nats, with ``0 ln 0 = 0``."""
    return float(-sum(lam * math.log(lam) for lam in (s.lambda1, s.lambda2) if lam > 0))


def theory_parallel_perp(theta, phi):
    """Overlaps for parallel and perpendicular input polarizations under arm phase ``phi``.

    Returns ``(F_par, F_perp)`` with ``F_perp = sin^2(2 theta) sin^2(phi/2)``.
    """
    theta = check_finite(theta, "theta")
    phi = check_finite(phi, "phi")
    f_perp = math.sin(2 * theta) ** 2 * math.sin(phi / 2) ** 2
    return 1.0 - f_perp, f_perp
