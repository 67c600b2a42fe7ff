"""Parameters, operators, Hamiltonian and Liouvillian for one two-level atom
coupled to the two counter-propagating whispering-gallery modes.

Conventions
-----------
* Rates are angular frequencies in rad/us, so a value quoted as
  ``kappa/2pi = 30 MHz`` is stored as ``2*pi*30``.  Times are in us and
  photon fluxes come out in photons/us.
* Tensor ordering is ``mode a (x) mode b (x) atom``.  The atomic basis is
  ``[|g>, |e>]`` so ``sigma_minus = |g><e|``.
* Superoperators act on column-stacked density matrices,
  ``vec(A rho B) = (B.T kron A) vec(rho)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, asdict, replace
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

TWO_PI = 2.0 * math.pi

#: default cap on the composite Hilbert-space dimension
MAX_DIM = 20000


class DimensionError(ValueError):
    """Raised when a truncation would exceed the configured dimension cap."""


class RegimeError(ValueError):
    """Raised when parameters fall outside the regime a formula assumes."""


class SingularError(ArithmeticError):
    """Raised when a closed-form denominator vanishes."""


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters in angular units (rad/us).

    Use :meth:`from_mhz` to enter values the way they are usually quoted,
    i.e. as ``rate/2pi`` in MHz.
    """

    kappa_ex: float
    kappa_i: float
    h: float = 0.0
    gamma: float = 0.0
    g_tw: complex = 0.0
    delta_A: float = 0.0
    delta_C: float = 0.0
    E_p: complex = 0.0

    def __post_init__(self):
        for name in ("kappa_ex", "kappa_i", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("h", "delta_A", "delta_C"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "g_tw", complex(self.g_tw))
        object.__setattr__(self, "E_p", complex(self.E_p))

    @classmethod
    def from_mhz(cls, **values) -> "SystemParams":
        """Build from ``rate/2pi`` values in MHz (complex allowed for g_tw, E_p)."""
        return cls(**{k: TWO_PI * v for k, v in values.items()})

    def to_mhz(self) -> dict:
        return {k: v / TWO_PI for k, v in asdict(self).items()}

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @property
    def kappa(self) -> float:
        return self.kappa_ex + self.kappa_i

    @property
    def cooperativity(self) -> float:
        """C = |g_tw|^2 / (kappa gamma)."""
        if self.gamma <= 0 or self.kappa <= 0:
            return math.inf
        return abs(self.g_tw) ** 2 / (self.kappa * self.gamma)

    @property
    def input_flux(self) -> float:
        """|<a_in,ex>|^2 = |E_p|^2 / (2 kappa_ex), photons/us."""
        return abs(self.E_p) ** 2 / (2.0 * self.kappa_ex)

    @property
    def a_in(self) -> complex:
        """Coherent amplitude of the probe in the fiber, -i E_p / sqrt(2 kappa_ex)."""
        return -1j * self.E_p / math.sqrt(2.0 * self.kappa_ex)

    def require_cavity(self):
        if self.kappa <= 0:
            raise ValueError("kappa_ex + kappa_i must be > 0")


@dataclass(frozen=True)
class FockConfig:
    """Fock truncations (highest photon number kept) for modes a and b."""

    n_a: int
    n_b: int

    def __post_init__(self):
        if self.n_a < 0 or self.n_b < 0:
            raise ValueError("Fock truncations must be >= 0")

    @property
    def dim(self) -> int:
        return (self.n_a + 1) * (self.n_b + 1) * 2

    @classmethod
    def auto(cls, params: SystemParams) -> "FockConfig":
        """Starting truncation ``ceil(4 max(1, |E_p|^2/kappa^2))`` for both modes."""
        params.require_cavity()
        n = math.ceil(4 * max(1.0, abs(params.E_p) ** 2 / params.kappa ** 2))
        return cls(n, n)


def coupling_amplitude(g0_tw, r, x, alpha_ev, k):
    """Traveling-wave coupling ``g0_tw * exp(-alpha_ev r) * exp(i k x)``."""
    if g0_tw < 0 or r < 0 or alpha_ev <= 0:
        raise ValueError("need g0_tw >= 0, r >= 0 and alpha_ev > 0")
    return g0_tw * math.exp(-alpha_ev * r) * cmath.exp(1j * k * x)


def normal_mode_couplings(g_tw):
    """Couplings of the atom to A = (a+b)/sqrt2 and B = (a-b)/sqrt2."""
    g_tw = complex(g_tw)
    return math.sqrt(2.0) * g_tw.real, math.sqrt(2.0) * g_tw.imag


def destroy(n: int) -> sp.csr_matrix:
    """Truncated annihilation operator on ``n + 1`` Fock states."""
    return sp.diags(np.sqrt(np.arange(1, n + 1, dtype=float)), 1,
                    shape=(n + 1, n + 1), format="csr", dtype=complex)


class Operators(NamedTuple):
    a: sp.csr_matrix
    b: sp.csr_matrix
    sm: sp.csr_matrix
    eye: sp.csr_matrix


def _check_dim(fock: FockConfig, max_dim: int):
    if fock.n_a < 1 or fock.n_b < 1:
        raise ValueError("driven computations need n_a, n_b >= 1")
    if fock.dim > max_dim:
        raise DimensionError(
            f"Hilbert dimension {fock.dim} exceeds cap {max_dim}")


def operators(fock: FockConfig, max_dim: int = MAX_DIM) -> Operators:
    """Mode and atom operators embedded in the a (x) b (x) atom space."""
    _check_dim(fock, max_dim)
    ia = sp.identity(fock.n_a + 1, dtype=complex, format="csr")
    ib = sp.identity(fock.n_b + 1, dtype=complex, format="csr")
    i2 = sp.identity(2, dtype=complex, format="csr")
    sm = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
    a = sp.kron(sp.kron(destroy(fock.n_a), ib), i2, format="csr")
    b = sp.kron(sp.kron(ia, destroy(fock.n_b)), i2, format="csr")
    s = sp.kron(sp.kron(ia, ib), sm, format="csr")
    return Operators(a, b, s, sp.identity(fock.dim, dtype=complex, format="csr"))


def hamiltonian_from(params: SystemParams, a, b, sm):
    """Probe-frame Hamiltonian written in terms of the given operators."""
    g, E = params.g_tw, params.E_p
    ad, bd, sp_ = a.conj().T, b.conj().T, sm.conj().T
    return (params.delta_A * (sp_ @ sm)
            + params.delta_C * (ad @ a + bd @ b)
            + params.h * (ad @ b + bd @ a)
            + (E.conjugate() * a + E * ad)
            + (g.conjugate() * (ad @ sm) + g * (sp_ @ a))
            + (g * (bd @ sm) + g.conjugate() * (sp_ @ b)))


def build_hamiltonian(params: SystemParams, fock: FockConfig,
                      max_dim: int = MAX_DIM) -> sp.csr_matrix:
    """Hamiltonian on a (x) b (x) atom as a sparse Hermitian matrix."""
    ops = operators(fock, max_dim)
    return sp.csr_matrix(hamiltonian_from(params, ops.a, ops.b, ops.sm))


def dissipator(op) -> sp.csr_matrix:
    """Column-stacked D[O] rho = 2 O rho O^+ - O^+O rho - rho O^+O."""
    op = sp.csr_matrix(op)
    n = op.shape[0]
    eye = sp.identity(n, dtype=complex, format="csr")
    odo = (op.conj().T @ op).tocsr()
    return (2 * sp.kron(op.conj(), op) - sp.kron(eye, odo)
            - sp.kron(odo.T, eye)).tocsr()


def liouvillian(H, collapse) -> sp.csr_matrix:
    """``-i[H, .] + sum rate * D[O]`` for ``collapse = [(rate, O), ...]``."""
    H = sp.csr_matrix(H)
    n = H.shape[0]
    eye = sp.identity(n, dtype=complex, format="csr")
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for rate, op in collapse:
        if rate:
            L = L + rate * dissipator(op)
    return sp.csr_matrix(L)


def build_liouvillian(params: SystemParams, fock: FockConfig,
                      max_dim: int = MAX_DIM) -> sp.csr_matrix:
    """Vectorized master-equation generator, shape ``(dim**2, dim**2)``.

    Cavity fields decay at ``kappa`` each and the atom through
    ``(gamma/2) D[sigma_minus]``.
    """
    params.require_cavity()
    ops = operators(fock, max_dim)
    H = hamiltonian_from(params, ops.a, ops.b, ops.sm)
    return liouvillian(H, [(params.kappa, ops.a), (params.kappa, ops.b),
                           (params.gamma / 2.0, ops.sm)])


def vec(rho) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")
