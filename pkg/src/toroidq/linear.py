"""Weak-drive (linearized) response of the atom + two-mode resonator.

In this regime the atom behaves as a third damped oscillator, every field
stays coherent and only mean amplitudes matter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import RegimeError, SingularError, SystemParams

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LinearSteadyState:
    a_ss: complex
    b_ss: complex
    sigma_ss: complex
    a_out_ex: complex
    b_out_ex: complex
    T_F: float
    T_B: float

    @property
    def A_ss(self) -> complex:
        return (self.a_ss + self.b_ss) / SQRT2

    @property
    def B_ss(self) -> complex:
        return (self.a_ss - self.b_ss) / SQRT2


def _check_denominator(den, scale):
    if abs(den) < 1e-14 * scale:
        raise SingularError(
            f"steady-state denominator {abs(den):.3e} vanishes "
            f"(scale {scale:.3e}); need gamma > 0 or delta_A != 0")


def linear_steady_state(params: SystemParams) -> LinearSteadyState:
    """Closed-form mean-field steady state and normalized fiber fluxes.

    ``T_F`` and ``T_B`` are ratios of output to input amplitudes squared and
    so do not depend on ``E_p``; a zero drive returns zero amplitudes but
    still reports the linear-response fluxes.
    """
    params.require_cavity()
    if params.g_tw == 0:
        return _empty_steady_state(params)
    g, h = params.g_tw, params.h
    c = params.kappa + 1j * params.delta_C
    s = params.gamma / 2 + 1j * params.delta_A
    x = c * s + abs(g) ** 2
    p = 1j * h * s + g.conjugate() ** 2
    q = 1j * h * s + g ** 2
    den = p * q - x ** 2
    _check_denominator(den, max(abs(p * q), abs(x) ** 2))
    if abs(x) < 1e-14 * max(abs(c * s), abs(g) ** 2, 1e-300):
        raise SingularError("(kappa + i dC)(gamma/2 + i dA) + |g|^2 vanishes")

    drive = params.E_p if params.E_p != 0 else 1.0
    a = 1j * drive * s * x / den
    b = -q / x * a
    if s != 0:
        sigma = -1j * (g * a + g.conjugate() * b) / s
    else:
        sigma = complex("nan")
    return _pack(params, drive, a, b, sigma)


def _empty_steady_state(params: SystemParams) -> LinearSteadyState:
    """Atom decoupled: the two modes form a driven, damped doublet."""
    c = params.kappa + 1j * params.delta_C
    den = c * c + params.h ** 2
    _check_denominator(den, abs(c) ** 2 + params.h ** 2)
    drive = params.E_p if params.E_p != 0 else 1.0
    a = -1j * drive * c / den
    b = -1j * params.h / c * a
    return _pack(params, drive, a, b, 0j)


def _pack(params, drive, a, b, sigma) -> LinearSteadyState:
    root = math.sqrt(2.0 * params.kappa_ex)
    a_in = -1j * drive / root
    a_out = -a_in + root * a
    b_out = root * b
    T_F = abs(a_out / a_in) ** 2
    T_B = abs(b_out / a_in) ** 2
    if params.E_p == 0:
        a = b = sigma = a_out = b_out = 0j
    return LinearSteadyState(complex(a), complex(b), complex(sigma),
                             complex(a_out), complex(b_out), float(T_F), float(T_B))


def limit_no_atom(params: SystemParams):
    """Empty-resonator fluxes at the split resonances ``delta_C = +-h``."""
    params.require_cavity()
    k, kex, h = params.kappa, params.kappa_ex, params.h
    r = 4 * h ** 2 / k ** 2
    T_F = ((1 - 2 * kex / k) ** 2 + r * (1 - kex / k) ** 2) / (1 + r)
    T_B = (kex / k) ** 2 * r / (1 + r)
    return T_F, T_B


def limit_strong_atom(params: SystemParams, x: float = 0.0, k: float = 0.0,
                      delta_C: float | None = None):
    """Asymptotic fluxes for ``|g_tw|`` much larger than every other rate.

    The atom pushes one normal mode far off resonance; the other, at
    ``delta_C = h cos(2kx)``, sets the response.  By default the probe sits on
    that resonance, giving ``T_F = (kappa_i/kappa)^2`` and
    ``T_B = (kappa_ex/kappa)^2``.
    """
    params.require_cavity()
    shift = params.h * math.cos(2 * k * x)
    if delta_C is None:
        delta_C = shift
    z = params.kappa_ex / (params.kappa + 1j * (delta_C - shift))
    return float(abs(1 - z) ** 2), float(abs(z) ** 2)


def spectrum(params: SystemParams, detunings, atom_present: bool = True,
             atom_offset: float = 0.0) -> dict:
    """Transmission/reflection versus probe detuning.

    The probe is swept with ``delta_A = delta_C + atom_offset`` where
    ``atom_offset = omega_A - omega_C``.
    """
    base = params if atom_present else params.with_(g_tw=0.0)
    detunings = np.asarray(detunings, dtype=float)
    T_F = np.empty_like(detunings)
    T_B = np.empty_like(detunings)
    for i, d in enumerate(detunings):
        ss = linear_steady_state(base.with_(delta_C=float(d),
                                            delta_A=float(d) + atom_offset))
        T_F[i], T_B[i] = ss.T_F, ss.T_B
    return {"delta_C": detunings, "T_F": T_F, "T_B": T_B}


@dataclass(frozen=True)
class TransferCoefficients:
    """Output amplitude per unit input amplitude in each channel.

    ``t_ex0`` and ``t_i0`` are the same responses with the atom decoupled.
    """

    omega: np.ndarray
    t_ex: np.ndarray
    t_i: np.ndarray
    r_ex: np.ndarray
    r_i: np.ndarray
    s: np.ndarray
    t_ex0: np.ndarray
    t_i0: np.ndarray

    def total(self):
        return (abs(self.t_ex) ** 2 + abs(self.t_i) ** 2 + abs(self.r_ex) ** 2
                + abs(self.r_i) ** 2 + abs(self.s) ** 2)


def _coefficients(params: SystemParams, omega):
    g = params.g_tw
    kex, ki = params.kappa_ex, params.kappa_i
    c = params.kappa + 1j * params.delta_C - 1j * omega
    s_ = params.gamma / 2 + 1j * params.delta_A - 1j * omega
    if np.any(c == 0):
        raise SingularError("transfer-coefficient denominator vanishes")
    if g == 0:
        zero = np.zeros_like(c)
        return -1 + 2 * kex / c, 2 * math.sqrt(ki * kex) / c, zero, zero, zero
    den = c * s_ + 2 * abs(g) ** 2
    scale = np.maximum(abs(c * s_), 2 * abs(g) ** 2)
    if np.any(abs(den) < 1e-14 * scale):
        raise SingularError("transfer-coefficient denominator vanishes")
    ratio = (c * s_ + abs(g) ** 2) / den
    t_ex = -1 + 2 * kex / c * ratio
    t_i = 2 * math.sqrt(ki * kex) / c * ratio
    r_ex = -2 * kex / c * g ** 2 / den
    r_i = -2 * math.sqrt(ki * kex) / c * g ** 2 / den
    s = -1j * g * math.sqrt(2 * kex * params.gamma) / den
    return t_ex, t_i, r_ex, r_i, s


def transfer_coefficients(params: SystemParams, omega) -> TransferCoefficients:
    """Frequency-domain channel responses at sideband frequency ``omega``.

    Only defined for ``h = 0``.  ``omega`` may be a scalar or an array.
    """
    params.require_cavity()
    if params.h != 0:
        raise RegimeError("transfer coefficients assume h = 0")
    omega = np.asarray(omega, dtype=float)
    t_ex, t_i, r_ex, r_i, s = _coefficients(params, omega)
    t_ex0, t_i0, *_ = _coefficients(params.with_(g_tw=0.0), omega)
    return TransferCoefficients(omega, t_ex, t_i, r_ex, r_i, s, t_ex0, t_i0)
