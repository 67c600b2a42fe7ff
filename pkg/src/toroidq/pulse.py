"""Coherent Gaussian pulses through the linearized system and the fidelity
of preparing an entangled-path coherent state.

With the atom in the coupled ground state ``|g>`` the pulse is mostly
reflected; with the atom parked in an uncoupled state ``|g'>`` it is
transmitted.  Every output channel carries a coherent state whose spectral
amplitude is the channel's transfer coefficient times the input spectrum,
so all photon numbers and overlaps reduce to integrals over frequency.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from .linear import TransferCoefficients, transfer_coefficients
from .model import RegimeError, SystemParams
from .semiclassical import saturation_flux

SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class GaussianPulseSpec:
    """Gaussian input pulse; ``t_p`` in us, ``alpha_sq`` = mean photon number.

    The input flux is ``F_max exp(-t^2 / 2 t_p^2)`` (FWHM ``2.35 t_p``).
    """

    t_p: float
    alpha_sq: float

    def __post_init__(self):
        if self.t_p <= 0:
            raise ValueError("t_p must be > 0")
        if self.alpha_sq < 0:
            raise ValueError("alpha_sq must be >= 0")

    @classmethod
    def from_drive(cls, E_p: float, t_p: float, kappa_ex: float) -> "GaussianPulseSpec":
        """Pulse whose peak drive strength is ``E_p``."""
        return cls(t_p, abs(E_p) ** 2 * t_p * SQRT_HALF_PI / kappa_ex)

    def drive(self, kappa_ex: float) -> float:
        """Peak drive strength ``E_p`` reproducing ``alpha_sq``."""
        return math.sqrt(self.alpha_sq * kappa_ex / (self.t_p * SQRT_HALF_PI))

    def peak_flux(self, kappa_ex: float) -> float:
        return self.drive(kappa_ex) ** 2 / (2.0 * kappa_ex)

    def spectral_amplitude(self, omega, kappa_ex: float):
        """``<a_in(omega)> = -i E_p t_p / sqrt(kappa_ex) exp(-omega^2 t_p^2)``."""
        omega = np.asarray(omega, dtype=float)
        return (-1j * self.drive(kappa_ex) * self.t_p / math.sqrt(kappa_ex)
                * np.exp(-(omega * self.t_p) ** 2))

    def spectral_density(self, omega):
        """``|<a_in(omega)>|^2``, normalized to integrate to ``alpha_sq``."""
        omega = np.asarray(omega, dtype=float)
        return (self.alpha_sq * self.t_p / SQRT_HALF_PI
                * np.exp(-2.0 * (omega * self.t_p) ** 2))

    def time_amplitude(self, t, kappa_ex: float):
        t = np.asarray(t, dtype=float)
        return (-1j * self.drive(kappa_ex) / math.sqrt(2.0 * kappa_ex)
                * np.exp(-t ** 2 / (4.0 * self.t_p ** 2)))


@dataclass(frozen=True)
class ChannelAmplitudes:
    alpha_ex_sq: float
    alpha_i_sq: float
    beta_ex_sq: float
    beta_i_sq: float
    eta_sq: float
    alpha_ex0_sq: float
    alpha_i0_sq: float

    @property
    def total(self) -> float:
        return (self.alpha_ex_sq + self.alpha_i_sq + self.beta_ex_sq
                + self.beta_i_sq + self.eta_sq)

    @property
    def total0(self) -> float:
        return self.alpha_ex0_sq + self.alpha_i0_sq


def _check(params: SystemParams, pulse: GaussianPulseSpec):
    params.require_cavity()
    if params.h != 0:
        raise RegimeError("pulse analysis assumes h = 0")
    if params.kappa_ex <= 0:
        raise RegimeError("pulse analysis needs kappa_ex > 0")
    if pulse.alpha_sq > 0 and abs(params.g_tw) > 0:
        peak = pulse.peak_flux(params.kappa_ex)
        limit = 0.5 * saturation_flux(abs(params.g_tw), params.kappa_ex)
        if peak > limit:
            warnings.warn(
                f"pulse peak flux {peak:.4g}/us exceeds half the saturation flux "
                f"{2 * limit:.4g}/us; the linear treatment is unreliable",
                RuntimeWarning, stacklevel=3)


def window(params: SystemParams, pulse: GaussianPulseSpec) -> float:
    return max(8.0 / pulse.t_p, 4.0 * (abs(params.g_tw) + params.kappa))


class _Integrator:
    """Integrates ``f(omega) |<a_in(omega)>|^2`` over the finite window."""

    def __init__(self, params, pulse, rtol=1e-8):
        self.params, self.pulse, self.rtol = params, pulse, rtol
        self.W = window(params, pulse)
        w = 1.0 / pulse.t_p
        self.points = [p for p in (-6 * w, -2 * w, 0.0, 2 * w, 6 * w) if abs(p) < self.W]
        self.epsabs = 1e-15 * max(pulse.alpha_sq, 1e-300)

    def coefficients(self, omega) -> TransferCoefficients:
        return transfer_coefficients(self.params, omega)

    def _quad(self, f):
        val, err, info = quad(f, -self.W, self.W, points=self.points, limit=400,
                              epsabs=self.epsabs, epsrel=self.rtol, full_output=1)[:3]
        if err > max(self.epsabs, self.rtol * abs(val)) * 100:
            raise QuadratureError(f"quadrature did not converge (err {err:.3e})")
        return val

    def __call__(self, f) -> complex:
        if self.pulse.alpha_sq == 0:
            return 0j
        S = self.pulse.spectral_density

        def real(w):
            return (f(self.coefficients(w)) * S(w)).real

        def imag(w):
            return (f(self.coefficients(w)) * S(w)).imag

        return complex(self._quad(real), self._quad(imag))


def channel_amplitudes(params: SystemParams, pulse: GaussianPulseSpec) -> ChannelAmplitudes:
    """Mean photon number leaving through each output channel."""
    _check(params, pulse)
    I = _Integrator(params, pulse)
    return ChannelAmplitudes(
        alpha_ex_sq=I(lambda c: abs(c.t_ex) ** 2).real,
        alpha_i_sq=I(lambda c: abs(c.t_i) ** 2).real,
        beta_ex_sq=I(lambda c: abs(c.r_ex) ** 2).real,
        beta_i_sq=I(lambda c: abs(c.r_i) ** 2).real,
        eta_sq=I(lambda c: abs(c.s) ** 2).real,
        alpha_ex0_sq=I(lambda c: abs(c.t_ex0) ** 2).real,
        alpha_i0_sq=I(lambda c: abs(c.t_i0) ** 2).real,
    )


_CHANNELS = {
    "forward_g": lambda c: c.t_ex,
    "forward_g0": lambda c: c.t_ex0,
    "backward_g": lambda c: c.r_ex,
    "input": lambda c: np.ones_like(c.t_ex),
}


def output_pulse_time_domain(params: SystemParams, pulse: GaussianPulseSpec,
                             channel: str = "backward_g", times=None,
                             n_times: int = 401) -> dict:
    """Output photon flux ``|<out(t)>|^2`` of one fiber channel.

    The amplitude is the inverse Fourier transform of
    ``coefficient(omega) <a_in(omega)>`` evaluated on a uniform grid with
    spacing ``1/(20 t_p)`` over ``[-W, W]``.  The grid represents times up
    to ``1/d_omega = 20 t_p``; asking for later times raises ``ValueError``.
    """
    if channel not in _CHANNELS:
        raise ValueError(f"channel must be one of {sorted(_CHANNELS)}")
    _check(params, pulse)
    W = window(params, pulse)
    d_omega = 1.0 / (20.0 * pulse.t_p)
    m = int(math.ceil(W / d_omega))
    omega = np.arange(-m, m + 1) * d_omega
    if times is None:
        times = np.linspace(-6 * pulse.t_p, 6 * pulse.t_p, n_times)
    times = np.asarray(times, dtype=float)
    if times.size and np.max(np.abs(times)) > 1.0 / d_omega:
        raise ValueError(
            f"time window {np.max(np.abs(times)):.4g} exceeds grid limit {1 / d_omega:.4g}")
    coeff = _CHANNELS[channel](transfer_coefficients(params, omega))
    spec = coeff * pulse.spectral_amplitude(omega, params.kappa_ex)
    amp = np.empty(times.shape, dtype=complex)
    # chunked so the phase matrix stays near 2**22 entries
    rows = max(1, (1 << 22) // omega.size)
    for start in range(0, times.size, rows):
        t = times[start:start + rows]
        amp[start:start + rows] = np.exp(1j * np.outer(t, omega)) @ spec
    amp *= d_omega / math.sqrt(2.0 * math.pi)
    return {"t": times, "flux": np.abs(amp) ** 2, "amplitude": amp,
            "input_flux": np.abs(pulse.time_amplitude(times, params.kappa_ex)) ** 2}


class Overlaps(NamedTuple):
    vac_alpha_ex: complex      # <0|alpha_ex>
    minus_alpha_beta_ex: complex   # <-alpha|beta_ex>
    alpha_alpha_ex0: complex   # <alpha|alpha_ex^(0)>
    xi: complex


def overlap_factor_xi(params: SystemParams, pulse: GaussianPulseSpec) -> complex:
    """Overlap of the loss-channel states for the two atomic branches.

    Product of the intrinsic-loss overlaps in both directions and the
    spontaneous-emission overlap; ``|xi| < 1`` measures how much path
    information leaks to the environment.
    """
    _check(params, pulse)
    return _overlaps(params, pulse).xi


def _overlaps(params, pulse) -> Overlaps:
    I = _Integrator(params, pulse)
    a_i = I(lambda c: abs(c.t_i) ** 2 + abs(c.t_i0) ** 2 - 2 * np.conj(c.t_i0) * c.t_i)
    b_i = I(lambda c: abs(c.r_i) ** 2).real
    eta = I(lambda c: abs(c.s) ** 2).real
    xi = np.exp(-0.5 * a_i) * math.exp(-0.5 * b_i) * math.exp(-0.5 * eta)
    alpha_ex = I(lambda c: abs(c.t_ex) ** 2).real
    beta = I(lambda c: 1 + abs(c.r_ex) ** 2 + 2 * c.r_ex)
    alpha0 = I(lambda c: 1 + abs(c.t_ex0) ** 2 - 2 * c.t_ex0)
    return Overlaps(complex(math.exp(-0.5 * alpha_ex)), complex(np.exp(-0.5 * beta)),
                    complex(np.exp(-0.5 * alpha0)), complex(xi))


def fidelity_exact(params: SystemParams, pulse: GaussianPulseSpec) -> float:
    """Overlap of the prepared atom + fiber state with the ideal entangled state."""
    _check(params, pulse)
    o = _overlaps(params, pulse)
    # <beta_ex^(0)|0> = 1 because nothing is reflected with the atom uncoupled
    F = (0.25 * abs(o.vac_alpha_ex) ** 2 * abs(o.minus_alpha_beta_ex) ** 2
         + 0.25 * abs(o.alpha_alpha_ex0) ** 2
         + 0.5 * (o.xi * o.vac_alpha_ex * o.minus_alpha_beta_ex
                  * np.conj(o.alpha_alpha_ex0)).real)
    return float(min(max(F, 0.0), 1.0))


class FidelityRates(NamedTuple):
    """Per-photon decay constants of the narrowband fidelity formula."""

    gamma1: float
    gamma2: float
    gamma3: float


def fidelity_rates(params: SystemParams) -> FidelityRates:
    params.require_cavity()
    C = params.cooperativity
    kex, ki, k = params.kappa_ex, params.kappa_i, params.kappa
    if math.isinf(C):
        f, f2, inv = 1.0, 1.0, 0.0
    else:
        f = 4 * C / (4 * C + 1)
        f2 = (4 * C + 2) / (4 * C + 1)
        inv = 1.0 / (4 * C) if C > 0 else math.inf
    g1 = (1 - kex / k * f2) ** 2 + (1 - kex / k * f) ** 2
    g2 = 4 * (ki / k) ** 2
    g3 = kex / k * f ** 2 * (ki / k + inv) if C > 0 else 0.0
    return FidelityRates(g1, g2, g3)


def fidelity_approx(params: SystemParams, alpha_sq: float) -> float:
    """Narrowband (``kappa t_p >> 1``) approximation to the fidelity."""
    g1, g2, g3 = fidelity_rates(params)
    n = alpha_sq
    return float(0.25 * math.exp(-g1 * n) + 0.25 * math.exp(-g2 * n)
                 + 0.5 * math.exp(-0.5 * (g1 + g2 + 2 * g3) * n))


class ReflectionFidelity(NamedTuple):
    exact: float
    approx: float


def reflection_fidelity(params: SystemParams, pulse: GaussianPulseSpec) -> ReflectionFidelity:
    """Fidelity of plain reflection ``|alpha> -> |-alpha>`` with the atom in ``|g>``."""
    _check(params, pulse)
    I = _Integrator(params, pulse)
    alpha_ex = I(lambda c: abs(c.t_ex) ** 2).real
    beta = I(lambda c: 1 + abs(c.r_ex) ** 2 + 2 * c.r_ex)
    exact = math.exp(-alpha_ex) * abs(np.exp(-0.5 * beta)) ** 2
    approx = math.exp(-fidelity_rates(params).gamma1 * pulse.alpha_sq)
    return ReflectionFidelity(float(exact), float(approx))
