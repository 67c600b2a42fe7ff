"""Semiclassical bistability of the atom-coupled normal mode and the
saturation-limited photon budget of an incident pulse.

Fluxes are in photons/us when rates are given in rad/us.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import RegimeError, SystemParams

PLANCK = 6.62607015e-34
LIGHT_SPEED = 299792458.0


@dataclass(frozen=True)
class BistabilityPoint:
    X_mag: float
    Y_mag: float
    A_mag: float
    Ep: float


def _scales(params: SystemParams):
    """Saturation photon number n = gamma^2 / (8 g^2) and cooperativity C."""
    g = params.g_tw.real
    n = params.gamma ** 2 / (8.0 * g ** 2)
    C = g ** 2 / (params.kappa * params.gamma)
    return n, C


def _check_regime(params: SystemParams):
    g = params.g_tw
    if not (params.gamma > 0 and g.imag == 0 and g.real > 0):
        raise RegimeError("bistability curve needs gamma > 0 and real g_tw > 0")
    if params.h != 0 or params.delta_A != 0 or params.delta_C != 0:
        raise RegimeError("bistability curve assumes h = delta_A = delta_C = 0")
    params.require_cavity()


def bistability_curve(params: SystemParams, X_grid) -> list[BistabilityPoint]:
    """Drive versus normal-mode amplitude, ``|Y| = |X| (1 + 4C / (1 + 2|X|^2))``.

    ``X = <A>/sqrt(n)`` and ``Y = i E_p / (kappa sqrt(2n))``.
    """
    _check_regime(params)
    n, C = _scales(params)
    X = np.abs(np.asarray(X_grid, dtype=float))
    Y = X * (1.0 + 4.0 * C / (1.0 + 2.0 * X ** 2))
    Ep = params.kappa * math.sqrt(2.0 * n) * Y
    A = X * math.sqrt(n)
    return [BistabilityPoint(float(x), float(y), float(a), float(e))
            for x, y, a, e in zip(X, Y, A, Ep)]


def curve_slope(C: float, X):
    """d|Y|/d|X| of the bistability curve."""
    X = np.asarray(X, dtype=float)
    return 1.0 + 4.0 * C * (1.0 - 2.0 * X ** 2) / (1.0 + 2.0 * X ** 2) ** 2


class TurningPoints(NamedTuple):
    Ep_upper: float
    Ep_lower: float
    X_upper: float
    X_lower: float
    Ep_upper_approx: float
    Ep_lower_approx: float
    X_upper_approx: float
    X_lower_approx: float


def turning_points(params: SystemParams) -> TurningPoints:
    """Exact and large-C turning points of the bistability curve.

    "Upper" is the end of the high-amplitude branch (``|X|`` near
    ``sqrt(2C)``, drive near ``sqrt(2 kappa gamma)``); "lower" is the end of
    the low-amplitude branch (``|X|`` near ``sqrt(1/2)``, drive near
    ``g_tw / sqrt2``), where saturation sets in.

    Setting the slope to zero gives ``4u^2 + (4 - 8C)u + 1 + 4C = 0`` in
    ``u = |X|^2``, with real roots only for ``C > 2``.
    """
    _check_regime(params)
    n, C = _scales(params)
    if C <= 2.0:
        raise RegimeError(f"curve is monotone for C = {C:.4g} <= 2: no turning points")
    root = math.sqrt(C * (C - 2.0))
    u_hi = (2.0 * C - 1.0) / 2.0 + root
    # cancellation-free form of (2C-1)/2 - root
    u_lo = (1.0 + 4.0 * C) / (4.0 * u_hi)
    X_hi, X_lo = math.sqrt(u_hi), math.sqrt(u_lo)
    scale = params.kappa * math.sqrt(2.0 * n)

    def drive(x):
        return scale * x * (1.0 + 4.0 * C / (1.0 + 2.0 * x * x))

    g = params.g_tw.real
    return TurningPoints(
        Ep_upper=drive(X_hi), Ep_lower=drive(X_lo), X_upper=X_hi, X_lower=X_lo,
        Ep_upper_approx=math.sqrt(2.0 * params.kappa * params.gamma),
        Ep_lower_approx=g / math.sqrt(2.0),
        X_upper_approx=math.sqrt(2.0 * C), X_lower_approx=math.sqrt(0.5))


def saturation_flux(g_tw: float, kappa_ex: float) -> float:
    """Largest incident flux ``g^2 / (4 kappa_ex)`` before the atom saturates."""
    if g_tw <= 0 or kappa_ex <= 0:
        raise ValueError("g_tw and kappa_ex must be > 0")
    return g_tw ** 2 / (4.0 * kappa_ex)


def photon_flux_to_power(flux: float, wavelength: float) -> float:
    """Optical power in W for ``flux`` photons/us at ``wavelength`` metres."""
    return flux * 1e6 * PLANCK * LIGHT_SPEED / wavelength


def saturation_power(g_tw: float, kappa_ex: float, wavelength: float = 852e-9) -> float:
    return photon_flux_to_power(saturation_flux(g_tw, kappa_ex), wavelength)


class PulseBudget(NamedTuple):
    N_bar: float
    bandwidth_ok: bool
    bandwidth_ratio: float
    t_p_min: float


def pulse_budget(g_tw: float, kappa_ex: float, t_p: float,
                 flux_fraction: float = 0.5, margin: float = 10.0) -> PulseBudget:
    """Mean photon number of a Gaussian pulse with peak ``flux_fraction * F_sat``.

    ``bandwidth_ratio`` is ``(2.35/t_p) / (2 kappa_ex)``; the pulse counts as
    narrowband when it is below ``1/margin``.  ``t_p_min = 2.35 / (2 kappa_ex)``
    is the width at which the two rates are equal.
    """
    if t_p <= 0:
        raise ValueError("t_p must be > 0")
    if not 0 <= flux_fraction <= 1:
        raise ValueError("flux_fraction must lie in [0, 1]")
    peak = flux_fraction * saturation_flux(g_tw, kappa_ex)
    N = peak * math.sqrt(2.0 * math.pi) * t_p
    ratio = (2.35 / t_p) / (2.0 * kappa_ex)
    return PulseBudget(N, ratio < 1.0 / margin, ratio, 2.35 / (2.0 * kappa_ex))
