"""Steady state of the full Lindblad master equation and the fiber-output
observables derived from it.

Two routes are available.  ``"full"`` solves on the truncated
``a (x) b (x) atom`` space.  ``"reduced"`` uses the fact that the atom only
couples to the mode ``C = (g a + g* b) / (sqrt2 |g|)``; whenever the
intermode scattering does not mix ``C`` with its orthogonal partner ``D``
(``h sin(2 arg g) = 0``), ``D`` is a driven damped oscillator that sits in
an exact coherent state and only ``C (x) atom`` needs a Fock basis.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .model import (
    MAX_DIM,
    DimensionError,
    FockConfig,
    SystemParams,
    destroy,
    hamiltonian_from,
    liouvillian,
    operators,
    unvec,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

#: correlations are only reported above this fraction of the input flux
G2_FLUX_FLOOR = 1e-12
#: relative change allowed when doubling the truncation
CONVERGENCE_RTOL = 5e-3


class ConvergenceError(RuntimeError):
    """Steady-state solve failed; ``residual`` holds the best residual reached."""

    def __init__(self, message, residual=math.nan):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class DensityOperator:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expect(self, op) -> complex:
        """Tr(rho op) for a dense or sparse operator."""
        if sp.issparse(op):
            return complex(op.multiply(self.entries.T).sum())
        return complex(np.sum(np.asarray(op) * self.entries.T))


@dataclass(frozen=True)
class SteadyStateObservables:
    a_mean: complex
    b_mean: complex
    A_mean: complex
    B_mean: complex
    n_a: float
    n_b: float
    p_exc: float
    T_F: float
    T_B: float
    g2_FF: float
    g2_BB: float
    truncation: int = 0
    method: str = ""

    @property
    def g2_FF_defined(self) -> bool:
        return not math.isnan(self.g2_FF)

    @property
    def g2_BB_defined(self) -> bool:
        return not math.isnan(self.g2_BB)

    def as_row(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# --------------------------------------------------------------------------
# linear algebra


def _trace_row(dim: int) -> sp.csr_matrix:
    cols = np.arange(dim) * (dim + 1)
    return sp.csr_matrix((np.ones(dim, dtype=complex), (np.zeros(dim, int), cols)),
                         shape=(1, dim * dim))


def _finish(v, dim) -> np.ndarray:
    rho = unvec(v, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _residual(L, rho) -> float:
    r = np.linalg.norm(L @ rho.reshape(-1, order="F"))
    scale = spla.norm(L, 1) * np.linalg.norm(rho)
    return r / scale


def _solve_direct(L, dim, ordering="rcm"):
    """Null vector of L via sparse LU with row 0 replaced by the trace.

    For the two-mode problem a reverse Cuthill-McKee ordering of the
    Liouvillian graph keeps the LU fill several times smaller than the
    column orderings SuperLU offers.  The single-mode problem is closer to a
    2-D grid and does better with COLAMD; any SuperLU ``permc_spec`` may be
    passed as ``ordering``.
    """
    L = sp.csr_matrix(L)
    M = sp.vstack([_trace_row(dim), L[1:]]).tocsr()
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    if ordering != "rcm":
        return _finish(spla.splu(M.tocsc(), permc_spec=ordering).solve(rhs), dim)
    perm = reverse_cuthill_mckee(sp.csr_matrix(abs(L) + abs(L.T)), symmetric_mode=True)
    Mp = M[perm][:, perm].tocsc()
    v = np.empty_like(rhs)
    v[perm] = spla.splu(Mp, permc_spec="NATURAL").solve(rhs[perm])
    return _finish(v, dim)


def _solve_evolve(L, dim, rho0=None, tol=1e-10, t_max=None):
    """Fallback: integrate rho' = L rho until the derivative is negligible."""
    if rho0 is None:
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[0, 0] = 1.0
    v = rho0.reshape(-1, order="F")
    rate = float(abs(L.diagonal()).max()) or 1.0
    t_max = t_max or 1e4 / rate * dim
    t, chunk = 0.0, 50.0 / rate
    while t < t_max:
        sol = solve_ivp(lambda _, y: L @ y, (0.0, chunk), v, method="RK45",
                        rtol=1e-10, atol=1e-13)
        v = sol.y[:, -1]
        t += chunk
        if np.linalg.norm(L @ v) < tol * rate * np.linalg.norm(v):
            break
        chunk *= 2
    return _finish(v, dim)


def steady_state_of(L, dim, tol=1e-10, ordering="rcm") -> np.ndarray:
    """Steady state of a Liouvillian; direct solve first, time-marching second."""
    L = sp.csr_matrix(L)
    rho, res = None, math.inf
    try:
        rho = _solve_direct(L, dim, ordering)
        res = _residual(L, rho)
    except (RuntimeError, ValueError, ZeroDivisionError) as exc:
        logger.warning("direct steady-state solve failed: %s", exc)
    if rho is not None and np.isfinite(res) and res <= tol:
        return rho
    logger.warning("direct solve residual %.2e above %.1e; integrating", res, tol)
    try:
        rho2 = _solve_evolve(L, dim, rho0=rho if rho is not None and np.all(np.isfinite(rho)) else None,
                             tol=tol)
        res2 = _residual(L, rho2)
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceError(f"time integration failed: {exc}", res) from exc
    if res2 <= tol:
        return rho2
    raise ConvergenceError(
        f"no steady state within tolerance (residual {min(res, res2):.3e})",
        min(res, res2))


# --------------------------------------------------------------------------
# full a (x) b (x) atom route


def solve_steady_state(params: SystemParams, fock: FockConfig,
                       max_dim: int = MAX_DIM, tol: float = 1e-10) -> DensityOperator:
    """Steady-state density operator on the truncated ``a (x) b (x) atom`` space."""
    params.require_cavity()
    ops = operators(fock, max_dim)
    H = hamiltonian_from(params, ops.a, ops.b, ops.sm)
    L = liouvillian(H, [(params.kappa, ops.a), (params.kappa, ops.b),
                        (params.gamma / 2.0, ops.sm)])
    return DensityOperator(steady_state_of(L, fock.dim, tol))


def _field_observables(rho: DensityOperator, params: SystemParams, a, b, sm,
                       truncation=0, method=""):
    """Observables from effective a, b, sigma_minus operators.

    The probe arrives in a coherent state, so in normally ordered moments the
    input operator may be replaced by its mean,
    ``a_out = -<a_in> + sqrt(2 kappa_ex) a`` and
    ``b_out = sqrt(2 kappa_ex) b``.  Normally ordered products of truncated
    ladder operators are exact on the truncated space, so the moments below
    carry no truncation artefact beyond that of rho itself.
    """
    root = math.sqrt(2.0 * params.kappa_ex)
    eye = sp.identity(rho.dim, dtype=complex, format="csr")
    a_out = -params.a_in * eye + root * a
    b_out = root * b

    def moments(op):
        od = op.conj().T
        n1 = rho.expect(od @ op).real
        n2 = rho.expect(od @ od @ op @ op).real
        return n1, n2

    flux_in = params.input_flux
    F1, F2 = moments(a_out)
    B1, B2 = moments(b_out)
    if flux_in > 0:
        T_F, T_B = F1 / flux_in, B1 / flux_in
    else:
        T_F = T_B = math.nan
    floor = G2_FLUX_FLOOR * flux_in
    g2_FF = F2 / F1 ** 2 if flux_in > 0 and F1 > floor else math.nan
    g2_BB = B2 / B1 ** 2 if flux_in > 0 and B1 > floor else math.nan
    am, bm = rho.expect(a), rho.expect(b)
    return SteadyStateObservables(
        a_mean=am, b_mean=bm, A_mean=(am + bm) / SQRT2, B_mean=(am - bm) / SQRT2,
        n_a=rho.expect(a.conj().T @ a).real, n_b=rho.expect(b.conj().T @ b).real,
        p_exc=rho.expect(sm.conj().T @ sm).real,
        T_F=T_F, T_B=T_B, g2_FF=g2_FF, g2_BB=g2_BB,
        truncation=truncation, method=method)


def observables(rho: DensityOperator, params: SystemParams,
                fock: FockConfig) -> SteadyStateObservables:
    """Fluxes, correlations and populations from a full-space steady state."""
    ops = operators(fock, max_dim=max(MAX_DIM, fock.dim))
    if rho.dim != fock.dim:
        raise ValueError(f"rho has dim {rho.dim}, truncation implies {fock.dim}")
    return _field_observables(rho, params, ops.a, ops.b, ops.sm,
                              truncation=max(fock.n_a, fock.n_b), method="full")


# --------------------------------------------------------------------------
# reduced route: coupled mode (x) atom, uncoupled mode coherent


def _mode_split(params: SystemParams):
    """Mixing coefficients ``u, v`` with ``C = u a + v b``, ``D = v* a - u* b``."""
    g = params.g_tw
    if g == 0:
        return 1 / SQRT2, 1 / SQRT2
    return g / (SQRT2 * abs(g)), g.conjugate() / (SQRT2 * abs(g))


def reduction_applies(params: SystemParams, rtol: float = 1e-12) -> bool:
    g = params.g_tw
    if params.h == 0 or g == 0:
        return True
    phi = math.atan2(g.imag, g.real)
    return abs(params.h * math.sin(2 * phi)) <= rtol * max(abs(params.h), params.kappa)


def solve_reduced(params: SystemParams, n: int, max_dim: int = MAX_DIM,
                  tol: float = 1e-10) -> SteadyStateObservables:
    """Steady state with only the atom-coupled mode kept in a Fock basis."""
    params.require_cavity()
    if not reduction_applies(params):
        raise ValueError("intermode scattering mixes the coupled and dark modes")
    dim = 2 * (n + 1)
    if n < 1 or dim > max_dim:
        raise DimensionError(f"reduced dimension {dim} outside [4, {max_dim}]")
    u, v = _mode_split(params)
    g = params.g_tw
    cos2 = math.cos(2 * math.atan2(g.imag, g.real)) if g != 0 else 1.0
    det_C = params.delta_C + params.h * cos2
    det_D = params.delta_C - params.h * cos2
    E_C = params.E_p * u
    E_D = params.E_p * v.conjugate()
    G = SQRT2 * abs(g)

    i2 = sp.identity(2, dtype=complex, format="csr")
    C = sp.kron(destroy(n), i2, format="csr")
    sm = sp.kron(sp.identity(n + 1, dtype=complex),
                 sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex)), format="csr")
    Cd, spl = C.conj().T, sm.conj().T
    H = (params.delta_A * (spl @ sm) + det_C * (Cd @ C)
         + (E_C.conjugate() * C + E_C * Cd) + G * (Cd @ sm + spl @ C))
    L = liouvillian(H, [(params.kappa, C), (params.gamma / 2.0, sm)])
    rho = DensityOperator(steady_state_of(L, dim, tol, ordering="COLAMD"))

    delta = -1j * E_D / (params.kappa + 1j * det_D)
    eye = sp.identity(dim, dtype=complex, format="csr")
    a = u.conjugate() * C + v * delta * eye
    b = v.conjugate() * C - u * delta * eye
    return _field_observables(rho, params, a, b, sm, truncation=n, method="reduced")


# --------------------------------------------------------------------------
# truncation control


def _start_truncation(params: SystemParams) -> int:
    return max(3, math.ceil(2 * abs(params.E_p) ** 2 / params.kappa ** 2) + 2)


def _scales(params):
    amp = abs(params.E_p) / max(params.kappa_ex, 1e-300)
    return amp, amp ** 2


def _converged(o1: SteadyStateObservables, o2: SteadyStateObservables,
               params: SystemParams, rtol=CONVERGENCE_RTOL) -> bool:
    amp, num = _scales(params)
    atol = 1e-6
    pairs = [
        (abs(o1.a_mean - o2.a_mean), abs(o2.a_mean), amp * atol),
        (abs(o1.b_mean - o2.b_mean), abs(o2.b_mean), amp * atol),
        (abs(o1.n_a - o2.n_a), abs(o2.n_a), num * atol),
        (abs(o1.n_b - o2.n_b), abs(o2.n_b), num * atol),
        (abs(o1.p_exc - o2.p_exc), abs(o2.p_exc), atol),
        (abs(o1.T_F - o2.T_F), abs(o2.T_F), atol),
        (abs(o1.T_B - o2.T_B), abs(o2.T_B), atol),
    ]
    for x1, x2, T in ((o1.g2_FF, o2.g2_FF, o2.T_F), (o1.g2_BB, o2.g2_BB, o2.T_B)):
        if not (math.isnan(x1) or math.isnan(x2)) and T > atol:
            pairs.append((abs(x1 - x2), abs(x2), 0.0))
    return all(d <= rtol * ref + floor for d, ref, floor in pairs)


def solve_observables(params: SystemParams, fock: FockConfig | None = None,
                      method: str = "auto", max_dim: int = MAX_DIM,
                      tol: float = 1e-10) -> SteadyStateObservables:
    """Solve and extract observables, choosing truncation automatically.

    With ``fock=None`` the truncation starts at
    ``max(3, ceil(2|E_p|^2/kappa^2) + 2)`` and doubles until every observable
    changes by less than 0.5 %; the finer of the last two solutions is
    returned.  ``method`` is ``"full"``, ``"reduced"`` or ``"auto"`` (reduced
    whenever it is exact).
    """
    params.require_cavity()
    if method == "auto":
        method = "reduced" if reduction_applies(params) else "full"
    if method not in ("full", "reduced"):
        raise ValueError(f"unknown method {method!r}")

    def run(n):
        if method == "reduced":
            return solve_reduced(params, n, max_dim, tol)
        fk = FockConfig(n, n)
        return observables(solve_steady_state(params, fk, max_dim, tol), params, fk)

    if fock is not None:
        if method == "reduced":
            return solve_reduced(params, max(fock.n_a, fock.n_b), max_dim, tol)
        return observables(solve_steady_state(params, fock, max_dim, tol), params, fock)

    def fits(n):
        return (2 * (n + 1) if method == "reduced" else FockConfig(n, n).dim) <= max_dim

    n = _start_truncation(params)
    if not fits(n):
        raise DimensionError(f"starting truncation {n} exceeds dimension cap {max_dim}")
    prev = run(n)
    while True:
        n2 = 2 * n
        if not fits(n2):
            raise DimensionError(
                f"truncation not converged at n={n}; doubling exceeds cap {max_dim}")
        cur = run(n2)
        if _converged(prev, cur, params):
            return cur
        n, prev = n2, cur


# --------------------------------------------------------------------------
# sweeps

_COLUMNS = [f.name for f in fields(SteadyStateObservables)]


def _solve_point(args):
    params, fock, method, max_dim, strict = args
    try:
        return solve_observables(params, fock, method, max_dim), None
    except Exception as exc:  # noqa: BLE001 - reported per row
        if strict:
            raise
        return None, f"{type(exc).__name__}: {exc}"


def run_points(points, fock=None, method="auto", max_dim=MAX_DIM, workers=1,
               strict=True):
    """Solve a list of parameter sets, in order, optionally in parallel.

    Returns ``(observables, errors)`` lists aligned with ``points``; failed
    points carry ``None`` and a message unless ``strict`` re-raises.
    """
    jobs = [(p, fock, method, max_dim, strict) for p in points]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_solve_point, jobs))
    else:
        out = [_solve_point(j) for j in jobs]
    return [o for o, _ in out], [e for _, e in out]


def _table(key, values, results, errors) -> dict:
    table = {key: np.asarray(values, dtype=float)}
    for name in _COLUMNS:
        col = []
        for r in results:
            col.append(getattr(r, name) if r is not None else math.nan)
        table[name] = np.asarray(col)
    table["error"] = [e or "" for e in errors]
    return table


def sweep_coupling(params: SystemParams, g_values, fock=None, workers=1,
                   strict=True, method="auto", max_dim=MAX_DIM) -> dict:
    """Steady-state observables versus (real) coupling strength ``g_tw``."""
    points = [replace(params, g_tw=complex(g)) for g in g_values]
    res, err = run_points(points, fock, method, max_dim, workers, strict)
    return _table("g_tw", np.real(np.asarray(g_values, dtype=complex)), res, err)


def sweep_drive(params: SystemParams, Ep_values, fock=None, workers=1,
                strict=True, method="auto", max_dim=MAX_DIM) -> dict:
    """Steady-state observables versus probe strength ``E_p``."""
    points = [replace(params, E_p=complex(e)) for e in Ep_values]
    res, err = run_points(points, fock, method, max_dim, workers, strict)
    return _table("E_p", np.abs(np.asarray(Ep_values, dtype=complex)), res, err)


def spectrum_strong_drive(params: SystemParams, detunings, fock=None, workers=1,
                          strict=True, method="auto", atom_offset=0.0,
                          max_dim=MAX_DIM) -> dict:
    """Observables versus probe detuning at fixed drive, ``delta_A = delta_C + offset``."""
    points = [replace(params, delta_C=float(d), delta_A=float(d) + atom_offset)
              for d in detunings]
    res, err = run_points(points, fock, method, max_dim, workers, strict)
    return _table("delta_C", detunings, res, err)


def saturation_onset(table: dict, threshold: float = 0.05, key: str = "E_p"):
    """First swept value at which ``T_F`` exceeds ``threshold`` (linear interpolation)."""
    x = np.asarray(table[key], dtype=float)
    y = np.asarray(table["T_F"], dtype=float)
    above = np.nonzero(y > threshold)[0]
    if above.size == 0:
        return math.nan
    i = above[0]
    if i == 0:
        return float(x[0])
    return float(x[i - 1] + (threshold - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]))
