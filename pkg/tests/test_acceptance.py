"""Acceptance suite: one test per numbered criterion.

Each test records a PASS/FAIL line that is printed at the end of the pytest
run; ``python3 tests/test_acceptance.py`` prints the same lines directly.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from toroidq import (
    FockConfig, GaussianPulseSpec, SystemParams, build_hamiltonian, channel_amplitudes,
    fidelity_approx, fidelity_exact, linear_steady_state, pulse_budget,
    saturation_flux, saturation_power, solve_observables, spectrum, turning_points,
)
from toroidq import cli
from toroidq.linear import transfer_coefficients

TWO_PI = 2 * math.pi
OVERCOUPLED = dict(kappa_ex=30, kappa_i=0.5, h=0, gamma=5.2)


def check(criterion, number, parts):
    """``parts`` maps a label to ``(ok, text)``; records and asserts the lot."""
    ok = all(p for p, _ in parts.values())
    detail = "; ".join(f"{k} {t}{'' if p else ' [miss]'}" for k, (p, t) in parts.items())
    criterion(number, ok, detail)
    assert ok, detail


def test_criterion_01_critical_coupling_ceiling(criterion):
    p = SystemParams.from_mhz(kappa_ex=10, kappa_i=10, h=0, gamma=5.2, g_tw=100)
    t0 = time.perf_counter()
    atom = spectrum(p, [0.0])["T_F"][0]
    empty = spectrum(p, [0.0], atom_present=False)["T_F"][0]
    dt = time.perf_counter() - t0
    check(criterion, 1, {
        "T_F(0) atom": (abs(atom - 0.25) <= 0.01, f"{atom:.4f}"),
        "no atom": (abs(empty) <= 1e-6, f"{empty:.1e}"),
        "runtime": (dt < 1, f"{dt:.3f}s"),
    })


def test_criterion_02_overcoupled_switch(criterion):
    p = SystemParams.from_mhz(kappa_ex=20, kappa_i=0.2, h=0, gamma=5.2, g_tw=100)
    t0 = time.perf_counter()
    atom = spectrum(p, [0.0])
    empty = spectrum(p, [0.0], atom_present=False)
    dt = time.perf_counter() - t0
    check(criterion, 2, {
        "T_F(0) atom": (atom["T_F"][0] < 0.01, f"{atom['T_F'][0]:.2e}"),
        "T_F(0) empty": (empty["T_F"][0] > 0.95, f"{empty['T_F'][0]:.4f}"),
        "T_B(0) atom": (atom["T_B"][0] > 0.95, f"{atom['T_B'][0]:.4f}"),
        "runtime": (dt < 1, f"{dt:.3f}s"),
    })


def test_criterion_03_table_entries(criterion):
    p = SystemParams.from_mhz(kappa_ex=30, kappa_i=0.01, h=0, gamma=5.2, g_tw=1e4, E_p=10)
    t0 = time.perf_counter()
    rows = cli.table1_rows(p, rtol=1e-2)
    dt = time.perf_counter() - t0
    worst = max(r[6] for r in rows)
    check(criterion, 3, {
        "entries": (len(rows) == 12 and all(r[-1] == "pass" for r in rows),
                    f"{sum(r[-1] == 'pass' for r in rows)}/12 within 1e-2"),
        "worst": (worst <= 1e-2, f"{worst:.1e}"),
        "runtime": (dt < 1, f"{dt:.3f}s"),
    })


def test_criterion_04_quantum_vs_linear(criterion):
    p = SystemParams.from_mhz(g_tw=100, E_p=10, **OVERCOUPLED)
    o = solve_observables(p)
    target = -1j * p.E_p / (2 * p.kappa_ex)
    ea = abs(o.a_mean - target) / abs(target)
    eb = abs(o.b_mean + target) / abs(target)
    check(criterion, 4, {
        "<a>": (ea <= 0.05, f"rel err {ea:.3f}"),
        "<b>": (eb <= 0.05, f"rel err {eb:.3f}"),
        "T_B": (o.T_B > 0.9, f"{o.T_B:.4f}"),
        "g2_BB": (abs(o.g2_BB - 1) <= 0.05, f"{o.g2_BB:.4f}"),
    })


def _onset(g_mhz, threshold=0.05, rtol=5e-3):
    """First drive where T_F crosses ``threshold``: coarse upward scan, then bisection."""
    base = SystemParams.from_mhz(g_tw=g_mhz, **OVERCOUPLED)
    ref = TWO_PI * g_mhz / math.sqrt(2)

    def T_F(x):
        return solve_observables(base.with_(E_p=x * ref)).T_F

    lo, hi = None, None
    prev = 0.2
    for x in np.arange(0.3, 2.01, 0.1):
        if T_F(x) > threshold:
            lo, hi = prev, x
            break
        prev = x
    if hi is None:
        return math.nan
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if T_F(mid) > threshold else (mid, hi)
    return 0.5 * (lo + hi)


def test_criterion_05_saturation_onset(criterion):
    parts = {}
    for g in (50, 100, 150):
        ratio = _onset(g)
        parts[f"g={g}"] = (abs(ratio - 1) <= 0.2, f"onset/(g/sqrt2) {ratio:.3f}")
    check(criterion, 5, parts)


def test_criterion_06_turning_points(criterion):
    p = SystemParams.from_mhz(g_tw=100, **OVERCOUPLED)
    t0 = time.perf_counter()
    tp = turning_points(p)
    dt = time.perf_counter() - t0
    e1 = tp.Ep_upper / math.sqrt(2 * p.kappa * p.gamma) - 1
    e2 = tp.Ep_lower / (p.g_tw.real / math.sqrt(2)) - 1
    check(criterion, 6, {
        "sqrt(2 kappa gamma)": (abs(e1) <= 0.05, f"{e1:+.3f}"),
        "g/sqrt2": (abs(e2) <= 0.05, f"{e2:+.3f}"),
        "runtime": (dt < 1, f"{dt:.4f}s"),
    })


def test_criterion_07_pulse_budget(criterion):
    g, kex = TWO_PI * 100, TWO_PI * 30
    F = saturation_flux(g, kex)
    P = saturation_power(g, kex, 852e-9)
    N = pulse_budget(g, kex, 0.310, flux_fraction=0.5).N_bar
    check(criterion, 7, {
        "F_sat": (abs(F / 520 - 1) <= 0.02, f"{F:.1f}/us"),
        "power": (abs(P / 0.12e-9 - 1) <= 0.02, f"{P * 1e9:.4f} nW"),
        "N_bar": (abs(N / 200 - 1) <= 0.02, f"{N:.1f}"),
    })


def test_criterion_08_pulse_reproduction(criterion):
    p = SystemParams.from_mhz(kappa_ex=50, kappa_i=0.5, h=0, gamma=5.2, g_tw=100)
    pulse = GaussianPulseSpec(t_p=0.159, alpha_sq=20.0)
    ch = channel_amplitudes(p, pulse)
    F = fidelity_exact(p, pulse)
    check(criterion, 8, {
        "alpha_ex0_sq": (abs(ch.alpha_ex0_sq - 19.2) <= 0.1, f"{ch.alpha_ex0_sq:.3f}"),
        "beta_ex_sq": (abs(ch.beta_ex_sq - 19.3) <= 0.1, f"{ch.beta_ex_sq:.3f}"),
        "alpha_ex_sq": (abs(ch.alpha_ex_sq - 0.0017) <= 0.0005, f"{ch.alpha_ex_sq:.5f}"),
        "F": (abs(F - 0.85) <= 0.01, f"{F:.4f}"),
    })


def test_criterion_09_approximate_fidelity(criterion):
    p = SystemParams.from_mhz(g_tw=100, **OVERCOUPLED)
    t_p = 0.318
    worst = 0.0
    for a2 in np.linspace(0, 50, 11):
        diff = abs(fidelity_exact(p, GaussianPulseSpec(t_p, a2)) - fidelity_approx(p, a2))
        worst = max(worst, diff)
    check(criterion, 9, {
        "kappa t_p": (True, f"{p.kappa * t_p:.1f}"),
        "max |F - F_approx|": (worst < 0.02, f"{worst:.4f}"),
    })


def test_criterion_10_property_suites(criterion, tmp_path):
    rng = np.random.default_rng(2024)
    worst_flux = 0.0
    for _ in range(25):
        p = SystemParams(kappa_ex=rng.uniform(1, 500), kappa_i=rng.uniform(0, 300),
                         gamma=rng.uniform(1, 100),
                         g_tw=complex(rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)),
                         delta_A=rng.uniform(-300, 300), delta_C=rng.uniform(-300, 300))
        tc = transfer_coefficients(p, rng.uniform(-2e3, 2e3))
        worst_flux = max(worst_flux, abs(float(tc.total()) - 1))

    worst_balance = 0.0
    worst_doubling = 0.0
    for g, Ep, h in ((50, 20, 0), (100, 60, 4), (150, 5, 0)):
        p = SystemParams.from_mhz(g_tw=g, E_p=Ep, **{**OVERCOUPLED, "h": h})
        o = solve_observables(p)
        lost = 2 * p.kappa_i * (o.n_a + o.n_b) + p.gamma * o.p_exc
        worst_balance = max(worst_balance,
                            abs(p.input_flux * (1 - o.T_F - o.T_B) - lost) / p.input_flux)
        fine = solve_observables(p, FockConfig(2 * o.truncation, 2 * o.truncation))
        for name in ("T_F", "T_B", "p_exc", "n_a", "n_b"):
            a, b = getattr(o, name), getattr(fine, name)
            worst_doubling = max(worst_doubling, abs(a - b) / max(abs(b), 1e-6))

    H = build_hamiltonian(SystemParams.from_mhz(g_tw=100, E_p=10, **OVERCOUPLED),
                          FockConfig(6, 6))
    herm = abs(H - H.conj().T).max()

    outs = [tmp_path / f"{i}.csv" for i in range(2)]
    for out in outs:
        cli.main(["spectrum", "--figure", "3", "--out", str(out)])
    identical = outs[0].read_bytes() == outs[1].read_bytes()

    check(criterion, 10, {
        "flux conservation": (worst_flux <= 1e-10, f"{worst_flux:.1e}"),
        "photon balance": (worst_balance <= 1e-6, f"{worst_balance:.1e}"),
        "Hermiticity": (herm <= 1e-12, f"{herm:.1e}"),
        "doubling": (worst_doubling <= 5e-3, f"{worst_doubling:.1e}"),
        "CLI reruns": (identical, "identical" if identical else "differ"),
    })


if __name__ == "__main__":
    sys.path.insert(0, str(Path(__file__).parent))
    from conftest import ACCEPTANCE_LINES, record_criterion

    import tempfile

    failed = 0
    for name, fn in sorted(globals().items()):
        if not name.startswith("test_criterion_"):
            continue
        kwargs = {"criterion": record_criterion}
        if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
            kwargs["tmp_path"] = Path(tempfile.mkdtemp())
        try:
            fn(**kwargs)
        except AssertionError:
            failed += 1
    for number in sorted(ACCEPTANCE_LINES):
        print(ACCEPTANCE_LINES[number])
    sys.exit(1 if failed else 0)
