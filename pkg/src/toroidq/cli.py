"""Command-line front end.

Usage::

    toroidq <command> [--config FILE] [--figure N] [--out PATH]
                      [--format csv|json] [--workers K] [--strict]

Configuration files are TOML with dotted keys, for example::

    command = "spectrum"
    params.kappa_ex = 10      # every rate is value/2pi in MHz
    params.kappa_i = 10
    params.gamma = 5.2
    params.g_tw = 100
    grid.start = -250
    grid.stop = 250
    grid.count = 501
    output.path = "fig2.csv"

Keys from ``--figure`` presets are loaded first, the file overrides them and
command-line flags override both.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linear, master, pulse as pulse_mod, semiclassical
from .model import TWO_PI, FockConfig, SystemParams
from .presets import preset

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

COMMANDS = ("spectrum", "sweep-coupling", "sweep-drive", "bistability",
            "pulse", "fidelity", "table1-check")
SWEEPS = {"spectrum", "sweep-coupling", "sweep-drive", "bistability", "fidelity", "pulse"}

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration

_SCHEMA = {
    "command": str,
    "workers": int,
    "strict": bool,
    "params.kappa_ex": float, "params.kappa_i": float, "params.h": float,
    "params.gamma": float, "params.g_tw": float, "params.g_tw_imag": float,
    "params.delta_A": float, "params.delta_C": float, "params.E_p": float,
    "params.atom_offset": float,
    "fock.n_a": int, "fock.n_b": int,
    "grid.start": float, "grid.stop": float, "grid.count": int, "grid.scale": str,
    "pulse.t_p_ns": float, "pulse.alpha_sq": float,
    "output.path": str, "output.format": str,
    "spectrum.solver": str, "spectrum.atom": str,
    "solver.method": str, "solver.max_dim": int,
}


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _line_of(text: str, key: str):
    leaf = key.split(".")[-1]
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith(key) or s.startswith(leaf + " ") or s.startswith(leaf + "="):
            return i
    return None


def _coerce(key, value, text=""):
    kind = _SCHEMA.get(key)
    where = ""
    if text:
        line = _line_of(text, key)
        where = f" (line {line})" if line else ""
    if kind is None:
        raise ConfigError(f"unknown key '{key}'{where}")
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    raise ConfigError(f"field '{key}'{where}: expected {kind.__name__}, got {value!r}")


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return {k: _coerce(k, v, text) for k, v in _flatten(raw).items()}


@dataclass
class RunConfig:
    command: str
    params: SystemParams
    atom_offset: float = 0.0
    fock: FockConfig | None = None
    grid: np.ndarray | None = None
    pulse: dict = field(default_factory=dict)
    output: Path | None = None
    fmt: str = "csv"
    workers: int = 1
    strict: bool = False
    options: dict = field(default_factory=dict)


def _grid(flat):
    keys = [k for k in ("grid.start", "grid.stop", "grid.count") if k in flat]
    if not keys:
        return None
    if len(keys) < 3:
        raise ConfigError("grid needs start, stop and count")
    count = flat["grid.count"]
    if count < 2:
        raise ConfigError(f"field 'grid.count': need at least 2 points, got {count}")
    scale = flat.get("grid.scale", "linear")
    if scale == "linear":
        return np.linspace(flat["grid.start"], flat["grid.stop"], count)
    if scale == "log":
        if flat["grid.start"] <= 0 or flat["grid.stop"] <= 0:
            raise ConfigError("log grid needs positive start and stop")
        return np.geomspace(flat["grid.start"], flat["grid.stop"], count)
    raise ConfigError(f"field 'grid.scale': expected 'linear' or 'log', got {scale!r}")


def build_config(flat: dict) -> RunConfig:
    command = flat.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"field 'command': expected one of {COMMANDS}, got {command!r}")
    p = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith("params.")}
    offset = p.pop("atom_offset", 0.0)
    g = complex(p.pop("g_tw", 0.0), p.pop("g_tw_imag", 0.0))
    for req in ("kappa_ex", "kappa_i"):
        if req not in p:
            raise ConfigError(f"missing field 'params.{req}'")
    try:
        params = SystemParams.from_mhz(g_tw=g, **p)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc
    if params.kappa <= 0:
        raise ConfigError("params: kappa_ex + kappa_i must be > 0")
    fock = None
    if "fock.n_a" in flat or "fock.n_b" in flat:
        fock = FockConfig(flat.get("fock.n_a", flat.get("fock.n_b")),
                          flat.get("fock.n_b", flat.get("fock.n_a")))
    grid = _grid(flat)
    if command in SWEEPS and grid is None:
        raise ConfigError(f"command '{command}' needs grid.start/stop/count")
    fmt = flat.get("output.format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"field 'output.format': expected csv or json, got {fmt!r}")
    workers = flat.get("workers", 1)
    if workers < 1:
        raise ConfigError("field 'workers': must be >= 1")
    out = flat.get("output.path")
    pulse = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith("pulse.")}
    options = {k: v for k, v in flat.items()
               if k.startswith(("spectrum.", "solver."))}
    return RunConfig(command, params, TWO_PI * offset, fock, grid, pulse,
                     Path(out) if out else None, fmt, workers,
                     flat.get("strict", False), options)


# --------------------------------------------------------------------------
# commands; each returns (columns, rows) with rows as lists of values


def _obs_columns(key):
    return [key, "Re_a", "Im_a", "Re_b", "Im_b", "Re_A", "Im_A", "Re_B", "Im_B",
            "n_a", "n_b", "p_exc", "T_F", "T_B", "g2_FF", "g2_BB", "truncation",
            "status"]


def _obs_rows(x_mhz, table):
    rows = []
    for i, x in enumerate(x_mhz):
        err = table["error"][i]

        def c(name):
            return complex(math.nan, math.nan) if err else complex(table[name][i])
        rows.append([x, c("a_mean").real, c("a_mean").imag, c("b_mean").real,
                     c("b_mean").imag, c("A_mean").real, c("A_mean").imag,
                     c("B_mean").real, c("B_mean").imag, table["n_a"][i],
                     table["n_b"][i], table["p_exc"][i], table["T_F"][i],
                     table["T_B"][i], table["g2_FF"][i], table["g2_BB"][i],
                     int(table["truncation"][i]) if not err else 0,
                     "ok" if not err else f"failed: {err}"])
    return rows


def _solver_kwargs(cfg):
    kw = {"method": cfg.options.get("solver.method", "auto")}
    if "solver.max_dim" in cfg.options:
        kw["max_dim"] = cfg.options["solver.max_dim"]
    return kw


def cmd_spectrum(cfg: RunConfig):
    det = TWO_PI * cfg.grid
    key = "Delta_C_over_2pi_MHz"
    if cfg.options.get("spectrum.solver", "linear") == "master":
        table = master.spectrum_strong_drive(
            cfg.params, det, cfg.fock, cfg.workers, cfg.strict,
            atom_offset=cfg.atom_offset, **_solver_kwargs(cfg))
        return _obs_columns(key), _obs_rows(cfg.grid, table)
    which = cfg.options.get("spectrum.atom", "both")
    if which not in ("both", "present", "absent"):
        raise ConfigError("field 'spectrum.atom': expected both, present or absent")
    cols, data = [key], [cfg.grid]
    for label, present in (("", True), ("_no_atom", False)):
        if which == "both" or (which == "present") == present:
            t = linear.spectrum(cfg.params, det, present, cfg.atom_offset)
            cols += [f"T_F{label}", f"T_B{label}"]
            data += [t["T_F"], t["T_B"]]
    return cols, [list(r) for r in zip(*data)]


def cmd_sweep_coupling(cfg):
    table = master.sweep_coupling(cfg.params, TWO_PI * cfg.grid, cfg.fock,
                                  cfg.workers, cfg.strict, **_solver_kwargs(cfg))
    return _obs_columns("g_tw_over_2pi_MHz"), _obs_rows(cfg.grid, table)


def cmd_sweep_drive(cfg):
    table = master.sweep_drive(cfg.params, TWO_PI * cfg.grid, cfg.fock,
                               cfg.workers, cfg.strict, **_solver_kwargs(cfg))
    return _obs_columns("E_p_over_2pi_MHz"), _obs_rows(cfg.grid, table)


def cmd_bistability(cfg):
    pts = semiclassical.bistability_curve(cfg.params, cfg.grid)
    cols = ["X", "Y", "A_mag", "E_p_over_2pi_MHz"]
    rows = [[p.X_mag, p.Y_mag, p.A_mag, p.Ep / TWO_PI] for p in pts]
    try:
        tp = semiclassical.turning_points(cfg.params)
    except ValueError:
        return cols, rows
    cols.append("turning_point")
    for r in rows:
        r.append("")
    rows.append([tp.X_lower, float("nan"), float("nan"), tp.Ep_lower / TWO_PI, "lower"])
    rows.append([tp.X_upper, float("nan"), float("nan"), tp.Ep_upper / TWO_PI, "upper"])
    return cols, rows


def _pulse_spec(cfg, alpha_sq=None):
    if "t_p_ns" not in cfg.pulse:
        raise ConfigError("missing field 'pulse.t_p_ns'")
    t_p = cfg.pulse["t_p_ns"] * 1e-3
    if alpha_sq is None:
        if "alpha_sq" in cfg.pulse:
            alpha_sq = cfg.pulse["alpha_sq"]
        elif cfg.params.E_p != 0:
            return pulse_mod.GaussianPulseSpec.from_drive(
                abs(cfg.params.E_p), t_p, cfg.params.kappa_ex)
        else:
            raise ConfigError("pulse needs pulse.alpha_sq or params.E_p")
    return pulse_mod.GaussianPulseSpec(t_p, alpha_sq)


def cmd_pulse(cfg):
    spec = _pulse_spec(cfg)
    times = cfg.grid * 1e-3
    cols = ["t_ns", "input_flux", "forward_g0_flux", "backward_g_flux", "forward_g_flux"]
    out = {ch: pulse_mod.output_pulse_time_domain(cfg.params, spec, ch, times)["flux"]
           for ch in ("input", "forward_g0", "backward_g", "forward_g")}
    return cols, [list(r) for r in zip(cfg.grid, out["input"], out["forward_g0"],
                                       out["backward_g"], out["forward_g"])]


def cmd_fidelity(cfg):
    base = _pulse_spec(cfg, alpha_sq=1.0)
    cols = ["alpha_sq", "F", "F_approx", "F_refl", "F_refl_approx",
            "alpha_ex_sq", "beta_ex_sq", "alpha_ex0_sq", "Re_xi", "Im_xi"]
    rows = []
    for a2 in cfg.grid:
        spec = pulse_mod.GaussianPulseSpec(base.t_p, float(a2))
        ch = pulse_mod.channel_amplitudes(cfg.params, spec)
        xi = pulse_mod.overlap_factor_xi(cfg.params, spec)
        refl = pulse_mod.reflection_fidelity(cfg.params, spec)
        rows.append([a2, pulse_mod.fidelity_exact(cfg.params, spec),
                     pulse_mod.fidelity_approx(cfg.params, a2), refl.exact, refl.approx,
                     ch.alpha_ex_sq, ch.beta_ex_sq, ch.alpha_ex0_sq, xi.real, xi.imag])
    return cols, rows


TABLE1_RTOL = 1e-2


def table1_rows(params: SystemParams, rtol: float = TABLE1_RTOL):
    """Compare linear amplitudes with the overcoupled-limit table entries.

    Errors are relative to the natural scale of each entry: ``E_p/kappa_ex``
    for intracavity amplitudes and ``|<a_in>|`` for output fields, so that
    entries whose expected value is zero are still meaningful.
    """
    p = params.with_(delta_A=params.h, delta_C=params.h,
                     E_p=params.E_p if params.E_p != 0 else TWO_PI * 1.0)
    E, kex = p.E_p, p.kappa_ex
    a_in = p.a_in
    r2 = math.sqrt(2.0)
    expected = {
        "no_atom": {"a": -1j * E / kex, "b": 0, "A": -1j * E / (r2 * kex),
                    "B": -1j * E / (r2 * kex), "a_out": a_in, "b_out": 0},
        "strong_atom": {"a": -1j * E / (2 * kex), "b": 1j * E / (2 * kex), "A": 0,
                        "B": -1j * E / (r2 * kex), "a_out": 0, "b_out": -a_in},
    }
    rows = []
    for regime, exp in expected.items():
        q = p.with_(g_tw=0.0) if regime == "no_atom" else p
        ss = linear.linear_steady_state(q)
        got = {"a": ss.a_ss, "b": ss.b_ss, "A": ss.A_ss, "B": ss.B_ss,
               "a_out": ss.a_out_ex, "b_out": ss.b_out_ex}
        for name, e in exp.items():
            scale = abs(a_in) if name.endswith("out") else abs(E) / kex
            err = abs(got[name] - e) / scale
            rows.append([regime, name, got[name].real, got[name].imag,
                         complex(e).real, complex(e).imag, err,
                         "pass" if err <= rtol else "fail"])
    return rows


def cmd_table1(cfg):
    cols = ["regime", "quantity", "Re_computed", "Im_computed", "Re_expected",
            "Im_expected", "rel_error", "result"]
    return cols, table1_rows(cfg.params)


DISPATCH = {
    "spectrum": cmd_spectrum,
    "sweep-coupling": cmd_sweep_coupling,
    "sweep-drive": cmd_sweep_drive,
    "bistability": cmd_bistability,
    "pulse": cmd_pulse,
    "fidelity": cmd_fidelity,
    "table1-check": cmd_table1,
}


# --------------------------------------------------------------------------
# output


def fmt_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v + 0.0:.11e}"  # folds -0.0 into 0.0


def render(columns, rows, fmt="csv") -> str:
    if fmt == "csv":
        lines = [",".join(columns)]
        for r in rows:
            cells = []
            for v in r:
                s = fmt_value(v)
                if any(ch in s for ch in ',"\n'):
                    s = '"' + s.replace('"', '""') + '"'
                cells.append(s)
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    records = []
    for r in rows:
        rec = {}
        for c, v in zip(columns, r):
            s = fmt_value(v)
            if isinstance(v, str):
                rec[c] = v
            elif s in ("nan", "inf", "-inf"):
                rec[c] = None
            elif isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                rec[c] = int(v)
            else:
                rec[c] = float(s)
        records.append(rec)
    return json.dumps({"columns": list(columns), "rows": records}, indent=1) + "\n"


def run(cfg: RunConfig):
    """Execute a configured command; returns ``(columns, rows, text)``."""
    columns, rows = DISPATCH[cfg.command](cfg)
    text = render(columns, rows, cfg.fmt)
    if cfg.output is not None:
        cfg.output.parent.mkdir(parents=True, exist_ok=True)
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return columns, rows, text


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        prog="toroidq",
        description="Atom-microtoroid cavity QED calculations with CSV/JSON output.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--figure", help="load a figure preset (number or name)")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--workers", type=int)
    parser.add_argument("--strict", action="store_true",
                        help="abort on the first failed point (exit code 2)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        flat = {}
        if args.figure is not None:
            try:
                flat.update(_flatten(preset(args.figure)))
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from exc
        if args.config:
            flat.update(load_config_file(args.config))
        flat["command"] = args.command
        if args.out:
            flat["output.path"] = args.out
        if args.format:
            flat["output.format"] = args.format
        if args.workers is not None:
            flat["workers"] = args.workers
        if args.strict:
            flat["strict"] = True
        for k, v in list(flat.items()):
            flat[k] = _coerce(k, v)
        cfg = build_config(flat)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        _, rows, text = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        if cfg.strict:
            print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
        raise
    if cfg.output is None:
        sys.stdout.write(text)
    failed = sum(1 for r in rows if isinstance(r[-1], str) and r[-1].startswith("failed"))
    if failed:
        print(f"{failed} point(s) failed; see status column", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
