"""Named parameter sets for the reference figures.

Rates are ``value/2pi`` in MHz, times in ns.  Presets are addressed by
name or by figure number 2 through 9: 2-6 are the spectra, sweeps and
bistability curves, 7 and 9 the fidelity curves and 8 the pulse shapes.
The strong-drive spectrum has a name only.
"""
from __future__ import annotations

import copy

_OVERCOUPLED = {"kappa_ex": 30.0, "kappa_i": 0.5, "h": 0.0, "gamma": 5.2}

PRESETS = {
    "critical-spectrum": {
        "figure": 2,
        "command": "spectrum",
        "params": {"kappa_ex": 10.0, "kappa_i": 10.0, "h": 0.0, "gamma": 5.2,
                   "g_tw": 100.0},
        "grid": {"start": -250.0, "stop": 250.0, "count": 501},
    },
    "overcoupled-spectrum": {
        "figure": 3,
        "command": "spectrum",
        "params": {"kappa_ex": 20.0, "kappa_i": 0.2, "h": 0.0, "gamma": 5.2,
                   "g_tw": 100.0},
        "grid": {"start": -250.0, "stop": 250.0, "count": 501},
    },
    "coupling-sweep": {
        "figure": 4,
        "command": "sweep-coupling",
        "params": dict(_OVERCOUPLED, E_p=10.0),
        "grid": {"start": 0.0, "stop": 200.0, "count": 41},
    },
    "drive-sweep": {
        "figure": 5,
        "command": "sweep-drive",
        "params": dict(_OVERCOUPLED, g_tw=100.0),
        "grid": {"start": 1.0, "stop": 150.0, "count": 31},
    },
    "bistability": {
        "figure": 6,
        "command": "bistability",
        "params": dict(_OVERCOUPLED, g_tw=100.0),
        "grid": {"start": 0.01, "stop": 30.0, "count": 400},
    },
    "strong-drive-spectrum": {
        "command": "spectrum",
        "params": dict(_OVERCOUPLED, g_tw=150.0, E_p=50.0),
        "spectrum": {"solver": "master"},
        "grid": {"start": -300.0, "stop": 300.0, "count": 61},
    },
    "fidelity-coupling": {
        "figure": 7,
        "command": "fidelity",
        "params": dict(_OVERCOUPLED, g_tw=100.0),
        "pulse": {"t_p_ns": 318.0},
        "grid": {"start": 0.0, "stop": 50.0, "count": 26},
    },
    "fidelity-loss": {
        "figure": 9,
        "command": "fidelity",
        "params": {"kappa_ex": 50.0, "kappa_i": 0.5, "h": 0.0, "gamma": 5.2,
                   "g_tw": 100.0},
        "pulse": {"t_p_ns": 159.0},
        "grid": {"start": 0.0, "stop": 50.0, "count": 26},
    },
    "pulses": {
        "figure": 8,
        "command": "pulse",
        "params": {"kappa_ex": 50.0, "kappa_i": 0.5, "h": 0.0, "gamma": 5.2,
                   "g_tw": 100.0},
        "pulse": {"t_p_ns": 159.0, "alpha_sq": 20.0},
        "grid": {"start": -1000.0, "stop": 1000.0, "count": 201},
    },
    "table1": {
        "command": "table1-check",
        "params": {"kappa_ex": 30.0, "kappa_i": 0.01, "h": 0.0, "gamma": 5.2,
                   "g_tw": 1.0e4, "E_p": 10.0},
    },
}

BY_FIGURE = {v["figure"]: k for k, v in PRESETS.items() if "figure" in v}


def preset(key) -> dict:
    """Preset by figure number (int or numeric string) or by name."""
    if isinstance(key, str) and key.isdigit():
        key = int(key)
    if isinstance(key, int):
        if key not in BY_FIGURE:
            raise KeyError(f"no preset for figure {key}; known: {sorted(BY_FIGURE)}")
        key = BY_FIGURE[key]
    if key not in PRESETS:
        raise KeyError(f"unknown preset {key!r}")
    out = copy.deepcopy(PRESETS[key])
    out.pop("figure", None)
    return out
