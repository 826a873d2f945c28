"""Flat ``key = value`` configuration files.

One key per line, ``#`` starts a comment, blank lines are ignored. Keys not
given fall back to :data:`DEFAULTS`. A file that names ``sweep`` describes a
sweep (see :class:`~mmv2v.experiments.sweep.SweepSpec`); otherwise it
describes a single scenario.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

from mmv2v.geometry import GridGeometry
from mmv2v.montecarlo import ScenarioConfig
from mmv2v.radiolink import AntennaPattern, LinkBudget
from mmv2v.traffic import HeadwayModel

# Scenario defaults. lt, alpha and d_safe are usually swept; the values here
# apply when they are not.
DEFAULTS: dict[str, float | int | None] = {
    "r_valid": 500.0 * math.sqrt(2.0),   # m
    "lt": 100.0,                         # m
    "rx": 50.0,                          # m
    "ry": 50.0,                          # m
    "eta": None,                         # 1/m, derived as 1/rx + 1/ry
    "d_safe": 4.0,                       # m
    "mu": 0.08,                          # 1/m
    "p_t": 30.0,                         # dBm
    "n0": -174.0,                        # dBm/Hz
    "b": 200e6,                          # Hz
    "alpha": 2.9,
    "sigma": 4.0,                        # dB
    "t_t": 4e-3,                         # s
    "t_p": 0.2e-3,                       # s
    "t_proc": 20e-6,                     # s
    "p_s": 24000.0,                      # bits
    "g_main": 10.0,                      # dB
    "g_side": -10.0,                     # dB
    "psi_tx": 40.0,                      # deg
    "psi_rx": 40.0,                      # deg
    "phi_tx": 10.0,                      # deg
    "phi_rx": 10.0,                      # deg
    "epsilon": 5.0,                      # dB
    "replications": 10_000,
    "seed": 1,
    "max_hops": None,                    # 10 x analytic hop count
}

INTEGER_KEYS = {"replications", "seed", "max_hops"}
SWEEP_KEYS = {"sweep", "values", "modes"}


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _number(key: str, text: str):
    try:
        if key in INTEGER_KEYS:
            value = int(text, 0)
        else:
            value = float(text)
    except ValueError:
        kind = "integer" if key in INTEGER_KEYS else "number"
        raise ConfigError(key, f"expected a {kind}, got {text!r}") from None
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(key, f"value must be finite, got {text!r}")
    return value


def parse_values(text: str) -> list[float]:
    """``60,80,100`` or an inclusive range ``60:240:20``."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(max(n, 0))]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError("values", f"cannot parse value list {text!r}") from None


def read_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS and key not in SWEEP_KEYS:
            raise ConfigError(key, f"unknown key (line {lineno})")
        if key in pairs:
            raise ConfigError(key, f"given twice (line {lineno})")
        pairs[key] = value
    return pairs


def build_scenario(values: dict) -> ScenarioConfig:
    """Scenario from a complete key table; invariant violations name the key."""
    v = {**DEFAULTS, **values}

    def make(keys, factory, *args, **kwargs):
        try:
            return factory(*args, **kwargs)
        except ValueError as exc:
            text = str(exc)
            hits = [(m.start(), k) for k in keys if (m := re.search(rf"\b{k}\b", text))]
            raise ConfigError(min(hits)[1] if hits else keys[0], text) from None

    geom = make(["rx", "ry", "eta"], GridGeometry, v["rx"], v["ry"], v["eta"])
    headway = make(["d_safe", "mu"], HeadwayModel, v["d_safe"], v["mu"])
    antenna = make(
        ["g_main", "g_side", "phi_tx", "phi_rx", "psi_tx", "psi_rx"], AntennaPattern,
        v["g_main"], v["g_side"], v["psi_tx"], v["psi_rx"], v["phi_tx"], v["phi_rx"],
    )
    budget = make(
        ["b", "sigma", "alpha", "t_p", "t_t", "t_proc", "p_s"], LinkBudget,
        p_t=v["p_t"], n0=v["n0"], b=v["b"], alpha=v["alpha"], sigma=v["sigma"],
        t_t=v["t_t"], t_p=v["t_p"], t_proc=v["t_proc"], p_s=v["p_s"], antenna=antenna,
    )
    return make(
        ["lt", "r_valid", "replications", "seed", "max_hops"], ScenarioConfig,
        r_valid=v["r_valid"], lt=v["lt"], geom=geom, headway=headway, budget=budget,
        epsilon=v["epsilon"], replications=v["replications"], seed=v["seed"],
        max_hops=v["max_hops"],
    )


def split_config(text: str) -> tuple[dict, dict[str, str]]:
    """(typed scenario overrides, raw sweep keys) from config text."""
    pairs = read_pairs(text)
    numeric = {k: _number(k, s) for k, s in pairs.items() if k not in SWEEP_KEYS}
    return numeric, {k: s for k, s in pairs.items() if k in SWEEP_KEYS}


def parse_config(text: str):
    """Parse config text into a ScenarioConfig, or a SweepSpec if ``sweep`` is set."""
    from mmv2v.experiments.sweep import SweepSpec

    numeric, pairs = split_config(text)
    if "sweep" not in pairs:
        for key in ("values", "modes"):
            if key in pairs:
                raise ConfigError(key, "only valid together with 'sweep'")
        return build_scenario(numeric)
    if "values" not in pairs:
        raise ConfigError("values", "required when 'sweep' is given")
    modes = pairs.get("modes", "analytic,simulated")
    return SweepSpec.create(
        sweep_variable=pairs["sweep"],
        values=parse_values(pairs["values"]),
        overrides=numeric,
        modes=[m.strip() for m in modes.split(",") if m.strip()],
    )


def load_config(path: str | Path):
    return parse_config(Path(path).read_text(encoding="utf-8"))
