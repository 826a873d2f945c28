"""Parameter sweeps evaluating the analytic model and the simulator side by side."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Mapping, Sequence

from mmv2v import analytics, montecarlo
from mmv2v.analytics import DEFAULT_QUAD, QuadratureSpec
from mmv2v.experiments.config import ConfigError, build_scenario
from mmv2v.montecarlo import ScenarioConfig

SWEEP_VARIABLES = ("lt", "alpha", "d_safe", "epsilon")
MODES = ("analytic", "simulated")
UNITS = {"lt": "m", "alpha": "-", "d_safe": "m", "epsilon": "dB"}


@dataclass(frozen=True)
class SweepSpec:
    sweep_variable: str
    values: tuple[float, ...]
    base: ScenarioConfig
    modes: tuple[str, ...] = MODES
    overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError("sweep", f"must be one of {', '.join(SWEEP_VARIABLES)}, got {self.sweep_variable!r}")
        if not self.values:
            raise ConfigError("values", "empty value list")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ConfigError("values", "must be strictly increasing")
        if not self.modes or any(m not in MODES for m in self.modes):
            raise ConfigError("modes", f"must be a non-empty subset of {', '.join(MODES)}, got {self.modes!r}")
        if self.sweep_variable in self.overrides:
            raise ConfigError(self.sweep_variable, "is swept and must not also be set in the base config")
        object.__setattr__(self, "overrides", dict(self.overrides))

    @classmethod
    def create(
        cls,
        sweep_variable: str,
        values: Sequence[float],
        overrides: Mapping[str, float] | None = None,
        modes: Sequence[str] = MODES,
    ) -> "SweepSpec":
        """Build and validate a sweep; every point must be a valid scenario."""
        overrides = dict(overrides or {})
        spec = cls(
            sweep_variable=sweep_variable,
            values=tuple(float(v) for v in values),
            base=build_scenario(overrides),
            modes=tuple(modes),
            overrides=overrides,
        )
        for v in spec.values:
            spec.config_at(v)
        return spec

    def config_at(self, value: float) -> ScenarioConfig:
        return build_scenario({**self.overrides, self.sweep_variable: value})

    def with_overrides(self, **extra) -> "SweepSpec":
        return SweepSpec.create(self.sweep_variable, self.values, {**self.overrides, **extra}, self.modes)


@dataclass(frozen=True)
class SweepRow:
    """One sweep point. Delays in seconds, reliabilities as probabilities;
    quantities from a mode that was not run are NaN."""

    value: float
    analytic_delay: float = math.nan
    analytic_reliability: float = math.nan
    sim_delay: float = math.nan
    sim_delay_ci: float = math.nan
    sim_reliability: float = math.nan
    sim_reliability_ci: float = math.nan
    stranded_fraction: float = math.nan
    hop_count_analytic: float = math.nan
    mean_hops_sim: float = math.nan


ROW_FIELDS = tuple(f.name for f in fields(SweepRow))


@dataclass
class SweepResult:
    variable: str
    rows: list[SweepRow]

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]


class SweepError(RuntimeError):
    """A sweep point failed; ``cause`` is the original exception."""

    def __init__(self, variable: str, value: float, cause: BaseException):
        super().__init__(f"{variable}={value!r}: {cause}")
        self.variable = variable
        self.value = value
        self.cause = cause


def evaluate_point(
    spec: SweepSpec,
    value: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    sim_workers: int = 1,
) -> SweepRow:
    try:
        cfg = spec.config_at(value)
        out: dict[str, float] = {
            "value": value,
            "hop_count_analytic": analytics.hop_count(cfg.r_valid, cfg.lt),
        }
        if "analytic" in spec.modes:
            out["analytic_delay"] = analytics.avg_total_delay(cfg.budget, cfg.r_valid, cfg.lt, quad).value
            out["analytic_reliability"] = analytics.avg_total_reliability(
                cfg.budget, cfg.r_valid, cfg.lt, cfg.epsilon, quad
            ).value
        if "simulated" in spec.modes:
            summary = montecarlo.simulate(cfg, workers=sim_workers)
            delay, rel = summary.delay(), summary.reliability()
            out.update(
                sim_delay=delay.mean,
                sim_delay_ci=delay.ci_halfwidth,
                sim_reliability=rel.mean,
                sim_reliability_ci=rel.ci_halfwidth,
                stranded_fraction=summary.stranded_fraction,
                mean_hops_sim=summary.mean_hops,
            )
        return SweepRow(**out)
    except SweepError:
        raise
    except Exception as exc:
        raise SweepError(spec.sweep_variable, value, exc) from exc


def run_sweep(spec: SweepSpec, workers: int = 1, quad: QuadratureSpec = DEFAULT_QUAD) -> SweepResult:
    """Evaluate every sweep value; rows come back in sweep order.

    Every point reuses the base seed, so points share replication streams.
    With one point and several workers the replications are split instead.
    """
    if workers <= 1 or len(spec.values) == 1:
        rows = [evaluate_point(spec, v, quad, sim_workers=workers) for v in spec.values]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(evaluate_point, spec, v, quad) for v in spec.values]
            rows = [f.result() for f in futures]
    return SweepResult(spec.sweep_variable, rows)
