"""Discrete-vehicle simulation of multi-hop delivery with random relays.

One replication draws a fresh vehicle field, walks a message from the
source to the destination by picking, at each hop, a uniformly random
vehicle in Manhattan range with positive forward progress, and draws an
independent shadowing value for every hop.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mmv2v.analytics import hop_count
from mmv2v.geometry import GridGeometry, Point, forward_progress, manhattan_distance
from mmv2v.radiolink import LinkBudget, single_hop_delay, snr_db
from mmv2v.traffic import HeadwayModel, VehicleField, populate_grid, scenario_bounds

Z95 = 1.959963984540054


@dataclass(frozen=True)
class ScenarioConfig:
    r_valid: float = 500.0 * math.sqrt(2.0)
    lt: float = 100.0
    geom: GridGeometry = field(default_factory=GridGeometry)
    headway: HeadwayModel = field(default_factory=HeadwayModel)
    budget: LinkBudget = field(default_factory=LinkBudget)
    epsilon: float = 5.0
    replications: int = 10_000
    seed: int = 1
    max_hops: int | None = None

    def __post_init__(self) -> None:
        if not 0 < self.lt < self.r_valid:
            raise ValueError(f"need 0 < lt < r_valid, got lt={self.lt}, r_valid={self.r_valid}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        # tolerate round-off so that k = 20.000000000000004 still means 20 hops
        floor = math.ceil(hop_count(self.r_valid, self.lt) - 1e-9)
        if self.max_hops is None:
            object.__setattr__(self, "max_hops", 10 * floor)
        elif self.max_hops < floor:
            raise ValueError(f"max_hops={self.max_hops} is below the analytic hop count {floor}")

    @property
    def source(self) -> Point:
        return Point(0.0, 0.0)

    @property
    def dest(self) -> Point:
        c = -self.r_valid / math.sqrt(2.0)
        return Point(c, c)

    def replication_rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(index,)))


class Outcome(str, enum.Enum):
    DELIVERED = "delivered"
    STRANDED = "stranded"
    HOP_CAP_EXCEEDED = "hop_cap_exceeded"


@dataclass(frozen=True)
class Hop:
    tx: Point
    rx: Point
    d_man: float
    fp: float
    snr_db: float
    hop_delay_s: float
    hop_success: bool


@dataclass
class PathRecord:
    hops: list[Hop]
    outcome: Outcome
    total_delay_s: float = math.nan

    @property
    def delivered(self) -> bool:
        return self.outcome is Outcome.DELIVERED

    @property
    def all_hops_succeed(self) -> bool:
        return self.delivered and all(h.hop_success for h in self.hops)


@dataclass(frozen=True)
class Estimate:
    mean: float
    ci_halfwidth: float
    n: int
    stranded_fraction: float
    valid: bool = True


def candidate_indices(current: Point, dest: Point, field: VehicleField, lt: float) -> np.ndarray:
    """Vehicles within Manhattan distance ``lt`` that make positive progress."""
    cx, cy = float(current[0]), float(current[1])
    ax, ay = dest[0] - cx, dest[1] - cy
    if len(field) <= field.SCAN_LIMIT:
        dx = field.x - cx
        dy = field.y - cy
        # Sign of the projection numerator equals the sign of the progress.
        return np.flatnonzero((np.abs(dx) + np.abs(dy) <= lt) & (dx * ax + dy * ay > 0))
    idx = field.within(current, lt)
    if idx.size == 0:
        return idx
    return idx[(field.x[idx] - cx) * ax + (field.y[idx] - cy) * ay > 0]


def select_relay(
    current: Point,
    dest: Point,
    field: VehicleField,
    lt: float,
    rng: np.random.Generator,
) -> Point | None:
    """Destination if reachable, else a uniform positive-progress neighbour.

    Returns ``None`` when no vehicle in range moves the message forward.
    """
    if manhattan_distance(current, dest) <= lt:
        return Point(*dest)
    idx = candidate_indices(current, dest, field, lt)
    if idx.size == 0:
        return None
    pick = idx[rng.integers(idx.size)]
    return Point(float(field.x[pick]), float(field.y[pick]))


def walk(
    source: Point,
    dest: Point,
    field: VehicleField,
    lt: float,
    budget: LinkBudget,
    epsilon: float,
    max_hops: int,
    rng: np.random.Generator,
) -> PathRecord:
    """Relay a message from ``source`` to ``dest`` through ``field``."""
    dest = Point(*dest)
    tx = Point(*source)
    hops: list[Hop] = []
    while tx != dest:
        if len(hops) >= max_hops:
            return PathRecord(hops, Outcome.HOP_CAP_EXCEEDED)
        rx = select_relay(tx, dest, field, lt, rng)
        if rx is None:
            return PathRecord(hops, Outcome.STRANDED)
        d_man = manhattan_distance(tx, rx)
        rho = float(rng.normal(0.0, budget.sigma)) if budget.sigma > 0 else 0.0
        snr = snr_db(budget, d_man, rho)
        hops.append(Hop(
            tx=tx,
            rx=rx,
            d_man=d_man,
            fp=forward_progress(tx, rx, dest),
            snr_db=snr,
            hop_delay_s=single_hop_delay(budget, snr),
            hop_success=snr >= epsilon,
        ))
        tx = rx
    total = math.fsum(h.hop_delay_s for h in hops) + (len(hops) - 1) * budget.t_proc
    return PathRecord(hops, Outcome.DELIVERED, total)


def run_path(config: ScenarioConfig, field: VehicleField, rng: np.random.Generator) -> PathRecord:
    return walk(
        config.source, config.dest, field, config.lt,
        config.budget, config.epsilon, config.max_hops, rng,
    )


def replicate(config: ScenarioConfig, index: int) -> PathRecord:
    """Replication ``index``: its own field and path, seeded from (seed, index)."""
    rng = config.replication_rng(index)
    bounds = scenario_bounds(config.source, config.dest, config.lt)
    field = populate_grid(config.geom, config.headway, bounds, rng)
    return run_path(config, field, rng)


@dataclass
class SimulationSummary:
    """Per-replication outcomes in replication order, plus optional hop data."""

    delivered: np.ndarray
    success: np.ndarray
    stranded: np.ndarray
    total_delay: np.ndarray
    n_hops: np.ndarray
    hop_fp: np.ndarray | None = None
    hop_d_man: np.ndarray | None = None
    hop_is_final: np.ndarray | None = None

    @property
    def replications(self) -> int:
        return int(self.delivered.size)

    @property
    def stranded_fraction(self) -> float:
        return float(self.stranded.mean())

    @property
    def mean_hops(self) -> float:
        return float(self.n_hops[self.delivered].mean()) if self.delivered.any() else math.nan

    def delay(self) -> Estimate:
        d = self.total_delay[self.delivered]
        n = int(d.size)
        if n == 0:
            return Estimate(math.nan, math.nan, 0, self.stranded_fraction, valid=False)
        half = Z95 * float(d.std(ddof=1)) / math.sqrt(n) if n > 1 else math.inf
        return Estimate(float(d.mean()), half, n, self.stranded_fraction)

    def reliability(self) -> Estimate:
        n = self.replications
        p = float(self.success.mean())
        half = Z95 * math.sqrt(p * (1.0 - p) / n)
        return Estimate(p, half, n, self.stranded_fraction)


def _run_chunk(config: ScenarioConfig, start: int, stop: int, keep_hops: bool) -> dict:
    out = {
        "delivered": [], "success": [], "stranded": [], "total_delay": [], "n_hops": [],
        "hop_fp": [], "hop_d_man": [], "hop_is_final": [],
    }
    for i in range(start, stop):
        rec = replicate(config, i)
        out["delivered"].append(rec.delivered)
        out["success"].append(rec.all_hops_succeed)
        out["stranded"].append(rec.outcome is Outcome.STRANDED)
        out["total_delay"].append(rec.total_delay_s)
        out["n_hops"].append(len(rec.hops))
        if keep_hops:
            last = len(rec.hops) - 1
            for j, h in enumerate(rec.hops):
                out["hop_fp"].append(h.fp)
                out["hop_d_man"].append(h.d_man)
                out["hop_is_final"].append(rec.delivered and j == last)
    return out


def simulate(config: ScenarioConfig, workers: int = 1, keep_hops: bool = False) -> SimulationSummary:
    """Run all replications; results do not depend on ``workers``."""
    n = config.replications
    if workers <= 1 or n < 2 * workers:
        chunks = [_run_chunk(config, 0, n, keep_hops)]
    else:
        edges = np.linspace(0, n, workers * 4 + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_chunk, config, int(a), int(b), keep_hops)
                for a, b in zip(edges[:-1], edges[1:]) if b > a
            ]
            chunks = [f.result() for f in futures]

    def cat(key, dtype):
        return np.array([v for c in chunks for v in c[key]], dtype=dtype)

    return SimulationSummary(
        delivered=cat("delivered", bool),
        success=cat("success", bool),
        stranded=cat("stranded", bool),
        total_delay=cat("total_delay", float),
        n_hops=cat("n_hops", int),
        hop_fp=cat("hop_fp", float) if keep_hops else None,
        hop_d_man=cat("hop_d_man", float) if keep_hops else None,
        hop_is_final=cat("hop_is_final", bool) if keep_hops else None,
    )


def estimate(config: ScenarioConfig, workers: int = 1) -> tuple[Estimate, Estimate]:
    """(delay over delivered paths, reliability over all replications)."""
    summary = simulate(config, workers)
    return summary.delay(), summary.reliability()


def diagonal_hop_samples(
    geom: GridGeometry,
    headway: HeadwayModel,
    lt: float,
    n_hops: int,
    seed: int,
    hops_per_field: int = 10_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Forward progress and Manhattan distance of single relay hops taken
    with the destination on the transmitter's diagonal.

    Transmitters are random vehicles of simulated fields, kept at least
    ``lt`` from the field edge; each hop aims at a far destination along
    (-1, -1). Returns ``(fp, d_man)`` arrays of length ``n_hops``; hops with
    no candidate are redrawn.
    """
    half = max(5.0 * lt, 10.0 * max(geom.rx, geom.ry))
    far = 100.0 * half
    fp = np.empty(n_hops)
    dm = np.empty(n_hops)
    filled = 0
    block = 0
    while filled < n_hops:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
        block += 1
        fld = populate_grid(geom, headway, (-half, half, -half, half), rng)
        inner = np.flatnonzero((np.abs(fld.x) <= half - lt) & (np.abs(fld.y) <= half - lt))
        if inner.size == 0:
            continue
        for i in rng.choice(inner, min(hops_per_field, n_hops - filled)):
            tx = Point(float(fld.x[i]), float(fld.y[i]))
            dest = Point(tx.x - far, tx.y - far)
            rx = select_relay(tx, dest, fld, lt, rng)
            if rx is None:
                continue
            fp[filled] = forward_progress(tx, rx, dest)
            dm[filled] = manhattan_distance(tx, rx)
            filled += 1
    return fp, dm
