"""Shifted-exponential headways and vehicle placement on grid roads."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from mmv2v.geometry import GridGeometry, Point


@dataclass(frozen=True)
class HeadwayModel:
    """Headway = ``d_safe`` + Exp(``mu``): a hard minimum gap plus a free part."""

    d_safe: float = 4.0
    mu: float = 0.08

    def __post_init__(self) -> None:
        if not self.d_safe >= 0:
            raise ValueError(f"d_safe must be non-negative, got {self.d_safe}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def mean(self) -> float:
        return self.d_safe + 1.0 / self.mu

    @property
    def density(self) -> float:
        """Vehicles per metre of road."""
        return 1.0 / self.mean

    def cdf(self, d):
        d = np.asarray(d, dtype=float)
        return np.where(d < self.d_safe, 0.0, -np.expm1(-self.mu * (d - self.d_safe)))

    def sample(self, rng: np.random.Generator, size=None):
        return self.d_safe + rng.exponential(1.0 / self.mu, size)

    def sample_residual(self, rng: np.random.Generator, size=None):
        """Draw from the equilibrium forward-recurrence distribution.

        Its density is ``(1 - cdf(t)) / mean``: uniform on ``[0, d_safe]``
        with mass ``d_safe / mean``, otherwise ``d_safe`` plus Exp(mu).
        """
        p_uniform = self.d_safe / self.mean
        u = rng.random(size)
        flat = rng.uniform(0.0, self.d_safe, size) if self.d_safe > 0 else np.zeros_like(u)
        tail = self.sample(rng, size)
        return np.where(u < p_uniform, flat, tail)


def sample_headway(model: HeadwayModel, rng: np.random.Generator) -> float:
    return float(model.sample(rng))


class Bounds(NamedTuple):
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @property
    def area(self) -> float:
        return max(self.xmax - self.xmin, 0.0) * max(self.ymax - self.ymin, 0.0)


def scenario_bounds(source: Point, dest: Point, margin: float) -> Bounds:
    """Smallest rectangle holding both endpoints, padded by ``margin``."""
    return Bounds(
        min(source[0], dest[0]) - margin,
        max(source[0], dest[0]) + margin,
        min(source[1], dest[1]) - margin,
        max(source[1], dest[1]) + margin,
    )


@dataclass
class VehicleField:
    """Vehicles on grid roads, stored road by road and sorted along each road.

    Road ids enumerate vertical roads (ascending x) first, then horizontal
    roads (ascending y). ``offsets[r]:offsets[r + 1]`` slices the vehicles of
    road ``r``; ``s`` is the coordinate along the road.
    """

    bounds: Bounds
    road_vertical: np.ndarray
    road_coord: np.ndarray
    offsets: np.ndarray
    s: np.ndarray
    x: np.ndarray = field(init=False)
    y: np.ndarray = field(init=False)
    road: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        counts = np.diff(self.offsets)
        self.road = np.repeat(np.arange(len(self.road_coord)), counts)
        vertical = self.road_vertical[self.road]
        coord = self.road_coord[self.road]
        self.x = np.where(vertical, coord, self.s)
        self.y = np.where(vertical, self.s, coord)
        # Composite key, globally sorted: road id major, along-road position minor.
        self._span = max(self.bounds.xmax - self.bounds.xmin, self.bounds.ymax - self.bounds.ymin) + 1.0
        self._key = self.road * self._span + (self.s - self._road_start()[self.road])
        n_vertical = int(self.road_vertical.sum())
        self._vertical_coords = self.road_coord[:n_vertical]
        self._horizontal_coords = self.road_coord[n_vertical:]

    SCAN_LIMIT = 20_000

    def within_scan(self, center: Point, lt: float) -> np.ndarray:
        """Brute-force counterpart of :meth:`within`."""
        cx, cy = float(center[0]), float(center[1])
        return np.flatnonzero(np.abs(self.x - cx) + np.abs(self.y - cy) <= lt)

    def _road_start(self) -> np.ndarray:
        return np.where(self.road_vertical, self.bounds.ymin, self.bounds.xmin)

    def __len__(self) -> int:
        return len(self.s)

    @property
    def vehicles(self) -> Iterator[tuple[Point, int]]:
        for x, y, r in zip(self.x.tolist(), self.y.tolist(), self.road.tolist()):
            yield Point(x, y), r

    def road_positions(self, road_id: int) -> np.ndarray:
        return self.s[self.offsets[road_id]:self.offsets[road_id + 1]]

    def within(self, center: Point, lt: float) -> np.ndarray:
        """Indices of vehicles with Manhattan distance <= ``lt`` from ``center``.

        Large fields use per-road binary search, so the cost scales with the
        number of roads crossing the ball rather than with the field size.
        """
        if len(self.s) <= self.SCAN_LIMIT:
            return self.within_scan(center, lt)
        cx, cy = float(center[0]), float(center[1])
        n_vertical = len(self._vertical_coords)
        lo_v = np.searchsorted(self._vertical_coords, cx - lt, "left")
        hi_v = np.searchsorted(self._vertical_coords, cx + lt, "right")
        lo_h = np.searchsorted(self._horizontal_coords, cy - lt, "left")
        hi_h = np.searchsorted(self._horizontal_coords, cy + lt, "right")
        roads = np.concatenate([np.arange(lo_v, hi_v), n_vertical + np.arange(lo_h, hi_h)])
        if roads.size == 0:
            return np.empty(0, dtype=np.intp)
        vertical = self.road_vertical[roads]
        coord = self.road_coord[roads]
        along = np.where(vertical, cy, cx)
        reach = lt - np.abs(coord - np.where(vertical, cx, cy))
        base = roads * self._span - self._road_start()[roads]
        slack = 1e-9 * (1.0 + abs(cx) + abs(cy) + lt)
        lo = np.searchsorted(self._key, base + along - reach - slack, "left")
        hi = np.searchsorted(self._key, base + along + reach + slack, "right")
        lengths = hi - lo
        total = int(lengths.sum())
        if total == 0:
            return np.empty(0, dtype=np.intp)
        starts = np.repeat(lo - np.concatenate([[0], np.cumsum(lengths)[:-1]]), lengths)
        idx = starts + np.arange(total)
        # Exact predicate on the (small) superset so results match brute force.
        keep = np.abs(self.x[idx] - cx) + np.abs(self.y[idx] - cy) <= lt
        return idx[keep]


def _road_lines(spacing: float, lo: float, hi: float) -> np.ndarray:
    first = math.ceil(lo / spacing)
    last = math.floor(hi / spacing)
    return np.arange(first, last + 1, dtype=float) * spacing


def _renewal_positions(model: HeadwayModel, lengths: np.ndarray, rng: np.random.Generator) -> list[np.ndarray]:
    """Stationary renewal points on ``[0, L]`` for each length, drawn in one batch."""
    if lengths.size == 0:
        return []
    longest = float(lengths.max())
    mean = model.mean
    sd = 1.0 / model.mu
    n = int(math.ceil(longest / mean + 8.0 * sd * math.sqrt(longest / mean ** 3) + 8))
    first = model.sample_residual(rng, (lengths.size, 1))
    rest = model.sample(rng, (lengths.size, n - 1))
    pos = np.cumsum(np.hstack([first, rest]), axis=1)
    # Rare overflow: keep extending any row that has not yet passed its end.
    while True:
        short = pos[:, -1] <= lengths
        if not short.any():
            break
        more = model.sample(rng, (lengths.size, n))
        more[~short] = np.inf
        pos = np.hstack([pos, pos[:, -1:] + np.cumsum(more, axis=1)])
    return [row[row <= length] for row, length in zip(pos, lengths)]


def populate_grid(
    geom: GridGeometry,
    model: HeadwayModel,
    bounds: Bounds,
    rng: np.random.Generator,
) -> VehicleField:
    """Place vehicles on every road crossing ``bounds``.

    Each road segment inside the rectangle gets an independent stationary
    renewal process, so density is the same everywhere along the road.
    """
    bounds = Bounds(*map(float, bounds))
    if bounds.xmax < bounds.xmin or bounds.ymax < bounds.ymin:
        raise ValueError(f"inverted bounds {bounds}")
    if bounds.area == 0.0:
        return VehicleField(
            bounds=bounds,
            road_vertical=np.empty(0, dtype=bool),
            road_coord=np.empty(0),
            offsets=np.zeros(1, dtype=np.intp),
            s=np.empty(0),
        )
    xs = _road_lines(geom.rx, bounds.xmin, bounds.xmax)
    ys = _road_lines(geom.ry, bounds.ymin, bounds.ymax)
    road_vertical = np.concatenate([np.ones(xs.size, bool), np.zeros(ys.size, bool)])
    road_coord = np.concatenate([xs, ys])
    lengths = np.where(road_vertical, bounds.ymax - bounds.ymin, bounds.xmax - bounds.xmin)
    start = np.where(road_vertical, bounds.ymin, bounds.xmin)
    rows = _renewal_positions(model, lengths, rng)
    counts = np.array([len(r) for r in rows], dtype=np.intp)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.intp)
    s = np.concatenate([r + s0 for r, s0 in zip(rows, start)]) if rows else np.empty(0)
    return VehicleField(bounds, road_vertical, road_coord, offsets, s)
