"""Taxicab geometry on an axis-aligned road grid.

Coordinates live in a frame whose axes are parallel to the roads; the
source sits at the origin and the destination on the negative diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GridGeometry:
    """Road lattice: vertical roads every ``rx`` metres, horizontal every ``ry``.

    ``eta`` is the road length per unit area. It cancels out of the
    Manhattan-distance CDF and is kept only so configurations are complete.
    """

    rx: float = 50.0
    ry: float = 50.0
    eta: float | None = None

    def __post_init__(self) -> None:
        if not (self.rx > 0 and self.ry > 0):
            raise ValueError(f"road spacings must be positive, got rx={self.rx}, ry={self.ry}")
        if self.eta is None:
            object.__setattr__(self, "eta", 1.0 / self.rx + 1.0 / self.ry)
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class RegionAreas:
    area_d: float
    area_total: float

    @property
    def ratio(self) -> float:
        return self.area_d / self.area_total


def manhattan_distance(a: Point, b: Point) -> float:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def in_range(center: Point, other: Point, lt: float) -> bool:
    """Closed Manhattan ball membership (the boundary counts as in range)."""
    if lt <= 0:
        raise ValueError(f"range must be positive, got {lt}")
    return manhattan_distance(center, other) <= lt


def forward_progress(tx: Point, candidate: Point, dest: Point) -> float:
    """Signed Euclidean projection of ``candidate - tx`` onto the tx->dest axis."""
    ax = dest[0] - tx[0]
    ay = dest[1] - tx[1]
    norm = math.hypot(ax, ay)
    if norm == 0.0:
        raise ValueError("forward progress undefined: transmitter coincides with destination")
    return ((candidate[0] - tx[0]) * ax + (candidate[1] - tx[1]) * ay) / norm


def region_areas(z: float, lt: float, dman: float) -> RegionAreas:
    """Areas of the near region (Manhattan distance <= ``dman``) and of the
    whole positive-progress half of the range square.

    Both are measured inside the half of the Manhattan ball lying ahead of
    the transmitter. The half-ball has area ``lt**2`` and its part within
    distance ``dman`` has area ``dman**2`` for any cut through the centre,
    by central symmetry of the ball. ``z`` (the progress of the chosen relay)
    does not change either area; it is accepted for signature symmetry with
    the CDF derivation and validated only.
    """
    if z < 0 or lt <= 0 or dman < 0:
        raise ValueError(f"invalid region inputs z={z}, lt={lt}, dman={dman}")
    if dman > lt:
        raise ValueError(f"dman={dman} exceeds range lt={lt}")
    return RegionAreas(area_d=dman * dman, area_total=lt * lt)
