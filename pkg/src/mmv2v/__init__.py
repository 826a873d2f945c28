"""Delay and reliability of mmWave multi-hop V2V links on a Manhattan grid.

Two independent routes to the same quantities:

* :mod:`mmv2v.analytics` evaluates the closed-form expressions by quadrature.
* :mod:`mmv2v.montecarlo` simulates discrete vehicles with shifted-exponential
  headways and random relay selection.
"""

from mmv2v.geometry import GridGeometry, Point, RegionAreas
from mmv2v.radiolink import AntennaPattern, LinkBudget
from mmv2v.traffic import HeadwayModel, VehicleField

__all__ = [
    "AntennaPattern",
    "GridGeometry",
    "HeadwayModel",
    "LinkBudget",
    "Point",
    "RegionAreas",
    "VehicleField",
]

__version__ = "0.1.0"
