"""Device layouts and pairwise geometry.

A scenario is an ordered set of device positions in the plane, gateways first.
Coordinates are meters with the origin at the center of the deployment area, so
a gateway "at the center of the map" sits at (0, 0).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Point2D(NamedTuple):
    x: float
    y: float


class ScenarioKind(str, enum.Enum):
    SQUARE_UNIFORM = "square_uniform"
    LINE = "line"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class Scenario:
    """Device positions (gateways occupy the first ``num_gateways`` indices)."""

    positions: np.ndarray
    num_gateways: int
    kind: ScenarioKind = ScenarioKind.EXPLICIT
    area_side: float | None = None
    line_extent: float | None = None

    def __post_init__(self):
        pos = np.ascontiguousarray(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError(f"positions must be an (n, 2) array, got shape {pos.shape}")
        if pos.shape[0] < 1:
            raise ValueError("a scenario needs at least one device")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if not 1 <= self.num_gateways <= pos.shape[0]:
            raise ValueError(
                f"num_gateways must be in [1, {pos.shape[0]}], got {self.num_gateways}"
            )
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "kind", ScenarioKind(self.kind))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def num_ues(self) -> int:
        return self.n - self.num_gateways

    def is_gateway(self, index: int) -> bool:
        return 0 <= index < self.num_gateways

    def point(self, index: int) -> Point2D:
        x, y = self.positions[index]
        return Point2D(float(x), float(y))

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind.value,
                "num_gateways": self.num_gateways,
                "positions": [[float(x), float(y)] for x, y in self.positions],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        data = json.loads(text)
        return cls(
            positions=np.asarray(data["positions"], dtype=float),
            num_gateways=int(data["num_gateways"]),
            kind=ScenarioKind(data["kind"]),
        )


def place_uniform_square(
    n: int,
    num_gateways: int,
    side: float,
    rng: np.random.Generator,
    *,
    gateway_at_center: bool = False,
) -> Scenario:
    """Drop ``n`` devices i.i.d. uniform in the centered square [-side/2, side/2]^2.

    The first ``num_gateways`` devices are the gateways. ``gateway_at_center``
    pins device 0 to (0, 0) after the drop (single central gateway layouts).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= num_gateways <= n:
        raise ValueError("need 1 <= num_gateways <= n")
    if side <= 0:
        raise ValueError("side must be > 0")
    pos = rng.uniform(-side / 2.0, side / 2.0, size=(n, 2))
    if gateway_at_center:
        pos[0] = (0.0, 0.0)
    return Scenario(
        positions=pos,
        num_gateways=num_gateways,
        kind=ScenarioKind.SQUARE_UNIFORM,
        area_side=float(side),
    )


def place_line(
    num_ues: int,
    gateway_offset: float,
    extent: float,
    rng: np.random.Generator,
) -> Scenario:
    """All devices on one axis: gateways at (0, +offset) and (0, -offset),
    UEs at (0, u) with u uniform in [-extent/2, extent/2].

    Collinearity is what makes the gateway flow split informative: a UE's
    two gateway distances differ by up to 2*offset depending on where it
    sits on the line, so the inflow ratio tracks position.  (Dropping UEs
    on a perpendicular axis instead would leave every UE equidistant from
    both gateways and the ratio would carry no information.)
    """
    if num_ues < 1:
        raise ValueError("num_ues must be >= 1")
    if gateway_offset <= 0:
        raise ValueError("gateway_offset must be > 0")
    if extent < 0:
        raise ValueError("extent must be >= 0")
    pos = np.zeros((num_ues + 2, 2))
    pos[0] = (0.0, gateway_offset)
    pos[1] = (0.0, -gateway_offset)
    pos[2:, 1] = rng.uniform(-extent / 2.0, extent / 2.0, size=num_ues)
    return Scenario(
        positions=pos,
        num_gateways=2,
        kind=ScenarioKind.LINE,
        line_extent=float(extent),
    )


def distance_matrix(s: Scenario) -> np.ndarray:
    """Symmetric matrix of pairwise Euclidean distances, zero diagonal."""
    diff = s.positions[:, None, :] - s.positions[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))
