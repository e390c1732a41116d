"""Transmon chip geometry and TLS position sampling.

The chip is described by axis-aligned rectangles: the full substrate
extent, the two large capacitor pads, and the Josephson junction at the
origin. All in-plane coordinates are in um; the JJ rectangle is specified
in nm and converted. TLS defects live in a thin surface layer, so each
position carries an independent depth coordinate in nm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"degenerate rectangle {self}")

    @classmethod
    def centered(cls, cx: float, cy: float, width: float, height: float) -> "Rect":
        return cls(cx - width / 2, cy - height / 2, cx + width / 2, cy + height / 2)

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, x, y) -> np.ndarray:
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)

    def overlaps(self, other: "Rect") -> bool:
        return not (
            self.x1 <= other.x0
            or other.x1 <= self.x0
            or self.y1 <= other.y0
            or other.y1 <= self.y0
        )

    def distance(self, x, y):
        """Euclidean distance to the rectangle (0 inside)."""
        dx = np.maximum(np.maximum(self.x0 - x, x - self.x1), 0.0)
        dy = np.maximum(np.maximum(self.y0 - y, y - self.y1), 0.0)
        return np.hypot(dx, dy)

    def edge_distance(self, x, y):
        """Euclidean distance to the rectangle boundary (interior included)."""
        dx = np.maximum(np.maximum(self.x0 - x, x - self.x1), 0.0)
        dy = np.maximum(np.maximum(self.y0 - y, y - self.y1), 0.0)
        outside = np.hypot(dx, dy)
        # signed interior distance to the nearest side
        inner = np.minimum(
            np.minimum(x - self.x0, self.x1 - x),
            np.minimum(y - self.y0, self.y1 - y),
        )
        return np.where(outside > 0, outside, np.maximum(inner, 0.0))


@dataclass(frozen=True)
class DeviceGeometry:
    """Chip layout: substrate extent, capacitor pads, JJ, surface layer.

    chip_extent and pad_rectangles are in um; jj_rectangle is in nm
    (centered on the origin); surface_depth is the TLS-hosting layer
    thickness in nm.
    """

    chip_extent: Rect = field(default_factory=lambda: Rect(-750.0, -750.0, 750.0, 750.0))
    pad_rectangles: tuple[Rect, ...] = ()
    jj_rectangle_nm: Rect = field(default_factory=lambda: Rect.centered(0, 0, 250.0, 350.0))
    surface_depth: float = 3.0  # nm

    def __post_init__(self):
        if self.surface_depth <= 0:
            raise ValueError("surface_depth must be positive")
        jj = self.jj_rectangle_um
        if not (
            jj.x0 >= self.chip_extent.x0
            and jj.x1 <= self.chip_extent.x1
            and jj.y0 >= self.chip_extent.y0
            and jj.y1 <= self.chip_extent.y1
        ):
            raise ValueError("JJ rectangle lies outside the chip extent")
        for pad in self.pad_rectangles:
            if pad.overlaps(jj):
                raise ValueError("capacitor pad overlaps the JJ rectangle")

    @property
    def jj_rectangle_um(self) -> Rect:
        r = self.jj_rectangle_nm
        return Rect(r.x0 * 1e-3, r.y0 * 1e-3, r.x1 * 1e-3, r.y1 * 1e-3)

    def jj_distance(self, x, y):
        """Distance (um) from in-plane points to the JJ center."""
        cx, cy = self.jj_rectangle_um.center
        return np.hypot(np.asarray(x) - cx, np.asarray(y) - cy)


def default_transmon_geometry() -> DeviceGeometry:
    """A representative single-JJ transmon: 1.5 x 1.5 mm chip, two
    capacitor pads flanking the junction across a 30 um gap."""
    pads = (
        Rect(-250.0, 15.0, 250.0, 265.0),
        Rect(-250.0, -265.0, 250.0, -15.0),
    )
    return DeviceGeometry(pad_rectangles=pads)


@dataclass(frozen=True)
class Position:
    """One TLS location: in-plane (um) plus depth into the substrate (nm)."""

    x: float
    y: float
    depth: float


class Positions:
    """Array-backed sequence of Position (cheap for millions of samples)."""

    __slots__ = ("x", "y", "depth")

    def __init__(self, x: np.ndarray, y: np.ndarray, depth: np.ndarray):
        if not (len(x) == len(y) == len(depth)):
            raise ValueError("coordinate arrays must have equal length")
        self.x = np.asarray(x, float)
        self.y = np.asarray(y, float)
        self.depth = np.asarray(depth, float)

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i) -> Position:
        return Position(float(self.x[i]), float(self.y[i]), float(self.depth[i]))


def sample_positions(
    geometry: DeviceGeometry, n: int, rng_seed: int | np.random.Generator
) -> Positions:
    """Sample n TLS positions uniformly over the chip extent and uniformly
    in depth over [0, surface_depth]. Deterministic for a given seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )
    ext = geometry.chip_extent
    x = rng.uniform(ext.x0, ext.x1, n)
    y = rng.uniform(ext.y0, ext.y1, n)
    depth = rng.uniform(0.0, geometry.surface_depth, n)
    return Positions(x, y, depth)
