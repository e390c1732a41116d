"""Electric-field maps over the chip surface.

A FieldMap is a regular 2-D grid of in-plane field vectors (V/m) sampled
on the substrate surface. Maps either come from an external solver export
(see the `fieldmap v1` text format) or from the built-in synthetic model
that peaks at the JJ and decays along the capacitor pad edges. Before TLS
couplings are computed the map must be normalized to single-photon
amplitude; synthetic maps are constructed already normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR
from .geometry import DeviceGeometry, Position, Rect


class FieldMapParseError(ValueError):
    """Malformed field-map file; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class AlreadyScaledError(ValueError):
    """Photon normalization applied to a map that is already normalized."""


class NotScaledError(ValueError):
    """Field sampling requested from a map that is not photon-normalized."""


class OutOfGridError(ValueError):
    """Position outside the field-map grid extent."""


@dataclass(frozen=True)
class FieldMap:
    """Gridded surface field. values has shape (ny, nx, 3) in V/m; node
    (ix, iy) sits at (x0 + ix*dx, y0 + iy*dy) um."""

    x0: float
    y0: float
    dx: float
    dy: float
    values: np.ndarray
    photon_scaled: bool
    omega_q: float | None = None

    def __post_init__(self):
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("grid spacing must be positive")
        v = np.asarray(self.values, float)
        if v.ndim != 3 or v.shape[2] != 3 or v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError("values must have shape (ny>=2, nx>=2, 3)")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if self.photon_scaled and self.omega_q is None:
            raise ValueError("photon-scaled map must record omega_q")
        object.__setattr__(self, "values", v)

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def x_max(self) -> float:
        return self.x0 + (self.nx - 1) * self.dx

    @property
    def y_max(self) -> float:
        return self.y0 + (self.ny - 1) * self.dy


@dataclass(frozen=True)
class SyntheticFieldParams:
    """Parameters of the synthetic |E| model

        |E|(x, y) = e_jj * exp(-d_jj / sigma_jj)
                    + e_edge / (1 + d_edge / ell)**exponent

    with d_jj the distance to the JJ rectangle and d_edge the distance to
    the nearest capacitor-pad edge (both um). Amplitudes are interpreted
    as already single-photon at omega_q."""

    e_jj: float = 10.0  # V/m at the junction
    e_edge: float = 1.0  # V/m on pad edges
    sigma_jj: float = 1.0  # um; JJ peak decay, ~solver resolution scale
    ell: float = 3.0  # um; fringing-field decay from pad edges
    exponent: float = 2.0
    spacing: float = 1.5  # um grid pitch
    omega_q: float = 2 * math.pi * 5e9  # rad/s

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")
        if self.ell <= 0 or self.sigma_jj <= 0:
            raise ValueError("decay lengths must be positive")


def synthetic_magnitude(geometry: DeviceGeometry, params: SyntheticFieldParams, x, y):
    """|E| of the synthetic model at arbitrary in-plane points (um)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    d_jj = geometry.jj_rectangle_um.distance(x, y)
    jj_term = params.e_jj * np.exp(-d_jj / params.sigma_jj)
    if geometry.pad_rectangles:
        d_edge = np.min(
            [pad.edge_distance(x, y) for pad in geometry.pad_rectangles], axis=0
        )
        edge_term = params.e_edge / (1.0 + d_edge / params.ell) ** params.exponent
    else:
        edge_term = np.zeros_like(jj_term)
    return jj_term + edge_term


def _nearest_edge_normals(rects: tuple[Rect, ...], x, y):
    """Unit in-plane normal of the nearest conductor edge for each point.

    Normals point away from the conductor; points inside a rectangle get
    the outward normal of the nearest side. Ties resolve in rect order,
    then left/right/bottom/top."""
    n = x.shape
    best = np.full(n, np.inf)
    ux = np.zeros(n)
    uy = np.zeros(n)
    for rect in rects:
        d = rect.edge_distance(x, y)
        take = d < best
        if not np.any(take):
            continue
        cx = np.clip(x, rect.x0, rect.x1)
        cy = np.clip(y, rect.y0, rect.y1)
        vx = x - cx
        vy = y - cy
        r = np.hypot(vx, vy)
        outside = r > 0
        nx_ = np.where(outside, vx / np.where(r == 0, 1.0, r), 0.0)
        ny_ = np.where(outside, vy / np.where(r == 0, 1.0, r), 0.0)
        # interior: outward normal of the nearest side
        sides = np.stack(
            [x - rect.x0, rect.x1 - x, y - rect.y0, rect.y1 - y]
        )  # distances to left/right/bottom/top
        side = np.argmin(sides, axis=0)
        in_nx = np.choose(side, [-1.0, 1.0, 0.0, 0.0])
        in_ny = np.choose(side, [0.0, 0.0, -1.0, 1.0])
        nx_ = np.where(outside, nx_, in_nx)
        ny_ = np.where(outside, ny_, in_ny)
        ux = np.where(take, nx_, ux)
        uy = np.where(take, ny_, uy)
        best = np.where(take, d, best)
    return ux, uy


def synthetic_field(
    geometry: DeviceGeometry, params: SyntheticFieldParams | None = None
) -> FieldMap:
    """Build a photon-normalized FieldMap from the synthetic |E| model.

    The grid covers the chip extent at params.spacing pitch; directions
    are in-plane, normal to the nearest conductor edge (JJ or pad)."""
    params = params or SyntheticFieldParams()
    ext = geometry.chip_extent
    nx = int(round((ext.x1 - ext.x0) / params.spacing)) + 1
    ny = int(round((ext.y1 - ext.y0) / params.spacing)) + 1
    xs = ext.x0 + params.spacing * np.arange(nx)
    ys = ext.y0 + params.spacing * np.arange(ny)
    gx, gy = np.meshgrid(xs, ys)  # shape (ny, nx)
    mag = synthetic_magnitude(geometry, params, gx, gy)
    conductors = (geometry.jj_rectangle_um, *geometry.pad_rectangles)
    ux, uy = _nearest_edge_normals(conductors, gx, gy)
    values = np.zeros((ny, nx, 3))
    values[:, :, 0] = mag * ux
    values[:, :, 1] = mag * uy
    return FieldMap(
        x0=ext.x0,
        y0=ext.y0,
        dx=params.spacing,
        dy=params.spacing,
        values=values,
        photon_scaled=True,
        omega_q=params.omega_q,
    )


def scale_to_single_photon(fmap: FieldMap, sim_energy: float, omega_q: float) -> FieldMap:
    """Rescale a raw solver map (evaluated at sim_energy joules of stored
    energy) to single-photon amplitude: multiply by sqrt(hbar*omega_q /
    sim_energy)."""
    if fmap.photon_scaled:
        raise AlreadyScaledError("field map is already photon-normalized")
    if sim_energy <= 0:
        raise ValueError("sim_energy must be positive")
    if omega_q <= 0:
        raise ValueError("omega_q must be positive")
    factor = math.sqrt(HBAR * omega_q / sim_energy)
    return replace(
        fmap, values=fmap.values * factor, photon_scaled=True, omega_q=omega_q
    )


def _locate(fmap: FieldMap, x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    fx = (x - fmap.x0) / fmap.dx
    fy = (y - fmap.y0) / fmap.dy
    eps = 1e-9
    if np.any(fx < -eps) or np.any(fx > fmap.nx - 1 + eps) or np.any(
        fy < -eps
    ) or np.any(fy > fmap.ny - 1 + eps):
        raise OutOfGridError("position outside the field-map grid")
    ix = np.clip(np.floor(fx).astype(int), 0, fmap.nx - 2)
    iy = np.clip(np.floor(fy).astype(int), 0, fmap.ny - 2)
    tx = np.clip(fx - ix, 0.0, 1.0)
    ty = np.clip(fy - iy, 0.0, 1.0)
    return ix, iy, tx, ty


def fields_at(fmap: FieldMap, x, y) -> np.ndarray:
    """Bilinear interpolation of the field at in-plane points; returns an
    array broadcastable to (..., 3). The map must be photon-normalized."""
    if not fmap.photon_scaled:
        raise NotScaledError("field map must be photon-normalized before sampling")
    ix, iy, tx, ty = _locate(fmap, x, y)
    v = fmap.values
    tx = tx[..., None]
    ty = ty[..., None]
    return (
        v[iy, ix] * (1 - tx) * (1 - ty)
        + v[iy, ix + 1] * tx * (1 - ty)
        + v[iy + 1, ix] * (1 - tx) * ty
        + v[iy + 1, ix + 1] * tx * ty
    )


def field_at(fmap: FieldMap, pos: Position) -> np.ndarray:
    """Field vector (V/m) at one TLS position. Depth is ignored: the map
    is a surface map and the 3 nm layer is thin relative to any in-plane
    field variation."""
    return fields_at(fmap, np.float64(pos.x), np.float64(pos.y))


def save_field_map(fmap: FieldMap, path) -> None:
    """Write the `fieldmap v1` text format (17 significant digits, exact
    round-trip with load_field_map)."""
    omega = fmap.omega_q if fmap.omega_q is not None else 0.0
    with open(path, "w") as fh:
        fh.write(
            "fieldmap v1 nx=%d ny=%d x0=%.17g y0=%.17g dx=%.17g dy=%.17g "
            "scaled=%d omega_q=%.17g\n"
            % (
                fmap.nx,
                fmap.ny,
                fmap.x0,
                fmap.y0,
                fmap.dx,
                fmap.dy,
                1 if fmap.photon_scaled else 0,
                omega,
            )
        )
        v = fmap.values
        for iy in range(fmap.ny):
            for ix in range(fmap.nx):
                fh.write(
                    "%d %d %.17g %.17g %.17g\n"
                    % (ix, iy, v[iy, ix, 0], v[iy, ix, 1], v[iy, ix, 2])
                )


_HEADER_KEYS = ("nx", "ny", "x0", "y0", "dx", "dy", "scaled", "omega_q")


def load_field_map(path) -> FieldMap:
    """Parse the `fieldmap v1` text format. Raises FieldMapParseError with
    the offending line number on malformed input."""
    with open(path) as fh:
        header = fh.readline()
        if not header:
            raise FieldMapParseError("empty file", 1)
        tokens = header.split()
        if len(tokens) != 2 + len(_HEADER_KEYS) or tokens[0] != "fieldmap" or tokens[1] != "v1":
            raise FieldMapParseError("malformed header", 1)
        vals = {}
        for tok, key in zip(tokens[2:], _HEADER_KEYS):
            name, _, raw = tok.partition("=")
            if name != key:
                raise FieldMapParseError(f"expected {key}=..., got {tok!r}", 1)
            try:
                vals[key] = int(raw) if key in ("nx", "ny", "scaled") else float(raw)
            except ValueError:
                raise FieldMapParseError(f"bad value for {key}: {raw!r}", 1) from None
        nx, ny = vals["nx"], vals["ny"]
        if nx < 2 or ny < 2:
            raise FieldMapParseError("grid must be at least 2x2", 1)
        if vals["scaled"] not in (0, 1):
            raise FieldMapParseError("scaled must be 0 or 1", 1)
        scaled = bool(vals["scaled"])
        if scaled and vals["omega_q"] <= 0:
            raise FieldMapParseError("scaled map requires omega_q > 0", 1)

        values = np.empty((ny, nx, 3))
        count = 0
        expected = nx * ny
        lineno = 1
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 5:
                raise FieldMapParseError("expected `ix iy Ex Ey Ez`", lineno)
            try:
                ix, iy = int(parts[0]), int(parts[1])
                e = [float(p) for p in parts[2:]]
            except ValueError:
                raise FieldMapParseError("unparseable numeric field", lineno) from None
            if count >= expected:
                raise FieldMapParseError("non-rectangular grid: extra data line", lineno)
            want_ix, want_iy = count % nx, count // nx
            if ix != want_ix or iy != want_iy:
                raise FieldMapParseError(
                    f"non-rectangular grid: expected node ({want_ix},{want_iy}),"
                    f" got ({ix},{iy})",
                    lineno,
                )
            if not all(math.isfinite(c) for c in e):
                raise FieldMapParseError("non-finite field value", lineno)
            values[iy, ix] = e
            count += 1
        if count != expected:
            raise FieldMapParseError(
                f"non-rectangular grid: {count} data lines, expected {expected}",
                lineno if count else 1,
            )
    return FieldMap(
        x0=vals["x0"],
        y0=vals["y0"],
        dx=vals["dx"],
        dy=vals["dy"],
        values=values,
        photon_scaled=scaled,
        omega_q=vals["omega_q"] if scaled else None,
    )
