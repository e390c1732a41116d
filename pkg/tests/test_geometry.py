import numpy as np
import pytest
from scipy.stats import kstest

from tlsbath.geometry import (
    DeviceGeometry,
    Position,
    Rect,
    default_transmon_geometry,
    sample_positions,
)


def test_rect_distance_inside_and_out():
    r = Rect(-1.0, -2.0, 1.0, 2.0)
    assert r.distance(0.0, 0.0) == 0.0
    assert r.distance(3.0, 0.0) == pytest.approx(2.0)
    assert r.distance(1.0 + 3.0, 2.0 + 4.0) == pytest.approx(5.0)


def test_rect_edge_distance():
    r = Rect(0.0, 0.0, 10.0, 10.0)
    assert r.edge_distance(5.0, 5.0) == pytest.approx(5.0)  # interior
    assert r.edge_distance(5.0, 9.0) == pytest.approx(1.0)
    assert r.edge_distance(12.0, 5.0) == pytest.approx(2.0)  # exterior
    assert r.edge_distance(5.0, 0.0) == pytest.approx(0.0)  # on boundary


def test_degenerate_rect_rejected():
    with pytest.raises(ValueError):
        Rect(0.0, 0.0, 0.0, 1.0)


def test_default_geometry_invariants():
    g = default_transmon_geometry()
    jj = g.jj_rectangle_um
    assert jj.x1 - jj.x0 == pytest.approx(0.25)
    assert jj.y1 - jj.y0 == pytest.approx(0.35)
    assert g.surface_depth == 3.0
    assert g.chip_extent.x1 - g.chip_extent.x0 == pytest.approx(1500.0)
    for pad in g.pad_rectangles:
        assert not pad.overlaps(jj)


def test_pad_overlapping_jj_rejected():
    with pytest.raises(ValueError, match="overlaps"):
        DeviceGeometry(pad_rectangles=(Rect(-1.0, -1.0, 1.0, 1.0),))


def test_jj_outside_chip_rejected():
    with pytest.raises(ValueError, match="outside"):
        DeviceGeometry(jj_rectangle_nm=Rect.centered(1e9, 0, 250, 350))


def test_nonpositive_depth_rejected():
    with pytest.raises(ValueError):
        DeviceGeometry(surface_depth=0.0)


def test_sample_positions_deterministic():
    g = default_transmon_geometry()
    a = sample_positions(g, 5, rng_seed=42)
    b = sample_positions(g, 5, rng_seed=42)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)
    assert np.array_equal(a.depth, b.depth)
    assert a[0] == b[0]
    assert isinstance(a[0], Position)


def test_sample_positions_bounds():
    g = default_transmon_geometry()
    p = sample_positions(g, 100_000, rng_seed=1)
    assert np.all((p.x >= g.chip_extent.x0) & (p.x <= g.chip_extent.x1))
    assert np.all((p.y >= g.chip_extent.y0) & (p.y <= g.chip_extent.y1))
    assert np.all((p.depth >= 0.0) & (p.depth <= g.surface_depth))


def test_sample_positions_uniformity_ks():
    g = default_transmon_geometry()
    p = sample_positions(g, 100_000, rng_seed=7)
    ext = g.chip_extent
    res = kstest(p.x, "uniform", args=(ext.x0, ext.x1 - ext.x0))
    assert res.pvalue > 0.01
    res = kstest(p.depth, "uniform", args=(0.0, g.surface_depth))
    assert res.pvalue > 0.01


def test_sample_positions_validates_n():
    with pytest.raises(ValueError):
        sample_positions(default_transmon_geometry(), 0, rng_seed=0)


def test_jj_distance_from_center():
    g = default_transmon_geometry()
    assert g.jj_distance(0.0, 0.0) == pytest.approx(0.0)
    assert g.jj_distance(3.0, 4.0) == pytest.approx(5.0)
