"""Tests for zero counting, refinement and strip enumeration."""

import math

import numpy as np
import pytest
from dirac_spectra import (
    CharContext,
    Rect,
    SeparatedBC,
    SpecValidationError,
    ZeroOnContourError,
    count_zeros_rect,
    locate_spectrum,
    model_roots,
    verify_asymptotics,
)
from dirac_spectra.spectrum import SpectralPoint, default_band, multiplicity_profile, refine_root, strip_spec


def test_rect_validation_and_geometry():
    """Rectangles validate, contain, dilate and split."""
    with pytest.raises(SpecValidationError):
        Rect(1.0, 1.0, 0.0, 1.0)
    r = Rect(0.0, 4.0, -1.0, 1.0)
    left, right = r.split()
    assert left.re_max == right.re_min == 2.0
    pts = r.boundary(16)
    assert pts[0] == pts[-1]
    assert r.dilate(2.0).width == pytest.approx(8.0)


def test_count_zeros_polynomial():
    """Winding counts of polynomial zeros with multiplicity."""
    assert count_zeros_rect(lambda z: (z - 1) ** 3, Rect(0.0, 2.0, -1.0, 1.0)) == 3
    assert count_zeros_rect(lambda z: (z - 1) * (z + 5j), Rect(-2.0, 2.0, -6.0, 1.0)) == 2
    assert count_zeros_rect(lambda z: z**2 + 1, Rect(2.0, 3.0, -1.0, 1.0)) == 0


def test_count_zeros_sine(free_ctx):
    """2i sin λ has three zeros in [-4, 4]."""
    assert count_zeros_rect(free_ctx.chi, Rect(-4.0, 4.0, -2.0, 2.0)) == 3


def test_count_zeros_identically_zero():
    """A function vanishing on the contour is reported."""
    with pytest.raises(ZeroOnContourError):
        count_zeros_rect(lambda z: np.zeros_like(z), Rect(0.0, 1.0, 0.0, 1.0))


def test_count_zeros_dilates_past_boundary_zero():
    """A zero on the right edge is picked up by the 1% dilation."""
    assert count_zeros_rect(lambda z: z - 2.0, Rect(0.0, 2.0, -1.0, 1.0)) == 1


def test_refine_root():
    """Newton converges to the square root of two."""
    res = refine_root(lambda z: z**2 - 2, 1.3)
    assert res.converged
    assert res.lam == pytest.approx(math.sqrt(2), abs=1e-12)


def test_multiplicity_profile():
    """Derivatives of a triple zero vanish below order three."""
    profile = multiplicity_profile(lambda z: (z - 1) ** 3, 1.0, 4)
    assert np.all(profile[:3] < 1e-14)
    assert profile[3] == pytest.approx(1e-6, rel=1e-8)


def test_model_roots(free_spec):
    """Model roots follow (i ln R + 2πn)/(b - a)."""
    sbc = SeparatedBC.constants(1.0, 2.0)
    roots = model_roots(sbc, free_spec, (-1, 1))
    assert len(roots) == 3
    assert roots[1] == pytest.approx(0.5j * math.log(2))
    assert roots[2] - roots[1] == pytest.approx(math.pi)


def test_strip_layout(free_spec, ones_bc):
    """Strip n spans ((2n - 1)π/2, (2n + 1)π/2) for a = -1, b = 1."""
    strip = strip_spec(ones_bc, free_spec, 2)
    assert strip.re_min == pytest.approx(1.5 * math.pi)
    assert strip.re_max == pytest.approx(2.5 * math.pi)
    assert strip.im_band == (-5.0, 5.0)
    assert default_band(SeparatedBC.constants(1.0, 2.0), free_spec) == pytest.approx(5 + math.log(2) / 2)


def test_locate_strips_free(free_spec, ones_bc, coarse_grid):
    """Zero potential: exactly πn in strip n."""
    ctx = CharContext(free_spec, ones_bc, coarse_grid)
    spectrum = locate_spectrum(ctx, (-5, 5))
    assert len(spectrum) == 11
    assert spectrum.anomalous_strips == []
    for pt in spectrum:
        assert pt.multiplicity == 1
        assert pt.lam == pytest.approx(math.pi * pt.strip_index, abs=1e-9)
        assert pt.model_root == pytest.approx(math.pi * pt.strip_index)
    assert [p.strip_index for p in spectrum] == list(range(-5, 6))
    assert spectrum.by_strip()[3].lam == pytest.approx(3 * math.pi, abs=1e-9)


def test_locate_strips_threaded(free_spec, ones_bc, coarse_grid):
    """Threaded and serial strip searches agree."""
    ctx = CharContext(free_spec, ones_bc, coarse_grid)
    serial = locate_spectrum(ctx, [1, 2, 3], threads=1)
    parallel = locate_spectrum(CharContext(free_spec, ones_bc, coarse_grid), [1, 2, 3], threads=3)
    assert [p.lam for p in serial] == pytest.approx([p.lam for p in parallel], abs=1e-12)


def test_locate_rect_quadratic(quadratic_ctx):
    """16 sin⁴(λ/2) has a fourfold zero at 2π."""
    spectrum = locate_spectrum(quadratic_ctx, Rect(5.0, 7.5, -1.0, 1.0))
    assert len(spectrum) == 1
    pt = spectrum[0]
    assert pt.multiplicity == 4
    assert abs(pt.lam - 2 * math.pi) < 1e-4
    assert pt.strip_index is None


def test_locate_rect_empty(free_ctx):
    """A rectangle off the real axis holds no free eigenvalue."""
    spectrum = locate_spectrum(free_ctx, Rect(0.5, 2.5, 0.5, 2.0))
    assert len(spectrum) == 0
    assert spectrum.failures == []


def test_strips_need_separated_bc(quadratic_ctx):
    """Strip search needs separated conditions."""
    with pytest.raises(SpecValidationError):
        locate_spectrum(quadratic_ctx, (-1, 1))


def test_spectrum_csv(free_ctx, tmp_path):
    """spectrum.csv has the documented header."""
    spectrum = locate_spectrum(free_ctx, [0, 1])
    text = spectrum.to_csv(tmp_path / "s.csv").read_text().splitlines()
    assert text[0] == "n,re_lambda,im_lambda,multiplicity,residual,re_lambda0,im_lambda0"
    assert text[1].startswith("0,")
    assert spectrum.to_dict()["strip_counts"] == {"0": 1, "1": 1}


def test_verify_asymptotics_free(free_ctx, ones_bc, free_spec):
    """The free spectrum matches its model roots in every strip."""
    spectrum = locate_spectrum(free_ctx, (-12, 12))
    report = verify_asymptotics(spectrum, ones_bc, free_spec, n_min=1)
    assert report.single_root_strips
    assert report.max_error < 1e-7
    assert len(report.indices) == 24


def test_verify_asymptotics_synthetic(free_spec, ones_bc):
    """e_n = 0.3 for every n: flat trend, spread 1."""
    points = [SpectralPoint(math.pi * n + 0.3 / abs(n), 1, strip_index=n) for n in range(-15, 16) if n != 0]
    report = verify_asymptotics(points, ones_bc, free_spec, n_min=1)
    assert report.spread == pytest.approx(1.0)
    assert report.nonincreasing
    np.testing.assert_allclose(report.scaled_errors, 0.3)
    growing = [SpectralPoint(math.pi * n + 0.01 * abs(n), 1, strip_index=n) for n in range(10, 30)]
    assert not verify_asymptotics(growing, ones_bc, free_spec).nonincreasing
