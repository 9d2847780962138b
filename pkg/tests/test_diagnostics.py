"""Scaling reports, growth probes, blow-ups, and the vertical lower bound."""

import numpy as np
import pytest

from heisriesz.core import dist, group_inv, group_mul, origin
from heisriesz.diagnostics import (
    GrowthReport,
    ad_regularity_report,
    blowup_measure,
    cone_deficiency,
    discrepancy_to_haar,
    divergence_probe,
    horest_check,
    subgroup_boundedness_probe,
)
from heisriesz.diagnostics import _fit_slope
from heisriesz.measure import DiscreteMeasure
from heisriesz.riesz import RieszParams
from heisriesz.subgroups import haar_sample, make_horizontal, make_vertical


def _segment_measure(count=4096, half_width=1.0):
    # unit-density line segment on the first horizontal axis
    xs = (np.arange(count) + 0.5) / count * (2 * half_width) - half_width
    pts = np.zeros((count, 3))
    pts[:, 0] = xs
    w = np.full(count, 2 * half_width / count)
    return DiscreteMeasure(1, pts, w, spacing=2 * half_width / count)


def test_fit_slope_recovers_exact_line():
    y = 3.0 + 2.0 * np.arange(6)
    assert _fit_slope(y) == pytest.approx(2.0, rel=1e-14)
    assert _fit_slope(np.array([5.0])) == 0.0


def test_ad_regularity_on_uniform_segment():
    mu = _segment_measure()
    # interior centers: a gauge ball of radius rho meets the segment in
    # an interval of length 2 rho, so the scaled ratio is 2 throughout
    report = ad_regularity_report(
        mu, 1.0, centers=[[0.1, 0.0, 0.0], [-0.3, 0.0, 0.0]],
        radii=(0.25, 0.0625),
    )
    assert report.ratios.shape == (2, 2)
    np.testing.assert_allclose(report.ratios, 2.0, rtol=2e-2)
    assert report.implied_c == pytest.approx(2.0, rel=2e-2)
    assert report.regular
    assert not ad_regularity_report(
        mu, 1.0, centers=[[0.1, 0.0, 0.0]], radii=(0.25,), c_cap=1.5
    ).regular


def test_ad_regularity_rejects_noise_radii():
    mu = _segment_measure(count=256)
    with pytest.raises(ValueError):
        ad_regularity_report(mu, 1.0, radii=(mu.spacing,))
    with pytest.raises(ValueError):
        ad_regularity_report(mu, 1.0, radii=())


def test_ad_regularity_sampled_centers_shape():
    mu = _segment_measure(count=512)
    report = ad_regularity_report(mu, 1.0, centers=8, radii=(0.25,), seed=3)
    assert report.centers.shape == (8, 3)
    assert report.ratios.shape == (8, 1)


def test_cone_deficiency_full_versus_empty():
    mu = _segment_measure()
    t = make_vertical(1, [])
    # the segment is horizontal: every atom sits at full distance from
    # the vertical axis, so nothing is swallowed by the cone
    ratios = cone_deficiency(mu, 1.0, origin(1).coords, t, 0.5, [0.25, 0.125])
    np.testing.assert_allclose(ratios, 2.0, rtol=2e-2)
    # against its own line the measure lies inside every cone
    h = make_horizontal(1, [[1.0, 0.0]])
    ratios_h = cone_deficiency(mu, 1.0, origin(1).coords, h, 0.5, [0.25, 0.125])
    np.testing.assert_array_equal(ratios_h, 0.0)


def test_cone_deficiency_monotone_in_aperture():
    mu = _segment_measure(count=1024)
    t = make_vertical(1, [])
    narrow = cone_deficiency(mu, 1.0, origin(1).coords, t, 0.2, [0.25])
    wide = cone_deficiency(mu, 1.0, origin(1).coords, t, 0.8, [0.25])
    assert np.all(narrow >= wide)
    with pytest.raises(ValueError):
        cone_deficiency(mu, 1.0, origin(1).coords, t, 1.2, [0.25])


def test_divergence_probe_on_symmetric_measure():
    # atoms symmetric under inversion cancel pairwise at the center
    rng = np.random.default_rng(51)
    half = rng.uniform(-1, 1, size=(128, 3))
    pts = np.vstack([half, -half])
    w = np.tile(rng.uniform(0.1, 1.0, size=128), 2)
    mu = DiscreteMeasure(1, pts, w)
    params = RieszParams(s=2.0, n=1)
    reports = divergence_probe(mu, params, [origin(1).coords], [0.5, 0.25, 0.125])
    assert len(reports) == 1
    rep = reports[0]
    assert rep.verdict == "bounded"
    assert float(rep.max_magnitudes.max()) < 1e-12
    assert rep.eps == (0.5, 0.25, 0.125)


def test_divergence_probe_trims_at_resolution_floor():
    mu = _segment_measure(count=64)  # spacing 1/32, floor 1/8
    params = RieszParams(s=1.0, n=1)
    with pytest.warns(UserWarning):
        reports = divergence_probe(
            mu, params, [mu.points[10]], [0.5, 0.25, 0.01]
        )
    assert reports[0].eps == (0.5, 0.25)
    with pytest.raises(ValueError):
        with pytest.warns(UserWarning):
            divergence_probe(mu, params, [mu.points[10]], [0.05, 0.01])


def test_divergence_probe_threaded_matches_serial():
    mu = _segment_measure(count=512)
    params = RieszParams(s=1.0, n=1)
    pts = [mu.points[5], mu.points[100], mu.points[300]]
    eps = [0.5, 0.25, 0.125]
    serial = divergence_probe(mu, params, pts, eps, threads=1)
    threaded = divergence_probe(mu, params, pts, eps, threads=3)
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a.magnitudes, b.magnitudes)
        assert a.verdict == b.verdict


def test_growth_report_validation():
    with pytest.raises(ValueError):
        GrowthReport(
            point=np.zeros(3),
            eps=(0.25, 0.5),
            magnitudes=np.zeros((2, 3)),
            slopes=np.zeros(3),
            verdict="bounded",
            threshold=0.05,
        )


def test_subgroup_probe_bounded_on_vertical_axis():
    t = make_vertical(1, [])
    report = subgroup_boundedness_probe(
        t, 2.0, [0.5, 0.25, 0.125, 0.0625], resolution=256, points=4
    )
    assert report.verdict == "bounded"
    assert report.bound < 1e-10
    assert abs(report.slope) < 0.01
    assert report.per_eps_max.shape == (4,)
    with pytest.raises(ValueError):
        subgroup_boundedness_probe(t, 1.5, [0.5, 0.25])


def test_horest_check_small_run():
    report = horest_check(1, 0.5, trials=20_000, seed=2)
    assert report.passed
    assert report.violations == 0
    assert report.trials == 20_000
    assert report.min_margin > 0.0
    with pytest.raises(ValueError):
        horest_check(1, 1.5, trials=10)
    with pytest.raises(ValueError):
        horest_check(1, 0.5, trials=0)


def test_blowup_power_normalization_exact(mu3):
    nu = blowup_measure(mu3, origin(1).coords, 0.25, s=2.0)
    np.testing.assert_array_equal(nu.weights, mu3.weights * 16.0)
    assert nu.spacing == pytest.approx(mu3.spacing * 4.0, rel=1e-15)
    assert "blowup" in nu.label
    with pytest.raises(ValueError):
        blowup_measure(mu3, origin(1).coords, 0.25)
    with pytest.raises(ValueError):
        blowup_measure(mu3, origin(1).coords, 0.25, s=2.0, normalization="mass")


def test_blowup_ball_mass_normalization(mu3):
    nu = blowup_measure(mu3, origin(1).coords, 0.25, normalization="ball-mass")
    assert nu.ball_mass(origin(1).coords, 1.0) == pytest.approx(1.0, rel=1e-12)


def test_blowup_at_fixed_point_translates_lower_level(ifs14, mu2, mu3):
    # zooming by one contraction step at the fixed point of a map sends
    # that map's cylinder block onto a left translate of the coarser set
    s5 = ifs14.maps[5]
    v = s5.fixed_point().coords
    nu = blowup_measure(mu3, v, 0.25, s=2.0)
    block = nu.points[5 * 256 : 6 * 256]
    expected = group_mul(group_inv(v), mu2.points)
    assert float(np.max(np.abs(block - expected))) < 1e-10


def test_discrepancy_to_haar_identity_and_scale():
    t = make_vertical(1, [])
    nu = haar_sample(t, 2.0, 512)
    balls = [([0.0, 0.0, 0.5], 0.5), ([0.0, 0.0, -1.0], 0.7)]
    assert discrepancy_to_haar(nu, t, balls, window=2.0, resolution=512) == 0.0
    tripled = DiscreteMeasure(1, nu.points, nu.weights * 3.0)
    assert discrepancy_to_haar(
        tripled, t, balls, window=2.0, resolution=512
    ) == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        discrepancy_to_haar(nu, t, [], window=2.0)
    with pytest.raises(ValueError):
        discrepancy_to_haar(nu, t, [([50.0, 0.0, 0.0], 0.1)], window=2.0)
