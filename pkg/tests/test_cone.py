import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accy.cone import (
    AffineConeSpec, cubic_spec, fit_rate, fit_rays, flat_spec, homogeneity_degree, load_spec, odp_spec,
    on_variety, quadric_spec, radius, sample_cone_points, scaling_map, solve_dependent, tangent_frame,
)
from accy.errors import (
    DegenerateFit, InsufficientSamples, NewtonDiverged, NonpositiveMagnitude, OffVariety, ZeroPoint,
)


@pytest.mark.parametrize("spec,mu", [(cubic_spec(), 3), (quadric_spec(), 3), (odp_spec(3), Fraction(3, 2)),
                                     (odp_spec(4), Fraction(4, 3)), (flat_spec(2), 1)])
def test_builtin_cones(spec, mu):
    assert spec.mu == pytest.approx(float(mu))
    for f in spec.cone_polynomials:
        assert f.is_quasi_homogeneous(spec.weights)
    z = sample_cone_points(spec, 3, seed=1)
    for p in z:
        assert on_variety(spec.cone_polynomials, p)
        assert radius(spec, p) == pytest.approx(1.0, rel=1e-12)


def test_spec_json_roundtrip(tmp_path):
    spec = cubic_spec({(0, 1): 2.0}, [0, 1j, 0, 0])
    again = load_spec(spec.to_json())
    assert again.to_json() == spec.to_json()
    path = tmp_path / "spec.json"
    import json
    path.write_text(json.dumps(spec.to_json()))
    assert load_spec(path).to_json() == spec.to_json()


def test_radius_errors():
    spec = odp_spec(3)
    with pytest.raises(ZeroPoint):
        radius(spec, np.zeros(4))
    with pytest.raises(OffVariety):
        radius(spec, np.array([1, 0, 0, 0]))


def test_radius_with_unequal_weights():
    # C^2 with weights (1, 2): rho solves |z1|^2 rho^-2 + |z2|^2 rho^-4 = 1
    from accy.polynomial import Polynomial
    spec = AffineConeSpec("weighted", 2, 2, (), (), (Fraction(1), Fraction(2)), Fraction(1))
    z = np.array([1.0, 1.0])
    rho = radius(spec, z)
    assert rho**-2 + rho**-4 == pytest.approx(1.0, rel=1e-12)
    assert radius(spec, scaling_map(spec, 7.0, z)) == pytest.approx(7 * rho, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1e3), st.integers(0, 50))
def test_scaling_map_scales_radius(t, seed):
    spec = cubic_spec()
    z = sample_cone_points(spec, 1, seed=seed)[0]
    zt = scaling_map(spec, t, z)
    assert on_variety(spec.cone_polynomials, zt)
    assert radius(spec, zt) == pytest.approx(t, rel=1e-12)


def test_solve_dependent_and_divergence():
    spec = odp_spec(3)
    z = np.array([0.3, 0.2j, 1.1, 0.4j])
    out = solve_dependent(spec.smoothing_polynomials, z, [3])
    assert abs(complex(spec.smoothing_polynomials[0](out))) < 1e-13
    np.testing.assert_array_equal(out[:3], z[:3])
    with pytest.raises(NewtonDiverged):
        solve_dependent(spec.smoothing_polynomials, z, [3], maxiter=1)


def test_tangent_frame_is_orthonormal_and_tangent():
    spec = quadric_spec()
    z = sample_cone_points(spec, 1, seed=3)[0]
    E = tangent_frame(spec.cone_polynomials, z)
    assert E.shape == (2 * spec.complex_dim, spec.ambient_dim)
    R = np.concatenate([E.real, E.imag], axis=1)
    np.testing.assert_allclose(R @ R.T, np.eye(len(E)), atol=1e-12)
    for f in spec.cone_polynomials:
        np.testing.assert_allclose(E @ f.gradient(z), 0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-8, 3), st.floats(1e-3, 1e3), st.integers(6, 30))
def test_fit_rate_recovers_exact_power_laws(rate, amp, count):
    r = np.geomspace(10, 1e4, count)
    fit = fit_rate(r, amp * r**rate)
    assert fit.exponent == pytest.approx(rate, abs=1e-9)
    assert fit.amplitude == pytest.approx(amp, rel=1e-8)
    assert fit.log_power == 0


def test_fit_rate_detects_log_factor():
    r = np.geomspace(1e2, 1e6, 16)
    fit = fit_rate(r, r**-2.0 * np.log(r), allow_log=True)
    assert fit.log_power == 1
    assert fit.exponent == pytest.approx(-2.0, abs=1e-9)
    assert fit.predict(r) == pytest.approx(r**-2.0 * np.log(r))


def test_fit_rate_errors():
    r = np.geomspace(10, 100, 8)
    with pytest.raises(InsufficientSamples):
        fit_rate(r[:5], r[:5])
    with pytest.raises(NonpositiveMagnitude):
        fit_rate(r, -r)
    with pytest.raises(DegenerateFit):
        fit_rate(r, 0 * r)
    with pytest.raises(ValueError):
        fit_rate(r[::-1], r)


def test_fit_rays_uses_geometric_mean():
    r = np.geomspace(10, 1e3, 10)
    mags = np.array([2 * r**-3, 8 * r**-3])
    fit = fit_rays(r, mags)
    assert fit.exponent == pytest.approx(-3)
    assert fit.amplitude == pytest.approx(4)


def test_homogeneity_degree_of_coordinate_function():
    spec = odp_spec(3)
    z0 = sample_cone_points(spec, 1, seed=0)[0]
    fit = homogeneity_degree(lambda z, frame: z[0], spec, z0)
    assert fit.exponent == pytest.approx(float(spec.mu), abs=1e-9)
    with pytest.raises(InsufficientSamples):
        homogeneity_degree(lambda z, frame: z[0], spec, z0, radii=np.geomspace(1, 10, 5))
