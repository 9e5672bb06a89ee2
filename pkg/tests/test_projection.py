import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accy.charts import permutation_sign, residue_coefficient
from accy.cone import (
    best_dependent, cubic_spec, jacobian, odp_spec, quadric_spec, sample_cone_points, scaling_map, tangent_frame,
)
from accy.errors import InsideCompactCore, NewtonDiverged, RankDeficient
from accy.projection import (
    ProjectionMap, _det_increment, cubic_alpha, cubic_identity, deformation_rate_scan, inner_cutoff,
    link_directions, pullback_complex_structure, pullback_volume_form, rate_report, rate_samples,
    solve_projection,
)

# root of sum_i (z_i + a conj(z_i)^2)^3 = 1 nearest zero at z = 3 (1, e^{i pi/3}, 0, 0),
# from numpy.roots on the cubic in a
CUBIC_ALPHA_ORACLE = 0.0020575870353253013


def test_cubic_alpha_matches_polynomial_root():
    z = 3.0 * np.array([1, np.exp(1j * np.pi / 3), 0, 0])
    a = cubic_alpha(ProjectionMap(cubic_spec()), z)
    assert a == pytest.approx(CUBIC_ALPHA_ORACLE, rel=1e-12)
    assert abs(cubic_identity(a, z) - 1) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 200), st.floats(2.0, 1e3))
def test_odp_projection_closed_form(seed, r):
    spec = odp_spec(3)
    z = scaling_map(spec, r, sample_cone_points(spec, 1, seed=seed)[0])
    phi = ProjectionMap(spec)(z)
    nz2 = np.sum(np.abs(z) ** 2)
    np.testing.assert_allclose(phi, z + np.conj(z) / (2 * nz2), rtol=0, atol=1e-14 * np.sqrt(nz2))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 200))
def test_odp_projection_is_rotation_equivariant(seed):
    rng = np.random.default_rng(seed)
    spec = odp_spec(3)
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    z = scaling_map(spec, 5.0, sample_cone_points(spec, 1, seed=seed)[0])
    proj = ProjectionMap(spec)
    np.testing.assert_allclose(proj(Q @ z), Q @ proj(z), atol=1e-12)


def test_projection_batched_equals_pointwise():
    spec = quadric_spec()
    proj = ProjectionMap(spec)
    z = scaling_map(spec, 4.0, sample_cone_points(spec, 3, seed=5))
    batched = proj(z)
    for a in range(3):
        np.testing.assert_allclose(batched[a], proj(z[a]), atol=1e-12)
    assert np.abs(proj.residuals(z[0])).max() < 1e-14 * np.sum(np.abs(z[0]) ** 2)


def test_projection_errors():
    spec = cubic_spec()
    proj = ProjectionMap(spec)
    with pytest.raises(RankDeficient):
        proj.coefficients(np.zeros(4))
    z = sample_cone_points(spec, 1, seed=0)[0]
    with pytest.raises(InsideCompactCore):
        solve_projection(spec, scaling_map(spec, 0.5, z), inner_radius=1.0)
    with pytest.raises(NewtonDiverged):
        proj.coefficients(scaling_map(spec, 5.0, z), max_iterations=1)


def test_inner_cutoff_guards_rate_samples():
    spec = cubic_spec()
    R = inner_cutoff(spec, link_directions(spec, 4, 0))
    assert 0 < R < 5
    with pytest.raises(InsideCompactCore):
        rate_samples(spec, np.geomspace(R, 10 * R, 8))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 1000))
def test_det_increment(k, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    D = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    assert complex(_det_increment(A, D)) == pytest.approx(np.linalg.det(A + D) - np.linalg.det(A), rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("spec", [cubic_spec(), odp_spec(3), quadric_spec()])
def test_pullback_volume_form_matches_direct_route(spec):
    # second route: residue coefficient of the smoothing at Phi(z) on the pushed-forward frame
    proj = ProjectionMap(spec)
    z = scaling_map(spec, 3.0, sample_cone_points(spec, 1, seed=4)[0])
    E = tangent_frame(spec.cone_polynomials, z)
    D = proj.psi_jacobian(z)
    cmp = pullback_volume_form(spec, proj, z, E, D)
    phi = proj(z)
    dep = best_dependent(spec.cone_polynomials, z)
    free = [i for i in range(spec.ambient_dim) if i not in dep]
    h = complex(residue_coefficient(spec.smoothing_polynomials, phi, free, dep))
    pushed = E + proj.apply_jacobian(D, E)
    direct = [h * np.linalg.det(pushed[list(t)][:, free].T) for t in cmp.tuples]
    scale = np.abs(cmp.omega0).max()
    np.testing.assert_allclose(cmp.pullback, direct, atol=1e-9 * scale)


def test_pulled_back_complex_structure_squares_to_minus_one():
    spec = cubic_spec()
    proj = ProjectionMap(spec)
    z = scaling_map(spec, 3.0, sample_cone_points(spec, 1, seed=1)[0])
    J, dJ = pullback_complex_structure(spec, proj, z)
    np.testing.assert_allclose(J @ J, -np.eye(len(J)), atol=1e-8)
    np.testing.assert_allclose((J - dJ) @ (J - dJ), -np.eye(len(J)), atol=1e-12)


def test_psi_jacobian_matches_coarse_difference():
    spec = odp_spec(3)
    proj = ProjectionMap(spec)
    z = scaling_map(spec, 2.0, sample_cone_points(spec, 1, seed=2)[0])
    D = proj.psi_jacobian(z)
    h = 1e-6
    e = np.zeros(4, dtype=complex)
    e[1] = 1j
    fd = (proj.psi(z + h * e) - proj.psi(z - h * e)) / (2 * h)
    np.testing.assert_allclose(D[:, 3], fd, atol=1e-8)


# volume-form rates: the linear terms sit below the quadratic ones in the hierarchy
@pytest.mark.parametrize("family,params,expected", [
    ("cubic", {}, -9.0),
    ("cubic", {"t_ij": {(0, 1): 1.0}}, -3.0),
    ("cubic", {"t_i": [1.0, 0, 0, 0]}, -6.0),
    ("quadrics", {}, -6.0),
    ("quadrics", {"t_i": [0, 0, 1.0, 0, 0]}, -3.0),
])
def test_volume_form_rates(family, params, expected):
    rep = deformation_rate_scan(family, params)
    assert rep.omega_rate.exponent == pytest.approx(expected, abs=0.3)
    assert rep.j_rate.exponent == pytest.approx(expected, abs=0.3)
    assert np.isfinite(rep.j_omega_constant)
    assert abs(rep.j_omega_ratio_slope) < 0.3


def test_odp_rate_report():
    rep = rate_report(odp_spec(3))
    assert rep.j_rate.exponent == pytest.approx(-3.0, abs=0.3)
    d = rep.to_dict()
    assert d["omega_rate"]["exponent"] == rep.omega_rate.exponent


def test_cubic_alpha_decay():
    spec = cubic_spec()
    proj = ProjectionMap(spec)
    z0 = sample_cone_points(spec, 1, seed=7)[0]
    z0 = z0 / np.linalg.norm(z0)
    t = np.geomspace(10, 1e4, 12)
    a = np.array([abs(cubic_alpha(proj, s * z0)) for s in t])
    slope = np.polyfit(np.log(t), np.log(a), 1)[0]
    assert slope == pytest.approx(-4.0, abs=0.05)
