import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accy.charts import (
    HermitianForm, complex_hessian, make_chart, metric_as_real_form, monge_ampere_residual,
    monge_ampere_samples, permutation_sign, real_hessian, residue_coefficient, residue_volume_form,
    write_chart_samples,
)
from accy.cone import flat_spec, odp_spec, quadric_spec, sample_cone_points
from accy.errors import NotPositiveDefinite, SingularJacobianMinor, StepUnderflow

cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([2, 0, 1]) == 1


def test_chart_lands_on_smoothing():
    spec = odp_spec(3)
    chart = make_chart(spec, "smoothing", np.array([1.2, 0.3j, 0.5, 0.7]))
    z = chart.base_point
    assert abs(complex(spec.smoothing_polynomials[0](z)) ) < 1e-13
    assert chart.minor_condition == 1.0
    zeta = chart.base_zeta + np.array([[1e-2, 0, 0], [0, 1e-2j, 0]])
    pts = chart.point(zeta)
    assert pts.shape == (2, 4)
    np.testing.assert_allclose(spec.smoothing_polynomials[0](pts), 0, atol=1e-13)


def test_chart_fails_at_the_apex():
    with pytest.raises(SingularJacobianMinor):
        make_chart(odp_spec(3), "cone", np.zeros(4))


@settings(max_examples=30, deadline=None)
@given(st.lists(cplx, min_size=3, max_size=3))
def test_odp_residue_matches_closed_form(free):
    # on sum z^2 = 1 with z_4 dependent, Omega = dz_1 dz_2 dz_3 / (2 z_4)
    spec = odp_spec(3)
    z4 = np.sqrt(1 - np.sum(np.array(free) ** 2) + 0j)
    if abs(z4) < 1e-2:
        return
    z = np.array(list(free) + [z4])
    h = residue_coefficient(spec.smoothing_polynomials, z, (0, 1, 2), (3,))
    assert complex(h) == pytest.approx(1 / (2 * z4), rel=1e-12)


def test_residue_sign_follows_permutation():
    spec = odp_spec(3)
    z = np.array([0.5, 0.6, 0.4, np.sqrt(1 - 0.77 + 0j)])
    h_last = complex(residue_coefficient(spec.smoothing_polynomials, z, (1, 2, 3), (0,)))
    assert h_last == pytest.approx(-1 / (2 * z[0]))


def test_residue_volume_form_of_flat_space_is_one():
    spec = flat_spec(2)
    chart = make_chart(spec, "cone", np.array([1.0, 2.0j]))
    assert residue_volume_form(spec, "cone", chart) == 1


def test_real_hessian_of_quartic_is_exact():
    f = lambda x: x[..., 0] ** 4 + 3 * x[..., 0] * x[..., 1] ** 2
    x0 = np.array([0.7, -1.3])
    H = real_hessian(f, x0)
    exact = np.array([[12 * 0.7**2, 6 * -1.3], [6 * -1.3, 6 * 0.7]])
    np.testing.assert_allclose(H, exact, rtol=1e-8)


def test_real_hessian_rejects_tiny_steps():
    with pytest.raises(StepUnderflow):
        real_hessian(lambda x: x[..., 0] ** 2, np.array([1.0]), step=1e-12)


def test_flat_potential_has_identity_hessian_and_zero_residual():
    spec = flat_spec(3)
    chart = make_chart(spec, "cone", np.array([0.5, -1j, 2.0]))
    pot = lambda z: np.sum(np.abs(z) ** 2, axis=-1)
    H = complex_hessian(pot, chart)
    np.testing.assert_allclose(H.matrix, np.eye(3), atol=1e-8)
    assert abs(monge_ampere_residual(pot, spec, "cone", chart)) < 1e-8


def test_quartic_complex_hessian():
    # d dbar |z_1|^4 = 4 |z_1|^2
    spec = flat_spec(2)
    chart = make_chart(spec, "cone", np.array([1.5 + 0.5j, 0.3]))
    H = complex_hessian(lambda z: np.abs(z[..., 0]) ** 4, chart)
    assert H.matrix[0, 0].real == pytest.approx(4 * abs(1.5 + 0.5j) ** 2, rel=1e-7)
    assert abs(H.matrix[1, 1]) < 1e-7


def test_negative_potential_is_not_positive_definite():
    spec = flat_spec(2)
    chart = make_chart(spec, "cone", np.array([1.0, 1.0]))
    with pytest.raises(NotPositiveDefinite):
        monge_ampere_residual(lambda z: -np.sum(np.abs(z) ** 2, axis=-1), spec, "cone", chart)


def test_hermitian_form_validation():
    with pytest.raises(ValueError):
        HermitianForm(np.array([[1, 1], [0, 1]]))
    F = HermitianForm(np.diag([1.0, 2.0])) + HermitianForm(np.diag([1.0, -3.0]))
    assert not F.is_positive()


@settings(max_examples=50, deadline=None)
@given(st.lists(cplx, min_size=4, max_size=4), st.lists(cplx, min_size=2, max_size=2),
       st.lists(cplx, min_size=2, max_size=2))
def test_real_form_reproduces_hermitian_pairing(h, u, v):
    H = np.array(h).reshape(2, 2)
    H = H + H.conj().T
    u, v = np.array(u), np.array(v)
    G = metric_as_real_form(H)
    ur = np.ravel(np.column_stack([u.real, u.imag]))
    vr = np.ravel(np.column_stack([v.real, v.imag]))
    assert ur @ G @ vr == pytest.approx((u @ H @ v.conj()).real, abs=1e-9)


def test_chart_samples_csv(tmp_path):
    spec = flat_spec(2)
    pot = lambda z: np.sum(np.abs(z) ** 2, axis=-1)
    samples = monge_ampere_samples(pot, spec, "cone", np.array([[1.0, 2.0], [0.5j, 1.0]]))
    path = tmp_path / "s.csv"
    write_chart_samples(path, samples)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["re_z1", "im_z1", "re_z2", "im_z2", "residual", "det", "h_abs2"]
    assert len(rows) == 3
    assert abs(float(rows[1][4])) < 1e-8


def test_quadric_chart_condition_is_recorded():
    spec = quadric_spec()
    z = sample_cone_points(spec, 1, seed=2, which="smoothing")[0]
    chart = make_chart(spec, "smoothing", z)
    assert chart.minor_condition < 1e6
    assert chart.newton_residual < 1e-12
    assert chart.coordinate_vectors().shape == (3, 5)
