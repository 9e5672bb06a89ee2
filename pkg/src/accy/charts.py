"""Holomorphic charts on complete intersections, residue volume forms and
finite-difference complex Hessians.

Real coordinates are interleaved, ``(x_1, y_1, x_2, y_2, ...)`` with
``zeta_k = x_k + i y_k``.  Kaehler forms are ``omega = i ddbar phi``, so the
metric of a potential is its complex Hessian ``d^2 phi / dzeta_i dzetabar_j``
with no factor 1/2.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cone import AffineConeSpec, best_dependent, jacobian, solve_dependent, tangent_frame
from .errors import NotPositiveDefinite, SingularJacobianMinor, StepUnderflow

EPS = np.finfo(float).eps
# second differences need a larger step than the eps**(1/3) first-difference rule
DEFAULT_STEP = EPS ** (1 / 6)
MAX_MINOR_COND = 1e6


def permutation_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


@dataclass(frozen=True)
class ChartFrame:
    """A point of a variety together with a graph chart over free coordinates."""

    spec: AffineConeSpec
    which: str
    base_point: np.ndarray
    free_indices: tuple[int, ...]
    dependent_indices: tuple[int, ...]
    tangent_basis: np.ndarray
    minor_condition: float
    newton_residual: float
    frame_kind: str = "proxy-euclidean"

    @property
    def polys(self):
        return self.spec.polynomials(self.which)

    @property
    def n(self) -> int:
        return len(self.free_indices)

    @property
    def base_zeta(self) -> np.ndarray:
        return self.base_point[list(self.free_indices)]

    def dependent_derivative(self, z=None) -> np.ndarray:
        """``d z_dep / d zeta`` at ``z`` (default: base point); shape (s, n)."""
        z = self.base_point if z is None else z
        J = jacobian(self.polys, z)
        if J.shape[-2] == 0:
            return np.zeros(J.shape[:-2] + (0, self.n), dtype=complex)
        Jd = J[..., list(self.dependent_indices)]
        Jf = J[..., list(self.free_indices)]
        return -np.linalg.solve(Jd, Jf)

    def coordinate_vectors(self) -> np.ndarray:
        """Ambient images of ``d/dzeta_k``; rows, shape (n, N)."""
        V = np.zeros((self.n, self.spec.ambient_dim), dtype=complex)
        V[:, list(self.free_indices)] = np.eye(self.n)
        if self.dependent_indices:
            V[:, list(self.dependent_indices)] = self.dependent_derivative().T
        return V

    def point(self, zeta) -> np.ndarray:
        """Chart map: ambient point(s) with the given free coordinates."""
        zeta = np.asarray(zeta, dtype=complex)
        batch = zeta.shape[:-1]
        z = np.broadcast_to(self.base_point, batch + (self.spec.ambient_dim,)).copy()
        z[..., list(self.free_indices)] = zeta
        if self.dependent_indices:
            # warm start from the linearisation at the base point
            dz = zeta - self.base_zeta
            z[..., list(self.dependent_indices)] += dz @ self.dependent_derivative().T
            z = solve_dependent(self.polys, z, self.dependent_indices)
        return z


def make_chart(spec: AffineConeSpec, which: str, z0, free_indices: Sequence[int] | None = None,
               frame_kind: str = "proxy-euclidean") -> ChartFrame:
    """Project ``z0`` onto the variety along dependent coordinates and build a chart."""
    polys = spec.polynomials(which)
    z0 = np.asarray(z0, dtype=complex)
    N, s = spec.ambient_dim, spec.codim
    if free_indices is None:
        dep = best_dependent(polys, z0)
        free = tuple(i for i in range(N) if i not in dep)
    else:
        free = tuple(sorted(int(i) for i in free_indices))
        dep = tuple(i for i in range(N) if i not in free)
    if len(free) != spec.complex_dim:
        raise ValueError(f"need {spec.complex_dim} free indices, got {len(free)}")
    if s and np.all(jacobian(polys, z0) == 0):
        raise SingularJacobianMinor("Jacobian vanishes at the base point")
    z = solve_dependent(polys, z0, dep, cond_max=MAX_MINOR_COND)
    if s:
        Jd = jacobian(polys, z)[:, list(dep)]
        cond = float(np.linalg.cond(Jd))
        scale = max(float(np.linalg.norm(z)), 1.0)
        resid = max(abs(complex(p(z))) / scale ** max(p.degree, 1) for p in polys)
    else:
        cond, resid = 1.0, 0.0
    if not math.isfinite(cond) or cond > MAX_MINOR_COND:
        raise SingularJacobianMinor(f"dependent minor condition number {cond:.2e}")
    basis = tangent_frame(polys, z)
    return ChartFrame(spec, which, z, free, tuple(dep), basis, cond, resid, frame_kind)


def residue_coefficient(polys, z, free: Sequence[int], dep: Sequence[int]) -> np.ndarray:
    """``h`` with ``dz_1^...^dz_N = (h dzeta_free) ^ df_1 ^ ... ^ df_s``.

    Vectorised over leading axes of ``z``.
    """
    z = np.asarray(z, dtype=complex)
    sign = permutation_sign(list(free) + list(dep))
    if not dep:
        return np.full(z.shape[:-1], complex(sign))
    Jd = jacobian(polys, z)[..., list(dep)]
    det = np.linalg.det(Jd)
    if np.any(np.abs(det) == 0) or not np.all(np.isfinite(det)):
        raise SingularJacobianMinor("dependent Jacobian minor is singular")
    return sign / det


def residue_volume_form(spec: AffineConeSpec, which: str, chart: ChartFrame) -> complex:
    """Coefficient ``h`` of the residue form ``Omega = h dzeta_1 ^ ... ^ dzeta_n``."""
    polys = spec.polynomials(which)
    Jd = jacobian(polys, chart.base_point)[:, list(chart.dependent_indices)]
    if Jd.size and np.linalg.cond(Jd) > 1e14:
        raise SingularJacobianMinor("dependent Jacobian minor is singular")
    return complex(residue_coefficient(polys, chart.base_point, chart.free_indices, chart.dependent_indices))


@dataclass(frozen=True)
class HermitianForm:
    matrix: np.ndarray
    chart: ChartFrame | None = None

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        scale = max(float(np.abs(M).max(initial=0.0)), 1e-300)
        if np.abs(M - M.conj().T).max(initial=0.0) > 1e-12 * scale:
            raise ValueError("matrix is not Hermitian")
        object.__setattr__(self, "matrix", M)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_positive(self) -> bool:
        return bool(self.eigenvalues()[0] > 0)

    def __add__(self, other: "HermitianForm") -> "HermitianForm":
        return HermitianForm(self.matrix + other.matrix, self.chart)


def metric_as_real_form(H) -> np.ndarray:
    """Real bilinear form ``g(u, v) = Re(u^T H conj(v))`` in interleaved coordinates."""
    H = np.asarray(getattr(H, "matrix", H), dtype=complex)
    n = H.shape[0]
    G = np.empty((2 * n, 2 * n))
    G[0::2, 0::2] = H.real
    G[1::2, 1::2] = H.real
    G[0::2, 1::2] = H.imag
    G[1::2, 0::2] = -H.imag
    return G


def _real_to_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def _second_difference_stencil(dim: int):
    """Offsets (in units of the step) for every second partial derivative."""
    offsets = [np.zeros(dim)]
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1
        offsets += [e, -e]
    for i, j in itertools.combinations(range(dim), 2):
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            e = np.zeros(dim)
            e[i], e[j] = si, sj
            offsets.append(e)
    return np.array(offsets)


def _hessian_from_values(vals, h, dim):
    Hr = np.empty((dim, dim))
    f0 = vals[0]
    for i in range(dim):
        Hr[i, i] = (vals[1 + 2 * i] - 2 * f0 + vals[2 + 2 * i]) / h**2
    k = 1 + 2 * dim
    for i, j in itertools.combinations(range(dim), 2):
        pp, pm, mp, mm = vals[k:k + 4]
        Hr[i, j] = Hr[j, i] = (pp - pm - mp + mm) / (4 * h**2)
        k += 4
    return Hr


def real_hessian(func: Callable, x0, step: float | None = None) -> np.ndarray:
    """Richardson-extrapolated central-difference Hessian of a batched function."""
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    scale = max(1.0, float(np.linalg.norm(x0)))
    h = DEFAULT_STEP * scale if step is None else float(step)
    if h < math.sqrt(EPS) * scale or not math.isfinite(h):
        raise StepUnderflow(f"difference step {h:.2e} is too small at scale {scale:.2e}")
    off = _second_difference_stencil(dim)
    pts = np.concatenate([x0 + h * off, x0 + 0.5 * h * off])
    vals = np.asarray(func(pts), dtype=float)
    m = len(off)
    coarse = _hessian_from_values(vals[:m], h, dim)
    fine = _hessian_from_values(vals[m:], 0.5 * h, dim)
    return (4 * fine - coarse) / 3


def complex_hessian_from_real(Hr) -> np.ndarray:
    """``d^2/dzeta_i dzetabar_j`` from the real Hessian in interleaved coordinates."""
    xx, yy = Hr[0::2, 0::2], Hr[1::2, 1::2]
    xy, yx = Hr[0::2, 1::2], Hr[1::2, 0::2]
    return 0.25 * ((xx + yy) + 1j * (xy - yx))


def complex_hessian(potential: Callable, chart: ChartFrame, step: float | None = None) -> HermitianForm:
    """Complex Hessian of ``potential`` (a batched function of ambient points) in the chart."""
    zeta0 = chart.base_zeta
    x0 = np.empty(2 * chart.n)
    x0[0::2], x0[1::2] = zeta0.real, zeta0.imag

    def f(x):
        return np.real(potential(chart.point(_real_to_complex(x))))

    Hr = real_hessian(f, x0, step)
    return HermitianForm(complex_hessian_from_real(Hr), chart)


def monge_ampere_residual(potential: Callable, spec: AffineConeSpec, which: str, chart: ChartFrame,
                          step: float | None = None) -> float:
    """``log det(ddbar phi) - log |h|^2``; constant along the variety iff Ricci-flat."""
    H = complex_hessian(potential, chart, step)
    try:
        L = np.linalg.cholesky(H.matrix)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("complex Hessian is not positive definite") from exc
    logdet = 2.0 * float(np.sum(np.log(np.abs(np.diag(L)))))
    h = residue_volume_form(spec, which, chart)
    return logdet - 2.0 * math.log(abs(h))


@dataclass
class ChartSample:
    point: np.ndarray
    residual: float
    det: float
    h_abs2: float


def monge_ampere_samples(potential: Callable, spec: AffineConeSpec, which: str, points,
                         step: float | None = None) -> list[ChartSample]:
    out = []
    for z in np.atleast_2d(points):
        chart = make_chart(spec, which, z)
        H = complex_hessian(potential, chart, step)
        det = float(np.real(np.linalg.det(H.matrix)))
        if not H.is_positive():
            raise NotPositiveDefinite("complex Hessian is not positive definite")
        h2 = abs(residue_volume_form(spec, which, chart)) ** 2
        out.append(ChartSample(chart.base_point, math.log(det) - math.log(h2), det, h2))
    return out


def write_chart_samples(path, samples: Sequence[ChartSample]) -> None:
    samples = list(samples)
    N = len(samples[0].point) if samples else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"{part}{i + 1}" for i in range(N) for part in ("re_z", "im_z")]
                   + ["residual", "det", "h_abs2"])
        for s in samples:
            coords = [v for c in s.point for v in (c.real, c.imag)]
            w.writerow([repr(float(v)) for v in coords] + [repr(s.residual), repr(s.det), repr(s.h_abs2)])
