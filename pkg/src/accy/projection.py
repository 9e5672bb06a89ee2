"""Normal projections from a cone onto its smoothing and the decay-rate
experiments built on them.

The map is ``Phi(z) = z + sum_b y_b(z) conj(grad f_b(z))`` with ``y`` fixed by
Newton's method so that ``F_a(Phi(z)) = 0``.  Every difference that decays is
assembled from increments (``p(z + d) - p(z)`` expanded term by term) and from
derivatives of the small displacement ``Psi = Phi - id``; nothing of size
O(1) is ever subtracted, so signals of relative size 1e-36 survive.

``Psi`` is extended off the cone by pretending ``f_a(z) = 0`` exactly in the
Newton equations.  The extension is smooth on the ambient space, agrees with
``Psi`` on the cone, and can be differenced in all 2N real directions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cone import (
    AffineConeSpec,
    RateFit,
    best_dependent,
    fit_rate,
    geometric_radii,
    jacobian,
    proxy_tensor_scale,
    radius,
    sample_cone_points,
    scaling_map,
    tangent_frame,
)
from .charts import permutation_sign
from .errors import InsideCompactCore, NewtonDiverged, RankDeficient

EPS = np.finfo(float).eps
FIRST_DIFF_STEP = EPS ** (1 / 5)
CORE_ITERATIONS = 20


def _det_increment(A, D) -> np.ndarray:
    """``det(A + D) - det(A)`` by multilinear expansion over replaced columns."""
    A = np.asarray(A, dtype=complex)
    D = np.asarray(D, dtype=complex)
    k = A.shape[-1]
    out = np.zeros(np.broadcast_shapes(A.shape, D.shape)[:-2], dtype=complex)
    for size in range(1, k + 1):
        for cols in itertools.combinations(range(k), size):
            M = np.array(np.broadcast_to(A, np.broadcast_shapes(A.shape, D.shape)))
            M[..., :, list(cols)] = np.broadcast_to(D, M.shape)[..., :, list(cols)]
            out = out + np.linalg.det(M)
    return out


@dataclass(frozen=True)
class ProjectionMap:
    """``Phi = id + Psi`` from the cone of ``spec`` onto its smoothing."""

    spec: AffineConeSpec
    newton_tolerance: float = 1e-13
    max_iterations: int = 50
    inner_radius: float = 0.0

    # -- core Newton solve ----------------------------------------------------
    def _directions(self, z):
        return np.conj(jacobian(self.spec.cone_polynomials, z))

    def coefficients(self, z, max_iterations: int | None = None, return_iterations: bool = False):
        """Newton solve for ``y``; vectorised over leading axes of ``z``."""
        z = np.asarray(z, dtype=complex)
        spec = self.spec
        s = spec.codim
        maxit = self.max_iterations if max_iterations is None else max_iterations
        if s == 0:
            y = np.zeros(z.shape[:-1] + (0,), dtype=complex)
            return (y, 0) if return_iterations else y
        G = self._directions(z)
        gram = np.einsum("...ai,...bi->...ab", np.conj(G), G)
        cond = np.linalg.cond(gram)
        if np.any(~np.isfinite(cond)) or np.any(cond > 1e12):
            raise RankDeficient("gradients of the defining polynomials are degenerate")
        lower = spec.lower_terms
        y = np.zeros(z.shape[:-1] + (s,), dtype=complex)
        converged = False
        it = 0
        for it in range(1, maxit + 1):
            d = np.einsum("...b,...bi->...i", y, G)
            w = z + d
            R = np.stack([f.increment(z, d) + L(w) for f, L in zip(spec.cone_polynomials, lower)], axis=-1)
            JF = jacobian(spec.smoothing_polynomials, w)
            M = np.einsum("...ai,...bi->...ab", JF, G)
            try:
                step = np.linalg.solve(M, R[..., None])[..., 0]
            except np.linalg.LinAlgError as exc:
                raise RankDeficient("Newton matrix is singular") from exc
            if not np.all(np.isfinite(step)):
                raise NewtonDiverged("Newton iterate is not finite")
            y = y - step
            small = np.abs(step) <= self.newton_tolerance * np.maximum(np.abs(y), 1e-300)
            if np.all(small | (step == 0)):
                converged = True
                break
        if not converged:
            raise NewtonDiverged(f"projection Newton did not converge in {maxit} iterations")
        return (y, it) if return_iterations else y

    def normalized_coefficients(self, z) -> np.ndarray:
        """``y_a deg(f_a)``: the coefficient of ``conj(grad f_a) / deg f_a``.

        For ``sum z^3`` this is ``alpha`` in ``z_i + alpha conj(z_i)^2``; for
        ``sum z^2`` it is the coefficient of ``conj(z)``.
        """
        degs = np.array([f.degree for f in self.spec.cone_polynomials], dtype=float)
        return self.coefficients(z) * degs

    def psi(self, z) -> np.ndarray:
        """The displacement ``Phi(z) - z`` (using the smooth ambient extension)."""
        z = np.asarray(z, dtype=complex)
        y = self.coefficients(z)
        return np.einsum("...b,...bi->...i", y, self._directions(z))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z + self.psi(z)

    def solve(self, z):
        z = np.asarray(z, dtype=complex)
        if self.inner_radius and radius(self.spec, z, check=False) < self.inner_radius:
            raise InsideCompactCore("point lies inside the compact core")
        y = self.coefficients(z)
        phi = z + np.einsum("...b,...bi->...i", y, self._directions(z))
        return phi, y

    def residuals(self, z) -> np.ndarray:
        phi = self(z)
        return np.array([complex(F(phi)) for F in self.spec.smoothing_polynomials])

    # -- derivatives -----------------------------------------------------------
    def psi_jacobian(self, z, step: float | None = None) -> np.ndarray:
        """Real derivative of ``Psi`` at ``z`` as a complex ``(N, 2N)`` matrix.

        Column ``2k`` is ``dPsi/dx_k`` and column ``2k+1`` is ``dPsi/dy_k``.
        Central differences with one Richardson level.
        """
        z = np.asarray(z, dtype=complex)
        N = z.shape[-1]
        h = FIRST_DIFF_STEP * max(1.0, float(np.linalg.norm(z))) if step is None else step
        dirs = np.zeros((2 * N, N), dtype=complex)
        for k in range(N):
            dirs[2 * k, k] = 1.0
            dirs[2 * k + 1, k] = 1j
        pts = np.concatenate([z + h * dirs, z - h * dirs, z + 0.5 * h * dirs, z - 0.5 * h * dirs])
        vals = self.psi(pts)
        m = 2 * N
        coarse = (vals[:m] - vals[m:2 * m]) / (2 * h)
        fine = (vals[2 * m:3 * m] - vals[3 * m:]) / h
        return ((4 * fine - coarse) / 3).T

    def apply_jacobian(self, D, vectors) -> np.ndarray:
        """Apply a real Jacobian (complex N x 2N) to complex tangent vectors (rows)."""
        V = np.atleast_2d(np.asarray(vectors, dtype=complex))
        real = np.empty((V.shape[0], 2 * V.shape[1]))
        real[:, 0::2], real[:, 1::2] = V.real, V.imag
        return real @ D.T


def inner_cutoff(spec: AffineConeSpec, directions, candidates=None,
                 max_iterations: int = CORE_ITERATIONS) -> float:
    """Smallest radius R such that Newton converges quickly at every candidate >= R."""
    candidates = np.geomspace(0.05, 10.0, 25) if candidates is None else np.sort(np.asarray(candidates))
    proj = ProjectionMap(spec)
    ok = []
    for r in candidates:
        good = True
        for z0 in directions:
            try:
                proj.coefficients(scaling_map(spec, r, z0), max_iterations=max_iterations)
            except (NewtonDiverged, RankDeficient, np.linalg.LinAlgError):
                good = False
                break
        ok.append(good)
    R = math.inf
    for r, good in zip(candidates[::-1], ok[::-1]):
        if not good:
            break
        R = float(r)
    return R


def solve_projection(spec: AffineConeSpec, z, inner_radius: float = 0.0, **kwargs):
    """Return ``(Phi(z), y)`` for a cone point ``z`` outside the compact core."""
    return ProjectionMap(spec, inner_radius=inner_radius, **kwargs).solve(z)


# -- volume forms ------------------------------------------------------------

@dataclass
class VolumeFormComparison:
    omega0: np.ndarray          # Omega_0 on basis n-tuples
    difference: np.ndarray      # Phi^*Omega - Omega_0 on the same tuples
    tuples: list

    @property
    def pullback(self) -> np.ndarray:
        return self.omega0 + self.difference


def _tuples(n: int):
    return list(itertools.combinations(range(2 * n), n))


def pullback_volume_form(spec: AffineConeSpec, proj: ProjectionMap, z, basis=None,
                         D=None) -> VolumeFormComparison:
    """Evaluate ``Phi^*Omega`` and ``Omega_0`` on tuples of the tangent basis at ``z``."""
    z = np.asarray(z, dtype=complex)
    f, n = spec.cone_polynomials, spec.complex_dim
    dep = best_dependent(f, z)
    free = [i for i in range(spec.ambient_dim) if i not in dep]
    sign = permutation_sign(free + list(dep))
    E = tangent_frame(f, z) if basis is None else np.asarray(basis)
    D = proj.psi_jacobian(z) if D is None else D
    dE = proj.apply_jacobian(D, E)
    phi_shift = proj.psi(z)
    if dep:
        A = jacobian(f, z)[:, list(dep)]
        grad_inc = np.stack([
            np.stack([g.increment(z, phi_shift) + dL(z + phi_shift) for g, dL in
                      zip((fa.gradient_polys[i] for i in dep), (La.gradient_polys[i] for i in dep))])
            for fa, La in zip(f, spec.lower_terms)
        ])
        detA = np.linalg.det(A)
        detB_minus_A = _det_increment(A, grad_inc)
        h_c = sign / detA
        dh = -sign * detB_minus_A / (detA * (detA + detB_minus_A))
    else:
        h_c, dh = complex(sign), 0.0
    tup = _tuples(n)
    omega0 = np.empty(len(tup), dtype=complex)
    diff = np.empty(len(tup), dtype=complex)
    for k, t in enumerate(tup):
        U = E[list(t)][:, free].T
        W = dE[list(t)][:, free].T
        detU = np.linalg.det(U)
        ddet = _det_increment(U, W)
        omega0[k] = h_c * detU
        diff[k] = dh * (detU + ddet) + h_c * ddet
    return VolumeFormComparison(omega0, diff, tup)


def pullback_complex_structure(spec: AffineConeSpec, proj: ProjectionMap, z, basis=None, D=None):
    """``(Phi^*J, Phi^*J - J_0)`` as real 2n x 2n matrices in the orthonormal tangent basis."""
    z = np.asarray(z, dtype=complex)
    E = tangent_frame(spec.cone_polynomials, z) if basis is None else np.asarray(basis)
    D = proj.psi_jacobian(z) if D is None else D
    N = spec.ambient_dim
    # real 2N x 2N matrices of D and of multiplication by i
    Dr = np.empty((2 * N, 2 * N))
    Dr[0::2], Dr[1::2] = D.real, D.imag
    Jr = np.zeros((2 * N, 2 * N))
    for k in range(N):
        Jr[2 * k + 1, 2 * k] = 1.0
        Jr[2 * k, 2 * k + 1] = -1.0
    Er = np.empty((2 * N, E.shape[0]))
    Er[0::2], Er[1::2] = E.real.T, E.imag.T
    A = np.eye(2 * N) + Dr
    delta = Er.T @ np.linalg.solve(A, (Jr @ Dr - Dr @ Jr) @ Er)
    J0 = Er.T @ Jr @ Er
    return J0 + delta, delta


# -- rate experiments ----------------------------------------------------------

@dataclass
class RateReport:
    omega_rate: RateFit
    j_rate: RateFit
    metric_rate: RateFit | None = None
    j_omega_constant: float = math.nan
    j_omega_ratio_slope: float = math.nan
    per_direction: list = field(default_factory=list)
    samples: list = field(default_factory=list)
    inner_cutoff: float = 0.0
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.j_omega_constant):
            raise ValueError("the J/Omega comparison constant must be finite")

    def to_dict(self) -> dict:
        return {
            "omega_rate": self.omega_rate.to_dict(),
            "j_rate": self.j_rate.to_dict(),
            "metric_rate": None if self.metric_rate is None else self.metric_rate.to_dict(),
            "j_omega_constant": self.j_omega_constant,
            "j_omega_ratio_slope": self.j_omega_ratio_slope,
            "per_direction": self.per_direction,
            "inner_cutoff": self.inner_cutoff,
            "parameters": self.parameters,
        }


def link_directions(spec: AffineConeSpec, count: int = 4, seed: int = 0) -> np.ndarray:
    return sample_cone_points(spec, count, seed=seed)


def rate_samples(spec: AffineConeSpec, radii=None, directions: int = 4, seed: int = 0):
    """Proxy norms of ``Phi^*Omega - Omega_0`` and ``Phi^*J - J_0`` along rays.

    Returns ``(radii, omega_mags, j_mags, inner_cutoff, rows)`` with the
    magnitudes shaped ``(directions, radii)``.
    """
    radii = geometric_radii() if radii is None else np.asarray(radii, dtype=float)
    dirs = link_directions(spec, directions, seed)
    R = inner_cutoff(spec, dirs)
    if radii.min() < 2 * R:
        raise InsideCompactCore(f"smallest radius {radii.min():g} is below twice the cutoff {R:g}")
    proj = ProjectionMap(spec, inner_radius=R)
    n = spec.complex_dim
    om = np.empty((len(dirs), len(radii)))
    jm = np.empty_like(om)
    rows = []
    for a, z0 in enumerate(dirs):
        for b, r in enumerate(radii):
            z = scaling_map(spec, r, z0)
            E = tangent_frame(spec.cone_polynomials, z)
            D = proj.psi_jacobian(z)
            vol = pullback_volume_form(spec, proj, z, E, D)
            _, dJ = pullback_complex_structure(spec, proj, z, E, D)
            om[a, b] = np.linalg.norm(vol.difference) * proxy_tensor_scale(spec, r, n)
            jm[a, b] = np.linalg.norm(dJ)
            rows.append({"direction": a, "radius": float(r), "omega_diff": float(om[a, b]),
                         "j_diff": float(jm[a, b]),
                         "omega0": float(np.linalg.norm(vol.omega0) * proxy_tensor_scale(spec, r, n))})
    return radii, om, jm, R, rows


def rate_report(spec: AffineConeSpec, radii=None, directions: int = 4, seed: int = 0,
                metric_rate: RateFit | None = None) -> RateReport:
    radii, om, jm, R, rows = rate_samples(spec, radii, directions, seed)
    gm = lambda m: np.exp(np.mean(np.log(m), axis=0))
    omega_fit = fit_rate(radii, gm(om), inner_cutoff=R)
    j_fit = fit_rate(radii, gm(jm), inner_cutoff=R)
    ratio = jm / om
    ratio_fit = fit_rate(radii, gm(ratio))
    per = []
    for a in range(om.shape[0]):
        per.append({"direction": a,
                    "omega_exponent": fit_rate(radii, om[a]).exponent,
                    "j_exponent": fit_rate(radii, jm[a]).exponent})
    return RateReport(omega_fit, j_fit, metric_rate, float(ratio.max()), ratio_fit.exponent,
                      per, rows, R, dict(spec.parameters))


def deformation_rate_scan(family: str, parameters: dict | None = None, radii=None,
                          directions: int = 4, seed: int = 0) -> RateReport:
    """Omega/J rate fits for the cubic or quadric family with deformation terms."""
    from .cone import cubic_spec, quadric_spec

    parameters = dict(parameters or {})
    if family == "cubic":
        spec = cubic_spec(parameters.get("t_ij"), parameters.get("t_i"), parameters.get("epsilon", 1.0))
    elif family in ("quadric", "quadrics"):
        kw = {}
        if "lambdas" in parameters:
            kw["lambdas"] = parameters["lambdas"]
        spec = quadric_spec(t_i=parameters.get("t_i"), **kw)
    else:
        raise ValueError(f"unknown family {family!r}")
    return rate_report(spec, radii, directions, seed)


# -- diagnostics of the cubic projection -----------------------------------------

def cubic_alpha(proj: ProjectionMap, z) -> complex:
    """``alpha`` in ``Phi(z)_i = z_i + alpha conj(z_i)^2`` for the Fermat cubic."""
    return complex(proj.normalized_coefficients(np.asarray(z, dtype=complex))[..., 0])


def cubic_identity(alpha: complex, z) -> complex:
    """``alpha |z|^4 P(z)``; equals 1 when ``alpha`` solves the projection equation."""
    z = np.asarray(z, dtype=complex)
    nz = float(np.linalg.norm(z))
    a = np.abs(z) ** 2
    zb = np.conj(z)
    P = (3 * np.sum(a**2) / nz**4
         + 3 * (alpha * nz) * np.sum(a * zb**3) / nz**5
         + (alpha * nz) ** 2 * np.sum(zb**6) / nz**6)
    return alpha * nz**4 * P
