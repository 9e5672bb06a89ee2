"""Affine cone bookkeeping: specs, radius functions, scaling maps, rate fits.

A cone ``C = {f_a = 0}`` in C^N is quasi-homogeneous for a diagonal C*-action
with weights ``w_i``.  The Riemannian radius of the Calabi-Yau cone metric is
not computable for the del Pezzo examples, so distances use the proxy

    r(z) = |z| ** (1 / mu)

which is uniformly equivalent to the true radius and scales exactly like it
(``r(t**mu z) = t r(z)``).  Rates of decay are insensitive to the swap.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateFit,
    InsufficientSamples,
    NewtonDiverged,
    NonpositiveMagnitude,
    OffVariety,
    SingularJacobianMinor,
    ZeroPoint,
)
from .polynomial import Polynomial, constant, power_sum

ZERO_THRESHOLD = 1e-150
ON_VARIETY_RTOL = 1e-10


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**6)


@dataclass(frozen=True)
class AffineConeSpec:
    """Defining data of a quasi-homogeneous cone and one of its smoothings.

    The smoothing is ``{F_a = 0}`` where ``F_a = f_a + (lower-degree terms)``;
    constants live in ``F_a`` (e.g. ``F = sum z**3 - 1``).
    """

    name: str
    ambient_dim: int
    complex_dim: int
    cone_polynomials: tuple[Polynomial, ...]
    smoothing_polynomials: tuple[Polynomial, ...]
    weights: tuple[Fraction, ...]
    radius_exponent: Fraction
    parameters: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(_frac(w) for w in self.weights))
        object.__setattr__(self, "radius_exponent", _frac(self.radius_exponent))
        if len(self.weights) != self.ambient_dim:
            raise ValueError("need one weight per ambient coordinate")
        if len(self.cone_polynomials) != len(self.smoothing_polynomials):
            raise ValueError("cone and smoothing need the same number of equations")
        if self.ambient_dim - len(self.cone_polynomials) != self.complex_dim:
            raise ValueError("only complete intersections are supported")
        for f in self.cone_polynomials:
            if not f.is_quasi_homogeneous(self.weights):
                raise ValueError(f"cone polynomial {f} is not quasi-homogeneous")

    @property
    def codim(self) -> int:
        return len(self.cone_polynomials)

    @property
    def mu(self) -> float:
        return float(self.radius_exponent)

    @property
    def lower_terms(self) -> tuple[Polynomial, ...]:
        return tuple(F - f for F, f in zip(self.smoothing_polynomials, self.cone_polynomials))

    def polynomials(self, which: str) -> tuple[Polynomial, ...]:
        if which == "cone":
            return self.cone_polynomials
        if which == "smoothing":
            return self.smoothing_polynomials
        raise ValueError(f"which must be 'cone' or 'smoothing', got {which!r}")

    def weighted_degrees(self) -> tuple[Fraction, ...]:
        return tuple(f.weighted_degree(self.weights) for f in self.cone_polynomials)

    # -- JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "name": self.name,
            "ambient_dim": self.ambient_dim,
            "complex_dim": self.complex_dim,
            "weights": [str(w) for w in self.weights],
            "radius_exponent": str(self.radius_exponent),
            "cone_polynomials": [p.to_json() for p in self.cone_polynomials],
            "smoothing_polynomials": [p.to_json() for p in self.smoothing_polynomials],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "AffineConeSpec":
        N = int(data["ambient_dim"])
        return cls(
            name=data.get("name", "custom"),
            ambient_dim=N,
            complex_dim=int(data["complex_dim"]),
            cone_polynomials=tuple(Polynomial.from_json(N, p) for p in data["cone_polynomials"]),
            smoothing_polynomials=tuple(Polynomial.from_json(N, p) for p in data["smoothing_polynomials"]),
            weights=tuple(_frac(w) for w in data["weights"]),
            radius_exponent=_frac(data["radius_exponent"]),
        )


def load_spec(source) -> AffineConeSpec:
    """Load a spec from a JSON path, JSON string or already-parsed mapping."""
    if isinstance(source, Mapping):
        return AffineConeSpec.from_json(source)
    path = Path(source)
    if path.exists():
        return AffineConeSpec.from_json(json.loads(path.read_text()))
    return AffineConeSpec.from_json(json.loads(source))


# -- built-in examples -------------------------------------------------------

def _pair_terms(N: int, tij) -> list:
    terms = []
    if tij is None:
        return terms
    items = tij.items() if isinstance(tij, Mapping) else (
        ((i, j), tij[i][j]) for i in range(N) for j in range(i + 1, N)
    )
    for (i, j), c in items:
        if i == j or c == 0:
            continue
        e = [0] * N
        e[i] += 1
        e[j] += 1
        terms.append((complex(c), tuple(e)))
    return terms


def _linear_terms(N: int, ti) -> list:
    terms = []
    if ti is None:
        return terms
    for i, c in enumerate(ti):
        if c:
            e = [0] * N
            e[i] = 1
            terms.append((complex(c), tuple(e)))
    return terms


def cubic_spec(t_ij=None, t_i=None, epsilon: complex = 1.0) -> AffineConeSpec:
    """Fermat cubic cone ``sum z_i^3 = 0`` in C^4 and its smoothing.

    ``t_ij`` is a mapping ``{(i, j): t}`` (0-based, i < j) of quadratic terms,
    ``t_i`` a length-4 sequence of linear terms.
    """
    N = 4
    f = power_sum(N, 3)
    lower = Polynomial.from_terms(N, _pair_terms(N, t_ij) + _linear_terms(N, t_i))
    F = f + lower - constant(N, epsilon)
    return AffineConeSpec(
        name="cubic", ambient_dim=N, complex_dim=3,
        cone_polynomials=(f,), smoothing_polynomials=(F,),
        weights=(Fraction(1),) * N, radius_exponent=Fraction(3),
        parameters={"t_ij": dict(t_ij or {}), "t_i": list(t_i or []), "epsilon": epsilon},
    )


DEFAULT_LAMBDAS = (0.0, 1.0, 2.0, 3.0, 4.0)


def quadric_spec(lambdas: Sequence[complex] = DEFAULT_LAMBDAS, t_i=None,
                 epsilon: tuple[complex, complex] = (1.0, 1.0)) -> AffineConeSpec:
    """Intersection of two quadric cones in C^5 (a cone over a degree 4 del Pezzo)."""
    N = 5
    lambdas = tuple(complex(l) for l in lambdas)
    if len(set(lambdas)) != N:
        raise ValueError("the lambda_i must be pairwise distinct")
    f1 = power_sum(N, 2)
    f2 = power_sum(N, 2, lambdas)
    F1 = f1 + Polynomial.from_terms(N, _linear_terms(N, t_i)) - constant(N, epsilon[0])
    F2 = f2 - constant(N, epsilon[1])
    return AffineConeSpec(
        name="quadrics", ambient_dim=N, complex_dim=3,
        cone_polynomials=(f1, f2), smoothing_polynomials=(F1, F2),
        weights=(Fraction(1),) * N, radius_exponent=Fraction(3),
        parameters={"lambdas": [complex(l) for l in lambdas], "t_i": list(t_i or []), "epsilon": list(epsilon)},
    )


def odp_spec(n: int, epsilon: complex = 1.0) -> AffineConeSpec:
    """Ordinary double point ``sum z_i^2 = 0`` in C^{n+1}; smoothing ``= epsilon``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    N = n + 1
    f = power_sum(N, 2)
    return AffineConeSpec(
        name=f"odp{n}", ambient_dim=N, complex_dim=n,
        cone_polynomials=(f,), smoothing_polynomials=(f - constant(N, epsilon),),
        weights=(Fraction(1),) * N, radius_exponent=Fraction(n, n - 1),
        parameters={"n": n, "epsilon": epsilon},
    )


def flat_spec(n: int) -> AffineConeSpec:
    """C^n itself, the trivial cone."""
    return AffineConeSpec(
        name=f"flat{n}", ambient_dim=n, complex_dim=n,
        cone_polynomials=(), smoothing_polynomials=(),
        weights=(Fraction(1),) * n, radius_exponent=Fraction(1),
    )


# -- radius and scaling ------------------------------------------------------

def _norm(z) -> float:
    return float(np.linalg.norm(np.asarray(z, dtype=complex)))


def on_variety(polys: Sequence[Polynomial], z, rtol: float = ON_VARIETY_RTOL) -> bool:
    z = np.asarray(z, dtype=complex)
    nz = max(_norm(z), 1.0)
    return all(abs(complex(p(z))) <= rtol * nz ** max(p.degree, 1) for p in polys)


def radius(spec: AffineConeSpec, z, check: bool = True) -> float:
    """Proxy cone radius; ``|z| ** (1/mu)`` when all weights agree."""
    z = np.asarray(z, dtype=complex)
    nz = _norm(z)
    if nz < ZERO_THRESHOLD:
        raise ZeroPoint("radius is undefined at the apex")
    if check and not on_variety(spec.cone_polynomials, z):
        raise OffVariety("point is not on the cone")
    mu = spec.mu
    w = np.array([float(x) for x in spec.weights])
    if np.all(w == w[0]):
        return nz ** (1.0 / (mu * w[0]))
    a = np.abs(z) ** 2
    # rho solves sum |z_i|^2 rho^(-2 mu w_i) = 1; monotone decreasing in rho
    g = lambda lr: float(np.sum(a * np.exp(-2 * mu * w * lr))) - 1.0
    lo, hi = -50.0, 50.0
    return math.exp(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15))


def scaling_map(spec: AffineConeSpec, t: float, z) -> np.ndarray:
    """The cone dilation nu_t: ``z_i -> t**(mu w_i) z_i``; scales r by t."""
    if t <= 0:
        raise ValueError("t must be positive")
    z = np.asarray(z, dtype=complex)
    w = np.array([float(x) for x in spec.weights])
    return z * t ** (spec.mu * w)


# -- Newton on dependent coordinates -----------------------------------------

def jacobian(polys: Sequence[Polynomial], z) -> np.ndarray:
    """Holomorphic Jacobian ``d f_a / d z_i`` with shape ``(..., s, N)``."""
    z = np.asarray(z, dtype=complex)
    if not polys:
        return np.zeros(z.shape[:-1] + (0, z.shape[-1]), dtype=complex)
    return np.stack([p.gradient(z) for p in polys], axis=-2)


def solve_dependent(polys: Sequence[Polynomial], z, dep: Sequence[int], tol: float = 1e-14,
                    maxiter: int = 50, cond_max: float = 1e12) -> np.ndarray:
    """Solve ``polys = 0`` for the coordinates ``dep`` holding the rest fixed.

    Vectorised over leading axes of ``z``.  Raises :class:`NewtonDiverged`
    when the relative residual does not fall below ``tol``.
    """
    z = np.array(z, dtype=complex, copy=True)
    dep = list(dep)
    s = len(polys)
    if s == 0:
        return z
    batch = z.shape[:-1]
    scale = np.maximum(np.linalg.norm(z, axis=-1), 1.0)
    degs = np.array([max(p.degree, 1) for p in polys])
    for _ in range(maxiter):
        F = np.stack([p(z) for p in polys], axis=-1)
        J = jacobian(polys, z)[..., dep]
        try:
            step = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianMinor("dependent Jacobian minor is singular") from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobianMinor("dependent Jacobian minor is singular")
        z[..., dep] -= step
        rel = np.abs(step) / scale[..., None]
        if np.all(rel < tol):
            break
    F = np.stack([p(z) for p in polys], axis=-1)
    resid = np.abs(F) / scale[..., None] ** degs
    if not np.all(resid < 1e3 * tol):
        raise NewtonDiverged(f"dependent-coordinate Newton failed (residual {resid.max():.2e})")
    J = jacobian(polys, z)[..., dep]
    if batch == ():
        c = np.linalg.cond(J)
        if not np.isfinite(c) or c > cond_max:
            raise SingularJacobianMinor(f"Jacobian minor condition number {c:.2e}")
    return z


def best_dependent(polys: Sequence[Polynomial], z) -> tuple[int, ...]:
    """Coordinates whose Jacobian minor is best conditioned (largest |det|)."""
    from itertools import combinations

    s = len(polys)
    if s == 0:
        return ()
    J = jacobian(polys, z)
    N = J.shape[-1]
    best, best_val = None, -1.0
    for dep in combinations(range(N), s):
        sub = J[:, list(dep)]
        val = abs(np.linalg.det(sub)) / max(np.prod(np.linalg.norm(J, axis=1)), 1e-300)
        if val > best_val:
            best, best_val = dep, val
    return tuple(best)


def tangent_frame(polys: Sequence[Polynomial], z) -> np.ndarray:
    """Euclidean-orthonormal real basis of the tangent space at ``z``.

    Returns ``(2n, N)`` complex rows ``v_1, i v_1, ..., v_n, i v_n`` where the
    ``v_k`` span the complex kernel of the Jacobian.
    """
    z = np.asarray(z, dtype=complex)
    N = z.shape[-1]
    J = jacobian(polys, z)
    if J.shape[0] == 0:
        V = np.eye(N, dtype=complex)
    else:
        _, sv, vh = np.linalg.svd(J)
        s = J.shape[0]
        if sv[-1] <= 1e-13 * max(sv[0], 1e-300):
            raise SingularJacobianMinor("defining equations are singular here")
        V = vh[s:].conj()
    rows = []
    for v in V:
        rows.append(v)
        rows.append(1j * v)
    return np.array(rows)


def sample_cone_points(spec: AffineConeSpec, count: int, seed: int = 0, which: str = "cone",
                       max_tries: int = 200) -> np.ndarray:
    """Pseudo-random points on the cone, normalised to proxy radius 1.

    For ``which='smoothing'`` the points are random points of the smoothing
    (not normalised).
    """
    rng = np.random.default_rng(seed)
    polys = spec.polynomials(which)
    N, s = spec.ambient_dim, spec.codim
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries * count:
            raise NewtonDiverged("could not sample points on the variety")
        z = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / math.sqrt(2)
        dep = list(range(N - s, N))
        try:
            z = solve_dependent(polys, z, dep, cond_max=1e8)
        except (NewtonDiverged, SingularJacobianMinor):
            continue
        if which == "cone":
            r = radius(spec, z, check=False)
            if r < 1e-3:
                continue
            z = scaling_map(spec, 1.0 / r, z)
            z = solve_dependent(polys, z, best_dependent(polys, z))
        out.append(z)
    return np.array(out)


# -- rate fitting --------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    """Fit of ``magnitude ~ amplitude * r**exponent * (log r)**log_power``."""

    exponent: float
    log_power: int
    amplitude: float
    residual_rms: float
    sample_count: int
    radius_range: tuple[float, float]
    inner_cutoff: float = 0.0

    def __post_init__(self):
        if self.radius_range[0] < self.inner_cutoff:
            raise ValueError("rate fit sampled inside the configured inner cutoff")

    def predict(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * r**self.exponent * np.log(r) ** self.log_power

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "log_power": self.log_power,
            "amplitude": self.amplitude,
            "residual_rms": self.residual_rms,
            "sample_count": self.sample_count,
            "radius_range": list(self.radius_range),
            "inner_cutoff": self.inner_cutoff,
        }


def _lstsq(X, y):
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    return coef, float(np.sqrt(np.mean(res**2)))


def fit_rate(radii, magnitudes, allow_log: bool = False, inner_cutoff: float = 0.0,
             min_samples: int = 6) -> RateFit:
    """Least-squares power law in log-log coordinates.

    With ``allow_log`` a ``(log r)**1`` factor is adopted when it lowers the
    RMS log-residual by at least 20%.
    """
    r = np.asarray(radii, dtype=float)
    m = np.asarray(magnitudes, dtype=float)
    if r.shape != m.shape or r.ndim != 1:
        raise ValueError("radii and magnitudes must be 1-d and of equal length")
    if len(r) < min_samples:
        raise InsufficientSamples(f"need >= {min_samples} samples, got {len(r)}")
    if np.any(np.diff(r) <= 0):
        raise ValueError("radii must be strictly increasing")
    if np.any(~np.isfinite(m)) or np.any(m <= 0):
        if np.all(m == 0):
            raise DegenerateFit("field vanishes identically")
        raise NonpositiveMagnitude("magnitudes must be positive and finite")
    lr, lm = np.log(r), np.log(m)
    X = np.column_stack([np.ones_like(lr), lr])
    (c0, s0), rms0 = _lstsq(X, lm)
    best = (s0, 0, math.exp(c0), rms0)
    if allow_log and np.all(r > 1.0):
        (c1, s1), rms1 = _lstsq(X, lm - np.log(lr))
        if rms1 <= 0.8 * rms0:
            best = (s1, 1, math.exp(c1), rms1)
    s, p, A, rms = best
    return RateFit(float(s), p, float(A), rms, len(r), (float(r[0]), float(r[-1])), inner_cutoff)


def fit_rays(radii, magnitudes, allow_log: bool = False, inner_cutoff: float = 0.0) -> RateFit:
    """Fit the geometric mean over rays; ``magnitudes`` has shape (rays, radii)."""
    m = np.atleast_2d(np.asarray(magnitudes, dtype=float))
    if np.any(m <= 0):
        raise NonpositiveMagnitude("magnitudes must be positive")
    return fit_rate(radii, np.exp(np.mean(np.log(m), axis=0)), allow_log, inner_cutoff)


def geometric_radii(lo: float = 10.0, hi: float = 1e4, count: int = 16) -> np.ndarray:
    return np.geomspace(lo, hi, count)


def proxy_tensor_scale(spec: AffineConeSpec, r, covariant_rank: int) -> np.ndarray:
    """Factor turning a Euclidean sup-norm of a covariant tensor into a g0 proxy."""
    return np.asarray(r, dtype=float) ** (covariant_rank * (spec.mu - 1.0))


def homogeneity_degree(field: Callable, spec: AffineConeSpec, direction, radii=None,
                       covariant_rank: int = 0) -> RateFit:
    """Fit the growth rate of a tensor field along one ray of the cone.

    ``field(z, frame)`` returns the components of the tensor at ``z`` (a
    scalar, or its values on tuples of the Euclidean-orthonormal tangent
    ``frame``); its Euclidean norm is rescaled by ``r**(q (mu - 1))`` for a
    covariant rank ``q``.
    """
    radii = geometric_radii() if radii is None else np.asarray(radii, dtype=float)
    if len(radii) < 8:
        raise InsufficientSamples("need at least 8 radii along the ray")
    z0 = np.asarray(direction, dtype=complex)
    z0 = scaling_map(spec, 1.0 / radius(spec, z0, check=False), z0)
    mags = []
    for r in radii:
        z = scaling_map(spec, r, z0)
        frame = tangent_frame(spec.cone_polynomials, z)
        val = np.asarray(field(z, frame))
        mags.append(float(np.linalg.norm(val)) * float(proxy_tensor_scale(spec, r, covariant_rank)))
    mags = np.array(mags)
    if np.all(mags == 0):
        raise DegenerateFit("field vanishes along the ray")
    return fit_rate(radii, mags)
