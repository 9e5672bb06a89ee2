"""Explicit Ricci-flat profiles: Stenzel on T*S^n, Calabi on C^n/Z_n, and
Eguchi-Hanson as the n = 2 Calabi metric.

Stenzel: ``omega = i ddbar f(tau)`` on ``{sum z_i^2 = 1}`` with ``tau = |z|^2
= cosh w`` and ``f(cosh w) = h(w)``, where ``(h'(w)^n)' = sinh(w)^(n-1)``,
``h'(0) = 0``.  The cone potential is ``C_n tau^(1 - 1/n)`` with
``C_n = n (n-1)^(-(n+1)/n)``, the exact leading coefficient of ``f``.

Calabi: ``omega = i ddbar u(t)`` on ``C^n`` with ``t = |z|^2`` and
``u'(t) = (t^n + c)^(1/n) / t``, so ``det(ddbar u) = 1``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .charts import (
    make_chart,
    metric_as_real_form,
    monge_ampere_residual,
)
from .cone import (
    RateFit,
    fit_rate,
    flat_spec,
    geometric_radii,
    odp_spec,
    sample_cone_points,
    scaling_map,
    tangent_frame,
)
from .errors import FrameDegenerate, GridTooCoarse, NonpositiveT
from .projection import FIRST_DIFF_STEP, ProjectionMap

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_SMALL_X, _GL_SMALL_W = np.polynomial.legendre.leggauss(30)


# -- Stenzel profile -------------------------------------------------------------

def stable_arccosh(tau):
    """``arccosh`` written as ``log(2 tau) + log(1/2 + sqrt(1/4 - 1/(4 tau^2)))``."""
    tau = np.asarray(tau, dtype=float)
    big = np.maximum(tau, 2.0)
    out = np.log(2 * big) + np.log(0.5 + np.sqrt(0.25 - 0.25 / big**2))
    return np.where(tau >= 2.0, out, np.arccosh(np.maximum(tau, 1.0)))


def sinh_power_integral(m: int, w):
    """``int_0^w sinh(s)^m ds``; closed form for w > 1, Gauss-Legendre below."""
    w = np.asarray(w, dtype=float)
    wc = np.maximum(w, 1.0)
    total = np.zeros_like(wc)
    for j in range(m + 1):
        k = m - 2 * j
        term = wc if k == 0 else np.expm1(k * wc) / k
        total = total + comb(m, j) * (-1) ** j * term
    closed = total / 2.0**m
    ws = np.minimum(w, 1.0)
    s = 0.5 * ws[..., None] * (_GL_SMALL_X + 1.0)
    quad = 0.5 * ws * np.sum(_GL_SMALL_W * np.sinh(s) ** m, axis=-1)
    return np.where(w > 1.0, closed, quad)


def stenzel_constant(n: int) -> float:
    """Exact leading coefficient ``C_n`` of ``f(tau) ~ C_n tau^(1 - 1/n)``."""
    return n * (n - 1) ** (-(n + 1) / n)


def _leading_ratio_minus_one(n: int, w):
    """``J_{n-1}(w) / (leading exponential term) - 1`` without cancellation."""
    m = n - 1
    w = np.asarray(w, dtype=float)
    acc = np.full_like(w, -1.0 / m)
    for j in range(1, m + 1):
        k = m - 2 * j
        term = w if k == 0 else np.expm1(k * w) / k
        acc = acc + comb(m, j) * (-1) ** j * term
    return m * np.exp(-m * w) * acc


def _log_fprime_ratio(n: int, tau):
    """``log(f'(tau) / (a tau^(-1/n)))`` with ``a = (n-1)^(-1/n)``."""
    w = stable_arccosh(tau)
    e2 = np.exp(-2 * w)
    rho = _leading_ratio_minus_one(n, w)
    return np.log1p(rho) / n + np.log1p(e2) / n - np.log1p(-e2), w, e2, rho


def _fprime_large(n: int, tau):
    a = (n - 1) ** (-1.0 / n)
    return a * np.asarray(tau, dtype=float) ** (-1.0 / n)


def stenzel_fprime(n: int, tau):
    tau = np.asarray(tau, dtype=float)
    L, w, _, _ = _log_fprime_ratio(n, np.maximum(tau, 2.0))
    big = _fprime_large(n, tau) * np.exp(L)
    ws = stable_arccosh(np.minimum(tau, 2.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        small = sinh_power_integral(n - 1, ws) ** (1.0 / n) / np.sinh(ws)
    small = np.where(ws > 0, small, n ** (-1.0 / n))
    return np.where(tau >= 2.0, big, small)


def stenzel_fprime_excess(n: int, tau):
    """``f'(tau) - a tau^(-1/n)`` for tau >= 2, accurate to relative rounding."""
    L, *_ = _log_fprime_ratio(n, tau)
    return _fprime_large(n, tau) * np.expm1(L)


def stenzel_fsecond_excess(n: int, tau):
    """``f''(tau) - f0''(tau)`` where ``f0 = C_n tau^(1 - 1/n)``; tau >= 2."""
    tau = np.asarray(tau, dtype=float)
    m = n - 1
    L, w, e2, rho = _log_fprime_ratio(n, tau)
    L2 = L + np.log1p(e2) - np.log1p(-e2)
    beta = (m / n) * np.expm1(m * np.log1p(-e2) - np.log1p(rho)) - 2 * e2 / (1 - e2)
    base = _fprime_large(n, tau) / tau
    return base * (-np.expm1(L2) / n + np.exp(L2) * beta)


def stenzel_fsecond(n: int, tau):
    tau = np.asarray(tau, dtype=float)
    return cone_fsecond(n, tau) + stenzel_fsecond_excess(n, tau)


def cone_fprime(n: int, tau):
    return _fprime_large(n, tau)


def cone_fsecond(n: int, tau):
    return -_fprime_large(n, tau) / (n * np.asarray(tau, dtype=float))


def stenzel_hprime(n: int, w):
    return sinh_power_integral(n - 1, w) ** (1.0 / n)


def stenzel_h(n: int, w):
    """``h(w) = int_0^w h'`` by fixed 64-node Gauss-Legendre (smooth in w)."""
    w = np.asarray(w, dtype=float)
    s = 0.5 * w[..., None] * (_GL_X + 1.0)
    return 0.5 * w * np.sum(_GL_W * stenzel_hprime(n, s), axis=-1)


def stenzel_potential(n: int, scale: float = 1.0):
    """Batched ambient potential ``scale * f(|z|^2)`` for points of the smoothing."""
    def phi(z):
        tau = np.sum(np.abs(np.asarray(z)) ** 2, axis=-1)
        return scale * stenzel_h(n, stable_arccosh(tau))
    return phi


def cone_potential(n: int, c: float | None = None):
    c = stenzel_constant(n) if c is None else c

    def phi(z):
        tau = np.sum(np.abs(np.asarray(z)) ** 2, axis=-1)
        return c * tau ** (1.0 - 1.0 / n)
    return phi


@dataclass(frozen=True)
class ProfileSolution:
    n: int
    grid: np.ndarray
    h_values: np.ndarray
    h_prime_values: np.ndarray
    C_n: float
    C_n_exact: float
    offset: float
    correction_fit: RateFit
    ode_residual: float

    def __post_init__(self):
        if self.h_prime_values[0] != 0.0:
            raise ValueError("h'(0) must vanish")
        if np.any(np.diff(self.h_prime_values[1:]) <= 0):
            raise ValueError("h' must be strictly increasing")

    @property
    def tau(self) -> np.ndarray:
        return np.cosh(self.grid)

    def f(self, tau):
        return stenzel_h(self.n, stable_arccosh(tau))

    def f_prime(self, tau):
        return stenzel_fprime(self.n, tau)

    def f_second(self, tau):
        return stenzel_fsecond(self.n, tau)

    def correction(self, tau):
        return stenzel_correction(self.n, tau)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["w", "h", "h_prime", "tau", "f"])
            for w, h, hp in zip(self.grid, self.h_values, self.h_prime_values):
                wr.writerow([repr(float(w)), repr(float(h)), repr(float(hp)), repr(float(np.cosh(w))), repr(float(h))])


def stenzel_correction(n: int, tau):
    """``k(tau) = f/(C_n tau^(1-1/n)) - 1`` with f normalised to have no constant term.

    Computed as ``-int_tau^inf (f' - f0') / (C_n tau^(1-1/n))``.
    """
    C = stenzel_constant(n)
    # in w the integrand decays like exp(-w/2) or faster; 200 units is plenty
    g = lambda w: float(stenzel_fprime_excess(n, math.cosh(w))) * math.sinh(w)
    out = []
    for t in np.atleast_1d(np.asarray(tau, dtype=float)):
        w0 = float(stable_arccosh(t))
        edges = w0 + np.array([0.0, 5.0, 20.0, 60.0, 200.0])
        val = sum(integrate.quad(g, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0]
                  for a, b in zip(edges[:-1], edges[1:]))
        out.append(-val / (C * t ** (1.0 - 1.0 / n)))
    return np.array(out)


def _ode_residual(n: int, grid, J_of) -> float:
    """Max relative residual of ``(h'^n)' = sinh^(n-1)`` at interior grid points."""
    worst = 0.0
    for w in grid[1:-1]:
        eps = 1e-3
        d1 = (J_of(w + eps) - J_of(w - eps)) / (2 * eps)
        d2 = (J_of(w + eps / 2) - J_of(w - eps / 2)) / eps
        deriv = (4 * d2 - d1) / 3
        target = math.sinh(w) ** (n - 1)
        worst = max(worst, abs(deriv - target) / target)
    return worst


def solve_stenzel_profile(n: int, w_max: float = 30.0, grid_size: int = 400,
                          tau_fit=(1e2, 1e6), ode_tolerance: float = 1e-9) -> ProfileSolution:
    """Tabulate the Stenzel profile by adaptive quadrature and fit its asymptotics."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if w_max < 5:
        raise ValueError("w_max must be at least 5")
    if grid_size < 200:
        raise GridTooCoarse(f"grid_size {grid_size} < 200")
    grid = np.linspace(0.0, w_max, grid_size)
    integrand = lambda s: math.sinh(s) ** (n - 1)
    J = np.zeros(grid_size)
    for k in range(1, grid_size):
        J[k] = J[k - 1] + integrate.quad(integrand, grid[k - 1], grid[k], epsabs=0.0, epsrel=1e-13)[0]
    hp = J ** (1.0 / n)
    hp[0] = 0.0
    hp_fun = lambda s: float(stenzel_hprime(n, s))
    h = np.zeros(grid_size)
    for k in range(1, grid_size):
        h[k] = h[k - 1] + integrate.quad(hp_fun, grid[k - 1], grid[k], epsabs=0.0, epsrel=1e-13)[0]

    def J_of(w):
        k = min(int(np.searchsorted(grid, w)) - 1, grid_size - 2)
        k = max(k, 0)
        return J[k] + integrate.quad(integrand, grid[k], w, epsabs=0.0, epsrel=1e-13)[0]

    resid = _ode_residual(n, grid, J_of)
    if not resid <= ode_tolerance:
        raise GridTooCoarse(f"ODE residual {resid:.2e} exceeds {ode_tolerance:.0e}")
    # leading coefficient from the tail of the tabulated profile
    top = grid >= w_max - 10.0
    tau = np.cosh(grid[top])
    X = np.column_stack([tau ** (1.0 - 1.0 / n), np.ones_like(tau)])
    (C_fit, b), *_ = np.linalg.lstsq(X, h[top], rcond=None)
    taus = np.geomspace(tau_fit[0], tau_fit[1], 16)
    k = stenzel_correction(n, taus)
    fit = fit_rate(taus, np.abs(k), allow_log=True)
    return ProfileSolution(n, grid, h, hp, float(C_fit), stenzel_constant(n), float(b), fit, resid)


# -- Calabi / Eguchi-Hanson ---------------------------------------------------------

def calabi_profile_derivative(n: int, t, c: float = 1.0):
    """``u'(t) = (t^n + c)^(1/n) / t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise NonpositiveT("t must be positive")
    if c < 0:
        raise ValueError("c must be non-negative")
    out = 1.0 + calabi_excess(n, t, c)
    return float(out) if out.ndim == 0 else out


def calabi_excess(n: int, t, c: float = 1.0):
    """``u'(t) - 1`` without cancellation."""
    t = np.asarray(t, dtype=float)
    return np.expm1(np.log1p(c * t ** (-float(n))) / n)


def calabi_second(n: int, t, c: float = 1.0):
    t = np.asarray(t, dtype=float)
    return -c * (t**n + c) ** (1.0 / n - 1.0) / t**2


def calabi_potential(n: int, c: float = 1.0):
    """Batched ``u(|z|^2)`` with ``u(t) = t + int_1^t (u' - 1)``."""
    def phi(z):
        t = np.sum(np.abs(np.asarray(z)) ** 2, axis=-1)
        L = np.log(t)
        s = 0.5 * L[..., None] * (_GL_X + 1.0)
        es = np.exp(s)
        corr = 0.5 * L * np.sum(_GL_W * es * calabi_excess(n, es, c), axis=-1)
        return t + corr
    return phi


def calabi_series(n: int, order: int = 3) -> list[Fraction]:
    """Coefficients ``c_{n,k}`` of ``u(t) = sum_k c_{n,k} t^(1 - n k)`` (c = 1)."""
    out = []
    for k in range(order + 1):
        binom = Fraction(1)
        for j in range(k):
            binom *= (Fraction(1, n) - j) / (j + 1)
        out.append(binom / (1 - n * k))
    return out


# -- metric comparisons ----------------------------------------------------------------

def _orthonormal_coords(G, M):
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise FrameDegenerate("frame Gram matrix is not positive definite") from exc
    Li = np.linalg.inv(L)
    return Li @ M @ Li.T


def _gram(H, E, F=None):
    F = E if F is None else F
    return np.real(E @ H @ np.conj(F).T)


def stenzel_metric_difference(n: int, proj: ProjectionMap, z, E, D=None):
    """``(g0, Phi^*g - g0)`` on the real tangent vectors ``E`` (complex rows) at a cone point."""
    z = np.asarray(z, dtype=complex)
    D = proj.psi_jacobian(z) if D is None else D
    d = proj.psi(z)
    w = z + d
    tz = float(np.sum(np.abs(z) ** 2))
    dtau = 2 * float(np.real(np.vdot(z, d))) + float(np.sum(np.abs(d) ** 2))
    tw = tz + dtau
    lg = math.log1p(dtau / tz)
    a0, b0 = float(cone_fprime(n, tz)), float(cone_fsecond(n, tz))
    da = float(stenzel_fprime_excess(n, tw)) + a0 * math.expm1(-lg / n)
    db = float(stenzel_fsecond_excess(n, tw)) + b0 * math.expm1((-1.0 / n - 1.0) * lg)
    aS, bS = a0 + da, b0 + db
    I = np.eye(len(z))
    H0 = a0 * I + b0 * np.outer(np.conj(z), z)
    dH = da * I + db * np.outer(np.conj(w), w) + b0 * (np.outer(np.conj(d), z) + np.outer(np.conj(z), d)
                                                       + np.outer(np.conj(d), d))
    HS = aS * I + bS * np.outer(np.conj(w), w)
    dE = proj.apply_jacobian(D, E)
    g0 = _gram(H0, E)
    h = _gram(dH, E) + _gram(HS, dE, E) + _gram(HS, E, dE) + _gram(HS, dE)
    return g0, h


def calabi_metric_difference(n: int, z, c: float = 1.0) -> np.ndarray:
    """``ddbar u - I`` at ``z`` (flat cone metric is the identity)."""
    z = np.asarray(z, dtype=complex)
    t = float(np.sum(np.abs(z) ** 2))
    return float(calabi_excess(n, t, c)) * np.eye(n) + float(calabi_second(n, t, c)) * np.outer(np.conj(z), z)


@dataclass
class MetricRateResult:
    fit: RateFit
    per_direction: list
    radii: np.ndarray
    magnitudes: np.ndarray


def metric_rate_experiment(family: str, n: int, radii=None, directions: int = 4, seed: int = 0) -> MetricRateResult:
    """Fit the decay of ``|Phi^*g - g0|_{g0}`` for stenzel, calabi or eguchi_hanson."""
    radii = geometric_radii() if radii is None else np.asarray(radii, dtype=float)
    if family == "eguchi_hanson":
        if n != 2:
            raise ValueError("Eguchi-Hanson is the n = 2 Calabi metric")
        family = "calabi"
    mags = np.empty((directions, len(radii)))
    if family == "stenzel":
        spec = odp_spec(n)
        proj = ProjectionMap(spec)
        dirs = sample_cone_points(spec, directions, seed=seed)
        for a, z0 in enumerate(dirs):
            for b, r in enumerate(radii):
                z = scaling_map(spec, r, z0)
                E = tangent_frame(spec.cone_polynomials, z)
                g0, h = stenzel_metric_difference(n, proj, z, E)
                mags[a, b] = np.linalg.norm(_orthonormal_coords(g0, h))
    elif family == "calabi":
        rng = np.random.default_rng(seed)
        for a in range(directions):
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            v /= np.linalg.norm(v)
            for b, r in enumerate(radii):
                mags[a, b] = np.linalg.norm(metric_as_real_form(calabi_metric_difference(n, r * v)))
    else:
        raise ValueError(f"unknown family {family!r}")
    gm = np.exp(np.mean(np.log(mags), axis=0))
    per = [{"direction": a, "exponent": fit_rate(radii, mags[a]).exponent} for a in range(directions)]
    return MetricRateResult(fit_rate(radii, gm), per, radii, mags)


# -- leading term and Bianchi gauge --------------------------------------------------------

@dataclass
class LeadingTermReport:
    tau: float
    matrix: np.ndarray
    trace: float
    bianchi_dr: float
    bianchi_dcr: float
    bianchi_scale: float
    frame_error: float

    def __post_init__(self):
        M = np.asarray(self.matrix)
        if np.abs(M - M.T).max() > 1e-10 * max(1.0, np.abs(M).max()):
            raise ValueError("leading-term matrix is not symmetric")

    @property
    def bianchi_relative(self) -> tuple[float, float]:
        return abs(self.bianchi_dr) / self.bianchi_scale, abs(self.bianchi_dcr) / self.bianchi_scale

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "matrix": np.asarray(self.matrix).tolist(),
            "trace": self.trace,
            "bianchi_dr": self.bianchi_dr,
            "bianchi_dcr": self.bianchi_dcr,
            "bianchi_scale": self.bianchi_scale,
            "bianchi_relative": list(self.bianchi_relative),
            "frame_error": self.frame_error,
        }


def _gram_schmidt(vectors, H):
    out = []
    for v in vectors:
        u = v.copy()
        for e in out:
            u = u - _gram(H, u[None], e[None])[0, 0] * e
        nrm2 = _gram(H, u[None])[0, 0]
        if not nrm2 > 1e-14 * _gram(H, v[None])[0, 0]:
            raise FrameDegenerate("orthonormalisation failed")
        out.append(u / math.sqrt(nrm2))
    return np.array(out)


def stenzel_leading_term(n: int, tau: float = 1e6) -> LeadingTermReport:
    """``tau (Phi^*g - g0)`` at ``p0 = sqrt(tau/2) (1, i, 0, ..., 0)`` in the radial frame."""
    if n < 3:
        raise ValueError("the leading-term computation needs n >= 3")
    spec = odp_spec(n)
    proj = ProjectionMap(spec)
    N = n + 1
    p0 = np.zeros(N, dtype=complex)
    p0[0], p0[1] = 1.0, 1j
    p0 *= math.sqrt(tau / 2)
    a0, b0 = float(cone_fprime(n, tau)), float(cone_fsecond(n, tau))
    H0 = a0 * np.eye(N) + b0 * np.outer(np.conj(p0), p0)
    vecs = [p0, 1j * p0]
    for j in range(2, N):
        e = np.zeros(N, dtype=complex)
        e[j] = 1.0
        vecs += [e, 1j * e]
    frame = _gram_schmidt(np.array(vecs), H0)
    g0, h = stenzel_metric_difference(n, proj, p0, frame)
    frame_error = float(np.abs(g0 - np.eye(2 * n)).max())
    M = tau * h
    M = 0.5 * (M + M.T)
    hnorm = float(np.linalg.norm(h))
    r = math.sqrt(2 * stenzel_constant(n) * tau ** (1 - 1 / n))
    div = _bianchi_divergence(n, spec, proj, p0)
    er, jer = frame[0], frame[1]
    chart_vec = lambda v: np.ravel(np.column_stack([v[1:].real, v[1:].imag]))
    return LeadingTermReport(float(tau), M, float(np.trace(M)), float(div @ chart_vec(er)),
                             float(div @ chart_vec(jer)), hnorm / r, frame_error)


def _bianchi_divergence(n: int, spec, proj: ProjectionMap, p0) -> np.ndarray:
    """Components ``(div_{g0} h)_b`` in the real chart coordinates with z_1 dependent."""
    chart = make_chart(spec, "cone", p0, free_indices=range(1, n + 1))
    dim = 2 * n

    def metrics_at(x):
        zeta = x[0::2] + 1j * x[1::2]
        z = chart.point(zeta)
        dz0 = -z[1:] / z[0]   # d z_1 / d zeta on sum z^2 = 0
        V = np.zeros((n, n + 1), dtype=complex)
        V[:, 0] = dz0
        V[:, 1:] = np.eye(n)
        E = np.empty((dim, n + 1), dtype=complex)
        E[0::2], E[1::2] = V, 1j * V
        return stenzel_metric_difference(n, proj, z, E)

    x0 = np.empty(dim)
    x0[0::2], x0[1::2] = chart.base_zeta.real, chart.base_zeta.imag
    step = FIRST_DIFF_STEP * max(1.0, float(np.linalg.norm(x0)))
    g, h = metrics_at(x0)
    dg = np.empty((dim, dim, dim))
    dh = np.empty((dim, dim, dim))
    for c in range(dim):
        e = np.zeros(dim)
        e[c] = 1.0
        vals = {}
        for k in (1.0, -1.0, 0.5, -0.5):
            vals[k] = metrics_at(x0 + k * step * e)
        for idx, out in ((0, dg), (1, dh)):
            coarse = (vals[1.0][idx] - vals[-1.0][idx]) / (2 * step)
            fine = (vals[0.5][idx] - vals[-0.5][idx]) / step
            out[c] = (4 * fine - coarse) / 3
    gi = np.linalg.inv(g)
    # Gamma^d_{ac} = 1/2 g^{de} (d_a g_ec + d_c g_ea - d_e g_ac); dg[c, a, b] = d_c g_ab
    T = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    Gam = 0.5 * np.einsum("de,eac->dac", gi, np.einsum("aec->eac", T))
    div = (np.einsum("ac,acb->b", gi, dh)
           - np.einsum("ac,dac,db->b", gi, Gam, h)
           - np.einsum("ac,dab,cd->b", gi, Gam, h))
    return div


# -- Monge-Ampere experiments --------------------------------------------------------------------

def smoothing_points(n: int, count: int, seed: int = 0, radii=(1.5, 6.0)) -> np.ndarray:
    """Points of the ODP smoothing obtained by projecting random cone points."""
    spec = odp_spec(n)
    rng = np.random.default_rng(seed + 7919)
    dirs = sample_cone_points(spec, count, seed=seed)
    proj = ProjectionMap(spec)
    out = []
    for z0 in dirs:
        r = math.exp(rng.uniform(math.log(radii[0]), math.log(radii[1])))
        out.append(proj(scaling_map(spec, r, z0)))
    return np.array(out)


def stenzel_ma_residuals(n: int, count: int = 100, seed: int = 0, scale: float = 1.0) -> np.ndarray:
    spec = odp_spec(n)
    phi = stenzel_potential(n, scale)
    return np.array([monge_ampere_residual(phi, spec, "smoothing", make_chart(spec, "smoothing", z))
                     for z in smoothing_points(n, count, seed)])


def cone_ma_residuals(n: int, c: float, count: int = 20, seed: int = 0) -> np.ndarray:
    spec = odp_spec(n)
    phi = cone_potential(n, c)
    rng = np.random.default_rng(seed + 104729)
    pts = sample_cone_points(spec, count, seed=seed)
    out = []
    for z0 in pts:
        z = scaling_map(spec, math.exp(rng.uniform(0.0, math.log(5.0))), z0)
        out.append(monge_ampere_residual(phi, spec, "cone", make_chart(spec, "cone", z)))
    return np.array(out)


def recover_cone_constant(n: int, count: int = 20, seed: int = 0) -> float:
    """The unique ``c`` whose cone residual matches the Stenzel residual (1-d root search)."""
    target = float(np.mean(stenzel_ma_residuals(n, count, seed)))
    base = float(np.mean(cone_ma_residuals(n, 1.0, count, seed)))
    g = lambda lc: base + n * lc - target
    # the cone residual is affine in log c, so the bracket below always contains the root
    lc = brentq(g, -50.0, 50.0, xtol=1e-15)
    return math.exp(lc)


def calabi_ma_residuals(n: int, count: int = 100, seed: int = 0, c: float = 1.0) -> np.ndarray:
    spec = flat_spec(n)
    rng = np.random.default_rng(seed)
    phi = calabi_potential(n, c)
    out = []
    for _ in range(count):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v *= math.exp(rng.uniform(math.log(0.5), math.log(5.0))) / np.linalg.norm(v)
        out.append(monge_ampere_residual(phi, spec, "cone", make_chart(spec, "cone", v)))
    return np.array(out)
