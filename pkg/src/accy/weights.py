"""Exceptional weights of the cone Laplacian and the rate calculus built on them.

A link eigenvalue ``mu`` contributes the two indicial roots
``-(m-2)/2 +- sqrt((m-2)^2/4 + mu)`` of ``u'' + (m-1)/r u' - mu/r^2 u = 0``.
Inputs that are rational are kept exact; the square root stays exact when its
argument is a rational square and falls back to floating point otherwise.
"""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Iterable, Sequence

from .errors import (
    BadDimension,
    BadInitialRate,
    CutoffExceeded,
    HypothesisViolated,
    Resonant,
    UnsortedSpectrum,
)

FLOAT_TOL = 1e-12


def _exact(x):
    if isinstance(x, (Fraction, int)) or isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def _sqrt(x):
    """Exact square root of a non-negative rational square, float otherwise."""
    if isinstance(x, Fraction):
        p, q = x.numerator, x.denominator
        rp, rq = math.isqrt(p), math.isqrt(q)
        if rp * rp == p and rq * rq == q:
            return Fraction(rp, rq)
        return math.sqrt(x)
    return math.sqrt(x)


def _is_exact(x) -> bool:
    return isinstance(x, Fraction)


def _eq(a, b) -> bool:
    if _is_exact(a) and _is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= FLOAT_TOL * max(1.0, abs(float(a)))


@dataclass(frozen=True)
class WeightSet:
    """Exceptional weights from a finite prefix of a link spectrum."""

    m: object
    eigenvalues: tuple
    multiplicities: tuple
    weights: tuple                 # sorted distinct weights
    weight_multiplicity: tuple     # multiplicity of each weight
    sources: tuple                 # eigenvalue each weight came from
    cutoff: object                 # largest eigenvalue supplied

    @property
    def center(self):
        return (2 - self.m) / 2

    @property
    def certified_range(self) -> tuple:
        """Interval of weights fully determined by the supplied prefix."""
        half = (self.m - 2) / 2
        top = _sqrt(half * half + self.cutoff)
        return (-half - top, -half + top)

    def __contains__(self, w) -> bool:
        return any(_eq(w, x) for x in self.weights)

    def positive(self):
        return [w for w in self.weights if w > 0]

    def in_open_interval(self, lo, hi):
        return [w for w in self.weights if lo < w < hi and not _eq(w, lo) and not _eq(w, hi)]

    def to_json(self) -> dict:
        enc = lambda x: str(x) if _is_exact(x) else float(x)
        lo, hi = self.certified_range
        return {
            "m": enc(self.m),
            "eigenvalues": [enc(e) for e in self.eigenvalues],
            "multiplicities": list(self.multiplicities),
            "weights": [enc(w) for w in self.weights],
            "weight_multiplicity": list(self.weight_multiplicity),
            "certified_range": [enc(lo), enc(hi)],
        }


def exceptional_weights(m, eigenvalues: Sequence, multiplicities: Sequence[int] | None = None) -> WeightSet:
    """The exceptional set ``{-(m-2)/2 +- sqrt((m-2)^2/4 + mu_j)}``."""
    m = _exact(m)
    if not m > 2:
        raise BadDimension("the cone dimension m must exceed 2")
    eig = [_exact(e) for e in eigenvalues]
    if not eig or eig[0] != 0:
        raise UnsortedSpectrum("the spectrum must start with the eigenvalue 0")
    if any(b <= a for a, b in zip(eig, eig[1:])):
        raise UnsortedSpectrum("eigenvalues must be strictly increasing")
    mult = [1] * len(eig) if multiplicities is None else [int(k) for k in multiplicities]
    half = (m - 2) / 2
    acc: dict = {}
    order = []
    for mu, k in zip(eig, mult):
        root = _sqrt(half * half + mu)
        for w in (-half + root, -half - root):
            key = next((x for x in order if _eq(x, w)), None)
            if key is None:
                order.append(w)
                acc[w] = [k, mu]
            elif not _eq(w, -half):
                acc[key][0] += k
    ws = sorted(order, key=float)
    return WeightSet(m, tuple(eig), tuple(mult), tuple(ws), tuple(acc[w][0] for w in ws),
                     tuple(acc[w][1] for w in ws), eig[-1])


def sphere_spectrum(m: int, kmax: int) -> tuple[list[int], list[int]]:
    """Eigenvalues ``k(k+m-2)`` of the round S^(m-1) with harmonic multiplicities."""
    eig, mult = [], []
    for k in range(kmax + 1):
        eig.append(k * (k + m - 2))
        d = comb(k + m - 1, m - 1) - (comb(k + m - 3, m - 1) if k >= 2 else 0)
        mult.append(d)
    return eig, mult


def lens_spectrum(n: int, p: int, kmax: int) -> tuple[list[int], list[int]]:
    """Z_p-invariant spectrum of S^(2n-1) for ``z -> e^(2 pi i/p) z``.

    Harmonic polynomials of bidegree (a, b) have eigenvalue ``k(k+2n-2)`` with
    ``k = a + b`` and are invariant iff ``a = b mod p``.
    """
    m = 2 * n
    counts: Counter = Counter()
    for k in range(kmax + 1):
        for a in range(k + 1):
            b = k - a
            if (a - b) % p:
                continue
            dim = comb(a + n - 1, n - 1) * comb(b + n - 1, n - 1)
            if a and b:
                dim -= comb(a + n - 2, n - 1) * comb(b + n - 2, n - 1)
            counts[k * (k + m - 2)] += dim
    eig = sorted(counts)
    return eig, [counts[e] for e in eig]


def is_fredholm(ws: WeightSet, beta) -> bool:
    """``Delta: C^{2,a}_beta -> C^{0,a}_{beta-2}`` is Fredholm iff ``beta+2`` is not exceptional."""
    beta = _exact(beta)
    w = beta + 2
    lo, hi = ws.certified_range
    if not (float(lo) <= float(w) <= float(hi)):
        raise CutoffExceeded(f"weight {w} lies outside the certified range [{lo}, {hi}]")
    return w not in ws


@dataclass(frozen=True)
class GapReport:
    gap_holds: bool              # no exceptional weight in the open interval (1-m, 1) except 2-m, 0
    closed_gap_holds: bool       # the same statement on the closed interval [1-m, 1]
    boundary_attained: bool      # 1 is exceptional (mu_1 = m - 1)
    smallest_positive: object
    interval_12: tuple           # exceptional weights strictly inside (1, 2)

    def to_json(self) -> dict:
        enc = lambda x: str(x) if _is_exact(x) else (None if x is None else float(x))
        return {"gap_holds": self.gap_holds, "closed_gap_holds": self.closed_gap_holds,
                "boundary_attained": self.boundary_attained,
                "smallest_positive": enc(self.smallest_positive),
                "interval_12": [enc(w) for w in self.interval_12]}


def obata_gap_check(ws: WeightSet, ricci_nonneg: bool = True) -> GapReport:
    """Check that the only exceptional weights near the centre are ``2-m`` and ``0``."""
    m = ws.m
    mu1 = ws.eigenvalues[1] if len(ws.eigenvalues) > 1 else None
    if ricci_nonneg and mu1 is not None and mu1 < m - 1 and not _eq(mu1, m - 1):
        raise HypothesisViolated(f"first eigenvalue {mu1} is below m - 1 = {m - 1}")
    allowed = lambda w: _eq(w, 0) or _eq(w, 2 - m)
    inside_open = [w for w in ws.in_open_interval(1 - m, 1) if not allowed(w)]
    on_ends = [w for w in ws.weights if _eq(w, 1) or _eq(w, 1 - m)]
    pos = ws.positive()
    return GapReport(not inside_open, not inside_open and not on_ends, any(_eq(w, 1) for w in ws.weights),
                     min(pos, key=float) if pos else None, tuple(ws.in_open_interval(1, 2)))


def eigenvalue_for_weight(m, w):
    """Invert the weight formula: ``mu = w (w + m - 2)``."""
    m, w = _exact(m), _exact(w)
    return w * (w + m - 2)


@dataclass(frozen=True)
class RateIterationTrace:
    beta0: float
    epsilon: float
    steps: tuple
    terminal_rate: float
    step_count: int

    def __post_init__(self):
        if not self.terminal_rate < -2:
            raise ValueError("terminal rate must lie below -2")
        if any(s < -2 for s in self.steps[:-1]):
            raise ValueError("only the terminal rate may lie below -2")


def rate_iteration(beta0, epsilon=Fraction(1, 100)) -> RateIterationTrace:
    """Error rates of the iterative preconditioning: ``b, 2b, 2(2b)+eps, ...`` until < -2."""
    beta0, epsilon = _exact(beta0), _exact(epsilon)
    if not (-2 < beta0 < 0):
        raise BadInitialRate("beta0 must lie in (-2, 0)")
    if not (0 < epsilon <= Fraction(1, 10)):
        raise BadInitialRate("epsilon must lie in (0, 0.1]")
    if -2 <= 2 * beta0 and 2 * beta0 >= -epsilon:
        # x -> 2x + eps has a repelling fixed point at -eps; rates above it never drop
        raise BadInitialRate("epsilon is too large for this beta0; the iteration does not terminate")
    steps = [beta0, 2 * beta0]
    while steps[-1] >= -2:
        nxt = 2 * steps[-1] + epsilon
        if nxt >= steps[-1]:
            raise BadInitialRate("epsilon is too large for this beta0; the iteration does not terminate")
        steps.append(nxt)
    return RateIterationTrace(beta0, epsilon, tuple(steps), steps[-1], len(steps) - 1)


@dataclass(frozen=True)
class RadialModeSolution:
    exponent: object
    coefficient: object
    indicial_roots: tuple
    suppressed: tuple     # homogeneous branches excluded by the target decay
    kept: tuple           # homogeneous branches compatible with it
    resonant: bool = False
    log_coefficient: object = None

    def __call__(self, r):
        if self.resonant:
            return float(self.log_coefficient) * r ** float(self.exponent) * math.log(r)
        return float(self.coefficient) * r ** float(self.exponent)


def radial_mode_solve(m, mu, s, target_decay=None, allow_resonant: bool = False) -> RadialModeSolution:
    """Particular solution of ``u'' + (m-1)/r u' - mu/r^2 u = r^s``.

    Non-resonant: ``u = r^(s+2) / ((s+2)(s+m) - mu)``.  When ``s+2`` is an
    indicial root :class:`Resonant` is raised, unless ``allow_resonant`` asks
    for the ``r^(s+2) log r`` marker solution instead.
    """
    m, mu, s = _exact(m), _exact(mu), _exact(s)
    half = (m - 2) / 2
    root = _sqrt(half * half + mu)
    roots = (-half - root, -half + root)
    p = s + 2
    denom = p * (p + m - 2) - mu
    target = None if target_decay is None else _exact(target_decay)
    suppressed = tuple(q for q in roots if target is not None and q > target)
    kept = tuple(q for q in roots if q not in suppressed)
    if _eq(denom, 0):
        if not allow_resonant:
            raise Resonant(f"s + 2 = {p} is an indicial root")
        # (r^p log r)'' + (m-1)/r (r^p log r)' - mu/r^2 r^p log r = (2p + m - 2) r^(p-2)
        return RadialModeSolution(p, None, roots, suppressed, kept, True, 1 / (2 * p + m - 2))
    return RadialModeSolution(p, 1 / denom, roots, suppressed, kept)


def radial_ode_residual(sol: RadialModeSolution, m, mu, s, r: float) -> float:
    """Residual of the radial ODE at ``r`` using the closed-form derivatives."""
    m, mu, s = float(m), float(mu), float(s)
    p = float(sol.exponent)
    if sol.resonant:
        c = float(sol.log_coefficient)
        L = math.log(r)
        u = c * r**p * L
        du = c * r ** (p - 1) * (p * L + 1)
        d2u = c * r ** (p - 2) * (p * (p - 1) * L + 2 * p - 1)
    else:
        c = float(sol.coefficient)
        u, du, d2u = c * r**p, c * p * r ** (p - 1), c * p * (p - 1) * r ** (p - 2)
    return d2u + (m - 1) / r * du - mu / r**2 * u - r**s


def read_spectrum_csv(path) -> tuple[list, list[int]]:
    eig, mult = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("eigenvalue", ""):
                continue
            eig.append(_exact(Fraction(row[0].strip())) if "." not in row[0] else float(row[0]))
            mult.append(int(row[1]) if len(row) > 1 else 1)
    return eig, mult


def write_spectrum_csv(path, eigenvalues: Iterable, multiplicities: Iterable[int]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["eigenvalue", "multiplicity"])
        for e, k in zip(eigenvalues, multiplicities):
            wr.writerow([str(e), k])


def write_weightset_json(path, ws: WeightSet) -> None:
    with open(path, "w") as fh:
        json.dump(ws.to_json(), fh, indent=2)
