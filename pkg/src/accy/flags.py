"""First Chern classes of SU(n+1) flag manifolds and small resolutions of
Calabi-Yau cones as total spaces of vector bundles over Grassmannians.

Weights of SU(n+1) are written in the basis ``lambda_1, ..., lambda_{n+1}``
with ``sum lambda_i = 0``, so the weight lattice is ``Z^{n+1} / Z(1, ..., 1)``
and divisibility of a weight is the gcd of its pairwise coefficient differences.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import BadRank, EmptyFlag, EmptyPartition

BUNDLES = ("T", "T*", "Q", "Q*")


@dataclass(frozen=True)
class FlagPartition:
    parts: tuple[int, ...]
    raw_coefficients: tuple[int, ...]
    c1_coefficients: tuple[int, ...]
    divisibility: int

    @property
    def n(self) -> int:
        return sum(self.parts) - 1

    def to_json(self) -> dict:
        return {"parts": list(self.parts), "c1_coefficients": list(self.c1_coefficients),
                "raw_coefficients": list(self.raw_coefficients), "divisibility": self.divisibility}


def _groups(parts: Sequence[int]) -> list[int]:
    out = []
    for g, k in enumerate(parts):
        out += [g] * k
    return out


def flag_c1(parts: Sequence[int]) -> FlagPartition:
    """Root-sum expression of ``c_1(SU(n+1)/P)`` for the block sizes ``parts``.

    ``c_1`` is the sum of ``lambda_i - lambda_j`` over boxes ``i < j`` in
    different blocks.
    """
    parts = tuple(int(p) for p in parts)
    if not parts or any(p <= 0 for p in parts):
        raise EmptyPartition("parts must be a non-empty sequence of positive integers")
    if sum(parts) < 2:
        raise EmptyPartition("parts must sum to at least 2")
    if len(parts) == 1:
        raise EmptyFlag("a single block gives P = G; there are no flags")
    grp = _groups(parts)
    N = len(grp)
    raw = []
    for i in range(N):
        later = sum(1 for j in range(i + 1, N) if grp[j] != grp[i])
        earlier = sum(1 for j in range(i) if grp[j] != grp[i])
        raw.append(later - earlier)
    shift = raw[-1]
    norm = tuple(c - shift for c in raw)
    div = 0
    for c in norm:
        div = gcd(div, c)
    return FlagPartition(parts, tuple(raw), norm, div)


def maximal_flag_divisibility(n: int) -> int:
    if n < 1:
        raise ValueError("n must be at least 1")
    return flag_c1((1,) * (n + 1)).divisibility


@dataclass(frozen=True)
class SmallResolutionRecord:
    k: int
    n: int
    bundle: str
    rank: int
    c1_bundle: int
    condition: str
    twist_power: Fraction
    exists: bool

    def __post_init__(self):
        if self.exists != (self.twist_power.denominator == 1):
            raise ValueError("existence must match integrality of the twist power")

    @property
    def grassmannian(self) -> tuple[int, int]:
        return (self.k, self.n + 1)

    def row(self) -> list:
        return [self.k, self.n, self.bundle, self.exists, str(self.twist_power)]


def _criterion(bundle: str, k: int, n: int) -> tuple[bool, str, Fraction]:
    """The divisibility criteria in closed form, one per bundle."""
    if bundle == "T":
        return n % k == 0, f"{k} | {n}", Fraction(n, k)
    if bundle == "T*":
        return (n + 2) % k == 0, f"{k} | {n + 2}", Fraction(n + 2, k)
    if bundle == "Q":
        return (n + 2) % (n + 1 - k) == 0, f"{n + 1 - k} | {n + 2}", Fraction(n + 2, n + 1 - k)
    if bundle == "Q*":
        return n % (n + 1 - k) == 0, f"{n + 1 - k} | {n}", Fraction(n, n + 1 - k)
    raise ValueError(f"unknown bundle {bundle!r}")


def bundle_data(bundle: str, k: int, n: int) -> tuple[int, int]:
    """``(rank, c_1)`` over G(k, n+1) in units of ``t = c_1(det T)``."""
    table = {"T": (k, 1), "T*": (k, -1), "Q": (n + 1 - k, -1), "Q*": (n + 1 - k, 1)}
    return table[bundle]


def grassmannian_small_resolutions(k: int, n: int, include_rank_one: bool = False) -> list[SmallResolutionRecord]:
    """Candidate small resolutions ``E -> G(k, n+1)`` for E among T, T*, Q, Q*.

    Rank-one bundles give projective bundles that are the base itself, so they
    are left out unless ``include_rank_one`` is set.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    out = []
    for b in BUNDLES:
        r, c1 = bundle_data(b, k, n)
        if r < 2 and not include_rank_one:
            continue
        ok, cond, power = _criterion(b, k, n)
        out.append(SmallResolutionRecord(k, n, b, r, c1, cond, power, ok))
    return out


def projective_bundle_c1_check(r: int, c1_E: int, c1_B: int, k: int):
    """``(divisible, twist_power)``: is ``c_1(P(E)) = r xi + c_1(E) + c_1(B)`` divisible by k?

    The twist power is ``-(c_1(E) + c_1(B)) / r``, reported when ``k = r``
    and the divisibility holds.
    """
    if r < 2:
        raise BadRank("rank must be at least 2")
    if k < 1:
        raise ValueError("k must be positive")
    ok = r % k == 0 and (c1_E + c1_B) % k == 0
    power = Fraction(-(c1_E + c1_B), r) if ok and k == r else None
    return ok, power


def bundle_path_record(bundle: str, k: int, n: int) -> tuple[bool, Fraction]:
    """The same question answered through the projective-bundle predicate."""
    r, c1 = bundle_data(bundle, k, n)
    c1_B = -(n + 1)
    ok, _ = projective_bundle_c1_check(r, c1, c1_B, r)
    return ok, Fraction(-(c1 + c1_B), r)


def cross_check(kmin: int = 2, nmax: int = 12) -> list[tuple]:
    """Disagreements between the closed-form criteria and the bundle predicate."""
    bad = []
    for n in range(kmin, nmax + 1):
        for k in range(kmin, n + 1):
            for rec in grassmannian_small_resolutions(k, n):
                ok, power = bundle_path_record(rec.bundle, k, n)
                if ok != rec.exists or power != rec.twist_power:
                    bad.append((k, n, rec.bundle))
    return bad


@dataclass(frozen=True)
class FanoIndex:
    name: str
    dimension: int
    index: int


def fano_index_table(nmax: int = 6) -> list[FanoIndex]:
    """Fano indices of projective spaces and quadrics used by the cone examples."""
    out = []
    for d in range(1, nmax + 1):
        out.append(FanoIndex(f"P^{d}", d, d + 1))
    for n in range(3, nmax + 2):
        # quadric hypersurface in P^n: dimension n-1, index n-1
        out.append(FanoIndex(f"Q^{n - 1} in P^{n}", n - 1, n - 1))
    return out


def fano_index(name: str) -> int:
    for rec in fano_index_table(12):
        if rec.name == name:
            return rec.index
    raise KeyError(name)


def write_flag_table(path, kmin: int = 2, nmax: int = 12) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "n", "bundle", "exists", "twist_power"])
        for n in range(kmin, nmax + 1):
            for k in range(1, n + 1):
                for rec in grassmannian_small_resolutions(k, n):
                    wr.writerow(rec.row())


def write_partition_json(path, fp: FlagPartition) -> None:
    with open(path, "w") as fh:
        json.dump(fp.to_json(), fh, indent=2)
