from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from accy.errors import BadRank, EmptyFlag, EmptyPartition
from accy.flags import (
    bundle_data, cross_check, fano_index, fano_index_table, flag_c1, grassmannian_small_resolutions,
    bundle_path_record, maximal_flag_divisibility, projective_bundle_c1_check, write_flag_table,
    write_partition_json,
)


def _two_rho_difference(parts):
    # c1(G/P) = 2 rho - 2 rho_Levi; in the lambda basis 2 rho = (n, n-2, ..., -n)
    N = sum(parts)
    rho = [N - 1 - 2 * i for i in range(N)]
    levi = []
    for k in parts:
        levi += [k - 1 - 2 * i for i in range(k)]
    c = [a - b for a, b in zip(rho, levi)]
    return tuple(x - c[-1] for x in c)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=2, max_size=5))
def test_c1_matches_rho_difference(parts):
    assert flag_c1(parts).c1_coefficients == _two_rho_difference(parts)


def test_known_partition():
    fp = flag_c1((1, 1, 3))
    assert fp.c1_coefficients == (6, 4, 0, 0, 0)
    assert fp.divisibility == 2
    assert fp.n == 4


@pytest.mark.parametrize("n", range(2, 13))
def test_root_sum_family(n):
    for k in range(2, n + 1):
        got = flag_c1((1, k - 1, n + 1 - k)).c1_coefficients
        assert got == tuple([n + k] + [n] * (k - 1) + [0] * (n + 1 - k))


def test_partition_errors():
    with pytest.raises(EmptyFlag):
        flag_c1((4,))
    with pytest.raises(EmptyPartition):
        flag_c1(())
    with pytest.raises(EmptyPartition):
        flag_c1((2, 0))


@pytest.mark.parametrize("n", range(1, 12))
def test_full_flag_divisibility(n):
    assert maximal_flag_divisibility(n) == 2


def test_dual_paths_agree():
    assert cross_check(2, 12) == []


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 15), st.integers(0, 15), st.sampled_from(["T", "T*", "Q", "Q*"]))
def test_bundle_path_per_record(k, extra, bundle):
    n = k + extra
    r, _ = bundle_data(bundle, k, n)
    if r < 2:
        return
    rec = [x for x in grassmannian_small_resolutions(k, n) if x.bundle == bundle][0]
    ok, power = bundle_path_record(bundle, k, n)
    assert (ok, power) == (rec.exists, rec.twist_power)


@pytest.mark.parametrize("n", range(2, 13))
def test_projective_space_uses_dual_quotient(n):
    rec = {x.bundle: x for x in grassmannian_small_resolutions(1, n)}
    assert "T" not in rec and "T*" not in rec
    assert rec["Q*"].exists and rec["Q*"].twist_power == 1


def test_rank_one_records_on_request():
    recs = grassmannian_small_resolutions(1, 3, include_rank_one=True)
    assert {r.bundle for r in recs} == {"T", "T*", "Q", "Q*"}


def test_projective_bundle_predicate():
    assert projective_bundle_c1_check(3, 1, -4, 3) == (True, Fraction(1))
    assert projective_bundle_c1_check(3, 1, -3, 3) == (False, None)
    assert projective_bundle_c1_check(4, 0, -2, 2) == (True, None)
    with pytest.raises(BadRank):
        projective_bundle_c1_check(1, 0, 0, 1)


def test_fano_indices():
    assert fano_index("P^3") == 4
    assert fano_index("Q^3 in P^4") == 3
    assert all(r.index > 0 for r in fano_index_table())
    with pytest.raises(KeyError):
        fano_index("dP5")


def test_writers(tmp_path):
    path = tmp_path / "t.csv"
    write_flag_table(path, 2, 4)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,n,bundle,exists,twist_power"
    write_partition_json(tmp_path / "p.json", flag_c1((1, 2)))
    assert '"divisibility"' in (tmp_path / "p.json").read_text()
