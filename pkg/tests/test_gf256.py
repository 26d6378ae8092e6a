import numpy as np
import pytest

from conftest import clmul_mod
from rlnc_resilience.gf256 import TABLES, build_tables, gf_add, gf_div, gf_inv, gf_mul


def test_table_spot_values():
    t = build_tables()
    assert t.exp[0] == 1
    assert t.exp[8] == 29  # 256 xor 285
    assert t.exp[9] == 58
    assert t.exp[255] == 1
    expected_log = {1: 0, 2: 1, 3: 25, 4: 2, 5: 50, 6: 26, 7: 198, 8: 3, 9: 223, 255: 175}
    for value, exponent in expected_log.items():
        assert t.log[value] == exponent


def test_exp_is_permutation_and_log_inverts_it():
    assert sorted(TABLES.exp[:255]) == list(range(1, 256))
    for i in range(255):
        assert TABLES.log[TABLES.exp[i]] == i
    assert TABLES.log[0] is None


@pytest.mark.parametrize("a,b,expected", [(0b01, 0b10, 0b11), (0, 1, 1), (0xAA, 0xAA, 0)])
def test_add(a, b, expected):
    assert gf_add(a, b) == expected


@pytest.mark.parametrize("a,b,expected", [(2, 128, 29), (1, 1, 1), (0, 77, 0), (77, 0, 0)])
def test_mul(a, b, expected):
    assert gf_mul(a, b) == expected


def test_inverse_of_two_matches_brute_force():
    scan = [b for b in range(1, 256) if gf_mul(2, b) == 1]
    assert scan == [142]
    assert gf_inv(2) == 142
    assert gf_inv(1) == 1


def test_inverse_exhaustive():
    for a in range(1, 256):
        assert gf_mul(a, gf_inv(a)) == 1


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError, match="no multiplicative inverse of zero"):
        gf_inv(0)
    with pytest.raises(ZeroDivisionError):
        gf_div(5, 0)


def test_div():
    assert gf_div(29, 2) == 128
    assert all(gf_div(a, a) == 1 for a in range(1, 256))
    assert all(gf_div(0, b) == 0 for b in range(1, 256))


def test_mul_agrees_with_polynomial_long_division(mul_table):
    oracle = np.array([[clmul_mod(a, b) for b in range(256)] for a in range(256)], dtype=np.uint8)
    assert np.array_equal(mul_table, oracle)


def test_field_axioms_exhaustive(mul_table, add_table):
    M, A = mul_table.astype(np.intp), add_table.astype(np.intp)
    assert np.array_equal(M, M.T)
    assert np.array_equal(A, A.T)
    idx = np.arange(256)
    assert np.array_equal(M[1], idx) and np.array_equal(A[0], idx)
    assert np.all(np.diag(A) == 0)
    # every nonzero row of the multiplication table is a permutation of 1..255
    assert all(sorted(M[a, 1:]) == list(range(1, 256)) for a in range(1, 256))
    a, b, c = np.ix_(idx, idx, idx)
    assert np.array_equal(M[M[a, b], c], M[a, M[b, c]])
    assert np.array_equal(A[A[a, b], c], A[a, A[b, c]])
    assert np.array_equal(M[a, A[b, c]], A[M[a, b], M[a, c]])
