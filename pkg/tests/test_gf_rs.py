import itertools

import numpy as np
import pytest

from combsw.gf_rs import (MODULI, GaloisField, ReedSolomonError, RSParams, gf_mul, rs_checksums, rs_correct,
                          rs_corrupted_positions)


def slow_mul(a, b, w):
    '''Schoolbook carry-less multiplication followed by reduction.'''
    product = 0
    for i in range(w):
        if (b >> i) & 1:
            product ^= a << i
    for i in range(2 * w - 2, w - 1, -1):
        if (product >> i) & 1:
            product ^= MODULI[w] << (i - w)
    return product


def lagrange_eval(points, values, x, gf):
    acc = 0
    for i, (xi, yi) in enumerate(zip(points, values)):
        term = yi
        for j, xj in enumerate(points):
            if j != i:
                term = gf.mul(term, gf.div(x ^ xj, xi ^ xj))
        acc ^= term
    return acc


def test_gf_mul_examples():
    assert gf_mul(5, 1, 3) == 5
    assert gf_mul(0b010, 0b100, 3) == 0b011
    assert gf_mul(6, 0, 3) == 0


@pytest.mark.parametrize('w', [3, 4, 8])
def test_gf_mul_matches_schoolbook(w):
    gf = GaloisField.get(w)
    for a, b in itertools.product(range(1 << w), repeat=2):
        assert gf.mul(a, b) == slow_mul(a, b, w)


@pytest.mark.parametrize('w', sorted(MODULI))
def test_field_tables(w):
    gf = GaloisField.get(w)
    elements = np.arange(1, gf.order)
    assert sorted(gf.exp[:gf.order - 1].tolist()) == elements.tolist()
    assert np.all(gf.mul_arrays(elements, gf.inv_arrays(elements)) == 1)


def test_field_pow():
    gf = GaloisField.get(4)
    for a in range(1, 16):
        assert gf.pow(a, 0) == 1
        assert gf.pow(a, 15) == 1
        assert gf.pow(a, 2) == gf.mul(a, a)
    assert gf.pow(0, 3) == 0
    assert gf.pow_arrays([0, 3], 2).tolist() == [0, gf.mul(3, 3)]


def test_field_errors():
    gf = GaloisField.get(4)
    with pytest.raises(ZeroDivisionError):
        gf.inv(0)
    with pytest.raises(ValueError):
        gf.mul(16, 1)
    with pytest.raises(ValueError):
        GaloisField(17)


def test_checksum_examples():
    assert rs_checksums([1, 2], RSParams(2, 1, 3)) == [3, 4, 5]
    assert rs_checksums([6] * 5, RSParams(5, 2, 4)) == [6] * 5


def test_checksums_match_interpolation():
    gf = GaloisField.get(3)
    checks = rs_checksums([1, 2, 4], RSParams(3, 1, 3))
    assert checks == [lagrange_eval([1, 2, 3], [1, 2, 4], x, gf) for x in (4, 5, 6)]


def test_rs_params_validation():
    with pytest.raises(ValueError):
        RSParams(5, 1, 3).validate()      # 5 + 3 = 8 points do not fit GF(8)
    RSParams(4, 1, 3).validate()
    with pytest.raises(ValueError):
        rs_checksums([1, 2, 3], RSParams(2, 1, 3))


@pytest.mark.parametrize('method', ['syndrome', 'welch'])
def test_correct_examples(method):
    p = RSParams(2, 1, 3)
    assert rs_correct([1, 2], [3, 4, 5], p, method) == [1, 2]
    assert rs_correct([1, 7], [3, 4, 5], p, method) == [1, 2]


@pytest.mark.parametrize('method', ['syndrome', 'welch'])
def test_correct_every_error_pattern(method):
    p = RSParams(8, 2, 4)
    rng = np.random.default_rng(1)
    for _ in range(50):
        data = rng.integers(0, 16, size=8)
        checks = rs_checksums(data, p)
        for count in (1, 2):
            for positions in itertools.combinations(range(8), count):
                received = data.copy()
                received[list(positions)] ^= rng.integers(1, 16, size=count)
                corrected = rs_correct(received, checks, p, method)
                assert corrected == data.tolist()
                assert rs_corrupted_positions(received, corrected) == list(positions)


def codewords_within_one(received, checks, p):
    '''Brute force: every block tuple at distance <= 1 from `received` whose checksums are `checks`.'''
    found = []
    candidates = [list(received)]
    for i in range(p.m):
        for v in range(1 << p.w):
            if v != received[i]:
                candidates.append(list(received[:i]) + [v] + list(received[i + 1:]))
    for c in candidates:
        if rs_checksums(c, p) == checks:
            found.append(c)
    return found


def test_decoders_agree_beyond_radius():
    p = RSParams(8, 1, 4)
    rng = np.random.default_rng(3)
    for _ in range(20):
        data = rng.integers(0, 16, size=8).tolist()
        checks = rs_checksums(data, p)
        received = [d ^ int(e) for d, e in zip(data, rng.integers(0, 16, size=8))]
        expected = codewords_within_one(received, checks, p)
        for method in ('syndrome', 'welch'):
            if expected:
                assert rs_correct(received, checks, p, method) == expected[0]
            else:
                with pytest.raises(ReedSolomonError):
                    rs_correct(received, checks, p, method)


def test_zero_budget():
    p = RSParams(4, 0, 3)
    checks = rs_checksums([1, 2, 3, 4], p)
    assert rs_correct([1, 2, 3, 4], checks, p) == [1, 2, 3, 4]
    with pytest.raises(ReedSolomonError):
        rs_correct([1, 2, 3, 5], checks, p)


def test_protocol_size_repair():
    p = RSParams(342, 35, 12)
    rng = np.random.default_rng(5)
    data = rng.integers(0, 1 << 12, size=342)
    checks = rs_checksums(data, p)
    received = data.copy()
    positions = rng.choice(342, size=35, replace=False)
    received[positions] ^= rng.integers(1, 1 << 12, size=35)
    assert rs_correct(received, checks, p) == data.tolist()


def test_wrong_method():
    with pytest.raises(ValueError):
        rs_correct([1, 2], [3, 4, 5], RSParams(2, 1, 3), method='magic')
