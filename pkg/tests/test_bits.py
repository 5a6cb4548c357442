import numpy as np
import pytest

from combsw.bits import (BitString, IndexSet, Permutation, apply_permutation, blocks_to_ints, concat,
                         extract, hamming_distance, ints_to_blocks, sample_correlated_pair, split_blocks,
                         weight, xor)
from combsw.randomness import PRGStream, SeedRole, derive_seed


def b(text):
    return BitString.from_str(text)


@pytest.mark.parametrize('text, expected', [('0000', 0), ('1111', 4), ('10110', 3)])
def test_weight(text, expected):
    assert weight(b(text)) == expected


@pytest.mark.parametrize('x, y, expected', [
    ('1010', '1010', '0000'),
    ('1010', '0000', '1010'),
    ('1100', '1010', '0110'),
])
def test_xor(x, y, expected):
    assert xor(b(x), b(y)) == b(expected)


def test_xor_length_mismatch():
    with pytest.raises(ValueError):
        xor(b('101'), b('10'))


@pytest.mark.parametrize('x, y, expected', [('1011', '1011', 0), ('0000', '1111', 4), ('10011', '10110', 2)])
def test_hamming_distance(x, y, expected):
    assert hamming_distance(b(x), b(y)) == expected


def test_extract():
    x = b('10110')
    assert extract(x, IndexSet(range(1, 6), 5)) == x
    assert len(extract(x, IndexSet([], 5))) == 0
    assert extract(x, IndexSet([2, 5], 5)) == b('00')


def test_split_blocks():
    assert split_blocks(b('10110100'), 4) == [b('1011'), b('0100')]
    assert split_blocks(b('10110100'), 8) == [b('10110100')]
    with pytest.raises(ValueError):
        split_blocks(b('10110100'), 3)


def test_blocks_and_ints():
    x = b('101101001111')
    assert blocks_to_ints(x, 4).tolist() == [0b1011, 0b0100, 0b1111]
    assert ints_to_blocks([11, 4, 15], 4) == x


def test_apply_permutation():
    x = b('101')
    assert apply_permutation(x, Permutation.identity(3)) == x
    pi = Permutation([2, 3, 1])
    assert apply_permutation(x, pi) == b('011')
    assert apply_permutation(apply_permutation(x, pi), pi.inverse()) == x


def test_permutation_algebra():
    pi = Permutation([2, 3, 1])
    assert pi.inverse().to_list() == [3, 1, 2]
    assert pi.inverse().inverse() == pi
    assert pi.compose(pi.inverse()) == Permutation.identity(3)
    assert pi(1) == 2
    with pytest.raises(ValueError):
        Permutation([1, 1, 2])


def test_bytes_and_padding():
    x = b('1011001')
    assert x.to_bytes() == bytes([0b10110010])
    assert BitString.from_bytes(x.to_bytes(), 7) == x
    assert BitString.from_raw(x.to_raw()) == x
    assert BitString.from_hex(x.to_hex(), 7) == x
    with pytest.raises(ValueError):
        BitString.from_bytes(bytes([0b10110011]), 7)   # nonzero padding


def test_int_conversions_and_accessors():
    x = BitString.from_int(0b1101, 6)
    assert str(x) == '001101'
    assert x.to_int() == 13
    assert x.bit(3) == 1 and x.bit(1) == 0
    with pytest.raises(IndexError):
        x.bit(0)
    with pytest.raises(ValueError):
        BitString.from_int(64, 6)
    assert x.pad_to(8) == b('00110100')
    assert x.truncate(3) == b('001')
    assert concat([b('1'), b('01'), b('')]) == b('101')


def test_bitstring_is_immutable():
    x = b('1010')
    with pytest.raises(ValueError):
        x.to_numpy()[0] = 0


def test_index_set():
    with pytest.raises(ValueError):
        IndexSet([3, 2], 5)
    with pytest.raises(ValueError):
        IndexSet([0, 2], 5)
    assert IndexSet.interval(2, 4, 8) == IndexSet([5, 6, 7, 8], 8)
    s = IndexSet([1, 4, 5, 8], 8)
    assert s.complement() == IndexSet([2, 3, 6, 7], 8)
    assert s.split_by_blocks(4) == [IndexSet([1, 4], 4), IndexSet([1, 4], 4)]
    assert IndexSet.from_unsorted([5, 1, 5], 6) == IndexSet([1, 5], 6)


def _stream(label):
    return PRGStream(derive_seed(b'bits-test', SeedRole.INPUT, label))


def test_sample_correlated_pair():
    x, y = sample_correlated_pair(64, 0, _stream(0))
    assert x == y
    for i in range(50):
        x, y = sample_correlated_pair(8, 0.5, _stream(i))
        assert hamming_distance(x, y) <= 4
    assert sample_correlated_pair(100, 0.1, _stream(7)) == sample_correlated_pair(100, 0.1, _stream(7))


def test_sample_correlated_pair_distance_range():
    distances = {hamming_distance(*sample_correlated_pair(40, 0.1, _stream(i))) for i in range(300)}
    assert distances <= set(range(5))
    assert len(distances) > 1
