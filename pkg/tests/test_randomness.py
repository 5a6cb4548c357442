import itertools
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from combsw.bits import BitString, Permutation
from combsw.gf_rs import GaloisField
from combsw.randomness import (AffinePermutationSource, PRGStream, Seed, SeedRole, ToeplitzHashSeed,
                               UniformPermutationSource, affine_permutation, derive_seed, draw_hash_indices,
                               hash_eval, independent_hash_seeds, invert, permutation_affine,
                               permutation_affine_walk, permutation_uniform)


def seed(i, role=SeedRole.PERM_I):
    return derive_seed(b'randomness-test', role, i)


# ----------------------------------------------------------------------
# Seeds and streams
def test_derive_seed_separates_roles_and_labels():
    assert derive_seed(b'm', SeedRole.PERM_A) == derive_seed(b'm', SeedRole.PERM_A)
    assert derive_seed(b'm', SeedRole.PERM_A) != derive_seed(b'm', SeedRole.PERM_B)
    assert derive_seed(b'm', SeedRole.TRIAL, 1) != derive_seed(b'm', SeedRole.TRIAL, 2)
    assert len(derive_seed(b'm', SeedRole.TRIAL).data) == 16


def test_seed_bytes():
    s = seed(0, SeedRole.HASH_B)
    assert Seed.from_bytes(s.to_bytes()) == s
    assert s.to_bytes()[0] == int(SeedRole.HASH_B)


def test_pinned_stream_words():
    s = derive_seed(b'combsw', SeedRole.HASH_A)
    assert s.data.hex() == 'cfe2ebc2a5ee09f085028c4bccf6b026'
    words = [format(int(w), '016x') for w in PRGStream(s).words(4)]
    assert words == ['a63c7154732ac7e5', 'a0de72dec8314988', '50a46f51c7e1badb', '7ae7af9aad0f05fc']


def test_stream_replays():
    a, b = PRGStream(seed(1)), PRGStream(seed(1))
    assert a.words(10).tolist() == b.words(10).tolist()
    assert a.bits(77).tolist() == b.bits(77).tolist()
    assert PRGStream(seed(1)).words(4).tolist() != PRGStream(seed(2)).words(4).tolist()


def test_stream_chunking_is_consistent():
    a, b = PRGStream(seed(3)), PRGStream(seed(3))
    whole = a.words(8).tolist()
    parts = b.words(3).tolist() + b.words(5).tolist()
    assert whole == parts


def test_stream_bits_are_big_endian_words():
    word = int(PRGStream(seed(4)).words(1)[0])
    bits = PRGStream(seed(4)).bits(64)
    assert int(''.join(map(str, bits.tolist())), 2) == word


def test_randbelow_range_and_fork():
    stream = PRGStream(seed(5))
    values = [stream.randbelow(10) for _ in range(2000)]
    assert min(values) == 0 and max(values) == 9
    assert stream.randbelow(1) == 0
    with pytest.raises(ValueError):
        stream.randbelow(0)
    parent = PRGStream(seed(6))
    child = parent.fork(SeedRole.TRIAL, 'x')
    assert parent.words(2).tolist() == PRGStream(seed(6)).words(2).tolist()
    assert child.words(2).tolist() != PRGStream(seed(6)).words(2).tolist()


# ----------------------------------------------------------------------
# Toeplitz hashing
def test_zero_seed_gives_zero_digest():
    h = ToeplitzHashSeed(6, 3, BitString.zeros(8), BitString.zeros(3))
    for v in range(64):
        assert hash_eval(h, BitString.from_int(v, 6), 3) == BitString.zeros(3)


def test_selection_rows():
    h = ToeplitzHashSeed(4, 2, BitString.from_str('00010'), BitString.from_str('00'))
    assert hash_eval(h, BitString.from_str('1011'), 2) == BitString.from_str('10')


def test_hash_ints_matches_matrix_product():
    rng = np.random.default_rng(0)
    n_in, tau = 7, 4
    for _ in range(20):
        d = BitString(rng.integers(0, 2, n_in + tau - 1))
        off = BitString(rng.integers(0, 2, tau))
        h = ToeplitzHashSeed(n_in, tau, d, off)
        t = np.array([[d.to_numpy()[i - j + n_in - 1] for j in range(n_in)] for i in range(tau)])
        for v in range(1 << n_in):
            x = BitString.from_int(v, n_in).to_numpy()
            expected = (t @ x + off.to_numpy()) % 2
            assert hash_eval(h, BitString.from_int(v, n_in), tau).to_numpy().tolist() == expected.tolist()


def test_toeplitz_family_is_pairwise_independent():
    n_in, tau = 4, 2
    family = []
    for bits in range(1 << (n_in + 2 * tau - 1)):
        raw = BitString.from_int(bits, n_in + 2 * tau - 1)
        family.append(ToeplitzHashSeed(n_in, tau, raw.truncate(n_in + tau - 1),
                                       BitString(raw.to_numpy()[n_in + tau - 1:])))
    assert len(family) == 128
    for x1, x2 in itertools.combinations(range(1 << n_in), 2):
        pairs = Counter((int(h.hash_ints([x1])[0]), int(h.hash_ints([x2])[0])) for h in family)
        assert len(pairs) == 16
        assert set(pairs.values()) == {8}


def test_full_length_digest_is_bijective():
    h = ToeplitzHashSeed.random(PRGStream(seed(7)), 6, 6)
    assert len(set(h.hash_ints(np.arange(64)).tolist())) == 64


def test_pinned_toeplitz_seed():
    h = ToeplitzHashSeed.random(PRGStream(derive_seed(b'combsw', SeedRole.HASH_A)), 12, 5)
    assert h.diagonals == BitString.from_str('1010011000111100')
    assert h.offset == BitString.from_str('10100')


def test_hash_shape_checks():
    with pytest.raises(ValueError):
        ToeplitzHashSeed(4, 5, BitString.zeros(8), BitString.zeros(5))
    h = ToeplitzHashSeed.random(PRGStream(seed(8)), 4, 2)
    with pytest.raises(ValueError):
        hash_eval(h, BitString.zeros(5), 2)


# ----------------------------------------------------------------------
# Hash indices
def test_degree_zero_indices_are_constant():
    indices = draw_hash_indices(seed(9, SeedRole.HASH_A), m=6, t=1, w=8, n_in=8, tau=3)
    assert len({i.value for i in indices}) == 1
    assert len({i.seed for i in indices}) == 1


def test_hash_indices_replay():
    a = draw_hash_indices(seed(10, SeedRole.HASH_A), m=4, t=2, w=8, n_in=8, tau=3)
    b = draw_hash_indices(seed(10, SeedRole.HASH_A), m=4, t=2, w=8, n_in=8, tau=3)
    assert [i.value for i in a] == [i.value for i in b]
    assert [i.seed for i in a] == [i.seed for i in b]


def test_hash_indices_are_polynomial_values():
    gf = GaloisField.get(4)
    values = [i.value for i in draw_hash_indices(seed(11, SeedRole.HASH_B), m=16, t=3, w=4, n_in=4, tau=2)]
    # a degree < 3 polynomial is determined by 3 values; every other value must follow from them
    points = [0, 1, 2]
    for x in range(3, 16):
        acc = 0
        for i, xi in enumerate(points):
            term = values[xi]
            for j, xj in enumerate(points):
                if j != i:
                    term = gf.mul(term, gf.div(x ^ xj, xi ^ xj))
            acc ^= term
        assert acc == values[x]


def test_pinned_hash_indices():
    indices = draw_hash_indices(derive_seed(b'combsw', SeedRole.HASH_A), m=6, t=3, w=4, n_in=12, tau=5)
    # coefficients 5, 8, 11 over GF(16) mod x^4 + x + 1
    assert [i.value for i in indices] == [5, 6, 12, 15, 13, 14]
    assert indices[0].seed == ToeplitzHashSeed(12, 5, BitString.from_str('1111010110010101'),
                                               BitString.from_str('11001'))


def test_independent_hash_seeds():
    seeds = independent_hash_seeds(seed(12, SeedRole.HASH_A), 5, 12, 5)
    assert len(seeds) == 5
    assert len(set(seeds)) == 5
    assert seeds == independent_hash_seeds(seed(12, SeedRole.HASH_A), 5, 12, 5)


# ----------------------------------------------------------------------
# Permutations
def test_uniform_permutation_basics():
    assert permutation_uniform(seed(13), 1) == Permutation.identity(1)
    pi = permutation_uniform(seed(14), 50)
    assert pi.compose(invert(pi)) == Permutation.identity(50)
    assert invert(invert(pi)) == pi
    assert pi == permutation_uniform(seed(14), 50)


def test_invert_examples():
    assert invert(Permutation.identity(4)) == Permutation.identity(4)
    assert invert(Permutation([2, 3, 1])) == Permutation([3, 1, 2])


def test_uniform_permutation_chi_square():
    counts = Counter(tuple(permutation_uniform(seed(i), 4).to_list()) for i in range(2400))
    assert len(counts) == 24
    observed = np.array([counts[p] for p in itertools.permutations(range(1, 5))])
    assert stats.chisquare(observed).pvalue > 0.001


@pytest.mark.slow
def test_uniform_permutation_frequencies():
    counts = Counter(tuple(permutation_uniform(seed(i), 4).to_list()) for i in range(40000))
    assert len(counts) == 24
    for p in itertools.permutations(range(1, 5)):
        assert abs(counts[p] / 40000 - 1 / 24) <= 0.01


def test_affine_examples():
    assert affine_permutation(1, 0, 3) == Permutation.identity(8)
    assert affine_permutation(1, 3, 3).forward.tolist() == [v ^ 3 for v in range(8)]
    with pytest.raises(ValueError):
        affine_permutation(0, 1, 3)


def test_affine_family_is_pairwise_independent():
    maps = [affine_permutation(a, b, 3) for a in range(1, 8) for b in range(8)]
    assert len(maps) == 56
    for x1, x2 in itertools.permutations(range(8), 2):
        images = Counter((int(pi.forward[x1]), int(pi.forward[x2])) for pi in maps)
        assert len(images) == 56
        assert set(images.values()) == {1}


def test_affine_power_of_two_only():
    assert permutation_affine(seed(15), 16).size == 16
    with pytest.raises(ValueError):
        permutation_affine(seed(15), 12)


def test_cycle_walk():
    for n in (1, 5, 12, 66, 100):
        pi = permutation_affine_walk(seed(n), n)
        assert sorted(pi.to_list()) == list(range(1, n + 1))
    assert permutation_affine_walk(seed(3), 16) == permutation_affine(seed(3), 16)


def test_permutation_sources():
    assert UniformPermutationSource().draw(seed(16), 10) == permutation_uniform(seed(16), 10)
    assert AffinePermutationSource().draw(seed(16), 10) == permutation_affine_walk(seed(16), 10)
    assert UniformPermutationSource.name == 'uniform' and AffinePermutationSource.name == 'affine'
