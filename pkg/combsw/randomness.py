#!/usr/bin/env python
"""
Seeded randomness for the protocol: PRG streams, Toeplitz hashing, hash-index generators and
permutation sources.

Every generator is a deterministic function of (seed, parameters). The PRG is numpy's
Philox4x64-10 counter-mode generator keyed by BLAKE2b(role tag || seed bytes); only its raw
64-bit words are consumed, and they are turned into bits big-endian, so streams replay
bit-exactly across platforms.
"""
import enum
import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List

import numpy as np

from combsw.bits import BitString, Permutation
from combsw.gf_rs import GaloisField


class SeedRole(enum.IntEnum):
    PERM_I = 1
    PERM_A = 2
    PERM_B = 3
    HASH_A = 4
    HASH_B = 5
    INPUT = 6
    TRIAL = 7
    CODE = 8


@dataclass(frozen=True)
class Seed:
    role: SeedRole
    data: bytes

    def to_bytes(self) -> bytes:
        return bytes([int(self.role)]) + self.data

    @classmethod
    def from_bytes(cls, raw: bytes) -> 'Seed':
        if not raw:
            raise ValueError('Empty seed.')
        return cls(SeedRole(raw[0]), bytes(raw[1:]))

    def __repr__(self):
        return 'Seed({}, {})'.format(self.role.name, self.data.hex())


def derive_seed(master: bytes, role: SeedRole, *labels, size: int = 16) -> Seed:
    '''Domain separated sub-seed of `master` for `role`, e.g. derive_seed(master, SeedRole.TRIAL, 17).'''
    h = hashlib.blake2b(digest_size=size)
    h.update(bytes([int(role)]))
    h.update(len(master).to_bytes(4, 'big'))
    h.update(master)
    for label in labels:
        text = str(label).encode('utf-8')
        h.update(len(text).to_bytes(4, 'big'))
        h.update(text)
    return Seed(role, h.digest())


class PRGStream(object):
    '''
    Deterministic, single-consumer stream of pseudo-random words expanded from a Seed.
    '''

    BUFFER = 256

    def __init__(self, seed: Seed):
        digest = hashlib.blake2b(seed.to_bytes(), digest_size=16).digest()
        self.seed = seed
        self._bitgen = np.random.Philox(key=int.from_bytes(digest, 'big'))
        self._buffer = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def words(self, count: int) -> np.ndarray:
        '''Next `count` raw 64-bit words.'''
        out = np.empty(count, dtype=np.uint64)
        available = self._buffer.size - self._pos
        take = min(available, count)
        out[:take] = self._buffer[self._pos:self._pos + take]
        self._pos += take
        if take < count:
            out[take:] = self._bitgen.random_raw(count - take)
        return out

    def next_word(self) -> int:
        if self._pos == self._buffer.size:
            self._buffer = self._bitgen.random_raw(self.BUFFER)
            self._pos = 0
        self._pos += 1
        return int(self._buffer[self._pos - 1])

    def bits(self, n: int) -> np.ndarray:
        if n == 0:
            return np.zeros(0, dtype=np.uint8)
        raw = self.words((n + 63) // 64).astype('>u8').view(np.uint8)
        return np.unpackbits(raw)[:n]

    def bytes(self, n: int) -> bytes:
        return self.words((n + 7) // 8).astype('>u8').tobytes()[:n]

    def fork(self, role: SeedRole, label) -> 'PRGStream':
        '''Independent child stream; does not advance this one.'''
        return PRGStream(derive_seed(self.seed.to_bytes(), role, label))

    def randbelow(self, bound: int) -> int:
        '''Uniform integer in [0, bound), by rejection on masked words.'''
        if bound < 1 or bound > 1 << 64:
            raise ValueError('randbelow bound {} outside 1..2^64'.format(bound))
        if bound == 1:
            return 0
        mask = (1 << (bound - 1).bit_length()) - 1
        while True:
            v = self.next_word() & mask
            if v < bound:
                return v


# ----------------------------------------------------------------------
# Universal hashing
def _parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


@dataclass(frozen=True)
class ToeplitzHashSeed:
    '''
    Member of the Toeplitz family x -> T x + offset over GF(2), T of shape tau x n_in.

    T[i][j] = diagonals[i - j + n_in - 1] (0-based), so the seed has n_in + 2 tau - 1 bits.
    '''
    n_in: int
    tau: int
    diagonals: BitString
    offset: BitString

    def __post_init__(self):
        if not 0 < self.tau <= self.n_in:
            raise ValueError('Digest length {} outside 1..{}'.format(self.tau, self.n_in))
        if len(self.diagonals) != self.n_in + self.tau - 1 or len(self.offset) != self.tau:
            raise ValueError('Toeplitz seed needs {} diagonal bits and {} offset bits, got {} and {}'
                             .format(self.n_in + self.tau - 1, self.tau, len(self.diagonals), len(self.offset)))

    @classmethod
    def random(cls, stream: PRGStream, n_in: int, tau: int) -> 'ToeplitzHashSeed':
        if tau == n_in:
            # full-length digests: use the identity matrix, a bijection
            diagonals = np.zeros(n_in + tau - 1, dtype=np.uint8)
            diagonals[n_in - 1] = 1
        else:
            diagonals = stream.bits(n_in + tau - 1)
        return cls(n_in, tau, BitString(diagonals), BitString(stream.bits(tau)))

    @cached_property
    def row_masks(self) -> np.ndarray:
        '''Row i of T as an n_in-bit integer, column j at bit n_in-1-j.'''
        d = self.diagonals.to_numpy()
        masks = np.zeros(self.tau, dtype=np.int64)
        for i in range(self.tau):
            row = d[i:i + self.n_in][::-1]     # row[j] = d[i - j + n_in - 1]
            masks[i] = int(''.join(str(b) for b in row.tolist()), 2)
        return masks

    @cached_property
    def offset_int(self) -> int:
        return self.offset.to_int()

    def hash_ints(self, values) -> np.ndarray:
        '''Digests of n_in-bit integers (MSB-first blocks), vectorised.'''
        values = np.asarray(values, dtype=np.int64)
        digest = np.zeros(values.shape, dtype=np.int64)
        for mask in self.row_masks:
            digest = (digest << 1) | _parity(values & mask)
        return digest ^ self.offset_int


def hash_eval(seed: ToeplitzHashSeed, x: BitString, tau: int) -> BitString:
    if len(x) != seed.n_in or tau != seed.tau:
        raise ValueError('Hash of shape {}x{} applied to {} bits with tau={}'
                         .format(seed.tau, seed.n_in, len(x), tau))
    return BitString.from_int(int(seed.hash_ints([x.to_int()])[0]), tau)


@dataclass(frozen=True)
class HashIndex:
    value: int
    seed: ToeplitzHashSeed


def _expand_hash_index(role: SeedRole, value: int, w: int, n_in: int, tau: int) -> ToeplitzHashSeed:
    key = Seed(role, b'hash-index' + bytes([w]) + value.to_bytes(4, 'big'))
    return ToeplitzHashSeed.random(PRGStream(key), n_in, tau)


def draw_hash_indices(seed: Seed, m: int, t: int, w: int, n_in: int, tau: int) -> List[HashIndex]:
    '''
    Hash indices for m blocks from a random polynomial of degree < t over GF(2^w), evaluated at the
    field elements 0..m-1; any t of the m indices are jointly uniform.

    Each index value is expanded into a full Toeplitz seed by a PRG keyed with (role, value).
    '''
    if t < 1:
        raise ValueError('Independence parameter t must be >= 1, got {}'.format(t))
    if m > 1 << w:
        raise ValueError('{} evaluation points do not fit in GF(2^{})'.format(m, w))
    gf = GaloisField.get(w)
    stream = PRGStream(seed)
    coefs = [stream.randbelow(gf.order) for _ in range(t)]
    values = gf.poly_eval(coefs, np.arange(m)).tolist()
    expanded: Dict[int, ToeplitzHashSeed] = {}
    indices = []
    for v in values:
        if v not in expanded:
            expanded[v] = _expand_hash_index(seed.role, v, w, n_in, tau)
        indices.append(HashIndex(v, expanded[v]))
    return indices


def independent_hash_seeds(seed: Seed, m: int, n_in: int, tau: int) -> List[ToeplitzHashSeed]:
    '''m independent uniform members of the Toeplitz family.'''
    stream = PRGStream(seed)
    return [ToeplitzHashSeed.random(stream, n_in, tau) for _ in range(m)]


# ----------------------------------------------------------------------
# Permutations
def permutation_uniform(seed: Seed, n: int) -> Permutation:
    '''Fisher-Yates shuffle driven by the seed's PRG stream.'''
    if n < 1:
        raise ValueError('Permutation size must be >= 1, got {}'.format(n))
    stream = PRGStream(seed)
    arr = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = stream.randbelow(i + 1)
        arr[i], arr[j] = arr[j], arr[i]
    return Permutation(arr, one_based=False)


def affine_permutation(a: int, b: int, e: int) -> Permutation:
    '''x -> a x + b over GF(2^e) on 0..2^e-1, shifted to 1..2^e.'''
    if e == 0:
        return Permutation.identity(1)
    gf = GaloisField.get(e)
    if not 0 < a < gf.order or not 0 <= b < gf.order:
        raise ValueError('Affine map needs a != 0 and a, b in GF(2^{})'.format(e))
    return Permutation(gf.mul_arrays(np.arange(gf.order), a) ^ b, one_based=False)


def _draw_affine(stream: PRGStream, e: int):
    order = 1 << e
    return 1 + stream.randbelow(order - 1), stream.randbelow(order)


def permutation_affine(seed: Seed, n: int) -> Permutation:
    '''Random affine map over GF(2^e), n = 2^e; pairwise independent.'''
    if n < 1 or n & (n - 1):
        raise ValueError('Affine permutations need n to be a power of two, got {}'.format(n))
    e = n.bit_length() - 1
    if e == 0:
        return Permutation.identity(1)
    a, b = _draw_affine(PRGStream(seed), e)
    return affine_permutation(a, b, e)


def permutation_affine_walk(seed: Seed, n: int) -> Permutation:
    '''
    Affine permutation restricted to 0..n-1 by cycle walking inside the smallest GF(2^e) with 2^e >= n.
    Exactly the affine family when n is a power of two.
    '''
    if n < 1:
        raise ValueError('Permutation size must be >= 1, got {}'.format(n))
    e = max(1, (n - 1).bit_length())
    gf = GaloisField.get(e)
    a, b = _draw_affine(PRGStream(seed), e)
    y = gf.mul_arrays(np.arange(n), a) ^ b
    outside = y >= n
    while outside.any():
        y[outside] = gf.mul_arrays(y[outside], a) ^ b
        outside = y >= n
    return Permutation(y, one_based=False)


def invert(pi: Permutation) -> Permutation:
    return pi.inverse()


class PermutationSource(ABC):
    '''Maps a seed to a permutation of 1..n. A KNR-style source would subclass this.'''

    name = 'abstract'

    @abstractmethod
    def draw(self, seed: Seed, n: int) -> Permutation:
        pass

    def __repr__(self):
        return '{}()'.format(self.__class__.__name__)


class UniformPermutationSource(PermutationSource):
    name = 'uniform'

    def draw(self, seed: Seed, n: int) -> Permutation:
        return permutation_uniform(seed, n)


class AffinePermutationSource(PermutationSource):
    name = 'affine'

    def draw(self, seed: Seed, n: int) -> Permutation:
        return permutation_affine_walk(seed, n)
