#!/usr/bin/env python
"""
Bit strings, index sets and permutations over {1, ..., n}.

Positions are 1-based in the public API, the arrays underneath are 0-based.
"""
import struct
from typing import Iterable, List, Sequence, Tuple

import numpy as np


class BitString(object):
    '''
    Immutable fixed-length sequence of bits.

    The bits are stored unpacked (one uint8 per bit) in a read-only numpy array. The packed form
    is MSB-first with the final byte zero padded, so two equal strings always serialize the same way.
    '''

    __slots__ = ('_bits',)

    def __init__(self, bits: np.ndarray):
        arr = np.ascontiguousarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError('BitString needs a 1d array, got shape {}'.format(arr.shape))
        if arr.size and arr.max() > 1:
            raise ValueError('BitString values must be 0 or 1.')
        arr = arr.copy()
        arr.setflags(write=False)
        self._bits = arr

    # ------------------------------------------------------------------
    # Constructors
    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> 'BitString':
        return cls(np.fromiter((int(b) for b in bits), dtype=np.uint8))

    @classmethod
    def from_str(cls, text: str) -> 'BitString':
        text = ''.join(text.split())
        if any(c not in '01' for c in text):
            raise ValueError('Bit string text must contain only 0/1, got {!r}'.format(text[:20]))
        return cls(np.frombuffer(text.encode('ascii'), dtype=np.uint8) - ord('0'))

    @classmethod
    def zeros(cls, length: int) -> 'BitString':
        return cls(np.zeros(length, dtype=np.uint8))

    @classmethod
    def from_int(cls, value: int, length: int) -> 'BitString':
        if value < 0 or value >> length:
            raise ValueError('{} does not fit in {} bits'.format(value, length))
        return cls(np.array([(value >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8))

    @classmethod
    def from_bytes(cls, data: bytes, length: int) -> 'BitString':
        if len(data) != (length + 7) // 8:
            raise ValueError('Expected {} bytes for {} bits, got {}'.format((length + 7) // 8, length, len(data)))
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if bits[length:].any():
            raise ValueError('Padding bits must be zero.')
        return cls(bits[:length])

    @classmethod
    def from_hex(cls, text: str, length: int = None) -> 'BitString':
        data = bytes.fromhex(''.join(text.split()))
        return cls.from_bytes(data, len(data) * 8 if length is None else length)

    @classmethod
    def from_raw(cls, data: bytes) -> 'BitString':
        '''Reads the raw format: 64-bit big-endian length in bits followed by the packed bits.'''
        if len(data) < 8:
            raise ValueError('Raw bit string is missing its length prefix.')
        length, = struct.unpack('>Q', data[:8])
        return cls.from_bytes(data[8:], length)

    # ------------------------------------------------------------------
    # Exporters
    def to_bytes(self) -> bytes:
        return np.packbits(self._bits).tobytes()

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def to_raw(self) -> bytes:
        return struct.pack('>Q', len(self)) + self.to_bytes()

    def to_int(self) -> int:
        value = 0
        for b in self._bits.tolist():
            value = (value << 1) | b
        return value

    def to_numpy(self) -> np.ndarray:
        return self._bits

    # ------------------------------------------------------------------
    def bit(self, i: int) -> int:
        '''Returns bit i, 1 <= i <= len.'''
        if not 1 <= i <= len(self):
            raise IndexError('Bit index {} outside 1..{}'.format(i, len(self)))
        return int(self._bits[i - 1])

    def concat(self, *others: 'BitString') -> 'BitString':
        return BitString(np.concatenate([self._bits] + [o._bits for o in others]))

    def pad_to(self, length: int) -> 'BitString':
        if length < len(self):
            raise ValueError('Cannot pad {} bits down to {}'.format(len(self), length))
        return BitString(np.concatenate([self._bits, np.zeros(length - len(self), dtype=np.uint8)]))

    def truncate(self, length: int) -> 'BitString':
        if length > len(self):
            raise ValueError('Cannot truncate {} bits up to {}'.format(len(self), length))
        return BitString(self._bits[:length])

    def __len__(self):
        return int(self._bits.size)

    def __iter__(self):
        return iter(self._bits.tolist())

    def __eq__(self, other):
        if not isinstance(other, BitString):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self):
        return hash((len(self), self.to_bytes()))

    def __str__(self):
        return (self._bits + ord('0')).tobytes().decode('ascii')

    def __repr__(self):
        text = str(self)
        if len(text) > 64:
            text = text[:61] + '...'
        return '{}({!r}, len={})'.format(self.__class__.__name__, text, len(self))


def concat(parts: Sequence[BitString]) -> BitString:
    if not parts:
        return BitString.zeros(0)
    return parts[0].concat(*parts[1:])


class IndexSet(object):
    '''
    Strictly increasing set of positions within 1..n.
    '''

    __slots__ = ('indices', 'n')

    def __init__(self, indices: Iterable[int], n: int):
        arr = np.asarray(list(indices), dtype=np.int64)
        if arr.size:
            if arr[0] < 1 or arr[-1] > n:
                raise ValueError('Indices must lie within 1..{}'.format(n))
            if np.any(np.diff(arr) <= 0):
                raise ValueError('Indices must be strictly increasing.')
        arr.setflags(write=False)
        self.indices = arr
        self.n = n

    @classmethod
    def from_unsorted(cls, indices: Iterable[int], n: int) -> 'IndexSet':
        return cls(sorted(set(int(i) for i in indices)), n)

    @classmethod
    def interval(cls, j: int, k: int, n: int) -> 'IndexSet':
        '''Int_j = {(j-1)k+1, ..., jk}.'''
        return cls(range((j - 1) * k + 1, j * k + 1), n)

    def split_by_blocks(self, k: int) -> List['IndexSet']:
        '''
        Splits the set into the m = n/k intervals and returns, for every block, the positions
        in local coordinates 1..k.
        '''
        if self.n % k:
            raise ValueError('Block length {} does not divide {}'.format(k, self.n))
        m = self.n // k
        zero_based = self.indices - 1
        block_of = zero_based // k
        bounds = np.searchsorted(block_of, np.arange(m + 1))
        return [IndexSet(zero_based[bounds[j]:bounds[j + 1]] - j * k + 1, k) for j in range(m)]

    def complement(self) -> 'IndexSet':
        mask = np.ones(self.n, dtype=bool)
        mask[self.indices - 1] = False
        return IndexSet(np.flatnonzero(mask) + 1, self.n)

    def __len__(self):
        return int(self.indices.size)

    def __iter__(self):
        return iter(self.indices.tolist())

    def __eq__(self, other):
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.indices, other.indices))

    def __repr__(self):
        return 'IndexSet({}, n={})'.format(self.indices.tolist(), self.n)


class Permutation(object):
    '''
    Bijection of {1, ..., n}. `forward[j-1] = pi(j)` (stored 0-based).
    '''

    __slots__ = ('forward',)

    def __init__(self, forward: Sequence[int], one_based: bool = True):
        arr = np.asarray(forward, dtype=np.int64)
        if one_based:
            arr = arr - 1
        n = arr.size
        if n and (arr.min() < 0 or arr.max() >= n or np.unique(arr).size != n):
            raise ValueError('Not a permutation of 1..{}'.format(n))
        arr.setflags(write=False)
        self.forward = arr

    @classmethod
    def identity(cls, n: int) -> 'Permutation':
        return cls(np.arange(n), one_based=False)

    @property
    def size(self) -> int:
        return int(self.forward.size)

    def __call__(self, i: int) -> int:
        return int(self.forward[i - 1]) + 1

    def inverse(self) -> 'Permutation':
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.size)
        return Permutation(inv, one_based=False)

    def compose(self, other: 'Permutation') -> 'Permutation':
        '''(self o other)(j) = self(other(j)).'''
        if self.size != other.size:
            raise ValueError('Permutation sizes differ: {} vs {}'.format(self.size, other.size))
        return Permutation(self.forward[other.forward], one_based=False)

    def to_list(self) -> List[int]:
        return (self.forward + 1).tolist()

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return bool(np.array_equal(self.forward, other.forward))

    def __hash__(self):
        return hash(self.forward.tobytes())

    def __repr__(self):
        return 'Permutation({})'.format(self.to_list() if self.size <= 16 else '<{} points>'.format(self.size))


# ----------------------------------------------------------------------
# Hamming space operations
def weight(x: BitString) -> int:
    return int(np.count_nonzero(x.to_numpy()))


def xor(x: BitString, y: BitString) -> BitString:
    if len(x) != len(y):
        raise ValueError('xor of bit strings with lengths {} and {}'.format(len(x), len(y)))
    return BitString(np.bitwise_xor(x.to_numpy(), y.to_numpy()))


def hamming_distance(x: BitString, y: BitString) -> int:
    if len(x) != len(y):
        raise ValueError('Hamming distance of bit strings with lengths {} and {}'.format(len(x), len(y)))
    return int(np.count_nonzero(x.to_numpy() != y.to_numpy()))


def extract(x: BitString, index_set: IndexSet) -> BitString:
    '''X_I: the bits of x at the positions of I, in increasing index order.'''
    if len(index_set) and index_set.indices[-1] > len(x):
        raise ValueError('Index {} outside 1..{}'.format(int(index_set.indices[-1]), len(x)))
    return BitString(x.to_numpy()[index_set.indices - 1])


def split_blocks(x: BitString, k: int) -> List[BitString]:
    if k <= 0 or len(x) % k:
        raise ValueError('Block length {} does not divide {}'.format(k, len(x)))
    return [BitString(row) for row in x.to_numpy().reshape(-1, k)]


def blocks_to_ints(x: BitString, k: int) -> np.ndarray:
    '''Splits into k-bit blocks and reads each block as an MSB-first integer.'''
    if k <= 0 or len(x) % k:
        raise ValueError('Block length {} does not divide {}'.format(k, len(x)))
    weights = np.left_shift(np.uint64(1), np.arange(k - 1, -1, -1, dtype=np.uint64))
    return (x.to_numpy().reshape(-1, k).astype(np.uint64) * weights).sum(axis=1).astype(np.int64)


def ints_to_blocks(values: Sequence[int], k: int) -> BitString:
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    return BitString(((values[:, None] >> shifts[None, :]) & 1).reshape(-1))


def apply_permutation(x: BitString, pi: Permutation) -> BitString:
    '''Output bit j is input bit pi(j).'''
    if pi.size != len(x):
        raise ValueError('Permutation of size {} applied to {} bits'.format(pi.size, len(x)))
    return BitString(x.to_numpy()[pi.forward])


def sample_correlated_pair(n: int, alpha: float, rng) -> Tuple[BitString, BitString]:
    '''
    Draws X uniformly and flips exactly d bits of it, d uniform in 0..floor(alpha*n).

    Args:
        n: length of both strings
        alpha: distance fraction, 0 <= alpha <= 1
        rng: a randomness.PRGStream
    '''
    if not 0 <= alpha <= 1:
        raise ValueError('alpha must be within [0, 1], got {}'.format(alpha))
    x = rng.bits(n)
    max_flips = int(np.floor(float(alpha) * n + 1e-9))
    d = rng.randbelow(max_flips + 1)
    # partial Fisher-Yates: the first d entries are a uniform d-subset
    positions = np.arange(n)
    for i in range(d):
        j = i + rng.randbelow(n - i)
        positions[i], positions[j] = positions[j], positions[i]
    y = x.copy()
    y[positions[:d]] ^= 1
    return BitString(x), BitString(y)
