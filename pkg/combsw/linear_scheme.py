#!/usr/bin/env python
"""
Deterministic semi-linear scheme: syndrome coding with a linear code that corrects t errors.

Columns of H are reordered once so that the last k_H columns form an invertible minor; in the
reordered coordinates the first n - k_H bits are free variables and the last k_H bits follow from
the syndrome. Alice sends the first split_s free bits of X and H X, Bob sends the remaining free
bits of Y and H Y. Charlie decodes X + Y from H X + H Y and solves for the dependent bits.
"""
import itertools
import logging
import math
import re
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Tuple

import numpy as np

from combsw.bits import BitString, hamming_distance, xor
from combsw.gf_rs import GaloisField
from combsw.protocol import WireFormatError
from combsw.randomness import PRGStream, SeedRole, derive_seed

logger = logging.getLogger(__name__)

CODE_MAGIC = b'SWLC'
MESSAGE_MAGIC = b'SWDM'
CERTIFY_MAX_N = 31


class SyndromeDecodeError(ArithmeticError):
    '''No error pattern of weight <= t_code has the given syndrome.'''


class CodeConstructionError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# GF(2) linear algebra
def gf2_row_reduce(matrix: np.ndarray) -> Tuple[np.ndarray, list]:
    '''Reduced row echelon form over GF(2) and the pivot columns.'''
    a = (np.asarray(matrix, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def gf2_inverse(matrix: np.ndarray) -> np.ndarray:
    n = matrix.shape[0]
    reduced, pivots = gf2_row_reduce(np.concatenate([matrix, np.eye(n, dtype=np.uint8)], axis=1))
    if pivots[:n] != list(range(n)):
        raise CodeConstructionError('Matrix is singular over GF(2).')
    return reduced[:, n:]


# ----------------------------------------------------------------------
# Codes
@dataclass(frozen=True, eq=False)
class LinearCode:
    '''
    Binary linear code given by its k_H x n parity-check matrix `h` (original column order).
    `column_order[p]` is the original column at reordered position p.
    '''
    name: str
    h: np.ndarray
    t_code: int
    column_order: np.ndarray

    @property
    def n(self) -> int:
        return int(self.h.shape[1])

    @property
    def k_h(self) -> int:
        return int(self.h.shape[0])

    @property
    def free(self) -> int:
        return self.n - self.k_h

    @cached_property
    def columns(self) -> np.ndarray:
        '''Column j of H as a k_H-bit integer, row 0 as the MSB.'''
        weights = np.left_shift(1, np.arange(self.k_h - 1, -1, -1, dtype=np.int64))
        return (self.h.astype(np.int64) * weights[:, None]).sum(axis=0)

    @cached_property
    def reordered(self) -> np.ndarray:
        return self.h[:, self.column_order]

    @cached_property
    def dependent_inverse(self) -> np.ndarray:
        return gf2_inverse(self.reordered[:, self.free:])

    @cached_property
    def table(self) -> Dict[int, np.ndarray]:
        '''Syndrome -> error pattern, for all patterns of weight <= t_code.'''
        table, collision = _syndrome_table(self.columns, self.t_code)
        if collision is not None:
            raise CodeConstructionError('{}: patterns {} share a syndrome, distance < {}'
                                        .format(self.name, collision, 2 * self.t_code + 1))
        return table

    def certify(self):
        '''Every set of <= 2 t_code columns is independent (exhaustive; skipped above n = 31).'''
        if self.n <= CERTIFY_MAX_N:
            self.table
        if self.dependent_inverse.shape != (self.k_h, self.k_h):
            raise CodeConstructionError('Dependent minor has the wrong shape.')

    def __repr__(self):
        return 'LinearCode({}, n={}, k_H={}, t={})'.format(self.name, self.n, self.k_h, self.t_code)


def _syndrome_table(columns: np.ndarray, t: int):
    n = columns.size
    table = {}
    for weight in range(t + 1):
        for support in itertools.combinations(range(n), weight):
            syn = 0
            for j in support:
                syn ^= int(columns[j])
            if syn in table:
                return table, (np.flatnonzero(table[syn]).tolist(), list(support))
            pattern = np.zeros(n, dtype=np.uint8)
            pattern[list(support)] = 1
            table[syn] = pattern
    return table, None


def _with_column_order(name: str, h: np.ndarray, t_code: int) -> LinearCode:
    '''Drops dependent rows, puts non-pivot columns first and the pivot columns last.'''
    reduced, pivots = gf2_row_reduce(h)
    if len(pivots) < h.shape[0]:
        _, row_pivots = gf2_row_reduce(h.T)
        h = h[row_pivots]
        reduced, pivots = gf2_row_reduce(h)
    if h.shape[0] > 62:
        raise ValueError('{}: {} parity checks do not fit a 64-bit syndrome'.format(name, h.shape[0]))
    others = [c for c in range(h.shape[1]) if c not in set(pivots)]
    h = np.ascontiguousarray(h, dtype=np.uint8)
    h.setflags(write=False)
    order = np.asarray(others + pivots, dtype=np.int64)
    order.setflags(write=False)
    return LinearCode(name, h, t_code, order)


def hamming_code(r: int) -> LinearCode:
    '''Hamming(2^r - 1, 2^r - 1 - r): column j is the binary expansion of j.'''
    if r < 2:
        raise ValueError('Hamming codes need r >= 2, got {}'.format(r))
    n = (1 << r) - 1
    j = np.arange(1, n + 1)
    h = ((j[None, :] >> np.arange(r - 1, -1, -1)[:, None]) & 1).astype(np.uint8)
    return _with_column_order('hamming({})'.format(r), h, 1)


def bch_code(n: int, t: int) -> LinearCode:
    '''
    Narrow-sense binary BCH code of length n = 2^e - 1 and design distance 2t + 1: rows are the
    bits of a^(ij) for odd i < 2t, reduced to full rank.
    '''
    e = (n + 1).bit_length() - 1
    if n + 1 != 1 << e or e < 3:
        raise ValueError('BCH length must be 2^e - 1 with e >= 3, got {}'.format(n))
    if t < 1 or 2 * t + 1 > n:
        raise ValueError('BCH design distance 2t + 1 = {} does not fit n = {}'.format(2 * t + 1, n))
    gf = GaloisField.get(e)
    shifts = np.arange(e - 1, -1, -1)[:, None]
    rows = []
    for i in range(1, 2 * t, 2):
        values = gf.exp[(np.arange(n) * i) % (gf.order - 1)]
        rows.append((values[None, :] >> shifts) & 1)
    stacked = np.concatenate(rows).astype(np.uint8)
    reduced, pivots = gf2_row_reduce(stacked)
    return _with_column_order('bch({},{})'.format(n, t), reduced[:len(pivots)], t)


def random_gv_code(n: int, k_h: int, t: int, seed, attempts: int = 1000) -> LinearCode:
    '''
    Rejection sampling: uniform k_H x n matrices until one has full rank and distance >= 2t + 1.

    Raises:
        CodeConstructionError: when `attempts` draws all fail
    '''
    if not 0 < k_h < n <= CERTIFY_MAX_N:
        raise ValueError('random_gv needs 0 < k_H < n <= {}, got n={} k_H={}'.format(CERTIFY_MAX_N, n, k_h))
    stream = PRGStream(derive_seed(str(seed).encode('utf-8'), SeedRole.CODE, n, k_h, t))
    for attempt in range(1, attempts + 1):
        h = stream.bits(k_h * n).reshape(k_h, n)
        _, pivots = gf2_row_reduce(h)
        if len(pivots) < k_h:
            continue
        code = _with_column_order('random_gv({},{},{},{})'.format(n, k_h, t, seed), h, t)
        try:
            code.certify()
        except CodeConstructionError:
            continue
        logger.info('random_gv(%d,%d,%d) found after %d attempts', n, k_h, t, attempt)
        return code
    raise CodeConstructionError('No [{}, {}] code with distance >= {} in {} attempts'
                                .format(n, n - k_h, 2 * t + 1, attempts))


_SPEC = re.compile(r'^\s*(hamming|bch|random_gv)\s*\(([^)]*)\)\s*$')


def parse_code_spec(spec: str) -> Tuple[str, Tuple[int, ...]]:
    '''"hamming(3)" -> ("hamming", (3,)); argument counts are 1, 2 and 4.'''
    match = _SPEC.match(spec)
    if not match:
        raise ValueError('Wrong code spec {!r}, expected hamming(r), bch(n,t) or random_gv(n,k_H,t,seed)'.format(spec))
    kind = match.group(1)
    args = tuple(int(a) for a in match.group(2).split(',') if a.strip())
    expected = {'hamming': 1, 'bch': 2, 'random_gv': 4}[kind]
    if len(args) != expected:
        raise ValueError('{} takes {} arguments, got {}'.format(kind, expected, len(args)))
    return kind, args


def build_code(spec: str) -> LinearCode:
    kind, args = parse_code_spec(spec)
    if kind == 'hamming':
        code = hamming_code(*args)
    elif kind == 'bch':
        code = bch_code(*args)
    else:
        code = random_gv_code(*args)
    code.certify()
    return code


# ----------------------------------------------------------------------
# Syndrome coding
def syndrome(code: LinearCode, z: BitString) -> BitString:
    if len(z) != code.n:
        raise ValueError('Syndrome of {} bits with a code of length {}'.format(len(z), code.n))
    value = int(np.bitwise_xor.reduce(code.columns[z.to_numpy().astype(bool)], initial=0))
    return BitString.from_int(value, code.k_h)


def syndrome_decode(code: LinearCode, syn: BitString) -> BitString:
    '''Minimal weight error pattern with syndrome `syn`, within radius t_code.'''
    if len(syn) != code.k_h:
        raise ValueError('Syndrome has {} bits, code has {} checks'.format(len(syn), code.k_h))
    pattern = code.table.get(syn.to_int())
    if pattern is None:
        raise SyndromeDecodeError('Syndrome {} is outside the decoding radius {}'.format(syn, code.t_code))
    return BitString(pattern)


@dataclass(frozen=True)
class DetMessage:
    bits: BitString
    syndrome: BitString

    def __len__(self):
        return len(self.bits) + len(self.syndrome)


def split_point(code: LinearCode, lam) -> int:
    '''split_s = floor(lam (n - k_H)).'''
    lam = Fraction(lam) if not isinstance(lam, float) else Fraction(repr(lam))
    if not 0 <= lam <= 1:
        raise ValueError('lambda must be within [0, 1], got {}'.format(lam))
    return math.floor(lam * code.free)


def _reorder(code: LinearCode, z: BitString) -> np.ndarray:
    if len(z) != code.n:
        raise ValueError('Input has {} bits, code length is {}'.format(len(z), code.n))
    return z.to_numpy()[code.column_order]


def _check_split(code: LinearCode, split_s: int):
    if not 0 <= split_s <= code.free:
        raise ValueError('split_s must be within 0..{}, got {}'.format(code.free, split_s))


def det_encode_alice(x: BitString, code: LinearCode, split_s: int) -> DetMessage:
    _check_split(code, split_s)
    return DetMessage(BitString(_reorder(code, x)[:split_s]), syndrome(code, x))


def det_encode_bob(y: BitString, code: LinearCode, split_s: int) -> DetMessage:
    _check_split(code, split_s)
    return DetMessage(BitString(_reorder(code, y)[split_s:code.free]), syndrome(code, y))


def _solve_dependent(code: LinearCode, free_bits: np.ndarray, syn: BitString) -> BitString:
    a = code.reordered[:, :code.free]
    rhs = syn.to_numpy() ^ (a.astype(np.int64) @ free_bits.astype(np.int64) % 2).astype(np.uint8)
    dependent = (code.dependent_inverse.astype(np.int64) @ rhs.astype(np.int64) % 2).astype(np.uint8)
    reordered = np.concatenate([free_bits, dependent])
    original = np.empty(code.n, dtype=np.uint8)
    original[code.column_order] = reordered
    return BitString(original)


def det_decode(msgs: Tuple[DetMessage, DetMessage], code: LinearCode) -> Tuple[BitString, BitString]:
    '''
    Recovers (X, Y) from Alice's and Bob's messages; split_s is read off the message lengths.

    Raises:
        SyndromeDecodeError: when dist(X, Y) exceeds the code's radius detectably
    '''
    alice, bob = msgs
    split_s = len(alice.bits)
    if split_s + len(bob.bits) != code.free or len(alice.syndrome) != code.k_h or len(bob.syndrome) != code.k_h:
        raise ValueError('Message lengths {} + {} do not match the code ({} free bits, {} checks)'
                         .format(len(alice), len(bob), code.free, code.k_h))
    diff = _reorder(code, syndrome_decode(code, xor(alice.syndrome, bob.syndrome)))[:code.free]
    x_free = np.concatenate([alice.bits.to_numpy(), bob.bits.to_numpy() ^ diff[split_s:]])
    y_free = np.concatenate([alice.bits.to_numpy() ^ diff[:split_s], bob.bits.to_numpy()])
    return _solve_dependent(code, x_free, alice.syndrome), _solve_dependent(code, y_free, bob.syndrome)


def self_test(code: LinearCode, lam, progress=None) -> Tuple[int, int]:
    '''
    Runs every X with every Y at distance <= t_code through the scheme; returns (ok, total).
    Exponential in n, meant for small codes.
    '''
    split_s = split_point(code, lam)
    patterns = list(code.table.values())
    ok = total = 0
    xs = range(1 << code.n)
    for value in (progress(xs) if progress else xs):
        x = BitString.from_int(value, code.n)
        for pattern in patterns:
            y = xor(x, BitString(pattern))
            got = det_decode((det_encode_alice(x, code, split_s), det_encode_bob(y, code, split_s)), code)
            total += 1
            ok += got == (x, y) and hamming_distance(*got) == int(pattern.sum())
    return ok, total


# ----------------------------------------------------------------------
# Files
def serialize_code(code: LinearCode) -> bytes:
    head = CODE_MAGIC + struct.pack('>HHB', code.n, code.k_h, code.t_code)
    bits = BitString(code.h.reshape(-1)).to_bytes()
    order = struct.pack('>{}H'.format(code.n), *code.column_order.tolist())
    return head + bits + order


def deserialize_code(data: bytes, name: str = 'file') -> LinearCode:
    if data[:4] != CODE_MAGIC or len(data) < 9:
        raise ValueError('Not a code file (magic {!r})'.format(data[:4]))
    n, k_h, t = struct.unpack_from('>HHB', data, 4)
    n_bytes = (n * k_h + 7) // 8
    if len(data) != 9 + n_bytes + 2 * n:
        raise ValueError('Code file has {} bytes, expected {}'.format(len(data), 9 + n_bytes + 2 * n))
    h = BitString.from_bytes(data[9:9 + n_bytes], n * k_h).to_numpy().reshape(k_h, n).copy()
    order = np.asarray(struct.unpack_from('>{}H'.format(n), data, 9 + n_bytes), dtype=np.int64)
    if sorted(order.tolist()) != list(range(n)):
        raise ValueError('Column order is not a permutation of 0..{}'.format(n - 1))
    h.setflags(write=False)
    order.setflags(write=False)
    code = LinearCode(name, h, t, order)
    code.certify()
    return code


def serialize_message(msg: DetMessage) -> bytes:
    return MESSAGE_MAGIC + msg.bits.to_raw() + msg.syndrome.to_raw()


def deserialize_message(data: bytes) -> DetMessage:
    if len(data) < 20 or data[:4] != MESSAGE_MAGIC:
        raise WireFormatError('Not a deterministic-scheme message ({} bytes, magic {!r})'.format(len(data), data[:4]))
    length, = struct.unpack_from('>Q', data, 4)
    split = 12 + (length + 7) // 8
    if len(data) < split + 8:
        raise WireFormatError('Message truncated inside its {}-bit payload'.format(length))
    syndrome_length, = struct.unpack_from('>Q', data, split)
    expected = split + 8 + (syndrome_length + 7) // 8
    if len(data) != expected:
        raise WireFormatError('Message has {} bytes, its length fields need {}'.format(len(data), expected))
    return DetMessage(BitString.from_raw(data[4:split]), BitString.from_raw(data[split:]))
