#!/usr/bin/env python
"""
GF(2^w) arithmetic and a systematic Reed-Solomon checksum codec.

The m data blocks are the values of a polynomial P of degree < m at the points 1..m; the
2s+1 checksums are P(m+1), ..., P(m+2s+1). Points are field elements in integer order.
Checksums are trusted at decode time, only data blocks are assumed corrupted.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

FieldElement = int

# Irreducible moduli, pinned per width (bit i = coefficient of x^i).
MODULI = {
    1: 0b11,                  # x + 1
    2: 0b111,                 # x^2 + x + 1
    3: 0b1011,                # x^3 + x + 1
    4: 0b10011,               # x^4 + x + 1
    5: 0b100101,              # x^5 + x^2 + 1
    6: 0b1000011,             # x^6 + x + 1
    7: 0b10000011,            # x^7 + x + 1
    8: 0b100011011,           # x^8 + x^4 + x^3 + x + 1
    9: 0x211,                 # x^9 + x^4 + 1
    10: 0x409,                # x^10 + x^3 + 1
    11: 0x805,                # x^11 + x^2 + 1
    12: 0x1053,               # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,               # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,               # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,               # x^15 + x + 1
    16: 0x1100B,              # x^16 + x^12 + x^3 + x + 1
}


class ReedSolomonError(ArithmeticError):
    '''No codeword within the correction radius agrees with the received blocks and checksums.'''


def _clmul_mod(a: int, b: int, modulus: int, w: int) -> int:
    # shift-and-add multiplication, reducing as we go
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> w:
            a ^= modulus
    return result


class GaloisField(object):
    '''
    GF(2^w) with exp/log tables.

    Use `GaloisField.get(w)` to share one instance (and its tables) per width.
    '''

    def __init__(self, w: int):
        if w not in MODULI:
            raise ValueError('Unsupported field width {}, expected one of {}'.format(w, sorted(MODULI)))
        self.w = w
        self.modulus = MODULI[w]
        self.order = 1 << w
        self.generator, powers = self._find_generator()

        q1 = self.order - 1
        self.exp = np.zeros(2 * q1, dtype=np.int64)
        self.exp[:q1] = powers
        self.exp[q1:] = powers
        self.log = np.zeros(self.order, dtype=np.int64)  # log[0] is a placeholder, callers mask zeros
        self.log[powers] = np.arange(q1)

    def _find_generator(self) -> Tuple[int, np.ndarray]:
        q1 = self.order - 1
        for g in range(1, self.order):
            powers = [1]
            x = g
            while x != 1:
                powers.append(x)
                x = _clmul_mod(x, g, self.modulus, self.w)
                if len(powers) > q1:
                    break
            if len(powers) == q1:
                return g, np.array(powers, dtype=np.int64)
        raise ValueError('Modulus {:#x} is not irreducible'.format(self.modulus))

    @staticmethod
    @lru_cache(maxsize=None)
    def get(w: int) -> 'GaloisField':
        return GaloisField(w)

    def _check(self, a: int):
        if not 0 <= a < self.order:
            raise ValueError('{} is not an element of GF(2^{})'.format(a, self.w))

    # Scalar arithmetic
    def add(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return a ^ b

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        self._check(a)
        self._check(b)
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: FieldElement) -> FieldElement:
        self._check(a)
        if a == 0:
            raise ZeroDivisionError('0 has no inverse in GF(2^{})'.format(self.w))
        return int(self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)])

    def div(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.mul(a, self.inv(b))

    def pow(self, a: FieldElement, e: int) -> FieldElement:
        self._check(a)
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp[(self.log[a] * e) % (self.order - 1)])

    # Vectorised arithmetic
    def mul_arrays(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_arrays(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError('0 has no inverse in GF(2^{})'.format(self.w))
        return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]

    def pow_arrays(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        out = self.exp[(self.log[a] * e) % (self.order - 1)]
        return np.where(a == 0, 0, out)

    def poly_eval(self, coefs, points) -> np.ndarray:
        '''Horner evaluation; coefs are low degree first.'''
        points = np.asarray(points, dtype=np.int64)
        acc = np.zeros_like(points)
        for c in reversed(list(coefs)):
            acc = self.mul_arrays(acc, points) ^ int(c)
        return acc

    def __repr__(self):
        return 'GF(2^{}) mod {:#x}'.format(self.w, self.modulus)


def gf_mul(a: FieldElement, b: FieldElement, w: int) -> FieldElement:
    return GaloisField.get(w).mul(a, b)


@dataclass(frozen=True)
class RSParams:
    m: int          # data blocks
    s: int          # correctable blocks
    w: int          # symbol width in bits

    @property
    def num_checksums(self) -> int:
        return 2 * self.s + 1

    def validate(self):
        if self.m < 1 or self.s < 0:
            raise ValueError('Need m >= 1 and s >= 0, got m={} s={}'.format(self.m, self.s))
        if self.w not in MODULI:
            raise ValueError('Unsupported symbol width {}'.format(self.w))
        if self.m + 2 * self.s + 1 >= (1 << self.w):
            raise ValueError('m + 2s + 1 = {} distinct nonzero points do not fit in GF(2^{})'
                             .format(self.m + 2 * self.s + 1, self.w))


@lru_cache(maxsize=32)
def _checksum_matrix(m: int, s: int, w: int) -> np.ndarray:
    '''
    Lagrange weights C with checksum_l = sum_i C[l, i] * block_i.

    Computed in the log domain: C[l, i] = prod_j (x_l + q_j) / ((x_l + q_i) * prod_{j != i} (q_i + q_j)).
    '''
    gf = GaloisField.get(w)
    q1 = gf.order - 1
    data_pts = np.arange(1, m + 1, dtype=np.int64)
    check_pts = np.arange(m + 1, m + 2 * s + 2, dtype=np.int64)

    logs_xq = gf.log[check_pts[:, None] ^ data_pts[None, :]]
    # the diagonal is q_i + q_i = 0 and log[0] = 0, so it drops out of the sum
    logs_qq = gf.log[data_pts[:, None] ^ data_pts[None, :]]
    num = logs_xq.sum(axis=1)
    den = logs_qq.sum(axis=1)
    log_c = (num[:, None] - logs_xq - den[None, :]) % q1
    matrix = gf.exp[log_c]
    matrix.setflags(write=False)
    return matrix


def _as_symbols(values: Sequence[int], w: int, name: str) -> np.ndarray:
    arr = np.asarray(list(values), dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= (1 << w)):
        raise ValueError('{} contain values outside GF(2^{})'.format(name, w))
    return arr


def rs_checksums(blocks: Sequence[FieldElement], p: RSParams) -> List[FieldElement]:
    p.validate()
    data = _as_symbols(blocks, p.w, 'Blocks')
    if data.size != p.m:
        raise ValueError('Expected {} blocks, got {}'.format(p.m, data.size))
    gf = GaloisField.get(p.w)
    products = gf.mul_arrays(_checksum_matrix(p.m, p.s, p.w), data[None, :])
    return np.bitwise_xor.reduce(products, axis=1).tolist()


def _gf_solve(gf: GaloisField, a: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    '''
    Gauss-Jordan elimination over GF(2^w). Returns one solution of a x = b (free variables
    set to zero) or None when the system is inconsistent.
    '''
    rows, cols = a.shape
    aug = np.concatenate([a, b[:, None]], axis=1).astype(np.int64)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(aug[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        aug[r] = gf.mul_arrays(aug[r], gf.inv(int(aug[r, c])))
        others = np.flatnonzero(aug[:, c])
        others = others[others != r]
        if others.size:
            aug[others] ^= gf.mul_arrays(aug[others, c][:, None], aug[r][None, :])
        pivots.append(c)
        r += 1
    if np.any(aug[r:, cols] != 0):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = aug[i, cols]
    return x


def _poly_divmod(gf: GaloisField, num: np.ndarray, den: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    '''Polynomial division, coefficients low degree first; den must have a nonzero leading coefficient.'''
    num = np.array(num, dtype=np.int64)
    d = len(den) - 1
    if len(num) - 1 < d:
        return np.zeros(1, dtype=np.int64), num
    lead_inv = gf.inv(int(den[-1]))
    quot = np.zeros(len(num) - d, dtype=np.int64)
    for i in range(len(num) - 1, d - 1, -1):
        coef = gf.mul(int(num[i]), lead_inv)
        if coef:
            quot[i - d] = coef
            num[i - d:i + 1] ^= gf.mul_arrays(den, coef)
    return quot, num[:d] if d else np.zeros(1, dtype=np.int64)


@lru_cache(maxsize=32)
def _dual_multipliers(m: int, s: int, w: int) -> np.ndarray:
    '''u_i = 1 / prod_{j != i} (x_i + x_j) over all m+2s+1 points.'''
    gf = GaloisField.get(w)
    points = np.arange(1, m + 2 * s + 2, dtype=np.int64)
    log_u = -gf.log[points[:, None] ^ points[None, :]].sum(axis=1) % (gf.order - 1)
    u = gf.exp[log_u]
    u.setflags(write=False)
    return u


def _berlekamp_massey(gf: GaloisField, syndromes: Sequence[int]) -> List[int]:
    '''Shortest connection polynomial (low degree first, constant term 1) generating the sequence.'''
    c, b = [1], [1]
    length, shift, last = 0, 1, 1
    for i, s_i in enumerate(syndromes):
        d = int(s_i)
        for j in range(1, length + 1):
            if j < len(c):
                d ^= gf.mul(c[j], int(syndromes[i - j]))
        if d == 0:
            shift += 1
            continue
        coef = gf.div(d, last)
        update = [0] * shift + [gf.mul(coef, x) for x in b]
        previous = list(c)
        c = c + [0] * max(0, len(update) - len(c))
        for j, x in enumerate(update):
            c[j] ^= x
        if 2 * length <= i:
            length = i + 1 - length
            b, last, shift = previous, d, 1
        else:
            shift += 1
    return c[:length + 1] + [0] * max(0, length + 1 - len(c))


def _correct_syndrome(gf: GaloisField, data: np.ndarray, checks: np.ndarray, p: RSParams) -> np.ndarray:
    m, s = p.m, p.s
    points = np.arange(1, m + 2 * s + 2, dtype=np.int64)
    weighted = gf.mul_arrays(_dual_multipliers(m, s, p.w), np.concatenate([data, checks]))
    # S_l = sum_i u_i r_i x_i^l vanishes on codewords for l = 0..2s
    syndromes = []
    for _ in range(2 * s + 1):
        syndromes.append(int(np.bitwise_xor.reduce(weighted)))
        weighted = gf.mul_arrays(weighted, points)

    locator = _berlekamp_massey(gf, syndromes)
    n_errors = len(locator) - 1
    if n_errors == 0 or n_errors > s:
        raise ReedSolomonError('Error locator of degree {} exceeds s = {}.'.format(n_errors, s))
    # errors only hit data positions, so the roots are searched among 1/x_1 .. 1/x_m
    data_points = points[:m]
    roots = np.flatnonzero(gf.poly_eval(locator, gf.inv_arrays(data_points)) == 0)
    if roots.size != n_errors:
        raise ReedSolomonError('Error locator has {} roots among the data points, expected {}.'
                               .format(roots.size, n_errors))

    located = data_points[roots]
    vandermonde = np.stack([gf.pow_arrays(located, l) for l in range(n_errors)], axis=0)
    scaled = _gf_solve(gf, vandermonde, np.asarray(syndromes[:n_errors], dtype=np.int64))
    if scaled is None:
        raise ReedSolomonError('Error values are inconsistent with the syndromes.')
    errors = gf.mul_arrays(scaled, gf.inv_arrays(_dual_multipliers(m, s, p.w)[roots]))
    corrected = data.copy()
    corrected[roots] ^= errors
    return corrected


def _correct_welch(gf: GaloisField, data: np.ndarray, checks: np.ndarray, p: RSParams) -> np.ndarray:
    '''
    Berlekamp-Welch: find Q (deg < m+s) and monic E (deg s) with Q(x_i) = r_i E(x_i) at every
    point, then P = Q / E.
    '''
    m, s = p.m, p.s
    points = np.arange(1, m + 2 * s + 2, dtype=np.int64)
    values = np.concatenate([data, checks])

    powers = np.stack([gf.pow_arrays(points, j) for j in range(m + s)], axis=1)    # x_i^j
    a = np.concatenate([powers, gf.mul_arrays(values[:, None], powers[:, :s])], axis=1)
    b = gf.mul_arrays(values, gf.pow_arrays(points, s))
    solution = _gf_solve(gf, a, b)
    if solution is None:
        raise ReedSolomonError('Key equation has no solution: more than {} corrupted blocks.'.format(s))

    q_poly = solution[:m + s]
    e_poly = np.concatenate([solution[m + s:], [1]])
    quotient, remainder = _poly_divmod(gf, q_poly, e_poly)
    if np.any(remainder != 0) or np.any(quotient[m:] != 0):
        raise ReedSolomonError('Error locator does not divide the key polynomial.')
    return gf.poly_eval(quotient[:m], points[:m])


DECODERS = {
    'syndrome': _correct_syndrome,
    'welch': _correct_welch,
}


def rs_correct(received: Sequence[FieldElement], checksums: Sequence[FieldElement], p: RSParams,
               method: str = 'syndrome') -> List[FieldElement]:
    '''
    Recovers the m data blocks from `received` (at most s of them wrong) and trusted checksums.

    Two decoders are available. 'welch' solves the Berlekamp-Welch key equation over all
    m+2s+1 points by Gaussian elimination; 'syndrome' computes the 2s+1 syndromes of the
    generalised RS code, finds the error locator with Berlekamp-Massey and the error values from
    a small Vandermonde system, which stays fast for m in the hundreds. Both results are
    checked against every checksum and the distance bound before being returned.

    Raises:
        ReedSolomonError: when no polynomial of degree < m is within distance s of the received blocks
    '''
    p.validate()
    if method not in DECODERS:
        raise ValueError('Wrong RS decoder {!r}, expected one of {}'.format(method, sorted(DECODERS)))
    data = _as_symbols(received, p.w, 'Received blocks')
    checks = _as_symbols(checksums, p.w, 'Checksums')
    if data.size != p.m or checks.size != p.num_checksums:
        raise ValueError('Expected {} blocks and {} checksums, got {} and {}'
                         .format(p.m, p.num_checksums, data.size, checks.size))

    if rs_checksums(data, p) == checks.tolist():
        return data.tolist()
    if p.s == 0:
        raise ReedSolomonError('Blocks disagree with the checksums and s = 0.')

    gf = GaloisField.get(p.w)
    corrected = DECODERS[method](gf, data, checks, p)
    if rs_checksums(corrected, p) != checks.tolist():
        raise ReedSolomonError('Decoded polynomial disagrees with the checksums.')
    if np.count_nonzero(corrected != data) > p.s:
        raise ReedSolomonError('Decoded polynomial is farther than {} blocks from the input.'.format(p.s))
    logger.debug('RS repaired %d of %d blocks', int(np.count_nonzero(corrected != data)), p.m)
    return corrected.tolist()


def rs_corrupted_positions(received: Sequence[int], corrected: Sequence[int]) -> List[int]:
    '''0-based positions where the decoder changed a block.'''
    return [i for i, (a, b) in enumerate(zip(received, corrected)) if a != b]
