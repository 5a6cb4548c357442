#!/usr/bin/env python
"""
The randomized combinatorial Slepian-Wolf protocol.

Alice holds X, Bob holds Y with dist(X, Y) <= alpha * n. Each of them sends one message to Charlie,
who recovers both strings:

    Alice: X_I on a random index set I of size floor(lam * n), per-block hashes of X' = pi_A(X),
           Reed-Solomon checksums over the blocks of X'.
    Bob:   per-block hashes of Y'' = pi_B(Y), Reed-Solomon checksums over the blocks of Y''.

Charlie first rebuilds every block of Y'' from X_I and Bob's hashes, repairs the failures with Bob's
checksums and undoes pi_B (phase Y). With Y known he rebuilds the blocks of X' from X_I, Y' and
Alice's hashes, repairs with Alice's checksums and undoes pi_A (phase X).
"""
import enum
import itertools
import logging
import math
import struct
import warnings
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from combsw.bits import (BitString, IndexSet, Permutation, apply_permutation, blocks_to_ints,
                         extract, hamming_distance, ints_to_blocks)
from combsw.gf_rs import MODULI, ReedSolomonError, RSParams, rs_checksums, rs_correct
from combsw.randomness import (AffinePermutationSource, PermutationSource, Seed, SeedRole,
                               ToeplitzHashSeed, UniformPermutationSource, derive_seed,
                               draw_hash_indices, independent_hash_seeds, invert)
from combsw.rates import binary_entropy

logger = logging.getLogger(__name__)

MAGIC = b'SWC1'
SEEDS_MAGIC = b'SWS1'
VERSION = 1

FAIL_PHASE_Y_RS = 'phase-y-rs-overflow'
FAIL_PHASE_X_RS = 'phase-x-rs-overflow'
FAIL_SAMPLE_MISMATCH = 'sample-mismatch'

ALICE_ROLES = (SeedRole.PERM_I, SeedRole.PERM_A, SeedRole.HASH_A)
BOB_ROLES = (SeedRole.PERM_B, SeedRole.HASH_B)

OVERRIDE_KEYS = ('k', 'delta', 'r', 'kappa1', 'kappa2', 'sigma', 'w', 't', 'mode', 'tau_a', 'tau_b')


class WireFormatError(ValueError):
    '''Bad magic, version or kind, inconsistent header, or a payload of the wrong length.'''


class ParameterWarning(UserWarning):
    '''Parameters outside the regime the protocol's bounds are stated for.'''


class Mode(enum.IntEnum):
    '''
    Randomness models.

    MODEL1: uniform permutations and independent per-block hashes, seeds shared with Charlie.
    MODEL2: affine permutations and t-wise independent hash indices, seeds shared with Charlie.
    MODEL3: uniform permutations and t-wise independent hash indices, seeds sent in the messages.
    '''
    MODEL1 = 1
    MODEL2 = 2
    MODEL3 = 3

    @property
    def seeds_in_band(self) -> bool:
        return self is Mode.MODEL3

    @classmethod
    def parse(cls, value: Union[str, int, 'Mode']) -> 'Mode':
        if isinstance(value, Mode):
            return value
        text = str(value).strip().lower()
        if text.startswith('model'):
            text = text[len('model'):]
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError('Wrong mode {!r}, expected model1, model2 or model3'.format(value))

    def __str__(self):
        return 'model{}'.format(int(self))


def as_fraction(value) -> Fraction:
    '''Exact rational from a Fraction, int, decimal string or float (via its shortest repr).'''
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


# ----------------------------------------------------------------------
# Parameters
@dataclass(frozen=True)
class ProtocolParams:
    n: int                  # padded length, a multiple of k
    original_len: int
    alpha: Fraction
    lam: Fraction
    k: int
    m: int
    delta: Fraction
    r: int
    kappa1: int
    kappa2: int
    s: int
    tau_a: int
    tau_b: int
    w: int
    t: int
    mode: Mode
    sigma: float = field(default=0.1, compare=False)
    tau_a_capped: bool = field(default=False, compare=False)
    tau_b_capped: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.validate()

    @property
    def sample_size(self) -> int:
        return math.floor(self.lam * self.n)

    @property
    def rs(self) -> RSParams:
        return RSParams(self.m, self.s, self.w)

    def flip_budget(self, size: int) -> int:
        '''floor((alpha + delta) * size), exactly.'''
        return math.floor((self.alpha + self.delta) * size)

    def validate(self):
        if not 0 <= self.alpha < Fraction(1, 2):
            raise ValueError('alpha must be within [0, 1/2), got {}'.format(self.alpha))
        if not 0 <= self.lam <= 1:
            raise ValueError('lambda must be within [0, 1], got {}'.format(self.lam))
        if self.delta < 0:
            raise ValueError('delta must be >= 0, got {}'.format(self.delta))
        if not 1 <= self.k <= max(MODULI):
            raise ValueError('Block length {} outside 1..{}'.format(self.k, max(MODULI)))
        if self.n % self.k or self.m != self.n // self.k:
            raise ValueError('n = {} is not m = {} blocks of k = {} bits'.format(self.n, self.m, self.k))
        if not 0 < self.original_len <= self.n or self.n - self.original_len >= self.k:
            raise ValueError('Original length {} does not pad to {}'.format(self.original_len, self.n))
        if not self.k <= self.w <= max(MODULI):
            raise ValueError('Symbol width {} must be within {}..{}'.format(self.w, self.k, max(MODULI)))
        if self.m > 1 << self.w:
            raise ValueError('{} blocks do not fit in GF(2^{})'.format(self.m, self.w))
        for name in ('tau_a', 'tau_b'):
            if not 1 <= getattr(self, name) <= self.k:
                raise ValueError('{} = {} outside 1..k = {}'.format(name, getattr(self, name), self.k))
        if not 1 <= self.t < 1 << 16 or self.s >= 1 << 16:
            raise ValueError('t = {} or s = {} outside the u16 header fields'.format(self.t, self.s))
        if max(self.r, self.kappa1, self.kappa2) > 255 or min(self.r, self.kappa1, self.kappa2) < 0:
            raise ValueError('r, kappa1 and kappa2 must be within 0..255')
        self.rs.validate()


def derive_params(n: int, alpha, lam, **overrides) -> ProtocolParams:
    '''
    Derives the protocol parameters for inputs of `n` bits.

    n is padded up to the next multiple of k; the original length is kept in the params and travels
    in the message headers. Hash lengths above k are capped at k with a ParameterWarning.

    Args:
        n: input length in bits, >= 4
        alpha: distance fraction, 0 <= alpha < 1/2
        lam: rate split, 0 <= lam <= 1
        overrides: any of k, delta, r, kappa1, kappa2, sigma, w, t, mode, tau_a, tau_b
    '''
    unknown = set(overrides) - set(OVERRIDE_KEYS)
    if unknown:
        raise ValueError('Unknown parameter overrides: {}'.format(sorted(unknown)))
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if n < 4:
        raise ValueError('n must be >= 4, got {}'.format(n))
    alpha, lam = as_fraction(alpha), as_fraction(lam)

    k = int(overrides.get('k', (n - 1).bit_length()))     # ceil(log2 n)
    if k < 1:
        raise ValueError('k must be >= 1, got {}'.format(k))
    padded = -(-n // k) * k
    m = padded // k
    if 'delta' in overrides:
        delta = as_fraction(overrides['delta'])
    else:
        delta = Fraction(k ** -0.49).limit_denominator(2 ** 31)
    r = int(overrides.get('r', math.ceil(2 * math.log2(k))))
    kappa1 = int(overrides.get('kappa1', 3))
    kappa2 = int(overrides.get('kappa2', 2))
    sigma = float(overrides.get('sigma', 0.1))
    if not 0 <= sigma <= 1:
        raise ValueError('sigma must be within [0, 1], got {}'.format(sigma))
    s = math.ceil(as_fraction(sigma) * m)
    w = int(overrides.get('w', max(k, (m + 2 * s + 1).bit_length())))
    t = int(overrides.get('t', math.isqrt(m - 1) + 1))
    mode = Mode.parse(overrides.get('mode', Mode.MODEL1))

    h = binary_entropy(float(alpha))
    slack = kappa1 * float(delta) * k + kappa2 * math.log2(k) + r
    raw_a = math.ceil(h * float(1 - lam) * k + slack)
    raw_b = math.ceil(float(1 - lam) * k + h * float(lam) * k + slack)
    tau_a = int(overrides.get('tau_a', min(k, raw_a)))
    tau_b = int(overrides.get('tau_b', min(k, raw_b)))
    tau_a_capped = 'tau_a' not in overrides and raw_a > k
    tau_b_capped = 'tau_b' not in overrides and raw_b > k
    if tau_a_capped or tau_b_capped:
        warnings.warn('Hash length capped at k = {} (tau_A formula {}, tau_B formula {}); n = {} is outside '
                      'the asymptotic regime.'.format(k, raw_a, raw_b, padded), ParameterWarning)

    return ProtocolParams(n=padded, original_len=n, alpha=alpha, lam=lam, k=k, m=m, delta=delta, r=r,
                          kappa1=kappa1, kappa2=kappa2, s=s, tau_a=tau_a, tau_b=tau_b, w=w, t=t, mode=mode,
                          sigma=sigma, tau_a_capped=tau_a_capped, tau_b_capped=tau_b_capped)


# ----------------------------------------------------------------------
# Shared randomness
def party_seeds(master_seed: bytes, party: str) -> Dict[SeedRole, Seed]:
    '''Seeds of Alice ('A') or Bob ('B') derived from the party's own master seed.'''
    if party not in ('A', 'B'):
        raise ValueError("Wrong party {!r}, expected 'A' or 'B'".format(party))
    roles = ALICE_ROLES if party == 'A' else BOB_ROLES
    return {role: derive_seed(master_seed, role) for role in roles}


def permutation_source(params: ProtocolParams) -> PermutationSource:
    if params.mode is Mode.MODEL2:
        return AffinePermutationSource()
    return UniformPermutationSource()


def sample_positions(params: ProtocolParams, seed: Seed) -> IndexSet:
    '''I = pi_I({1, ..., floor(lam n)}).'''
    pi_i = permutation_source(params).draw(seed, params.n)
    return IndexSet(np.sort(pi_i.forward[:params.sample_size]) + 1, params.n)


def block_hashes(params: ProtocolParams, seed: Seed, tau: int) -> List[ToeplitzHashSeed]:
    if params.mode is Mode.MODEL1:
        return independent_hash_seeds(seed, params.m, params.k, tau)
    return [index.seed for index in draw_hash_indices(seed, params.m, params.t, params.w, params.k, tau)]


def _digests(hashes: List[ToeplitzHashSeed], blocks: np.ndarray) -> List[int]:
    return [int(h.hash_ints([b])[0]) for h, b in zip(hashes, blocks.tolist())]


# ----------------------------------------------------------------------
# Messages
@dataclass(frozen=True)
class MessageHeader:
    kind: str               # 'A' or 'B'
    mode: Mode
    n: int
    original_len: int
    alpha: Fraction
    lam: Fraction
    delta: Fraction
    k: int
    s: int
    w: int
    r: int
    kappa1: int
    kappa2: int
    tau: int
    t: int

    @classmethod
    def from_params(cls, params: ProtocolParams, kind: str) -> 'MessageHeader':
        return cls(kind=kind, mode=params.mode, n=params.n, original_len=params.original_len,
                   alpha=params.alpha, lam=params.lam, delta=params.delta, k=params.k, s=params.s,
                   w=params.w, r=params.r, kappa1=params.kappa1, kappa2=params.kappa2,
                   tau=params.tau_a if kind == 'A' else params.tau_b, t=params.t)


@dataclass(frozen=True)
class AliceMessage:
    header: MessageHeader
    seeds: Dict[SeedRole, Seed]     # empty unless the seeds travel in-band
    sampled_bits: BitString
    hashes: List[int]
    checksums: List[int]

    @property
    def payload_bits(self) -> int:
        return len(self.sampled_bits) + len(self.hashes) * self.header.tau + len(self.checksums) * self.header.w


@dataclass(frozen=True)
class BobMessage:
    header: MessageHeader
    seeds: Dict[SeedRole, Seed]
    hashes: List[int]
    checksums: List[int]

    @property
    def payload_bits(self) -> int:
        return len(self.hashes) * self.header.tau + len(self.checksums) * self.header.w


Message = Union[AliceMessage, BobMessage]


def params_from_headers(header_a: MessageHeader, header_b: MessageHeader) -> ProtocolParams:
    '''Rebuilds the shared parameters from the two message headers.'''
    if header_a.kind != 'A' or header_b.kind != 'B':
        raise WireFormatError('Expected an Alice and a Bob message, got kinds {} and {}'
                              .format(header_a.kind, header_b.kind))
    shared = [f.name for f in fields(MessageHeader) if f.name not in ('kind', 'tau')]
    mismatched = [name for name in shared if getattr(header_a, name) != getattr(header_b, name)]
    if mismatched:
        raise WireFormatError('Alice and Bob headers disagree on {}'.format(', '.join(mismatched)))
    h = header_a
    try:
        return ProtocolParams(n=h.n, original_len=h.original_len, alpha=h.alpha, lam=h.lam, k=h.k, m=h.n // h.k,
                              delta=h.delta, r=h.r, kappa1=h.kappa1, kappa2=h.kappa2, s=h.s, tau_a=header_a.tau,
                              tau_b=header_b.tau, w=h.w, t=h.t, mode=h.mode, sigma=h.s / max(1, h.n // h.k))
    except ValueError as e:
        raise WireFormatError('Invalid parameters in header: {}'.format(e))


# ----------------------------------------------------------------------
# Encoders
def _prepare_input(z: BitString, params: ProtocolParams, name: str) -> BitString:
    if len(z) == params.original_len:
        return z.pad_to(params.n)
    if len(z) != params.n:
        raise ValueError('{} has {} bits, expected {} (or {} padded)'.format(name, len(z), params.original_len, params.n))
    return z


def alice_encode(x: BitString, params: ProtocolParams, master_seed: bytes) -> AliceMessage:
    x = _prepare_input(x, params, 'X')
    seeds = party_seeds(master_seed, 'A')
    source = permutation_source(params)

    index_set = sample_positions(params, seeds[SeedRole.PERM_I])
    x_perm = apply_permutation(x, source.draw(seeds[SeedRole.PERM_A], params.n))
    blocks = blocks_to_ints(x_perm, params.k)
    hashes = block_hashes(params, seeds[SeedRole.HASH_A], params.tau_a)

    return AliceMessage(header=MessageHeader.from_params(params, 'A'),
                        seeds=seeds if params.mode.seeds_in_band else {},
                        sampled_bits=extract(x, index_set),
                        hashes=_digests(hashes, blocks),
                        checksums=rs_checksums(blocks, params.rs))


def bob_encode(y: BitString, params: ProtocolParams, master_seed: bytes) -> BobMessage:
    y = _prepare_input(y, params, 'Y')
    seeds = party_seeds(master_seed, 'B')
    y_perm = apply_permutation(y, permutation_source(params).draw(seeds[SeedRole.PERM_B], params.n))
    blocks = blocks_to_ints(y_perm, params.k)
    hashes = block_hashes(params, seeds[SeedRole.HASH_B], params.tau_b)

    return BobMessage(header=MessageHeader.from_params(params, 'B'),
                      seeds=seeds if params.mode.seeds_in_band else {},
                      hashes=_digests(hashes, blocks),
                      checksums=rs_checksums(blocks, params.rs))


# ----------------------------------------------------------------------
# Block reconstruction
class BlockStatus(enum.Enum):
    FOUND = 'found'
    NO_CANDIDATE = 'no-candidate'
    AMBIGUOUS = 'ambiguous'


@dataclass(frozen=True)
class BlockResult:
    status: BlockStatus
    value: Optional[BitString]
    candidates: int
    matches: int


def _position_masks(positions, k: int) -> List[int]:
    return [1 << (k - p) for p in positions]


def _flip_masks(positions, budget: int, k: int) -> np.ndarray:
    '''xor masks of all subsets of `positions` with at most `budget` elements, by size then lexicographically.'''
    bits = _position_masks(positions, k)
    masks = [0]
    for size in range(1, min(budget, len(bits)) + 1):
        masks.extend(sum(combo) for combo in itertools.combinations(bits, size))
    return np.asarray(masks, dtype=np.int64)


def _free_masks(positions, k: int) -> np.ndarray:
    '''All 2^f assignments of the f free positions, in integer order (first position is the MSB).'''
    f = len(positions)
    assignments = np.arange(1 << f, dtype=np.int64)
    masks = np.zeros(1 << f, dtype=np.int64)
    for i, bit in enumerate(_position_masks(positions, k)):
        masks |= ((assignments >> (f - 1 - i)) & 1) * bit
    return masks


def _search(base: int, flips: np.ndarray, free: np.ndarray, hash_seed: ToeplitzHashSeed, digest: int,
            k: int) -> BlockResult:
    candidates = (base ^ flips[:, None] ^ free[None, :]).ravel()
    hits = candidates[hash_seed.hash_ints(candidates) == digest]
    if hits.size == 1:
        return BlockResult(BlockStatus.FOUND, BitString.from_int(int(hits[0]), k), int(candidates.size), 1)
    status = BlockStatus.NO_CANDIDATE if hits.size == 0 else BlockStatus.AMBIGUOUS
    return BlockResult(status, None, int(candidates.size), int(hits.size))


def _place(bits: BitString, positions: IndexSet, k: int) -> int:
    value = 0
    for b, p in zip(bits, positions):
        value |= b << (k - p)
    return value


def reconstruct_block_Y(j: int, known_bits: BitString, positions: IndexSet, digest: int,
                        hash_seed: ToeplitzHashSeed, params: ProtocolParams) -> BlockResult:
    '''
    Rebuilds block j of Y'' from Alice's bits at the local positions `positions` and Bob's digest.

    Candidates flip at most floor((alpha+delta)|positions|) of Alice's bits and take every value on
    the remaining positions; the unique candidate with the right digest is returned.
    '''
    k = params.k
    if positions.n != k or len(known_bits) != len(positions):
        raise ValueError('Block {}: {} known bits for {} positions in a block of {}'
                         .format(j, len(known_bits), len(positions), k))
    flips = _flip_masks(positions, params.flip_budget(len(positions)), k)
    free = _free_masks(positions.complement(), k)
    return _search(_place(known_bits, positions, k), flips, free, hash_seed, digest, k)


def reconstruct_block_X(j: int, known_bits: BitString, y_block: BitString, positions: IndexSet, digest: int,
                        hash_seed: ToeplitzHashSeed, params: ProtocolParams) -> BlockResult:
    '''
    Rebuilds block j of X' from Alice's bits on `positions`, the block of Y' elsewhere, and Alice's digest.
    At most floor((alpha+delta)|complement|) bits of Y' are flipped.
    '''
    k = params.k
    if positions.n != k or len(known_bits) != len(positions) or len(y_block) != k:
        raise ValueError('Block {}: inconsistent block inputs'.format(j))
    outside = positions.complement()
    keep = sum(_position_masks(outside, k))
    base = (y_block.to_int() & keep) | _place(known_bits, positions, k)
    flips = _flip_masks(outside, params.flip_budget(len(outside)), k)
    return _search(base, flips, np.zeros(1, dtype=np.int64), hash_seed, digest, k)


# ----------------------------------------------------------------------
# Decoder
@dataclass
class PhaseStats:
    direct: int = 0
    ambiguous: int = 0
    no_candidate: int = 0
    repaired: int = 0
    candidates: List[int] = field(default_factory=list)

    def add(self, result: BlockResult):
        if result.status is BlockStatus.FOUND:
            self.direct += 1
        elif result.status is BlockStatus.AMBIGUOUS:
            self.ambiguous += 1
        else:
            self.no_candidate += 1
        self.candidates.append(result.candidates)

    @property
    def blocks(self) -> int:
        return self.direct + self.ambiguous + self.no_candidate

    @property
    def mean_candidates(self) -> float:
        return float(np.mean(self.candidates)) if self.candidates else 0.0

    def to_dict(self) -> dict:
        return {'blocks': self.blocks, 'direct': self.direct, 'ambiguous': self.ambiguous,
                'no_candidate': self.no_candidate, 'repaired': self.repaired, 'mean_candidates': self.mean_candidates}


@dataclass
class DecodeReport:
    success: bool
    failure: Optional[str] = None
    x: Optional[BitString] = None
    y: Optional[BitString] = None
    distance: Optional[int] = None
    phase_y: PhaseStats = field(default_factory=PhaseStats)
    phase_x: PhaseStats = field(default_factory=PhaseStats)

    def to_dict(self) -> dict:
        return {'success': self.success, 'failure': self.failure, 'distance': self.distance,
                'phase_y': self.phase_y.to_dict(), 'phase_x': self.phase_x.to_dict()}


def _collect_seeds(msg_a: AliceMessage, msg_b: BobMessage, params: ProtocolParams,
                   side_channel_seeds: Optional[Dict[SeedRole, Seed]]) -> Dict[SeedRole, Seed]:
    seeds = {}
    if params.mode.seeds_in_band:
        seeds.update(msg_a.seeds)
        seeds.update(msg_b.seeds)
    elif side_channel_seeds:
        seeds.update(side_channel_seeds)
    missing = [role.name for role in ALICE_ROLES + BOB_ROLES if role not in seeds]
    if missing:
        raise ValueError('{} decoding needs the seeds {}'.format(params.mode, ', '.join(missing)))
    return seeds


def _known_in(perm: Permutation, index_set: IndexSet, bits: BitString, n: int) -> Tuple[np.ndarray, np.ndarray]:
    '''Alice's sampled bits moved to the coordinates of apply_permutation(., perm).'''
    where = perm.inverse().forward[index_set.indices - 1]
    known = np.zeros(n, dtype=np.uint8)
    mask = np.zeros(n, dtype=bool)
    known[where] = bits.to_numpy()
    mask[where] = True
    return known, mask


def _local(known: np.ndarray, mask: np.ndarray, j: int, k: int) -> Tuple[BitString, IndexSet]:
    sl = slice(j * k, (j + 1) * k)
    local = np.flatnonzero(mask[sl])
    return BitString(known[sl][local]), IndexSet(local + 1, k)


def _repair(received: List[int], checksums: List[int], params: ProtocolParams, stats: PhaseStats) -> Optional[List[int]]:
    try:
        corrected = rs_correct(received, checksums, params.rs)
    except ReedSolomonError as e:
        logger.debug('RS repair failed: %s', e)
        return None
    if max(corrected) >> params.k:
        return None
    stats.repaired = sum(a != b for a, b in zip(received, corrected))
    return corrected


def charlie_decode(msg_a: AliceMessage, msg_b: BobMessage, params: ProtocolParams,
                   side_channel_seeds: Optional[Dict[SeedRole, Seed]] = None) -> DecodeReport:
    '''
    Recovers (X, Y) from the two messages.

    Seeds come from the messages in Model 3 and from `side_channel_seeds` otherwise. A failed phase
    is reported in the returned DecodeReport, not raised.

    Raises:
        WireFormatError: when the message headers do not match `params`
        ValueError: when seeds are missing
    '''
    if params_from_headers(msg_a.header, msg_b.header) != params:
        raise WireFormatError('Message headers do not match the decoder parameters.')
    n, k, m = params.n, params.k, params.m
    if len(msg_a.sampled_bits) != params.sample_size or len(msg_a.hashes) != m or len(msg_b.hashes) != m:
        raise WireFormatError('Message field lengths do not match the parameters.')
    seeds = _collect_seeds(msg_a, msg_b, params, side_channel_seeds)
    source = permutation_source(params)
    index_set = sample_positions(params, seeds[SeedRole.PERM_I])
    pi_a = source.draw(seeds[SeedRole.PERM_A], n)
    pi_b = source.draw(seeds[SeedRole.PERM_B], n)
    report = DecodeReport(success=False)

    # phase Y
    hashes_b = block_hashes(params, seeds[SeedRole.HASH_B], params.tau_b)
    known, mask = _known_in(pi_b, index_set, msg_a.sampled_bits, n)
    received = []
    for j in range(m):
        bits, positions = _local(known, mask, j, k)
        result = reconstruct_block_Y(j, bits, positions, msg_b.hashes[j], hashes_b[j], params)
        report.phase_y.add(result)
        received.append(result.value.to_int() if result.value is not None else 0)
    corrected = _repair(received, msg_b.checksums, params, report.phase_y)
    if corrected is None:
        report.failure = FAIL_PHASE_Y_RS
        return report
    y = apply_permutation(ints_to_blocks(corrected, k), invert(pi_b))

    # phase X
    hashes_a = block_hashes(params, seeds[SeedRole.HASH_A], params.tau_a)
    known, mask = _known_in(pi_a, index_set, msg_a.sampled_bits, n)
    y_blocks = blocks_to_ints(apply_permutation(y, pi_a), k).tolist()
    received = []
    for j in range(m):
        bits, positions = _local(known, mask, j, k)
        result = reconstruct_block_X(j, bits, BitString.from_int(y_blocks[j], k), positions, msg_a.hashes[j],
                                     hashes_a[j], params)
        report.phase_x.add(result)
        received.append(result.value.to_int() if result.value is not None else 0)
    corrected = _repair(received, msg_a.checksums, params, report.phase_x)
    if corrected is None:
        report.failure = FAIL_PHASE_X_RS
        return report
    x = apply_permutation(ints_to_blocks(corrected, k), invert(pi_a))

    if extract(x, index_set) != msg_a.sampled_bits:
        report.failure = FAIL_SAMPLE_MISMATCH
        return report
    report.x = x.truncate(params.original_len)
    report.y = y.truncate(params.original_len)
    report.distance = hamming_distance(report.x, report.y)
    report.success = True
    return report


# ----------------------------------------------------------------------
# Rates
def payload_bits_alice(params: ProtocolParams) -> int:
    return params.sample_size + params.m * params.tau_a + params.rs.num_checksums * params.w


def payload_bits_bob(params: ProtocolParams) -> int:
    return params.m * params.tau_b + params.rs.num_checksums * params.w


def seed_bits(msg: Message) -> int:
    '''Bits spent on in-band seeds, tags included.'''
    return sum(8 * len(seed.to_bytes()) for seed in msg.seeds.values())


def rate_overhead(params: ProtocolParams) -> float:
    '''E(n) = payload_A + payload_B - (1 + h(alpha)) n.'''
    total = payload_bits_alice(params) + payload_bits_bob(params)
    return total - (1 + binary_entropy(float(params.alpha))) * params.n


# ----------------------------------------------------------------------
# Wire format
# magic, version, kind, mode, n, original_len, alpha, lambda and delta as u32/u32, k, s, w, r, kappa1, kappa2,
# tau, t
_HEADER = struct.Struct('>4sBBBQQIIIIIIHHBBBBBH')


def _rational(value: Fraction, name: str) -> Tuple[int, int]:
    if value.numerator >= 1 << 32 or value.denominator >= 1 << 32:
        raise ValueError('{} = {} does not fit a u32/u32 rational'.format(name, value))
    return value.numerator, value.denominator


def _pack_seeds(seeds: Dict[SeedRole, Seed]) -> bytes:
    out = [struct.pack('>B', len(seeds))]
    for role in sorted(seeds):
        data = seeds[role].data
        out.append(struct.pack('>BH', int(role), len(data)) + data)
    return b''.join(out)


def _unpack_seeds(data: bytes, offset: int) -> Tuple[Dict[SeedRole, Seed], int]:
    try:
        count, = struct.unpack_from('>B', data, offset)
        offset += 1
        seeds = {}
        for _ in range(count):
            tag, length = struct.unpack_from('>BH', data, offset)
            offset += 3
            if offset + length > len(data):
                raise WireFormatError('Seed block is truncated.')
            role = SeedRole(tag)
            seeds[role] = Seed(role, data[offset:offset + length])
            offset += length
    except struct.error:
        raise WireFormatError('Seed block is truncated.')
    except ValueError as e:
        if isinstance(e, WireFormatError):
            raise
        raise WireFormatError('Unknown seed tag: {}'.format(e))
    return seeds, offset


def _ints_bits(values: List[int], width: int) -> BitString:
    return ints_to_blocks(values, width) if values else BitString.zeros(0)


def serialize(msg: Message) -> bytes:
    h = msg.header
    header = _HEADER.pack(MAGIC, VERSION, ord(h.kind), int(h.mode), h.n, h.original_len,
                          *_rational(h.alpha, 'alpha'), *_rational(h.lam, 'lambda'), *_rational(h.delta, 'delta'),
                          h.k, h.s, h.w, h.r, h.kappa1, h.kappa2, h.tau, h.t)
    seed_block = _pack_seeds(msg.seeds) if h.mode.seeds_in_band else b''
    parts = [_ints_bits(msg.hashes, h.tau), _ints_bits(msg.checksums, h.w)]
    if isinstance(msg, AliceMessage):
        parts.insert(0, msg.sampled_bits)
    payload = parts[0].concat(*parts[1:])
    return header + seed_block + payload.to_bytes()


def _parse_header(data: bytes) -> MessageHeader:
    if len(data) < _HEADER.size:
        raise WireFormatError('Message is truncated: {} bytes, header needs {}'.format(len(data), _HEADER.size))
    (magic, version, kind, mode, n, original_len, a_num, a_den, l_num, l_den, d_num, d_den,
     k, s, w, r, kappa1, kappa2, tau, t) = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise WireFormatError('Bad magic {!r}'.format(magic))
    if version != VERSION:
        raise WireFormatError('Unsupported version {}'.format(version))
    if chr(kind) not in ('A', 'B'):
        raise WireFormatError('Unknown message kind {!r}'.format(chr(kind)))
    if 0 in (a_den, l_den, d_den):
        raise WireFormatError('Zero denominator in header.')
    try:
        mode = Mode(mode)
    except ValueError:
        raise WireFormatError('Unknown mode {}'.format(mode))
    if k == 0 or n % k or not 1 <= tau <= k or w not in MODULI or not 0 < original_len <= n:
        raise WireFormatError('Inconsistent header: n={} k={} tau={} w={} original_len={}'
                              .format(n, k, tau, w, original_len))
    if n // k + 2 * s + 1 >= 1 << w:
        raise WireFormatError('Inconsistent header: m + 2s + 1 does not fit GF(2^{})'.format(w))
    return MessageHeader(kind=chr(kind), mode=mode, n=n, original_len=original_len, alpha=Fraction(a_num, a_den),
                         lam=Fraction(l_num, l_den), delta=Fraction(d_num, d_den), k=k, s=s, w=w, r=r,
                         kappa1=kappa1, kappa2=kappa2, tau=tau, t=t)


def deserialize(data: bytes) -> Message:
    '''
    Parses an Alice or Bob message.

    Raises:
        WireFormatError: bad magic, version, kind or header fields, or a payload whose length does not
            match the header exactly
    '''
    header = _parse_header(data)
    offset = _HEADER.size
    seeds = {}
    if header.mode.seeds_in_band:
        seeds, offset = _unpack_seeds(data, offset)
    m = header.n // header.k
    sample = math.floor(header.lam * header.n) if header.kind == 'A' else 0
    widths = [sample, m * header.tau, (2 * header.s + 1) * header.w]
    total = sum(widths)
    body = data[offset:]
    if len(body) != (total + 7) // 8:
        raise WireFormatError('Payload has {} bytes, header implies {} bits ({} bytes)'
                              .format(len(body), total, (total + 7) // 8))
    try:
        payload = BitString.from_bytes(body, total).to_numpy()
    except ValueError as e:
        raise WireFormatError(str(e))
    sampled = BitString(payload[:sample])
    hashes = blocks_to_ints(BitString(payload[sample:sample + widths[1]]), header.tau).tolist()
    checksums = blocks_to_ints(BitString(payload[sample + widths[1]:]), header.w).tolist()
    if header.kind == 'A':
        return AliceMessage(header, seeds, sampled, hashes, checksums)
    return BobMessage(header, seeds, hashes, checksums)


def serialize_seeds(seeds: Dict[SeedRole, Seed]) -> bytes:
    '''Side-channel seed file: magic followed by a seed block.'''
    return SEEDS_MAGIC + _pack_seeds(seeds)


def deserialize_seeds(data: bytes) -> Dict[SeedRole, Seed]:
    if data[:4] != SEEDS_MAGIC:
        raise WireFormatError('Bad seed file magic {!r}'.format(data[:4]))
    seeds, offset = _unpack_seeds(data, 4)
    if offset != len(data):
        raise WireFormatError('Trailing bytes after the seed block.')
    return seeds
