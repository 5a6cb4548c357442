#!/usr/bin/env python
"""
Rate-region mathematics for combinatorial Slepian-Wolf coding.

Rates are normalised message lengths rho = m / n. The counting bound and the randomized
achievability result apply to every scheme; the semi-linear bound, the Orlitsky-Viswanathan
zone and the syndrome-coding construction concern deterministic schemes. All o(n) terms are
folded into one `slack` argument.
"""
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Optional, Sequence

import numpy as np
import pandas as pd

from combsw.bits import BitString

GRID_MAX = 1.2


def _check_fraction(value, low, high, name):
    if not low <= value <= high:
        raise ValueError('{} must be within [{}, {}], got {}'.format(name, low, high, value))


def binary_entropy(alpha: float) -> float:
    '''h(a) = -a log2 a - (1-a) log2 (1-a), with h(0) = h(1) = 0.'''
    _check_fraction(alpha, 0, 1, 'alpha')
    a = float(alpha)
    if a == 0.0 or a == 1.0:
        return 0.0
    return -a * math.log2(a) - (1.0 - a) * math.log2(1.0 - a)


def _exact_sqrt(value: Fraction) -> Optional[Fraction]:
    num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def alpha_prime(alpha):
    '''
    a' = (1 - sqrt(1 - 4a)) / 2 for 0 <= a <= 1/4.

    Fractions with a rational square root give an exact Fraction, e.g. alpha_prime(Fraction(3, 16)) == 1/4.
    '''
    _check_fraction(alpha, 0, Fraction(1, 4), 'alpha')
    if isinstance(alpha, Fraction):
        root = _exact_sqrt(1 - 4 * alpha)
        if root is not None:
            return (1 - root) / 2
    return (1.0 - math.sqrt(1.0 - 4.0 * float(alpha))) / 2.0


def elias_bassalygo_F(x: float) -> float:
    '''
    F(x) = h(1/2 - sqrt(1 - 2x) / 2) for relative minimum distance x in [0, 1/2]: a binary code of
    relative distance x has rate at most 1 - F(x).
    '''
    _check_fraction(x, 0, 0.5, 'x')
    return binary_entropy(0.5 - 0.5 * math.sqrt(1.0 - 2.0 * float(x)))


def orlitsky_forbidden(delta1: float, delta2: float, alpha: float, slack: float = 0.0) -> bool:
    '''
    True iff (m_A, m_B) = ((h(a) + delta2) n, (1 - delta1) n) is impossible for deterministic schemes.

    Restricted to n' = (1 - delta1) n bits, Alice's preimages form a code of relative distance
    2a / (1 - delta1), so rho_A must reach (1 - delta1) F(2a / (1 - delta1)).
    '''
    if not 0 <= delta1 < 1:
        raise ValueError('delta1 must be within [0, 1), got {}'.format(delta1))
    _check_fraction(alpha, 0, 0.5, 'alpha')
    if alpha == 0:
        return False
    # relative minimum distance of the preimage code on the n' kept bits, clamped to the domain of F
    distance = min(2.0 * float(alpha) / (1.0 - delta1), 0.5)
    bound = (1.0 - delta1) * elias_bassalygo_F(distance) - binary_entropy(alpha)
    return delta2 + slack < bound


class Label(str, enum.Enum):
    FORBIDDEN_COUNTING = 'forbidden-counting'
    FORBIDDEN_SEMILINEAR = 'forbidden-semilinear'
    FORBIDDEN_ORLITSKY = 'forbidden-orlitsky'
    ACHIEVABLE_DETERMINISTIC = 'achievable-deterministic'
    ACHIEVABLE_RANDOMIZED = 'achievable-randomized'
    UNKNOWN = 'unknown'


DETERMINISTIC_FORBIDDEN = frozenset([Label.FORBIDDEN_SEMILINEAR, Label.FORBIDDEN_ORLITSKY])
ACHIEVABLE = frozenset([Label.ACHIEVABLE_DETERMINISTIC, Label.ACHIEVABLE_RANDOMIZED])


@dataclass(frozen=True)
class RatePoint:
    rho_a: float
    rho_b: float

    def __post_init__(self):
        if self.rho_a < 0 or self.rho_b < 0:
            raise ValueError('Rates must be >= 0, got ({}, {})'.format(self.rho_a, self.rho_b))


@dataclass(frozen=True)
class RegionLabel:
    labels: FrozenSet[Label]

    def tokens(self) -> Sequence[str]:
        return sorted(label.value for label in self.labels) or [Label.UNKNOWN.value]

    def __contains__(self, label) -> bool:
        return Label(label) in self.labels

    def is_consistent(self) -> bool:
        '''
        Counting-forbidden points are achievable by nothing; deterministic-forbidden points are not
        achievable deterministically but may be achievable with randomness.
        '''
        if Label.FORBIDDEN_COUNTING in self.labels and self.labels & ACHIEVABLE:
            return False
        return not (self.labels & DETERMINISTIC_FORBIDDEN and Label.ACHIEVABLE_DETERMINISTIC in self.labels)

    def __str__(self):
        return '|'.join(self.tokens())


def _violates(rho_a, rho_b, bound, slack):
    return rho_a + rho_b < 1 + bound - slack or rho_a < bound - slack or rho_b < bound - slack


def _satisfies(rho_a, rho_b, bound, slack):
    return rho_a + rho_b >= 1 + bound + slack and rho_a >= bound + slack and rho_b >= bound + slack


def _orlitsky_near(rho_a, rho_b, alpha, slack):
    h = binary_entropy(alpha)
    # (h(a) + delta2, 1 - delta1) and its mirror
    for own, other in ((rho_a, rho_b), (rho_b, rho_a)):
        if 0 < other <= 1 and orlitsky_forbidden(1.0 - other, own - h, alpha, slack):
            return True
    return False


def classify_rate_pair(p: RatePoint, alpha, slack: float = 0.0) -> RegionLabel:
    '''
    Labels a rate pair for inputs at distance alpha * n.

    forbidden-counting: sum < 1 + h(a) or a rate < h(a) (any scheme).
    achievable-randomized: sum >= 1 + h(a) and both rates >= h(a).
    forbidden-semilinear (a < 1/4): the counting bound with h(a') in place of h(a).
    achievable-deterministic (a < 1/4): syndrome coding, sum >= 1 + h(2a) and both rates >= h(2a),
        or both rates >= 1.
    forbidden-orlitsky (0 < a < 1/4): inside the zone around (h(a), 1) or (1, h(a)).
    '''
    if slack < 0:
        raise ValueError('slack must be >= 0, got {}'.format(slack))
    _check_fraction(alpha, 0, 0.5, 'alpha')
    if alpha == 0.5:
        raise ValueError('alpha must be < 1/2')
    rho_a, rho_b = p.rho_a, p.rho_b
    labels = set()
    h = binary_entropy(alpha)
    if _violates(rho_a, rho_b, h, slack):
        labels.add(Label.FORBIDDEN_COUNTING)
    if _satisfies(rho_a, rho_b, h, slack):
        labels.add(Label.ACHIEVABLE_RANDOMIZED)
    if alpha < 0.25:
        if alpha > 0 and _violates(rho_a, rho_b, binary_entropy(alpha_prime(alpha)), slack):
            labels.add(Label.FORBIDDEN_SEMILINEAR)
        h2 = binary_entropy(2 * alpha)
        if _satisfies(rho_a, rho_b, h2, slack) or (rho_a >= 1 + slack and rho_b >= 1 + slack):
            labels.add(Label.ACHIEVABLE_DETERMINISTIC)
        if _orlitsky_near(rho_a, rho_b, alpha, slack):
            labels.add(Label.FORBIDDEN_ORLITSKY)
    return RegionLabel(frozenset(labels))


@dataclass(frozen=True)
class JohnsonPair:
    i: int
    j: int
    distance: int


def johnson_pair_search(vectors: Sequence[BitString], alpha) -> Optional[JohnsonPair]:
    '''
    First pair (i < j, lexicographic) of vectors at distance <= 2 alpha n, or None.
    '''
    if len(vectors) < 2:
        return None
    n = len(vectors[0])
    if any(len(v) != n for v in vectors):
        raise ValueError('All vectors must have the same length.')
    stacked = np.stack([v.to_numpy() for v in vectors])
    distances = (stacked[:, None, :] != stacked[None, :, :]).sum(axis=2)
    limit = 2 * Fraction(alpha) * n if isinstance(alpha, (Fraction, int)) else 2 * alpha * n
    close = np.argwhere(np.triu(distances <= limit, k=1))
    if close.size == 0:
        return None
    i, j = (int(v) for v in close[0])
    return JohnsonPair(i, j, int(distances[i, j]))


def grid_points(grid_step: float) -> np.ndarray:
    if not 0 < grid_step <= GRID_MAX:
        raise ValueError('grid_step must be within (0, {}], got {}'.format(GRID_MAX, grid_step))
    count = int(math.floor(GRID_MAX / grid_step + 1e-9)) + 1
    return np.round(np.arange(count) * grid_step, 10)


def region_table(alpha, grid_step: float = 0.01, slack: float = 0.0) -> pd.DataFrame:
    '''Labels on the grid [0, 1.2]^2, rho_a outer, rho_b inner.'''
    points = grid_points(grid_step)
    rows = []
    for rho_a in points.tolist():
        for rho_b in points.tolist():
            label = classify_rate_pair(RatePoint(rho_a, rho_b), alpha, slack)
            rows.append((rho_a, rho_b, str(label)))
    return pd.DataFrame(rows, columns=['rho_a', 'rho_b', 'labels'])


def region_csv(alpha, grid_step: float = 0.01, slack: float = 0.0) -> str:
    return region_table(alpha, grid_step, slack).to_csv(index=False)
