"""Combinatorial Slepian-Wolf coding: randomized protocol, syndrome scheme and rate regions."""
from combsw.bits import BitString, IndexSet, Permutation, hamming_distance
from combsw.linear_scheme import LinearCode, build_code, det_decode, det_encode_alice, det_encode_bob
from combsw.protocol import (AliceMessage, BobMessage, DecodeReport, Mode, ProtocolParams, WireFormatError,
                             alice_encode, bob_encode, charlie_decode, derive_params, deserialize, serialize)
from combsw.rates import RatePoint, classify_rate_pair, region_csv

__version__ = '0.1.0'
