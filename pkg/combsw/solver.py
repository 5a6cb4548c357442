#!/usr/bin/env python
import logging
import os
import time
import warnings
from collections import Counter
from datetime import datetime, timedelta
from typing import List, Tuple

import numpy as np
import pandas as pd
from easydict import EasyDict as edict
from joblib import Parallel, delayed
from tqdm import tqdm

from combsw.bits import hamming_distance, sample_correlated_pair
from combsw.protocol import (FAIL_PHASE_X_RS, FAIL_PHASE_Y_RS, FAIL_SAMPLE_MISMATCH, OVERRIDE_KEYS,
                             ParameterWarning, ProtocolParams, WireFormatError, alice_encode, bob_encode,
                             charlie_decode, derive_params, deserialize, party_seeds, payload_bits_alice,
                             payload_bits_bob, rate_overhead, seed_bits, serialize)
from combsw.randomness import PRGStream, SeedRole, derive_seed
from combsw.utils import write_json, write_jsonl

logger = logging.getLogger(__name__)

FAIL_WIRE = 'wire-error'
FAIL_WRONG_OUTPUT = 'wrong-output'
FAILURES = (FAIL_PHASE_Y_RS, FAIL_PHASE_X_RS, FAIL_SAMPLE_MISMATCH, FAIL_WIRE, FAIL_WRONG_OUTPUT)


def trial_inputs(params: ProtocolParams, master_seed: bytes, trial: int):
    '''Inputs and party master seeds of one trial, a pure function of (params, master_seed, trial).'''
    trial_seed = derive_seed(master_seed, SeedRole.TRIAL, trial).data
    x, y = sample_correlated_pair(params.original_len, params.alpha, PRGStream(derive_seed(trial_seed, SeedRole.INPUT)))
    seed_a = derive_seed(trial_seed, SeedRole.TRIAL, 'alice').data
    seed_b = derive_seed(trial_seed, SeedRole.TRIAL, 'bob').data
    return x, y, seed_a, seed_b


def run_trial(params: ProtocolParams, master_seed: bytes, trial: int) -> dict:
    '''
    One end-to-end run: sample (X, Y), encode, push both messages through the wire format, decode.
    '''
    x, y, seed_a, seed_b = trial_inputs(params, master_seed, trial)
    msg_a = alice_encode(x, params, seed_a)
    msg_b = bob_encode(y, params, seed_b)
    record = {'trial': trial, 'distance': hamming_distance(x, y),
              'payload_bits_a': msg_a.payload_bits, 'payload_bits_b': msg_b.payload_bits,
              'seed_bits_a': seed_bits(msg_a), 'seed_bits_b': seed_bits(msg_b),
              'phase_y': None, 'phase_x': None}

    try:
        wire_a, wire_b = serialize(msg_a), serialize(msg_b)
        record['wire_bytes_a'], record['wire_bytes_b'] = len(wire_a), len(wire_b)
        msg_a, msg_b = deserialize(wire_a), deserialize(wire_b)
    except WireFormatError as e:
        logger.warning('Trial %d: wire error %s', trial, e)
        record.update(success=False, failure=FAIL_WIRE)
        return record

    side_channel = None
    if not params.mode.seeds_in_band:
        side_channel = {**party_seeds(seed_a, 'A'), **party_seeds(seed_b, 'B')}
    report = charlie_decode(msg_a, msg_b, params, side_channel)
    record['phase_y'] = report.phase_y.to_dict()
    record['phase_x'] = report.phase_x.to_dict()

    if report.success and (report.x != x or report.y != y):
        record.update(success=False, failure=FAIL_WRONG_OUTPUT)
    else:
        record.update(success=report.success, failure=report.failure)
    return record


def _mean_candidates(records: List[dict], phase: str) -> float:
    values = [r[phase]['mean_candidates'] for r in records if r[phase] is not None]
    return float(np.mean(values)) if values else 0.0


def summarize(records: List[dict], params: ProtocolParams) -> edict:
    '''Aggregates trial records; rate_identity_residual is 0 when the measured sizes match the formula.'''
    failures = Counter(r['failure'] for r in records if not r['success'])
    successes = sum(r['success'] for r in records)
    payload_a = int(np.max([r['payload_bits_a'] for r in records]))
    payload_b = int(np.max([r['payload_bits_b'] for r in records]))
    expected = params.sample_size + params.m * (params.tau_a + params.tau_b) + 2 * params.rs.num_checksums * params.w

    summary = edict()
    summary.n = params.n
    summary.original_len = params.original_len
    summary.alpha = str(params.alpha)
    summary.lam = str(params.lam)
    summary.mode = str(params.mode)
    summary.sigma = params.sigma
    for name in ('k', 'm', 's', 'w', 't', 'r', 'tau_a', 'tau_b'):
        summary[name] = getattr(params, name)
    summary.delta = float(params.delta)
    summary.trials = len(records)
    summary.successes = int(successes)
    summary.success_rate = successes / len(records)
    summary.failures = {name: failures.get(name, 0) for name in FAILURES}
    summary.mean_distance = float(np.mean([r['distance'] for r in records]))
    summary.mean_candidates_y = _mean_candidates(records, 'phase_y')
    summary.mean_candidates_x = _mean_candidates(records, 'phase_x')
    summary.payload_bits_a = payload_a
    summary.payload_bits_b = payload_b
    summary.seed_bits_a = int(np.max([r['seed_bits_a'] for r in records]))
    summary.seed_bits_b = int(np.max([r['seed_bits_b'] for r in records]))
    summary.rate_a = payload_a / params.n
    summary.rate_b = payload_b / params.n
    summary.overhead_bits = rate_overhead(params)
    summary.overhead_per_bit = summary.overhead_bits / params.n
    summary.rate_identity_residual = payload_a + payload_b - expected
    return summary


def simulate(params: ProtocolParams, trials: int, master_seed: bytes, num_workers: int = 1,
             progress: bool = False) -> Tuple[List[dict], edict]:
    '''Runs `trials` independent trials; records come back ordered by trial index.'''
    jobs = (delayed(run_trial)(params, master_seed, i) for i in tqdm(range(trials), disable=not progress))
    records = Parallel(n_jobs=num_workers)(jobs)
    records = sorted(records, key=lambda r: r['trial'])
    return records, summarize(records, params)


def flatten(summary: dict) -> dict:
    '''One CSV row: nested failure counts become failures_<name> columns.'''
    row = {k: v for k, v in summary.items() if k != 'failures'}
    for name, count in summary['failures'].items():
        row['failures_' + name.replace('-', '_')] = count
    return row


class Simulator(object):
    '''
    Monte-Carlo driver of the command line `simulate`: one simulation per sigma value, trial records
    and summaries saved into config.result_dir.
    '''

    def __init__(self, config):
        self.config = config
        self.master_seed = config.master_seed.encode('utf-8')
        self.sigmas = config.sweep_sigma if config.sweep_sigma else [config.sigma]
        self.params_list = [self.build_params(sigma) for sigma in self.sigmas]

    def build_params(self, sigma) -> ProtocolParams:
        overrides = {key: getattr(self.config, key, None) for key in OVERRIDE_KEYS}
        overrides['sigma'] = sigma
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always', ParameterWarning)
            params = derive_params(self.config.n, self.config.alpha, self.config.lam, **overrides)
        for w in caught:
            logger.warning('%s', w.message)
        return params

    def _log(self, message):
        if not self.config.quiet:
            print("[%s] %s" % (datetime.now().strftime('%Y-%m-%d %H:%M:%S'), message))

    def run(self) -> List[edict]:
        start_t = time.time()
        self._log('Simulation started, {} trials x {} setting(s), {} worker(s)'
                  .format(self.config.trials, len(self.params_list), self.config.num_workers))
        summaries = []
        for sigma, params in zip(self.sigmas, self.params_list):
            self._log('n={} k={} m={} s={} w={} tau_A={} tau_B={} mode={}'.format(
                params.n, params.k, params.m, params.s, params.w, params.tau_a, params.tau_b, params.mode))
            records, summary = simulate(params, self.config.trials, self.master_seed,
                                        self.config.num_workers, progress=not self.config.quiet)
            summaries.append(summary)
            self.save(records, summary, sigma)
            self._log('sigma={}: {}/{} successes, E(n)/n = {:.4f}, elapsed {}'.format(
                sigma, summary.successes, summary.trials, summary.overhead_per_bit,
                timedelta(seconds=time.time() - start_t)))

        result_dir = getattr(self.config, 'result_dir', None)
        if result_dir:
            rows = [flatten(s) for s in summaries]
            pd.DataFrame(rows).to_csv(os.path.join(result_dir, 'summary.csv'), index=False)
            write_json(os.path.join(result_dir, 'summary.json'),
                       summaries[0] if len(summaries) == 1 else {'sweep': summaries})
        return summaries

    def save(self, records, summary, sigma):
        result_dir = getattr(self.config, 'result_dir', None)
        if not result_dir:
            return
        name = 'trials.jsonl' if len(self.sigmas) == 1 else 'trials_sigma={}.jsonl'.format(sigma)
        write_jsonl(os.path.join(result_dir, name), records)
