import json

import pandas as pd
import pytest

from combsw.parameters import get_parameters
from combsw.protocol import derive_params
from combsw.solver import FAILURES, Simulator, flatten, run_trial, simulate, summarize, trial_inputs

pytestmark = pytest.mark.filterwarnings('ignore::combsw.protocol.ParameterWarning')


def make_config(tmp_path, *extra):
    config = get_parameters(['simulate', '--quiet', '--master_seed', 'solver-test', *extra])
    config.result_dir = str(tmp_path)
    return config


def test_trial_inputs_are_reproducible():
    p = derive_params(256, '0.015', '0.5')
    first = trial_inputs(p, b'seed', 3)
    assert first == trial_inputs(p, b'seed', 3)
    assert first[0] != trial_inputs(p, b'seed', 4)[0]
    x, y, seed_a, seed_b = first
    assert len(x) == len(y) == 256
    assert seed_a != seed_b


def test_single_trial_without_errors():
    p = derive_params(64, 0, '0.5')
    record = run_trial(p, b'seed', 0)
    assert record['success'] and record['failure'] is None
    assert record['distance'] == 0
    assert record['wire_bytes_a'] > 0 and record['wire_bytes_b'] > 0
    assert record['phase_y']['blocks'] == p.m


@pytest.mark.parametrize('mode', ['model1', 'model2', 'model3'])
def test_simulate_close_inputs(mode):
    # at most three differences, repaired for sure with full-length digests
    p = derive_params(256, '0.015', '0.5', mode=mode)
    records, summary = simulate(p, 6, b'seed')
    assert [r['trial'] for r in records] == list(range(6))
    assert summary.successes == summary.trials == 6
    assert summary.success_rate == 1.0
    assert all(count == 0 for count in summary.failures.values())
    assert summary.rate_identity_residual == 0
    assert summary.mean_distance <= 3


def test_summary_accounting():
    p = derive_params(64, '0.05', '0.5', mode='model3')
    records, summary = simulate(p, 3, b'seed')
    assert set(summary.failures) == set(FAILURES)
    assert summary.rate_a == summary.payload_bits_a / p.n
    assert summary.overhead_per_bit == summary.overhead_bits / p.n
    assert summary.seed_bits_a > 0
    assert summarize(records, p) == summary

    row = flatten(summary)
    assert 'failures' not in row
    assert row['failures_phase_y_rs_overflow'] == summary.failures['phase-y-rs-overflow']


def test_workers_do_not_change_records():
    p = derive_params(64, '0.05', '0.5')
    sequential, _ = simulate(p, 4, b'seed', num_workers=1)
    parallel, _ = simulate(p, 4, b'seed', num_workers=2)
    assert json.dumps(sequential, sort_keys=True) == json.dumps(parallel, sort_keys=True)


def test_simulator_writes_identical_files(tmp_path):
    args = ['--n', '64', '--alpha', '0.05', '--trials', '4']
    for name in ('first', 'second'):
        (tmp_path / name).mkdir()
        Simulator(make_config(tmp_path / name, *args)).run()
    first, second = tmp_path / 'first', tmp_path / 'second'
    assert (first / 'trials.jsonl').read_bytes() == (second / 'trials.jsonl').read_bytes()
    assert (first / 'summary.json').read_bytes() == (second / 'summary.json').read_bytes()
    assert len((first / 'trials.jsonl').read_text().splitlines()) == 4

    table = pd.read_csv(first / 'summary.csv')
    assert len(table) == 1
    assert table.loc[0, 'trials'] == 4


def test_simulator_sigma_sweep(tmp_path):
    config = make_config(tmp_path, '--n', '64', '--alpha', '0.05', '--trials', '2', '--sweep_sigma', '0.1,0.3')
    summaries = Simulator(config).run()
    assert [s.sigma for s in summaries] == [0.1, 0.3]
    assert summaries[0].s < summaries[1].s
    assert (tmp_path / 'trials_sigma=0.1.jsonl').exists()
    assert (tmp_path / 'trials_sigma=0.3.jsonl').exists()
    assert len(pd.read_csv(tmp_path / 'summary.csv')) == 2
    assert len(json.loads((tmp_path / 'summary.json').read_text())['sweep']) == 2


def assert_only_rs_overflows(summary, trials):
    failures = summary.failures
    assert set(failures) == set(FAILURES)
    assert failures['wire-error'] == 0 and failures['wrong-output'] == 0
    assert failures['sample-mismatch'] == 0
    rs = failures['phase-y-rs-overflow'] + failures['phase-x-rs-overflow']
    assert rs == round((1 - summary.success_rate) * trials)


@pytest.mark.slow
def test_acceptance_success_rate():
    p = derive_params(4096, '0.02', '0.5')
    _, summary = simulate(p, 200, b'combsw', num_workers=2)
    assert summary.success_rate >= 0.95
    assert summary.payload_bits_a == 7008 and summary.payload_bits_b == 4956
    assert_only_rs_overflows(summary, 200)


@pytest.mark.slow
def test_acceptance_with_short_alice_hashes():
    p = derive_params(4096, '0.02', '0.5', tau_a=8)
    assert p.tau_a < p.k
    _, summary = simulate(p, 100, b'combsw-short-hash', num_workers=2)
    assert summary.success_rate >= 0.95
    assert summary.payload_bits_a == 2052 + 342 * 8 + 71 * 12
    assert_only_rs_overflows(summary, 100)
