#!/usr/bin/env python
import argparse
import logging
import os
import sys
from datetime import datetime
from fractions import Fraction

import yaml

from combsw.protocol import OVERRIDE_KEYS
from combsw.utils import BIT_FORMATS, EXIT_USAGE

logger = logging.getLogger(__name__)

WORKERS_ENV = 'COMBSW_WORKERS'
COMMANDS = ('simulate', 'encode-alice', 'encode-bob', 'decode', 'detscheme', 'region')


class ArgumentParser(argparse.ArgumentParser):
    '''argparse with the usage-error exit code of the command line tools.'''

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, '{}: error: {}\n'.format(self.prog, message))


def result_dir_name(config, now: datetime = None) -> str:
    '''Run directory name, e.g. "n=4096_alpha=0.02_lam=0.5_model1_20190604-134052".'''
    parts = [config.exp_name] if config.exp_name else []
    parts += ['n={}'.format(config.n), 'alpha={:g}'.format(float(Fraction(config.alpha))),
              'lam={:g}'.format(float(Fraction(config.lam))), config.mode]
    parts.append((now or datetime.now()).strftime('%Y%m%d-%H%M%S'))
    return '_'.join(parts)


def get_result_dir_path(config) -> str:
    '''Creates a fresh run directory under config.results_root. Runs started in the same second get -2, -3, ...'''
    base = os.path.join(config.results_root, result_dir_name(config))
    path, attempt = base, 1
    while True:
        try:
            os.makedirs(path)
            break
        except FileExistsError:
            attempt += 1
            path = '{}-{}'.format(base, attempt)
    logger.info('Saving results to %s', path)
    return path


def fraction_arg(s):
    '''Rational from text such as 0.02 or 1/50, kept as text so that it survives the yaml dump.'''
    try:
        Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError('{!r} is not a rational number'.format(s))
    return s


def list_of_floats(s):
    '''
    For the argparser, this reads a string in the format:
    --sweep_sigma 0.05,0.1,0.2
    And returns [0.05, 0.1, 0.2]
    '''
    try:
        return [float(v) for v in s.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('Expected comma separated numbers, got {!r}'.format(s))


def _add_common(parser):
    parser.add_argument('--config', type=str, default=None,
                        help='YAML file with option values (underscored long names). Flags override it.')
    parser.add_argument('--verbose', action='store_true', help='Debug logging.')
    parser.add_argument('--quiet', action='store_true', help='Warnings only, no progress bars.')


def _add_protocol(parser, with_n: bool):
    group = parser.add_argument_group('protocol')
    if with_n:
        group.add_argument('--n', type=int, default=4096, help='Input length in bits, before padding.')
    group.add_argument('--alpha', type=fraction_arg, default='0.02', help='Distance fraction, 0 <= alpha < 1/2.')
    group.add_argument('--lam', type=fraction_arg, default='0.5', help='Rate split, 0 <= lam <= 1.')
    group.add_argument('--mode', type=str, default='model1', choices=['model1', 'model2', 'model3'],
                       help='Randomness model.')
    group.add_argument('--master_seed', type=str, default='combsw', help='Master seed (text).')
    group.add_argument('--k', type=int, default=None, help='Block length. Default ceil(log2 n).')
    group.add_argument('--delta', type=fraction_arg, default=None, help='Deviation slack. Default k^-0.49.')
    group.add_argument('--r', type=int, default=None, help='Hash surplus bits. Default ceil(2 log2 k).')
    group.add_argument('--kappa1', type=int, default=None, help='Hash length constant. Default 3.')
    group.add_argument('--kappa2', type=int, default=None, help='Hash length constant. Default 2.')
    group.add_argument('--sigma', type=float, default=None, help='RS budget fraction, s = ceil(sigma m). Default 0.1.')
    group.add_argument('--w', type=int, default=None, help='RS symbol width. Default max(k, ceil(log2(m+2s+2))).')
    group.add_argument('--t', type=int, default=None, help='Hash index independence. Default ceil(sqrt m).')
    group.add_argument('--tau_a', type=int, default=None, help="Alice's hash length. Default from the formula.")
    group.add_argument('--tau_b', type=int, default=None, help="Bob's hash length. Default from the formula.")


def protocol_overrides(config) -> dict:
    '''Parameter overrides for derive_params, from the parsed config.'''
    return {key: getattr(config, key, None) for key in OVERRIDE_KEYS}


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog='combsw', formatter_class=argparse.ArgumentDefaultsHelpFormatter,
                            description='Combinatorial Slepian-Wolf coding toolkit.')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    fmt = dict(formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    # Monte-Carlo simulation
    sim = subparsers.add_parser('simulate', help='Monte-Carlo estimate of the failure probability.', **fmt)
    _add_common(sim)
    _add_protocol(sim, with_n=True)
    run_group = sim.add_argument_group('run')
    run_group.add_argument('--trials', type=int, default=200)
    run_group.add_argument('--num_workers', type=int, default=int(os.environ.get(WORKERS_ENV, 1)),
                           help='Worker processes. Default from ${}.'.format(WORKERS_ENV))
    run_group.add_argument('--sweep_sigma', type=list_of_floats, default=None,
                           help='Comma separated sigma values, one simulation each.')
    run_group.add_argument('--exp_name', type=str, default='', help='Optional experiment name.')
    run_group.add_argument('--results_root', type=str, default='./results')
    run_group.add_argument('--out_dir', type=str, default=None,
                           help='Write into this directory instead of a new timestamped one.')

    # Encoders
    for name, party in (('encode-alice', 'X'), ('encode-bob', 'Y')):
        enc = subparsers.add_parser(name, help='Encode {} into a wire-format message.'.format(party), **fmt)
        _add_common(enc)
        _add_protocol(enc, with_n=False)
        enc.add_argument('--input', type=str, required=True, help='Bit string file with {}.'.format(party))
        enc.add_argument('--output', type=str, required=True, help='Message file.')
        enc.add_argument('--format', type=str, default='raw', choices=BIT_FORMATS)
        enc.add_argument('--seeds_out', type=str, default=None,
                         help='Side-channel seed file (models 1/2). Default <output>.seeds')

    dec = subparsers.add_parser('decode', help='Recover X and Y from the two messages.', **fmt)
    _add_common(dec)
    dec.add_argument('--alice', type=str, required=True, help="Alice's message file.")
    dec.add_argument('--bob', type=str, required=True, help="Bob's message file.")
    dec.add_argument('--seeds', type=str, nargs='*', default=[], help='Side-channel seed files (models 1/2).')
    dec.add_argument('--out_x', type=str, required=True)
    dec.add_argument('--out_y', type=str, required=True)
    dec.add_argument('--format', type=str, default='raw', choices=BIT_FORMATS)

    # Deterministic scheme
    det = subparsers.add_parser('detscheme', help='Deterministic syndrome-coding scheme.', **fmt)
    _add_common(det)
    det.add_argument('action', choices=['build-code', 'encode', 'decode', 'self-test'])
    det.add_argument('--code', type=str, default='hamming(3)',
                     help='hamming(r), bch(n,t) or random_gv(n,k_H,t,seed).')
    det.add_argument('--code_file', type=str, default=None, help='Code file, instead of --code.')
    det.add_argument('--code_out', type=str, default=None, help='Where build-code writes the code.')
    det.add_argument('--lam', type=fraction_arg, default='0.5', help='Rate split for encode.')
    det.add_argument('--lams', type=list_of_floats, default=[0.0, 0.5, 1.0], help='Rate splits for self-test.')
    det.add_argument('--input_x', type=str, default=None)
    det.add_argument('--input_y', type=str, default=None)
    det.add_argument('--alice', type=str, default=None, help="Alice's message file.")
    det.add_argument('--bob', type=str, default=None, help="Bob's message file.")
    det.add_argument('--out_x', type=str, default=None)
    det.add_argument('--out_y', type=str, default=None)
    det.add_argument('--format', type=str, default='raw', choices=BIT_FORMATS)

    region = subparsers.add_parser('region', help='Rate-region labels on a grid, as CSV.', **fmt)
    _add_common(region)
    region.add_argument('--alpha', type=fraction_arg, default='0.1')
    region.add_argument('--grid', type=float, default=0.01, help='Grid step on [0, 1.2].')
    region.add_argument('--slack', type=float, default=0.0, help='Stands in for all o(n) terms.')
    region.add_argument('--out', type=str, default=None, help='CSV path. Default stdout.')

    parser.subparsers = subparsers
    return parser


def _check(parser, config):
    alpha = Fraction(str(config.alpha)) if getattr(config, 'alpha', None) is not None else None
    if alpha is not None and not 0 <= alpha < Fraction(1, 2):
        parser.error('alpha must be within [0, 1/2), got {}'.format(config.alpha))
    lam = getattr(config, 'lam', None)
    if lam is not None and not 0 <= Fraction(str(lam)) <= 1:
        parser.error('lam must be within [0, 1], got {}'.format(lam))
    if getattr(config, 'trials', 1) < 1:
        parser.error('trials must be >= 1')
    if getattr(config, 'num_workers', 1) < 1:
        parser.error('num_workers must be >= 1')
    grid = getattr(config, 'grid', None)
    if grid is not None and not 0 < grid <= 1.2:
        parser.error('grid must be within (0, 1.2]')


def get_parameters(argv=None):
    '''
    Parses the command line. A --config YAML file is installed as defaults of the chosen
    subcommand, then the command line is parsed again so that flags win.
    '''
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    config = parser.parse_args(argv)

    if config.config is not None:
        try:
            with open(config.config, 'r') as f:
                values = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            parser.error('cannot read config {}: {}'.format(config.config, e))
        if not isinstance(values, dict):
            parser.error('config {} must be a mapping'.format(config.config))
        values = {str(k).replace('-', '_'): v for k, v in values.items()}
        unknown = sorted(set(values) - set(vars(config)))
        if unknown:
            parser.error('unknown keys in {}: {}'.format(config.config, ', '.join(unknown)))
        sub = parser.subparsers.choices[config.command]
        sub.set_defaults(**values)
        config = parser.parse_args(argv)

    _check(parser, config)
    return config


def prepare_result_dir(config) -> str:
    '''Creates the result directory of a simulation and saves params.yaml into it.'''
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        config.result_dir = config.out_dir
    else:
        config.result_dir = get_result_dir_path(config)

    with open(os.path.join(config.result_dir, 'params.yaml'), 'w') as f:
        yaml.safe_dump({k: v for k, v in vars(config).items()}, f, default_flow_style=None)
    return config.result_dir
