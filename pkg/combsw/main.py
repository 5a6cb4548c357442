#!/usr/bin/env python
'''
Command line entry point.

    combsw simulate --n 4104 --alpha 0.02 --lam 0.5 --trials 200
    combsw encode-alice --input x.bin --output a.msg
    combsw encode-bob --input y.bin --output b.msg
    combsw decode --alice a.msg --bob b.msg --seeds a.msg.seeds b.msg.seeds --out_x x.out --out_y y.out
    combsw detscheme self-test --code "hamming(3)"
    combsw region --alpha 0.1 --grid 0.01 --out region.csv

Exit codes: 0 success, 1 decode failure, 2 wire-format error, 3 I/O error, 64 usage error.
'''
import json
import logging
import sys
import warnings

from tqdm import tqdm

from combsw import linear_scheme, protocol, rates
from combsw.parameters import get_parameters, prepare_result_dir, protocol_overrides
from combsw.solver import Simulator
from combsw.utils import (EXIT_DECODE_FAILURE, EXIT_IO_ERROR, EXIT_OK, EXIT_USAGE, EXIT_WIRE_ERROR,
                          print_config, read_bits, read_bytes, setup_logging, write_bits, write_bytes)

logger = logging.getLogger('combsw')


class UsageError(ValueError):
    '''A command line combination that cannot work, reported with exit code 64.'''


def cmd_simulate(config) -> int:
    prepare_result_dir(config)
    if not config.quiet:
        print_config(config, 'Simulation')
    summaries = Simulator(config).run()
    for summary in summaries:
        print(json.dumps({'sigma': summary.sigma, 'trials': summary.trials, 'successes': summary.successes,
                          'payload_bits_a': summary.payload_bits_a, 'payload_bits_b': summary.payload_bits_b,
                          'overhead_per_bit': round(summary.overhead_per_bit, 6)}, sort_keys=True))
    return EXIT_OK


def _encode(config, party: str) -> int:
    z = read_bits(config.input, config.format)
    with warnings.catch_warnings():
        warnings.simplefilter('always', protocol.ParameterWarning)
        params = protocol.derive_params(len(z), config.alpha, config.lam, **protocol_overrides(config))
    master = config.master_seed.encode('utf-8')
    encode = protocol.alice_encode if party == 'A' else protocol.bob_encode
    msg = encode(z, params, master)
    write_bytes(config.output, protocol.serialize(msg))

    if not params.mode.seeds_in_band:
        seeds_out = config.seeds_out or config.output + '.seeds'
        write_bytes(seeds_out, protocol.serialize_seeds(protocol.party_seeds(master, party)))
        logger.info('Side-channel seeds written to %s', seeds_out)
    logger.info('%s message: %d payload bits, %d seed bits (n=%d, k=%d, m=%d, s=%d)', party, msg.payload_bits,
                protocol.seed_bits(msg), params.n, params.k, params.m, params.s)
    return EXIT_OK


def cmd_encode_alice(config) -> int:
    return _encode(config, 'A')


def cmd_encode_bob(config) -> int:
    return _encode(config, 'B')


def cmd_decode(config) -> int:
    msg_a = protocol.deserialize(read_bytes(config.alice))
    msg_b = protocol.deserialize(read_bytes(config.bob))
    if not isinstance(msg_a, protocol.AliceMessage) or not isinstance(msg_b, protocol.BobMessage):
        raise protocol.WireFormatError("--alice needs an 'A' message and --bob a 'B' message")
    params = protocol.params_from_headers(msg_a.header, msg_b.header)

    side_channel = None
    if not params.mode.seeds_in_band:
        if not config.seeds:
            raise UsageError('{} decoding needs the side-channel seed files (--seeds)'.format(params.mode))
        side_channel = {}
        for path in config.seeds:
            side_channel.update(protocol.deserialize_seeds(read_bytes(path)))
    try:
        report = protocol.charlie_decode(msg_a, msg_b, params, side_channel)
    except ValueError as e:
        if isinstance(e, protocol.WireFormatError):
            raise
        raise UsageError(str(e))

    print(json.dumps(report.to_dict(), sort_keys=True))
    if not report.success:
        logger.error('Decoding failed: %s', report.failure)
        return EXIT_DECODE_FAILURE
    write_bits(config.out_x, report.x, config.format)
    write_bits(config.out_y, report.y, config.format)
    return EXIT_OK


def _load_code(config) -> linear_scheme.LinearCode:
    if config.code_file:
        return linear_scheme.deserialize_code(read_bytes(config.code_file), name=config.code_file)
    return linear_scheme.build_code(config.code)


def _require(config, *names):
    missing = ['--' + name for name in names if not getattr(config, name)]
    if missing:
        raise UsageError('detscheme {} needs {}'.format(config.action, ', '.join(missing)))


def cmd_detscheme(config) -> int:
    if config.action == 'build-code':
        _require(config, 'code_out')
        code = linear_scheme.build_code(config.code)
        write_bytes(config.code_out, linear_scheme.serialize_code(code))
        print('{}: n={} k_H={} t={}'.format(code.name, code.n, code.k_h, code.t_code))
        return EXIT_OK

    code = _load_code(config)
    if config.action == 'encode':
        _require(config, 'input_x', 'input_y', 'alice', 'bob')
        split_s = linear_scheme.split_point(code, config.lam)
        alice = linear_scheme.det_encode_alice(read_bits(config.input_x, config.format), code, split_s)
        bob = linear_scheme.det_encode_bob(read_bits(config.input_y, config.format), code, split_s)
        write_bytes(config.alice, linear_scheme.serialize_message(alice))
        write_bytes(config.bob, linear_scheme.serialize_message(bob))
        print('alice={} bits bob={} bits'.format(len(alice), len(bob)))
        return EXIT_OK

    if config.action == 'decode':
        _require(config, 'alice', 'bob', 'out_x', 'out_y')
        alice = linear_scheme.deserialize_message(read_bytes(config.alice))
        bob = linear_scheme.deserialize_message(read_bytes(config.bob))
        try:
            x, y = linear_scheme.det_decode((alice, bob), code)
        except linear_scheme.SyndromeDecodeError as e:
            logger.error('Decoding failed: %s', e)
            return EXIT_DECODE_FAILURE
        write_bits(config.out_x, x, config.format)
        write_bits(config.out_y, y, config.format)
        return EXIT_OK

    # self-test
    if code.n > linear_scheme.CERTIFY_MAX_N:
        raise UsageError('self-test enumerates 2^n inputs; n={} is too long'.format(code.n))
    all_ok = True
    for lam in config.lams:
        progress = None if config.quiet else (lambda xs: tqdm(xs, desc='lambda={}'.format(lam)))
        ok, total = linear_scheme.self_test(code, lam, progress)
        print('{}/{} pairs OK (lambda={})'.format(ok, total, lam))
        all_ok &= ok == total
    return EXIT_OK if all_ok else EXIT_DECODE_FAILURE


def cmd_region(config) -> int:
    alpha = protocol.as_fraction(config.alpha)
    text = rates.region_csv(float(alpha), config.grid, config.slack)
    if config.out:
        write_bytes(config.out, text.encode('utf-8'))
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    'simulate': cmd_simulate,
    'encode-alice': cmd_encode_alice,
    'encode-bob': cmd_encode_bob,
    'decode': cmd_decode,
    'detscheme': cmd_detscheme,
    'region': cmd_region,
}


def main(argv=None) -> int:
    try:
        config = get_parameters(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    setup_logging(config.verbose, config.quiet)

    try:
        return COMMANDS[config.command](config)
    except protocol.WireFormatError as e:
        logger.error('Wire format error: %s', e)
        return EXIT_WIRE_ERROR
    except UsageError as e:
        logger.error('%s', e)
        return EXIT_USAGE
    except OSError as e:
        logger.error('I/O error: %s', e)
        return EXIT_IO_ERROR
    except ValueError as e:
        logger.error('%s', e)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
