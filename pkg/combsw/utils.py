#!/usr/bin/env python
import json
import logging
import os
from typing import Iterable

from combsw.bits import BitString

# Exit codes of the command line tools
EXIT_OK = 0
EXIT_DECODE_FAILURE = 1
EXIT_WIRE_ERROR = 2
EXIT_IO_ERROR = 3
EXIT_USAGE = 64

BIT_FORMATS = ('raw', 'hex', 'bits')

LOG_FORMAT = '[%(asctime)s] %(levelname)s %(name)s: %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logging(verbose: bool = False, quiet: bool = False):
    '''Configures the root logger once; later calls only change the level.'''
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(format=LOG_FORMAT, datefmt=DATE_FORMAT, level=level)
    root.setLevel(level)


def print_config(config, title: str = 'Experiment'):
    '''Prints the config as an aligned key/value table.'''
    print("")
    print("================ {} ================".format(title))
    ctr = 0
    for k, v in sorted(vars(config).items()):
        ctr += 1
        if ctr % 10 == 0:
            print(' ')
        print('{} \t {}'.format(k.ljust(15, ' '), v))
    print("")


def read_bits(path: str, fmt: str = 'raw') -> BitString:
    '''
    Reads a bit string file.

    Formats:
        raw  - 64-bit big-endian bit count followed by the packed bits
        hex  - text, optional "length:" prefix, then hex digits of the packed bits
        bits - text of 0/1 characters, whitespace ignored
    '''
    if fmt == 'raw':
        with open(path, 'rb') as f:
            return BitString.from_raw(f.read())
    with open(path, 'r') as f:
        text = f.read().strip()
    if fmt == 'hex':
        if ':' in text:
            length, digits = text.split(':', 1)
            return BitString.from_hex(digits, int(length))
        return BitString.from_hex(text)
    if fmt == 'bits':
        return BitString.from_str(text)
    raise ValueError('Wrong bit format {!r}, expected one of {}'.format(fmt, BIT_FORMATS))


def write_bits(path: str, x: BitString, fmt: str = 'raw'):
    if fmt == 'raw':
        write_bytes(path, x.to_raw())
    elif fmt == 'hex':
        with open(path, 'w') as f:
            f.write('{}:{}\n'.format(len(x), x.to_hex()))
    elif fmt == 'bits':
        with open(path, 'w') as f:
            f.write(str(x) + '\n')
    else:
        raise ValueError('Wrong bit format {!r}, expected one of {}'.format(fmt, BIT_FORMATS))


def read_bytes(path: str) -> bytes:
    with open(path, 'rb') as f:
        return f.read()


def write_bytes(path: str, data: bytes):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(data)


def write_jsonl(path: str, records: Iterable[dict]):
    '''One JSON object per line, keys sorted, so equal records give equal bytes.'''
    with open(path, 'w') as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + '\n')


def write_json(path: str, record: dict):
    with open(path, 'w') as f:
        json.dump(record, f, sort_keys=True, indent=2)
        f.write('\n')
