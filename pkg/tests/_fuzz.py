"""Byte-level mutators for parser robustness checks."""
from __future__ import annotations

import random

from qcoflow.corpus import default_corpus
from qcoflow.qasm import emit_qasm

_TOKENS = [b"qubit", b"[", b"]", b"(", b")", b";", b",", b"pi", b"/", b"*", b"-", b"+",
           b"q[0]", b"q[99]", b"cx", b"rz", b"foo", b"measure", b"OPENQASM 2.0;", b"1e308",
           b"0" * 40, b"(" * 70, b"//", b"/*", b"\xff\xfe", b"\x00", "π".encode(), b"\n"]


def seed_texts() -> list[bytes]:
    return [emit_qasm(c).encode() for c in default_corpus()[::7]]


def mutate(rng: random.Random, data: bytes) -> bytes:
    buf = bytearray(data)
    for _ in range(rng.randint(1, 6)):
        op = rng.randrange(6)
        pos = rng.randrange(len(buf) + 1)
        if op == 0 and buf:
            del buf[min(pos, len(buf) - 1)]
        elif op == 1:
            buf[pos:pos] = bytes([rng.randrange(256)])
        elif op == 2 and buf:
            buf[min(pos, len(buf) - 1)] = rng.randrange(256)
        elif op == 3:
            buf[pos:pos] = rng.choice(_TOKENS)
        elif op == 4:
            del buf[pos:]
        else:
            end = min(len(buf), pos + rng.randrange(1, 40))
            buf[pos:pos] = buf[pos:end]
    return bytes(buf)


def fuzz_inputs(count: int, seed: int = 2024) -> list[bytes]:
    rng = random.Random(seed)
    seeds = seed_texts()
    return [mutate(rng, rng.choice(seeds)) for _ in range(count)]
