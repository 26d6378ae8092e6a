"""GF(2^8) arithmetic over the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1.

Multiplication and division go through exp/log lookup tables built once at
import time with generator 2.
"""
from dataclasses import dataclass

POLY = 0x11D  # 285
ORDER = 255


@dataclass(frozen=True)
class GfTables:
    exp: tuple  # 256 entries, exp[i] = 2**i reduced; exp[255] wraps to 1
    log: tuple  # 256 entries, log[0] is None (zero has no logarithm)


def build_tables():
    exp = [0] * 256
    log = [None] * 256
    value = 1
    for i in range(256):
        exp[i] = value
        if i < ORDER:
            log[value] = i
        value <<= 1
        if value > 255:
            value ^= POLY
    return GfTables(exp=tuple(exp), log=tuple(log))


TABLES = build_tables()
_EXP = TABLES.exp
_LOG = TABLES.log


def gf_add(a, b):
    return a ^ b


gf_sub = gf_add


def gf_mul(a, b):
    if a == 0 or b == 0:
        return 0
    return _EXP[(_LOG[a] + _LOG[b]) % ORDER]


def gf_inv(a):
    if a == 0:
        raise ZeroDivisionError("no multiplicative inverse of zero")
    return _EXP[(ORDER - _LOG[a]) % ORDER]


def gf_div(a, b):
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return _EXP[(_LOG[a] - _LOG[b]) % ORDER]


def scale_row(row, c):
    """Multiply every element of ``row`` by the scalar ``c``."""
    if c == 0:
        return [0] * len(row)
    lc = _LOG[c]
    return [0 if x == 0 else _EXP[(_LOG[x] + lc) % ORDER] for x in row]


def add_scaled(dst, src, c):
    """Return ``dst + c * src`` element-wise."""
    if c == 0:
        return list(dst)
    lc = _LOG[c]
    return [d if s == 0 else d ^ _EXP[(_LOG[s] + lc) % ORDER] for d, s in zip(dst, src)]
