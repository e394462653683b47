"""Exact, correctly rounded reference arithmetic for posits.

Every operation computes the exact real result in a scaled-integer form
(value = num * 2^exp2) and rounds once at the end through the shared
round-to-nearest-even encoder. Division keeps a wide quotient plus a
nonzero-remainder sticky flag instead of unbounded rationals. These results
are the oracle the pipelined unit model is judged against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    NAR,
    NORMAL,
    ZERO,
    PositBits,
    PositConfig,
    decode_fields,
    encode_word,
)

__all__ = [
    "ExactClass",
    "ExactValue",
    "ConfigMismatchError",
    "g_add",
    "g_sub",
    "g_mul",
    "g_div",
    "g_fma",
    "float_to_posit",
    "posit_to_float",
    "add_words",
    "sub_words",
    "mul_words",
    "div_words",
    "fma_words",
    "float_to_posit_word",
    "posit_to_float_word",
    "float_word_to_value",
    "value_to_float_word",
]


class ConfigMismatchError(ValueError):
    """Operands of a golden operation must share one posit configuration."""


class ExactClass(enum.Enum):
    ZERO = "zero"
    NAR = "nar"
    FINITE = "finite"


@dataclass(frozen=True)
class ExactValue:
    """Exact dyadic intermediate: value = num * 2^exp2, num odd or zero."""

    num: int
    exp2: int
    tag: ExactClass = ExactClass.FINITE

    @classmethod
    def make(cls, num: int, exp2: int) -> "ExactValue":
        if num == 0:
            return cls(0, 0, ExactClass.ZERO)
        tz = (num & -num).bit_length() - 1
        return cls(num >> tz, exp2 + tz, ExactClass.FINITE)

    @classmethod
    def nar(cls) -> "ExactValue":
        return cls(0, 0, ExactClass.NAR)

    @classmethod
    def from_posit(cls, bits: PositBits) -> "ExactValue":
        cfg = bits.config
        tag, sign, k, _, e, f, flen = decode_fields(bits.word, cfg.n_bits, cfg.es_bits)
        if tag == ZERO:
            return cls(0, 0, ExactClass.ZERO)
        if tag == NAR:
            return cls.nar()
        m = (1 << flen) | f
        return cls.make(-m if sign else m, (k << cfg.es_bits) + e - flen)

    def __add__(self, other: "ExactValue") -> "ExactValue":
        if self.tag is ExactClass.NAR or other.tag is ExactClass.NAR:
            return ExactValue.nar()
        if self.tag is ExactClass.ZERO:
            return other
        if other.tag is ExactClass.ZERO:
            return self
        e = min(self.exp2, other.exp2)
        return ExactValue.make(
            (self.num << (self.exp2 - e)) + (other.num << (other.exp2 - e)), e
        )

    def __neg__(self) -> "ExactValue":
        return ExactValue(-self.num, self.exp2, self.tag)

    def __sub__(self, other: "ExactValue") -> "ExactValue":
        return self + (-other)

    def __mul__(self, other: "ExactValue") -> "ExactValue":
        if self.tag is ExactClass.NAR or other.tag is ExactClass.NAR:
            return ExactValue.nar()
        if self.tag is ExactClass.ZERO or other.tag is ExactClass.ZERO:
            return ExactValue(0, 0, ExactClass.ZERO)
        return ExactValue.make(self.num * other.num, self.exp2 + other.exp2)

    def to_fraction(self) -> Fraction:
        if self.tag is ExactClass.NAR:
            raise ValueError("NaR has no rational value")
        if self.exp2 >= 0:
            return Fraction(self.num << self.exp2, 1)
        return Fraction(self.num, 1 << -self.exp2)

    def round_to_word(self, n: int, es: int, sticky: int = 0) -> int:
        """Nearest posit pattern, single rounding; NaR/zero map to their patterns."""
        if self.tag is ExactClass.NAR:
            return 1 << (n - 1)
        if self.tag is ExactClass.ZERO:
            return 0
        sign = 1 if self.num < 0 else 0
        m = -self.num if sign else self.num
        length = m.bit_length()
        return encode_word(
            n, es, sign, self.exp2 + length - 1, m - (1 << (length - 1)), length - 1, sticky
        )


# ---------------------------------------------------------------------------
# word-level operations
# ---------------------------------------------------------------------------

def _fields_to_signed_m_e(sign, k, e, f, flen, es):
    m = (1 << flen) | f
    return (-m if sign else m), (k << es) + e - flen


def add_words(wa: int, wb: int, n: int, es: int) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    if da[0] == NAR or db[0] == NAR:
        return 1 << (n - 1)
    if da[0] == ZERO:
        return wb
    if db[0] == ZERO:
        return wa
    ma, ea = _fields_to_signed_m_e(da[1], da[2], da[4], da[5], da[6], es)
    mb, eb = _fields_to_signed_m_e(db[1], db[2], db[4], db[5], db[6], es)
    e = ea if ea < eb else eb
    s = (ma << (ea - e)) + (mb << (eb - e))
    if s == 0:
        return 0
    sign = 1 if s < 0 else 0
    m = -s if sign else s
    length = m.bit_length()
    return encode_word(n, es, sign, e + length - 1, m - (1 << (length - 1)), length - 1)


def sub_words(wa: int, wb: int, n: int, es: int) -> int:
    return add_words(wa, (-wb) & ((1 << n) - 1), n, es)


def mul_words(wa: int, wb: int, n: int, es: int) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    if da[0] == NAR or db[0] == NAR:
        return 1 << (n - 1)
    if da[0] == ZERO or db[0] == ZERO:
        return 0
    sign = da[1] ^ db[1]
    m = ((1 << da[6]) | da[5]) * ((1 << db[6]) | db[5])
    e = ((da[2] << es) + da[4] - da[6]) + ((db[2] << es) + db[4] - db[6])
    length = m.bit_length()
    return encode_word(n, es, sign, e + length - 1, m - (1 << (length - 1)), length - 1)


def div_words(wa: int, wb: int, n: int, es: int) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    if da[0] == NAR or db[0] == NAR or db[0] == ZERO:
        return 1 << (n - 1)
    if da[0] == ZERO:
        return 0
    sign = da[1] ^ db[1]
    ma = (1 << da[6]) | da[5]
    mb = (1 << db[6]) | db[5]
    ea = (da[2] << es) + da[4] - da[6]
    eb = (db[2] << es) + db[4] - db[6]
    # Quotient wide enough that every posit midpoint at the result scale is
    # on the working grid; the remainder collapses into the sticky bit.
    width = mb.bit_length() + 2 * n + (1 << es) + 8
    q, r = divmod(ma << width, mb)
    length = q.bit_length()
    return encode_word(
        n, es, sign,
        ea - eb - width + length - 1,
        q - (1 << (length - 1)),
        length - 1,
        1 if r else 0,
    )


def fma_words(wa: int, wb: int, wc: int, n: int, es: int) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    dc = decode_fields(wc, n, es)
    if da[0] == NAR or db[0] == NAR or dc[0] == NAR:
        return 1 << (n - 1)
    if da[0] == ZERO or db[0] == ZERO:
        return wc
    ma = (1 << da[6]) | da[5]
    mb = (1 << db[6]) | db[5]
    mp = -(ma * mb) if da[1] ^ db[1] else ma * mb
    ep = ((da[2] << es) + da[4] - da[6]) + ((db[2] << es) + db[4] - db[6])
    if dc[0] == ZERO:
        s, e = mp, ep
    else:
        mc, ec = _fields_to_signed_m_e(dc[1], dc[2], dc[4], dc[5], dc[6], es)
        e = ep if ep < ec else ec
        s = (mp << (ep - e)) + (mc << (ec - e))
    if s == 0:
        return 0
    sign = 1 if s < 0 else 0
    m = -s if sign else s
    length = m.bit_length()
    return encode_word(n, es, sign, e + length - 1, m - (1 << (length - 1)), length - 1)


# ---------------------------------------------------------------------------
# binary32 conversions
# ---------------------------------------------------------------------------

_F32_QNAN = 0x7FC00000
_F32_INF = 0x7F800000


def float_word_to_value(fword: int) -> ExactValue:
    """Exact value of a binary32 pattern; NaN and infinities become NaR."""
    exp = (fword >> 23) & 0xFF
    mant = fword & 0x7FFFFF
    sign = (fword >> 31) & 1
    if exp == 0xFF:
        return ExactValue.nar()
    if exp == 0 and mant == 0:
        return ExactValue(0, 0, ExactClass.ZERO)
    if exp == 0:
        m, e2 = mant, -149  # subnormals keep their exact value
    else:
        m, e2 = (1 << 23) | mant, exp - 150
    return ExactValue.make(-m if sign else m, e2)


def _rne_shift(m: int, shift: int):
    """Shift right with round-to-nearest-even; returns the rounded integer."""
    if shift <= 0:
        return m << -shift
    q = m >> shift
    rem = m & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if rem > half or (rem == half and (q & 1)):
        q += 1
    return q


def value_to_float_word(v: ExactValue) -> int:
    """Nearest binary32 pattern (ties to even) for an exact value."""
    if v.tag is ExactClass.NAR:
        return _F32_QNAN
    if v.tag is ExactClass.ZERO:
        return 0
    sign = 1 if v.num < 0 else 0
    m = -v.num if sign else v.num
    sbit = sign << 31
    length = m.bit_length()
    x = v.exp2 + length - 1
    if x < -126:
        q = _rne_shift(m, -(v.exp2 + 149))
        if q >= 1 << 23:  # rounded up into the normal range
            return sbit | (1 << 23) | (q - (1 << 23))
        return sbit | q
    q = _rne_shift(m, length - 24)
    if q == 1 << 24:
        q >>= 1
        x += 1
    if x > 127:
        return sbit | _F32_INF
    return sbit | ((x + 127) << 23) | (q - (1 << 23))


def float_to_posit_word(fword: int, n: int, es: int) -> int:
    return float_word_to_value(fword).round_to_word(n, es)


def posit_to_float_word(word: int, n: int, es: int) -> int:
    tag, sign, k, _, e, f, flen = decode_fields(word, n, es)
    if tag == ZERO:
        return 0
    if tag == NAR:
        return _F32_QNAN
    m = (1 << flen) | f
    return value_to_float_word(ExactValue.make(-m if sign else m, (k << es) + e - flen))


# ---------------------------------------------------------------------------
# PositBits-level API
# ---------------------------------------------------------------------------

def _common_config(*operands: PositBits) -> PositConfig:
    cfg = operands[0].config
    for p in operands[1:]:
        if p.config != cfg:
            raise ConfigMismatchError(
                f"mixed configurations: {p.config} vs {cfg}"
            )
    return cfg


def g_add(a: PositBits, b: PositBits) -> PositBits:
    cfg = _common_config(a, b)
    return PositBits(add_words(a.word, b.word, cfg.n_bits, cfg.es_bits), cfg)


def g_sub(a: PositBits, b: PositBits) -> PositBits:
    cfg = _common_config(a, b)
    return PositBits(sub_words(a.word, b.word, cfg.n_bits, cfg.es_bits), cfg)


def g_mul(a: PositBits, b: PositBits) -> PositBits:
    cfg = _common_config(a, b)
    return PositBits(mul_words(a.word, b.word, cfg.n_bits, cfg.es_bits), cfg)


def g_div(a: PositBits, b: PositBits) -> PositBits:
    cfg = _common_config(a, b)
    return PositBits(div_words(a.word, b.word, cfg.n_bits, cfg.es_bits), cfg)


def g_fma(a: PositBits, b: PositBits, c: PositBits) -> PositBits:
    """Round-to-nearest-even of the exact a*b + c with a single final rounding."""
    cfg = _common_config(a, b, c)
    return PositBits(fma_words(a.word, b.word, c.word, cfg.n_bits, cfg.es_bits), cfg)


def float_to_posit(fword: int, cfg: PositConfig) -> PositBits:
    """Nearest posit for a binary32 pattern; NaN/Inf map to NaR, overflow saturates."""
    return PositBits(float_to_posit_word(fword, cfg.n_bits, cfg.es_bits), cfg)


def posit_to_float(p: PositBits) -> int:
    """Nearest binary32 pattern for a posit; NaR maps to quiet NaN, zero to +0."""
    return posit_to_float_word(p.word, p.config.n_bits, p.config.es_bits)
