"""Posit bit-level core: configuration, decoding, exact values, rounding encoder.

A posit<N,ES> is stored as its N-bit two's-complement pattern in a plain
integer. Decoding splits a pattern into sign / regime / exponent / fraction,
the floating intermediate record (:class:`Fir`) carries a sign, an unbiased
total exponent ``te = 2^ES*k + e`` and a left-aligned fraction between
datapath stages, and :func:`encode_round` folds a Fir back into the nearest
representable posit with round-to-nearest-even.

All functions here are pure; the dataclasses are value objects.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

__all__ = [
    "PositClass",
    "PositConfig",
    "PositBits",
    "DecodedPosit",
    "Fir",
    "decode",
    "real_value",
    "real_value_alt",
    "to_fir",
    "encode_round",
    "encode_round_explain",
    "negate",
    "compare",
]

# Internal class tags (ints: cheaper than enum members in sweep loops).
NORMAL = 0
ZERO = 1
NAR = 2


class PositClass(enum.Enum):
    """Classification of a posit pattern."""

    ZERO = "zero"
    NAR = "nar"
    NORMAL = "normal"


_CLASS_FROM_TAG = {NORMAL: PositClass.NORMAL, ZERO: PositClass.ZERO, NAR: PositClass.NAR}


@dataclass(frozen=True)
class PositConfig:
    """Posit format parameters: total width ``n_bits``, max exponent width ``es_bits``."""

    n_bits: int
    es_bits: int

    def __post_init__(self):
        if not 3 <= self.n_bits <= 32:
            raise ValueError(f"n_bits must be in [3, 32], got {self.n_bits}")
        if not 0 <= self.es_bits <= 4:
            raise ValueError(f"es_bits must be in [0, 4], got {self.es_bits}")
        if self.n_bits < self.es_bits + 2:
            raise ValueError("n_bits must be at least es_bits + 2")

    @property
    def useed(self) -> int:
        """Regime scale base 2^(2^ES); exact integer for every allowed ES."""
        return 1 << (1 << self.es_bits)

    @property
    def mask(self) -> int:
        return (1 << self.n_bits) - 1

    @property
    def sign_bit(self) -> int:
        return 1 << (self.n_bits - 1)

    @property
    def nar_word(self) -> int:
        """The single exception pattern, -2^(N-1) in two's complement."""
        return 1 << (self.n_bits - 1)

    @property
    def maxpos_word(self) -> int:
        return (1 << (self.n_bits - 1)) - 1

    @property
    def minpos_word(self) -> int:
        return 1

    @property
    def fir_frac_width(self) -> int:
        # Smallest working width that keeps any single two-operand result
        # plus guard/round/sticky information intact.
        return 2 * (self.n_bits - 1) + 3

    def __str__(self):
        return f"posit<{self.n_bits},{self.es_bits}>"


@dataclass(frozen=True)
class PositBits:
    """An N-bit posit pattern tied to its configuration."""

    word: int
    config: PositConfig

    def __post_init__(self):
        if self.word & ~self.config.mask:
            raise ValueError(
                f"pattern 0x{self.word:x} does not fit in {self.config.n_bits} bits"
            )

    @property
    def pclass(self) -> PositClass:
        if self.word == 0:
            return PositClass.ZERO
        if self.word == self.config.nar_word:
            return PositClass.NAR
        return PositClass.NORMAL

    def is_zero(self) -> bool:
        return self.word == 0

    def is_nar(self) -> bool:
        return self.word == self.config.nar_word

    def __str__(self):
        return f"0x{self.word:0{(self.config.n_bits + 3) // 4}X}"


@dataclass
class DecodedPosit:
    """Field-level view of a posit pattern.

    For ``NORMAL`` patterns of negative sign the fields describe the two's
    complement of the pattern, with the sign kept separately. For ``ZERO`` /
    ``NAR`` the numeric fields are meaningless and zeroed.
    """

    pclass: PositClass
    sign: int = 0
    regime_k: int = 0
    regime_len: int = 0
    exponent: int = 0  # zero-padded to full ES weight when truncated
    frac: int = 0
    frac_len: int = 0

    def total_exponent(self, cfg: PositConfig) -> int:
        return (self.regime_k << cfg.es_bits) + self.exponent


@dataclass
class Fir:
    """Floating intermediate record: value = (-1)^sign * 2^te * (1 + frac/2^frac_width).

    ``sticky_in`` flags information already discarded to the right of the
    fraction (the value is then strictly above the recorded one). There is
    always an implicit leading one; no NaN/Inf/subnormals exist here.
    """

    sign: int
    te: int
    frac: int
    frac_width: int
    sticky_in: int = 0


# ---------------------------------------------------------------------------
# word-level fast paths (plain ints; shared by the golden model and the unit)
# ---------------------------------------------------------------------------

def decode_word(word: int, n: int, es: int):
    """Decode an N-bit pattern into ``(tag, sign, k, regime_len, e, f, frac_len)``.

    ``tag`` is one of the module constants NORMAL/ZERO/NAR. ``e`` is already
    zero-padded to full ES weight when the regime truncates the exponent field.
    """
    if word == 0:
        return (ZERO, 0, 0, 0, 0, 0, 0)
    if word == 1 << (n - 1):
        return (NAR, 0, 0, 0, 0, 0, 0)
    sign = (word >> (n - 1)) & 1
    mag = (-word) & ((1 << n) - 1) if sign else word
    w = n - 1
    field = mag & ((1 << w) - 1)
    b = (field >> (w - 1)) & 1
    probe = (~field & ((1 << w) - 1)) if b else field
    run = w - probe.bit_length() if probe else w
    k = (run - 1) if b else -run
    rem = w - run - 1 if run < w else 0
    es_avail = es if es < rem else rem
    frac_len = rem - es_avail
    e_raw = (field >> frac_len) & ((1 << es_avail) - 1)
    e = e_raw << (es - es_avail)
    f = field & ((1 << frac_len) - 1)
    return (NORMAL, sign, k, run, e, f, frac_len)


@lru_cache(maxsize=None)
def _decode_table(n: int, es: int):
    """All decodes for an N<=16 format, indexed by pattern."""
    return tuple(decode_word(word, n, es) for word in range(1 << n))


def decode_fields(word: int, n: int, es: int):
    """Table-backed :func:`decode_word` for small widths."""
    if n <= 16:
        return _decode_table(n, es)[word]
    return decode_word(word, n, es)


def _negate_word(word: int, n: int) -> int:
    return (-word) & ((1 << n) - 1)


def _apply_sign(body: int, sign: int, n: int) -> int:
    return (-body) & ((1 << n) - 1) if sign else body


def _posit_m_e(word: int, n: int, es: int):
    """Magnitude of a NORMAL pattern as (m, e2) with value m * 2^e2 (m >= 1)."""
    _, _, k, _, e, f, flen = decode_fields(word, n, es)
    te = (k << es) + e
    return (1 << flen) | f, te - flen


def encode_word(n, es, sign, te, frac, frac_width, sticky=0, info=None):
    """Round a normalized significand ``1.frac * 2^te`` into an N-bit pattern.

    Round-to-nearest-even. The regime is clipped with saturation to
    maxpos/minpos; rounding never yields zero or NaR. Guard/round/sticky
    handle fraction truncation; when the regime truncates exponent bits the
    decision falls back to an exact comparison against the midpoint of the
    two neighbouring posits (the gap is no longer uniform there).

    Correct rounding is guaranteed when ``sticky`` is 0 or ``frac_width`` is
    at least n - 1 + 2^es + 2; narrower sticky inputs (approximate datapaths)
    may round off by one ulp.
    """
    maxpos_body = (1 << (n - 1)) - 1
    k = te >> es
    if k > n - 2:
        if info is not None:
            info.update(path="saturate-high", k=k)
        return _apply_sign(maxpos_body, sign, n)
    if k < -(n - 2):
        if info is not None:
            info.update(path="saturate-low", k=k)
        return _apply_sign(1, sign, n)

    e = te - (k << es)
    w = n - 1
    if k >= 0:
        run = k + 1
        regime = ((1 << run) - 1) << 1 if run + 1 <= w else (1 << w) - 1
        r_len = run + 1 if run + 1 <= w else w
    else:
        r_len = -k + 1
        regime = 1
    rem = w - r_len
    es_avail = es if es < rem else rem
    f_avail = rem - es_avail

    e_drop_bits = es - es_avail
    e_keep = e >> e_drop_bits
    e_drop = e & ((1 << e_drop_bits) - 1)
    if frac_width >= f_avail:
        d = frac_width - f_avail
        f_keep = frac >> d
        f_drop = frac & ((1 << d) - 1)
    else:
        d = 0
        f_keep = frac << (f_avail - frac_width)
        f_drop = 0

    body = (regime << rem) | (e_keep << f_avail) | f_keep

    if not (e_drop or f_drop or sticky):
        if info is not None:
            info.update(path="exact", k=k, e=e, body=body)
        return _apply_sign(body, sign, n)

    if e_drop_bits == 0:
        # Dropped bits are pure fraction: the gap between body and body+1 is
        # one uniform ulp, so plain guard/round/sticky decides.
        if d > 0:
            r_bit = (f_drop >> (d - 1)) & 1
            s_bit = 1 if (f_drop & ((1 << (d - 1)) - 1)) or sticky else 0
        else:
            r_bit, s_bit = 0, 1 if sticky else 0
        g_bit = body & 1
        round_up = r_bit and (s_bit or g_bit)
        if info is not None:
            info.update(path="grs", k=k, e=e, body=body, guard=g_bit, round=r_bit, sticky=s_bit)
        if round_up and body != maxpos_body:
            body += 1
        return _apply_sign(body, sign, n)

    # Regime truncated the exponent field: neighbouring posits may sit whole
    # binades apart, so compare the value against the exact midpoint.
    if body == maxpos_body:
        if info is not None:
            info.update(path="saturate-high", k=k)
        return _apply_sign(body, sign, n)
    lo_m, lo_e = _posit_m_e(body, n, es)
    hi_m, hi_e = _posit_m_e(body + 1, n, es)
    mid_e = lo_e if lo_e < hi_e else hi_e
    mid2_m = (lo_m << (lo_e - mid_e)) + (hi_m << (hi_e - mid_e))  # 2*midpoint
    v_m = (1 << frac_width) | frac
    v_e = te - frac_width
    shift = (v_e + 1) - mid_e
    if shift >= 0:
        cmp = (v_m << shift) - mid2_m
    else:
        cmp = v_m - (mid2_m << -shift)
    if info is not None:
        info.update(path="midpoint", k=k, e=e, body=body, cmp=cmp, sticky=sticky)
    if cmp > 0 or (cmp == 0 and sticky):
        body += 1
    elif cmp == 0:
        body += body & 1  # tie: choose the even pattern
    return _apply_sign(body, sign, n)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def decode(bits: PositBits) -> DecodedPosit:
    """Split a pattern into its fields; every N-bit pattern is a valid posit."""
    cfg = bits.config
    tag, sign, k, run, e, f, flen = decode_word(bits.word, cfg.n_bits, cfg.es_bits)
    return DecodedPosit(_CLASS_FROM_TAG[tag], sign, k, run, e, f, flen)


def real_value(bits: PositBits) -> Optional[Fraction]:
    """Exact value of a pattern; Fraction(0) for zero, None for NaR."""
    cfg = bits.config
    tag, sign, k, _, e, f, flen = decode_word(bits.word, cfg.n_bits, cfg.es_bits)
    if tag == ZERO:
        return Fraction(0)
    if tag == NAR:
        return None
    m = (1 << flen) | f
    e2 = (k << cfg.es_bits) + e - flen
    v = Fraction(m << e2, 1) if e2 >= 0 else Fraction(m, 1 << -e2)
    return -v if sign else v


def real_value_alt(bits: PositBits) -> Fraction:
    """Exact value via the sign-folded closed form on the raw (uncomplemented) fields.

    ``r = (1 - 3s + f/2^F) * 2^((1-2s) * (2^ES*k + e + s))``, with regime,
    exponent and fraction read straight from the stored pattern. Rejects
    zero/NaR.
    """
    cfg = bits.config
    n, es = cfg.n_bits, cfg.es_bits
    word = bits.word
    if word == 0 or word == cfg.nar_word:
        raise ValueError("value form is defined for normal patterns only")
    s = (word >> (n - 1)) & 1
    w = n - 1
    field = word & ((1 << w) - 1)
    b = (field >> (w - 1)) & 1
    probe = (~field & ((1 << w) - 1)) if b else field
    run = w - probe.bit_length() if probe else w
    k = (run - 1) if b else -run
    rem = w - run - 1 if run < w else 0
    es_avail = es if es < rem else rem
    flen = rem - es_avail
    e = ((field >> flen) & ((1 << es_avail) - 1)) << (es - es_avail)
    f = field & ((1 << flen) - 1)

    mant = Fraction(1 - 3 * s) + Fraction(f, 1 << flen)
    exp = (1 - 2 * s) * ((k << es) + e + s)
    scale = Fraction(1 << exp, 1) if exp >= 0 else Fraction(1, 1 << -exp)
    return mant * scale


def to_fir(d: DecodedPosit, cfg: PositConfig) -> Fir:
    """Lossless field-to-FIR transform; callers handle zero/NaR beforehand."""
    if d.pclass is not PositClass.NORMAL:
        raise ValueError(f"cannot build a FIR from a {d.pclass.value} posit")
    width = cfg.fir_frac_width
    return Fir(
        sign=d.sign,
        te=(d.regime_k << cfg.es_bits) + d.exponent,
        frac=d.frac << (width - d.frac_len),
        frac_width=width,
        sticky_in=0,
    )


def encode_round(f: Fir, cfg: PositConfig) -> PositBits:
    """Encode a FIR into the nearest posit (ties to even, saturating clip)."""
    word = encode_word(
        cfg.n_bits, cfg.es_bits, f.sign, f.te, f.frac, f.frac_width, f.sticky_in
    )
    return PositBits(word, cfg)


def encode_round_explain(f: Fir, cfg: PositConfig):
    """Like :func:`encode_round` but also returns the rounding decision trail."""
    info: dict = {}
    word = encode_word(
        cfg.n_bits, cfg.es_bits, f.sign, f.te, f.frac, f.frac_width, f.sticky_in, info
    )
    return PositBits(word, cfg), info


def negate(bits: PositBits) -> PositBits:
    """Two's complement of the pattern; zero and NaR map to themselves."""
    return PositBits(_negate_word(bits.word, bits.config.n_bits), bits.config)


def compare(a: PositBits, b: PositBits) -> int:
    """Order two posits as N-bit signed integers: -1, 0 or 1.

    Signed-pattern order matches real-value order, with NaR below everything.
    """
    if a.config != b.config:
        raise ValueError("cannot compare posits of different configurations")
    n = a.config.n_bits
    sa = a.word - (1 << n) if a.word & (1 << (n - 1)) else a.word
    sb = b.word - (1 << n) if b.word & (1 << (n - 1)) else b.word
    return (sa > sb) - (sa < sb)
