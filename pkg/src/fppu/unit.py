"""Software model of the pipelined full posit processing unit.

Three logical stages: decode/input conditioning, computation, and
normalization/encoding. Add, subtract, multiply and fused multiply-add keep
exact significands through the intermediate record, so they are bit-identical
to the golden model. Division multiplies by a fixed-point reciprocal
approximation (two multiplies plus a shift, then Newton-Raphson refinement)
and may differ from the correctly rounded result in a small fraction of
cases. A cycle-level wrapper models the valid_in/valid_out handshake, and a
lane splitter packs several narrow posits into one 32-bit register.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .core import NAR, NORMAL, ZERO, PositConfig, decode_fields, encode_word
from .golden import float_to_posit_word, posit_to_float_word

__all__ = [
    "FppuOp",
    "ReciprocalParams",
    "PipelineState",
    "FppuPipeline",
    "recip_approx",
    "recip_approx_fixed",
    "nr_refine",
    "nr_refine_fixed",
    "fppu_exec",
    "simd_exec",
    "pack_lanes",
    "unpack_lanes",
]

DEFAULT_K1 = 1.4567844114901045
DEFAULT_K2 = 1.0009290026616422


class FppuOp(enum.Enum):
    """Operations the unit executes; one per ISA mnemonic plus conversions."""

    PADD = "padd"
    PSUB = "psub"
    PMUL = "pmul"
    PDIV = "pdiv"
    PFMADD = "pfmadd"
    FCVT_P2F = "fcvt_p2f"
    FCVT_F2P = "fcvt_f2p"


@dataclass(frozen=True)
class ReciprocalParams:
    """Constants and fixed-point width of the reciprocal approximation stage."""

    k1: float = DEFAULT_K1
    k2: float = DEFAULT_K2
    nr_rounds: int = 1
    frac_width: int = 32

    def __post_init__(self):
        if self.nr_rounds < 0:
            raise ValueError("nr_rounds must be >= 0")
        if self.frac_width < 4:
            raise ValueError("frac_width must be at least 4")

    @classmethod
    def for_config(cls, cfg: PositConfig, nr_rounds: int = 1) -> "ReciprocalParams":
        # Default internal width: twice the posit width.
        return cls(nr_rounds=nr_rounds, frac_width=2 * cfg.n_bits)


# ---------------------------------------------------------------------------
# reciprocal approximation (fixed point)
# ---------------------------------------------------------------------------

def recip_approx_fixed(x_fx: int, params: ReciprocalParams) -> int:
    """Reciprocal estimate for ``x = x_fx / 2^frac_width`` in [0.5, 1].

    Computes ``4*(k2 - x*(k1 - x))*(k1 - x)`` with two truncating fixed-point
    multiplies and a left shift. Input and output carry ``frac_width``
    fractional bits.
    """
    w = params.frac_width
    one = 1 << w
    if not one // 2 <= x_fx <= one:
        raise ValueError("reciprocal input must lie in [0.5, 1]")
    k1 = round(params.k1 * one)
    k2 = round(params.k2 * one)
    b = k1 - x_fx
    c = (x_fx * b) >> w
    d = k2 - c
    e = (d * b) >> w
    return e << 2


def nr_refine_fixed(x_fx: int, y_fx: int, width: int) -> int:
    """One Newton-Raphson reciprocal step ``y*(2 - x*y)`` at ``width`` fractional bits."""
    two = 2 << width
    t = (x_fx * y_fx) >> width
    return (y_fx * (two - t)) >> width


def recip_approx(x: float, params: Optional[ReciprocalParams] = None) -> float:
    """Float view of the fixed-point reciprocal estimate of ``x`` in [0.5, 1]."""
    params = params or ReciprocalParams()
    if not 0.5 <= x <= 1.0:
        raise ValueError("reciprocal input must lie in [0.5, 1]")
    w = params.frac_width
    return recip_approx_fixed(round(x * (1 << w)), params) / (1 << w)


def nr_refine(x: float, y: float, width: int = 32) -> float:
    """Float view of one fixed-point Newton-Raphson step refining y toward 1/x."""
    return nr_refine_fixed(round(x * (1 << width)), round(y * (1 << width)), width) / (
        1 << width
    )


# ---------------------------------------------------------------------------
# combinational datapath
# ---------------------------------------------------------------------------

def _exec_add(wa: int, wb: int, n: int, es: int, sub: bool) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    if da[0] == NAR or db[0] == NAR:
        return 1 << (n - 1)
    if db[0] == ZERO:
        return wa
    if da[0] == ZERO:
        return (-wb) & ((1 << n) - 1) if sub else wb
    sa, sb = da[1], db[1]
    if sub:
        sb ^= 1  # subtraction is addition with the second sign flipped
    ma = (1 << da[6]) | da[5]
    mb = (1 << db[6]) | db[5]
    ea = (da[2] << es) + da[4] - da[6]
    eb = (db[2] << es) + db[4] - db[6]
    e = ea if ea < eb else eb
    s = ((-ma if sa else ma) << (ea - e)) + ((-mb if sb else mb) << (eb - e))
    if s == 0:
        return 0
    sign = 1 if s < 0 else 0
    m = -s if sign else s
    length = m.bit_length()
    return encode_word(n, es, sign, e + length - 1, m - (1 << (length - 1)), length - 1)


def _exec_mul(wa: int, wb: int, n: int, es: int) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    if da[0] == NAR or db[0] == NAR:
        return 1 << (n - 1)
    if da[0] == ZERO or db[0] == ZERO:
        return 0
    m = ((1 << da[6]) | da[5]) * ((1 << db[6]) | db[5])
    e = ((da[2] << es) + da[4] - da[6]) + ((db[2] << es) + db[4] - db[6])
    length = m.bit_length()
    return encode_word(
        n, es, da[1] ^ db[1], e + length - 1, m - (1 << (length - 1)), length - 1
    )


def _exec_fma(wa: int, wb: int, wc: int, n: int, es: int) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    dc = decode_fields(wc, n, es)
    if da[0] == NAR or db[0] == NAR or dc[0] == NAR:
        return 1 << (n - 1)
    if da[0] == ZERO or db[0] == ZERO:
        return wc
    mp = ((1 << da[6]) | da[5]) * ((1 << db[6]) | db[5])
    if da[1] ^ db[1]:
        mp = -mp
    ep = ((da[2] << es) + da[4] - da[6]) + ((db[2] << es) + db[4] - db[6])
    if dc[0] == ZERO:
        s, e = mp, ep
    else:
        mc = (1 << dc[6]) | dc[5]
        if dc[1]:
            mc = -mc
        ec = (dc[2] << es) + dc[4] - dc[6]
        e = ep if ep < ec else ec
        s = (mp << (ep - e)) + (mc << (ec - e))
    if s == 0:
        return 0
    sign = 1 if s < 0 else 0
    m = -s if sign else s
    length = m.bit_length()
    return encode_word(n, es, sign, e + length - 1, m - (1 << (length - 1)), length - 1)


def _exec_div(wa: int, wb: int, n: int, es: int, params: ReciprocalParams) -> int:
    da = decode_fields(wa, n, es)
    db = decode_fields(wb, n, es)
    if da[0] == NAR or db[0] == NAR or db[0] == ZERO:
        return 1 << (n - 1)
    if da[0] == ZERO:
        return 0
    w = params.frac_width
    # Divisor significand 1.f2 in [1,2) maps to x = 1.f2/2 in [0.5,1) and the
    # divisor exponent gains one.
    x_fx = ((1 << db[6]) | db[5]) << (w - db[6] - 1)
    y_fx = recip_approx_fixed(x_fx, params)
    for _ in range(params.nr_rounds):
        y_fx = nr_refine_fixed(x_fx, y_fx, w)
    te = ((da[2] << es) + da[4]) - ((db[2] << es) + db[4]) - 1
    # Final multiply: product of 1.f1 (w fractional bits) and y in (1, 2].
    sig = (((1 << da[6]) | da[5]) << (w - da[6])) * y_fx  # 2w fractional bits
    length = sig.bit_length()
    te += length - 1 - 2 * w
    # Keep w+2 significand bits; the rest collapses into sticky.
    keep = w + 2
    if length > keep:
        drop = length - keep
        sticky = 1 if sig & ((1 << drop) - 1) else 0
        sig >>= drop
        length = keep
    else:
        sticky = 0
    return encode_word(
        n, es, da[1] ^ db[1], te, sig - (1 << (length - 1)), length - 1, sticky
    )


def fppu_exec(
    op: FppuOp,
    a: int,
    b: int = 0,
    c: int = 0,
    cfg: Optional[PositConfig] = None,
    params: Optional[ReciprocalParams] = None,
) -> int:
    """Combinational (un-pipelined) result of the unit datapath on raw words.

    ``a``/``b``/``c`` are posit patterns, except for FCVT_F2P where ``a`` is a
    binary32 word. FCVT_P2F returns a binary32 word.
    """
    if cfg is None:
        raise ValueError("a posit configuration is required")
    n, es = cfg.n_bits, cfg.es_bits
    if op is FppuOp.PADD:
        return _exec_add(a, b, n, es, sub=False)
    if op is FppuOp.PSUB:
        return _exec_add(a, b, n, es, sub=True)
    if op is FppuOp.PMUL:
        return _exec_mul(a, b, n, es)
    if op is FppuOp.PDIV:
        return _exec_div(a, b, n, es, params or ReciprocalParams.for_config(cfg))
    if op is FppuOp.PFMADD:
        return _exec_fma(a, b, c, n, es)
    if op is FppuOp.FCVT_P2F:
        return posit_to_float_word(a, n, es)
    if op is FppuOp.FCVT_F2P:
        return float_to_posit_word(a, n, es)
    raise ValueError(f"unknown operation: {op!r}")


# ---------------------------------------------------------------------------
# cycle-level pipeline model
# ---------------------------------------------------------------------------

@dataclass
class _StageReg:
    op: FppuOp
    a: int
    b: int
    c: int
    result: int


@dataclass
class PipelineState:
    """In-flight operations, one register per stage; None is a bubble."""

    latency: int = 3
    stage_regs: List[Optional[_StageReg]] = field(default_factory=list)

    def __post_init__(self):
        if self.latency < 1:
            raise ValueError("latency must be >= 1")
        if not self.stage_regs:
            self.stage_regs = [None] * self.latency
        if len(self.stage_regs) != self.latency:
            raise ValueError("stage register count must equal the latency")


class FppuPipeline:
    """Clocked wrapper: accepts one operation per cycle, results after `latency` cycles.

    Single-owner mutable state; do not clock one instance from two threads.
    """

    def __init__(
        self,
        cfg: PositConfig,
        latency: int = 3,
        params: Optional[ReciprocalParams] = None,
    ):
        self.cfg = cfg
        self.params = params or ReciprocalParams.for_config(cfg)
        self.state = PipelineState(latency=latency)

    def clock(
        self,
        valid_in: int,
        op: Optional[FppuOp] = None,
        a: int = 0,
        b: int = 0,
        c: int = 0,
    ) -> Tuple[int, int]:
        """Advance one cycle; returns (valid_out, result word).

        A newly accepted operation appears on the output exactly ``latency``
        clock calls later; back-to-back issue every cycle is supported.
        """
        regs = self.state.stage_regs
        out = regs[-1]
        if valid_in:
            if op is None:
                raise ValueError("valid_in requires an operation")
            entry = _StageReg(op, a, b, c, fppu_exec(op, a, b, c, self.cfg, self.params))
        else:
            entry = None
        self.state.stage_regs = [entry] + regs[:-1]
        if out is None:
            return 0, 0
        return 1, out.result


# ---------------------------------------------------------------------------
# packed lanes
# ---------------------------------------------------------------------------

def unpack_lanes(packed: int, n_bits: int) -> Tuple[int, ...]:
    """Split a 32-bit register into independent lanes, lane 0 at the LSB."""
    lanes = 32 // n_bits
    mask = (1 << n_bits) - 1
    return tuple((packed >> (i * n_bits)) & mask for i in range(lanes))


def pack_lanes(words, n_bits: int) -> int:
    lanes = 32 // n_bits
    if len(words) != lanes:
        raise ValueError(f"expected {lanes} lanes of {n_bits} bits")
    mask = (1 << n_bits) - 1
    packed = 0
    for i, w in enumerate(words):
        packed |= (w & mask) << (i * n_bits)
    return packed


def simd_exec(
    op: FppuOp,
    packed_a: int,
    packed_b: int,
    cfg: PositConfig,
    packed_c: int = 0,
    params: Optional[ReciprocalParams] = None,
) -> int:
    """Lane-wise unit execution over a packed 32-bit register pair.

    Four 8-bit or two 16-bit lanes; lanes are fully independent (no carries
    cross a lane boundary). The 32-bit format has a single lane and belongs
    on the scalar path.
    """
    if cfg.n_bits not in (8, 16):
        raise ValueError("packed execution requires an 8- or 16-bit posit format")
    if op in (FppuOp.FCVT_P2F, FppuOp.FCVT_F2P):
        raise ValueError("conversions operate on full 32-bit registers")
    params = params or ReciprocalParams.for_config(cfg)
    n = cfg.n_bits
    out = 0
    for i, (la, lb, lc) in enumerate(
        zip(unpack_lanes(packed_a, n), unpack_lanes(packed_b, n), unpack_lanes(packed_c, n))
    ):
        out |= fppu_exec(op, la, lb, lc, cfg, params) << (i * n)
    return out
