"""RISC-V posit instruction encodings and the execution-trace validator.

The arithmetic instructions are R-type on the custom-0 opcode 0001011
(0x0B); the three-source fused multiply-add lives on 0101011 with the third
source register in the upper five funct7 bits. The trace tools parse one
executed instruction per line and re-check every result against the golden
model (and, for division, against the unit datapath), also accumulating the
normalized mean error of each operation versus its binary32 counterpart.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np

from .core import NAR, ZERO, PositConfig, decode_fields
from .golden import add_words, div_words, fma_words, mul_words, posit_to_float_word, sub_words
from .unit import FppuOp, ReciprocalParams, fppu_exec

__all__ = [
    "Mnemonic",
    "Instruction",
    "assemble",
    "disassemble",
    "TraceRecord",
    "TraceSyntaxError",
    "parse_trace",
    "iter_trace",
    "format_trace_record",
    "validate_trace",
    "OpValidation",
    "ValidationReport",
]

OPCODE_ARITH = 0b0001011  # custom-0
OPCODE_FMA = 0b0101011  # custom-1


class Mnemonic(enum.Enum):
    PADD = "PADD"
    PSUB = "PSUB"
    PMUL = "PMUL"
    PDIV = "PDIV"
    PFMADD = "PFMADD"
    # Conversion encodings are not part of the published listing; the funct3
    # assignments below are a provisional extension on the same opcode.
    FCVT_P2F = "FCVT.P2F"
    FCVT_F2P = "FCVT.F2P"


# mnemonic -> (opcode, funct3, funct7); PFMADD's funct7 carries rs3.
_ENCODINGS = {
    Mnemonic.PADD: (OPCODE_ARITH, 0b000, 0b1100000),
    Mnemonic.PSUB: (OPCODE_ARITH, 0b001, 0b1101010),
    Mnemonic.PMUL: (OPCODE_ARITH, 0b010, 0b1100000),
    Mnemonic.PDIV: (OPCODE_ARITH, 0b100, 0b1100000),
    Mnemonic.FCVT_P2F: (OPCODE_ARITH, 0b011, 0b1100000),
    Mnemonic.FCVT_F2P: (OPCODE_ARITH, 0b101, 0b1100000),
}
_DECODINGS = {(op, f3, f7): m for m, (op, f3, f7) in _ENCODINGS.items()}

_SINGLE_SOURCE = (Mnemonic.FCVT_P2F, Mnemonic.FCVT_F2P)


@dataclass(frozen=True)
class Instruction:
    """R-type posit instruction; ``rs3`` is present only for PFMADD."""

    mnemonic: Mnemonic
    rd: int
    rs1: int
    rs2: int = 0
    rs3: Optional[int] = None


def _check_reg(name: str, value: int) -> None:
    if not 0 <= value <= 31:
        raise ValueError(f"{name} register index {value} out of range 0..31")


def assemble(insn: Instruction) -> int:
    """Pack an instruction into its 32-bit word."""
    _check_reg("rd", insn.rd)
    _check_reg("rs1", insn.rs1)
    _check_reg("rs2", insn.rs2)
    if insn.mnemonic is Mnemonic.PFMADD:
        if insn.rs3 is None:
            raise ValueError("PFMADD requires rs3")
        _check_reg("rs3", insn.rs3)
        opcode, funct3, funct7 = OPCODE_FMA, 0b000, insn.rs3 << 2
    else:
        if insn.rs3 is not None:
            raise ValueError(f"{insn.mnemonic.value} does not take rs3")
        if insn.mnemonic in _SINGLE_SOURCE and insn.rs2 != 0:
            raise ValueError(f"{insn.mnemonic.value} requires rs2 = 0")
        opcode, funct3, funct7 = _ENCODINGS[insn.mnemonic]
    return (
        (funct7 << 25)
        | (insn.rs2 << 20)
        | (insn.rs1 << 15)
        | (funct3 << 12)
        | (insn.rd << 7)
        | opcode
    )


def disassemble(word: int) -> Optional[Instruction]:
    """Recognize a posit instruction word; anything else returns None."""
    opcode = word & 0x7F
    funct3 = (word >> 12) & 0x7
    funct7 = (word >> 25) & 0x7F
    rd = (word >> 7) & 0x1F
    rs1 = (word >> 15) & 0x1F
    rs2 = (word >> 20) & 0x1F
    if opcode == OPCODE_FMA:
        if funct3 != 0 or funct7 & 0b11:
            return None
        return Instruction(Mnemonic.PFMADD, rd, rs1, rs2, rs3=funct7 >> 2)
    if opcode == OPCODE_ARITH:
        mnemonic = _DECODINGS.get((opcode, funct3, funct7))
        if mnemonic is None:
            return None
        if mnemonic in _SINGLE_SOURCE and rs2 != 0:
            return None
        return Instruction(mnemonic, rd, rs1, rs2)
    return None


# ---------------------------------------------------------------------------
# trace format
# ---------------------------------------------------------------------------

_TRACE_MNEMONICS = {
    "PADD": Mnemonic.PADD,
    "PSUB": Mnemonic.PSUB,
    "PMUL": Mnemonic.PMUL,
    "PDIV": Mnemonic.PDIV,
    "PFMADD": Mnemonic.PFMADD,
}

_HEX8 = re.compile(r"^0x[0-9a-fA-F]{8}$")
_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class TraceRecord:
    """One executed posit instruction with operand and result register words."""

    cycle: int
    pc: int
    insn_word: int
    mnemonic: Mnemonic
    rd_value: int
    rs1_value: int
    rs2_value: int
    rs3_value: Optional[int] = None


class TraceSyntaxError(ValueError):
    """Malformed trace line; carries 1-based line and column positions."""

    def __init__(self, message: str, lineno: int, col: int):
        super().__init__(f"line {lineno}, column {col}: {message}")
        self.lineno = lineno
        self.col = col


def _parse_hex8(token: str, what: str, lineno: int, col: int) -> int:
    if not _HEX8.match(token):
        raise TraceSyntaxError(f"{what} must be 0x followed by 8 hex digits, got {token!r}", lineno, col)
    return int(token, 16)


def parse_trace(line: str, lineno: int = 1) -> TraceRecord:
    """Parse one trace line.

    Format (space separated, LF-terminated):
    ``<cycle> <pc:0xHEX8> <insn:0xHEX8> <MNEMONIC> rd=0xHEX8 rs1=0xHEX8 rs2=0xHEX8 [rs3=0xHEX8]``
    """
    tokens = [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]
    if len(tokens) < 7:
        raise TraceSyntaxError("expected at least 7 fields", lineno, len(line.rstrip()) + 1)

    tok, col = tokens[0]
    if not tok.isdigit():
        raise TraceSyntaxError(f"cycle must be a decimal integer, got {tok!r}", lineno, col)
    cycle = int(tok)
    pc = _parse_hex8(tokens[1][0], "pc", lineno, tokens[1][1])
    insn_word = _parse_hex8(tokens[2][0], "instruction word", lineno, tokens[2][1])
    mtok, mcol = tokens[3]
    mnemonic = _TRACE_MNEMONICS.get(mtok)
    if mnemonic is None:
        raise TraceSyntaxError(f"unknown mnemonic {mtok!r}", lineno, mcol)

    want = ["rd", "rs1", "rs2"] + (["rs3"] if mnemonic is Mnemonic.PFMADD else [])
    if len(tokens) != 4 + len(want):
        raise TraceSyntaxError(
            f"{mtok} expects fields {', '.join(w + '=' for w in want)}",
            lineno,
            tokens[min(4 + len(want), len(tokens) - 1)][1],
        )
    values = {}
    for name, (tok, col) in zip(want, tokens[4:]):
        prefix = name + "="
        if not tok.startswith(prefix):
            raise TraceSyntaxError(f"expected {prefix}..., got {tok!r}", lineno, col)
        values[name] = _parse_hex8(tok[len(prefix):], name, lineno, col + len(prefix))

    insn = disassemble(insn_word)
    if insn is None or insn.mnemonic is not mnemonic:
        raise TraceSyntaxError(
            f"instruction word 0x{insn_word:08X} does not encode {mtok}", lineno, mcol
        )
    return TraceRecord(
        cycle, pc, insn_word, mnemonic,
        values["rd"], values["rs1"], values["rs2"], values.get("rs3"),
    )


def iter_trace(lines: Iterable[str]):
    """Yield records from trace text; blank and ``#`` comment lines are skipped."""
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield parse_trace(line, lineno)


def format_trace_record(rec: TraceRecord) -> str:
    line = (
        f"{rec.cycle} 0x{rec.pc:08x} 0x{rec.insn_word:08x} {rec.mnemonic.value}"
        f" rd=0x{rec.rd_value:08x} rs1=0x{rec.rs1_value:08x} rs2=0x{rec.rs2_value:08x}"
    )
    if rec.rs3_value is not None:
        line += f" rs3=0x{rec.rs3_value:08x}"
    return line


# ---------------------------------------------------------------------------
# validation against the golden model
# ---------------------------------------------------------------------------

@dataclass
class OpValidation:
    """Per-mnemonic validation counters."""

    total: int = 0
    golden_matches: int = 0
    unit_matches: int = 0  # tracked for PDIV, where the unit may differ from golden
    err_sum: float = 0.0
    err_count: int = 0
    err_excluded: int = 0
    mismatches: List[int] = field(default_factory=list)  # record indices (capped)
    mismatch_count: int = 0

    @property
    def golden_mismatches(self) -> int:
        return self.total - self.golden_matches

    @property
    def mean_error(self) -> Optional[float]:
        return self.err_sum / self.err_count if self.err_count else None


@dataclass
class ValidationReport:
    config: PositConfig
    records: int = 0
    per_op: Dict[str, OpValidation] = field(default_factory=dict)

    def op(self, mnemonic: Mnemonic) -> OpValidation:
        return self.per_op.setdefault(mnemonic.value, OpValidation())

    @property
    def exact_op_mismatches(self) -> int:
        return sum(
            v.golden_mismatches for k, v in self.per_op.items() if k != Mnemonic.PDIV.value
        )

    @property
    def div_unit_mismatches(self) -> int:
        v = self.per_op.get(Mnemonic.PDIV.value)
        return v.total - v.unit_matches if v else 0

    def ok(self) -> bool:
        """All exact ops match golden and every division matches the unit model."""
        return self.exact_op_mismatches == 0 and self.div_unit_mismatches == 0

    def to_dict(self) -> dict:
        return {
            "config": {"n_bits": self.config.n_bits, "es_bits": self.config.es_bits},
            "records": self.records,
            "ops": {
                name: {
                    "total": v.total,
                    "golden_matches": v.golden_matches,
                    "golden_mismatches": v.golden_mismatches,
                    "unit_matches": v.unit_matches if name == Mnemonic.PDIV.value else None,
                    "normalized_mean_error": v.mean_error,
                    "error_samples": v.err_count,
                    "error_excluded_zero_ref": v.err_excluded,
                    "mismatch_record_indices": v.mismatches,
                }
                for name, v in sorted(self.per_op.items())
            },
        }

    def to_text(self) -> str:
        lines = [
            f"trace validation for {self.config}: {self.records} records",
            f"{'op':8s} {'total':>8s} {'golden ok':>10s} {'mismatch':>9s} {'mean err':>12s}",
        ]
        for name, v in sorted(self.per_op.items()):
            err = f"{v.mean_error:.3e}" if v.mean_error is not None else "-"
            lines.append(
                f"{name:8s} {v.total:8d} {v.golden_matches:10d} {v.golden_mismatches:9d} {err:>12s}"
            )
            if name == Mnemonic.PDIV.value:
                lines.append(
                    f"{'':8s} unit-model matches: {v.unit_matches}/{v.total}"
                )
        status = "OK" if self.ok() else "MISMATCH"
        lines.append(f"result: {status}")
        return "\n".join(lines)


_GOLD_BY_MNEMONIC = {
    Mnemonic.PADD: add_words,
    Mnemonic.PSUB: sub_words,
    Mnemonic.PMUL: mul_words,
    Mnemonic.PDIV: div_words,
}

_F32_OP = {
    Mnemonic.PADD: lambda a, b, c: a + b,
    Mnemonic.PSUB: lambda a, b, c: a - b,
    Mnemonic.PMUL: lambda a, b, c: a * b,
    Mnemonic.PDIV: lambda a, b, c: np.divide(a, b),
}


def _posit_word_to_float(word: int, n: int, es: int) -> float:
    """Exact float64 of a posit word; NaR becomes NaN."""
    tag, sign, k, _, e, f, flen = decode_fields(word, n, es)
    if tag == ZERO:
        return 0.0
    if tag == NAR:
        return math.nan
    m = (1 << flen) | f
    v = math.ldexp(m, (k << es) + e - flen)
    return -v if sign else v


def _f32_from_word(word: int) -> np.float32:
    return np.uint32(word).view(np.float32)


def validate_trace(
    records: Iterable[TraceRecord],
    cfg: PositConfig,
    params: Optional[ReciprocalParams] = None,
    max_logged_mismatches: int = 16,
) -> ValidationReport:
    """Re-execute every traced instruction and compare against the golden model.

    Division results are additionally compared against the unit datapath,
    whose approximate reciprocal legitimately misses the correctly rounded
    quotient in a bounded fraction of cases. The normalized mean error
    accumulates |r_posit - r_binary32| / |r_binary32| per operation, where the
    binary32 result is the same operation applied to the binary32 images of
    the traced operands; pairs with a zero reference are counted but excluded.
    """
    n, es = cfg.n_bits, cfg.es_bits
    mask = (1 << n) - 1
    params = params or ReciprocalParams.for_config(cfg)
    report = ValidationReport(cfg)
    err = np.seterr(all="ignore")
    try:
        for idx, rec in enumerate(records):
            report.records += 1
            ops = report.op(rec.mnemonic)
            ops.total += 1
            a, b = rec.rs1_value & mask, rec.rs2_value & mask
            rd = rec.rd_value & mask
            if rec.mnemonic is Mnemonic.PFMADD:
                c = (rec.rs3_value or 0) & mask
                want = fma_words(a, b, c, n, es)
            else:
                c = 0
                want = _GOLD_BY_MNEMONIC[rec.mnemonic](a, b, n, es)
            if rd == want:
                ops.golden_matches += 1
            else:
                ops.mismatch_count += 1
                if len(ops.mismatches) < max_logged_mismatches:
                    ops.mismatches.append(idx)
            if rec.mnemonic is Mnemonic.PDIV:
                unit = fppu_exec(FppuOp.PDIV, a, b, 0, cfg, params)
                if rd == unit:
                    ops.unit_matches += 1

            fa = np.float32(_f32_from_word(posit_to_float_word(a, n, es)))
            fb = np.float32(_f32_from_word(posit_to_float_word(b, n, es)))
            if rec.mnemonic is Mnemonic.PFMADD:
                fc = np.float32(_f32_from_word(posit_to_float_word(c, n, es)))
                rf = np.float32(np.float64(fa) * np.float64(fb) + np.float64(fc))
            else:
                rf = np.float32(_F32_OP[rec.mnemonic](fa, fb, None))
            rp = _posit_word_to_float(rd, n, es)
            if not np.isfinite(rf) or math.isnan(rp):
                ops.err_excluded += 1
            elif float(rf) == 0.0:
                ops.err_excluded += 1
            else:
                ops.err_sum += abs((rp - float(rf)) / float(rf))
                ops.err_count += 1
    finally:
        np.seterr(**err)
    return report
