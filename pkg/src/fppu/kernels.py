"""Linear-algebra benchmark kernels run through the posit unit model.

Each kernel executes twice on identical inputs: once elementwise through the
posit datapath and once in binary32. Every posit operation is also scored
locally against its binary32 counterpart (same operands, binary32 images)
and the normalized mean error |r_p - r_f| / |r_f| is accumulated per
operation kind, excluding pairs with a zero reference. Loop order is pinned
(row major, innermost accumulation) so results are bit-reproducible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .core import NAR, ZERO, PositConfig, decode_fields
from .golden import float_to_posit_word, posit_to_float_word
from .unit import FppuOp, ReciprocalParams, fppu_exec

__all__ = [
    "KernelKind",
    "InputDistribution",
    "KernelSpec",
    "OpError",
    "ErrorReport",
    "KernelResult",
    "run_kernel",
    "error_table",
]


class KernelKind(enum.Enum):
    GEMM = "gemm"
    CONV3X3 = "conv3x3"
    AVGPOOL4X4 = "avgpool4x4"


class InputDistribution(enum.Enum):
    UNIFORM_UNIT = "unit"  # [0, 1)
    UNIFORM_SYM = "sym"  # (-1, 1)


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    size: int = 32
    seed: int = 0
    distribution: InputDistribution = InputDistribution.UNIFORM_UNIT

    def __post_init__(self):
        if self.kind is KernelKind.AVGPOOL4X4 and self.size < 4:
            raise ValueError("pooling requires size >= 4")
        if self.kind is KernelKind.CONV3X3 and self.size < 3:
            raise ValueError("3x3 convolution requires size >= 3")
        if self.size < 1:
            raise ValueError("size must be positive")


@dataclass
class OpError:
    """Normalized mean error accumulator for one operation kind."""

    err_sum: float = 0.0
    count: int = 0
    excluded_zero_ref: int = 0

    @property
    def mean(self) -> float:
        return self.err_sum / self.count if self.count else 0.0


@dataclass
class ErrorReport:
    """Per-operation normalized mean errors; only exercised ops appear."""

    ops: Dict[str, OpError] = field(default_factory=dict)

    def record(self, kind: str, r_p: float, r_f: float) -> None:
        entry = self.ops.setdefault(kind, OpError())
        if r_f == 0.0 or math.isnan(r_f) or math.isinf(r_f) or math.isnan(r_p):
            entry.excluded_zero_ref += 1
            return
        entry.err_sum += abs((r_p - r_f) / r_f)
        entry.count += 1

    def mean(self, kind: str) -> Optional[float]:
        entry = self.ops.get(kind)
        return entry.mean if entry else None

    def to_dict(self) -> dict:
        return {
            kind: {
                "normalized_mean_error": entry.mean,
                "samples": entry.count,
                "excluded_zero_ref": entry.excluded_zero_ref,
            }
            for kind, entry in sorted(self.ops.items())
        }


# ---------------------------------------------------------------------------
# execution engines
# ---------------------------------------------------------------------------

class _Binary32Engine:
    """Reference engine: plain binary32 elementwise arithmetic."""

    name = "binary32"

    def convert(self, x: np.float32):
        return np.float32(x)

    def mul(self, a, b):
        return np.float32(a * b)

    def add(self, a, b):
        return np.float32(a + b)

    def div(self, a, b):
        return np.float32(a / b)

    def value(self, h) -> float:
        return float(h)

    def f32(self, h) -> np.float32:
        return h


class _PositEngine:
    """Posit engine: operands are posit words run through the unit datapath."""

    name = "posit"

    def __init__(self, cfg: PositConfig, params: Optional[ReciprocalParams] = None):
        self.cfg = cfg
        self.params = params or ReciprocalParams.for_config(cfg)

    def convert(self, x: np.float32):
        return float_to_posit_word(int(np.float32(x).view(np.uint32)), self.cfg.n_bits, self.cfg.es_bits)

    def mul(self, a, b):
        return fppu_exec(FppuOp.PMUL, a, b, 0, self.cfg, self.params)

    def add(self, a, b):
        return fppu_exec(FppuOp.PADD, a, b, 0, self.cfg, self.params)

    def div(self, a, b):
        return fppu_exec(FppuOp.PDIV, a, b, 0, self.cfg, self.params)

    def value(self, h) -> float:
        tag, sign, k, _, e, f, flen = decode_fields(h, self.cfg.n_bits, self.cfg.es_bits)
        if tag == ZERO:
            return 0.0
        if tag == NAR:
            return math.nan
        v = math.ldexp((1 << flen) | f, (k << self.cfg.es_bits) + e - flen)
        return -v if sign else v

    def f32(self, h) -> np.float32:
        return np.uint32(posit_to_float_word(h, self.cfg.n_bits, self.cfg.es_bits)).view(np.float32)


class _ScoredEngine:
    """Wraps an engine, scoring each op against its local binary32 counterpart."""

    _F32 = {
        "mul": lambda a, b: np.float32(a * b),
        "add": lambda a, b: np.float32(a + b),
        "div": lambda a, b: np.float32(a / b),
    }

    def __init__(self, engine, report: ErrorReport):
        self.engine = engine
        self.report = report

    def convert(self, x):
        return self.engine.convert(x)

    def _op(self, kind, a, b):
        r = getattr(self.engine, kind)(a, b)
        r_f = self._F32[kind](self.engine.f32(a), self.engine.f32(b))
        self.report.record(kind, self.engine.value(r), float(r_f))
        return r

    def mul(self, a, b):
        return self._op("mul", a, b)

    def add(self, a, b):
        return self._op("add", a, b)

    def div(self, a, b):
        return self._op("div", a, b)


# ---------------------------------------------------------------------------
# kernel bodies (engine-generic, strictly sequential)
# ---------------------------------------------------------------------------

def _inputs(spec: KernelSpec):
    rng = np.random.default_rng(spec.seed)

    def draw(*shape):
        x = rng.random(size=shape, dtype=np.float32)
        if spec.distribution is InputDistribution.UNIFORM_SYM:
            x = (x * np.float32(2.0) - np.float32(1.0)).astype(np.float32)
        return x

    if spec.kind is KernelKind.GEMM:
        return draw(spec.size, spec.size), draw(spec.size, spec.size)
    if spec.kind is KernelKind.CONV3X3:
        return draw(spec.size, spec.size), draw(3, 3)
    return (draw(spec.size, spec.size),)


def _run_gemm(eng, a, b, size):
    out = [[None] * size for _ in range(size)]
    ah = [[eng.convert(a[i, k]) for k in range(size)] for i in range(size)]
    bh = [[eng.convert(b[k, j]) for j in range(size)] for k in range(size)]
    zero = eng.convert(np.float32(0.0))
    for i in range(size):
        for j in range(size):
            acc = zero
            for k in range(size):
                acc = eng.add(acc, eng.mul(ah[i][k], bh[k][j]))
            out[i][j] = acc
    return out


def _run_conv3x3(eng, img, ker, size):
    osz = size - 2
    ih = [[eng.convert(img[i, j]) for j in range(size)] for i in range(size)]
    kh = [[eng.convert(ker[i, j]) for j in range(3)] for i in range(3)]
    zero = eng.convert(np.float32(0.0))
    out = [[None] * osz for _ in range(osz)]
    for i in range(osz):
        for j in range(osz):
            acc = zero
            for di in range(3):
                for dj in range(3):
                    acc = eng.add(acc, eng.mul(ih[i + di][j + dj], kh[di][dj]))
            out[i][j] = acc
    return out

def _run_avgpool4x4(eng, img, size):
    osz = size // 4
    ih = [[eng.convert(img[i, j]) for j in range(size)] for i in range(size)]
    sixteen = eng.convert(np.float32(16.0))
    out = [[None] * osz for _ in range(osz)]
    for i in range(osz):
        for j in range(osz):
            acc = ih[4 * i][4 * j]
            for t in range(1, 16):
                acc = eng.add(acc, ih[4 * i + t // 4][4 * j + t % 4])
            out[i][j] = eng.div(acc, sixteen)
    return out


def _run_body(eng, spec: KernelSpec, inputs):
    if spec.kind is KernelKind.GEMM:
        return _run_gemm(eng, inputs[0], inputs[1], spec.size)
    if spec.kind is KernelKind.CONV3X3:
        return _run_conv3x3(eng, inputs[0], inputs[1], spec.size)
    return _run_avgpool4x4(eng, inputs[0], spec.size)


@dataclass
class KernelResult:
    spec: KernelSpec
    config: PositConfig
    posit_words: np.ndarray  # output posit patterns
    posit_values: np.ndarray  # their exact values, float64
    float32_values: np.ndarray  # binary32 reference execution
    report: ErrorReport


def run_kernel(
    spec: KernelSpec,
    cfg: PositConfig,
    params: Optional[ReciprocalParams] = None,
    engine=None,
) -> KernelResult:
    """Run one kernel through the posit unit and in binary32.

    ``engine`` substitutes the scored engine (used by the metric sanity check:
    scoring the binary32 engine against itself gives zero error everywhere).
    """
    inputs = _inputs(spec)
    report = ErrorReport()
    posit_engine = engine if engine is not None else _PositEngine(cfg, params)
    scored = _ScoredEngine(posit_engine, report)
    pos_out = _run_body(scored, spec, inputs)
    ref_out = _run_body(_Binary32Engine(), spec, inputs)

    if engine is None:
        words = np.array([[w for w in row] for row in pos_out], dtype=np.uint32)
        values = np.array(
            [[posit_engine.value(w) for w in row] for row in pos_out], dtype=np.float64
        )
    else:
        words = np.zeros((len(pos_out), len(pos_out[0])), dtype=np.uint32)
        values = np.array(
            [[posit_engine.value(h) for h in row] for row in pos_out], dtype=np.float64
        )
    refs = np.array([[float(h) for h in row] for row in ref_out], dtype=np.float32)
    return KernelResult(spec, cfg, words, values, refs, report)


def error_table(results) -> str:
    """Rows mul/add/div, one column per (kernel, config) result."""
    cols = [(r.spec.kind.value, str(r.config), r.report) for r in results]
    header = f"{'op':6s}" + "".join(f" {k}/{c:>18s}"[:26].rjust(26) for k, c, _ in cols)
    lines = [header]
    for op in ("mul", "add", "div"):
        cells = []
        for _, _, rep in cols:
            mean = rep.mean(op)
            cells.append(f"{mean:.6f}" if mean is not None else "-")
        lines.append(f"{op:6s}" + "".join(f" {c:>25s}" for c in cells))
    return "\n".join(lines)
