"""Parameterizable posit<N,ES> arithmetic toolkit.

Bit-exact golden arithmetic, a software model of a pipelined full posit
processing unit (including its approximate-reciprocal divider and SIMD
lanes), RISC-V posit instruction encodings with trace validation, and
DNN-style kernel error benchmarks.
"""

from .core import (
    DecodedPosit,
    Fir,
    PositBits,
    PositClass,
    PositConfig,
    compare,
    decode,
    encode_round,
    negate,
    real_value,
    real_value_alt,
    to_fir,
)
from .golden import (
    ConfigMismatchError,
    ExactClass,
    ExactValue,
    float_to_posit,
    g_add,
    g_div,
    g_fma,
    g_mul,
    g_sub,
    posit_to_float,
)
from .isa import (
    Instruction,
    Mnemonic,
    TraceRecord,
    TraceSyntaxError,
    assemble,
    disassemble,
    format_trace_record,
    iter_trace,
    parse_trace,
    validate_trace,
)
from .kernels import InputDistribution, KernelKind, KernelSpec, run_kernel
from .unit import (
    FppuOp,
    FppuPipeline,
    PipelineState,
    ReciprocalParams,
    fppu_exec,
    nr_refine,
    recip_approx,
    simd_exec,
)

__version__ = "0.1.0"

__all__ = [
    "PositConfig",
    "PositBits",
    "PositClass",
    "DecodedPosit",
    "Fir",
    "decode",
    "real_value",
    "real_value_alt",
    "to_fir",
    "encode_round",
    "negate",
    "compare",
    "ExactValue",
    "ExactClass",
    "ConfigMismatchError",
    "g_add",
    "g_sub",
    "g_mul",
    "g_div",
    "g_fma",
    "float_to_posit",
    "posit_to_float",
    "FppuOp",
    "ReciprocalParams",
    "FppuPipeline",
    "PipelineState",
    "fppu_exec",
    "simd_exec",
    "recip_approx",
    "nr_refine",
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
    "KernelKind",
    "KernelSpec",
    "InputDistribution",
    "run_kernel",
    "__version__",
]
