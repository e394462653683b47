"""Command-line front end.

Subcommands: ``check`` (unit vs golden sweeps), ``divtable`` (division
accuracy table), ``optk`` (reciprocal constant optimization), ``kernel``
(benchmark kernels), ``trace`` (trace-file validation) and ``eval``
(single-operation debugging). Exit codes: 0 success, 1 verification
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .core import (
    Fir,
    PositBits,
    PositConfig,
    decode,
    encode_round_explain,
    real_value,
    to_fir,
)
from . import golden
from .isa import iter_trace, validate_trace
from .kernels import (
    ErrorReport,
    InputDistribution,
    KernelKind,
    KernelSpec,
    error_table,
    run_kernel,
)
from .koptim import error_functional, improvement_pct, optimize_constants
from .unit import FppuOp, ReciprocalParams, fppu_exec
from .verify import EXACT_OPS, OP_NAMES, compare_exhaustive, compare_sampled, division_table

USAGE_ERROR = 2
VERIFY_ERROR = 1


def _config(args) -> PositConfig:
    return PositConfig(args.nbits, args.es)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_check(args) -> int:
    cfg = _config(args)
    ops = [o.strip() for o in args.ops.split(",") if o.strip()]
    for op in ops:
        if op not in OP_NAMES:
            print(f"error: unknown op {op!r} (choose from {', '.join(OP_NAMES)})", file=sys.stderr)
            return USAGE_ERROR
    if args.exhaustive and cfg.n_bits > 8:
        print("error: exhaustive pair sweeps are feasible for 8-bit formats only; use --sample",
              file=sys.stderr)
        return USAGE_ERROR
    params = ReciprocalParams(
        nr_rounds=args.nr,
        frac_width=args.width if args.width else 2 * cfg.n_bits,
    )
    results = {}
    fail = False
    print(f"unit vs golden for {cfg}"
          + (" (exhaustive pairs)" if args.exhaustive else f" ({args.sample} samples, seed {args.seed})"))
    for op in ops:
        if args.exhaustive:
            stats = compare_exhaustive(cfg, op, workers=args.workers, params=params)
        else:
            stats = compare_sampled(cfg, op, args.sample, seed=args.seed,
                                    workers=args.workers, params=params)
        results[op] = stats
        status = "ok" if stats.mismatches == 0 else f"{stats.wrong_pct:.4f}% wrong"
        print(f"  {op:4s}: {stats.total - stats.mismatches}/{stats.total} match ({status})")
        for a, b, c, got, want in stats.examples:
            print(f"        mismatch a=0x{a:X} b=0x{b:X} c=0x{c:X}: unit=0x{got:X} golden=0x{want:X}")
        if op in EXACT_OPS and stats.mismatches:
            fail = True
    if args.json:
        _write_json(args.json, {
            "config": {"n_bits": cfg.n_bits, "es_bits": cfg.es_bits},
            "mode": "exhaustive" if args.exhaustive else {"samples": args.sample, "seed": args.seed},
            "ops": {op: {"total": s.total, "mismatches": s.mismatches, "wrong_pct": s.wrong_pct}
                    for op, s in results.items()},
        })
    return VERIFY_ERROR if fail else 0


def cmd_divtable(args) -> int:
    widths = [int(x) for x in args.nbits.split(",")]
    es_list = [int(x) for x in args.es.split(",")]
    if any(n > 8 for n in widths):
        print(f"sampled rows use {args.samples} pairs, seed {args.seed}")
    rows = division_table(widths, es_list, nr_rounds=args.nr, samples=args.samples,
                          seed=args.seed, workers=args.workers)
    print(f"{'N':>3s} {'ES':>3s} {'NR':>3s} {'wrong [%]':>10s} {'pairs':>9s} {'mode':>10s}")
    for r in rows:
        mode = "exhaustive" if r.exhaustive else "sampled"
        print(f"{r.n_bits:3d} {r.es_bits:3d} {r.nr_rounds:3d} {r.wrong_pct:10.4f} {r.total:9d} {mode:>10s}")
    if args.json:
        _write_json(args.json, {
            "seed": args.seed,
            "rows": [{"n_bits": r.n_bits, "es_bits": r.es_bits, "nr": r.nr_rounds,
                      "wrong_pct": r.wrong_pct, "pairs": r.total, "exhaustive": r.exhaustive}
                     for r in rows],
        })
    return 0


def cmd_optk(args) -> int:
    k1, k2, e2 = optimize_constants()
    print(f"k1 = {k1:.12g}")
    print(f"k2 = {k2:.12g}")
    print(f"e2(k1, k2)   = {e2:.12e}")
    e2_seed = error_functional(1.5, 1.0)
    print(f"e2(1.5, 1.0) = {e2_seed:.12e}")
    if args.baseline:
        b1, b2 = args.baseline
        e2_base = error_functional(b1, b2)
        print(f"e2(baseline {b1:g}, {b2:g}) = {e2_base:.12e}")
        print(f"improvement over baseline: {improvement_pct(e2_base, e2):.1f}%")
    return 0


def cmd_kernel(args) -> int:
    dist = InputDistribution.UNIFORM_SYM if args.dist == "sym" else InputDistribution.UNIFORM_UNIT
    kinds = list(KernelKind) if args.kind == "all" else [KernelKind(args.kind)]
    if args.table:
        configs = [PositConfig(8, 0), PositConfig(16, 2)]
    else:
        configs = [_config(args)]
    results = []
    for kind in kinds:
        spec = KernelSpec(kind, size=args.size, seed=args.seed, distribution=dist)
        for cfg in configs:
            results.append(run_kernel(spec, cfg))
    print(f"kernel errors (size {args.size}, seed {args.seed}, {dist.value} inputs)")
    print(error_table(results))
    if args.json:
        _write_json(args.json, {
            "size": args.size,
            "seed": args.seed,
            "distribution": dist.value,
            "results": [
                {"kernel": r.spec.kind.value,
                 "config": {"n_bits": r.config.n_bits, "es_bits": r.config.es_bits},
                 "ops": r.report.to_dict()}
                for r in results
            ],
        })
    return 0


def cmd_trace(args) -> int:
    cfg = _config(args)
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            records = list(iter_trace(fh))
    except OSError as exc:
        print(f"error: cannot read trace: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ValueError as exc:
        print(f"trace parse error: {exc}", file=sys.stderr)
        return VERIFY_ERROR
    report = validate_trace(records, cfg)
    print(report.to_text())
    if args.json:
        _write_json(args.json, report.to_dict())
    return 0 if report.ok() else VERIFY_ERROR


_EVAL_BINARY = {"add": (FppuOp.PADD, golden.g_add), "sub": (FppuOp.PSUB, golden.g_sub),
                "mul": (FppuOp.PMUL, golden.g_mul), "div": (FppuOp.PDIV, golden.g_div)}


def _parse_operand(text: str, cfg: PositConfig) -> PositBits:
    if text.lower().startswith("0x"):
        return PositBits(int(text, 16), cfg)
    value = float(text)  # decimal reals go through binary32 then to posit
    fword = int(np.float32(value).view(np.uint32))
    return golden.float_to_posit(fword, cfg)


def _show_posit(label: str, p: PositBits) -> None:
    d = decode(p)
    v = real_value(p)
    vtxt = "NaR" if v is None else f"{v} ({float(v)!r})"
    print(f"{label}: {p} class={d.pclass.value} sign={d.sign} k={d.regime_k} "
          f"regime_len={d.regime_len} e={d.exponent} f={d.frac} (F={d.frac_len}) value={vtxt}")


def _show_round_trail(p: PositBits) -> None:
    d = decode(p)
    if d.pclass.value != "normal":
        return
    bits, info = encode_round_explain(to_fir(d, p.config), p.config)
    print(f"  re-encode: 0x{bits.word:X} rounding path={info.get('path')} "
          + " ".join(f"{k}={v}" for k, v in info.items() if k not in ("path",)))


def cmd_eval(args) -> int:
    cfg = _config(args)
    op = args.op
    try:
        operands = [_parse_operand(t, cfg) for t in args.operands]
    except ValueError as exc:
        print(f"error: bad operand: {exc}", file=sys.stderr)
        return USAGE_ERROR

    if op == "decode":
        if len(operands) != 1:
            print("error: decode takes one operand", file=sys.stderr)
            return USAGE_ERROR
        _show_posit("operand", operands[0])
        _show_round_trail(operands[0])
        return 0
    if op == "p2f":
        if len(operands) != 1:
            print("error: p2f takes one operand", file=sys.stderr)
            return USAGE_ERROR
        _show_posit("operand", operands[0])
        print(f"binary32: 0x{golden.posit_to_float(operands[0]):08X}")
        return 0
    if op == "f2p":
        # operand already converted by _parse_operand when given as decimal
        if len(args.operands) != 1:
            print("error: f2p takes one operand", file=sys.stderr)
            return USAGE_ERROR
        _show_posit("posit", operands[0])
        return 0

    if op == "fma":
        if len(operands) != 3:
            print("error: fma takes three operands", file=sys.stderr)
            return USAGE_ERROR
        for i, p in enumerate(operands):
            _show_posit(f"operand {i}", p)
        gold = golden.g_fma(*operands)
        unit = fppu_exec(FppuOp.PFMADD, operands[0].word, operands[1].word,
                         operands[2].word, cfg)
    elif op in _EVAL_BINARY:
        if len(operands) != 2:
            print(f"error: {op} takes two operands", file=sys.stderr)
            return USAGE_ERROR
        for i, p in enumerate(operands):
            _show_posit(f"operand {i}", p)
        fop, gfn = _EVAL_BINARY[op]
        gold = gfn(*operands)
        unit = fppu_exec(fop, operands[0].word, operands[1].word, 0, cfg)
    else:
        print(f"error: unknown eval op {op!r}", file=sys.stderr)
        return USAGE_ERROR

    _show_posit("golden", gold)
    _show_round_trail(gold)
    unit_bits = PositBits(unit, cfg)
    _show_posit("unit  ", unit_bits)
    print(f"unit == golden: {unit == gold.word}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fppu", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_fmt(sp, default_n=8, default_es=0):
        sp.add_argument("--nbits", type=int, default=default_n)
        sp.add_argument("--es", type=int, default=default_es)

    sp = sub.add_parser("check", help="compare the unit datapath against the golden model")
    add_fmt(sp)
    sp.add_argument("--ops", default="add,sub,mul,div,fma")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--sample", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--nr", type=int, default=1)
    sp.add_argument("--width", type=int, default=0, help="reciprocal fixed-point width (default 2N)")
    sp.add_argument("--json", metavar="PATH")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("divtable", help="division accuracy table over formats")
    sp.add_argument("--nbits", default="8,16")
    sp.add_argument("--es", default="0,1,2,3,4")
    sp.add_argument("--nr", type=int, default=1)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--json", metavar="PATH")
    sp.set_defaults(func=cmd_divtable)

    sp = sub.add_parser("optk", help="optimize the reciprocal constants")
    sp.add_argument("--baseline", nargs=2, type=float, metavar=("K1", "K2"),
                    help="report improvement over these constants")
    sp.set_defaults(func=cmd_optk)

    sp = sub.add_parser("kernel", help="benchmark kernels with error reports")
    add_fmt(sp)
    sp.add_argument("--kind", choices=[k.value for k in KernelKind] + ["all"], default="all")
    sp.add_argument("--size", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dist", choices=["unit", "sym"], default="unit")
    sp.add_argument("--table", action="store_true",
                    help="run the 8,0 and 16,2 formats side by side")
    sp.add_argument("--json", metavar="PATH")
    sp.set_defaults(func=cmd_kernel)

    sp = sub.add_parser("trace", help="validate an instruction trace file")
    add_fmt(sp)
    sp.add_argument("file")
    sp.add_argument("--json", metavar="PATH")
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("eval", help="evaluate one operation with full detail")
    add_fmt(sp)
    sp.add_argument("op", choices=["decode", "add", "sub", "mul", "div", "fma", "p2f", "f2p"])
    sp.add_argument("operands", nargs="+")
    sp.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
