"""Sweep engine comparing the unit datapath against the golden model.

Exhaustive operand sweeps are practical for 8-bit formats (65536 pairs per
operation); wider formats use seeded random sampling. The operand space can
be sharded across a process pool; partial results merge in shard order so
reports are identical for any worker count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple

from .core import PositConfig
from .golden import add_words, div_words, fma_words, mul_words, sub_words
from .unit import FppuOp, ReciprocalParams, fppu_exec

__all__ = [
    "OP_NAMES",
    "EXACT_OPS",
    "CompareStats",
    "compare_exhaustive",
    "compare_sampled",
    "division_wrong_rate",
    "division_table",
]

OP_NAMES = ("add", "sub", "mul", "div", "fma")
EXACT_OPS = ("add", "sub", "mul", "fma")

_UNIT_OP = {
    "add": FppuOp.PADD,
    "sub": FppuOp.PSUB,
    "mul": FppuOp.PMUL,
    "div": FppuOp.PDIV,
    "fma": FppuOp.PFMADD,
}
_GOLD_FN = {
    "add": add_words,
    "sub": sub_words,
    "mul": mul_words,
    "div": div_words,
}


@dataclass
class CompareStats:
    """Outcome of one unit-vs-golden comparison sweep."""

    op: str
    total: int = 0
    mismatches: int = 0
    examples: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def wrong_pct(self) -> float:
        return 100.0 * self.mismatches / self.total if self.total else 0.0

    def merge(self, other: "CompareStats", keep_examples: int = 4) -> None:
        self.total += other.total
        self.mismatches += other.mismatches
        for ex in other.examples:
            if len(self.examples) >= keep_examples:
                break
            self.examples.append(ex)


def _compare_pairs(args):
    """Worker: compare one operation over a slice of the operand space."""
    n, es, op, a_range, pair_list, params, keep = args
    cfg = PositConfig(n, es)
    fop = _UNIT_OP[op]
    stats = CompareStats(op)
    if op == "fma":
        def gold(a, b, c=0):
            return fma_words(a, b, c, n, es)
    else:
        gfn = _GOLD_FN[op]
        def gold(a, b, c=0):
            return gfn(a, b, n, es)
    if pair_list is not None:
        operands = pair_list
    else:
        size = 1 << n
        operands = ((a, b) for a in range(*a_range) for b in range(size))
    for tup in operands:
        a, b = tup[0], tup[1]
        c = tup[2] if len(tup) > 2 else 0
        got = fppu_exec(fop, a, b, c, cfg, params)
        want = gold(a, b, c)
        stats.total += 1
        if got != want:
            stats.mismatches += 1
            if len(stats.examples) < keep:
                stats.examples.append((a, b, c, got, want))
    return stats


def _run_shards(shard_args, workers: int, op: str, keep_examples: int) -> CompareStats:
    merged = CompareStats(op)
    if workers <= 1 or len(shard_args) == 1:
        results = [_compare_pairs(a) for a in shard_args]
    else:
        with Pool(workers) as pool:
            results = pool.map(_compare_pairs, shard_args)
    for part in results:  # shard order fixed -> deterministic merge
        merged.merge(part, keep_examples)
    return merged


def compare_exhaustive(
    cfg: PositConfig,
    op: str,
    workers: int = 1,
    params: Optional[ReciprocalParams] = None,
    keep_examples: int = 4,
) -> CompareStats:
    """All operand pairs of an 8-bit format (fma sweeps with c = 0)."""
    if op not in OP_NAMES:
        raise ValueError(f"unknown operation {op!r}")
    if cfg.n_bits > 8:
        raise ValueError("exhaustive pair sweeps are limited to 8-bit formats")
    params = params or ReciprocalParams.for_config(cfg)
    size = 1 << cfg.n_bits
    shards = max(1, min(workers * 4, size))
    step = (size + shards - 1) // shards
    args = [
        (cfg.n_bits, cfg.es_bits, op, (lo, min(lo + step, size)), None, params, keep_examples)
        for lo in range(0, size, step)
    ]
    return _run_shards(args, workers, op, keep_examples)


def compare_sampled(
    cfg: PositConfig,
    op: str,
    samples: int,
    seed: int = 0,
    workers: int = 1,
    params: Optional[ReciprocalParams] = None,
    keep_examples: int = 4,
) -> CompareStats:
    """Seeded random operand pairs (triples for fma)."""
    if op not in OP_NAMES:
        raise ValueError(f"unknown operation {op!r}")
    params = params or ReciprocalParams.for_config(cfg)
    rng = random.Random(seed)
    n = cfg.n_bits
    width = 3 if op == "fma" else 2
    pairs = [tuple(rng.getrandbits(n) for _ in range(width)) for _ in range(samples)]
    shards = max(1, min(workers, 16))
    step = (len(pairs) + shards - 1) // shards
    args = [
        (cfg.n_bits, cfg.es_bits, op, None, pairs[lo : lo + step], params, keep_examples)
        for lo in range(0, len(pairs), step)
    ]
    return _run_shards(args, workers, op, keep_examples)


def division_wrong_rate(
    cfg: PositConfig,
    nr_rounds: int = 1,
    samples: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    frac_width: Optional[int] = None,
) -> CompareStats:
    """Division mismatch rate: exhaustive at 8 bits, sampled otherwise."""
    width = frac_width if frac_width is not None else 2 * cfg.n_bits
    params = ReciprocalParams(nr_rounds=nr_rounds, frac_width=width)
    if cfg.n_bits <= 8:
        return compare_exhaustive(cfg, "div", workers=workers, params=params)
    return compare_sampled(cfg, "div", samples, seed=seed, workers=workers, params=params)


@dataclass
class DivTableRow:
    n_bits: int
    es_bits: int
    nr_rounds: int
    wrong_pct: float
    total: int
    exhaustive: bool


def division_table(
    widths: Sequence[int],
    es_list: Sequence[int],
    nr_rounds: int = 1,
    samples: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
) -> List[DivTableRow]:
    """Division accuracy sweep over formats: one row per (N, ES)."""
    rows = []
    for n in widths:
        for es in es_list:
            if n < es + 2:
                continue
            cfg = PositConfig(n, es)
            stats = division_wrong_rate(
                cfg, nr_rounds=nr_rounds, samples=samples, seed=seed, workers=workers
            )
            rows.append(
                DivTableRow(n, es, nr_rounds, stats.wrong_pct, stats.total, n <= 8)
            )
    return rows
