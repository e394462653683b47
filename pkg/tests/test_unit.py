import random

import pytest

from fppu.core import PositBits, PositConfig, real_value
from fppu.golden import add_words, div_words, fma_words, mul_words, sub_words
from fppu.unit import (
    FppuOp,
    FppuPipeline,
    PipelineState,
    ReciprocalParams,
    fppu_exec,
    nr_refine,
    pack_lanes,
    recip_approx,
    recip_approx_fixed,
    simd_exec,
    unpack_lanes,
)

C8 = PositConfig(8, 0)
C82 = PositConfig(8, 2)
C16 = PositConfig(16, 2)


def test_reciprocal_params_defaults():
    p = ReciprocalParams()
    assert p.k1 == 1.4567844114901045
    assert p.k2 == 1.0009290026616422
    assert p.nr_rounds == 1
    assert ReciprocalParams.for_config(C8).frac_width == 16
    assert ReciprocalParams.for_config(C16).frac_width == 32
    with pytest.raises(ValueError):
        ReciprocalParams(nr_rounds=-1)


def _poly(x, p):
    return 4.0 * (p.k2 - x * (p.k1 - x)) * (p.k1 - x)


def test_recip_approx_known_points():
    p = ReciprocalParams()
    assert recip_approx(1.0) == pytest.approx(0.99423, abs=5e-5)
    assert abs(recip_approx(1.0) - 1.0) == pytest.approx(0.0058, abs=3e-4)  # ~0.58% off
    # the fixed-point evaluation tracks the real-valued polynomial
    for x in (0.5, 0.625, 0.75, 0.9375, 1.0):
        assert recip_approx(x, p) == pytest.approx(_poly(x, p), abs=2 ** -28)
    assert recip_approx(0.5) == pytest.approx(1.9998202, abs=5e-6)
    with pytest.raises(ValueError):
        recip_approx(0.25)
    with pytest.raises(ValueError):
        recip_approx(1.5)
    with pytest.raises(ValueError):
        recip_approx_fixed(1, ReciprocalParams())


def test_recip_approx_monotone_decreasing():
    params = ReciprocalParams()
    prev = None
    for i in range(0, 513):
        x = 0.5 + i / 1024.0
        y = recip_approx(x, params)
        if prev is not None:
            assert y <= prev
        prev = y


def test_nr_refine_known():
    # y*(2 - x*y) at x=1, y=0.99423: the 0.577% error squares to 3.33e-5
    assert nr_refine(1.0, 0.99423) == pytest.approx(0.99423 * (2 - 0.99423), abs=2e-7)
    assert nr_refine(1.0, 0.99423) == pytest.approx(0.9999667, abs=2e-6)
    # exact reciprocal is a fixed point (up to quantization of the width)
    for x in (0.5, 0.625, 0.8125, 1.0):
        assert nr_refine(x, 1.0 / x, 24) == pytest.approx(1.0 / x, abs=3e-7)


def test_nr_refine_squares_the_error():
    params = ReciprocalParams(frac_width=40)
    rng = random.Random(3)
    for _ in range(300):
        x = 0.5 + rng.random() / 2
        y0 = recip_approx(x, params)
        pre = abs(y0 * x - 1.0)
        y1 = nr_refine(x, y0, 40)
        post = abs(y1 * x - 1.0)
        assert post <= pre * pre + 2 ** -32


def test_exec_matches_golden_known():
    assert fppu_exec(FppuOp.PADD, 0x40, 0x40, 0, C8) == 0x60
    assert fppu_exec(FppuOp.PDIV, 0x60, 0x40, 0, C8) == 0x60
    assert fppu_exec(FppuOp.PFMADD, 0x50, 0x60, 0x40, C8) == fma_words(0x50, 0x60, 0x40, 8, 0)
    assert fppu_exec(FppuOp.PDIV, 0x40, 0x00, 0, C8) == 0x80
    assert fppu_exec(FppuOp.PDIV, 0x00, 0x40, 0, C8) == 0x00
    assert fppu_exec(FppuOp.FCVT_F2P, 0x3FA00000, 0, 0, C16) == 0x4200
    assert fppu_exec(FppuOp.FCVT_P2F, 0x4200, 0, 0, C16) == 0x3FA00000
    with pytest.raises(ValueError):
        fppu_exec(FppuOp.PADD, 0, 0, 0, None)


@pytest.mark.parametrize("es", [0, 2, 4])
def test_exact_ops_match_golden_sampled(es):
    cfg = PositConfig(8, es)
    rng = random.Random(es)
    for _ in range(20000):
        a, b, c = (rng.getrandbits(8) for _ in range(3))
        assert fppu_exec(FppuOp.PADD, a, b, 0, cfg) == add_words(a, b, 8, es)
        assert fppu_exec(FppuOp.PSUB, a, b, 0, cfg) == sub_words(a, b, 8, es)
        assert fppu_exec(FppuOp.PMUL, a, b, 0, cfg) == mul_words(a, b, 8, es)
        assert fppu_exec(FppuOp.PFMADD, a, b, c, cfg) == fma_words(a, b, c, 8, es)


def test_div_wrong_rate_bounded_sampled():
    rng = random.Random(42)
    wrong = 0
    trials = 30000
    for _ in range(trials):
        a, b = rng.getrandbits(8), rng.getrandbits(8)
        if fppu_exec(FppuOp.PDIV, a, b, 0, C82) != div_words(a, b, 8, 2):
            wrong += 1
    assert wrong / trials < 0.035  # exhaustive rate is ~2.1%


def test_div_16bit_sampled_sanity():
    rng = random.Random(1)
    wrong = 0
    trials = 20000
    for _ in range(trials):
        a, b = rng.getrandbits(16), rng.getrandbits(16)
        if fppu_exec(FppuOp.PDIV, a, b, 0, C16) != div_words(a, b, 16, 2):
            wrong += 1
    assert wrong / trials < 0.012


def test_pipeline_single_op_latency():
    pipe = FppuPipeline(C8)
    valid, _ = pipe.clock(1, FppuOp.PADD, 0x40, 0x40)
    assert valid == 0
    outs = [pipe.clock(0) for _ in range(5)]
    assert [v for v, _ in outs] == [0, 0, 1, 0, 0]
    assert outs[2][1] == 0x60


def test_pipeline_latency_knob():
    pipe = FppuPipeline(C8, latency=4)
    pipe.clock(1, FppuOp.PADD, 0x40, 0x40)
    valids = [pipe.clock(0)[0] for _ in range(6)]
    assert valids == [0, 0, 0, 1, 0, 0]
    with pytest.raises(ValueError):
        PipelineState(latency=0)


def test_pipeline_no_input_no_output():
    pipe = FppuPipeline(C8)
    for _ in range(20):
        assert pipe.clock(0) == (0, 0)


def test_pipeline_back_to_back():
    pipe = FppuPipeline(C8)
    ops = [(FppuOp.PADD, 0x40, i) for i in range(10)]
    expected = [fppu_exec(op, a, b, 0, C8) for op, a, b in ops]
    got = []
    for op, a, b in ops:
        v, r = pipe.clock(1, op, a, b)
        if v:
            got.append(r)
    for _ in range(3):
        v, r = pipe.clock(0)
        if v:
            got.append(r)
    assert got == expected


def test_pipeline_requires_op_with_valid():
    pipe = FppuPipeline(C8)
    with pytest.raises(ValueError):
        pipe.clock(1)


def test_simd_known_example():
    packed_a = pack_lanes([0x40, 0x40, 0x00, 0x80], 8)
    packed_b = pack_lanes([0x40, 0x00, 0x00, 0x40], 8)
    out = simd_exec(FppuOp.PADD, packed_a, packed_b, C8)
    assert unpack_lanes(out, 8) == (0x60, 0x40, 0x00, 0x80)  # NaR lane propagates


def test_simd_all_zero():
    assert simd_exec(FppuOp.PADD, 0, 0, C8) == 0


def test_simd_rejects_32bit_and_conversions():
    with pytest.raises(ValueError):
        simd_exec(FppuOp.PADD, 0, 0, PositConfig(32, 2))
    with pytest.raises(ValueError):
        simd_exec(FppuOp.FCVT_P2F, 0, 0, C8)


@pytest.mark.parametrize("cfg,lanes", [(C82, 4), (C16, 2)])
def test_simd_matches_scalar_sampled(cfg, lanes):
    rng = random.Random(17)
    n = cfg.n_bits
    for _ in range(2000):
        op = rng.choice([FppuOp.PADD, FppuOp.PSUB, FppuOp.PMUL, FppuOp.PDIV, FppuOp.PFMADD])
        a, b, c = rng.getrandbits(32), rng.getrandbits(32), rng.getrandbits(32)
        out = simd_exec(op, a, b, cfg, packed_c=c)
        for i in range(lanes):
            la = (a >> (i * n)) & ((1 << n) - 1)
            lb = (b >> (i * n)) & ((1 << n) - 1)
            lc = (c >> (i * n)) & ((1 << n) - 1)
            want = fppu_exec(op, la, lb, lc, cfg)
            assert (out >> (i * n)) & ((1 << n) - 1) == want


def test_pack_lanes_validation():
    with pytest.raises(ValueError):
        pack_lanes([0x40], 8)
    assert unpack_lanes(pack_lanes([1, 2, 3, 4], 8), 8) == (1, 2, 3, 4)
