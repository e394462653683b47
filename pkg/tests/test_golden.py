import random
import struct
from fractions import Fraction

import pytest

from fppu.core import PositBits, PositConfig, negate, real_value
from fppu.golden import (
    ConfigMismatchError,
    ExactClass,
    ExactValue,
    add_words,
    div_words,
    float_to_posit,
    float_to_posit_word,
    fma_words,
    g_add,
    g_div,
    g_fma,
    g_mul,
    g_sub,
    mul_words,
    posit_to_float,
    posit_to_float_word,
    sub_words,
)

from oracle import nearest_word

C8 = PositConfig(8, 0)
C16 = PositConfig(16, 2)
NAR8 = 0x80


def b8(w):
    return PositBits(w, C8)


def test_exact_value_canonical():
    v = ExactValue.make(12, 0)  # 12 * 2^0 == 3 * 2^2
    assert (v.num, v.exp2) == (3, 2)
    assert ExactValue.make(0, 5).tag is ExactClass.ZERO
    v = ExactValue.make(-40, -3)
    assert (v.num, v.exp2) == (-5, 0)
    assert v.to_fraction() == -5


def test_exact_value_arithmetic():
    a = ExactValue.make(3, -2)  # 0.75
    b = ExactValue.make(1, -2)  # 0.25
    assert (a + b).to_fraction() == 1
    assert (a - b).to_fraction() == Fraction(1, 2)
    assert (a * b).to_fraction() == Fraction(3, 16)
    assert (a + ExactValue.nar()).tag is ExactClass.NAR
    assert (a * ExactValue.make(0, 0)).tag is ExactClass.ZERO


def test_exact_value_from_posit_roundtrip_8bit():
    for es in range(5):
        cfg = PositConfig(8, es)
        for word in range(256):
            p = PositBits(word, cfg)
            ev = ExactValue.from_posit(p)
            if p.is_nar():
                assert ev.tag is ExactClass.NAR
                continue
            assert ev.to_fraction() == real_value(p)
            assert ev.num == 0 or ev.num % 2 == 1
            assert ev.round_to_word(8, es) == word  # exact values re-encode to themselves


def test_golden_known_cases():
    assert g_add(b8(0x40), b8(0x40)).word == 0x60  # 1+1=2
    assert g_mul(b8(0x50), b8(0x60)).word == 0x68  # 1.5*2=3
    assert g_div(b8(0x60), b8(0x40)).word == 0x60  # 2/1=2
    assert g_div(b8(0x37), b8(0x00)).word == NAR8
    assert g_fma(b8(0x40), b8(0x40), b8(0x00)).word == 0x40
    assert real_value(g_fma(b8(0x50), b8(0x60), b8(0x40))) == 4


def test_config_mismatch_is_usage_error():
    with pytest.raises(ConfigMismatchError):
        g_add(PositBits(0x40, C8), PositBits(0x4000, C16))
    with pytest.raises(ConfigMismatchError):
        g_fma(PositBits(0x40, C8), PositBits(0x40, C8), PositBits(0, C16))


@pytest.mark.parametrize("es", [0, 2])
def test_correct_rounding_sampled(es):
    """Spot version of the exhaustive acceptance sweep: golden == nearest(exact)."""
    cfg = PositConfig(8, es)
    rng = random.Random(es)
    vals = [real_value(PositBits(w, cfg)) for w in range(256)]
    for _ in range(4000):
        a, b = rng.getrandbits(8), rng.getrandbits(8)
        va, vb = vals[a], vals[b]
        if va is None or vb is None:
            continue
        assert add_words(a, b, 8, es) == nearest_word(va + vb, cfg)
        assert mul_words(a, b, 8, es) == nearest_word(va * vb, cfg)
        if vb != 0:
            assert div_words(a, b, 8, es) == nearest_word(va / vb, cfg)


def test_fma_single_rounding_sampled():
    cfg = PositConfig(8, 2)
    rng = random.Random(7)
    vals = [real_value(PositBits(w, cfg)) for w in range(256)]
    for _ in range(4000):
        a, b, c = (rng.getrandbits(8) for _ in range(3))
        if vals[a] is None or vals[b] is None or vals[c] is None:
            continue
        assert fma_words(a, b, c, 8, 2) == nearest_word(vals[a] * vals[b] + vals[c], cfg)


def test_fused_differs_from_unfused_somewhere():
    found = None
    rng = random.Random(3)
    for _ in range(200000):
        a, b, c = (rng.getrandbits(8) for _ in range(3))
        fused = fma_words(a, b, c, 8, 0)
        unfused = add_words(mul_words(a, b, 8, 0), c, 8, 0)
        if fused != unfused:
            found = (a, b, c, fused, unfused)
            break
    assert found is not None, "fma must round once, not twice"


def test_commutativity_identity_nar_8bit():
    es = 1
    one = 0x40
    for a in range(256):
        assert add_words(a, 0, 8, es) == a
        assert mul_words(a, one, 8, es) == a if a != NAR8 else NAR8
        assert add_words(a, NAR8, 8, es) == NAR8
        assert mul_words(NAR8, a, 8, es) == NAR8
        assert div_words(a, NAR8, 8, es) == NAR8
        assert fma_words(a, one, NAR8, 8, es) == NAR8
        if a != NAR8:
            assert sub_words(a, a, 8, es) == 0
            if a != 0:
                assert div_words(a, a, 8, es) == one
    rng = random.Random(11)
    for _ in range(5000):
        a, b = rng.getrandbits(8), rng.getrandbits(8)
        assert add_words(a, b, 8, es) == add_words(b, a, 8, es)
        assert mul_words(a, b, 8, es) == mul_words(b, a, 8, es)


def test_sub_equals_add_negate_exhaustive():
    cfg = PositConfig(8, 2)
    for a in range(0, 256, 3):
        for b in range(256):
            neg_b = negate(PositBits(b, cfg)).word
            assert sub_words(a, b, 8, 2) == add_words(a, neg_b, 8, 2)


def test_float_conversion_known():
    assert float_to_posit(0x3FA00000, C16).word == 0x4200  # 1.25f
    assert posit_to_float(PositBits(0x4200, C16)) == 0x3FA00000
    assert float_to_posit(0x7FC00000, C16).word == 0x8000  # NaN -> NaR
    assert float_to_posit(0x7F800000, C16).word == 0x8000  # +Inf -> NaR
    assert float_to_posit(0xFF800000, C16).word == 0x8000  # -Inf -> NaR
    assert posit_to_float(PositBits(0x8000, C16)) == 0x7FC00000  # NaR -> quiet NaN
    assert posit_to_float(PositBits(0, C16)) == 0
    # beyond maxpos saturates, never NaR
    assert float_to_posit(struct.unpack("<I", struct.pack("<f", 1e30))[0], C16).word == 0x7FFF
    assert float_to_posit(struct.unpack("<I", struct.pack("<f", -1e30))[0], C16).word == 0x8001
    # tiny saturates to minpos, never zero
    assert float_to_posit(struct.unpack("<I", struct.pack("<f", 1e-30))[0], C16).word == 0x0001


def test_float_roundtrip_identity_16bit():
    """binary32 holds every 16-bit posit exactly, so the round trip is identity."""
    for word in range(1 << 16):
        f = posit_to_float_word(word, 16, 2)
        assert float_to_posit_word(f, 16, 2) == word


def test_float_to_posit_correctly_rounded_sampled():
    rng = random.Random(5)
    cfg = PositConfig(8, 1)
    for _ in range(20000):
        fword = rng.getrandbits(32)
        exp = (fword >> 23) & 0xFF
        if exp == 0xFF:
            continue
        x = Fraction(struct.unpack("<f", struct.pack("<I", fword))[0])
        assert float_to_posit_word(fword, 8, 1) == nearest_word(x, cfg)


def test_posit_to_float_subnormal_and_overflow():
    c32 = PositConfig(32, 4)
    # minpos of <32,4> is 2^-480: far below binary32 subnormals -> +0
    assert posit_to_float_word(1, 32, 4) == 0
    # -minpos -> -0
    assert posit_to_float_word((1 << 32) - 1, 32, 4) == 0x80000000
    # maxpos of <32,4> is 2^480 -> +Inf
    assert posit_to_float_word(0x7FFFFFFF, 32, 4) == 0x7F800000
    # a posit equal to a binary32 subnormal converts exactly
    w = float_to_posit_word(0x00000001, 32, 4)  # 2^-149
    assert real_value(PositBits(w, c32)) == Fraction(1, 1 << 149)
    assert posit_to_float_word(w, 32, 4) == 0x00000001
