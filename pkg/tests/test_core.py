import random
from fractions import Fraction

import pytest

from fppu.core import (
    Fir,
    PositBits,
    PositClass,
    PositConfig,
    compare,
    decode,
    encode_round,
    encode_round_explain,
    negate,
    real_value,
    real_value_alt,
    to_fir,
)

from oracle import exact_value, nearest_word

C8 = PositConfig(8, 0)
C16 = PositConfig(16, 2)


def test_config_validation():
    assert PositConfig(8, 0).useed == 2
    assert PositConfig(16, 2).useed == 16
    assert PositConfig(32, 4).useed == 65536
    with pytest.raises(ValueError):
        PositConfig(2, 0)
    with pytest.raises(ValueError):
        PositConfig(33, 0)
    with pytest.raises(ValueError):
        PositConfig(8, 5)
    with pytest.raises(ValueError):
        PositConfig(3, 2)


def test_positbits_validation():
    with pytest.raises(ValueError):
        PositBits(0x100, C8)
    assert PositBits(0x80, C8).is_nar()
    assert PositBits(0, C8).is_zero()


def test_decode_known_fields():
    d = decode(PositBits(0x4200, C16))
    assert d.pclass is PositClass.NORMAL
    assert (d.sign, d.regime_k, d.regime_len, d.exponent, d.frac, d.frac_len) == (0, 0, 1, 0, 512, 11)

    assert decode(PositBits(0x00, C8)).pclass is PositClass.ZERO
    assert decode(PositBits(0x80, C8)).pclass is PositClass.NAR

    d = decode(PositBits(0x7F, C8))  # maxpos
    assert (d.pclass, d.sign, d.regime_k, d.frac_len) == (PositClass.NORMAL, 0, 6, 0)


def test_real_value_known():
    assert real_value(PositBits(0x4200, C16)) == Fraction(5, 4)
    assert real_value(PositBits(0x40, C8)) == 1
    assert real_value(PositBits(0x7F, C8)) == 64
    assert real_value(PositBits(0x00, C8)) == 0
    assert real_value(PositBits(0x80, C8)) is None


def test_real_value_alt_known():
    assert real_value_alt(PositBits(0x4200, C16)) == Fraction(5, 4)
    assert real_value_alt(PositBits(0x40, C8)) == 1
    assert real_value_alt(PositBits(0xC0, C8)) == -1
    with pytest.raises(ValueError):
        real_value_alt(PositBits(0x00, C8))
    with pytest.raises(ValueError):
        real_value_alt(PositBits(0x80, C8))


@pytest.mark.parametrize("es", range(5))
def test_value_formulas_agree_8bit(es):
    cfg = PositConfig(8, es)
    for word in range(256):
        p = PositBits(word, cfg)
        if p.pclass is not PositClass.NORMAL:
            continue
        assert real_value_alt(p) == real_value(p), f"word 0x{word:02X} es={es}"


@pytest.mark.parametrize("es", range(5))
def test_decode_matches_independent_value(es):
    cfg = PositConfig(8, es)
    for word in range(256):
        assert real_value(PositBits(word, cfg)) == exact_value(word, 8, es)


def test_to_fir_known():
    f = to_fir(decode(PositBits(0x4200, C16)), C16)
    assert f.sign == 0 and f.te == 0 and f.sticky_in == 0
    assert Fraction(f.frac, 1 << f.frac_width) == Fraction(1, 4)

    f = to_fir(decode(PositBits(0x7F, C8)), C8)
    assert (f.sign, f.te, f.frac) == (0, 6, 0)
    f = to_fir(decode(PositBits(0x60, C8)), C8)
    assert (f.sign, f.te, f.frac) == (0, 1, 0)

    with pytest.raises(ValueError):
        to_fir(decode(PositBits(0, C8)), C8)
    with pytest.raises(ValueError):
        to_fir(decode(PositBits(0x80, C8)), C8)


def test_encode_round_known():
    f = to_fir(decode(PositBits(0x4200, C16)), C16)
    assert encode_round(f, C16).word == 0x4200
    assert encode_round(Fir(0, 10, 0, 0), C8).word == 0x7F  # clipped to maxpos
    assert encode_round(Fir(0, 0, 0, 0), C8).word == 0x40
    assert encode_round(Fir(1, 0, 0, 0), C8).word == 0xC0
    assert encode_round(Fir(0, -100, 0, 0), C8).word == 0x01  # clipped to minpos


@pytest.mark.parametrize("cfg", [PositConfig(8, es) for es in range(5)] + [C16, PositConfig(16, 1)])
def test_round_trip_exhaustive(cfg):
    for word in range(1 << cfg.n_bits):
        p = PositBits(word, cfg)
        if p.pclass is not PositClass.NORMAL:
            continue
        assert encode_round(to_fir(decode(p), cfg), cfg).word == word


@pytest.mark.parametrize("es", range(5))
def test_regime_bounds_8bit(es):
    cfg = PositConfig(8, es)
    for word in range(256):
        d = decode(PositBits(word, cfg))
        if d.pclass is PositClass.NORMAL:
            assert -(cfg.n_bits - 1) <= d.regime_k <= cfg.n_bits - 2


def test_negation_exhaustive_8bit():
    for es in range(5):
        cfg = PositConfig(8, es)
        for word in range(256):
            p = PositBits(word, cfg)
            if p.is_nar():
                assert negate(p).is_nar()
                continue
            v = real_value(p)
            assert real_value(negate(p)) == -v


def test_negate_known():
    assert negate(PositBits(0x40, C8)).word == 0xC0
    assert real_value(PositBits(0xC0, C8)) == -1
    assert negate(PositBits(0x00, C8)).word == 0x00


def test_compare_matches_value_order_8bit():
    cfg = PositConfig(8, 1)
    patterns = [w for w in range(256) if w != 0x80]
    values = {w: real_value(PositBits(w, cfg)) for w in patterns}
    for a in patterns[::3]:
        for b in patterns[::5]:
            want = (values[a] > values[b]) - (values[a] < values[b])
            assert compare(PositBits(a, cfg), PositBits(b, cfg)) == want


def test_compare_nar_below_all():
    nar = PositBits(0x80, C8)
    for w in (0x00, 0x01, 0x40, 0xFF, 0x81):
        assert compare(nar, PositBits(w, C8)) == -1
    assert compare(nar, PositBits(0x80, C8)) == 0
    with pytest.raises(ValueError):
        compare(PositBits(0, C8), PositBits(0, C16))


@pytest.mark.parametrize("es", [0, 1, 2, 3, 4])
def test_encode_round_matches_nearest_search(es):
    """Random FIRs round exactly like a nearest-value search over all patterns."""
    cfg = PositConfig(8, es)
    rng = random.Random(1234 + es)
    for _ in range(4000):
        te = rng.randint(-(1 << es) * 9, (1 << es) * 9)
        width = rng.randint(0, 12)
        frac = rng.getrandbits(width) if width else 0
        sign = rng.getrandbits(1)
        exact = (1 + Fraction(frac, 1 << width if width else 1)) * Fraction(2) ** te
        if sign:
            exact = -exact
        got = encode_round(Fir(sign, te, frac, width, 0), cfg)
        assert got.word == nearest_word(exact, cfg), (sign, te, frac, width)


def test_encode_round_sticky_breaks_ties():
    # 1.5 exactly between 1 and 2 at <8,4>: ties to even; sticky forces up.
    cfg = PositConfig(8, 4)
    even = nearest_word(Fraction(3, 2), cfg)
    assert encode_round(Fir(0, 0, 1, 1, 0), cfg).word == even
    up = nearest_word(Fraction(3, 2) + Fraction(1, 1 << 20), cfg)
    assert encode_round(Fir(0, 0, 1, 1, 1), cfg).word == up


def test_encode_round_never_produces_zero_or_nar():
    for es in range(5):
        cfg = PositConfig(8, es)
        rng = random.Random(99 + es)
        for _ in range(2000):
            te = rng.randint(-200, 200)
            frac = rng.getrandbits(10)
            w = encode_round(Fir(rng.getrandbits(1), te, frac, 10, rng.getrandbits(1)), cfg)
            assert w.word != 0 and not w.is_nar()


def test_encode_round_explain_paths():
    _, info = encode_round_explain(Fir(0, 0, 0, 0), C8)
    assert info["path"] == "exact"
    _, info = encode_round_explain(Fir(0, 0, 1, 6), C8)  # drops one fraction bit
    assert info["path"] == "grs"
    _, info = encode_round_explain(Fir(0, 100, 0, 0), C8)
    assert info["path"] == "saturate-high"
    _, info = encode_round_explain(Fir(0, -11, 0, 0, 1), PositConfig(8, 1))
    assert info["path"] == "midpoint"
