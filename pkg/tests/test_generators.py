import json
from fractions import Fraction

import numpy as np
import pytest

from swprg.bits import bits_to_int
from swprg.errors import CapExceeded, ParameterError, ShapeError
from swprg.generators import (
    ExhaustiveRectangle,
    PairwiseRectangle,
    base_exhaustive,
    base_nisan,
    build_swbp_prg,
    generator_from_json,
    interleave,
    inw_stretch,
    rect_compose,
    with_measured_error,
)
from swprg.primitives import cayley_extractor, perfect_extractor


def test_exhaustive_base_identity():
    g = base_exhaustive(3)
    assert g.d == 3 and g.blocks == 1 and g.block_bits == 3
    assert g.eps_budget == 0
    for s in range(8):
        assert g.expand_int(s) == s
    assert list(g.expand_all()) == list(range(8))


def test_expand_bitstring_interface():
    g = base_exhaustive(4)
    seed = (1, 0, 1, 1)
    assert g.expand(seed) == seed
    assert g.expand_blocks(seed) == (seed,)
    with pytest.raises(ShapeError):
        g.expand((1, 0))


def test_nisan_base_shape_and_seed_budget():
    g = base_nisan(4, 2, Fraction(1, 4))
    # word 1, two levels, each hash over 1 bit costs 2 seed bits
    assert g.word == 1 and g.levels == 2 and g.d == 5
    outs = g.expand_all()
    assert len(outs) == 32
    assert all(0 <= int(v) < 16 for v in outs)


def test_nisan_recursion_structure():
    # with both hashes fixed to the identity (A=1, c=0), the output is the
    # seed word repeated
    g = base_nisan(4, 2, Fraction(1, 4))
    # seed layout: word bit, then hash level 1 (2 bits), hash level 2 (2 bits)
    ident = 0b01  # A=1, c=0 packed per HashFamily(1, 1)
    seed = bits_to_int((1,)) | (ident << 1) | (ident << 3)
    assert g.expand_int(seed) == 0b1111


def test_nisan_measured_error_overrides_target():
    g = base_nisan(4, 2, Fraction(1, 4))
    assert g.eps_budget == Fraction(1, 4)
    g2 = with_measured_error(g, Fraction(1, 8))
    assert g2.eps_budget == Fraction(1, 8)
    assert g.eps_budget == Fraction(1, 4)  # original untouched


def test_nisan_rejects_bad_shape():
    with pytest.raises(ParameterError):
        base_nisan(6, 2, Fraction(1, 4), levels=2)  # 6 != word << 2


def test_inw_stretch_perfect_extractor_concatenates():
    g = base_exhaustive(2)
    st = inw_stretch(g, perfect_extractor(2))
    assert st.blocks == 2 and st.d == 4 and st.eps_budget == 0
    # seed = (s, s'): output is s then s'
    for s in range(4):
        for s2 in range(4):
            assert st.expand_int(s | (s2 << 2)) == s | (s2 << 2)


def test_inw_stretch_cayley_extractor_expand_all_matches_scalar():
    ext = cayley_extractor(4, 2, Fraction(1, 2))
    st = inw_stretch(base_exhaustive(4), ext)
    outs = st.expand_all()
    for seed in range(0, 1 << st.d, 7):
        assert int(outs[seed]) == st.expand_int(seed)


def test_inw_budget_constant():
    g = with_measured_error(base_nisan(4, 2, Fraction(1, 4)), Fraction(1, 8))
    ext = cayley_extractor(g.d, 2, Fraction(1, 2))
    st = inw_stretch(g, ext)
    assert st.eps_budget == 3 * max(Fraction(1, 8), ext.eps)


def test_rect_compose_exhaustive_rectangle():
    base = base_exhaustive(2)
    g = rect_compose(base, ExhaustiveRectangle(3, 2))
    assert g.blocks == 3 and g.block_bits == 2 and g.d == 6
    for s in range(64):
        assert g.expand_int(s) == s  # identity base, identity rectangle


def test_rect_compose_budget():
    base = with_measured_error(base_nisan(4, 2, Fraction(1, 4)), Fraction(1, 8))
    rect = PairwiseRectangle(4, base.d, eps_cr=Fraction(1, 16))
    g = rect_compose(base, rect)
    assert g.eps_budget == 4 * Fraction(1, 8) + Fraction(1, 16)


def test_pairwise_rectangle_blocks_are_hash_values():
    rect = PairwiseRectangle(4, 3)
    fam = rect.hash_family
    for seed in range(0, 1 << rect.d, 11):
        v = rect.expand_int(seed)
        for i in range(4):
            assert (v >> (3 * i)) & 7 == fam.eval(seed, i)


def test_interleave_order():
    g1 = base_exhaustive(2)
    g2 = base_exhaustive(2)
    st = interleave(inw_stretch(g1, perfect_extractor(2)),
                    inw_stretch(g2, perfect_extractor(2)))
    # blocks x1 y1 x2 y2, 2 bits each
    seed = 0b0011_0110  # g1 seed = 0110 (x1=10b, x2=01b), g2 seed = 0011
    out = st.expand_int(seed)
    x1, x2 = 0b10, 0b01
    y1, y2 = 0b11, 0b00
    assert out == x1 | (y1 << 2) | (x2 << 4) | (y2 << 6)


def test_interleave_budget_and_shape_check():
    a = inw_stretch(base_exhaustive(2), perfect_extractor(2))
    with pytest.raises(ShapeError):
        interleave(a, base_exhaustive(2))
    g = with_measured_error(base_nisan(4, 2, Fraction(1, 4)), Fraction(1, 8))
    st = interleave(g, g)
    assert st.eps_budget == 2 * Fraction(1, 8)


def test_expand_all_matches_expand_int_everywhere():
    specs = [
        base_exhaustive(3),
        base_nisan(4, 2, Fraction(1, 4)),
        inw_stretch(base_exhaustive(3), perfect_extractor(3)),
        rect_compose(base_exhaustive(2), PairwiseRectangle(3, 2)),
        interleave(base_exhaustive(3), base_exhaustive(3)),
    ]
    for g in specs:
        outs = g.expand_all()
        assert len(outs) == 1 << g.d
        for s in range(1 << g.d):
            assert int(outs[s]) == g.expand_int(s), type(g).__name__


def test_expand_all_cap_refusal():
    g = base_exhaustive(10)
    with pytest.raises(CapExceeded) as exc:
        g.expand_all(cap=8)
    assert exc.value.required_bits == 10


def test_build_swbp_prg_shapes():
    base = base_exhaustive(2)
    for strategy in ("inw", "rect"):
        g = build_swbp_prg(8, 2, 4, base, strategy)
        assert g.blocks * g.block_bits == 8
        assert g.eps_budget == 0
    with pytest.raises(ParameterError):
        build_swbp_prg(10, 2, 4, base, "inw")  # 10 not a multiple of 4... of 2t
    with pytest.raises(ParameterError):
        build_swbp_prg(12, 2, 4, base, "inw")  # n/2t = 3 not a power of two
    g = build_swbp_prg(12, 2, 4, base, "rect")
    assert g.blocks == 6


def test_build_swbp_prg_budget_closed_forms():
    base = with_measured_error(base_nisan(2, 2, Fraction(1, 4)), Fraction(1, 16))
    # inw with perfect extractors: 2 * 3**r * eps with r = log2(n / 2t)
    g = build_swbp_prg(16, 2, 4, base, "inw")
    assert g.eps_budget == 2 * 9 * Fraction(1, 16)
    # rect with exhaustive rectangle: 2 * (r * eps + 0) with r = n / 2t
    g2 = build_swbp_prg(16, 2, 4, base, "rect")
    assert g2.eps_budget == 2 * 4 * Fraction(1, 16)


def test_generator_json_roundtrip():
    base = with_measured_error(base_nisan(4, 2, Fraction(1, 4)), Fraction(1, 8))
    specs = [
        base,
        inw_stretch(base, cayley_extractor(base.d, 2, Fraction(1, 2))),
        rect_compose(base, PairwiseRectangle(3, base.d, Fraction(1, 32))),
        interleave(base, base),
        build_swbp_prg(8, 2, 4, base_exhaustive(2), "rect"),
    ]
    for g in specs:
        blob = json.dumps(g.to_json())
        back = generator_from_json(json.loads(blob))
        assert back == g
        assert back.eps_budget == g.eps_budget
