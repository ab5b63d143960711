import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from swprg.errors import ConfigurationError, ShapeError
from swprg.primitives import (
    Extractor,
    HashFamily,
    _IRREDUCIBLE,
    _gf_mul,
    aghp_set,
    cayley_extractor,
    cayley_extractor_from_set,
    extractor_from_json,
    extractor_output_distribution,
    flat_source,
    full_group_set,
    measure_bias,
    min_entropy,
    perfect_extractor,
    singleton_zero_set,
    statistical_distance,
    uniform_distribution,
)


def test_hash_family_exactly_pairwise_independent():
    fam = HashFamily(2, 2)
    seeds = 1 << fam.seed_bits
    for x1, x2 in itertools.combinations(range(4), 2):
        counts = {}
        for s in range(seeds):
            pair = (fam.eval(s, x1), fam.eval(s, x2))
            counts[pair] = counts.get(pair, 0) + 1
        # every (y1, y2) pair equally likely
        assert set(counts) == set(itertools.product(range(4), repeat=2))
        assert len(set(counts.values())) == 1


def test_hash_family_marginal_uniform():
    fam = HashFamily(3, 2)
    for x in range(8):
        counts = [0] * 4
        for s in range(1 << fam.seed_bits):
            counts[fam.eval(s, x)] += 1
        assert len(set(counts)) == 1


def test_gf_mul_field_axioms():
    for ell in (2, 3, 4):
        size = 1 << ell
        # every nonzero element has an inverse (multiplication is a bijection)
        for a in range(1, size):
            images = {_gf_mul(a, b, ell) for b in range(size)}
            assert images == set(range(size))
        # associativity on a sample
        for a, b, c in itertools.product(range(size), repeat=3):
            assert _gf_mul(_gf_mul(a, b, ell), c, ell) == _gf_mul(a, _gf_mul(b, c, ell), ell)


def test_irreducible_polys_have_no_roots_in_subfields():
    # a polynomial with a nontrivial factor of degree k <= d/2 would make
    # multiplication degenerate; bijectivity above covers 2..4, here we
    # sanity-check the table degrees
    for deg, poly in _IRREDUCIBLE.items():
        assert poly.bit_length() == deg + 1


def test_full_group_set_bias_zero():
    s = full_group_set(4)
    assert measure_bias(4, s.members) == 0


def test_singleton_zero_bias_one():
    s = singleton_zero_set(4)
    assert measure_bias(4, s.members) == 1


def test_aghp_bias_within_bound():
    for n, ell in ((4, 3), (6, 4), (8, 4)):
        s = aghp_set(n, ell)
        assert len(s.members) == 1 << (2 * ell)
        assert s.bias == measure_bias(n, tuple(s.members))
        assert s.bias <= Fraction(n - 1, 1 << ell)


def test_perfect_extractor_is_exact():
    ext = perfect_extractor(4)
    src = flat_source([3, 7, 9])
    out = extractor_output_distribution(ext, src)
    assert statistical_distance(out, uniform_distribution(4)) == 0


def test_cayley_extractor_bound_over_all_affine_sources():
    # exhaustive over every affine coset of dimension k = n - 1 at n = 6
    n, deficiency = 6, 1
    ext = cayley_extractor(n, deficiency, Fraction(1, 2))
    uniform = uniform_distribution(n)
    worst = Fraction(0)
    for basis in itertools.combinations(range(n), n - deficiency):
        span = [0]
        for b in basis:
            span += [v ^ (1 << b) for v in span]
        for shift in range(1 << n):
            coset = [v ^ shift for v in span]
            out = extractor_output_distribution(ext, flat_source(coset))
            worst = max(worst, statistical_distance(out, uniform))
    assert worst <= ext.eps


def test_cayley_extractor_bound_over_all_flat_sources_small():
    # truly exhaustive: every flat source of min-entropy 3 at n = 4;
    # distances computed on integer counts (denominator 8 * 2**d throughout)
    import numpy as np

    n, k = 4, 3
    ext = cayley_extractor_from_set(n, n - k, aghp_set(n, 4))
    per_x = np.zeros((1 << n, 1 << n), dtype=np.int64)
    for x in range(1 << n):
        for s in range(1 << ext.d):
            per_x[x, ext.apply(x, s)] += 1
    total = (1 << k) * (1 << ext.d)
    worst_l1 = 0
    for points in itertools.combinations(range(1 << n), 1 << k):
        counts = per_x[list(points)].sum(axis=0)
        worst_l1 = max(worst_l1, int(np.abs(counts * (1 << n) - total).sum()))
    worst = Fraction(worst_l1, 2 * total * (1 << n))
    assert worst <= ext.eps
    # spot-check the integer-count shortcut against the exact reference
    pts = tuple(range(1 << k))
    ref = statistical_distance(
        extractor_output_distribution(ext, flat_source(pts)),
        uniform_distribution(n),
    )
    fast = Fraction(
        int(np.abs(per_x[list(pts)].sum(axis=0) * (1 << n) - total).sum()),
        2 * total * (1 << n),
    )
    assert ref == fast


def test_cayley_extractor_refuses_infeasible():
    with pytest.raises(ConfigurationError):
        cayley_extractor(8, 4, Fraction(1, 10**6), max_seed_bits=10)


def test_extractor_json_roundtrip():
    ext = cayley_extractor(6, 2, Fraction(1, 2))
    back = extractor_from_json(ext.to_json())
    assert back == ext
    p = perfect_extractor(5)
    assert extractor_from_json(p.to_json()) == p


def test_min_entropy_flat():
    assert min_entropy(flat_source(range(8))) == 3.0


def test_statistical_distance_basic():
    x = {0: Fraction(1)}
    y = uniform_distribution(1)
    assert statistical_distance(x, y) == Fraction(1, 2)
    with pytest.raises(ShapeError):
        statistical_distance(x, y, universe=[1])


@given(st.integers(0, 63), st.integers(0, 63))
def test_gf_mul_commutative(a, b):
    assert _gf_mul(a, b, 6) == _gf_mul(b, a, 6)
