import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from swprg import bits
from swprg.bp import (
    LayeredProgram,
    WindowCertificate,
    WindowViolation,
    acceptance_probability,
    all_accepting_labeler,
    build_certificate,
    canonical_debruijn_swbp,
    certificate_is_valid,
    check_window,
    evaluate,
    evaluate_int,
    pad_program,
    program_from_json,
    program_to_json,
    quotient_swbp,
)
from swprg.errors import ParameterError, ShapeError


def and_program():
    # accepts only 11: state 1 = "all ones so far", dies to rejecting state 0
    trans = (((0, 0), (0, 1)), ((0, 0), (0, 1)))
    return LayeredProgram(2, 2, 1, trans, (frozenset({1}), frozenset({1})))


def test_bits_roundtrip():
    assert bits.int_to_bits(6, 4) == (0, 1, 1, 0)  # LSB first
    assert bits.bits_to_int((0, 1, 1, 0)) == 6


@given(st.integers(min_value=0, max_value=2**16 - 1))
def test_bits_inverse(v):
    assert bits.bits_to_int(bits.int_to_bits(v, 16)) == v


def test_evaluate_and_program():
    p = and_program()
    assert evaluate(p, (1, 1)).accept
    for x in ((0, 0), (0, 1), (1, 0)):
        assert not evaluate(p, x).accept
    assert evaluate_int(p, 0b11)
    assert acceptance_probability(p) == Fraction(1, 4)


def test_evaluate_shape_error():
    with pytest.raises(ShapeError):
        evaluate(and_program(), (1, 1, 1))


def test_unanimity_vs_final_layer():
    # same transitions, intermediate accepting set shrunk: acceptance differs
    trans = (((0, 1), (1, 0)), ((0, 0), (1, 1)))
    full = LayeredProgram(2, 2, 0, trans, (frozenset({0, 1}), frozenset({1})))
    strict = LayeredProgram(2, 2, 0, trans, (frozenset({0}), frozenset({1})))
    accepted_full = {x for x in range(4) if evaluate_int(full, x)}
    accepted_strict = {x for x in range(4) if evaluate_int(strict, x)}
    assert accepted_strict < accepted_full


def test_acceptance_probability_matches_enumeration():
    rng = random.Random(11)
    for _ in range(25):
        n, w = rng.randint(1, 8), rng.randint(1, 4)
        trans = tuple(
            tuple((rng.randrange(w), rng.randrange(w)) for _ in range(w))
            for _ in range(n)
        )
        acc = tuple(
            frozenset(q for q in range(w) if rng.random() < 0.7) for _ in range(n)
        )
        p = LayeredProgram(n, w, rng.randrange(w), trans, acc)
        direct = Fraction(
            sum(evaluate_int(p, x) for x in range(1 << n)), 1 << n
        )
        assert acceptance_probability(p) == direct


def test_canonical_debruijn_is_window_t():
    for n, t in ((4, 1), (4, 2), (6, 2), (6, 3)):
        p, cert = canonical_debruijn_swbp(n, t, all_accepting_labeler)
        assert p.w == 1 << t
        assert isinstance(check_window(p, t), WindowCertificate)
        assert certificate_is_valid(p, cert)


def test_canonical_debruijn_reachable_prefix_tree():
    p, _ = canonical_debruijn_swbp(5, 3, all_accepting_labeler)
    reach = p.reachable()
    for i in range(6):
        assert reach[i] == frozenset(range(1 << min(i, 3)))


def test_window_violation_reported_with_witness():
    p, _ = canonical_debruijn_swbp(6, 2, all_accepting_labeler)
    # break the shift structure in the middle of the program
    tables = [list(map(list, layer)) for layer in p.trans]
    tables[3][0][0] = 3  # was (2*0+0) % 4 = 0
    bad = LayeredProgram(p.n, p.w, p.q0, tuple(
        tuple(tuple(e) for e in layer) for layer in tables
    ), p.acc)
    result = check_window(bad, 2)
    assert isinstance(result, WindowViolation)
    # the two routes agree
    assert build_certificate(bad, 2) is None
    # the witness is a real disagreement
    q, qp, word = result.q, result.q_prime, result.word
    assert bad.run_word(result.layer, q, word) != bad.run_word(result.layer, qp, word)


def test_window_size_is_not_smaller_than_true_window():
    p, _ = canonical_debruijn_swbp(6, 3, all_accepting_labeler)
    assert isinstance(check_window(p, 3), WindowCertificate)
    assert isinstance(check_window(p, 2), WindowViolation)


def test_certificate_rejects_tampering():
    p, cert = canonical_debruijn_swbp(5, 2, all_accepting_labeler)
    alphas = [list(a) for a in cert.alphas]
    alphas[3][0] ^= 1
    bad = WindowCertificate(cert.t, tuple(tuple(a) for a in alphas))
    assert not certificate_is_valid(p, bad)


def test_quotient_preserves_window_and_coarsens():
    canon, _ = canonical_debruijn_swbp(6, 2, all_accepting_labeler)
    merge = [[] for _ in range(7)]
    merge[3] = [[0, 1]]
    q = quotient_swbp(canon, merge)
    assert q.w <= canon.w
    assert isinstance(check_window(q, 2), WindowCertificate)


def test_quotient_trivial_merge_is_isomorphic():
    canon, _ = canonical_debruijn_swbp(4, 2, all_accepting_labeler)
    q = quotient_swbp(canon, [[] for _ in range(5)])
    assert acceptance_probability(q) == acceptance_probability(canon)
    assert q.w == canon.w


def test_pad_program_keeps_probability():
    p = and_program()
    padded = pad_program(p, 5)
    assert padded.n == 5
    assert acceptance_probability(padded) == acceptance_probability(p)


def test_json_roundtrip():
    p, _ = canonical_debruijn_swbp(5, 2, all_accepting_labeler)
    blob = json.dumps(program_to_json(p))
    q = program_from_json(json.loads(blob))
    assert q == p


def test_bad_parameters():
    with pytest.raises(ParameterError):
        canonical_debruijn_swbp(3, 4, all_accepting_labeler)
    with pytest.raises(ParameterError):
        LayeredProgram(1, 1, 0, (((0, 1),),), (frozenset({0}),))
