"""Layered programs with unanimity acceptance and the sliding-window check.

A layered program of length ``n`` and width ``w`` has states ``0..w-1``, an
initial state, one transition table per layer, and one accepting set per
layer.  It accepts an input iff the state reached after every non-empty
prefix lies in that layer's accepting set.  A plain (accept-at-the-end)
program is the special case where every accepting set but the last equals
the full state set.

All probabilities are exact ``Fraction`` values with denominator ``2**n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

from .bits import BitString, int_to_bits
from .errors import ParameterError, ShapeError

Labeler = Callable[[int, BitString], bool]


@dataclass(frozen=True)
class LayeredProgram:
    n: int
    w: int
    q0: int
    # trans[i][q] = (next state on 0, next state on 1) for layer i+1
    trans: Tuple[Tuple[Tuple[int, int], ...], ...]
    # acc[i] = accepting set after reading i+1 bits
    acc: Tuple[frozenset, ...]

    def __post_init__(self):
        if self.n < 1 or self.w < 1:
            raise ParameterError("length and width must be positive")
        if not 0 <= self.q0 < self.w:
            raise ParameterError("initial state out of range")
        if len(self.trans) != self.n or len(self.acc) != self.n:
            raise ParameterError("need one transition table and accepting set per layer")
        for i, table in enumerate(self.trans):
            if len(table) != self.w:
                raise ParameterError(f"layer {i + 1} table has wrong size")
            for pair in table:
                for q in pair:
                    if not 0 <= q < self.w:
                        raise ParameterError(f"layer {i + 1} transition leaves the state set")
        for i, a in enumerate(self.acc):
            if not a <= frozenset(range(self.w)):
                raise ParameterError(f"layer {i + 1} accepting set leaves the state set")

    def step(self, layer: int, q: int, bit: int) -> int:
        """Apply the transition of layer ``layer`` (1-based) to state ``q``."""
        return self.trans[layer - 1][q][bit]

    def run_word(self, layer: int, q: int, word: Sequence[int]) -> int:
        """Extended transition: feed ``word`` starting at layer ``layer + 1``,
        from state ``q`` in layer ``layer``."""
        for j, b in enumerate(word):
            q = self.trans[layer + j][q][b]
        return q

    def reachable(self) -> Tuple[frozenset, ...]:
        """States reachable from the initial state, per layer 0..n."""
        sets: List[frozenset] = [frozenset([self.q0])]
        for i in range(self.n):
            nxt = set()
            for q in sets[-1]:
                nxt.add(self.trans[i][q][0])
                nxt.add(self.trans[i][q][1])
            sets.append(frozenset(nxt))
        return tuple(sets)


class EvalResult(NamedTuple):
    accept: bool
    trace: Tuple[int, ...]


def evaluate(p: LayeredProgram, x: Sequence[int]) -> EvalResult:
    """Run ``p`` on ``x``; accept iff every visited state (after each
    non-empty prefix) is accepting in its layer.  Returns the full trace
    q0..qn reached regardless of acceptance."""
    if len(x) != p.n:
        raise ShapeError(f"input has length {len(x)}, program expects {p.n}")
    q = p.q0
    trace = [q]
    ok = True
    for i, b in enumerate(x):
        q = p.trans[i][q][b]
        trace.append(q)
        if q not in p.acc[i]:
            ok = False
    return EvalResult(ok, tuple(trace))


def evaluate_int(p: LayeredProgram, x: int) -> bool:
    """Like :func:`evaluate` on a packed input, acceptance only."""
    q = p.q0
    for i in range(p.n):
        q = p.trans[i][q][(x >> i) & 1]
        if q not in p.acc[i]:
            return False
    return True


def acceptance_probability(p: LayeredProgram) -> Fraction:
    """Pr over uniform inputs that ``p`` accepts, by layer DP.

    Propagates a sub-distribution over states, dropping mass that falls
    outside an accepting set.  Exact: the result has denominator 2**n.
    """
    dist = {p.q0: Fraction(1)}
    half = Fraction(1, 2)
    for i in range(p.n):
        nxt: dict = {}
        for q, mass in dist.items():
            for b in (0, 1):
                q2 = p.trans[i][q][b]
                if q2 in p.acc[i]:
                    nxt[q2] = nxt.get(q2, Fraction(0)) + mass * half
        dist = nxt
    return sum(dist.values(), Fraction(0))


# --- sliding-window property ------------------------------------------------


@dataclass(frozen=True)
class WindowCertificate:
    """Synchronization tables witnessing the sliding-window property.

    ``alphas[i]`` maps each window word (packed MSB-first, length
    ``min(i, t)``) to the state reached in layer ``i`` under any input
    ending in that word.
    """

    t: int
    alphas: Tuple[Tuple[int, ...], ...]

    def k(self, i: int) -> int:
        return min(i, self.t)


@dataclass(frozen=True)
class WindowViolation:
    layer: int          # layer index i holding the disagreeing states
    q: int
    q_prime: int
    word: BitString     # window word of length t, in reading order


WindowCheckResult = Union[WindowCertificate, WindowViolation]


def _word_from_msb_index(value: int, length: int) -> BitString:
    """Window words are packed MSB-first: the oldest bit is the top bit."""
    return tuple((value >> (length - 1 - j)) & 1 for j in range(length))


def check_window(p: LayeredProgram, t: int) -> WindowCheckResult:
    """Decide whether ``p`` has window size ``t``.

    Returns a certificate, or a concrete (layer, q, q', word) witness where
    two reachable states disagree after reading the same ``t`` bits.  Only
    states reachable from the initial state are compared; disagreements
    among unreachable states are ignored.
    """
    if t < 1 or t > p.n:
        raise ParameterError(f"window size {t} out of range 1..{p.n}")
    reach = p.reachable()
    for i in range(p.n - t + 1):
        states = sorted(reach[i])
        if len(states) < 2:
            continue
        for yv in range(1 << t):
            word = _word_from_msb_index(yv, t)
            ref = p.run_word(i, states[0], word)
            for q in states[1:]:
                if p.run_word(i, q, word) != ref:
                    return WindowViolation(i, states[0], q, word)
    cert = build_certificate(p, t)
    assert cert is not None, "direct scan passed but certificate construction failed"
    return cert


def build_certificate(p: LayeredProgram, t: int) -> Optional[WindowCertificate]:
    """Forward recursive construction of the synchronization tables.

    ``alpha_0`` maps the empty word to the initial state; each next table is
    induced by single-step transitions, dropping the oldest window bit once
    the window is full.  Returns None if the two candidate predecessors of
    some window word disagree, i.e. the program is not a window-``t``
    program.  Independent of :func:`check_window`'s direct scan (single-step
    lookups only)."""
    if t < 1 or t > p.n:
        raise ParameterError(f"window size {t} out of range 1..{p.n}")
    alphas: List[Tuple[int, ...]] = [(p.q0,)]
    for i in range(p.n):
        k = min(i, t)
        k_next = min(i + 1, t)
        cur = alphas[i]
        nxt: List[Optional[int]] = [None] * (1 << k_next)
        if k < t:
            # prefix-tree regime: word wy extends word w
            for wv in range(1 << k):
                for y in (0, 1):
                    nxt[(wv << 1) | y] = p.trans[i][cur[wv]][y]
        else:
            # full window: both xw-predecessors must map to the same state
            for wv in range(1 << (t - 1)):
                for y in (0, 1):
                    tgt = ((wv << 1) | y) & ((1 << t) - 1)
                    c0 = p.trans[i][cur[wv]][y]
                    c1 = p.trans[i][cur[wv | (1 << (t - 1))]][y]
                    if c0 != c1:
                        return None
                    nxt[tgt] = c0
        alphas.append(tuple(nxt))  # type: ignore[arg-type]
    return WindowCertificate(t, tuple(alphas))


def certificate_is_valid(p: LayeredProgram, cert: WindowCertificate) -> bool:
    """Check both certificate clauses by table lookup."""
    t = cert.t
    if len(cert.alphas) != p.n + 1 or cert.alphas[0][0] != p.q0:
        return False
    for i in range(p.n):
        k = min(i, t)
        cur = cert.alphas[i]
        nxt = cert.alphas[i + 1]
        if i < t:
            for wv in range(1 << k):
                for y in (0, 1):
                    if p.trans[i][cur[wv]][y] != nxt[(wv << 1) | y]:
                        return False
        else:
            for xv in range(2):
                for wv in range(1 << (t - 1)):
                    for y in (0, 1):
                        src = (xv << (t - 1)) | wv
                        tgt = ((wv << 1) | y) & ((1 << t) - 1)
                        if p.trans[i][cur[src]][y] != nxt[tgt]:
                            return False
    return True


# --- canonical de Bruijn construction ----------------------------------------


def canonical_debruijn_swbp(
    n: int, t: int, labeler: Labeler
) -> Tuple[LayeredProgram, WindowCertificate]:
    """The prototypical window-``t`` program.

    Layer ``i`` states are the words of length ``min(i, t)``, packed
    MSB-first into ints (the prefix tree for i < t, then the de Bruijn shift
    ``xw -> wy``).  One shared transition table ``q -> (2q + y) mod 2**t``
    realizes both regimes.  ``labeler(layer, word)`` decides which window
    words are accepting at each layer 1..n.
    """
    if t < 1 or t > n:
        raise ParameterError(f"window size {t} out of range 1..{n}")
    w = 1 << t
    table = tuple((((q << 1) & (w - 1), ((q << 1) | 1) & (w - 1)) for q in range(w)))
    trans = tuple(table for _ in range(n))
    acc = []
    for i in range(1, n + 1):
        k = min(i, t)
        layer_acc = frozenset(
            wv for wv in range(1 << k) if labeler(i, _word_from_msb_index(wv, k))
        )
        acc.append(layer_acc)
    prog = LayeredProgram(n, w, 0, trans, tuple(acc))
    cert = build_certificate(prog, t)
    assert cert is not None
    return prog, cert


def all_accepting_labeler(layer: int, word: BitString) -> bool:
    return True


# --- quotients ----------------------------------------------------------------


class _Dsu:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def quotient_swbp(
    canonical: LayeredProgram, merge: Sequence[Sequence[Sequence[int]]]
) -> LayeredProgram:
    """Merge states per layer and propagate until transitions are
    well-defined on blocks.

    ``merge[i]`` is a list of state groups to merge in layer ``i``
    (0..n); merging states in one layer may force merges in later layers,
    which always terminates since partitions only coarsen.  A block accepts
    iff all its reachable member states accept.
    """
    n, w = canonical.n, canonical.w
    dsus = [_Dsu(w) for _ in range(n + 1)]
    for i, groups in enumerate(merge):
        for group in groups:
            group = list(group)
            for q in group[1:]:
                dsus[i].union(group[0], q)
    reach = canonical.reachable()
    changed = True
    while changed:
        changed = False
        for i in range(n):
            by_block: dict = {}
            for q in reach[i]:
                by_block.setdefault(dsus[i].find(q), []).append(q)
            for members in by_block.values():
                rep = members[0]
                for q in members[1:]:
                    for b in (0, 1):
                        u = canonical.trans[i][rep][b]
                        v = canonical.trans[i][q][b]
                        if dsus[i + 1].union(u, v):
                            changed = True
    # dense renumbering of reachable blocks per layer
    ids: List[dict] = []
    for i in range(n + 1):
        layer_ids: dict = {}
        for q in sorted(reach[i]):
            r = dsus[i].find(q)
            if r not in layer_ids:
                layer_ids[r] = len(layer_ids)
        ids.append(layer_ids)
    width = max(len(m) for m in ids)
    trans = []
    acc = []
    for i in range(n):
        table = [(0, 0)] * width
        for q in reach[i]:
            src = ids[i][dsus[i].find(q)]
            table[src] = tuple(
                ids[i + 1][dsus[i + 1].find(canonical.trans[i][q][b])] for b in (0, 1)
            )
        trans.append(tuple(table))
        block_members: dict = {}
        for q in reach[i + 1]:
            block_members.setdefault(ids[i + 1][dsus[i + 1].find(q)], []).append(q)
        acc.append(
            frozenset(
                blk
                for blk, members in block_members.items()
                if all(q in canonical.acc[i] for q in members)
            )
        )
    return LayeredProgram(n, width, ids[0][dsus[0].find(canonical.q0)], tuple(trans), tuple(acc))


def relabel(p: LayeredProgram, labeler: Callable[[int, int], bool]) -> LayeredProgram:
    """Replace accepting sets; ``labeler(layer, state)`` over reachable states."""
    reach = p.reachable()
    acc = tuple(
        frozenset(q for q in reach[i + 1] if labeler(i + 1, q)) for i in range(p.n)
    )
    return LayeredProgram(p.n, p.w, p.q0, p.trans, acc)


def pad_program(p: LayeredProgram, n_target: int) -> LayeredProgram:
    """Extend with always-accepting identity layers that ignore their bits."""
    if n_target < p.n:
        raise ParameterError("target length shorter than program")
    ident = tuple((q, q) for q in range(p.w))
    extra = n_target - p.n
    trans = p.trans + tuple(ident for _ in range(extra))
    full = frozenset(range(p.w))
    acc = p.acc + tuple(full for _ in range(extra))
    return LayeredProgram(n_target, p.w, p.q0, trans, acc)


# --- JSON ---------------------------------------------------------------------


def program_to_json(p: LayeredProgram) -> dict:
    return {
        "n": p.n,
        "w": p.w,
        "q0": p.q0,
        "layers": [
            {"trans": [list(pair) for pair in p.trans[i]], "acc": sorted(p.acc[i])}
            for i in range(p.n)
        ],
    }


def program_from_json(data: dict) -> LayeredProgram:
    layers = data["layers"]
    return LayeredProgram(
        data["n"],
        data["w"],
        data["q0"],
        tuple(tuple(tuple(pair) for pair in layer["trans"]) for layer in layers),
        tuple(frozenset(layer["acc"]) for layer in layers),
    )


def load_program(path: str) -> LayeredProgram:
    with open(path) as f:
        return program_from_json(json.load(f))
