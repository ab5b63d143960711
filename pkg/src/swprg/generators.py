"""The generator algebra: base PRGs, extractor-based stretching, rectangle
composition, and interleaving, each carrying an exact error budget.

A generator has seed length ``d`` and outputs ``blocks`` blocks of
``block_bits`` bits; the flat output concatenates the blocks (block 0
lowest).  ``eps_budget`` is the exact rational error the construction
promises against the program class it was built for; budgets compose per
combinator and are recomputable from the construction tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from .bits import BitString, bits_to_int, int_to_bits
from .errors import CapExceeded, ParameterError, ShapeError
from .primitives import (
    Extractor,
    HashFamily,
    extractor_from_json,
    perfect_extractor,
    _frac_parse,
    _frac_str,
)

DEFAULT_SEED_CAP = 24


class GeneratorSpec:
    """Base class; concrete nodes are frozen dataclasses below."""

    d: int
    blocks: int
    block_bits: int

    @property
    def flat_bits(self) -> int:
        return self.blocks * self.block_bits

    @property
    def eps_budget(self) -> Fraction:
        raise NotImplementedError

    def expand_int(self, seed: int) -> int:
        raise NotImplementedError

    def expand(self, seed: BitString) -> BitString:
        if len(seed) != self.d:
            raise ShapeError(f"seed has {len(seed)} bits, generator expects {self.d}")
        return int_to_bits(self.expand_int(bits_to_int(seed)), self.flat_bits)

    def expand_blocks(self, seed: BitString) -> Tuple[BitString, ...]:
        flat = self.expand(seed)
        t = self.block_bits
        return tuple(flat[i * t : (i + 1) * t] for i in range(self.blocks))

    def expand_all(self, cap: int = DEFAULT_SEED_CAP) -> np.ndarray:
        """Outputs for every seed, as packed uint64, seed order.

        Cached per spec; treat the result as read-only.
        """
        if self.d > cap:
            raise CapExceeded(
                f"seed enumeration needs 2**{self.d} expansions (cap {cap} bits)",
                self.d,
            )
        if self.flat_bits > 63:
            raise CapExceeded(
                f"flat output of {self.flat_bits} bits does not pack into uint64",
                self.flat_bits,
            )
        return _expand_all_cached(self)

    def to_json(self) -> dict:
        raise NotImplementedError


@lru_cache(maxsize=128)
def _expand_all_cached(spec: "GeneratorSpec") -> np.ndarray:
    return spec._expand_all_impl()


def expand(g: GeneratorSpec, seed: BitString) -> BitString:
    return g.expand(seed)


# --- base generators -----------------------------------------------------------


@dataclass(frozen=True)
class ExhaustiveBase(GeneratorSpec):
    """Identity generator: d = t, output = seed.  Zero error."""

    t: int

    @property
    def d(self) -> int:
        return self.t

    blocks = 1

    @property
    def block_bits(self) -> int:
        return self.t

    @property
    def eps_budget(self) -> Fraction:
        return Fraction(0)

    def expand_int(self, seed: int) -> int:
        return seed

    def _expand_all_impl(self) -> np.ndarray:
        return np.arange(1 << self.t, dtype=np.uint64)

    def to_json(self) -> dict:
        return {"kind": "exhaustive", "t": self.t}


def base_exhaustive(t: int) -> ExhaustiveBase:
    if t < 1:
        raise ParameterError("output length must be positive")
    return ExhaustiveBase(t)


@dataclass(frozen=True)
class NisanBase(GeneratorSpec):
    """Recursive hash-doubling base generator.

    Output of 2**levels words of ``word`` bits each, t = word << levels:
    level 0 outputs the seed word; level k outputs
    level_{k-1}(s) || level_{k-1}(h_k(s)) with one affine hash per level.
    Seed = word, then the per-level hash descriptions.  ``eps_target`` is a
    configured goal; once the true error has been measured exhaustively,
    attach it with :func:`with_measured_error` so downstream budgets use the
    measured value.
    """

    t: int
    w: int
    eps_target: Fraction
    levels: int
    measured_eps: Optional[Fraction] = None

    def __post_init__(self):
        if self.levels < 0 or self.t <= 0:
            raise ParameterError("bad shape")
        if (self.word << self.levels) != self.t:
            raise ParameterError(
                f"t={self.t} is not word * 2**levels; pad t to a power of two"
            )

    @property
    def word(self) -> int:
        word = self.t >> self.levels
        if word < 1:
            raise ParameterError("more levels than output bits")
        return word

    @property
    def hash_family(self) -> HashFamily:
        return HashFamily(self.word, self.word)

    @property
    def d(self) -> int:
        return self.word + self.levels * self.hash_family.seed_bits

    blocks = 1

    @property
    def block_bits(self) -> int:
        return self.t

    @property
    def eps_budget(self) -> Fraction:
        return self.measured_eps if self.measured_eps is not None else self.eps_target

    def expand_int(self, seed: int) -> int:
        word = self.word
        hbits = self.hash_family.seed_bits
        s0 = seed & ((1 << word) - 1)
        hseeds = [
            (seed >> (word + k * hbits)) & ((1 << hbits) - 1) for k in range(self.levels)
        ]
        fam = self.hash_family

        def rec(k: int, s: int) -> int:
            if k == 0:
                return s
            lower = rec(k - 1, s)
            upper = rec(k - 1, fam.eval(hseeds[k - 1], s))
            return lower | (upper << (word << (k - 1)))

        return rec(self.levels, s0)

    def _expand_all_impl(self) -> np.ndarray:
        return np.fromiter(
            (self.expand_int(s) for s in range(1 << self.d)),
            dtype=np.uint64,
            count=1 << self.d,
        )

    def to_json(self) -> dict:
        data = {
            "kind": "nisan",
            "t": self.t,
            "w": self.w,
            "eps_target": _frac_str(self.eps_target),
            "levels": self.levels,
        }
        if self.measured_eps is not None:
            data["measured_eps"] = _frac_str(self.measured_eps)
        return data


def base_nisan(
    t: int, w: int, eps_base: Fraction, levels: Optional[int] = None
) -> NisanBase:
    if levels is None:
        levels = max(0, math.ceil(math.log2(t)))
    return NisanBase(t, w, Fraction(eps_base), levels)


def with_measured_error(g: NisanBase, eps: Fraction) -> NisanBase:
    return replace(g, measured_eps=Fraction(eps))


# --- rectangle generators --------------------------------------------------------


@dataclass(frozen=True)
class ExhaustiveRectangle:
    """Seed = all block seeds concatenated; zero rectangle error."""

    blocks: int
    block_bits: int

    @property
    def d(self) -> int:
        return self.blocks * self.block_bits

    eps_cr = Fraction(0)

    def expand_int(self, seed: int) -> int:
        return seed

    def _expand_all_impl(self) -> np.ndarray:
        return np.arange(1 << self.d, dtype=np.uint64)

    def to_json(self) -> dict:
        return {
            "kind": "exhaustive_rect",
            "blocks": self.blocks,
            "block_bits": self.block_bits,
        }


@dataclass(frozen=True)
class PairwiseRectangle:
    """Block i = h(i) for a pairwise-independent hash given by the seed.

    ``eps_cr`` must come from measurement at desk scale; the default 1 is
    the trivial bound, never an assumption of quality.
    """

    blocks: int
    block_bits: int
    eps_cr: Fraction = Fraction(1)

    @property
    def hash_family(self) -> HashFamily:
        a = max(1, (self.blocks - 1).bit_length())
        return HashFamily(a, self.block_bits)

    @property
    def d(self) -> int:
        return self.hash_family.seed_bits

    def expand_int(self, seed: int) -> int:
        fam = self.hash_family
        out = 0
        for i in range(self.blocks):
            out |= fam.eval(seed, i) << (i * self.block_bits)
        return out

    def _expand_all_impl(self) -> np.ndarray:
        return np.fromiter(
            (self.expand_int(s) for s in range(1 << self.d)),
            dtype=np.uint64,
            count=1 << self.d,
        )

    def to_json(self) -> dict:
        return {
            "kind": "pairwise_rect",
            "blocks": self.blocks,
            "block_bits": self.block_bits,
            "eps_cr": _frac_str(self.eps_cr),
        }


RectangleGenerator = object  # duck-typed: ExhaustiveRectangle | PairwiseRectangle


def rect_from_json(data: dict):
    if data["kind"] == "exhaustive_rect":
        return ExhaustiveRectangle(data["blocks"], data["block_bits"])
    if data["kind"] == "pairwise_rect":
        return PairwiseRectangle(
            data["blocks"], data["block_bits"], _frac_parse(data["eps_cr"])
        )
    raise ParameterError(f"unknown rectangle kind {data['kind']!r}")


# --- combinators ------------------------------------------------------------------


@dataclass(frozen=True)
class InwStretch(GeneratorSpec):
    """Double the block count: output G(s) followed by G(Ext(s, s')).

    Seed = inner seed (low bits) then extractor seed.  Budget
    3 * max(inner error, extractor error): the lemma's single epsilon taken
    as a conservative max over the two roles.
    """

    inner: GeneratorSpec
    ext: Extractor

    def __post_init__(self):
        if self.ext.n != self.inner.d:
            raise ShapeError(
                f"extractor works on {self.ext.n} bits, inner seed has {self.inner.d}"
            )

    @property
    def d(self) -> int:
        return self.inner.d + self.ext.d

    @property
    def blocks(self) -> int:
        return 2 * self.inner.blocks

    @property
    def block_bits(self) -> int:
        return self.inner.block_bits

    @property
    def eps_budget(self) -> Fraction:
        return 3 * max(self.inner.eps_budget, self.ext.eps)

    def expand_int(self, seed: int) -> int:
        s_g = seed & ((1 << self.inner.d) - 1)
        s_e = seed >> self.inner.d
        low = self.inner.expand_int(s_g)
        high = self.inner.expand_int(self.ext.apply(s_g, s_e))
        return low | (high << self.inner.flat_bits)

    def _expand_all_impl(self) -> np.ndarray:
        inner_all = self.inner.expand_all(cap=self.inner.d)
        idx = np.arange(1 << self.d, dtype=np.uint64)
        s_g = idx & np.uint64((1 << self.inner.d) - 1)
        s_e = idx >> np.uint64(self.inner.d)
        if self.ext.kind == "perfect":
            s2 = s_e
        elif self.ext.kind == "cayley":
            gens = np.asarray(self.ext.generators, dtype=np.uint64)
            s2 = s_g ^ gens[s_e]
        else:  # pragma: no cover
            s2 = np.fromiter(
                (self.ext.apply(int(a), int(b)) for a, b in zip(s_g, s_e)),
                dtype=np.uint64,
                count=len(idx),
            )
        return inner_all[s_g] | (inner_all[s2] << np.uint64(self.inner.flat_bits))

    def to_json(self) -> dict:
        return {
            "kind": "inw",
            "inner": self.inner.to_json(),
            "extractor": self.ext.to_json(),
        }


def inw_stretch(g: GeneratorSpec, ext: Extractor) -> InwStretch:
    return InwStretch(g, ext)


@dataclass(frozen=True)
class RectCompose(GeneratorSpec):
    """Feed rectangle-generated seeds into independent copies of a base.

    Budget r * eps_base + eps_cr: the telescoping product bound plus the
    rectangle generator's own error.
    """

    base: GeneratorSpec
    rect: object

    def __post_init__(self):
        if self.base.blocks != 1:
            raise ShapeError("rectangle composition needs a single-block base")
        if self.rect.block_bits != self.base.d:
            raise ShapeError(
                f"rectangle blocks carry {self.rect.block_bits} bits, "
                f"base seed needs {self.base.d}"
            )

    @property
    def d(self) -> int:
        return self.rect.d

    @property
    def blocks(self) -> int:
        return self.rect.blocks

    @property
    def block_bits(self) -> int:
        return self.base.block_bits

    @property
    def eps_budget(self) -> Fraction:
        return self.blocks * self.base.eps_budget + self.rect.eps_cr

    def expand_int(self, seed: int) -> int:
        rv = self.rect.expand_int(seed)
        m = self.rect.block_bits
        t = self.base.block_bits
        out = 0
        for i in range(self.blocks):
            out |= self.base.expand_int((rv >> (i * m)) & ((1 << m) - 1)) << (i * t)
        return out

    def _expand_all_impl(self) -> np.ndarray:
        rect_all = self.rect._expand_all_impl()
        base_all = self.base.expand_all(cap=self.base.d)
        m = np.uint64(self.rect.block_bits)
        mask = np.uint64((1 << self.rect.block_bits) - 1)
        t = self.base.block_bits
        out = np.zeros(len(rect_all), dtype=np.uint64)
        for i in range(self.blocks):
            out |= base_all[(rect_all >> (np.uint64(i) * m)) & mask] << np.uint64(i * t)
        return out

    def to_json(self) -> dict:
        return {
            "kind": "rect_compose",
            "base": self.base.to_json(),
            "rect": self.rect.to_json(),
        }


def rect_compose(base: GeneratorSpec, rect) -> RectCompose:
    return RectCompose(base, rect)


@dataclass(frozen=True)
class Interleave(GeneratorSpec):
    """Alternate the blocks of two same-shape generators: x1 y1 x2 y2 ...

    Independent seed halves (g1 low, g2 high).  Budget twice the larger
    component budget, valid against window-size <= block_bits programs.
    """

    g1: GeneratorSpec
    g2: GeneratorSpec

    def __post_init__(self):
        if (self.g1.blocks, self.g1.block_bits) != (self.g2.blocks, self.g2.block_bits):
            raise ShapeError("interleaved generators must have matching shapes")

    @property
    def d(self) -> int:
        return self.g1.d + self.g2.d

    @property
    def blocks(self) -> int:
        return 2 * self.g1.blocks

    @property
    def block_bits(self) -> int:
        return self.g1.block_bits

    @property
    def eps_budget(self) -> Fraction:
        return 2 * max(self.g1.eps_budget, self.g2.eps_budget)

    def expand_int(self, seed: int) -> int:
        o1 = self.g1.expand_int(seed & ((1 << self.g1.d) - 1))
        o2 = self.g2.expand_int(seed >> self.g1.d)
        t = self.block_bits
        mask = (1 << t) - 1
        out = 0
        for i in range(self.g1.blocks):
            out |= ((o1 >> (i * t)) & mask) << (2 * i * t)
            out |= ((o2 >> (i * t)) & mask) << ((2 * i + 1) * t)
        return out

    def _expand_all_impl(self) -> np.ndarray:
        a1 = self.g1.expand_all(cap=self.g1.d)
        a2 = self.g2.expand_all(cap=self.g2.d)
        idx = np.arange(1 << self.d, dtype=np.uint64)
        o1 = a1[idx & np.uint64((1 << self.g1.d) - 1)]
        o2 = a2[idx >> np.uint64(self.g1.d)]
        t = self.block_bits
        mask = np.uint64((1 << t) - 1)
        out = np.zeros(len(idx), dtype=np.uint64)
        for i in range(self.g1.blocks):
            out |= ((o1 >> np.uint64(i * t)) & mask) << np.uint64(2 * i * t)
            out |= ((o2 >> np.uint64(i * t)) & mask) << np.uint64((2 * i + 1) * t)
        return out

    def to_json(self) -> dict:
        return {"kind": "interleave", "g1": self.g1.to_json(), "g2": self.g2.to_json()}


def interleave(g1: GeneratorSpec, g2: GeneratorSpec) -> Interleave:
    return Interleave(g1, g2)


ExtractorFactory = Callable[[int, Fraction], Extractor]


def _perfect_factory(n_bits: int, eps_hint: Fraction) -> Extractor:
    return perfect_extractor(n_bits)


def build_swbp_prg(
    n: int,
    t: int,
    w: int,
    base: GeneratorSpec,
    strategy: str,
    rect=None,
    ext_factory: ExtractorFactory = _perfect_factory,
) -> Interleave:
    """Full pipeline: stretch the base to n/2 bits twice, then interleave.

    ``strategy`` "inw" doubles block counts with extractor stretching
    (requires n/2t a power of two); "rect" uses one rectangle composition.
    The base must be a single-block generator of t bits fooling the width-w,
    length-t class.  n must be a multiple of 2t; pad the target program with
    identity layers otherwise (see bp.pad_program).
    """
    if base.blocks != 1 or base.block_bits != t:
        raise ShapeError("base must output a single block of t bits")
    if n % (2 * t) != 0:
        raise ParameterError(f"n={n} is not a multiple of 2t={2 * t}; pad the program")
    m_half = n // (2 * t)
    if strategy == "inw":
        if m_half & (m_half - 1):
            raise ParameterError("inw strategy needs n/2t to be a power of two")
        g = base
        while g.blocks < m_half:
            g = inw_stretch(g, ext_factory(g.d, g.eps_budget))
        return interleave(g, g)
    if strategy == "rect":
        if rect is None:
            rect = ExhaustiveRectangle(m_half, base.d)
        if rect.blocks != m_half or rect.block_bits != base.d:
            raise ShapeError(
                f"rectangle must emit {m_half} blocks of {base.d} bits"
            )
        g = rect_compose(base, rect)
        return interleave(g, g)
    raise ParameterError(f"unknown strategy {strategy!r}")


# --- JSON ------------------------------------------------------------------------


def generator_from_json(data: dict) -> GeneratorSpec:
    kind = data["kind"]
    if kind == "exhaustive":
        return ExhaustiveBase(data["t"])
    if kind == "nisan":
        g = NisanBase(
            data["t"], data["w"], _frac_parse(data["eps_target"]), data["levels"]
        )
        if "measured_eps" in data:
            g = with_measured_error(g, _frac_parse(data["measured_eps"]))
        return g
    if kind == "inw":
        return InwStretch(
            generator_from_json(data["inner"]), extractor_from_json(data["extractor"])
        )
    if kind == "rect_compose":
        return RectCompose(generator_from_json(data["base"]), rect_from_json(data["rect"]))
    if kind == "interleave":
        return Interleave(generator_from_json(data["g1"]), generator_from_json(data["g2"]))
    raise ParameterError(f"unknown generator kind {kind!r}")
