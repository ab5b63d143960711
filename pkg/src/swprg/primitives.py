"""Seedable building blocks: pairwise-independent hashes, small-bias sets,
extractors, and exact distribution diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .bits import parity
from .errors import ConfigurationError, ParameterError, ShapeError

# --- pairwise-independent hashing --------------------------------------------


@dataclass(frozen=True)
class HashFamily:
    """Affine maps h(x) = Ax + c over GF(2), domain 2**a -> range 2**b.

    A member is described by a*b + b seed bits: the b x a matrix A in
    row-major order, then the offset c.  Uniform (A, c) gives exact pairwise
    independence: h(x1) is uniform via c, and h(x1) + h(x2) = A(x1 + x2) is
    uniform and independent for x1 != x2.
    """

    a: int
    b: int

    @property
    def domain(self) -> int:
        return 1 << self.a

    @property
    def range(self) -> int:
        return 1 << self.b

    @property
    def seed_bits(self) -> int:
        return self.a * self.b + self.b

    def eval(self, member_seed: int, x: int) -> int:
        if not 0 <= x < self.domain:
            raise ShapeError(f"hash input {x} outside domain [0, {self.domain})")
        if not 0 <= member_seed < (1 << self.seed_bits):
            raise ShapeError("hash member seed outside description length")
        y = 0
        for i in range(self.b):
            row = (member_seed >> (i * self.a)) & (self.domain - 1)
            y |= parity(row & x) << i
        c = member_seed >> (self.a * self.b)
        return y ^ c


def hash_eval(family: HashFamily, member_seed: int, x: int) -> int:
    return family.eval(member_seed, x)


# --- small-bias sets ----------------------------------------------------------

# irreducible polynomials over GF(2), degree 1..12 (top bit = degree)
_IRREDUCIBLE = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000000011,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
}


def _gf_mul(a: int, b: int, ell: int) -> int:
    poly = _IRREDUCIBLE[ell]
    res = 0
    while b:
        if b & 1:
            res ^= a
        b >>= 1
        a <<= 1
        if a >> ell:
            a ^= poly
    return res


@dataclass(frozen=True)
class SmallBiasSet:
    """An explicit multiset of n-bit strings with measured bias.

    ``bias`` is max over nonzero linear tests alpha of
    |avg over members of (-1)^<alpha, g>|, an exact rational.
    """

    n: int
    members: Tuple[int, ...]
    bias: Fraction

    @property
    def log_size(self) -> int:
        size = len(self.members)
        k = size.bit_length() - 1
        if 1 << k != size:
            raise ParameterError("set size must be a power of two")
        return k


def measure_bias(n: int, members: Tuple[int, ...]) -> Fraction:
    size = len(members)
    worst = Fraction(0)
    for alpha in range(1, 1 << n):
        s = sum(1 - 2 * parity(alpha & g) for g in members)
        worst = max(worst, Fraction(abs(s), size))
    return worst


def full_group_set(n: int) -> SmallBiasSet:
    return SmallBiasSet(n, tuple(range(1 << n)), Fraction(0))


def singleton_zero_set(n: int) -> SmallBiasSet:
    return SmallBiasSet(n, (0,), Fraction(1))


def aghp_set(n: int, ell: int) -> SmallBiasSet:
    """Polynomial-evaluation construction over GF(2**ell).

    Member (x, y) has i-th bit <x**i, y>; a nonzero test alpha reduces to a
    degree <= n-1 polynomial in x, so the bias is at most (n-1)/2**ell.
    Size 2**(2*ell); the bias stored is measured exactly, not the bound.
    """
    if ell not in _IRREDUCIBLE:
        raise ConfigurationError(f"field degree {ell} unsupported (1..12)")
    members = []
    for x in range(1 << ell):
        powers = []
        p = 1
        for _ in range(n):
            powers.append(p)
            p = _gf_mul(p, x, ell)
        for y in range(1 << ell):
            g = 0
            for i in range(n):
                g |= parity(powers[i] & y) << i
            members.append(g)
    return SmallBiasSet(n, tuple(members), measure_bias(n, tuple(members)))


# --- extractors ----------------------------------------------------------------


@dataclass(frozen=True)
class Extractor:
    """Seeded extractor with input length = output length = ``n``.

    ``kind`` is "perfect" (Ext(x, s) = s, zero error for every source) or
    "cayley" (Ext(x, s) = x XOR g_s over a small-bias generating set).  The
    ``eps`` field is an exact rational upper bound on the statistical
    distance from uniform over all sources of min-entropy >= ``k``; for the
    Cayley kind it is derived from the measured bias, never assumed.
    """

    kind: str
    n: int
    d: int
    k: int
    eps: Fraction
    generators: Optional[Tuple[int, ...]] = None
    bias: Optional[Fraction] = None

    def apply(self, x: int, s: int) -> int:
        if not 0 <= x < (1 << self.n):
            raise ShapeError("extractor input out of range")
        if not 0 <= s < (1 << self.d):
            raise ShapeError("extractor seed out of range")
        if self.kind == "perfect":
            return s
        return x ^ self.generators[s]

    def to_json(self) -> dict:
        data = {"kind": self.kind, "n": self.n, "d": self.d, "k": self.k,
                "eps": _frac_str(self.eps)}
        if self.kind == "cayley":
            data["generators"] = list(self.generators)
            data["bias"] = _frac_str(self.bias)
        return data


def extractor_from_json(data: dict) -> Extractor:
    if data["kind"] == "perfect":
        return perfect_extractor(data["n"])
    return Extractor(
        "cayley", data["n"], data["d"], data["k"], _frac_parse(data["eps"]),
        tuple(data["generators"]), _frac_parse(data["bias"]),
    )


def perfect_extractor(n: int) -> Extractor:
    """Ext(x, s) = s: seed length n, exactly uniform for every source."""
    return Extractor("perfect", n, n, 0, Fraction(0))


def cayley_extractor_from_set(n: int, deficiency: int, gens: SmallBiasSet) -> Extractor:
    """XOR with a small-bias set; extractor error from the mixing bound.

    For a flat source of min-entropy k = n - deficiency, walking one step on
    the Cayley graph with generator bias beta leaves l2 distance at most
    beta * sqrt(2**-k), hence statistical distance at most
    beta * sqrt(2**(n-k)) / 2.  The stored eps rounds the half-power up to
    keep the bound rational.
    """
    if gens.n != n:
        raise ShapeError("generating set has wrong dimension")
    if deficiency < 0 or deficiency > n:
        raise ParameterError("deficiency out of range")
    k = n - deficiency
    eps = gens.bias * (1 << ((deficiency + 1) // 2)) / 2
    return Extractor("cayley", n, gens.log_size, k, eps, gens.members, gens.bias)


def cayley_extractor(
    n: int, deficiency: int, target_eps: Fraction, max_seed_bits: int = 20
) -> Extractor:
    """Pick the smallest polynomial-evaluation set meeting ``target_eps``.

    Raises ``ConfigurationError`` (reporting the required set size) if the
    needed set exceeds ``max_seed_bits`` seed bits.
    """
    if target_eps <= 0:
        raise ParameterError("target_eps must be positive")
    # eps = beta * 2**ceil(deficiency/2) / 2 and the construction guarantees
    # beta <= (n-1)/2**ell
    beta_target = 2 * target_eps / (1 << ((deficiency + 1) // 2))
    need = Fraction(max(n - 1, 1)) / beta_target
    ell = max(1, math.ceil(math.log2(float(need)))) if need > 1 else 1
    while Fraction(max(n - 1, 1), 1 << ell) > beta_target:
        ell += 1
    if 2 * ell > max_seed_bits:
        raise ConfigurationError(
            f"needs a bias-{float(beta_target):.3g} set of size 2**{2 * ell} "
            f"(> {max_seed_bits} seed bits)"
        )
    return cayley_extractor_from_set(n, deficiency, aghp_set(n, ell))


# --- distribution diagnostics ---------------------------------------------------

Distribution = Dict[object, Fraction]


def statistical_distance(x: Distribution, y: Distribution, universe=None) -> Fraction:
    """Half the l1 distance between two finite distributions."""
    if universe is not None:
        bad = (set(x) | set(y)) - set(universe)
        if bad:
            raise ShapeError(f"outcomes outside the declared universe: {sorted(bad)[:5]}")
    keys = set(x) | set(y)
    total = sum(abs(x.get(k, Fraction(0)) - y.get(k, Fraction(0))) for k in keys)
    return total / 2


def min_entropy(x: Distribution) -> float:
    """log2 of 1 / max probability."""
    top = max(p for p in x.values() if p > 0)
    return float(-math.log2(top))


def uniform_distribution(n: int) -> Distribution:
    p = Fraction(1, 1 << n)
    return {v: p for v in range(1 << n)}


def flat_source(points) -> Distribution:
    points = list(points)
    p = Fraction(1, len(points))
    return {v: p for v in points}


def extractor_output_distribution(ext: Extractor, source: Distribution) -> Distribution:
    """Exact output distribution of Ext(X, U_d)."""
    out: Distribution = {}
    seed_p = Fraction(1, 1 << ext.d)
    for x, px in source.items():
        for s in range(1 << ext.d):
            y = ext.apply(x, s)
            out[y] = out.get(y, Fraction(0)) + px * seed_p
    return out


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _frac_parse(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))
