"""Hitting-set analogues of the generator combinators.

An HSG carries the same expansion machinery as a PRG (every node here wraps
a :class:`~swprg.generators.GeneratorSpec` for output purposes) but its
budget is a hitting threshold: any program of the intended class whose
acceptance probability reaches the budget must accept at least one output.
Budgets differ from the fooling case -- composition pays
2 * max(r * eps_base, eps_cr) rather than a sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bits import BitString
from .errors import ParameterError, ShapeError
from .generators import (
    ExhaustiveRectangle,
    GeneratorSpec,
    Interleave,
    RectCompose,
    generator_from_json,
    rect_from_json,
)


@dataclass(frozen=True)
class HsgSpec:
    """A generator reinterpreted under the hitting contract.

    ``eps_budget`` is the acceptance-probability threshold above which a
    witness output is guaranteed.  ``carrier`` does the actual expansion.
    """

    carrier: GeneratorSpec
    threshold: Fraction
    kind: str = "prg_as_hsg"

    @property
    def d(self) -> int:
        return self.carrier.d

    @property
    def blocks(self) -> int:
        return self.carrier.blocks

    @property
    def block_bits(self) -> int:
        return self.carrier.block_bits

    @property
    def flat_bits(self) -> int:
        return self.carrier.flat_bits

    @property
    def eps_budget(self) -> Fraction:
        return self.threshold

    def expand_int(self, seed: int) -> int:
        return self.carrier.expand_int(seed)

    def expand(self, seed: BitString) -> BitString:
        return self.carrier.expand(seed)

    def expand_all(self, cap: int = 24) -> np.ndarray:
        return self.carrier.expand_all(cap)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "carrier": self.carrier.to_json(),
            "threshold": f"{self.threshold.numerator}/{self.threshold.denominator}",
        }


def from_prg(g: GeneratorSpec) -> HsgSpec:
    """An eps-PRG hits everything accepted with probability above eps.

    (Acceptance probability p under a PRG output is at least p - eps > 0.)
    """
    return HsgSpec(g, g.eps_budget, "prg_as_hsg")


def hsg_exhaustive(t: int) -> HsgSpec:
    from .generators import base_exhaustive

    return from_prg(base_exhaustive(t))


def hsg_rect_compose(base: HsgSpec, rect) -> HsgSpec:
    """Rectangle composition under the hitting contract.

    Threshold 2 * max(r * base_threshold, eps_cr): one factor of two for
    converting the fooling-style bound into a one-sided hitting bound, the
    max because only the dominant failure mode matters for hitting.
    """
    carrier = RectCompose(base.carrier, rect)
    thr = 2 * max(carrier.blocks * base.threshold, rect.eps_cr)
    return HsgSpec(carrier, thr, "hsg_rect")


def hsg_interleave(h1: HsgSpec, h2: HsgSpec) -> HsgSpec:
    """Interleave two HSGs; threshold doubles the larger component's."""
    carrier = Interleave(h1.carrier, h2.carrier)
    return HsgSpec(carrier, 2 * max(h1.threshold, h2.threshold), "hsg_interleave")


def build_swbp_hsg(n: int, t: int, w: int, base: HsgSpec, rect=None) -> HsgSpec:
    """Hitting-set pipeline for width-w window-t length-n programs."""
    if base.blocks != 1 or base.block_bits != t:
        raise ShapeError("base must output a single block of t bits")
    if n % (2 * t) != 0:
        raise ParameterError(f"n={n} is not a multiple of 2t={2 * t}; pad the program")
    m_half = n // (2 * t)
    if rect is None:
        rect = ExhaustiveRectangle(m_half, base.d)
    if rect.blocks != m_half or rect.block_bits != base.d:
        raise ShapeError(f"rectangle must emit {m_half} blocks of {base.d} bits")
    half = hsg_rect_compose(base, rect)
    return hsg_interleave(half, half)


def hsg_from_json(data: dict) -> HsgSpec:
    kind = data["kind"]
    if kind in ("prg_as_hsg", "hsg_rect", "hsg_interleave"):
        num, den = data["threshold"].split("/")
        return HsgSpec(
            generator_from_json(data["carrier"]), Fraction(int(num), int(den)), kind
        )
    raise ParameterError(f"unknown hsg kind {kind!r}")
