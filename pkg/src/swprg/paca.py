"""Probabilistic cellular automata with unanimous acceptance, their exact
acceptance probabilities, the sliding-window stream simulation, and the
seed-enumeration derandomizers built on top of it.

A PACA has cells over a state set Q with a boundary symbol $ (represented
here as the index ``q == |Q|``).  Each step, every cell tosses a fair coin
``b`` and moves to ``delta_b(left, self, right)``.  The automaton accepts
an input x iff some configuration within the first T steps (step 0, the
input itself, included) consists of accepting states only.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .bp import LayeredProgram
from .errors import CapExceeded, ParameterError, ShapeError

Configuration = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Paca:
    """q states 0..q-1, boundary index q; delta tables are dense
    (q+1, q, q+1) int arrays indexed [left][center][right] (treat as
    read-only).  ``time_bound`` is the constant T."""

    q: int
    sigma: Tuple[int, ...]
    accepting: FrozenSet[int]
    delta0: np.ndarray
    delta1: np.ndarray
    time_bound: int

    def __post_init__(self):
        shape = (self.q + 1, self.q, self.q + 1)
        for name, table in (("delta0", self.delta0), ("delta1", self.delta1)):
            if table.shape != shape:
                raise ShapeError(f"{name} has shape {table.shape}, expected {shape}")
            if table.min() < 0 or table.max() >= self.q:
                raise ParameterError(f"{name} maps outside the state set")
        if not set(self.sigma) <= set(range(self.q)):
            raise ParameterError("input alphabet must be a subset of the states")
        if not self.accepting <= frozenset(range(self.q)):
            raise ParameterError("accepting set must be a subset of the states")
        if self.time_bound < 1:
            raise ParameterError("time bound must be positive")

    @property
    def boundary(self) -> int:
        return self.q

    def delta(self, bit: int, left: int, center: int, right: int) -> int:
        """Extended local rule: out-of-bounds cells stay at the boundary."""
        if center == self.q:
            return self.q
        table = self.delta1 if bit else self.delta0
        return int(table[left, center, right])

    def config_accepting(self, config: Configuration) -> bool:
        return all(s in self.accepting for s in config)


def step(c: Paca, config: Configuration, row: Sequence[int]) -> Configuration:
    """One synchronous step with coin row ``row``; borders padded with $."""
    n = len(config)
    if len(row) != n:
        raise ShapeError(f"row length {len(row)} != configuration length {n}")
    b = c.boundary
    padded = (b,) + tuple(config) + (b,)
    return tuple(
        c.delta(row[i], padded[i], padded[i + 1], padded[i + 2]) for i in range(n)
    )


def _check_input(c: Paca, x: Sequence[int]) -> Tuple[int, ...]:
    x = tuple(x)
    if not x:
        raise ParameterError("empty input")
    if not set(x) <= set(c.sigma):
        raise ParameterError("input symbol outside the alphabet")
    return x


class AcceptResult(NamedTuple):
    accept: bool
    first_step: Optional[int]


def accepts(c: Paca, x: Sequence[int], matrix: Sequence[Sequence[int]]) -> AcceptResult:
    """C(x, R): scan configurations at steps 0..T-1 for an all-accepting one."""
    x = _check_input(c, x)
    T = c.time_bound
    if len(matrix) != T or any(len(row) != len(x) for row in matrix):
        raise ShapeError(f"coin matrix must be {T} x {len(x)}")
    config = x
    for t in range(T):
        if c.config_accepting(config):
            return AcceptResult(True, t)
        if t < T - 1:
            config = step(c, config, matrix[t])
    return AcceptResult(False, None)


def exact_accept_probability(c: Paca, x: Sequence[int]) -> Fraction:
    """Pr over uniform coin matrices that C accepts x, by a Markov chain
    over configuration distributions with accepting mass absorbed at its
    first visit."""
    x = _check_input(c, x)
    n = len(x)
    T = c.time_bound
    rows = list(product((0, 1), repeat=n))
    row_prob = Fraction(1, 1 << n)
    dist: Dict[Configuration, Fraction] = {x: Fraction(1)}
    p_acc = Fraction(0)
    for t in range(T):
        alive: Dict[Configuration, Fraction] = {}
        for config, mass in dist.items():
            if c.config_accepting(config):
                p_acc += mass
            else:
                alive[config] = mass
        if t == T - 1:
            break
        dist = {}
        for config, mass in alive.items():
            for row in rows:
                nxt = step(c, config, row)
                dist[nxt] = dist.get(nxt, Fraction(0)) + mass * row_prob
    return p_acc


def accept_probability_bruteforce(
    c: Paca, x: Sequence[int], cap_bits: int = 22
) -> Fraction:
    """Second oracle: enumerate all 2**(T*n) coin matrices."""
    x = _check_input(c, x)
    n, T = len(x), c.time_bound
    total_bits = T * n
    if total_bits > cap_bits:
        raise CapExceeded(
            f"matrix enumeration needs 2**{total_bits} runs (cap {cap_bits})",
            total_bits,
        )
    count = 0
    for r in range(1 << total_bits):
        matrix = [
            [(r >> (t * n + j)) & 1 for j in range(n)] for t in range(T)
        ]
        if accepts(c, x, matrix).accept:
            count += 1
    return Fraction(count, 1 << total_bits)


# --- sliding-window simulation ------------------------------------------------------


def stream_to_matrix(r: int, n: int, T: int) -> List[List[int]]:
    """R(i, j) = r(i + j*T): column j holds the bits of outer iteration j."""
    return [[(r >> (i + j * T)) & 1 for j in range(n + T)] for i in range(T)]


def derived_matrix(R: Sequence[Sequence[int]], n: int, T: int) -> List[List[int]]:
    """R'(i, j) = R(i, i + j + 1): the coins actually fed to the automaton."""
    return [[R[i][i + j + 1] for j in range(n)] for i in range(T)]


def sliding_sim(c: Paca, x: Sequence[int], t_set) -> LayeredProgram:
    """The stream program S_{t_set} over m = (n+T)*T random bits.

    It simulates the automaton on input x (hardcoded) by sweeping a window
    over the time-space diagram, and accepts a stream iff the configuration
    at every step in ``t_set`` is all-accepting.  States are
    (state_left[T], state_center[T], state_right) over Q + boundary; the
    per-step checks live in the layer accepting sets (a sticky flag would
    destroy the sliding-window property), so the program is a window-size
    O(T^2) program.
    """
    x = _check_input(c, x)
    n, T = len(x), c.time_bound
    t_set = frozenset(t_set)
    if not t_set or not t_set <= set(range(1, T + 1)):
        raise ParameterError(f"t_set must be a non-empty subset of 1..{T}")
    m = (n + T) * T
    b = c.boundary
    start = ((b,) * T, (b,) * T, b)
    layer_states: List[Tuple] = [start]
    index = {start: 0}
    trans: List[List[Tuple[int, int]]] = []
    acc: List[set] = []
    for layer in range(m):
        j, tau = divmod(layer, T)
        nxt_index: Dict[Tuple, int] = {}
        nxt_states: List[Tuple] = []
        nxt_acc = set()
        check = (tau + 1) in t_set
        table: List[Tuple[int, int]] = []
        for state in layer_states:
            row = []
            left, center, right = state
            if tau == 0:
                right = x[j] if j < n else b
            for bit in (0, 1):
                new = c.delta(bit, left[tau], center[tau], right)
                nstate = (
                    left[:tau] + (center[tau],) + left[tau + 1 :],
                    center[:tau] + (right,) + center[tau + 1 :],
                    new,
                )
                if nstate not in nxt_index:
                    nxt_index[nstate] = len(nxt_states)
                    nxt_states.append(nstate)
                    if not check or new == b or new in c.accepting:
                        nxt_acc.add(nxt_index[nstate])
                row.append(nxt_index[nstate])
            table.append((row[0], row[1]))
        trans.append(table)
        acc.append(nxt_acc)
        layer_states = nxt_states
        index = nxt_index
    w = max(max(len(tbl) for tbl in trans), len(layer_states), 1)
    padded = tuple(
        tuple(tbl) + ((0, 0),) * (w - len(tbl)) for tbl in trans
    )
    return LayeredProgram(m, w, 0, padded, tuple(frozenset(a) for a in acc))


def accepting_steps_of_stream(c: Paca, x: Sequence[int], r: int) -> int:
    """Bitmask over steps 1..T of the steps whose configuration is
    all-accepting, running the window sweep directly on the stream ``r``
    (bit L of r is the coin of sweep layer L).  Equivalent to evaluating
    every S_{{s}} on r in one pass."""
    x = _check_input(c, x)
    n, T = len(x), c.time_bound
    b = c.boundary
    left = [b] * T
    center = [b] * T
    right = b
    mask = (1 << (T + 1)) - 2  # steps 1..T assumed accepting until refuted
    for layer in range((n + T) * T):
        j, tau = divmod(layer, T)
        if tau == 0:
            right = x[j] if j < n else b
        new = c.delta((r >> layer) & 1, left[tau], center[tau], right)
        left[tau] = center[tau]
        center[tau] = right
        right = new
        if new != b and new not in c.accepting:
            mask &= ~(1 << (tau + 1))
    return mask


# --- derandomizers --------------------------------------------------------------------


HsgBuilder = Callable[[int, Fraction], object]
PrgBuilder = Callable[[int, Fraction], object]


def derandomize_one_sided(
    c: Paca, x: Sequence[int], eps: Fraction, hsg_builder: HsgBuilder,
    cap_seeds: int = 24,
) -> bool:
    """Deterministic decision for a one-sided eps-error PACA.

    Accepts iff step 0 accepts directly or some (t, seed) makes S_{{t}}
    accept the HSG output, with hitting threshold eps/T.  eps is the floor
    on the acceptance probability of inputs in the language.
    """
    from .lab import hitting_check

    x = _check_input(c, x)
    n, T = len(x), c.time_bound
    if c.config_accepting(x):
        return True
    m = (n + T) * T
    threshold = Fraction(eps) / T
    h = hsg_builder(m, threshold)
    for t in range(1, T):
        s_t = sliding_sim(c, x, {t})
        if hitting_check(h, s_t, cap_seeds) is not None:
            return True
    return False


class TwoSidedResult(NamedTuple):
    accept: bool
    eta: Fraction
    eta_terms: Dict[FrozenSet[int], Fraction]


def derandomize_two_sided(
    c: Paca, x: Sequence[int], eps: Fraction, prg_builder: PrgBuilder,
    cap_seeds: int = 24,
) -> TwoSidedResult:
    """Inclusion-exclusion estimate of the acceptance probability.

    eta = sum over non-empty step subsets t of (-1)^(|t|+1) * eta_t, where
    eta_t estimates Pr[all steps in t accepting] through the PRG (error
    parameter eps / 2**T); accept iff eta > 1/2.  Step 0 is deterministic
    and handled directly.  With the exhaustive (zero-error) generator the
    eta_t are computed by the acceptance-probability recurrence, which
    equals full seed enumeration term by term.
    """
    from .generators import ExhaustiveBase

    x = _check_input(c, x)
    n, T = len(x), c.time_bound
    if c.config_accepting(x):
        return TwoSidedResult(True, Fraction(1), {})
    m = (n + T) * T
    g = prg_builder(m, Fraction(eps) / (1 << T))
    if g.flat_bits != m:
        raise ShapeError(f"generator emits {g.flat_bits} bits, stream needs {m}")
    steps = tuple(range(1, T))
    if isinstance(g, ExhaustiveBase):
        vec_probs = _step_vector_distribution(c, x, steps)
    else:
        outs = g.expand_all(cap_seeds)
        counts: Dict[int, int] = {}
        for r in outs:
            v = accepting_steps_of_stream(c, x, int(r))
            counts[v] = counts.get(v, 0) + 1
        denom = 1 << g.d
        vec_probs = {v: Fraction(cnt, denom) for v, cnt in counts.items()}
    eta = Fraction(0)
    eta_terms: Dict[FrozenSet[int], Fraction] = {}
    for sub in range(1, 1 << len(steps)):
        t_mask = 0
        members = []
        for idx, s in enumerate(steps):
            if (sub >> idx) & 1:
                t_mask |= 1 << s
                members.append(s)
        eta_t = sum(
            (p for v, p in vec_probs.items() if v & t_mask == t_mask), Fraction(0)
        )
        eta_terms[frozenset(members)] = eta_t
        eta += eta_t if len(members) % 2 == 1 else -eta_t
    return TwoSidedResult(eta > Fraction(1, 2), eta, eta_terms)


def _step_vector_distribution(
    c: Paca, x: Tuple[int, ...], steps: Tuple[int, ...]
) -> Dict[int, Fraction]:
    """Joint distribution of the per-step acceptance indicators (as bit
    masks over ``steps``), via the configuration Markov chain."""
    n = len(x)
    rows = list(product((0, 1), repeat=n))
    row_prob = Fraction(1, 1 << n)
    dist: Dict[Tuple[Configuration, int], Fraction] = {(x, 0): Fraction(1)}
    for s in range(1, max(steps) + 1):
        nxt: Dict[Tuple[Configuration, int], Fraction] = {}
        for (config, v), mass in dist.items():
            share = mass * row_prob
            for row in rows:
                nc = step(c, config, row)
                nv = v | (1 << s) if (s in steps and c.config_accepting(nc)) else v
                key = (nc, nv)
                nxt[key] = nxt.get(key, Fraction(0)) + share
        dist = nxt
    out: Dict[int, Fraction] = {}
    for (_, v), mass in dist.items():
        out[v] = out.get(v, Fraction(0)) + mass
    return out


# --- fixtures -------------------------------------------------------------------------


def _leftmost_cell_paca(
    cell_states: Sequence,
    cell_next: Callable[[object, int], object],
    cell_accepting: Sequence,
    time_bound: int,
) -> Paca:
    """A PACA where every cell except the leftmost is unconditionally in an
    accepting idle state from step 1 on; the leftmost (recognized by a $
    left neighbor) runs the given machine seeded by the input symbols 0/1.

    ``cell_next(label, coin)`` must be total on {"in0", "in1"} plus the
    machine labels.  The right neighbor is never consulted.
    """
    labels = ["in0", "in1", "idle"] + list(cell_states)
    idx = {lab: i for i, lab in enumerate(labels)}
    q = len(labels)
    delta = np.zeros((2, q + 1, q, q + 1), dtype=np.int16)
    for center_lab in labels:
        ci = idx[center_lab]
        for bit in (0, 1):
            if center_lab == "idle":
                cell_target = idx["idle"]
            else:
                cell_target = idx[cell_next(center_lab, bit)]
            for left in range(q + 1):
                target = cell_target if left == q else idx["idle"]
                delta[bit, left, ci, :] = target
    accepting = frozenset({idx["idle"]} | {idx[lab] for lab in cell_accepting})
    return Paca(
        q=q,
        sigma=(idx["in0"], idx["in1"]),
        accepting=accepting,
        delta0=delta[0],
        delta1=delta[1],
        time_bound=time_bound,
    )


@lru_cache(maxsize=None)
def build_c1() -> Paca:
    """Leftmost cell collects 8 coins r_1..r_8; it becomes accepting for
    steps 9..12 iff r_1 = r_2 = 0, then dies.  Accepts any input with
    probability exactly 1/4.  T = 10."""
    states = [("collect", k, ok) for k in range(1, 9) for ok in (False, True)]
    states += [("show", j) for j in range(1, 5)] + ["dead"]

    def nxt(label, coin):
        if label in ("in0", "in1"):
            return ("collect", 1, coin == 0)
        if label[0] == "collect":
            _, k, ok = label
            if k < 8:
                return ("collect", k + 1, ok and coin == 0 if k + 1 == 2 else ok)
            return ("show", 1) if ok else "dead"
        if label[0] == "show":
            j = label[1]
            return ("show", j + 1) if j < 4 else "dead"
        return "dead"

    return _leftmost_cell_paca(states, nxt, [("show", j) for j in range(1, 5)], 10)


@lru_cache(maxsize=None)
def build_c2() -> Paca:
    """Leftmost cell collects 8 coins pairwise (z_j = [r_{2j-1} = r_{2j} = 0]);
    it is accepting at step 8+j iff z_j, then dies.  Accepts any input with
    probability exactly 1 - (3/4)**4 = 175/256.  T = 13."""
    states: List = []
    for k in range(1, 9):
        npairs = k // 2
        for flags in product((False, True), repeat=npairs):
            if k % 2 == 1:
                states += [("collect", k, flags, False), ("collect", k, flags, True)]
            else:
                states.append(("collect", k, flags, None))
    for j in range(1, 5):
        for flags in product((False, True), repeat=5 - j):
            states.append(("show", j, flags))
    states.append("dead")

    def nxt(label, coin):
        if label in ("in0", "in1"):
            return ("collect", 1, (), coin == 0)
        if label[0] == "collect":
            _, k, flags, pending = label
            if k % 2 == 1:
                return ("collect", k + 1, flags + (pending and coin == 0,), None)
            if k < 8:
                return ("collect", k + 1, flags, coin == 0)
            return ("show", 1, flags)
        if label[0] == "show":
            _, j, flags = label
            return ("show", j + 1, flags[1:]) if j < 4 else "dead"
        return "dead"

    accepting = [
        ("show", j, flags)
        for j in range(1, 5)
        for flags in product((False, True), repeat=5 - j)
        if flags[0]
    ]
    return _leftmost_cell_paca(states, nxt, accepting, 13)


def sample_paca(rng: random.Random, q: int, time_bound: int) -> Paca:
    """Seeded random PACA: dense random local rules, a random non-trivial
    accepting set, full input alphabet."""
    if q < 2:
        raise ParameterError("need at least two states")
    delta = np.zeros((2, q + 1, q, q + 1), dtype=np.int16)
    for bit in (0, 1):
        for left in range(q + 1):
            for center in range(q):
                for right in range(q + 1):
                    delta[bit, left, center, right] = rng.randrange(q)
    size = rng.randint(1, q - 1)
    accepting = frozenset(rng.sample(range(q), size))
    return Paca(
        q=q,
        sigma=tuple(range(q)),
        accepting=accepting,
        delta0=delta[0],
        delta1=delta[1],
        time_bound=time_bound,
    )


# --- diagnostics and serialization ----------------------------------------------------


def check_time_bound(c: Paca, n: int) -> bool:
    """Does every accepting computation at length n first reach an
    all-accepting configuration strictly before step T?  Tracked by
    following, per step, the set of configurations reachable without an
    earlier accepting visit, with cycle detection."""
    T = c.time_bound
    rows = list(product((0, 1), repeat=n))
    for x in product(c.sigma, repeat=n):
        frontier = frozenset({x})
        t = 0
        seen = set()
        while frontier:
            accepting_now = {cf for cf in frontier if c.config_accepting(cf)}
            if accepting_now and t >= T:
                return False
            frontier = frozenset(cf for cf in frontier if cf not in accepting_now)
            if frontier in seen and t >= T:
                break
            seen.add(frontier)
            frontier = frozenset(step(c, cf, row) for cf in frontier for row in rows)
            t += 1
            if t > T + (1 << (2 * n)):  # safety horizon beyond any cycle
                break
    return True


def spacetime_diagram(c: Paca, x: Sequence[int], matrix: Sequence[Sequence[int]]) -> str:
    """Plain-text grid of configurations for steps 0..T-1 ($ never shown:
    only in-bounds cells are printed)."""
    x = _check_input(c, x)
    config = x
    lines = []
    for t in range(c.time_bound):
        mark = "*" if c.config_accepting(config) else " "
        lines.append(f"t={t:3d} {mark} " + " ".join(str(s) for s in config))
        if t < c.time_bound - 1:
            config = step(c, config, matrix[t])
    return "\n".join(lines)


def paca_to_json(c: Paca) -> dict:
    return {
        "states": c.q,
        "sigma": list(c.sigma),
        "accepting": sorted(c.accepting),
        "boundary": c.boundary,
        "delta0": c.delta0.tolist(),
        "delta1": c.delta1.tolist(),
        "time_bound": c.time_bound,
    }


def paca_from_json(data: dict) -> Paca:
    return Paca(
        q=data["states"],
        sigma=tuple(data["sigma"]),
        accepting=frozenset(data["accepting"]),
        delta0=np.array(data["delta0"], dtype=np.int16),
        delta1=np.array(data["delta1"], dtype=np.int16),
        time_bound=data["time_bound"],
    )


def load_paca(path: str) -> Paca:
    with open(path) as fh:
        return paca_from_json(json.load(fh))
