"""Provider cost: normalized congestion plus per-link price, with a disconnection penalty.

``C_X = alpha * total_X / n_f_X + (1 - alpha) * |P| / n``, and both providers
pay ``penalty`` when no link exists.  Every strict-improvement decision is
made on exact integers; floats appear only in reported cost values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .routing import FlowModel, FlowSummary, Link, PeeringSet, TrafficSpec, as_fraction, links_array
from .topology import Graph

DEFAULT_PENALTY = Fraction(10**6)


def worst_case_congestion(g: Graph | None, dist: np.ndarray, traffic: TrafficSpec) -> tuple[Fraction, Fraction]:
    """(n_f_A, n_f_B): the largest single-link congestion, by exhaustive search."""
    nf_a, nf_b, _, _ = worst_links(dist, traffic)
    return nf_a, nf_b


def worst_links(dist: np.ndarray, traffic: TrafficSpec) -> tuple[Fraction, Fraction, Link, Link]:
    """Worst-case congestion per provider and its canonical (smallest) argmax link."""
    model = FlowModel(dist, dist)
    n = model.n
    beta = traffic.beta
    best_a = best_b = None
    arg_a = arg_b = (0, 0)
    one = np.zeros((1, 2), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            one[0] = (a, b)
            out_a, in_a, out_b, in_b = model.counts(one)
            ta = out_a + beta * in_a
            tb = in_b + beta * out_b
            if best_a is None or ta > best_a:
                best_a, arg_a = ta, (a, b)
            if best_b is None or tb > best_b:
                best_b, arg_b = tb, (a, b)
    return Fraction(best_a), Fraction(best_b), arg_a, arg_b


_NF_CACHE: dict[tuple[bytes, Fraction], tuple[Fraction, Fraction]] = {}


def cached_worst_case(dist: np.ndarray, beta: Fraction) -> tuple[Fraction, Fraction]:
    key = (np.ascontiguousarray(dist, dtype=np.int64).tobytes(), beta)
    if key not in _NF_CACHE:
        _NF_CACHE[key] = worst_case_congestion(None, dist, TrafficSpec(beta))
    return _NF_CACHE[key]


@dataclass(frozen=True)
class GameParams:
    alpha: Fraction
    beta: Fraction
    n: int
    n_f_a: Fraction
    n_f_b: Fraction
    penalty: Fraction = DEFAULT_PENALTY

    def __post_init__(self):
        for name in ("alpha", "beta", "n_f_a", "n_f_b", "penalty"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes per provider, got {self.n}")
        if self.n_f_a <= 0 or self.n_f_b <= 0:
            raise ValueError("congestion normalizers must be positive")
        if self.penalty <= self.alpha + (1 - self.alpha) * self.n:
            raise ValueError(f"penalty {self.penalty} does not dominate the largest connected cost")

    @property
    def n_p(self) -> int:
        return self.n

    @classmethod
    def for_distances(cls, dist: np.ndarray, alpha, beta, penalty=DEFAULT_PENALTY) -> "GameParams":
        beta = as_fraction(beta)
        nf_a, nf_b = cached_worst_case(dist, beta)
        return cls(as_fraction(alpha), beta, int(dist.shape[0]), nf_a, nf_b, as_fraction(penalty))


def _cost_from_flows(params: GameParams, flows: FlowSummary, size: int) -> tuple[Fraction, Fraction]:
    link_term = (1 - params.alpha) * Fraction(size, params.n_p)
    return (
        params.alpha * flows.total_a / params.n_f_a + link_term,
        params.alpha * flows.total_b / params.n_f_b + link_term,
    )


def exact_total_cost(params: GameParams, dist_a, dist_b, P: PeeringSet) -> tuple[Fraction, Fraction]:
    if len(P) == 0:
        return params.penalty, params.penalty
    counts = FlowModel(dist_a, dist_b).counts(links_array(P))
    return _cost_from_flows(params, FlowSummary(*counts, params.beta), len(P))


def total_cost(params: GameParams, dist_a, dist_b, P: PeeringSet) -> tuple[float, float]:
    ca, cb = exact_total_cost(params, dist_a, dist_b, P)
    return float(ca), float(cb)


def cost_delta(params: GameParams, dist_a, dist_b, P: PeeringSet, link: Link, action: str) -> tuple[Fraction, Fraction]:
    """Exact ``C(after) - C(before)`` for adding or removing one link."""
    link = (int(link[0]), int(link[1]))
    if action == "add":
        after = P.add(link)
    elif action == "remove":
        after = P.remove(link)
    else:
        raise ValueError(f"action must be 'add' or 'remove', got {action!r}")
    before_a, before_b = exact_total_cost(params, dist_a, dist_b, P)
    after_a, after_b = exact_total_cost(params, dist_a, dist_b, after)
    return after_a - before_a, after_b - before_b


class State:
    """Scaled-integer summary of one peering set, enough to compare costs exactly."""

    __slots__ = ("size", "t_a", "t_b")

    def __init__(self, size: int, t_a: int = 0, t_b: int = 0):
        self.size = size
        self.t_a = t_a
        self.t_b = t_b


class PeeringGame:
    """A topology plus parameters, evaluated with exact integer arithmetic.

    Congestion totals are scaled by the denominator of ``beta`` and the
    normalizers alike, so a strict cost comparison reduces to the sign of
    ``alpha_num * dT * n + (alpha_den - alpha_num) * dP * nf_scaled``.
    """

    def __init__(self, dist_a: np.ndarray, dist_b: np.ndarray, params: GameParams):
        self.model = FlowModel(dist_a, dist_b)
        if self.model.n != params.n:
            raise ValueError("parameter node count does not match the topology")
        self.params = params
        self.n = params.n
        self.links = [(a, b) for a in range(self.n) for b in range(self.n)]
        self._bn = params.beta.numerator
        self._bd = params.beta.denominator
        self._an = params.alpha.numerator
        self._ad = params.alpha.denominator
        nf_a = params.n_f_a * self._bd
        nf_b = params.n_f_b * self._bd
        if nf_a.denominator != 1 or nf_b.denominator != 1:
            raise ValueError("normalizers are inconsistent with beta")
        self._nf_a = int(nf_a)
        self._nf_b = int(nf_b)
        self._alpha_f = float(params.alpha)
        self._link_w = float(1 - params.alpha) / self.n

    @classmethod
    def build(cls, dist: np.ndarray, alpha, beta, penalty=DEFAULT_PENALTY) -> "PeeringGame":
        return cls(dist, dist, GameParams.for_distances(dist, alpha, beta, penalty))

    def state(self, P: PeeringSet | np.ndarray) -> State:
        arr = P if isinstance(P, np.ndarray) else links_array(P)
        size = len(arr)
        if size == 0:
            return State(0)
        out_a, in_a, out_b, in_b = self.model.counts(arr)
        return State(size, self._bd * out_a + self._bn * in_a, self._bd * in_b + self._bn * out_b)

    def exact_costs(self, s: State) -> tuple[Fraction, Fraction]:
        p = self.params
        if s.size == 0:
            return p.penalty, p.penalty
        link_term = (1 - p.alpha) * Fraction(s.size, self.n)
        return p.alpha * Fraction(s.t_a, self._nf_a) + link_term, p.alpha * Fraction(s.t_b, self._nf_b) + link_term

    def costs(self, s: State) -> tuple[float, float]:
        if s.size == 0:
            pen = float(self.params.penalty)
            return pen, pen
        link_term = self._link_w * s.size
        return self._alpha_f * s.t_a / self._nf_a + link_term, self._alpha_f * s.t_b / self._nf_b + link_term

    def improves(self, before: State, after: State) -> tuple[bool, bool]:
        """Whether moving ``before -> after`` strictly lowers C_A, C_B."""
        if before.size == 0 or after.size == 0:
            ca0, cb0 = self.exact_costs(before)
            ca1, cb1 = self.exact_costs(after)
            return ca1 < ca0, cb1 < cb0
        dp = (self._ad - self._an) * (after.size - before.size)
        k = self._an * self.n
        return (
            k * (after.t_a - before.t_a) + dp * self._nf_a < 0,
            k * (after.t_b - before.t_b) + dp * self._nf_b < 0,
        )
