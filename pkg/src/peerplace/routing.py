"""Nearest-exit ("hot potato") routing and per-provider traffic flows.

Traffic model: every node of A sends one packet to every node of B and every
node of B sends ``beta`` packets to every node of A.  A source hands all of
its traffic to the peering link whose own-side endpoint is closest to it.
A packet visits ``d + 1`` nodes on each intra-provider segment (both
endpoints counted); crossing the peering link itself adds nothing.

Flows are kept as exact integers split into an outgoing part (weight 1) and
an incoming part (weight ``beta``), so ``total = out + beta * in`` is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

Link = tuple[int, int]


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float (via its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


class PeeringSet:
    """Immutable, canonically ordered set of peering links ``(a, b)``."""

    __slots__ = ("links", "_members")

    def __init__(self, links: Iterable[Link] = ()):
        members = frozenset((int(a), int(b)) for a, b in links)
        self._members = members
        self.links: tuple[Link, ...] = tuple(sorted(members))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "PeeringSet":
        return cls(divmod(k, n) for k in range(n * n) if mask >> k & 1)

    def mask(self, n: int) -> int:
        """Bit ``a * n + b`` set for every link."""
        out = 0
        for a, b in self.links:
            out |= 1 << (a * n + b)
        return out

    def add(self, link: Link) -> "PeeringSet":
        if link in self._members:
            raise ValueError(f"link {link} already in peering set")
        return PeeringSet(self._members | {link})

    def remove(self, link: Link) -> "PeeringSet":
        if link not in self._members:
            raise ValueError(f"link {link} not in peering set")
        return PeeringSet(self._members - {link})

    def validate(self, n: int) -> None:
        for a, b in self.links:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"link {(a, b)} outside node range 0..{n - 1}")

    def __contains__(self, link) -> bool:
        return tuple(link) in self._members

    def __iter__(self) -> Iterator[Link]:
        return iter(self.links)

    def __len__(self) -> int:
        return len(self.links)

    def __eq__(self, other) -> bool:
        return isinstance(other, PeeringSet) and self._members == other._members

    def __hash__(self) -> int:
        return hash(self._members)

    def __repr__(self) -> str:
        return f"PeeringSet({list(self.links)})"


@dataclass(frozen=True)
class TrafficSpec:
    """``beta`` packets per node pair from B to A; A to B is fixed at one."""

    beta: Fraction

    def __init__(self, beta=1):
        b = as_fraction(beta)
        if not 0 <= b <= 1:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class FlowSummary:
    # out_x: traffic sourced in X (weight 1 for A, beta for B folded in below)
    # in_x: traffic delivered into X
    out_a: int
    in_a: int
    out_b: int
    in_b: int
    beta: Fraction
    per_node_a: tuple[Fraction, ...] | None = None
    per_node_b: tuple[Fraction, ...] | None = None

    @property
    def total_a(self) -> Fraction:
        # A-sourced traffic has weight 1, B-sourced has weight beta
        return self.out_a + self.beta * self.in_a

    @property
    def total_b(self) -> Fraction:
        return self.in_b + self.beta * self.out_b

    @property
    def outgoing_a(self) -> int:
        return self.out_a


class FlowModel:
    """Precomputed view of one game topology for repeated flow evaluation."""

    def __init__(self, dist_a: np.ndarray, dist_b: np.ndarray):
        dist_a = np.asarray(dist_a, dtype=np.int64)
        dist_b = np.asarray(dist_b, dtype=np.int64)
        if dist_a.shape != dist_b.shape or dist_a.ndim != 2 or dist_a.shape[0] != dist_a.shape[1]:
            raise ValueError("distance matrices must be square and of equal size")
        self.n = n = dist_a.shape[0]
        self.dist_a = dist_a
        self.dist_b = dist_b
        # node-visits of one packet from x to every node of its own graph
        self.reach_a = (dist_a + 1).sum(axis=1)
        self.reach_b = (dist_b + 1).sum(axis=1)
        self._nn = n * n
        # key(d, own, far) = d*n^2 + own*n + far; argmin over keys applies the tie-break
        self._key_a = dist_a * self._nn
        self._key_b = dist_b * self._nn

    def counts(self, links: np.ndarray) -> tuple[int, int, int, int]:
        """(out_a, in_a, out_b, in_b) for a (k, 2) int array of links, k >= 1."""
        n, nn = self.n, self._nn
        a = links[:, 0]
        b = links[:, 1]
        key_a = (self._key_a[:, a] + (a * n + b)).min(axis=1)
        key_b = (self._key_b[:, b] + (b * n + a)).min(axis=1)
        d_a = key_a // nn
        exit_b = key_a % n
        d_b = key_b // nn
        entry_a = key_b % n
        out_a = n * (int(d_a.sum()) + n)
        out_b = n * (int(d_b.sum()) + n)
        in_b = int(self.reach_b[exit_b].sum())
        in_a = int(self.reach_a[entry_a].sum())
        return out_a, in_a, out_b, in_b

    def exits(self, links: np.ndarray, side: str) -> np.ndarray:
        """Per-source index into ``links`` of the chosen exit."""
        n = self.n
        a = links[:, 0]
        b = links[:, 1]
        if side == "A":
            keys = self._key_a[:, a] + (a * n + b)
        elif side == "B":
            keys = self._key_b[:, b] + (b * n + a)
        else:
            raise ValueError(f"side must be 'A' or 'B', got {side!r}")
        return keys.argmin(axis=1)


def links_array(P: PeeringSet | Sequence[Link]) -> np.ndarray:
    links = P.links if isinstance(P, PeeringSet) else tuple(P)
    return np.array(links, dtype=np.int64).reshape(-1, 2)


def _require_links(P) -> None:
    if len(P) == 0:
        raise ValueError("peering set is empty; routing needs at least one link")


def exit_assignment(dist: np.ndarray, P: PeeringSet, side: str) -> list[Link]:
    """Exit link chosen by each source node on ``side`` (``"A"`` or ``"B"``).

    Ties go to the smaller same-side endpoint, then the smaller far-side one.
    """
    _require_links(P)
    model = FlowModel(dist, dist)
    arr = links_array(P)
    return [P.links[k] for k in model.exits(arr, side)]


def provider_flows(dist_a: np.ndarray, dist_b: np.ndarray, P: PeeringSet, traffic: TrafficSpec) -> FlowSummary:
    _require_links(P)
    out_a, in_a, out_b, in_b = FlowModel(dist_a, dist_b).counts(links_array(P))
    return FlowSummary(out_a, in_a, out_b, in_b, traffic.beta)


def shortest_path(dist: np.ndarray, u: int, v: int) -> list[int]:
    """Shortest u -> v path, stepping to the smallest-label neighbour each hop."""
    path = [u]
    x = u
    while x != v:
        dx = dist[x, v]
        nbrs = np.flatnonzero(dist[x] == 1)
        x = int(next(y for y in nbrs if dist[y, v] == dx - 1))
        path.append(x)
    return path


def per_node_flows(dist_a: np.ndarray, dist_b: np.ndarray, P: PeeringSet, traffic: TrafficSpec) -> FlowSummary:
    """Flow totals plus per-node visit counts along the deterministic paths."""
    _require_links(P)
    model = FlowModel(dist_a, dist_b)
    arr = links_array(P)
    n = model.n
    beta = traffic.beta
    # exact split per node: outgoing-weight part and beta-weight part
    a_out = [0] * n
    a_in = [0] * n
    b_out = [0] * n
    b_in = [0] * n
    for i, k in enumerate(model.exits(arr, "A")):
        ea, eb = P.links[k]
        for x in shortest_path(dist_a, i, ea):
            a_out[x] += n
        for j in range(n):
            for x in shortest_path(dist_b, eb, j):
                b_in[x] += 1
    for j, k in enumerate(model.exits(arr, "B")):
        ea, eb = P.links[k]
        for x in shortest_path(dist_b, j, eb):
            b_out[x] += n
        for i in range(n):
            for x in shortest_path(dist_a, ea, i):
                a_in[x] += 1
    return FlowSummary(
        sum(a_out),
        sum(a_in),
        sum(b_out),
        sum(b_in),
        beta,
        per_node_a=tuple(o + beta * q for o, q in zip(a_out, a_in)),
        per_node_b=tuple(q + beta * o for o, q in zip(b_out, b_in)),
    )
