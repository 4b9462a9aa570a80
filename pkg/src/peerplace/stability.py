"""Pairwise stability of peering networks and exhaustive enumeration on small instances.

The state is the network ``P`` itself (both providers intend exactly the
links in ``P``).  A network is pairwise stable when no provider strictly
gains by severing one of its links and no absent link strictly benefits
both providers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .cost import GameParams, PeeringGame, State
from .routing import Link, PeeringSet, links_array

MAX_STRONG_LINKS = 20
MAX_ENUM_NODES = 4


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    links: tuple[Link, ...]
    action: str  # "add" or "remove"
    beneficiaries: tuple[str, ...]


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    witness: Witness | None = None
    deletion_checks: int = 0
    addition_checks: int = 0
    subset_checks: int = 0


def _beneficiaries(better: tuple[bool, bool]) -> tuple[str, ...]:
    return tuple(x for x, ok in zip("AB", better) if ok)


def _game(params: GameParams, dist_a, dist_b) -> PeeringGame:
    return PeeringGame(dist_a, dist_b, params)


def check_pairwise(game: PeeringGame, P: PeeringSet) -> StabilityReport:
    """Deletions are tried first (links of P in canonical order), then additions."""
    base = game.state(P)
    deletions = additions = 0
    for link in P.links:
        deletions += 1
        better = game.improves(base, game.state(P.remove(link)))
        if any(better):
            return StabilityReport(False, Witness((link,), "remove", _beneficiaries(better)), deletions, additions)
    for link in game.links:
        if link in P:
            continue
        additions += 1
        better = game.improves(base, game.state(P.add(link)))
        if all(better):
            return StabilityReport(False, Witness((link,), "add", ("A", "B")), deletions, additions)
    return StabilityReport(True, None, deletions, additions)


def is_pairwise_stable(params: GameParams, dist_a, dist_b, P: PeeringSet) -> StabilityReport:
    return check_pairwise(_game(params, dist_a, dist_b), P)


def check_strongly_pairwise(game: PeeringGame, P: PeeringSet) -> StabilityReport:
    if len(P) > MAX_STRONG_LINKS:
        raise SizeLimitError(f"subset scan limited to |P| <= {MAX_STRONG_LINKS}, got {len(P)}")
    report = check_pairwise(game, P)
    if not report.stable:
        return report
    base = game.state(P)
    scanned = 0
    for r in range(1, len(P) + 1):
        for q in combinations(P.links, r):
            scanned += 1
            rest = PeeringSet(x for x in P.links if x not in q)
            better = game.improves(base, game.state(rest))
            if any(better):
                return StabilityReport(
                    False,
                    Witness(q, "remove", _beneficiaries(better)),
                    report.deletion_checks,
                    report.addition_checks,
                    scanned,
                )
    return StabilityReport(True, None, report.deletion_checks, report.addition_checks, scanned)


def is_strongly_pairwise_stable(params: GameParams, dist_a, dist_b, P: PeeringSet) -> StabilityReport:
    return check_strongly_pairwise(_game(params, dist_a, dist_b), P)


@dataclass
class Enumeration:
    """Stable networks and cost-minimizing networks of one small game."""

    n: int
    stable: list[PeeringSet]
    efficient: list[PeeringSet]
    costs: dict[int, tuple[Fraction, Fraction]] = field(repr=False)

    def rows(self):
        eff = {p.mask(self.n) for p in self.efficient}
        for p in self.stable:
            mask = p.mask(self.n)
            ca, cb = self.costs[mask]
            yield mask, len(p), float(ca), float(cb), mask in eff

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitmask", "np", "cost_a", "cost_b", "is_efficient"])
        for mask, size, ca, cb, eff in self.rows():
            w.writerow([mask, size, repr(ca), repr(cb), int(eff)])
        return buf.getvalue()


def state_table(game: PeeringGame) -> list[State]:
    """Scaled-integer state of every subset of links, indexed by bitmask."""
    n = game.n
    if n > MAX_ENUM_NODES:
        raise SizeLimitError(f"enumeration limited to n <= {MAX_ENUM_NODES}, got n={n}")
    nl = n * n
    all_links = np.array(game.links, dtype=np.int64)
    table = []
    for mask in range(1 << nl):
        idx = [k for k in range(nl) if mask >> k & 1]
        table.append(game.state(all_links[idx]))
    return table


def enumerate_game(game: PeeringGame) -> Enumeration:
    n = game.n
    nl = n * n
    table = state_table(game)
    stable = []
    for mask in range(1 << nl):
        s = table[mask]
        ok = True
        for k in range(nl):
            bit = 1 << k
            better = game.improves(s, table[mask ^ bit])
            if (mask & bit and any(better)) or (not mask & bit and all(better)):
                ok = False
                break
        if ok:
            stable.append(mask)
    costs = {mask: game.exact_costs(table[mask]) for mask in range(1 << nl)}
    totals = {mask: ca + cb for mask, (ca, cb) in costs.items() if mask}
    best = min(totals.values())
    efficient = [m for m in sorted(totals) if totals[m] == best]
    to_set = lambda masks: sorted((PeeringSet.from_mask(m, n) for m in masks), key=lambda p: p.links)
    return Enumeration(n, to_set(stable), to_set(efficient), costs)


def enumerate_pairwise_stable(params: GameParams, dist_a, dist_b) -> Enumeration:
    if params.n > MAX_ENUM_NODES:
        raise SizeLimitError(f"enumeration limited to n <= {MAX_ENUM_NODES}, got n={params.n}")
    return enumerate_game(_game(params, dist_a, dist_b))
