"""Perturbed link-formation dynamics and stationary statistics.

Each step proposes, with equal probability, adding a random absent link or
removing a random present one.  Each provider's correct decision (a strict
cost decrease) is inverted independently with probability ``epsilon(t)``.
Additions need both approvals; one severance is enough for a removal.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cost import PeeringGame, State
from .routing import Link, PeeringSet, links_array

RNG_ALGORITHM = "numpy.random.PCG64"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Schedule:
    eps0: float = 0.5
    t0: int = 10_000
    rate: float = 1e-4

    def __post_init__(self):
        if not 0 < self.eps0 <= 0.5:
            raise ValueError(f"eps0 must lie in (0, 0.5], got {self.eps0}")
        if self.t0 < 0:
            raise ValueError(f"t0 must be non-negative, got {self.t0}")
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")


def epsilon(t: int, s: Schedule = Schedule()) -> float:
    if t < s.t0:
        return s.eps0
    return s.eps0 * math.exp(s.rate * (s.t0 - t))


@dataclass(frozen=True)
class RunConfig:
    schedule: Schedule = Schedule()
    t_max: int = 100_000
    sample_every: int = 100
    seed: int = 0
    initial: tuple[Link, ...] = ((0, 0),)

    def __post_init__(self):
        if self.t_max <= self.schedule.t0:
            raise ValueError(f"t_max ({self.t_max}) must exceed t0 ({self.schedule.t0})")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


@dataclass
class RunTrace:
    samples: list[tuple[int, int, float, float]]
    final_P: PeeringSet
    final_t: int
    seed: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "np", "cost_a", "cost_b"])
        for t, size, ca, cb in self.samples:
            w.writerow([t, size, repr(ca), repr(cb)])
        return buf.getvalue()


@dataclass(frozen=True)
class Event:
    t: int
    kind: str  # "add", "remove" or "noop"
    link: Link | None
    accepted: bool
    epsilon: float


class UniformStream:
    """Buffered U[0, 1) draws from PCG64; the draw sequence depends only on the seed."""

    def __init__(self, seed: int, block: int = 8192):
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._block = block
        self._buf: list[float] = []
        self._pos = 0

    def __call__(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(self._block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def index(self, k: int) -> int:
        return min(int(self() * k), k - 1)


class Chain:
    """Mutable chain state: link buffer, membership and cached scaled state."""

    def __init__(self, game: PeeringGame, initial=()):
        self.game = game
        n = game.n
        self.n = n
        self.buf = np.zeros((n * n, 2), dtype=np.int64)
        self.ids: list[int] = []
        self.members: set[int] = set()
        for a, b in PeeringSet(initial).links:
            self.buf[len(self.ids)] = (a, b)
            self.ids.append(a * n + b)
            self.members.add(a * n + b)
        self.state = game.state(self.buf[: len(self.ids)])

    @property
    def size(self) -> int:
        return len(self.ids)

    def peering_set(self) -> PeeringSet:
        return PeeringSet(divmod(i, self.n) for i in self.ids)

    def costs(self) -> tuple[float, float]:
        return self.game.costs(self.state)

    def _draw_absent(self, uniform: UniformStream) -> int:
        nl = self.n * self.n
        if 2 * len(self.ids) <= nl:
            while True:
                c = uniform.index(nl)
                if c not in self.members:
                    return c
        absent = [c for c in range(nl) if c not in self.members]
        return absent[uniform.index(len(absent))]

    def step(self, t: int, eps: float, uniform: UniformStream) -> Event:
        game = self.game
        k = len(self.ids)
        nl = self.n * self.n
        if uniform() < 0.5:
            if k == nl:
                return Event(t, "noop", None, False, eps)
            c = self._draw_absent(uniform)
            self.buf[k] = divmod(c, self.n)
            new = game.state(self.buf[: k + 1])
            ga, gb = game.improves(self.state, new)
            ok_a = ga != (uniform() < eps)
            ok_b = gb != (uniform() < eps)
            accepted = ok_a and ok_b
            if accepted:
                self.ids.append(c)
                self.members.add(c)
                self.state = new
            return Event(t, "add", divmod(c, self.n), accepted, eps)
        if k == 0:
            return Event(t, "noop", None, False, eps)
        idx = uniform.index(k)
        last = k - 1
        buf = self.buf
        buf[[idx, last]] = buf[[last, idx]]
        new = game.state(buf[:last])
        ga, gb = game.improves(self.state, new)
        sever_a = ga != (uniform() < eps)
        sever_b = gb != (uniform() < eps)
        accepted = sever_a or sever_b
        c = self.ids[idx]
        if accepted:
            self.ids[idx] = self.ids[last]
            self.ids.pop()
            self.members.discard(c)
            self.state = new
        else:
            buf[[idx, last]] = buf[[last, idx]]
        return Event(t, "remove", divmod(c, self.n), accepted, eps)


def step(game: PeeringGame, state: PeeringSet, t: int, schedule: Schedule, uniform: UniformStream):
    """One transition from ``state``; returns (new PeeringSet, Event)."""
    chain = Chain(game, state.links)
    event = chain.step(t, epsilon(t, schedule), uniform)
    return chain.peering_set(), event


def run(game: PeeringGame, config: RunConfig) -> RunTrace:
    uniform = UniformStream(config.seed)
    chain = Chain(game, config.initial)
    samples = [(0, chain.size, *chain.costs())]
    sched = config.schedule
    every = config.sample_every
    for t in range(config.t_max):
        chain.step(t, epsilon(t, sched), uniform)
        done = t + 1
        if done % every == 0 or done == config.t_max:
            samples.append((done, chain.size, *chain.costs()))
    return RunTrace(samples, chain.peering_set(), config.t_max, config.seed)


def accepted_proposals(game: PeeringGame, P: PeeringSet) -> list[tuple[str, Link]]:
    """Every single-link proposal the unperturbed chain would accept at ``P``."""
    base = game.state(P)
    out = []
    for link in game.links:
        if link in P:
            if any(game.improves(base, game.state(P.remove(link)))):
                out.append(("remove", link))
        elif all(game.improves(base, game.state(P.add(link)))):
            out.append(("add", link))
    return out


def acceptance_probability(game: PeeringGame, P: PeeringSet, link: Link, eps: float) -> float:
    """Probability that a proposal for ``link`` (add if absent, else remove) is accepted."""
    if link in P:
        ga, gb = game.improves(game.state(P), game.state(P.remove(link)))
        keep_a = eps if ga else 1 - eps
        keep_b = eps if gb else 1 - eps
        return 1 - keep_a * keep_b
    ga, gb = game.improves(game.state(P), game.state(P.add(link)))
    return (1 - eps if ga else eps) * (1 - eps if gb else eps)


def run_unperturbed(game: PeeringGame, initial: PeeringSet, seed: int, max_steps: int = 100_000) -> tuple[PeeringSet, int]:
    """Run with epsilon = 0 until a full proposal sweep accepts nothing.

    Returns the absorbing network and the number of steps taken; raises
    RuntimeError if the chain has not been absorbed after ``max_steps``.
    """
    uniform = UniformStream(seed)
    chain = Chain(game, initial.links)
    for t in range(max_steps):
        if chain.step(t, 0.0, uniform).accepted or t % (game.n * game.n) == 0:
            P = chain.peering_set()
            if not accepted_proposals(game, P):
                return P, t + 1
    raise RuntimeError(f"no absorbing network reached within {max_steps} steps")


@dataclass
class Histogram:
    bin_width: float
    # (bin lower edge, count); bins are [k*w, (k+1)*w)
    bins: list[tuple[float, int]]


@dataclass
class StationaryStats:
    n_samples: int
    mean_np: float
    std_np: float
    mean_ca: float
    std_ca: float
    mean_cb: float
    std_cb: float
    hist_ca: Histogram = field(repr=False)
    hist_cb: Histogram = field(repr=False)


def _histogram(values: np.ndarray, width: float) -> Histogram:
    keys, counts = np.unique(np.floor(values / width).astype(np.int64), return_counts=True)
    return Histogram(width, [(float(k) * width, int(c)) for k, c in zip(keys, counts)])


def window_samples(traces: list[RunTrace], window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    rows = [row for tr in traces for row in tr.samples if lo < row[0] < hi]
    return np.array(rows, dtype=float).reshape(-1, 4)


def stationary_stats(traces: list[RunTrace], window: tuple[float, float], bin_width: float = 0.005) -> StationaryStats:
    """Mean/std of |P|, C_A, C_B over samples with ``lo < t < hi``, pooled across traces."""
    if not traces:
        raise ValueError("need at least one trace")
    data = window_samples(traces, window)
    if len(data) == 0:
        raise ValueError(f"no samples inside window {window}")
    size, ca, cb = data[:, 1], data[:, 2], data[:, 3]
    return StationaryStats(
        len(data),
        float(size.mean()),
        float(size.std()),
        float(ca.mean()),
        float(ca.std()),
        float(cb.mean()),
        float(cb.std()),
        _histogram(ca, bin_width),
        _histogram(cb, bin_width),
    )


def run_metadata(game: PeeringGame, config: RunConfig, **extra) -> dict:
    p = game.params
    meta = {
        "schema": SCHEMA_VERSION,
        "rng": RNG_ALGORITHM,
        "alpha": str(p.alpha),
        "beta": str(p.beta),
        "n": p.n,
        "n_f_a": str(p.n_f_a),
        "n_f_b": str(p.n_f_b),
        "n_p": p.n_p,
        "penalty": str(p.penalty),
        "schedule": asdict(config.schedule),
        "t_max": config.t_max,
        "sample_every": config.sample_every,
        "seed": config.seed,
        "initial": [list(x) for x in config.initial],
    }
    meta.update(extra)
    return meta


def dump_metadata(meta: dict) -> str:
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"
