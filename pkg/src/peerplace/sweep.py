"""(alpha, beta) sweeps: replicate runs per cell, stationary summaries, CSV output."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cost import DEFAULT_PENALTY, PeeringGame
from .dynamics import RNG_ALGORITHM, SCHEMA_VERSION, RunConfig, RunTrace, StationaryStats, dump_metadata, run, stationary_stats
from .routing import as_fraction
from .topology import Graph, all_pairs_distances, generate_ba, generate_regular, load_graph

SUMMARY_COLUMNS = ["alpha", "beta", "runs", "mean_np", "std_np", "mean_ca", "std_ca", "mean_cb", "std_cb"]


@dataclass(frozen=True)
class TopologySpec:
    kind: str = "ba"
    n: int = 30
    m: int = 2
    seed: int = 0
    path: str | None = None

    def build(self) -> Graph:
        if self.path is not None:
            try:
                text = Path(self.path).read_text()
            except OSError as exc:
                raise OSError(f"cannot read graph file {self.path!r}: {exc.strerror}") from None
            return load_graph(text)
        if self.kind == "ba":
            return generate_ba(self.n, self.m, self.seed)
        return generate_regular(self.kind, self.n)

    def describe(self) -> dict:
        if self.path is not None:
            return {"graph_file": self.path}
        d = {"kind": self.kind, "n": self.n}
        if self.kind == "ba":
            d.update(m=self.m, seed=self.seed)
        return d


@dataclass(frozen=True)
class ExperimentSpec:
    topology: TopologySpec
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    runs: int
    run: RunConfig
    out_dir: str | None = None
    window: tuple[float, float] | None = None
    bin_width: float = 0.005
    penalty: float = float(DEFAULT_PENALTY)

    def __post_init__(self):
        if not self.alphas or not self.betas:
            raise ValueError("alpha and beta lists must be non-empty")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        for x in (*self.alphas, *self.betas):
            if not 0 <= x <= 1:
                raise ValueError(f"alpha/beta value {x} outside [0, 1]")

    def resolved_window(self) -> tuple[float, float]:
        if self.window is not None:
            return self.window
        return default_window(self.run)


def default_window(cfg: RunConfig) -> tuple[float, float]:
    """Last tenth of the annealing phase, through the final sample."""
    t0 = cfg.schedule.t0
    return t0 + 0.9 * (cfg.t_max - t0), math.inf


@dataclass
class CellResult:
    alpha: float
    beta: float
    traces: list[RunTrace] = field(repr=False)
    stats: StationaryStats

    def row(self) -> list:
        s = self.stats
        return [self.alpha, self.beta, len(self.traces), s.mean_np, s.std_np, s.mean_ca, s.std_ca, s.mean_cb, s.std_cb]


_GAMES: dict = {}


def _task(args) -> RunTrace:
    dist_bytes, n, alpha, beta, penalty, cfg = args
    key = (dist_bytes, alpha, beta, penalty)
    game = _GAMES.get(key)
    if game is None:
        dist = np.frombuffer(dist_bytes, dtype=np.int64).reshape(n, n)
        game = _GAMES[key] = PeeringGame.build(dist, alpha, beta, penalty)
    return run(game, cfg)


def run_seed(base_seed: int, run_index: int) -> int:
    return base_seed + run_index


def run_sweep(spec: ExperimentSpec, jobs: int = 1) -> list[CellResult]:
    """Run every (alpha, beta, replicate) and aggregate per cell in sorted order."""
    dist = all_pairs_distances(spec.topology.build())
    n = dist.shape[0]
    dist_bytes = np.ascontiguousarray(dist).tobytes()
    cells = [(a, b) for a in sorted(spec.alphas) for b in sorted(spec.betas)]
    base = spec.run
    tasks = []
    for a, b in cells:
        for r in range(spec.runs):
            cfg = RunConfig(base.schedule, base.t_max, base.sample_every, run_seed(base.seed, r), base.initial)
            tasks.append((dist_bytes, n, a, b, spec.penalty, cfg))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(_task, tasks, chunksize=1))
    else:
        traces = [_task(t) for t in tasks]
    window = spec.resolved_window()
    out = []
    for k, (a, b) in enumerate(cells):
        cell_traces = traces[k * spec.runs : (k + 1) * spec.runs]
        out.append(CellResult(a, b, cell_traces, stationary_stats(cell_traces, window, spec.bin_width)))
    return out


def summary_csv(results: list[CellResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for cell in results:
        w.writerow([repr(x) if isinstance(x, float) else x for x in cell.row()])
    return buf.getvalue()


def histogram_csv(cell: CellResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["provider", "bin_lo", "bin_hi", "count"])
    for name, hist in (("A", cell.stats.hist_ca), ("B", cell.stats.hist_cb)):
        for lo, count in hist.bins:
            w.writerow([name, repr(lo), repr(lo + hist.bin_width), count])
    return buf.getvalue()


def sweep_metadata(spec: ExperimentSpec, results: list[CellResult]) -> dict:
    dist = all_pairs_distances(spec.topology.build())
    nf = {}
    for beta in sorted(spec.betas):
        game = PeeringGame.build(dist, 0, beta, spec.penalty)
        nf[repr(float(beta))] = [str(game.params.n_f_a), str(game.params.n_f_b)]
    lo, hi = spec.resolved_window()
    return {
        "schema": SCHEMA_VERSION,
        "rng": RNG_ALGORITHM,
        "topology": spec.topology.describe(),
        "alphas": [repr(float(a)) for a in sorted(spec.alphas)],
        "betas": [repr(float(b)) for b in sorted(spec.betas)],
        "runs": spec.runs,
        "base_seed": spec.run.seed,
        "run_seeds": [run_seed(spec.run.seed, r) for r in range(spec.runs)],
        "schedule": asdict(spec.run.schedule),
        "t_max": spec.run.t_max,
        "sample_every": spec.run.sample_every,
        "initial": [list(x) for x in spec.run.initial],
        "penalty": str(as_fraction(spec.penalty)),
        "window": [repr(lo), repr(hi)],
        "bin_width": spec.bin_width,
        "n_f_by_beta": nf,
        "cells": len(results),
    }


def hist_name(cell: CellResult) -> str:
    return f"hist_alpha{cell.alpha!r}_beta{cell.beta!r}.csv"


def write_sweep(spec: ExperimentSpec, results: list[CellResult], out_dir: str | Path, histograms: bool = False) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(summary_csv(results))
    (out / "summary.meta.json").write_text(dump_metadata(sweep_metadata(spec, results)))
    if histograms:
        for cell in results:
            (out / hist_name(cell)).write_text(histogram_csv(cell))
    return out / "summary.csv"
