"""Command-line harness: ``graph | run | sweep | enumerate | worstlink``.

Value precedence is flag > ``--config`` file (flat ``key=value`` lines) >
preset (desk scale by default, paper scale with ``--paper``).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cost import PeeringGame, worst_links
from .dynamics import RunConfig, Schedule, dump_metadata, run, run_metadata
from .routing import TrafficSpec, as_fraction
from .stability import MAX_ENUM_NODES, SizeLimitError, enumerate_game
from .sweep import ExperimentSpec, TopologySpec, default_window, run_sweep, write_sweep
from .topology import all_pairs_distances, save_graph

DESK = {"n": 30, "m": 2, "runs": 20, "t0": 3000, "t_max": 30000, "rate": 3.33e-4}
PAPER = {"n": 100, "m": 2, "runs": 150, "t0": 10000, "t_max": 100000, "rate": 1e-4}
FALLBACK = {
    "topology": "ba",
    "seed": 0,
    "eps0": 0.5,
    "sample_every": 100,
    "jobs": 1,
    "bin_width": 0.005,
    "alpha": "0.5",
    "beta": "1",
}


_ALIASES = {"kind": "topology"}


class CLIError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise CLIError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise CLIError("empty value list")
    return vals


def read_config(path: str) -> dict[str, str]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CLIError(f"cannot read config file {path!r}: {exc.strerror}") from None
    out = {}
    for k, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CLIError(f"{path}:{k}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip().lstrip("-").replace("-", "_")
        out[_ALIASES.get(key, key)] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--paper", action="store_true", default=None, help="paper-scale preset")
    common.add_argument("--topology", "--kind", dest="topology", choices=["ba", "path", "cycle", "complete"])
    common.add_argument("--graph-file", dest="graph_file")
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--alpha")
    common.add_argument("--beta")
    common.add_argument("--runs", type=int)
    common.add_argument("--t-max", dest="t_max", type=int)
    common.add_argument("--t0", type=int)
    common.add_argument("--rate", type=float)
    common.add_argument("--eps0", type=float)
    common.add_argument("--sample-every", dest="sample_every", type=int)
    common.add_argument("--window-start", dest="window_start", type=float)
    common.add_argument("--window-end", dest="window_end", type=float)
    common.add_argument("--bin-width", dest="bin_width", type=float)
    common.add_argument("--histograms", action="store_true", default=None)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out")

    parser = argparse.ArgumentParser(prog="peerplace", description="Peering-point placement game simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("graph", parents=[common], help="write a canonical edge list")
    sub.add_parser("run", parents=[common], help="one perturbed dynamics run")
    sub.add_parser("sweep", parents=[common], help="(alpha, beta) sweep summary")
    sub.add_parser("enumerate", parents=[common], help="all pairwise stable networks (n <= 4)")
    sub.add_parser("worstlink", parents=[common], help="worst-case single-link congestion")
    return parser


_TYPES = {
    "n": int, "m": int, "seed": int, "runs": int, "t_max": int, "t0": int, "sample_every": int, "jobs": int,
    "rate": float, "eps0": float, "window_start": float, "window_end": float, "bin_width": float,
}
_BOOLS = {"paper", "histograms"}


def resolve(args: argparse.Namespace) -> dict:
    config = read_config(args.config) if args.config else {}
    known = set(vars(args)) - {"command", "config"}
    for key in config:
        if key not in known:
            raise CLIError(f"unknown config key {key!r}")
    vals: dict = {}
    for key in known:
        v = getattr(args, key)
        if v is None and key in config:
            raw = config[key]
            if key in _BOOLS:
                v = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    v = _TYPES.get(key, str)(raw)
                except ValueError:
                    raise CLIError(f"config key {key!r}: bad value {raw!r}") from None
        vals[key] = v
    preset = PAPER if vals["paper"] else DESK
    for source in (preset, FALLBACK):
        for key, v in source.items():
            if vals.get(key) is None:
                vals[key] = v
    return vals


def _topology(v: dict) -> TopologySpec:
    return TopologySpec(v["topology"], v["n"], v["m"], v["seed"], v["graph_file"])


def _run_config(v: dict, seed: int | None = None) -> RunConfig:
    sched = Schedule(v["eps0"], v["t0"], v["rate"])
    return RunConfig(sched, v["t_max"], v["sample_every"], v["seed"] if seed is None else seed)


def _single(text: str, name: str) -> float:
    vals = _float_list(text)
    if len(vals) != 1:
        raise CLIError(f"--{name} takes a single value for this command")
    return vals[0]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_graph(v: dict) -> None:
    _emit(save_graph(_topology(v).build()), v["out"])


def cmd_run(v: dict) -> None:
    topo = _topology(v)
    dist = all_pairs_distances(topo.build())
    game = PeeringGame.build(dist, _single(v["alpha"], "alpha"), _single(v["beta"], "beta"))
    cfg = _run_config(v)
    trace = run(game, cfg)
    _emit(trace.to_csv(), v["out"])
    if v["out"]:
        meta = run_metadata(game, cfg, topology=topo.describe(), final_np=len(trace.final_P),
                            final_links=[list(x) for x in trace.final_P.links])
        Path(v["out"] + ".meta.json").write_text(dump_metadata(meta))


def cmd_sweep(v: dict) -> None:
    cfg = _run_config(v)
    lo, hi = default_window(cfg)
    window = (
        v["window_start"] if v["window_start"] is not None else lo,
        v["window_end"] if v["window_end"] is not None else hi,
    )
    spec = ExperimentSpec(
        topology=_topology(v),
        alphas=tuple(_float_list(v["alpha"])),
        betas=tuple(_float_list(v["beta"])),
        runs=v["runs"],
        run=cfg,
        out_dir=v["out"] or "sweep_out",
        window=window,
        bin_width=v["bin_width"],
    )
    results = run_sweep(spec, jobs=max(1, v["jobs"]))
    path = write_sweep(spec, results, spec.out_dir, histograms=bool(v["histograms"]))
    print(path)


def cmd_enumerate(v: dict) -> None:
    dist = all_pairs_distances(_topology(v).build())
    if dist.shape[0] > MAX_ENUM_NODES:
        raise SizeLimitError(f"enumeration limited to n <= {MAX_ENUM_NODES}, got n={dist.shape[0]}")
    game = PeeringGame.build(dist, _single(v["alpha"], "alpha"), _single(v["beta"], "beta"))
    _emit(enumerate_game(game).to_csv(), v["out"])


def cmd_worstlink(v: dict) -> None:
    dist = all_pairs_distances(_topology(v).build())
    beta = _single(v["beta"], "beta")
    nf_a, nf_b, arg_a, arg_b = worst_links(dist, TrafficSpec(as_fraction(beta)))
    text = (
        f"n_f_a={nf_a} n_f_b={nf_b} "
        f"argmax_a={arg_a[0]},{arg_a[1]} argmax_b={arg_b[0]},{arg_b[1]}\n"
    )
    _emit(text, v["out"])


COMMANDS = {
    "graph": cmd_graph,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "enumerate": cmd_enumerate,
    "worstlink": cmd_worstlink,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](resolve(args))
    except (CLIError, ValueError, OSError) as exc:
        print(f"peerplace {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
