"""Command line front end.

Subcommands:
  run              sweep strategies over a workload, emit results.csv + summary.csv
  synth            generate a synthetic skyway network CSV
  calibrate-scale  tabulate support-drone counts per candidate failure scale

Exit codes: 0 success, 2 bad configuration, 3 file/format trouble.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .bench import (
    ExperimentConfig,
    run_experiment,
    write_plot_data,
    write_results,
    write_summary,
)
from .energy import SUPPORT_CAPACITY_FACTOR, DroneSpec, EnergyModel
from .formations import default_table, load_coefficients
from .network import (
    NetworkFormatError,
    largest_connected_component,
    load_network,
    load_requests,
    shortest_path_tree,
    save_network,
    synthesize_network,
    synthesize_requests,
)
from .preflight import (
    DEFAULT_FAILURE_SCALE,
    FailureInputs,
    failure_probability,
    network_diameter,
    payload_ratio,
    redundancy_count,
    route_average_wind,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="swarmway",
        description="Swarm delivery planning over skyway networks.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep strategies over a request workload")
    run.add_argument("--network", metavar="F",
                     help="network CSV; omitted -> synthesize one")
    run.add_argument("--requests", type=int, default=100, metavar="N",
                     help="number of requests to synthesize (default 100)")
    run.add_argument("--requests-file", metavar="F",
                     help="load requests from CSV instead of synthesizing")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--strategies", default="baseline,pb,fb,dijkstra,floyd",
                     help="comma list from: baseline,pb,fb,dijkstra,floyd")
    run.add_argument("--positioning", default="location-aware,energy-aware",
                     help="comma list from: location-aware,energy-aware")
    run.add_argument("--gamma", type=float, default=0.8,
                     help="request threshold, fraction of capacity (default 0.8)")
    run.add_argument("--delta-frac", type=float, default=0.2,
                     help="provider reserve, fraction of capacity (default 0.2)")
    run.add_argument("--lambda", dest="quantum", type=float, default=2240.0,
                     help="fairness quantum, mAh per turn (default 2240)")
    run.add_argument("--share-rate", type=float, default=5.88,
                     help="in-flight transfer rate, mAh/min (default 5.88)")
    run.add_argument("--pad-minutes", type=float, default=60.0,
                     help="minutes a pad needs for one full charge (default 60)")
    run.add_argument("--coeffs", metavar="F",
                     help="coefficient CSV; omitted -> built-in table")
    run.add_argument("--out", default=".", metavar="DIR")
    run.add_argument("--failure-scale", type=float, default=DEFAULT_FAILURE_SCALE)
    run.add_argument("--bin-width", type=float, default=0.5,
                     help="summary distance bin width, km (default 0.5)")
    run.add_argument("--synth-nodes", type=int, default=276,
                     help="node count before trimming when synthesizing")
    run.add_argument("--greedy-pads", action="store_true",
                     help="allow approximate pad schedules for big swarms")
    run.add_argument("--plot-data", action="store_true",
                     help="also emit per-bin plot_data.csv")
    run.add_argument("--quiet", action="store_true")

    synth = sub.add_parser("synth", help="generate a synthetic network CSV")
    synth.add_argument("--nodes", type=int, default=276)
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--keep-all", action="store_true",
                       help="keep every node instead of the largest component")
    synth.add_argument("--out", required=True, metavar="F")

    cal = sub.add_parser(
        "calibrate-scale",
        help="tabulate the support-count bands a failure scale produces",
    )
    cal.add_argument("--network", metavar="F")
    cal.add_argument("--synth-nodes", type=int, default=276)
    cal.add_argument("--requests", type=int, default=500, metavar="N")
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--scales", default="4,8,12,16,24",
                     help="comma list of candidate scale factors")
    return p


def _load_or_synthesize(network_path, synth_nodes, seed):
    if network_path:
        return load_network(network_path)
    return largest_connected_component(synthesize_network(synth_nodes, seed))


def _cmd_run(args) -> None:
    strategies = tuple(s.strip() for s in args.strategies.split(",") if s.strip())
    positionings = tuple(s.strip() for s in args.positioning.split(",") if s.strip())
    cfg = ExperimentConfig(
        strategies=strategies,
        positionings=positionings,
        gamma=args.gamma,
        delta_frac=args.delta_frac,
        quantum=args.quantum,
        share_rate=args.share_rate,
        pad_minutes=args.pad_minutes,
        failure_scale=args.failure_scale,
        bin_width_km=args.bin_width,
        greedy_pads=args.greedy_pads,
        network_path=args.network,
        coeffs_path=args.coeffs,
        out_dir=args.out,
        request_count=args.requests,
        seed=args.seed,
        synth_nodes=args.synth_nodes,
    )
    net = _load_or_synthesize(args.network, args.synth_nodes, args.seed)
    table = load_coefficients(args.coeffs) if args.coeffs else default_table()
    if args.requests_file:
        requests = load_requests(args.requests_file)
    else:
        requests = synthesize_requests(net, args.requests, args.seed)

    progress = None
    if not args.quiet:
        def progress(done, total):
            if done % 200 == 0 or done == total:
                print(f"  {done}/{total} requests", file=sys.stderr)

    rows, metrics = run_experiment(net, requests, table, cfg, on_progress=progress)
    os.makedirs(args.out, exist_ok=True)
    write_results(rows, os.path.join(args.out, "results.csv"))
    write_summary(metrics, os.path.join(args.out, "summary.csv"))
    if args.plot_data:
        write_plot_data(metrics, os.path.join(args.out, "plot_data.csv"))
    if not args.quiet:
        for (strategy, pos) in sorted(metrics.groups):
            g = metrics.groups[(strategy, pos)]
            print(f"{strategy:9s} {pos:15s} {g.successes}/{g.rows} ok, "
                  f"mean dt {g.mean_dt:.1f} min")


def _cmd_synth(args) -> None:
    net = synthesize_network(args.nodes, args.seed)
    if not args.keep_all:
        net = largest_connected_component(net)
    save_network(net, args.out)
    print(f"wrote {len(net.nodes)} nodes, {len(net.segments)} segments to {args.out}")


def _cmd_calibrate(args) -> None:
    net = _load_or_synthesize(args.network, args.synth_nodes, args.seed)
    requests = synthesize_requests(net, args.requests, args.seed)
    scales = [float(s) for s in args.scales.split(",") if s.strip()]
    spec = DroneSpec()
    diameter = network_diameter(net)
    inputs = []
    for req in requests:
        tree = shortest_path_tree(net, req.destination)
        distance = tree.distance(req.source)
        if not math.isfinite(distance):
            continue
        wind = route_average_wind(net, tree.path_to_root(req.source))
        inputs.append((
            FailureInputs(
                payload=payload_ratio(req.package_weights, spec.max_payload),
                distance=min(1.0, distance / diameter),
                capacity=SUPPORT_CAPACITY_FACTOR / SUPPORT_CAPACITY_FACTOR,
                wind=wind.speed / 13.8,
            ),
            len(req.package_weights),
        ))
    print(f"{len(inputs)} reachable requests; support-count histogram per scale:")
    for scale in scales:
        counts: dict[int, int] = {}
        for fi, n in inputs:
            k = redundancy_count(failure_probability(fi, scale), n)
            counts[k] = counts.get(k, 0) + 1
        hist = "  ".join(f"{k}sup:{counts[k]}" for k in sorted(counts))
        print(f"  scale {scale:6.1f}: {hist}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            _cmd_run(args)
        elif args.command == "synth":
            _cmd_synth(args)
        else:
            _cmd_calibrate(args)
    except NetworkFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
