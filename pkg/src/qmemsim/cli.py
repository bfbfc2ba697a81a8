"""Command-line entry point: ``qmemsim <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import pipelines
from .config import ExperimentConfig, default_config, load_config
from .errors import ConfigError, QMemError
from .polarization import read_counts_json
from .streams import HBT_B, SIGNAL, TRIGGER, read_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", metavar="PATH", help="flat key=value experiment config")
    common.add_argument("--seed", type=int, help="override run.seeds with a single seed")
    common.add_argument("--out", metavar="DIR", help="output directory (default: run.output_dir)")

    p = argparse.ArgumentParser(prog="qmemsim", parents=[common],
                                description="Simulate and analyze a heralded-photon quantum memory.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="write simulated time tags to timetags.csv")
    s.add_argument("--duration", type=float, default=1.0, help="acquisition time in seconds")
    s.add_argument("--store", action="store_true", help="pass the signal through the memory")
    s.add_argument("--hbt", action="store_true", help="split the signal onto channels 2 and 3")

    a = sub.add_parser("analyze", parents=[common], help="histogram, g2 and alpha from a tag file")
    a.add_argument("input", help="CSV with header channel,t_ns")
    a.add_argument("--trigger", type=int, default=TRIGGER)
    a.add_argument("--signal", type=int, default=SIGNAL)
    a.add_argument("--hbt-b", type=int, default=HBT_B, help="second HBT arm (alpha if present)")
    a.add_argument("--duration-ns", type=int, help="acquisition span; default first-to-last tag")
    a.add_argument("--alpha-delay", type=float, help="center of the alpha window after a trigger (ns)")

    c = sub.add_parser("correlation", parents=[common], help="g2 peak versus storage time and decay fit")
    c.add_argument("--duration", type=float, help="simulated seconds (default correlation.duration)")

    sub.add_parser("image", parents=[common], help="stored donut image and transverse g2 scans")

    t = sub.add_parser("tomography", parents=[common], help="process tomography of polarization storage")
    t.add_argument("--shots", type=int, help="shots per setting (default tomography.shots)")
    t.add_argument("--counts", metavar="JSON", help="reconstruct from measured counts instead")

    sub.add_parser("interference", parents=[common], help="OAM four-spot patterns and fringe")
    return p


def _config(args) -> ExperimentConfig:
    # global flags may appear before or after the subcommand; absent ones are not set at all
    path = getattr(args, "config", None)
    cfg = load_config(path) if path else default_config()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seeds=(int(args.seed),))
    if getattr(args, "out", None):
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def _dispatch(args, cfg: ExperimentConfig) -> None:
    out = cfg.output_dir
    if args.command == "simulate":
        info = pipelines.run_simulate(cfg, out, args.duration, args.store, args.hbt)
        print(f"wrote {info['tags']} tags spanning {info['duration_ns']} ns")
    elif args.command == "analyze":
        stream = read_csv(args.input, duration_ns=args.duration_ns)
        summary = pipelines.analyze_stream(stream, cfg, out, args.trigger, args.signal,
                                           args.hbt_b, args.alpha_delay)
        if "warning" in summary:
            print(f"warning: {summary['warning']}", file=sys.stderr)
    elif args.command == "correlation":
        fit = pipelines.run_correlation(cfg, out, args.duration)["fit"]
        print(f"T = {fit.T:.1f} ns, A = {fit.A:.3f}, g0 = {fit.g0:.3f}")
    elif args.command == "image":
        m = pipelines.run_image_memory(cfg, out)
        print(f"visibility {m['visibility_in']:.3f} -> {m['visibility_out']:.3f}, "
              f"similarity {m['similarity']:.4f}")
    elif args.command == "tomography":
        counts = read_counts_json(args.counts) if args.counts else None
        fids = pipelines.run_tomography(cfg, out, args.shots, counts)["fidelities"]
        print(", ".join(f"F_{k} = {v:.3f}" for k, v in fids.items()))
    elif args.command == "interference":
        v = pipelines.run_interference(cfg, out)
        print(f"fringe visibility {v['visibility']:.3f}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _dispatch(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QMemError, ValueError, KeyError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
