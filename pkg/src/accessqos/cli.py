"""Command line interface: ``accessqos run | oracle | report``.

Output files written by ``run``:

* ``series.csv`` with columns ``run,flow,bin_start_s,throughput_bps``
* ``summary_<t0>_<t1>.csv`` with columns ``flow,mean_bps,ci95_bps`` for
  every ``--summary-window``
* ``manifest.json`` (scenario digest, seed, discipline, package version)
* ``packets_run<k>.csv`` raw per-packet dumps with ``--dump-packets``

The default output directory comes from ``$ACCESSQOS_OUT`` (else ``./out``).
Exit status is 0 on success, 1 on invalid input and 2 on runtime failure.
"""
import argparse
import json
import os
from pathlib import Path
import platform
import sys

import numpy as np

from . import __version__
from .engine import run, run_repetitions
from .fair_rate import fair_rate
from .metrics import (bin_throughput, group_means, read_series_csv, series_csv,
                      summarize, summary_csv)
from .scenario import ScenarioError, bundled_scenario, load_scenario

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(ValueError):
    pass


def parse_vector(text):
    """Parse ``"2.5x4,5x4"`` into ``[2.5]*4 + [5.0]*4``."""
    out = []
    for item in filter(None, (p.strip() for p in text.split(","))):
        value, _, count = item.partition("x")
        try:
            out.extend([float(value)] * (int(count) if count else 1))
        except ValueError:
            raise UsageError(f"bad vector element {item!r}") from None
    return out


def parse_window(text):
    try:
        t0, t1 = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"bad window {text!r}; expected start:end") from None
    if not t1 > t0:
        raise UsageError(f"empty window {text!r}")
    return t0, t1


def resolve_scenario(ref):
    path = Path(ref)
    if path.exists():
        return load_scenario(path)
    if path.suffix == "" and "/" not in ref:
        try:
            return bundled_scenario(ref)
        except FileNotFoundError:
            pass
    raise FileNotFoundError(f"scenario {ref!r} not found")


def _window_tag(w):
    return f"{w[0]:g}_{w[1]:g}".replace(".", "p")


def format_table(summary, groups=None):
    lines = [f"window [{summary.window[0]:g}, {summary.window[1]:g}) s, "
             f"{summary.n_runs} run(s)", f"{'flow':>5} {'group':>12} {'mean Mb/s':>10} {'ci95 Mb/s':>10}"]
    for i, (m, c) in enumerate(zip(summary.mean, summary.ci95)):
        g = groups[i] if groups else "-"
        lines.append(f"{i:>5} {g:>12} {m / 1e6:>10.4f} {c / 1e6:>10.4f}")
    if groups:
        for name, value in group_means(summary.mean, groups).items():
            lines.append(f"group {name}: {value / 1e6:.4f} Mb/s")
    return "\n".join(lines)


def cmd_run(args):
    scenario = resolve_scenario(args.scenario)
    scenario = scenario.with_overrides(discipline=args.discipline, horizon=args.horizon,
                                       repetitions=args.repetitions, seed=args.seed,
                                       bin_width=args.bin_width)
    windows = [parse_window(w) for w in args.summary_window or []]
    for w in windows:
        if w[1] > scenario.run.horizon + 1e-9:
            raise UsageError(f"summary window {w} exceeds horizon {scenario.run.horizon}")
    out = Path(args.out_dir or os.environ.get("ACCESSQOS_OUT", "out"))
    out.mkdir(parents=True, exist_ok=True)

    if args.dump_packets:
        series = []
        for r in range(scenario.run.repetitions):
            log = run(scenario, seed=scenario.run.seed + r)
            log.to_csv(out / f"packets_run{r}.csv")
            series.append(bin_throughput(log, scenario.run.bin_width))
    else:
        series = run_repetitions(scenario, workers=args.workers)

    (out / "series.csv").write_text(series_csv(series))
    groups = scenario.subscriber_groups()
    for w in windows:
        s = summarize(w, series, horizon=scenario.run.horizon)
        (out / f"summary_{_window_tag(w)}.csv").write_text(summary_csv(s))
        print(format_table(s, groups))
    manifest = {
        "scenario": scenario.name,
        "scenario_sha256": scenario.digest(),
        "discipline": scenario.discipline.name,
        "seed": scenario.run.seed,
        "repetitions": scenario.run.repetitions,
        "horizon_s": scenario.run.horizon,
        "bin_width_s": scenario.run.bin_width,
        "groups": groups,
        "accessqos": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_oracle(args):
    weights = parse_vector(args.w)
    demands = parse_vector(args.d)
    if len(weights) != len(demands):
        raise UsageError(f"{len(weights)} weights but {len(demands)} demands")
    try:
        sol = fair_rate(args.capacity, demands, weights)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"alpha = {sol.alpha:.9g} b/s per unit weight ({sol.alpha / 1e6:.6g} Mb/s)")
    print(f"saturated = {sol.saturated}")
    print(f"{'flow':>5} {'weight':>8} {'demand_bps':>14} {'alloc_bps':>14}")
    for i, (w, d, a) in enumerate(zip(weights, demands, sol.allocations_bps)):
        print(f"{i:>5} {w:>8g} {d:>14.6g} {a:>14.6g}")
    return EXIT_OK


def cmd_report(args):
    src = Path(args.source)
    path = src / "series.csv" if src.is_dir() else src
    series = read_series_csv(path.read_text())
    if not series:
        raise UsageError(f"{path} holds no series rows")
    groups = None
    manifest = path.parent / "manifest.json"
    if manifest.exists():
        groups = json.loads(manifest.read_text()).get("groups")
    for text in args.window:
        w = parse_window(text)
        s = summarize(w, series)
        print(format_table(s, groups))
        if args.out:
            Path(args.out).write_text(summary_csv(s))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="accessqos", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write CSV series/summaries")
    r.add_argument("scenario", help="scenario file or bundled name (experiment1, burst, scalability)")
    r.add_argument("--out-dir")
    r.add_argument("--discipline", choices=("drr_tbm", "rr_tbf", "csfq_tbm"))
    r.add_argument("--repetitions", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--horizon", type=float)
    r.add_argument("--bin-width", type=float)
    r.add_argument("--summary-window", action="append", metavar="T0:T1")
    r.add_argument("--workers", type=int)
    r.add_argument("--dump-packets", action="store_true")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="solve the weighted fair-rate allocation")
    o.add_argument("capacity", type=float, help="excess capacity in b/s")
    o.add_argument("--w", required=True, help="weights, e.g. 2.5x4,5x4")
    o.add_argument("--d", required=True, help="demands in b/s, e.g. 13.5e6x4")
    o.set_defaults(func=cmd_oracle)

    rep = sub.add_parser("report", help="summarize a series.csv over windows")
    rep.add_argument("source", help="run output directory or series.csv")
    rep.add_argument("--window", action="append", required=True, metavar="T0:T1")
    rep.add_argument("--out", help="write the (last) summary CSV here")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ScenarioError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
