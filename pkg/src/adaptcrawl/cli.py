"""Command-line entry points: ``run``, ``trace`` and ``scale``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import KEYS, ConfigError, build_run_config, load_config_file
from .fetcher.bandwidth import TARGET_BW_KBPS, load_profile
from .report import RangeError, build_traces, scale_log, write_scale_report, write_traces
from .runner import execute_run
from .scheduler import CrawlLogError, StorageError, read_crawl_log

RUN_FLAGS = (
    "mode", "seeds", "profile", "topics", "out", "seed", "budget-sec", "iwms", "threads-min", "threads-max",
    "threads-init", "list-limit", "zero-freq-limit", "speed-threshold", "window-w", "zero-rel-tol",
    "relevance-threshold", "noise", "timeout",
)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptcrawl", description="Adaptive focused crawler.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulated or live crawl session")
    run.add_argument("--config", help="key=value config file; flags override it")
    for flag in RUN_FLAGS:
        run.add_argument(f"--{flag}", dest=flag.replace("-", "_"), default=None, metavar="VALUE")

    trace = sub.add_parser("trace", help="bucketed error/speed/robot traces from a crawl log")
    trace.add_argument("log")
    trace.add_argument("--out", default=None, help="output directory (default: next to the log)")
    trace.add_argument("--bucket-sec", type=float, default=100.0)
    trace.add_argument("--no-plots", action="store_true")

    scale = sub.add_parser("scale", help="scale logged speeds onto a target bandwidth")
    scale.add_argument("log")
    scale.add_argument("--profile", required=True, help="t_sec,kb_per_sec CSV")
    scale.add_argument("--target-bw-kbps", type=float, default=TARGET_BW_KBPS)
    scale.add_argument("--out", default=None)
    scale.add_argument("--no-plots", action="store_true")
    return p


def _flag_values(args: argparse.Namespace) -> dict:
    values = {}
    for flag in RUN_FLAGS:
        raw = getattr(args, flag.replace("-", "_"))
        if raw is None:
            continue
        attr, conv = KEYS[flag.replace("-", "_")]
        try:
            values[attr] = conv(raw)
        except ValueError:
            raise ConfigError(f"--{flag}: bad value {raw!r}") from None
    return values


def cmd_run(args) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    cfg = build_run_config(file_values, _flag_values(args))
    session, _ = execute_run(cfg)
    print(f"visited={session.total_visited} relevant={session.total_relevant} "
          f"mean_c_si={session.rho_cs} final_p_t={session.final_p_t} out={cfg.out}")
    return 0


def cmd_trace(args) -> int:
    entries = read_crawl_log(args.log)
    out = Path(args.out) if args.out else Path(args.log).parent
    traces = build_traces(entries, args.bucket_sec)
    written = write_traces(traces, out)
    if not args.no_plots and entries:
        from .plotting import plot_traces

        written.append(plot_traces(traces, out / "traces.png"))
    for path in written:
        print(path)
    return 0


def cmd_scale(args) -> int:
    entries = read_crawl_log(args.log)
    profile = load_profile(args.profile)
    report = scale_log(entries, profile, args.target_bw_kbps)
    out = Path(args.out) if args.out else Path(args.log).parent
    written = write_scale_report(report, out)
    if not args.no_plots:
        from .plotting import plot_scaling

        written.append(plot_scaling(report, out / "scaling.png"))
    s = report.summary()
    print(f"scaled speed @ {s['target_bw_kbps']:g} kB/s: min={s['min']:.1f} max={s['max']:.1f} "
          f"mean={s['mean']:.1f} pages/s over {s['count']} points")
    for path in written:
        print(path)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "trace": cmd_trace, "scale": cmd_scale}[args.command]
    try:
        return handler(args)
    except (ConfigError, CrawlLogError, RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StorageError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
