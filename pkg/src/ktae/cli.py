"""Command-line surface: compute, visualize, bench, oracle-check.

Exit codes: 0 success, 1 data error, 2 configuration error. Everything is
flag-driven; no environment variables are consulted.
"""

from __future__ import annotations

import argparse
import functools
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

from .advantage import compute_advantages
from .core import ConfigError, KtaeConfig, KtaeError, validate_group
from .heatmap import UnknownGroup, render_group_html
from .oracle import MAX_EXACT_N, compare_fast_vs_exact
from .records import (
    advantage_record_line,
    config_from_mapping,
    load_config,
    load_synth_spec,
    parse_advantage_record,
    parse_group_record,
)
from .synth import SpecError, SynthSpec, generate, recovery_report

ORACLE_TOLERANCE = 1e-9

_CONFIG_FLAGS = ("h1", "h2", "h3", "k1", "b", "std_epsilon", "tf_floor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktae",
        description="Token-level advantage estimation over reward-labeled rollout groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="compute advantage records for a batch of groups")
    p_compute.add_argument("--input", required=True, help="line-delimited group records")
    p_compute.add_argument("--output", required=True, help="where to write advantage records")
    p_compute.add_argument("--config", help="flat JSON config file")
    p_compute.add_argument("--stats", action="store_true", help="embed per-token diagnostics")
    p_compute.add_argument("--parallel", type=int, default=1, metavar="N", help="worker processes")
    p_compute.add_argument("--skip-bad", action="store_true", help="skip malformed records instead of stopping")
    _add_config_flags(p_compute)
    p_compute.set_defaults(func=cmd_compute)

    p_vis = sub.add_parser("visualize", help="render one group's token heatmap to HTML")
    p_vis.add_argument("--input", required=True, help="line-delimited group records")
    p_vis.add_argument("--advantages", required=True, help="line-delimited advantage records")
    p_vis.add_argument("--group", required=True, help="group id to render")
    p_vis.add_argument("--output", required=True, help="output HTML path")
    p_vis.set_defaults(func=cmd_visualize)

    p_bench = sub.add_parser("bench", help="run the planted-token recovery benchmark")
    p_bench.add_argument("--spec", help="flat JSON benchmark spec (defaults to the standard benchmark)")
    p_bench.add_argument("--config", help="flat JSON config file")
    p_bench.add_argument("--report", help="write the machine-readable report here")
    _add_config_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_oracle = sub.add_parser("oracle-check", help="compare the fast Fisher path against the exact oracle")
    p_oracle.add_argument("--max-n", type=int, default=16, help=f"largest table total to check (<= {MAX_EXACT_N})")
    p_oracle.set_defaults(func=cmd_oracle_check)

    return parser


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("config overrides (flags beat file values beat defaults)")
    for name in _CONFIG_FLAGS:
        group.add_argument(f"--{name.replace('_', '-')}", type=float, default=None, dest=f"cfg_{name}")
    group.add_argument("--fisher-mode", choices=("point", "two_sided"), default=None, dest="cfg_fisher_mode")
    group.add_argument("--degenerate-policy", choices=("zeros", "error"), default=None, dest="cfg_degenerate_policy")


def resolve_config(args: argparse.Namespace) -> KtaeConfig:
    mapping = load_config(args.config).to_dict() if args.config else KtaeConfig().to_dict()
    for field in fields(KtaeConfig):
        override = getattr(args, f"cfg_{field.name}", None)
        if override is not None:
            mapping[field.name] = override
    return config_from_mapping(mapping)


def _process_line(item: tuple[int, str], config: KtaeConfig, include_stats: bool):
    """Worker: one input line to one output line (or a diagnostic)."""
    lineno, line = item
    try:
        group = validate_group(parse_group_record(line))
        matrix = compute_advantages(group, config)
        return lineno, advantage_record_line(group.group_id, matrix, include_stats), None
    except KtaeError as exc:
        return lineno, None, f"line {lineno}: {type(exc).__name__}: {exc}"


def _numbered_lines(handle):
    for lineno, raw in enumerate(handle, start=1):
        line = raw.strip()
        if line:
            yield lineno, line


def cmd_compute(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.parallel < 1:
        raise ConfigError(f"--parallel must be >= 1, got {args.parallel}")
    worker = functools.partial(_process_line, config=config, include_stats=args.stats)
    failed = False
    with open(args.input, "r", encoding="utf-8") as src, open(args.output, "w", encoding="utf-8") as dst:
        items = _numbered_lines(src)
        if args.parallel == 1:
            results = map(worker, items)
            failed = _drain(results, dst, args.skip_bad)
        else:
            # Batched submission keeps memory bounded on huge inputs while
            # preserving input order (executor.map is order-stable).
            with ProcessPoolExecutor(max_workers=args.parallel) as pool:
                while True:
                    batch = list(itertools.islice(items, args.parallel * 64))
                    if not batch:
                        break
                    if _drain(pool.map(worker, batch), dst, args.skip_bad):
                        failed = True
                        break
    return 1 if failed else 0


def _drain(results, dst, skip_bad: bool) -> bool:
    """Write results in order; returns True when a bad record stops the run."""
    for _, line, diagnostic in results:
        if diagnostic is not None:
            print(diagnostic, file=sys.stderr)
            if not skip_bad:
                return True
            continue
        dst.write(line + "\n")
    return False


def _find_record(path: str, wanted_id: str, parse, describe: str):
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in _numbered_lines(handle):
            try:
                record = parse(line)
            except KtaeError as exc:
                raise type(exc)(f"{path} line {lineno}: {exc}") from None
            if record.group_id == wanted_id:
                return record
    raise UnknownGroup(f"group {wanted_id!r} not found in {describe} {path}")


def cmd_visualize(args: argparse.Namespace) -> int:
    group = _find_record(args.input, args.group, parse_group_record, "group records")
    record = _find_record(args.advantages, args.group, parse_advantage_record, "advantage records")
    document = render_group_html(validate_group(group), record)
    Path(args.output).write_text(document, encoding="utf-8")
    print(f"wrote {args.output}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    spec = load_synth_spec(args.spec) if args.spec else SynthSpec()
    config = resolve_config(args)
    groups = generate(spec)
    report = recovery_report(groups, spec, config)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"groups                 {report['num_groups']}")
    print(f"sign accuracy          {report['sign_accuracy']:.4f} "
          f"(positive {report['sign_accuracy_positive']:.4f}, negative {report['sign_accuracy_negative']:.4f})")
    print(f"neutral |delta| max    {report['neutral_max_abs_delta']:.3g}")
    print(f"plant mean |ktv|       {report['plant_mean_abs_ktv']:.6g}")
    print(f"filler |ktv| p95       {report['filler_abs_ktv_p95']:.6g}")
    print(f"plant rank mean/worst  {report['plant_rank_mean']:.2f} / {report['plant_rank_worst']}")
    print(f"seconds per group      {report['seconds_per_group']*1e3:.2f} ms")
    return 0


def cmd_oracle_check(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    worst, table = compare_fast_vs_exact(args.max_n)
    elapsed = time.perf_counter() - started
    where = f" at table {tuple(table)}" if table is not None else ""
    print(f"checked all tables with N <= {args.max_n} in {elapsed:.2f}s; "
          f"worst relative error {worst:.3e}{where}")
    if worst > ORACLE_TOLERANCE:
        print(f"FAIL: worst relative error exceeds {ORACLE_TOLERANCE:.0e}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KtaeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
