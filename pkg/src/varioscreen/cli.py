"""Command-line entry point.

Subcommands:
  screen    parse landmark files, run the screen, write report + figures
  synth     generate a synthetic landmark CSV, optionally with anomalies
  review    serve the blinded review UI and verdict API for a report
  finalize  merge a verdict log into its report document
  bench     compare the compiled and numpy pairwise kernels

Exit codes for screen: 0 success (flags are findings, not failures;
--fail-on-flags turns them into exit 3), 2 when any input failed to parse
(remaining inputs are still processed), 1 on usage errors.
"""

from __future__ import annotations

import argparse
import datetime
import glob
import sys
from pathlib import Path

from varioscreen import __version__
from varioscreen.formats import (
    ParseError,
    ParsedCase,
    parse_csv,
    parse_fcsv_pair,
    parse_mni_tag,
    write_csv,
)
from varioscreen.model import ScreeningConfig, ValidationError
from varioscreen.plots import render_field_svg, render_variogram_svg
from varioscreen.report import CaseRecord, ReportDocument, write_report_json
from varioscreen.screening import screen_case
from varioscreen.synth import (
    IndexOutOfRange,
    NoLocalNeighborhood,
    SynthSpec,
    generate,
    inject_global,
    inject_local,
)
from varioscreen.variogram import binned_trend, compute_cloud, write_cloud_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    defaults = ScreeningConfig()
    p.add_argument("--tau-global", type=float, default=defaults.tau_global,
                   help="robust-z threshold for global outlier flags")
    p.add_argument("--tau-local", type=float, default=defaults.tau_local,
                   help="ratio threshold for local outlier flags")
    p.add_argument("--local-h-quantile", type=float,
                   default=defaults.local_h_quantile,
                   help="pair-separation quantile defining short range")
    p.add_argument("--local-min-pairs", type=int,
                   default=defaults.local_min_pairs,
                   help="short-range pairs needed for a local score")
    p.add_argument("--cluster-link-factor", type=float,
                   default=defaults.cluster_link_factor,
                   help="single-linkage threshold as multiple of median "
                        "nearest-neighbour distance")
    p.add_argument("--cluster-min-size", type=int,
                   default=defaults.cluster_min_size,
                   help="minimum landmarks per cluster group")
    p.add_argument("--isolated-factor", type=float,
                   default=defaults.isolated_factor,
                   help="nearest-neighbour multiple marking isolation")
    p.add_argument("--n-bins", type=int, default=defaults.n_bins,
                   help="bins of the cloud trend")


def _config_from_args(args) -> ScreeningConfig:
    return ScreeningConfig(
        tau_global=args.tau_global,
        tau_local=args.tau_local,
        local_h_quantile=args.local_h_quantile,
        local_min_pairs=args.local_min_pairs,
        cluster_link_factor=args.cluster_link_factor,
        cluster_min_size=args.cluster_min_size,
        isolated_factor=args.isolated_factor,
        n_bins=args.n_bins,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="varioscreen",
                     description="Variogram-cloud screening of annotated "
                                 "landmark correspondences")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="screen landmark files")
    p.add_argument("inputs", nargs="+",
                   help="landmark files or globs: .csv, .tag, or an fcsv "
                        "pair written as FIXED.fcsv:MOVING.fcsv")
    p.add_argument("-o", "--out", default="varioscreen-out",
                   help="output directory (default: %(default)s)")
    p.add_argument("--format", choices=["csv", "tag", "fcsv"],
                   help="force the input format instead of inferring from "
                        "the file extension")
    p.add_argument("--timestamp",
                   help="pin the report's generated_at (UTC ISO 8601) for "
                        "reproducible output")
    p.add_argument("--fail-on-flags", action="store_true",
                   help="exit 3 when any case carries flags or findings")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="write a synthetic landmark CSV")
    p.add_argument("-o", "--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--extent", type=float, default=80.0)
    p.add_argument("--deform-amp", type=float, default=5.0)
    p.add_argument("--deform-wavelength", type=float, default=60.0)
    p.add_argument("--noise-sigma", type=float, default=0.5)
    p.add_argument("--layout", choices=["uniform", "grid"], default="uniform")
    p.add_argument("--inject-global", type=int, metavar="IDX",
                   help="0-based landmark index to displace grossly")
    p.add_argument("--offset", default="10,0,0",
                   help="offset vector X,Y,Z mm for --inject-global")
    p.add_argument("--inject-local", type=int, metavar="IDX",
                   help="0-based landmark index whose displacement is "
                        "flipped against its neighbourhood")

    p = sub.add_parser("review", help="serve the review UI for a report")
    p.add_argument("report", help="path to report.json")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--mix", type=int, default=2,
                   help="unflagged landmarks mixed into the queue per case "
                        "(default: %(default)s)")
    p.add_argument("--queue-seed", type=int, default=0,
                   help="seed of the queue mixing and ordering")
    p.add_argument("--reviewer", default="anonymous",
                   help="reviewer id recorded with verdicts lacking one")

    p = sub.add_parser("finalize",
                       help="merge the verdict log into the report")
    p.add_argument("report", help="path to report.json")
    p.add_argument("-o", "--out",
                   help="write the finalized document here instead of "
                        "updating the report in place")
    p.add_argument("--timestamp",
                   help="pin the finalized document's generated_at")

    p = sub.add_parser("bench",
                       help="compare compiled and numpy pairwise kernels")
    p.add_argument("--sizes", default="50,200,1000,2000",
                   help="comma-separated landmark counts")
    p.add_argument("--repeats", type=int, default=5)
    return parser


def _resolve_inputs(patterns: list[str]) -> list[str]:
    resolved: list[str] = []
    for pattern in patterns:
        if ":" in pattern and pattern.count(":") == 1:
            resolved.append(pattern)  # fcsv pair, both paths explicit
            continue
        hits = sorted(glob.glob(pattern))
        resolved.extend(hits if hits else [pattern])
    return resolved


def _parse_one(spec: str, fmt: str | None) -> ParsedCase:
    if ":" in spec and spec.count(":") == 1:
        fixed_path, moving_path = (Path(s) for s in spec.split(":"))
        case_id = fixed_path.stem
        return parse_fcsv_pair(fixed_path.read_bytes(),
                               moving_path.read_bytes(), case_id=case_id)
    path = Path(spec)
    case_id = path.stem
    data = path.read_bytes()
    kind = fmt or {"csv": "csv", "tag": "tag", "fcsv": "fcsv"}.get(
        path.suffix.lstrip(".").lower(), "csv")
    if kind == "tag":
        return parse_mni_tag(data, case_id=case_id)
    if kind == "fcsv":
        raise ParseError(
            f"{spec}: fcsv inputs must be given as FIXED.fcsv:MOVING.fcsv"
        )
    return parse_csv(data, case_id=case_id)


def cmd_screen(args) -> int:
    try:
        config = _config_from_args(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}",
              file=sys.stderr)
        return 1
    inputs = _resolve_inputs(args.inputs)
    if not inputs:
        print("error: no inputs resolved", file=sys.stderr)
        return 1

    cases = []
    had_errors = False
    for spec in inputs:
        try:
            parsed = _parse_one(spec, args.format)
            field = parsed.field()
        except (ParseError, ValidationError, OSError) as exc:
            print(f"{spec}: {exc}", file=sys.stderr)
            had_errors = True
            continue
        report = screen_case(field, config)
        if parsed.warnings:
            report = _with_warnings(report, parsed.warnings)
        cases.append((field, report))

    doc = ReportDocument(
        generated_at=args.timestamp or _utc_now(),
        cases=tuple(
            CaseRecord(result=r, landmarks=f.landmarks) for f, r in cases
        ),
    )
    (out_dir / "report.json").write_bytes(write_report_json(doc))

    n_flagged = 0
    for field, report in cases:
        case_dir = out_dir / field.case_id
        case_dir.mkdir(exist_ok=True)
        cloud = compute_cloud(field)
        trend = binned_trend(cloud, config.n_bins)
        (case_dir / "cloud.csv").write_bytes(write_cloud_csv(cloud))
        (case_dir / "variogram.svg").write_text(
            render_variogram_svg(cloud, report.outliers, trend),
            encoding="utf-8")
        (case_dir / "field_xy.svg").write_text(
            render_field_svg(field, report.outliers, "xy"),
            encoding="utf-8")
        n = len(report.outliers) + len(report.findings)
        n_flagged += n
        print(f"{field.case_id}: K={report.stats.k}, "
              f"{len(report.outliers)} outlier flag(s), "
              f"{len(report.findings)} distribution finding(s)")

    print(f"wrote {out_dir / 'report.json'} ({len(cases)} case(s))")
    if had_errors:
        return 2
    if args.fail_on_flags and n_flagged:
        return 3
    return 0


def _with_warnings(report, warnings):
    from dataclasses import replace
    return replace(report, warnings=report.warnings + tuple(warnings))


def cmd_synth(args) -> int:
    spec = SynthSpec(
        seed=args.seed,
        k=args.k,
        extent=args.extent,
        deform_amp=args.deform_amp,
        deform_wavelength=args.deform_wavelength,
        noise_sigma=args.noise_sigma,
        layout=args.layout,
    )
    field = generate(spec)
    try:
        if args.inject_global is not None:
            offset = tuple(float(v) for v in args.offset.split(","))
            field = inject_global(field, args.inject_global, offset)
        if args.inject_local is not None:
            field = inject_local(field, args.inject_local)
    except (IndexOutOfRange, NoLocalNeighborhood, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    Path(args.out).write_bytes(write_csv(field))
    print(f"wrote {args.out} ({field.k} landmarks)")
    return 0


def cmd_review(args) -> int:
    from varioscreen.server import ReviewServer, PortInUse, MalformedReport

    try:
        server = ReviewServer(
            report_path=Path(args.report),
            port=args.port,
            mix=args.mix,
            queue_seed=args.queue_seed,
            default_reviewer=args.reviewer,
        )
    except (PortInUse, MalformedReport, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"review server on http://127.0.0.1:{server.port}/ "
          f"({len(server.queue)} queue item(s)); Ctrl-C to stop")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown_and_merge()
        print(f"verdicts merged into {args.report}")
    return 0


def cmd_finalize(args) -> int:
    from varioscreen.server import merge_verdict_log, MalformedReport

    report_path = Path(args.report)
    try:
        merged = merge_verdict_log(report_path, timestamp=args.timestamp)
    except (MalformedReport, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_path = Path(args.out) if args.out else report_path
    out_path.write_bytes(write_report_json(merged))
    n = len(merged.review or ())
    print(f"wrote {out_path} with {n} verdict(s)")
    return 0


def cmd_bench(args) -> int:
    from varioscreen.bench import run_bench

    sizes = [int(s) for s in args.sizes.split(",")]
    run_bench(sizes, args.repeats)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "screen": cmd_screen,
        "synth": cmd_synth,
        "review": cmd_review,
        "finalize": cmd_finalize,
        "bench": cmd_bench,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
