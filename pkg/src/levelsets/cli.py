"""Command-line surface: models, estimate, simulate, report."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import EstimatorSpec, SampleSession
from .models import PROXY_MODEL_IDS, get_model, load_models
from .report import heatmap_svg, means_csv
from .simulate import (ConfigError, SimulationConfig, default_config,
                       records_from_csv, records_to_csv, run_simulation)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levelsets",
                                     description="Density level set estimation toolkit")
    parser.add_argument("--version", action="version", version=f"levelsets {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_models = sub.add_parser("models", help="inspect the benchmark densities")
    msub = p_models.add_subparsers(dest="action", required=True)
    msub.add_parser("list", help="print model ids and kinds")
    p_pdf = msub.add_parser("pdf", help="emit CSV of (x, pdf) over a grid")
    p_pdf.add_argument("--model", type=int, required=True)
    p_pdf.add_argument("--grid", type=int, default=512, help="number of grid points")
    p_pdf.add_argument("--lo", type=float, default=None)
    p_pdf.add_argument("--hi", type=float, default=None)
    p_sample = msub.add_parser("sample", help="emit seeded draws, one per line")
    p_sample.add_argument("--model", type=int, required=True)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, required=True)

    p_est = sub.add_parser("estimate", help="estimate a level set from a sample file")
    p_est.add_argument("--input", required=True, help="file of reals (one per line or CSV)")
    p_est.add_argument("--method", required=True,
                       choices=["plugin", "ssn", "ms", "ch", "chr", "walther"])
    p_est.add_argument("--tau", type=float, required=True)
    p_est.add_argument("--bandwidth", default=None,
                       help="selector id (cv|sj|bc|sw) or a fixed positive number")
    p_est.add_argument("--threshold", default=None, choices=["hyndman", "integration"])
    p_est.add_argument("--M", type=int, default=None)
    p_est.add_argument("--r", type=float, default=None)
    p_est.add_argument("--j", type=int, default=None)

    p_sim = sub.add_parser("simulate", help="run the comparison harness")
    p_sim.add_argument("--config", default=None, help="JSON config (default: shipped final comparison)")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--desk", action="store_true", help="scale to n=400, B=200")
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=None)

    p_rep = sub.add_parser("report", help="rank tables and heatmaps from an errors CSV")
    p_rep.add_argument("--errors", required=True)
    p_rep.add_argument("--out", required=True)
    p_rep.add_argument("--alpha", type=float, default=0.05)
    return parser


def _cmd_models(args) -> int:
    if args.action == "list":
        for m in load_models():
            proxy = " (proxy)" if m.id in PROXY_MODEL_IDS else ""
            print(f"{m.id}\t{m.kind}\t{m.name}{proxy}")
        return 0
    try:
        model = get_model(args.model)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    if args.action == "pdf":
        if args.grid < 2:
            print("error: --grid must be >= 2", file=sys.stderr)
            return 2
        lo = args.lo if args.lo is not None else model.support_hint[0]
        hi = args.hi if args.hi is not None else model.support_hint[1]
        xs = np.linspace(lo, hi, args.grid)
        print("x,pdf")
        for x, y in zip(xs, model.pdf_vec(xs)):
            print(f"{float(x)!r},{float(y)!r}")
        return 0
    if args.action == "sample":
        if args.n < 1:
            print("error: --n must be >= 1", file=sys.stderr)
            return 2
        for x in model.sample(args.n, args.seed):
            print(repr(float(x)))
        return 0
    raise AssertionError(args.action)


def _read_sample(path: str) -> np.ndarray:
    text = Path(path).read_text()
    values = []
    for token in text.replace(",", "\n").split():
        values.append(float(token))
    arr = np.array(values, dtype=float)
    if len(arr) < 10 or not np.isfinite(arr).all():
        raise ValueError("input must contain at least 10 finite reals")
    return np.sort(arr)


def _cmd_estimate(args) -> int:
    try:
        sample = _read_sample(args.input)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bandwidth = args.bandwidth
    if bandwidth is not None:
        try:
            bandwidth = float(bandwidth)
        except ValueError:
            pass  # a selector id
    try:
        spec = EstimatorSpec(method=args.method, bandwidth=bandwidth,
                             threshold=args.threshold, M=args.M, r=args.r, j=args.j)
        session = SampleSession(sample)
        result, threshold = session.estimate_full(spec, args.tau)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    payload = {
        "method": spec.label,
        "tau": args.tau,
        "intervals": [[a, b] for a, b in result.intervals],
        "threshold": threshold,
    }
    print(json.dumps(payload))
    return 0


def _cmd_simulate(args) -> int:
    try:
        if args.config is None:
            config = default_config()
        else:
            with open(args.config) as fh:
                config = SimulationConfig.from_dict(json.load(fh))
        if args.desk:
            config = replace(config, n=400, replicates=200)
        if args.threads is not None:
            config = replace(config, threads=args.threads)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    result = run_simulation(config)
    elapsed = time.monotonic() - started
    (out_dir / "errors.csv").write_text(records_to_csv(result.records))
    manifest = {
        "version": __version__,
        "config": config.to_dict(),
        "sample_checksums": {str(k): v for k, v in result.model_checksums.items()},
        "wall_clock_seconds": elapsed,
        "warnings": {
            "boundary_bandwidth": result.event_counts.get("boundary-bandwidth", 0),
            "empty_filtered_sample": result.event_counts.get("empty-filtered-sample", 0),
            "degenerate_estimates": result.event_counts.get("degenerate-estimate", 0),
            "proxy_density_models": sorted(set(config.models) & set(PROXY_MODEL_IDS)),
        },
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    print(f"wrote {out_dir / 'errors.csv'} ({len(result.records)} records) "
          f"and {out_dir / 'manifest.json'}")
    return 0


def _cmd_report(args) -> int:
    try:
        records = records_from_csv(Path(args.errors).read_text())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not records:
        print("error: errors CSV has no records", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "means.csv").write_text(means_csv(records, args.alpha))
    written = [str(out_dir / "means.csv")]
    for tau in sorted({r.tau for r in records}):
        path = out_dir / f"heatmap-tau-{tau:g}.svg"
        path.write_text(heatmap_svg(records, tau, args.alpha))
        written.append(str(path))
    print("wrote " + ", ".join(written))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "models":
        return _cmd_models(args)
    if args.command == "estimate":
        return _cmd_estimate(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "report":
        return _cmd_report(args)
    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())
