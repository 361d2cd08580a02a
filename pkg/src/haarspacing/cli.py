"""Command-line front end.

Usage: ``haarspacing <command> [options]``; ``haarspacing <command> -h``
lists the options of one command. Exit status is 0 on success, 2 on usage
errors and 1 on runtime failures. Error messages go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import experiments as ex
from .haar import sample_haar_unitary, sample_naive_unitary
from .rng import MASK64, SEED_ENV_VAR, RandomStream
from .spacings import eigenangles, normalized_spacings

TABLE_COMMANDS = ("table1", "table2", "wrap-constant", "lazy-scan")
SINGLE_COMMANDS = ("sample", "spacings", "point-bias", "naive-qr", "histogram")
COMMANDS = TABLE_COMMANDS + SINGLE_COMMANDS
CSV_HEADER = ["experiment", "dim", "row", "mean", "std_error", "count", "seed"]

_DEFAULT_DIMS = {
    "table1": ex.DEFAULT_DIMS,
    "table2": ex.DEFAULT_DIMS,
    "wrap-constant": ex.DEFAULT_DIMS,
    "lazy-scan": (8, 16, 32, 64),
}
_DEFAULT_BINS = {"naive-qr": 56, "histogram": 40}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    dims: list[int]
    samples: int = ex.DEFAULT_SAMPLES
    seed: int = 0
    workers: int = 1
    format: str = "csv"
    out: str | None = None
    indices: list = field(default_factory=lambda: list(ex.DEFAULT_INDICES))
    bins: int | None = None
    sampler: str = "haar"


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _index_list(text: str) -> list:
    out = []
    for t in (t.strip() for t in text.split(",")):
        if not t:
            continue
        if t == "rand":
            out.append("rand")
        else:
            try:
                out.append(int(t))
            except ValueError:
                raise argparse.ArgumentTypeError(f"index must be an integer or 'rand', got {t!r}")
    return out


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV_VAR}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haarspacing",
        description="Haar unitary sampling and eigenangle spacing bias experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "sample": "print sampled unitary matrices",
        "spacings": "print eigenangles and normalized spacings of sampled matrices",
        "table1": "mean of fixed-index spacings delta_j",
        "table2": "lazy mean and wrap-around mean",
        "wrap-constant": "two estimates of the size-biased gap constant",
        "lazy-scan": "lazy mean versus M and the fitted constant c in 1 - c/M",
        "point-bias": "uniform-index versus uniform-point gap selection",
        "naive-qr": "eigenangle histograms of corrected and uncorrected QR samplers",
        "histogram": "pooled histogram of normalized spacings",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        if name in TABLE_COMMANDS:
            p.add_argument("--dims", type=_int_list, default=None,
                           help="comma-separated matrix sizes (default %s)"
                           % ",".join(map(str, _DEFAULT_DIMS[name])))
        else:
            p.add_argument("--dim", type=int, required=True, help="matrix size")
        if name == "table1":
            p.add_argument("--indices", type=_index_list, default=None,
                           help="1-based spacing indices or 'rand' (default 1,3,7,11,rand)")
        if name in _DEFAULT_BINS:
            p.add_argument("--bins", type=int, default=_DEFAULT_BINS[name],
                           help="number of histogram bins (default %(default)s)")
        if name in ("sample", "spacings"):
            p.add_argument("--sampler", choices=("haar", "naive"), default="haar")
        default_samples = 1 if name in ("sample", "spacings") else ex.DEFAULT_SAMPLES
        p.add_argument("--samples", type=int, default=default_samples,
                       help="number of matrices (default %(default)s)")
        p.add_argument("--seed", type=_seed, default=None,
                       help=f"64-bit seed (default ${SEED_ENV_VAR} or 0)")
        p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default stdout)")
    return parser


def parse_args(argv=None) -> RunConfig:
    """Parse and validate ``argv``; exits with status 2 on usage errors."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return _to_config(ns)
    except UsageError as exc:
        parser.error(str(exc))


def _to_config(ns: argparse.Namespace) -> RunConfig:
    if ns.command in TABLE_COMMANDS:
        dims = ns.dims if ns.dims is not None else list(_DEFAULT_DIMS[ns.command])
        if not dims:
            raise UsageError("dims must be nonempty")
    else:
        dims = [ns.dim]
    minimum = 1 if ns.command in ("sample", "spacings", "table1", "histogram") else 2
    for d in dims:
        if d < minimum:
            raise UsageError(f"dim must be ≥ {minimum}")
    if ns.samples < 1:
        raise UsageError("samples must be ≥ 1")
    if ns.workers < 1:
        raise UsageError("workers must be ≥ 1")
    cfg = RunConfig(
        command=ns.command,
        dims=dims,
        samples=ns.samples,
        seed=ns.seed if ns.seed is not None else default_seed(),
        workers=ns.workers,
        format=ns.format,
        out=ns.out,
    )
    if ns.command == "table1":
        if ns.indices is not None:
            cfg.indices = ns.indices
        if not cfg.indices:
            raise UsageError("indices must be nonempty")
        for j in cfg.indices:
            if j != "rand" and not 1 <= j <= min(dims):
                raise UsageError(f"index {j} must lie in 1..{min(dims)} (smallest dim)")
    if ns.command in _DEFAULT_BINS:
        if ns.bins < 1:
            raise UsageError("bins must be ≥ 1")
        cfg.bins = ns.bins
    if ns.command in ("sample", "spacings"):
        cfg.sampler = ns.sampler
    return cfg


# -- serialization -----------------------------------------------------------


def _g6(x: float) -> str:
    return format(x, ".6g")


def report_to_dict(report: ex.ExperimentReport) -> dict:
    d = asdict(report)
    for cell in d["cells"]:
        for key in ("mean", "std_error"):
            if isinstance(cell[key], float) and not math.isfinite(cell[key]):
                cell[key] = None
    return d


def format_report(report: ex.ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for c in report.cells:
        writer.writerow([
            report.experiment_name, c.col_label, c.row_label,
            _g6(c.mean), _g6(c.std_error), c.count, report.seed,
        ])
    return buf.getvalue()


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit_report(report: ex.ExperimentReport, fmt: str = "csv", out: str | None = None) -> None:
    """Write ``report`` as CSV or JSON to ``out`` (a path) or stdout."""
    _write(format_report(report, fmt), out)


def _sampler(name: str):
    return sample_haar_unitary if name == "haar" else sample_naive_unitary


def _format_samples(cfg: RunConfig) -> str:
    dim = cfg.dims[0]
    draw = _sampler(cfg.sampler)
    mats = [draw(dim, RandomStream.for_matrix(cfg.seed, dim, i)) for i in range(cfg.samples)]
    if cfg.format == "json":
        payload = {
            "sampler": cfg.sampler, "dim": dim, "seed": cfg.seed,
            "matrices": [[[[z.real, z.imag] for z in row] for row in m] for m in mats],
        }
        return json.dumps(payload) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["matrix", "row", "col", "re", "im"])
    for k, m in enumerate(mats):
        for (i, j), z in np.ndenumerate(m):
            writer.writerow([k, i, j, repr(z.real), repr(z.imag)])
    return buf.getvalue()


def _format_spacings(cfg: RunConfig) -> str:
    dim = cfg.dims[0]
    draw = _sampler(cfg.sampler)
    rows = []
    for k in range(cfg.samples):
        angles = eigenangles(draw(dim, RandomStream.for_matrix(cfg.seed, dim, k)))
        rows.append((angles, normalized_spacings(angles)))
    if cfg.format == "json":
        payload = {
            "sampler": cfg.sampler, "dim": dim, "seed": cfg.seed,
            "spectra": [{"angles": a.tolist(), "deltas": s.tolist()} for a, s in rows],
        }
        return json.dumps(payload) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["matrix", "index", "angle", "delta"])
    for k, (angles, deltas) in enumerate(rows):
        for j, (a, s) in enumerate(zip(angles, deltas), start=1):
            writer.writerow([k, j, repr(float(a)), repr(float(s))])
    return buf.getvalue()


def make_report(cfg: RunConfig) -> ex.ExperimentReport:
    kw = dict(n=cfg.samples, seed=cfg.seed, workers=cfg.workers)
    c = cfg.command
    if c == "table1":
        return ex.run_table1(cfg.dims, cfg.indices, **kw)
    if c == "table2":
        return ex.run_table2(cfg.dims, **kw)
    if c == "wrap-constant":
        return ex.run_wrap_constant(cfg.dims, **kw)
    if c == "lazy-scan":
        return ex.run_lazy_scan(cfg.dims, **kw)
    if c == "point-bias":
        return ex.run_point_bias_demo(cfg.dims[0], **kw)
    if c == "naive-qr":
        return ex.run_naive_qr_demo(cfg.dims[0], bins=cfg.bins, **kw)
    if c == "histogram":
        return ex.run_spacing_histogram(cfg.dims[0], bins=cfg.bins, **kw)
    raise ValueError(f"not a report command: {c}")


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; returns the process exit status."""
    try:
        if cfg.command == "sample":
            text = _format_samples(cfg)
        elif cfg.command == "spacings":
            text = _format_spacings(cfg)
        else:
            text = format_report(make_report(cfg), cfg.format)
        _write(text, cfg.out)
    except (OSError, ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"haarspacing: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
