"""Command-line front end.

Exit codes: 0 success, 1 a statistical or identity check failed, 2 bad input
or a numerical routine that did not converge.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (
    FreqOfFreqTable,
    NormalizationConfig,
    analyze_tables,
    anchor_flags,
    freq_of_freq,
    load_fixture,
    normalize,
    read_table,
    split_chapters,
    write_summaries,
    DEFAULT_CHAPTER_PATTERN,
)
from .distributions import (
    DEFAULT_SEED,
    GeometricShifted,
    ZipfDist,
    ZtpDist,
    make_stream,
    zipf_fit_mle,
    zipf_pss_sample,
)
from .errors import DomainError, NonConvergence, ZipfMixError
from .gof import weighted_points
from .inference import WEIGHTINGS, lambda_sequence_from_table
from .mixtures import (
    IdentityReport,
    MixingLambda,
    MixingS,
    check_not_ztmp,
    sample_via_geometric,
    sample_via_ztp,
    verify_pgf_mixtures,
    verify_theorem1,
    verify_theorem2,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

DEFAULT_VERIFY_ALPHAS = (1.5, 2.0, 3.5, 5.0)
FIGURE_ALPHAS = {
    "pmf": (1.5, 2.0, 3.5, 5.0),
    "mixing-s": (1.5, 2.0, 3.5, 5.0),
    "mixing-lambda": (1.1, 1.5, 2.0, 3.5, 5.0),
}
NOT_ZTMP_Z = tuple(-(10.0**k) for k in range(1, 7))


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


def _emit(rows, fields, fmt, out, header=None):
    """Write ``rows`` (list of dicts) as CSV or JSON with identical values."""
    if fmt == "json":
        payload = dict(header or {})
        payload["rows"] = rows
        json.dump(payload, out, indent=2, allow_nan=True)
        out.write("\n")
        return
    if header:
        out.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def _read_table_or_fail(path) -> FreqOfFreqTable:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{path}: no such file")
    try:
        return read_table(p)
    except ZipfMixError as exc:
        raise CliError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    table = _read_table_or_fail(args.table)
    try:
        fit = zipf_fit_mle(table)
    except ZipfMixError as exc:
        raise CliError(f"{args.table}: {exc}") from exc
    row = fit.as_dict()
    with _out(args) as out:
        _emit([row], list(row), args.format, out, header={"command": "fit", "seed": args.seed, "input": args.table})
    return EXIT_OK


class _out:
    def __init__(self, args):
        self.path = getattr(args, "output", None)

    def __enter__(self):
        self.fh = _open_out(self.path)
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not sys.stdout:
            self.fh.close()
        return False


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

_DIGITS = re.compile(r"(\d+)")


def _collect_tables(paths) -> dict[int, FreqOfFreqTable]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(p.glob("*.csv"))
        elif p.is_file():
            files.append(p)
        else:
            raise CliError(f"{p}: no such file or directory")
    if not files:
        raise CliError("no frequency tables found")
    tables = {}
    for k, f in enumerate(files, start=1):
        m = _DIGITS.findall(f.stem)
        index = int(m[-1]) if m else k
        if index in tables:
            index = max(tables) + 1
        try:
            tables[index] = _read_table_or_fail(f)
        except CliError as exc:
            # one bad file does not stop the others
            print(f"error: {exc}", file=sys.stderr)
    return tables


def _tables_from_text(path, pattern) -> dict[int, FreqOfFreqTable]:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{path}: no such file")
    text = p.read_text(encoding="utf-8")
    try:
        chapters = split_chapters(text, pattern)
    except ZipfMixError as exc:
        raise CliError(str(exc)) from exc
    cfg = NormalizationConfig()
    tables = {}
    for ch in chapters:
        ch.tokens = normalize(ch.text, cfg)
        if ch.tokens:
            tables[ch.index] = freq_of_freq(ch.tokens)
    return tables


def cmd_analyze(args) -> int:
    if args.input:
        tables = _tables_from_text(args.input, args.chapter_pattern)
        if args.tables:
            tables.update(_collect_tables(args.tables))
    elif args.tables:
        tables = _collect_tables(args.tables)
    else:
        raise CliError("give frequency tables (files or directories) or --input TEXT")
    summaries, errors = analyze_tables(tables, args.weighting, args.jobs)
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    if args.input:
        for note in anchor_flags(summaries):
            print(f"note: {note}", file=sys.stderr)
    if not summaries:
        return EXIT_INPUT
    with _out(args) as out:
        if args.format == "csv":
            out.write(f"# command=analyze seed={args.seed} weighting={args.weighting}\n")
        write_summaries(summaries, out, args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _not_ztmp_report(alpha: float) -> IdentityReport:
    h = check_not_ztmp(alpha, NOT_ZTMP_Z)
    decreasing = all(b < a for a, b in zip(h, h[1:]))
    negative = all(v < 0 for v in h)
    detail = "h=" + ";".join(f"{v:.6g}" for v in h)
    return IdentityReport(
        name="not-ztmp",
        alpha=alpha,
        max_abs_error=math.nan,
        max_rel_error=math.nan,
        grid_description="z=-1e1..-1e6",
        tol=math.nan,
        passed=decreasing and negative,
        converged=True,
        detail=detail,
    )


def cmd_verify(args) -> int:
    alphas = args.alpha or list(DEFAULT_VERIFY_ALPHAS)
    reports: list[IdentityReport] = []
    for a in alphas:
        if not a > 1:
            raise CliError(f"alpha must exceed 1 (got {a})")
        tol = args.tol
        try:
            reports.append(verify_theorem1(a, args.x_max_geometric, tol if tol is not None else 1e-8))
            reports.append(verify_theorem2(a, args.x_max_ztp, tol))
            reports.append(verify_pgf_mixtures(a, tol=tol if tol is not None else 1e-7))
            reports.append(_not_ztmp_report(a))
        except NonConvergence as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    rows = [r.as_dict() for r in reports]
    fields = list(rows[0])
    with _out(args) as out:
        _emit(rows, fields, args.format, out, header={"command": "verify", "seed": args.seed})
    if not all(r.converged for r in reports):
        return EXIT_INPUT
    if not all(r.passed for r in reports):
        return EXIT_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

DISTRIBUTIONS = (
    "zipf",
    "geometric",
    "ztp",
    "zipf-pss",
    "mixing-s",
    "mixing-lambda",
    "mixture-geometric",
    "mixture-ztp",
)


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise CliError(f"--{name.replace('_', '-')} is required for {args.distribution}")
    return value


def draw(args) -> np.ndarray:
    rng = make_stream(args.seed)
    n = args.n
    if n < 1:
        raise CliError("--n must be >= 1")
    dist = args.distribution
    try:
        if dist == "zipf":
            return ZipfDist(_need(args, "alpha")).sample(rng, n)
        if dist == "geometric":
            return GeometricShifted(_need(args, "s")).sample(rng, n)
        if dist == "ztp":
            return ZtpDist(_need(args, "lam")).sample(rng, n)
        if dist == "zipf-pss":
            return zipf_pss_sample(_need(args, "alpha"), _need(args, "lam"), rng, n)
        if dist == "mixing-s":
            return MixingS(_need(args, "alpha")).sample(rng, n)
        if dist == "mixing-lambda":
            return MixingLambda(_need(args, "alpha")).sample(rng, n)
        if dist == "mixture-geometric":
            return sample_via_geometric(_need(args, "alpha"), rng, n)
        if dist == "mixture-ztp":
            return sample_via_ztp(_need(args, "alpha"), rng, n)
    except DomainError as exc:
        raise CliError(str(exc)) from exc
    raise CliError(f"unknown distribution {dist!r}")


def cmd_sample(args) -> int:
    values = draw(args)
    print(f"# seed={args.seed}", file=sys.stderr)
    with _out(args) as out:
        if values.dtype.kind == "f":
            out.writelines(f"{v!r}\n" for v in values.tolist())
        else:
            out.writelines(f"{v}\n" for v in values.tolist())
    return EXIT_OK


# ---------------------------------------------------------------------------
# plotdata
# ---------------------------------------------------------------------------

FIGURES = ("pmf", "mixing-s", "mixing-lambda", "cdf-overlay")


def figure_rows(args) -> tuple[list[dict], list[str]]:
    fig = args.figure
    alphas = args.alpha or FIGURE_ALPHAS.get(fig, ())
    if fig == "pmf":
        x = np.arange(1, args.x_max + 1)
        rows = []
        for a in alphas:
            y = ZipfDist(a).pmf(x)
            rows += [{"alpha": a, "x": int(xi), "y": float(yi)} for xi, yi in zip(x, y)]
        return rows, ["alpha", "x", "y"]
    if fig == "mixing-s":
        rows = []
        s_grid = np.linspace(0.0, 10.0, args.points + 1)[1:]
        p_grid = np.linspace(0.0, 1.0, args.points + 1)[1:-1]
        for a in alphas:
            m = MixingS(a)
            rows += [{"alpha": a, "axis": "s", "x": float(s), "y": m.pdf(float(s))} for s in s_grid]
            rows += [{"alpha": a, "axis": "p", "x": float(p), "y": m.pdf_p(float(p))} for p in p_grid]
        return rows, ["alpha", "axis", "x", "y"]
    if fig == "mixing-lambda":
        rows = []
        grid = np.linspace(0.0, args.lambda_max, args.points + 1)[1:]
        for a in alphas:
            m = MixingLambda(a)
            rows += [{"alpha": a, "x": float(v), "y": m.pdf(float(v))} for v in grid]
        return rows, ["alpha", "x", "y"]
    if fig == "cdf-overlay":
        table = _read_table_or_fail(args.input) if args.input else load_fixture(args.fixture)
        fit = zipf_fit_mle(table)
        seq = lambda_sequence_from_table(table, args.weighting)
        pts, wts = weighted_points(seq)
        ecdf = np.cumsum(wts) / wts.sum()
        mix = MixingLambda(fit.alpha_hat)
        top = max(float(pts[-1]), 1.0) * 1e3
        extra = np.geomspace(1e-3, top, args.points)
        xs = np.unique(np.r_[pts, extra])
        rows = []
        for x in xs:
            k = np.searchsorted(pts, x, side="right")
            emp = float(ecdf[k - 1]) if k else 0.0
            rows.append({"x": float(x), "empirical": emp, "theoretical": mix.cdf(float(x))})
        return rows, ["x", "empirical", "theoretical"]
    raise CliError(f"unknown figure {fig!r}; choose from {', '.join(FIGURES)}")


def cmd_plotdata(args) -> int:
    rows, fields = figure_rows(args)
    with _out(args) as out:
        _emit(rows, fields, args.format, out, header={"command": "plotdata", "seed": args.seed, "figure": args.figure})
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zipfmix", description="Zipf law as a mixture: fits, samplers, checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        if fmt:
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", "-o", help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    sp = sub.add_parser("fit", help="Zipf MLE of a frequency-of-frequencies table")
    sp.add_argument("table", help='CSV with header "value,freq"')
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("analyze", help="per-chapter fit and KS test")
    sp.add_argument("tables", nargs="*", help="table files or directories of *.csv")
    sp.add_argument("--input", help="plain-text corpus to split into chapters")
    sp.add_argument("--chapter-pattern", default=DEFAULT_CHAPTER_PATTERN)
    sp.add_argument("--weighting", choices=WEIGHTINGS, default="per-word")
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("verify", help="numerical checks of the mixture identities")
    sp.add_argument("--alpha", type=float, action="append", help="repeatable; default 1.5 2 3.5 5")
    sp.add_argument("--tol", type=float, help="relative tolerance override for every check")
    sp.add_argument("--x-max-geometric", type=int, default=200)
    sp.add_argument("--x-max-ztp", type=int, default=50)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sample", help="draw from a distribution or mixture path")
    sp.add_argument("distribution", choices=DISTRIBUTIONS)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--s", type=float)
    sp.add_argument("--n", type=int, default=10)
    common(sp, fmt=False)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("plotdata", help="curve data for the figures")
    sp.add_argument("figure", help=", ".join(FIGURES))
    sp.add_argument("--alpha", type=float, action="append")
    sp.add_argument("--x-max", type=int, default=100)
    sp.add_argument("--points", type=int, default=200)
    sp.add_argument("--lambda-max", type=float, default=5.0)
    sp.add_argument("--input", help="table for cdf-overlay")
    sp.add_argument("--fixture", type=int, choices=(1, 135), default=1)
    sp.add_argument("--weighting", choices=WEIGHTINGS, default="per-word")
    common(sp)
    sp.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ZipfMixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
