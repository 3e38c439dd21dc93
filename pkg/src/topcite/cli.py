"""Command line front end.

Exit codes: 0 success, 1 I/O failure, 2 invalid input or arguments.
``--input fixture:NAME`` reads one of the bundled tables instead of a file.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from typing import Optional

from . import __version__, aggregation, dataio, simulation, stats
from .errors import InsufficientPopulationError, ValidationError
from .indicators import PercentileLevel, as_level, percentile_curve
from .report import ReportDocument, Table, format_sig, human_table, render
from .rng import ALGORITHM

KS_NOTE = ("reference lognormal fitted to the tested sample; classical Kolmogorov "
           "p-value, conservative under estimated parameters")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _level(text: str) -> PercentileLevel:
    try:
        return PercentileLevel(float(text))
    except (ValueError, ValidationError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2**64), got {text}")
    return value


def _load_units(spec: str) -> dataio.UnitsTable:
    if spec.startswith("fixture:"):
        return dataio.bundled_fixture(spec[len("fixture:"):])
    return dataio.read_units_csv(spec)


def _emit(doc: ReportDocument, out: Optional[str], fmt: str, human: list[str]):
    text = render(doc, fmt)
    if out is None:
        sys.stdout.write(text)
        for line in human:
            print(line, file=sys.stderr)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    for line in human:
        print(line)


def _plot(kind, *args, **kwargs):
    from . import plotting

    path = getattr(plotting, kind)(*args, **kwargs)
    print(f"figure written to {path}", file=sys.stderr)


def cmd_assess(args) -> ReportDocument:
    table = _load_units(args.input)
    level = args.level
    groups = aggregation.assess_groups(table.rows, args.group_by, level)
    doc = ReportDocument("assess", {
        "input": args.input, "source": table.source, "notes": table.notes,
        "group_by": args.group_by, "level": level.x, "exponent": level.exponent,
    })
    g = doc.table("groups", ["group", "n_units", "pooled_p", "pooled_p_top10", "pooled_ratio",
                             "afcl", "cfal", "gap_absolute", "gap_factor"])
    u = doc.table("units", ["group", "unit_id", "ratio", "probability", "expected_count"])
    for key, a in groups.items():
        g.add(key, len(a.units), a.pooled_p, a.pooled_p_top10, a.pooled_ratio,
              a.afcl, a.cfal, a.gap_absolute, a.gap_factor)
        for ua in a.units:
            u.add(key, ua.unit_id, ua.ratio, ua.probability, ua.expected_count)
    _emit(doc, args.out, args.format, [human_table(g)])
    return doc


def cmd_cumulative(args) -> ReportDocument:
    table = _load_units(args.input)
    groups = dataio.group_units(table)
    key = dataio.find_group(groups, args.country)
    if key is None:
        raise ValidationError(
            f"country {args.country!r} not in data; available: {', '.join(sorted(groups))}")
    curve = aggregation.cumulative_cfal(groups[key], args.level)
    doc = ReportDocument("cumulative", {
        "input": args.input, "country": key, "level": args.level.x,
        "afcl": curve.afcl, "cfal": curve.cfal, "prefix_to_afcl": curve.prefix_to_afcl,
    })
    t = doc.table("cumulative", ["rank", "unit_id", "label", "expected_count", "running_total", "afcl"])
    for r in curve.rows:
        t.add(r.rank, r.unit_id, r.label, r.expected_count, r.running_total, curve.afcl)
    if curve.prefix_to_afcl is None:
        reach = f"{key}: the running CFAL total never reaches AFCL {format_sig(curve.afcl)}"
    else:
        reach = (f"{key}: first {curve.prefix_to_afcl} of {len(curve.rows)} units reach "
                 f"AFCL {format_sig(curve.afcl)} (CFAL {format_sig(curve.cfal)})")
    _emit(doc, args.out, "csv", [reach])
    if args.plot:
        _plot("plot_cumulative", curve, args.plot, title=key)
    return doc


def cmd_simulate(args) -> ReportDocument:
    if args.replicates < 1:
        raise ValidationError(f"--replicates must be >= 1, got {args.replicates}")
    profile = simulation.make_profile(args.profile)
    study = simulation.replicate_study(args.profile, args.seed, args.replicates, args.level,
                                       workers=args.jobs)
    doc = ReportDocument("simulate", {
        "profile": args.profile, "profile_parameters": profile.parameters,
        "target_ratios": list(profile.target_ratios), "master_seed": args.seed,
        "replicates": args.replicates, "level": args.level.x, "prng": ALGORITHM,
        "replicate_seed_rule": "splitmix64(master_seed + r), r = 0..replicates-1",
        "world": {"n_series": 400, "per_series": 200, "mu_max": 4.0, "mu_min": 2.0, "sigma": 1.1},
    })
    t = doc.table("replicates", ["replicate", "seed", "pooled_ratio", "afcl", "cfal", "gap_factor",
                                 "cfal_ge_afcl", "selected", "top10_counts"])
    for i, r in enumerate(study.results):
        t.add(i, r.seed, r.pooled_ratio, r.afcl, r.cfal, r.gap_factor, r.cfal >= r.afcl,
              list(r.selected), list(r.top10_counts))
    s = doc.table("summary", ["metric", "q10", "median", "q90"])
    for m in simulation.SUMMARY_METRICS:
        q = study.quantiles[m]
        s.add(m, q["q10"], q["median"], q["q90"])
    _emit(doc, args.out, args.format, [human_table(s)])
    if args.plot:
        first = study.results[0]
        chosen = [c / 200 for c in first.top10_counts]
        _plot("plot_selection", profile.target_ratios, chosen, args.plot,
              title=f"{args.profile} profile, replicate 0")
    return doc


def cmd_fit_ep(args):
    counts = []
    try:
        with open(args.input, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = [h.strip().lower() for h in next(reader, [])]
            if header != ["level", "count"]:
                raise ValidationError(f"{args.input}: line 1: expected header 'level,count'")
            for record in reader:
                if not record:
                    continue
                try:
                    counts.append((as_level(float(record[0])), float(record[1])))
                except (ValueError, IndexError) as exc:
                    raise ValidationError(f"{args.input}: line {reader.line_num}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{args.input}: not UTF-8 text ({exc})") from None
    fit = stats.fit_ep_powerlaw(counts, args.p_total)
    print(f"ep: {fit.ep!r}")
    print(f"slope: {fit.slope!r}")
    print(f"intercept: {fit.intercept!r}")
    print(f"expected_intercept: {fit.expected_intercept!r}")
    print(f"r_squared: {fit.r_squared!r}")
    return fit


def _read_values(path: str) -> list[float]:
    values = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                value = float(text)
            except ValueError:
                raise ValidationError(f"{path}: line {line_no}: {text!r} is not a number") from None
            if not value > 0 or not math.isfinite(value):
                raise ValidationError(f"{path}: line {line_no}: value {text} is not positive and finite")
            values.append(value)
    return values


def cmd_ks_test(args):
    result = stats.ks_lognormal_test(_read_values(args.input))
    print(f"n: {result.n}")
    print(f"mu: {result.fitted.mu!r}")
    print(f"sigma: {result.fitted.sigma!r}")
    print(f"D: {result.d!r}")
    print(f"p: {result.p_value!r}")
    print(f"note: {KS_NOTE}")
    return result


def cmd_world(args) -> ReportDocument:
    world = simulation.build_world(args.series, args.per_series, args.mu_max, args.mu_min,
                                   args.sigma, args.seed)
    try:
        threshold = simulation.world_threshold(world, 10)
        counts = simulation.unit_top_counts(world, 10)
    except InsufficientPopulationError as exc:
        # a world too small to have a top 10% still gets its per-series table
        warnings.warn(f"{exc}; all top-10% counts are 0")
        threshold = None
        counts = [simulation.UnitCount(s.unit_index, 0, 0.0) for s in world.series]
    ratios = [c.ratio for c in counts]
    ranks = list(range(1, len(ratios) + 1))
    doc = ReportDocument("world", {
        **world.parameters, "threshold_top10": threshold,
        "total_values": world.total_values, "top10_total": sum(c.count for c in counts),
    })
    t = doc.table("series", ["index", "mu", "top10_count", "ratio"])
    for s, c in zip(world.series, counts):
        t.add(s.unit_index, s.mu, c.count, c.ratio)
    fits = doc.table("fits", ["degree", "coefficients", "rss"])
    quad = None
    if len(ratios) >= 3:
        for degree in (1, 2):
            fit = stats.fit_polynomial(ranks, ratios, degree)
            fits.add(degree, list(fit.coefficients), fit.rss)
            quad = fit
    doc.plots["ratio_vs_rank"] = list(zip(ranks, ratios))
    summary = [f"{len(ratios)} series, {world.total_values} values, "
               f"{sum(c.count for c in counts)} in the world top 10%"]
    if quad is not None:
        summary.append(f"RSS linear {format_sig(fits.rows[0][2])}, quadratic {format_sig(quad.rss)}")
    _emit(doc, args.out, args.format, summary)
    if args.plot and quad is not None:
        _plot("plot_ratio_vs_rank", ratios, quad.coefficients, args.plot)
    return doc


def cmd_curve(args) -> ReportDocument:
    table = _load_units(args.input)
    wanted = args.unit or [u.id for u in table.rows]
    by_id = {u.id: u for u in table.rows}
    missing = [w for w in wanted if w not in by_id]
    if missing:
        raise ValidationError(f"unknown unit id(s): {', '.join(missing)}")
    levels = [as_level(float(x)) for x in args.levels.split(",")]
    doc = ReportDocument("curve", {"input": args.input, "levels": [lv.x for lv in levels]})
    t = doc.table("curve", ["unit_id", "level", "expected_count"])
    curves = {}
    for uid in wanted:
        points = percentile_curve(by_id[uid], levels)
        curves[by_id[uid].label] = points
        for x, n in points:
            t.add(uid, x, n)
    _emit(doc, args.out, args.format, [])
    if args.plot:
        _plot("plot_percentile_curves", curves, args.plot)
    return doc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topcite", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def output(p, formats=True):
        p.add_argument("--out", help="output file (default: stdout)")
        if formats:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("assess", help="AFCL and CFAL expected counts per group")
    p.add_argument("--input", required=True)
    p.add_argument("--group-by", choices=("country", "all"), default="country")
    p.add_argument("--level", type=_level, default=_level("0.01"))
    output(p)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("cumulative", help="running CFAL total of one country's units")
    p.add_argument("--input", required=True)
    p.add_argument("--country", required=True)
    p.add_argument("--level", type=_level, default=_level("0.01"))
    p.add_argument("--plot", help="figure file (.png, .svg or .pdf)")
    output(p, formats=False)
    p.set_defaults(func=cmd_cumulative)

    p = sub.add_parser("simulate", help="synthetic 20-unit institutions, CFAL vs AFCL")
    p.add_argument("--profile", choices=simulation.PROFILE_KINDS, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--level", type=_level, default=_level("0.01"))
    p.add_argument("--jobs", type=int, default=1, help="worker threads; output does not depend on it")
    p.add_argument("--plot", help="figure of the first replicate's selection")
    output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit-ep", help="power-law constant from counts at several percentiles")
    p.add_argument("--input", required=True, help="CSV with header level,count")
    p.add_argument("--p-total", type=float, required=True)
    p.set_defaults(func=cmd_fit_ep)

    p = sub.add_parser("ks-test", help="Kolmogorov-Smirnov lognormality test")
    p.add_argument("--input", required=True, help="one positive value per line")
    p.set_defaults(func=cmd_ks_test)

    p = sub.add_parser("world", help="build the synthetic world and its per-series shares")
    p.add_argument("--series", type=int, default=400)
    p.add_argument("--per-series", type=int, default=200)
    p.add_argument("--mu-max", type=float, default=4.0)
    p.add_argument("--mu-min", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=1.1)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--plot", help="ratio-versus-rank figure file")
    output(p)
    p.set_defaults(func=cmd_world)

    p = sub.add_parser("curve", help="expected papers of units across top percentiles")
    p.add_argument("--input", required=True)
    p.add_argument("--unit", action="append", help="unit id (repeatable; default: all)")
    p.add_argument("--levels", default="100,10,1,0.1,0.01")
    p.add_argument("--plot", help="figure file")
    output(p)
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args.func(args)
            code = 0
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = 2
        except OSError as exc:
            name = exc.filename if exc.filename is not None else ""
            print(f"error: {name}: {exc.strerror or exc}", file=sys.stderr)
            code = 1
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
