"""Command-line front end: tables, figure data, condition checks,
simulation, and periodicity extraction.

Every run writes plain CSV files plus a ``config.json`` echo into the
output directory (``--out``, else $ELECTRA_OUT, else ./electra-out), so
any output can be reproduced bit-for-bit from its own directory.
Exit codes: 0 success / checks passed, 1 a check or fixture comparison
failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, fixtures
from .conditions import run_condition_checks
from .engine import InitConvention, compute_phase_table
from .franklin import (
    RingVariant,
    SimConfig,
    closed_form_c2,
    conditional_second_round,
    estimate_c2,
    exhaustive_second_round,
    mean_survival_ratios,
    run_election,
)
from .metrics import (
    empirical_limit,
    periodicity_reconstruct,
    periodicity_samples,
)
from .models import SurvivorModel, model_from_name

_MODEL_CHOICES = [
    "toy",
    "det-halving",
    "fair-coin",
    "biased-coin",
    "coin-max-one",
    "demon",
    "peak-linear-i",
    "peak-linear-ii",
    "peak-circular",
    "explicit",
]


def _atomic_write(path: Path, write_body) -> None:
    """Write via a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write_body(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, header: list[str], rows) -> None:
    def body(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

    _atomic_write(path, body)


def _out_dir(args: argparse.Namespace) -> Path:
    out = args.out or os.environ.get("ELECTRA_OUT") or "electra-out"
    path = Path(out) / args.command
    path.mkdir(parents=True, exist_ok=True)
    return path


def _echo_config(out: Path, args: argparse.Namespace) -> None:
    payload = {"version": __version__, "argv": sys.argv[1:]}
    for key, value in sorted(vars(args).items()):
        if key in {"func"}:
            continue
        payload[key] = str(value) if isinstance(value, (Path, Fraction)) else value
    _atomic_write(out / "config.json", lambda fh: json.dump(payload, fh, indent=2))


def _build_model(args: argparse.Namespace) -> SurvivorModel:
    return model_from_name(
        args.model,
        p=args.p,
        nu=args.nu,
        matrix_path=getattr(args, "matrix", None),
        exact_cutoff=args.exact_cutoff,
    )


def _fraction(text: str) -> Fraction:
    return Fraction(text)


# ---------------------------------------------------------------------------
# table


def cmd_table(args: argparse.Namespace) -> int:
    model = _build_model(args)
    out = _out_dir(args)
    init = InitConvention(args.init)
    table = compute_phase_table(
        model, args.max_n, threshold_a=args.threshold, init=init,
        residual_eps=args.residual_eps,
    )
    rows = []
    for n in range(1, min(args.max_n, model.exact_cutoff) + 1):
        for k, p in sorted(model.pmf_exact(n).items()):
            rows.append([n, k, p.numerator, p.denominator])
    _write_csv(out / "survivor_pmf.csv", ["n", "k", "numerator", "denominator"], rows)
    table.to_csv(out / "phase_probs.csv", exact_path=out / "phase_probs_exact.csv")
    table.means_to_csv(out / "phase_means.csv", alpha=args.alpha or model.declared_alpha)
    _echo_config(out, args)
    status = 0
    if args.check_fixtures:
        status = _check_fixtures(model, args, table)
    print(f"RESULT table model={model.name} max_n={args.max_n} out={out} "
          f"fixtures={'SKIPPED' if not args.check_fixtures else ('PASS' if status == 0 else 'FAIL')}")
    return status


def _check_fixtures(model: SurvivorModel, args, table) -> int:
    """Compare against the published small tables; exact equality only."""
    name = model.name
    failures: list[str] = []

    def compare_pmf(reference: dict[tuple[int, int], Fraction]) -> None:
        max_ref = max(n for n, _ in reference)
        for n in range(1, min(args.max_n, max_ref) + 1):
            pmf = model.pmf_exact(n)
            for k in range(0, n + 1):
                want = reference.get((n, k), Fraction(0))
                got = pmf.get(k, Fraction(0))
                if got != want:
                    failures.append(f"pmf({n},{k}) = {got}, published {want}")

    def compare_phase(reference: dict[tuple[int, int], Fraction], phase_table) -> None:
        max_ref = max(n for n, _ in reference)
        for n in range(0, min(args.max_n, max_ref) + 1):
            for j in range(phase_table.j_max + 1):
                want = reference.get((n, j), Fraction(0))
                got = phase_table.exact_prob(n, j)
                if got != want:
                    failures.append(f"phase({n},{j}) = {got}, published {want}")

    if name == "peak-linear-i":
        compare_pmf(fixtures.as_fractions(fixtures.PEAK_LINEAR_I))
        if args.init == "standard" and args.threshold == 1:
            compare_phase(fixtures.as_fractions(fixtures.PHASE_LINEAR_I_STANDARD), table)
            alt = compute_phase_table(
                model, min(args.max_n, 5), threshold_a=1, init=InitConvention.ALT_COST
            )
            compare_phase(fixtures.as_fractions(fixtures.PHASE_LINEAR_I_ALTCOST), alt)
    elif name == "peak-circular":
        compare_pmf(fixtures.as_fractions(fixtures.PEAK_CIRCULAR))
        if args.init == "standard" and args.threshold == 1:
            compare_phase(fixtures.as_fractions(fixtures.PHASE_CIRCULAR_STANDARD), table)
    elif name == "toy-halving":
        for n in range(2, args.max_n + 1):
            j = n.bit_length() - 1  # 2^j <= n < 2^{j+1}
            want = 2 - Fraction(n, 2**j)
            # halving probabilities are dyadic, so the float row is exact
            if Fraction(table.prob(n, j)) != want:
                failures.append(f"toy phase({n},{j}) != closed form")
    else:
        print(f"no published fixtures for model {name}", file=sys.stderr)
        return 1
    for line in failures[:20]:
        print(f"FIXTURE MISMATCH: {line}", file=sys.stderr)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# figures


def _scatter_rows(table, alpha, n_lo, n_hi, kind, series):
    base = math.log(1.0 / float(alpha))
    rows = []
    for n in range(max(n_lo, 1), n_hi + 1):
        ln = math.log(n) / base
        values = table.cdf_row(n) if kind == "cdf" else table.row(n)
        for j in range(table.j_max + 1):
            y = float(values[j])
            if 1e-12 < y < 1.0 - 1e-12 or (kind == "pmf" and y > 1e-12):
                rows.append([repr(j - ln), repr(y), series])
    return rows


def _means_rows(table, alpha, n_lo, n_hi, series):
    base = math.log(1.0 / float(alpha))
    rows = []
    for n in range(n_lo, n_hi + 1):
        ln = math.log(n) / base
        rows.append([repr(ln), repr(table.mean(n) - ln), series])
    return rows


def _reconstruction_rows(table, alpha, n_lo, n_hi, terms, series):
    samples = periodicity_samples(table, float(alpha), n_lo, n_hi)
    fit = periodicity_reconstruct(samples, fourier_terms=terms)
    base = math.log(1.0 / float(alpha))
    rows = []
    for n in range(n_lo, n_hi + 1):
        x = math.log(n) / base
        rows.append([repr(x), repr(float(fit.reconstruction(x % 1.0))), series])
    return rows


def _gumbel_rows(table, alpha, n_hi):
    """Cosmetic moment-matched Gumbel cdf overlay (the fit is expectedly bad)."""
    base = math.log(1.0 / float(alpha))
    law = table.row(n_hi)
    ln = math.log(n_hi) / base
    js = np.arange(len(law))
    mean = float(np.dot(js, law)) - ln
    var = float(np.dot((js - ln - mean) ** 2, law))
    beta = math.sqrt(6.0 * var) / math.pi
    mu = mean - 0.5772156649015329 * beta
    xs = np.linspace(-2.5, 2.5, 201)
    cdf = np.exp(-np.exp(-(xs - mu) / beta))
    return [[repr(float(x)), repr(float(y)), "gumbel_ref"] for x, y in zip(xs, cdf)]


def _gauss_rows(table, alpha, n_hi):
    """Cosmetic unit-window normal cdf-difference overlay."""
    from scipy.special import ndtr

    base = math.log(1.0 / float(alpha))
    law = table.row(n_hi)
    ln = math.log(n_hi) / base
    js = np.arange(len(law))
    mean = float(np.dot(js, law)) - ln
    var = float(np.dot((js - ln - mean) ** 2, law))
    sd = math.sqrt(var)
    xs = np.linspace(-2.5, 2.5, 201)
    vals = ndtr((xs - mean) / sd) - ndtr((xs - 1.0 - mean) / sd)
    return [[repr(float(x)), repr(float(y)), "gauss_ref"] for x, y in zip(xs, vals)]


def cmd_figure(args: argparse.Namespace) -> int:
    third = Fraction(1, 3)
    protocols = {
        "fig1": ("peak-linear-i", "standard", 50, 500, "means"),
        "fig2": ("peak-linear-i", "standard", 20, 500, "cdf"),
        "fig3": ("peak-linear-i", "standard", 150, 500, "pmf"),
        "fig4": ("peak-linear-i", "standard", 1, 40, "pmf"),
        "fig5": ("peak-linear-i", "altcost", 5, 500, "cdf"),
        "fig6": ("peak-linear-i", "altcost", 5, 500, "pmf"),
        "fig7": ("peak-linear-i", "altcost", 1, 100, "pmf"),
        "fig8": ("peak-linear-i", "standard", 50, 500, "recon"),
        "fig9": ("peak-circular", "standard", 5, 500, "cdf"),
        "fig10": (None, "standard", 5, 500, "compare"),
        "fig11": ("peak-circular", "standard", 1, 40, "pmf"),
        "fig12": ("peak-circular", "standard", 50, 500, "recon"),
    }
    if args.figure not in protocols:
        print(f"unknown figure id {args.figure!r}; use fig1..fig12", file=sys.stderr)
        return 2
    model_name, init, n_lo, n_hi, kind = protocols[args.figure]
    out = _out_dir(args)
    rows: list[list[str]] = []
    if kind == "compare":
        for name in ("peak-circular", "peak-linear-i"):
            model = model_from_name(name, exact_cutoff=args.exact_cutoff)
            table = compute_phase_table(model, n_hi, init=InitConvention(init))
            rows += _scatter_rows(table, third, n_lo, n_hi, "cdf", name)
    else:
        model = model_from_name(model_name, exact_cutoff=args.exact_cutoff)
        table = compute_phase_table(model, n_hi, init=InitConvention(init))
        if kind == "means":
            rows += _means_rows(table, third, n_lo, n_hi, "observed")
        elif kind == "recon":
            rows += _means_rows(table, third, n_lo, n_hi, "observed")
            rows += _reconstruction_rows(
                table, third, n_lo, n_hi, args.fourier_terms, "reconstruction"
            )
        else:
            rows += _scatter_rows(table, third, n_lo, n_hi, kind, "observed")
            if args.overlays and kind == "cdf":
                rows += _gumbel_rows(table, third, n_hi)
            if args.overlays and kind == "pmf":
                rows += _gauss_rows(table, third, n_hi)
    _write_csv(out / f"{args.figure}.csv", ["x", "y", "series"], rows)
    _echo_config(out, args)
    print(f"RESULT figure id={args.figure} points={len(rows)} out={out}")
    return 0


# ---------------------------------------------------------------------------
# check


def cmd_check(args: argparse.Namespace) -> int:
    model = _build_model(args)
    out = _out_dir(args)
    report = run_condition_checks(model, args.n_max, args.alpha)
    _write_csv(
        out / "monotone_violations.csv",
        ["n", "k", "gap"],
        [[v.n, v.k, repr(v.gap)] for v in report.monotone.violations],
    )
    _write_csv(
        out / "mean_increments.csv",
        ["n", "increment", "deviation"],
        [
            [n + 1, repr(float(d)), repr(float(dev))]
            for n, (d, dev) in enumerate(
                zip(report.increment.increments, report.increment.deviations)
            )
        ],
    )
    _write_csv(
        out / "concentration.csv",
        ["n", "delta", "tail_prob", "scaled"],
        [
            [n + 1, repr(float(report.concentration.deltas[n])),
             repr(float(report.concentration.tail_probs[n])),
             repr(float(report.concentration.series[n]))]
            for n in range(len(report.concentration.series))
        ],
    )
    _write_csv(
        out / "moment_ratios.csv",
        ["n", "ratio"],
        [[n + 1, repr(float(r))] for n, r in enumerate(report.moment.ratios)],
    )
    _echo_config(out, args)
    print(f"RESULT check {report.summary()}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    variant = RingVariant(args.variant)
    summary_rows = []
    status = 0
    if args.estimate == "c2":
        est = estimate_c2(args.n, args.trials, args.seed, variant)
        reference = closed_form_c2() if variant is RingVariant.TRUE_PERSISTENT else 1.0 / 9.0
        summary_rows.append(
            [variant.value, args.n, est.statistic, repr(est.point), repr(est.stderr), est.trials]
        )
        summary_rows.append(
            [variant.value, args.n, "closed-form-reference", repr(reference), "0", 0]
        )
        print(
            f"RESULT simulate estimate=c2 point={est.point:.8f} stderr={est.stderr:.2e} "
            f"reference={reference:.10f} sigmas={est.sigmas_from(reference):.2f}"
        )
    elif args.estimate == "conditional":
        est = conditional_second_round(args.trials, args.seed, variant)
        exact = exhaustive_second_round() if variant is RingVariant.TRUE_PERSISTENT else None
        summary_rows.append(
            [variant.value, 8, est.statistic, repr(est.point), repr(est.stderr), est.trials]
        )
        if exact is not None:
            summary_rows.append(
                [variant.value, 8, "exhaustive-reference", repr(float(exact)), "0", 0]
            )
            print(
                f"RESULT simulate estimate=conditional point={est.point:.6f} "
                f"exact={exact} sigmas={est.sigmas_from(float(exact)):.2f}"
            )
        else:
            print(f"RESULT simulate estimate=conditional point={est.point:.6f}")
    else:  # histogram
        config = SimConfig(
            variant, args.n, args.trials, args.seed,
            stop_threshold=args.threshold, record_traces=args.traces,
        )
        records = run_election(config)
        _write_csv(
            out / "results.csv",
            ["variant", "n", "trial", "rounds", "messages"],
            (
                [variant.value, args.n, t, int(records.rounds[t]), int(records.messages[t])]
                for t in range(args.trials)
            ),
        )
        hist = records.round_histogram()
        summary_rows += [
            [variant.value, args.n, f"count-rounds-{j}", c, "", args.trials]
            for j, c in sorted(hist.items())
        ]
        mean_messages = float(records.messages.mean())
        scale = 2.0 * args.n * math.log(args.n) / math.log(3.0)
        summary_rows.append(
            [variant.value, args.n, "mean-messages", repr(mean_messages), "", args.trials]
        )
        summary_rows.append(
            [variant.value, args.n, "messages-over-2nlog3n", repr(mean_messages / scale), "", args.trials]
        )
        if args.traces:
            ratios = mean_survival_ratios(records)
            summary_rows.append(
                [variant.value, args.n, "round-survival-ratios",
                 " ".join(f"{r:.6f}" for r in ratios), "", args.trials]
            )
        print(
            f"RESULT simulate variant={variant.value} n={args.n} trials={args.trials} "
            f"mean_rounds={float(records.rounds.mean()):.4f} mean_messages={mean_messages:.1f}"
        )
    _write_csv(
        out / "summary.csv",
        ["variant", "n", "stat", "point", "stderr", "trials"],
        summary_rows,
    )
    _echo_config(out, args)
    return status


# ---------------------------------------------------------------------------
# periodicity


def cmd_periodicity(args: argparse.Namespace) -> int:
    model = _build_model(args)
    out = _out_dir(args)
    alpha = args.alpha or model.declared_alpha
    if alpha is None:
        print("model declares no alpha; pass --alpha", file=sys.stderr)
        return 2
    table = compute_phase_table(model, args.n_hi, init=InitConvention(args.init))
    samples = periodicity_samples(table, float(alpha), args.n_lo, args.n_hi)
    fit = periodicity_reconstruct(samples, fourier_terms=args.fourier_terms)
    _write_csv(
        out / "samples.csv",
        ["y", "mass"],
        [[repr(float(y)), repr(float(m))] for y, m in zip(samples.ys, samples.masses)],
    )
    base = math.log(1.0 / float(alpha))
    rows = []
    worst = 0.0
    for n in range(args.n_lo, args.n_hi + 1):
        x = math.log(n) / base
        observed = table.mean(n) - x
        predicted = float(fit.reconstruction(x % 1.0))
        worst = max(worst, abs(observed - predicted))
        rows.append([n, repr(x), repr(observed), repr(predicted)])
    _write_csv(out / "residuals.csv", ["n", "log_n", "observed", "reconstruction"], rows)
    scatter = empirical_limit(table, float(alpha), args.n_lo, args.n_hi)
    _echo_config(out, args)
    print(
        f"RESULT periodicity model={model.name} mean_level={fit.mean_level:.6f} "
        f"sup_residual={worst:.6f} collapse_spread={scatter.collapse_spread():.6f} "
        f"monotone_violations={scatter.monotone_violations()}"
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_model_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--model", required=True, choices=_MODEL_CHOICES)
    sub.add_argument("--p", type=_fraction, default=None, help="coin bias, e.g. 0.3 or 3/10")
    sub.add_argument("--nu", type=_fraction, default=None, help="demon kill probability")
    sub.add_argument("--matrix", type=Path, default=None, help="CSV for --model explicit")
    sub.add_argument("--exact-cutoff", type=int, default=75,
                     help="largest n computed with exact rationals")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="electra",
        description="phase-count analysis of elimination-round leader election",
    )
    parser.add_argument("--version", action="version", version=f"electra {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    table = subs.add_parser("table", help="survivor pmf and phase-law tables")
    _add_model_options(table)
    table.add_argument("--max-n", type=int, required=True)
    table.add_argument("--threshold", type=int, default=1)
    table.add_argument("--init", choices=["standard", "altcost"], default="standard")
    table.add_argument("--alpha", type=_fraction, default=None)
    table.add_argument("--residual-eps", type=float, default=1e-12)
    table.add_argument("--check-fixtures", action="store_true",
                       help="compare with the published small tables; exit 1 on mismatch")
    table.add_argument("--out", default=None)
    table.set_defaults(func=cmd_table)

    figure = subs.add_parser("figure", help="emit plot data for fig1..fig12")
    figure.add_argument("figure", help="figure id, fig1..fig12")
    figure.add_argument("--fourier-terms", type=int, default=5)
    figure.add_argument("--exact-cutoff", type=int, default=75)
    figure.add_argument("--overlays", action="store_true",
                        help="add cosmetic gumbel/gauss reference curves")
    figure.add_argument("--out", default=None)
    figure.set_defaults(func=cmd_figure)

    check = subs.add_parser("check", help="finite-range convergence-hypothesis checks")
    _add_model_options(check)
    check.add_argument("--alpha", type=_fraction, default=None)
    check.add_argument("--n-max", type=int, default=200)
    check.add_argument("--out", default=None)
    check.set_defaults(func=cmd_check)

    sim = subs.add_parser("simulate", help="Monte Carlo ring elections")
    sim.add_argument("--variant", required=True,
                     choices=[v.value for v in RingVariant])
    sim.add_argument("--n", type=int, default=100)
    sim.add_argument("--trials", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument("--threshold", type=int, default=1)
    sim.add_argument("--estimate", choices=["histogram", "c2", "conditional"],
                     default="histogram")
    sim.add_argument("--traces", action="store_true",
                     help="record survivor traces (memory heavy for big runs)")
    sim.add_argument("--out", default=None)
    sim.set_defaults(func=cmd_simulate)

    period = subs.add_parser("periodicity", help="Laplace/Fourier residual extraction")
    _add_model_options(period)
    period.add_argument("--alpha", type=_fraction, default=None)
    period.add_argument("--n-lo", type=int, default=50)
    period.add_argument("--n-hi", type=int, default=500)
    period.add_argument("--init", choices=["standard", "altcost"], default="standard")
    period.add_argument("--fourier-terms", type=int, default=5)
    period.add_argument("--out", default=None)
    period.set_defaults(func=cmd_periodicity)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
