"""Command-line interface: fit trends on CSV data, select the penalty and
difference order, run simulation experiments and theory/lemma checks.

CSV dialect: comma-separated, UTF-8, header row required, '.' decimal
point, empty field = missing value.  All outputs are data files (CSV or
JSON); plotting is left to external tools.

Exit codes: 0 success; 1 violated bound in `theory`/`lemmas`; 2 usage
error; 3 unreadable input file; 4 non-numeric data; 5 series too short.
"""

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, operators, simulation, structured
from .ar import ARModel
from .errors import UnidentifiableTrendError
from .estimators import (
    PenaltySpec,
    TimeSeries,
    effective_dof,
    fit_missing,
    fit_ols,
    prediction_band,
)
from .selection import (
    SpectralDensity,
    criterion_phi,
    default_nu_grid,
    fit_ar_with_order,
    local_linear_preliminary,
    select,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_UNREADABLE = 3
EXIT_BAD_DATA = 4
EXIT_TOO_SHORT = 5


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _read_series(path, value_col, time_col):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_UNREADABLE, f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CliError(EXIT_BAD_DATA, f"{path}: missing header row")
        if value_col not in reader.fieldnames:
            raise CliError(EXIT_BAD_DATA, f"{path}: no column named {value_col!r}")
        if time_col is not None and time_col not in reader.fieldnames:
            raise CliError(EXIT_BAD_DATA, f"{path}: no column named {time_col!r}")
        values, times = [], []
        for lineno, row in enumerate(reader, start=2):
            cell = (row[value_col] or "").strip()
            if cell == "":
                values.append(math.nan)
            else:
                try:
                    values.append(float(cell))
                except ValueError as exc:
                    raise CliError(
                        EXIT_BAD_DATA, f"{path}:{lineno}: non-numeric value {cell!r}"
                    ) from exc
            if time_col is not None:
                try:
                    times.append(float((row[time_col] or "").strip()))
                except ValueError as exc:
                    raise CliError(
                        EXIT_BAD_DATA, f"{path}:{lineno}: non-numeric time {row[time_col]!r}"
                    ) from exc
    if not values:
        raise CliError(EXIT_BAD_DATA, f"{path}: no data rows")
    t = np.asarray(times) if time_col is not None else np.arange(1, len(values) + 1, dtype=float)
    return t, TimeSeries.from_values(np.asarray(values))


def _fmt(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _parse_d_set(text):
    try:
        ds = tuple(sorted(set(int(part) for part in text.split(","))))
    except ValueError as exc:
        raise CliError(EXIT_BAD_DATA, f"bad --d-set {text!r}") from exc
    if not ds or any(d < 1 or d > 4 for d in ds):
        raise CliError(EXIT_BAD_DATA, "--d-set entries must be in 1..4")
    return ds


def cmd_fit(args):
    t, Y = _read_series(args.input, args.value_col, args.time_col)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    sel = None
    if args.nu is not None and args.d is not None:
        spec = PenaltySpec(args.d, args.nu)
    else:
        if not Y.fully_observed:
            raise CliError(
                EXIT_BAD_DATA, "selection needs a complete series; pass --d and --nu explicitly"
            )
        if Y.n < 20:
            raise CliError(EXIT_TOO_SHORT, f"series too short for selection: n={Y.n}")
        d_set = (args.d,) if args.d is not None else _parse_d_set(args.d_set)
        sel = select(Y, d_set=d_set, p_max=args.pmax, criterion=args.criterion)
        spec = PenaltySpec(sel.d_hat, sel.nu_hat)

    if Y.n < 2 * spec.d + 1:
        raise CliError(EXIT_TOO_SHORT, f"series too short: n={Y.n} for d={spec.d}")
    fit = fit_missing(Y, spec) if not Y.fully_observed else fit_ols(Y, spec)

    if sel is not None:
        ar = sel.ar_model
        g0 = sel.g0
        phi_value = sel.phi_min
    elif Y.fully_observed:
        resid = Y.values - local_linear_preliminary(Y) if Y.n >= 9 else Y.values - fit.mu_hat
        ar = fit_ar_with_order(resid, min(args.pmax, Y.n // 10), args.criterion)
        g0 = float(ar.spectral_density(0.0))
        phi_value = criterion_phi(Y, spec, SpectralDensity(ar))
    else:
        ar, g0, phi_value = None, None, None

    if spec.nu > 0:
        sigma_eps2 = float(ar.autocovariances(0)[0]) if ar is not None else fit.sse / Y.n
        fit = prediction_band(fit, sigma_eps2, spec.nu, args.alpha)
    dof = effective_dof(spec, Y.n) if Y.fully_observed else None

    rows = []
    for i in range(Y.n):
        rows.append(
            (
                _fmt(t[i]),
                _fmt(Y.values[i]) if Y.observed[i] else "",
                _fmt(fit.mu_hat[i]),
                _fmt(fit.lower[i]) if fit.lower is not None else "",
                _fmt(fit.upper[i]) if fit.upper is not None else "",
            )
        )
    _write_csv(out / "trend.csv", ("t", "y", "mu_hat", "lower", "upper"), rows)

    summary = {
        "n": Y.n,
        "d": spec.d,
        "nu": spec.nu,
        "g0": g0,
        "phi": phi_value,
        "sigma_delta2": ar.sigma2 if ar is not None else None,
        "ar_phi": list(ar.phi) if ar is not None else None,
        "sse": fit.sse,
        "dof": dof,
        "alpha": args.alpha,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)

    if args.plot_data:
        long_rows = []
        series = {"y": Y.values, "mu_hat": fit.mu_hat}
        if fit.lower is not None:
            series["lower"] = fit.lower
            series["upper"] = fit.upper
        for name, arr in series.items():
            for i in range(Y.n):
                if name == "y" and not Y.observed[i]:
                    continue
                long_rows.append((_fmt(t[i]), name, _fmt(arr[i])))
        _write_csv(Path(args.plot_data), ("t", "series", "value"), long_rows)
    print(f"fit: d={spec.d} nu={spec.nu:.6g} sse={fit.sse:.6g} -> {out / 'trend.csv'}")
    return EXIT_OK


def cmd_select(args):
    _, Y = _read_series(args.input, args.value_col, args.time_col)
    if not Y.fully_observed:
        raise CliError(EXIT_BAD_DATA, "selection needs a complete series")
    if Y.n < 20:
        raise CliError(EXIT_TOO_SHORT, f"series too short for selection: n={Y.n}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sel = select(Y, d_set=_parse_d_set(args.d_set), p_max=args.pmax, criterion=args.criterion)
    _write_csv(
        out / "surface.csv",
        ("d", "nu", "phi"),
        [(int(d), _fmt(nu), _fmt(phi)) for d, nu, phi in sel.surface],
    )
    summary = {
        "d": sel.d_hat,
        "nu": sel.nu_hat,
        "phi": sel.phi_min,
        "g0": sel.g0,
        "sigma_delta2": sel.ar_model.sigma2,
        "ar_phi": list(sel.ar_model.phi),
        "sigma2_first_diff": sel.sigma2_diff,
    }
    with open(out / "selection.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    print(f"select: d={sel.d_hat} nu={sel.nu_hat:.6g} phi={sel.phi_min:.6g}")
    return EXIT_OK


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_UNREADABLE, f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_BAD_DATA, f"bad config {path}: {exc}") from exc


def cmd_simulate(args):
    cfg = _load_config(args.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    experiment = cfg.get("experiment", "table1")
    base_seed = int(cfg.get("base_seed", args.seed))

    if experiment == "table1":
        nu_grid = cfg.get("nu_grid", 60)
        if not isinstance(nu_grid, int):
            raise CliError(EXIT_BAD_DATA, "table1 config expects integer nu_grid (point count)")
        config = simulation.Table1Config(
            n_values=tuple(cfg.get("n", (100, 300))),
            d_values=tuple(cfg.get("d_true", (1, 2))),
            snr_values=tuple(cfg.get("snr", (2.0, 5.0, 9.0))),
            repeats=int(cfg.get("repeats", 400)),
            base_seed=base_seed,
            d_set=tuple(cfg.get("d_set", (1, 2))),
            nu_points=nu_grid,
        )
        results = simulation.run_table1(config)
        _write_csv(
            out / "table1_summary.csv",
            ("n", "d_true", "snr", "mean", "sd", "median"),
            [
                (r.n, r.d_true, _fmt(r.snr), _fmt(r.mean), _fmt(r.sd), _fmt(r.median))
                for r in results
            ],
        )
        rep_rows = []
        for r in results:
            for idx, ratio in enumerate(r.ratios):
                rep_rows.append((r.n, r.d_true, _fmt(r.snr), idx, _fmt(ratio)))
        _write_csv(
            out / "table1_repeats.csv", ("n", "d_true", "snr", "repeat", "ratio"), rep_rows
        )
        for r in results:
            print(
                f"n={r.n} d={r.d_true} snr={r.snr:g}: "
                f"mean={r.mean:.4f} sd={r.sd:.4f} median={r.median:.4f}"
            )
        return EXIT_OK

    if experiment == "rate":
        err = ARModel(
            phi=tuple(cfg.get("ar_phi", ())), sigma2=float(cfg.get("sigma2", 1.0))
        )
        report = simulation.run_rate_experiment(
            d=int(cfg.get("d", 1)),
            n_list=tuple(cfg.get("n_list", (256, 512, 1024))),
            err=err,
            repeats=int(cfg.get("repeats", 50)),
            seed=base_seed,
            tau2=float(cfg.get("tau2", 1.0)),
        )
        _write_csv(
            out / "rate_summary.csv",
            ("n", "mse"),
            [(n, _fmt(m)) for n, m in zip(report.n_list, report.mse)],
        )
        with open(out / "rate.json", "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "d": report.d,
                    "slope": None if report.degenerate else report.slope,
                    "degenerate": report.degenerate,
                },
                fh,
                indent=2,
            )
        print(
            "rate: "
            + ("degenerate (zero loss)" if report.degenerate else f"slope={report.slope:.4f}")
        )
        return EXIT_OK

    raise CliError(EXIT_BAD_DATA, f"unknown experiment {experiment!r}")


def cmd_theory(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_list = [int(x) for x in args.n_list.split(",")]
    d_list = [int(x) for x in args.d_list.split(",")]
    rows = []
    violations = 0
    for d in d_list:
        consts = asymptotics.constants(d, g0=1.0, tau2=1.0)
        tol = 0.05 if d == 1 else 0.08
        for n in n_list:
            if n < 2 * d + 1:
                rows.append((d, n, "", "", "", "", "", "", "too-small"))
                continue
            nu = float(n) ** (2 * d - 1) / (2 * d - 1)
            sigma_gamma2 = 1.0 / float(n) ** (2 * d - 1)
            ev = asymptotics.exact_variance(nu, d, n, 1.0)
            pv = asymptotics.predicted_variance(nu, consts)
            eb = asymptotics.exact_bias(nu, d, n, sigma_gamma2)
            pb = asymptotics.predicted_bias(nu, n, consts)
            rv = abs(ev - pv) / pv
            rb = abs(eb - pb) / pb
            gated = n >= args.gate_n
            flag = "ok" if gated else "pre-asymptotic"
            if gated and (rv >= tol or rb >= tol):
                flag = "VIOLATION"
                violations += 1
            rows.append((d, n, _fmt(ev), _fmt(pv), _fmt(rv), _fmt(eb), _fmt(pb), _fmt(rb), flag))
            print(
                f"d={d} n={n}: var rel.err={rv:.4f} bias rel.err={rb:.4f} [{flag}]"
            )
    _write_csv(
        out / "theory.csv",
        ("d", "n", "exact_var", "pred_var", "rel_err_var", "exact_bias", "pred_bias", "rel_err_bias", "status"),
        rows,
    )
    return EXIT_VIOLATION if violations else EXIT_OK


def _lemma_suites(seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    suites = []

    # binomial convolution identity, exact integer arithmetic
    ok = True
    for d in range(1, 7):
        for l in range(0, 2 * d + 1):
            lhs = sum(math.comb(d, t) * math.comb(d, l - t) for t in range(0, l + 1))
            ok = ok and lhs == math.comb(2 * d, l)
    suites.append(("binomial-convolution-identity", 6, math.inf if ok else -1.0, ok))

    # summation/difference round trip
    worst = 0.0
    cases = 0
    for d in range(1, 5):
        for n in (5, 17, 64):
            x = rng.standard_normal(n)
            err = np.max(np.abs(operators.apply_difference(d, operators.apply_summation(d, x)) - x))
            worst = max(worst, err / max(1.0, np.max(np.abs(x))))
            cases += 1
    suites.append(("difference-summation-roundtrip", cases, 1e-10 - worst, worst < 1e-10))

    # interior band of the penalty matrix equals the Toeplitz symbol band
    worst = 0.0
    cases = 0
    for d in range(1, 5):
        n = 4 * d + 8
        U = operators.penalty_matrix(d, n).to_dense()
        T = structured.toeplitz(structured.difference_symbol_power(d), n)
        interior = np.max(np.abs((U - T)[d : n - d, :][:, d : n - d]))
        worst = max(worst, interior)
        cases += 1
    suites.append(("penalty-interior-band", cases, 0.0 - worst, worst == 0.0))

    # Hankel singular value / trace norm bounds
    margins = []
    for fam in ("geometric", "quadratic", "random"):
        for n in (8, 16, 32):
            t = np.arange(2 * n + 1, dtype=float)
            if fam == "geometric":
                b = 0.5**t
            elif fam == "quadratic":
                b = 1.0 / np.maximum(t, 1.0) ** 2
            else:
                b = rng.standard_normal(2 * n + 1) * 0.8**t
            b[:2] = 0.0
            rep = structured.check_lemma1(structured.hankel(b, n), b)
            margins.append(min(float(rep.singular_margins.min()), rep.trace_margin))
    suites.append(("hankel-bounds", len(margins), min(margins), min(margins) >= 0.0))

    # circulant-vs-Toeplitz rank and trace-norm bounds
    margins = []
    ranks_ok = True
    for N in (1, 2, 3):
        for n in (12, 24, 32):
            half = rng.standard_normal(N + 1)
            sym = structured.symbol_from_even(half)
            rep = structured.check_lemma2(sym, n)
            ranks_ok = ranks_ok and rep.rank <= rep.rank_bound
            margins.append(rep.trace_bound - rep.trace_norm)
    ok = ranks_ok and min(margins) >= 0.0
    suites.append(("circulant-toeplitz-bounds", len(margins), min(margins), ok))

    # circulant eigendecomposition reconstruction
    worst = 0.0
    for N, n in ((1, 8), (2, 16), (3, 24)):
        half = rng.standard_normal(N + 1)
        sym = structured.symbol_from_even(half)
        C = structured.circulant(sym, n)
        recon = np.zeros((n, n), dtype=complex)
        for j in range(1, n + 1):
            e = structured.fourier_vector(j, n)
            recon += sym.evaluate(2 * math.pi * j / n) * np.outer(e, e.conj())
        worst = max(worst, float(np.max(np.abs(recon - C))))
    suites.append(("circulant-eigen-reconstruction", 3, 1e-10 - worst, worst < 1e-10))
    return suites


def cmd_lemmas(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    suites = _lemma_suites(args.seed)
    rows = []
    failures = 0
    for name, cases, margin, ok in suites:
        status = "pass" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"{name}: {cases} cases, min margin {margin:.3g} [{status}]")
        rows.append((name, cases, _fmt(margin if math.isfinite(margin) else None), status))
    _write_csv(out / "lemmas.csv", ("suite", "cases", "min_margin", "status"), rows)
    return EXIT_VIOLATION if failures else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stochtrend",
        description="Stochastic trend estimation by penalized differencing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)

    def add_data(p):
        p.add_argument("input", help="CSV file with a header row")
        p.add_argument("--value-col", default="value")
        p.add_argument("--time-col", default=None)
        p.add_argument("--criterion", choices=("aic", "bic"), default="bic")
        p.add_argument("--pmax", type=int, default=10)
        p.add_argument("--d-set", default="1,2", help="comma-separated candidate orders")

    p_fit = sub.add_parser("fit", help="fit a trend, selecting (d, nu) if not given")
    add_data(p_fit)
    add_common(p_fit)
    p_fit.add_argument("--d", type=int, default=None)
    p_fit.add_argument("--nu", type=float, default=None)
    p_fit.add_argument("--alpha", type=float, default=0.05)
    p_fit.add_argument("--select", action="store_true", help="force data-driven selection")
    p_fit.add_argument("--plot-data", default=None, help="write long-format plot data CSV here")

    p_sel = sub.add_parser("select", help="criterion surface and its argmin")
    add_data(p_sel)
    add_common(p_sel)

    p_sim = sub.add_parser("simulate", help="run a seeded simulation experiment")
    p_sim.add_argument("--config", default=None, help="JSON experiment config")
    add_common(p_sim)

    p_thy = sub.add_parser("theory", help="exact vs predicted variance/bias table")
    p_thy.add_argument("--n-list", default="512,1024,2048,4096")
    p_thy.add_argument("--d-list", default="1,2")
    p_thy.add_argument("--gate-n", type=int, default=4096,
                       help="apply tolerances only from this n upward")
    add_common(p_thy)

    p_lem = sub.add_parser("lemmas", help="structured-matrix property suites")
    add_common(p_lem)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": cmd_fit,
        "select": cmd_select,
        "simulate": cmd_simulate,
        "theory": cmd_theory,
        "lemmas": cmd_lemmas,
    }
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except UnidentifiableTrendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_DATA
    except ValueError as exc:
        msg = str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_TOO_SHORT if "too short" in msg else EXIT_BAD_DATA


if __name__ == "__main__":
    sys.exit(main())
