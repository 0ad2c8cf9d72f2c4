"""Command-line sweeps, validation and optimal-tau tables.

Usage::

    wpcn sweep CONFIG.json [-o OUT.csv] [--gnuplot] [--workers N]
    wpcn validate CONFIG.json [--workers N]
    wpcn optimal-tau CONFIG.json [-o OUT.csv] [--workers N]

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numeric
failure.

A config is a JSON object with the keys ``axis``, ``values``, ``base``,
``modes``, ``estimators`` and ``mc``; only ``axis`` and ``values`` are
required.  ``base.n_antennas``, ``base.tx_power_dbm`` and ``base.tau`` may
be lists, in which case every combination is swept as a separate series.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import itertools
import json
import logging
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from wpcn import analytic, montecarlo, optimize
from wpcn.errors import ConfigError, DomainError, LowSnrWarning, NumericFailure, WpcnError
from wpcn.model import LinkBudget, SystemParams, derive, omega_from_link

__all__ = [
    "AXES",
    "ESTIMATORS",
    "SweepSpec",
    "SweepRow",
    "load_config",
    "run_sweep",
    "run_optimal_tau",
    "validate",
    "write_csv",
    "gnuplot_script",
    "main",
]

log = logging.getLogger("wpcn")

AXES = ("tx_power_dbm", "n_antennas", "tau")
ESTIMATORS = ("exact", "approx", "asymptotic", "monte_carlo", "optimal_tau_closed",
              "optimal_tau_search")
SERIES_FIELDS = ("n_antennas", "tx_power_dbm", "tau")
CSV_FIELDS = ("mode", "axis_name", "axis_value", "estimator", "N", "P_dbm", "tau", "R",
              "omega", "gamma_bar", "value", "stderr", "trials", "seed")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_TOP_KEYS = {"axis", "values", "base", "modes", "estimators", "mc"}
_BASE_KEYS = {"n_antennas", "tx_power_dbm", "efficiency", "noise_power_dbm", "rate", "tau",
              "link"}
_LINK_KEYS = {"distance_m", "path_loss_exponent"}
_MC_KEYS = {"trials", "seed", "batch_size"}

# Defaults for the operating-point fields a config may omit.
_BASE_DEFAULTS = {"n_antennas": 2, "tx_power_dbm": 30.0, "efficiency": 0.5,
                  "noise_power_dbm": -80.0, "rate": 2.0, "tau": 0.5}
_MC_DEFAULTS = {"trials": 100_000, "seed": 0}
SEARCH_TOL = 1e-4


@dataclass(frozen=True)
class SweepSpec:
    """A validated sweep: one axis, optional series, modes and estimators."""

    axis: str
    values: tuple
    base: SystemParams
    link: LinkBudget
    series: tuple = ()          # ((field, (v1, v2, ...)), ...)
    modes: tuple = analytic.MODES
    estimators: tuple = ("exact",)
    mc: montecarlo.McConfig = montecarlo.McConfig(_MC_DEFAULTS["trials"])

    def points(self):
        """Operating points in output order: axis value, then series combination."""
        names = [name for name, _ in self.series]
        combos = list(itertools.product(*[vals for _, vals in self.series]))
        out = []
        for v in self.values:
            for combo in combos:
                changes = dict(zip(names, combo))
                changes[self.axis] = v
                out.append((v, self.base.replace(**changes)))
        return out


@dataclass(frozen=True)
class SweepRow:
    mode: str
    axis_name: str
    axis_value: float
    estimator: str
    N: int
    P_dbm: float
    tau: float
    R: float
    omega: float
    gamma_bar: float
    value: float | str
    stderr: float | None = None
    trials: int | None = None
    seed: int | None = None


def _fail(msg):
    raise ConfigError(msg)


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        _fail(f"{where} must be a JSON object")
    for key in obj:
        if key not in allowed:
            _fail(f"unknown key {where}.{key}" if where else f"unknown key {key!r}")


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{key} must be a number")
    return value


def load_config(source) -> SweepSpec:
    """Parse and validate a sweep config from a path or a text stream.

    Raises
    ------
    ConfigError
        On malformed JSON, unknown keys or invariant violations; the message
        names the offending key.
    """
    try:
        if hasattr(source, "read"):
            doc = json.load(source)
        else:
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None

    _check_keys(doc, _TOP_KEYS, "")
    if "axis" not in doc:
        _fail("missing key 'axis'")
    if "values" not in doc:
        _fail("missing key 'values'")
    axis = doc["axis"]
    if axis not in AXES:
        _fail(f"axis must be one of {', '.join(AXES)}")
    values = doc["values"]
    if not isinstance(values, list) or not values:
        _fail("values non-empty")
    values = tuple(_number(v, "values") for v in values)
    if any(b <= a for a, b in zip(values, values[1:])):
        _fail("values must be strictly increasing")

    base_doc = doc.get("base", {})
    _check_keys(base_doc, _BASE_KEYS, "base")
    link_doc = base_doc.get("link", {})
    _check_keys(link_doc, _LINK_KEYS, "base.link")
    try:
        link = LinkBudget(**{k: _number(v, f"base.link.{k}") for k, v in link_doc.items()})
    except DomainError as exc:
        _fail(f"base.link: {exc}")

    fields = dict(_BASE_DEFAULTS)
    series = []
    for key, raw in base_doc.items():
        if key == "link":
            continue
        if isinstance(raw, list):
            if key not in SERIES_FIELDS:
                _fail(f"base.{key} cannot be a list")
            if not raw:
                _fail(f"base.{key} list must be non-empty")
            vals = tuple(_number(v, f"base.{key}") for v in raw)
            fields[key] = vals[0]
            if key != axis:
                series.append((key, vals))
        else:
            fields[key] = _number(raw, f"base.{key}")
    series.sort(key=lambda item: SERIES_FIELDS.index(item[0]))

    try:
        base = SystemParams(omega=omega_from_link(link), **fields)
        for name, vals in series:
            for v in vals:
                base.replace(**{name: v})
        for v in values:
            base.replace(**{axis: v})
    except DomainError as exc:
        _fail(str(exc))

    modes = doc.get("modes", list(analytic.MODES))
    if not isinstance(modes, list) or not modes or any(m not in analytic.MODES for m in modes):
        _fail(f"modes must be a non-empty subset of {', '.join(analytic.MODES)}")
    estimators = doc.get("estimators", ["exact"])
    if not isinstance(estimators, list) or not estimators \
            or any(e not in ESTIMATORS for e in estimators):
        _fail(f"estimators must be a non-empty subset of {', '.join(ESTIMATORS)}")

    mc_doc = doc.get("mc", {})
    _check_keys(mc_doc, _MC_KEYS, "mc")
    mc_fields = dict(_MC_DEFAULTS)
    mc_fields.update(mc_doc)
    for key, v in mc_fields.items():
        if isinstance(v, bool) or not isinstance(v, int):
            _fail(f"mc.{key} must be an integer")
    mc = montecarlo.McConfig(**mc_fields)

    return SweepSpec(axis, values, base, link, tuple(series), tuple(dict.fromkeys(modes)),
                     tuple(dict.fromkeys(estimators)), mc)


def _evaluate(mode, estimator, params, mc):
    """Return ``(value, stderr, trials)`` for one row."""
    if estimator == "exact":
        if mode == "delay_limited":
            return analytic.throughput_delay_limited(params), None, None
        return analytic.throughput_delay_tolerant(params), None, None
    if estimator == "approx":
        if mode == "delay_tolerant":
            raise DomainError("no incomplete-gamma approximation for delay_tolerant")
        return analytic.throughput_delay_limited_approx(params), None, None
    if estimator == "asymptotic":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowSnrWarning)
            if mode == "delay_limited":
                return analytic.throughput_delay_limited_asymptotic(params), None, None
            return analytic.throughput_delay_tolerant_asymptotic(params), None, None
    if estimator == "monte_carlo":
        est = montecarlo.estimate_throughput(mode, params, mc)
        return est.mean, est.stderr, est.trials
    if estimator == "optimal_tau_closed":
        if mode == "delay_limited":
            return optimize.optimal_tau_limited_highsnr(params).tau, None, None
        return optimize.optimal_tau_tolerant_highsnr(params).tau, None, None
    if estimator == "optimal_tau_search":
        return optimize.optimal_tau_search(mode, params, SEARCH_TOL).tau, None, None
    raise DomainError(f"unknown estimator {estimator!r}")


def _rows_for_point(spec, axis_value, params, estimators):
    d = derive(params)
    rows = []
    for mode in spec.modes:
        for estimator in estimators:
            try:
                value, stderr, trials = _evaluate(mode, estimator, params, spec.mc)
            except WpcnError as exc:
                log.warning("%s/%s at %s=%r: %s", mode, estimator, spec.axis, axis_value, exc)
                value, stderr, trials = "error", None, None
            rows.append(SweepRow(mode, spec.axis, axis_value, estimator, params.n_antennas,
                                 params.tx_power_dbm, params.tau, params.rate, params.omega,
                                 d.gamma_bar, value, stderr, trials, spec.mc.seed))
    return rows


def _run(spec, estimators, workers):
    points = spec.points()

    def work(item):
        return _rows_for_point(spec, item[0], item[1], estimators)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(work, points))
    else:
        chunks = [work(p) for p in points]
    return [row for chunk in chunks for row in chunk]


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Evaluate every (axis value, series, mode, estimator) combination.

    Rows come back in a fixed order regardless of ``workers``.  Evaluation
    errors become rows whose value is ``"error"``.
    """
    return _run(spec, spec.estimators, workers)


def run_optimal_tau(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Closed-form and searched optimal tau at every sweep point."""
    chosen = tuple(e for e in spec.estimators if e.startswith("optimal_tau"))
    return _run(spec, chosen or ("optimal_tau_closed", "optimal_tau_search"), workers)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return repr(float(value))


def write_csv(rows, stream) -> None:
    """RFC 4180 CSV with a header row and shortest round-trip floats."""
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, f)) for f in CSV_FIELDS])


def gnuplot_script(spec: SweepSpec, csv_path: str) -> str:
    """Companion gnuplot script drawing one curve per mode/estimator/series."""
    col = {name: i + 1 for i, name in enumerate(CSV_FIELDS)}
    series_cols = {"n_antennas": "N", "tx_power_dbm": "P_dbm", "tau": "tau"}
    names = [name for name, _ in spec.series]
    combos = list(itertools.product(*[vals for _, vals in spec.series]))
    lines = [
        "# generated by wpcn sweep --gnuplot",
        'set datafile separator ","',
        "set key outside right",
        f'set xlabel "{spec.axis}"',
        'set ylabel "value"',
        "set grid",
    ]
    plots = []
    for mode in spec.modes:
        for est in spec.estimators:
            for combo in combos:
                conds = [f'strcol({col["mode"]}) eq "{mode}"',
                         f'strcol({col["estimator"]}) eq "{est}"']
                label = [mode, est]
                for name, v in zip(names, combo):
                    conds.append(f"abs(${col[series_cols[name]]} - ({v!r})) < 1e-9")
                    label.append(f"{series_cols[name]}={v}")
                cond = " && ".join(conds)
                plots.append(f'"{csv_path}" every ::1 using {col["axis_value"]}:'
                             f'(({cond}) ? ${col["value"]} : 1/0) with linespoints '
                             f'title "{" ".join(label)}"')
    lines.append("plot \\\n    " + ", \\\n    ".join(plots))
    return "\n".join(lines) + "\n"


def validate(spec: SweepSpec, workers: int = 1) -> tuple[bool, float, str]:
    """Compare the exact throughput with Monte Carlo at every sweep point.

    Returns
    -------
    ok, max_abs_z, report
        ``ok`` is True iff every ``|z| <= 4``.

    Raises
    ------
    ConfigError
        If ``spec`` lacks ``monte_carlo`` or ``exact``.
    """
    if "monte_carlo" not in spec.estimators or "exact" not in spec.estimators:
        raise ConfigError("validate needs both the exact and monte_carlo estimators")

    def work(item):
        axis_value, params = item
        out = []
        for mode in spec.modes:
            if mode == "delay_limited":
                exact = analytic.throughput_delay_limited(params)
            else:
                exact = analytic.throughput_delay_tolerant(params)
            est = montecarlo.estimate_throughput(mode, params, spec.mc)
            z = montecarlo.z_score(exact, est, mode, params)
            out.append((mode, params, exact, est, z))
        return out

    points = spec.points()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(work, points) for r in chunk]
    else:
        results = [r for p in points for r in work(p)]

    buf = io.StringIO()
    buf.write(f"{'mode':<15}{'N':>4}{'P_dbm':>8}{'tau':>7}{'exact':>14}{'mc':>14}"
              f"{'stderr':>12}{'z':>9}\n")
    max_z = 0.0
    for mode, p, exact, est, z in results:
        max_z = max(max_z, abs(z))
        flag = "" if abs(z) <= 4.0 else "  FAIL"
        buf.write(f"{mode:<15}{p.n_antennas:>4}{p.tx_power_dbm:>8g}{p.tau:>7g}{exact:>14.6g}"
                  f"{est.mean:>14.6g}{est.stderr:>12.3g}{z:>9.2f}{flag}\n")
    ok = max_z <= 4.0
    buf.write(f"max |z| = {max_z:.3f} over {len(results)} comparisons "
              f"({est.trials if results else 0} trials, seed {spec.mc.seed}): "
              f"{'PASS' if ok else 'FAIL'}\n")
    return ok, max_z, buf.getvalue()


def _parser():
    parser = argparse.ArgumentParser(prog="wpcn", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sweep", help="evaluate a parameter sweep and emit CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.add_argument("--gnuplot", action="store_true",
                   help="also write OUTPUT with a .gp suffix plotting the CSV")
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("validate", help="check exact throughput against Monte Carlo")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("optimal-tau", help="closed-form vs searched optimal tau as CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _emit(rows, output):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="wpcn: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be positive")
        spec = load_config(args.config)
        spec = dataclasses.replace(spec, mc=dataclasses.replace(spec.mc, workers=args.workers))
        if args.command == "sweep":
            if args.gnuplot and not args.output:
                raise ConfigError("--gnuplot needs -o/--output")
            _emit(run_sweep(spec, args.workers), args.output)
            if args.gnuplot:
                script = Path(args.output).with_suffix(".gp")
                script.write_text(gnuplot_script(spec, Path(args.output).name), encoding="utf-8")
            return EXIT_OK
        if args.command == "optimal-tau":
            _emit(run_optimal_tau(spec, args.workers), args.output)
            return EXIT_OK
        ok, _, report = validate(spec, args.workers)
        sys.stdout.write(report)
        return EXIT_OK if ok else EXIT_VALIDATION
    except ConfigError as exc:
        print(f"wpcn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, ArithmeticError) as exc:
        print(f"wpcn: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WpcnError as exc:
        print(f"wpcn: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
