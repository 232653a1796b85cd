"""Config-driven experiment runner.

Subcommands: run (one convergence study -> report.json, series.csv,
plot.svg), sweep (Cartesian product of config overrides), oracle (the
brute-force references), and check-spaces (the randomized norm audits).
Configs are flat key = value text with one dotted nesting level; JSON
files are accepted as-is.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import checks, oracle
from .bbm import CSV_HEADER, ConvergenceReport, convergence_study
from .field import function_from_record, sample
from .geometry import (
    Box,
    Disk,
    Interval,
    Polygon,
    enclosing_radius,
    sample_quadrature,
)
from .mollifiers import bump_family, fractional_family
from .spaces import (
    BesovBourgainMorrey,
    ConstantWeight,
    HerzGlobal,
    HerzLocal,
    Lebesgue,
    Lorentz,
    MixedLebesgue,
    Morrey,
    OrliczSlice,
    OrliczSpace,
    PowerLogOrlicz,
    PowerOrlicz,
    PowerWeight,
    VariableLebesgue,
    WeightedLebesgue,
    orlicz_from_csv,
    weight_from_csv,
)

__all__ = ["main", "parse_config", "run_experiment", "ConfigError"]


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config error in {field!r}: {message}")
        self.field = field


def _parse_atom(text: str):
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_value(text: str):
    text = text.strip()
    if ";" in text:
        return [[_parse_atom(a) for a in chunk.split(",")]
                for chunk in text.split(";") if chunk.strip()]
    if "," in text:
        return [_parse_atom(a) for a in text.split(",")]
    return _parse_atom(text)


def parse_config(path) -> dict:
    """Read a config file: JSON if it starts with '{', else key = value."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)
    config: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}", f"expected key = value: {body!r}")
        key, value = body.split("=", 1)
        key = key.strip()
        parsed = _parse_value(value)
        if "." in key:
            head, tail = key.split(".", 1)
            config.setdefault(head, {})[tail] = parsed
        else:
            config[key] = parsed
    return config


def set_config_key(config: dict, key: str, value) -> None:
    if "." in key:
        head, tail = key.split(".", 1)
        if head not in config or tail not in config[head]:
            raise ConfigError(key, "override references a missing key")
        config[head][tail] = value
    else:
        if key not in config:
            raise ConfigError(key, "override references a missing key")
        config[key] = value


def _require(record: dict, field: str, context: str):
    if field not in record:
        raise ConfigError(f"{context}.{field}", "missing required field")
    return record[field]


def build_domain(record: dict):
    kind = _require(record, "kind", "domain")
    try:
        if kind == "interval":
            return Interval(record["a"], record["b"])
        if kind == "box":
            lo, hi = record["lo"], record["hi"]
            lo = lo if isinstance(lo, list) else [lo]
            hi = hi if isinstance(hi, list) else [hi]
            return Box(tuple(lo), tuple(hi))
        if kind == "disk":
            return Disk(tuple(record["center"]), record["radius"])
        if kind == "polygon":
            return Polygon(tuple(tuple(v) for v in record["vertices"]))
    except KeyError as exc:
        raise ConfigError(f"domain.{exc.args[0]}", "missing required field")
    except ValueError as exc:
        raise ConfigError("domain", str(exc))
    raise ConfigError("domain.kind", f"unknown kind {kind!r}")


def _build_orlicz(record, context: str):
    kind = record.get("phi", "power")
    if kind == "power":
        return PowerOrlicz(record.get("phi_q", 2.0))
    if kind == "plog":
        return PowerLogOrlicz(record.get("phi_q", 2.0))
    if kind == "table":
        return orlicz_from_csv(_require(record, "phi_table", context))
    raise ConfigError(f"{context}.phi", f"unknown Orlicz kind {kind!r}")


def _build_weight(record, context: str, dimension: int):
    kind = record.get("weight", "constant")
    if kind == "constant":
        return ConstantWeight(record.get("weight_c", 1.0))
    if kind == "power":
        return PowerWeight(_require(record, "weight_a", context))
    if kind == "table":
        return weight_from_csv(_require(record, "weight_table", context),
                               dimension)
    raise ConfigError(f"{context}.weight", f"unknown weight kind {kind!r}")


def build_space(record: dict, dimension: int):
    kind = _require(record, "kind", "space")
    try:
        if kind == "lebesgue":
            return Lebesgue(_require(record, "q", "space"))
        if kind == "weighted":
            return WeightedLebesgue(
                _require(record, "q", "space"),
                _build_weight(record, "space", dimension),
            )
        if kind == "lorentz":
            return Lorentz(_require(record, "r", "space"),
                           _require(record, "tau", "space"))
        if kind == "orlicz":
            return OrliczSpace(_build_orlicz(record, "space"))
        if kind == "morrey":
            return Morrey(_require(record, "alpha", "space"),
                          _require(record, "r", "space"))
        if kind == "variable":
            base = record.get("base", 2.0)
            slope = record.get("slope", 0.0)
            if slope == 0.0:
                return VariableLebesgue(float(base))
            return VariableLebesgue(
                lambda pts, b=base, s=slope: b + s * pts[:, 0])
        if kind == "mixed":
            rvec = _require(record, "rvec", "space")
            rvec = rvec if isinstance(rvec, list) else [rvec]
            return MixedLebesgue(tuple(rvec))
        if kind == "herz_local":
            xi = record.get("xi", [0.0] * dimension)
            xi = xi if isinstance(xi, list) else [xi]
            return HerzLocal(_require(record, "p", "space"),
                             _require(record, "q", "space"),
                             record.get("a", 0.0), tuple(xi))
        if kind == "herz_global":
            return HerzGlobal(_require(record, "p", "space"),
                              _require(record, "q", "space"),
                              record.get("a", 0.0))
        if kind == "bbmorrey":
            return BesovBourgainMorrey(
                _require(record, "q", "space"),
                _require(record, "p", "space"),
                _require(record, "r", "space"),
                _require(record, "tau", "space"),
                record.get("j_min", -8),
                record.get("j_max", 8),
            )
        if kind == "orlicz_slice":
            return OrliczSlice(_build_orlicz(record, "space"),
                               _require(record, "r", "space"),
                               _require(record, "t", "space"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("space", str(exc))
    raise ConfigError("space.kind", f"unknown kind {kind!r}")


def build_schedule(record: dict) -> list:
    if "values" in record:
        values = record["values"]
        return [float(v) for v in (values if isinstance(values, list)
                                   else [values])]
    start = _require(record, "nu_start", "schedule")
    ratio = _require(record, "ratio", "schedule")
    count = _require(record, "count", "schedule")
    return [float(start) * float(ratio) ** k for k in range(int(count))]


def run_experiment(config: dict, out_dir) -> ConvergenceReport:
    """Build the experiment from a parsed config, run it, emit artifacts."""
    for field in ("domain", "function", "space", "schedule", "p", "h"):
        if field not in config:
            raise ConfigError(field, "missing required field")
    domain = build_domain(config["domain"])
    n = domain.dimension
    p = float(config["p"])
    mode = config.get("mode", "rdati")
    spec = build_space(config["space"], n)
    schedule = build_schedule(config["schedule"])
    h = float(config["h"])
    stride = int(config.get("stride", 1))
    scheme = config.get("scheme", "tensor-midpoint")

    grid = sample_quadrature(domain, h, scheme)
    fn = function_from_record(config["function"], n)
    if fn.dimension != n:
        raise ConfigError("function", "function dimension does not match domain")
    field_data = sample(fn, grid)

    family = None
    if mode == "rdati":
        fam_record = config.get("family")
        if fam_record is None:
            raise ConfigError("family", "missing required field")
        fam_kind = _require(fam_record, "kind", "family")
        if fam_kind == "bump":
            family = bump_family(n)
        elif fam_kind == "fractional":
            family = fractional_family(p, enclosing_radius(domain), n)
        else:
            raise ConfigError("family.kind", f"unknown kind {fam_kind!r}")
        nu_max = family.nu_max
        if any(not 0.0 < nu < nu_max for nu in schedule):
            raise ConfigError(
                "schedule",
                f"scale outside the admissible range (0, min{{n/p, 1}}) "
                f"= (0, {nu_max:g}) for this family",
            )
    elif mode == "gagliardo":
        if any(not 0.0 < s < 1.0 for s in schedule):
            raise ConfigError("schedule", "s values must lie in (0, 1)")
    else:
        raise ConfigError("mode", f"unknown mode {mode!r}")

    report = convergence_study(
        field_data, p, spec, family, schedule, mode=mode,
        tolerance=float(config.get("tolerance", 0.05)), stride=stride,
    )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    )
    _write_series_csv(out / "series.csv", report)
    _write_plot_svg(out / "plot.svg", report)
    return report


def _write_series_csv(path: Path, report: ConvergenceReport) -> None:
    lines = [CSV_HEADER]
    for param, value, target, ratio in report.csv_rows():
        lines.append(f"{param!r},{value!r},{target!r},{ratio!r}".replace("'", ""))
    path.write_text("\n".join(lines) + "\n")


def _write_plot_svg(path: Path, report: ConvergenceReport,
                    width: int = 640, height: int = 420) -> None:
    """Hand-rolled SVG: functional values and target vs scale, log x."""
    xs = np.log10(np.asarray(report.scales, dtype=float))
    ys = np.asarray(report.functional_values, dtype=float)
    y_all = list(ys) + ([report.target] if report.target else [])
    y_lo, y_hi = min(y_all), max(y_all)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 50
    x_lo, x_hi = xs.min(), xs.max()
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    def sx(x):
        return pad + (x - x_lo) / (x_hi - x_lo) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y_lo) / (y_hi - y_lo) * (height - 2 * pad)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" '
        'stroke-width="2"/>',
    ]
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     'fill="#1f77b4"/>')
    if report.target:
        ty = sy(report.target)
        parts.append(
            f'<line x1="{pad}" y1="{ty:.2f}" x2="{width - pad}" '
            f'y2="{ty:.2f}" stroke="#d62728" stroke-dasharray="6,4"/>'
        )
    parts.append(
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">log10 scale (mode={report.mode})</text>'
    )
    parts.append(
        f'<text x="16" y="{height / 2:.0f}" font-size="13" '
        f'transform="rotate(-90 16 {height / 2:.0f})" '
        'text-anchor="middle">functional value</text>'
    )
    parts.append(
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" '
        f'font-size="13">{report.spec_label}, verdict {report.verdict}</text>'
    )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def _cmd_run(args) -> int:
    try:
        config = parse_config(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        if args.stride is not None:
            config["stride"] = args.stride
        out_dir = args.out
        report = run_experiment(config, out_dir)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"verdict: {report.verdict} "
          f"(limit {report.extrapolated_limit}, target {report.target})")
    if report.verdict == "inconclusive":
        return 2
    expectation = config.get("expectation")
    if expectation is not None and expectation != report.verdict:
        print(f"expectation {expectation!r} not met", file=sys.stderr)
        return 1
    return 0


def _run_sweep_case(payload) -> dict:
    config, out_dir = payload
    report = run_experiment(config, out_dir)
    return report.to_dict()


def _cmd_sweep(args) -> int:
    try:
        base = parse_config(args.config)
        overrides = []
        for item in args.set or []:
            if "=" not in item:
                raise ConfigError("--set", f"expected key=v1,v2,... got {item!r}")
            key, values = item.split("=", 1)
            parsed = _parse_value(values)
            if not isinstance(parsed, list):
                parsed = [parsed]
            overrides.append((key.strip(), parsed))
        combos = list(itertools.product(*[vals for _, vals in overrides])) \
            if overrides else [()]
        out_root = Path(args.out)
        out_root.mkdir(parents=True, exist_ok=True)
        payloads = []
        for idx, combo in enumerate(combos):
            config = json.loads(json.dumps(base))
            for (key, _), value in zip(overrides, combo):
                set_config_key(config, key, value)
            payloads.append((config, out_root / f"run_{idx:03d}"))
        jobs = args.jobs
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                reports = list(pool.map(_run_sweep_case, payloads))
        else:
            reports = [_run_sweep_case(p) for p in payloads]
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    header = ["run"] + [key for key, _ in overrides] \
        + ["verdict", "extrapolated_limit", "relative_error"]
    lines = [",".join(header)]
    for idx, (combo, report) in enumerate(zip(combos, reports)):
        row = [f"run_{idx:03d}"] + [str(v) for v in combo] + [
            report["verdict"],
            str(report["extrapolated_limit"]),
            str(report["relative_error"]),
        ]
        lines.append(",".join(row))
    (out_root / "summary.csv").write_text("\n".join(lines) + "\n")
    print(f"{len(reports)} runs -> {out_root}/summary.csv")
    return 0


def _cmd_oracle(args) -> int:
    if args.op == "sphere-moment":
        value = oracle.mc_sphere_moment(args.p, args.n, args.samples,
                                        args.seed)
        print(repr(value))
        return 0
    if args.op == "dense-1d":
        fn = function_from_record({"kind": args.function}, 1)
        value = oracle.dense_1d_functional(
            fn, Interval(args.a, args.b), args.p, args.q, args.scale,
            args.resolution, family_kind=args.family, mode=args.mode,
        )
        print(repr(value))
        return 0
    if args.op == "rearrangement":
        data = np.loadtxt(args.input, delimiter=",", ndmin=2)
        step = oracle.rearrangement_oracle(data[:, 0], data[:, 1])
        ts = np.cumsum(data[:, 1])
        for t_left, t_right in zip(np.concatenate([[0.0], ts[:-1]]), ts):
            print(f"{t_left!r},{t_right!r},{step(0.5 * (t_left + t_right))!r}")
        return 0
    print(f"unknown oracle op {args.op!r}", file=sys.stderr)
    return 1


def _cmd_check_spaces(args) -> int:
    results = checks.run_axiom_suites(cases=args.cases, seed=args.seed)
    results += checks.run_reduction_suite(cases=min(args.cases, 100),
                                          seed=args.seed)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name}: {res.detail}")
        failed += not res.passed
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bbmlab",
        description="Nonlocal-functional workbench on bounded domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--stride", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="Cartesian product of overrides")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default="sweep")
    p_sweep.add_argument("--set", action="append", metavar="KEY=V1,V2,...")
    p_sweep.add_argument(
        "--jobs", type=int,
        default=int(os.environ.get("BBMLAB_JOBS", "1")),
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="brute-force reference values")
    p_oracle.add_argument("op", choices=["sphere-moment", "dense-1d",
                                         "rearrangement"])
    p_oracle.add_argument("--p", type=float, default=2.0)
    p_oracle.add_argument("--n", type=int, default=2)
    p_oracle.add_argument("--samples", type=int, default=1_000_000)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--function", default="linear")
    p_oracle.add_argument("--a", type=float, default=0.0)
    p_oracle.add_argument("--b", type=float, default=1.0)
    p_oracle.add_argument("--q", type=float, default=2.0)
    p_oracle.add_argument("--scale", type=float, default=0.1)
    p_oracle.add_argument("--resolution", type=float, default=1e-4)
    p_oracle.add_argument("--family", default="bump")
    p_oracle.add_argument("--mode", default="rdati")
    p_oracle.add_argument("--input", help="CSV of value,weight rows for "
                                          "the rearrangement oracle")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_check = sub.add_parser("check-spaces", help="randomized norm audits")
    p_check.add_argument("--cases", type=int, default=200)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(func=_cmd_check_spaces)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
