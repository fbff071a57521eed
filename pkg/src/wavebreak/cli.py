"""Command-line front end: ``simulate``, ``detect``, ``experiment`` and ``gamma-table``.

Exit status is 0 on success, 2 for configuration errors, 3 for data errors,
4 for numerical failures and 5 for file-system errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, NumericalError, WavebreakError
from .experiment import SCENARIOS, get_scenario, run_experiment
from .inference import GammaTable
from .pipeline import AnalysisConfig, analyze, make_gamma_table
from .result import build_document, dumps, rows_to_csv, scale_plot_rows, series_plot_rows, validate_document
from .synth import gen_piecewise, segment_bounds
from .wvar import ScaleGrid

EXIT_CODES = {"config": 2, "data": 3, "numerical": 4}
EXIT_IO = 5

DEFAULTS = {
    "regime": "lrd",
    "m": 0,
    "kappa": 0.05,
    "multipliers": [1, 2, 3, 4, 5],
    "wavelet": "poly4",
    "min_seg": None,
    "grid_step": None,
    "max_trim": 0.25,
    "gamma_method": None,
    "gamma_R": 400,
    "seed": 0,
    "gamma_table": None,
}


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------

def read_series(path) -> np.ndarray:
    """Read a single-column CSV with header ``x``."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not UTF-8 text") from exc
    if not rows or [c.strip() for c in rows[0]] != ["x"]:
        raise DataError(f"{path}: expected a header line 'x'")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 1:
            raise DataError(f"{path}:{lineno}: expected one column, got {len(row)}")
        try:
            values.append(float(row[0]))
        except ValueError:
            raise DataError(f"{path}:{lineno}: not a number: {row[0]!r}") from None
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise DataError(f"{path}: need at least two samples")
    if not np.isfinite(x).all():
        raise DataError(f"{path}: non-finite values")
    return x


def write_series(values, path) -> None:
    lines = ["x"] + [repr(float(v)) for v in values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_scales(text: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--scales expects comma-separated numbers, got {text!r}") from None
    return [int(v) if v == int(v) else v for v in vals]


def _open_gamma(cfg: AnalysisConfig, grid: ScaleGrid, path) -> tuple:
    """Gamma table for *cfg*, merged with the saved file if there is one."""
    table = make_gamma_table(cfg, grid)
    explicit = path is not None
    path = Path(path) if explicit else table.default_path()
    if path.exists():
        table.load(path, strict=explicit)
    return table, path, len(table._cache)


def _persist_gamma(table: GammaTable, path: Path, before: int, notes: list) -> None:
    if len(table._cache) == before:
        return
    try:
        table.save(path)
    except OSError as exc:
        notes.append(f"could not save Gamma table to {path}: {exc}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _scenario_from_args(args):
    return get_scenario(args.scenario, getattr(args, "spec", None))


def cmd_simulate(args) -> int:
    if args.output is None:
        raise ConfigError("simulate needs --output")
    scenario = _scenario_from_args(args)
    seed = 0 if args.seed is None else args.seed
    spec = replace(scenario.spec(seed, args.n), level_pasting=args.level_pasting)
    ts = gen_piecewise(spec)
    out = Path(args.output)
    write_series(ts.values, out)
    bounds = segment_bounds(spec.n_samples, spec.change_fractions)
    truth = {
        "scenario": scenario.name,
        "regime": scenario.regime,
        "seed": seed,
        "n": spec.n_samples,
        "tau": list(spec.change_fractions),
        "k": [int(a) for a, _ in bounds[1:]],
        "param_name": scenario.param_name,
        "params": list(scenario.true_params),
        "spec": spec.to_dict(),
    }
    out.with_suffix(".json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {out} ({ts.values.size} samples) and {out.with_suffix('.json')}")
    return 0


def _merged_config(args) -> dict:
    """Explicit flags override the echo of ``--config``, which overrides defaults."""
    base = dict(DEFAULTS)
    if args.config:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        echo = doc.get("config", doc)
        unknown = set(echo) - set(DEFAULTS) - {"input"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        base.update(echo)
    flags = {
        "input": args.input, "regime": args.regime, "m": args.m, "kappa": args.kappa,
        "multipliers": parse_scales(args.scales) if args.scales else None, "wavelet": args.wavelet,
        "min_seg": args.min_seg, "max_trim": args.max_trim, "gamma_method": args.gamma_method,
        "gamma_R": args.replicates, "seed": args.seed, "gamma_table": args.gamma_table,
    }
    base.update({k: v for k, v in flags.items() if v is not None})
    if args.no_trim_cap:
        base["max_trim"] = None
    return base


def cmd_detect(args) -> int:
    if args.penalty is not None:
        raise ConfigError("--penalty is reserved; selecting m by penalization is not implemented")
    echo = _merged_config(args)
    if not echo.get("input"):
        raise ConfigError("detect needs --input")
    x = read_series(echo["input"])
    cfg = AnalysisConfig(m=echo["m"], regime=echo["regime"], kappa=echo["kappa"],
                         multipliers=tuple(echo["multipliers"]), wavelet=echo["wavelet"], min_seg=echo["min_seg"],
                         grid_step=echo["grid_step"], max_trim=echo["max_trim"],
                         gamma_method=echo["gamma_method"], gamma_R=echo["gamma_R"], gamma_seed=echo["seed"])
    if cfg.regime not in ("lrd", "fbm"):
        raise ConfigError(f"unknown regime {cfg.regime!r}")
    grid = ScaleGrid.for_length(x.size - 1, cfg.regime, cfg.kappa, cfg.multipliers)
    table, gpath, before = _open_gamma(cfg, grid, echo["gamma_table"])
    analysis = analyze(x, cfg, table, grid)
    _persist_gamma(table, gpath, before, analysis.warnings)
    doc = build_document(analysis, echo)
    validate_document(doc)
    text = dumps(doc)
    if args.output is None:
        sys.stdout.write(text)
    else:
        out = Path(args.output)
        out.write_text(text, encoding="utf-8")
        prefix = Path(args.plot_prefix) if args.plot_prefix else out.with_suffix("")
        Path(f"{prefix}.scales.csv").write_text(rows_to_csv(scale_plot_rows(doc)), encoding="utf-8")
        Path(f"{prefix}.series.csv").write_text(rows_to_csv(series_plot_rows(x, doc)), encoding="utf-8")
        _print_summary(doc)
    return 0


def _print_summary(doc: dict) -> None:
    print(f"N={doc['n']}  k_hat={doc['k_hat']}  tau_hat={[round(t, 4) for t in doc['tau_hat']]}")
    for j, s in enumerate(doc["segments"]):
        if not s["usable"]:
            print(f"  segment {j} [{s['start']}, {s['end']}): unusable ({s['reason']})")
            continue
        lo, hi = s["fgls"]["ci_param"]
        fmt = lambda v: "nan" if v is None else f"{v:.4f}"
        print(f"  segment {j} [{s['start']}, {s['end']}): {s['param_name']} ols={fmt(s['ols']['param'])} "
              f"fgls={fmt(s['fgls']['param'])} CI=[{fmt(lo)}, {fmt(hi)}] T={fmt(s['T'])} p={fmt(s['p_value'])}")
    for w in doc["warnings"]:
        print(f"  warning: {w}")


def cmd_experiment(args) -> int:
    scenario = _scenario_from_args(args)
    n = args.n or scenario.n
    overrides = {}
    if args.kappa is not None:
        overrides["kappa"] = args.kappa
    if args.scales:
        overrides["multipliers"] = tuple(parse_scales(args.scales))
    if args.min_seg is not None:
        overrides["min_seg"] = args.min_seg
    if args.gamma_method:
        overrides["gamma_method"] = args.gamma_method
    if args.wavelet:
        overrides["wavelet"] = args.wavelet
    cfg = scenario.config(**overrides)
    grid = ScaleGrid.for_length(n, cfg.regime, cfg.kappa, cfg.multipliers)
    notes: list = []
    table, gpath, before = _open_gamma(cfg, grid, args.gamma_table)
    replicates = 50 if args.replicates is None else args.replicates
    res = run_experiment(scenario, replicates, 0 if args.seed is None else args.seed, n, cfg, args.jobs,
                         gamma=table)
    _persist_gamma(table, gpath, before, notes)
    if not res.rows:
        raise NumericalError(f"all {replicates} replicates failed; first error: {res.failures[0]['error']}")
    text = res.to_text("ols") + "\n\n" + res.to_text("fgls") + "\n"
    if args.output:
        out = Path(args.output)
        out.write_text(res.to_csv(), encoding="utf-8")
        out.with_suffix(".txt").write_text(text, encoding="utf-8")
        out.with_suffix(".replicates.csv").write_text(res.replicates_csv(), encoding="utf-8")
    sys.stdout.write(text)
    if res.failures:
        print(f"{len(res.failures)} of {replicates} replicates failed", file=sys.stderr)
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    return 0


def cmd_gamma_table(args) -> int:
    if args.n is None:
        raise ConfigError("gamma-table needs --n (series length defining the scales)")
    regime = args.regime or "fbm"
    kappa = 0.05 if args.kappa is None else args.kappa
    mult = tuple(parse_scales(args.scales)) if args.scales else (1, 2, 3, 4, 5)
    grid = ScaleGrid.for_length(args.n, regime, kappa, mult)
    table = GammaTable(regime, grid, args.wavelet or "poly4", args.gamma_method,
                       R=400 if args.replicates is None else args.replicates,
                       seed=0 if args.seed is None else args.seed)
    path = Path(args.output or args.gamma_table or table.default_path())
    alphas = None
    if args.alphas:
        alphas = [float(a) for a in args.alphas.split(",")]
    table.fill(alphas)
    table.save(path)
    print(f"wrote {len(table._cache)} Gamma node(s) to {path}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p, output_help="output file"):
    p.add_argument("--output", help=output_help)
    p.add_argument("--seed", type=int, help="random seed (default 0)")


def _analysis_flags(p):
    p.add_argument("--regime", choices=["lrd", "fbm"])
    p.add_argument("--kappa", type=float)
    p.add_argument("--scales", help="scale multipliers r_i, comma separated (default 1,2,3,4,5)")
    p.add_argument("--wavelet", help="mother wavelet name (default poly4)")
    p.add_argument("--min-seg", type=int, help="minimal segment length in samples")
    p.add_argument("--gamma-table", help="Gamma table file (default: $WAVEBREAK_GAMMA_DIR or ~/.cache/wavebreak)")
    p.add_argument("--gamma-method", choices=["mc", "analytic"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavebreak", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a scenario to CSV plus a ground-truth JSON sidecar")
    _common(p, "series CSV; the sidecar goes next to it with suffix .json")
    p.add_argument("--scenario", default="farima-1cp", choices=sorted(SCENARIOS) + ["custom"])
    p.add_argument("--spec", help="JSON piecewise spec for --scenario custom")
    p.add_argument("--n", type=int, help="override the scenario's series length N")
    p.add_argument("--level-pasting", action="store_true", help="offset each segment by the previous last value")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="detect m changes and estimate per-segment exponents")
    _common(p, "result JSON (plot CSVs are written next to it); stdout if omitted")
    _analysis_flags(p)
    p.add_argument("--input", help="series CSV with header x")
    p.add_argument("--m", type=int, help="number of changes (default 0)")
    p.add_argument("--replicates", type=int, help="Monte Carlo replicates for Gamma (default 400)")
    p.add_argument("--max-trim", type=float, help="cap of the refinement trim as a fraction of the segment")
    p.add_argument("--no-trim-cap", action="store_true", help="apply the theoretical margin uncapped")
    p.add_argument("--config", help="rerun with the config echo of a previous result JSON")
    p.add_argument("--plot-prefix", help="prefix of the plot CSVs (default: output path without suffix)")
    p.add_argument("--penalty", help="reserved for penalized selection of m (not implemented)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("experiment", help="Monte Carlo summary of a scenario")
    _common(p, "summary CSV (a .txt table and .replicates.csv go next to it)")
    _analysis_flags(p)
    p.add_argument("--scenario", default="farima-1cp", choices=sorted(SCENARIOS) + ["custom"])
    p.add_argument("--spec", help="JSON piecewise spec for --scenario custom")
    p.add_argument("--n", type=int)
    p.add_argument("--replicates", type=int, help="number of replicates (default 50, at least 10)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gamma-table", help="build and save a Gamma table")
    _common(p, "table file (default: the path detect would use)")
    _analysis_flags(p)
    p.add_argument("--n", type=int, help="series length defining a_N")
    p.add_argument("--replicates", type=int, help="Monte Carlo replicates per node (default 400)")
    p.add_argument("--alphas", help="only the nodes needed for these exponents, comma separated")
    p.set_defaults(func=cmd_gamma_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WavebreakError as exc:
        print(json.dumps({"error": {"code": exc.code, "category": exc.category, "message": str(exc)}}),
              file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(json.dumps({"error": {"code": "io-error", "category": "io", "message": str(exc)}}), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
