"""Command-line front end.

    mpemba fig2 [--out DIR] [--n N] ...
    mpemba fig3 [--grid 64x64] ...
    mpemba fig4 [--t2-ratio 0.01] ...
    mpemba run CONFIG.json [--out DIR]
    mpemba stability t1=1 t2=1 n=1000 m0=0.5 [--independent]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Times in every output file are in units of t1.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import all_crossings, metric_series, speed_field, thermalization_map, trajectories_for
from .bloch import DomainError, SystemParams, stability
from .config import PRESETS, ConfigError, ExperimentConfig, dumps, loads, params_from_dict
from .ode import IntegrationError
from .metrics import METRICS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
TRAJECTORY_COLUMNS = ("t", "r", "theta", "phi", "D", "Dz", "Dperp", "S")


def fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if not isinstance(x, str) else x for x in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _stability_dict(params: SystemParams) -> dict:
    rep = stability(params)
    return {
        "fixed_point": {"r": rep.fixed_point.r, "theta": rep.fixed_point.theta},
        "lambda_r": rep.lambda_r * params.t1,
        "lambda_theta": rep.lambda_theta * params.t1,
        "mpe_timescale": rep.mpe_timescale / params.t1,
    }


def run_experiment(cfg: ExperimentConfig, out: Path) -> list[Path]:
    """Execute one experiment and write its files under ``out / cfg.name``."""
    d = out / cfg.name
    d.mkdir(parents=True, exist_ok=True)
    p = cfg.params
    written = []
    if cfg.experiment == "stability":
        written.append(d / "stability.json")
        _write_json(written[-1], _stability_dict(p))
        return written

    if cfg.experiment == "thermal_map":
        tm = thermalization_map(cfg.grid, p, cfg.cutoff, cfg.integrator, cfg.metric)
        rows = ((r, th, None if tau is None else tau / p.t1) for r, th, tau in tm.rows())
        written.append(d / "map.csv")
        _write_csv(written[-1], ("r0", "theta0", "tau_th"), rows)
        return written

    if cfg.experiment == "speed_field":
        sf = speed_field(cfg.grid, p)
        v = sf.velocity * p.t1
        rows = zip(sf.r, sf.theta, v[:, 0], v[:, 1], sf.speed * p.t1)
        written.append(d / "field.csv")
        _write_csv(written[-1], ("r", "theta", "vx", "vz", "speed"), rows)
        return written

    states = cfg.initial_states()
    trajs = trajectories_for(states, p, cfg.integrator)
    labels = [f"s{i:03d}" for i in range(len(states))]
    series = {m: [metric_series(tr, m, lab) for tr, lab in zip(trajs, labels)] for m in METRICS}
    crossings = {}
    for m in METRICS:
        events = all_crossings(series[m])
        crossings[m] = [{"a": e.first, "b": e.second, "t": e.time / p.t1} for e in events]
    summary = {
        "metric": cfg.metric,
        "mpe_timescale": stability(p).mpe_timescale / p.t1,
        "earliest": {m: (crossings[m][0]["t"] if crossings[m] else None) for m in METRICS},
        "crossings": crossings,
    }
    if cfg.experiment == "trajectories":
        index_rows = []
        for i, (s, tr, lab) in enumerate(zip(states, trajs, labels)):
            r, th, ph = tr.polar
            cols = [tr.times / p.t1, r, th, ph] + [series[m][i].values for m in ("D", "Dz", "Dperp", "S")]
            name = f"{lab}.csv"
            _write_csv(d / name, TRAJECTORY_COLUMNS, zip(*cols))
            written.append(d / name)
            index_rows.append((lab, s.r, s.theta, s.phi, name))
        with open(d / "index.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("id", "r0", "theta0", "phi0", "file"))
            for lab, r0, th0, ph0, name in index_rows:
                w.writerow((lab, fmt(r0), fmt(th0), fmt(ph0), name))
        written.append(d / "index.csv")
    written.append(d / "crossings.json")
    _write_json(written[-1], summary)
    return written


def run(configs, out) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(dumps(configs))
    written = []
    for cfg in configs:
        written.extend(run_experiment(cfg, out))
    return written


def parse_grid(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        w, h = int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be positive")
    return w, h


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output directory (default: out; stability prints only)")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--n", type=int, help="number of spins")
    p.add_argument("--t2-ratio", type=float, help="t2 / t1")
    env = p.add_mutually_exclusive_group()
    env.add_argument("--shared", dest="shared", action="store_true", default=None)
    env.add_argument("--independent", dest="shared", action="store_false")
    p.add_argument("--grid", type=parse_grid, help="WxH: W samples of r0 by H samples of theta0")
    p.add_argument("--horizon", type=float, help="integration horizon in units of t1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpemba", description="Mpemba-effect simulations of relaxing spin ensembles")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fig2", "fig3", "fig4"):
        _add_common(sub.add_parser(name, help=f"reproduce {name}"))
    p = sub.add_parser("run", help="run experiments from a JSON config file")
    p.add_argument("config")
    _add_common(p)
    p = sub.add_parser("stability", help="fixed-point eigenvalues and Mpemba timescale")
    p.add_argument("params", nargs="*", help="key=value pairs among t1, t2, tphi, n, m0")
    _add_common(p)
    return parser


def apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    params = cfg.params
    changes = {}
    if args.n is not None:
        changes["n"] = args.n
    if args.t2_ratio is not None:
        changes["t2"] = args.t2_ratio * params.t1
    if args.shared is not None:
        changes["shared_env"] = args.shared
    try:
        params = replace(params, **changes)
    except DomainError as exc:
        raise ConfigError(f"params: {exc}") from None
    kw = {"params": params}
    if args.metric is not None:
        kw["metric"] = args.metric
    if args.cutoff is not None:
        kw["cutoff"] = args.cutoff
    if args.horizon is not None:
        try:
            kw["integrator"] = replace(cfg.integrator, t_end=args.horizon * params.t1)
        except ValueError as exc:
            raise ConfigError(f"horizon: {exc}") from None
    if args.grid is not None and cfg.grid is not None:
        kw["grid"] = replace(cfg.grid, n_r=args.grid[0], n_theta=args.grid[1])
    return replace(cfg, **kw)


def _stability_params(tokens, args) -> SystemParams:
    values = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep or key not in ("t1", "t2", "tphi", "n", "m0"):
            raise ConfigError(f"{tok!r}: expected key=value with key among t1, t2, tphi, n, m0")
        try:
            values[key] = int(val) if key == "n" else float(val)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {val!r}") from None
    params = params_from_dict(values, "params")
    return replace(params, shared_env=True if args.shared is None else args.shared)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "stability":
            params = _stability_params(args.params, args)
            cfg = apply_overrides(ExperimentConfig("stability", "stability", params), args)
            result = _stability_dict(cfg.params)
            print(json.dumps(result, indent=2, sort_keys=True))
            if args.out is not None:
                run([cfg], args.out)
            return EXIT_OK
        if args.command == "run":
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ConfigError(f"{args.config}: {exc.strerror}") from None
            configs = loads(text)
        else:
            configs = PRESETS[args.command]()
        configs = [apply_overrides(c, args) for c in configs]
        out = args.out or "out"
        written = run(configs, out)
        print(f"wrote {len(written)} files to {out}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, DomainError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
