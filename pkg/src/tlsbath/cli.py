"""Command-line entry point.

Subcommands: trials, convergence, sweep, threshold, synthesize-field,
replay. Configuration comes from an optional JSON file (--config) with
individual flag overrides; every default matches the study defaults of
the underlying modules. Exit codes: 0 success, 1 configuration error,
2 all trials failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .engine import BACKEND
from .fieldmap import save_field_map, synthetic_field, SyntheticFieldParams
from .geometry import default_transmon_geometry
from .trials import (
    ConfigError,
    RunConfig,
    emit_figure_data,
    load_records,
    run_convergence,
    run_single_trial,
    resolve_field_map,
    run_sweep,
    run_threshold,
    run_trials,
    save_records,
    summarize_trials,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ALL_FAILED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # config errors exit 1, not argparse's 2
        raise ConfigError(message)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {text!r}") from exc


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--k", type=int, help="retained TLS count")
    p.add_argument("--dipole", type=float, help="dipole moment, Debye")
    p.add_argument("--t1min", type=float, help="minimum TLS T1, us")
    p.add_argument("--out", help="output directory")
    p.add_argument("--engine", choices=("fast", "full"))
    p.add_argument("--horizon", type=float, help="integration horizon, us")
    p.add_argument("--points", type=int, help="output grid points")
    p.add_argument("--rtol", type=float, help="relative tolerance")
    p.add_argument("--atol", type=float, help="absolute tolerance")
    p.add_argument("--field", help="field-map file (default: synthetic)")
    p.add_argument("--workers", type=int, help="worker threads")
    p.add_argument("--with-t2", action="store_true", default=None)
    p.add_argument("--k-list", type=_int_list, help="comma-separated k values")
    p.add_argument("--dipole-grid", type=_float_list, help="comma-separated Debye values")
    p.add_argument("--t1min-grid", type=_float_list, help="comma-separated us values")


def build_config(args, study: str) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    updates: dict = {"study": study}
    ens_updates: dict = {}
    integ_updates: dict = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.trials is not None:
        updates["n_trials"] = args.trials
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.engine is not None:
        updates["engine"] = args.engine
    if args.field is not None:
        updates["field_path"] = args.field
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.with_t2 is not None:
        updates["with_t2"] = args.with_t2
    if args.k_list is not None:
        updates["k_list"] = args.k_list
    if args.dipole_grid is not None:
        updates["dipole_grid"] = args.dipole_grid
    if args.t1min_grid is not None:
        updates["t1min_grid"] = args.t1min_grid
    if args.k is not None:
        ens_updates["retain_k"] = args.k
    if args.dipole is not None:
        ens_updates["dipole_moment"] = args.dipole
    if args.t1min is not None:
        ens_updates["t1_min"] = args.t1min
    if args.horizon is not None:
        integ_updates["horizon"] = args.horizon
    if args.points is not None:
        integ_updates["output_points"] = args.points
    if args.rtol is not None:
        integ_updates["rel_tol"] = args.rtol
    if args.atol is not None:
        integ_updates["abs_tol"] = args.atol
    try:
        if ens_updates:
            updates["ensemble"] = dataclasses.replace(cfg.ensemble, **ens_updates)
        if integ_updates:
            updates["integrator"] = dataclasses.replace(cfg.integrator, **integ_updates)
        return dataclasses.replace(cfg, **updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _prepare_out(config: RunConfig) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    _write_json(os.path.join(config.out_dir, "config.json"), config.to_dict())
    return config.out_dir


def _cmd_trials(args) -> int:
    config = build_config(args, "trials")
    out = _prepare_out(config)
    result = run_trials(config)
    save_records(result.records, os.path.join(out, "records.jsonl"))
    summary = summarize_trials(result)
    _write_json(os.path.join(out, "summary.json"), summary)
    emit_figure_data(result, out)
    med = summary["t1_median_us"]
    print(
        f"trials: {summary['n_trials'] - result.n_failed}/{summary['n_trials']} ok, "
        f"median T1 = {med:.4g} us" if med is not None else "trials: no fitted T1",
    )
    if result.n_failed == len(result.records):
        return EXIT_ALL_FAILED
    return EXIT_OK


def _cmd_convergence(args) -> int:
    config = build_config(args, "convergence")
    out = _prepare_out(config)
    result = run_convergence(config)
    _write_json(
        os.path.join(out, "convergence_trials.json"),
        {"backend": BACKEND, "per_trial": result.per_trial},
    )
    emit_figure_data(result, out)
    print(f"convergence: {config.n_trials} trials x k_list={list(config.k_list)}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = build_config(args, "sweep")
    out = _prepare_out(config)
    result = run_sweep(config)
    emit_figure_data(result, out)
    print(f"sweep: {len(result.rows)} cells written")
    return EXIT_OK


def _cmd_threshold(args) -> int:
    config = build_config(args, "threshold")
    out = _prepare_out(config)
    result = run_threshold(config)
    _write_json(
        os.path.join(out, "threshold_summary.json"),
        {
            "backend": BACKEND,
            "per_dipole": {str(k): v for k, v in sorted(result.per_dipole.items())},
        },
    )
    emit_figure_data(result, out)
    for d, stats in sorted(result.per_dipole.items()):
        print(
            f"dipole {d:g} D: {stats['count']} thresholds, "
            f"min={stats['min_us']} mean={stats['mean_us']} us"
        )
    return EXIT_OK


def _cmd_synthesize_field(args) -> int:
    params = SyntheticFieldParams(
        e_jj=args.e_jj,
        e_edge=args.e_edge,
        sigma_jj=args.sigma_jj,
        ell=args.ell,
        exponent=args.exponent,
        spacing=args.spacing,
    )
    fmap = synthetic_field(default_transmon_geometry(), params)
    save_field_map(fmap, args.out_file)
    print(f"wrote {fmap.nx}x{fmap.ny} synthetic field map to {args.out_file}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    records = load_records(args.record)
    if not records:
        raise ConfigError(f"no records in {args.record}")
    if not 0 <= args.index < len(records):
        raise ConfigError(f"record index {args.index} out of range")
    rec = records[args.index]
    config = build_config(args, "trials")
    spec_data = dict(rec["spec"])
    seed = int(rec["seed"])
    try:
        from .ensemble import EnsembleSpec

        spec = EnsembleSpec(**spec_data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"record spec invalid: {exc}") from exc
    config = dataclasses.replace(config, ensemble=spec, master_seed=seed, n_trials=1)
    geometry = default_transmon_geometry()
    fmap = resolve_field_map(config, geometry)
    record, traj = run_single_trial(seed, config, geometry, fmap)
    if record.error is not None:
        print(f"replay failed: {record.error}")
        return EXIT_ALL_FAILED
    print(
        f"replayed seed {seed}: T1 = {record.t1_q} us "
        f"(recorded {rec.get('t1_q')} us), oscillatory = {record.oscillatory}"
    )
    if args.traj_out and traj is not None:
        traj.to_csv(args.traj_out)
        print(f"trajectory written to {args.traj_out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _Parser(prog="tlsbath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (
        ("trials", _cmd_trials),
        ("convergence", _cmd_convergence),
        ("sweep", _cmd_sweep),
        ("threshold", _cmd_threshold),
    ):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("synthesize-field")
    p.add_argument("--out", dest="out_file", required=True, help="output file")
    p.add_argument("--spacing", type=float, default=1.5)
    p.add_argument("--e-jj", type=float, default=10.0)
    p.add_argument("--e-edge", type=float, default=1.0)
    p.add_argument("--sigma-jj", type=float, default=0.1)
    p.add_argument("--ell", type=float, default=0.5)
    p.add_argument("--exponent", type=float, default=2.0)
    p.set_defaults(fn=_cmd_synthesize_field)

    p = sub.add_parser("replay")
    p.add_argument("record", help="records.jsonl from a previous run")
    p.add_argument("--index", type=int, default=0, help="record line to replay")
    p.add_argument("--traj-out", help="write the replayed trajectory CSV here")
    _add_common(p)
    p.set_defaults(fn=_cmd_replay)

    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
