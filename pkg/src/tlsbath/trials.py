"""Trial ensembles, parameter sweeps, and figure-data emission.

A trial is one random redistribution of the TLS bath: sample the
ensemble with seed = master_seed + trial index, retain the top-K, build
the model, integrate, fit. Studies fan trials out over a bounded thread
pool (the compiled kernels drop the GIL) and reduce deterministically,
so outputs are independent of worker count.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .analysis import (
    StrongestStats,
    TrialRecord,
    UnresolvedDecayError,
    convergence_study,
    detect_oscillation,
    find_t1min_threshold,
    fit_t1,
    fit_t2,
    strongest_tls_stats,
)
from .engine import BACKEND, IntegratorConfig, Trajectory, evolve_fast, evolve_full
from .ensemble import EnsembleSpec, RetainedSet, sample_ensemble, select_top_k
from .fieldmap import FieldMap, SyntheticFieldParams, load_field_map, scale_to_single_photon, synthetic_field
from .geometry import DeviceGeometry, default_transmon_geometry
from .model import build_hamiltonian, initial_state


class ConfigError(ValueError):
    """Bad run configuration (missing file, unknown study, ...)."""


_STUDIES = ("trials", "convergence", "sweep", "threshold")

DEFAULT_T1MIN_GRID = tuple(float(x) for x in np.logspace(-3, 1, 13))


@dataclass(frozen=True)
class RunConfig:
    """One study run: field source, ensemble, integrator, study knobs."""

    study: str = "trials"
    out_dir: str = "out"
    master_seed: int = 1
    n_trials: int = 10
    engine: str = "fast"
    workers: int | None = None
    with_t2: bool = False
    field_path: str | None = None  # None -> synthetic field
    sim_energy: float = 1.0  # J; used when scaling a loaded raw map
    synthetic: SyntheticFieldParams = field(default_factory=SyntheticFieldParams)
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    k_list: tuple[int, ...] = (1, 10, 25, 50, 100, 150, 200)
    dipole_grid: tuple[float, ...] = (1.1, 2.0, 3.0, 4.0)
    t1min_grid: tuple[float, ...] = DEFAULT_T1MIN_GRID

    def __post_init__(self):
        if self.study not in _STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; expected one of {_STUDIES}")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.engine not in ("fast", "full"):
            raise ConfigError("engine must be 'fast' or 'full'")
        if self.field_path is not None and not os.path.exists(self.field_path):
            raise ConfigError(f"field map not found: {self.field_path}")
        if any(k <= 0 for k in self.k_list) or list(self.k_list) != sorted(self.k_list):
            raise ConfigError("k_list must be ascending positive integers")
        if any(d <= 0 for d in self.dipole_grid):
            raise ConfigError("dipole_grid must be positive")
        if list(self.t1min_grid) != sorted(self.t1min_grid) or self.t1min_grid[0] <= 0:
            raise ConfigError("t1min_grid must be ascending and positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        try:
            if "synthetic" in data:
                data["synthetic"] = SyntheticFieldParams(**data["synthetic"])
            if "ensemble" in data:
                data["ensemble"] = EnsembleSpec(**data["ensemble"])
            if "integrator" in data:
                data["integrator"] = IntegratorConfig(**data["integrator"])
            for key in ("k_list", "dipole_grid", "t1min_grid"):
                if key in data:
                    data[key] = tuple(data[key])
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        return cls.from_dict(data)


def resolve_field_map(config: RunConfig, geometry: DeviceGeometry) -> FieldMap:
    """Load (and photon-normalize) the configured map, or synthesize one."""
    omega_q = 2 * math.pi * config.ensemble.qubit_freq
    if config.field_path is not None:
        fmap = load_field_map(config.field_path)
        if not fmap.photon_scaled:
            fmap = scale_to_single_photon(fmap, config.sim_energy, omega_q)
        return fmap
    params = replace(config.synthetic, omega_q=omega_q)
    return synthetic_field(geometry, params)


def sample_trial(
    seed: int, spec: EnsembleSpec, geometry: DeviceGeometry, fmap: FieldMap
) -> RetainedSet:
    spec_i = replace(spec, seed=seed)
    ens = sample_ensemble(spec_i, geometry, fmap)
    return select_top_k(ens, spec_i.retain_k)


def run_single_trial(
    seed: int,
    config: RunConfig,
    geometry: DeviceGeometry,
    fmap: FieldMap,
) -> tuple[TrialRecord, Trajectory | None]:
    """Sample, simulate and fit one trial. Failures are captured in the
    record instead of propagating."""
    spec_i = replace(config.ensemble, seed=seed)
    try:
        retained = sample_trial(seed, config.ensemble, geometry, fmap)
        model = build_hamiltonian(retained)
        cfg = config.integrator
        state = initial_state("excited", model.dim)
        traj = (
            evolve_full(state, model, cfg)
            if config.engine == "full"
            else evolve_fast(state, model, cfg)
        )
        oscillatory, _ = detect_oscillation(traj)
        stats = strongest_tls_stats(retained)
        t1_q = None
        t1_lb = None
        try:
            t1_q = fit_t1(traj).t1
        except UnresolvedDecayError as exc:
            t1_lb = exc.lower_bound
        t2_q = None
        if config.with_t2:
            sup = initial_state("superposition", model.dim)
            traj2 = (
                evolve_full(sup, model, cfg)
                if config.engine == "full"
                else evolve_fast(sup, model, cfg)
            )
            try:
                t2_q = fit_t2(traj2).t1
            except UnresolvedDecayError:
                t2_q = None
        record = TrialRecord(
            seed=seed,
            spec=asdict(spec_i),
            retained_k=len(retained),
            t1_q=t1_q,
            t1_lower_bound=t1_lb,
            oscillatory=oscillatory,
            strongest=stats,
            t2_q=t2_q,
        )
        return record, traj
    except Exception as exc:  # noqa: BLE001 - per-trial crash isolation
        record = TrialRecord(
            seed=seed,
            spec=asdict(spec_i),
            retained_k=0,
            t1_q=None,
            t1_lower_bound=None,
            oscillatory=False,
            strongest=None,
            error=f"{type(exc).__name__}: {exc}",
        )
        return record, None


def _n_workers(config: RunConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    return max(1, os.cpu_count() or 1)


def _pool_map(fn, items, workers: int):
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class TrialsResult:
    config: RunConfig
    records: list[TrialRecord]
    trajectories: list[Trajectory | None]
    fig2_trial: int | None = None  # index of the representative trial
    fig2_coherence: Trajectory | None = None

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.records if r.error is not None)


def _category_stats(records: list[TrialRecord]) -> dict:
    out = {}
    for cat in ("<0.3um", "0.3-5um", ">5um"):
        vals = [
            r.t1_q
            for r in records
            if r.error is None
            and r.t1_q is not None
            and r.strongest is not None
            and r.strongest.category == cat
        ]
        out[cat] = {
            "count": len(vals),
            "mean_us": float(np.mean(vals)) if vals else None,
            "std_us": float(np.std(vals)) if vals else None,
        }
    return out


def summarize_trials(result: TrialsResult) -> dict:
    records = result.records
    t1s = [r.t1_q for r in records if r.error is None and r.t1_q is not None]
    return {
        "study": "trials",
        "backend": BACKEND,
        "engine": result.config.engine,
        "n_trials": len(records),
        "n_failed": result.n_failed,
        "n_unresolved": sum(
            1 for r in records if r.error is None and r.t1_q is None
        ),
        "n_oscillatory": sum(1 for r in records if r.oscillatory),
        "t1_median_us": float(np.median(t1s)) if t1s else None,
        "t1_mean_us": float(np.mean(t1s)) if t1s else None,
        "t1_std_us": float(np.std(t1s)) if t1s else None,
        "t1_min_us": float(np.min(t1s)) if t1s else None,
        "t1_max_us": float(np.max(t1s)) if t1s else None,
        "by_category": _category_stats(records),
    }


def run_trials(config: RunConfig) -> TrialsResult:
    """Run config.n_trials independent trials (seed = master_seed + i)."""
    geometry = default_transmon_geometry()
    fmap = resolve_field_map(config, geometry)
    seeds = [config.master_seed + i for i in range(config.n_trials)]

    def work(seed):
        return run_single_trial(seed, config, geometry, fmap)

    pairs = _pool_map(work, seeds, _n_workers(config))
    records = [p[0] for p in pairs]
    trajs = [p[1] for p in pairs]
    result = TrialsResult(config=config, records=records, trajectories=trajs)

    # representative trial for the decay figure: t1 closest to the median
    fitted = [
        (i, r.t1_q)
        for i, r in enumerate(records)
        if r.error is None and r.t1_q is not None
    ]
    if fitted:
        median = float(np.median([t for _, t in fitted]))
        idx = min(fitted, key=lambda it: abs(it[1] - median))[0]
        result.fig2_trial = idx
        retained = sample_trial(records[idx].seed, config.ensemble, geometry, fmap)
        model = build_hamiltonian(retained)
        sup = initial_state("superposition", model.dim)
        result.fig2_coherence = (
            evolve_full(sup, model, config.integrator)
            if config.engine == "full"
            else evolve_fast(sup, model, config.integrator)
        )
    return result


@dataclass
class ConvergenceResult:
    config: RunConfig
    rows: list[tuple[int, int, float | None, str | None]]  # (trial, k, t1, note)
    per_trial: list[dict]


def run_convergence(config: RunConfig) -> ConvergenceResult:
    """Truncated-ranking study: same trial, k sweeping over k_list."""
    geometry = default_transmon_geometry()
    fmap = resolve_field_map(config, geometry)
    k_list = [k for k in config.k_list if k <= config.ensemble.retain_k]
    if not k_list:
        raise ConfigError("k_list has no entries <= retain_k")
    seeds = [config.master_seed + i for i in range(config.n_trials)]

    def work(seed):
        retained = sample_trial(seed, config.ensemble, geometry, fmap)
        stats = strongest_tls_stats(retained)
        points = convergence_study(retained, config.integrator, k_list, config.engine)
        return seed, stats, points

    out = _pool_map(work, seeds, _n_workers(config))
    rows = []
    per_trial = []
    for i, (seed, stats, points) in enumerate(out):
        per_trial.append(
            {
                "trial": i,
                "seed": seed,
                "distance_um": stats.distance_to_jj,
                "category": stats.category,
            }
        )
        for k, t1, note in points:
            rows.append((i, k, t1, note))
    return ConvergenceResult(config=config, rows=rows, per_trial=per_trial)


@dataclass
class SweepResult:
    config: RunConfig
    rows: list[tuple[float, float, float | None, bool]]  # dipole, t1min, t1, osc


def run_sweep(config: RunConfig) -> SweepResult:
    """Dipole x t1_min grid over one fixed trial.

    The trial geometry is sampled once at the configured dipole moment;
    a dipole change rescales the qubit couplings uniformly (g is linear
    in |p|, and uniform scaling preserves the retained ranking) and a
    t1_min change rescales the collapse rates."""
    geometry = default_transmon_geometry()
    fmap = resolve_field_map(config, geometry)
    retained = sample_trial(config.master_seed, config.ensemble, geometry, fmap)
    model = build_hamiltonian(retained)
    d0sq = np.square(retained.delta0_norms())
    state = initial_state("excited", model.dim)

    cells = [(d, t) for d in config.dipole_grid for t in config.t1min_grid]

    def work(cell):
        dipole, t1min = cell
        m = model.scale_qubit_couplings(dipole / config.ensemble.dipole_moment)
        m = m.with_rates(d0sq / t1min)
        traj = (
            evolve_full(state, m, config.integrator)
            if config.engine == "full"
            else evolve_fast(state, m, config.integrator)
        )
        osc, _ = detect_oscillation(traj)
        try:
            t1 = fit_t1(traj).t1
        except UnresolvedDecayError:
            t1 = None
        return dipole, t1min, t1, osc

    rows = _pool_map(work, cells, _n_workers(config))
    return SweepResult(config=config, rows=rows)


@dataclass
class ThresholdResult:
    config: RunConfig
    rows: list[tuple[float, int, int, float | None]]  # dipole, trial, seed, thr
    per_dipole: dict[float, dict]


def run_threshold(config: RunConfig) -> ThresholdResult:
    """Oscillation-onset threshold per (trial, dipole)."""
    geometry = default_transmon_geometry()
    fmap = resolve_field_map(config, geometry)
    seeds = [config.master_seed + i for i in range(config.n_trials)]

    def sample(seed):
        return sample_trial(seed, config.ensemble, geometry, fmap)

    retained_sets = _pool_map(sample, seeds, _n_workers(config))

    cells = [
        (d, i) for d in config.dipole_grid for i in range(len(seeds))
    ]

    def work(cell):
        dipole, i = cell
        thr = find_t1min_threshold(
            retained_sets[i],
            config.integrator,
            config.t1min_grid,
            engine=config.engine,
            coupling_scale=dipole / config.ensemble.dipole_moment,
        )
        return dipole, i, seeds[i], thr

    rows = _pool_map(work, cells, _n_workers(config))
    per_dipole = {}
    for d in config.dipole_grid:
        vals = [r[3] for r in rows if r[0] == d and r[3] is not None]
        per_dipole[d] = {
            "count": len(vals),
            "min_us": float(np.min(vals)) if vals else None,
            "mean_us": float(np.mean(vals)) if vals else None,
            "std_us": float(np.std(vals)) if vals else None,
        }
    return ThresholdResult(config=config, rows=rows, per_dipole=per_dipole)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _record_to_dict(r: TrialRecord) -> dict:
    d = asdict(r)
    return d


def save_records(records: list[TrialRecord], path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(_record_to_dict(r)) + "\n")


def load_records(path) -> list[dict]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


FIG2_COLUMNS = ("t_us", "p_qubit", "coherence_abs")
FIG3_COLUMNS = ("trial_id", "t_us", "p_qubit")
FIG4_STATS_COLUMNS = (
    "trial_id",
    "seed",
    "t1_us",
    "t1_lower_bound_us",
    "t2_us",
    "oscillatory",
    "distance_um",
    "pe_hz",
    "delta0_norm",
    "omega_hz",
    "category",
)
FIG4_CONVERGENCE_COLUMNS = ("k", "t1_us", "trial_id")
FIG5_SWEEP_COLUMNS = ("dipole_debye", "t1min_us", "t1_us", "oscillatory")
FIG5_THRESHOLD_COLUMNS = ("dipole_debye", "threshold_mean_us", "threshold_std_us")
THRESHOLD_DETAIL_COLUMNS = ("dipole_debye", "trial_id", "seed", "threshold_us")

FIG3_MAX_POINTS = 200


def emit_figure_data(result, out_dir) -> list[str]:
    """Write the plot-ready CSV bundle for a study result; returns the
    paths written. Raises ConfigError when the result lacks the inputs a
    file needs."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def path_of(name):
        p = os.path.join(out_dir, name)
        written.append(p)
        return p

    if isinstance(result, TrialsResult):
        if not result.records:
            raise ConfigError("trials result has no records")
        rows3 = []
        for i, traj in enumerate(result.trajectories):
            if traj is None:
                continue
            stride = max(1, math.ceil(len(traj.t) / FIG3_MAX_POINTS))
            for j in range(0, len(traj.t), stride):
                rows3.append((i, float(traj.t[j]), float(traj.p_qubit[j])))
        _write_csv(path_of("fig3_trials.csv"), FIG3_COLUMNS, rows3)

        rows4 = []
        for i, r in enumerate(result.records):
            s = r.strongest
            rows4.append(
                (
                    i,
                    r.seed,
                    r.t1_q,
                    r.t1_lower_bound,
                    r.t2_q,
                    r.oscillatory,
                    s.distance_to_jj if s else None,
                    s.pe_hz if s else None,
                    s.delta0_norm if s else None,
                    s.omega_hz if s else None,
                    s.category if s else "failed",
                )
            )
        _write_csv(path_of("fig4_stats.csv"), FIG4_STATS_COLUMNS, rows4)

        if result.fig2_trial is not None and result.fig2_coherence is not None:
            traj = result.trajectories[result.fig2_trial]
            coh = result.fig2_coherence
            rows2 = list(
                zip(
                    (float(v) for v in traj.t),
                    (float(v) for v in traj.p_qubit),
                    (float(v) for v in coh.coherence_abs),
                )
            )
            _write_csv(path_of("fig2_decay.csv"), FIG2_COLUMNS, rows2)
    elif isinstance(result, ConvergenceResult):
        if not result.rows:
            raise ConfigError("convergence result has no rows")
        rows = [(k, t1, trial) for trial, k, t1, _ in result.rows]
        _write_csv(path_of("fig4_convergence.csv"), FIG4_CONVERGENCE_COLUMNS, rows)
    elif isinstance(result, SweepResult):
        if not result.rows:
            raise ConfigError("sweep result has no rows")
        _write_csv(path_of("fig5_sweep.csv"), FIG5_SWEEP_COLUMNS, result.rows)
    elif isinstance(result, ThresholdResult):
        if not result.rows:
            raise ConfigError("threshold result has no rows")
        _write_csv(
            path_of("threshold_detail.csv"),
            THRESHOLD_DETAIL_COLUMNS,
            [(d, i, seed, thr) for d, i, seed, thr in result.rows],
        )
        rows = [
            (d, stats["mean_us"], stats["std_us"])
            for d, stats in sorted(result.per_dipole.items())
        ]
        _write_csv(path_of("fig5_threshold.csv"), FIG5_THRESHOLD_COLUMNS, rows)
    else:
        raise ConfigError(f"cannot emit figure data for {type(result).__name__}")
    return written
