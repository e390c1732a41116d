"""Trajectory analysis: relaxation-time fits and derived studies.

T1 comes from the qubit excited-state population. Monotone decays get a
direct exponential fit; trajectories with coherent qubit-TLS exchange
are fitted through the envelope of their population maxima, with each
sampled peak refined by a local parabola. T2 applies the same machinery
to the qubit coherence from a superposition preparation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import find_peaks

from .engine import IntegratorConfig, Trajectory, evolve_fast, evolve_full
from .ensemble import RetainedSet
from .model import build_hamiltonian, initial_state

OSCILLATION_RISE = 1e-3  # absolute rebound that counts as coherent exchange
PEAK_PROMINENCE = 1e-3
UNRESOLVED_FRACTION = 0.98  # end/start ratio above which a decay is unresolved


class UnresolvedDecayError(RuntimeError):
    """Signal did not decay enough to fit; carries a lower bound (us)."""

    def __init__(self, lower_bound: float):
        super().__init__(
            f"decay unresolved over the trajectory; T1 > {lower_bound:.4g} us"
        )
        self.lower_bound = lower_bound


@dataclass(frozen=True)
class DecayFit:
    t1: float  # us
    amplitude: float
    offset: float
    residual_rms: float
    oscillatory: bool
    envelope_peaks: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class StrongestStats:
    """Summary of the top-ranked defect of a retained set."""

    distance_to_jj: float  # um
    pe_hz: float  # |p.E|/h = |g|/2pi, Hz
    delta0_norm: float
    omega_hz: float  # |Omega|/2pi, Hz
    category: str  # "<0.3um" | "0.3-5um" | ">5um"


@dataclass(frozen=True)
class TrialRecord:
    """Inputs and fitted outputs of one randomized trial."""

    seed: int
    spec: dict
    retained_k: int
    t1_q: float | None  # us; None when unresolved or failed
    t1_lower_bound: float | None
    oscillatory: bool
    strongest: StrongestStats | None
    t2_q: float | None = None
    error: str | None = None


def detect_oscillation(traj: Trajectory) -> tuple[bool, float]:
    """True when p_qubit rebounds: a local minimum followed by a local
    maximum at least OSCILLATION_RISE higher. Returns the largest rise."""
    p = np.asarray(traj.p_qubit)
    best = 0.0
    direction = -1  # a leading rise counts from the first point
    last_min = p[0]
    for i in range(1, len(p)):
        step = p[i] - p[i - 1]
        if step > 0:
            if direction < 0:
                last_min = p[i - 1]  # turning point: local minimum
            direction = 1
            best = max(best, p[i] - last_min)
        elif step < 0:
            direction = -1
    return best >= OSCILLATION_RISE, best


def _refined_peaks(t, y):
    """Local maxima of y refined by a parabola through the three samples
    around each peak; includes t=0 when the signal starts at a maximum."""
    idx, _ = find_peaks(y, prominence=PEAK_PROMINENCE)
    peaks = []
    if len(y) >= 2 and y[0] >= y[1]:
        peaks.append((t[0], y[0]))
    for i in idx:
        if i == 0 or i == len(y) - 1:
            peaks.append((t[i], y[i]))
            continue
        denom = y[i - 1] - 2 * y[i] + y[i + 1]
        if denom >= 0:
            peaks.append((t[i], y[i]))
            continue
        delta = 0.5 * (y[i - 1] - y[i + 1]) / denom
        delta = float(np.clip(delta, -0.5, 0.5))
        tp = t[i] + delta * (t[i + 1] - t[i])
        yp = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * delta
        peaks.append((float(tp), float(yp)))
    return peaks


def _exp_model(t, a, t1, c):
    return a * np.exp(-t / t1) + c


def _fit_exponential(t, y, horizon):
    """Least-squares A*exp(-t/T1) + C seeded by log-linear regression on
    the clearly-positive part of the signal."""
    y0 = y[0]
    mask = y > max(1e-4, 1e-6 * y0)
    if mask.sum() >= 3:
        slope, intercept = np.polyfit(t[mask], np.log(y[mask]), 1)
        t1_seed = -1.0 / slope if slope < 0 else 10 * horizon
        a_seed = math.exp(intercept)
    else:
        t1_seed = horizon
        a_seed = y0
    t1_seed = float(np.clip(t1_seed, 1e-6, 1e8))
    p0 = [float(np.clip(a_seed, 1e-12, 2.0)), t1_seed, 0.0]
    popt, _ = curve_fit(
        _exp_model,
        t,
        y,
        p0=p0,
        bounds=([0.0, 1e-9, -1.0], [2.0, 1e9, 1.0]),
        maxfev=20000,
    )
    resid = y - _exp_model(t, *popt)
    return popt, float(np.sqrt(np.mean(resid**2)))


def _fit_decay_signal(t, y, horizon) -> DecayFit:
    if len(t) < 3:
        raise ValueError("trajectory must cover at least 3 output points")
    if y[0] <= 0:
        raise ValueError("signal must start positive")
    if y[-1] > UNRESOLVED_FRACTION * y[0]:
        ratio = y[0] / max(y[-1], 1e-300)
        log_ratio = math.log(ratio) if ratio > 1 else math.log(1 / UNRESOLVED_FRACTION)
        raise UnresolvedDecayError(float(t[-1]) / log_ratio)

    traj_like = Trajectory(
        t=t, p_qubit=y, p_tls_total=np.zeros_like(y),
        coherence_abs=np.zeros_like(y), trace=np.ones_like(y),
    )
    oscillatory, _ = detect_oscillation(traj_like)
    if oscillatory:
        peaks = _refined_peaks(t, y)
        if len(peaks) >= 2:
            tp = np.array([p[0] for p in peaks])
            yp = np.array([p[1] for p in peaks])
            popt, rms = _fit_exponential(tp, yp, horizon)
            return DecayFit(
                t1=float(popt[1]),
                amplitude=float(popt[0]),
                offset=float(popt[2]),
                residual_rms=rms,
                oscillatory=True,
                envelope_peaks=tuple(peaks),
            )
        oscillatory = False  # too few peaks to build an envelope

    popt, rms = _fit_exponential(t, y, horizon)
    return DecayFit(
        t1=float(popt[1]),
        amplitude=float(popt[0]),
        offset=float(popt[2]),
        residual_rms=rms,
        oscillatory=False,
    )


def fit_t1(traj: Trajectory) -> DecayFit:
    """Qubit relaxation time from the excited-state population."""
    return _fit_decay_signal(
        np.asarray(traj.t), np.asarray(traj.p_qubit), float(traj.t[-1])
    )


def fit_t2(traj: Trajectory) -> DecayFit:
    """Coherence decay time from a superposition-prepared trajectory."""
    coh = np.asarray(traj.coherence_abs)
    if abs(coh[0] - 0.5) > 1e-9:
        raise ValueError("trajectory must start from the (|0>+|1>)/sqrt2 state")
    return _fit_decay_signal(np.asarray(traj.t), coh, float(traj.t[-1]))


def categorize_distance(distance_um: float) -> str:
    if distance_um < 0.3:
        return "<0.3um"
    if distance_um <= 5.0:
        return "0.3-5um"
    return ">5um"


def strongest_tls_stats(retained: RetainedSet) -> StrongestStats:
    """Distance, dipole coupling, tunneling fraction and net coupling of
    the top-ranked defect."""
    if len(retained) == 0:
        raise ValueError("retained set is empty")
    d = retained.defects[0]
    two_pi = 2 * math.pi
    return StrongestStats(
        distance_to_jj=d.distance_to_jj,
        pe_hz=abs(d.g) / two_pi,
        delta0_norm=d.delta0_norm,
        omega_hz=abs(d.omega) / two_pi,
        category=categorize_distance(d.distance_to_jj),
    )


def _evolve(retained: RetainedSet, cfg: IntegratorConfig, engine: str, kind="excited"):
    model = build_hamiltonian(retained)
    state = initial_state(kind, model.dim)
    if engine == "full":
        return evolve_full(state, model, cfg)
    return evolve_fast(state, model, cfg)


def convergence_study(
    retained: RetainedSet,
    cfg: IntegratorConfig,
    k_list,
    engine: str = "fast",
) -> list[tuple[int, float | None, str | None]]:
    """Re-run the same trial with the retained ranking truncated to each
    k. Returns (k, t1_us, note) tuples; fit failures are annotated, not
    raised."""
    k_list = list(k_list)
    if any(k2 < k1 for k1, k2 in zip(k_list, k_list[1:])):
        raise ValueError("k_list must be ascending")
    if k_list[-1] > len(retained):
        raise ValueError("k_list exceeds the retained set size")
    out = []
    for k in k_list:
        traj = _evolve(retained.truncate(k), cfg, engine)
        try:
            out.append((k, fit_t1(traj).t1, None))
        except UnresolvedDecayError as exc:
            out.append((k, None, f"unresolved: T1 > {exc.lower_bound:.4g} us"))
    return out


def _with_t1_min(retained: RetainedSet, model, t1_min: float):
    """Collapse rates for the same defects at a different t1_min knob
    (rate_i = delta0_i^2 / t1_min)."""
    d0 = retained.delta0_norms()
    return model.with_rates(np.square(d0) / t1_min)


def find_t1min_threshold(
    retained: RetainedSet,
    cfg: IntegratorConfig,
    t1min_grid,
    engine: str = "fast",
    coupling_scale: float = 1.0,
) -> float | None:
    """Smallest t1_min (us) at which coherent qubit-TLS oscillation
    appears, scanned over an ascending grid and refined by 3 bisection
    steps in log space. None when no grid point oscillates.

    coupling_scale rescales the qubit-TLS couplings uniformly (a dipole
    moment change relative to the sampled ensemble)."""
    grid = np.asarray(list(t1min_grid), float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("t1min_grid must be strictly ascending")
    if grid[-1] / grid[0] < 100.0:
        raise ValueError("t1min_grid must span at least 2 decades")

    model = build_hamiltonian(retained)
    if coupling_scale != 1.0:
        model = model.scale_qubit_couplings(coupling_scale)
    state = initial_state("excited", model.dim)

    def oscillates(t1_min: float) -> bool:
        m = _with_t1_min(retained, model, t1_min)
        traj = (
            evolve_full(state, m, cfg) if engine == "full" else evolve_fast(state, m, cfg)
        )
        return detect_oscillation(traj)[0]

    # rates scale as 1/t1_min uniformly, so damping (and with it the
    # rebound) is monotone along the grid: nothing at the top means
    # nothing anywhere, which skips the stiff low end entirely
    if not oscillates(grid[-1]):
        return None
    hit = len(grid) - 1
    for i, t1m in enumerate(grid[:-1]):
        if oscillates(t1m):
            hit = i
            break
    if hit == 0:
        return float(grid[0])

    lo, hi = grid[hit - 1], grid[hit]
    for _ in range(3):
        mid = math.sqrt(lo * hi)
        if oscillates(mid):
            hi = mid
        else:
            lo = mid
    return float(hi)
