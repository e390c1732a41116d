"""Standard-tunneling-model TLS ensemble sampling and selection.

Each defect carries an energy E (drawn uniformly in a narrow band around
the qubit), a tunneling fraction delta0_norm = Delta0/E, and a dipole
coupled to the local single-photon field. The tunneling fraction is drawn
through the STM's 1/sin(theta) density via its inverse CDF, worked in log
space: with L = log tan(d/2) the variable z = L*(1-u) is uniform on
[L, 0] and

    delta0_norm = sin(theta) = sech(z),   delta_norm = cos(theta) = tanh(-z).

With the physical cutoff L = -1e4 the vast majority of sech(z) values
underflow double precision; they are flushed to exact zeros (such defects
couple at zero strength and can never enter the retained set).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .constants import C_RMS, DEBYE, HBAR
from .fieldmap import FieldMap, fields_at
from .geometry import DeviceGeometry, Position, sample_positions

_TINY = np.finfo(float).tiny  # smallest normal double

# minimum pair separation; regularizes the 1/r^3 law for coincident samples
MIN_PAIR_SEPARATION_UM = 1e-3  # 1 nm


@dataclass(frozen=True)
class EnsembleSpec:
    """Sampling parameters for one TLS ensemble."""

    n_total: int = 1_000_000
    qubit_freq: float = 5e9  # Hz
    band_halfwidth: float = 10e6  # Hz
    # log tan(d/2) for the cutoff angle d. The default is the value that
    # makes the STM normalization self-consistent: N = P0*V*2*delta_E*|L|
    # with P0 = 1e44 /J m^3, V = 1.5x1.5 mm^2 x 3 nm and a +-10 MHz band
    # gives N = 1e6 at |L| ~ 1e2. Arbitrarily small cutoffs (e.g. -1e4)
    # are supported; tunneling fractions below double precision flush to
    # exact zeros.
    log_tan_half_cutoff: float = -1e2
    dipole_moment: float = 3.0  # Debye
    t1_min: float = 0.05  # us
    retain_k: int = 200
    seed: int = 0
    rank_by: str = "omega"  # "omega" (|g*delta0|) or "g"

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError("n_total must be >= 1")
        if not 0 < self.band_halfwidth < 0.1 * self.qubit_freq:
            raise ValueError("band_halfwidth must be positive and << qubit_freq")
        if self.log_tan_half_cutoff >= 0:
            raise ValueError("log_tan_half_cutoff must be negative")
        if not 0.1 <= self.dipole_moment <= 4.0:
            raise ValueError("dipole_moment must lie in [0.1, 4.0] Debye")
        if self.t1_min <= 0:
            raise ValueError("t1_min must be positive")
        if not 1 <= self.retain_k <= self.n_total:
            raise ValueError("retain_k must lie in [1, n_total]")
        if self.rank_by not in ("omega", "g"):
            raise ValueError("rank_by must be 'omega' or 'g'")


@dataclass(frozen=True)
class TlsDefect:
    """One sampled defect with its derived coupling quantities."""

    position: Position
    energy_freq: float  # E/h, Hz
    delta0_norm: float  # Delta0/E in (0, 1], 0 after underflow flush
    delta_norm: float  # Delta/E
    log_tan_half_theta: float  # the log-space sampling variable z
    dipole: float  # Debye
    dipole_field_angle: float  # rad in [0, pi]
    local_field: tuple[float, float, float]  # V/m
    g: float  # rad/s, p.E/hbar including the angle factor
    omega: float  # rad/s, g * delta0_norm
    t1_tls: float  # us; inf for dark (delta0_norm == 0) defects
    distance_to_jj: float  # um, from the JJ center


def tunneling_fractions(u, log_tan_half_cutoff):
    """Inverse-CDF transform of the 1/sin(theta) density on [d, pi/2].

    Returns (delta0_norm, delta_norm, z) for uniform u in [0, 1], where
    z = L*(1-u) and theta = 2*atan(exp(z)). Values of sech(z) below the
    smallest normal double are flushed to exact zero."""
    u = np.asarray(u, float)
    z = log_tan_half_cutoff * (1.0 - u)
    ez = np.exp(z)  # underflows harmlessly to 0 for very negative z
    delta0 = 2.0 * ez / (1.0 + ez * ez)
    delta0 = np.where(delta0 < _TINY, 0.0, delta0)
    delta = np.tanh(-z)
    return delta0, delta, z


def tls_relaxation_time(delta0_norm: float, t1_min: float):
    """TLS energy relaxation time t1_min / delta0_norm**2 (us).

    A zero tunneling fraction yields the infinite-lifetime sentinel: the
    defect is dark and contributes no collapse channel."""
    if not 0 <= delta0_norm <= 1:
        raise ValueError("delta0_norm must lie in [0, 1]")
    if t1_min <= 0:
        raise ValueError("t1_min must be positive")
    if delta0_norm == 0:
        return np.inf
    return t1_min / delta0_norm**2


class TlsEnsemble:
    """Array-backed collection of sampled defects (struct of arrays)."""

    def __init__(self, spec: EnsembleSpec, **arrays):
        self.spec = spec
        self.x = arrays["x"]
        self.y = arrays["y"]
        self.depth = arrays["depth"]
        self.energy_freq = arrays["energy_freq"]
        self.delta0_norm = arrays["delta0_norm"]
        self.delta_norm = arrays["delta_norm"]
        self.log_tan_half_theta = arrays["log_tan_half_theta"]
        self.dipole_field_angle = arrays["dipole_field_angle"]
        self.local_field = arrays["local_field"]  # (n, 3)
        self.g = arrays["g"]
        self.omega = arrays["omega"]
        self.t1_tls = arrays["t1_tls"]
        self.distance_to_jj = arrays["distance_to_jj"]

    def __len__(self):
        return len(self.x)

    def __getitem__(self, i) -> TlsDefect:
        return TlsDefect(
            position=Position(float(self.x[i]), float(self.y[i]), float(self.depth[i])),
            energy_freq=float(self.energy_freq[i]),
            delta0_norm=float(self.delta0_norm[i]),
            delta_norm=float(self.delta_norm[i]),
            log_tan_half_theta=float(self.log_tan_half_theta[i]),
            dipole=self.spec.dipole_moment,
            dipole_field_angle=float(self.dipole_field_angle[i]),
            local_field=tuple(float(c) for c in self.local_field[i]),
            g=float(self.g[i]),
            omega=float(self.omega[i]),
            t1_tls=float(self.t1_tls[i]),
            distance_to_jj=float(self.distance_to_jj[i]),
        )


def sample_ensemble(
    spec: EnsembleSpec, geometry: DeviceGeometry, field_map: FieldMap
) -> TlsEnsemble:
    """Draw spec.n_total defects: energies uniform on the resonance band,
    tunneling fractions from the STM density, positions uniform over the
    chip surface layer, dipole-field angles uniform on [0, pi].

    The draw order (energies, tunneling, positions, angles) is part of
    the reproducibility contract for a given seed."""
    if not field_map.photon_scaled:
        raise ValueError("field map must be photon-normalized")
    rng = np.random.default_rng(spec.seed)
    n = spec.n_total

    energy = rng.uniform(
        spec.qubit_freq - spec.band_halfwidth,
        spec.qubit_freq + spec.band_halfwidth,
        n,
    )
    u = rng.uniform(0.0, 1.0, n)
    delta0, delta, z = tunneling_fractions(u, spec.log_tan_half_cutoff)
    pos = sample_positions(geometry, n, rng)
    phi = rng.uniform(0.0, np.pi, n)

    local_field = fields_at(field_map, pos.x, pos.y)
    emag = np.linalg.norm(local_field, axis=-1)
    g = spec.dipole_moment * DEBYE * emag * np.cos(phi) / HBAR  # rad/s
    omega = g * delta0
    with np.errstate(divide="ignore"):
        t1 = np.where(delta0 > 0, spec.t1_min / np.square(delta0), np.inf)
    dist = geometry.jj_distance(pos.x, pos.y)

    return TlsEnsemble(
        spec,
        x=pos.x,
        y=pos.y,
        depth=pos.depth,
        energy_freq=energy,
        delta0_norm=delta0,
        delta_norm=delta,
        log_tan_half_theta=z,
        dipole_field_angle=phi,
        local_field=local_field,
        g=g,
        omega=omega,
        t1_tls=t1,
        distance_to_jj=dist,
    )


def _pair_coupling_from_separation(dx_um, dy_um, ddepth_nm, delta0_i, delta0_j):
    """J_ij = C_rms / (4 r^3) * delta0_i * delta0_j / hbar, rad/s, with r
    the 3-D separation clamped below at 1 nm."""
    r_um = np.sqrt(dx_um**2 + dy_um**2 + (ddepth_nm * 1e-3) ** 2)
    r_m = np.maximum(r_um, MIN_PAIR_SEPARATION_UM) * 1e-6
    return C_RMS / (4.0 * r_m**3) * delta0_i * delta0_j / HBAR


def tls_tls_coupling(tls_i: TlsDefect, tls_j: TlsDefect) -> float:
    """Flip-flop coupling between two defects (rad/s)."""
    pi, pj = tls_i.position, tls_j.position
    return float(
        _pair_coupling_from_separation(
            pi.x - pj.x,
            pi.y - pj.y,
            pi.depth - pj.depth,
            tls_i.delta0_norm,
            tls_j.delta0_norm,
        )
    )


@dataclass(frozen=True)
class RetainedSet:
    """The strongest-coupled defects, sorted by ranking strength
    descending, plus their symmetric pair-coupling matrix (rad/s)."""

    defects: tuple[TlsDefect, ...]
    pair_coupling: np.ndarray = field(repr=False)
    qubit_freq: float = 5e9
    rank_by: str = "omega"

    def __post_init__(self):
        k = len(self.defects)
        j = np.asarray(self.pair_coupling, float)
        if j.shape != (k, k):
            raise ValueError("pair_coupling must be (K, K)")
        if not np.all(np.isfinite(j)):
            raise ValueError("pair couplings must be finite")
        if np.any(j != j.T) or np.any(np.diag(j) != 0):
            raise ValueError("pair_coupling must be symmetric with zero diagonal")
        key = np.array([self._rank_value(d) for d in self.defects])
        if np.any(np.diff(key) > 1e-12 * np.maximum(key[:-1], 1e-300)):
            raise ValueError("defects must be sorted by ranking strength descending")
        object.__setattr__(self, "pair_coupling", j)

    def _rank_value(self, d: TlsDefect) -> float:
        return abs(d.g) if self.rank_by == "g" else abs(d.omega)

    def __len__(self):
        return len(self.defects)

    def truncate(self, k: int) -> "RetainedSet":
        if not 1 <= k <= len(self.defects):
            raise ValueError(f"k={k} outside [1, {len(self.defects)}]")
        return RetainedSet(
            self.defects[:k],
            self.pair_coupling[:k, :k],
            qubit_freq=self.qubit_freq,
            rank_by=self.rank_by,
        )

    # convenience array views for the model builder
    def omegas(self) -> np.ndarray:
        return np.array([d.omega for d in self.defects])

    def energies(self) -> np.ndarray:
        return np.array([d.energy_freq for d in self.defects])

    def delta0_norms(self) -> np.ndarray:
        return np.array([d.delta0_norm for d in self.defects])

    def t1_times(self) -> np.ndarray:
        return np.array([d.t1_tls for d in self.defects])


def select_top_k(
    ensemble: TlsEnsemble, k: int, qubit_freq: float | None = None
) -> RetainedSet:
    """Retain the k most strongly coupled defects.

    Ranking is by |omega| (or |g| when the spec requests it), descending;
    ties break by smaller distance to the JJ, then by sample index. The
    pair-coupling matrix is computed for all retained pairs."""
    n = len(ensemble)
    if k > n:
        raise ValueError(f"k={k} exceeds ensemble size {n}")
    strength = (
        np.abs(ensemble.g) if ensemble.spec.rank_by == "g" else np.abs(ensemble.omega)
    )
    idx = np.arange(n)
    order = np.lexsort((idx, ensemble.distance_to_jj, -strength))
    top = order[:k]

    defects = tuple(ensemble[i] for i in top)
    dx = ensemble.x[top][:, None] - ensemble.x[top][None, :]
    dy = ensemble.y[top][:, None] - ensemble.y[top][None, :]
    dd = ensemble.depth[top][:, None] - ensemble.depth[top][None, :]
    d0 = ensemble.delta0_norm[top]
    j = _pair_coupling_from_separation(dx, dy, dd, d0[:, None], d0[None, :])
    np.fill_diagonal(j, 0.0)
    j = np.triu(j, 1)
    j = j + j.T  # exact symmetry
    return RetainedSet(
        defects,
        j,
        qubit_freq=qubit_freq if qubit_freq is not None else ensemble.spec.qubit_freq,
        rank_by=ensemble.spec.rank_by,
    )


def save_retained_set(rs: RetainedSet, path) -> None:
    """JSON-lines dump: a header line, one defect per line, then the dense
    pair-coupling matrix."""
    with open(path, "w") as fh:
        fh.write(
            json.dumps(
                {
                    "kind": "retained_set",
                    "k": len(rs),
                    "qubit_freq": rs.qubit_freq,
                    "rank_by": rs.rank_by,
                }
            )
            + "\n"
        )
        for d in rs.defects:
            rec = asdict(d)
            rec["kind"] = "defect"
            fh.write(json.dumps(rec) + "\n")
        fh.write(
            json.dumps({"kind": "j_matrix", "rows": rs.pair_coupling.tolist()}) + "\n"
        )


def load_retained_set(path) -> RetainedSet:
    defects = []
    header = None
    j = None
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            kind = rec.get("kind")
            if kind == "retained_set":
                header = rec
            elif kind == "defect":
                rec.pop("kind")
                pos = rec.pop("position")
                rec["position"] = Position(**pos)
                rec["local_field"] = tuple(rec["local_field"])
                defects.append(TlsDefect(**rec))
            elif kind == "j_matrix":
                j = np.asarray(rec["rows"], float)
            else:
                raise ValueError(f"unknown record kind {kind!r}")
    if header is None or j is None:
        raise ValueError("retained-set file missing header or j_matrix record")
    return RetainedSet(
        tuple(defects),
        j,
        qubit_freq=header["qubit_freq"],
        rank_by=header["rank_by"],
    )
