"""Adaptive Dormand-Prince 5(4) integration, pure-Python reference.

Both model evolutions reduce to autonomous linear complex ODEs, so the
right-hand side takes only the state. Dense output uses the standard
quartic interpolant; observables are sampled on a fixed output grid.
This module is the fallback twin of the compiled kernels in _kernels.pyx
and must match them algorithm-for-algorithm.
"""

from __future__ import annotations

import numpy as np

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERR_EXPONENT = -0.2  # -1/(order of the embedded method + 1)

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])

A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)

B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])

E = np.array(
    [71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

# dense-output coefficients (Shampine's quartic interpolant)
P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

N_STAGES = 7


class IntegrationError(RuntimeError):
    """Step size underflowed; carries the time (us) that was reached."""

    def __init__(self, t_reached: float):
        super().__init__(f"integration stalled at t = {t_reached:.6g} us")
        self.t_reached = t_reached


def _rms(x, scale):
    return float(np.sqrt(np.mean(np.square(np.abs(x) / scale))))


def _initial_step(rhs, y0, f0, t_span, rtol, atol, max_step):
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0, scale)
    d1 = _rms(f0, scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_span, max_step)
    f1 = rhs(y0 + h0 * f0)
    d2 = _rms(f1 - f0, scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_span, max_step)


def integrate_to_grid(
    rhs,
    y0: np.ndarray,
    t_out: np.ndarray,
    rtol: float,
    atol: float,
    max_step: float,
    record,
    post_accept=None,
):
    """Drive the adaptive DP54 loop from t=0 to t_out[-1], calling
    record(i, y_interp) once per output grid point in order.

    post_accept, when given, maps the accepted state to a cleaned state
    (used to re-symmetrize density matrices); the FSAL stage is reused
    regardless, which is valid because the cleanup is a projection at
    roundoff scale."""
    y = np.array(y0, dtype=complex)
    n = y.size
    t_bound = float(t_out[-1])
    t = 0.0
    i_out = 0
    while i_out < len(t_out) and t_out[i_out] <= t:
        record(i_out, y)
        i_out += 1

    f = rhs(y)
    h = _initial_step(rhs, y, f, t_bound, rtol, atol, max_step)
    K = np.empty((N_STAGES, n), complex)
    rejected = False

    if not np.isfinite(h):
        h = min(1e-6, t_bound)

    while t < t_bound:
        min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
        h = min(max(h, min_step), max_step)
        t_new = t + h
        if t_new > t_bound:
            t_new = t_bound
        h_used = t_new - t

        K[0] = f
        for s in range(1, N_STAGES):
            dy = h_used * (A[s, :s] @ K[:s])
            K[s] = rhs(y + dy)
        y_new = y + h_used * (B @ K)
        err_vec = h_used * (E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec, scale)

        if not np.isfinite(err):
            rejected = True
            h = h_used * MIN_FACTOR
            if not h >= min_step:  # nan-safe: a nan step is a failure too
                raise IntegrationError(t)
            continue
        if err > 1.0:
            rejected = True
            h = h_used * max(MIN_FACTOR, SAFETY * err**ERR_EXPONENT)
            if not h >= min_step:
                raise IntegrationError(t)
            continue

        factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, max(1.0, SAFETY * err**ERR_EXPONENT))
        if rejected:
            factor = min(1.0, factor)
        rejected = False

        if i_out < len(t_out) and t_out[i_out] <= t_new:
            Q = K.T @ P  # (n, 4)
            while i_out < len(t_out) and t_out[i_out] <= t_new:
                th = (t_out[i_out] - t) / h_used
                tv = np.array([th, th**2, th**3, th**4])
                record(i_out, y + h_used * (Q @ tv))
                i_out += 1

        t = t_new
        y = y_new
        f = K[6]  # FSAL
        if post_accept is not None:
            y = post_accept(y)
        h = h_used * factor

    return y


def solve_linear(A_mat, y0, t_out, rtol, atol, max_step=np.inf):
    """Evolve y' = A y, returning interpolated states on the grid."""
    A_mat = np.ascontiguousarray(A_mat, complex)
    out = np.empty((len(t_out), len(y0)), complex)

    def record(i, y):
        out[i] = y

    integrate_to_grid(lambda y: A_mat @ y, y0, t_out, rtol, atol, max_step, record)
    return out


def solve_lindblad(
    H, rates, rho0, t_out, rtol, atol, max_step=np.inf, states_at_idx=None
):
    """Evolve the Lindblad equation for jump-to-vacuum channels.

    rates is the length-dim vector of channel rates by basis index (zero
    at vacuum and qubit). Returns (p_qubit, p_tls_total, coherence_abs,
    trace, states) with observables on the grid and full density matrices
    at the requested grid indices."""
    H = np.ascontiguousarray(H, complex)
    dim = H.shape[0]
    rates = np.asarray(rates, float)
    hr = 0.5 * rates

    def rhs(yflat):
        rho = yflat.reshape(dim, dim)
        out = -1j * (H @ rho - rho @ H)
        out -= hr[:, None] * rho + rho * hr[None, :]
        out[0, 0] += rates @ np.diagonal(rho)  # jump gain, linear in rho
        return out.ravel()

    def post_accept(yflat):
        rho = yflat.reshape(dim, dim)
        return (0.5 * (rho + rho.conj().T)).ravel()

    n_out = len(t_out)
    p_q = np.empty(n_out)
    p_tls = np.empty(n_out)
    coh = np.empty(n_out)
    trace = np.empty(n_out)
    want = set(int(i) for i in states_at_idx) if states_at_idx is not None else set()
    states: dict[int, np.ndarray] = {}
    diag_idx = np.arange(dim) * dim + np.arange(dim)

    def record(i, yflat):
        d = yflat[diag_idx].real
        p_q[i] = d[1]
        p_tls[i] = d[2:].sum()
        coh[i] = abs(yflat[1])
        trace[i] = d.sum()
        if i in want:
            states[i] = yflat.reshape(dim, dim).copy()

    integrate_to_grid(
        rhs,
        np.asarray(rho0, complex).ravel(),
        t_out,
        rtol,
        atol,
        max_step,
        record,
        post_accept=post_accept,
    )
    return p_q, p_tls, coh, trace, states
