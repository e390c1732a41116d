# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 5(4) kernels for the two model evolutions.

Mirrors dp54.py step for step (same tableau, same controller, same dense
output); the Butcher coefficients are copied from that module at import
so the two backends cannot drift apart. Hot loops run without the GIL,
so trial workers can share threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, fmax, fmin, isfinite, nextafter, pow, sqrt
from scipy.linalg.cython_blas cimport zgemm, zgemv

from . import dp54 as _ref

cnp.import_array()

IntegrationError = _ref.IntegrationError

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0

cdef double A_TAB[7][6]
cdef double B_TAB[7]
cdef double E_TAB[7]
cdef double P_TAB[7][4]

for _s in range(7):
    for _j in range(6):
        A_TAB[_s][_j] = _ref.A[_s][_j]
    B_TAB[_s] = _ref.B[_s]
    E_TAB[_s] = _ref.E[_s]
    for _j in range(4):
        P_TAB[_s][_j] = _ref.P[_s][_j]


cdef inline double _cabs(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline void _dense_weights(double th, double *w) nogil:
    cdef double t1 = th, t2 = th * th, t3 = t2 * th, t4 = t3 * th
    cdef int s
    for s in range(7):
        w[s] = P_TAB[s][0] * t1 + P_TAB[s][1] * t2 + P_TAB[s][2] * t3 + P_TAB[s][3] * t4


cdef inline void _stage_state(
    double complex *y, double complex *K, double h, int s, int n, double complex *out
) nogil:
    """out = y + h * sum_{j<s} A[s][j] K_j."""
    cdef int i, j
    cdef double complex acc
    for i in range(n):
        acc = 0
        for j in range(s):
            acc = acc + A_TAB[s][j] * K[j * n + i]
        out[i] = y[i] + h * acc


cdef inline double _step_error(
    double complex *y, double complex *y_new, double complex *K,
    double h, int n, double rtol, double atol
) nogil:
    cdef int i, s
    cdef double complex e
    cdef double sc, acc = 0.0
    for i in range(n):
        e = 0
        for s in range(7):
            e = e + E_TAB[s] * K[s * n + i]
        e = h * e
        sc = atol + rtol * fmax(_cabs(y[i]), _cabs(y_new[i]))
        acc += (e.real * e.real + e.imag * e.imag) / (sc * sc)
    return sqrt(acc / n)


cdef inline void _combine_b(
    double complex *y, double complex *K, double h, int n, double complex *y_new
) nogil:
    cdef int i, s
    cdef double complex acc
    for i in range(n):
        acc = 0
        for s in range(7):
            acc = acc + B_TAB[s] * K[s * n + i]
        y_new[i] = y[i] + h * acc


cdef inline double complex _interp_component(
    double complex *y, double complex *K, double h, double *w, int n, int c
) nogil:
    cdef double complex acc = 0
    cdef int s
    for s in range(7):
        acc = acc + w[s] * K[s * n + c]
    return y[c] + h * acc


# ---------------------------------------------------------------------------
# linear kernel: y' = A y  (fast engine)
# ---------------------------------------------------------------------------

cdef inline void _rhs_linear(
    double complex *a, double complex *x, double complex *out, int n
) nogil:
    # a is C-order; BLAS sees its transpose, so trans='T' applies A itself
    cdef char trans = c'T'
    cdef int inc = 1
    cdef double complex one = 1.0, zero = 0.0
    zgemv(&trans, &n, &n, &one, a, &n, x, &inc, &zero, out, &inc)


def solve_linear(A_mat, y0, t_out, double rtol, double atol, max_step=np.inf):
    """Compiled twin of dp54.solve_linear."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] A = np.ascontiguousarray(A_mat, complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y = np.array(y0, complex)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tg = np.ascontiguousarray(t_out, float)
    cdef int n = y.shape[0]
    cdef int n_out = tg.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Y = np.empty((n_out, n), complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Kb = np.empty((7, n), complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ytmp = np.empty(n, complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ynew = np.empty(n, complex)

    cdef double complex *ap = &A[0, 0]
    cdef double complex *yp = &y[0]
    cdef double complex *Kp = &Kb[0, 0]
    cdef double complex *tp = &ytmp[0]
    cdef double complex *np_ = &ynew[0]
    cdef double complex *Yp = &Y[0, 0]
    cdef double *tgp = &tg[0]

    cdef double hmax = float(max_step)
    cdef double t_bound = tg[n_out - 1]
    cdef double t = 0.0, h, h_used, t_new, err, factor, min_step, th
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc
    cdef double w[7]
    cdef int i, s, i_out = 0, status = 0
    cdef bint rejected = False

    with nogil:
        while i_out < n_out and tgp[i_out] <= t:
            for i in range(n):
                Yp[i_out * n + i] = yp[i]
            i_out += 1

        # initial step heuristic (matches dp54._initial_step)
        _rhs_linear(ap, yp, Kp, n)  # f0 in K[0]
        for i in range(n):
            sc = atol + rtol * _cabs(yp[i])
            d0 += (_cabs(yp[i]) / sc) ** 2
            d1 += (_cabs(Kp[i]) / sc) ** 2
        d0 = sqrt(d0 / n)
        d1 = sqrt(d1 / n)
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = fmin(fmin(h, t_bound), hmax)
        for i in range(n):
            tp[i] = yp[i] + h * Kp[i]
        _rhs_linear(ap, tp, np_, n)
        for i in range(n):
            sc = atol + rtol * _cabs(yp[i])
            d2 += (_cabs(np_[i] - Kp[i]) / sc) ** 2
        d2 = sqrt(d2 / n) / h
        if fmax(d1, d2) <= 1e-15:
            h = fmin(fmin(100 * h, fmax(1e-6, h * 1e-3)), fmin(t_bound, hmax))
        else:
            h = fmin(fmin(100 * h, pow(0.01 / fmax(d1, d2), 0.2)), fmin(t_bound, hmax))

        if not isfinite(h):
            h = fmin(1e-6, t_bound)

        while t < t_bound and status == 0:
            min_step = 10.0 * fabs(nextafter(t, INFINITY) - t)
            h = fmin(fmax(h, min_step), hmax)
            t_new = t + h
            if t_new > t_bound:
                t_new = t_bound
            h_used = t_new - t

            for s in range(1, 7):
                _stage_state(yp, Kp, h_used, s, n, tp)
                _rhs_linear(ap, tp, Kp + s * n, n)
            _combine_b(yp, Kp, h_used, n, np_)
            err = _step_error(yp, np_, Kp, h_used, n, rtol, atol)

            if not isfinite(err):
                rejected = True
                h = h_used * MIN_FACTOR
                if not h >= min_step:  # nan-safe
                    status = 1
                continue
            if err > 1.0:
                rejected = True
                h = h_used * fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))
                if not h >= min_step:
                    status = 1
                continue

            factor = MAX_FACTOR if err == 0 else fmin(
                MAX_FACTOR, fmax(1.0, SAFETY * pow(err, -0.2))
            )
            if rejected:
                factor = fmin(1.0, factor)
            rejected = False

            while i_out < n_out and tgp[i_out] <= t_new:
                th = (tgp[i_out] - t) / h_used
                _dense_weights(th, w)
                for i in range(n):
                    Yp[i_out * n + i] = _interp_component(yp, Kp, h_used, w, n, i)
                i_out += 1

            t = t_new
            for i in range(n):
                yp[i] = np_[i]
                Kp[i] = Kp[6 * n + i]  # FSAL
            h = h_used * factor

    if status:
        raise IntegrationError(t)
    return Y


# ---------------------------------------------------------------------------
# Lindblad kernel: rho' = -i[H, rho] + jump-to-vacuum dissipators
# ---------------------------------------------------------------------------

cdef inline void _rhs_lindblad(
    double complex *hmat, double *hr, double *rates,
    double complex *rho, double complex *out,
    double complex *w1, double complex *w2, int dim
) nogil:
    cdef char transN = c'N'
    cdef double complex one = 1.0, zero = 0.0
    cdef int i, j
    cdef double complex pump = 0
    # w1 = H rho, w2 = rho H (operand swap: C-order through column-major BLAS)
    zgemm(&transN, &transN, &dim, &dim, &dim, &one, rho, &dim, hmat, &dim, &zero, w1, &dim)
    zgemm(&transN, &transN, &dim, &dim, &dim, &one, hmat, &dim, rho, &dim, &zero, w2, &dim)
    for i in range(dim):
        for j in range(dim):
            out[i * dim + j] = (
                -1j * (w1[i * dim + j] - w2[i * dim + j])
                - (hr[i] + hr[j]) * rho[i * dim + j]
            )
        pump = pump + rates[i] * rho[i * dim + i]
    out[0] = out[0] + pump


cdef inline void _hermitize(double complex *rho, int dim) nogil:
    cdef int i, j
    cdef double complex a
    for i in range(dim):
        rho[i * dim + i] = rho[i * dim + i].real
        for j in range(i + 1, dim):
            a = 0.5 * (rho[i * dim + j] + rho[j * dim + i].conjugate())
            rho[i * dim + j] = a
            rho[j * dim + i] = a.conjugate()


def solve_lindblad(
    H, rates, rho0, t_out, double rtol, double atol,
    max_step=np.inf, states_at_idx=None,
):
    """Compiled twin of dp54.solve_lindblad."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Hm = np.ascontiguousarray(H, complex)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.ascontiguousarray(rates, float)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hrv = 0.5 * g
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y = np.asarray(rho0, complex).ravel().copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tg = np.ascontiguousarray(t_out, float)
    cdef int dim = Hm.shape[0]
    cdef int n = dim * dim
    cdef int n_out = tg.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=1] p_q = np.empty(n_out)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p_tls = np.empty(n_out)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] coh = np.empty(n_out)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] trace = np.empty(n_out)

    snap_list = [] if states_at_idx is None else list(states_at_idx)
    snap_idx = (
        np.unique(np.asarray(snap_list, np.int64))
        if snap_list
        else np.empty(0, np.int64)
    )
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sidx = snap_idx
    cdef int n_snap = sidx.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] snaps = np.empty((n_snap, dim, dim), complex)

    cdef cnp.ndarray[cnp.complex128_t, ndim=2] Kb = np.empty((7, n), complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ytmp = np.empty(n, complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ynew = np.empty(n, complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w1 = np.empty(n, complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w2 = np.empty(n, complex)

    cdef double complex *hp = &Hm[0, 0]
    cdef double *hrp = &hrv[0]
    cdef double *gp = &g[0]
    cdef double complex *yp = &y[0]
    cdef double complex *Kp = &Kb[0, 0]
    cdef double complex *tp = &ytmp[0]
    cdef double complex *np_ = &ynew[0]
    cdef double complex *w1p = &w1[0]
    cdef double complex *w2p = &w2[0]
    cdef double complex *snp = &snaps[0, 0, 0] if n_snap else NULL
    cdef cnp.int64_t *sip = &sidx[0] if n_snap else NULL
    cdef double *tgp = &tg[0]

    cdef double hmax = float(max_step)
    cdef double t_bound = tg[n_out - 1]
    cdef double t = 0.0, h, h_used, t_new, err, factor, min_step, th
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc, dsum, tsum
    cdef double complex v
    cdef double w[7]
    cdef int i, s, c, i_out = 0, i_snap = 0, status = 0
    cdef bint rejected = False

    with nogil:
        while i_out < n_out and tgp[i_out] <= t:
            dsum = 0.0
            tsum = 0.0
            for i in range(dim):
                tsum += yp[i * dim + i].real
                if i >= 2:
                    dsum += yp[i * dim + i].real
            p_q[i_out] = yp[dim + 1].real
            p_tls[i_out] = dsum
            coh[i_out] = _cabs(yp[1])
            trace[i_out] = tsum
            while i_snap < n_snap and sip[i_snap] == i_out:
                for i in range(n):
                    snp[i_snap * n + i] = yp[i]
                i_snap += 1
            i_out += 1

        _rhs_lindblad(hp, hrp, gp, yp, Kp, w1p, w2p, dim)
        for i in range(n):
            sc = atol + rtol * _cabs(yp[i])
            d0 += (_cabs(yp[i]) / sc) ** 2
            d1 += (_cabs(Kp[i]) / sc) ** 2
        d0 = sqrt(d0 / n)
        d1 = sqrt(d1 / n)
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = fmin(fmin(h, t_bound), hmax)
        for i in range(n):
            tp[i] = yp[i] + h * Kp[i]
        _rhs_lindblad(hp, hrp, gp, tp, np_, w1p, w2p, dim)
        for i in range(n):
            sc = atol + rtol * _cabs(yp[i])
            d2 += (_cabs(np_[i] - Kp[i]) / sc) ** 2
        d2 = sqrt(d2 / n) / h
        if fmax(d1, d2) <= 1e-15:
            h = fmin(fmin(100 * h, fmax(1e-6, h * 1e-3)), fmin(t_bound, hmax))
        else:
            h = fmin(fmin(100 * h, pow(0.01 / fmax(d1, d2), 0.2)), fmin(t_bound, hmax))

        if not isfinite(h):
            h = fmin(1e-6, t_bound)

        while t < t_bound and status == 0:
            min_step = 10.0 * fabs(nextafter(t, INFINITY) - t)
            h = fmin(fmax(h, min_step), hmax)
            t_new = t + h
            if t_new > t_bound:
                t_new = t_bound
            h_used = t_new - t

            for s in range(1, 7):
                _stage_state(yp, Kp, h_used, s, n, tp)
                _rhs_lindblad(hp, hrp, gp, tp, Kp + s * n, w1p, w2p, dim)
            _combine_b(yp, Kp, h_used, n, np_)
            err = _step_error(yp, np_, Kp, h_used, n, rtol, atol)

            if not isfinite(err):
                rejected = True
                h = h_used * MIN_FACTOR
                if not h >= min_step:  # nan-safe
                    status = 1
                continue
            if err > 1.0:
                rejected = True
                h = h_used * fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))
                if not h >= min_step:
                    status = 1
                continue

            factor = MAX_FACTOR if err == 0 else fmin(
                MAX_FACTOR, fmax(1.0, SAFETY * pow(err, -0.2))
            )
            if rejected:
                factor = fmin(1.0, factor)
            rejected = False

            while i_out < n_out and tgp[i_out] <= t_new:
                th = (tgp[i_out] - t) / h_used
                _dense_weights(th, w)
                dsum = 0.0
                tsum = 0.0
                for i in range(dim):
                    v = _interp_component(yp, Kp, h_used, w, n, i * dim + i)
                    tsum += v.real
                    if i == 1:
                        p_q[i_out] = v.real
                    elif i >= 2:
                        dsum += v.real
                p_tls[i_out] = dsum
                trace[i_out] = tsum
                coh[i_out] = _cabs(_interp_component(yp, Kp, h_used, w, n, 1))
                while i_snap < n_snap and sip[i_snap] == i_out:
                    for c in range(n):
                        snp[i_snap * n + c] = _interp_component(yp, Kp, h_used, w, n, c)
                    i_snap += 1
                i_out += 1

            t = t_new
            for i in range(n):
                yp[i] = np_[i]
                Kp[i] = Kp[6 * n + i]  # FSAL
            _hermitize(yp, dim)
            h = h_used * factor

    if status:
        raise IntegrationError(t)
    states = {int(sidx[k]): snaps[k].copy() for k in range(n_snap)}
    return p_q, p_tls, coh, trace, states
