"""Numerical kernels shared by the jitted and plain-numpy execution paths.

Everything in this module is written in the numpy subset that numba's
nopython mode accepts: explicit loops, no dicts, no fancy indexing, fixed
return types.  ``kernels`` loads this file twice — once untouched (the
plain path) and once with every function in :data:`KERNEL_NAMES` wrapped in
``numba.njit`` — so the two paths always share one source of truth.

Quadrature convention: for each bosonic mode, x = (b + b^dag)/sqrt(2) and
p = (b - b^dag)/(i sqrt(2)), giving [x, p] = i and vacuum variance 1/2.
State vectors are ordered (x_a, p_a, x_1, p_1, x_2, p_2, ...) with the
cavity first.
"""

import numpy as np

# ---------------------------------------------------------------------------
# Flat per-cell record layout used by grid sweeps.  All entries are float64;
# flags are 0.0/1.0 and missing values are NaN, never zero.
NREC = 52

REC_NREAL = 0     # number of real mean-field roots (1 or 3)
REC_NSTABLE = 1   # number of those classified stable
REC_MASK = 2      # bitmask of stable root labels (bit k set => root k stable)
REC_ERROR = 3     # error bits: 1 residual, 2 conditioning, 4 physicality

REC_ROOT_BASE = 4
REC_ROOT_STRIDE = 13
RF_NBAR = 0       # steady photon number
RF_REAL = 1       # root exists as a real solution
RF_DEGEN = 2      # coincides with another real root to 1e-9 relative
RF_STABLE = 3     # max growth rate below tolerance
RF_MAXRE = 4      # largest real part of the drift eigenvalues
RF_DELTA = 5      # effective detuning at this root
RF_MINSYM = 6     # smallest symplectic eigenvalue of the full state
RF_E_A1 = 7       # log-negativity, cavity with mode 1
RF_E_A2 = 8       # log-negativity, cavity with mode 2
RF_E_12 = 9       # log-negativity, mode 1 with mode 2
RF_NU_A1 = 10     # smallest ordinary eigenvalue of the reduced pair state
RF_NU_A2 = 11
RF_NU_12 = 12

REC_EMAX_A1 = 43  # per-pair maxima over stable roots, with attaining root
REC_ROOT_A1 = 44
REC_EMAX_A2 = 45
REC_ROOT_A2 = 46
REC_EMAX_12 = 47
REC_ROOT_12 = 48
REC_NUMIN_A1 = 49  # per-pair minima of the smallest pair variance
REC_NUMIN_A2 = 50
REC_NUMIN_12 = 51


def compute_omega_shift(omega, g, kappa):
    """Total static back-action coefficient Sum_j 2 g_j^2 omega_j / (omega_j^2 + kappa_j^2)."""
    tot = 0.0
    for j in range(omega.shape[0]):
        tot += 2.0 * g[j] * g[j] * omega[j] / (omega[j] * omega[j] + kappa[j] * kappa[j])
    return tot


def cubic_roots(Omega, Delta_a, kappa_a, xi2):
    """Real steady photon numbers n solving n ((Delta_a + Omega n)^2 + kappa_a^2) = xi2.

    Roots come from the companion matrix of the rescaled cubic and are then
    polished by complex Newton iteration on the factored residual; a root is
    accepted as real when |Im| < 1e-9 |root|.  Returns ``(roots, count)``
    with the real roots sorted ascending in ``roots[:count]`` and NaN
    padding behind them.
    """
    roots = np.full(3, np.nan)
    lock = Delta_a * Delta_a + kappa_a * kappa_a
    if Omega == 0.0:
        roots[0] = xi2 / lock
        return roots, 1
    if xi2 == 0.0:
        roots[0] = 0.0
        return roots, 1
    c2 = 2.0 * Delta_a / Omega
    c1 = lock / (Omega * Omega)
    c0 = -xi2 / (Omega * Omega)
    s = abs(c2)
    t = np.sqrt(abs(c1))
    if t > s:
        s = t
    t = abs(c0) ** (1.0 / 3.0)
    if t > s:
        s = t
    if s == 0.0:
        s = 1.0
    C = np.zeros((3, 3), dtype=np.complex128)
    C[0, 2] = -c0 / (s * s * s)
    C[1, 0] = 1.0
    C[1, 2] = -c1 / (s * s)
    C[2, 1] = 1.0
    C[2, 2] = -c2 / s
    w = np.linalg.eigvals(C)
    count = 0
    vals = np.empty(3)
    imrel = np.empty(3)
    resid = np.empty(3)
    for idx in range(3):
        z = w[idx] * s
        for _ in range(60):
            d = Delta_a + Omega * z
            f = z * (d * d + kappa_a * kappa_a) - xi2
            fp = d * d + kappa_a * kappa_a + 2.0 * Omega * z * d
            if fp == 0.0:
                break
            step = f / fp
            z = z - step
            if abs(step) <= 1e-16 * (abs(z) + s):
                break
        az = abs(z)
        imrel[idx] = abs(z.imag) / az if az > 0.0 else 0.0
        d = Delta_a + Omega * z.real
        resid[idx] = abs(z.real * (d * d + kappa_a * kappa_a) - xi2)
        vals[idx] = z.real
        if imrel[idx] < 1e-9:
            count += 1
    if count == 2:
        # a conjugate pair straddled the tolerance; keep only the best real root
        best = 0
        for idx in range(1, 3):
            if resid[idx] < resid[best]:
                best = idx
        roots[0] = vals[best]
        return roots, 1
    k = 0
    for idx in range(3):
        if imrel[idx] < 1e-9:
            roots[k] = vals[idx]
            k += 1
    out = np.sort(roots[:count])
    for idx in range(count):
        roots[idx] = out[idx]
    return roots, count


def reduced_roots(G, Delta_tilde, Omega, kappa_a):
    """Candidate photon numbers for the three root branches in reduced coordinates.

    Branch 0 is n = G^2, real for every parameter choice.  Branches 1 (+) and
    2 (-) exist when the fold discriminant is non-negative and the resulting
    photon number is non-negative.  Returns ``(roots, flags)`` where a flag of
    1.0 marks a real branch; non-real branches hold NaN.
    """
    roots = np.full(3, np.nan)
    flags = np.zeros(3)
    roots[0] = G * G
    flags[0] = 1.0
    if Omega <= 0.0:
        return roots, flags
    lock = kappa_a * kappa_a + Delta_tilde * Delta_tilde
    a = 0.5 * G * G - Delta_tilde / Omega
    b = lock / (Omega * Omega)
    disc = a * a - b
    if disc >= 0.0:
        rt = np.sqrt(disc)
        n1 = a + rt
        if n1 > 0.0:
            roots[1] = n1
            flags[1] = 1.0
            roots[2] = b / n1  # product form avoids cancellation in a - rt
            flags[2] = 1.0
        elif n1 == 0.0:
            roots[1] = 0.0
            flags[1] = 1.0
    return roots, flags


def recover_drive(G, Delta_tilde, Omega, kappa_a):
    """Bare detuning and drive amplitude matching the reduced coordinates."""
    Delta_a = Delta_tilde - Omega * G * G
    xi = G * np.sqrt(Delta_tilde * Delta_tilde + kappa_a * kappa_a)
    return Delta_a, xi


def root_fields(nbar, Delta_a, Omega, kappa_a):
    """Effective detuning and cavity amplitude quadratures at a steady root.

    The drive is gauged real and positive, which fixes the phase of alpha to
    arg(kappa_a + i Delta_k).  The amplitude is taken from nbar directly so
    |alpha|^2 == nbar holds to machine precision.
    """
    Delta_k = Delta_a + Omega * nbar
    denom = np.sqrt(kappa_a * kappa_a + Delta_k * Delta_k)
    amp = np.sqrt(nbar)
    re_a = amp * kappa_a / denom
    im_a = amp * Delta_k / denom
    return Delta_k, re_a, im_a


def build_drift(Delta_k, re_a, im_a, omega, kappa, g, kappa_a):
    """Drift matrix of the linearized fluctuation dynamics around one root.

    Ordering (x_a, p_a, x_1, p_1, ...).  The cavity block rotates at the
    effective detuning of the root; each wall mode couples through its
    position quadrature with strength 2 g_j Re/Im(alpha).
    """
    nm = omega.shape[0]
    n = 2 + 2 * nm
    A = np.zeros((n, n))
    A[0, 0] = -kappa_a
    A[0, 1] = -Delta_k
    A[1, 0] = Delta_k
    A[1, 1] = -kappa_a
    for j in range(nm):
        cc = 2.0 * g[j] * re_a
        ss = 2.0 * g[j] * im_a
        xj = 2 + 2 * j
        pj = xj + 1
        A[0, xj] = ss
        A[1, xj] = -cc
        A[xj, xj] = -kappa[j]
        A[xj, pj] = omega[j]
        A[pj, 0] = -cc
        A[pj, 1] = -ss
        A[pj, xj] = -omega[j]
        A[pj, pj] = -kappa[j]
    return A


def noise_diag(kappa_a, n_a, kappa, nth):
    """Diagonal of the diffusion matrix: 2 kappa_i (n_i + 1/2) per quadrature."""
    nm = kappa.shape[0]
    d = np.empty(2 + 2 * nm)
    d[0] = kappa_a * (2.0 * n_a + 1.0)
    d[1] = d[0]
    for j in range(nm):
        d[2 + 2 * j] = kappa[j] * (2.0 * nth[j] + 1.0)
        d[3 + 2 * j] = d[2 + 2 * j]
    return d


def input_coupling_diag(kappa_a, kappa):
    """Diagonal input-coupling matrix sqrt(2 kappa_i) per quadrature."""
    nm = kappa.shape[0]
    d = np.empty(2 + 2 * nm)
    d[0] = np.sqrt(2.0 * kappa_a)
    d[1] = d[0]
    for j in range(nm):
        d[2 + 2 * j] = np.sqrt(2.0 * kappa[j])
        d[3 + 2 * j] = d[2 + 2 * j]
    return d


def drift_eig_info(A):
    """Largest eigenvalue real part and smallest pairwise |lam_i + lam_j|.

    The second value measures the distance from singularity of the steady
    covariance problem: the Lyapunov operator has eigenvalues lam_i + lam_j.
    """
    w = np.linalg.eigvals(A.astype(np.complex128))
    n = w.shape[0]
    max_re = w[0].real
    for i in range(1, n):
        if w[i].real > max_re:
            max_re = w[i].real
    min_pair = np.inf
    for i in range(n):
        for j in range(i, n):
            v = abs(w[i] + w[j])
            if v < min_pair:
                min_pair = v
    return max_re, min_pair


def lyapunov_solve(A, ddiag):
    """Steady covariance V with A V + V A^T = -diag(ddiag), by dense vectorization.

    The n^2 x n^2 system is assembled explicitly and solved directly, then
    polished with one iterative-refinement pass (re-solving for the
    back-substituted residual); near-marginal drift matrices otherwise
    leave residuals just above the pipeline guard.  The result is
    symmetrized before returning.
    """
    n = A.shape[0]
    m = n * n
    M = np.zeros((m, m))
    rhs = np.zeros(m)
    for i in range(n):
        for j in range(n):
            r = n * i + j
            for k in range(n):
                M[r, n * k + j] += A[i, k]
                M[r, n * i + k] += A[j, k]
        rhs[n * i + i] = -ddiag[i]
    u = np.linalg.solve(M, rhs)
    V = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            V[i, j] = u[n * i + j]
    V = 0.5 * (V + V.T)
    R = A @ V + V @ A.T
    rhs2 = np.empty(m)
    for i in range(n):
        for j in range(n):
            v = R[i, j]
            if i == j:
                v += ddiag[i]
            rhs2[n * i + j] = -v
    u2 = np.linalg.solve(M, rhs2)
    dV = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            dV[i, j] = u2[n * i + j]
    V = V + dV
    return 0.5 * (V + V.T)


def lyapunov_residual(A, V, ddiag):
    """Max-abs entry of A V + V A^T + diag(ddiag)."""
    R = A @ V + V @ A.T
    n = A.shape[0]
    worst = 0.0
    for i in range(n):
        for j in range(n):
            v = R[i, j]
            if i == j:
                v += ddiag[i]
            if abs(v) > worst:
                worst = abs(v)
    return worst


def symplectic_eigs(V):
    """Symplectic spectrum of a covariance matrix, ascending.

    Computed as the moduli of the eigenvalues of i Omega V, which come in
    duplicated pairs; each returned value averages one pair.
    """
    n = V.shape[0]
    M = np.zeros((n, n), dtype=np.complex128)
    for b in range(n // 2):
        for j in range(n):
            M[2 * b, j] = 1j * V[2 * b + 1, j]
            M[2 * b + 1, j] = -1j * V[2 * b, j]
    w = np.linalg.eigvals(M)
    mags = np.sort(np.abs(w))
    out = np.empty(n // 2)
    for k in range(n // 2):
        out[k] = 0.5 * (mags[2 * k] + mags[2 * k + 1])
    return out


def reduce_pair(V, i, j):
    """4x4 covariance of modes i and j (cavity is mode index 0)."""
    out = np.empty((4, 4))
    rows = np.empty(4, dtype=np.int64)
    rows[0] = 2 * i
    rows[1] = 2 * i + 1
    rows[2] = 2 * j
    rows[3] = 2 * j + 1
    for r in range(4):
        for c in range(4):
            out[r, c] = V[rows[r], rows[c]]
    return out


def pt_symplectic_min(V4):
    """Smallest symplectic eigenvalue of the partially transposed pair state.

    Uses the closed determinant form for 1x1-mode bipartitions.  Small
    negative radicands from rounding are clamped; anything worse returns NaN.
    """
    da = V4[0, 0] * V4[1, 1] - V4[0, 1] * V4[1, 0]
    db = V4[2, 2] * V4[3, 3] - V4[2, 3] * V4[3, 2]
    dc = V4[0, 2] * V4[1, 3] - V4[0, 3] * V4[1, 2]
    dv = np.linalg.det(V4)
    sigma = da + db - 2.0 * dc
    rad = sigma * sigma - 4.0 * dv
    if rad < 0.0:
        if rad > -1e-10 * sigma * sigma:
            rad = 0.0
        else:
            return np.nan
    nu2 = 0.5 * (sigma - np.sqrt(rad))
    if nu2 < 0.0:
        if nu2 > -1e-10 * abs(sigma):
            nu2 = 0.0
        else:
            return np.nan
    return np.sqrt(nu2)


def logneg_value(nu):
    """Logarithmic negativity from the minimum PT symplectic eigenvalue."""
    if not np.isfinite(nu):
        return np.nan
    if nu <= 0.0:
        return np.inf
    v = -np.log(2.0 * nu)
    if v > 0.0:
        return v
    return 0.0


def min_variance(V4):
    """Smallest ordinary eigenvalue of the reduced pair covariance."""
    return np.linalg.eigvalsh(V4)[0]


def cell_eval(Delta_tilde, G_eff, omega, kappa, g, kappa_a, nth, n_a,
              stab_tol, cond_tol, resid_tol, out):
    """Full steady-state analysis of one (Delta_tilde, G_eff) cell, two modes.

    Enumerates the root branches, classifies stability, solves the steady
    covariance for each stable root and stores entanglement measures for the
    three mode pairs into the flat record ``out`` (length NREC).  Roots whose
    covariance problem is singular or inaccurate are flagged through the
    error bits and keep NaN measures.
    """
    for t in range(NREC):
        out[t] = np.nan
    Omega = compute_omega_shift(omega, g, kappa)
    G = G_eff * omega[0] / abs(g[0])
    roots, flags = reduced_roots(G, Delta_tilde, Omega, kappa_a)
    Delta_a, _xi = recover_drive(G, Delta_tilde, Omega, kappa_a)

    nreal = 0
    for k in range(3):
        base = REC_ROOT_BASE + REC_ROOT_STRIDE * k
        out[base + RF_REAL] = flags[k]
        if flags[k] == 1.0:
            nreal += 1
            out[base + RF_NBAR] = roots[k]
            out[base + RF_DEGEN] = 0.0
    for k in range(3):
        if flags[k] != 1.0:
            continue
        for k2 in range(k + 1, 3):
            if flags[k2] != 1.0:
                continue
            scale = abs(roots[k])
            if abs(roots[k2]) > scale:
                scale = abs(roots[k2])
            if abs(roots[k] - roots[k2]) <= 1e-9 * scale:
                out[REC_ROOT_BASE + REC_ROOT_STRIDE * k + RF_DEGEN] = 1.0
                out[REC_ROOT_BASE + REC_ROOT_STRIDE * k2 + RF_DEGEN] = 1.0

    nstable = 0
    mask = 0.0
    err_resid = 0.0
    err_cond = 0.0
    err_phys = 0.0
    e_best = np.full(3, np.nan)
    r_best = np.full(3, np.nan)
    nu_min = np.full(3, np.nan)
    for k in range(3):
        if flags[k] != 1.0:
            continue
        base = REC_ROOT_BASE + REC_ROOT_STRIDE * k
        nbar = roots[k]
        Delta_k, re_a, im_a = root_fields(nbar, Delta_a, Omega, kappa_a)
        out[base + RF_DELTA] = Delta_k
        A = build_drift(Delta_k, re_a, im_a, omega, kappa, g, kappa_a)
        anorm = 0.0
        for i in range(6):
            for j in range(6):
                if abs(A[i, j]) > anorm:
                    anorm = abs(A[i, j])
        max_re, min_pair = drift_eig_info(A)
        out[base + RF_MAXRE] = max_re
        stable = 1.0 if max_re <= stab_tol * anorm else 0.0
        out[base + RF_STABLE] = stable
        if stable != 1.0:
            continue
        nstable += 1
        mask += 2.0 ** k
        if min_pair <= cond_tol * anorm:
            err_cond = 1.0
            continue
        d = noise_diag(kappa_a, n_a, kappa, nth)
        dmax = 0.0
        for i in range(6):
            if d[i] > dmax:
                dmax = d[i]
        V = lyapunov_solve(A, d)
        if lyapunov_residual(A, V, d) > resid_tol * dmax:
            err_resid = 1.0
            continue
        sy = symplectic_eigs(V)
        out[base + RF_MINSYM] = sy[0]
        if sy[0] < 0.5 - 1e-9:
            err_phys = 1.0
        for p in range(3):
            if p == 0:
                V4 = reduce_pair(V, 0, 1)
            elif p == 1:
                V4 = reduce_pair(V, 0, 2)
            else:
                V4 = reduce_pair(V, 1, 2)
            nu = pt_symplectic_min(V4)
            e = logneg_value(nu)
            mv = min_variance(V4)
            out[base + RF_E_A1 + p] = e
            out[base + RF_NU_A1 + p] = mv
            if np.isfinite(e) and (not np.isfinite(e_best[p]) or e > e_best[p]):
                e_best[p] = e
                r_best[p] = float(k)
            if np.isfinite(mv) and (not np.isfinite(nu_min[p]) or mv < nu_min[p]):
                nu_min[p] = mv

    out[REC_NREAL] = float(nreal)
    out[REC_NSTABLE] = float(nstable)
    out[REC_MASK] = mask
    out[REC_ERROR] = err_resid * 1.0 + err_cond * 2.0 + err_phys * 4.0
    out[REC_EMAX_A1] = e_best[0]
    out[REC_ROOT_A1] = r_best[0]
    out[REC_EMAX_A2] = e_best[1]
    out[REC_ROOT_A2] = r_best[1]
    out[REC_EMAX_12] = e_best[2]
    out[REC_ROOT_12] = r_best[2]
    out[REC_NUMIN_A1] = nu_min[0]
    out[REC_NUMIN_A2] = nu_min[1]
    out[REC_NUMIN_12] = nu_min[2]
    return out


def grid_eval(deltas, geffs, omega, kappa, g, kappa_a, nth, n_a,
              stab_tol, cond_tol, resid_tol, out):
    """Evaluate cell_eval over a (len(deltas), len(geffs)) grid into ``out``."""
    for i in range(deltas.shape[0]):
        for j in range(geffs.shape[0]):
            cell_eval(deltas[i], geffs[j], omega, kappa, g, kappa_a, nth, n_a,
                      stab_tol, cond_tol, resid_tol, out[i, j])
    return out


def spectrum_curve(A, d0, chi, omegas, rows):
    """Stationary output noise spectrum summed over the selected quadrature rows.

    For each frequency the closed-loop transfer matrix
    T = -(I + D0 (A + i w I)^{-1} D0) is applied to the input spectral
    matrix chi; the returned value is sum_r [T chi T^dag]_{rr}, which is real
    for a real drift matrix and Hermitian chi.
    """
    n = A.shape[0]
    Ac = A.astype(np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    S = np.zeros(omegas.shape[0])
    trow = np.empty(n, dtype=np.complex128)
    for t in range(omegas.shape[0]):
        M = Ac + 1j * omegas[t] * eye
        R = np.linalg.solve(M, eye)
        tot = 0.0
        for ri in range(rows.shape[0]):
            r = rows[ri]
            for c in range(n):
                v = d0[r] * R[r, c] * d0[c]
                if c == r:
                    v = v + 1.0
                trow[c] = -v
            for a_ in range(n):
                za = trow[a_]
                for b_ in range(n):
                    tot += (za * chi[a_, b_] * np.conj(trow[b_])).real
        S[t] = tot
    return S


KERNEL_NAMES = (
    "compute_omega_shift",
    "cubic_roots",
    "reduced_roots",
    "recover_drive",
    "root_fields",
    "build_drift",
    "noise_diag",
    "input_coupling_diag",
    "drift_eig_info",
    "lyapunov_solve",
    "lyapunov_residual",
    "symplectic_eigs",
    "reduce_pair",
    "pt_symplectic_min",
    "logneg_value",
    "min_variance",
    "cell_eval",
    "grid_eval",
    "spectrum_curve",
)
