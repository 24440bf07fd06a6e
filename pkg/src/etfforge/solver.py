"""Numerical search for 2-circulant equiangular tight frames.

The frame [C_x | C_y] built from two circulant d x d blocks is an ETF
exactly when the correlation sequences

    u_j = sum_m x_m conj(x_{m+j})        (x against itself)
    v_j = sum_m y_m conj(y_{m+j})        (y against itself)
    c_j = sum_m y_m conj(x_{m+j})        (y against x)

satisfy unit norms (u_0 = v_0 = 1), tightness (u_j + v_j = 0 for j != 0)
and equal moduli (|u_j| = |c_j| = |c_0| for j != 0).  The residual below
lists one real equation per independent constraint; a Levenberg-Marquardt
loop with the exact Jacobian drives it to zero.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericFailureError
from .frames import CirculantPair, welch_gamma


def correlations(x, y):
    """(u, v, c) as defined in the module docstring, via FFTs."""
    fx = np.fft.fft(x)
    fy = np.fft.fft(y)
    u = np.conj(np.fft.ifft(np.abs(fx) ** 2))
    v = np.conj(np.fft.ifft(np.abs(fy) ** 2))
    c = np.conj(np.fft.ifft(fx * np.conj(fy)))
    return u, v, c


def residual_count(d):
    return 2 * d + d // 2 + 1


def residual(pair, w):
    """Real residual vector of length 2d + floor(d/2) + 1.

    Layout: [0] |x|^2-1; [1] |y|^2-1; d tightness rows (lag 0 pinned to
    4w, lags 0<j<d/2 real and imaginary parts, lag d/2 real only when d
    is even); floor(d/2) equal-modulus rows |u_j|^2 - |c_0|^2; d-1 rows
    |c_j|^2 - |c_0|^2.
    """
    d = pair.d
    u, v, c = correlations(pair.x, pair.y)
    rows = np.empty(residual_count(d))
    rows[0] = u[0].real - 1.0
    rows[1] = v[0].real - 1.0
    k = 2
    s = u + v
    rows[k] = s[0].real - 4.0 * w
    k += 1
    for j in range(1, (d + 1) // 2):
        rows[k] = s[j].real
        rows[k + 1] = s[j].imag
        k += 2
    if d % 2 == 0:
        rows[k] = s[d // 2].real
        k += 1
    pivot = abs(c[0]) ** 2
    for j in range(1, d // 2 + 1):
        rows[k] = abs(u[j]) ** 2 - pivot
        k += 1
    for j in range(1, d):
        rows[k] = abs(c[j]) ** 2 - pivot
        k += 1
    return rows


def analytic_jacobian(pair, w):
    """Exact Jacobian of `residual` in the variables
    (Re x, Im x, Re y, Im y, w), shape (2d + floor(d/2) + 1, 4d + 1)."""
    d = pair.d
    x, y = pair.x, pair.y
    u, v, c = correlations(x, y)
    idx = np.arange(d)
    m1 = (idx[None, :] - idx[:, None]) % d  # (l - j) mod d
    m2 = (idx[None, :] + idx[:, None]) % d  # (l + j) mod d
    xm1, xm2c = x[m1], np.conj(x)[m2]
    ym1, ym2c = y[m1], np.conj(y)[m2]
    du_da = xm1 + xm2c
    du_db = 1j * (xm2c - xm1)
    dv_dp = ym1 + ym2c
    dv_dq = 1j * (ym2c - ym1)
    dc_da = ym1
    dc_db = -1j * ym1
    dc_dp = xm2c
    dc_dq = 1j * xm2c
    rows = residual_count(d)
    jac = np.zeros((rows, 4 * d + 1))
    a_sl, b_sl = slice(0, d), slice(d, 2 * d)
    p_sl, q_sl = slice(2 * d, 3 * d), slice(3 * d, 4 * d)
    jac[0, a_sl] = 2.0 * x.real
    jac[0, b_sl] = 2.0 * x.imag
    jac[1, p_sl] = 2.0 * y.real
    jac[1, q_sl] = 2.0 * y.imag
    k = 2
    jac[k, a_sl] = du_da[0].real
    jac[k, b_sl] = du_db[0].real
    jac[k, p_sl] = dv_dp[0].real
    jac[k, q_sl] = dv_dq[0].real
    jac[k, 4 * d] = -4.0
    k += 1
    for j in range(1, (d + 1) // 2):
        jac[k, a_sl] = du_da[j].real
        jac[k, b_sl] = du_db[j].real
        jac[k, p_sl] = dv_dp[j].real
        jac[k, q_sl] = dv_dq[j].real
        jac[k + 1, a_sl] = du_da[j].imag
        jac[k + 1, b_sl] = du_db[j].imag
        jac[k + 1, p_sl] = dv_dp[j].imag
        jac[k + 1, q_sl] = dv_dq[j].imag
        k += 2
    if d % 2 == 0:
        h = d // 2
        jac[k, a_sl] = du_da[h].real
        jac[k, b_sl] = du_db[h].real
        jac[k, p_sl] = dv_dp[h].real
        jac[k, q_sl] = dv_dq[h].real
        k += 1
    # d|z|^2 = 2 Re(conj(z) dz); the pivot |c_0|^2 enters every modulus row
    c0 = np.conj(c[0])
    piv_a = 2.0 * (c0 * dc_da[0]).real
    piv_b = 2.0 * (c0 * dc_db[0]).real
    piv_p = 2.0 * (c0 * dc_dp[0]).real
    piv_q = 2.0 * (c0 * dc_dq[0]).real
    for j in range(1, d // 2 + 1):
        uj = np.conj(u[j])
        jac[k, a_sl] = 2.0 * (uj * du_da[j]).real - piv_a
        jac[k, b_sl] = 2.0 * (uj * du_db[j]).real - piv_b
        jac[k, p_sl] = -piv_p
        jac[k, q_sl] = -piv_q
        k += 1
    for j in range(1, d):
        cj = np.conj(c[j])
        jac[k, a_sl] = 2.0 * (cj * dc_da[j]).real - piv_a
        jac[k, b_sl] = 2.0 * (cj * dc_db[j]).real - piv_b
        jac[k, p_sl] = 2.0 * (cj * dc_dp[j]).real - piv_p
        jac[k, q_sl] = 2.0 * (cj * dc_dq[j]).real - piv_q
        k += 1
    return jac


@dataclass(frozen=True)
class SolveResult:
    pair: CirculantPair
    w: float
    residual_inf: float
    iterations: int
    converged: bool
    seed: int

    def to_obj(self):
        obj = self.pair.to_obj()
        obj["w"] = self.w
        obj["residual_inf"] = self.residual_inf
        obj["iterations"] = self.iterations
        obj["converged"] = self.converged
        obj["seed"] = self.seed
        return obj


def _pack(pair, w):
    return np.concatenate(
        [pair.x.real, pair.x.imag, pair.y.real, pair.y.imag, [w]]
    )


def _unpack(vec, d):
    x = vec[0:d] + 1j * vec[d : 2 * d]
    y = vec[2 * d : 3 * d] + 1j * vec[3 * d : 4 * d]
    return CirculantPair(d=d, x=x, y=y), float(vec[4 * d])


def solve(d, seed=0, tol=1e-12, max_iter=500):
    """Levenberg-Marquardt search from a seeded random start.

    w stays fixed at 1/2; only the generator coordinates move.
    Deterministic for a given (d, seed).  Convergence means the residual
    infinity norm drops to tol or below.
    """
    d = int(d)
    if d < 2:
        raise InvalidArgumentError("solver needs d >= 2")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=d) + 1j * rng.normal(size=d)
    y = rng.normal(size=d) + 1j * rng.normal(size=d)
    x /= np.linalg.norm(x)
    y /= np.linalg.norm(y)
    w = 0.5
    vec = _pack(CirculantPair(d=d, x=x, y=y), w)
    pair, _ = _unpack(vec, d)
    r = residual(pair, w)
    cost = float(r @ r)
    lam = 1e-3
    n_var = 4 * d
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if float(np.max(np.abs(r))) <= tol:
            iterations -= 1
            break
        jac = analytic_jacobian(pair, w)[:, :n_var]
        jtj = jac.T @ jac
        jtr = jac.T @ r
        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(jtj + lam * np.eye(n_var), -jtr)
            except np.linalg.LinAlgError:
                lam *= 2.0
                continue
            trial_vec = vec.copy()
            trial_vec[:n_var] += step
            trial_pair, _ = _unpack(trial_vec, d)
            trial_r = residual(trial_pair, w)
            trial_cost = float(trial_r @ trial_r)
            if trial_cost < cost:
                vec, pair, r, cost = trial_vec, trial_pair, trial_r, trial_cost
                lam = max(lam / 2.0, 1e-14)
                accepted = True
                break
            lam *= 2.0
        if not accepted:
            break
    res_inf = float(np.max(np.abs(r)))
    return SolveResult(
        pair=pair,
        w=w,
        residual_inf=res_inf,
        iterations=iterations,
        converged=res_inf <= tol,
        seed=int(seed),
    )


def alternating_projections_gram(d, n, seed=0, iterations=2000):
    """Alternate the spectral projection (top d eigenvalues set to n/d,
    the rest to zero) with the structural one (unit diagonal, off-diagonal
    phases kept but moduli forced to the equiangular value).  Ends on the
    structural step, so the output has exact diagonal and moduli.
    """
    d, n = int(d), int(n)
    if not 1 <= d < n:
        raise InvalidArgumentError("need 1 <= d < n")
    gamma = welch_gamma(d, n)
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, n)) + 1j * rng.normal(size=(d, n))
    a /= np.linalg.norm(a, axis=0, keepdims=True)
    g = a.conj().T @ a
    off = ~np.eye(n, dtype=bool)
    prev = None
    for _ in range(iterations):
        # structural step
        h = g.copy()
        np.fill_diagonal(h, 1.0)
        mods = np.abs(h)
        zeros = off & (mods < 1e-300)
        safe = np.where(mods > 0, mods, 1.0)
        h[off] = (h / safe * gamma)[off]
        h[zeros] = gamma
        # spectral step
        vals, vecs = np.linalg.eigh((h + h.conj().T) / 2.0)
        top = vecs[:, -d:]
        g = (n / d) * (top @ top.conj().T)
        if prev is not None and float(np.max(np.abs(g - prev))) < 1e-14:
            break
        prev = g
    h = g.copy()
    np.fill_diagonal(h, 1.0)
    mods = np.abs(h)
    zeros = off & (mods < 1e-300)
    safe = np.where(mods > 0, mods, 1.0)
    h[off] = (h / safe * gamma)[off]
    h[zeros] = gamma
    return h


@dataclass(frozen=True)
class D4Record:
    trial: int
    max_abs_re: float
    rounding_ok: bool


@dataclass(frozen=True)
class D4Report:
    trials: int
    worst_re: float
    all_rounded: bool
    records: tuple


def d4_uniqueness_experiment(trials=1000, iterations=2000, seed=0, csv_path=None):
    """Alternating projections at d=4, n=8 from random starts.

    Every run's signature is switched so the first row and column become
    +1; the residual 7 x 7 core is then measured for real parts (they
    vanish when the limit is the conference-matrix frame) and rounded to
    the exact Gaussian-integer signature, which is checked to square to
    7 I over the integers.
    """
    records = []
    eye7 = np.eye(7, dtype=np.int64)
    for trial in range(int(trials)):
        g = alternating_projections_gram(4, 8, seed=[int(seed), trial], iterations=iterations)
        gamma = welch_gamma(4, 8)
        s = (g - np.eye(8)) / gamma
        np.fill_diagonal(s, 0.0)
        dvec = np.conj(s[0]).copy()
        dvec[0] = 1.0
        switched = np.conj(dvec)[:, None] * s * dvec[None, :]
        core = switched[1:, 1:]
        off7 = ~np.eye(7, dtype=bool)
        max_abs_re = float(np.max(np.abs(core[off7].real)))
        signs = np.sign(core.imag).astype(np.int64)
        np.fill_diagonal(signs, 0)
        ok = bool(np.all(signs[off7] != 0))
        if ok:
            re_r = np.zeros((8, 8), dtype=np.int64)
            im_r = np.zeros((8, 8), dtype=np.int64)
            re_r[0, 1:] = 1
            re_r[1:, 0] = 1
            im_r[1:, 1:] = signs
            sq_re = re_r @ re_r - im_r @ im_r
            sq_im = re_r @ im_r + im_r @ re_r
            ok = bool(
                np.array_equal(sq_re, 7 * np.eye(8, dtype=np.int64))
                and np.array_equal(sq_im, np.zeros((8, 8), dtype=np.int64))
            )
        records.append(D4Record(trial=trial, max_abs_re=max_abs_re, rounding_ok=ok))
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "max_abs_re", "rounding_ok"])
            for rec in records:
                writer.writerow([rec.trial, "%.17g" % rec.max_abs_re, rec.rounding_ok])
    worst = max((rec.max_abs_re for rec in records), default=0.0)
    all_ok = all(rec.rounding_ok for rec in records)
    return D4Report(
        trials=int(trials), worst_re=worst, all_rounded=all_ok, records=tuple(records)
    )
