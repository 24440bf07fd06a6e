"""Rigorous existence certificates for 2-circulant ETF solutions.

Given a floating approximation x0 of the residual system's zero, a
derivative-free Newton-Kantorovich argument proves a true zero nearby:
build the secant Jacobian S with step delta in interval arithmetic, take
any floating right inverse T of its midpoint, bound

    A  >= ||S T - I||_inf,   B_T >= ||T||_inf,   C0 >= ||f(x0)||_inf

rigorously, and find eps > 0 with ||x0||_inf + eps <= 1 making the
quadratic

    Q(eps) = B eps^2 + (A + dtil B / 2 - 1) eps + B_T C0 < 0,

where B = 16 d^2 * 12 * B_T packs the residual's coefficient-norm bound
(|f| <= 16 d^2, total degree 4, so D(D-1) = 12) and dtil accounts for the
secant step.  Success proves a solution within eps of x0.

All interval evaluation here uses direct O(d^2) correlation sums; the
FFTs in the floating solver never enter the rigorous path.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    CertificationError,
    InvalidArgumentError,
    NumericFailureError,
    RankDeficiencyError,
)
from .frames import CirculantPair
from .linalg import pseudoinverse
from .rigor import (
    Interval,
    IntervalMatrix,
    iv_add,
    iv_div,
    iv_matmul,
    iv_mat_sub,
    iv_mul,
    iv_norm_inf,
    iv_sub,
    vadd,
    vdiv,
    vmul,
    vscale,
    vsqr,
    vsub,
)
from .solver import residual_count


def _iv_sum_last(lo, hi):
    """Sum intervals along the last axis by pairwise folding."""
    while lo.shape[-1] > 1:
        n = lo.shape[-1]
        if n % 2:
            pad = np.zeros(lo.shape[:-1] + (1,))
            lo = np.concatenate([lo, pad], axis=-1)
            hi = np.concatenate([hi, pad], axis=-1)
            n += 1
        half = n // 2
        lo, hi = vadd(lo[..., :half], hi[..., :half], lo[..., half:], hi[..., half:])
    return lo[..., 0], hi[..., 0]


def _correlation_block(s_lo, s_hi, t_lo, t_hi, idx):
    """Interval sums sum_m s_m * t_(m+j) for all j, given index table idx."""
    a_lo = np.broadcast_to(s_lo[None, :], idx.shape)
    a_hi = np.broadcast_to(s_hi[None, :], idx.shape)
    b_lo = t_lo[idx]
    b_hi = t_hi[idx]
    p_lo, p_hi = vmul(a_lo, a_hi, b_lo, b_hi)
    return _iv_sum_last(p_lo, p_hi)


def f_eval_interval(z, d):
    """Residual system over interval inputs.

    z is a (lo, hi) pair of shape-(4d+1) arrays ordered (Re x, Im x,
    Re y, Im y, w).  Returns (lo, hi) arrays over the residual rows, in
    the exact layout of solver.residual.
    """
    lo, hi = z
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = int(d)
    if lo.shape != (4 * d + 1,) or hi.shape != (4 * d + 1,):
        raise InvalidArgumentError("interval input must have 4d+1 entries")
    sl = {
        "a": slice(0, d),
        "b": slice(d, 2 * d),
        "p": slice(2 * d, 3 * d),
        "q": slice(3 * d, 4 * d),
    }
    part = {k: (lo[v], hi[v]) for k, v in sl.items()}
    w = (lo[4 * d], hi[4 * d])
    m = np.arange(d)
    idx = (m[None, :] + m[:, None]) % d  # idx[j, m] = m + j

    def corr(s_name, t_name):
        s_lo, s_hi = part[s_name]
        t_lo, t_hi = part[t_name]
        return _correlation_block(s_lo, s_hi, t_lo, t_hi, idx)

    # u_j = sum x_m conj(x_{m+j});  Re: aa' + bb',  Im: ba' - ab'
    u_re = vadd(*corr("a", "a"), *corr("b", "b"))
    u_im = vsub(*corr("b", "a"), *corr("a", "b"))
    v_re = vadd(*corr("p", "p"), *corr("q", "q"))
    v_im = vsub(*corr("q", "p"), *corr("p", "q"))
    # c_j = sum y_m conj(x_{m+j});  Re: pa' + qb',  Im: qa' - pb'
    c_re = vadd(*corr("p", "a"), *corr("q", "b"))
    c_im = vsub(*corr("q", "a"), *corr("p", "b"))

    rows_lo = np.empty(residual_count(d))
    rows_hi = np.empty(residual_count(d))

    def put(k, pair):
        rows_lo[k], rows_hi[k] = pair

    def at(arrpair, j):
        return arrpair[0][j], arrpair[1][j]

    put(0, vsub(*at(u_re, 0), 1.0, 1.0))
    put(1, vsub(*at(v_re, 0), 1.0, 1.0))
    s_re = vadd(*u_re, *v_re)
    s_im = vadd(*u_im, *v_im)
    k = 2
    w4 = vscale(w[0], w[1], 4.0)
    put(k, vsub(*at(s_re, 0), *w4))
    k += 1
    for j in range(1, (d + 1) // 2):
        put(k, at(s_re, j))
        put(k + 1, at(s_im, j))
        k += 2
    if d % 2 == 0:
        put(k, at(s_re, d // 2))
        k += 1

    def abs2(re_pair, im_pair, j):
        r = vsqr(*at(re_pair, j))
        i = vsqr(*at(im_pair, j))
        return vadd(*r, *i)

    pivot = abs2(c_re, c_im, 0)
    for j in range(1, d // 2 + 1):
        put(k, vsub(*abs2(u_re, u_im, j), *pivot))
        k += 1
    for j in range(1, d):
        put(k, vsub(*abs2(c_re, c_im, j), *pivot))
        k += 1
    return rows_lo, rows_hi


def secant_jacobian(x0, delta, d):
    """Interval enclosure of the secant Jacobian at x0 with step delta.

    Column l holds (f(x0 + step_l e_l) - f(x0)) / step_l where step_l is
    the exactly representable float x0_l (+) delta - x0_l.  Returns the
    matrix and the largest step actually taken.
    """
    x0 = np.asarray(x0, dtype=float)
    d = int(d)
    n_var = 4 * d + 1
    if x0.shape != (n_var,):
        raise InvalidArgumentError("x0 must have 4d+1 entries")
    if not np.all(np.isfinite(x0)) or not 0 < delta < 1:
        raise InvalidArgumentError("x0 must be finite and 0 < delta < 1")
    f0_lo, f0_hi = f_eval_interval((x0, x0), d)
    rows = residual_count(d)
    s_lo = np.empty((rows, n_var))
    s_hi = np.empty((rows, n_var))
    step_max = 0.0
    for l in range(n_var):
        xp = x0.copy()
        xp[l] = x0[l] + delta
        step = xp[l] - x0[l]
        if step <= 0.0:
            raise NumericFailureError("secant step vanished at coordinate %d" % l)
        step_max = max(step_max, step)
        fp_lo, fp_hi = f_eval_interval((xp, xp), d)
        diff_lo, diff_hi = vsub(fp_lo, fp_hi, f0_lo, f0_hi)
        col_lo, col_hi = vdiv(diff_lo, diff_hi, np.full(rows, step), np.full(rows, step))
        s_lo[:, l] = col_lo
        s_hi[:, l] = col_hi
    return IntervalMatrix(s_lo, s_hi), step_max


@dataclass(frozen=True)
class Certificate:
    """Verified enclosure: a true residual zero lies within epsilon of
    the packed point x0 (in the infinity norm).

    All bound_* fields are certified upper bounds; verified is only set
    when lhs_upper < rhs_lower holds strictly in outward-rounded
    arithmetic.
    """

    d: int
    seed: int
    x0: tuple
    delta: float
    delta_eff: float
    epsilon: float
    bound_ST_minus_I: float
    bound_T_norm: float
    bound_f_x0: float
    f_abs_bound: float
    lhs_upper: float
    rhs_lower: float
    q_value: float
    kernel_dim: int
    rows: int
    variables: int
    verified: bool

    def to_obj(self):
        return {
            "kind": "certificate",
            "d": self.d,
            "seed": self.seed,
            "x0": list(self.x0),
            "delta": self.delta,
            "delta_eff": self.delta_eff,
            "epsilon": self.epsilon,
            "bound_ST_minus_I": self.bound_ST_minus_I,
            "bound_T_norm": self.bound_T_norm,
            "bound_f_x0": self.bound_f_x0,
            "f_abs_bound": self.f_abs_bound,
            "lhs_upper": self.lhs_upper,
            "rhs_lower": self.rhs_lower,
            "q_value": self.q_value,
            "kernel_dim": self.kernel_dim,
            "rows": self.rows,
            "variables": self.variables,
            "verified": self.verified,
        }


def _pack_point(pair, w):
    return np.concatenate(
        [pair.x.real, pair.x.imag, pair.y.real, pair.y.imag, [float(w)]]
    )


def certify(pair, delta=1e-10, w=0.5, seed=-1):
    """Produce a Certificate for a near-solution pair, or raise
    CertificationError (reason "rank" or "infeasible")."""
    if not isinstance(pair, CirculantPair):
        raise InvalidArgumentError("certify expects a CirculantPair")
    d = pair.d
    x0 = _pack_point(pair, w)
    norm_x0 = float(np.max(np.abs(x0)))
    cap = 1.0 - norm_x0
    if cap <= 0.0:
        raise CertificationError(
            "infeasible", "point infinity norm %.6f leaves no room for epsilon" % norm_x0
        )
    s_mat, delta_eff = secant_jacobian(x0, delta, d)
    try:
        t = pseudoinverse(s_mat.mid())
    except RankDeficiencyError as exc:
        raise CertificationError(
            "rank",
            "secant Jacobian midpoint is numerically rank deficient",
            detail=exc.smallest_sv,
        ) from exc
    rows = residual_count(d)
    st = iv_matmul(s_mat, t)
    eye = IntervalMatrix.from_point(np.eye(rows))
    a_iv = iv_norm_inf(iv_mat_sub(st, eye))
    a_bound = Interval(a_iv.hi)
    bt = Interval(iv_norm_inf(IntervalMatrix.from_point(t)).hi)
    f0_lo, f0_hi = f_eval_interval((x0, x0), d)
    c0 = Interval(float(np.max(np.maximum(np.abs(f0_lo), np.abs(f0_hi)))))
    de = Interval(delta_eff)
    reach = iv_add(Interval(norm_x0), de)
    base = Interval(max(1.0, reach.hi))
    dtil = iv_mul(de, iv_mul(base, base))
    f_abs = float(16 * d * d)
    big_b = iv_mul(Interval(12.0 * f_abs), bt)  # coefficient bound times D(D-1), D = 4
    half_dtil = iv_mul(Interval(0.5), dtil)
    lin = iv_sub(iv_add(a_bound, iv_mul(half_dtil, big_b)), Interval(1.0))
    const = iv_mul(bt, c0)

    def sides(eps):
        e = Interval(eps)
        lhs = iv_add(a_bound, iv_mul(iv_add(half_dtil, e), big_b))
        rhs = iv_sub(Interval(1.0), iv_div(const, e))
        return lhs, rhs

    def q_at(eps):
        e = Interval(eps)
        quad = iv_mul(big_b, iv_mul(e, e))
        return iv_add(iv_add(quad, iv_mul(lin, e)), const)

    candidates = []
    if big_b.hi > 0 and lin.hi < 0:
        vertex = -lin.hi / (2.0 * big_b.hi)
        if 0.0 < vertex <= cap:
            candidates.append(vertex)
    candidates.extend(float(e) for e in np.geomspace(1e-13, cap, 32))
    best_gap = math.inf
    for eps in candidates:
        if not 0.0 < eps <= cap:
            continue
        if iv_add(Interval(norm_x0), Interval(eps)).hi > 1.0:
            continue
        lhs, rhs = sides(eps)
        best_gap = min(best_gap, lhs.hi - rhs.lo)
        if lhs.hi < rhs.lo:
            q = q_at(eps)
            return Certificate(
                d=d,
                seed=int(seed),
                x0=tuple(float(v) for v in x0),
                delta=float(delta),
                delta_eff=float(delta_eff),
                epsilon=float(eps),
                bound_ST_minus_I=float(a_bound.hi),
                bound_T_norm=float(bt.hi),
                bound_f_x0=float(c0.hi),
                f_abs_bound=f_abs,
                lhs_upper=float(lhs.hi),
                rhs_lower=float(rhs.lo),
                q_value=float(q.hi),
                kernel_dim=4 * d + 1 - rows,
                rows=rows,
                variables=4 * d + 1,
                verified=True,
            )
    raise CertificationError(
        "infeasible",
        "no epsilon makes the contraction inequality hold (best gap %.3e)"
        % best_gap,
        detail=best_gap,
    )


@dataclass(frozen=True)
class RangeResult:
    """Outcome for one dimension of a certification sweep.  verified
    mirrors the certificate when present; failures keep the sweep alive
    and carry the reason instead."""

    d: int
    verified: bool
    certificate: Optional[Certificate]
    failure_reason: Optional[str]
    failure_message: Optional[str]

    def to_obj(self):
        return {
            "kind": "range_result",
            "d": self.d,
            "verified": self.verified,
            "certificate": None if self.certificate is None else self.certificate.to_obj(),
            "failure_reason": self.failure_reason,
            "failure_message": self.failure_message,
        }


def _certify_dimension(args):
    d, seeds, delta, tol, max_iter = args
    from .solver import solve

    best_residual = math.inf
    reason = None
    message = None
    for seed in seeds:
        result = solve(d, seed=seed, tol=tol, max_iter=max_iter)
        if not result.converged:
            best_residual = min(best_residual, result.residual_inf)
            continue
        try:
            cert = certify(result.pair, delta=delta, seed=seed)
        except CertificationError as exc:
            # certification failures outrank plain non-convergence notes
            reason = exc.reason
            message = str(exc)
            continue
        return RangeResult(
            d=d,
            verified=cert.verified,
            certificate=cert,
            failure_reason=None,
            failure_message=None,
        )
    if reason is None:
        reason = "no-convergence"
        message = "solver missed tolerance for d=%d over seeds %s (best residual %.3e)" % (
            d,
            list(seeds),
            best_residual,
        )
    return RangeResult(
        d=d,
        verified=False,
        certificate=None,
        failure_reason=reason,
        failure_message=message,
    )


def certify_range(d_lo, d_hi, seeds=(0, 1, 2, 3, 4), delta=1e-10, jobs=1,
                  tol=1e-12, max_iter=500):
    """Solve and certify every dimension in [d_lo, d_hi], one RangeResult
    per dimension.  Per-dimension failures are recorded in the result,
    never raised, so one bad dimension cannot abort the sweep.  With
    jobs > 1 the dimensions are distributed over a process pool."""
    d_lo, d_hi = int(d_lo), int(d_hi)
    if d_lo < 2:
        raise InvalidArgumentError("certification starts at d = 2")
    if d_hi < d_lo:
        return []
    work = [(d, tuple(seeds), delta, tol, max_iter) for d in range(d_lo, d_hi + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
            return list(pool.map(_certify_dimension, work))
    return [_certify_dimension(item) for item in work]


def _poly_add(target, key, coeff):
    new = target.get(key, 0.0) + coeff
    if new == 0.0:
        target.pop(key, None)
    else:
        target[key] = new


def _poly_sum(*polys):
    out = {}
    for sign, poly in polys:
        for key, coeff in poly.items():
            _poly_add(out, key, sign * coeff)
    return out


def _poly_mul(pa, pb):
    out = {}
    for ka, ca in pa.items():
        for kb, cb in pb.items():
            _poly_add(out, tuple(sorted(ka + kb)), ca * cb)
    return out


def _residual_polynomials(d):
    """The residual rows as explicit real polynomials in the 4d+1
    variables, keyed by sorted tuples of variable indices."""
    d = int(d)
    a = lambda l: l % d
    b = lambda l: d + l % d
    p = lambda l: 2 * d + l % d
    q = lambda l: 3 * d + l % d
    w_idx = 4 * d

    def corr(f_idx, g_idx, j):
        out = {}
        for m_ in range(d):
            _poly_add(out, tuple(sorted((f_idx(m_), g_idx(m_ + j)))), 1.0)
        return out

    def u_parts(f1, f2, j):
        re = _poly_sum((1.0, corr(f1, f1, j)), (1.0, corr(f2, f2, j)))
        im = _poly_sum((1.0, corr(f2, f1, j)), (-1.0, corr(f1, f2, j)))
        return re, im

    def c_parts(j):
        re = _poly_sum((1.0, corr(p, a, j)), (1.0, corr(q, b, j)))
        im = _poly_sum((1.0, corr(q, a, j)), (-1.0, corr(p, b, j)))
        return re, im

    rows = []
    u = [u_parts(a, b, j) for j in range(d)]
    v = [u_parts(p, q, j) for j in range(d)]
    c = [c_parts(j) for j in range(d)]
    rows.append(_poly_sum((1.0, u[0][0]), (1.0, {(): -1.0})))
    rows.append(_poly_sum((1.0, v[0][0]), (1.0, {(): -1.0})))
    rows.append(_poly_sum((1.0, u[0][0]), (1.0, v[0][0]), (1.0, {(w_idx,): -4.0})))
    for j in range(1, (d + 1) // 2):
        rows.append(_poly_sum((1.0, u[j][0]), (1.0, v[j][0])))
        rows.append(_poly_sum((1.0, u[j][1]), (1.0, v[j][1])))
    if d % 2 == 0:
        h = d // 2
        rows.append(_poly_sum((1.0, u[h][0]), (1.0, v[h][0])))

    def abs2(parts):
        re, im = parts
        return _poly_sum((1.0, _poly_mul(re, re)), (1.0, _poly_mul(im, im)))

    pivot = abs2(c[0])
    for j in range(1, d // 2 + 1):
        rows.append(_poly_sum((1.0, abs2(u[j])), (-1.0, pivot)))
    for j in range(1, d):
        rows.append(_poly_sum((1.0, abs2(c[j])), (-1.0, pivot)))
    return rows


def coefficient_norms(d):
    """Per-row (total degree, coefficient 1-norm) of the residual system,
    from the expanded polynomials."""
    rows = _residual_polynomials(d)
    out = []
    for poly in rows:
        degree = max((len(k) for k in poly), default=0)
        norm = float(sum(abs(cf) for cf in poly.values()))
        out.append((degree, norm))
    return out
