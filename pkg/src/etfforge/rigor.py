"""Directed-rounded interval arithmetic on binary64 endpoints.

Every arithmetic operation evaluates with the hardware's round-to-nearest
and then nudges each endpoint outward by one ulp via nextafter.  Since
round-to-nearest lands within half an ulp of the exact value, the nudged
endpoints are guaranteed to bracket it.  This costs at most two ulps of
slack per endpoint but never touches the FPU rounding mode, so it is
portable and safe under numpy's vectorized kernels.

Absolute value and negation are exact in binary64 and are not nudged.
Infinities may appear only as the result of overflow; NaN is rejected.
"""

import numpy as np

from .errors import IntervalDivisionError, InvalidArgumentError

_NEG_INF = -np.inf
_POS_INF = np.inf


def _down(a):
    return np.nextafter(a, _NEG_INF)


def _up(a):
    return np.nextafter(a, _POS_INF)


# Vectorized endpoint kernels.  All take/return ndarrays (or scalars via
# numpy broadcasting) and are shared by Interval, IntervalMatrix, and the
# certification residual evaluator.

def vadd(alo, ahi, blo, bhi):
    return _down(alo + blo), _up(ahi + bhi)


def vsub(alo, ahi, blo, bhi):
    return _down(alo - bhi), _up(ahi - blo)


def vmul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return _down(lo), _up(hi)


def vscale(alo, ahi, b):
    """Multiply interval data by a pointwise float array b (exact input)."""
    p1 = alo * b
    p2 = ahi * b
    return _down(np.minimum(p1, p2)), _up(np.maximum(p1, p2))


def vdiv(alo, ahi, blo, bhi):
    if np.any((blo <= 0.0) & (bhi >= 0.0)):
        raise IntervalDivisionError("division by an interval containing zero")
    q1 = alo / blo
    q2 = alo / bhi
    q3 = ahi / blo
    q4 = ahi / bhi
    lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
    hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
    return _down(lo), _up(hi)


def vabs(alo, ahi):
    lo = np.where(alo > 0.0, alo, np.where(ahi < 0.0, -ahi, 0.0))
    hi = np.maximum(-alo, ahi)
    return lo, hi


def vsqr(alo, ahi):
    lo_m = np.minimum(np.abs(alo), np.abs(ahi))
    hi_m = np.maximum(np.abs(alo), np.abs(ahi))
    straddles = (alo <= 0.0) & (ahi >= 0.0)
    lo = np.where(straddles, 0.0, np.maximum(_down(lo_m * lo_m), 0.0))
    hi = _up(hi_m * hi_m)
    return lo, hi


def vneg(alo, ahi):
    return -ahi, -alo


def _validate(lo, hi):
    if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
        raise InvalidArgumentError("interval endpoints must not be NaN")
    if np.any(lo > hi):
        raise InvalidArgumentError("interval lower endpoint exceeds upper")


class Interval:
    """A closed real interval [lo, hi] with binary64 endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = float(lo)
        hi = float(hi)
        _validate(lo, hi)
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, x):
        return cls(float(x))

    def __repr__(self):
        return "Interval(%r, %r)" % (self.lo, self.hi)

    def __eq__(self, other):
        return (
            isinstance(other, Interval)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __contains__(self, x):
        return self.lo <= x <= self.hi

    def contains_interval(self, other):
        return self.lo <= other.lo and other.hi <= self.hi

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def mag(self):
        """Upper bound on |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))


def _coerce(x):
    if isinstance(x, Interval):
        return x
    return Interval(float(x))


def _wrap1(lo, hi):
    return Interval(float(lo), float(hi))


def iv_add(a, b):
    a, b = _coerce(a), _coerce(b)
    return _wrap1(*vadd(a.lo, a.hi, b.lo, b.hi))


def iv_sub(a, b):
    a, b = _coerce(a), _coerce(b)
    return _wrap1(*vsub(a.lo, a.hi, b.lo, b.hi))


def iv_mul(a, b):
    a, b = _coerce(a), _coerce(b)
    return _wrap1(*vmul(a.lo, a.hi, b.lo, b.hi))


def iv_div(a, b):
    a, b = _coerce(a), _coerce(b)
    return _wrap1(*vdiv(a.lo, a.hi, b.lo, b.hi))


def iv_abs(a):
    a = _coerce(a)
    return _wrap1(*vabs(a.lo, a.hi))


def iv_sqr(a):
    a = _coerce(a)
    return _wrap1(*vsqr(a.lo, a.hi))


def iv_neg(a):
    a = _coerce(a)
    return _wrap1(a.hi * -1.0, a.lo * -1.0)


class IntervalMatrix:
    """A rectangular matrix of intervals stored as lo/hi endpoint arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.array(lo, dtype=float)
        hi = np.array(hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 2:
            raise InvalidArgumentError("endpoint arrays must share a 2-D shape")
        _validate(lo, hi)
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_point(cls, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2:
            raise InvalidArgumentError("point matrix must be 2-D")
        return cls(arr.copy(), arr.copy())

    @property
    def shape(self):
        return self.lo.shape

    def entry(self, i, j):
        return Interval(self.lo[i, j], self.hi[i, j])

    def mid(self):
        return 0.5 * (self.lo + self.hi)

    def width(self):
        return self.hi - self.lo

    def contains_point(self, arr):
        arr = np.asarray(arr, dtype=float)
        return bool(np.all(self.lo <= arr) and np.all(arr <= self.hi))


def iv_mat_sub(a, b):
    lo, hi = vsub(a.lo, a.hi, b.lo, b.hi)
    return IntervalMatrix(lo, hi)


def iv_mat_abs_upper(a):
    """Pointwise upper bound on |entry| (exact, no rounding)."""
    return np.maximum(np.abs(a.lo), np.abs(a.hi))


def iv_norm_inf(a):
    """Enclosure of the max absolute row sum of an interval matrix.

    The hi endpoint is a certified upper bound for the infinity operator
    norm of every point matrix contained in `a`.
    """
    if not isinstance(a, IntervalMatrix):
        raise InvalidArgumentError("iv_norm_inf expects an IntervalMatrix")
    n, m = a.shape
    if n == 0 or m == 0:
        return Interval(0.0)
    abs_lo, abs_hi = vabs(a.lo, a.hi)
    row_lo = np.zeros(n)
    row_hi = np.zeros(n)
    for j in range(m):
        row_lo, row_hi = vadd(row_lo, row_hi, abs_lo[:, j], abs_hi[:, j])
    # max of intervals: both endpoints are componentwise maxima, exactly.
    return Interval(float(np.max(row_lo)), float(np.max(row_hi)))


def iv_matmul(a, b):
    """Product of an interval matrix with a pointwise float matrix.

    Accumulates one nudged interval addition per inner-dimension step, so
    the result rigorously contains A@B for every point matrix A in `a`.
    """
    if not isinstance(a, IntervalMatrix):
        raise InvalidArgumentError("iv_matmul expects an IntervalMatrix left factor")
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise InvalidArgumentError("inner dimensions disagree")
    n, k = a.shape
    m = b.shape[1]
    acc_lo = np.zeros((n, m))
    acc_hi = np.zeros((n, m))
    for j in range(k):
        col_lo = a.lo[:, j][:, None]
        col_hi = a.hi[:, j][:, None]
        row = b[j][None, :]
        p_lo, p_hi = vscale(col_lo, col_hi, row)
        acc_lo, acc_hi = vadd(acc_lo, acc_hi, p_lo, p_hi)
    return IntervalMatrix(acc_lo, acc_hi)
