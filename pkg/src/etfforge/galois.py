"""Finite fields GF(p^k), quadratic characters, and symplectic line systems.

Field elements are polynomial residues stored as little-endian coefficient
tuples modulo the lexicographically least monic irreducible of degree k.
Everything here is exact integer arithmetic; no floats.
"""

from dataclasses import dataclass, field as dc_field

from .errors import InvalidArgumentError, NumericFailureError

_MAX_PRIME = 2**31
_MAX_ORDER = 2**63
_MAX_GENERATOR_ORDER = 10**6
_MAX_LINE_SYSTEM_Q2 = 10**6


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power_decomposition(n):
    """Return (p, k) with n = p^k for prime p, or None."""
    if n < 2:
        return None
    for p in range(2, n + 1):
        if p * p > n:
            return (n, 1)
        if n % p == 0:
            k = 0
            m = n
            while m % p == 0:
                m //= p
                k += 1
            return (p, k) if m == 1 else None
    return None


def factor_into_primes(n):
    """Distinct prime divisors of n (trial division)."""
    primes = []
    m = n
    f = 2
    while f * f <= m:
        if m % f == 0:
            primes.append(f)
            while m % f == 0:
                m //= f
        f += 1 if f == 2 else 2
    if m > 1:
        primes.append(m)
    return primes


# Polynomial helpers over GF(p), little-endian coefficient lists.

def _poly_trim(a):
    i = len(a)
    while i > 0 and a[i - 1] == 0:
        i -= 1
    return a[:i]


def _poly_mulmod(a, b, f, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_modred(out, f, p)


def _poly_modred(a, f, p):
    a = list(a)
    deg_f = len(f) - 1
    for i in range(len(a) - 1, deg_f - 1, -1):
        c = a[i] % p
        if c:
            # subtract c * x^(i - deg_f) * f; f is monic.
            shift = i - deg_f
            for j, fj in enumerate(f):
                a[shift + j] = (a[shift + j] - c * fj) % p
    return _poly_trim(a[:deg_f])


def _poly_powmod(base, e, f, p):
    result = [1]
    acc = _poly_modred(base, f, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, acc, f, p)
        acc = _poly_mulmod(acc, acc, f, p)
        e >>= 1
    return result


def _poly_gcd(a, b, p):
    a, b = _poly_trim(list(a)), _poly_trim(list(b))
    while b:
        a, b = b, _poly_divmod(a, b, p)[1]
    return a


def _poly_divmod(a, b, p):
    a = list(a)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], p - 2, p)
    deg_b = len(b) - 1
    quot = [0] * max(1, len(a) - deg_b)
    while len(_poly_trim(a)) - 1 >= deg_b and _poly_trim(a):
        a = _poly_trim(a)
        shift = len(a) - 1 - deg_b
        c = (a[-1] * inv_lead) % p
        quot[shift] = c
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - c * bj) % p
    return _poly_trim(quot), _poly_trim(a)


def _poly_invmod(a, f, p):
    # Extended Euclid: find u with a*u = 1 mod f.
    r0, r1 = list(f), _poly_trim(list(a))
    s0, s1 = [], [1]
    while r1:
        q, r = _poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        qs = _poly_mulmod_plain(q, s1, p)
        s_next = _poly_sub(s0, qs, p)
        s0, s1 = s1, s_next
    if len(r0) != 1:
        raise ZeroDivisionError("element is not invertible")
    scale = pow(r0[0], p - 2, p)
    return _poly_trim([(c * scale) % p for c in s0])


def _poly_mulmod_plain(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        ai = a[i] if i < len(a) else 0
        bi = b[i] if i < len(b) else 0
        out[i] = (ai - bi) % p
    return _poly_trim(out)


def _is_irreducible(f, p):
    """Rabin's test for a monic polynomial f over GF(p)."""
    k = len(f) - 1
    x = [0, 1]
    xq = _poly_powmod(x, p**k, f, p)
    if _poly_trim(_poly_sub(xq, x, p)):
        return False
    for r in factor_into_primes(k):
        xe = _poly_powmod(x, p ** (k // r), f, p)
        g = _poly_gcd(_poly_sub(xe, x, p), f, p)
        if len(g) != 1:
            return False
    return True


class GaloisField:
    """GF(p^k) with a fixed lex-least irreducible modulus."""

    def __init__(self, p, k, modulus):
        self.p = p
        self.k = k
        self.q = p**k
        self.modulus = tuple(modulus)
        # reduction rows: x^(k+i) mod f for i = 0..k-2, used in multiplication.
        rows = []
        rem = [0] * self.k + [1]
        for _ in range(max(0, k - 1)):
            rem = _poly_modred(rem, list(self.modulus), p)
            row = list(rem) + [0] * (k - len(rem))
            rows.append(tuple(row))
            rem = [0] + row
        self._red_rows = rows
        self.zero = FieldElement(self, (0,) * k)
        one = [1] + [0] * (k - 1)
        self.one = FieldElement(self, tuple(one))

    def __repr__(self):
        return "GaloisField(p=%d, k=%d)" % (self.p, self.k)

    def __eq__(self, other):
        return (
            isinstance(other, GaloisField)
            and self.p == other.p
            and self.k == other.k
            and self.modulus == other.modulus
        )

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def element(self, coeffs):
        """Build an element from an int (constant) or coefficient iterable."""
        if isinstance(coeffs, FieldElement):
            if coeffs.field != self:
                raise InvalidArgumentError("element belongs to a different field")
            return coeffs
        if isinstance(coeffs, int):
            c = [coeffs % self.p] + [0] * (self.k - 1)
            return FieldElement(self, tuple(c))
        c = [int(v) % self.p for v in coeffs]
        if len(c) > self.k:
            c = _poly_modred(c, list(self.modulus), self.p)
        c = c + [0] * (self.k - len(c))
        return FieldElement(self, tuple(c[: self.k]))

    def from_index(self, n):
        """Element number n in coefficient-lex (base-p counting) order."""
        if not 0 <= n < self.q:
            raise InvalidArgumentError("element index out of range")
        c = []
        for _ in range(self.k):
            c.append(n % self.p)
            n //= self.p
        return FieldElement(self, tuple(c))

    def index_of(self, e):
        n = 0
        for c in reversed(e.coeffs):
            n = n * self.p + c
        return n

    def elements(self):
        for n in range(self.q):
            yield self.from_index(n)

    def minus_one(self):
        return self.element(self.p - 1)


class FieldElement:
    """An immutable element of a GaloisField."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = coeffs

    def __repr__(self):
        return "FieldElement(%r in GF(%d^%d))" % (
            list(self.coeffs),
            self.field.p,
            self.field.k,
        )

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.coeffs, self.field.p, self.field.k))

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def _check_same(self, other):
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise InvalidArgumentError("operands belong to different fields")

    def __add__(self, other):
        self._check_same(other)
        p = self.field.p
        return FieldElement(
            self.field,
            tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other):
        self._check_same(other)
        p = self.field.p
        return FieldElement(
            self.field,
            tuple((a - b) % p for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self):
        p = self.field.p
        return FieldElement(self.field, tuple((-a) % p for a in self.coeffs))

    def __mul__(self, other):
        self._check_same(other)
        f = self.field
        p = f.p
        k = f.k
        a, b = self.coeffs, other.coeffs
        prod = [0] * (2 * k - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        out = [c % p for c in prod[:k]]
        for i in range(k - 1):
            c = prod[k + i] % p
            if c:
                row = f._red_rows[i]
                for j in range(k):
                    out[j] = (out[j] + c * row[j]) % p
        return FieldElement(f, tuple(out))

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        f = self.field
        inv = _poly_invmod(list(self.coeffs), list(f.modulus), f.p)
        return f.element(inv)

    def __truediv__(self, other):
        self._check_same(other)
        return self * other.inverse()

    def __pow__(self, e):
        f = self.field
        if e < 0:
            return self.inverse() ** (-e)
        result = f.one
        acc = self
        while e:
            if e & 1:
                result = result * acc
            acc = acc * acc
            e >>= 1
        return result


def make_field(p, k=1):
    """Construct GF(p^k) with the lex-least monic irreducible modulus."""
    p, k = int(p), int(k)
    if k < 1:
        raise InvalidArgumentError("extension degree must be >= 1")
    if p >= _MAX_PRIME:
        raise InvalidArgumentError("prime exceeds 2^31")
    if not is_prime(p):
        raise InvalidArgumentError("%d is not prime" % p)
    if p**k >= _MAX_ORDER:
        raise InvalidArgumentError("field order exceeds 2^63")
    if k == 1:
        return GaloisField(p, 1, (0, 1))
    for n in range(p**k):
        coeffs = []
        m = n
        for _ in range(k):
            coeffs.append(m % p)
            m //= p
        f = coeffs + [1]
        if _is_irreducible(f, p):
            return GaloisField(p, k, tuple(f))
    raise NumericFailureError("no irreducible polynomial found")  # pragma: no cover


def quadratic_character(x):
    """0 at zero, +1 on nonzero squares, -1 otherwise. Odd fields only."""
    if not isinstance(x, FieldElement):
        raise InvalidArgumentError("quadratic_character expects a FieldElement")
    f = x.field
    if f.p == 2:
        raise InvalidArgumentError("quadratic character undefined in characteristic 2")
    if x.is_zero():
        return 0
    e = x ** ((f.q - 1) // 2)
    if e == f.one:
        return 1
    if e == f.minus_one():
        return -1
    raise NumericFailureError("character power landed outside {-1, 1}")


def find_generator(field):
    """First multiplicative generator in coefficient-lex order."""
    if field.q > _MAX_GENERATOR_ORDER:
        raise InvalidArgumentError("field order exceeds generator search cap")
    order = field.q - 1
    prime_divisors = factor_into_primes(order)
    for n in range(1, field.q):
        g = field.from_index(n)
        if all(g ** (order // r) != field.one for r in prime_divisors):
            return g
    raise NumericFailureError("no generator found")  # pragma: no cover


@dataclass(frozen=True, eq=False)
class SymplecticLineSystem:
    """Projective line representatives over GF(q^2) with a symplectic form.

    The form is [x, y] = zeta^((q+1)/2) (x y^q - y x^q); it is alternating,
    scales as [cx, cy] = c^(q+1) [x, y], and takes values in the subfield
    GF(q) embedded in GF(q^2).

    variant "halfturn": q+1 representatives L^j(zeta^eps) for
    j < (q+1)/2 and eps in {0, 1}, with L(x) = zeta^(1-q) x, stored at
    index eps*(q+1)/2 + j.  L advances j by one; wrapping past the orbit
    end multiplies by the sign alpha_signs[j].

    variant "fullturn": q+1 representatives zeta^j for j <= q; the map
    x -> zeta x advances j, wrapping with scalar alpha_signs[q] = zeta^(q+1).
    """

    q: int
    variant: str
    base: GaloisField
    ext: GaloisField
    zeta: FieldElement
    representatives: list = dc_field(repr=False)
    alpha_signs: list = dc_field(repr=False)
    cycle_len: int = 0
    form_scale: FieldElement = None

    def form(self, x, y):
        """Symplectic pairing; result lies in the subfield GF(q)."""
        q = self.q
        scale = self.form_scale
        if scale is None:
            scale = self.zeta ** ((q + 1) // 2)
        val = scale * (x * (y**q) - y * (x**q))
        if val**q != val:
            raise NumericFailureError("form value escaped the subfield")
        return val

    def chi(self, z):
        """Quadratic character of the subfield GF(q) evaluated inside GF(q^2)."""
        if z.is_zero():
            return 0
        if z**self.q != z:
            raise InvalidArgumentError("chi argument must lie in the subfield")
        e = z ** ((self.q - 1) // 2)
        if e == self.ext.one:
            return 1
        if e == self.ext.minus_one():
            return -1
        raise NumericFailureError("subfield character power outside {-1, 1}")


def build_line_system(q, variant):
    """Assemble the projective line representatives used by the symplectic
    conference constructions."""
    q = int(q)
    if variant not in ("halfturn", "fullturn"):
        raise InvalidArgumentError("variant must be 'halfturn' or 'fullturn'")
    decomp = prime_power_decomposition(q)
    if decomp is None or decomp[0] == 2:
        raise InvalidArgumentError("q must be an odd prime power")
    if q * q > _MAX_LINE_SYSTEM_Q2:
        raise InvalidArgumentError("q^2 exceeds the line-system cap")
    p, k = decomp
    base = make_field(p, k)
    ext = make_field(p, 2 * k)
    zeta = find_generator(ext)

    if variant == "halfturn":
        m = (q + 1) // 2
        step = zeta ** ((q * q - q) % (q * q - 1))  # zeta^(1-q)
        reps = [None] * (q + 1)
        for eps in (0, 1):
            t = ext.one if eps == 0 else zeta
            for j in range(m):
                reps[eps * m + j] = t
                t = step * t
        alphas = [ext.one] * (m - 1) + [ext.minus_one()]
        cycle_len = m
    else:
        reps = [zeta**j for j in range(q + 1)]
        alphas = [ext.one] * q + [zeta ** (q + 1)]
        cycle_len = q + 1

    system = SymplecticLineSystem(
        q=q,
        variant=variant,
        base=base,
        ext=ext,
        zeta=zeta,
        representatives=reps,
        alpha_signs=alphas,
        cycle_len=cycle_len,
        form_scale=zeta ** ((q + 1) // 2),
    )
    for i, t in enumerate(reps):
        if not system.form(t, t).is_zero():
            raise NumericFailureError("form is not alternating on representative %d" % i)
        for j in range(i):
            if system.form(reps[j], t).is_zero():
                raise InvalidArgumentError(
                    "representatives %d and %d span the same line" % (j, i)
                )
    return system
