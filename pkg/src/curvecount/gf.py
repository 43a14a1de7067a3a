"""Arithmetic over small finite fields and the closed-point census of P^1.

Elements of F_q = F_{p^n} are encoded as integers 0..q-1: the element with
coefficient vector (c_0, ..., c_{n-1}) over F_p (in the power basis of the
field modulus) is encoded as sum(c_i * p**i).  For prime fields the code is
the residue itself.  Univariate polynomials are coefficient tuples of element
codes, constant term first, trimmed so the leading coefficient of a nonzero
polynomial is nonzero; the empty tuple is the zero polynomial.

Everything here is exact integer arithmetic; there is no floating point.
All values are immutable after construction, so every operation is safe to
call from concurrent contexts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "FieldSpec",
    "Poly",
    "field_make",
    "field_for_order",
    "poly_gcd",
    "closed_points_count",
    "zeta_p1_check",
    "prime_power_decompose",
    "monic_irreducibles",
    "poly_factor",
]

# Table-based arithmetic only makes sense for fields small enough to
# enumerate; the exhaustive counters cannot go past this anyway.
_MAX_TABLE_Q = 1024


def is_prime_int(m: int) -> bool:
    """Deterministic trial-division primality test for small integers."""
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    d = 3
    while d * d <= m:
        if m % d == 0:
            return False
        d += 2
    return True


def moebius_int(m: int) -> int:
    """Integer Moebius function mu(m) for m >= 1."""
    if m < 1:
        raise ValueError("moebius is defined for positive integers")
    result = 1
    d = 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            result = -result
        d += 1
    if m > 1:
        result = -result
    return result


def prime_power_decompose(q: int) -> tuple[int, int]:
    """Write q = p**n with p prime, or raise ValueError."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    p = 2
    while p * p <= q:
        if q % p == 0:
            n = 0
            m = q
            while m % p == 0:
                m //= p
                n += 1
            if m != 1:
                raise ValueError(f"{q} is not a prime power")
            return p, n
        p += 1
    return q, 1  # q itself prime


@dataclass(frozen=True)
class FieldSpec:
    """The field F_{p^n} with a fixed monic irreducible modulus of degree n.

    The modulus is stored as a coefficient tuple over F_p of length n+1,
    constant term first, leading coefficient 1.  For n == 1 the convention is
    the identity modulus (x - 0), i.e. elements are residues mod p.
    """

    p: int
    n: int
    modulus: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p**self.n

    # -- raw vector arithmetic used to build the tables ------------------

    def _vec(self, code: int) -> tuple[int, ...]:
        digs = []
        for _ in range(self.n):
            code, r = divmod(code, self.p)
            digs.append(r)
        return tuple(digs)

    def _code(self, vec) -> int:
        c = 0
        for d in reversed(vec):
            c = c * self.p + d
        return c

    def _vec_add(self, u, v):
        return tuple((a + b) % self.p for a, b in zip(u, v))

    def _vec_mul(self, u, v):
        p, n = self.p, self.n
        prod = [0] * (2 * n - 1)
        for i, a in enumerate(u):
            if a:
                for j, b in enumerate(v):
                    prod[i + j] = (prod[i + j] + a * b) % p
        # reduce modulo the monic modulus
        for i in range(2 * n - 2, n - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(n):
                    prod[i - n + j] = (prod[i - n + j] - c * self.modulus[j]) % p
        return tuple(prod[:n])

    @property
    def _tables(self):
        tables = self.__dict__.get("_tables_cache")
        if tables is None:
            q = self.q
            if q > _MAX_TABLE_Q:
                raise ValueError(f"field of order {q} too large for table arithmetic")
            vecs = [self._vec(c) for c in range(q)]
            add = [[self._code(self._vec_add(vecs[a], vecs[b])) for b in range(q)] for a in range(q)]
            mul = [[self._code(self._vec_mul(vecs[a], vecs[b])) for b in range(q)] for a in range(q)]
            neg = [add[a].index(0) for a in range(q)]
            inv = [0] * q
            for a in range(1, q):
                inv[a] = mul[a].index(1)
            tables = (add, mul, neg, inv)
            self.__dict__["_tables_cache"] = tables
        return tables

    # -- element arithmetic on codes --------------------------------------

    def add(self, a: int, b: int) -> int:
        return self._tables[0][a][b]

    def mul(self, a: int, b: int) -> int:
        return self._tables[1][a][b]

    def neg(self, a: int) -> int:
        return self._tables[2][a]

    def sub(self, a: int, b: int) -> int:
        return self._tables[0][a][self._tables[2][b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return self._tables[3][a]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    @property
    def elements(self) -> range:
        return range(self.q)

    def __repr__(self):
        return f"F{self.q}"


def _poly_irreducible(field: FieldSpec, coeffs: tuple[int, ...]) -> bool:
    """Irreducibility by trial division by all monic polys of degree <= n/2."""
    d = len(coeffs) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    for e in range(1, d // 2 + 1):
        for tail in itertools.product(field.elements, repeat=e):
            divisor = tuple(tail) + (1,)
            if not _praw_mod(field, coeffs, divisor):
                return False
    return True


@lru_cache(maxsize=None)
def field_make(p: int, n: int) -> FieldSpec:
    """Construct F_{p^n} with a reproducible modulus.

    The modulus is the lexicographically smallest irreducible monic polynomial
    of degree n, comparing coefficient tuples from the x^{n-1} coefficient
    down to the constant term, so element encodings are identical across runs.
    """
    if not isinstance(p, int) or not is_prime_int(p):
        raise ValueError(f"{p} is not prime")
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"extension degree must be a positive integer, got {n}")
    if p**n > _MAX_TABLE_Q:
        raise ValueError(f"field of order {p}^{n} exceeds the supported size {_MAX_TABLE_Q}")
    if n == 1:
        return FieldSpec(p=p, n=1, modulus=(0, 1))
    base = field_make(p, 1)  # irreducibility of the modulus is tested over F_p
    for high_to_low in itertools.product(range(p), repeat=n):
        coeffs = tuple(reversed(high_to_low)) + (1,)
        if _poly_irreducible(base, coeffs):
            return FieldSpec(p=p, n=n, modulus=coeffs)
    raise AssertionError("no irreducible polynomial found")  # unreachable


def field_for_order(q: int) -> FieldSpec:
    """F_q for a prime power q, with the field_make modulus convention."""
    p, n = prime_power_decompose(q)
    return field_make(p, n)


# ---------------------------------------------------------------------------
# univariate polynomials (coefficient tuples of element codes, trimmed)
# ---------------------------------------------------------------------------


def _ptrim(coeffs) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _pdeg(coeffs) -> int | None:
    """Degree of a trimmed polynomial; None for the zero polynomial."""
    return len(coeffs) - 1 if coeffs else None


def _pmul(field: FieldSpec, f, g):
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                if b:
                    out[i + j] = field.add(out[i + j], field.mul(a, b))
    return _ptrim(out)


def _padd(field: FieldSpec, f, g):
    out = [0] * max(len(f), len(g))
    for i, a in enumerate(f):
        out[i] = a
    for i, b in enumerate(g):
        out[i] = field.add(out[i], b)
    return _ptrim(out)


def _pdivmod(field: FieldSpec, f, g):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    dg = len(g) - 1
    lead_inv = field.inv(g[-1])
    quot = [0] * max(0, len(f) - dg)
    while len(f) - 1 >= dg and f:
        c = field.mul(f[-1], lead_inv)
        k = len(f) - 1 - dg
        quot[k] = c
        for j, b in enumerate(g):
            f[k + j] = field.sub(f[k + j], field.mul(c, b))
        while f and f[-1] == 0:
            f.pop()
    return _ptrim(quot), _ptrim(f)


def _praw_mod(field: FieldSpec, f, g):
    return _pdivmod(field, f, g)[1]


def _pmonic(field: FieldSpec, f):
    if not f:
        return ()
    inv = field.inv(f[-1])
    return tuple(field.mul(c, inv) for c in f)


def _pgcd(field: FieldSpec, f, g):
    """Monic gcd with gcd(0, g) = monic(g) and gcd(0, 0) = 0."""
    f, g = _ptrim(f), _ptrim(g)
    while g:
        f, g = g, _praw_mod(field, f, g)
    return _pmonic(field, f)


def _peval(field: FieldSpec, f, x: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = field.add(field.mul(acc, x), c)
    return acc


@dataclass(frozen=True)
class Poly:
    """A univariate polynomial over a FieldSpec, in canonical trimmed form."""

    field: FieldSpec
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _ptrim(self.coeffs))

    @property
    def degree(self) -> int | None:
        """Degree, or None for the zero polynomial (no -1 arithmetic)."""
        return _pdeg(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        return Poly(self.field, _pmul(self.field, self.coeffs, other.coeffs))

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        return Poly(self.field, _padd(self.field, self.coeffs, other.coeffs))

    def __mod__(self, other: "Poly") -> "Poly":
        self._check(other)
        return Poly(self.field, _praw_mod(self.field, self.coeffs, other.coeffs))

    def monic(self) -> "Poly":
        return Poly(self.field, _pmonic(self.field, self.coeffs))

    def evaluate(self, x: int) -> int:
        return _peval(self.field, self.coeffs, x)

    def _check(self, other: "Poly"):
        if self.field != other.field:
            raise ValueError(f"polynomials over different fields: {self.field} vs {other.field}")


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic greatest common divisor; gcd(0, g) = monic(g), gcd(0, 0) = 0."""
    f._check(g)
    return Poly(f.field, _pgcd(f.field, f.coeffs, g.coeffs))


# ---------------------------------------------------------------------------
# irreducibles and factorization (small degrees; exhaustive by construction)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def monic_irreducibles(field: FieldSpec, d: int) -> tuple[tuple[int, ...], ...]:
    """All monic irreducible polynomials of degree exactly d, sorted."""
    if d < 1:
        raise ValueError("degree must be positive")
    out = []
    for tail in itertools.product(field.elements, repeat=d):
        cand = tuple(tail) + (1,)
        if d == 1 or not any(
            not _praw_mod(field, cand, p)
            for e in range(1, d // 2 + 1)
            for p in monic_irreducibles(field, e)
        ):
            out.append(cand)
    return tuple(sorted(out))


def poly_factor(field: FieldSpec, coeffs) -> list[tuple[tuple[int, ...], int]]:
    """Factor a nonzero polynomial into monic irreducibles.

    Returns a sorted list of (monic irreducible, multiplicity); the unit
    leading coefficient is dropped.  Trial division is exhaustive, which is
    fine at the degrees this package works with.
    """
    f = _ptrim(coeffs)
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    f = _pmonic(field, f)
    factors = {}
    d = 1
    while len(f) - 1 >= 1:
        if 2 * d > len(f) - 1:
            factors[f] = factors.get(f, 0) + 1  # remaining part is irreducible
            break
        for p in monic_irreducibles(field, d):
            while True:
                quot, rem = _pdivmod(field, f, p)
                if rem:
                    break
                factors[p] = factors.get(p, 0) + 1
                f = quot
        d += 1
    return sorted(factors.items())


# ---------------------------------------------------------------------------
# closed points of P^1 over F_q
# ---------------------------------------------------------------------------


def closed_points_count(q: int, m: int) -> int:
    """Number of closed points of degree m on P^1 over F_q.

    For m == 1 this is q + 1 (the rational points).  For m >= 2 it equals the
    number of monic irreducible polynomials of degree m over F_q, i.e.
    (1/m) * sum_{e | m} mu(e) q^{m/e}.
    """
    prime_power_decompose(q)  # validates q
    if m < 1:
        raise ValueError(f"point degree must be positive, got {m}")
    if m == 1:
        return q + 1
    total = sum(moebius_int(e) * q ** (m // e) for e in range(1, m + 1) if m % e == 0)
    assert total % m == 0
    return total // m


def zeta_p1_check(q: int, D: int) -> bool:
    """Check prod_{m<=D} (1-u^m)^{-pi(m)} == 1/((1-u)(1-qu)) through degree D.

    Both sides are expanded as exact integer power series truncated at u^D.
    """
    prime_power_decompose(q)
    if D < 1:
        raise ValueError("truncation degree must be at least 1")
    # left side, built factor by factor: (1-u^m)^{-pi} = sum_j C(pi+j-1, j) u^{mj}
    from math import comb

    series = [0] * (D + 1)
    series[0] = 1
    for m in range(1, D + 1):
        pi_m = closed_points_count(q, m)
        factor = [0] * (D + 1)
        for j in range(0, D // m + 1):
            factor[m * j] = comb(pi_m + j - 1, j)
        series = [
            sum(series[i] * factor[n - i] for i in range(n + 1)) for n in range(D + 1)
        ]
    # right side: coefficient of u^n is 1 + q + ... + q^n
    target = [(q ** (n + 1) - 1) // (q - 1) for n in range(D + 1)]
    return series == target
