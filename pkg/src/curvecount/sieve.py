"""The predicted side: truncated Euler products, virtual counts, Tamagawa.

The virtual height zeta function is a power series in t_1..t_r whose
coefficients package the inner sums of the counting formula: writing S(k)
for the inner sum attached to the profile k,

    Z(t) = sum_k q^(sum k_i) S(k) prod_i t_i^{k_i},

and Z is a convergent Euler product over the closed points of P^1.  The
local factor at a point of degree m is

    1 - (r+2) q^{-2m} + 2r q^{-3m} - (r-1) q^{-4m}
      + sum_{i=1}^{r} sum_{d>=1} (q t_i)^{md}
            (q^{-2dm} - 2 q^{-(2d+1)m} + 2 q^{-(2d+3)m} - q^{-(2d+4)m}).

Virtual section counts are q^(2a+2a'+4) S(k), and virtual morphism counts
divide that by (q-1)^2 (the torsor convention fixed by consistency with the
Tamagawa limit).  The Tamagawa number itself is

    tau = q^2 (1-1/q)^{-(r+2)} prod_c (1-q^{-|c|})^{r+2}
              (1 + (r+2) q^{-|c|} + q^{-2|c|}),

truncated at point degree D with a certified geometric tail bound.

Everything is exact rational arithmetic: series coefficients are Fractions
whose denominators divide powers of q; the scalar accumulations over points
of large degree use BigRat (gmpy2-backed) because their numerators grow to
millions of bits by D = 20.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import BigRat
from .gf import closed_points_count, prime_power_decompose

__all__ = [
    "TruncSeries",
    "VirtualZeta",
    "TamagawaResult",
    "LimitReport",
    "local_factor",
    "virtual_zeta",
    "s_of_k",
    "virtual_count",
    "tamagawa",
    "limit_constant",
    "limit_check",
    "tail_log_bound",
]


class TruncSeries:
    """Multivariate power series in t_1..t_r with exact rational coefficients,
    truncated at per-variable caps.

    Ring operations respect truncation: every kept coefficient equals the
    corresponding coefficient of the untruncated product.
    """

    __slots__ = ("nvars", "caps", "coeffs")

    def __init__(self, nvars: int, caps: tuple[int, ...], coeffs: dict | None = None):
        if len(caps) != nvars:
            raise ValueError("caps length must equal the number of variables")
        if any(c < 0 for c in caps):
            raise ValueError("caps must be non-negative")
        self.nvars = nvars
        self.caps = tuple(caps)
        self.coeffs = {}
        if coeffs:
            for key, val in coeffs.items():
                self._set(key, Fraction(val))

    def _set(self, key, val):
        key = tuple(key)
        if len(key) != self.nvars or any(e < 0 for e in key):
            raise ValueError(f"bad multi-index {key}")
        if any(e > c for e, c in zip(key, self.caps)):
            return  # beyond truncation
        if val:
            self.coeffs[key] = val
        else:
            self.coeffs.pop(key, None)

    @classmethod
    def constant(cls, nvars: int, caps: tuple[int, ...], value) -> "TruncSeries":
        return cls(nvars, caps, {(0,) * nvars: Fraction(value)})

    def get(self, key) -> Fraction:
        key = tuple(key)
        if any(e > c for e, c in zip(key, self.caps)):
            raise ValueError(f"index {key} exceeds caps {self.caps}")
        return self.coeffs.get(key, Fraction(0))

    def _check(self, other: "TruncSeries"):
        if self.nvars != other.nvars or self.caps != other.caps:
            raise ValueError("series with different shapes")

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        out = TruncSeries(self.nvars, self.caps)
        for key in set(self.coeffs) | set(other.coeffs):
            out._set(key, self.coeffs.get(key, Fraction(0)) + other.coeffs.get(key, Fraction(0)))
        return out

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            out = TruncSeries(self.nvars, self.caps)
            for key, val in self.coeffs.items():
                out._set(key, val * other)
            return out
        self._check(other)
        out = TruncSeries(self.nvars, self.caps)
        acc: dict[tuple, Fraction] = {}
        caps = self.caps
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                if any(e > c for e, c in zip(key, caps)):
                    continue
                acc[key] = acc.get(key, Fraction(0)) + v1 * v2
        for key, val in acc.items():
            out._set(key, val)
        return out

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "TruncSeries":
        if e < 0:
            raise ValueError("negative series powers are not supported")
        result = TruncSeries.constant(self.nvars, self.caps, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        return (
            isinstance(other, TruncSeries)
            and self.nvars == other.nvars
            and self.caps == other.caps
            and self.coeffs == other.coeffs
        )

    def items(self):
        return sorted(self.coeffs.items())

    def to_record(self) -> dict:
        """JSON-style record; coefficients as num/den strings, no floats."""
        return {
            "nvars": self.nvars,
            "caps": list(self.caps),
            "coeffs": {
                ",".join(str(e) for e in key): f"{val.numerator}/{val.denominator}"
                for key, val in self.items()
            },
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TruncSeries":
        coeffs = {
            tuple(int(t) for t in key.split(",")): Fraction(val)
            for key, val in rec["coeffs"].items()
        }
        return cls(rec["nvars"], tuple(rec["caps"]), coeffs)

    def __repr__(self):
        return f"TruncSeries(nvars={self.nvars}, caps={self.caps}, terms={len(self.coeffs)})"


def local_factor(m: int, r: int, q: int, caps: tuple[int, ...]) -> TruncSeries:
    """Local Euler factor at a closed point of degree m, truncated at caps."""
    if m < 1:
        raise ValueError("point degree must be positive")
    const = (
        Fraction(1)
        - Fraction(r + 2, q ** (2 * m))
        + Fraction(2 * r, q ** (3 * m))
        - Fraction(r - 1, q ** (4 * m))
    )
    series = TruncSeries(r, caps, {(0,) * r: const})
    # term at (i, d): t_i^{md} q^{-dm} (1 - 2 q^{-m} + 2 q^{-3m} - q^{-4m})
    shape = Fraction(1) - Fraction(2, q**m) + Fraction(2, q ** (3 * m)) - Fraction(1, q ** (4 * m))
    for i in range(r):
        d = 1
        while m * d <= caps[i]:
            key = tuple(m * d if j == i else 0 for j in range(r))
            series._set(key, series.get(key) + Fraction(1, q ** (d * m)) * shape)
            d += 1
    return series


def tail_log_bound(r: int, q: int, D: int) -> Fraction:
    """Bound on |log of the omitted factors| past point degree D.

    Each local constant c_m satisfies |log c_m| <= 2(r+2) q^{-2m} for q >= 2,
    m >= 1, and pi(m) <= 2 q^m / m, so the omitted product is bounded by
    sum_{m>D} (2 q^m / m) 2(r+2) q^{-2m} <= 4(r+2) q^{-D} / ((D+1)(q-1)),
    keeping the 1/m <= 1/(D+1) factor of the summands.
    """
    return Fraction(4 * (r + 2), (D + 1) * (q - 1) * q**D)


@dataclass(frozen=True)
class VirtualZeta:
    """Truncated virtual height zeta function with its tail certificate.

    Coefficients factor as (small series from points of degree <= max cap)
    times (one scalar from all higher-degree points, whose local factors are
    constant in t); the tail bound controls the multiplicative error of every
    coefficient from the omitted constant factors.
    """

    r: int
    q: int
    caps: tuple[int, ...]
    D: int
    small: TruncSeries
    scalar: BigRat
    tail: Fraction

    def coefficient(self, k) -> BigRat:
        return BigRat.from_fraction(self.small.get(k)) * self.scalar

    def s_of_k(self, k) -> BigRat:
        """S(k) = q^(-sum k) [t^k] Z, the inner sum of the counting formula."""
        k = tuple(k)
        return self.coefficient(k) / BigRat(self.q) ** sum(k)


def virtual_zeta(r: int, q: int, caps: tuple[int, ...], D: int) -> VirtualZeta:
    """Truncated Euler product prod_{m<=D} local_factor(m)^pi(m).

    Requires D >= max(caps): points of degree m > caps contribute only their
    constant part, which is accumulated as a scalar rather than a series
    (orders of magnitude faster, identical values).
    """
    prime_power_decompose(q)
    caps = tuple(caps)
    if len(caps) != r:
        raise ValueError("caps length must equal r")
    maxcap = max(caps) if caps else 0
    if D < maxcap:
        raise ValueError(f"cutoff D = {D} below max cap {maxcap}")
    if D < 1:
        raise ValueError("cutoff D must be at least 1")
    small = TruncSeries.constant(r, caps, 1)
    for m in range(1, min(D, maxcap) + 1):
        small = small * (local_factor(m, r, q, caps) ** closed_points_count(q, m))
    scalar = BigRat(1)
    for m in range(maxcap + 1, D + 1):
        scalar = scalar * _constant_factor(r, q, m) ** closed_points_count(q, m)
    return VirtualZeta(
        r=r, q=q, caps=caps, D=D, small=small, scalar=scalar, tail=tail_log_bound(r, q, D)
    )


def _constant_factor(r: int, q: int, m: int) -> BigRat:
    qm = q**m
    num = qm**4 - (r + 2) * qm**2 + 2 * r * qm - (r - 1)
    return BigRat(num, qm**4)


def s_of_k(zeta: VirtualZeta, k) -> BigRat:
    """S(k) from a truncated zeta; rejects indices above the caps."""
    return zeta.s_of_k(k)


def virtual_count(a: int, a_prime: int, k, zeta: VirtualZeta) -> tuple[BigRat, BigRat]:
    """(virtual sections, virtual morphisms) for the profile k.

    sections = q^(2a+2a'+4) S(k); morphisms = sections / (q-1)^2, the torsor
    convention consistent with the Tamagawa limit.
    """
    k = tuple(k)
    q = zeta.q
    sections = BigRat(q) ** (2 * a + 2 * a_prime + 4) * zeta.s_of_k(k)
    morphisms = sections / BigRat((q - 1) ** 2)
    return sections, morphisms


# ---------------------------------------------------------------------------
# Tamagawa number and limit identities
# ---------------------------------------------------------------------------

_TAM_PREFIX: dict[tuple[int, int], list[BigRat]] = {}


def _tam_core(r: int, q: int, D: int) -> BigRat:
    """prod_{m<=D} [(1-q^-m)^(r+2) (1 + (r+2) q^-m + q^-2m)]^pi(m), cached
    incrementally so every prefix D' <= D is available for free."""
    key = (r, q)
    prefix = _TAM_PREFIX.setdefault(key, [BigRat(1)])  # prefix[D] = product to D
    while len(prefix) <= D:
        m = len(prefix)
        qm = q**m
        num = (qm - 1) ** (r + 2) * (qm * qm + (r + 2) * qm + 1)
        local = BigRat(num, qm ** (r + 4))
        prefix.append(prefix[-1] * local ** closed_points_count(q, m))
    return prefix[D]


@dataclass(frozen=True)
class TamagawaResult:
    value: BigRat
    tail: Fraction  # bound on |log deviation| from the omitted factors
    D: int
    r: int
    q: int

    def abs_tail(self) -> BigRat:
        """Absolute tail bound: |true - value| <= 2 * value * tail (tail <= 1)."""
        assert self.tail <= 1
        return self.value * BigRat.from_fraction(2 * self.tail)

    def to_record(self) -> dict:
        """JSON-style record; values as num/den strings, no floats."""
        return {
            "r": self.r,
            "q": self.q,
            "D": self.D,
            "value": f"{self.value.num}/{self.value.den}",
            "tail_log_bound": f"{self.tail.numerator}/{self.tail.denominator}",
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TamagawaResult":
        num, _, den = rec["value"].partition("/")
        tnum, _, tden = rec["tail_log_bound"].partition("/")
        return cls(
            value=BigRat(int(num), int(den or 1)),
            tail=Fraction(int(tnum), int(tden or 1)),
            D=rec["D"],
            r=rec["r"],
            q=rec["q"],
        )


def tamagawa(r: int, q: int, D: int) -> TamagawaResult:
    """Truncated Tamagawa number q^2 (1-1/q)^{-(r+2)} prod_{m<=D} local^pi(m).

    D = 0 gives the empty product q^2 (1-1/q)^{-(r+2)}.
    """
    prime_power_decompose(q)
    if D < 0:
        raise ValueError("cutoff must be non-negative")
    prefactor = BigRat(q ** (r + 4), (q - 1) ** (r + 2))  # q^2 (1-1/q)^-(r+2)
    return TamagawaResult(
        value=prefactor * _tam_core(r, q, D), tail=tail_log_bound(r, q, D), D=D, r=r, q=q
    )


def limit_constant(r: int, q: int, D: int) -> BigRat:
    """(1-1/q)^{-r} prod_{m<=D} local^pi(m): the limit of q^(sum k) S(k) as
    min k_i grows, truncated at D."""
    prime_power_decompose(q)
    if D < 0:
        raise ValueError("cutoff must be non-negative")
    return BigRat(q**r, (q - 1) ** r) * _tam_core(r, q, D)


@dataclass(frozen=True)
class LimitReport:
    r: int
    q: int
    D: int
    n_max: int
    constant: BigRat
    gaps: tuple[BigRat, ...]  # |q^(rn) S(n,..,n) - constant| for n = 1..n_max
    passed: bool  # strictly decreasing gap sequence


def default_cutoff(q: int, bits: int = 16) -> int:
    """Smallest D with q^D >= 2^bits, so tail bounds are comparable across q."""
    D = 1
    while q**D < 2**bits:
        D += 1
    return D


def limit_check(r: int, q: int, n_max: int, D: int | None = None) -> LimitReport:
    """Check that q^(sum k) S(k) approaches the limit constant along the
    diagonal k = (n, ..., n), n = 1..n_max: the gap sequence must be strictly
    decreasing."""
    if n_max < 2:
        raise ValueError("need n_max >= 2 to see a trend")
    if D is None:
        D = default_cutoff(q)
    caps = (n_max,) * r
    zeta = virtual_zeta(r, q, caps, max(D, n_max))
    c = limit_constant(r, q, zeta.D)
    gaps = []
    for n in range(1, n_max + 1):
        k = (n,) * r
        val = BigRat(q) ** (r * n) * zeta.s_of_k(k)
        gaps.append(abs(val - c))
    passed = all(gaps[i] > gaps[i + 1] for i in range(len(gaps) - 1))
    return LimitReport(
        r=r, q=q, D=zeta.D, n_max=n_max, constant=c, gaps=tuple(gaps), passed=passed
    )
