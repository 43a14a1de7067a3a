"""The Picard lattice of a blow-up of a smooth quadric, and its cone geometry.

Classes live in the basis (F, F', E_1, ..., E_r): F, F' are the two rulings
with F.F' = 1, F^2 = F'^2 = 0, the E_i are exceptional classes with
E_i^2 = -1, and all cross pairings vanish.  The anticanonical class is
-K = 2F + 2F' - sum E_i, so (-K)^2 = 8 - r.

For a class alpha the invariants are h = -K.alpha, a = F.alpha, a' = F'.alpha
and k_i = E_i.alpha, tied together by h = 2a + 2a' - sum k_i.

Class enumeration (the (-1)-classes, the conic classes, bounded cone slices)
is exhaustive search over coefficient boxes whose radii come from a
Cauchy-Schwarz bound in the negative-definite complement of -K; a runtime
assertion additionally verifies that a one-unit margin around each box is
empty of solutions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "DivisorClass",
    "BlowDownDatum",
    "ConeSpec",
    "Invariants",
    "intersect",
    "invariants",
    "anticanonical",
    "ruling_f",
    "ruling_f_prime",
    "exceptional",
    "zero_class",
    "minus_one_classes",
    "conic_classes",
    "is_nef",
    "blow_down_data",
    "fiber_margin",
    "min_exceptional_multiplicity",
    "stability_index",
    "cone_contains",
    "enumerate_in_cone",
    "slice_in_cone",
    "alpha_estimate",
    "admissibility",
    "AdmissibilityReport",
    "EXPONENT_THRESHOLD",
    "SECONDARY_THRESHOLD",
    "FIELD_SIZE_THRESHOLD",
]

# Uniform constants entering the large-field hypotheses of the limiting
# Tamagawa comparison: the q^{l(alpha)/h(alpha)} test is against 2^48, the
# raw field-size test is against 240^4.  Desk-scale fields never satisfy
# either; reports carry the flags so runs are honestly labeled.
EXPONENT_THRESHOLD = 2**48
SECONDARY_THRESHOLD = 240
FIELD_SIZE_THRESHOLD = SECONDARY_THRESHOLD**4


@dataclass(frozen=True)
class DivisorClass:
    """Integer class f*F + f'*F' + sum e_i E_i, coeffs = (f, f', e_1..e_r)."""

    r: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not (0 <= self.r):
            raise ValueError("r must be non-negative")
        if len(self.coeffs) != self.r + 2:
            raise ValueError(f"expected {self.r + 2} coefficients, got {len(self.coeffs)}")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(self.r, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(self.r, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(self.r, tuple(-a for a in self.coeffs))

    def __rmul__(self, m: int) -> "DivisorClass":
        return DivisorClass(self.r, tuple(m * a for a in self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def _check(self, other: "DivisorClass"):
        if self.r != other.r:
            raise ValueError(f"classes live in different lattices: r={self.r} vs r={other.r}")

    def serialize(self) -> str:
        """Plain-text form ``r; f f' e1 ... er`` used by the CLI."""
        return f"{self.r}; " + " ".join(str(c) for c in self.coeffs)

    @classmethod
    def parse(cls, text: str) -> "DivisorClass":
        head, _, tail = text.partition(";")
        if not tail:
            raise ValueError(f"malformed class {text!r}, expected 'r; f f' e1 ... er'")
        r = int(head.strip())
        coeffs = tuple(int(t) for t in tail.split())
        return cls(r, coeffs)


def ruling_f(r: int) -> DivisorClass:
    return DivisorClass(r, (1, 0) + (0,) * r)


def ruling_f_prime(r: int) -> DivisorClass:
    return DivisorClass(r, (0, 1) + (0,) * r)


def exceptional(r: int, i: int) -> DivisorClass:
    if not 1 <= i <= r:
        raise ValueError(f"exceptional index {i} out of range 1..{r}")
    return DivisorClass(r, tuple(1 if j == i + 1 else 0 for j in range(r + 2)))


def anticanonical(r: int) -> DivisorClass:
    return DivisorClass(r, (2, 2) + (-1,) * r)


def zero_class(r: int) -> DivisorClass:
    return DivisorClass(r, (0,) * (r + 2))


def intersect(d1: DivisorClass, d2: DivisorClass) -> int:
    """Intersection pairing in the (F, F', E_i) basis."""
    d1._check(d2)
    a, b = d1.coeffs, d2.coeffs
    return a[0] * b[1] + a[1] * b[0] - sum(a[i] * b[i] for i in range(2, len(a)))


@dataclass(frozen=True)
class Invariants:
    h: int
    a: int
    a_prime: int
    k: tuple[int, ...]


def invariants(alpha: DivisorClass) -> Invariants:
    """(h, a, a', k) = (-K.alpha, F.alpha, F'.alpha, (E_i.alpha)_i)."""
    f, fp, *e = alpha.coeffs
    k = tuple(-c for c in e)
    h = 2 * f + 2 * fp + sum(e)  # -K.alpha
    return Invariants(h=h, a=fp, a_prime=f, k=k)


def class_from_invariants(r: int, a: int, a_prime: int, k) -> DivisorClass:
    """Inverse of ``invariants``: the class with the given (a, a', k)."""
    k = tuple(int(v) for v in k)
    if len(k) != r:
        raise ValueError(f"profile length {len(k)} != r = {r}")
    return DivisorClass(r, (a_prime, a) + tuple(-v for v in k))


# ---------------------------------------------------------------------------
# bounded class enumeration
# ---------------------------------------------------------------------------


def _floor_plus_sqrt(c: Fraction, s: Fraction) -> int:
    """floor(c + sqrt(s)) computed exactly for rational c and s >= 0."""
    if s < 0:
        raise ValueError("negative radicand")
    root = math.isqrt(s.numerator * s.denominator) // s.denominator  # floor(sqrt(s))
    m = math.floor(c) + root
    while (m + 1 - c) ** 2 <= s:  # m+1 <= c + sqrt(s)
        m += 1
    while m > c and (m - c) ** 2 > s:
        m -= 1
    return m


def _coeff_bounds(r: int, self_int: int, degree: int) -> tuple[int, int]:
    """Box radii (for f, f' and for the e_i) containing every class D with
    D.D = self_int and -K.D = degree.

    Write D = lam*(-K) + D0 with lam = degree/(8-r) and D0 in the orthogonal
    complement of -K, which is negative definite; then |D0|^2 =
    degree^2/(8-r) - self_int, and each coordinate functional T in
    {F, F', E_i} satisfies |D.T| <= lam*(-K.T) + |D0| * |T0| by Cauchy-Schwarz.
    """
    e = 8 - r
    lam = Fraction(degree, e)
    norm0 = Fraction(degree * degree, e) - self_int
    if norm0 < 0:
        return (-1, -1)  # no solutions at all
    bf = _floor_plus_sqrt(2 * lam, norm0 * Fraction(4, e))
    be = _floor_plus_sqrt(lam, norm0 * (1 + Fraction(1, e)))
    return bf, be


def _e_vectors(r: int, s1: int, s2: int, bound: int):
    """All integer vectors (e_1..e_r) with sum e_i = s1, sum e_i^2 = s2,
    |e_i| <= bound, via pruned recursion."""
    out = []
    vec = [0] * r

    def rec(i: int, rem1: int, rem2: int):
        t = r - i
        if t == 0:
            if rem1 == 0 and rem2 == 0:
                out.append(tuple(vec))
            return
        # power-mean pruning: rem1^2 <= t * rem2 <= t^2 * bound^2
        if rem2 < 0 or rem2 > t * bound * bound or rem1 * rem1 > t * rem2:
            return
        for v in range(-bound, bound + 1):
            vec[i] = v
            rec(i + 1, rem1 - v, rem2 - v * v)

    rec(0, s1, s2)
    return out


@lru_cache(maxsize=None)
def _classes_with(r: int, self_int: int, degree: int) -> tuple[DivisorClass, ...]:
    """All classes D with D.D = self_int, -K.D = degree, by box search.

    The search box comes from _coeff_bounds; a one-unit margin is also
    scanned and asserted empty, per the stated enumeration contract.
    """
    bf, be = _coeff_bounds(r, self_int, degree)
    if bf < 0:
        return ()
    out = []
    margin_hit = False
    for f in range(-bf - 1, bf + 2):
        for fp in range(-bf - 1, bf + 2):
            s2 = 2 * f * fp - self_int  # sum e_i^2
            s1 = degree - 2 * (f + fp)  # sum e_i
            if s2 < 0:
                continue
            for evec in _e_vectors(r, s1, s2, be + 1):
                if abs(f) > bf or abs(fp) > bf or any(abs(v) > be for v in evec):
                    margin_hit = True
                out.append(DivisorClass(r, (f, fp) + evec))
    assert not margin_hit, "class enumeration box bound violated"
    return tuple(sorted(out, key=lambda d: d.coeffs))


def minus_one_classes(r: int) -> tuple[DivisorClass, ...]:
    """All D with D^2 = -1 and -K.D = 1 (the exceptional curve classes)."""
    if not 1 <= r <= 7:
        raise ValueError(f"r = {r} out of supported range 1..7")
    return _classes_with(r, -1, 1)


def conic_classes(r: int) -> tuple[DivisorClass, ...]:
    """All D with D^2 = 0 and -K.D = 2 (classes of conic fibrations)."""
    if not 1 <= r <= 7:
        raise ValueError(f"r = {r} out of supported range 1..7")
    return _classes_with(r, 0, 2)


def is_nef(alpha: DivisorClass) -> bool:
    """Nef test: alpha pairs >= 0 with every (-1)-class and with F, F'.

    Valid for 1 <= r <= 7 because the effective cone of these blow-ups is
    generated by the (-1)-classes (with F, F' thrown in as a redundant
    safeguard for the ruling directions).
    """
    r = alpha.r
    if not 1 <= r <= 7:
        raise ValueError(f"r = {r} out of supported range 1..7")
    if intersect(alpha, ruling_f(r)) < 0 or intersect(alpha, ruling_f_prime(r)) < 0:
        return False
    return all(intersect(alpha, d) >= 0 for d in minus_one_classes(r))


# ---------------------------------------------------------------------------
# blow-downs to the quadric
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlowDownDatum:
    """A basis datum (Fc, Fc', Ec_1..Ec_r) matching the defining relations.

    Fc, Fc' play the roles of the two rulings and the Ec_i the exceptional
    classes of some blow-down to the quadric; both orientations (Fc, Fc') and
    (Fc', Fc) appear as distinct data, and Ec is kept sorted.
    """

    fc: DivisorClass
    fcp: DivisorClass
    ec: tuple[DivisorClass, ...]


@lru_cache(maxsize=None)
def blow_down_data(r: int) -> tuple[BlowDownDatum, ...]:
    """All blow-down data for 1 <= r <= 5, by exhaustive compatibility search.

    Ec ranges over pairwise-orthogonal r-sets of (-1)-classes; (Fc, Fc') over
    ordered pairs of conic classes with Fc.Fc' = 1, orthogonal to every Ec_i,
    and satisfying 2Fc + 2Fc' - sum Ec_i = -K.  The output order is
    deterministic (sorted by coefficient tuples).
    """
    if not 1 <= r <= 5:
        raise ValueError(f"blow-down data supported for 1 <= r <= 5, got {r}")
    lines = minus_one_classes(r)
    conics = conic_classes(r)
    minus_k = anticanonical(r)
    data = []

    def extend(start: int, chosen: list[DivisorClass]):
        if len(chosen) == r:
            total = minus_k
            for c in chosen:
                total = total + c
            if any(v % 2 for v in total.coeffs):
                return
            half = DivisorClass(r, tuple(v // 2 for v in total.coeffs))  # Fc + Fc'
            for fc in conics:
                fcp = half - fc
                if intersect(fc, fcp) != 1:
                    continue
                if intersect(fcp, fcp) != 0 or intersect(minus_k, fcp) != 2:
                    continue
                if any(intersect(fc, c) or intersect(fcp, c) for c in chosen):
                    continue
                ec = tuple(sorted(chosen, key=lambda c: c.coeffs))
                data.append(BlowDownDatum(fc=fc, fcp=fcp, ec=ec))
            return
        for j in range(start, len(lines)):
            cand = lines[j]
            if all(intersect(cand, c) == 0 for c in chosen):
                chosen.append(cand)
                extend(j + 1, chosen)
                chosen.pop()

    extend(0, [])
    data.sort(key=lambda d: (d.fc.coeffs, d.fcp.coeffs, tuple(c.coeffs for c in d.ec)))
    return tuple(data)


def fiber_margin(datum: BlowDownDatum, alpha: DivisorClass) -> int:
    """min(2 Fc.alpha - sum Ec_i.alpha, 2 Fc'.alpha - sum Ec_i.alpha)."""
    s = sum(intersect(c, alpha) for c in datum.ec)
    return min(2 * intersect(datum.fc, alpha) - s, 2 * intersect(datum.fcp, alpha) - s)


def min_exceptional_multiplicity(datum: BlowDownDatum, alpha: DivisorClass) -> int:
    """min_i Ec_i.alpha."""
    return min(intersect(c, alpha) for c in datum.ec)


def stability_index(alpha: DivisorClass) -> Fraction:
    """The piecewise-linear index max over blow-down data of
    min(fiber_margin/32, min_exceptional_multiplicity).

    Positively homogeneous of degree one; positive on the interior of the nef
    cone, zero along parts of its boundary.  Requires alpha nef and r <= 5.
    """
    if not is_nef(alpha):
        raise ValueError(f"stability index is only defined for nef classes: {alpha}")
    best = None
    for datum in blow_down_data(alpha.r):
        val = min(
            Fraction(fiber_margin(datum, alpha), 32),
            Fraction(min_exceptional_multiplicity(datum, alpha)),
        )
        if best is None or val > best:
            best = val
    assert best is not None
    return best


def best_fiber_margin(alpha: DivisorClass) -> int:
    """max over blow-down data of fiber_margin (alpha nef, r <= 5)."""
    if not is_nef(alpha):
        raise ValueError("fiber margin maximization requires a nef class")
    return max(fiber_margin(d, alpha) for d in blow_down_data(alpha.r))


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeSpec:
    """A membership predicate for nef classes.

    kind 'full-nef': the whole nef cone.
    kind 'eps': nef alpha != 0 with stability_index(alpha)/h(alpha) >= eps.
    kind 'fixed-phi': nef alpha != 0 with
        min(fiber_margin, min_exceptional_multiplicity)/h >= eps for one datum.

    Membership is homogeneous: alpha in C iff m*alpha in C for all m >= 1.
    """

    kind: str
    eps: Fraction | None = None
    datum: BlowDownDatum | None = None

    @classmethod
    def full_nef(cls) -> "ConeSpec":
        return cls(kind="full-nef")

    @classmethod
    def eps_cone(cls, eps) -> "ConeSpec":
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        return cls(kind="eps", eps=eps)

    @classmethod
    def fixed_phi_cone(cls, eps, datum: BlowDownDatum) -> "ConeSpec":
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        return cls(kind="fixed-phi", eps=eps, datum=datum)

    def contains(self, alpha: DivisorClass) -> bool:
        return cone_contains(alpha, self)

    def describe(self) -> str:
        if self.kind == "full-nef":
            return "full-nef"
        if self.kind == "eps":
            return f"eps:{self.eps}"
        return f"fixed-phi:{self.eps}"


def cone_contains(alpha: DivisorClass, cone: ConeSpec) -> bool:
    """Membership of alpha in the cone, by the cone's defining inequality."""
    if cone.kind == "full-nef":
        return is_nef(alpha)
    if alpha.is_zero():
        raise ValueError("ratio-defined cones reject the zero class (h = 0)")
    if not is_nef(alpha):
        return False
    h = invariants(alpha).h
    if cone.kind == "eps":
        return stability_index(alpha) >= cone.eps * h
    if cone.kind == "fixed-phi":
        val = min(
            fiber_margin(cone.datum, alpha),
            min_exceptional_multiplicity(cone.datum, alpha),
        )
        return Fraction(val) >= cone.eps * h
    raise ValueError(f"unknown cone kind {cone.kind!r}")


# For nef classes F.alpha <= m_r * h(alpha); used to bound enumeration boxes.
#   r <= 5: a <= h since F + 2F' - sum E_i and 2F + F' - sum E_i are effective
#           (sums of conic and (-1)-classes).
#   r == 6: a <= 2h since 2(-K) - F = (F + 2F' - E_1..E_5) + (2F + 2F' -
#           E_1..E_5 - 2E_6), a sum of two (-1)-classes.
#   r == 7: a <= 4h since 4(-K) - F has square 0, degree 2 and is nef
#           (checked at runtime), hence effective by Riemann-Roch.
_A_BOUND_MULTIPLIER = {1: 1, 2: 1, 3: 1, 4: 1, 5: 1, 6: 2, 7: 4}


@lru_cache(maxsize=None)
def _check_r7_bound_class() -> bool:
    d = 4 * anticanonical(7) - ruling_f(7)
    assert intersect(d, d) == 0 and intersect(anticanonical(7), d) == 2
    return is_nef(d)


def _nef_candidates(r: int, d: int):
    """Generate all nef classes with 0 < h <= d (each exactly once)."""
    if d < 0:
        return
    if r == 7:
        assert _check_r7_bound_class(), "r = 7 enumeration bound unavailable"
    amax = _A_BOUND_MULTIPLIER[r] * d
    lines = minus_one_classes(r)
    for a in range(amax + 1):
        for ap in range(amax + 1):
            kmax = min(a, ap)  # from the (-1)-classes F - E_i and F' - E_i
            for k in itertools.product(range(kmax + 1), repeat=r):
                h = 2 * a + 2 * ap - sum(k)
                if not 0 < h <= d:
                    continue
                alpha = class_from_invariants(r, a, ap, k)
                if all(intersect(alpha, line) >= 0 for line in lines):
                    yield alpha


def enumerate_in_cone(
    cone: ConeSpec, r: int, d: int, include_zero: bool = False
) -> list[DivisorClass]:
    """All integral classes alpha in the cone with 0 < -K.alpha <= d.

    The zero class is appended first when include_zero is set (its membership
    in ratio-defined cones is not tested: those reject it by definition).
    Output is sorted by (h, coefficient tuple) and deterministic.
    """
    if d < 0:
        raise ValueError("height bound must be non-negative")
    found = [alpha for alpha in _nef_candidates(r, d) if cone.contains(alpha)]
    found.sort(key=lambda c: (invariants(c).h, c.coeffs))
    if include_zero:
        found.insert(0, zero_class(r))
    return found


def slice_in_cone(cone: ConeSpec, r: int, d: int) -> list[DivisorClass]:
    """All classes in the cone with -K.alpha = d exactly."""
    if d < 1:
        raise ValueError("slice height must be positive")
    if r == 7:
        assert _check_r7_bound_class(), "r = 7 enumeration bound unavailable"
    amax = _A_BOUND_MULTIPLIER[r] * d
    lines = minus_one_classes(r)
    out = []
    for a in range(amax + 1):
        for ap in range(amax + 1):
            ksum = 2 * a + 2 * ap - d  # forced by h = d
            kmax = min(a, ap)
            if ksum < 0 or ksum > r * kmax:
                continue
            for k in _compositions(ksum, r, kmax):
                alpha = class_from_invariants(r, a, ap, k)
                if all(intersect(alpha, line) >= 0 for line in lines) and cone.contains(alpha):
                    out.append(alpha)
    out.sort(key=lambda c: c.coeffs)
    return out


def _compositions(total: int, parts: int, cap: int):
    """Tuples of `parts` integers in [0, cap] summing to `total`."""
    if parts == 1:
        if 0 <= total <= cap:
            yield (total,)
        return
    lo = max(0, total - (parts - 1) * cap)
    for v in range(lo, min(cap, total) + 1):
        for rest in _compositions(total - v, parts - 1, cap):
            yield (v,) + rest


def alpha_estimate(cone: ConeSpec, r: int, d_max: int) -> tuple[Fraction, Fraction]:
    """Ehrhart-slope estimate of the cone volume factor, against -K.

    Returns ((rho-1)! * N_slice(d) / d^(rho-1)) at d = d_max and at
    d_max // 2, rho = r + 2, both exact rationals.  This is an operational
    estimate of the leading slope; no external normalization is asserted.
    """
    if d_max < 2:
        raise ValueError("d_max must be at least 2")
    rho = r + 2
    fact = math.factorial(rho - 1)
    est = []
    for d in (d_max, d_max // 2):
        n = len(slice_in_cone(cone, r, d))
        if n == 0:
            raise ValueError(f"empty slice at height {d}; increase d_max")
        est.append(Fraction(fact * n, d ** (rho - 1)))
    return est[0], est[1]


# ---------------------------------------------------------------------------
# large-field hypothesis report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityReport:
    q: int
    alpha: DivisorClass
    h: int
    ell: Fraction
    ell_ratio: Fraction  # stability_index / h
    eps_alpha: Fraction  # best fiber margin / (32 h)
    depth_margin: Fraction  # min(2a - sum k, 2a' - sum k)/8 - 1/2
    exponent_flag: bool  # q^(ell/h) > 2^48
    field_size_flag: bool  # q > 240^4
    note: str

    def row(self) -> dict:
        return {
            "q": self.q,
            "class": self.alpha.serialize(),
            "h": self.h,
            "ell": self.ell,
            "ell_ratio": self.ell_ratio,
            "eps_alpha": self.eps_alpha,
            "depth_margin": self.depth_margin,
            "hyp_q_exp_gt_C": self.exponent_flag,
            "hyp_q_gt_C3": self.field_size_flag,
            "note": self.note,
        }


def _q_power_exceeds(q: int, exponent: Fraction, bound: int) -> bool:
    """Exact test q**exponent > bound via integer exponent comparison."""
    if exponent <= 0:
        return False
    return q**exponent.numerator > bound**exponent.denominator


def admissibility(q: int, alpha: DivisorClass) -> AdmissibilityReport:
    """Report the large-field hypothesis flags for (q, alpha).

    All comparisons are exact integer comparisons (q may be astronomically
    large; no floating point is involved).  At desk scale both flags are
    false and the note says so.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    if alpha.is_zero():
        raise ValueError("admissibility requires a nonzero class")
    ell = stability_index(alpha)  # also enforces nef, r <= 5
    inv = invariants(alpha)
    ell_ratio = ell / inv.h
    eps_alpha = Fraction(best_fiber_margin(alpha), 32 * inv.h)
    depth = Fraction(min(2 * inv.a - sum(inv.k), 2 * inv.a_prime - sum(inv.k)), 8) - Fraction(1, 2)
    exp_flag = _q_power_exceeds(q, ell_ratio, EXPONENT_THRESHOLD)
    size_flag = q > FIELD_SIZE_THRESHOLD
    if exp_flag and size_flag:
        note = "large-field hypotheses satisfied"
    else:
        note = "outside the proven large-field regime (expected at desk scale)"
    return AdmissibilityReport(
        q=q,
        alpha=alpha,
        h=inv.h,
        ell=ell,
        ell_ratio=ell_ratio,
        eps_alpha=eps_alpha,
        depth_margin=depth,
        exponent_flag=exp_flag,
        field_size_flag=size_flag,
        note=note,
    )
