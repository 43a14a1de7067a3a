"""Binary forms on P^1, point functionals, and multiplicity profiles.

A binary form of formal degree d is a coefficient vector of length d + 1;
coefficient j multiplies x^j y^(d-j), so evaluating at y = 1 reads the vector
as a univariate polynomial in x.  The all-zero vector is the zero form of
that formal degree.  The divisor of a nonzero form consists of the roots of
its dehomogenization plus the point at infinity with multiplicity
d - deg_x f; in particular the divisor always has total degree d.

The gcd degree of two nonzero forms is computed by dehomogenizing at y = 1,
taking the monic univariate gcd, and adding the smaller of the two
multiplicities at infinity.  With the conventions gcd(0, g) = monic(g) and
gcd(f, 0) = monic(f), the degree of gcd(f, 0) is the formal degree of f
(the divisor of the zero form contains everything).

A surface model is the field together with r blow-up points (p_i, p_i'),
distinct in each factor.  The multiplicity profile of a section pair (s, t)
records, per i, the gcd degree of the two functional images; it is the bottom
marker (None) exactly when both images vanish identically for some i, i.e.
the pair maps constantly to (p_i, p_i').
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import gf
from .gf import FieldSpec

__all__ = [
    "PointP1",
    "BinaryForm",
    "SectionPair",
    "SurfaceModel",
    "apply_functional",
    "form_gcd_degree",
    "is_basepoint_free",
    "multiplicity_profile",
    "class_of",
    "ClassData",
    "projective_points",
    "canonical_model_q2_r3",
    "default_model",
    "parse_model",
    "serialize_model",
]


@dataclass(frozen=True)
class PointP1:
    """A point [x : y] of P^1(F_q), normalized so the last nonzero coordinate is 1."""

    field: FieldSpec
    x: int
    y: int

    @classmethod
    def make(cls, field: FieldSpec, x: int, y: int) -> "PointP1":
        if x == 0 and y == 0:
            raise ValueError("(0, 0) is not a point of P^1")
        if y != 0:
            inv = field.inv(y)
            return cls(field, field.mul(x, inv), 1)
        return cls(field, 1, 0)

    def serialize(self) -> tuple[int, int]:
        return (self.x, self.y)


def projective_points(field: FieldSpec) -> list[PointP1]:
    """The q + 1 points of P^1(F_q), [c : 1] for each c then [1 : 0]."""
    pts = [PointP1.make(field, c, 1) for c in field.elements]
    pts.append(PointP1.make(field, 1, 0))
    return pts


@dataclass(frozen=True)
class BinaryForm:
    """A binary form of fixed formal degree; see the module docstring."""

    field: FieldSpec
    degree: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("formal degree must be non-negative")
        if len(self.coeffs) != self.degree + 1:
            raise ValueError(f"degree {self.degree} form needs {self.degree + 1} coefficients")

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def x_poly(self) -> tuple[int, ...]:
        """Dehomogenization at y = 1, trimmed."""
        return gf._ptrim(self.coeffs)

    @property
    def infinity_mult(self) -> int:
        """Multiplicity of [1 : 0] in the divisor (nonzero forms only)."""
        if self.is_zero():
            raise ValueError("the zero form has no divisor")
        return self.degree - (len(self.x_poly) - 1)

    def evaluate(self, p: PointP1) -> int:
        """Value at the point's normalized coordinates (vanishing is scalar-free)."""
        f = self.field
        acc = 0
        xpow = 1
        for j, c in enumerate(self.coeffs):
            ypow = 1
            for _ in range(self.degree - j):
                ypow = f.mul(ypow, p.y)
            acc = f.add(acc, f.mul(c, f.mul(xpow, ypow)))
            xpow = f.mul(xpow, p.x)
        return acc

    def divisor(self) -> list[tuple[object, int]]:
        """[(place, multiplicity)] with places = monic irreducible tuples or 'inf'."""
        if self.is_zero():
            raise ValueError("the zero form has no divisor")
        out: list[tuple[object, int]] = list(gf.poly_factor(self.field, self.x_poly))
        m = self.infinity_mult
        if m:
            out.append(("inf", m))
        return out


def apply_functional(p: PointP1, pair: tuple[BinaryForm, BinaryForm]) -> BinaryForm:
    """The form y0*u - x0*v for p = [x0 : y0]; it vanishes at b exactly when
    [u(b) : v(b)] = p."""
    u, v = pair
    if u.degree != v.degree:
        raise ValueError("functional needs a pair of equal-degree forms")
    f = u.field
    coeffs = tuple(
        f.sub(f.mul(p.y, cu), f.mul(p.x, cv)) for cu, cv in zip(u.coeffs, v.coeffs)
    )
    return BinaryForm(f, u.degree, coeffs)


def form_gcd_degree(f: BinaryForm, g: BinaryForm) -> int | None:
    """Degree of the gcd divisor of two forms; None when both are zero."""
    fz, gz = f.is_zero(), g.is_zero()
    if fz and gz:
        return None
    if fz:
        return g.degree
    if gz:
        return f.degree
    gcd = gf._pgcd(f.field, f.x_poly, g.x_poly)
    return (len(gcd) - 1) + min(f.infinity_mult, g.infinity_mult)


def is_basepoint_free(u: BinaryForm, v: BinaryForm) -> bool:
    """True iff u, v share no projective root over the algebraic closure.

    Equivalent to a nonzero degree-a resultant; for a = 0 it reduces to
    (u, v) != (0, 0).
    """
    if u.degree != v.degree:
        raise ValueError(f"degree mismatch: {u.degree} vs {v.degree}")
    if u.degree == 0:
        return not (u.is_zero() and v.is_zero())
    if u.is_zero() or v.is_zero():
        return False
    return form_gcd_degree(u, v) == 0


def resultant(u: BinaryForm, v: BinaryForm) -> int:
    """Sylvester-matrix resultant of two degree-a forms (a >= 1).

    Kept as an independent cross-check of is_basepoint_free.
    """
    if u.degree != v.degree or u.degree < 1:
        raise ValueError("resultant needs two forms of equal positive degree")
    f = u.field
    a = u.degree
    n = 2 * a
    rows = []
    for shift in range(a):
        row = [0] * n
        for j, c in enumerate(reversed(u.coeffs)):
            row[shift + j] = c
        rows.append(row)
    for shift in range(a):
        row = [0] * n
        for j, c in enumerate(reversed(v.coeffs)):
            row[shift + j] = c
        rows.append(row)
    # fraction-free is unnecessary over a field: plain Gaussian elimination
    det = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if rows[i][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = f.neg(det)
        det = f.mul(det, rows[col][col])
        inv = f.inv(rows[col][col])
        for i in range(col + 1, n):
            factor = f.mul(rows[i][col], inv)
            if factor:
                for jj in range(col, n):
                    rows[i][jj] = f.sub(rows[i][jj], f.mul(factor, rows[col][jj]))
    return det


@dataclass(frozen=True)
class SectionPair:
    """A pair s = (u, v) of degree-a forms and t = (w, z) of degree-a' forms."""

    s: tuple[BinaryForm, BinaryForm]
    t: tuple[BinaryForm, BinaryForm]

    def __post_init__(self):
        if self.s[0].degree != self.s[1].degree:
            raise ValueError("s components must share a degree")
        if self.t[0].degree != self.t[1].degree:
            raise ValueError("t components must share a degree")

    @property
    def a(self) -> int:
        return self.s[0].degree

    @property
    def a_prime(self) -> int:
        return self.t[0].degree


@dataclass(frozen=True)
class SurfaceModel:
    """Field data plus r blow-up point pairs, with validity certificates."""

    field: FieldSpec
    r: int
    points: tuple[tuple[PointP1, PointP1], ...]

    def __post_init__(self):
        if len(self.points) != self.r:
            raise ValueError(f"expected {self.r} point pairs, got {len(self.points)}")

    @property
    def q(self) -> int:
        return self.field.q

    def first_factor_points(self) -> list[PointP1]:
        return [p for p, _ in self.points]

    def second_factor_points(self) -> list[PointP1]:
        return [pp for _, pp in self.points]

    def certificate(self) -> dict:
        """Validity certificate: distinctness always; general-position checks
        for r >= 4 (no (1,1)-form through any 4 points); best-effort extra
        checks for r in {6, 7} (no (1,2)- or (2,1)-form through any 6)."""
        cert: dict = {}
        firsts = [(p.x, p.y) for p in self.first_factor_points()]
        seconds = [(p.x, p.y) for p in self.second_factor_points()]
        cert["first_factor_distinct"] = len(set(firsts)) == self.r
        cert["second_factor_distinct"] = len(set(seconds)) == self.r
        if self.r >= 4:
            cert["no_bidegree_11_through_4"] = self._general_position((1, 1), 4)
        if self.r >= 6:
            cert["no_bidegree_12_through_6"] = self._general_position((1, 2), 6)
            cert["no_bidegree_21_through_6"] = self._general_position((2, 1), 6)
        return cert

    def _general_position(self, bidegree: tuple[int, int], size: int) -> bool:
        d1, d2 = bidegree
        dim = (d1 + 1) * (d2 + 1)
        assert dim == size  # a form space tested against exactly dim points
        f = self.field
        for subset in itertools.combinations(self.points, size):
            rows = []
            for p, pp in subset:
                row = []
                for i in range(d1 + 1):
                    for j in range(d2 + 1):
                        mono = f.mul(
                            _power(f, p.x, i),
                            f.mul(
                                _power(f, p.y, d1 - i),
                                f.mul(_power(f, pp.x, j), _power(f, pp.y, d2 - j)),
                            ),
                        )
                        row.append(mono)
                rows.append(row)
            if _rank(f, rows) < size:
                return False
        return True

    def is_valid(self) -> bool:
        return all(self.certificate().values())

    def key(self) -> tuple:
        """Hashable identity used for memoizing counts."""
        return (
            self.field.p,
            self.field.n,
            self.field.modulus,
            tuple((p.x, p.y, pp.x, pp.y) for p, pp in self.points),
        )


def _power(field: FieldSpec, base: int, e: int) -> int:
    acc = 1
    for _ in range(e):
        acc = field.mul(acc, base)
    return acc


def _rank(field: FieldSpec, rows: list[list[int]]) -> int:
    rows = [row[:] for row in rows]
    ncols = len(rows[0]) if rows else 0
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = field.inv(rows[rank][col])
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                factor = field.mul(rows[i][col], inv)
                for j in range(col, ncols):
                    rows[i][j] = field.sub(rows[i][j], field.mul(factor, rows[rank][j]))
        rank += 1
        if rank == len(rows):
            break
    return rank


def multiplicity_profile(sp: SectionPair, model: SurfaceModel) -> tuple[int, ...] | None:
    """Per-point gcd degrees of the functional images, or None (bottom).

    d_i = deg gcd(lambda_i(s), mu_i(t)) where lambda_i, mu_i annihilate the
    lines through p_i, p_i'.  None is returned when both images vanish
    identically for some i: the pair then maps constantly to (p_i, p_i') and
    belongs to no finite profile.  Requires both components basepoint-free.
    """
    if not is_basepoint_free(*sp.s):
        raise ValueError("s is not basepoint-free")
    if not is_basepoint_free(*sp.t):
        raise ValueError("t is not basepoint-free")
    out = []
    for p, pp in model.points:
        d = form_gcd_degree(apply_functional(p, sp.s), apply_functional(pp, sp.t))
        if d is None:
            return None
        out.append(d)
    return tuple(out)


@dataclass(frozen=True)
class ClassData:
    a: int
    a_prime: int
    profile: tuple[int, ...]

    @property
    def h(self) -> int:
        return 2 * self.a + 2 * self.a_prime - sum(self.profile)


def class_of(sp: SectionPair, model: SurfaceModel) -> ClassData:
    """The invariant triple (a, a', profile) of a section pair with its height."""
    profile = multiplicity_profile(sp, model)
    if profile is None:
        raise ValueError("section pair has the bottom profile; no class attached")
    return ClassData(a=sp.a, a_prime=sp.a_prime, profile=profile)


# ---------------------------------------------------------------------------
# model construction and files
# ---------------------------------------------------------------------------


def canonical_model_q2_r3() -> SurfaceModel:
    """The reference model over F_2: points ([0:1],[0:1]), ([1:1],[1:1]),
    ([1:0],[1:0]).  Golden tables are stated against this model."""
    f = gf.field_make(2, 1)
    mk = lambda x, y: PointP1.make(f, x, y)
    pts = ((mk(0, 1), mk(0, 1)), (mk(1, 1), mk(1, 1)), (mk(1, 0), mk(1, 0)))
    return SurfaceModel(field=f, r=3, points=pts)


def default_model(q: int, r: int) -> SurfaceModel:
    """A valid model over F_q with r blow-up points, deterministically chosen.

    Uses the first r points of P^1(F_q) on the first factor and searches
    pairings on the second factor until every certificate passes.
    """
    field = gf.field_for_order(q)
    if r < 1:
        raise ValueError("r must be positive")
    if r > q + 1:
        raise ValueError(f"cannot place {r} distinct points on P^1(F_{q})")
    pts = projective_points(field)
    firsts = pts[:r]
    for perm in itertools.permutations(range(r)):
        model = SurfaceModel(
            field=field, r=r, points=tuple((firsts[i], pts[perm[i]]) for i in range(r))
        )
        if model.is_valid():
            return model
    raise ValueError(f"no valid point configuration found for q={q}, r={r}")


def serialize_model(model: SurfaceModel) -> str:
    """Plain text: one line ``q p n``, one line ``r``, then r lines
    ``x y x' y'`` in the canonical element encoding."""
    lines = [f"{model.q} {model.field.p} {model.field.n}", str(model.r)]
    for p, pp in model.points:
        lines.append(f"{p.x} {p.y} {pp.x} {pp.y}")
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> SurfaceModel:
    rows = [ln for ln in (ln.strip() for ln in text.splitlines()) if ln and not ln.startswith("#")]
    if len(rows) < 2:
        raise ValueError("model file too short")
    try:
        q, p, n = (int(t) for t in rows[0].split())
        r = int(rows[1])
    except Exception as exc:
        raise ValueError(f"malformed model header: {exc}") from exc
    if p**n != q:
        raise ValueError(f"inconsistent header: {p}^{n} != {q}")
    field = gf.field_make(p, n)
    if len(rows) != 2 + r:
        raise ValueError(f"expected {r} point lines, found {len(rows) - 2}")
    points = []
    for ln in rows[2:]:
        x, y, xp, yp = (int(t) for t in ln.split())
        for v in (x, y, xp, yp):
            if not 0 <= v < q:
                raise ValueError(f"element code {v} out of range for F_{q}")
        points.append((PointP1.make(field, x, y), PointP1.make(field, xp, yp)))
    model = SurfaceModel(field=field, r=r, points=tuple(points))
    cert = model.certificate()
    if not all(cert.values()):
        failed = [k for k, v in cert.items() if not v]
        raise ValueError(f"invalid model, failed checks: {failed}")
    return model
