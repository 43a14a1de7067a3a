"""Exact counters for section pairs, morphisms, and configuration covers.

Two counting modes produce identical numbers:

* ``naive`` walks every coefficient vector of both form pairs and classifies
  each one through the reference routines in :mod:`curvecount.forms`.  It is
  the oracle everything else is checked against.
* ``accelerated`` tallies the same set with table-driven vectorized passes:
  forms of a fixed formal degree are indexed 0..q^(d+1)-1 by their base-q
  coefficient digits, divisibility by each prime power of the projective
  line is a precomputed boolean mask over that index space, and the gcd
  degree against a fixed outer form becomes one gather per blow-up point.
  The inner loop over the larger form space is then pure numpy array
  arithmetic, one pass per outer form.

Both modes tally the whole (a, a') block at once: every multiplicity profile
plus the bottom class, keyed for reuse, so partition identities come for
free and repeated per-profile queries hit a cache.

Counts of section pairs are always divisible by (q-1)^2 (the free scaling
action on the two coordinate pairs); morphism counts are that exact quotient.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import forms, gf, lattice
from .forms import BinaryForm, SurfaceModel
from .gf import FieldSpec
from .lattice import ConeSpec, DivisorClass

__all__ = [
    "CountRequest",
    "CountResult",
    "BlockTally",
    "BudgetExceeded",
    "ModelInvalid",
    "DEFAULT_BUDGET",
    "count_sections",
    "count_morphisms",
    "count_n_exact",
    "count_config_cover",
    "dropping_rank",
    "block_tally",
    "upper_bound_morphisms",
]

# Default work budget: candidate section pairs examined by one counting call.
DEFAULT_BUDGET = 2**30

_INNER_CHUNK = 1 << 20  # grid rows processed per vector pass


class BudgetExceeded(RuntimeError):
    def __init__(self, needed: int, budget: int):
        super().__init__(
            f"counting run needs {needed} candidate pairs, over the budget {budget}"
        )
        self.needed = needed
        self.budget = budget


class ModelInvalid(ValueError):
    pass


def _require_valid(model: SurfaceModel):
    cert = model.certificate()
    if not all(cert.values()):
        failed = [k for k, v in cert.items() if not v]
        raise ModelInvalid(f"model fails validity checks: {failed}")


@dataclass(frozen=True)
class CountRequest:
    model: SurfaceModel
    a: int
    a_prime: int
    k: tuple[int, ...]
    mode: str = "accelerated"

    def __post_init__(self):
        if self.a < 0 or self.a_prime < 0:
            raise ValueError("degrees must be non-negative")
        if len(self.k) != self.model.r:
            raise ValueError(f"profile length {len(self.k)} != r = {self.model.r}")
        if any(v < 0 for v in self.k):
            raise ValueError("profile entries must be non-negative")
        if self.mode not in ("naive", "accelerated"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def regime_flags(self) -> tuple[bool, bool]:
        s = sum(self.k)
        return (2 * self.a >= s, 2 * self.a_prime >= s)


@dataclass(frozen=True)
class CountResult:
    raw: int  # section pairs
    morphisms: int  # raw / (q-1)^2
    regime_a: bool
    regime_a_prime: bool
    mode: str
    work_pairs: int
    seconds: float  # timing metadata; never emitted in deterministic reports


@dataclass(frozen=True)
class BlockTally:
    """Counts for every profile at fixed (a, a'): the full fiber partition."""

    a: int
    a_prime: int
    profiles: dict[tuple[int, ...], int]
    bottom: int
    bpf_s: int  # basepoint-free pairs of degree a
    bpf_t: int
    mode: str
    work_pairs: int
    seconds: float

    def total(self) -> int:
        return sum(self.profiles.values()) + self.bottom


# ---------------------------------------------------------------------------
# index tables for one form space
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _form_tables(field: FieldSpec, d: int) -> "_FormTables":
    return _FormTables(field, d)


class _FormTables:
    """Indexing of all degree-d forms over F_q plus divisibility masks."""

    def __init__(self, field: FieldSpec, d: int):
        self.field = field
        self.d = d
        q = field.q
        self.size = q ** (d + 1)
        add, mul, neg, _ = field._tables
        self.elt_add = np.array(add, dtype=np.uint16)
        self.elt_mul = np.array(mul, dtype=np.uint16)
        self.powers = np.array([q**j for j in range(d + 1)], dtype=np.int64)
        # digits[i, j] = coefficient of x^j y^(d-j) of form index i
        idx = np.arange(self.size, dtype=np.int64)
        digs = np.empty((self.size, d + 1), dtype=np.uint16)
        for j in range(d + 1):
            digs[:, j] = (idx // q**j) % q
        self.digits = digs
        self._mask_cache: dict[tuple, np.ndarray] = {}
        self._degtab_cache: dict[tuple, np.ndarray] = {}

    def combine(self, c1: int, idx1: np.ndarray, c2: int, idx2: np.ndarray) -> np.ndarray:
        """Index array of c1*f1 + c2*f2 over parallel index arrays."""
        d1 = self.elt_mul[c1][self.digits[idx1]]
        d2 = self.elt_mul[c2][self.digits[idx2]]
        return self.elt_add[d1, d2].astype(np.int64) @ self.powers

    def encode(self, coeffs) -> int:
        return int(sum(int(c) * int(q) for c, q in zip(coeffs, self.powers)))

    def decode(self, idx: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.digits[idx])

    def divisible_mask(self, place, j: int) -> np.ndarray:
        """Boolean mask over the index space: place^j divides the form.

        ``place`` is 'inf' or a monic irreducible coefficient tuple.  The
        zero form is divisible by everything.
        """
        key = (place, j)
        mask = self._mask_cache.get(key)
        if mask is not None:
            return mask
        q = self.field.q
        if place == "inf":
            # multiplicity at infinity >= j  <=>  top j coefficients vanish
            mask = np.arange(self.size, dtype=np.int64) < q ** (self.d + 1 - j)
        else:
            mask = np.zeros(self.size, dtype=bool)
            power = place
            for _ in range(j - 1):
                power = gf._pmul(self.field, power, place)
            rem = self.d + 1 - (len(power) - 1)  # free coefficients of the cofactor
            if rem <= 0:
                mask[0] = True
            else:
                for tail in itertools.product(self.field.elements, repeat=rem):
                    prod = gf._pmul(self.field, power, tail)
                    mask[self.encode(prod + (0,) * (self.d + 1 - len(prod)))] = True
        self._mask_cache[key] = mask
        return mask

    def gcd_degree_table(self, f_coeffs: tuple[int, ...], f_degree: int) -> np.ndarray:
        """uint8 table over this space: index g -> deg gcd(f, g).

        f is a form of formal degree f_degree living in another space.  For
        f == 0 the table is the constant formal degree d of this space (the
        bottom case g == 0 is handled by the caller).
        """
        key = (f_coeffs, f_degree)
        tab = self._degtab_cache.get(key)
        if tab is not None:
            return tab
        if not any(f_coeffs):
            tab = np.full(self.size, self.d, dtype=np.uint8)
        else:
            form = BinaryForm(self.field, f_degree, f_coeffs)
            tab = np.zeros(self.size, dtype=np.uint8)
            for place, mult in form.divisor():
                deg = 1 if place == "inf" else len(place) - 1
                cap = self.d if place == "inf" else self.d // deg
                for j in range(1, min(mult, cap) + 1):
                    tab += deg * self.divisible_mask(place, j).astype(np.uint8)
            tab[0] = f_degree  # deg gcd(f, 0) = formal degree of f
        self._degtab_cache[key] = tab
        return tab

    def bpf_pair_mask(self) -> np.ndarray:
        """Mask over pair index w*size + z: (w, z) is basepoint-free."""
        key = ("bpf-pairs",)
        mask = self._mask_cache.get(key)
        if mask is not None:
            return mask
        mask = np.ones(self.size * self.size, dtype=bool)
        mask[0] = False  # the (0, 0) pair
        places = [("inf", 1)] + [
            (p, 1) for dd in range(1, self.d + 1) for p in gf.monic_irreducibles(self.field, dd)
        ]
        for place, j in places:
            bad = np.flatnonzero(self.divisible_mask(place, j))
            if len(bad):
                grid = bad[:, None] * self.size + bad[None, :]
                mask[grid.ravel()] = False
        self._mask_cache[key] = mask
        return mask

    def bpf_single_list(self) -> np.ndarray:
        """Pair indices (w*size + z) of all basepoint-free pairs."""
        return np.flatnonzero(self.bpf_pair_mask())


# ---------------------------------------------------------------------------
# block tallies
# ---------------------------------------------------------------------------

_BLOCK_CACHE: dict[tuple, BlockTally] = {}


def block_tally(
    model: SurfaceModel, a: int, a_prime: int, mode: str = "accelerated",
    budget: int = DEFAULT_BUDGET,
) -> BlockTally:
    """Tally every multiplicity profile of the (a, a') section block."""
    _require_valid(model)
    if a < 0 or a_prime < 0:
        raise ValueError("degrees must be non-negative")
    q = model.q
    needed = q ** (2 * (a + 1) + 2 * (a_prime + 1))
    if needed > budget:
        raise BudgetExceeded(needed, budget)
    key = (model.key(), a, a_prime, mode)
    hit = _BLOCK_CACHE.get(key)
    if hit is not None:
        return hit
    t0 = time.perf_counter()
    if mode == "naive":
        profiles, bottom, bpf_s, bpf_t = _tally_naive(model, a, a_prime)
    elif mode == "accelerated":
        profiles, bottom, bpf_s, bpf_t = _tally_tables(model, a, a_prime)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    res = BlockTally(
        a=a,
        a_prime=a_prime,
        profiles=profiles,
        bottom=bottom,
        bpf_s=bpf_s,
        bpf_t=bpf_t,
        mode=mode,
        work_pairs=needed,
        seconds=time.perf_counter() - t0,
    )
    _BLOCK_CACHE[key] = res
    return res


def _all_forms(field: FieldSpec, d: int):
    return [
        BinaryForm(field, d, coeffs)
        for coeffs in itertools.product(field.elements, repeat=d + 1)
    ]


def _tally_naive(model: SurfaceModel, a: int, a_prime: int):
    """Reference tally: explicit loops through every section pair."""
    field = model.field
    s_pairs = [
        (u, v)
        for u in _all_forms(field, a)
        for v in _all_forms(field, a)
        if forms.is_basepoint_free(u, v)
    ]
    t_pairs = [
        (w, z)
        for w in _all_forms(field, a_prime)
        for z in _all_forms(field, a_prime)
        if forms.is_basepoint_free(w, z)
    ]
    profiles: dict[tuple[int, ...], int] = {}
    bottom = 0
    for s in s_pairs:
        lams = [forms.apply_functional(p, s) for p, _ in model.points]
        for t in t_pairs:
            mus = [forms.apply_functional(pp, t) for _, pp in model.points]
            prof = []
            bot = False
            for lam, mu in zip(lams, mus):
                d = forms.form_gcd_degree(lam, mu)
                if d is None:
                    bot = True
                    break
                prof.append(d)
            if bot:
                bottom += 1
            else:
                key = tuple(prof)
                profiles[key] = profiles.get(key, 0) + 1
    return profiles, bottom, len(s_pairs), len(t_pairs)


def _swap_model(model: SurfaceModel) -> SurfaceModel:
    return SurfaceModel(
        field=model.field, r=model.r, points=tuple((pp, p) for p, pp in model.points)
    )


def _tally_tables(model: SurfaceModel, a: int, a_prime: int):
    """Vectorized tally; the outer loop runs over the smaller form space."""
    if a > a_prime:
        # gcd is symmetric in the two factors, so swap roles
        profiles, bottom, bpf_s, bpf_t = _tally_tables(_swap_model(model), a_prime, a)
        return profiles, bottom, bpf_t, bpf_s
    field = model.field
    inner = _form_tables(field, a_prime)
    outer = _form_tables(field, a)
    r = model.r

    # per-chunk grid data shared by every outer form: the functional image
    # index of t = (w, z) for each blow-up point, plus the bpf mask
    grid = _model_grid(model, a_prime)

    base = max(a, a_prime) + 2
    nbins = base**r
    counts = np.zeros(nbins, dtype=np.int64)
    bottom = 0

    s_pair_idx = outer.bpf_single_list()
    lam_consts = [(p.y, field.neg(p.x)) for p, _ in model.points]
    outer_size = outer.size
    f_zero = (0,) * (a + 1)

    for sp in s_pair_idx.tolist():
        u_idx, v_idx = divmod(sp, outer_size)
        u = outer.decode(u_idx)
        v = outer.decode(v_idx)
        f_list = []
        for (c1, c2) in lam_consts:
            f_list.append(
                tuple(field.add(field.mul(c1, cu), field.mul(c2, cv)) for cu, cv in zip(u, v))
            )
        tabs = [inner.gcd_degree_table(fc, a) for fc in f_list]
        zero_slots = [i for i, fc in enumerate(f_list) if fc == f_zero]
        for chunk in grid:
            g_idx, bpf = chunk
            codes = None
            for i in range(r):
                part = tabs[i][g_idx[i]].astype(np.int64)
                codes = part if codes is None else codes + part * (base**i)
            if zero_slots:
                bot_mask = np.zeros(len(bpf), dtype=bool)
                for i in zero_slots:
                    bot_mask |= g_idx[i] == 0
                sel = bpf & ~bot_mask
                bottom += int(np.count_nonzero(bpf & bot_mask))
            else:
                sel = bpf
            counts += np.bincount(codes[sel], minlength=nbins)

    profiles: dict[tuple[int, ...], int] = {}
    for code in np.flatnonzero(counts):
        c = int(code)
        prof = []
        for _ in range(r):  # code = sum d_i * base^i, low digit first
            c, d = divmod(c, base)
            prof.append(d)
        profiles[tuple(prof)] = int(counts[code])

    bpf_t = int(np.count_nonzero(inner.bpf_pair_mask()))
    bpf_s = len(s_pair_idx)
    return profiles, bottom, bpf_s, bpf_t


_GRID_CACHE: dict[tuple, list] = {}


def _model_grid(model: SurfaceModel, d: int) -> list:
    """Chunked per-point functional index arrays over the (w, z) pair grid."""
    key = (model.key(), d)
    hit = _GRID_CACHE.get(key)
    if hit is not None:
        return hit
    field = model.field
    tables = _form_tables(field, d)
    size = tables.size
    total = size * size
    bpf_all = tables.bpf_pair_mask()
    mu_consts = [(pp.y, field.neg(pp.x)) for _, pp in model.points]
    chunks = []
    for lo in range(0, total, _INNER_CHUNK):
        hi = min(total, lo + _INNER_CHUNK)
        pair = np.arange(lo, hi, dtype=np.int64)
        w_idx = pair // size
        z_idx = pair % size
        g_idx = [tables.combine(c1, w_idx, c2, z_idx) for (c1, c2) in mu_consts]
        chunks.append((g_idx, bpf_all[lo:hi]))
    _GRID_CACHE[key] = chunks
    return chunks


# ---------------------------------------------------------------------------
# public counters
# ---------------------------------------------------------------------------


def count_sections(req: CountRequest, budget: int = DEFAULT_BUDGET) -> CountResult:
    """Exact number of section pairs with the requested multiplicity profile."""
    t0 = time.perf_counter()
    tally = block_tally(req.model, req.a, req.a_prime, mode=req.mode, budget=budget)
    raw = tally.profiles.get(tuple(req.k), 0)
    q = req.model.q
    torsor = (q - 1) ** 2
    assert raw % torsor == 0, "section count must be divisible by (q-1)^2"
    ra, rap = req.regime_flags
    return CountResult(
        raw=raw,
        morphisms=raw // torsor,
        regime_a=ra,
        regime_a_prime=rap,
        mode=req.mode,
        work_pairs=tally.work_pairs,
        seconds=time.perf_counter() - t0,
    )


def count_morphisms(
    model: SurfaceModel,
    alpha: DivisorClass,
    mode: str = "accelerated",
    budget: int = DEFAULT_BUDGET,
) -> int:
    """#Mor(P^1, S, alpha)(F_q) through the section model: sections/(q-1)^2."""
    if alpha.r != model.r:
        raise ValueError(f"class has r = {alpha.r} but model has r = {model.r}")
    inv = lattice.invariants(alpha)
    if inv.a < 0 or inv.a_prime < 0 or any(v < 0 for v in inv.k):
        raise ValueError(f"class {alpha.serialize()} has negative section invariants")
    req = CountRequest(model=model, a=inv.a, a_prime=inv.a_prime, k=inv.k, mode=mode)
    return count_sections(req, budget=budget).morphisms


def count_n_exact(
    model: SurfaceModel,
    cone: ConeSpec,
    d: int,
    include_zero: bool = False,
    mode: str = "accelerated",
    budget: int = DEFAULT_BUDGET,
) -> tuple[int, list[tuple[DivisorClass, int]]]:
    """Counting function N(d): sum of morphism counts over cone classes.

    Returns (total, per-class breakdown).  With include_zero the constant
    stratum is counted through the same section model at (0, 0, 0); that
    number counts constant pairs avoiding the blow-up centers (a model
    count), not points of the surface, and reports label it accordingly.
    """
    classes = lattice.enumerate_in_cone(cone, model.r, d, include_zero=include_zero)
    rows = []
    total = 0
    for alpha in classes:
        if alpha.is_zero():
            n = count_sections(
                CountRequest(model=model, a=0, a_prime=0, k=(0,) * model.r, mode=mode),
                budget=budget,
            ).morphisms
        else:
            n = count_morphisms(model, alpha, mode=mode, budget=budget)
        rows.append((alpha, n))
        total += n
    return total, rows


def upper_bound_morphisms(q: int, h: int, r: int) -> Fraction:
    """The regime upper bound q^(h+2) / (1 - 1/q)^(r+2), as an exact rational."""
    return Fraction(q ** (h + 2) * q ** (r + 2), (q - 1) ** (r + 2))


def count_config_cover(
    field: FieldSpec,
    points: list[forms.PointP1],
    a: int,
    k: tuple[int, ...],
    budget: int = DEFAULT_BUDGET,
) -> int:
    """Count pairs (C, (T_i)) with C a type-(1, a) section of the product of
    the line with itself and T_i a degree-k_i effective divisor inside the
    fiber divisor of C over the i-th marked point.

    C runs over basepoint-free pairs of degree-a forms up to scalar; per C the
    number of admissible T_i is read off the factorization of the cutting
    form.
    """
    r = len(points)
    if len(k) != r:
        raise ValueError("profile length must match the number of marked points")
    if len({(p.x, p.y) for p in points}) != r:
        raise ValueError("marked points must be distinct")
    if any(ki < 0 for ki in k):
        raise ValueError("profile entries must be non-negative")
    if any(ki > a for ki in k):
        raise ValueError(f"k_i > a = {a}: the fiber divisor has degree a")
    q = field.q
    needed = q ** (2 * (a + 1))
    if needed > budget:
        raise BudgetExceeded(needed, budget)
    total = 0
    for u in _all_forms(field, a):
        for v in _all_forms(field, a):
            if not forms.is_basepoint_free(u, v):
                continue
            ways = 1
            for p, ki in zip(points, k):
                if ki == 0:
                    continue
                cut = forms.apply_functional(p, (u, v))
                ways *= _divisor_count_of_degree(cut, ki)
                if ways == 0:
                    break
            total += ways
    assert total % (q - 1) == 0
    return total // (q - 1)


def _divisor_count_of_degree(form: BinaryForm, target: int) -> int:
    """Number of effective subdivisors of div(form) of exact degree target."""
    if form.is_zero():
        raise ValueError("zero form cuts no finite divisor")
    ways = [0] * (target + 1)
    ways[0] = 1
    for place, mult in form.divisor():
        deg = 1 if place == "inf" else len(place) - 1
        new = [0] * (target + 1)
        for have in range(target + 1):
            if ways[have]:
                for take in range(mult + 1):
                    nxt = have + take * deg
                    if nxt > target:
                        break
                    new[nxt] += ways[have]
        ways = new
    return ways[target]


def dropping_rank(n: list[int], m: list[int]) -> int:
    """sum_j min(2 m_j, n_j) - sum_j m_j for sub-multiplicities 0 < m_j <= n_j."""
    if len(n) != len(m):
        raise ValueError("multiplicity lists must have equal length")
    for nj, mj in zip(n, m):
        if not 0 < mj <= nj:
            raise ValueError(f"need 0 < m <= n, got m={mj}, n={nj}")
    return sum(min(2 * mj, nj) for nj, mj in zip(n, m)) - sum(m)
