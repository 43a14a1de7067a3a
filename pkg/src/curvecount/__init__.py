"""Exact counting of rational curves on blow-ups of a quadric over finite
fields, against the predictions of the associated truncated Euler products.

The package pairs a brute-force-exact section counter (with an accelerated,
bit-identical mode) with the predicted side: virtual counts from a truncated
multivariate Euler product, the Tamagawa number, regime upper bounds, and the
piecewise-linear cone invariants controlling the large-field hypotheses.
"""

from . import cli, counting, exact, forms, gf, lattice, sieve
from .counting import CountRequest, CountResult, count_morphisms, count_sections
from .exact import BigRat
from .forms import BinaryForm, PointP1, SectionPair, SurfaceModel
from .gf import FieldSpec, Poly, closed_points_count, field_make, poly_gcd, zeta_p1_check
from .lattice import ConeSpec, DivisorClass
from .sieve import TruncSeries, limit_check, tamagawa, virtual_zeta

__version__ = "0.1.0"

__all__ = [
    "BigRat",
    "BinaryForm",
    "ConeSpec",
    "CountRequest",
    "CountResult",
    "DivisorClass",
    "FieldSpec",
    "PointP1",
    "Poly",
    "SectionPair",
    "SurfaceModel",
    "TruncSeries",
    "cli",
    "closed_points_count",
    "count_morphisms",
    "count_sections",
    "counting",
    "exact",
    "field_make",
    "forms",
    "gf",
    "lattice",
    "limit_check",
    "poly_gcd",
    "sieve",
    "tamagawa",
    "virtual_zeta",
    "zeta_p1_check",
]
