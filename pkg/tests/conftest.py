import pytest

from curvecount import forms, gf


@pytest.fixture(scope="session")
def f2():
    return gf.field_make(2, 1)


@pytest.fixture(scope="session")
def f3():
    return gf.field_make(3, 1)


@pytest.fixture(scope="session")
def f4():
    return gf.field_make(2, 2)


@pytest.fixture(scope="session")
def model_q2():
    return forms.canonical_model_q2_r3()


@pytest.fixture(scope="session")
def model_q3():
    return forms.default_model(3, 3)


def _pairs(field, points):
    return tuple(
        (forms.PointP1.make(field, x, y), forms.PointP1.make(field, xp, yp))
        for x, y, xp, yp in points
    )


@pytest.fixture(scope="session")
def model_q2_alt(f2):
    # same three first-factor points, scrambled pairing
    return forms.SurfaceModel(
        field=f2, r=3, points=_pairs(f2, [(0, 1, 1, 1), (1, 1, 1, 0), (1, 0, 0, 1)])
    )


@pytest.fixture(scope="session")
def model_q3_alt(f3):
    return forms.SurfaceModel(
        field=f3, r=3, points=_pairs(f3, [(0, 1, 1, 0), (1, 1, 2, 1), (2, 1, 0, 1)])
    )


# -- independent oracles ----------------------------------------------------


def monic_polys(field, d):
    import itertools

    for tail in itertools.product(field.elements, repeat=d):
        yield tuple(tail) + (1,)


def irreducible_count_by_sieve(field, d):
    """Exhaustive irreducibility scan: mark every monic product of two monic
    polynomials of positive degree; the unmarked remainder is irreducible."""
    composite = set()
    for e in range(1, d // 2 + 1):
        for a in monic_polys(field, e):
            for b in monic_polys(field, d - e):
                composite.add(gf._pmul(field, a, b))
    return field.q**d - len(composite)
