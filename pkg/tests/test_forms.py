import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvecount import forms, gf
from curvecount.forms import BinaryForm, PointP1, SectionPair


def B(field, d, coeffs):
    return BinaryForm(field, d, tuple(coeffs))


def all_forms(field, d):
    return [B(field, d, c) for c in itertools.product(field.elements, repeat=d + 1)]


def bpf_pairs(field, d):
    return [
        (u, v)
        for u in all_forms(field, d)
        for v in all_forms(field, d)
        if forms.is_basepoint_free(u, v)
    ]


def test_point_normalization(f2, f3):
    assert PointP1.make(f3, 2, 2) == PointP1.make(f3, 1, 1)
    assert PointP1.make(f3, 2, 0) == PointP1(f3, 1, 0)
    with pytest.raises(ValueError):
        PointP1.make(f2, 0, 0)


@settings(max_examples=60, deadline=None)
@given(q=st.sampled_from([2, 3, 4, 5]), x=st.integers(0, 4), y=st.integers(0, 4))
def test_point_normalization_idempotent(q, x, y):
    field = gf.field_for_order(q)
    x, y = x % q, y % q
    if x == 0 and y == 0:
        return
    p = PointP1.make(field, x, y)
    again = PointP1.make(field, p.x, p.y)
    assert p == again
    # scaling by any nonzero lambda gives the same point
    for lam in range(1, q):
        assert PointP1.make(field, field.mul(lam, x), field.mul(lam, y)) == p


def test_basepoint_free_examples(f2):
    assert forms.is_basepoint_free(B(f2, 0, (1,)), B(f2, 0, (0,)))
    assert not forms.is_basepoint_free(B(f2, 0, (0,)), B(f2, 0, (0,)))
    x, y = B(f2, 1, (0, 1)), B(f2, 1, (1, 0))
    assert forms.is_basepoint_free(x, y)
    assert not forms.is_basepoint_free(x, x)
    with pytest.raises(ValueError):
        forms.is_basepoint_free(B(f2, 1, (0, 1)), B(f2, 2, (1, 0, 0)))


def test_basepoint_free_matches_resultant(f2, f3):
    for field, d in ((f2, 1), (f2, 2), (f3, 1)):
        for u in all_forms(field, d):
            for v in all_forms(field, d):
                if u.is_zero() or v.is_zero():
                    continue
                assert forms.is_basepoint_free(u, v) == (forms.resultant(u, v) != 0)


def test_apply_functional_examples(f2):
    s = (B(f2, 1, (0, 1)), B(f2, 1, (1, 0)))  # (x, y)
    assert forms.apply_functional(PointP1.make(f2, 0, 1), s).coeffs == (0, 1)  # x
    assert forms.apply_functional(PointP1.make(f2, 1, 1), s).coeffs == (1, 1)  # x + y
    assert forms.apply_functional(PointP1.make(f2, 1, 0), s).coeffs == (1, 0)  # y


def test_form_evaluation_vanishing(f2, f3):
    # evaluation at a point vanishes exactly on the divisor, scalar-free
    for field in (f2, f3):
        for d in (1, 2):
            for coeffs in itertools.product(field.elements, repeat=d + 1):
                form = B(field, d, coeffs)
                if form.is_zero():
                    continue
                roots = {
                    (p.x, p.y)
                    for p in forms.projective_points(field)
                    if form.evaluate(p) == 0
                }
                divisor_roots = set()
                for place, _ in form.divisor():
                    if place == "inf":
                        divisor_roots.add((1, 0))
                    elif len(place) == 2:  # rational linear place x + c
                        divisor_roots.add((field.neg(place[0]), 1))
                assert roots == divisor_roots


def test_form_gcd_degree_counts_infinity(f2):
    # y^2 (as a degree-2 form) and y share the point at infinity... they do
    # not: both vanish at [1:0]?  c*y^d vanishes at [1:0] with multiplicity d.
    ysq = B(f2, 2, (1, 0, 0))  # x^0 y^2 coefficient 1
    y1 = B(f2, 1, (1, 0))
    assert ysq.infinity_mult == 2 and y1.infinity_mult == 1
    assert forms.form_gcd_degree(ysq, y1) == 1
    # zero conventions
    assert forms.form_gcd_degree(ysq, B(f2, 3, (0, 0, 0, 0))) == 2
    assert forms.form_gcd_degree(B(f2, 1, (0, 0)), y1) == 1
    assert forms.form_gcd_degree(B(f2, 1, (0, 0)), B(f2, 1, (0, 0))) is None


def test_multiplicity_profile_examples(model_q2, f2):
    s = (B(f2, 1, (0, 1)), B(f2, 1, (1, 0)))
    t = (B(f2, 0, (1,)), B(f2, 0, (1,)))
    assert forms.multiplicity_profile(SectionPair(s=s, t=t), model_q2) == (0, 1, 0)

    s0 = (B(f2, 0, (1,)), B(f2, 0, (0,)))
    t0 = (B(f2, 0, (0,)), B(f2, 0, (1,)))
    assert forms.multiplicity_profile(SectionPair(s=s0, t=t0), model_q2) == (0, 0, 0)

    s_bot = (B(f2, 0, (0,)), B(f2, 0, (1,)))
    assert forms.multiplicity_profile(SectionPair(s=s_bot, t=t0), model_q2) is None


def test_class_of(model_q2, f2):
    s = (B(f2, 1, (0, 1)), B(f2, 1, (1, 0)))
    t = (B(f2, 0, (1,)), B(f2, 0, (1,)))
    cd = forms.class_of(SectionPair(s=s, t=t), model_q2)
    assert (cd.a, cd.a_prime, cd.profile, cd.h) == (1, 0, (0, 1, 0), 1)

    bot = SectionPair(s=(B(f2, 0, (0,)), B(f2, 0, (1,))), t=(B(f2, 0, (0,)), B(f2, 0, (1,))))
    with pytest.raises(ValueError):
        forms.class_of(bot, model_q2)

    bad = SectionPair(
        s=(B(f2, 2, (0, 0, 1)), B(f2, 2, (0, 1, 0))),  # (x^2, xy) share [0:1]
        t=(B(f2, 0, (1,)), B(f2, 0, (1,))),
    )
    with pytest.raises(ValueError):
        forms.multiplicity_profile(bad, model_q2)


def test_functional_of_bpf_pair_never_zero(f2):
    # if apply_functional(p, s) were 0, both components would share the
    # factor cutting p's preimage, contradicting basepoint freeness
    points = forms.projective_points(f2)
    for a in (1, 2):
        for u, v in bpf_pairs(f2, a):
            for p in points:
                assert not forms.apply_functional(p, (u, v)).is_zero()


def test_profile_entry_bound(model_q2, f2):
    for a in range(3):
        for ap in range(3):
            for u, v in bpf_pairs(f2, a):
                for w, z in bpf_pairs(f2, ap):
                    prof = forms.multiplicity_profile(
                        SectionPair(s=(u, v), t=(w, z)), model_q2
                    )
                    if prof is None:
                        continue
                    for d in prof:
                        assert d <= max(a, ap)
                        if a and ap:
                            assert d <= min(a, ap)


def test_profile_partition_q2_a1(model_q2, f2):
    spairs = bpf_pairs(f2, 1)
    tpairs = bpf_pairs(f2, 1)
    tally = {}
    bottom = 0
    for s in spairs:
        for t in tpairs:
            prof = forms.multiplicity_profile(SectionPair(s=s, t=t), model_q2)
            if prof is None:
                bottom += 1
            else:
                tally[prof] = tally.get(prof, 0) + 1
    assert sum(tally.values()) + bottom == len(spairs) * len(tpairs)


def test_torsor_scaling_invariance(model_q2, model_q3):
    for model in (model_q2, model_q3):
        field = model.field
        q = field.q
        for u, v in bpf_pairs(field, 1):
            for w, z in bpf_pairs(field, 1):
                base = forms.multiplicity_profile(SectionPair(s=(u, v), t=(w, z)), model)
                for lam in range(1, q):
                    for mu in range(1, q):
                        su = B(field, 1, tuple(field.mul(lam, c) for c in u.coeffs))
                        sv = B(field, 1, tuple(field.mul(lam, c) for c in v.coeffs))
                        tw = B(field, 1, tuple(field.mul(mu, c) for c in w.coeffs))
                        tz = B(field, 1, tuple(field.mul(mu, c) for c in z.coeffs))
                        assert (
                            forms.multiplicity_profile(
                                SectionPair(s=(su, sv), t=(tw, tz)), model
                            )
                            == base
                        )


def test_model_file_round_trip(model_q2, model_q3):
    for model in (model_q2, model_q3):
        text = forms.serialize_model(model)
        back = forms.parse_model(text)
        assert back.key() == model.key()
    # header inconsistency
    with pytest.raises(ValueError):
        forms.parse_model("4 2 1\n1\n0 1 0 1\n")
    # duplicate first-factor points
    bad = "2 2 1\n2\n0 1 0 1\n0 1 1 1\n"
    with pytest.raises(ValueError):
        forms.parse_model(bad)


def test_general_position_certificate():
    f5 = gf.field_make(5, 1)
    good = forms.default_model(5, 4)
    assert good.is_valid()
    # the diagonal pairing lies on a bidegree-(1,1) curve, so it must fail
    pts = forms.projective_points(f5)[:4]
    diag = forms.SurfaceModel(field=f5, r=4, points=tuple((p, p) for p in pts))
    cert = diag.certificate()
    assert cert["first_factor_distinct"] and cert["second_factor_distinct"]
    assert not cert["no_bidegree_11_through_4"]
    assert not diag.is_valid()


def test_default_model_canonical(model_q2):
    assert forms.canonical_model_q2_r3().key() == model_q2.key()
    with pytest.raises(ValueError):
        forms.default_model(2, 4)  # only q+1 = 3 points available
