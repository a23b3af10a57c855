import random

import pytest

from kzp.errors import IndexOutOfRange, LengthMismatch, PDividesN, RationalH
from kzp.fields import PrimeField, build_extension
from kzp.kz_core import (
    KZContext,
    SolutionVector,
    duality_identity_holds,
    flatness_check,
    gaudin_apply_at_point,
    gaudin_cleared,
    nabla_apply,
    omega,
    shapovalov,
)
from kzp.multipoly import ZPolynomial, sample_point

F5 = PrimeField(5)
F7 = PrimeField(7)


def zvar(i, n, field=F5):
    return ZPolynomial.variable(i, n, field)


def rand_vec(n, field, rng, sum_zero=True):
    comps = []
    for _ in range(n - 1):
        out = ZPolynomial.zero(n, field)
        for _ in range(3):
            e = tuple(rng.randrange(3) for _ in range(n))
            out = out + ZPolynomial(n, field, {e: field.random(rng)})
        comps.append(out)
    last = ZPolynomial.zero(n, field)
    for c in comps:
        last = last - c
    return comps + [last]


def test_omega_matrix_display():
    m = omega(1, 2, 2, F5)
    vals = [[x.value for x in row] for row in m]
    assert vals == [[4, 1], [1, 4]]  # [[-1, 1], [1, -1]] mod 5


def test_omega_transpose_symmetry_and_row_sums():
    m = omega(2, 4, 5, F7)
    mt = omega(4, 2, 5, F7)
    assert m == mt
    ones = [F7.one] * 5
    for row in m:
        assert not shapovalov(row, ones)


def test_omega_equal_indices():
    with pytest.raises(IndexError):
        omega(2, 2, 3, F5)


def test_shapovalov_examples():
    assert shapovalov([F5(1), F5(-1)], [F5(1), F5(-1)]) == F5(2)
    assert shapovalov([F5(1), F5(-1), F5(0)], [F5(0), F5(1), F5(-1)]) == F5(-1)
    with pytest.raises(LengthMismatch):
        shapovalov([F5(1)], [F5(1), F5(2)])


def test_gaudin_symmetry_at_points():
    ctx = KZContext(4, F7, F7(2))
    rng = random.Random("gaudin")
    for _ in range(5):
        pt = sample_point(F7, 4, rng)
        x = [F7.random(rng) for _ in range(4)]
        y = [F7.random(rng) for _ in range(4)]
        for k in range(1, 5):
            lhs = shapovalov(gaudin_apply_at_point(ctx, k, pt, x), y)
            rhs = shapovalov(x, gaudin_apply_at_point(ctx, k, pt, y))
            assert lhs == rhs


def test_gaudin_cleared_symmetric_and_preserves_v():
    ctx = KZContext(3, F5, F5(2))
    rng = random.Random("cleared")
    for k in range(1, 4):
        g = gaudin_cleared(ctx, k)
        # symmetric matrix of polynomials
        for a in range(3):
            for b in range(3):
                assert g.entries[a][b] == g.entries[b][a]
        # sum over directions applied to constants stays sum-zero
    v = [F5(1), F5(1), F5(-2)]
    total = [ZPolynomial.zero(3, F5) for _ in range(3)]
    for k in range(1, 4):
        g = gaudin_cleared(ctx, k)
        for r in range(3):
            for c in range(3):
                total[r] = total[r] + g.entries[r][c] * v[c]
    s = total[0] + total[1] + total[2]
    assert s.is_zero()


def test_nabla_kills_power_of_difference():
    for ht in (1, 2, 3):
        ctx = KZContext(2, F5, F5(ht))
        f = (zvar(1, 2) - zvar(2, 2)) ** (2 * ht)
        res = nabla_apply(ctx, 1, [f, -f])
        assert all(r.is_zero() for r in res)


def test_nabla_zero_vector():
    ctx = KZContext(3, F5, F5(2))
    zero = ZPolynomial.zero(3, F5)
    assert all(r.is_zero() for r in nabla_apply(ctx, 2, [zero] * 3))


def test_nabla_constant_vector_expansion_oracle():
    # I = (1, -1, 0): result is h * D_1 * H_1 I, expanded by hand
    h = F5(2)
    ctx = KZContext(3, F5, h)
    one = ZPolynomial.constant(3, F5, 1)
    I = [one, -one, ZPolynomial.zero(3, F5)]
    res = nabla_apply(ctx, 1, I)
    z1, z2, z3 = (zvar(i, 3) for i in (1, 2, 3))
    # (H_1 I)_1 = (I_2 - I_1)/(z1 - z2) = -2/(z1 - z2); rows 2, 3 get the transports
    e12 = z1 - z3  # D_1/(z1 - z2)
    e13 = z1 - z2
    expected = [
        (e12 * F5(-2) + e13 * F5(-1)) * h,
        e12 * F5(2) * h,
        e13 * F5(1) * h,
    ]
    assert res == expected
    assert any(not r.is_zero() for r in res)


def test_flatness_certificates():
    ctx = KZContext(2, F5, F5(3))
    one = ZPolynomial.constant(2, F5, 1)
    bad = flatness_check(ctx, [one, -one])
    assert bad.status == "fail" and bad.witness["reason"] == "flatness"
    zero = ZPolynomial.zero(2, F5)
    assert flatness_check(ctx, [zero, zero]).status == "pass"
    notv = flatness_check(ctx, [one, one])
    assert notv.status == "fail" and notv.witness["reason"] == "component-sum"


def test_duality_identity_exact():
    rng = random.Random("duality")
    for n, p, hval in ((2, 5, 3), (3, 5, 2), (3, 7, 4)):
        field = PrimeField(p)
        ctx = KZContext(n, field, field.elem(hval))
        x = rand_vec(n, field, rng)
        y = rand_vec(n, field, rng)
        for i in range(1, n + 1):
            assert duality_identity_holds(ctx, i, x, y)


def test_context_counts_and_gating():
    ctx = KZContext(3, F5, F5(3))
    assert (ctx.h_tilde, ctx.d_plus, ctx.d_minus) == (3, 1, 1)
    neg = ctx.negate()
    assert (neg.h_tilde, neg.d_plus, neg.d_minus) == (2, 1, 1)
    # constructible when p | n; theorem-gated operations refuse
    ctx5 = KZContext(5, F5, F5(2))
    assert ctx5.p_divides_n
    with pytest.raises(PDividesN):
        ctx5.require_p_coprime()
    F25 = build_extension(5, 2)
    ctxe = KZContext(3, F25, F25.gen)
    assert not ctxe.h_rational and ctxe.h_tilde is None
    with pytest.raises(RationalH):
        ctxe.require_rational_nonzero()
    # h = 0: rational but no lift
    ctx0 = KZContext(3, F5, F5(0))
    assert ctx0.h_rational and ctx0.h_tilde is None and ctx0.d_plus == 0


def test_solution_vector_v_flag():
    one = ZPolynomial.constant(2, F5, 1)
    assert SolutionVector((one, -one)).in_v()
    assert not SolutionVector((one, one)).in_v()
