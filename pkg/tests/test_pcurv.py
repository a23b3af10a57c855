import random

import numpy as np
import pytest

from kzp import hyperg, linalg, pcurv
from kzp.errors import DegenerateCase, IrrationalH, NotEtale
from kzp.fields import PrimeField, build_extension
from kzp.kz_core import KZContext, shapovalov
from kzp.multipoly import EvalPoint, ZPolynomial, sample_point

F5 = PrimeField(5)
F7 = PrimeField(7)
F25 = build_extension(5, 2)


def f_basis(n, field):
    out = []
    for i in range(n - 1):
        v = [field.zero] * n
        v[i] = field.one
        v[n - 1] = -field.one
        out.append(v)
    return out


def test_zero_curvature_for_h_zero():
    ctx = KZContext(3, F5, F5(0))
    pts = [EvalPoint((F5(0), F5(1), F5(2))), EvalPoint((F5(1), F5(3), F5(4)))]
    assert pcurv.psi_zero_check(ctx, pts).status == "pass"


def test_zero_curvature_at_boundary_sizes():
    # d_plus = n - 1 case
    ctx = KZContext(2, F5, F5(3))
    assert ctx.d_plus == 1 == ctx.n - 1
    assert pcurv.psi_zero_check(ctx, [EvalPoint((F5(0), F5(1)))]).status == "pass"
    # d_plus = 0 case
    ctx2 = KZContext(3, F5, F5(1))
    pts = [EvalPoint((F5(0), F5(1), F5(3)))]
    assert pcurv.psi_zero_check(ctx2, pts).status == "pass"


def test_jacobson_identity_brute_force():
    # (d/dz + f)^p = d^p + f^p + f^(p-1) as operators, checked by matrix powers
    def mulmat(f, N, p):
        M = np.zeros((N, N), dtype=np.int64)
        for i, c in enumerate(f):
            for j in range(N - i):
                M[i + j, j] = c % p
        return M

    def dmat(N, p):
        M = np.zeros((N, N), dtype=np.int64)
        for j in range(1, N):
            M[j - 1, j] = j % p
        return M

    rng = np.random.default_rng(0)
    for p in (5, 7):
        N = 3 * p
        for _ in range(10):
            f = rng.integers(0, p, size=2 * p).tolist()
            T = (dmat(N, p) + mulmat(f, N, p)) % p
            Tp = np.eye(N, dtype=np.int64)
            for _ in range(p):
                Tp = Tp @ T % p
            acc = np.zeros(N, dtype=object)
            acc[0] = 1
            fpoly = np.array(f + [0] * (N - len(f)), dtype=object)
            for _ in range(p):
                new = np.zeros(N, dtype=object)
                for i in range(N):
                    if acc[i]:
                        for j in range(N - i):
                            new[i + j] += acc[i] * fpoly[j]
                acc = new % p
            g = f[:]
            for _ in range(p - 1):
                g = [(i + 1) * g[i + 1] % p for i in range(len(g) - 1)] if len(g) > 1 else [0]
            gfull = np.zeros(N, dtype=object)
            for i, c in enumerate(g):
                gfull[i] = c % p
            rhs = mulmat((acc + gfull) % p, N, p)
            assert np.array_equal(Tp[:p, :p] % p, rhs[:p, :p] % p)


def test_n2_rank_one_oracle_over_f25():
    # Psi = f^p + f^(p-1) for the scalar operator d + f, f = -2h/(z1-z2)
    t = F25.gen
    ctx = KZContext(2, F25, t)
    a = EvalPoint((F25.elem(0), F25.elem(1)))
    m = pcurv.psi_at_point(ctx, 1, a)
    d = a[0] - a[1]
    oracle = F25.elem(-2) * (t**5 - t) * (d**5).inv()
    assert m.matrix[0][0] == oracle


def test_spectrum_sign_pinned_by_n2_oracle():
    t = F25.gen
    ctx = KZContext(2, F25, t)
    a = EvalPoint((F25.elem(0), F25.elem(1)))
    got = pcurv.psi_at_point(ctx, 1, a).matrix[0][0]
    # critical point c = (a1 + a2)/2; prediction sign * (h^p - h)/(a1 - c)^p
    c = (a[0] + a[1]) * F25.elem(2).inv()
    base = (t**5 - t) * ((a[0] - c) ** 5).inv()
    assert F25.elem(pcurv.SPECTRUM_SIGN) * base == got
    assert F25.elem(-pcurv.SPECTRUM_SIGN) * base != got


def test_closed_form_scalar_is_pinned():
    # The rank-one scalar is CLOSED_FORM_SIGN * h / C_k^p across cells.
    for n, p, ht in ((3, 5, 3), (4, 5, 2), (4, 7, 4), (5, 7, 3)):
        field = PrimeField(p)
        ctx = KZContext(n, field, field.elem(ht))
        rng = random.Random(f"pin{n}{p}{ht}")
        pt = pcurv.sample_generic_point(ctx, rng)
        kappas, iotas, _, _ = pcurv._structure_vectors(ctx, pt)
        for k in range(1, n + 1):
            ak = pt[k - 1]
            ck = field.one
            for i in range(n):
                if i != k - 1:
                    ck = ck * (ak - pt[i])
            m = pcurv.psi_at_point(ctx, k, pt)
            for v in f_basis(n, field):
                lhs = m.apply(v)
                base = [shapovalov(kappas[k - 1], v) * x for x in iotas[k - 1]]
                nz = next((i for i, x in enumerate(base) if x), None)
                if nz is None:
                    assert not any(lhs)
                    continue
                fitted = lhs[nz] * base[nz].inv()
                assert fitted == field.elem(pcurv.CLOSED_FORM_SIGN) * ctx.h * (ck**p).inv()


@pytest.mark.parametrize("n,p,ht", [(3, 5, 3), (4, 5, 2), (4, 7, 2)])
def test_rank_structure_and_closed_form(n, p, ht):
    field = PrimeField(p)
    ctx = KZContext(n, field, field.elem(ht))
    rng = random.Random(f"rs{n}{p}{ht}")
    for _ in range(4):
        pt = pcurv.sample_generic_point(ctx, rng)
        assert pcurv.rank_structure_check(ctx, pt).status == "pass"
        assert pcurv.closed_form_check(ctx, pt).status == "pass"


def test_closed_form_swaps_families_under_negation():
    ctx = KZContext(3, F5, F5(3))
    rng = random.Random("swap")
    pt = pcurv.sample_generic_point(ctx, rng)
    assert pcurv.closed_form_check(ctx, pt).status == "pass"
    assert pcurv.closed_form_check(ctx.negate(), pt).status == "pass"


def test_kernel_vectors_are_killed():
    ctx = KZContext(3, F5, F5(3))
    rng = random.Random("ker")
    pt = pcurv.sample_generic_point(ctx, rng)
    kappas, iotas, plus_vals, _ = pcurv._structure_vectors(ctx, pt)
    for k in range(1, 4):
        m = pcurv.psi_at_point(ctx, k, pt)
        # stated kernel functional annihilated exactly on the kernel
        w = [kappas[k - 1][i] - kappas[k - 1][2] for i in range(2)]
        for v in linalg.mat_nullspace([w], F5):
            full = list(v) + [-(v[0] + v[1])]
            assert not any(m.apply(full))
        # flat family values are in every kernel
        for vec in plus_vals.values():
            assert not any(m.apply(list(vec)))


def test_degenerate_case_routing():
    ctx = KZContext(2, F5, F5(3))  # d_plus = n - 1
    with pytest.raises(DegenerateCase):
        pcurv.rank_structure_check(ctx, EvalPoint((F5(0), F5(1))))
    with pytest.raises(DegenerateCase):
        pcurv.closed_form_check(ctx, EvalPoint((F5(0), F5(1))))


def test_nilpotency():
    ctx = KZContext(3, F5, F5(3))
    rng = random.Random("nil")
    for _ in range(3):
        pt = sample_point(F5, 3, rng)
        assert pcurv.nilpotency_check(ctx, pt).status == "pass"
    ctxe = KZContext(3, F25, F25.gen)
    pt = sample_point(F25, 3, rng)
    assert pcurv.nilpotency_check(ctxe, pt).status == "not-applicable"


def test_o_linearity_on_polynomial_sections():
    rng = random.Random("olin")
    for n, p, ht in ((3, 5, 3), (4, 7, 3)):
        field = PrimeField(p)
        ctx = KZContext(n, field, field.elem(ht))
        for _ in range(3):
            pt = sample_point(field, n, rng)
            comps = []
            for _ in range(n - 1):
                f = ZPolynomial.zero(n, field)
                for _ in range(3):
                    e = tuple(rng.randrange(3) for _ in range(n))
                    f = f + ZPolynomial(n, field, {e: field.random(rng)})
                comps.append(f)
            last = ZPolynomial.zero(n, field)
            for c in comps:
                last = last - c
            section = comps + [last]
            for k in range(1, n + 1):
                via_section = pcurv.psi_on_polynomial_section(ctx, k, pt, section)
                value = [c.evaluate(list(pt)) for c in section]
                via_matrix = pcurv.psi_at_point(ctx, k, pt).apply(value)
                assert via_section == via_matrix


def test_trace_consistency_with_rank_one():
    ctx = KZContext(4, F7, F7(3))
    rng = random.Random("tr")
    pt = pcurv.sample_generic_point(ctx, rng)
    for k in range(1, 5):
        m = pcurv.psi_at_point(ctx, k, pt)
        chi = linalg.charpoly([list(r) for r in m.matrix], F7)
        tr = sum((m.matrix[i][i] for i in range(3)), F7.zero)
        # char poly = x^(n-2) (x - tr)
        expect = [F7.zero] * 2 + [-tr, F7.one]
        assert chi == expect


def test_charpoly_berkowitz_against_interpolation():
    rng = random.Random("cp")
    for field in (F7, F25):
        for size in (2, 3, 4):
            m = [[field.random(rng) for _ in range(size)] for _ in range(size)]
            chi = linalg.charpoly(m, field)
            # oracle: evaluate det(xI - M) at distinct points and compare
            for val in range(size + 2):
                x = field.elem(val)
                shifted = [[(x if i == j else field.zero) - m[i][j] for j in range(size)] for i in range(size)]
                det = _det(shifted, field)
                horner = field.zero
                for c in reversed(chi):
                    horner = horner * x + c
                assert horner == det


def _det(m, field):
    n = len(m)
    if n == 1:
        return m[0][0]
    out = field.zero
    sign = field.one
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        out = out + sign * m[0][j] * _det(minor, field)
        sign = -sign
    return out


def test_critical_set_and_etale_flags():
    ctx = KZContext(3, F25, F25.gen)
    rng = random.Random("crit")
    pt = pcurv.sample_etale_point(F25, 3, rng)
    cs = pcurv.critical_set(ctx, pt, rng)
    assert len(cs.roots) == 2 and cs.etale
    # roots actually kill the critical polynomial (in the splitting field)
    big = cs.splitting_field
    emb_dp = pcurv.critical_poly(F25, pt)
    emb, = [pcurv._embed_into(F25, big, rng)]
    from kzp.fields import fq_eval

    lifted = [pcurv._embed_elem(c, big, emb) for c in emb_dp]
    for r in cs.roots:
        assert not fq_eval(lifted, r)


def test_spectrum_n2_and_n3():
    ctx2 = KZContext(2, F25, F25.gen)
    pt2 = EvalPoint((F25.elem(0), F25.elem(1)))
    assert pcurv.steepest_descent_spectrum_check(ctx2, pt2, "s2").status == "pass"
    F49 = build_extension(7, 2)
    ctx3 = KZContext(3, F49, F49.gen)
    rng = random.Random("sp3")
    pt3 = pcurv.sample_etale_point(F49, 3, rng)
    cert = pcurv.steepest_descent_spectrum_check(ctx3, pt3, "s3")
    assert cert.status == "pass"


def test_spectrum_refuses_rational_h():
    ctx = KZContext(3, F5, F5(3))
    pt = EvalPoint((F5(0), F5(1), F5(3)))
    with pytest.raises(IrrationalH):
        pcurv.steepest_descent_spectrum_check(ctx, pt, "s")


def test_spectrum_not_etale():
    # find a non-etale point for n=3 over F_25 by scanning
    rng = random.Random("ne")
    ctx = KZContext(3, F25, F25.gen)
    pt = sample_point(F25, 3, rng, predicate=lambda q: not pcurv.is_etale_point(F25, q))
    with pytest.raises(NotEtale):
        pcurv.steepest_descent_spectrum_check(ctx, pt, "s")


def test_etale_locus_empty_over_prime_field_when_n_is_minus_one():
    rng = random.Random("empty")
    with pytest.raises(NotEtale):
        pcurv.sample_etale_point(F5, 4, rng, max_tries=2000)


def test_invertibility_at_etale_points_for_irrational_h():
    ctx = KZContext(3, F25, F25.gen)
    rng = random.Random("inv")
    pt = pcurv.sample_etale_point(F25, 3, rng)
    for k in range(1, 4):
        m = pcurv.psi_at_point(ctx, k, pt)
        assert m.rank(F25) == 2
