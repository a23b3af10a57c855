import random

import numpy as np
import pytest

from kzp import hyperg, solspace
from kzp.errors import ResourceGuard, TruncationTooSmall
from kzp.fields import PrimeField, build_extension
from kzp.kz_core import KZContext, nabla_apply
from kzp.multipoly import EvalPoint, ZPolynomial, sample_point

F5 = PrimeField(5)
F7 = PrimeField(7)


def basis_to_zpolys(basis, index):
    """Materialize one basis jet as a vector of truncated ZPolynomials."""
    ctx = basis.ctx
    mons, _ = solspace.monomial_table(ctx.n, basis.truncation + ctx.p - 1)
    comps = [ZPolynomial.zero(ctx.n, ctx.field) for _ in range(ctx.n)]
    for d, slab in enumerate(basis.slabs):
        for row, e in enumerate(mons[d]):
            for c in range(ctx.n):
                v = int(slab[row, c, index])
                if v:
                    comps[c] = comps[c] + ZPolynomial(ctx.n, ctx.field, {tuple(int(x) for x in e): ctx.field.elem(v)})
    return comps


def test_dimensions_match_module_count():
    ctx = KZContext(3, F5, F5(3))
    pt = EvalPoint((F5(0), F5(1), F5(3)))
    assert solspace.formal_solve(ctx, pt, 5).dimension == 1
    assert solspace.formal_solve(ctx, pt, 10).dimension == 4  # 1 * (1 + 3)
    assert solspace.module_rank_check(ctx, pt, 5).status == "pass"
    assert solspace.module_rank_check(ctx, pt, 10).status == "pass"


def test_module_count_formula():
    assert solspace.p_monomial_count(3, 5, 5) == 1
    assert solspace.p_monomial_count(3, 5, 10) == 4
    assert solspace.p_monomial_count(3, 5, 11) == 10


def test_h_zero_solutions_are_p_th_power_constants():
    ctx = KZContext(3, F5, F5(0))
    pt = EvalPoint((F5(0), F5(1), F5(3)))
    assert solspace.formal_solve(ctx, pt, 5).dimension == 2
    assert solspace.formal_solve(ctx, pt, 10).dimension == 8


def test_boundary_d_plus_zero_has_rank_n_minus_one():
    ctx = KZContext(3, F5, F5(1))
    assert ctx.d_plus == 0
    pt = EvalPoint((F5(0), F5(1), F5(3)))
    cert = solspace.module_rank_check(ctx, pt, 5)
    assert cert.status == "pass" and cert.witness["dimension"] == 2


def test_no_solutions_for_irrational_h():
    F25 = build_extension(5, 2)
    rng = random.Random("nosol")
    for n in (2, 3, 4):
        ctx = KZContext(n, F25, F25.gen)
        pt = sample_point(F25, n, rng)
        cert = solspace.no_solution_check(ctx, pt)
        assert cert.status == "pass"
        assert solspace.formal_solve(ctx, pt, 3 * 5).dimension == 0


def test_solver_basis_satisfies_the_system():
    # re-substitution: apply the cleared connection to the truncated
    # solution in the original frame, recentre the residual at the point,
    # and confirm every surviving term has total degree >= truncation - 1
    # (lower-degree flatness is exact for a truncated solution)
    ctx = KZContext(3, F5, F5(3))
    pt = EvalPoint((F5(1), F5(2), F5(4)))
    D = 10
    basis = solspace.formal_solve(ctx, pt, D)
    assert basis.dimension > 0
    for b in range(basis.dimension):
        comps = basis_to_zpolys(basis, b)
        in_z = [_substitute(c, pt, sign=-1) for c in comps]  # z = a + w
        for k in range(1, 4):
            res = nabla_apply(ctx, k, in_z)
            for r in res:
                back = _substitute(r, pt, sign=+1)  # w = z - a
                if not back.is_zero():
                    assert min(sum(e) for e in back.terms) >= D - 1


def _substitute(f, pt, sign):
    """sign=-1: replace w_i by (z_i - a_i); sign=+1: replace z_i by (w_i + a_i)."""
    n, field = f.n, f.field
    repl = [
        ZPolynomial.variable(i + 1, n, field)
        + ZPolynomial.constant(n, field, pt[i] if sign > 0 else -pt[i])
        for i in range(n)
    ]
    out = ZPolynomial.zero(n, field)
    for e, c in f.terms.items():
        term = ZPolynomial.constant(n, field, c)
        for i, k in enumerate(e):
            for _ in range(k):
                term = term * repl[i]
        out = out + term
    return out


def test_stabilized_rank_across_truncations():
    for n, p, ht in ((3, 5, 3), (3, 5, 4), (4, 5, 2)):
        field = PrimeField(p)
        ctx = KZContext(n, field, field.elem(ht))
        rng = random.Random(f"stab{n}{ht}")
        pt = sample_point(field, n, rng)
        d1 = solspace.formal_solve(ctx, pt, p).dimension
        d2 = solspace.formal_solve(ctx, pt, 2 * p).dimension
        assert d1 == ctx.d_plus * solspace.p_monomial_count(n, p, p)
        assert d2 == ctx.d_plus * solspace.p_monomial_count(n, p, 2 * p)


def test_express_identity_and_module_shift():
    ctx = KZContext(3, F5, F5(3))
    pt = EvalPoint((F5(0), F5(1), F5(3)))
    D = 10
    # the family itself reduces with unit coefficient
    jets = solspace.hyperg_jets_at_point(ctx, pt, D - 1)
    slabs = [np.zeros((s.shape[0], 3), dtype=np.int64) for s in jets[1]]
    for d in range(D):
        slabs[d][:] = jets[1][d]
    coeffs, rem = solspace.express_in_hyperg_basis(ctx, pt, slabs)
    assert rem is None
    assert coeffs == {(1, (0, 0, 0)): F5.one}
    # every solver basis element reduces to zero remainder
    basis = solspace.formal_solve(ctx, pt, D)
    seen_p_monomials = False
    for b in range(basis.dimension):
        coeffs, rem = solspace.express_in_hyperg_basis(ctx, pt, basis.jet_arrays(b))
        assert rem is None
        if any(sum(mono) >= 5 for (_, mono) in coeffs):
            seen_p_monomials = True
    assert seen_p_monomials  # the (z - a)^p block really occurs
    # a corrupted jet leaves a remainder
    bad = [s.copy() for s in basis.jet_arrays(0)]
    bad[1][0, 0] = (bad[1][0, 0] + 1) % 5
    _, rem = solspace.express_in_hyperg_basis(ctx, pt, bad)
    assert rem is not None


def test_truncation_guard():
    ctx = KZContext(3, F5, F5(3))
    pt = EvalPoint((F5(0), F5(1), F5(3)))
    with pytest.raises(TruncationTooSmall):
        solspace.formal_solve(ctx, pt, 4)


def test_resource_guard():
    ctx = KZContext(3, F5, F5(3))
    pt = EvalPoint((F5(0), F5(1), F5(3)))
    with pytest.raises(ResourceGuard):
        solspace.formal_solve(ctx, pt, 10, cell_cap=100)
    # the same guard propagates through the certificate wrapper; the suite
    # turns it into an error certificate
    with pytest.raises(ResourceGuard):
        solspace.module_rank_check(ctx, pt, 10, cell_cap=100)
