"""p-hypergeometric solution families and their identity checks.

The family attached to (n, p, h~) consists of the coefficient vectors of
x^(l*p - 1), l = 1..floor(n*h~/p), in P(x,z)^h~ * (1/(x-z_1), ...,
1/(x-z_n)); the sign -h family is the same construction with p - h~.
Generation runs by exact synthetic division of one master-power
expansion per component, not by multiplying n-1 factors per component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import certs, linalg
from ._dense import (
    BoxPoly,
    degree_bounds_report,
    flatness_family_residual,
    homogeneity_report,
    master_axis_vector,
    orthogonality_residual,
    q_family_boxes,
)
from .errors import RationalH
from .fields import FieldElement, PrimeField, fq_mul, fq_trim
from .kz_core import KZContext, SolutionVector, shapovalov
from .multipoly import EvalPoint, XSeries, ZPolynomial, sample_point, xpow_master


def _effective_lift(ctx: KZContext, sign: int) -> int | None:
    """Integer lift in [1, p-1] for the requested sign, None when h = 0."""
    if not ctx.h_rational:
        raise RationalH("p-hypergeometric families need h in the prime field")
    if ctx.h_tilde is None:
        return None
    return ctx.h_tilde if sign > 0 else ctx.p - ctx.h_tilde


@dataclass
class QFamily:
    """One sign's family of p-hypergeometric solution vectors.

    Components are kept in the packed box form; `vector` materializes a
    SolutionVector of ZPolynomials on demand.
    """

    ctx: KZContext
    sign: int
    htilde_eff: int | None
    boxes: dict[int, list[BoxPoly]]

    def __len__(self) -> int:
        return len(self.boxes)

    @property
    def ells(self) -> list[int]:
        return sorted(self.boxes)

    @property
    def h_eff(self) -> FieldElement:
        return self.ctx.h if self.sign > 0 else -self.ctx.h

    def vector(self, ell: int) -> SolutionVector:
        field = self.ctx.field
        return SolutionVector(tuple(bp.to_zpoly(field) for bp in self.boxes[ell]))

    def evaluate(self, point: EvalPoint) -> dict[int, list[FieldElement]]:
        """Evaluate every family member at a point (exact).

        Coordinates may live in the prime field or in a quadratic
        extension of it (needed when the prime field is too small to
        have n distinct values).
        """
        field = self.ctx.field
        coords = [c.value for c in point]
        out = {}
        if all(isinstance(c, int) for c in coords):
            for ell, comps in self.boxes.items():
                out[ell] = [field.elem(bp.evaluate_int(coords)) for bp in comps]
            return out
        p = field.char
        if getattr(field, "degree", 1) != 2:
            raise RationalH("family evaluation supports prime or quadratic-extension points")
        alpha = (-field.modulus[1]) % p
        beta = (-field.modulus[0]) % p
        pairs = [c if isinstance(c, tuple) else (c, 0) for c in coords]
        for ell, comps in self.boxes.items():
            out[ell] = [field.elem(bp.evaluate_ext2(pairs, alpha, beta)) for bp in comps]
        return out

    def mutated(self) -> "QFamily":
        """Deliberately corrupt one coefficient (negative-control self-test)."""
        if not self.boxes:
            return self
        ell = self.ells[0]
        comps = [BoxPoly(b.p, b.shape, b.exps.copy(), b.vals.copy()) for b in self.boxes[ell]]
        target = next((b for b in comps if b.vals.size), None)
        if target is not None:
            bumped = (int(target.vals[0]) + 1) % target.p
            target.vals[0] = bumped if bumped else 1
        boxes = dict(self.boxes)
        boxes[ell] = comps
        return QFamily(self.ctx, self.sign, self.htilde_eff, boxes)


def p_solutions(ctx: KZContext, sign: int = 1) -> QFamily:
    """The p-hypergeometric family for kz(+h) (sign>0) or kz(-h) (sign<0).

    Empty when h = 0 or when the count floor(n*h~_eff/p) vanishes.
    """
    ht = _effective_lift(ctx, sign)
    if ht is None:
        return QFamily(ctx, sign, None, {})
    count = (ctx.n * ht) // ctx.p
    ells = list(range(1, count + 1))
    boxes = q_family_boxes(ctx.n, ctx.p, ht, ells) if ells else {}
    return QFamily(ctx, sign, ht, boxes)


def q_expansion(ctx: KZContext) -> list[SolutionVector]:
    """All x-coefficient slices of P^h~ * (1/(x-z_j))_j, low power first.

    Computed by exact synthetic division of one master-power expansion
    by each (x - z_j); the division remainder is asserted to vanish.
    Intended for desk-size parameters; the family generator above slices
    only the needed powers.
    """
    ht = _effective_lift(ctx, 1)
    if ht is None:
        raise RationalH("q expansion needs h nonzero in the prime field")
    n, field = ctx.n, ctx.field
    master = xpow_master(ctx)
    top = n * ht
    slices: list[list[ZPolynomial]] = [[] for _ in range(top)]
    for j in range(1, n + 1):
        zj = ZPolynomial.variable(j, n, field)
        q = ZPolynomial.zero(n, field)
        col = [None] * top
        for i in range(top, 0, -1):
            s_i = master.coefficient(i) or ZPolynomial.zero(n, field)
            q = s_i + zj * q
            col[i - 1] = q
        rem = (master.coefficient(0) or ZPolynomial.zero(n, field)) + zj * col[0]
        assert rem.is_zero(), "master power not divisible by its own factor"
        for i in range(top):
            slices[i].append(col[i])
    return [SolutionVector(tuple(s)) for s in slices]


def q_eval_at_point(
    n: int, field, htilde_eff: int, ells: list[int], point: EvalPoint
) -> dict[int, list[FieldElement]]:
    """Family vectors at one point via univariate synthetic division.

    Works over any field containing the coordinates; this is the
    pointwise route used by the p-curvature and curve-side checks.
    """
    out: dict[int, list[FieldElement]] = {ell: [] for ell in ells}
    top = n * htilde_eff
    wanted = {ell * field.char - 1: ell for ell in ells}
    if isinstance(field, PrimeField):
        p = field.p
        P = np.ones(1, dtype=np.int64)
        for c in point:
            P = np.convolve(P, np.array([-c.value % p, 1], dtype=np.int64)) % p
        S = np.ones(1, dtype=np.int64)
        for _ in range(htilde_eff):
            S = np.convolve(S, P) % p
        Sl = S.tolist()
        for j in range(n):
            aj = point[j].value
            q = 0
            for i in range(top, 0, -1):
                q = (Sl[i] + aj * q) % p
                if i - 1 in wanted:
                    out[wanted[i - 1]].append(field.elem(q))
        return out
    one = field.one
    P = [one]
    for c in point:
        P = fq_mul(P, [-c, one])
    S = [one]
    for _ in range(htilde_eff):
        S = fq_mul(S, P)
    for j in range(n):
        aj = point[j]
        q = field.zero
        for i in range(top, 0, -1):
            q = S[i] + aj * q
            if i - 1 in wanted:
                out[wanted[i - 1]].append(q)
    return out


# -- certificates ----------------------------------------------------------


def counting_check(ctx: KZContext) -> certs.Certificate:
    """d_plus + d_minus = n - 1 (needs p coprime to n and h != 0)."""
    params = {"n": ctx.n, "p": ctx.p, "h": str(ctx.h)}
    if not ctx.h_rational or ctx.h_tilde is None or ctx.p_divides_n:
        return certs.Certificate("counting", params, certs.NOT_APPLICABLE)
    ok = ctx.d_plus + ctx.d_minus == ctx.n - 1
    wit = None if ok else {"d_plus": ctx.d_plus, "d_minus": ctx.d_minus}
    return certs.Certificate("counting", params, certs.PASS if ok else certs.FAIL, wit)


def flatness_family_check(ctx: KZContext, family: QFamily) -> certs.Certificate:
    """Every family member passes the cleared flatness identity exactly."""
    params = _family_params(ctx, family)
    if family.htilde_eff is None or not family.boxes:
        return certs.Certificate("flatness", params, certs.PASS, {"note": "empty family"})
    hbar = family.htilde_eff % ctx.p
    wit = flatness_family_residual(ctx.n, ctx.p, family.htilde_eff, hbar, family.boxes)
    status = certs.PASS if wit is None else certs.FAIL
    return certs.Certificate("flatness", params, status, wit)


def homogeneity_check(ctx: KZContext, family: QFamily) -> certs.Certificate:
    """Every monomial of member l has total degree n*h~ - l*p."""
    params = _family_params(ctx, family)
    ht = family.htilde_eff
    if ht is None:
        return certs.Certificate("homogeneity", params, certs.PASS, {"note": "empty family"})
    for ell, comps in family.boxes.items():
        wit = homogeneity_report(comps, ctx.n * ht - ell * ctx.p)
        if wit is not None:
            wit["ell"] = ell
            return certs.Certificate("homogeneity", params, certs.FAIL, wit)
    return certs.Certificate("homogeneity", params, certs.PASS)


def degree_bounds_check(ctx: KZContext, family: QFamily) -> certs.Certificate:
    """Per-variable degrees: at most h~ off the own slot, h~ - 1 on it."""
    params = _family_params(ctx, family)
    ht = family.htilde_eff
    if ht is None:
        return certs.Certificate("degree-bounds", params, certs.PASS, {"note": "empty family"})
    for ell, comps in family.boxes.items():
        wit = degree_bounds_report(comps, ht)
        if wit is not None:
            wit["ell"] = ell
            return certs.Certificate("degree-bounds", params, certs.FAIL, wit)
    return certs.Certificate("degree-bounds", params, certs.PASS)


def orthogonality_check(
    ctx: KZContext, plus: QFamily | None = None, minus: QFamily | None = None
) -> certs.Certificate:
    """All cross pairings of the two families vanish as polynomials."""
    ctx.require_rational_nonzero("orthogonality")
    plus = plus or p_solutions(ctx, 1)
    minus = minus or p_solutions(ctx, -1)
    params = {"n": ctx.n, "p": ctx.p, "h": str(ctx.h)}
    for ell in plus.ells:
        for m in minus.ells:
            wit = orthogonality_residual(plus.boxes[ell], minus.boxes[m], ctx.p)
            if wit is not None:
                wit.update({"ell": ell, "m": m})
                return certs.Certificate("orthogonality", params, certs.FAIL, wit)
    return certs.Certificate("orthogonality", params, certs.PASS)


def point_independence_check(
    ctx: KZContext, trials: int, seed: str, family: QFamily | None = None
) -> certs.Certificate:
    """Evaluated family has full rank d_plus at seeded random points."""
    ctx.require_p_coprime("point independence")
    family = family or p_solutions(ctx, 1)
    params = {"n": ctx.n, "p": ctx.p, "h": str(ctx.h), "trials": trials}
    if len(family) == 0:
        return certs.Certificate("point-independence", params, certs.PASS, {"note": "vacuous"}, seed)
    import random

    rng = random.Random(seed)
    for t in range(trials):
        pt = sample_point(ctx.field, ctx.n, rng)
        vals = family.evaluate(pt)
        if isinstance(ctx.field, PrimeField):
            mat = np.array([[v.value for v in vals[ell]] for ell in family.ells], dtype=np.int64)
            rank = linalg.rank_mod(mat, ctx.p)
        else:
            rank = linalg.mat_rank([vals[ell] for ell in family.ells], ctx.field)
        if rank != len(family):
            wit = {"trial": t, "point": [str(c) for c in pt], "rank": rank, "expected": len(family)}
            return certs.Certificate("point-independence", params, certs.FAIL, wit, seed)
    return certs.Certificate("point-independence", params, certs.PASS, None, seed)


def lagrangian_check(
    ctx: KZContext,
    trials: int,
    seed: str,
    plus: QFamily | None = None,
    minus: QFamily | None = None,
) -> certs.Certificate:
    """Pointwise Lagrangian property of the two family spans.

    At each sampled point: the Gram block between the families vanishes,
    each family is independent, and the sizes sum to n - 1.  Together
    with nondegeneracy of the form on the sum-zero space this witnesses
    that either span is exactly the annihilator of the other, i.e. the
    duality between one quotient bundle and the other subbundle.

    The certificate also records the joint rank of the two spans: it is
    n - 1 exactly when the form stays nondegenerate on the spans, which
    fails identically on cells with n = -1 mod p (one span then sits
    inside the other); that rank is reported as data, not as a verdict.
    """
    ctx.require_p_coprime("lagrangian property")
    ctx.require_rational_nonzero("lagrangian property")
    plus = plus or p_solutions(ctx, 1)
    minus = minus or p_solutions(ctx, -1)
    params = {"n": ctx.n, "p": ctx.p, "h": str(ctx.h), "trials": trials}
    if ctx.d_plus + ctx.d_minus != ctx.n - 1:
        return certs.Certificate("lagrangian", params, certs.FAIL, {"reason": "counting"}, seed)
    import random

    rng = random.Random(seed)
    joint_ranks = set()
    for t in range(trials):
        pt = sample_point(ctx.field, ctx.n, rng)
        vp = plus.evaluate(pt)
        vm = minus.evaluate(pt)
        for ell in plus.ells:
            for m in minus.ells:
                g = shapovalov(vp[ell], vm[m])
                if g:
                    wit = {"trial": t, "point": [str(c) for c in pt], "ell": ell, "m": m, "gram": str(g)}
                    return certs.Certificate("lagrangian", params, certs.FAIL, wit, seed)
        stacked = [vp[ell][: ctx.n - 1] for ell in plus.ells]
        stacked += [vm[m][: ctx.n - 1] for m in minus.ells]
        for rows, expected, side in (
            (stacked[: len(plus)], len(plus), "plus"),
            (stacked[len(plus) :], len(minus), "minus"),
        ):
            if rows and _rank(ctx, rows) != expected:
                wit = {"trial": t, "point": [str(c) for c in pt], "side": side}
                return certs.Certificate("lagrangian", params, certs.FAIL, wit, seed)
        if stacked:
            joint_ranks.add(_rank(ctx, stacked))
    wit = {"joint_ranks": sorted(joint_ranks), "full": ctx.n - 1} if joint_ranks else None
    return certs.Certificate("lagrangian", params, certs.PASS, wit, seed)


def _rank(ctx: KZContext, rows) -> int:
    if isinstance(ctx.field, PrimeField):
        mat = np.array([[v.value for v in row] for row in rows], dtype=np.int64)
        return linalg.rank_mod(mat, ctx.p)
    return linalg.mat_rank([list(r) for r in rows], ctx.field)


def derivative_identity_check(ctx: KZContext, j: int, family: QFamily | None = None) -> certs.Certificate:
    """Slices of the (p-1)-st x-derivative of P^h~/(x - z_j) against the
    family, via an independent binomial-product expansion.

    The derivative kills every x-power not congruent to p-1 and sends
    x^(l*p-1) slices to minus themselves; both facts are verified, the
    former arithmetically, the latter against the division-generated
    family.
    """
    ctx.require_rational_nonzero("derivative identity")
    family = family or p_solutions(ctx, 1)
    assert family.sign > 0, "derivative identity is stated for the +h family"
    n, p, ht = ctx.n, ctx.p, family.htilde_eff or ctx.h_tilde
    params = {"n": n, "p": p, "h": str(ctx.h), "j": j}
    # falling factorial weights c(c-1)...(c-p+2) mod p
    for c in range(p - 1, n * ht):
        w = 1
        for t in range(p - 1):
            w = w * (c - t) % p
        if c % p == p - 1:
            if w != p - 1:
                return certs.Certificate(
                    "derivative-identity", params, certs.FAIL, {"reason": "weight", "power": c}
                )
        elif w != 0:
            return certs.Certificate(
                "derivative-identity", params, certs.FAIL, {"reason": "weight", "power": c}
            )
    # product-route slices: per-axis binomial vectors, axis j uses h~-1
    vec_full = master_axis_vector(ht, p)
    vec_j = master_axis_vector(ht - 1, p) if ht > 1 else np.array([1], dtype=np.int64)
    for ell in family.ells:
        want = n * ht - 1 - (ell * p - 1)  # z-degree of the slice
        prod_slice = _rank_one_slice(n, j - 1, vec_full, vec_j, want, p)
        fam = family.boxes[ell][j - 1]
        if not _box_equal(prod_slice, fam, p, ht):
            return certs.Certificate(
                "derivative-identity", params, certs.FAIL, {"reason": "slice", "ell": ell}
            )
    return certs.Certificate("derivative-identity", params, certs.PASS)


def derivative_sum_check(ctx: KZContext) -> certs.Certificate:
    """Sum over components of the derivative-identity left sides is zero."""
    ctx.require_rational_nonzero("derivative identity")
    n, p, ht = ctx.n, ctx.p, ctx.h_tilde
    params = {"n": n, "p": p, "h": str(ctx.h)}
    vec_full = master_axis_vector(ht, p)
    vec_j = master_axis_vector(ht - 1, p) if ht > 1 else np.array([1], dtype=np.int64)
    for ell in range(1, ctx.d_plus + 1):
        want = n * ht - 1 - (ell * p - 1)
        total = None
        for j in range(n):
            sl = _rank_one_slice(n, j, vec_full, vec_j, want, p).dense((ht + 1,) * n)
            total = sl if total is None else total + sl
        if total is not None and (total % p).any():
            return certs.Certificate("derivative-sum", params, certs.FAIL, {"ell": ell})
    return certs.Certificate("derivative-sum", params, certs.PASS)


def _rank_one_slice(n: int, jaxis: int, vec_full, vec_j, degree: int, p: int) -> BoxPoly:
    """Graded slice of the separable box prod_i v_i(z_i) at total degree d."""
    shape = tuple(len(vec_j) if i == jaxis else len(vec_full) for i in range(n))
    D = np.array(1, dtype=np.int64)
    for i in range(n):
        v = vec_j if i == jaxis else vec_full
        D = np.multiply.outer(D, v) % p
    D = D.reshape(shape)
    deg = np.zeros((), dtype=np.int16)
    for i in range(n):
        deg = np.add.outer(deg, np.arange(shape[i], dtype=np.int16))
    mask = deg == degree
    out = np.where(mask, D, 0)
    return BoxPoly.from_dense(out, p)


def _box_equal(a: BoxPoly, b: BoxPoly, p: int, htilde: int) -> bool:
    shape = tuple(max(x, y) for x, y in zip(a.shape, b.shape))
    return not ((a.dense(shape) - b.dense(shape)) % p).any()


def _family_params(ctx: KZContext, family: QFamily) -> dict:
    return {
        "n": ctx.n,
        "p": ctx.p,
        "h": str(ctx.h),
        "sign": family.sign,
        "count": len(family),
    }


# -- symbolic cross-route for small parameters ------------------------------


def q_expansion_series(ctx: KZContext, j: int) -> XSeries:
    """P^h~ / (x - z_j) as an XSeries by literal factor multiplication.

    Independent oracle for the synthetic-division family; exponential in
    n*h~, so only for small parameters (tests and spot checks).
    """
    ht = _effective_lift(ctx, 1)
    n, field = ctx.n, ctx.field
    one = ZPolynomial.constant(n, field, field.one)
    series = XSeries([one])
    for s in range(1, n + 1):
        power = ht - 1 if s == j else ht
        factor = XSeries([-ZPolynomial.variable(s, n, field), one])
        for _ in range(power):
            series = series * factor
    return series
