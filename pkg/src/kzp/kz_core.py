"""The KZ connection data: contexts, Hamiltonians, flatness verification.

The system is d_i I + h H_i(z) I = 0 with sum(I_j) = 0, where
H_i(z) = sum_{j != i} Omega_ij / (z_i - z_j).  Denominators are never
stored: every identity is cleared by the product D_i = prod_{j != i}
(z_i - z_j), so all arithmetic stays inside polynomial rings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import certs
from .errors import (
    IndexOutOfRange,
    LengthMismatch,
    PDividesN,
    RationalH,
)
from .fields import (
    FieldElement,
    in_prime_subfield,
    prime_residue,
)
from .multipoly import ZPolynomial


class KZContext:
    """Bundle of (n, field, h) with the derived solution counts.

    h_tilde is the integer lift of h in [1, p-1] when h is a nonzero
    element of the prime subfield, else None.  d_plus/d_minus are the
    sizes of the two p-hypergeometric families.
    """

    def __init__(self, n: int, field, h: FieldElement):
        if n < 2:
            raise ValueError("need at least two points")
        if isinstance(h, int):
            h = field.elem(h)
        if h.field != field:
            lifted = field.lift(h) if hasattr(field, "lift") else None
            if lifted is None:
                raise RationalH("h must live in the context field")
            h = lifted
        self.n = n
        self.field = field
        self.h = h
        self.p = field.char
        self.h_rational = in_prime_subfield(h)
        if self.h_rational and bool(h):
            self.h_tilde: int | None = prime_residue(h)
        else:
            self.h_tilde = None

    @property
    def p_divides_n(self) -> bool:
        return self.n % self.p == 0

    @property
    def d_plus(self) -> int:
        """Number of p-hypergeometric solutions for parameter +h."""
        if self.h_tilde is None:
            return 0
        return (self.n * self.h_tilde) // self.p

    @property
    def d_minus(self) -> int:
        """Number of p-hypergeometric solutions for parameter -h."""
        if self.h_tilde is None:
            return 0
        return (self.n * (self.p - self.h_tilde)) // self.p

    def negate(self) -> "KZContext":
        return KZContext(self.n, self.field, -self.h)

    def require_p_coprime(self, what: str = "operation"):
        if self.p_divides_n:
            raise PDividesN(f"{what} assumes p does not divide n (p={self.p}, n={self.n})")

    def require_rational_nonzero(self, what: str = "operation"):
        if not self.h_rational or self.h_tilde is None:
            raise RationalH(f"{what} needs h in the prime field, nonzero")

    def __repr__(self):
        return f"KZContext(n={self.n}, p={self.p}, h={self.h})"


@dataclass(frozen=True)
class SolutionVector:
    """An n-vector of polynomials (or field scalars after evaluation)."""

    components: tuple

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def component_sum(self):
        acc = self.components[0]
        for c in self.components[1:]:
            acc = acc + c
        return acc

    def in_v(self) -> bool:
        s = self.component_sum()
        return s.is_zero() if isinstance(s, ZPolynomial) else not s


def omega(i: int, j: int, n: int, field) -> list[list[FieldElement]]:
    """The elementary interaction matrix: -1 at (i,i),(j,j), +1 at (i,j),(j,i).

    Indices are 1-based.  Rows and columns sum to zero, so the sum-zero
    subspace is preserved.
    """
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexOutOfRange(f"indices ({i},{j}) outside 1..{n}")
    if i == j:
        raise IndexError("interaction matrix needs two distinct indices")
    z, o = field.zero, field.one
    m = [[z] * n for _ in range(n)]
    m[i - 1][i - 1] = -o
    m[j - 1][j - 1] = -o
    m[i - 1][j - 1] = o
    m[j - 1][i - 1] = o
    return m


@dataclass(frozen=True)
class GaudinMatrix:
    """Cleared Hamiltonian in direction k: entries of D_k * H_k(z).

    The true Hamiltonian divides these polynomial entries by the
    implicit denominator D_k = prod_{j != k} (z_k - z_j).
    """

    k: int
    entries: tuple


def _binomial(ctx: KZContext, a: int, b: int) -> ZPolynomial:
    """z_a - z_b as a ZPolynomial (1-based indices)."""
    return ZPolynomial.variable(a, ctx.n, ctx.field) - ZPolynomial.variable(b, ctx.n, ctx.field)


def _cleared_product(ctx: KZContext, k: int, skip: set[int]) -> ZPolynomial:
    """prod over i not in skip, i != k of (z_k - z_i)."""
    acc = ZPolynomial.constant(ctx.n, ctx.field, ctx.field.one)
    for i in range(1, ctx.n + 1):
        if i == k or i in skip:
            continue
        acc = acc * _binomial(ctx, k, i)
    return acc


def gaudin_cleared(ctx: KZContext, k: int) -> GaudinMatrix:
    """D_k * H_k(z) as an n x n matrix of polynomials (1-based k)."""
    if not 1 <= k <= ctx.n:
        raise IndexOutOfRange(f"direction {k} outside 1..{ctx.n}")
    n, field = ctx.n, ctx.field
    zero = ZPolynomial.zero(n, field)
    rows = [[zero] * n for _ in range(n)]
    for j in range(1, n + 1):
        if j == k:
            continue
        e = _cleared_product(ctx, k, {j})
        # Omega_kj rows: slot k gets (v_j - v_k), slot j the opposite
        rows[k - 1][j - 1] = rows[k - 1][j - 1] + e
        rows[k - 1][k - 1] = rows[k - 1][k - 1] - e
        rows[j - 1][k - 1] = rows[j - 1][k - 1] + e
        rows[j - 1][j - 1] = rows[j - 1][j - 1] - e
    return GaudinMatrix(k, tuple(tuple(r) for r in rows))


def gaudin_apply_at_point(ctx: KZContext, k: int, point, v: Sequence[FieldElement]):
    """H_k(a) v for an evaluated vector v (exact, denominators inverted)."""
    n, field = ctx.n, ctx.field
    out = [field.zero] * n
    ak = point[k - 1]
    for j in range(1, n + 1):
        if j == k:
            continue
        c = (ak - point[j - 1]).inv()
        d = (v[j - 1] - v[k - 1]) * c
        out[k - 1] = out[k - 1] + d
        out[j - 1] = out[j - 1] - d
    return out


def shapovalov(x: Sequence, y: Sequence):
    """The bilinear form sum_i x_i y_i."""
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)}")
    acc = x[0] * y[0]
    for a, b in zip(x[1:], y[1:]):
        acc = acc + a * b
    return acc


def nabla_apply(ctx: KZContext, k: int, I: Sequence[ZPolynomial]) -> list[ZPolynomial]:
    """Denominator-cleared connection: D_k (d_k I + h H_k I), 1-based k.

    Exact polynomial output; no rational functions are formed at any
    point.
    """
    if not 1 <= k <= ctx.n:
        raise IndexOutOfRange(f"direction {k} outside 1..{ctx.n}")
    n, field, h = ctx.n, ctx.field, ctx.h
    dk = _cleared_product(ctx, k, set())
    out = [dk * comp.partial(k) for comp in I]
    for j in range(1, n + 1):
        if j == k:
            continue
        e = _cleared_product(ctx, k, {j}) * h
        d = (I[j - 1] - I[k - 1]) * e
        out[k - 1] = out[k - 1] + d
        out[j - 1] = out[j - 1] - d
    return out


def flatness_check(ctx: KZContext, I: Sequence[ZPolynomial], name: str = "flatness") -> certs.Certificate:
    """Certificate that I solves the system: cleared identities vanish and
    the component sum is the zero polynomial.  Failure is an outcome,
    not an error."""
    params = {"n": ctx.n, "p": ctx.p, "h": str(ctx.h)}
    total = I[0]
    for comp in I[1:]:
        total = total + comp
    if not total.is_zero():
        wit = {"reason": "component-sum", "monomial": list(total.sorted_terms()[0][0])}
        return certs.Certificate(name, params, certs.FAIL, wit)
    for k in range(1, ctx.n + 1):
        res = nabla_apply(ctx, k, I)
        for j, r in enumerate(res):
            if not r.is_zero():
                e, c = r.sorted_terms()[0]
                wit = {
                    "reason": "flatness",
                    "direction": k,
                    "component": j + 1,
                    "monomial": list(e),
                    "value": str(c),
                }
                return certs.Certificate(name, params, certs.FAIL, wit)
    return certs.Certificate(name, params, certs.PASS)


def duality_identity_holds(ctx: KZContext, i: int, x: Sequence[ZPolynomial], y: Sequence[ZPolynomial]) -> bool:
    """Exact cleared form of the pairing derivative identity:

    D_i d_i (x, y) = (D_i nabla_i^{h} x, y) + (x, D_i nabla_i^{-h} y).
    """
    lhs = _cleared_product(ctx, i, set()) * shapovalov(x, y).partial(i)
    rhs = shapovalov(nabla_apply(ctx, i, x), y) + shapovalov(x, nabla_apply(ctx.negate(), i, y))
    return (lhs - rhs).is_zero()
