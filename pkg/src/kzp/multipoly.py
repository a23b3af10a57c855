"""Sparse multivariate polynomials in z_1..z_n plus a distinguished variable.

ZPolynomial is an exponent-map polynomial over a field; XSeries layers a
dense list of coefficients (field elements or ZPolynomials) over one
distinguished variable and doubles as a truncated jet.  Terms are kept
in no particular order internally; the canonical graded-lex order is
applied on serialization and printing so equality and JSON output are
bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import (
    FieldMismatch,
    IndexOutOfRange,
    PointNotInS,
    PrecisionExceeded,
)
from .fields import FieldElement

# refuse master-polynomial expansions beyond this x-degree; the working
# grid is tiny and a larger request is almost surely a misconfiguration
MAX_MASTER_X_DEGREE = 20000


def grlex_key(e: tuple[int, ...]) -> tuple:
    return (sum(e), e)


class ZPolynomial:
    """Multivariate polynomial over a field, sparse exponent-map form."""

    __slots__ = ("n", "field", "terms")

    def __init__(self, n: int, field, terms: dict[tuple[int, ...], FieldElement] | None = None):
        self.n = n
        self.field = field
        self.terms = {e: c for e, c in (terms or {}).items() if c}

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, n: int, field) -> "ZPolynomial":
        return cls(n, field, {})

    @classmethod
    def constant(cls, n: int, field, c) -> "ZPolynomial":
        if isinstance(c, int):
            c = field.elem(c)
        return cls(n, field, {(0,) * n: c})

    @classmethod
    def variable(cls, i: int, n: int, field) -> "ZPolynomial":
        """The variable z_i (1-based i)."""
        if not 1 <= i <= n:
            raise IndexOutOfRange(f"variable index {i} outside 1..{n}")
        e = tuple(1 if j == i - 1 else 0 for j in range(n))
        return cls(n, field, {e: field.one})

    # -- ring operations --------------------------------------------------

    def _check(self, other: "ZPolynomial"):
        if self.n != other.n or self.field != other.field:
            raise FieldMismatch("operands disagree in variable count or field")

    def __add__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = ZPolynomial.constant(self.n, self.field, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            s = c if s is None else s + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return ZPolynomial(self.n, self.field, out)

    __radd__ = __add__

    def __neg__(self):
        return ZPolynomial(self.n, self.field, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, FieldElement)):
            other = ZPolynomial.constant(self.n, self.field, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            other = self.field.elem(other)
        if isinstance(other, FieldElement):
            return ZPolynomial(self.n, self.field, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        out: dict[tuple[int, ...], FieldElement] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                c = c1 * c2
                if not c:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e)
                s = c if s is None else s + c
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return ZPolynomial(self.n, self.field, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        r = ZPolynomial.constant(self.n, self.field, self.field.one)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    # -- calculus and evaluation -------------------------------------------

    def partial(self, i: int) -> "ZPolynomial":
        """Formal partial derivative in z_i (1-based); char-p rule applies."""
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(f"variable index {i} outside 1..{self.n}")
        out: dict[tuple[int, ...], FieldElement] = {}
        for e, c in self.terms.items():
            k = e[i - 1]
            if k == 0:
                continue
            w = c * self.field.elem(k)
            if not w:
                continue  # exponent divisible by the characteristic
            ne = e[: i - 1] + (k - 1,) + e[i:]
            s = out.get(ne)
            s = w if s is None else s + w
            if s:
                out[ne] = s
            else:
                out.pop(ne, None)
        return ZPolynomial(self.n, self.field, out)

    def evaluate(self, point: Sequence[FieldElement]) -> FieldElement:
        if len(point) != self.n:
            raise FieldMismatch("point arity differs from variable count")
        acc = self.field.zero
        for e, c in self.terms.items():
            t = c
            for b, k in zip(point, e):
                if k:
                    t = t * b**k
            acc = acc + t
        return acc

    # -- inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(f"variable index {i} outside 1..{self.n}")
        return max((e[i - 1] for e in self.terms), default=-1)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if not degs:
            return True
        if d is None:
            return len(degs) == 1
        return degs == {d}

    def sorted_terms(self) -> list[tuple[tuple[int, ...], FieldElement]]:
        return sorted(self.terms.items(), key=lambda ec: grlex_key(ec[0]))

    def __eq__(self, other):
        if not isinstance(other, ZPolynomial):
            return NotImplemented
        return self.n == other.n and self.field == other.field and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted((e, c.value) for e, c in self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for e, c in self.sorted_terms():
            mono = "*".join(f"z{i+1}^{k}" if k > 1 else f"z{i+1}" for i, k in enumerate(e) if k)
            bits.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(bits)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"e": list(e), "c": str(c)} for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json_dict(cls, d: dict, field) -> "ZPolynomial":
        terms = {}
        for t in d["terms"]:
            terms[tuple(t["e"])] = parse_field_string(field, t["c"])
        return cls(d["n"], field, terms)


def parse_field_string(field, s: str) -> FieldElement:
    """Inverse of the canonical element string ('7', '4+4t', '2t^3')."""
    s = s.strip()
    if "t" not in s:
        return field.elem(int(s))
    coeffs: dict[int, int] = {}
    for part in s.split("+"):
        part = part.strip()
        if "t" not in part:
            coeffs[0] = int(part)
        else:
            head, _, tail = part.partition("t")
            c = int(head) if head else 1
            k = int(tail[1:]) if tail.startswith("^") else 1
            coeffs[k] = c
    vec = [coeffs.get(i, 0) for i in range(max(coeffs) + 1)]
    return field.elem(vec)


def pmul(f: ZPolynomial, g: ZPolynomial) -> ZPolynomial:
    """Exact product; FieldMismatch if the operands disagree."""
    return f * g


def partial(f: ZPolynomial, i: int) -> ZPolynomial:
    """Formal partial derivative in z_i, 1 <= i <= n."""
    return f.partial(i)


class XSeries:
    """Dense univariate layer over the distinguished variable.

    coeffs[i] is the coefficient of x^i; entries are ZPolynomials or
    FieldElements but not mixed.  With `precision` set the series is a
    truncated jet: no coefficient at index >= precision is stored.
    Without it, trailing zeros are trimmed.
    """

    __slots__ = ("coeffs", "precision")

    def __init__(self, coeffs: Sequence, precision: int | None = None):
        coeffs = list(coeffs)
        if precision is not None:
            if len(coeffs) > precision:
                coeffs = coeffs[:precision]
        else:
            while coeffs and _is_zero_entry(coeffs[-1]):
                coeffs.pop()
        self.coeffs = coeffs
        self.precision = precision

    def coefficient(self, i: int):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return None

    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d >= 0 and _is_zero_entry(self.coeffs[d]):
            d -= 1
        return d

    def __add__(self, other: "XSeries") -> "XSeries":
        prec = _merge_precision(self.precision, other.precision)
        n = max(len(self.coeffs), len(other.coeffs))
        out = []
        for i in range(n):
            a = self.coefficient(i)
            b = other.coefficient(i)
            if a is None:
                out.append(b)
            elif b is None:
                out.append(a)
            else:
                out.append(a + b)
        return XSeries(out, prec)

    def __neg__(self):
        return XSeries([-c for c in self.coeffs], self.precision)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "XSeries") -> "XSeries":
        prec = _merge_precision(self.precision, other.precision)
        if not self.coeffs or not other.coeffs:
            return XSeries([], prec)
        top = len(self.coeffs) + len(other.coeffs) - 1
        if prec is not None:
            top = min(top, prec)
        out = [None] * top
        for i, a in enumerate(self.coeffs):
            if _is_zero_entry(a):
                continue
            for j, b in enumerate(other.coeffs):
                if i + j >= top:
                    break
                t = a * b
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        zero = _zero_like(self.coeffs[0])
        out = [zero if c is None else c for c in out]
        return XSeries(out, prec)

    def dx(self) -> "XSeries":
        """Derivative in the distinguished variable (char-p rule)."""
        if len(self.coeffs) <= 1:
            return XSeries([], self.precision)
        out = []
        for i in range(1, len(self.coeffs)):
            out.append(_int_scale(self.coeffs[i], i))
        return XSeries(out, self.precision)

    def is_zero(self) -> bool:
        return all(_is_zero_entry(c) for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, XSeries):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        for i in range(n):
            a, b = self.coefficient(i), other.coefficient(i)
            if a is None and b is None:
                continue
            if a is None:
                if not _is_zero_entry(b):
                    return False
            elif b is None:
                if not _is_zero_entry(a):
                    return False
            elif a != b:
                return False
        return True

    def __repr__(self):
        return f"XSeries({self.coeffs!r}, precision={self.precision})"


def _is_zero_entry(c) -> bool:
    if isinstance(c, ZPolynomial):
        return c.is_zero()
    return not c


def _zero_like(c):
    if isinstance(c, ZPolynomial):
        return ZPolynomial.zero(c.n, c.field)
    return c.field.zero


def _int_scale(c, k: int):
    if isinstance(c, ZPolynomial):
        return c * c.field.elem(k)
    return c * c.field.elem(k)


def _merge_precision(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def xpow_master(ctx) -> XSeries:
    """The master polynomial power prod_s (x - z_s)^h~ as an XSeries.

    Exact degree n*h~ in x, ZPolynomial coefficients, leading coefficient
    one.  `ctx` only needs attributes n, field, h_tilde.
    """
    n, field, ht = ctx.n, ctx.field, ctx.h_tilde
    if ht is None or ht < 1:
        raise ValueError("master power needs an integer lift h~ >= 1")
    if n * ht > MAX_MASTER_X_DEGREE:
        raise ValueError(f"x-degree {n * ht} exceeds guard {MAX_MASTER_X_DEGREE}")
    one = ZPolynomial.constant(n, field, field.one)
    series = XSeries([one])
    for s in range(1, n + 1):
        factor = XSeries([-ZPolynomial.variable(s, n, field), one])
        for _ in range(ht):
            series = series * factor
    return series


def jet_compose(series: XSeries, mult: XSeries, iterations: int) -> XSeries:
    """Apply (d/dt + mult(t)*) the given number of times within truncation.

    `series` must be a truncated jet with precision >= iterations, since
    every derivative loses one order of certainty.
    """
    if series.precision is None or series.precision < iterations:
        raise PrecisionExceeded(
            f"need precision >= {iterations}, have {series.precision}"
        )
    cur = series
    for _ in range(iterations):
        cur = cur.dx() + (mult * cur)
        cur = XSeries(cur.coeffs, series.precision)
    return cur


@dataclass(frozen=True)
class EvalPoint:
    """A point of S: coordinates pairwise distinct."""

    coords: tuple[FieldElement, ...]

    def __post_init__(self):
        n = len(self.coords)
        for i in range(n):
            for j in range(i + 1, n):
                if self.coords[i] == self.coords[j]:
                    raise PointNotInS(f"coordinates {i + 1} and {j + 1} coincide")

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


def sample_point(
    field, n: int, rng, predicate: Callable | None = None, max_tries: int = 50_000
) -> EvalPoint:
    """Seeded rejection sampling of a point of S (pairwise distinct coords).

    An optional predicate restricts to a subset; if no point satisfies
    it within max_tries the sampler raises, so callers can distinguish
    empty loci from unlucky seeds.
    """
    if field.order < n:
        raise PointNotInS(f"field too small for {n} distinct coordinates")
    for _ in range(max_tries):
        coords = tuple(field.random(rng) for _ in range(n))
        vals = {c.value for c in coords}
        if len(vals) != n:
            continue
        pt = EvalPoint(coords)
        if predicate is None or predicate(pt):
            return pt
    raise PointNotInS(f"no admissible point found in {max_tries} samples")


def restrict_to_line(f: ZPolynomial, point: EvalPoint, k: int) -> list[FieldElement]:
    """Coefficients of t -> f(a + t e_k), low degree first (1-based k)."""
    field = f.field
    out = [field.zero] * (f.degree_in(k) + 1 if f.terms else 1)
    for e, c in f.terms.items():
        t = c
        for s, ks in enumerate(e):
            if s != k - 1 and ks:
                t = t * point[s] ** ks
        # (a_k + t)^m contributes binomially
        m = e[k - 1]
        b = field.one
        binom = 1
        for j in range(m + 1):
            coeff = t * field.elem(binom) * point[k - 1] ** (m - j)
            out[j] = out[j] + coeff
            binom = binom * (m - j) // (j + 1)
    while len(out) > 1 and not out[-1]:
        out.pop()
    return out
