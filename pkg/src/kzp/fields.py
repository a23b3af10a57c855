"""Exact arithmetic in F_p and F_{p^k}.

Prime-field elements are residues; extension elements are coefficient
tuples over F_p reduced modulo a fixed monic irreducible.  Everything is
immutable and hashable, so values can be shared freely between workers.

The module also carries a small univariate-polynomial toolkit over an
arbitrary field (coefficient lists, low degree first): gcd, powmod,
irreducibility, factorization into irreducibles and root finding.  It is
used for extension construction, splitting-field work and critical-locus
computations; it is not meant for large degrees.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .errors import FieldMismatch, NotPrime, ZeroInverse


def is_prime(n: int) -> bool:
    """Trial division; fine for the word-sized moduli this library allows."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class FieldElement:
    """An element of a :class:`PrimeField` or :class:`ExtField`.

    `value` is an int residue in the prime case and a length-k tuple of
    int residues (low degree first) in the extension case.
    """

    __slots__ = ("field", "value")

    def __init__(self, field, value):
        self.field = field
        self.value = value

    # -- ring structure ------------------------------------------------

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is self.field or other.field == self.field:
                return other
            # allow mixing F_p constants into an extension of F_p
            lifted = self.field.lift(other) if hasattr(self.field, "lift") else None
            if lifted is not None:
                return lifted
            raise FieldMismatch(f"{self.field} vs {other.field}")
        if isinstance(other, int):
            return self.field.elem(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.field._add(self, o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.field._add(self, -o)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.field._neg(self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.field._mul(self, o)

    __rmul__ = __mul__

    def inv(self) -> "FieldElement":
        """Multiplicative inverse; raises ZeroInverse on 0."""
        return self.field._inv(self)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        r, b = self.field.one, self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    # -- comparisons and hashing ----------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.elem(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.field != self.field:
            o = self._coerce(other)
            if o is NotImplemented:
                return False
            other = o
        return self.value == other.value

    def __hash__(self):
        return hash((id(self.field), self.value))

    def __bool__(self):
        if isinstance(self.value, tuple):
            return any(self.value)
        return self.value != 0

    def __repr__(self):
        return f"FieldElement({self}, {self.field})"

    def __str__(self):
        return self.field.elem_str(self)


class PrimeField:
    """The field F_p for a word-sized prime p."""

    def __init__(self, p: int):
        if p >= 1 << 31:
            raise NotPrime(f"modulus {p} exceeds the word-size bound 2^31")
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        self.p = p
        self.char = p
        self.order = p
        self.degree = 1
        self.zero = FieldElement(self, 0)
        self.one = FieldElement(self, 1 % p)

    def elem(self, v: int) -> FieldElement:
        return FieldElement(self, v % self.p)

    def __call__(self, v: int) -> FieldElement:
        return self.elem(v)

    def _add(self, a, b):
        return FieldElement(self, (a.value + b.value) % self.p)

    def _neg(self, a):
        return FieldElement(self, (-a.value) % self.p)

    def _mul(self, a, b):
        return FieldElement(self, (a.value * b.value) % self.p)

    def _inv(self, a):
        if a.value == 0:
            raise ZeroInverse("0 has no inverse")
        return FieldElement(self, pow(a.value, -1, self.p))

    def frobenius(self, a: FieldElement) -> FieldElement:
        return a  # x^p = x on F_p

    def elements(self) -> Iterable[FieldElement]:
        return (FieldElement(self, v) for v in range(self.p))

    def random(self, rng) -> FieldElement:
        return FieldElement(self, rng.randrange(self.p))

    def elem_str(self, a: FieldElement) -> str:
        return str(a.value)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __repr__(self):
        return f"F_{self.p}"


class ExtField:
    """F_{p^k} presented as F_p[t] / (modulus), modulus monic irreducible.

    Elements are coefficient tuples of length k, low degree first.
    """

    def __init__(self, p: int, k: int, modulus: Sequence[int] | None = None):
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        self.base = PrimeField(p)
        self.p = p
        self.char = p
        self.k = k
        self.degree = k
        self.order = p**k
        if modulus is None:
            modulus = smallest_irreducible(p, k)
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree k")
        if not _is_irreducible_int(modulus, p):
            raise ValueError("modulus is reducible")
        self.modulus = modulus
        # t^k = -(low part of modulus)
        self._top = tuple((-c) % p for c in modulus[:k])
        self.zero = FieldElement(self, (0,) * k)
        one = [0] * k
        one[0] = 1 % p
        self.one = FieldElement(self, tuple(one))
        self.gen = FieldElement(self, tuple(1 if i == 1 else 0 for i in range(k))) if k > 1 else self.one

    def elem(self, v) -> FieldElement:
        if isinstance(v, int):
            out = [0] * self.k
            out[0] = v % self.p
            return FieldElement(self, tuple(out))
        vv = list(v)
        if len(vv) > self.k:
            vv = self._reduce(vv)
        vv += [0] * (self.k - len(vv))
        return FieldElement(self, tuple(c % self.p for c in vv))

    def __call__(self, v) -> FieldElement:
        return self.elem(v)

    def lift(self, a: FieldElement) -> FieldElement | None:
        """Lift an F_p element into this field, or None if not liftable."""
        if isinstance(a.field, PrimeField) and a.field.p == self.p:
            return self.elem(a.value)
        return None

    def _reduce(self, coeffs: list[int]) -> list[int]:
        p, k, top = self.p, self.k, self._top
        c = [x % p for x in coeffs]
        for i in range(len(c) - 1, k - 1, -1):
            v = c[i]
            if v:
                c[i] = 0
                for j, tj in enumerate(top):
                    if tj:
                        c[i - k + j] = (c[i - k + j] + v * tj) % p
        return c[:k]

    def _add(self, a, b):
        p = self.p
        return FieldElement(self, tuple((x + y) % p for x, y in zip(a.value, b.value)))

    def _neg(self, a):
        p = self.p
        return FieldElement(self, tuple((-x) % p for x in a.value))

    def _mul(self, a, b):
        k = self.k
        av, bv = a.value, b.value
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(av):
            if x:
                for j, y in enumerate(bv):
                    prod[i + j] += x * y
        return FieldElement(self, tuple(self._reduce(prod)))

    def _inv(self, a):
        if not any(a.value):
            raise ZeroInverse("0 has no inverse")
        # extended Euclid in F_p[t] against the modulus
        p = self.p
        r0, r1 = list(self.modulus), [c for c in a.value]
        s0, s1 = [0], [1]
        while _deg_int(r1) > 0:
            q, r = _divmod_int(r0, r1, p)
            r0, r1 = r1, r
            s0, s1 = s1, _sub_int(s0, _mul_int(q, s1, p), p)
        if _deg_int(r1) < 0:
            raise ZeroInverse("element not invertible")
        c = pow(r1[0], -1, p)
        out = [(c * x) % p for x in s1]
        return self.elem(out)

    def frobenius(self, a: FieldElement) -> FieldElement:
        return a**self.p

    def elements(self) -> Iterable[FieldElement]:
        for tup in itertools.product(range(self.p), repeat=self.k):
            yield FieldElement(self, tup)

    def random(self, rng) -> FieldElement:
        return FieldElement(self, tuple(rng.randrange(self.p) for _ in range(self.k)))

    def elem_str(self, a: FieldElement) -> str:
        parts = []
        for i, c in enumerate(a.value):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}t" if c != 1 else "t")
            else:
                parts.append(f"{c}t^{i}" if c != 1 else f"t^{i}")
        return "+".join(parts) if parts else "0"

    def __eq__(self, other):
        return (
            isinstance(other, ExtField)
            and other.p == self.p
            and other.k == self.k
            and other.modulus == self.modulus
        )

    def __hash__(self):
        return hash(("ExtField", self.p, self.modulus))

    def __repr__(self):
        return f"F_{self.p}^{self.k}"


# -- module-level operations required by the public surface -------------


def inv(a: FieldElement) -> FieldElement:
    """Multiplicative inverse of a; ZeroInverse when a = 0."""
    return a.inv()


def frobenius(a: FieldElement) -> FieldElement:
    """a^p, where p is the characteristic.  Fixes the prime subfield."""
    return a.field.frobenius(a)


def in_prime_subfield(a: FieldElement) -> bool:
    """True iff a is fixed by Frobenius, i.e. lies in F_p."""
    return frobenius(a) == a


def prime_residue(a: FieldElement) -> int:
    """The residue in [0, p) of an element of the prime subfield."""
    if isinstance(a.field, PrimeField):
        return a.value
    if not in_prime_subfield(a):
        raise ValueError("element lies outside the prime subfield")
    return a.value[0]


def int_representative(a: FieldElement) -> int:
    """The integer lift in [1, p-1] of a nonzero prime-subfield element."""
    r = prime_residue(a)
    if r == 0:
        raise ValueError("zero has no representative in [1, p-1]")
    return r


def build_extension(p: int, k: int) -> ExtField:
    """F_{p^k} with the canonical (scan-order smallest) monic irreducible.

    The scan orders monic degree-k polynomials by the integer
    sum(c_i * p^i) of their low coefficients, so the result is
    deterministic and certificates are reproducible.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return ExtField(p, k)


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Scan-order smallest monic irreducible of degree k over F_p."""
    for code in range(p**k):
        coeffs = []
        c = code
        for _ in range(k):
            coeffs.append(c % p)
            c //= p
        cand = tuple(coeffs) + (1,)
        if _is_irreducible_int(cand, p):
            return cand
    raise AssertionError("unreachable: irreducibles of every degree exist")


# -- int-coefficient helpers used before a field object exists ----------


def _deg_int(a: list[int]) -> int:
    d = len(a) - 1
    while d >= 0 and a[d] == 0:
        d -= 1
    return d


def _trim_int(a: list[int]) -> list[int]:
    return a[: _deg_int(a) + 1]


def _sub_int(a, b, p):
    n = max(len(a), len(b))
    return _trim_int([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def _mul_int(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim_int(out)


def _divmod_int(a, b, p):
    a = _trim_int(list(a))
    b = _trim_int(list(b))
    db = _deg_int(b)
    if db < 0:
        raise ZeroDivisionError("division by zero polynomial")
    binv = pow(b[db], -1, p)
    q = [0] * max(len(a) - db, 1)
    r = list(a)
    while _deg_int(r) >= db:
        dr = _deg_int(r)
        c = (r[dr] * binv) % p
        q[dr - db] = c
        for i in range(db + 1):
            r[dr - db + i] = (r[dr - db + i] - c * b[i]) % p
    return _trim_int(q), _trim_int(r)


def _powmod_int(base, e, mod, p):
    r = [1]
    b = _divmod_int(base, mod, p)[1]
    while e:
        if e & 1:
            r = _divmod_int(_mul_int(r, b, p), mod, p)[1]
        b = _divmod_int(_mul_int(b, b, p), mod, p)[1]
        e >>= 1
    return r


def _gcd_int(a, b, p):
    a, b = _trim_int(list(a)), _trim_int(list(b))
    while b:
        a, b = b, _divmod_int(a, b, p)[1]
    if a:
        c = pow(a[-1], -1, p)
        a = [(c * x) % p for x in a]
    return a


def _is_irreducible_int(f: Sequence[int], p: int) -> bool:
    """Rabin's test for a monic polynomial over F_p."""
    f = _trim_int(list(f))
    k = _deg_int(f)
    if k <= 0:
        return False
    if k == 1:
        return True
    x = [0, 1]
    # x^(p^k) == x mod f
    xq = x
    for _ in range(k):
        xq = _powmod_int(xq, p, f, p)
    if _sub_int(xq, x, p):
        return False
    for ell in {q for q in _prime_factors(k)}:
        xq = x
        for _ in range(k // ell):
            xq = _powmod_int(xq, p, f, p)
        g = _gcd_int(_sub_int(xq, x, p), f, p)
        if _deg_int(g) != 0:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- univariate polynomials over a field object -------------------------
#
# Representation: list of FieldElement, low degree first, no trailing zeros.


def fq_trim(a: list[FieldElement]) -> list[FieldElement]:
    d = len(a) - 1
    while d >= 0 and not a[d]:
        d -= 1
    return a[: d + 1]


def fq_deg(a: Sequence[FieldElement]) -> int:
    return len(a) - 1 if a else -1


def fq_add(a, b):
    field = (a or b)[0].field
    n = max(len(a), len(b))
    z = field.zero
    return fq_trim([(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n)])


def fq_neg(a):
    return [-x for x in a]


def fq_sub(a, b):
    return fq_add(a, fq_neg(b))


def fq_scale(a, c: FieldElement):
    if not c:
        return []
    return fq_trim([x * c for x in a])


def fq_mul(a, b):
    if not a or not b:
        return []
    field = a[0].field
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
    return fq_trim(out)


def fq_divmod(a, b):
    b = fq_trim(list(b))
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    field = b[0].field
    binv = b[-1].inv()
    q = [field.zero] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    db = len(b) - 1
    while len(fq_trim(r)) - 1 >= db:
        r = fq_trim(r)
        dr = len(r) - 1
        c = r[-1] * binv
        q[dr - db] = c
        for i in range(db + 1):
            r[dr - db + i] = r[dr - db + i] - c * b[i]
        r = r[:-1] + [field.zero]  # leading term killed exactly
        r = fq_trim(r)
    return fq_trim(q), fq_trim(r)


def fq_monic(a):
    a = fq_trim(list(a))
    if not a:
        return a
    return fq_scale(a, a[-1].inv())


def fq_gcd(a, b):
    a, b = fq_trim(list(a)), fq_trim(list(b))
    while b:
        a, b = b, fq_divmod(a, b)[1]
    return fq_monic(a)


def fq_powmod(base, e: int, mod):
    field = mod[0].field
    r = [field.one]
    b = fq_divmod(base, mod)[1]
    while e:
        if e & 1:
            r = fq_divmod(fq_mul(r, b), mod)[1]
        b = fq_divmod(fq_mul(b, b), mod)[1]
        e >>= 1
    return r


def fq_eval(a, x: FieldElement) -> FieldElement:
    acc = x.field.zero
    for c in reversed(a):
        acc = acc * x + c
    return acc


def fq_deriv(a):
    if len(a) <= 1:
        return []
    field = a[0].field
    return fq_trim([a[i] * field.elem(i) for i in range(1, len(a))])


def fq_from_ints(field, coeffs: Sequence[int]):
    return fq_trim([field.elem(c) for c in coeffs])


def fq_is_squarefree(a) -> bool:
    g = fq_gcd(a, fq_deriv(a))
    return fq_deg(g) == 0


def fq_factor(f, rng) -> list[tuple[list[FieldElement], int]]:
    """Factor a nonconstant polynomial into monic irreducibles.

    Returns (factor, multiplicity) pairs, sorted deterministically.
    Standard squarefree / distinct-degree / equal-degree chain; the rng
    only drives Cantor-Zassenhaus splits, so a seeded rng gives a
    reproducible run.
    """
    field = f[0].field
    f = fq_monic(f)
    work = [(f, 1)]
    sqfree: list[tuple[list[FieldElement], int]] = []
    # squarefree decomposition by repeated gcd with the derivative
    while work:
        g, mult = work.pop()
        if fq_deg(g) <= 0:
            continue
        d = fq_deriv(g)
        if not d:
            # g is a p-th power: g(x) = h(x^p)
            p = field.char
            h = [g[i] for i in range(0, len(g), p)]
            # over F_q every coefficient is a p-th power; take the root
            root = [c ** (field.order // p) for c in h] if isinstance(field, ExtField) else list(h)
            work.append((fq_trim(root), mult * p))
            continue
        c = fq_gcd(g, d)
        if fq_deg(c) == 0:
            sqfree.append((g, mult))
        else:
            w = fq_divmod(g, c)[0]
            sqfree.append((fq_monic(w), mult))
            work.append((c, mult))
    # merge duplicates created by the decomposition
    merged: dict[tuple, int] = {}
    parts: dict[tuple, list[FieldElement]] = {}
    for g, m in sqfree:
        for irr in _fq_factor_squarefree(g, rng):
            key = tuple(x.value for x in irr)
            cur = merged.get(key, 0)
            # multiplicity = how many times irr divides f
            merged[key] = cur
            parts[key] = irr
    for key, irr in parts.items():
        mult = 0
        rem = f
        while True:
            q, r = fq_divmod(rem, irr)
            if r:
                break
            mult += 1
            rem = q
        merged[key] = mult
    out = [(parts[k], m) for k, m in merged.items() if m > 0]
    out.sort(key=lambda fm: (fq_deg(fm[0]), tuple(x.value for x in fm[0])))
    return out


def _fq_factor_squarefree(f, rng) -> list[list[FieldElement]]:
    """Irreducible factors of a squarefree monic polynomial."""
    field = f[0].field
    q = field.order
    out = []
    x = [field.zero, field.one]
    rest = f
    d = 0
    xq = x
    while fq_deg(rest) > 0:
        d += 1
        if 2 * d > fq_deg(rest):
            out.append(rest)
            break
        xq = fq_powmod(xq, q, rest)
        g = fq_gcd(fq_sub(xq, x), rest)
        if fq_deg(g) > 0:
            out.extend(_fq_split_equal_degree(g, d, rng))
            rest = fq_divmod(rest, g)[0]
            xq = fq_divmod(xq, rest)[1] if fq_deg(rest) > 0 else xq
    return out


def _fq_split_equal_degree(f, d: int, rng) -> list[list[FieldElement]]:
    """Cantor-Zassenhaus split of a product of degree-d irreducibles."""
    field = f[0].field
    if fq_deg(f) == d:
        return [fq_monic(f)]
    q = field.order
    assert q % 2 == 1, "equal-degree splitting implemented for odd q"
    e = (q**d - 1) // 2
    while True:
        r = fq_trim([field.random(rng) for _ in range(fq_deg(f))])
        if fq_deg(r) < 1:
            continue
        g = fq_gcd(r, f)
        if 0 < fq_deg(g) < fq_deg(f):
            pass
        else:
            h = fq_powmod(r, e, f)
            g = fq_gcd(fq_sub(h, [field.one]), f)
            if not (0 < fq_deg(g) < fq_deg(f)):
                continue
        left = _fq_split_equal_degree(g, d, rng)
        right = _fq_split_equal_degree(fq_divmod(f, g)[0], d, rng)
        return left + right


def fq_roots(f, rng) -> list[FieldElement]:
    """Roots of f in its coefficient field, with multiplicity, sorted."""
    out = []
    for irr, mult in fq_factor(f, rng):
        if fq_deg(irr) == 1:
            root = -irr[0]
            out.extend([root] * mult)
    out.sort(key=lambda x: x.value)
    return out
