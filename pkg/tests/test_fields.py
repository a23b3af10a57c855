import pytest
from hypothesis import given, settings, strategies as st

from kzp.errors import NotPrime, ZeroInverse
from kzp.fields import (
    ExtField,
    PrimeField,
    build_extension,
    fq_deg,
    fq_deriv,
    fq_eval,
    fq_factor,
    fq_from_ints,
    fq_mul,
    fq_roots,
    frobenius,
    in_prime_subfield,
    int_representative,
    inv,
    is_prime,
    smallest_irreducible,
)

F5 = PrimeField(5)
F7 = PrimeField(7)
F25 = ExtField(5, 2, modulus=(1, 1, 1))  # t^2 + t + 1, the explicit-modulus form


def test_inv_prime_examples():
    assert inv(F7(3)) == F7(5)  # 3*5 = 15 = 1 mod 7
    assert inv(F7(1)) == F7(1)
    with pytest.raises(ZeroInverse):
        inv(F7(0))


def test_inv_extension_derived():
    t = F25.gen
    got = inv(t)
    # oracle: multiply out and reduce by t^2 + t + 1
    assert t * got == F25.one
    assert got == F25((4, 4))


def test_frobenius_fixes_prime_field():
    assert frobenius(F7(4)) == F7(4)
    assert frobenius(F7(0)) == F7(0)


def test_frobenius_extension_derived():
    t = F25.gen
    # oracle: plain repeated multiplication
    expected = F25.one
    for _ in range(5):
        expected = expected * t
    assert frobenius(t) == expected
    assert not in_prime_subfield(t)
    assert in_prime_subfield(F25.elem(3))


def test_build_extension_degree_one():
    f = build_extension(5, 1)
    assert f.modulus == (0, 1)
    assert f.order == 5


def test_build_extension_smallest_modulus_by_scan():
    # oracle: exhaustive scan of all 25 monic quadratics for roots
    def has_root(c0, c1):
        return any((x * x + c1 * x + c0) % 5 == 0 for x in range(5))

    expected = None
    for code in range(25):
        c0, c1 = code % 5, code // 5
        if not has_root(c0, c1):
            expected = (c0, c1, 1)
            break
    f = build_extension(5, 2)
    assert f.modulus == expected


def test_build_extension_rejects_composite():
    with pytest.raises(NotPrime):
        build_extension(4, 2)


@pytest.mark.parametrize("p,k", [(5, 2), (5, 3), (7, 2), (13, 2), (3, 4)])
def test_smallest_irreducible_is_irreducible(p, k):
    mod = smallest_irreducible(p, k)
    f = ExtField(p, k, modulus=mod)  # constructor re-checks irreducibility
    assert f.order == p**k


@pytest.mark.parametrize("field", [F7, F25, build_extension(3, 3)])
def test_lagrange_order(field):
    q = field.order
    import random

    rng = random.Random(0)
    for _ in range(10):
        a = field.random(rng)
        if a:
            assert a ** (q - 1) == field.one


@given(st.integers(0, 24), st.integers(0, 24))
@settings(max_examples=40, deadline=None)
def test_frobenius_is_field_automorphism(i, j):
    a = F25.elem((i % 5, i // 5))
    b = F25.elem((j % 5, j // 5))
    assert frobenius(a + b) == frobenius(a) + frobenius(b)
    assert frobenius(a * b) == frobenius(a) * frobenius(b)


def test_int_representative():
    assert int_representative(F7(3)) == 3
    assert int_representative(F25.elem(4)) == 4
    with pytest.raises(ValueError):
        int_representative(F7(0))
    with pytest.raises(ValueError):
        int_representative(F25.gen)


def test_is_prime_small():
    assert [n for n in range(2, 20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_factor_and_roots_roundtrip():
    import random

    rng = random.Random(7)
    for field in (F7, F25):
        for _ in range(8):
            coeffs = [field.random(rng) for _ in range(5)] + [field.one]
            f = fq_from_ints(field, [0]) if not any(coeffs[:-1]) else coeffs
            f = coeffs
            factors = fq_factor(f, rng)
            prod = [field.one]
            for g, m in factors:
                for _ in range(m):
                    prod = fq_mul(prod, g)
            # compare up to the leading unit
            lead = f[-1] * prod[-1].inv()
            assert [lead * c for c in prod] == list(f)
            for r in fq_roots(f, rng):
                assert not fq_eval(f, r)


def test_roots_with_multiplicity():
    import random

    rng = random.Random(1)
    x = [F7.zero, F7.one]
    # (x - 2)^2 (x - 3)
    f = fq_mul(fq_mul([-F7(2), F7.one], [-F7(2), F7.one]), [-F7(3), F7.one])
    roots = fq_roots(f, rng)
    assert sorted(r.value for r in roots) == [2, 2, 3]


def test_derivative_rule():
    f = fq_from_ints(F5, [1, 0, 0, 0, 0, 2])  # 1 + 2x^5: derivative dies mod 5
    assert fq_deg(fq_deriv(f)) == -1
