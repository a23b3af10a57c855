"""Numpy kernels for prime-field polynomial work at grid scale.

Polynomials in n variables with per-variable degree bounds live in a
"box": an n-dimensional integer array of residues mod p, or its sparse
(exponents, values) form.  The coefficient arrays of the master-power
slices fill boxes of size (h~+1)^n, which at the top of the working grid
is a few million entries, so these paths are written against numpy
arrays rather than the dict polynomials in multipoly.

Exactness notes: all shift/scatter arithmetic is integer; the one FFT
path (orthogonality products) operates on lifted residues whose exact
convolution values stay far below 2^52, and the rounded result is
checked against a drift bound before reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .multipoly import ZPolynomial


@dataclass
class BoxPoly:
    """Sparse polynomial over F_p inside the box prod [0, shape_i)."""

    p: int
    shape: tuple[int, ...]
    exps: np.ndarray  # (terms, n) int16
    vals: np.ndarray  # (terms,) int64, residues in [1, p)

    @property
    def n(self) -> int:
        return len(self.shape)

    def total_degrees(self) -> np.ndarray:
        return self.exps.sum(axis=1)

    def is_zero(self) -> bool:
        return self.vals.size == 0

    def dense(self, shape: tuple[int, ...] | None = None) -> np.ndarray:
        shape = shape or self.shape
        out = np.zeros(shape, dtype=np.int64)
        if self.vals.size:
            out[tuple(self.exps[:, i] for i in range(self.n))] = self.vals
        return out

    def flat_indices(self, shape: tuple[int, ...]) -> np.ndarray:
        strides = _strides(shape)
        return (self.exps.astype(np.int64) * strides).sum(axis=1)

    def evaluate_int(self, coords: list[int]) -> int:
        """Evaluate at a point with integer coordinates, mod p."""
        if self.vals.size == 0:
            return 0
        acc = self.vals.copy()
        for i, a in enumerate(coords):
            pows = _power_table(a % self.p, self.shape[i], self.p)
            acc = (acc * pows[self.exps[:, i]]) % self.p
        return int(acc.sum() % self.p)

    def evaluate_ext2(self, coords: list[tuple[int, int]], alpha: int, beta: int) -> tuple[int, int]:
        """Evaluate at a point of F_{p^2} = F_p[t]/(t^2 - alpha t - beta)."""
        p = self.p
        if self.vals.size == 0:
            return (0, 0)
        acc0 = self.vals.copy()
        acc1 = np.zeros_like(acc0)
        for i, (a0, a1) in enumerate(coords):
            pows = np.zeros((self.shape[i], 2), dtype=np.int64)
            pows[0, 0] = 1
            for k in range(1, self.shape[i]):
                x0, x1 = int(pows[k - 1, 0]), int(pows[k - 1, 1])
                hi = x1 * a1 % p
                pows[k, 0] = (x0 * a0 + beta * hi) % p
                pows[k, 1] = (x0 * a1 + x1 * a0 + alpha * hi) % p
            b0 = pows[self.exps[:, i], 0]
            b1 = pows[self.exps[:, i], 1]
            hi = acc1 * b1 % p
            acc0, acc1 = (acc0 * b0 + beta * hi) % p, (acc0 * b1 + acc1 * b0 + alpha * hi) % p
        return (int(acc0.sum() % p), int(acc1.sum() % p))

    def to_zpoly(self, field) -> ZPolynomial:
        terms = {}
        for e, v in zip(self.exps.tolist(), self.vals.tolist()):
            terms[tuple(e)] = field.elem(int(v))
        return ZPolynomial(self.n, field, terms)

    @classmethod
    def from_zpoly(cls, f: ZPolynomial, p: int) -> "BoxPoly":
        if f.terms:
            exps = np.array(list(f.terms.keys()), dtype=np.int16)
            vals = np.array([c.value % p for c in f.terms.values()], dtype=np.int64)
            keep = vals % p != 0
            exps, vals = exps[keep], vals[keep] % p
            shape = tuple(int(m) + 1 for m in exps.max(axis=0)) if len(exps) else (1,) * f.n
        else:
            exps = np.zeros((0, f.n), dtype=np.int16)
            vals = np.zeros(0, dtype=np.int64)
            shape = (1,) * f.n
        return cls(p, shape, exps, vals)

    @classmethod
    def from_dense(cls, arr: np.ndarray, p: int) -> "BoxPoly":
        arr = arr % p
        nz = np.nonzero(arr)
        exps = np.stack(nz, axis=1).astype(np.int16) if nz[0].size else np.zeros((0, arr.ndim), dtype=np.int16)
        vals = arr[nz].astype(np.int64)
        return cls(p, arr.shape, exps, vals)


def _strides(shape: tuple[int, ...]) -> np.ndarray:
    st = np.ones(len(shape), dtype=np.int64)
    for i in range(len(shape) - 2, -1, -1):
        st[i] = st[i + 1] * shape[i + 1]
    return st


def _power_table(a: int, length: int, p: int) -> np.ndarray:
    out = np.ones(length, dtype=np.int64)
    for i in range(1, length):
        out[i] = (out[i - 1] * a) % p
    return out


def _shift(arr: np.ndarray, axis: int) -> np.ndarray:
    """Multiply by the variable of `axis`: shift up by one, dropping overflow."""
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[axis] = slice(0, arr.shape[axis] - 1)
    dst[axis] = slice(1, arr.shape[axis])
    out[tuple(dst)] = arr[tuple(src)]
    return out


def _partial(arr: np.ndarray, axis: int, p: int) -> np.ndarray:
    """Formal partial derivative along `axis` with the char-p rule."""
    k = arr.shape[axis]
    w = np.arange(k, dtype=np.int64) % p
    shape = [1] * arr.ndim
    shape[axis] = k
    weighted = arr * w.reshape(shape)
    out = np.zeros_like(arr)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[axis] = slice(1, k)
    dst[axis] = slice(0, k - 1)
    out[tuple(dst)] = weighted[tuple(src)]
    return out


# -- master power and its x-coefficient slices ----------------------------


def master_axis_vector(htilde: int, p: int) -> np.ndarray:
    """Coefficients of (x - z)^h~ along the z-axis: (-1)^k C(h~, k) mod p."""
    v = np.array([(-1) ** k * math.comb(htilde, k) for k in range(htilde + 1)], dtype=object)
    return (v % p).astype(np.int64)


def master_box_dense(n: int, htilde: int, p: int) -> np.ndarray:
    """z-coefficient box of prod_s (x - z_s)^h~.

    The x-exponent is implicit: a z-monomial of total degree d carries
    x^(n*h~ - d).  The box is the rank-one outer product of the per-axis
    binomial vectors.
    """
    v = master_axis_vector(htilde, p)
    out = v
    for _ in range(n - 1):
        out = np.multiply.outer(out, v) % p
    return out.reshape((htilde + 1,) * n)


def q_family_boxes(n: int, p: int, htilde: int, ells: list[int]) -> dict[int, list[BoxPoly]]:
    """Coefficient vectors of x^(l*p-1) in P^h~ / (x - z_j), all j, given l's.

    Exact synthetic division of the master power by (x - z_j): unrolling
    the top-down recurrence q_(i-1) = s_i + z_j q_i against the rank-one
    master box shows the x^c slice is the cumulative sum of the box
    along axis j restricted to total z-degree n*h~ - c - 1.  One cumsum
    per component recovers every requested slice.
    """
    out: dict[int, list[BoxPoly]] = {ell: [] for ell in ells}
    if not ells:
        return out
    D = master_box_dense(n, htilde, p)
    deg = np.zeros((), dtype=np.int16)
    for _ in range(n):
        deg = np.add.outer(deg, np.arange(htilde + 1, dtype=np.int16))
    for j in range(n):
        C = np.cumsum(D, axis=j, dtype=np.int64) % p
        for ell in ells:
            want = n * htilde - (ell * p - 1) - 1
            mask = deg == want
            sl = np.where(mask, C, 0)
            bp = BoxPoly.from_dense(sl, p)
            if bp.vals.size:
                assert int(bp.exps[:, j].max()) <= htilde - 1, "slice escapes its degree box"
            out[ell].append(bp)
    return out


# -- flatness of a family -------------------------------------------------


def flatness_family_residual(
    n: int, p: int, htilde: int, hbar: int, family: dict[int, list[BoxPoly]]
):
    """Check D_k (d_k Q + h H_k Q) = 0 for every family member and direction.

    Returns None on success, else a witness dict.  The cleared identity
    vanishes iff the component sum is the zero polynomial and, for every
    pair j != k, the bracket (z_k - z_j) d_k Q_j + h (Q_k - Q_j) does:
    the omitted factor prod_{i != k,j} (z_k - z_i) is a nonzero element
    of an integral domain, and the j = k row is minus the sum of the
    others once the component sum vanishes.
    """
    shape = (htilde + 1,) * n
    for ell, comps in family.items():
        total = np.zeros(shape, dtype=np.int64)
        for bp in comps:
            if bp.vals.size:
                np.add.at(total, tuple(bp.exps[:, i] for i in range(n)), bp.vals)
        if (total % p).any():
            idx = np.unravel_index(int(np.argmax((total % p) != 0)), shape)
            return {"reason": "component-sum", "ell": ell, "monomial": list(map(int, idx))}
        dense = [bp.dense(shape).astype(np.int32) for bp in comps]
        for k in range(n):
            for j in range(n):
                if j == k:
                    continue
                A = _partial(dense[j], k, p)
                T = (_shift(A, k) - _shift(A, j) + hbar * (dense[k] - dense[j])) % p
                if T.any():
                    idx = np.unravel_index(int(np.argmax(T != 0)), shape)
                    return {
                        "reason": "flatness",
                        "ell": ell,
                        "direction": k + 1,
                        "component": j + 1,
                        "monomial": list(map(int, idx)),
                        "value": int(T[idx]),
                    }
    return None


# -- orthogonality of the two families ------------------------------------

_FFT_DIRECT_LIMIT = 4_000_000  # pairwise products below this go without FFT


def shapovalov_product_box(
    plus: list[BoxPoly], minus: list[BoxPoly], p: int
) -> np.ndarray:
    """Dense box of sum_j Q+_j * Q-_j, reduced mod p (exact)."""
    n = plus[0].n
    tshape = tuple(
        max(a.shape[i] for a in plus) + max(b.shape[i] for b in minus) - 1 for i in range(n)
    )
    terms_plus = sum(a.vals.size for a in plus)
    terms_minus = sum(b.vals.size for b in minus)
    if terms_plus * terms_minus <= _FFT_DIRECT_LIMIT * n:
        strides = _strides(tshape)
        size = int(np.prod(tshape))
        acc = np.zeros(size, dtype=np.int64)
        for a, b in zip(plus, minus):
            if a.vals.size == 0 or b.vals.size == 0:
                continue
            ia = (a.exps.astype(np.int64) * strides).sum(axis=1)
            ib = (b.exps.astype(np.int64) * strides).sum(axis=1)
            idx = (ia[:, None] + ib[None, :]).ravel()
            w = (a.vals[:, None] * b.vals[None, :]).ravel() % p
            np.add.at(acc, idx, w)
        return (acc % p).reshape(tshape)
    # FFT path: lifted residues, exact after rounding
    spec = None
    for a, b in zip(plus, minus):
        fa = np.fft.rfftn(a.dense().astype(np.float64), s=tshape)
        fb = np.fft.rfftn(b.dense().astype(np.float64), s=tshape)
        spec = fa * fb if spec is None else spec + fa * fb
    conv = np.fft.irfftn(spec, s=tshape)
    rounded = np.rint(conv)
    drift = float(np.max(np.abs(conv - rounded))) if conv.size else 0.0
    assert drift < 1e-3, f"FFT convolution drift {drift} too large for exact rounding"
    assert float(np.max(np.abs(rounded))) < 2**52, "convolution overflows exact float range"
    return rounded.astype(np.int64) % p


def orthogonality_residual(plus: list[BoxPoly], minus: list[BoxPoly], p: int):
    """None if sum_j Q+_j Q-_j = 0 identically, else a witness monomial."""
    box = shapovalov_product_box(plus, minus, p)
    if box.any():
        idx = np.unravel_index(int(np.argmax(box != 0)), box.shape)
        return {"monomial": list(map(int, idx)), "value": int(box[idx])}
    return None


# -- degree and homogeneity diagnostics ------------------------------------


def homogeneity_report(comps: list[BoxPoly], expected_degree: int):
    """None if each component is homogeneous of the expected total degree."""
    for j, bp in enumerate(comps):
        if bp.vals.size == 0:
            continue
        degs = bp.total_degrees()
        if not np.all(degs == expected_degree):
            bad = int(np.argmax(degs != expected_degree))
            return {
                "reason": "inhomogeneous",
                "component": j + 1,
                "monomial": bp.exps[bad].tolist(),
                "degree": int(degs[bad]),
                "expected": expected_degree,
            }
    return None


def degree_bounds_report(comps: list[BoxPoly], htilde: int):
    """None if per-variable degrees respect h~ off the diagonal slot and
    h~ - 1 on it."""
    for j, bp in enumerate(comps):
        if bp.vals.size == 0:
            continue
        caps = np.full(bp.n, htilde, dtype=np.int64)
        caps[j] = htilde - 1
        over = bp.exps.astype(np.int64) > caps[None, :]
        if over.any():
            bad = int(np.argmax(over.any(axis=1)))
            return {
                "reason": "per-variable-degree",
                "component": j + 1,
                "monomial": bp.exps[bad].tolist(),
            }
    return None


# -- recentring -------------------------------------------------------------


def _pascal_shift_matrix(size: int, a: int, p: int) -> np.ndarray:
    """M[i, j] = C(j, i) a^(j-i) mod p, so that out = in @ M.T recentres."""
    M = np.zeros((size, size), dtype=np.int64)
    pw = _power_table(a % p, size, p)
    for j in range(size):
        for i in range(j + 1):
            M[i, j] = math.comb(j, i) % p * pw[j - i] % p
    return M


def taylor_shift_dense(arr: np.ndarray, point: list[int], p: int) -> np.ndarray:
    """Recentre f(z) to f(a + u) by per-axis Pascal matrix products."""
    out = arr % p
    n = arr.ndim
    for axis in range(n):
        size = arr.shape[axis]
        M = _pascal_shift_matrix(size, point[axis] % p, p)
        moved = np.moveaxis(out, axis, -1)
        moved = moved @ M.T % p
        out = np.moveaxis(moved, -1, axis)
    return out % p
