"""Formal power-series solutions of the KZ system at a point.

The solver works degree by degree on graded slabs: the coefficients of
all total-degree-m monomials form one numpy array per degree, with a
trailing axis enumerating a basis of the current solution space.  The
Hamiltonian products (I_j - I_k)/(z_k - z_j), expanded at the base
point, obey the one-step recurrence

    c * G_m = (I_j - I_k)_m - (z_k - z_j 's shift of) G_(m-1),

so no geometric-series convolution is ever formed.  A new degree is
solved monomial-by-monomial from the partial-derivative equations; the
leftover consistency residuals are linear constraints that cut the
direction space, and fresh directions enter at monomials all of whose
exponents are divisible by p.  This realizes the module structure of
the solution space over p-th powers of the local coordinates.

Prime-field data rides plain integer arrays; a quadratic extension adds
a trailing coefficient axis of size 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import certs, linalg
from .errors import PointNotInS, ResourceGuard, TruncationTooSmall
from .fields import FieldElement, PrimeField
from .hyperg import QFamily, p_solutions
from .kz_core import KZContext
from .multipoly import EvalPoint
from ._dense import BoxPoly, taylor_shift_dense

DEFAULT_CELL_CAP = 250_000_000  # slab elements; predicted peak before refusing


# -- monomial tables --------------------------------------------------------


@lru_cache(maxsize=8)
def monomial_table(n: int, maxdeg: int):
    """Exponent rows, ranking dicts and shift maps per total degree."""
    mons = []
    ranks = []
    for d in range(maxdeg + 1):
        rows = _compositions(d, n)
        arr = np.array(rows, dtype=np.int16).reshape(len(rows), n)
        mons.append(arr)
        ranks.append({bytes(r.tobytes()): i for i, r in enumerate(arr)})
    mul = []  # mul[d][ax][i] = index in degree d+1 of mons[d][i] + e_ax
    for d in range(maxdeg):
        per_axis = []
        nxt = ranks[d + 1]
        for ax in range(n):
            rows = mons[d].copy()
            rows[:, ax] += 1
            per_axis.append(
                np.array([nxt[bytes(r.tobytes())] for r in rows], dtype=np.int64)
            )
        mul.append(per_axis)
    return mons, mul


def _compositions(d: int, n: int) -> list[tuple[int, ...]]:
    if n == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, n - 1):
            out.append((first,) + rest)
    return out


# -- field-kernel helpers (prime / quadratic extension) ----------------------


class _Kernel:
    """Vectorized arithmetic for slab arrays over F_p or F_{p^2}."""

    def __init__(self, field):
        self.field = field
        self.p = field.char
        self.ext = not isinstance(field, PrimeField)
        if self.ext:
            if field.degree != 2:
                raise ResourceGuard("jet solver supports prime fields and quadratic extensions")
            self.alpha = (-field.modulus[1]) % self.p
            self.beta = (-field.modulus[0]) % self.p

    def shape(self, *dims):
        return dims + (2,) if self.ext else dims

    def zeros(self, *dims):
        return np.zeros(self.shape(*dims), dtype=np.int64)

    def to_elem(self, arr) -> FieldElement:
        if self.ext:
            return self.field.elem((int(arr[0]), int(arr[1])))
        return self.field.elem(int(arr))

    def from_elem(self, x: FieldElement):
        if self.ext:
            v = x.value
            return np.array([v[0], v[1]], dtype=np.int64)
        return np.int64(x.value)

    def mul_scalar(self, arr, s):
        """arr * s with s a field element in array form."""
        p = self.p
        if not self.ext:
            return arr * int(s) % p
        a0, a1 = arr[..., 0], arr[..., 1]
        s0, s1 = int(s[0]), int(s[1])
        hi = a1 * s1 % p
        c0 = (a0 * s0 + self.beta * hi) % p
        c1 = (a0 * s1 + a1 * s0 + self.alpha * hi) % p
        return np.stack([c0, c1], axis=-1)

    def mul_int(self, arr, c: int):
        return arr * (c % self.p) % self.p

    def matmul_dirs(self, slab, K):
        """Recombine the trailing direction axis: slab @ K."""
        p = self.p
        if not self.ext:
            return slab @ K % p
        a0, a1 = slab[..., 0], slab[..., 1]
        k0, k1 = K[..., 0], K[..., 1]
        hi = a1 @ k1 % p
        c0 = (a0 @ k0 + self.beta * hi) % p
        c1 = (a0 @ k1 + a1 @ k0 + self.alpha * hi) % p
        return np.stack([c0, c1], axis=-1)

    def nonzero_rows(self, mat2d):
        if self.ext:
            return np.nonzero(mat2d.any(axis=(1, 2)))[0]
        return np.nonzero(mat2d.any(axis=1))[0]

    def row_basis(self, rows):
        """Row-space basis (<= dirs rows) of a tall stack of constraints."""
        p = self.p
        rows = rows.copy()
        basis = []
        while True:
            if self.ext:
                nzmask = rows.any(axis=(1, 2))
            else:
                nzmask = rows.any(axis=1)
            nz = np.nonzero(nzmask)[0]
            if nz.size == 0:
                break
            r = rows[nz[0]]
            if self.ext:
                c = int(np.nonzero(r.any(axis=-1))[0][0])
                inv = self.from_elem(self.to_elem(r[c]).inv())
                r = self.mul_scalar(r, inv)
                f0 = rows[:, c, 0][:, None]
                f1 = rows[:, c, 1][:, None]
                hi = f1 * r[None, :, 1] % p
                prod0 = (f0 * r[None, :, 0] + self.beta * hi) % p
                prod1 = (f0 * r[None, :, 1] + f1 * r[None, :, 0] + self.alpha * hi) % p
                rows = (rows - np.stack([prod0, prod1], axis=-1)) % p
            else:
                c = int(np.nonzero(r)[0][0])
                r = r * pow(int(r[c]), -1, p) % p
                rows = (rows - np.outer(rows[:, c], r)) % p
            basis.append(r)
        return np.array(basis, dtype=np.int64) if basis else rows[:0]

    def nullspace(self, rows):
        """Kernel basis (dirs x k) of stacked constraint rows."""
        small = self.row_basis(rows)
        if small.shape[0] == 0:
            d = rows.shape[1]
            eye = np.eye(d, dtype=np.int64)
            if self.ext:
                out = np.zeros((d, d, 2), dtype=np.int64)
                out[..., 0] = eye
                return out
            return eye
        if not self.ext:
            return linalg.nullspace_mod(small, self.p)
        field = self.field
        frows = [[field.elem((int(a), int(b))) for a, b in row] for row in small]
        basis = linalg.mat_nullspace(frows, field)
        out = np.zeros((rows.shape[1], len(basis), 2), dtype=np.int64)
        for j, vec in enumerate(basis):
            for i, x in enumerate(vec):
                out[i, j, 0], out[i, j, 1] = x.value
        return out

    def echelon_dims(self, rows):
        """Rank and an echelon transform of wide row vectors."""
        p = self.p
        m = rows.copy()
        nrows = m.shape[0]
        rank = 0
        keep = []
        for r in range(nrows):
            if self.ext:
                nz = np.nonzero(m[r].any(axis=-1))[0]
            else:
                nz = np.nonzero(m[r])[0]
            if nz.size == 0:
                continue
            c = int(nz[0])
            pivot = m[r, c]
            if self.ext:
                inv = self.from_elem(self.to_elem(pivot).inv())
                m[r] = self.mul_scalar(m[r], inv)
            else:
                m[r] = m[r] * pow(int(pivot), -1, p) % p
            for r2 in range(nrows):
                if r2 != r:
                    f = m[r2, c]
                    if self.ext:
                        if f.any():
                            m[r2] = (m[r2] - self.mul_scalar(m[r], f)) % p
                    elif f:
                        m[r2] = (m[r2] - int(f) * m[r]) % p
            keep.append(r)
            rank += 1
        return rank, m[keep]


# -- the solver --------------------------------------------------------------


@dataclass
class FormalSolutionBasis:
    """Echelonized truncations (degree < truncation) of the solutions that
    extend through truncation + p - 1."""

    ctx: KZContext
    point: EvalPoint
    truncation: int
    slabs: list  # per degree d < truncation: array (count_d, n, dim[, 2])
    dimension: int

    def coefficient(self, basis_index: int, exponent: tuple[int, ...]) -> list | None:
        """The n-vector coefficient of one monomial of one basis element."""
        d = sum(exponent)
        if d >= self.truncation or d >= len(self.slabs):
            return None
        mons, _ = monomial_table(self.ctx.n, self.truncation + self.ctx.p - 1)
        key = bytes(np.array(exponent, dtype=np.int16).tobytes())
        idx = {bytes(r.tobytes()): i for i, r in enumerate(mons[d])}[key]
        kern = _Kernel(self.ctx.field)
        return [kern.to_elem(self.slabs[d][idx, c, basis_index]) for c in range(self.ctx.n)]

    def jet_arrays(self, basis_index: int) -> list:
        """Graded (count_d, n) coefficient arrays of one basis element."""
        return [s[:, :, basis_index] for s in self.slabs]


def _predict_cells(n: int, p: int, M: int, D: int, d_plus: int) -> int:
    # sum over degrees <= M of C(m+n-1, n-1) = C(M+n, n)
    mons_total = 1
    for i in range(1, n + 1):
        mons_total = mons_total * (M + i) // i
    blocks = M // p + 1
    dirs = (n - 1) * _binom(blocks - 1 + n, n)
    return mons_total * n * max(dirs, 1)


def _binom(a: int, b: int) -> int:
    from math import comb

    return comb(a, b)


def formal_solve(
    ctx: KZContext, point: EvalPoint, truncation: int, cell_cap: int = DEFAULT_CELL_CAP
) -> FormalSolutionBasis:
    """Basis of formal solutions at the point, truncated below `truncation`.

    The linear system of all flatness constraints is solved internally
    through total degree truncation + p - 1, so that jets with no
    extension through the next p-block are discarded; the surviving
    space is truncated and echelonized.
    """
    n, p = ctx.n, ctx.p
    D = truncation
    if len(point) != n:
        raise PointNotInS("point arity differs from context")
    if D < p:
        raise TruncationTooSmall(f"need truncation >= p = {p}")
    M = D + p - 1
    est = _predict_cells(n, p, M, D, max(ctx.d_plus, 1))
    if est > cell_cap:
        raise ResourceGuard(
            f"predicted {est} slab elements exceeds cap {cell_cap} (n={n}, p={p}, D={D})"
        )
    kern = _Kernel(ctx.field)
    mons, mul = monomial_table(n, M)
    counts = [len(m) for m in mons]
    hval = kern.from_elem(ctx.h)
    cinv = {}
    for k in range(n):
        for j in range(k + 1, n):
            cinv[(k, j)] = kern.from_elem((point[k] - point[j]).inv())

    dirs = n - 1
    I = [kern.zeros(counts[0], n, dirs)]
    for i in range(n - 1):
        I[0][0, i, i] = _one(kern)
        I[0][0, n - 1, i] = _minus_one(kern)
    G = {pair: kern.zeros(0, dirs) for pair in cinv}  # degree -1 placeholder

    for m in range(1, M + 1):
        cm, cprev = counts[m], counts[m - 1]
        dirs = I[0].shape[2]
        if dirs == 0:
            break
        # advance the Hamiltonian product series to degree m-1
        newG = {}
        for (k, j), ci in cinv.items():
            acc = (I[m - 1][:, j] - I[m - 1][:, k]) % p
            if m >= 2:
                prev = G[(k, j)]
                shifted = _shift_gather(prev, mul[m - 2], k, cprev, kern)
                shifted -= _shift_gather(prev, mul[m - 2], j, cprev, kern)
                acc = (acc - shifted) % p
            newG[(k, j)] = kern.mul_scalar(acc, ci)
        G = newG
        # right-hand sides R_k = -h (H_k I)_(m-1), vectors over components
        R = [kern.zeros(cprev, n, dirs) for _ in range(n)]
        for (k, j), g in G.items():
            hg = kern.mul_scalar(g, hval)
            R[k][:, k] = (R[k][:, k] - hg) % p
            R[k][:, j] = (R[k][:, j] + hg) % p
            R[j][:, j] = (R[j][:, j] - hg) % p
            R[j][:, k] = (R[j][:, k] + hg) % p
        # solve for the degree-m slab monomial by monomial
        exps = mons[m]
        Im = kern.zeros(cm, n, dirs)
        modp = exps % p
        pivot_ax = np.argmax(modp != 0, axis=1)
        free = ~(modp != 0).any(axis=1)
        for ax in range(n):
            sel = np.nonzero((pivot_ax == ax) & ~free)[0]
            if sel.size == 0:
                continue
            back = _preimage_indices(mul[m - 1][ax], cm, sel)
            vals = R[ax][back]
            inv = np.array([pow(int(e), -1, p) for e in exps[sel, ax]], dtype=np.int64)
            if kern.ext:
                Im[sel] = vals * inv[:, None, None, None] % p
            else:
                Im[sel] = vals * inv[:, None, None] % p
        # consistency: R_k must equal the k-partial of the solved slab
        bad_rows = []
        for k in range(n):
            lifted = Im[mul[m - 1][k]]
            wts = (mons[m - 1][:, k].astype(np.int64) + 1) % p
            if kern.ext:
                res = (R[k] - lifted * wts[:, None, None, None]) % p
                flat = res.reshape(cprev * n, dirs, 2)
            else:
                res = (R[k] - lifted * wts[:, None, None]) % p
                flat = res.reshape(cprev * n, dirs)
            nz = kern.nonzero_rows(flat)
            if nz.size:
                bad_rows.append(flat[nz])
        if bad_rows:
            stacked = np.concatenate(bad_rows, axis=0)
            K = kern.nullspace(stacked)
            newdirs = K.shape[1]
            if newdirs == 0:
                return FormalSolutionBasis(ctx, point, D, [], 0)
            I = [kern.matmul_dirs(s, K) for s in I]
            Im = kern.matmul_dirs(Im, K)
            G = {pair: kern.matmul_dirs(g, K) for pair, g in G.items()}
            dirs = newdirs
        # fresh directions at all-p-divisible monomials
        freedom = np.nonzero(free)[0]
        if freedom.size:
            extra = freedom.size * (n - 1)
            I = [_extend_dirs(s, extra, kern) for s in I]
            Gext = {pair: _extend_dirs(g, extra, kern) for pair, g in G.items()}
            G = Gext
            Im = _extend_dirs(Im, extra, kern)
            col = dirs
            for row in freedom:
                for i in range(n - 1):
                    Im[row, i, col] = _one(kern)
                    Im[row, n - 1, col] = _minus_one(kern)
                    col += 1
            dirs += extra
        I.append(Im)

    if I[0].shape[2] == 0:
        return FormalSolutionBasis(ctx, point, D, [], 0)
    # truncate below D, echelonize the direction space
    flat_parts = []
    for d in range(min(D, len(I))):
        s = I[d]
        if kern.ext:
            flat_parts.append(s.reshape(-1, s.shape[2], 2))
        else:
            flat_parts.append(s.reshape(-1, s.shape[2]))
    stacked = np.concatenate(flat_parts, axis=0)
    rows = np.moveaxis(stacked, 0, 1)
    rank, ech = kern.echelon_dims(rows)
    if rank == 0:
        return FormalSolutionBasis(ctx, point, D, [], 0)
    # re-assemble echelonized slabs
    offs = 0
    slabs = []
    basis = np.moveaxis(ech, 0, 1)  # (coords, rank[, 2])
    for d in range(min(D, len(I))):
        cnt = counts[d] * n
        part = basis[offs : offs + cnt]
        shape = (counts[d], n, rank, 2) if kern.ext else (counts[d], n, rank)
        slabs.append(part.reshape(shape))
        offs += cnt
    return FormalSolutionBasis(ctx, point, D, slabs, rank)


def _one(kern: _Kernel):
    return kern.from_elem(kern.field.one)


def _minus_one(kern: _Kernel):
    return kern.from_elem(-kern.field.one)


def _shift_gather(prev, mulmaps_prev, axis, cprev, kern: _Kernel):
    """Values of (z_axis * prev) on the next degree's monomials."""
    shape = (cprev,) + prev.shape[1:]
    out = np.zeros(shape, dtype=np.int64)
    out[mulmaps_prev[axis]] = prev
    return out


def _preimage_indices(mul_d_ax: np.ndarray, count_next: int, sel: np.ndarray) -> np.ndarray:
    """For degree-(d+1) indices sel, the degree-d index of (monomial - e_ax)."""
    lookup = np.full(count_next, -1, dtype=np.int64)
    lookup[mul_d_ax] = np.arange(len(mul_d_ax))
    return lookup[sel]


def _extend_dirs(slab, extra, kern: _Kernel):
    if kern.ext:
        pad = np.zeros(slab.shape[:-2] + (extra, 2), dtype=np.int64)
        return np.concatenate([slab, pad], axis=-2)
    pad = np.zeros(slab.shape[:-1] + (extra,), dtype=np.int64)
    return np.concatenate([slab, pad], axis=-1)


# -- certificates ------------------------------------------------------------


def p_monomial_count(n: int, p: int, D: int) -> int:
    """Monomials in the p-th-power variables of total degree < D."""
    return _binom((D - 1) // p + n, n)


def module_rank_check(
    ctx: KZContext, point: EvalPoint, truncation: int, cell_cap: int = DEFAULT_CELL_CAP
) -> certs.Certificate:
    """Dimension of truncated extendable solutions against the module count.

    Expected: d_plus * #(p-power monomials of degree < truncation); for
    the boundary case d_plus = 0 the flat-section module has rank n - 1
    instead.
    """
    ctx.require_p_coprime("module rank")
    params = {
        "n": ctx.n,
        "p": ctx.p,
        "h": str(ctx.h),
        "D": truncation,
        "point": [str(c) for c in point],
    }
    if not ctx.h_rational:
        expected = 0
    elif ctx.h_tilde is None or ctx.d_plus == 0:
        expected = (ctx.n - 1) * p_monomial_count(ctx.n, ctx.p, truncation)
    else:
        expected = ctx.d_plus * p_monomial_count(ctx.n, ctx.p, truncation)
    basis = formal_solve(ctx, point, truncation, cell_cap)
    if basis.dimension != expected:
        wit = {"dimension": basis.dimension, "expected": expected}
        return certs.Certificate("formal-rank", params, certs.FAIL, wit)
    return certs.Certificate("formal-rank", params, certs.PASS, {"dimension": expected})


def no_solution_check(
    ctx: KZContext, point: EvalPoint, truncation: int | None = None, cell_cap: int = DEFAULT_CELL_CAP
) -> certs.Certificate:
    """Empty formal solution basis for h outside the prime field."""
    ctx.require_p_coprime("no-solution")
    D = truncation or 3 * ctx.p
    params = {"n": ctx.n, "p": ctx.p, "h": str(ctx.h), "D": D, "point": [str(c) for c in point]}
    if ctx.h_rational:
        return certs.Certificate("no-solution", params, certs.NOT_APPLICABLE)
    basis = formal_solve(ctx, point, D, cell_cap)
    if basis.dimension != 0:
        return certs.Certificate("no-solution", params, certs.FAIL, {"dimension": basis.dimension})
    return certs.Certificate("no-solution", params, certs.PASS)


# -- expansion of solutions in the p-hypergeometric basis --------------------


def hyperg_jets_at_point(
    ctx: KZContext, point: EvalPoint, maxdeg: int, family: QFamily | None = None
) -> dict[int, list]:
    """Family members recentred at the point, as graded slabs per degree."""
    family = family or p_solutions(ctx, 1)
    kern = _Kernel(ctx.field)
    assert not kern.ext, "recentring path is prime-field only"
    p, n = ctx.p, ctx.n
    mons, _ = monomial_table(n, maxdeg)
    out = {}
    coords = [c.value for c in point]
    for ell in family.ells:
        slabs = [np.zeros((len(mons[d]), n), dtype=np.int64) for d in range(maxdeg + 1)]
        for jcomp, bp in enumerate(family.boxes[ell]):
            arr = taylor_shift_dense(bp.dense(), coords, p)
            flat = arr.ravel()
            strides = np.ones(n, dtype=np.int64)
            for i in range(n - 2, -1, -1):
                strides[i] = strides[i + 1] * arr.shape[i + 1]
            for d in range(maxdeg + 1):
                rows = mons[d].astype(np.int64)
                inside = (rows < np.array(arr.shape)[None, :]).all(axis=1)
                if not inside.any():
                    continue
                idx = (rows[inside] * strides).sum(axis=1)
                slabs[d][inside, jcomp] = flat[idx]
        out[ell] = slabs
    return out


def express_in_hyperg_basis(
    ctx: KZContext,
    point: EvalPoint,
    jet_slabs: list,
    family: QFamily | None = None,
):
    """Reduce a solution jet against the recentred family with p-th-power
    coefficient series.  Returns (coefficients, remainder_witness): the
    coefficients map (ell, p-monomial exponent) -> FieldElement, and the
    witness is None exactly when the reduction is exact.
    """
    ctx.require_rational_nonzero("family expansion")
    n, p, field = ctx.n, ctx.p, ctx.field
    D = len(jet_slabs)
    family = family or p_solutions(ctx, 1)
    qjets = hyperg_jets_at_point(ctx, point, D - 1, family)
    ells = sorted(qjets)
    mons, mul = monomial_table(n, max(D - 1, 0))
    ranks = [{bytes(r.tobytes()): i for i, r in enumerate(m)} for m in mons]
    # evaluation matrix of the family at the point (degree-0 slabs)
    evmat = [[int(qjets[ell][0][0, c]) for c in range(n)] for ell in ells]
    residual = [s.astype(np.int64) % p for s in jet_slabs]
    coeffs = {}
    for d in range(D):
        exps = mons[d]
        modp = exps % p
        freemask = ~(modp != 0).any(axis=1) if len(exps) else np.zeros(0, dtype=bool)
        for row in np.nonzero(freemask)[0]:
            target = [int(x) for x in residual[d][row]]
            sol = linalg.mat_solve(
                [[field.elem(evmat[e][c]) for e in range(len(ells))] for c in range(n)],
                [field.elem(t) for t in target],
                field,
            )
            if sol is None:
                return coeffs, {"degree": d, "monomial": exps[row].tolist(), "reason": "outside family span"}
            for ei, ell in enumerate(ells):
                c = sol[ei]
                if not c:
                    continue
                coeffs[(ell, tuple(int(x) for x in exps[row]))] = c
                # subtract c * Delta^gamma * (family jet)
                cval = c.value
                for s in range(D - d):
                    src = qjets[ell][s]
                    tgt = _compose_shift(np.arange(len(mons[s])), exps[row], s, mul, ranks, mons)
                    ok = tgt >= 0
                    residual[d + s][tgt[ok]] = (
                        residual[d + s][tgt[ok]] - cval * src[ok]
                    ) % p
        # the whole degree-d residual must now vanish
        if len(exps):
            nz = np.nonzero(residual[d].any(axis=1))[0]
            if nz.size:
                return coeffs, {
                    "degree": d,
                    "monomial": exps[int(nz[0])].tolist(),
                    "reason": "nonzero remainder",
                }
    return coeffs, None


def _compose_shift(idx, gamma, srcdeg, mul, ranks, mons):
    """Indices of (monomials of degree srcdeg) + gamma in their degree."""
    n = len(gamma)
    cur = idx
    d = srcdeg
    for ax in range(n):
        for _ in range(int(gamma[ax])):
            cur = mul[d][ax][cur]
            d += 1
    return cur