"""Suite orchestration: run every check for one configuration.

Checks run in a fixed order and emit one certificate each; a failing
check never stops the suite.  All randomness is drawn from per-check
string seeds derived from the configured seed, so reruns with the same
configuration are reproducible bit for bit.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field as dfield

from . import certs, curvecoh, hyperg, pcurv, solspace
from .errors import DegenerateCase, KzpError, LinkageError, NotEtale, ResourceGuard
from .fields import ExtField, PrimeField, build_extension
from .kz_core import KZContext
from .multipoly import sample_point


@dataclass
class RunConfig:
    """One suite configuration; field defaults match the acceptance grid."""

    n: int
    p: int
    ext_degree: int = 1
    h: int | list[int] = 1
    seed: str = "kzp"
    trials: int = 20  # point-independence and lagrangian points
    pcurv_points: int = 10
    formal_points: int = 3
    spectrum_points: int = 5
    depth: int | None = None  # formal-solve truncation, default p
    q: int | None = None  # curve linkage; enables the katz check
    mutate: bool = False
    cell_cap: int = solspace.DEFAULT_CELL_CAP

    def make_field(self):
        if self.ext_degree <= 1:
            return PrimeField(self.p)
        return build_extension(self.p, self.ext_degree)

    def make_context(self) -> KZContext:
        f = self.make_field()
        return KZContext(self.n, f, f.elem(self.h))


def _seed(cfg: RunConfig, name: str) -> str:
    return f"{cfg.seed}:{cfg.n}:{cfg.p}:{cfg.h}:{name}"


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    cert = fn(*args, **kwargs)
    cert.timing = time.perf_counter() - t0
    return cert


def run_suite(cfg: RunConfig) -> list[certs.Certificate]:
    ctx = cfg.make_context()
    out: list[certs.Certificate] = []
    rational = ctx.h_rational and ctx.h_tilde is not None

    plus = minus = None
    if rational:
        plus = hyperg.p_solutions(ctx, 1)
        minus = hyperg.p_solutions(ctx, -1)
        if cfg.mutate:
            plus = plus.mutated()

    base_params = {"n": cfg.n, "p": cfg.p, "h": str(ctx.h)}

    def na(name):
        return certs.Certificate(name, base_params, certs.NOT_APPLICABLE)

    # counting
    out.append(_timed(hyperg.counting_check, ctx))

    # flatness / homogeneity / degree bounds / orthogonality, both families
    if rational:
        out.append(_timed(_both_signs, ctx, hyperg.flatness_family_check, "flatness", plus, minus))
        out.append(_timed(_both_signs, ctx, hyperg.homogeneity_check, "homogeneity", plus, minus))
        out.append(_timed(_both_signs, ctx, hyperg.degree_bounds_check, "degree-bounds", plus, minus))
        out.append(_timed(hyperg.orthogonality_check, ctx, plus, minus))
    else:
        out.extend([na("flatness"), na("homogeneity"), na("degree-bounds"), na("orthogonality")])

    # point independence and the Lagrangian property
    if rational and not ctx.p_divides_n:
        out.append(
            _timed(
                hyperg.point_independence_check, ctx, cfg.trials, _seed(cfg, "independence"), plus
            )
        )
        out.append(
            _timed(hyperg.lagrangian_check, ctx, cfg.trials, _seed(cfg, "lagrangian"), plus, minus)
        )
    else:
        out.extend([na("point-independence"), na("lagrangian")])

    # p-curvature structure
    out.extend(_pcurv_block(cfg, ctx, plus, minus))

    # formal solutions
    out.append(_formal_block(cfg, ctx))

    # irrational-level checks
    if not ctx.h_rational:
        out.append(_no_solution_block(cfg, ctx))
        out.append(_spectrum_block(cfg, ctx))

    # curve linkage
    if cfg.q is not None and rational and not ctx.p_divides_n:
        out.append(_katz_block(cfg, ctx, plus, minus))

    for cert in out:
        cert.seed = cert.seed or cfg.seed
    return out


def _both_signs(ctx, fn, name, plus, minus):
    for fam in (plus, minus):
        cert = fn(ctx, fam)
        if cert.status != certs.PASS:
            cert.name = name
            return cert
    cert.name = name
    return cert


def _sample_points(ctx, count, seed, generic=False):
    rng = random.Random(seed)
    pts = []
    for _ in range(count):
        if generic:
            pts.append(pcurv.sample_generic_point(ctx, rng))
        else:
            pts.append(sample_point(ctx.field, ctx.n, rng))
    return pts


def _pcurv_block(cfg: RunConfig, ctx: KZContext, plus, minus) -> list[certs.Certificate]:
    base_params = {"n": cfg.n, "p": cfg.p, "h": str(ctx.h), "points": cfg.pcurv_points}
    out = []
    seed = _seed(cfg, "pcurv")
    t0 = time.perf_counter()
    if not ctx.h_rational:
        c = certs.Certificate("nilpotency", base_params, certs.NOT_APPLICABLE)
        out.append(c)
        rank = certs.Certificate("rank-structure", base_params, certs.NOT_APPLICABLE)
        out.append(rank)
        out.append(certs.Certificate("closed-form", base_params, certs.NOT_APPLICABLE))
        return out
    try:
        pts = _sample_points(ctx, cfg.pcurv_points, seed)
        nil = certs.Certificate("nilpotency", base_params, certs.PASS)
        for a in pts:
            c = pcurv.nilpotency_check(ctx, a)
            if c.status == certs.FAIL:
                nil = c
                break
        nil.timing = time.perf_counter() - t0
        nil.seed = seed
        out.append(nil)
        middle = ctx.h_tilde is not None and 0 < ctx.d_plus < ctx.n - 1 and not ctx.p_divides_n
        if middle:
            rng = random.Random(seed + ":generic")
            rank = certs.Certificate("rank-structure", base_params, certs.PASS)
            closed = certs.Certificate("closed-form", base_params, certs.PASS)
            for _ in range(cfg.pcurv_points):
                a = pcurv.sample_generic_point(ctx, rng)
                if rank.status == certs.PASS:
                    c = pcurv.rank_structure_check(ctx, a, plus, minus)
                    if c.status == certs.FAIL:
                        rank = c
                if closed.status == certs.PASS:
                    c = pcurv.closed_form_check(ctx, a, plus, minus)
                    if c.status == certs.FAIL:
                        closed = c
                if rank.status == certs.FAIL and closed.status == certs.FAIL:
                    break
            rank.seed = closed.seed = seed + ":generic"
            out.extend([rank, closed])
        else:
            zero = pcurv.psi_zero_check(ctx, pts)
            zero.name = "rank-structure"
            zero.witness = zero.witness or {"note": "boundary sizes: operators must vanish"}
            zero.seed = seed
            out.append(zero)
            out.append(certs.Certificate("closed-form", base_params, certs.NOT_APPLICABLE))
    except KzpError as exc:
        out.append(certs.Certificate("rank-structure", base_params, certs.ERROR, {"error": str(exc)}))
    return out


def _formal_block(cfg: RunConfig, ctx: KZContext) -> certs.Certificate:
    params = {"n": cfg.n, "p": cfg.p, "h": str(ctx.h)}
    if ctx.p_divides_n:
        return certs.Certificate("formal-rank", params, certs.NOT_APPLICABLE)
    depth = cfg.depth or ctx.p
    seed = _seed(cfg, "formal")
    rng = random.Random(seed)
    t0 = time.perf_counter()
    try:
        for _ in range(cfg.formal_points):
            a = sample_point(ctx.field, ctx.n, rng)
            cert = solspace.module_rank_check(ctx, a, depth, cfg.cell_cap)
            if cert.status == certs.FAIL:
                cert.seed = seed
                return cert
        cert.params["points"] = cfg.formal_points
        cert.seed = seed
        cert.timing = time.perf_counter() - t0
        return cert
    except ResourceGuard as exc:
        return certs.Certificate(
            "formal-rank", dict(params, D=depth), certs.ERROR, {"resource-guard": str(exc)}, seed
        )


def _no_solution_block(cfg: RunConfig, ctx: KZContext) -> certs.Certificate:
    params = {"n": cfg.n, "p": cfg.p, "h": str(ctx.h)}
    if ctx.p_divides_n:
        return certs.Certificate("no-solution", params, certs.NOT_APPLICABLE)
    seed = _seed(cfg, "no-solution")
    rng = random.Random(seed)
    t0 = time.perf_counter()
    try:
        for _ in range(cfg.formal_points):
            a = sample_point(ctx.field, ctx.n, rng)
            cert = solspace.no_solution_check(ctx, a, cell_cap=cfg.cell_cap)
            if cert.status == certs.FAIL:
                cert.seed = seed
                return cert
        cert.seed = seed
        cert.timing = time.perf_counter() - t0
        return cert
    except ResourceGuard as exc:
        return certs.Certificate("no-solution", params, certs.ERROR, {"resource-guard": str(exc)}, seed)


def _spectrum_block(cfg: RunConfig, ctx: KZContext) -> certs.Certificate:
    params = {"n": cfg.n, "p": cfg.p, "h": str(ctx.h), "points": cfg.spectrum_points}
    if ctx.p_divides_n or ctx.p == 2:
        return certs.Certificate("steepest-descent-spectrum", params, certs.NOT_APPLICABLE)
    seed = _seed(cfg, "spectrum")
    rng = random.Random(seed)
    t0 = time.perf_counter()
    try:
        for i in range(cfg.spectrum_points):
            a = pcurv.sample_etale_point(ctx.field, ctx.n, rng)
            cert = pcurv.steepest_descent_spectrum_check(ctx, a, f"{seed}:{i}")
            if cert.status == certs.FAIL:
                return cert
        cert.params = params
        cert.timing = time.perf_counter() - t0
        return cert
    except NotEtale as exc:
        return certs.Certificate(
            "steepest-descent-spectrum", params, certs.ERROR, {"error": str(exc)}, seed
        )


def _katz_block(cfg: RunConfig, ctx: KZContext, plus, minus) -> certs.Certificate:
    params = {"n": cfg.n, "p": cfg.p, "h": str(ctx.h), "q": cfg.q}
    if ctx.h_tilde is None:
        return certs.Certificate("katz-composition", params, certs.NOT_APPLICABLE)
    seed = _seed(cfg, "katz")
    rng = random.Random(seed)
    t0 = time.perf_counter()
    try:
        if not 0 < ctx.d_plus < ctx.n - 1:
            # boundary sizes: all legs vanish; verify the jets do too
            pts = _sample_points(ctx, 5, seed)
            cert = pcurv.psi_zero_check(ctx.negate(), pts)
            cert.name = "katz-composition"
            cert.params = dict(params, note="boundary sizes, all legs zero")
            return cert
        for _ in range(5):
            a = pcurv.sample_generic_point(ctx, rng)
            for k in range(1, ctx.n + 1):
                cert = curvecoh.katz_composition_check(ctx, k, a, cfg.q, plus, minus)
                if cert.status == certs.FAIL:
                    cert.seed = seed
                    return cert
        cert.seed = seed
        cert.timing = time.perf_counter() - t0
        return cert
    except (LinkageError, DegenerateCase) as exc:
        return certs.Certificate("katz-composition", params, certs.ERROR, {"error": str(exc)}, seed)