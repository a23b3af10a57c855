"""Command-line front end.

Subcommands: gen, suite, check, pcurv, formal, spectrum, katz.  A JSON
config file supplies defaults; flags override.  Certificates stream as
newline-delimited JSON in a canonical form (sorted keys, no volatile
fields), so a fixed configuration and seed reproduce byte-identical
output.  Exit status: 0 all passed, 1 some check failed, 2 bad
configuration or internal error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import certs, curvecoh, hyperg, pcurv, solspace, suite
from .errors import KzpError
from .kz_core import KZContext
from .multipoly import sample_point

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 2},
        "p": {"type": "integer", "minimum": 2},
        "ext_degree": {"type": "integer", "minimum": 1},
        "h": {
            "anyOf": [
                {"type": "integer"},
                {"type": "array", "items": {"type": "integer"}},
            ]
        },
        "seed": {"type": "string"},
        "trials": {"type": "integer", "minimum": 1},
        "pcurv_points": {"type": "integer", "minimum": 1},
        "formal_points": {"type": "integer", "minimum": 1},
        "spectrum_points": {"type": "integer", "minimum": 1},
        "depth": {"type": "integer", "minimum": 1},
        "q": {"type": "integer", "minimum": 2},
        "mutate": {"type": "boolean"},
        "cell_cap": {"type": "integer", "minimum": 1},
    },
    "required": ["n", "p"],
    "additionalProperties": False,
}


class ConfigError(Exception):
    pass


def load_config(args) -> suite.RunConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        try:
            import jsonschema

            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:  # type: ignore[attr-defined]
            raise ConfigError(f"config file invalid: {exc.message}")
    for key in (
        "n",
        "p",
        "ext_degree",
        "seed",
        "trials",
        "depth",
        "q",
        "pcurv_points",
        "formal_points",
        "spectrum_points",
    ):
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            data[key] = v
    if getattr(args, "h", None) is not None:
        data["h"] = _parse_h(args.h)
    if getattr(args, "mutate", False):
        data["mutate"] = True
    if "n" not in data or "p" not in data:
        raise ConfigError("n and p are required (flags or config file)")
    try:
        return suite.RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc))


def _parse_h(text: str):
    if "," in text:
        return [int(x) for x in text.split(",")]
    return int(text)


def _emit(certificates: list[certs.Certificate], out: str | None, verbose: bool = True) -> int:
    lines = [c.to_json() for c in certificates]
    if out:
        with open(out, "w") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
    for c in certificates:
        t = f" [{c.timing:.2f}s]" if verbose and c.timing is not None else ""
        print(f"{c.status:>14}  {c.name}{t}", file=sys.stderr)
        if not out:
            print(c.to_json())
    if any(c.status == certs.FAIL for c in certificates):
        return 1
    if any(c.status == certs.ERROR for c in certificates):
        return 2
    return 0


def cmd_gen(args) -> int:
    cfg = load_config(args)
    ctx = cfg.make_context()
    if not ctx.h_rational:
        raise ConfigError("gen needs h in the prime field")
    payload = {"n": cfg.n, "p": cfg.p, "h": str(ctx.h), "plus": [], "minus": []}
    if ctx.h_tilde is None:
        payload["note"] = "h = 0: both families are empty"
    else:
        for sign, key in ((1, "plus"), (-1, "minus")):
            fam = hyperg.p_solutions(ctx, sign)
            for ell in fam.ells:
                vec = fam.vector(ell)
                payload[key].append(
                    {"ell": ell, "components": [c.to_json_dict() for c in vec]}
                )
    text = json.dumps(payload, sort_keys=True, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_suite(args) -> int:
    cfg = load_config(args)
    return _emit(suite.run_suite(cfg), args.out)


def cmd_check(args) -> int:
    cfg = load_config(args)
    wanted = args.name
    known = {
        "counting",
        "flatness",
        "homogeneity",
        "degree-bounds",
        "orthogonality",
        "point-independence",
        "lagrangian",
        "nilpotency",
        "rank-structure",
        "closed-form",
        "formal-rank",
        "no-solution",
        "steepest-descent-spectrum",
        "katz-composition",
        "derivative-identity",
    }
    if wanted not in known:
        raise ConfigError(f"unknown check {wanted!r}; choose from {sorted(known)}")
    if wanted == "derivative-identity":
        ctx = cfg.make_context()
        out = [hyperg.derivative_identity_check(ctx, j) for j in range(1, cfg.n + 1)]
        out.append(hyperg.derivative_sum_check(ctx))
        return _emit(out, args.out)
    if wanted == "katz-composition" and cfg.q is None:
        ctx = cfg.make_context()
        cfg.q = curvecoh.find_linkage(cfg.n, cfg.p, ctx.h_tilde)[0]
    all_certs = suite.run_suite(cfg)
    picked = [c for c in all_certs if c.name == wanted]
    if not picked:
        raise ConfigError(f"check {wanted!r} did not run for this configuration")
    return _emit(picked, args.out)


def cmd_pcurv(args) -> int:
    cfg = load_config(args)
    ctx = cfg.make_context()
    rng = random.Random(f"{cfg.seed}:pcurv-cli")
    point = sample_point(ctx.field, ctx.n, rng)
    rows = []
    for k in range(1, ctx.n + 1):
        m = pcurv.psi_at_point(ctx, k, point)
        rows.append({"k": k, "matrix": [[str(x) for x in row] for row in m.matrix]})
    print(json.dumps({"point": [str(c) for c in point], "operators": rows}, sort_keys=True, indent=1))
    return 0


def cmd_formal(args) -> int:
    cfg = load_config(args)
    ctx = cfg.make_context()
    rng = random.Random(f"{cfg.seed}:formal-cli")
    point = sample_point(ctx.field, ctx.n, rng)
    depth = cfg.depth or ctx.p
    basis = solspace.formal_solve(ctx, point, depth, cfg.cell_cap)
    print(
        json.dumps(
            {
                "point": [str(c) for c in point],
                "truncation": depth,
                "dimension": basis.dimension,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_spectrum(args) -> int:
    cfg = load_config(args)
    if cfg.ext_degree < 2:
        raise ConfigError("spectrum needs an extension field (--ext-degree 2) and h outside F_p")
    certs_out = [suite._spectrum_block(cfg, cfg.make_context())]
    return _emit(certs_out, args.out)


def cmd_katz(args) -> int:
    cfg = load_config(args)
    ctx = cfg.make_context()
    if cfg.q is None:
        cfg.q = curvecoh.find_linkage(cfg.n, cfg.p, ctx.h_tilde)[0]
    plus = hyperg.p_solutions(ctx, 1)
    if cfg.mutate:
        plus = plus.mutated()
    minus = hyperg.p_solutions(ctx, -1)
    cert = suite._katz_block(cfg, ctx, plus, minus)
    return _emit([cert], args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kzp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--n", type=int)
        sp.add_argument("--p", type=int)
        sp.add_argument("--ext-degree", type=int, dest="ext_degree")
        sp.add_argument("--h", help="integer, or comma-separated extension coefficients")
        sp.add_argument("--seed")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--depth", type=int, help="formal-solve truncation order")
        sp.add_argument("--q", type=int, help="curve exponent for the katz check")
        sp.add_argument("--out", help="certificate / output file")
        sp.add_argument("--mutate", action="store_true", help="corrupt the +h family (self-test)")

    for name, fn in (
        ("gen", cmd_gen),
        ("suite", cmd_suite),
        ("check", cmd_check),
        ("pcurv", cmd_pcurv),
        ("formal", cmd_formal),
        ("spectrum", cmd_spectrum),
        ("katz", cmd_katz),
    ):
        sp = sub.add_parser(name)
        common(sp)
        if name == "check":
            sp.add_argument("--name", required=True, help="which check to run")
        sp.set_defaults(fn=fn)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, KzpError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
