"""``nexp``: command-line front end.

Exit codes: 0 success, 1 failed verification or non-convergence,
2 bad usage or parameters, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Callable

import numpy as np

from . import plotting
from .core import DigitError, DomainError, NExpParams, derivative_bound
from .gaps import NonConvergenceError, attractor_iterate, detect_gaps
from .matching import (
    MatchingPair,
    PreconditionError,
    chain_residuals,
    classify_alpha,
    endpoint_identities,
    enumerate_matching_pairs,
    k_subintervals,
    plateau_heights,
    verify_matching,
)
from .measure import (
    density_1d,
    entropy,
    entropy_closed_form,
    entropy_sweep,
    normalizing_constant,
    transfer_residual,
)
from .natext import (
    ClassificationError,
    build_domain,
    check_lamination,
    quilting_mass_check,
    verify_quilting,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SUITES = ("matching", "quilting", "lamination", "invariance", "endpoints")

MATCHING_TOL = 1e-8
ENDPOINT_TOL = 1e-10
CHAIN_TOL = 1e-12
NORMALIZATION_TOL = 1e-8
TRANSFER_TOL = 1e-9
QUILT_TOL = 1e-9
QUILT_MASS_Z = 3.0
EXCLUDED_FRACTION = 1e-3


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("NEXP_SEED", "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"NEXP_SEED must be an integer, got {raw!r}") from None


def fmt(x: float) -> str:
    return f"{x:.15g}"


def _round15(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round15(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round15(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round15(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round15(obj))


def _pair(args) -> MatchingPair:
    try:
        return MatchingPair(args.N, args.d, args.i)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


# ------------------------------------------------------------------ commands

def cmd_enumerate(args) -> int:
    if args.N < 2:
        raise UsageError("N must be >= 2")
    en = enumerate_matching_pairs(args.N)
    rows = []
    for p in en.pairs:
        h = plateau_heights(p)
        rows.append({"d": p.d, "i": p.i, "A": h.A, "B": h.B,
                     "H": normalizing_constant(p), "h": entropy_closed_form(p)})
    if args.json:
        print(dump_json({"N": en.N, "D": en.D, "M": en.M, "pairs": rows}))
    else:
        print(f"N={en.N}  D={en.D}  M={en.M}")
        for r in rows:
            print(f"d={r['d']:<4d} i={r['i']:<6d} [{fmt(r['A'])}, {fmt(r['B'])}]  "
                  f"H={fmt(r['H'])}  h={fmt(r['h'])}")
    return EXIT_OK


def cmd_plateau(args) -> int:
    p = _pair(args)
    h = plateau_heights(p)
    out = {
        "N": p.N, "d": p.d, "i": p.i,
        "plateau": list(h.plateau),
        "heights": dict(zip("ABCDEF", h.as_tuple())),
        "H": normalizing_constant(p),
        "h": entropy_closed_form(p),
        "k_intervals": [{"k": k, "lo": lo, "hi": hi} for k, (lo, hi) in k_subintervals(p).items()],
        "endpoint_residuals": endpoint_identities(p),
    }
    print(dump_json(out))
    return EXIT_OK


def cmd_classify(args) -> int:
    p = _pair(args)
    NExpParams(p.N, args.alpha)
    c = classify_alpha(p, args.alpha)
    print(dump_json({"N": p.N, "d": p.d, "i": p.i, "alpha": args.alpha,
                     "member": c.member, "k": c.k, "boundary": c.boundary}))
    return EXIT_OK


def _interior_alphas(p: MatchingPair, count: int = 3) -> list[float]:
    A, B = plateau_heights(p).plateau
    return [A + (B - A) * (j + 1) / (count + 1) for j in range(count)]


def suite_matching(p: MatchingPair, seed: int, samples: int):
    A, B = plateau_heights(p).plateau
    rng = np.random.default_rng(seed)
    alphas = rng.uniform(A, B, samples or 100)
    worst = max(verify_matching(p, float(a)) for a in alphas)
    yield f"max |T^3(a) - T^3(a+1)| over {len(alphas)} alphas", worst, MATCHING_TOL


def suite_endpoints(p: MatchingPair, seed: int, samples: int):
    for name, r in endpoint_identities(p).items():
        yield name, r, ENDPOINT_TOL
    for name, r in chain_residuals(p, plateau_heights(p)).items():
        yield name, r, CHAIN_TOL


def suite_lamination(p: MatchingPair, seed: int, samples: int):
    n = samples or 1_000_000
    for a in _interior_alphas(p):
        rep = check_lamination(build_domain(p, a), n, seed=seed)
        yield f"alpha={fmt(a)} violations / {n}", float(rep.violations), 0.5
        yield f"alpha={fmt(a)} excluded fraction", rep.excluded / n, EXCLUDED_FRACTION


def _interior_points(f, alpha: float, n: int, rng, margin: float = 1e-9) -> np.ndarray:
    cuts = np.array(f.breakpoints)
    x = rng.uniform(alpha, alpha + 1.0, 4 * n)
    far = np.min(np.abs(x[:, None] - cuts[None, :]), axis=1) > margin
    return x[far][:n]


def suite_invariance(p: MatchingPair, seed: int, samples: int):
    rng = np.random.default_rng(seed)
    n = samples or 1000
    for a in _interior_alphas(p):
        f = density_1d(p, a)
        yield f"alpha={fmt(a)} |integral f - 1|", abs(f.integral() - 1.0), NORMALIZATION_TOL
        x = _interior_points(f, a, n, rng)
        yield f"alpha={fmt(a)} max transfer residual ({len(x)} points)", \
            float(np.max(transfer_residual(p, a, f, x))), TRANSFER_TOL
        yield f"alpha={fmt(a)} non-positive density values", float(np.sum(f(x) <= 0)), 0.0


def quilting_samples(p: MatchingPair, count: int = 2) -> list[tuple[int, float, float]]:
    """(k, alpha, beta) at the thirds of the widest X_k sub-intervals."""
    subs = sorted(k_subintervals(p).items(), key=lambda kv: kv[1][0] - kv[1][1])
    out = []
    for k, (lo, hi) in subs:
        w = hi - lo
        if w <= 1e-12:
            continue
        out.append((k, lo + w / 3.0, lo + 2.0 * w / 3.0))
        if len(out) == count:
            break
    return out


def suite_quilting(p: MatchingPair, seed: int, samples: int):
    picks = quilting_samples(p)
    if not picks:
        yield "sampled (alpha, beta) pairs", 0.0, -1.0
        return
    for k, a, b in picks:
        yield f"k={k} alpha={fmt(a)} beta={fmt(b)} corner mismatch", verify_quilting(p, a, b), QUILT_TOL
        mc = quilting_mass_check(p, a, b, samples=samples or 100_000, seed=seed)
        yield f"k={k} D0 mass z-score", mc.z, QUILT_MASS_Z


SUITE_FUNCS: dict[str, Callable] = {
    "matching": suite_matching,
    "quilting": suite_quilting,
    "lamination": suite_lamination,
    "invariance": suite_invariance,
    "endpoints": suite_endpoints,
}


def run_suite(p: MatchingPair, suite: str, seed: int = 0, samples: int = 0) -> tuple[bool, list[str]]:
    lines, ok = [], True
    for name, value, tol in SUITE_FUNCS[suite](p, seed, samples):
        good = value <= tol if tol >= 0 else False
        ok &= good
        lines.append(f"{'PASS' if good else 'FAIL'}  {name}: {value:.6g} (tol {tol:g})")
    return ok, lines


def cmd_verify(args) -> int:
    p = _pair(args)
    ok, lines = run_suite(p, args.suite, args.seed, args.samples)
    print(f"suite {args.suite} for N={p.N} d={p.d} i={p.i} seed={args.seed}")
    print("\n".join(lines))
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_entropy(args) -> int:
    p = _pair(args)
    if args.iters < 0:
        raise UsageError("--iters must be >= 0")
    if args.alpha is not None:
        c = classify_alpha(p, args.alpha)
        if not (c.member or c.boundary):
            raise UsageError(f"alpha={args.alpha} is not in the plateau of (d={p.d}, i={p.i})")
    r = entropy(p, args.alpha, args.iters, args.seed)
    print(dump_json({"N": p.N, "d": p.d, "i": p.i, "closed_form": r.closed_form,
                     "birkhoff_estimate": r.birkhoff_estimate, "iterations": r.birkhoff_iterations,
                     "seed": r.seed, "deviation": r.deviation}))
    return EXIT_OK


def sweep_csv(rows) -> str:
    lines = ["alpha,entropy,iterations,seed"]
    lines += [f"{fmt(r.alpha)},{fmt(r.entropy)},{r.iterations},{r.seed}" for r in rows]
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    lo, hi = args.lo, args.hi
    if args.steps < 2 or args.iters < 1:
        raise UsageError("need --steps >= 2 and --iters >= 1")
    if not 0.0 < lo < hi or hi > math.sqrt(args.N) - 1.0 + 1e-12:
        raise UsageError(f"need 0 < from < to <= sqrt(N) - 1, got [{lo}, {hi}]")
    hi = min(hi, math.sqrt(args.N) - 1.0)
    # open outputs before the long computation so a bad path fails fast
    handles = []
    try:
        for path in (args.out, args.svg):
            handles.append(open(path, "a") if path not in (None, "-") else None)
    finally:
        for h in handles:
            if h is not None:
                h.close()
    rows = entropy_sweep(args.N, lo, hi, args.steps, args.iters, args.seed, workers=args.workers)
    _write(args.out, sweep_csv(rows))
    if args.svg:
        plateaux = [plateau_heights(p).plateau for p in enumerate_matching_pairs(args.N).pairs]
        plotting.save(plotting.sweep_figure(rows, args.N, plateaux), args.svg)
    return EXIT_OK


def cmd_gaps(args) -> int:
    params = NExpParams(args.N, args.alpha)
    att = attractor_iterate(params)
    gaps = detect_gaps(params)
    print(dump_json({"N": args.N, "alpha": args.alpha,
                     "attractor": [list(p) for p in att.parts],
                     "gaps": [list(g) for g in gaps],
                     "min_abs_derivative": derivative_bound(params)}))
    return EXIT_OK


def _alpha_arg(p: MatchingPair, raw: str) -> float:
    h = plateau_heights(p)
    if raw in ("A", "B"):
        return getattr(h, raw)
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"--alpha must be a number, A or B; got {raw!r}") from None


def cmd_domain(args) -> int:
    p = _pair(args)
    dom = build_domain(p, _alpha_arg(p, args.alpha))
    if args.svg:
        plotting.save(plotting.domain_figure(dom), args.svg)
    if args.out or not args.svg:
        _write(args.out, dom.export_vertices())
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nexp", description="N-expansions with finite digit sets")
    sub = ap.add_subparsers(dest="command", required=True)

    def pair_args(sp):
        sp.add_argument("--N", type=int, required=True)
        sp.add_argument("--d", type=int, required=True)
        sp.add_argument("--i", type=int, required=True)

    def seed_arg(sp):
        sp.add_argument("--seed", type=int, default=None, help="default: $NEXP_SEED or 0")

    sp = sub.add_parser("enumerate", help="matching pairs for N")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("plateau", help="heights, plateau, H and entropy of a pair")
    pair_args(sp)
    sp.set_defaults(func=cmd_plateau)

    sp = sub.add_parser("classify", help="is alpha in the plateau of a pair, and which k")
    pair_args(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("verify", help="run a verification suite")
    pair_args(sp)
    sp.add_argument("--suite", choices=SUITES, required=True)
    sp.add_argument("--samples", type=int, default=0, help="override the default sample size")
    seed_arg(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("entropy", help="closed-form entropy, optionally with a simulation")
    pair_args(sp)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--iters", type=int, default=0)
    seed_arg(sp)
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("sweep", help="simulated entropy over an alpha grid (CSV)")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--from", dest="lo", type=float, required=True)
    sp.add_argument("--to", dest="hi", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--iters", type=int, default=1_000_000)
    sp.add_argument("--out", default=None, help="CSV path (default stdout)")
    sp.add_argument("--svg", default=None, help="also write a plot")
    sp.add_argument("--workers", type=int, default=1)
    seed_arg(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gaps", help="attractor and gaps of T_alpha")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.set_defaults(func=cmd_gaps)

    sp = sub.add_parser("domain", help="vertices or SVG of the planar domain")
    pair_args(sp)
    sp.add_argument("--alpha", required=True, help="a number, or A / B for the plateau ends")
    sp.add_argument("--out", default=None)
    sp.add_argument("--svg", default=None)
    sp.set_defaults(func=cmd_domain)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = default_seed()
        return args.func(args)
    except (UsageError, DomainError, DigitError, ClassificationError, PreconditionError) as e:
        print(f"nexp: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as e:
        print(f"nexp: {e}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as e:
        print(f"nexp: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"nexp: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
