"""Command-line front end.

Commands
--------
entropies  entropy table and reliability order at one operating point
weights    ensemble-averaged weight distribution (+ ML bounds) of a frozen set
bounds     list-size profiles of a frozen set
design     genetic frozen-set design over a T_D grid, with Pareto front
simulate   SCL frame-error simulation of one or more frozen sets
export     reliability frozen sets and precoding expressions as text

Exit codes: 0 success, 2 bad input, 3 infeasible design, 4 resource limit.
All outputs are plain text and depend only on the flags (and the seed).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import entropy_table, gaussian_approx_means, reliability_sequence
from .codec import DecoderConfig, PrecodedCode
from .design import ALGORITHMS, GeneticConfig, InfeasibleDesign, best_of_runs, pareto_front
from .list_bounds import VARIANTS, default_lambda, profile
from .ml_bounds import tsb, union_bound
from .polar_core import complement, log2_exact
from .presets import PRESETS, preset
from .sim import ROW_HEADER, StopRule, paired_simulation
from .weights import average_weight_distribution

log = logging.getLogger("polardesign")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_RESOURCE = 0, 2, 3, 4


class FrozenSetFileError(ValueError):
    pass


# ---------------------------------------------------------------- frozen-set files


def format_frozen_set(N: int, frozen) -> str:
    frozen = np.asarray(frozen, dtype=np.int64)
    return f"{N} {N - frozen.size}\n" + "".join(f"{int(i)}\n" for i in frozen)


def write_frozen_set(path, N: int, frozen) -> None:
    Path(path).write_text(format_frozen_set(N, frozen))


def parse_frozen_set(text: str, name: str = "<text>") -> tuple:
    """Parse ``"N K"`` followed by ``N - K`` strictly increasing indices."""
    lines = [(k + 1, ln.strip()) for k, ln in enumerate(text.splitlines())]
    lines = [(k, ln) for k, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FrozenSetFileError(f"{name}: empty file")
    k0, head = lines[0]
    try:
        N, K = (int(x) for x in head.split())
        log2_exact(N)
    except ValueError:
        raise FrozenSetFileError(f"{name}:{k0}: header must be 'N K' with N a power of two") from None
    if not 0 <= K <= N:
        raise FrozenSetFileError(f"{name}:{k0}: K must lie in [0, N]")
    out = []
    for k, ln in lines[1:]:
        try:
            i = int(ln)
        except ValueError:
            raise FrozenSetFileError(f"{name}:{k}: not an integer: {ln!r}") from None
        if not 0 <= i < N:
            raise FrozenSetFileError(f"{name}:{k}: index {i} outside [0, {N})")
        if out and i <= out[-1]:
            raise FrozenSetFileError(f"{name}:{k}: indices must be strictly increasing")
        out.append(i)
    if len(out) != N - K:
        raise FrozenSetFileError(f"{name}: expected {N - K} indices, found {len(out)}")
    return N, K, np.asarray(out, dtype=np.int64)


def read_frozen_set(path) -> tuple:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise FrozenSetFileError(f"{p}: {e.strerror}") from None
    return parse_frozen_set(text, str(p))


# ---------------------------------------------------------------- helpers


def _code_pair(s: str) -> tuple:
    try:
        N, K = (int(x) for x in s.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,K, got {s!r}") from None
    return N, K


def _int_pair(s: str) -> tuple:
    try:
        a, b = (int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers a,b, got {s!r}") from None
    return a, b


def _float_list(s: str) -> list:
    """``"1.0,1.5"`` or ``"1.0:2.0:0.1"`` (inclusive range)."""
    try:
        if ":" in s:
            lo, hi, step = (float(x) for x in s.split(":"))
            if step <= 0:
                raise ValueError
            count = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return [round(lo + k * step, 10) for k in range(count)]
        return [float(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {s!r}") from None


def _int_list(s: str) -> list:
    try:
        return [int(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {s!r}") from None


def _echo(title: str, items: dict, out=None) -> None:
    out = out or sys.stdout
    print(f"# {title}", file=out)
    for k, v in items.items():
        print(f"# {k} = {v}", file=out)


def _outdir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ---------------------------------------------------------------- commands


def cmd_entropies(args) -> int:
    N = 1 << args.n
    R = args.rate
    _echo("entropies", {"n": args.n, "N": N, "EbN0_dB": args.ebn0, "R": R,
                        "recursion": args.recursion, "out": args.out})
    H = entropy_table(args.n, args.ebn0, R, args.recursion)
    seq = reliability_sequence(args.n, args.ebn0, R)
    mu = gaussian_approx_means(args.n, args.ebn0, R)
    out = _outdir(args.out)
    with open(out / "entropies.txt", "w") as fh:
        fh.write("level i H\n")
        for lvl, arr in enumerate(H.levels):
            for i, h in enumerate(arr):
                fh.write(f"{lvl} {i} {h:.12g}\n")
    with open(out / "reliability.txt", "w") as fh:
        fh.write("rank index mean weight\n")
        for pos, i in enumerate(seq.r):
            fh.write(f"{pos} {int(i)} {mu[i]:.12g} {int(i).bit_count()}\n")
    print(f"wrote {out / 'entropies.txt'} and {out / 'reliability.txt'}")
    return EXIT_OK


def _frozen_from_args(args) -> tuple:
    if args.frozen:
        return read_frozen_set(args.frozen)
    if args.code is None:
        raise FrozenSetFileError("give a frozen-set file or --code N,K with --reliability-ebn0")
    N, K = args.code
    n = log2_exact(N)
    if args.reliability_ebn0 is None:
        raise FrozenSetFileError("--reliability-ebn0 is required with --code")
    seq = reliability_sequence(n, args.reliability_ebn0, K / N)
    return N, K, seq.least_reliable(N - K)


def cmd_weights(args) -> int:
    N, K, frozen = _frozen_from_args(args)
    _echo("weights", {"N": N, "K": K, "source": args.frozen or "reliability",
                      "reliability_EbN0_dB": args.reliability_ebn0, "EbN0_dB": args.ebn0, "out": args.out})
    W = average_weight_distribution(N, complement(frozen, N))
    Path(args.out).write_text("t W\n" + W.to_text())
    low = [(t, w) for t, w in W.items() if w >= 0.5][:4]
    print("lowest weights: " + ", ".join(f"W{t}={w:.6g}" for t, w in low))
    for e in args.ebn0 or []:
        ub = union_bound(W, e, K / N)
        tb = tsb(W, N, e, K / N)
        print(f"EbN0 {e:g} dB: union {ub.raw:.6e} tsb {tb.value:.6e}" + (" (union fallback)" if tb.fallback else ""))
    return EXIT_OK


def _resolve_lambda(args, N: int, K: int) -> int:
    if args.lam is not None:
        return args.lam
    lam = default_lambda(N, K)
    if lam is None:
        raise FrozenSetFileError(f"no default lambda for ({N}, {K}); pass --lam")
    return lam


def cmd_bounds(args) -> int:
    N, K, frozen = read_frozen_set(args.frozen)
    n = log2_exact(N)
    variants = [v for v in args.variants.split(",") if v]
    for v in variants:
        if v not in VARIANTS:
            raise FrozenSetFileError(f"unknown variant {v!r}; choose from {','.join(VARIANTS)}")
    lam = _resolve_lambda(args, N, K) if "apx" in variants else args.lam
    if lam is not None and not 0 <= lam <= N:
        raise FrozenSetFileError(f"lambda must lie in [0, {N}]")
    R = args.rate if args.rate is not None else 0.5
    _echo("bounds", {"file": args.frozen, "N": N, "K": K, "entropy_EbN0_dB": args.ebn0, "R": R,
                     "lambda": lam, "variants": ",".join(variants), "out": args.out})
    H = entropy_table(n, args.ebn0, R)
    A = complement(frozen, N)
    out = _outdir(args.out)
    stem = Path(args.frozen).stem
    for v in variants:
        prof = profile(v, A, H, lam if v == "apx" else None)
        path = out / f"{stem}.{v}.txt"
        path.write_text("m D\n" + prof.to_text())
        print(f"{v} peak {prof.peak:.6f} at m={prof.argmax} -> {path}")
    return EXIT_OK


def _design_config(args) -> tuple:
    """Resolve (N, K, algorithm, cfg, entropy point, T_D grid) from presets and flags."""
    if args.paper_defaults is not None:
        N, K = args.paper_defaults
        if args.code is not None and tuple(args.code) != (N, K):
            raise FrozenSetFileError("--code and --paper-defaults disagree")
        base = preset(N, K).config(args.algorithm, **({"lam": args.lam} if args.lam is not None else {}))
        ent = preset(N, K).entropy_EbN0
    else:
        if args.code is None:
            raise FrozenSetFileError("give --code N,K or --paper-defaults N,K")
        N, K = args.code
        base = GeneticConfig(lam=_resolve_lambda(args, N, K))
        ent = 0.5
    over = {}
    for name, attr in [("T_POP", "t_pop"), ("theta", "theta"), ("S", "S"), ("B", "B"), ("X", "X"),
                       ("lam", "lam"), ("rho", "rho"), ("rng_seed", "seed"), ("design_EbN0", "design_ebn0"),
                       ("reliability_EbN0", "reliability_ebn0"), ("scoring", "scoring")]:
        val = getattr(args, attr)
        if val is not None:
            over[name] = val
    cfg = replace(base, **over)
    if args.entropy_ebn0 is not None:
        ent = args.entropy_ebn0
    log2_exact(N)
    if not 0 < K < N:
        raise FrozenSetFileError("K must lie in (0, N)")
    return N, K, cfg, ent, args.td


def _run_line(p, N: int) -> str:
    frozen = ",".join(str(int(i)) for i in p.frozen_set)
    return (f"{p.T_D:g} {p.seed} {p.iterations} {p.found_at} {p.d_apx_peak!r} {p.p_ml_union!r} "
            f"{p.p_ml.value!r} {p.p_sc.value!r} {frozen}")


def cmd_design(args) -> int:
    N, K, cfg, ent, grid = _design_config(args)
    n = log2_exact(N)
    echo = {"N": N, "K": K, "algorithm": args.algorithm, "T_D_grid": ",".join(f"{t:g}" for t in grid),
            "entropy_EbN0_dB": ent, **{f.name: getattr(cfg, f.name) for f in fields(cfg) if f.name != "T_D"},
            "out": args.out}
    _echo("design", echo)
    H = entropy_table(n, ent, K / N)
    seq = reliability_sequence(n, cfg.reliability_EbN0, K / N)
    out = _outdir(args.out)
    points, lines, skipped = [], [], []
    total = 0.0
    for td in grid:
        point_cfg = replace(cfg, T_D=float(td))
        try:
            winner, runs, wall = best_of_runs(args.algorithm, point_cfg, N, K, H, seq)
        except InfeasibleDesign as e:
            log.warning("T_D=%g skipped: %s", td, e)
            print(f"T_D {td:g}: infeasible, skipped")
            skipped.append(td)
            continue
        total += wall
        points.extend(runs)
        lines.extend(_run_line(p, N) for p in runs)
        its = np.mean([p.iterations for p in runs])
        print(f"T_D {td:g}: best d_apx {winner.d_apx_peak:.4f} P_ML {winner.p_ml.value:.4e} "
              f"P_SC {winner.p_sc.value:.4e} mean iterations {its:.1f} wall {wall:.2f}s")
    header = "".join(f"# {k} = {v}\n" for k, v in echo.items() if k != "out")
    (out / "runs.txt").write_text(
        header + "T_D seed iterations found_at d_apx_peak p_ml_union p_ml_tsb p_sc frozen\n"
        + "".join(ln + "\n" for ln in lines))
    if not points:
        print("no feasible T_D in the grid", file=sys.stderr)
        return EXIT_INFEASIBLE
    front = pareto_front(points)
    sets = _outdir(out / "sets")
    rows = []
    for p in front:
        name = f"F_td{p.T_D:g}_seed{p.seed}.txt"
        write_frozen_set(sets / name, N, p.frozen_set)
        rows.append(f"{p.d_apx_peak!r} {p.p_ml.value!r} {p.p_sc.value!r} sets/{name}\n")
    (out / "front.txt").write_text(header + "d_apx_peak p_ml p_sc frozen_set_file\n" + "".join(rows))
    print(f"{len(points)} runs, {len(front)} front points, total wall {total:.1f}s -> {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    loaded = [read_frozen_set(f) for f in args.frozen]
    N, K = loaded[0][:2]
    if any((n_, k_) != (N, K) for n_, k_, _ in loaded):
        raise FrozenSetFileError("all frozen-set files must share N and K")
    if args.paper_defaults is not None and tuple(args.paper_defaults) != (N, K):
        raise FrozenSetFileError("--paper-defaults does not match the frozen-set files")
    default_target = preset(N, K).target_errors if (N, K) in PRESETS else StopRule.for_length(N).target_errors
    stop = StopRule(args.target_errors or default_target, args.max_frames)
    ids = [Path(f).stem for f in args.frozen]
    _echo("simulate", {"files": ",".join(args.frozen), "N": N, "K": K, "L": ",".join(map(str, args.L)),
                       "EbN0_dB": ",".join(f"{e:g}" for e in args.ebn0), "target_errors": stop.target_errors,
                       "max_frames": stop.max_frames, "stop_on": args.stop_on, "seed": args.seed,
                       "precoding": args.precoding, "metric": "min-sum" if args.min_sum else "exact",
                       "out": args.out})
    make = PrecodedCode.with_omega if args.precoding == "omega" else PrecodedCode.plain
    codes = [make(N, fr) for _, _, fr in loaded]
    rows = []
    for L in args.L:
        cfg = DecoderConfig(list_size=L, exact=not args.min_sum)
        for e in args.ebn0:
            res = paired_simulation(codes, cfg, e, stop, args.seed, ids, stop_on=args.stop_on)
            for r in res:
                rows.append(r.row())
                print(r.row())
    Path(args.out).write_text(ROW_HEADER + "\n" + "".join(r + "\n" for r in rows))
    return EXIT_OK


def cmd_export(args) -> int:
    if args.what == "reliability":
        if args.code is None or args.reliability_ebn0 is None:
            raise FrozenSetFileError("export reliability needs --code N,K and --reliability-ebn0")
        N, K = args.code
        _echo("export", {"what": "reliability", "N": N, "K": K, "EbN0_dB": args.reliability_ebn0,
                         "out": args.out})
        seq = reliability_sequence(log2_exact(N), args.reliability_ebn0, K / N)
        write_frozen_set(args.out, N, seq.least_reliable(N - K))
    else:
        if not args.frozen:
            raise FrozenSetFileError("export code needs a frozen-set file")
        N, K, frozen = read_frozen_set(args.frozen)
        _echo("export", {"what": "code", "file": args.frozen, "N": N, "K": K,
                         "precoding": args.precoding, "out": args.out})
        code = (PrecodedCode.with_omega if args.precoding == "omega" else PrecodedCode.plain)(N, frozen)
        body = [f"{N} {K}\n"]
        for f, row in zip(code.frozen, code.coef):
            deps = code.info[row.astype(bool)]
            body.append(f"{int(f)}:" + "".join(f" {int(a)}" for a in deps) + "\n")
        Path(args.out).write_text("".join(body))
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polardesign", description="Frozen-set design for precoded polar codes.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropies", help="entropy table and reliability order")
    p.add_argument("--n", type=int, required=True, help="log2 of the code length")
    p.add_argument("--ebn0", type=float, required=True, help="Eb/N0 in dB")
    p.add_argument("--rate", type=float, default=0.5)
    p.add_argument("--recursion", choices=("dual", "conserving"), default="dual")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_entropies)

    p = sub.add_parser("weights", help="ensemble-averaged weight distribution and ML bounds")
    p.add_argument("frozen", nargs="?", help="frozen-set file")
    p.add_argument("--code", type=_code_pair, help="N,K (reliability frozen set instead of a file)")
    p.add_argument("--reliability-ebn0", type=float)
    p.add_argument("--ebn0", type=_float_list, help="evaluate union bound and TSB at these Eb/N0")
    p.add_argument("--out", default="weights.txt")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("bounds", help="list-size profiles")
    p.add_argument("frozen", help="frozen-set file")
    p.add_argument("--ebn0", type=float, default=0.5, help="entropy operating point (dB)")
    p.add_argument("--rate", type=float, help="rate used for the operating point (default 0.5)")
    p.add_argument("--lam", type=int, help="apx threshold (default by N,K)")
    p.add_argument("--variants", default=",".join(VARIANTS))
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("design", help="genetic design over a T_D grid")
    p.add_argument("--code", type=_code_pair, help="N,K")
    p.add_argument("--paper-defaults", type=_code_pair, metavar="N,K",
                   help="published parameters for this code size")
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="tb")
    p.add_argument("--td", type=_float_list, default=_float_list("1.0:2.0:0.1"),
                   help="T_D grid, list a,b,c or range lo:hi:step")
    p.add_argument("--t-pop", type=int)
    p.add_argument("--theta", type=int)
    p.add_argument("--S", type=int)
    p.add_argument("--B", type=_int_pair, help="B_l,B_l+1")
    p.add_argument("--X", type=_int_pair, help="X_l,X_l+1")
    p.add_argument("--lam", type=int)
    p.add_argument("--rho", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--design-ebn0", type=float)
    p.add_argument("--reliability-ebn0", type=float)
    p.add_argument("--entropy-ebn0", type=float)
    p.add_argument("--scoring", choices=("union", "tsb-final"))
    p.add_argument("--out", default="design_out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="SCL frame-error simulation")
    p.add_argument("frozen", nargs="+", help="frozen-set files (paired on common noise)")
    p.add_argument("--L", type=_int_list, default=[1], help="list sizes, comma separated")
    p.add_argument("--ebn0", type=_float_list, required=True)
    p.add_argument("--paper-defaults", type=_code_pair, metavar="N,K")
    p.add_argument("--target-errors", type=int)
    p.add_argument("--max-frames", type=int, default=10_000_000)
    p.add_argument("--stop-on", choices=("any", "all"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precoding", choices=("omega", "none"), default="omega")
    p.add_argument("--min-sum", action="store_true", help="min-sum path metric instead of exact")
    p.add_argument("--out", default="results.txt")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export", help="frozen sets and precoding expressions as text")
    p.add_argument("what", choices=("reliability", "code"))
    p.add_argument("frozen", nargs="?", help="frozen-set file (for 'code')")
    p.add_argument("--code", type=_code_pair)
    p.add_argument("--reliability-ebn0", type=float)
    p.add_argument("--precoding", choices=("omega", "none"), default="omega")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleDesign as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (MemoryError, OverflowError) as e:
        print(f"error: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
