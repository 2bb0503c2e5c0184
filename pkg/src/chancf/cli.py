"""Command-line experiments for base-m continued fractions.

    chancf expand    --m 2 --x 7/10 --digits 10
    chancf constants --m 2 --m-max 10 --format json
    chancf kuzmin    --m 2 --grid 4097 --iters 40
    chancf simulate  --m 2 --samples 1000000 --iters 12 --seed 42
    chancf fib       --m 2 --n 200000 --seeds 8
    chancf zeta      --classical --s 0.5
    chancf replay    run.csv.manifest.json

Every command writes a manifest (``<out>.manifest.json`` with ``--out``,
one JSON line on stderr otherwise) holding the argument vector needed to
reproduce the output byte for byte via ``replay``.  Results never contain
timings, so they are deterministic.

Exit codes: 0 success, 2 usage or domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import __version__
from .cf_core import as_params, evaluate_cf, expand
from .errors import ChanCFError, DegenerateFit, DomainError, NumericalFailure
from .ergodic_stats import (
    SimulationConfig,
    entropy,
    khinchin_chi,
    levy_growth,
    levy_growth_bound,
    random_fibonacci,
    simulate_pushforward,
)
from .invariant_measure import MeasureSpec
from .transfer_operator import estimate_rate, kuzmin_run, q_bound
from .zeta_mellin import chan_zeta, gauss_map_zeta

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


# ---------------------------------------------------------------------------
# parsing helpers

def parse_x(text: str) -> Fraction:
    """Exact value of a decimal string or a p/q literal."""
    try:
        if "/" in text:
            p, q = text.split("/", 1)
            return Fraction(int(p), int(q))
        return Fraction(Decimal(text))
    except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
        raise DomainError(f"cannot parse x = {text!r}") from exc


def parse_s(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise DomainError(f"cannot parse s = {text!r}") from exc


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _base(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("m must be an integer >= 2")
    return v


# ---------------------------------------------------------------------------
# output

def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v + 0.0, ".17g")  # + 0.0 folds -0 into 0
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render(columns, rows, fmt: str, meta: dict | None = None) -> str:
    """CSV (header row, 17 significant digits, '#' trailer for ``meta``) or
    JSON ({"rows": [...], **meta}) text for a table."""
    meta = meta or {}
    if fmt == "json":
        doc = {"columns": list(columns),
               "rows": [{c: _json_value(v) for c, v in zip(columns, r)} for r in rows]}
        doc.update({k: _json_value(v) for k, v in meta.items()})
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    for k, v in meta.items():
        buf.write(f"# {k}={_cell(v)}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns the output text

def cmd_expand(args) -> str:
    p = as_params(args.m)
    x = parse_x(args.x)
    if args.validated:
        seq = expand(args.x, args.digits, p, precision_bits=args.precision_bits,
                     strict=False)
    else:
        seq = expand(x, args.digits, p)
    if seq.digits:
        err = float(abs(evaluate_cf(seq.digits, p, exact=True) - x))
    else:
        err = float(x)
    listing = "[" + ",".join(str(d) for d in seq.digits) + "]"
    if args.format == "text":
        words = [listing]
        if seq.terminated:
            words.append("terminated")
        words += [f"reliable_count={seq.reliable_count}", f"mode={seq.mode}",
                  f"reconstruction_error={err:.17g}"]
        return " ".join(words) + "\n"
    cols = ("digits", "terminated", "reliable_count", "mode", "reconstruction_error")
    return render(cols, [(listing, seq.terminated, seq.reliable_count, seq.mode, err)],
                  args.format)


def cmd_constants(args) -> str:
    m_max = args.m_max if args.m_max is not None else args.m
    if m_max < args.m:
        raise DomainError("--m-max must be >= --m")
    cols = ("m", "k_m", "q_m", "q_exceeds_one", "chi_m", "levy_growth",
            "levy_bound", "entropy_quadrature", "entropy_identity")
    rows = []
    for m in range(args.m, m_max + 1):
        p = as_params(m)
        q = q_bound(p)
        h = entropy(p)
        rows.append((m, p.k_m, q, q >= 1, khinchin_chi(p).value, levy_growth(p).value,
                     levy_growth_bound(p), h.quadrature.value, h.identity.value))
    return render(cols, rows, args.format)


def cmd_kuzmin(args) -> str:
    run = kuzmin_run(args.m, grid_size=args.grid, iters=args.iters, start=args.start,
                     representation=args.representation, tol=args.tol)
    e = run.sup_errors
    rows = [(n, float(e[n]), float(e[n] / e[n - 1]) if n and e[n - 1] > 0 else None)
            for n in range(len(e))]
    window = (args.window[0], min(args.window[1], args.iters))
    try:
        rep = estimate_rate(e, window, floor=run.floor)
        meta = {"fitted_rate": rep.fitted_rate,
                "window": f"{rep.window[0]}..{rep.window[1]}"}
    except DegenerateFit as exc:
        meta = {"fitted_rate": None, "rate_note": str(exc)}
    meta["noise_floor"] = run.floor
    return render(("n", "sup_error", "ratio"), rows, args.format, meta)


def cmd_simulate(args) -> str:
    p = as_params(args.m)
    initial = MeasureSpec() if args.start == "lebesgue" else MeasureSpec("gamma", p)
    cfg = SimulationConfig(p, args.samples, args.iters, seed=args.seed, initial=initial)
    rep = simulate_pushforward(cfg, threads=args.threads)
    rows = [(n, float(k)) for n, k in enumerate(rep.ks)]
    return render(("n", "ks"), rows, args.format, {"sampling_noise": rep.sampling_noise})


def cmd_fib(args) -> str:
    p = as_params(args.m)
    seeds = tuple(range(args.seed, args.seed + args.seeds))
    res = random_fibonacci(p, args.n, seeds=seeds)
    rows = [(s, float(g)) for s, g in zip(seeds, res.estimates)]
    meta = {"mean": res.mean, "stderr": res.stderr, "levy_growth": levy_growth(p).value}
    return render(("seed", "growth"), rows, args.format, meta)


def cmd_zeta(args) -> str:
    s = parse_s(args.s)
    if args.classical:
        r = gauss_map_zeta(s, tol=args.tol)
        label = "gauss"
    else:
        r = chan_zeta(s, args.m, tol=args.tol)
        label = f"chan_m{args.m}"
    v = complex(r.value)
    cols = ("map", "s_re", "s_im", "re", "im", "error", "terms")
    return render(cols, [(label, s.real, s.imag, v.real, v.imag, r.error, r.terms)],
                  args.format)


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chancf", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, formats=("csv", "json"), default="csv"):
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--out", help="write results here (manifest beside it)")
        sp.add_argument("--threads", type=_positive, default=1)

    sp = sub.add_parser("expand", help="digits of x")
    sp.add_argument("--m", type=_base, default=2)
    sp.add_argument("--x", required=True, help="decimal or p/q")
    sp.add_argument("--digits", type=_positive, default=20)
    sp.add_argument("--validated", action="store_true",
                    help="treat x as a decimal enclosure and use interval arithmetic")
    sp.add_argument("--precision-bits", type=_positive, default=None)
    common(sp, ("text", "csv", "json"), "text")
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("constants", help="k_m, q_m, chi_m, growth and entropy")
    sp.add_argument("--m", type=_base, default=2)
    sp.add_argument("--m-max", type=_base, default=None)
    common(sp)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("kuzmin", help="Gauss-Kuzmin functional iteration")
    sp.add_argument("--m", type=_base, default=2)
    sp.add_argument("--grid", type=int, default=4097)
    sp.add_argument("--iters", type=int, default=40)
    sp.add_argument("--start", choices=("lebesgue", "omega"), default="lebesgue")
    sp.add_argument("--representation", choices=("residual", "direct"), default="residual")
    sp.add_argument("--window", type=int, nargs=2, default=(5, 15), metavar=("FIRST", "LAST"))
    sp.add_argument("--tol", type=float, default=1e-8)
    common(sp)
    sp.set_defaults(func=cmd_kuzmin)

    sp = sub.add_parser("simulate", help="Monte-Carlo pushforward KS distances")
    sp.add_argument("--m", type=_base, default=2)
    sp.add_argument("--samples", type=_positive, default=1_000_000)
    sp.add_argument("--iters", type=int, default=12)
    sp.add_argument("--seed", type=_u64, default=0)
    sp.add_argument("--start", choices=("lebesgue", "omega"), default="lebesgue",
                    help="omega starts from the invariant measure")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fib", help="random Fibonacci growth exponents")
    sp.add_argument("--m", type=_base, default=2)
    sp.add_argument("--n", type=int, default=200_000)
    sp.add_argument("--seeds", type=_positive, default=8, help="number of seeds")
    sp.add_argument("--seed", type=_u64, default=0, help="first seed")
    common(sp)
    sp.set_defaults(func=cmd_fib)

    sp = sub.add_parser("zeta", help="Mellin-type zeta integrals")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--classical", action="store_true", help="Gauss map (Riemann zeta)")
    g.add_argument("--m", type=_base, default=2)
    sp.add_argument("--s", required=True, help="complex number, e.g. 0.25+0.75j")
    sp.add_argument("--tol", type=float, default=1e-12)
    common(sp)
    sp.set_defaults(func=cmd_zeta)

    sp = sub.add_parser("replay", help="re-run a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", help="override the recorded output path")
    sp.set_defaults(func=None)
    return ap


def _manifest(argv, args, wall: float) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"command": args.command, "argv": list(argv), "parameters": params,
            "seed": params.get("seed"), "version": __version__,
            "wall_time_s": round(wall, 6)}


def _run(argv, stdout, stderr) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "replay":
        with open(args.manifest) as fh:
            recorded = json.load(fh)["argv"]
        if args.out:
            recorded = _replace_out(recorded, args.out)
        return _run(recorded, stdout, stderr)
    t0 = time.perf_counter()
    try:
        text = args.func(args)
    except NumericalFailure as exc:
        print(f"chancf: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except (ChanCFError, ValueError) as exc:
        print(f"chancf: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_USAGE
    manifest = json.dumps(_manifest(argv, args, time.perf_counter() - t0), sort_keys=True)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w") as fh:
            fh.write(manifest + "\n")
    else:
        stdout.write(text)
        print(manifest, file=stderr)
    return 0


def _replace_out(argv, out):
    argv = list(argv)
    if "--out" in argv:
        argv[argv.index("--out") + 1] = out
    else:
        argv += ["--out", out]
    return argv


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    return _run(argv, sys.stdout, sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
