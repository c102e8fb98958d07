"""Command-line front end: ``modnr {compute,verify,counterexample}``.

Exit codes: 0 success, 1 failed checks, 2 unreadable input, 3 internal
cross-check failure.  Reports are stable-keyed JSON.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .harness import CounterexampleError, SuiteConfig, counterexample, run_suite
from .hmodule import Frame
from .oprep import op_norm, spectral_radius
from .radius import AscentConfig, CrossCheckError, RadiusResult, module_nr, snr
from .serialize import ParseError, dumps, frame_to_json, load_operator

COMPUTE_SCHEMA = "modnr.compute/1"
COUNTEREXAMPLE_SCHEMA = "modnr.counterexample/1"
QUANTITIES = ("w", "wtilde", "norm", "srad", "all")

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_CROSSCHECK = 0, 1, 2, 3


def _positive_float(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not val > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def _non_negative_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return val


def _positive_int(text: str) -> int:
    val = _non_negative_int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=1e-8, help="radius tolerance (default 1e-8)")
    common.add_argument("--seed", type=int, default=42, help="seed for all randomness (default 42)")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="modnr", description="Numerical radii of operators on A^k.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="radii and norms of one operator file")
    p.add_argument("--input", required=True, help="operator JSON file")
    p.add_argument("--quantity", choices=QUANTITIES, default="all")
    p.add_argument("--restarts", type=_non_negative_int, default=64,
                   help="random starts of the module radius ascent (default 64)")

    p = sub.add_parser("verify", parents=[common], help="run the property suite")
    p.add_argument("--trials", type=_positive_int, default=200, help="trials per family and shape (default 200)")
    p.add_argument("--restarts", type=_non_negative_int, default=64)

    sub.add_parser("counterexample", parents=[common], help="reproduce the M_2(C) counterexample")
    return parser


def _emit(text: str, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _radius_json(r: RadiusResult) -> dict:
    out = {"value": r.value, "method": r.method, "exactness": r.exactness, "upper": r.upper}
    if isinstance(r.witness, Frame):
        out["witness"] = {"frame": frame_to_json(r.witness)}
    elif r.witness is not None:
        out["witness"] = {"theta": float(r.witness)}
    return out


def cmd_compute(args) -> int:
    try:
        t = load_operator(args.input)
    except ParseError as exc:
        print(f"modnr: cannot parse {args.input}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"modnr: cannot read {args.input}: {exc.strerror}", file=sys.stderr)
        return EXIT_PARSE

    want = set(QUANTITIES[:-1]) if args.quantity == "all" else {args.quantity}
    quantities, timings = {}, {}

    def timed(name, fn):
        start = time.perf_counter()
        val = fn()
        timings[name] = time.perf_counter() - start
        return val

    try:
        sn = None
        if want & {"wtilde", "w"}:
            sn = timed("wtilde", lambda: snr(t, args.tol))
        if "wtilde" in want:
            q = _radius_json(sn)
            q.setdefault("witness", {})["block"] = sn.info["block"]
            q["route_diff"] = sn.info["route_diff"]
            quantities["wtilde"] = q
        if "w" in want:
            cfg = AscentConfig(restarts=args.restarts, seed=args.seed, tol=args.tol)
            w = timed("w", lambda: module_nr(t, cfg, spatial=sn))
            q = _radius_json(w)
            q["info"] = {k: v for k, v in w.info.items() if isinstance(v, (int, float, str))}
            quantities["w"] = q
    except CrossCheckError as exc:
        print(f"modnr: internal cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    if "norm" in want:
        quantities["norm"] = {"value": timed("norm", lambda: op_norm(t)), "exactness": "exact"}
    if "srad" in want:
        quantities["srad"] = {"value": timed("srad", lambda: spectral_radius(t)),
                              "method": "gelfand", "exactness": "estimate"}

    report = {
        "schema": COMPUTE_SCHEMA,
        "input": args.input,
        "operator": {"sig": t.signature.to_list(), "k": t.k},
        "config": {"tol": args.tol, "seed": args.seed, "restarts": args.restarts},
        "values": {name: q["value"] for name, q in quantities.items()},
        "quantities": quantities,
        "timings": timings,
    }
    _emit(dumps(report), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = SuiteConfig(trials=args.trials, seed=args.seed, tol=args.tol, restarts=args.restarts)
    report = run_suite(cfg)
    _emit(dumps(report.to_json()), args.output)
    # timing goes to stderr so the report itself stays byte-reproducible
    print(f"modnr verify: {report.failed} failed checks, {report.wall_clock:.1f} s", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_counterexample(args) -> int:
    try:
        ce = counterexample(args.tol)
    except CounterexampleError as exc:
        print(f"modnr: {exc}", file=sys.stderr)
        return EXIT_FAILED
    _emit(dumps({"schema": COUNTEREXAMPLE_SCHEMA, **ce}), args.output)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"compute": cmd_compute, "verify": cmd_verify, "counterexample": cmd_counterexample}
    return handler[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
