"""Command-line front end.

Exit codes: 0 when the tested structure holds, 1 when it does not, 2 on
invalid input or solver failure. Output indices on the command line are
1-based.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .coordinated import algorithm3, algorithm4, verify_theorem3_properties
from .errors import SSGrangerError, StructureViolation
from .granger import TOL_ZERO, check_noncausality
from .model import Partition, covariance_to_dict, dump_json, load_json
from .realization import ho_kalman, markov_from_fact, markov_from_ss
from .simulate import SimulationConfig, empirical_covariances, read_csv, simulate_path, write_csv
from .solvers import TOL_RANK_REL

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _indices(text):
    if text is None:
        return None
    try:
        idx = [int(t) - 1 for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise CliError(f"bad index list {text!r}") from exc
    if not idx or min(idx) < 0:
        raise CliError(f"indices must be positive: {text!r}")
    return idx


def _sizes(text):
    try:
        sizes = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise CliError(f"bad block sizes {text!r}") from exc
    return sizes


def _emit(doc, args):
    text = dump_json(doc, pretty=getattr(args, "pretty", False))
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _print_matrices(named, stream=sys.stderr):
    with np.printoptions(precision=4, suppress=True, linewidth=120):
        for name, M in named:
            print(f"{name} =\n{np.asarray(M)}", file=stream)


def _load(path):
    try:
        return load_json(path)
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _empirical(args):
    kw = {}
    if args.order is not None:
        kw["order"] = args.order
    if args.n_obs is not None:
        kw["n_obs"] = args.n_obs
    return kw


def cmd_check_granger(args) -> int:
    kind, obj = _load(args.input)
    if kind == "model":
        model, part = obj
        p = model.p
    else:
        part, p = None, obj.p
    target = _indices(args.target)
    if target is None:
        if part is None:
            raise CliError("--target is required when the file has no partition")
        part.check(p)
        target = part.target()
    source = _indices(args.source)
    if source is None:
        source = [k for k in range(p) if k not in target]
    if max(source + target) >= p:
        raise CliError(f"indices exceed the output dimension {p}")
    if set(source) & set(target):
        raise CliError("--source and --target overlap")
    kw = _empirical(args) if kind == "cov" else {}
    rep = check_noncausality(obj if kind == "cov" else model, source, target,
                             args.tol_zero, args.tol_rank, args.M, **kw)
    rep.flags["source"] = [k + 1 for k in source]
    rep.flags["target"] = [k + 1 for k in target]
    rep.flags["output_order"] = [k + 1 for k in rep.flags["output_order"]]
    if args.pretty and rep.derived_model is not None:
        km = rep.derived_model
        _print_matrices([("A", km.A), ("K", km.K), ("C", km.C), ("Qe", km.Qe)])
    _emit(rep, args)
    return EXIT_TRUE if rep.verdict else EXIT_FALSE


def cmd_coordinate(args) -> int:
    kind, obj = _load(args.input)
    if args.cut is not None:
        cut = Partition(tuple(_sizes(args.cut)))
    elif kind == "model" and obj[1] is not None:
        cut = obj[1]
    else:
        raise CliError("--cut is required when the file has no partition")
    try:
        if kind == "model":
            model = obj[0]
            cm = algorithm3(model, cut, args.tol_zero, args.tol_rank)
            seq = markov_from_ss(model, max(2 * model.n + 2, 10))
        else:
            seq = obj
            cm = algorithm4(seq, cut, args.M, args.tol_rank, args.tol_zero, **_empirical(args))
    except StructureViolation as exc:
        i, j = exc.pair
        doc = {"verdict": False, "error": str(exc),
               "pair": [i + 1, None if j is None else j + 1],
               "residuals": exc.residuals}
        _emit(doc, args)
        return EXIT_FALSE
    props = verify_theorem3_properties(cm, seq)
    doc = cm.to_dict()
    doc["properties"] = props.to_dict()
    if args.pretty:
        _print_matrices([("A", cm.model.A), ("K", cm.model.K), ("C", cm.model.C)])
    _emit(doc, args)
    return EXIT_TRUE if cm.report.verdict else EXIT_FALSE


def cmd_simulate(args) -> int:
    kind, obj = _load(args.input)
    if kind != "model":
        raise CliError("simulate needs a model document")
    try:
        cfg = SimulationConfig(args.n, args.burn_in, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    y = simulate_path(obj[0], cfg)
    write_csv(y, args.out if args.out else sys.stdout)
    return EXIT_TRUE


def cmd_cov(args) -> int:
    try:
        y = read_csv(args.input)
        seq = empirical_covariances(y, args.max_lag)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    _emit(covariance_to_dict(seq), args)
    return EXIT_TRUE


def cmd_realize(args) -> int:
    kind, obj = _load(args.input)
    if kind == "model":
        seq = markov_from_ss(obj[0], 2 * args.M)
    else:
        seq = obj
    fact = ho_kalman(seq, args.M, args.tol_rank, order=args.order)
    rt = markov_from_fact(fact, 2 * args.M).max_abs_diff(seq.truncate(2 * args.M))
    doc = fact.to_dict()
    doc["degree"] = fact.n
    doc["round_trip_residual"] = rt
    print(f"estimated McMillan degree: {fact.n}", file=sys.stderr)
    with np.printoptions(precision=4, linewidth=120):
        print(f"singular values: {fact.singular_values}", file=sys.stderr)
    _emit(doc, args)
    return EXIT_TRUE


def _common(sp, M=True):
    sp.add_argument("--tol-zero", type=float, default=TOL_ZERO,
                    help="relative tolerance for must-vanish blocks (use 5e-2 for estimates)")
    sp.add_argument("--tol-rank", type=float, default=TOL_RANK_REL,
                    help="relative singular value cutoff for rank decisions")
    if M:
        sp.add_argument("--M", type=int, default=5, help="Hankel block size")
        sp.add_argument("--order", type=int, default=None,
                        help="fix the realization order instead of the rank decision")
        sp.add_argument("--n-obs", type=int, default=None,
                        help="fix the dimension of the target-observable state")
    sp.add_argument("--out", default=None, help="output file (default stdout)")
    sp.add_argument("--pretty", action="store_true", help="indented JSON and matrix printout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ssgranger", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("check-granger", help="test whether --source does not Granger cause --target")
    sp.add_argument("input", help="model or covariance JSON")
    sp.add_argument("--source", help="1-based output indices, e.g. 1,2 (default: complement)")
    sp.add_argument("--target", help="1-based output indices (default: file partition target)")
    _common(sp)
    sp.set_defaults(func=cmd_check_granger)

    sp = sub.add_parser("coordinate", help="build a coordinated-form representation")
    sp.add_argument("input", help="model or covariance JSON")
    sp.add_argument("--cut", help="output block sizes r1,...,rn; the last block coordinates")
    _common(sp)
    sp.set_defaults(func=cmd_coordinate)

    sp = sub.add_parser("simulate", help="simulate an output path as CSV")
    sp.add_argument("input", help="model JSON")
    sp.add_argument("--n", type=int, required=True, help="number of samples")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--burn-in", type=int, default=0)
    sp.add_argument("--out", default=None, help="CSV file (default stdout)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("cov", help="empirical covariances of a CSV path")
    sp.add_argument("input", help="CSV with header y1..yp")
    sp.add_argument("--max-lag", type=int, default=10)
    sp.add_argument("--out", default=None)
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=cmd_cov)

    sp = sub.add_parser("realize", help="Hankel-SVD realization of a covariance sequence")
    sp.add_argument("input", help="covariance (or model) JSON")
    sp.add_argument("--M", type=int, default=5)
    sp.add_argument("--tol-rank", type=float, default=TOL_RANK_REL)
    sp.add_argument("--order", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=cmd_realize)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_TRUE
    try:
        return args.func(args)
    except (CliError, SSGrangerError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
