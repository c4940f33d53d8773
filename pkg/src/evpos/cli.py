"""Command-line front end: ``evpos analyze | simulate | roots | certify``."""
import argparse
import csv
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, is_dataclass

import numpy as np

from . import __version__
from . import acceptance
from . import classify as C
from . import dynamics
from . import models as M
from .errors import ModelError, NumericalFailure
from .lattice import LatticeContext
from .numkernel import is_real
from .special import bose_char_k0, count_roots, delay_char, find_roots, network_char

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


# deterministic JSON ------------------------------------------------------------

def _plain(obj):
    """Convert results to JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _encode(v, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v[k], indent, level + 1)}" for k in sorted(v)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, list):
        if not v:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(x, indent, level + 1) for x in v) + "\n" + end + "]"
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format(v, ".17g")
    return json.dumps(v)


def dumps(obj, indent=2):
    """JSON with sorted keys, 17 significant digits and infinities as strings."""
    return _encode(_plain(obj), indent, 0) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# parameters --------------------------------------------------------------------

def _parse_value(s):
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    return s


def parse_params(items):
    """``["a=1", "b=0.2,0.4"]`` -> list of parameter dicts (Cartesian product)."""
    keys, choices = [], []
    for item in items or []:
        if "=" not in item:
            raise ModelError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        keys.append(k.strip())
        choices.append([_parse_value(x) for x in v.split(",")])
    return [dict(zip(keys, combo)) for combo in itertools.product(*choices)]


def load_matrix(path):
    """Read ``{"n": n, "re": [...], "im": [...]}`` (row-major)."""
    try:
        with open(path) as fh:
            data = json.load(fh)
        n = int(data["n"])
        re = np.asarray(data["re"], float)
        im = np.asarray(data.get("im", np.zeros(n * n)), float)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ModelError(f"malformed matrix file {path}: {exc}") from None
    if re.size != n * n or im.size != n * n:
        raise ModelError(f"matrix file {path}: expected {n * n} entries")
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise ModelError(f"matrix file {path}: non-finite entries")
    A = (re + 1j * im).reshape(n, n)
    return A.real.copy() if not np.any(im) else A


def _reference(choice, n):
    if choice in (None, "ones"):
        return np.ones(n)
    x = np.arange(1, n + 1) / (n + 1.0)
    if choice == "dist":
        return np.minimum(x, 1 - x)
    if choice == "dist2":
        return np.minimum(x, 1 - x) ** 2
    try:
        with open(choice) as fh:
            u = np.asarray(json.load(fh), float)
    except (OSError, ValueError) as exc:
        raise ModelError(f"cannot read u from {choice}: {exc}") from None
    if u.size != n:
        raise ModelError("u has the wrong length")
    return u


# analyze -----------------------------------------------------------------------

def _matrix_report(A, ctx, opts, predicted=None):
    from .spectral import spectrum_report
    rep = spectrum_report(A, opts.tol_cluster)
    sc = C.classify_semigroup(A, ctx, opts)
    out = {"spectrum": rep.summary(), "semigroup": sc.to_dict(),
           "projection": None if sc.projection is None else sc.projection.to_dict()}
    if rep.dominant and is_real(A):
        lam0 = rep.clusters[rep.peripheral[0]].center.real
        out["resolvent"] = C.classify_resolvent(A, lam0, ctx, opts).to_dict()
    else:
        out["resolvent"] = None
    if predicted is not None:
        out["predicted"] = predicted
    return out, sc


def _simulator_report(bundle):
    out = {"predicted": bundle.predicted}
    if bundle.name == "network_flow":
        f = bundle.extras["char"]
        rect = (-0.01, 1.0, -40.0, 40.0)
        rs = find_roots(f, rect)
        out["spectrum"] = {"roots": rs.to_dict(), "det_S_0": abs(complex(f(0.0))),
                           "count_re_ge_-0.05": count_roots(f, (-0.05, 1.0, -40.0, 40.0))}
    elif bundle.name == "delay":
        rs = find_roots(bundle.extras["char"], (-0.01, 2.0, -60.0, 60.0))
        out["spectrum"] = {"roots": rs.to_dict()}
    elif bundle.name == "bose_disk":
        out["analysis"] = bundle.extras["analysis"]
    return out


def analyze_one(name, params, matrix=None, u=None, p=None, tol_cluster=None, seed=0):
    """Full analysis report for one model (or a user matrix) as a dict."""
    report = {"tool_version": __version__, "seed": int(seed)}
    np.random.seed(seed)
    if matrix is not None:
        A = load_matrix(matrix)
        n = A.shape[0]
        ctx = LatticeContext(n, p if p is not None else np.inf, None, _reference(u, n))
        report["model"] = {"name": "matrix", "file": matrix, "params": {}}
        opts = C.ClassifyOptions(tol_cluster=tol_cluster)
        body, _ = _matrix_report(A, ctx, opts)
    else:
        b = M.build(name, **params)
        report["model"] = {"name": b.name, "params": b.params}
        if b.A is None:
            opts = C.ClassifyOptions(tol_cluster=tol_cluster)
            body = _simulator_report(b)
        else:
            ctx = b.ctx
            if u is not None or p is not None:
                ctx = LatticeContext(b.n, p if p is not None else b.ctx.p, b.ctx.weights,
                                     _reference(u, b.n) if u is not None else b.ctx.u)
            opts = M.classify_options(b, **({"tol_cluster": tol_cluster} if tol_cluster else {}))
            body, sc = _matrix_report(b.A, ctx, opts, b.predicted)
            body["prediction_mismatches"] = M.prediction_mismatches(b, sc)
    report.update(body)
    report["tolerances"] = opts.as_dict()
    return report


def _analyze_job(job):
    try:
        return EXIT_OK, analyze_one(*job)
    except ModelError as exc:
        return EXIT_USAGE, {"error": str(exc)}
    except NumericalFailure as exc:
        return EXIT_NUMERIC, {"numerical_failure": exc.to_dict()}


def cmd_analyze(args):
    if args.model is None and args.matrix is None:
        sys.stderr.write("analyze: give --model or --matrix\n")
        return EXIT_USAGE
    try:
        grid = parse_params(args.param)
    except ModelError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    jobs = [(args.model, prm, args.matrix, args.u, args.p, args.tol_cluster, args.seed)
            for prm in grid]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_analyze_job, jobs))
    else:
        results = [_analyze_job(j) for j in jobs]
    codes = [c for c, _ in results]
    payload = results[0][1] if len(results) == 1 else [r for _, r in results]
    _emit(dumps(payload), args.out)
    if EXIT_USAGE in codes:
        sys.stderr.write(f"analyze: {results[codes.index(EXIT_USAGE)][1]['error']}\n")
        return EXIT_USAGE
    return EXIT_NUMERIC if EXIT_NUMERIC in codes else EXIT_OK


# simulate ----------------------------------------------------------------------

def _delay_init(init):
    if init in (None, "hat"):
        return dynamics.hat_history()
    if init in ("constant", "ones"):
        return lambda x: np.ones_like(x)
    with open(init) as fh:
        return np.asarray(json.load(fh), float)


def _graph_init(init, l, N):
    if init in (None, "bump", "fixed"):
        return init or "bump"
    with open(init) as fh:
        data = json.load(fh)
    n1, n2, n3, w = dynamics.graph_grid(l, N)
    profs = tuple(np.asarray(data[k], float) for k in ("f1", "f2", "f3"))
    if tuple(len(p) for p in profs) != (n1, n2, n3):
        raise ModelError(f"graph init needs edge lengths {(n1, n2, n3)}")
    return dynamics.GraphState(profs, w)


def write_trace(trace, out):
    cols = trace.columns()
    names = ["t", "d_plus", "min_value"] + sorted(k for k in cols if k not in
                                                   ("t", "d_plus", "min_value"))
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*(cols[k] for k in names)):
            w.writerow([format(float(v), ".17g") for v in row])
    finally:
        if out:
            fh.close()


def cmd_simulate(args):
    try:
        prm = parse_params(args.param)[0]
        if args.model == "delay":
            h = args.step if args.step else 1e-3
            trace = dynamics.simulate_delay(_delay_init(args.init), args.T, h, args.record_every)
        elif args.model == "network_flow":
            l = float(prm.get("l", np.sqrt(2.0)))
            N = int(round(1.0 / args.step)) if args.step else int(prm.get("N", 256))
            trace = M.simulate_network(args.T, _graph_init(args.init, l, N), l, N,
                                       dt=args.step, record_every=args.record_every)
        else:
            raise ModelError(f"simulate supports delay and network_flow, not {args.model!r}")
    except (ModelError, OSError, ValueError) as exc:
        sys.stderr.write(f"simulate: {exc}\n")
        return EXIT_USAGE
    except NumericalFailure as exc:
        sys.stderr.write(dumps({"numerical_failure": exc.to_dict()}))
        return EXIT_NUMERIC
    write_trace(trace, args.out)
    return EXIT_OK


# roots -------------------------------------------------------------------------

DEFAULT_RECTS = {"delay_char": (-0.01, 2.0, -60.0, 60.0),
                 "network_char": (-0.05, 1.0, -40.0, 40.0),
                 "bose_k0": (0.5, 6.0, -1.0, 1.0)}


def cmd_roots(args):
    try:
        prm = parse_params(args.param)[0]
        if args.function == "delay_char":
            f = delay_char()
        elif args.function == "network_char":
            f = network_char(float(prm.get("l", np.sqrt(2.0))))
        elif args.function == "bose_k0":
            f = bose_char_k0(float(prm.get("q0", 1.0)))
        else:
            raise ModelError(f"unknown function {args.function!r}")
        rect = DEFAULT_RECTS[args.function]
        if args.rect:
            rect = tuple(float(x) for x in args.rect.split(","))
            if len(rect) != 4 or rect[0] >= rect[1] or rect[2] >= rect[3]:
                raise ModelError("--rect needs reL,reR,imB,imT with reL < reR, imB < imT")
    except (ModelError, ValueError) as exc:
        sys.stderr.write(f"roots: {exc}\n")
        return EXIT_USAGE
    try:
        rs = find_roots(f, rect)
    except NumericalFailure as exc:
        _emit(dumps({"numerical_failure": exc.to_dict()}), args.out)
        return EXIT_NUMERIC
    _emit(dumps({"function": args.function, "params": prm, "roots": rs}), args.out)
    return EXIT_OK


# certify -----------------------------------------------------------------------

def cmd_certify(args):
    only = None
    if args.only:
        only = {int(x) for x in args.only.split(",")}
    if only:
        chosen = [c for c in acceptance.CRITERIA if c.number in only]
        results = [c() for c in chosen]
    else:
        results = acceptance.run_all(quick=args.quick, jobs=args.jobs)
    for r in results:
        print(r.line())
        if args.verbose or not r.passed:
            print("      " + dumps(r.detail, indent=0).replace("\n", " "))
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    if args.out:
        _emit(dumps([{"number": r.number, "title": r.title, "passed": r.passed,
                      "runtime": r.runtime, "detail": r.detail} for r in results]), args.out)
    return EXIT_OK if n_pass == len(results) else EXIT_FAIL


# entry point -------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="evpos", description=__doc__)
    ap.add_argument("--version", action="version", version=f"evpos {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="classify a named model or a matrix file")
    a.add_argument("--model", choices=sorted(M.REGISTRY))
    a.add_argument("--param", action="append", default=[], metavar="K=V[,V...]")
    a.add_argument("--matrix", help='JSON file {"n": n, "re": [...], "im": [...]}')
    a.add_argument("--u", help="ones | dist | dist2 | JSON file")
    a.add_argument("--p", choices=["1", "2", "inf"])
    a.add_argument("--tol-cluster", type=float, dest="tol_cluster")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run the delay or network simulator, write CSV")
    s.add_argument("--model", required=True, choices=["delay", "network_flow"])
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--step", type=float)
    s.add_argument("--init")
    s.add_argument("--param", action="append", default=[])
    s.add_argument("--record-every", type=int, default=1, dest="record_every")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("roots", help="roots of a characteristic function in a rectangle")
    r.add_argument("--function", required=True, choices=sorted(DEFAULT_RECTS))
    r.add_argument("--rect")
    r.add_argument("--param", action="append", default=[])
    r.add_argument("--out")
    r.set_defaults(func=cmd_roots)

    c = sub.add_parser("certify", help="run the acceptance suite")
    c.add_argument("--quick", action="store_true")
    c.add_argument("--only", help="comma-separated criterion numbers")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--verbose", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "p", None) is not None and args.command == "analyze":
        args.p = np.inf if args.p == "inf" else int(args.p)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
