"""Command-line driver.

Every command prints one JSON document (or CSV for the figure commands) to
stdout, or to ``--out``.  JSON outputs carry a ``provenance`` block echoing
the parsed configuration and library versions; identical arguments give
identical bytes.  Wall time is added only with ``--timing``.  Any error
prints ``{"error": ..., "message": ...}`` and exits with status 1.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import StateVector
from .gf2 import BitMatrix
from .tree import (
    build_dicke,
    build_ghz,
    build_mps_tree,
    cluster_1d_tensors,
    evaluate,
    parse_tree,
    serialize_tree,
    tree_size,
)


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def derive_seed(seed: int, name: str, index: int) -> int:
    """Per-experiment seed from ``(seed, name, index)``; stable across platforms."""
    h = hashlib.blake2b(f"{seed}:{name}:{index}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little") >> 1


def _state_json(s: StateVector) -> dict:
    return s.to_json()


def _load_tree(path: str):
    return parse_tree(Path(path).read_text())


# ------------------------------------------------------------------ commands


def cmd_ts_fewqubit(args) -> dict:
    from .fewqubit import fit_tree, shape, slocc_classify3, ts_from_class3, ts_two_qubit

    s = StateVector.load(args.state)
    if s.n_qubits == 2:
        ts = ts_two_qubit(s)
        return {"class": "entangled" if ts == 4 else "product", "ts": ts}
    if s.n_qubits != 3:
        raise CliError(f"ts-fewqubit handles 2 or 3 qubits, got {s.n_qubits}")
    cls = slocc_classify3(s)
    out = {"class": cls.name.replace("_", "|") if cls.is_biseparable else cls.name, "ts": ts_from_class3(cls)}
    if args.fit and cls.name in ("GHZ", "W"):
        res = fit_tree(s, shape(cls.name.lower() + "3"), rng=args.seed)
        out["fit"] = {"residual": res.residual, "size": res.size, "tree": serialize_tree(res.tree)}
    return out


def cmd_tree(args) -> dict:
    if args.action == "build":
        fam = args.family
        if fam == "ghz":
            t = build_ghz(args.n)
        elif fam == "dicke":
            t = build_dicke(args.n, args.k)
        elif fam == "cluster1d":
            t = build_mps_tree(cluster_1d_tensors(args.n), args.n)
        else:
            from .states import permanent_state_tree

            t = permanent_state_tree(args.m)
        return {"tree": serialize_tree(t), "size": tree_size(t)}
    if args.file is None and args.text is None:
        raise CliError("tree parse/eval/size needs --file or --text")
    t = parse_tree(args.text if args.text is not None else Path(args.file).read_text())
    if args.action == "parse":
        return {"tree": serialize_tree(t), "size": tree_size(t)}
    if args.action == "size":
        return {"size": tree_size(t)}
    return {"state": _state_json(evaluate(t, args.n))}


def _subgroup_spec(args, rng_name: str):
    from .subgroup import SubgroupSpec, jacobsthal_subgroup

    if getattr(args, "matrix", None):
        return SubgroupSpec.load(args.matrix)
    if getattr(args, "q", None):
        return jacobsthal_subgroup(args.q)
    rng = np.random.default_rng(derive_seed(args.seed, rng_name, 0))
    return SubgroupSpec(BitMatrix.random(args.n // 2, args.n, rng))


def cmd_raz(args) -> dict | str:
    from . import raz
    from .subgroup import subgroup_state

    ns = args.n or [None]
    reports = []
    for n in ns:
        args_n = argparse.Namespace(**{**vars(args), "n": n})
        if args.mode == "balanced":
            if n is None:
                raise CliError("--mode balanced needs --n")
            rep = raz.estimate_balanced_fullrank(n, args.samples, seed=args.seed)
        elif args.mode == "subgroup":
            if n is None and not (args.matrix or args.q):
                raise CliError("--mode subgroup needs --matrix, --q or --n")
            rep = raz.estimate_subgroup_invertibility(_subgroup_spec(args_n, "raz-matrix"), args.samples, seed=args.seed)
        else:
            if args.state:
                s = StateVector.load(args.state)
            else:
                if n is None and not args.matrix:
                    raise CliError("--mode state needs --state, --matrix or --n")
                s = subgroup_state(_subgroup_spec(args_n, "raz-matrix"))
            rep = raz.estimate_state_schmidt(s, args.samples, seed=args.seed)
        reports.append(rep)
    if args.csv:
        rows = [
            {"n": r.metadata["n"], "samples": r.samples, "successes": r.successes, "p_hat": r.p_hat,
             "ci_low": r.ci_low, "ci_high": r.ci_high, "threshold_log2": r.threshold_log2, "seed": r.seed}
            for r in reports
        ]
        return _csv(rows)
    if len(reports) == 1:
        return reports[0].to_json()
    return {"reports": [r.to_json() for r in reports]}


def cmd_subgroup(args) -> dict:
    from .subgroup import SubgroupSpec, derive_generators, subgroup_state, witness_stabilizer

    spec = SubgroupSpec.load(args.matrix)
    gens = derive_generators(spec)
    if args.emit == "generators":
        return {"generators": [str(g) for g in gens]}
    s = subgroup_state(spec)
    if args.emit == "state":
        return {"state": _state_json(s)}
    return {"generators": [str(g) for g in gens], "witness_stabilizer": witness_stabilizer(gens, s)}


def cmd_witness(args) -> dict:
    from .subgroup import (
        SubgroupSpec,
        derive_generators,
        detection_threshold,
        sample_witness,
        subgroup_state,
        witness_exact,
        witness_stabilizer,
    )

    spec = SubgroupSpec.load(args.matrix)
    gens = derive_generators(spec)
    target = subgroup_state(spec)
    s = StateVector.load(args.state).normalize()
    out = {
        "overlap2": 0.5 - witness_exact(s, target),
        "witness_exact": witness_exact(s, target),
        "witness_stabilizer": witness_stabilizer(gens, s),
        "detection_threshold": detection_threshold(spec.n),
    }
    if args.shots:
        out["sampled"] = sample_witness(gens, s, args.shots, derive_seed(args.seed, "witness", 0)).to_json()
    return out


def cmd_states(args) -> dict:
    from . import states

    fam = args.family
    if fam in ("permanent", "determinant"):
        s = states.immanant_state(args.m, fam)
    elif fam == "immanant":
        if not args.coeffs:
            raise CliError("--family immanant needs --coeffs (JSON file mapping permutations to [re, im])")
        raw = json.loads(Path(args.coeffs).read_text())
        coeffs = {tuple(int(c) for c in k.split(",")): complex(*v) for k, v in raw.items()}
        s = states.immanant_state(args.m, coeffs)
    elif fam == "dj":
        if args.constant is not None:
            f = states.ConstantFunction(args.n, args.constant)
        else:
            f = states.random_balanced_function(args.n, np.random.default_rng(derive_seed(args.seed, "dj", 0)))
        s = states.dj_state(f)
    elif fam == "pz":
        s = states.pz_state(args.n, args.p)
    else:
        sh = states.shor_state(args.n, args.s, args.N)
        s = states.postselect_register2(sh, args.n, args.outcome) if args.postselect else sh
    return {"state": _state_json(s)}


def cmd_mbqc(args) -> dict:
    from .mbqc import pattern_from_json, run_pattern, simulate_pattern

    t = _load_tree(args.tree)
    steps, rule = pattern_from_json(json.loads(Path(args.pattern).read_text()))
    if args.postselect:
        trace = simulate_pattern(t, steps, feedforward=rule, postselect=True)
        out = trace.to_json()
        out["tree"] = None if trace.tree is None else serialize_tree(trace.tree)
        return out
    rng = np.random.default_rng(derive_seed(args.seed, "mbqc", 0))
    if args.runs == 1:
        trace = simulate_pattern(t, steps, rng=rng, feedforward=rule)
        out = trace.to_json()
        out["tree"] = None if trace.tree is None else serialize_tree(trace.tree)
        return out
    return {"runs": args.runs, "histogram": run_pattern(t, steps, args.runs, rng=rng, feedforward=rule)}


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields: list[str] = []
    for r in rows:
        fields += [k for k in r if k not in fields]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_figure_probe2(args) -> str:
    from .raz import estimate_balanced_fullrank

    rows = []
    for k, n in enumerate(args.n):
        seed = derive_seed(args.seed, "probe2", k)
        r = estimate_balanced_fullrank(n, args.samples, seed=seed)
        rows.append({"n": n, "samples": r.samples, "p_hat": r.p_hat, "ci_low": r.ci_low, "ci_high": r.ci_high, "seed": seed, "error": ""})
    return _csv(rows)


def cmd_figure_jacobsthal(args) -> str:
    from .raz import estimate_subgroup_invertibility
    from .subgroup import jacobsthal_subgroup

    rows = []
    for k, q in enumerate(args.q):
        seed = derive_seed(args.seed, "jacobsthal", k)
        row = {"q": q, "n": 2 * q, "samples": args.samples, "p_hat": "", "ci_low": "", "ci_high": "", "seed": seed, "error": ""}
        try:
            r = estimate_subgroup_invertibility(jacobsthal_subgroup(q), args.samples, seed=seed)
            row.update(p_hat=r.p_hat, ci_low=r.ci_low, ci_high=r.ci_high)
        except ValueError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return _csv(rows)


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tscomplex", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--timing", action="store_true", help="add wall time to JSON output (breaks byte-identity)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ts-fewqubit", help="SLOCC class and tree size of a 2- or 3-qubit state")
    s.add_argument("--state", required=True)
    s.add_argument("--fit", action="store_true", help="also fit a minimal tree numerically")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_ts_fewqubit)

    s = sub.add_parser("tree", help="parse, evaluate, size or build trees")
    s.add_argument("action", choices=["parse", "eval", "size", "build"])
    s.add_argument("--file")
    s.add_argument("--text")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--family", choices=["ghz", "dicke", "cluster1d", "permanent"], default="ghz")
    s.set_defaults(func=cmd_tree)

    s = sub.add_parser("raz-estimate", help="Monte Carlo rank-criterion estimate")
    s.add_argument("--mode", choices=["subgroup", "state", "balanced"], required=True)
    s.add_argument("--n", type=int, nargs="+")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--matrix")
    s.add_argument("--q", type=int)
    s.add_argument("--state")
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_raz)

    s = sub.add_parser("subgroup", help="subgroup state, generators or witness value")
    s.add_argument("--matrix", required=True)
    s.add_argument("--emit", choices=["state", "generators", "witness"], default="generators")
    s.set_defaults(func=cmd_subgroup)

    s = sub.add_parser("witness", help="witness values of a state against a subgroup state")
    s.add_argument("--matrix", required=True)
    s.add_argument("--state", required=True)
    s.add_argument("--shots", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("states", help="state families as StateVector JSON")
    s.add_argument("--family", choices=["permanent", "determinant", "immanant", "dj", "pz", "shor"], required=True)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--s", type=int, default=2)
    s.add_argument("--N", type=int, default=15)
    s.add_argument("--coeffs")
    s.add_argument("--constant", type=int, choices=[0, 1])
    s.add_argument("--postselect", action="store_true")
    s.add_argument("--outcome", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_states)

    s = sub.add_parser("mbqc-sim", help="measurement pattern on a tree")
    s.add_argument("--tree", required=True)
    s.add_argument("--pattern", required=True)
    s.add_argument("--runs", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--postselect", action="store_true")
    s.set_defaults(func=cmd_mbqc)

    s = sub.add_parser("figure-probe2", help="CSV of the balanced full-rank probability versus n")
    s.add_argument("--n", type=int, nargs="+", default=[2, 4, 6, 8, 10, 12, 14, 16])
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_figure_probe2)

    s = sub.add_parser("figure-jacobsthal", help="CSV of the Jacobsthal invertibility probability versus q")
    s.add_argument("--q", type=int, nargs="+", default=[3, 11, 19, 43, 59])
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_figure_jacobsthal)
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        t0 = time.perf_counter()
        result = args.func(args)
        if isinstance(result, str):
            _emit(result, args.out)
            return 0
        config = {k: v for k, v in vars(args).items() if k not in ("func", "out", "timing")}
        result["provenance"] = {
            "config": config,
            "versions": {"tscomplex": __version__, "numpy": np.__version__},
        }
        if args.timing:
            result["provenance"]["wall_time_s"] = time.perf_counter() - t0
        _emit(json.dumps(result, sort_keys=True) + "\n", args.out)
        return 0
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (CliError, ValueError, KeyError, OSError, ArithmeticError) as exc:
        sys.stdout.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
