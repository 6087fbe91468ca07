"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 not periodic, 3 rank too low,
4 solver exhausted, 5 field unsupported or characteristic polynomial not
split, 6 certificate rejected by ``verify``, 70 internal inconsistency.
"""

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field as dc_field

from .decompose import (Certificate, SearchBudget, check_remark29, idempotent_torsion,
                        is_periodic, torsion_squarezero, verify_certificate)
from .errors import (InternalInconsistency, NotPeriodicError, NotSplitOverField,
                     PerDecompError, RankTooLow, SolverExhausted)
from .generate import GeneratorConfig, generate
from .matcore import Matrix, canonical_form, charpoly, minpoly, smith_invariant_factors
from .scalars import Field

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_PERIODIC = 2
EXIT_RANK = 3
EXIT_EXHAUSTED = 4
EXIT_FIELD = 5
EXIT_REJECTED = 6
EXIT_INTERNAL = 70


@dataclass
class RunConfig:
    command: str
    input: str = None
    output: str = None
    certificate: str = None
    truth: str = None
    mode: str = "et"
    field: str = None
    seed: int = 0
    size: int = 6
    rank_min: bool = False
    budget: SearchBudget = dc_field(default_factory=SearchBudget)
    order_bound: int = None
    demo: str = None


class InputError(Exception):
    pass


class FieldError(Exception):
    pass


def _field(text, default="q"):
    try:
        return Field.from_string(text or default)
    except ValueError as exc:
        raise FieldError(str(exc)) from exc


def read_matrix(path, field_text=None):
    """Matrix from a JSON file: {"field": ..., "matrix": rows} or bare rows."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = obj
    fdesc = None
    if isinstance(obj, dict):
        rows = obj.get("matrix")
        fdesc = obj.get("field")
    if field_text is not None:
        F = _field(field_text)
    elif fdesc is not None:
        try:
            F = Field.from_json(fdesc)
        except (ValueError, AttributeError, KeyError) as exc:
            raise FieldError(str(exc)) from exc
    else:
        F = _field(None)
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError("matrix must be a non-empty list of rows")
    if any(len(r) != len(rows) for r in rows):
        raise InputError("matrix must be square")
    try:
        return Matrix._raw(F, [[F.parse(a) for a in r] for r in rows])
    except (ValueError, TypeError, ZeroDivisionError, PerDecompError) as exc:
        raise InputError(f"bad entry: {exc}") from exc


def write_json(path, obj):
    """Atomic write (temp file in the same directory, then rename)."""
    text = json.dumps(obj, indent=1, sort_keys=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_analyze(cfg):
    A = read_matrix(cfg.input, cfg.field)
    F = A.field
    n = A.n
    rank = A.rank()
    w = is_periodic(A, cfg.order_bound)
    out = {"field": F.to_json(), "n": n, "rank": rank,
           "torsion_square_zero_feasible": 2 * rank >= n,
           "charpoly": str(charpoly(A)), "minpoly": str(minpoly(A)),
           "invariant_factors": [str(d) for d in smith_invariant_factors(A)],
           "periodic": w is not None,
           "witness": w.to_json() if w else None}
    if w is not None:
        canon = canonical_form(A)
        out["divisors"] = [str(d) for d in canon.divisors]
        out["transform"] = canon.transform.to_json()["rows"]
    write_json(cfg.output, out)
    return EXIT_OK


def cmd_decompose(cfg):
    A = read_matrix(cfg.input, cfg.field)
    if cfg.mode == "et":
        cert = idempotent_torsion(A, order_bound=cfg.order_bound)
    elif cfg.mode == "tn":
        cert = torsion_squarezero(A, cfg.budget, order_bound=cfg.order_bound)
    else:
        raise InputError(f"unknown mode {cfg.mode!r}")
    write_json(cfg.output, cert.to_json())
    return EXIT_OK


def cmd_verify(cfg):
    A = read_matrix(cfg.input, cfg.field)
    if cfg.certificate is None:
        raise InputError("verify needs --certificate")
    try:
        with open(cfg.certificate) as fh:
            cert = Certificate.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError,
            PerDecompError) as exc:
        raise InputError(f"cannot read certificate: {exc}") from exc
    report = verify_certificate(A, cert)
    write_json(cfg.output, report.to_json())
    return EXIT_OK if report.ok else EXIT_REJECTED


def cmd_generate(cfg):
    F = _field(cfg.field)
    gen = GeneratorConfig(size=cfg.size, seed=cfg.seed, rank_min=cfg.rank_min)
    try:
        inst = generate(F, gen)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    data = inst.to_json()
    write_json(cfg.output, {"field": data["field"], "matrix": data["matrix"]})
    truth = cfg.truth
    if truth is None and cfg.output not in (None, "-"):
        truth = cfg.output[:-5] + ".truth.json" if cfg.output.endswith(".json") \
            else cfg.output + ".truth.json"
    if truth is not None:
        write_json(truth, data)
    return EXIT_OK


def cmd_demo(cfg):
    if cfg.demo != "remark29":
        raise InputError(f"unknown demo {cfg.demo!r}")
    rep = check_remark29()
    lines = [f"A = {rep.matrix}",
             f"A^9 == A: {rep.period_check}",
             f"trace(A) = {rep.trace}"]
    for c in rep.root_cases:
        lines.append(f"real root {c['alpha1']}: other roots sum to {c['other_sum']}, "
                     f"admissible: {c['feasible']}")
    lines += [f"forced charpoly of T: {rep.forced_poly}",
              f"quadratic factor: {rep.quadratic} (torsion over the field: "
              f"{rep.quadratic_is_torsion})",
              f"minimal polynomial over Q of its roots: {rep.min_poly} "
              f"(trace {rep.min_poly_trace})",
              "degree-4 cyclotomics:"]
    for d, p in rep.candidates:
        lines.append(f"  Phi_{d} = {p}: differs = {rep.mismatches[d]}")
    lines.append(f"solver on A: {rep.solver_verdict}")
    lines.append("obstruction verified" if rep.ok else "obstruction NOT verified")
    text = "\n".join(lines) + "\n"
    if cfg.output:
        write_json(cfg.output, rep.to_json())
    sys.stdout.write(text)
    return EXIT_OK if rep.ok else EXIT_INTERNAL


COMMANDS = {"analyze": cmd_analyze, "decompose": cmd_decompose, "verify": cmd_verify,
            "generate": cmd_generate, "demo": cmd_demo}


def build_parser():
    ap = argparse.ArgumentParser(prog="perdecomp", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="matrix JSON file")
        p.add_argument("--output", help="output JSON path (default: stdout)")
        p.add_argument("--field", help="q | fp:<p> | qsqrt:<d> (overrides the file)")
        p.add_argument("--order-bound", type=int, help="cap on cyclotomic indices searched")

    common(sub.add_parser("analyze", help="invariants, periodicity and canonical form"))
    p = sub.add_parser("decompose", help="write a certified decomposition")
    common(p)
    p.add_argument("--mode", choices=("et", "tn"), default="et")
    p.add_argument("--seed", type=int, default=0)
    d = SearchBudget()
    p.add_argument("--budget-max-rank", type=int, default=d.max_rank)
    p.add_argument("--budget-max-height", type=int, default=d.max_height)
    p.add_argument("--budget-max-sweeps", type=int, default=d.max_sweeps)
    p.add_argument("--budget-tries", type=int, default=d.tries)
    p.add_argument("--budget-max-targets", type=int, default=d.max_targets)
    p = sub.add_parser("verify", help="check a certificate against a matrix")
    common(p)
    p.add_argument("--certificate", required=True)
    p = sub.add_parser("generate", help="seeded periodic matrix with ground truth")
    common(p, needs_input=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=6)
    p.add_argument("--rank-min", action="store_true", help="require 2*rank >= n")
    p.add_argument("--truth", help="ground-truth path (default: <output>.truth.json)")
    p = sub.add_parser("demo", help="run a built-in demonstration")
    p.add_argument("demo", choices=("remark29",))
    p.add_argument("--output")
    return ap


def config_from_args(ns):
    cfg = RunConfig(command=ns.command)
    for name in ("input", "output", "certificate", "truth", "mode", "field", "seed",
                 "size", "rank_min", "order_bound", "demo"):
        if hasattr(ns, name) and getattr(ns, name) is not None:
            setattr(cfg, name, getattr(ns, name))
    if ns.command == "decompose":
        cfg.budget = SearchBudget(max_rank=ns.budget_max_rank, max_height=ns.budget_max_height,
                                  max_sweeps=ns.budget_max_sweeps, tries=ns.budget_tries,
                                  max_targets=ns.budget_max_targets, seed=ns.seed)
    return cfg


def run(cfg):
    try:
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FieldError as exc:
        print(f"error: unsupported field: {exc}", file=sys.stderr)
        return EXIT_FIELD
    except NotPeriodicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_PERIODIC
    except RankTooLow as exc:
        print(f"error: rank too low: {exc}", file=sys.stderr)
        return EXIT_RANK
    except SolverExhausted as exc:
        print(f"error: solver exhausted: {exc}", file=sys.stderr)
        for line in exc.trace:
            print(f"  {line}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except NotSplitOverField as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIELD
    except InternalInconsistency as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main(argv=None):
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
