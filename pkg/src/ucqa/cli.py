"""Command-line front end.

Exit codes: 0 yes (repair / consistently true / success), 1 no, 2 bad input,
3 constraint class not handled by the subcommand, 4 a size cap was hit.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import warnings
from pathlib import Path

from . import oracle
from .core import ModelError, UnsupportedConstraintError, canonical, infer_schema
from .cqa import CNFTooLargeError, CQAEngine
from .grounding import Grounding
from .parser import (
    ParseError, parse_constraints, parse_instance, parse_query, parse_schema,
    serialize_constraints, serialize_fact, serialize_instance, serialize_query, serialize_schema,
)
from .repair import RepairStrategy, check_repair, construct_repair

EXIT_YES, EXIT_NO, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_CAP = 0, 1, 2, 3, 4


class _Inputs:
    def __init__(self, args, need_instance: bool = True):
        self.schema = None
        if getattr(args, "schema", None):
            self.schema = parse_schema(_read(args.schema))
        self.constraints = parse_constraints(_read(args.constraints), self.schema) if args.constraints else []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.instance = parse_instance(_read(args.instance), self.schema) if need_instance else frozenset()
        if self.schema is None:
            self.schema = infer_schema(self.instance, self.constraints)

    def facts(self, path: str) -> frozenset:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return parse_instance(_read(path), self.schema)

    def query(self, args):
        text = args.query_text if args.query_text is not None else _read(args.query)
        return parse_query(text, self.schema)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def _fact_list(facts, schema) -> list[str]:
    return [serialize_fact(f, schema) for f in canonical(facts)]


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_hull(args) -> int:
    inp = _Inputs(args)
    g = Grounding(inp.instance, inp.constraints)
    pos = _fact_list(g.hull.positive, inp.schema)
    neg = _fact_list(g.hull.negative, inp.schema)
    text = "".join(f + "\n" for f in pos) + "".join(f"not {f}\n" for f in neg)
    _emit(args, {"positive": pos, "negative": neg}, text)
    return EXIT_YES


def cmd_rules(args) -> int:
    inp = _Inputs(args)
    g = Grounding(inp.instance, inp.constraints)
    out = []
    for r in g.rules:
        out.append({"lhs": _fact_list(r.lhs, inp.schema), "rhs": _fact_list(r.rhs, inp.schema)})
    text = "".join(
        f"{' and '.join(o['lhs']) or 'true'} -> {' | '.join(o['rhs']) or 'false'}\n" for o in out)
    _emit(args, {"rules": out}, text)
    return EXIT_YES


def cmd_graph(args) -> int:
    inp = _Inputs(args)
    hg = Grounding(inp.instance, inp.constraints).hypergraph()
    if args.json:
        sys.stdout.write(hg.to_json_text())
    else:
        sys.stdout.write(hg.to_dot())
    return EXIT_YES


def cmd_check_repair(args) -> int:
    inp = _Inputs(args)
    cand = inp.facts(args.candidate)
    rep = check_repair(inp.instance, cand, inp.constraints)
    payload = {
        "verdict": rep.verdict,
        "violated": rep.violated.value,
        "witness": serialize_fact(rep.witness, inp.schema) if rep.witness is not None else None,
        "witness_facts": _fact_list(rep.witness_facts, inp.schema) if rep.witness_facts is not None else None,
    }
    _emit(args, payload, rep.describe() + "\n")
    return EXIT_YES if rep.verdict else EXIT_NO


def _one_fact(inp: _Inputs, text: str, lineno: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        facts = parse_instance(text, inp.schema)
    if len(facts) != 1:
        raise ParseError("expected exactly one fact on the line", lineno, 1)
    return next(iter(facts))


def _read_order(inp: _Inputs, path):
    """One fact per line, in visiting order."""
    if not path:
        return None
    out = []
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        line = line.split("#")[0].strip()
        if line:
            out.append(_one_fact(inp, line, lineno))
    return out


_BOOLS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _read_b_script(inp: _Inputs, path):
    """Either ``FACT true|false`` lines or one boolean per line (by visiting position)."""
    if not path:
        return None
    mapping, seq = {}, []
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        line = line.split("#")[0].strip()
        if not line:
            continue
        head, _, last = line.rpartition(" ")
        if last.lower() not in _BOOLS:
            raise ParseError("expected true or false at the end of the line", lineno, len(line))
        if head.strip():
            fact = _one_fact(inp, head.strip(), lineno)
            mapping[fact] = _BOOLS[last.lower()]
        else:
            seq.append(_BOOLS[last.lower()])
    if mapping and seq:
        raise ParseError("b-script mixes fact lines with bare booleans")
    return mapping or seq


def cmd_repair(args) -> int:
    inp = _Inputs(args)
    strategy = RepairStrategy(
        order=_read_order(inp, args.order),
        b_script=_read_b_script(inp, args.b_script),
        b_default=args.b_default == "true",
        seed=args.seed,
        random_b=args.seed is not None and args.b_script is None,
    )
    trace = []
    result = construct_repair(inp.instance, inp.constraints, strategy, trace)
    steps = []
    lines = []
    for st in trace:
        steps.append({
            "fact": serialize_fact(st.fact, inp.schema), "b": st.b, "added": st.added,
            "reason": st.reason,
            "banned": _fact_list(st.banned, inp.schema) if st.banned is not None else None,
            "derived": _fact_list(st.derived, inp.schema),
        })
        what = "add" if st.added else f"discard ({st.reason})"
        extra = ""
        if st.banned is not None:
            extra = " ban {" + ", ".join(_fact_list(st.banned, inp.schema)) + "}"
        lines.append(f"# {serialize_fact(st.fact, inp.schema)} b={str(st.b).lower()}: {what}{extra}\n")
    text = ("".join(lines) if args.trace else "") + serialize_instance(result, inp.schema)
    payload = {"repair": _fact_list(result, inp.schema)}
    if args.trace:
        payload["trace"] = steps
    _emit(args, payload, text)
    return EXIT_YES


def cmd_repairs(args) -> int:
    inp = _Inputs(args)
    reps = oracle.enumerate_repairs(inp.instance, inp.constraints, cap=args.cap, method=args.method)
    text = ""
    for k, r in enumerate(reps, start=1):
        text += f"# repair {k}\n" + (serialize_instance(r, inp.schema) or "# (empty)\n")
    _emit(args, {"repairs": [_fact_list(r, inp.schema) for r in reps]}, text)
    return EXIT_YES


def cmd_cqa(args) -> int:
    inp = _Inputs(args)
    q = inp.query(args)
    engine = CQAEngine(inp.instance, inp.constraints, inp.schema)
    res = engine.answer(q, args.cnf_cap)
    payload = {"answer": res.answer}
    text = "consistently true\n" if res.answer else "not consistently true\n"
    if not res.answer:
        w = res.witness
        clause = res.clauses[res.failed_clause]
        payload["clause"] = [("" if pos else "not ") + serialize_fact(f, inp.schema)
                             for f, pos in sorted(clause, key=lambda fp: (fp[0].sort_key, fp[1]))]
        payload["witness"] = {
            "supports": {serialize_fact(f, inp.schema): _fact_list(s, inp.schema)
                         for f, s in sorted(w.supports.items())},
            "blocks": {serialize_fact(f, inp.schema): [_fact_list(b, inp.schema), _fact_list(n, inp.schema)]
                       for f, (b, n) in sorted(w.blocks.items())},
            "repair": _fact_list(w.repair, inp.schema),
        }
        text += "# falsified clause: " + " or ".join(payload["clause"]) + "\n"
        text += "# witness repair:\n" + serialize_instance(w.repair, inp.schema)
    if args.explain:
        payload["explain"] = engine.explain()
        if not args.json:
            text += json.dumps(payload["explain"], indent=2, ensure_ascii=False) + "\n"
    _emit(args, payload, text)
    return EXIT_YES if res.answer else EXIT_NO


def cmd_oracle_cqa(args) -> int:
    inp = _Inputs(args)
    q = inp.query(args)
    bad = oracle.counterexample(q, inp.instance, inp.constraints, args.cap, args.method)
    payload = {"answer": bad is None}
    if bad is None:
        text = "consistently true\n"
    else:
        payload["counterexample"] = _fact_list(bad, inp.schema)
        text = "not consistently true\n# counterexample repair:\n" + serialize_instance(bad, inp.schema)
    _emit(args, payload, text)
    return EXIT_YES if bad is None else EXIT_NO


def _write_case(args, schema, instance, constraints, query=None) -> None:
    files = {
        "schema.txt": serialize_schema(schema),
        "constraints.txt": serialize_constraints(constraints),
        "instance.txt": serialize_instance(instance, schema),
    }
    if query is not None:
        files["query.txt"] = serialize_query(query, schema) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, body in files.items():
            (out / name).write_text(body, encoding="utf-8")
    else:
        for name, body in files.items():
            sys.stdout.write(f"# --- {name}\n{body}")


def _parse_edges(text: str):
    edges = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        a, sep, b = part.partition("-")
        if not sep:
            raise ParseError(f"edge {part!r} should look like 1-2")
        edges.append((int(a), int(b)))
    return edges


def cmd_gen(args) -> int:
    if args.kind == "3col":
        edges = _parse_edges(args.edges)
        verts = sorted({v for e in edges for v in e})
        red = oracle.reduce_3col(verts, edges)
        _write_case(args, red.schema, red.instance, red.constraints, red.query)
    elif args.kind == "qbf":
        psi = oracle.qbf_from_text(_read(args.formula))
        red = oracle.reduce_qbf(psi)
        _write_case(args, red.schema, red.instance, red.constraints, red.query)
    else:
        schema, inst, f = oracle.gen_random(args.seed, args.profile)
        rng = random.Random(f"query:{args.profile}:{args.seed}")
        q = oracle.gen_query(rng, Grounding(inst, f).facts)
        _write_case(args, schema, inst, f, q)
    return EXIT_YES


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ucqa", description="Repairs and consistent answers under universal constraints.")
    sub = p.add_subparsers(dest="command", required=True)

    files = argparse.ArgumentParser(add_help=False)
    files.add_argument("-s", "--schema", help="schema file (inferred from the data when omitted)")
    files.add_argument("-c", "--constraints", help="constraints file")
    files.add_argument("-i", "--instance", required=True, help="instance file")
    files.add_argument("--json", action="store_true", help="JSON output")

    query = argparse.ArgumentParser(add_help=False)
    g = query.add_mutually_exclusive_group(required=True)
    g.add_argument("-q", "--query", help="query file")
    g.add_argument("-Q", "--query-text", help="query given inline")

    sp = sub.add_parser("hull", parents=[files], help="print the hull")
    sp.set_defaults(func=cmd_hull)
    sp = sub.add_parser("rules", parents=[files], help="print the ground rules")
    sp.set_defaults(func=cmd_rules)
    sp = sub.add_parser("graph", parents=[files], help="conflict hypergraph as DOT (or JSON)")
    sp.add_argument("--dot", action="store_true", help="DOT output (the default)")
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("check-repair", parents=[files], help="is a candidate a repair?")
    sp.add_argument("--candidate", "-r", required=True, help="candidate instance file")
    sp.set_defaults(func=cmd_check_repair)

    sp = sub.add_parser("repair", parents=[files], help="build one repair")
    sp.add_argument("--seed", type=int, help="shuffle the visiting order and the b choices")
    sp.add_argument("--order", help="file listing facts to visit first")
    sp.add_argument("--b-script", help="file of b choices")
    sp.add_argument("--b-default", choices=("true", "false"), default="false")
    sp.add_argument("--trace", action="store_true", help="show every step")
    sp.set_defaults(func=cmd_repair)

    sp = sub.add_parser("repairs", parents=[files], help="enumerate every repair")
    sp.add_argument("--cap", type=int, default=18, help="largest hull for subset enumeration")
    sp.add_argument("--method", choices=("subset", "sat"), default="subset")
    sp.set_defaults(func=cmd_repairs)

    sp = sub.add_parser("cqa", parents=[files, query], help="consistent answer to a ground query")
    sp.add_argument("--explain", action="store_true", help="also dump supports and blocks")
    sp.add_argument("--cnf-cap", type=int, default=4096)
    sp.set_defaults(func=cmd_cqa)

    sp = sub.add_parser("oracle-cqa", parents=[files, query], help="consistent answer by enumeration")
    sp.add_argument("--cap", type=int, default=18)
    sp.add_argument("--method", choices=("subset", "sat"), default="subset")
    sp.set_defaults(func=cmd_oracle_cqa)

    sp = sub.add_parser("gen", help="write a generated case")
    gsub = sp.add_subparsers(dest="kind", required=True)
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", help="directory for the files (stdout when omitted)")
    gp = gsub.add_parser("3col", parents=[out], help="3-colorability reduction")
    gp.add_argument("--edges", required=True, help="edges like 1-2,2-3,1-3")
    gp = gsub.add_parser("qbf", parents=[out], help="forall-exists QBF reduction")
    gp.add_argument("--formula", required=True, help="QBF file")
    gp = gsub.add_parser("random", parents=[out], help="seeded random instance")
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--profile", choices=oracle.PROFILES, default="denial")
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except UnsupportedConstraintError as e:
        print(f"unsupported: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (oracle.CapExceededError, CNFTooLargeError) as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
