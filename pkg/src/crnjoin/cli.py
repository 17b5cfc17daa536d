"""Command-line front end.

Every subcommand builds a report ``{schema_version, request, result,
diagnostics}``.  ``--json`` prints it; the default prints a text rendering of
the same result.  Exit status: 0 success, 2 hypotheses not met, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import invariants, lincomp, massaction, mss
from .errors import CrnError, HypothesisError, ParseError
from .groebner import Budget
from .net import (Complex, Model, OneWayFlowSpec, ParsedFile, classify_glue, join_by_new_reaction,
                  join_one_way_flow, parse_file, reaction, union)

SCHEMA_VERSION = 1

Result = tuple[dict, list[str]]


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CrnError(f"cannot read {path}: {exc.strerror}") from None


def _read(path: str) -> ParsedFile:
    return parse_file(_read_text(path))


def _read_model(path: str, outputs: Sequence[str] = ()) -> Model:
    pf = _read(path)
    outs = tuple(outputs) if outputs else pf.outputs
    if not outs:
        raise CrnError("no output declared; pass --output or add an 'output' line")
    return Model(pf.network, outs)


def _names(text: str | None) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()] if text else []


# subcommands


def cmd_parse(args) -> Result:
    pf = _read(args.files[0])
    n = pf.network
    res = {"network": n.to_dict(), "outputs": list(pf.outputs), "inputs": list(n.inflow_species()),
           "complexes": [str(c) for c in n.complexes], "monomolecular": n.is_monomolecular()}
    text = [f"species: {', '.join(n.species)}",
            f"complexes: {', '.join(str(c) for c in n.complexes)}",
            "reactions:"] + [f"  {r}" for r in n.reactions]
    if pf.outputs:
        text.append(f"outputs: {', '.join(pf.outputs)}")
    return res, text


def cmd_ode(args) -> Result:
    n = _read(args.files[0]).network
    sys_ = massaction.system_polynomials(n)
    sm = massaction.stoichiometric_matrix(n)
    cons = sm.conservation_basis()
    res = sys_.to_dict()
    res["stoichiometric_rank"] = sm.rank()
    res["conservation_laws"] = [[str(v) for v in w] for w in cons]
    text = [f"d{v}/dt = {p}" for v, p in zip(sys_.species_vars, sys_.polys)]
    text.append(f"stoichiometric subspace dimension: {sm.rank()}")
    for w in cons:
        text.append("conserved: " + " + ".join(f"{v}*{x}" for v, x in zip(w, sys_.species_vars) if v))
    return res, text


def cmd_glue(args) -> Result:
    n1 = _read(args.files[0]).network
    n2 = _read(args.files[1]).network
    kind = classify_glue(n1, n2)
    n = union(n1, n2)
    dec = massaction.glue_ode_decomposition(n1, n2)
    res = {"glue_kind": kind.value, "union": n.to_dict(), "ode_case": dec.case,
           "system": {s: str(h) for s, h in zip(dec.species, dec.h)}}
    text = [f"glue kind: {kind.value}", "union:"] + [f"  {r}" for r in n.reactions]
    text.append(f"right-hand side decomposes as case {dec.case}")
    return res, text


def cmd_join(args) -> Result:
    m1 = _read(args.files[0])
    m2 = _read(args.files[1])
    if args.reaction:
        r = reaction(args.reaction) if "[" in args.reaction else None
        if r is None:
            y, yp = (Complex.of(s.strip()) for s in args.reaction.split("->"))
            n = join_by_new_reaction(m1.network, m2.network, y, yp)
        else:
            n = join_by_new_reaction(m1.network, m2.network, r.reactant, r.product, r.label)
        outs = tuple(dict.fromkeys(m1.outputs + m2.outputs))
        res = {"join": {"new_reaction": args.reaction}, "network": n.to_dict(), "outputs": list(outs)}
        dsl = n.to_dsl() + (f"output {', '.join(outs)}\n" if outs else "")
        res["dsl"] = dsl
        return res, dsl.rstrip("\n").splitlines()
    if args.scenario is None or not args.map:
        raise CrnError("join needs --reaction, or --scenario with --map")
    phi = dict(pair.split(":") for pair in _names(args.map))
    joined = join_one_way_flow(m1.model(), m2.model(), OneWayFlowSpec.of(args.scenario, phi))
    res = {"join": {"scenario": args.scenario, "map": phi}, "model": joined.to_dict(), "dsl": joined.to_dsl()}
    return res, joined.to_dsl().rstrip("\n").splitlines()


def cmd_io_eq(args) -> Result:
    m = _read_model(args.files[0], _names(args.output))
    eqs = [lincomp.io_equation(m, o) for o in m.outputs]
    return {"equations": [e.to_dict() for e in eqs]}, [e.render() for e in eqs]


def cmd_identifiability(args) -> Result:
    m = _read_model(args.files[0], _names(args.output))
    eqs = [lincomp.io_equation(m, o) for o in m.outputs]
    cmap = lincomp.coefficient_map(m, eqs)
    verdict = lincomp.global_identifiability(m, args.seed, Budget.from_env())
    res = {"verdict": verdict.to_dict(), "coefficient_map": cmap.to_dict(),
           "equations": [e.render() for e in eqs]}
    text = [e.render() for e in eqs]
    text.append("coefficients: (" + ", ".join(str(c) for c in cmap.coords) + ")")
    text.append(f"verdict: {verdict.kind}")
    for key in ("jacobian_rank", "parameters", "fiber_count"):
        if key in verdict.evidence:
            text.append(f"{key.replace('_', ' ')}: {verdict.evidence[key]}")
    return res, text


def cmd_observe(args) -> Result:
    m = _read_model(args.files[0], _names(args.output))
    out = m.outputs[0]
    eqs = lincomp.observability_equations(m, out)
    return {"output": out, "equations": [e.to_dict() for e in eqs]}, [e.render() for e in eqs]


def cmd_invariants(args) -> Result:
    n1 = _read(args.files[0]).network
    n2 = _read(args.files[1]).network
    elim = _names(args.eliminate)
    if not elim:
        raise CrnError("invariants needs --eliminate")
    reports = invariants.compare_projections(n1, n2, elim, Budget.from_env())
    res = {"glue_kind": classify_glue(n1, n2).value, "comparisons": [r.to_dict() for r in reports]}
    text = [f"glue kind: {res['glue_kind']}"]
    for r in reports:
        rel = "equal" if r.equality_holds else ("strictly contained" if r.containment_holds else "NOT contained")
        text.append(f"operand {r.target}: projection {rel}")
        text.append(f"  projected: <{', '.join(r.projected.to_json())}>")
        text.append(f"  operand:   <{', '.join(r.operand.to_json())}>")
        if r.witness is not None:
            text.append(f"  witness: {r.witness}")
    return res, text


def cmd_elim(args) -> Result:
    n = _read(args.files[0]).network
    elim = _names(args.eliminate)
    out = invariants.elimination_ideal(n, elim, Budget.from_env())
    res = {"eliminated": elim, "ring": list(out.ring), "generators": out.to_json()}
    return res, [f"<{', '.join(out.to_json())}>"]


def _parse_rates(text: str) -> dict[str, Fraction]:
    out = {}
    for item in _names(text):
        k, _, v = item.partition("=")
        out[k.strip()] = Fraction(v.strip())
    return out


def cmd_mss(args) -> Result:
    if args.verify:
        data = json.loads(_read_text(args.verify))
        data = data.get("result", {}).get("witness", data)
        ok, problems = mss.verify_witness(data)
        res = {"verified": ok, "problems": problems, "count": len(data.get("states", []))}
        return res, [f"witness verified: {ok}" + (f" ({len(data['states'])} states)" if ok else "")] + problems
    if not args.files:
        raise CrnError("mss needs a network file or --verify")
    n = _read(args.files[0]).network
    if args.rates:
        kappa = _parse_rates(args.rates)
        poly = mss.univariate_polynomial(n, kappa)
        rc = mss.count_positive_roots(poly)
        res = rc.to_dict()
        res["flags"] = [mss.classify_univariate_root(poly, iv, k).to_dict()
                        for iv, k in zip(rc.intervals, rc.multiplicities)]
        text = ["continuum: every positive value is a degenerate steady state" if rc.continuum
                else f"positive steady states: {rc.distinct}"]
        return res, text
    if all(r.reactant.is_zero() or r.reactant.is_monomolecular() for r in n.reactions):
        verdict = mss.monomolecular_mono_check(n)
    else:
        verdict = mss.search_multistationarity(n, args.budget, args.seed, args.target_count)
    res = verdict.to_dict()
    text = [f"verdict: {verdict.kind}"]
    if verdict.witness is not None:
        w = verdict.witness
        text.append(f"positive steady states: {w.count}; {w.to_dict()['evidence']}")
        text.append("rates: " + ", ".join(f"{k}={v}" for k, v in w.kappa))
        for s, f in zip(w.to_dict()["states"], w.flags):
            text.append(f"  ({', '.join(s)})  nondegenerate={f.nondegenerate} stable={f.exp_stable}")
        if args.witness_out:
            Path(args.witness_out).write_text(w.to_json() + "\n")
    elif verdict.reason:
        text.append(verdict.reason)
    else:
        text.append(f"no witness with {args.target_count} states in {args.budget} samples (not a proof)")
    return res, text


COMMANDS: dict[str, tuple[Callable, int, int]] = {
    "parse": (cmd_parse, 1, 1),
    "ode": (cmd_ode, 1, 1),
    "join": (cmd_join, 2, 2),
    "glue": (cmd_glue, 2, 2),
    "io-eq": (cmd_io_eq, 1, 1),
    "identifiability": (cmd_identifiability, 1, 1),
    "observe": (cmd_observe, 1, 1),
    "invariants": (cmd_invariants, 2, 2),
    "elim": (cmd_elim, 1, 1),
    "mss": (cmd_mss, 0, 1),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crnjoin", description="Reaction network joining and identifiability tools.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("files", nargs="*")
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        sp.add_argument("--seed", type=int, default=0)
        if name in ("io-eq", "identifiability", "observe"):
            sp.add_argument("--output", help="output species (comma separated)")
        if name in ("invariants", "elim"):
            sp.add_argument("--eliminate", help="species whose concentrations are eliminated")
        if name == "join":
            sp.add_argument("--scenario", type=int, choices=(1, 2, 3, 4))
            sp.add_argument("--map", help="bridged species pairs, e.g. X2:X3")
            sp.add_argument("--reaction", help="new reaction, e.g. '4A -> 5A [k7]'")
        if name == "mss":
            sp.add_argument("--budget", type=int, default=2000)
            sp.add_argument("--target-count", type=int, default=2)
            sp.add_argument("--verify", metavar="WITNESS")
            sp.add_argument("--witness-out", metavar="PATH")
            sp.add_argument("--rates", help="exact count at rates, e.g. k1=1,k2=2")
    return p


def _request(args) -> dict:
    skip = {"command", "files", "json"}
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None and v is not False}
    return {"subcommand": args.command, "inputs": list(args.files), "options": opts}


def _diagnostics(args) -> dict:
    b = Budget.from_env()
    d = {"seed": args.seed, "groebner_budget": {"max_steps": b.max_steps, "max_degree": b.max_degree}}
    if args.command == "mss":
        d["sample_budget"] = args.budget
    return d


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    out = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    handler, lo, hi = COMMANDS[args.command]
    report = {"schema_version": SCHEMA_VERSION, "request": _request(args)}
    try:
        if not (lo <= len(args.files) <= hi):
            raise CrnError(f"{args.command} takes {lo if lo == hi else f'{lo}-{hi}'} input file(s)")
        result, text = handler(args)
        code = 0
    except HypothesisError as exc:
        result, text, code = None, [], 2
        report["error"] = {"code": exc.code, "message": str(exc)}
    except (CrnError, ValueError) as exc:
        result, text, code = None, [], 1
        err = exc.code if isinstance(exc, CrnError) else ParseError.code
        report["error"] = {"code": err, "message": str(exc)}
    if result is not None:
        report["result"] = result
    report["diagnostics"] = _diagnostics(args)
    if args.json:
        out.write(json.dumps(report, indent=2) + "\n")
    elif code == 0:
        out.write("\n".join(text) + "\n")
    else:
        label = "not applicable" if code == 2 else "error"
        sys.stderr.write(f"{label} [{report['error']['code']}]: {report['error']['message']}\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
