"""Command-line interface: fixpoint queries, certificates, checking, game server.

Exit codes: 0 success/accept, 1 reject or unknown, 2 usage error.
All rational constants on the command line and in files are "p/q" strings.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import __version__
from .errors import FixwitError, StructuralError, SynthesisError
from .fixpoint import codegree, degree, kleene_lfp
from .game import synthesize_dual_strategy, synthesize_primal_strategy
from .lattice import (
    BasisElement,
    DistJoin,
    DistMeet,
    RelJoin,
    RelMeet,
    ValJoin,
    ValMeet,
    is_join_basis,
)
from .modelio import LoadedModel, load_model
from .rat import format_rational, parse_unit_rational
from .witness import (
    WitnessClaim,
    claim_from_json,
    claim_to_json,
    dual_witness_from_strategy,
    primal_witness_from_strategy,
    verify_witness,
    witness_from_json,
    witness_to_json,
)

CERT_FORMAT = "fixwit-certificate/1"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Spec parsing


def parse_basis_spec(model: LoadedModel, text: str) -> BasisElement:
    """Basis element grammar: co{u,v} / in{u,v} (relations), f^{p/q}_x and
    ~f^{p/q}_x (valuations), d^{p/q}_{u,v} and ~d^{p/q}_{u,v} (distances)."""
    s = text.strip()
    m = re.fullmatch(r"(co|in)\{(.+?),(.+?)\}", s)
    if m:
        if model.kind != "bisim":
            raise UsageError(f"basis element {text!r} needs a transition system model")
        x1, x2 = model.state_index(m.group(2)), model.state_index(m.group(3))
        return RelJoin(x1, x2) if m.group(1) == "co" else RelMeet(x1, x2)
    m = re.fullmatch(r"(~?)f\^\{(.+?)\}_(.+)", s)
    if m:
        if model.kind != "termination":
            raise UsageError(f"basis element {text!r} needs a Markov chain model")
        c = parse_unit_rational(m.group(2))
        x = model.state_index(m.group(3))
        return ValMeet(x, c) if m.group(1) else ValJoin(x, c)
    m = re.fullmatch(r"(~?)d\^\{(.+?)\}_\{(.+?),(.+?)\}", s)
    if m:
        if model.kind != "metric":
            raise UsageError(f"basis element {text!r} needs a labelled Markov chain model")
        c = parse_unit_rational(m.group(2))
        x1, x2 = model.state_index(m.group(3)), model.state_index(m.group(4))
        return DistMeet(x1, x2, c) if m.group(1) else DistJoin(x1, x2, c)
    raise UsageError(
        f"cannot parse basis element {text!r}; expected co{{u,v}}, in{{u,v}}, "
        "f^{p/q}_x, ~f^{p/q}_x, d^{p/q}_{u,v} or ~d^{p/q}_{u,v}"
    )


def parse_claim_spec(model: LoadedModel, text: str, mode: str) -> tuple[WitnessClaim, str]:
    """Claim grammar per model kind: "u,v" (bisimilarity), "u,v > p/q"
    (behavioural distance), "x > p/q" (termination probability)."""
    s = text.strip()
    if model.kind == "bisim":
        m = re.fullmatch(r"(.+?)\s*(?:,|!=)\s*(.+)", s)
        if not m:
            raise UsageError(f"bisimilarity claims look like 'u,v', got {text!r}")
        x1, x2 = model.state_index(m.group(1)), model.state_index(m.group(2))
        element = RelJoin(x1, x2) if mode == "primal" else RelMeet(x1, x2)
        statement = f"states {model.state_name(x1)} and {model.state_name(x2)} are not bisimilar"
        return WitnessClaim(mode, element), statement
    if model.kind == "metric":
        m = re.fullmatch(r"(.+?)\s*,\s*(.+?)\s*>\s*(\S+)", s)
        if not m:
            raise UsageError(f"metric claims look like 'x1,x2 > p/q', got {text!r}")
        x1, x2 = model.state_index(m.group(1)), model.state_index(m.group(2))
        c = parse_unit_rational(m.group(3))
        if mode == "primal" and c == 0:
            raise UsageError("primal claims need a constant > 0 (join-basis elements exclude bottom)")
        element = DistJoin(x1, x2, c) if mode == "primal" else DistMeet(x1, x2, c)
        statement = (
            f"behavioural distance of {model.state_name(x1)} and {model.state_name(x2)} "
            f"exceeds {format_rational(c)}"
        )
        return WitnessClaim(mode, element), statement
    m = re.fullmatch(r"(.+?)\s*>\s*(\S+)", s)
    if not m:
        raise UsageError(f"termination claims look like 'x > p/q', got {text!r}")
    x = model.state_index(m.group(1))
    c = parse_unit_rational(m.group(2))
    if mode == "primal" and c == 0:
        raise UsageError("primal claims need a constant > 0 (join-basis elements exclude bottom)")
    element = ValJoin(x, c) if mode == "primal" else ValMeet(x, c)
    statement = f"termination probability of {model.state_name(x)} exceeds {format_rational(c)}"
    return WitnessClaim(mode, element), statement


def _max_iter(args) -> int | None:
    if args.max_iter is not None:
        return args.max_iter
    env = os.environ.get("FIXWIT_MAX_ITER")
    return int(env) if env else None


# ---------------------------------------------------------------------------
# Commands


def cmd_fixpoint(args) -> int:
    model = load_model(args.model)
    instance = model.make_instance(_max_iter(args))
    value, iterations, converged = kleene_lfp(instance.problem)
    payload = {
        "kind": model.kind,
        "converged": converged,
        "iterations": iterations,
        "value": instance.behaviour.value_to_json(value),
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        status = "fixpoint" if converged else f"iterate {iterations} (not converged)"
        print(f"{model.kind}: {status} after {iterations} iterations")
        _print_value(model, instance, value)
    return 0 if converged else 1


def _print_value(model: LoadedModel, instance, value) -> None:
    if model.kind == "bisim":
        pairs = [
            f"({model.state_name(i)},{model.state_name(j)})"
            for i, j in instance.behaviour.pairs(value)
        ]
        print("  relation: {" + ", ".join(pairs) + "}")
    elif model.kind == "termination":
        for x, q in enumerate(value):
            print(f"  {model.state_name(x)}: {format_rational(q)}")
    else:
        for i in range(instance.behaviour.n):
            for j in range(i + 1, instance.behaviour.n):
                print(
                    f"  d({model.state_name(i)},{model.state_name(j)}) = "
                    + format_rational(value[i][j])
                )


def cmd_degree(args) -> int:
    model = load_model(args.model)
    instance = model.make_instance(_max_iter(args))
    element = parse_basis_spec(model, args.basis)
    if is_join_basis(element):
        result = degree(instance.problem, element)
        which = "degree"
    else:
        result = codegree(instance.problem, element)
        which = "codegree"
    if args.json:
        print(json.dumps({which: result.value, "iterations": result.iterations}))
    else:
        print(f"{which}({element}) = {result}")
    return 0 if result.known else 1


def cmd_witness(args) -> int:
    model = load_model(args.model)
    instance = model.make_instance(_max_iter(args))
    claim, statement = parse_claim_spec(model, args.claim, args.mode)
    try:
        if args.mode == "primal":
            strategy = synthesize_primal_strategy(instance, claim.element)
            witness = primal_witness_from_strategy(instance, claim.element, strategy)
        else:
            strategy = synthesize_dual_strategy(instance, claim.element)
            witness = dual_witness_from_strategy(instance, claim.element, strategy)
    except SynthesisError as exc:
        print(f"unknown: {exc}", file=sys.stderr)
        return 1
    verdict = verify_witness(instance, claim, witness)
    if not verdict.accepted:
        print(f"internal error: generated witness failed verification: {verdict}", file=sys.stderr)
        return 1
    certificate = {
        "format": CERT_FORMAT,
        "tool": {"name": "fixwit", "version": __version__},
        "model": {"kind": model.kind, "sha256": model.digest},
        "claim": {**claim_to_json(claim), "statement": statement},
        "witness": witness_to_json(instance, witness),
        "verification": {"verdict": "accept", "evidence": verdict.evidence},
    }
    blob = json.dumps(certificate, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(blob + "\n")
        if not args.json:
            print(f"accept: certificate written to {args.out}")
        else:
            print(blob)
    else:
        print(blob)
    return 0


def cmd_check(args) -> int:
    model = load_model(args.model)
    instance = model.make_instance(_max_iter(args))
    try:
        cert = json.loads(Path(args.certificate).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise StructuralError(f"cannot read certificate {args.certificate}: {exc}") from exc
    if not isinstance(cert, dict) or cert.get("format") != CERT_FORMAT:
        raise StructuralError(f"not a {CERT_FORMAT} certificate")
    reasons = []
    if cert.get("model", {}).get("sha256") != model.digest:
        reasons.append("certificate was issued for a different model (hash mismatch)")
    claim = claim_from_json(cert["claim"])
    witness = witness_from_json(instance, cert["witness"])
    verdict = verify_witness(instance, claim, witness)
    reasons.extend(verdict.reasons)
    accepted = verdict.accepted and not reasons
    out = {
        "verdict": "accept" if accepted else "reject",
        "reasons": reasons,
        "evidence": verdict.evidence,
    }
    if args.json:
        print(json.dumps(out, indent=2, sort_keys=True))
    else:
        print(out["verdict"] + ("" if accepted else ": " + "; ".join(reasons)))
        for key, val in verdict.evidence.items():
            print(f"  {key}: {val}")
    return 0 if accepted else 1


def cmd_play(args) -> int:
    from .server import serve

    model = load_model(args.model)
    serve(
        model,
        variant=args.variant,
        human_role=args.role,
        host=args.host,
        port=args.port,
        max_iter=_max_iter(args),
    )
    return 0


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixwit",
        description="Least-fixpoint certificates: games, witnesses, independent checking.",
    )
    parser.add_argument("--version", action="version", version=f"fixwit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("model", help="model file (JSON)")
        p.add_argument("--max-iter", type=int, default=None, help="iteration bound (or FIXWIT_MAX_ITER)")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("fixpoint", help="iterate to the least fixpoint")
    common(p)
    p.set_defaults(fn=cmd_fixpoint)

    p = sub.add_parser("degree", help="degree/co-degree of a basis element")
    common(p)
    p.add_argument("basis", help="basis element, e.g. f^{3/10}_x or co{u,v}")
    p.set_defaults(fn=cmd_degree)

    p = sub.add_parser("witness", help="produce a certificate for a claim")
    common(p)
    p.add_argument("claim", help="claim, e.g. 'x > 3/5' or 'u,v' or 'x1,x2 > 1/8'")
    p.add_argument("--mode", choices=["primal", "dual"], default="primal")
    p.add_argument("--out", help="certificate output file")
    p.set_defaults(fn=cmd_witness)

    p = sub.add_parser("check", help="verify a certificate against a model")
    common(p)
    p.add_argument("certificate", help="certificate file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("play", help="serve the interactive game session API")
    common(p)
    p.add_argument("--variant", choices=["primal", "dual"], default="primal")
    p.add_argument("--role", choices=["exists", "forall"], default="exists", help="the human's role")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_play)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FixwitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
