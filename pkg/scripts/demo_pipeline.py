#!/usr/bin/env python3
"""End-to-end tour on the bundled models: fixpoints, degrees, certificates in
both modes, independent re-checking, and a full game transcript per model.

Usage: python3 scripts/demo_pipeline.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from fixwit.cli import main as fixwit_main  # noqa: E402
from fixwit.game import PRIMAL, adversarial_forall_policy, play, synthesize_primal_strategy  # noqa: E402
from fixwit.modelio import load_model  # noqa: E402
from fixwit.witness import PrimalWitnessPlayer, primal_witness_from_strategy  # noqa: E402

CLAIMS = {
    "ts3.json": "u,v",
    "geometric.json": "x > 3/5",
    "lmc4.json": "x1,x2 > 1/8",
}


def banner(text: str) -> None:
    print("\n" + "=" * 72)
    print(text)
    print("=" * 72)


def run(argv: list[str]) -> int:
    print(f"$ fixwit {' '.join(argv)}")
    code = fixwit_main(argv)
    print(f"(exit {code})")
    return code


def main() -> int:
    workdir = Path(tempfile.mkdtemp(prefix="fixwit-demo-"))
    for model_name, claim in CLAIMS.items():
        model_path = str(ROOT / "models" / model_name)
        banner(f"{model_name}: claim {claim!r}")
        run(["fixpoint", model_path])
        for mode in ("primal", "dual"):
            cert = workdir / f"{model_name}.{mode}.cert.json"
            if run(["witness", model_path, claim, "--mode", mode, "--out", str(cert)]) == 0:
                run(["check", model_path, str(cert)])
                payload = json.loads(cert.read_text())["witness"]["payload"]
                print(f"{mode} witness payload: {json.dumps(payload)}")

        # a full primal game: witness-driven exists vs the hardest forall
        model = load_model(model_path)
        instance = model.make_instance()
        from fixwit.cli import parse_claim_spec

        parsed, _ = parse_claim_spec(model, claim, "primal")
        strategy = synthesize_primal_strategy(instance, parsed.element)
        witness = primal_witness_from_strategy(instance, parsed.element, strategy)
        player = PrimalWitnessPlayer(instance, witness, parsed.element)
        outcome = play(
            instance, PRIMAL, parsed.element, player.as_policy(),
            adversarial_forall_policy(instance), max_rounds=32,
        )
        print(f"game: {outcome.winner} wins ({outcome.reason})")
        for entry in outcome.transcript:
            print(f"  round {entry.round_index} {entry.player}: {entry.detail}")
    print(f"\ncertificates written under {workdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
