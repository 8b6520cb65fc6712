"""JSON model files (transition systems, labelled/terminal Markov chains).

Formats (all probabilities are exact-rational strings like "1/2"):

* transition system:     {"states": n, "edges": [[from, to], ...]}
* labelled Markov chain: {"states": n, "labels": [...], "delta": [[["p/q", target], ...], ...]}
* Markov chain:          {"states": n, "terminal": [...], "delta": {"state": [["p/q", target], ...]}}

Each format accepts an optional "names" array used by the CLI and the session
API for display and state lookup.  The model kind is inferred from the fields.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .bisim import BisimInstance, TransitionSystem
from .errors import StructuralError
from .instance import Instance
from .metric import LabelledMarkovChain, MetricInstance
from .rat import format_rational, parse_unit_rational
from .termination import MarkovChain, TerminationInstance


@dataclass(frozen=True)
class LoadedModel:
    kind: str  # bisim | metric | termination
    model: TransitionSystem | LabelledMarkovChain | MarkovChain
    names: tuple[str, ...]
    canonical: dict
    digest: str

    def make_instance(self, max_iter: int | None = None) -> Instance:
        if self.kind == "bisim":
            return BisimInstance(self.model, max_iter)
        if self.kind == "metric":
            return MetricInstance(self.model, max_iter or 64)
        return TerminationInstance(self.model, max_iter or 64)

    def state_index(self, token: str) -> int:
        token = str(token).strip()
        if token in self.names:
            return self.names.index(token)
        if token.lstrip("-").isdigit():
            idx = int(token)
            if 0 <= idx < len(self.names):
                return idx
        raise StructuralError(f"unknown state name {token!r} (known: {', '.join(self.names)})")

    def state_name(self, idx: int) -> str:
        return self.names[idx]


def _names(data: dict, n: int) -> tuple[str, ...]:
    names = data.get("names")
    if names is None:
        return tuple(str(i) for i in range(n))
    if len(names) != n or len(set(names)) != n:
        raise StructuralError("names must be distinct and cover every state")
    return tuple(str(x) for x in names)


def _parse_dist(row: Any, where: str) -> tuple[tuple[int, Fraction], ...]:
    out: list[tuple[int, Fraction]] = []
    if not isinstance(row, list):
        raise StructuralError(f"{where}: distribution must be a list of [\"p/q\", target] pairs")
    for entry in row:
        if not isinstance(entry, list) or len(entry) != 2:
            raise StructuralError(f"{where}: malformed distribution entry {entry!r}")
        prob = parse_unit_rational(entry[0])
        target = int(entry[1])
        if prob > 0:
            out.append((target, prob))
    return tuple(out)


def parse_model(data: Any) -> LoadedModel:
    if not isinstance(data, dict) or "states" not in data:
        raise StructuralError("model file must be a JSON object with a 'states' field")
    n = int(data["states"])
    if "edges" in data:
        succ: list[list[int]] = [[] for _ in range(n)]
        for edge in data["edges"]:
            if not isinstance(edge, list) or len(edge) != 2:
                raise StructuralError(f"malformed edge {edge!r}")
            frm, to = int(edge[0]), int(edge[1])
            if not (0 <= frm < n and 0 <= to < n):
                raise StructuralError(f"edge {edge!r} out of range")
            if to not in succ[frm]:
                succ[frm].append(to)
        ts = TransitionSystem(n, tuple(tuple(s) for s in succ))
        names = _names(data, n)
        canonical = {
            "states": n,
            "edges": sorted([f, t] for f in range(n) for t in ts.succ(f)),
            "names": list(names),
        }
        return LoadedModel("bisim", ts, names, canonical, _digest(canonical))
    if "labels" in data:
        if "delta" not in data:
            raise StructuralError("labelled Markov chain needs a 'delta' field")
        rows = data["delta"]
        if not isinstance(rows, list) or len(rows) != n:
            raise StructuralError("'delta' must list one distribution per state")
        delta = tuple(_parse_dist(rows[x], f"state {x}") for x in range(n))
        labels = tuple(str(l) for l in data["labels"])
        lmc = LabelledMarkovChain(n, labels, delta)
        names = _names(data, n)
        canonical = {
            "states": n,
            "labels": list(labels),
            "delta": [
                sorted([format_rational(p), y] for y, p in row) for row in delta
            ],
            "names": list(names),
        }
        return LoadedModel("metric", lmc, names, canonical, _digest(canonical))
    if "terminal" in data:
        if "delta" not in data or not isinstance(data["delta"], dict):
            raise StructuralError("Markov chain needs a 'delta' object keyed by state")
        terminal = frozenset(int(t) for t in data["terminal"])
        delta: list[tuple[tuple[int, Fraction], ...] | None] = [None] * n
        for key, row in data["delta"].items():
            x = int(key)
            if not 0 <= x < n:
                raise StructuralError(f"delta key {key!r} out of range")
            delta[x] = _parse_dist(row, f"state {x}")
        for x in range(n):
            if x not in terminal and delta[x] is None:
                raise StructuralError(f"non-terminal state {x} is missing a distribution")
            if x in terminal and delta[x] is not None:
                raise StructuralError(f"terminal state {x} must not carry a distribution")
        mc = MarkovChain(n, terminal, tuple(delta))
        names = _names(data, n)
        canonical = {
            "states": n,
            "terminal": sorted(terminal),
            "delta": {
                str(x): sorted([format_rational(p), y] for y, p in mc.delta[x])
                for x in range(n)
                if mc.delta[x] is not None
            },
            "names": list(names),
        }
        return LoadedModel("termination", mc, names, canonical, _digest(canonical))
    raise StructuralError(
        "cannot infer the model kind: expected 'edges' (transition system), "
        "'labels' (labelled Markov chain) or 'terminal' (Markov chain)"
    )


def load_model(path: str | Path) -> LoadedModel:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise StructuralError(f"model file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise StructuralError(f"model file {path} is not valid JSON: {exc}") from exc
    return parse_model(data)


def _digest(canonical: dict) -> str:
    blob = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
