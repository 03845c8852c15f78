"""The bundled protocol corpus and the checks each program must satisfy."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .explorer import DEFAULT_FUEL, TERMINAL, distribution, explore
from .quantum import DensityMatrix, trace_distance
from .semantics import Send, Tau, initial_state
from .syntax import parse_program

TOL = 1e-9

_S = 1 / math.sqrt(2)
NAMED_STATES = {
    "zero": [1, 0],
    "one": [0, 1],
    "plus": [_S, _S],
    "minus": [_S, -_S],
    "epr": [_S, 0, 0, _S],
}


def named_state(name: str) -> DensityMatrix:
    return DensityMatrix.pure(np.array(NAMED_STATES[name], dtype=complex))


@dataclass
class CorpusEntry:
    name: str
    path: str
    description: str
    status: str
    observe: tuple
    expect: list
    fuel: int = DEFAULT_FUEL

    def source(self) -> str:
        with open(self.path, encoding="utf-8") as fh:
            return fh.read()

    def program(self):
        return parse_program(self.source())


@dataclass
class CheckResult:
    kind: str
    ok: bool
    detail: str = ""


@dataclass
class EntryReport:
    entry: CorpusEntry
    status_ok: bool
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status_ok and all(c.ok for c in self.checks)


def _corpus_dir():
    return resources.files("qpalg") / "corpus"


def corpus() -> list:
    """All bundled programs with their expectations."""
    root = _corpus_dir()
    data = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    return [
        CorpusEntry(
            name=e["name"],
            path=str(root / e["file"]),
            description=e["description"],
            status=e["status"],
            observe=tuple(e["observe"]),
            expect=e["expect"],
            fuel=e.get("fuel", DEFAULT_FUEL),
        )
        for e in data["entries"]
    ]


def entry(name: str) -> CorpusEntry:
    for e in corpus():
        if e.name == name:
            return e
    raise KeyError(name)


def _parse_key(k: str):
    try:
        return int(k)
    except ValueError:
        return k


def check_entry(e: CorpusEntry) -> EntryReport:
    """Explore ``e`` exhaustively and evaluate each of its expectations."""
    prog = e.program()
    tree = explore(initial_state(prog), prog, fuel=e.fuel, observe=e.observe)
    leaves = tree.leaves()
    statuses = {n.status for n in leaves}
    report = EntryReport(e, statuses == {e.status})
    dist = distribution(tree) if e.observe else None
    terminal = [n for n in leaves if n.status == TERMINAL]

    def val(node, name):
        return node.obs[e.observe.index(name)]

    for x in e.expect:
        kind = x["kind"]
        if kind == "leaves":
            ok = len(leaves) == x["count"]
            report.checks.append(CheckResult(kind, ok, f"{len(leaves)} leaves"))
        elif kind == "no_deadlock":
            ok = "deadlock" not in statuses
            report.checks.append(CheckResult(kind, ok, f"leaf statuses {sorted(statuses)}"))
        elif kind == "state":
            want = named_state(x["state"])
            worst = max(trace_distance(val(n, x["observe"]), want) for n in terminal)
            ok = worst <= x.get("tol", TOL)
            report.checks.append(CheckResult(kind, ok, f"max trace distance {worst:.3g}"))
        elif kind == "marginal":
            got = dist.marginals[x["observe"]]
            want = {_parse_key(k): p for k, p in x["probs"].items()}
            ok = set(got) == set(want) and all(
                abs(got[k].min - p) <= TOL and abs(got[k].max - p) <= TOL for k, p in want.items()
            )
            shown = {k: (b.min, b.max) for k, b in got.items()}
            report.checks.append(CheckResult(kind, ok, f"{x['observe']}: {shown}"))
        elif kind == "conditional":
            table = dist.conditionals.get((x["observe"], x["given"]), {})
            ok = bool(table) and all(
                abs(max(row.values()) - x["prob"]) <= TOL for row in table.values()
            )
            report.checks.append(CheckResult(kind, ok, f"{x['observe']}|{x['given']}: {table}"))
        elif kind == "agree":
            a, b = x["observe"]
            p = sum(bound.min for k, bound in dist.outcomes.items()
                    if isinstance(dist.values[k], dict) and dist.values[k][a] == dist.values[k][b])
            ok = dist.deterministic and abs(p - x["prob"]) <= TOL
            report.checks.append(CheckResult(kind, ok, f"P({a} = {b}) = {p}"))
        elif kind == "equal_when":
            bad = [
                n.id for n in terminal
                if all(val(n, k) == v for k, v in x["when"].items())
                and len({val(n, k) for k in x["equal"]}) != 1
            ]
            report.checks.append(CheckResult(kind, not bad, f"violating leaves {bad}"))
        elif kind == "communications":
            bad = []
            for _, path, leaf in tree.paths():
                comms = [
                    t.label.comm.value for t in path
                    if isinstance(t.label, Tau) and t.label.comm is not None
                    and t.label.comm.kind == "value"
                ]
                sends = [t.label.value for t in path if isinstance(t.label, Send)]
                vals = comms + sends
                if len(vals) != x["count"] or any(v not in x["values"] for v in vals):
                    bad.append(vals)
            report.checks.append(CheckResult(kind, not bad, f"offending paths {bad[:3]}"))
        else:
            raise ValueError(f"unknown expectation kind {kind!r}")
    return report
