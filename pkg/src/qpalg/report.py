"""JSON and DOT renderings of runs and execution trees."""
from __future__ import annotations

import json

import numpy as np

from . import context as cx
from .explorer import TERMINAL, Distribution, ExecutionTree, trace
from .quantum import DensityMatrix
from .semantics import Prob, RunResult
from .syntax import flat


def matrix_json(m, decimals: int = 12) -> list:
    """Complex matrix as nested ``[re, im]`` pairs."""
    a = np.round(np.asarray(m.mat if isinstance(m, DensityMatrix) else m), decimals) + 0.0
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def value_json(v):
    if isinstance(v, DensityMatrix):
        return matrix_json(v)
    return v


def _key(v) -> str:
    return str(v)


def _prob(bound):
    """A single number when schedulers agree, else ``[min, max]``."""
    if bound.exact:
        return bound.min
    return [bound.min, bound.max]


def run_json(result: RunResult, observe=(), record=()) -> dict:
    return {
        "status": result.status,
        "steps": trace(result),
        "final": cx.digest(result.final.ctx),
        "observations": {n: value_json(v) for n, v in zip(observe, record)},
    }


def distribution_json(tree: ExecutionTree, dist: Distribution | None) -> dict:
    counts = {}
    for n in tree.leaves():
        counts[n.status] = counts.get(n.status, 0) + 1
    out = {"partial": tree.partial, "nodes": len(tree.nodes), "leaves": counts}
    if dist is None:
        return out
    outcomes = []
    for k, b in dist.outcomes.items():
        v = dist.values[k]
        outcomes.append(
            {
                "values": {n: value_json(x) for n, x in v.items()} if isinstance(v, dict) else v,
                "min": b.min,
                "max": b.max,
                "min_scheduler": {str(i): c for i, c in b.min_scheduler.items()},
                "max_scheduler": {str(i): c for i, c in b.max_scheduler.items()},
            }
        )
    out["outcomes"] = outcomes
    marginals = {}
    for name, table in dist.marginals.items():
        if any(isinstance(k, tuple) for k in table):
            continue  # matrices are listed with the outcomes
        marginals[name] = {_key(k): _prob(b) for k, b in table.items()}
    out["marginals"] = marginals
    conditionals = {}
    for (a, b), table in dist.conditionals.items():
        if any(isinstance(g, tuple) or any(isinstance(x, tuple) for x in row) for g, row in table.items()):
            continue
        conditionals[f"{a}|{b}"] = {
            _key(g): {_key(x): p for x, p in row.items()} for g, row in table.items()
        }
    out["conditionals"] = conditionals
    return out


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False, allow_nan=False)


# DOT


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


def _head(term) -> str:
    text = flat(term)
    return text if len(text) <= 40 else text[:37] + "..."


def _ctx_text(ctx) -> str:
    d = cx.digest(ctx, 3)
    q = ", ".join(d["q"]) or "-"
    f = ", ".join(f"{k}={v}" for k, v in d["f"].items()) or "-"
    rho = np.round(ctx.rho.mat, 3) + 0.0
    rows = "\n".join(" ".join(f"{z.real:g}{z.imag:+g}i" if z.imag else f"{z.real:g}" for z in r) for r in rho)
    return f"q = [{q}]\nf = {{{f}}}\nrho =\n{rows}"


def to_dot(tree: ExecutionTree) -> str:
    lines = ["digraph execution {", "  node [shape=box, fontname=monospace];"]
    for n in tree.nodes:
        stab = "stable" if n.state.stable else "unstable"
        label = f"{type(n.state.term).__name__} ({stab})\n{_head(n.state.term)}"
        attrs = ""
        if n.status == TERMINAL:
            label += "\n" + _ctx_text(n.state.ctx)
            attrs = ", peripheries=2"
        elif n.is_leaf:
            label += f"\n[{n.status}]"
            attrs = ", style=dashed"
        lines.append(f'  n{n.id} [label="{_esc(label)}"{attrs}];')
    for n in tree.nodes:
        for t, c in n.edges:
            if isinstance(t.label, Prob):
                lab = f"p={t.label.p:.6g}"
                style = ", style=dotted"
            else:
                lab = f"{t.label} [{t.rule}]"
                style = ""
            lines.append(f'  n{n.id} -> n{c} [label="{_esc(lab)}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
