"""Execution trees, outcome distributions under schedulers, and sampling.

The tree is stored as a DAG: states reached again at the same depth with the
same observation record (up to renaming of variable ids and reordering of the
register) are shared.  Probabilistic forks are always expanded; every other
fork is nondeterministic and is resolved by a scheduler.

Observations name what to record along a path:

* ``x``: the last value stored in a classical variable called ``x``, or the
  last state of a qubit called ``x``;
* ``!g``: the last value communicated on gate ``g``;
* ``x&y``: the last reduced state of the qubits called ``x`` and ``y`` while
  they were all in the register.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import context as cx
from .context import Context, ProbContext
from .quantum import DensityMatrix
from .semantics import (
    Engine,
    Prob,
    RunResult,
    Send,
    State,
    Tau,
    is_terminated,
)

DEFAULT_FUEL = 10_000
DEFAULT_MAX_PATHS = 100_000
FUEL_CUT = "fuel-cut"
DEADLOCK = "deadlock"
TERMINAL = "terminal"


# observations


def _qubit_group(name: str):
    return tuple(name.split("&"))


class Observer:
    """Updates an observation record (a tuple aligned with ``names``) along a path."""

    def __init__(self, names):
        self.names = tuple(names)
        self._gates = {n[1:]: i for i, n in enumerate(self.names) if n.startswith("!")}
        self._qubits = [(i, _qubit_group(n)) for i, n in enumerate(self.names) if "&" in n]
        self._plain = {n: i for i, n in enumerate(self.names) if not n.startswith("!") and "&" not in n}

    def initial(self, state: State) -> tuple:
        rec = [None] * len(self.names)
        if isinstance(state.ctx, Context):
            self._scan(None, state.ctx, rec)
        return tuple(rec)

    def update(self, rec: tuple, before: State, label, after: State) -> tuple:
        if not self.names:
            return rec
        new = list(rec)
        gate = None
        if isinstance(label, Send):
            gate, value = label.gate, label.value
        elif isinstance(label, Tau) and label.comm is not None and label.comm.value is not None:
            gate, value = label.comm.gate, label.comm.value
        if gate is not None and gate in self._gates:
            new[self._gates[gate]] = value
        if isinstance(after.ctx, Context) and not isinstance(label, Prob):
            prev = before.ctx if isinstance(before.ctx, Context) else None
            self._scan(prev, after.ctx, new)
        return tuple(new)

    def _scan(self, prev: Optional[Context], ctx: Context, rec: list):
        """Record classical values bound and qubit states changed since ``prev``.

        A variable is known by the name it was declared with and by every
        parameter name currently aliasing it.
        """
        old_f = prev.f if prev is not None else {}
        f_changed = ctx.f is not old_f
        q_changed = prev is None or prev.rho is not ctx.rho or prev.q != ctx.q
        if not (f_changed or q_changed):
            return
        names: dict = {}
        for e in cx.iter_entries(ctx.stack):
            names.setdefault(e.uid, set()).add(e.name)
        if f_changed:
            for uid, v in ctx.f.items():
                if old_f.get(uid) == v:
                    continue
                for n in names.get(uid, set()) | {cx.owner_name(uid)}:
                    i = self._plain.get(n)
                    if i is not None:
                        rec[i] = v
        if not q_changed:
            return
        holder = {}
        for u in ctx.q:
            for n in names.get(u, set()) | {cx.owner_name(u)}:
                holder[n] = u
        for i, group in self._qubits + [(i, (n,)) for n, i in self._plain.items()]:
            if all(n in holder for n in group):
                rec[i] = ctx.reduced([holder[n] for n in group])

    @staticmethod
    def key(rec: tuple) -> tuple:
        return tuple(_value_key(v) for v in rec)


def _value_key(v):
    if isinstance(v, DensityMatrix):
        return ("rho", (np.round(v.mat, 9) + 0.0).tobytes())
    return v


# trees


@dataclass
class Node:
    id: int
    state: State
    depth: int
    obs: tuple
    status: str = "open"  # inner, terminal, deadlock or fuel-cut
    edges: list = field(default_factory=list)  # of (Transition, child id)
    diagnostics: list = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.status != "inner"

    @property
    def probabilistic(self) -> bool:
        return bool(self.edges) and isinstance(self.edges[0][0].label, Prob)


@dataclass
class ExecutionTree:
    nodes: list
    observe: tuple
    partial: bool = False
    fuel: int = DEFAULT_FUEL

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def children(self, node: Node):
        return [(t, self.nodes[c]) for t, c in node.edges]

    def leaves(self):
        return [n for n in self.nodes if n.is_leaf]

    def outcome(self, node: Node) -> tuple:
        """Outcome key of a leaf: its status unless terminal, then its observations."""
        if node.status != TERMINAL:
            return (node.status,)
        return Observer.key(node.obs)

    def paths(self, limit: int = 1_000_000):
        """Yield ``(probability, [transitions])`` for every root-to-leaf path."""
        stack = [(self.root, 1.0, [])]
        count = 0
        while stack:
            node, p, path = stack.pop()
            if node.is_leaf:
                count += 1
                if count > limit:
                    return
                yield p, path, node
                continue
            for t, c in reversed(node.edges):
                q = p * t.label.p if isinstance(t.label, Prob) else p
                stack.append((self.nodes[c], q, path + [t]))


def _state_key(state: State):
    c = state.ctx
    if isinstance(c, ProbContext):
        ck = tuple((round(p, 12), cx.canonical_key(b)) for p, b in c.branches)
    else:
        ck = cx.canonical_key(c)
    return (state.term, ck)


def explore(
    initial: State,
    program=None,
    fuel: int = DEFAULT_FUEL,
    max_paths: int = DEFAULT_MAX_PATHS,
    observe=(),
    engine: Engine | None = None,
) -> ExecutionTree:
    """Expand every transition from ``initial`` up to ``fuel`` steps per path.

    At most ``max_paths`` distinct nodes are created; beyond that the tree is
    flagged partial and unexpanded nodes are cut like fuel-exhausted ones.
    """
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    engine = engine or Engine(program)
    observer = Observer(observe)
    root = Node(0, initial, 0, observer.initial(initial))
    nodes = [root]
    index = {(_state_key(initial), 0, Observer.key(root.obs)): 0}
    tree = ExecutionTree(nodes, observer.names, fuel=fuel)
    todo = [0]
    while todo:
        node = nodes[todo.pop()]
        trans, diags = engine.analyze(node.state)
        node.diagnostics = diags
        if not trans:
            ok = is_terminated(node.state.term) and node.state.stable
            node.status = TERMINAL if ok else DEADLOCK
            continue
        if node.depth >= fuel:
            node.status = FUEL_CUT
            continue
        if len(nodes) >= max_paths:
            node.status = FUEL_CUT
            tree.partial = True
            continue
        node.status = "inner"
        fresh = []
        for t in trans:
            obs = observer.update(node.obs, node.state, t.label, t.next)
            key = (_state_key(t.next), node.depth + 1, Observer.key(obs))
            cid = index.get(key)
            if cid is None:
                cid = len(nodes)
                index[key] = cid
                nodes.append(Node(cid, t.next, node.depth + 1, obs))
                fresh.append(cid)
            node.edges.append((t, cid))
        todo.extend(reversed(fresh))
    return tree


# distributions


@dataclass
class Bound:
    """Probability of an event: extremes over schedulers and their witnesses."""

    min: float
    max: float
    min_scheduler: dict
    max_scheduler: dict

    @property
    def exact(self) -> bool:
        return abs(self.max - self.min) <= 1e-12


def _order(tree: ExecutionTree):
    return sorted(range(len(tree.nodes)), key=lambda i: -tree.nodes[i].depth)


def probability(tree: ExecutionTree, event: Callable[[Node], bool], order=None) -> Bound:
    """Min and max probability of reaching a leaf satisfying ``event``."""
    n = len(tree.nodes)
    lo = np.zeros(n)
    hi = np.zeros(n)
    arg_lo: dict = {}
    arg_hi: dict = {}
    for i in order if order is not None else _order(tree):
        node = tree.nodes[i]
        if node.is_leaf:
            lo[i] = hi[i] = 1.0 if event(node) else 0.0
        elif node.probabilistic:
            lo[i] = sum(t.label.p * lo[c] for t, c in node.edges)
            hi[i] = sum(t.label.p * hi[c] for t, c in node.edges)
        else:
            vals_lo = [lo[c] for _, c in node.edges]
            vals_hi = [hi[c] for _, c in node.edges]
            a = int(np.argmin(vals_lo))
            b = int(np.argmax(vals_hi))
            lo[i], hi[i] = vals_lo[a], vals_hi[b]
            if len(node.edges) > 1:
                arg_lo[i], arg_hi[i] = a, b
    return Bound(
        float(lo[0]),
        float(hi[0]),
        _reachable_choices(tree, arg_lo),
        _reachable_choices(tree, arg_hi),
    )


def _reachable_choices(tree: ExecutionTree, choice: dict) -> dict:
    """Restrict a scheduler to the nodes it can actually reach."""
    out = {}
    seen = set()
    stack = [0]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        node = tree.nodes[i]
        if node.is_leaf:
            continue
        if node.probabilistic:
            stack.extend(c for _, c in node.edges)
        else:
            k = choice.get(i, 0)
            if len(node.edges) > 1:
                out[i] = k
            stack.append(node.edges[k][1])
    return out


def scheduled_probability(tree: ExecutionTree, scheduler: dict, event) -> float:
    """Probability of ``event`` when nondeterministic node ``i`` takes edge ``scheduler[i]``."""
    total = 0.0
    stack = [(0, 1.0)]
    while stack:
        i, p = stack.pop()
        node = tree.nodes[i]
        if node.is_leaf:
            total += p if event(node) else 0.0
        elif node.probabilistic:
            stack.extend((c, p * t.label.p) for t, c in node.edges)
        else:
            stack.append((node.edges[scheduler.get(i, 0)][1], p))
    return total


def is_deterministic(tree: ExecutionTree) -> bool:
    """True when no node offers a choice between different subtrees' outcomes.

    Checked cheaply: every nondeterministic fork leads to children with the
    same exact outcome distribution.
    """
    return all(b.exact for b in outcome_bounds(tree).values())


def outcome_bounds(tree: ExecutionTree) -> dict:
    """Outcome key -> Bound, over all leaf outcomes of the tree."""
    order = _order(tree)
    keys = []
    for node in tree.leaves():
        k = tree.outcome(node)
        if k not in keys:
            keys.append(k)
    return {k: probability(tree, lambda n, k=k: n.is_leaf and tree.outcome(n) == k, order) for k in keys}


@dataclass
class Distribution:
    """Outcome probabilities with scheduler intervals, marginals and conditionals."""

    observe: tuple
    outcomes: dict  # outcome key -> Bound
    marginals: dict  # name -> {value key -> Bound}
    conditionals: dict  # (name, given) -> {given value -> {value -> probability}}
    values: dict  # outcome key -> readable values (DensityMatrix kept as is)
    diagnostics: list

    @property
    def deterministic(self) -> bool:
        return all(b.exact for b in self.outcomes.values())

    def prob(self, **values) -> float:
        """Exact probability of the outcomes matching ``values`` (deterministic trees)."""
        total = 0.0
        for key, b in self.outcomes.items():
            vals = self.values[key]
            if isinstance(vals, dict) and all(vals.get(k) == v for k, v in values.items()):
                total += b.min
        return total


def distribution(tree: ExecutionTree, observe=None) -> Distribution:
    """Distribution of the observations recorded by ``explore`` at terminal leaves."""
    names = tree.observe if observe is None else tuple(observe)
    if tuple(names) != tree.observe:
        raise ValueError(f"tree was explored observing {list(tree.observe)}, not {list(names)}")
    order = _order(tree)
    diags = []
    values = {}
    for node in tree.leaves():
        k = tree.outcome(node)
        if node.status == TERMINAL:
            missing = [n for n, v in zip(names, node.obs) if v is None]
            if missing:
                diags.append(f"leaf {node.id}: {', '.join(missing)} never bound")
            values[k] = dict(zip(names, node.obs))
        else:
            values[k] = node.status
            diags.append(f"leaf {node.id} ended in {node.status}")
    outcomes = {
        k: probability(tree, lambda n, k=k: n.is_leaf and tree.outcome(n) == k, order) for k in values
    }

    marginals = {}
    for i, name in enumerate(names):
        vals = {}
        for k, v in values.items():
            vk = _value_key(v[name]) if isinstance(v, dict) else k[0]
            vals.setdefault(vk, v[name] if isinstance(v, dict) else v)
        marginals[name] = {
            vk: probability(tree, lambda n, i=i, vk=vk: _leaf_value(tree, n, i) == vk, order)
            for vk in vals
        }

    conditionals = {}
    exact = all(b.exact for b in outcomes.values())
    if exact:
        for i, a in enumerate(names):
            for j, b in enumerate(names):
                if i == j:
                    continue
                table: dict = {}
                for k, bound in outcomes.items():
                    v = values[k]
                    if not isinstance(v, dict):
                        continue
                    gv, av = _value_key(v[b]), _value_key(v[a])
                    table.setdefault(gv, {}).setdefault(av, 0.0)
                    table[gv][av] += bound.min
                for gv, row in table.items():
                    s = sum(row.values())
                    if s > 0:
                        table[gv] = {av: p / s for av, p in row.items()}
                conditionals[(a, b)] = table
    return Distribution(tuple(names), outcomes, marginals, conditionals, values, diags)


def _leaf_value(tree, node, i):
    if not node.is_leaf:
        return None
    if node.status != TERMINAL:
        return node.status
    return _value_key(node.obs[i])


# sampling


class Sampler:
    """Seeded random runs: probabilistic forks by weight, others uniformly.

    Transitions are cached per canonical state, so repeated runs over the same
    program only pay for the states they have not visited before.
    """

    def __init__(self, program=None, seed: int = 0, engine: Engine | None = None, cache: bool = True):
        self.engine = engine or Engine(program)
        self.rng = random.Random(seed)
        self._cache: dict | None = {} if cache else None
        self._by_id: dict = {}  # cached states are kept alive by the cache

    def _enabled(self, state: State):
        if self._cache is None:
            trans, diags = self.engine.analyze(state)
            return state, trans, diags
        hit = self._by_id.get(id(state))
        if hit is not None:
            return hit
        key = _state_key(state)
        hit = self._cache.get(key)
        if hit is None:
            trans, diags = self.engine.analyze(state)
            hit = self._cache[key] = (state, trans, diags)
            self._by_id[id(state)] = hit
        return hit

    def _choose(self, trans) -> int:
        if isinstance(trans[0].label, Prob):
            r = self.rng.random()
            acc = 0.0
            for i, t in enumerate(trans):
                acc += t.label.p
                if r < acc:
                    return i
            return len(trans) - 1
        return self.rng.randrange(len(trans))

    def run(self, initial: State, fuel: int = DEFAULT_FUEL, observe=()) -> tuple:
        """One run: ``(RunResult, observation record)``."""
        observer = Observer(observe)
        rec = observer.initial(initial)
        state = initial
        steps = []
        for _ in range(fuel + 1):
            state, trans, diags = self._enabled(state)
            if not trans:
                ok = is_terminated(state.term) and state.stable
                return RunResult(TERMINAL if ok else DEADLOCK, state, steps, diags), rec
            if len(steps) == fuel:
                break
            t = trans[self._choose(trans)]
            rec = observer.update(rec, state, t.label, t.next)
            steps.append((t.rule, t.label, t.next))
            state = t.next
        return RunResult(FUEL_CUT, state, steps, []), rec


def trace(result: RunResult, decimals: int = 6) -> list:
    """Serializable trace: ``[rule tag, rendered label, context digest]`` per step."""
    return [[rule, str(label), cx.digest(st.ctx, decimals)] for rule, label, st in result.steps]


def sample(initial: State, program=None, seed: int = 0, fuel: int = DEFAULT_FUEL, engine=None):
    """One seeded run: ``(RunResult, trace)``."""
    result, _ = Sampler(program, seed, engine).run(initial, fuel)
    return result, trace(result)
