"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances."""
import math
import random
import time

import numpy as np
import pytest

from qpalg import context as cx
from qpalg.explorer import TERMINAL, Sampler, distribution, explore
from qpalg.library import corpus, entry
from qpalg.semantics import Engine, Prob, SendQubit, Send, Tau, initial_state
from qpalg.syntax import flat, parse_process, parse_program, pretty_print, print_program

import classical_ref
import oracle_sim
from classical_cases import PROGRAMS, engine_traces
from gen import random_ast, random_program_ast, random_runnable

TOL = 1e-9


@pytest.fixture
def verdict(record_property):
    def report(n, title, ok, detail=""):
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else "")
        print(line)
        record_property("acceptance", line)
        assert ok, line

    return report


def explored(name, observe=(), **kw):
    prog = entry(name).program()
    return prog, explore(initial_state(prog), prog, observe=observe, **kw)


def trace_distance(a, b):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


# reference states, written out independently of the package
R = 1 / math.sqrt(2)
H = np.array([[R, R], [R, -R]])
X = np.array([[0, 1], [1, 0]])
KET0 = np.array([1, 0])


def ket_rho(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


PSI = {
    "teleport_zero": ket_rho(KET0),
    "teleport_one": ket_rho(X @ KET0),
    "teleport": ket_rho(H @ KET0),
    "teleport_xh": ket_rho(H @ X @ KET0),
}


def test_criterion_1_epr_order_independence(verdict):
    t0 = time.perf_counter()
    dists = {}
    problems = []
    for name in ("check_epr1", "check_epr2"):
        _, tree = explored(name, observe=["first", "second"])
        d = distribution(tree)
        if not d.deterministic or tree.partial:
            problems.append(f"{name} not deterministic")
        first = {k: b.min for k, b in d.marginals["first"].items()}
        if set(first) != {0, 1} or any(abs(p - 0.5) > TOL for p in first.values()):
            problems.append(f"{name} first={first}")
        for given, row in d.conditionals[("second", "first")].items():
            if abs(max(row.values()) - 1.0) > TOL:
                problems.append(f"{name} second|first={given}: {row}")
        dists[name] = {k: round(b.min, 12) for k, b in d.outcomes.items()}
    elapsed = time.perf_counter() - t0
    same = dists["check_epr1"] == dists["check_epr2"]
    if not same:
        problems.append(f"distributions differ: {dists}")
    if elapsed >= 1.0:
        problems.append(f"took {elapsed:.2f}s")
    verdict(1, "EPR order independence", not problems, "; ".join(problems) or f"{elapsed:.3f}s")


def test_criterion_2_teleportation(verdict):
    t0 = time.perf_counter()
    problems = []
    for name, psi in PSI.items():
        _, tree = explored(name, observe=["b", "!meas"])
        d = distribution(tree)
        if tree.partial or any(n.status != TERMINAL for n in tree.leaves()):
            problems.append(f"{name}: non-terminal leaves")
        meas = {k: b for k, b in d.marginals["!meas"].items()}
        if set(meas) != {0, 1, 2, 3}:
            problems.append(f"{name}: outcomes {sorted(meas)}")
        for k, b in meas.items():
            if not b.exact or abs(b.min - 0.25) > TOL:
                problems.append(f"{name}: P(meas={k}) in [{b.min}, {b.max}]")
        for leaf in tree.leaves():
            dist = trace_distance(leaf.obs[0].mat, psi)
            if dist > TOL:
                problems.append(f"{name}: leaf {leaf.id} trace distance {dist:.2e}")
        for _, path, _ in tree.paths():
            values = [
                t.label.comm.value
                for t in path
                if isinstance(t.label, Tau) and t.label.comm is not None and t.label.comm.kind == "value"
            ] + [t.label.value for t in path if isinstance(t.label, Send)]
            if len(values) != 1 or values[0] not in {0, 1, 2, 3}:
                problems.append(f"{name}: classical communications {values}")
                break
    elapsed = time.perf_counter() - t0
    if elapsed >= 2.0:
        problems.append(f"took {elapsed:.2f}s")
    verdict(2, "teleportation of |0>, |1>, |+>, H X|0>", not problems, "; ".join(problems[:5]) or f"{elapsed:.3f}s")


def test_criterion_3_bb84_single_round(verdict):
    t0 = time.perf_counter()
    observe = ["baseA", "baseB", "!keep", "!keepDataA", "!keepDataB"]
    prog, tree = explored("bb84_one_round", observe=observe)
    d = distribution(tree)
    problems = []
    agree = sum(b.min for k, b in d.outcomes.items() if d.values[k]["baseA"] == d.values[k]["baseB"])
    agree_hi = sum(b.max for k, b in d.outcomes.items() if d.values[k]["baseA"] == d.values[k]["baseB"])
    if not d.deterministic or abs(agree - 0.5) > TOL or abs(agree_hi - 0.5) > TOL:
        problems.append(f"P(baseA=baseB) in [{agree}, {agree_hi}]")
    for leaf in tree.leaves():
        v = dict(zip(observe, leaf.obs))
        if leaf.status != TERMINAL:
            problems.append(f"leaf {leaf.id} {leaf.status}")
        elif v["!keep"] == 1 and v["!keepDataA"] != v["!keepDataB"]:
            problems.append(f"leaf {leaf.id} kept different bits {v}")

    sampler = Sampler(prog, seed=1984)
    n = 10_000
    hits = 0
    for _ in range(n):
        _, rec = sampler.run(initial_state(prog), observe=["baseA", "baseB"])
        hits += rec[0] == rec[1]
    freq = hits / n
    if abs(freq - 0.5) > 0.02:
        problems.append(f"sampled agreement {freq}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 30.0:
        problems.append(f"took {elapsed:.1f}s")
    detail = "; ".join(problems[:5]) or f"P={agree:.12g}, sampled {freq:.4f}, {elapsed:.1f}s"
    verdict(3, "BB84 single round", not problems, detail)


def test_criterion_4_no_cloning_plumbing(verdict):
    _, tree = explored("channel_eve_all", fuel=200)
    problems = []
    sends = 0
    for node in tree.nodes:
        ctxs = [node.state.ctx] if node.state.stable else [c for _, c in node.state.ctx.branches]
        for c in ctxs:
            if abs(c.rho.trace - 1) > TOL:
                problems.append(f"node {node.id} trace {c.rho.trace}")
        for t, _ in node.edges:
            after = t.next.ctx
            if isinstance(t.label, SendQubit):
                gone = {t.label.uid}
            elif isinstance(t.label, Tau) and t.label.comm is not None and t.label.comm.kind == "qubit":
                gone = set(node.state.ctx.q) - set(after.q)
                if len(gone) != 1:
                    problems.append(f"node {node.id}: handover changed {gone}")
            else:
                continue
            sends += 1
            for uid in gone:
                if uid in after.q or uid in after.vars():
                    problems.append(f"node {node.id}: {uid} still present after send")
    if tree.partial:
        problems.append("tree is partial")
    if sends == 0:
        problems.append("no qubit send explored")
    detail = "; ".join(problems[:5]) or f"{len(tree.nodes)} nodes, {sends} qubit sends"
    verdict(4, "no-cloning plumbing on channel_eve_all to fuel 200", not problems, detail)


def _prob_first_violations(prog, fuel=300, max_nodes=4000):
    eng = Engine(prog)
    tree = explore(initial_state(prog), prog, fuel=fuel, max_paths=max_nodes, engine=eng)
    bad, unstable = [], 0
    for node in tree.nodes:
        if node.state.stable:
            continue
        unstable += 1
        trans = eng.enabled(node.state)
        if not trans or not all(isinstance(t.label, Prob) for t in trans):
            bad.append(f"non-probabilistic step from unstable node {node.id}")
        total = sum(t.label.p for t in trans if isinstance(t.label, Prob))
        if abs(total - 1) > TOL:
            bad.append(f"branch sum {total}")
    return bad, unstable


def test_criterion_5_probabilistic_first(verdict):
    rng = random.Random(5)
    problems = []
    unstable = 0
    count = 0
    for i in range(500):
        bad, u = _prob_first_violations(random_runnable(rng, 6))
        problems += [f"runnable #{i}: {b}" for b in bad]
        unstable += u
        count += 1
    for i in range(200):
        # arbitrary syntax, mostly ill-scoped: runtime errors must not break the invariant
        bad, u = _prob_first_violations(random_program_ast(rng, 6), fuel=100, max_nodes=1000)
        problems += [f"arbitrary #{i}: {b}" for b in bad]
        unstable += u
        count += 1
    if unstable == 0:
        problems.append("no unstable state reached")
    detail = "; ".join(problems[:5]) or f"{count} programs, {unstable} unstable states"
    verdict(5, "probabilistic-first invariant", not problems, detail)


def test_criterion_6_oracle_equivalence(verdict):
    rng = random.Random(6)
    problems = []
    for i in range(25):
        case = oracle_sim.random_straight_line(rng)
        want = oracle_sim.simulate(*case)
        prog = parse_program(oracle_sim.to_source(*case))
        tree = explore(initial_state(prog), prog, observe=["r"])
        d = distribution(tree)
        got = {k: b.min for k, b in d.marginals["r"].items()}
        if not d.deterministic or any(n.status != TERMINAL for n in tree.leaves()):
            problems.append(f"#{i}: not a clean run")
        for k in set(got) | set(want):
            if abs(got.get(k, 0.0) - want.get(k, 0.0)) > TOL:
                problems.append(f"#{i} outcome {k}: engine {got.get(k)} oracle {want.get(k)}")
    verdict(6, "oracle equivalence on 25 straight-line programs", not problems, "; ".join(problems[:5]))


def test_criterion_7_classical_degenerate_case(verdict):
    problems = []
    for name, text in sorted(PROGRAMS.items()):
        prog = parse_program(text)
        if engine_traces(prog) != classical_ref.traces(prog.main, prog.defs):
            problems.append(name)
    verdict(7, f"classical traces match the reference on {len(PROGRAMS)} programs", not problems, ", ".join(problems))


def test_criterion_8_parser_round_trip(verdict):
    problems = []
    for e in corpus():
        prog = parse_program(e.source())
        text = print_program(prog)
        if parse_program(text) != prog or print_program(parse_program(text)) != text:
            problems.append(e.name)
    rng = random.Random(8)
    for i in range(1000):
        ast = random_ast(rng, 6)
        for render in (flat, pretty_print):
            if parse_process(render(ast)) != ast:
                problems.append(f"ast #{i} via {render.__name__}")
    for i in range(200):
        prog = random_program_ast(rng, 5)
        if parse_program(print_program(prog), check=False) != prog:
            problems.append(f"program #{i}")
    verdict(8, "parse . pretty_print = identity", not problems, "; ".join(problems[:5]))
