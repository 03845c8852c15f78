"""Random term generators shared by the fuzz tests and the acceptance suite."""
from __future__ import annotations

import random

from qpalg.syntax import terms as T
from qpalg.syntax.terms import VarType

QUBIT, NAT = VarType.QUBIT, VarType.NAT

NAMES = ["a", "b", "c", "x", "y", "k", "ok", "P1", "Q"]
GATES = ["g", "h", "m", "fill", "out"]
UNITARIES = {"H": 1, "X": 1, "Y": 1, "Z": 1, "I": 1, "CNot": 2}
OBSERVABLES = {"M_std1": 1, "M_std2": 2, "M_pm": 1}


# arbitrary syntax trees (for printing and parsing)


def _expr(rng):
    return T.Num(rng.randrange(4)) if rng.random() < 0.5 else T.Var(rng.choice(NAMES))


def _distinct(rng, n):
    return tuple(rng.sample(NAMES, n))


def _action(rng):
    r = rng.randrange(6)
    if r == 0:
        return T.SendExpr(rng.choice(GATES), _expr(rng))
    if r == 1:
        return T.Receive(rng.choice(GATES), rng.choice(NAMES))
    if r == 2:
        u = rng.choice(list(UNITARIES))
        return T.ApplyUnitary(u, _distinct(rng, UNITARIES[u]))
    o = rng.choice(list(OBSERVABLES))
    if r == 3:
        return T.Measure(o, _distinct(rng, OBSERVABLES[o]))
    return T.SendMeasure(rng.choice(GATES), o, _distinct(rng, OBSERVABLES[o]))


def _cond(rng):
    if rng.random() < 0.2:
        return T.TrueCond()
    return T.Compare(rng.choice(["=", "!="]), _expr(rng), _expr(rng))


def _decls(rng, n):
    return tuple((name, rng.choice([QUBIT, NAT])) for name in rng.sample(NAMES, n))


def random_ast(rng: random.Random, depth: int = 6):
    """Any process term the parser can produce, nested at most ``depth`` deep."""
    if depth <= 0 or rng.random() < 0.15:
        r = rng.randrange(3)
        if r == 0:
            return T.Nil()
        if r == 1:
            return T.End()
        args = tuple(rng.sample(NAMES, rng.randrange(3)))
        return T.Call(rng.choice(["Alice", "Bob", "P", "Loop"]), args)
    d = depth - 1
    r = rng.randrange(10)
    if r <= 2:
        return T.Prefix(_action(rng), random_ast(rng, d))
    if r == 3:
        return T.Seq(random_ast(rng, d), random_ast(rng, d))
    if r == 4:
        return T.Par(random_ast(rng, d), random_ast(rng, d))
    if r == 5:
        return T.Choice(random_ast(rng, d), random_ast(rng, d))
    if r == 6:
        return T.Restrict(random_ast(rng, d), tuple(rng.sample(GATES, rng.randrange(1, 3))))
    if r == 7:
        n = rng.randrange(3)
        return T.CondChoice(tuple((_cond(rng), random_ast(rng, d)) for _ in range(n)))
    return T.Decl(_decls(rng, rng.randrange(3)), random_ast(rng, d))


def random_program_ast(rng: random.Random, depth: int = 5):
    defs = {}
    for name in rng.sample(["Alice", "Bob", "P", "Loop"], rng.randrange(3)):
        formals = _decls(rng, rng.randrange(3)) if rng.random() < 0.6 else None
        defs[name] = T.ProcDef(name, formals, random_ast(rng, depth))
    return T.Program(defs, random_ast(rng, depth))


# runnable programs (well scoped, mostly free of runtime errors)


class _Scope:
    def __init__(self, qubits, nats):
        self.qubits = list(qubits)
        self.nats = list(nats)
        self.fresh = 0

    def name(self, prefix):
        self.fresh += 1
        return f"{prefix}{self.fresh}"


def _init(q, v, gate="i"):
    return T.Restrict(
        T.Par(T.Prefix(T.SendExpr(gate, T.Num(v)), T.End()), T.Prefix(T.Receive(gate, q), T.End())),
        (gate,),
    )


def _measure_into(obs, qs, n, gate="m"):
    return T.Restrict(
        T.Par(T.Prefix(T.SendMeasure(gate, obs, qs), T.End()), T.Prefix(T.Receive(gate, n), T.End())),
        (gate,),
    )


def _qubit_args(rng, sc, arity):
    if len(sc.qubits) < arity:
        return None
    return tuple(rng.sample(sc.qubits, arity))


def _runnable(rng, sc: _Scope, depth: int):
    if depth <= 0 or rng.random() < 0.1:
        return T.End()
    d = depth - 1
    r = rng.randrange(12)
    if r in (0, 1):
        u = rng.choice(list(UNITARIES))
        qs = _qubit_args(rng, sc, UNITARIES[u])
        if qs is not None:
            return T.Prefix(T.ApplyUnitary(u, qs), _runnable(rng, sc, d))
    if r == 2:
        o = rng.choice(list(OBSERVABLES))
        qs = _qubit_args(rng, sc, OBSERVABLES[o])
        if qs is not None:
            return T.Prefix(T.Measure(o, qs), _runnable(rng, sc, d))
    if r in (3, 4):
        o = rng.choice(list(OBSERVABLES))
        qs = _qubit_args(rng, sc, OBSERVABLES[o])
        if qs is not None:
            return T.Seq(_measure_into(o, qs, rng.choice(sc.nats)), _runnable(rng, sc, d))
    if r == 5:
        return T.Prefix(T.SendExpr("out", T.Var(rng.choice(sc.nats))), _runnable(rng, sc, d))
    if r == 6:
        return T.Seq(_runnable(rng, sc, d), _runnable(rng, sc, d))
    if r == 7:
        return T.Choice(_runnable(rng, sc, d), _runnable(rng, sc, d))
    if r == 8:
        n = rng.choice(sc.nats)
        return T.CondChoice(
            (
                (T.Compare("=", T.Var(n), T.Num(0)), _runnable(rng, sc, d)),
                (T.Compare("!=", T.Var(n), T.Num(0)), _runnable(rng, sc, d)),
            )
        )
    if r == 9:
        # a fresh local qubit, initialized and used inside its scope
        t = sc.name("t")
        inner = _Scope(sc.qubits + [t], sc.nats)
        inner.fresh = sc.fresh + 10
        body = T.Seq(_init(t, rng.randrange(2)), _runnable(rng, inner, d))
        return T.Decl(((t, QUBIT),), body)
    if r == 10 and sc.qubits:
        # hand a qubit to a fresh variable across a parallel composition
        src = rng.choice(sc.qubits)
        dst = sc.name("w")
        rest = [q for q in sc.qubits if q != src]
        right_sc = _Scope(rest + [dst], sc.nats)
        right_sc.fresh = sc.fresh + 20
        left = T.Prefix(T.SendExpr("w", T.Var(src)), T.End())
        right = T.Prefix(T.Receive("w", dst), _runnable(rng, right_sc, d))
        return T.Decl(((dst, QUBIT),), T.Restrict(T.Par(left, right), ("w",)))
    # parallel branches over disjoint qubits sharing the classical store
    half = len(sc.qubits) // 2
    left = _Scope(sc.qubits[:half], sc.nats)
    right = _Scope(sc.qubits[half:], sc.nats)
    left.fresh, right.fresh = sc.fresh + 30, sc.fresh + 40
    return T.Par(_runnable(rng, left, d), _runnable(rng, right, d))


def random_runnable(rng: random.Random, depth: int = 6) -> T.Program:
    """A program over two qubits and two naturals, initialized up front."""
    sc = _Scope(["q0", "q1"], ["n0", "n1"])
    prologue = T.Seq(
        T.Seq(_init("q0", rng.randrange(2)), _init("q1", rng.randrange(2))),
        T.Seq(_measure_into("M_std1", ("q0",), "n0"), _measure_into("M_std1", ("q1",), "n1")),
    )
    body = T.Seq(prologue, _runnable(rng, sc, depth))
    decls = (("q0", QUBIT), ("q1", QUBIT), ("n0", NAT), ("n1", NAT))
    return T.Program({}, T.Decl(decls, body))
