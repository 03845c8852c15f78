"""Small-step operational semantics of QPAlg.

``Engine.enabled`` computes every transition of a state derivable by one rule
application.  A state whose context is probabilistic only offers probability
transitions, one per branch.  Runtime errors (unbound variables, uninitialized
qubits, ...) never raise: the offending transition is simply absent and a
located diagnostic is reported by ``Engine.analyze``.

Rule tags
---------
Every transition carries the tag of the rule that produced its label:

================== =====================================================
``end``            ``end`` terminates (delta)
``send-value``     ``g!v`` with a literal
``send-var``       ``g!x`` with a classical variable, emits ``g!f(x)``
``send-qubit``     ``g!x`` with a qubit, which leaves the context
``receive``        ``g?x``
``unitary``        ``U[x1..xn]``
``measure``        ``M[x1..xn]``, result discarded
``measure-send``   ``g!M[x1..xn]``, opens a probabilistic context
``prob``           resolution of one probabilistic branch
``seq-delta``      ``P ; Q`` moves on to ``Q`` after ``P`` terminates
``par-comm-value`` classical value received into a classical variable
``par-comm-init``  classical value 0/1 received into a fresh qubit
``par-comm-qubit`` qubit handed over to a receiving qubit variable
``par-delta``      both sides of ``P || Q`` terminated
``cond-delta``     every guard of a conditional choice is false
``decl``           variable declaration
``call``           process invocation (parameters alias the arguments)
``scope-exit``     a declaration scope terminates and frees its variables
================== =====================================================

Transitions lifted through ``;``, ``||``, ``+``, conditional choice,
restriction and scopes keep the tag of the rule that produced them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import context as cx
from . import quantum
from .context import Context, ContextError, Entry, ProbContext
from .syntax import terms as T
from .syntax.diagnostics import Diagnostic
from .syntax.terms import VarType

MEASURE_VAR = "$y"  # not a valid identifier, so never captured by user names

# runtime diagnostic codes
UNBOUND = "unbound-variable"
NO_VALUE = "unset-variable"
NOT_A_QUBIT = "not-a-qubit"
NOT_CLASSICAL = "not-classical"
UNINITIALIZED = "uninitialized-qubit"
INITIALIZED = "initialized-qubit"
DUPLICATE_QUBIT = "duplicate-qubit"
BAD_INIT = "bad-init-value"
OVERFLOW = "register-overflow"
QUBIT_TO_CLASSICAL = "qubit-to-classical"
BAD_CALL = "bad-call"


# labels


@dataclass(frozen=True)
class Send:
    gate: str
    value: int

    def __str__(self):
        return f"{self.gate}!{self.value}"


@dataclass(frozen=True)
class SendQubit:
    gate: str
    uid: str

    def __str__(self):
        return f"{self.gate}!{cx.owner_name(self.uid)}"


@dataclass(frozen=True)
class Receive:
    gate: str
    var: str
    entry: Entry

    def __str__(self):
        return f"{self.gate}?{self.var}"


@dataclass(frozen=True)
class Comm:
    """What an internal communication carried: ``kind`` is value, init or qubit."""

    gate: str
    kind: str
    value: Optional[int]
    receiver: str


@dataclass(frozen=True)
class Tau:
    comm: Optional[Comm] = None

    def __str__(self):
        if self.comm is None:
            return "tau"
        c = self.comm
        what = c.value if c.kind != "qubit" else "qubit"
        return f"tau<{c.gate}:{what}>"


@dataclass(frozen=True)
class Delta:
    def __str__(self):
        return "delta"


@dataclass(frozen=True)
class DeclStep:
    def __str__(self):
        return "decl"


@dataclass(frozen=True)
class Prob:
    p: float

    def __str__(self):
        return f"p={self.p:.6g}"


Label = object
_ACTION_LABELS = (Send, SendQubit, Receive)


@dataclass(frozen=True, eq=False)
class State:
    term: object
    ctx: object  # Context or ProbContext

    @property
    def stable(self) -> bool:
        return isinstance(self.ctx, Context)


@dataclass(frozen=True, eq=False)
class Transition:
    label: object
    next: State
    rule: str


def is_terminated(term) -> bool:
    while isinstance(term, T.Restrict):
        term = term.body
    return isinstance(term, T.Nil)


def initial_state(program: T.Program) -> State:
    return State(program.main, Context())


class Engine:
    """Transition relation for one program (its definitions and built-ins)."""

    def __init__(self, program: T.Program | None = None, unitaries=None, observables=None):
        self.defs = program.defs if program is not None else {}
        self.unitaries = quantum.builtin_gates() if unitaries is None else unitaries
        self.observables = quantum.builtin_observables() if observables is None else observables
        self._dispatch = {
            T.Nil: self._nil,
            T.End: self._end,
            T.Prefix: self._prefix,
            T.Seq: self._seq,
            T.Par: self._par,
            T.ActivePar: self._par,
            T.Choice: self._choice,
            T.CondChoice: self._cond,
            T.Restrict: self._restrict,
            T.Decl: self._decl,
            T.Scope: self._scope,
            T.Call: self._call,
        }

    # public API

    def analyze(self, state: State):
        """``(transitions, diagnostics)`` of ``state``."""
        if isinstance(state.ctx, ProbContext):
            return [
                Transition(Prob(p), State(state.term, c), "prob") for p, c in state.ctx.branches
            ], []
        diags: list[Diagnostic] = []
        steps = self._steps(state.term, state.ctx, diags)
        return [Transition(lab, State(t, c), rule) for lab, t, c, rule in steps], diags

    def enabled(self, state: State) -> list[Transition]:
        return self.analyze(state)[0]

    # helpers

    def _steps(self, p, ctx: Context, diags):
        return self._dispatch[type(p)](p, ctx, diags)

    @staticmethod
    def _err(diags, code, msg, node):
        diags.append(Diagnostic(code, msg, getattr(node, "pos", None)))

    def _entry(self, name, ctx, diags, node) -> Optional[Entry]:
        e = ctx.find(name)
        if e is None:
            self._err(diags, UNBOUND, f"variable {name} is not in scope", node)
        return e

    def _qubits(self, names, ctx, diags, node):
        uids = []
        for x in names:
            e = self._entry(x, ctx, diags, node)
            if e is None:
                return None
            if e.vtype is not VarType.QUBIT:
                self._err(diags, NOT_A_QUBIT, f"{x} is not a qubit variable", node)
                return None
            if e.uid not in ctx.q:
                self._err(diags, UNINITIALIZED, f"qubit {x} is not initialized", node)
                return None
            uids.append(e.uid)
        if len(set(uids)) != len(uids):
            self._err(diags, DUPLICATE_QUBIT, f"qubit arguments {list(names)} are not distinct", node)
            return None
        return uids

    def _eval(self, expr, ctx, diags):
        if isinstance(expr, T.Num):
            return expr.value
        e = self._entry(expr.name, ctx, diags, expr)
        if e is None:
            return None
        if e.vtype is not VarType.NAT:
            self._err(diags, NOT_CLASSICAL, f"{expr.name} is a qubit, not a number", expr)
            return None
        v = ctx.f.get(e.uid)
        if v is None:
            self._err(diags, NO_VALUE, f"variable {expr.name} has no value", expr)
        return v

    # rules

    def _nil(self, p, ctx, diags):
        return []

    def _end(self, p, ctx, diags):
        return [(Delta(), T.Nil(), ctx, "end")]

    def _prefix(self, p, ctx, diags):
        a, body = p.action, p.body
        if isinstance(a, T.SendExpr):
            if isinstance(a.expr, T.Num):
                return [(Send(a.gate, a.expr.value), body, ctx, "send-value")]
            e = self._entry(a.expr.name, ctx, diags, a)
            if e is None:
                return []
            if e.vtype is VarType.NAT:
                v = ctx.f.get(e.uid)
                if v is None:
                    self._err(diags, NO_VALUE, f"variable {e.name} has no value", a)
                    return []
                return [(Send(a.gate, v), body, ctx, "send-var")]
            if e.uid not in ctx.q:
                self._err(diags, UNINITIALIZED, f"cannot send uninitialized qubit {e.name}", a)
                return []
            return [(SendQubit(a.gate, e.uid), body, cx.remove_uid(ctx, e.uid), "send-qubit")]

        if isinstance(a, T.Receive):
            e = self._entry(a.var, ctx, diags, a)
            if e is None:
                return []
            if e.vtype is VarType.QUBIT and e.uid in ctx.q:
                self._err(diags, INITIALIZED, f"cannot receive into initialized qubit {a.var}", a)
                return []
            return [(Receive(a.gate, a.var, e), body, ctx, "receive")]

        if isinstance(a, T.ApplyUnitary):
            u = self.unitaries[a.unitary]
            uids = self._qubits(a.qubits, ctx, diags, a)
            if uids is None:
                return []
            rho = quantum.apply_unitary(u, uids, ctx.q, ctx.rho)
            return [(Tau(), body, ctx.replace(rho=rho), "unitary")]

        m = self.observables[a.observable]
        uids = self._qubits(a.qubits, ctx, diags, a)
        if uids is None:
            return []
        if isinstance(a, T.Measure):
            rho = quantum.measure_forget(m, uids, ctx.q, ctx.rho)
            return [(Tau(), body, ctx.replace(rho=rho), "measure")]

        # g!M[xs]: rewrite to [ g!y . end ] ; P over the outcome distribution
        uid = f"{MEASURE_VAR}#{ctx.next_id}"
        frame = cx.Frame((Entry(MEASURE_VAR, VarType.NAT, uid),))
        branches = []
        for lam, prob, rho in quantum.measurement_branches(m, uids, ctx.q, ctx.rho):
            f = dict(ctx.f)
            f[uid] = lam
            c = ctx.replace(stack=(frame,) + ctx.stack, rho=rho, f=f, next_id=ctx.next_id + 1)
            branches.append((prob, c))
        send = T.Scope(T.Prefix(T.SendExpr(a.gate, T.Var(MEASURE_VAR)), T.End()))
        return [(Tau(), T.Seq(send, body), ProbContext(tuple(branches)), "measure-send")]

    def _seq(self, p, ctx, diags):
        out = []
        for lab, t, c, rule in self._steps(p.left, ctx, diags):
            if isinstance(lab, Delta):
                out.append((Tau(), p.right, c, "seq-delta"))
            else:
                out.append((lab, T.Seq(t, p.right), c, rule))
        return out

    def _choice(self, p, ctx, diags):
        return self._steps(p.left, ctx, diags) + self._steps(p.right, ctx, diags)

    def _cond(self, p, ctx, diags):
        out = []
        undecided = False
        any_true = False
        for cond, body in p.branches:
            if isinstance(cond, T.TrueCond):
                holds = True
            else:
                l = self._eval(cond.left, ctx, diags)
                r = self._eval(cond.right, ctx, diags)
                if l is None or r is None:
                    undecided = True
                    continue
                holds = (l == r) if cond.op == "=" else (l != r)
            if holds:
                any_true = True
                out.extend(self._steps(body, ctx, diags))
        if not any_true and not undecided:
            return [(Delta(), T.Nil(), ctx, "cond-delta")]
        return out

    def _restrict(self, p, ctx, diags):
        hidden = p.gates
        out = []
        for lab, t, c, rule in self._steps(p.body, ctx, diags):
            if isinstance(lab, _ACTION_LABELS) and lab.gate in hidden:
                continue
            out.append((lab, T.Restrict(t, hidden), c, rule))
        return out

    def _decl(self, p, ctx, diags):
        try:
            c = cx.declare_frame(ctx, p.decls)
        except ContextError as e:
            self._err(diags, BAD_CALL, str(e), p)
            return []
        return [(DeclStep(), T.Scope(p.body), c, "decl")]

    def _call(self, p, ctx, diags):
        defn = self.defs.get(p.name)
        resolved = T.resolve_call(defn, len(p.args)) if defn is not None else None
        if resolved is None:
            self._err(diags, BAD_CALL, f"cannot call {p.name} with {len(p.args)} argument(s)", p)
            return []
        formals, body = resolved
        try:
            c = cx.push_alias_frame(ctx, formals, p.args)
        except ContextError as e:
            self._err(diags, BAD_CALL, f"call {p.name}: {e}", p)
            return []
        return [(DeclStep(), T.Scope(body), c, "call")]

    def _scope(self, p, ctx, diags):
        out = []
        for lab, t, c, rule in self._steps(p.body, ctx, diags):
            if isinstance(lab, Delta):
                out.append((lab, T.Nil(), cx.pop_frame(c), "scope-exit"))
            else:
                out.append((lab, T.Scope(t), c, rule))
        return out

    def _par(self, p, ctx, diags):
        active = isinstance(p, T.ActivePar)
        lctx, rctx, tail = cx.split_parallel(ctx, active)
        cut = len(tail)
        lown = lctx.stack[: len(lctx.stack) - cut]
        rown = rctx.stack[: len(rctx.stack) - cut]
        ls = self._steps(p.left, lctx, diags)
        rs = self._steps(p.right, rctx, diags)
        out = []

        for lab, t, c, rule in ls:
            if not isinstance(lab, Delta):
                c = self._lift(c, "left", rown, tail, lab)
                out.append((lab, T.ActivePar(t, p.right), c, rule))
        for lab, t, c, rule in rs:
            if not isinstance(lab, Delta):
                c = self._lift(c, "right", lown, tail, lab)
                out.append((lab, T.ActivePar(p.left, t), c, rule))

        for l in ls:
            for r in rs:
                if isinstance(r[0], Receive) and isinstance(l[0], (Send, SendQubit)):
                    if l[0].gate == r[0].gate:
                        out.extend(self._comm(ctx, tail, l, r, "left", p, diags))
                elif isinstance(l[0], Receive) and isinstance(r[0], (Send, SendQubit)):
                    if l[0].gate == r[0].gate:
                        out.extend(self._comm(ctx, tail, r, l, "right", p, diags))

        if any(isinstance(l[0], Delta) for l in ls) and any(isinstance(r[0], Delta) for r in rs):
            c = cx.close_parallel(ctx) if active else ctx
            out.append((Delta(), T.Nil(), c, "par-delta"))
        return out

    @staticmethod
    def _lift(c, side, sibling, tail, lab):
        if isinstance(lab, SendQubit):
            sibling = cx.strip_uid(sibling, lab.uid)
        if isinstance(c, ProbContext):
            return ProbContext(
                tuple((pr, cx.merge_parallel(b, side, sibling, tail)) for pr, b in c.branches)
            )
        return cx.merge_parallel(c, side, sibling, tail)

    def _comm(self, ctx, tail, snd, rcv, sender_side, p, diags):
        slab, st, sc, _ = snd
        rlab, rt, rc, _ = rcv
        cut = len(tail)
        sown = sc.stack[: len(sc.stack) - cut]
        rown = rc.stack[: len(rc.stack) - cut]
        lown, rown = (sown, rown) if sender_side == "left" else (rown, sown)
        base = ctx.replace(stack=(cx.ParSplit(lown, rown),) + tail)
        dst = rlab.entry
        term = T.ActivePar(st, rt) if sender_side == "left" else T.ActivePar(rt, st)
        where = p
        if isinstance(slab, Send):
            if dst.vtype is VarType.NAT:
                c = cx.bind_uid(base, dst, slab.value)
                return [(Tau(Comm(slab.gate, "value", slab.value, rlab.var)), term, c, "par-comm-value")]
            if slab.value not in (0, 1):
                self._err(diags, BAD_INIT, f"qubit {rlab.var} can only be initialized with 0 or 1, got {slab.value}", where)
                return []
            try:
                c = cx.init_uid(base, dst, slab.value)
            except quantum.RegisterOverflow as e:
                self._err(diags, OVERFLOW, str(e), where)
                return []
            return [(Tau(Comm(slab.gate, "init", slab.value, rlab.var)), term, c, "par-comm-init")]
        if dst.vtype is not VarType.QUBIT:
            self._err(diags, QUBIT_TO_CLASSICAL, f"qubit sent on {slab.gate} cannot be received into {rlab.var}", where)
            return []
        c = cx.rename_uid(base, slab.uid, dst)
        return [(Tau(Comm(slab.gate, "qubit", None, rlab.var)), term, c, "par-comm-qubit")]


def enabled(state: State, program: T.Program) -> list[Transition]:
    return Engine(program).enabled(state)


def step(state: State, transition: Transition) -> State:
    return transition.next


# running


@dataclass
class RunResult:
    status: str  # "terminal", "deadlock" or "fuel-cut"
    final: State
    steps: list  # of (rule, label, State) after the step
    diagnostics: list

    @property
    def ok(self) -> bool:
        return self.status == "terminal"


Policy = Callable[[State, list], int]


def first_policy(state: State, transitions: list) -> int:
    return 0


def run_to_terminal(
    state: State, engine: Engine, policy: Policy = first_policy, fuel: int = 10_000
) -> RunResult:
    """Follow ``policy`` until no transition is enabled or ``fuel`` steps are spent."""
    steps = []
    for _ in range(fuel):
        trans, diags = engine.analyze(state)
        if not trans:
            status = "terminal" if is_terminated(state.term) and state.stable else "deadlock"
            return RunResult(status, state, steps, diags)
        tr = trans[policy(state, trans)]
        state = tr.next
        steps.append((tr.rule, tr.label, state))
    trans, diags = engine.analyze(state)
    if not trans:
        status = "terminal" if is_terminated(state.term) and state.stable else "deadlock"
        return RunResult(status, state, steps, diags)
    return RunResult("fuel-cut", state, steps, [])
