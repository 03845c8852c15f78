"""Execution contexts: environment stack, qubit register, state and classical store.

Variables are stored under unique ids (``"name#n"``) so that the same source
name may be declared in nested or sibling scopes.  The environment stack is a
tuple with the innermost element first; an element is either a :class:`Frame`
of declared variables or a :class:`ParSplit` holding the private stacks of the
two sides of a parallel composition above their shared tail.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from . import quantum
from .quantum import DensityMatrix
from .syntax.terms import VarType

PROB_TOL = 1e-9


class ContextError(Exception):
    """Operation not permitted on this context."""


class ScopeError(ContextError):
    pass


@dataclass(frozen=True)
class Entry:
    name: str
    vtype: VarType
    uid: str
    owned: bool = True  # False for a call parameter aliasing the caller's variable


@dataclass(frozen=True)
class Frame:
    entries: tuple = ()

    def uids(self) -> set:
        return {e.uid for e in self.entries}


@dataclass(frozen=True)
class ParSplit:
    left: tuple = ()
    right: tuple = ()


EnvStack = tuple


def owner_name(uid: str) -> str:
    return uid.rsplit("#", 1)[0]


def iter_entries(stack: EnvStack) -> Iterator[Entry]:
    for el in stack:
        if isinstance(el, Frame):
            yield from el.entries
        else:
            yield from iter_entries(el.left)
            yield from iter_entries(el.right)


def stack_vars(stack: EnvStack) -> set:
    """All unique ids bound anywhere in the stack (vars(s))."""
    return {e.uid for e in iter_entries(stack)}


def owned_vars(stack: EnvStack) -> set:
    return {e.uid for e in iter_entries(stack) if e.owned}


def strip_uid(stack: EnvStack, uid: str) -> EnvStack:
    """The stack with every entry for ``uid`` removed (aliases included)."""
    out = []
    for el in stack:
        if isinstance(el, Frame):
            if any(e.uid == uid for e in el.entries):
                el = Frame(tuple(e for e in el.entries if e.uid != uid))
        else:
            el = ParSplit(strip_uid(el.left, uid), strip_uid(el.right, uid))
        out.append(el)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Context:
    """A stable context: stack ``s``, register ``q`` with state ``rho``, store ``f``."""

    stack: EnvStack = ()
    q: tuple = ()
    rho: DensityMatrix = field(default_factory=DensityMatrix.empty)
    f: dict = field(default_factory=dict)
    next_id: int = 0

    def __post_init__(self):
        if len(self.q) != self.rho.n_qubits:
            raise ContextError(
                f"register {list(self.q)} does not match a {self.rho.n_qubits}-qubit state"
            )
        if len(set(self.q)) != len(self.q):
            raise ContextError(f"register {list(self.q)} has duplicates")

    def replace(self, **kw) -> "Context":
        d = dict(stack=self.stack, q=self.q, rho=self.rho, f=self.f, next_id=self.next_id)
        d.update(kw)
        return Context(**d)

    def lookup(self, name: str) -> Entry:
        """Innermost visible binding of ``name``; parallel splits are not looked into."""
        for el in self.stack:
            if isinstance(el, Frame):
                for e in el.entries:
                    if e.name == name:
                        return e
        raise ScopeError(f"variable {name} is not in scope")

    def find(self, name: str) -> Optional[Entry]:
        try:
            return self.lookup(name)
        except ScopeError:
            return None

    def value(self, name: str) -> Optional[int]:
        return self.f.get(self.lookup(name).uid)

    def vars(self) -> set:
        return stack_vars(self.stack)

    def display(self, uid: str) -> str:
        name = owner_name(uid)
        clash = [u for u in set(self.q) | set(self.f) | self.vars() if owner_name(u) == name]
        return uid if len(clash) > 1 else name

    def reduced(self, uids: Iterable[str]) -> DensityMatrix:
        """State of the qubits ``uids`` (in that order) with the rest traced out."""
        uids = list(uids)
        others = [u for u in self.q if u not in uids]
        r = quantum.partial_trace(self.rho, self.q, others)
        kept = [u for u in self.q if u in uids]
        return quantum.reorder(r, kept, uids)


@dataclass(frozen=True, eq=False)
class ProbContext:
    """Probability-weighted contexts produced by a measurement whose result is sent."""

    branches: tuple  # of (probability, Context)

    def __post_init__(self):
        if not self.branches:
            raise ContextError("a probabilistic context needs at least one branch")
        total = sum(p for p, _ in self.branches)
        if abs(total - 1.0) > PROB_TOL or any(p <= 0 for p, _ in self.branches):
            raise ContextError(f"branch probabilities {[p for p, _ in self.branches]} invalid")


CtxState = Union[Context, ProbContext]


def is_stable(c: CtxState) -> bool:
    return isinstance(c, Context)


# operations


def declare_frame(ctx: Context, decls) -> Context:
    """Push a frame of fresh variables; register, state and store are untouched."""
    names = [n for n, _ in decls]
    if len(set(names)) != len(names):
        raise ContextError(f"duplicate names in declaration {names}")
    n = ctx.next_id
    entries = []
    for name, vtype in decls:
        entries.append(Entry(name, vtype, f"{name}#{n}"))
        n += 1
    return ctx.replace(stack=(Frame(tuple(entries)),) + ctx.stack, next_id=n)


def push_alias_frame(ctx: Context, formals, actuals) -> Context:
    """Push a frame binding each formal to the caller's variable ``actual``."""
    if len(formals) != len(actuals):
        raise ContextError("formal and actual parameter counts differ")
    names = [n for n, _ in formals]
    if len(set(names)) != len(names):
        raise ContextError(f"duplicate formal parameters {names}")
    entries = []
    for (name, vtype), actual in zip(formals, actuals):
        target = ctx.lookup(actual)
        if target.vtype != vtype:
            raise ContextError(f"{actual} has type {target.vtype}, parameter {name} expects {vtype}")
        entries.append(Entry(name, vtype, target.uid, owned=False))
    return ctx.replace(stack=(Frame(tuple(entries)),) + ctx.stack)


def pop_frame(ctx: Context) -> Context:
    """Leave the innermost scope, tracing out its qubits and dropping its values."""
    if not ctx.stack or not isinstance(ctx.stack[0], Frame):
        raise ContextError("top of the environment stack is not a frame")
    return discard(ctx.replace(stack=ctx.stack[1:]), {e.uid for e in ctx.stack[0].entries if e.owned})


def discard(ctx: Context, uids: set) -> Context:
    """Remove ``uids`` from the register (partial trace) and from the store."""
    gone = [u for u in ctx.q if u in uids]
    rho = quantum.partial_trace(ctx.rho, ctx.q, gone) if gone else ctx.rho
    q = tuple(u for u in ctx.q if u not in uids)
    f = {u: v for u, v in ctx.f.items() if u not in uids} if uids & ctx.f.keys() else ctx.f
    return ctx.replace(q=q, rho=rho, f=f)


def bind_classical(ctx: Context, name: str, v: int) -> Context:
    e = ctx.lookup(name)
    return bind_uid(ctx, e, v)


def bind_uid(ctx: Context, e: Entry, v: int) -> Context:
    if e.vtype is not VarType.NAT:
        raise ContextError(f"cannot store a classical value in qubit {e.name}")
    if not isinstance(v, int) or v < 0:
        raise ContextError(f"{v!r} is not a natural number")
    f = dict(ctx.f)
    f[e.uid] = v
    return ctx.replace(f=f)


def remove_qubit(ctx: Context, name: str) -> Context:
    """Give up a qubit: trace it out and forget the variable everywhere."""
    e = ctx.lookup(name)
    return remove_uid(ctx, e.uid)


def remove_uid(ctx: Context, uid: str) -> Context:
    if uid not in ctx.q:
        raise ContextError(f"qubit {owner_name(uid)} is not initialized")
    rho = quantum.partial_trace(ctx.rho, ctx.q, [uid])
    q = tuple(u for u in ctx.q if u != uid)
    return ctx.replace(stack=strip_uid(ctx.stack, uid), q=q, rho=rho)


def rename_qubit(ctx: Context, src: str, dst: str) -> Context:
    a, b = ctx.lookup(src), ctx.lookup(dst)
    return rename_uid(ctx, a.uid, b)


def rename_uid(ctx: Context, src_uid: str, dst: Entry) -> Context:
    """The qubit held by ``src_uid`` is now held by ``dst``; ``src_uid`` is forgotten."""
    if src_uid not in ctx.q:
        raise ContextError(f"qubit {owner_name(src_uid)} is not initialized")
    if dst.vtype is not VarType.QUBIT:
        raise ContextError(f"{dst.name} is not a qubit variable")
    if dst.uid in ctx.q:
        raise ContextError(f"qubit {dst.name} is already initialized")
    q = tuple(dst.uid if u == src_uid else u for u in ctx.q)
    return ctx.replace(stack=strip_uid(ctx.stack, src_uid), q=q)


def init_uid(ctx: Context, dst: Entry, v: int) -> Context:
    if dst.vtype is not VarType.QUBIT:
        raise ContextError(f"{dst.name} is not a qubit variable")
    q, rho = quantum.init_qubit(v, dst.uid, ctx.q, ctx.rho)
    return ctx.replace(q=q, rho=rho)


def split_parallel(ctx: Context, active: bool):
    """Views of both sides of a parallel composition: ``(left, right, tail)``.

    When the split is not yet on the stack (``active`` false) both sides start
    with empty private stacks over the whole current stack.
    """
    if active:
        top = ctx.stack[0]
        if not isinstance(top, ParSplit):
            raise ContextError("expected a parallel split on top of the stack")
        tail = ctx.stack[1:]
        left, right = top.left, top.right
    else:
        tail = ctx.stack
        left = right = ()
    return ctx.replace(stack=left + tail), ctx.replace(stack=right + tail), tail


def merge_parallel(child: Context, side: str, sibling: EnvStack, tail: EnvStack) -> Context:
    """Put a stepped side of ``P || Q`` back above the shared tail.

    The stepping side may not add or remove frames of the tail; entries may
    only disappear from it (a sent qubit).  ``sibling`` is the other side's
    private stack, unchanged.
    """
    s = child.stack
    cut = len(s) - len(tail)
    if cut < 0:
        raise ContextError("a parallel branch removed frames of the shared stack")
    own, new_tail = s[:cut], s[cut:]
    for old, new in zip(tail, new_tail):
        if type(old) is not type(new) or (
            isinstance(old, Frame) and not new.uids() <= old.uids()
        ):
            raise ContextError("a parallel branch modified the shared stack")
    split = ParSplit(own, sibling) if side == "left" else ParSplit(sibling, own)
    return child.replace(stack=(split,) + new_tail)


def close_parallel(ctx: Context) -> Context:
    """Both sides terminated: drop the split and every variable declared in it."""
    top = ctx.stack[0]
    if not isinstance(top, ParSplit):
        raise ContextError("expected a parallel split on top of the stack")
    e = owned_vars(top.left) | owned_vars(top.right)
    return discard(ctx.replace(stack=ctx.stack[1:]), e)


# canonical form


def _canon_stack(stack, ren):
    out = []
    for el in stack:
        if isinstance(el, Frame):
            ents = []
            for e in el.entries:
                if e.uid not in ren:
                    ren[e.uid] = len(ren)
                ents.append((e.name, e.vtype.value, ren[e.uid], e.owned))
            out.append(tuple(ents))
        else:
            out.append(("|", _canon_stack(el.left, ren), _canon_stack(el.right, ren)))
    return tuple(out)


def canonical_key(ctx: Context, decimals: int = 9) -> tuple:
    """Hashable key equal for contexts that differ only in id numbering and qubit order."""
    ren: dict = {}
    stack = _canon_stack(ctx.stack, ren)
    for u in list(ctx.q) + sorted(ctx.f):
        if u not in ren:
            ren[u] = len(ren)
    order = sorted(ctx.q, key=ren.__getitem__)
    rho = quantum.reorder(ctx.rho, ctx.q, order).mat
    r = np.round(rho, decimals) + 0.0
    return (
        stack,
        tuple(ren[u] for u in order),
        r.tobytes(),
        tuple(sorted((ren[u], v) for u, v in ctx.f.items())),
    )


def digest(ctx: CtxState, decimals: int = 6) -> dict:
    """Diff-friendly rendering: register names, rounded state, store."""
    if isinstance(ctx, ProbContext):
        return {"prob": [[p, digest(c, decimals)] for p, c in ctx.branches]}
    rho = np.round(ctx.rho.mat, decimals) + 0.0
    return {
        "q": [ctx.display(u) for u in ctx.q],
        "rho": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
        "f": {ctx.display(u): v for u, v in sorted(ctx.f.items())},
    }
