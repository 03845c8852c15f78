"""Abstract syntax of QPAlg processes.

Nodes are frozen dataclasses compared structurally; source positions ride
along but never take part in equality or hashing.  Hashes are cached because
the explorer keys large numbers of states on whole terms.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Optional, Union


class VarType(enum.Enum):
    NAT = "Nat"
    QUBIT = "Qubit"

    def __str__(self) -> str:
        return self.value


Pos = Optional[tuple]


def _cached_hash(self):
    h = self.__dict__.get("_h")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, n) for n in self._keys))
        object.__setattr__(self, "_h", h)
    return h


def node(cls):
    cls = dataclass(frozen=True)(cls)
    cls._keys = tuple(f.name for f in fields(cls) if f.compare)
    cls.__hash__ = _cached_hash
    return cls


def _pos():
    return field(default=None, compare=False, repr=False)


# expressions and conditions


@node
class Num:
    value: int
    pos: Pos = _pos()


@node
class Var:
    name: str
    pos: Pos = _pos()


Expr = Union[Num, Var]


@node
class Compare:
    op: str  # "=" or "!="
    left: Expr
    right: Expr
    pos: Pos = _pos()


@node
class TrueCond:
    pos: Pos = _pos()


Cond = Union[Compare, TrueCond]


# actions


@node
class SendExpr:
    gate: str
    expr: Expr
    pos: Pos = _pos()


@node
class SendMeasure:
    gate: str
    observable: str
    qubits: tuple
    pos: Pos = _pos()


@node
class Receive:
    gate: str
    var: str
    pos: Pos = _pos()


@node
class ApplyUnitary:
    unitary: str
    qubits: tuple
    pos: Pos = _pos()


@node
class Measure:
    observable: str
    qubits: tuple
    pos: Pos = _pos()


Action = Union[SendExpr, SendMeasure, Receive, ApplyUnitary, Measure]


# processes


@node
class Nil:
    pos: Pos = _pos()


@node
class End:
    pos: Pos = _pos()


@node
class Prefix:
    action: Action
    body: "Process"
    pos: Pos = _pos()


@node
class Seq:
    left: "Process"
    right: "Process"
    pos: Pos = _pos()


@node
class Par:
    left: "Process"
    right: "Process"
    pos: Pos = _pos()


@node
class Choice:
    left: "Process"
    right: "Process"
    pos: Pos = _pos()


@node
class Restrict:
    body: "Process"
    gates: tuple
    pos: Pos = _pos()


@node
class CondChoice:
    branches: tuple  # of (Cond, Process)
    pos: Pos = _pos()


@node
class Decl:
    decls: tuple  # of (name, VarType)
    body: "Process"
    pos: Pos = _pos()


@node
class Call:
    name: str
    args: tuple
    pos: Pos = _pos()


# Runtime-only forms.  The parser never produces them; they mark a declaration
# whose frame is on the environment stack, and a parallel composition whose
# split is on the stack.


@node
class Scope:
    body: "Process"
    pos: Pos = _pos()


@node
class ActivePar:
    left: "Process"
    right: "Process"
    pos: Pos = _pos()


Process = Union[
    Nil, End, Prefix, Seq, Par, Choice, Restrict, CondChoice, Decl, Call, Scope, ActivePar
]


@dataclass(frozen=True)
class ProcDef:
    """``formals is None`` for the bracket-less form ``def Name = P``."""

    name: str
    formals: Optional[tuple]
    body: Process
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    defs: dict
    main: Process

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return list(self.defs.items()) == list(other.defs.items()) and self.main == other.main

    __hash__ = None


def resolve_call(defn: ProcDef, nargs: int):
    """Return ``(formals, body)`` for a call with ``nargs`` actual parameters.

    A bracket-less definition whose body is a declaration takes the declared
    variables as formals when invoked with arguments; the declaration is then
    elided.  Returns None when the arity does not fit.
    """
    if defn.formals is not None:
        if len(defn.formals) != nargs:
            return None
        return defn.formals, defn.body
    if nargs == 0:
        return (), defn.body
    if isinstance(defn.body, Decl) and len(defn.body.decls) == nargs:
        return defn.body.decls, defn.body.body
    return None
