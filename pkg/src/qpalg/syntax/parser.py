"""Lexer and recursive-descent parser for ``.qpalg`` programs.

Operator precedence, tightest first: prefix ``.``, ``;``, ``+``, ``||``,
restriction ``\\ {...}``.  Binary operators associate to the left.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..quantum import builtin_gates, builtin_observables
from . import diagnostics as dg
from .diagnostics import Diagnostic, ParseError
from .terms import (
    ApplyUnitary,
    Call,
    Choice,
    Compare,
    CondChoice,
    Decl,
    End,
    Measure,
    Nil,
    Num,
    Par,
    Prefix,
    ProcDef,
    Program,
    Receive,
    Restrict,
    SendExpr,
    SendMeasure,
    Seq,
    TrueCond,
    Var,
    VarType,
)

KEYWORDS = {"nil", "end", "def", "main", "true", "Nat", "Qubit"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*)
  | (?P<nat>[0-9]+)
  | (?P<op>\|\||->|!=|≠|[.;+\\{}\[\](),:!?=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "nat", "op", "kw", "eof"
    text: str
    pos: tuple

    def shown(self) -> str:
        return repr(self.text) if self.kind != "eof" else "end of input"


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            col = i - line_start + 1
            raise ParseError(
                Diagnostic(dg.LEXICAL, f"unexpected character {text[i]!r}", (line, col))
            )
        kind = m.lastgroup
        pos = (line, i - line_start + 1)
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "name":
            word = m.group()
            tokens.append(Token("kw" if word in KEYWORDS else "name", word, pos))
        elif kind == "nat":
            tokens.append(Token("nat", m.group(), pos))
        elif kind == "op":
            op = "!=" if m.group() == "≠" else m.group()
            tokens.append(Token("op", op, pos))
        i = m.end()
    tokens.append(Token("eof", "", (line, i - line_start + 1)))
    return tokens


class Parser:
    def __init__(self, text: str, unitaries=None, observables=None):
        self.toks = tokenize(text)
        self.i = 0
        self.unitaries = builtin_gates() if unitaries is None else unitaries
        self.observables = builtin_observables() if observables is None else observables

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, kind: str = "op") -> bool:
        t = self.tok
        return t.kind == kind and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, msg: str, tok: Token | None = None, code: str = dg.SYNTAX):
        tok = tok or self.tok
        raise ParseError(Diagnostic(code, msg, tok.pos))

    def expect(self, text: str, kind: str = "op") -> Token:
        if not self.at(text, kind):
            self.fail(f"expected {text!r}, found {self.tok.shown()}")
        return self.advance()

    def ident(self, what: str) -> Token:
        if self.tok.kind != "name":
            self.fail(f"expected {what}, found {self.tok.shown()}")
        return self.advance()

    # program

    def program(self) -> Program:
        defs = {}
        while self.at("def", "kw"):
            d = self.definition()
            if d.name in defs:
                raise ParseError(
                    Diagnostic(dg.DUPLICATE_DEFINITION, f"process {d.name} defined twice", d.pos)
                )
            defs[d.name] = d
        self.expect("main", "kw")
        self.expect("=")
        main = self.process()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r} after main process")
        return Program(defs, main)

    def definition(self) -> ProcDef:
        start = self.expect("def", "kw")
        name = self.ident("process name")
        if name.text in self.unitaries or name.text in self.observables:
            self.fail(f"{name.text} is a built-in name", name, dg.RESERVED_NAME)
        formals = None
        if self.at("["):
            self.advance()
            formals = self.decl_list("]")
            self.expect("]")
        self.expect("=")
        body = self.process()
        return ProcDef(name.text, formals, body, start.pos)

    def decl_list(self, closer: str) -> tuple:
        decls = []
        if self.at(closer):
            return ()
        while True:
            name = self.ident("variable name")
            self.expect(":")
            ty = self.tok
            if ty.kind == "kw" and ty.text in ("Nat", "Qubit"):
                self.advance()
            else:
                self.fail(f"expected a type (Nat or Qubit), found {ty.shown()}")
            decls.append((name.text, VarType(ty.text)))
            if not self.at(","):
                return tuple(decls)
            self.advance()

    # processes
    #
    # Binding strength: "." > ";" > "+" > "||" > "\ {...}".  Restriction is a
    # postfix operator taking everything to its left at the current nesting
    # level; binary operators may follow it, so "(P || Q) \ {g} ; R" reads as
    # a sequence whose first part is restricted.

    _BINARY = {"||": (1, Par), "+": (2, Choice), ";": (3, Seq)}

    def process(self):
        return self.term(0)

    def term(self, min_level: int):
        left = self.prefix()
        while True:
            if self.at("\\"):
                if min_level > 0:
                    return left
                left = self.restriction(left)
                continue
            t = self.tok
            entry = self._BINARY.get(t.text) if t.kind == "op" else None
            if entry is None or entry[0] <= min_level:
                return left
            self.advance()
            level, ctor = entry
            left = ctor(left, self.term(level), t.pos)

    def restriction(self, body):
        start = self.advance()
        self.expect("{")
        gates = [self.ident("gate name").text]
        while self.at(","):
            self.advance()
            gates.append(self.ident("gate name").text)
        self.expect("}")
        return Restrict(body, tuple(gates), start.pos)

    def prefix(self):
        t = self.tok
        if t.kind == "name":
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text in ("!", "?"):
                action = self.communication()
                return self._prefixed(action)
            if nxt.kind == "op" and nxt.text == "[" and self._bracket_then_dot():
                action = self.operation()
                return self._prefixed(action)
        return self.primary()

    def _prefixed(self, action):
        self.expect(".")
        return Prefix(action, self.prefix(), action.pos)

    def _bracket_then_dot(self) -> bool:
        j = self.i + 2
        while self.toks[j].kind == "name" or (
            self.toks[j].kind == "op" and self.toks[j].text == ","
        ):
            j += 1
        return (
            self.toks[j].kind == "op"
            and self.toks[j].text == "]"
            and self.toks[j + 1].kind == "op"
            and self.toks[j + 1].text == "."
        )

    def communication(self):
        gate = self.advance()
        op = self.advance()
        if op.text == "?":
            var = self.ident("variable name")
            return Receive(gate.text, var.text, gate.pos)
        t = self.tok
        if t.kind == "nat":
            self.advance()
            return SendExpr(gate.text, Num(int(t.text), t.pos), gate.pos)
        if t.kind == "name" and self.peek().kind == "op" and self.peek().text == "[":
            obs = self.advance()
            if obs.text not in self.observables:
                self.fail(f"unknown observable {obs.text}", obs, dg.UNKNOWN_OBSERVABLE)
            return SendMeasure(gate.text, obs.text, self.qubit_args(), gate.pos)
        if t.kind == "name":
            self.advance()
            return SendExpr(gate.text, Var(t.text, t.pos), gate.pos)
        self.fail(f"expected a value, variable or measurement after '!', found {t.shown()}")

    def qubit_args(self) -> tuple:
        self.expect("[")
        names = []
        if not self.at("]"):
            names.append(self.ident("qubit variable").text)
            while self.at(","):
                self.advance()
                names.append(self.ident("qubit variable").text)
        self.expect("]")
        return tuple(names)

    def operation(self):
        name = self.advance()
        args = self.qubit_args()
        if name.text in self.unitaries:
            return ApplyUnitary(name.text, args, name.pos)
        if name.text in self.observables:
            return Measure(name.text, args, name.pos)
        self.fail(f"unknown unitary or observable {name.text}", name, dg.UNKNOWN_UNITARY)

    def primary(self):
        t = self.tok
        if self.at("nil", "kw"):
            self.advance()
            return Nil(t.pos)
        if self.at("end", "kw"):
            self.advance()
            return End(t.pos)
        if self.at("("):
            self.advance()
            p = self.process()
            self.expect(")")
            return p
        if self.at("["):
            return self.bracket()
        if t.kind == "name":
            self.advance()
            if t.text in self.unitaries or t.text in self.observables:
                self.fail(f"{t.text}[...] is an action and must be followed by '.'", t)
            args = ()
            if self.at("["):
                args = self.qubit_args()
            return Call(t.text, args, t.pos)
        self.fail(f"expected a process, found {t.shown()}")

    def bracket(self):
        start = self.expect("[")
        t, nxt = self.tok, self.peek()
        if self.at("."):
            self.advance()
            body = self.process()
            self.expect("]")
            return Decl((), body, start.pos)
        if t.kind == "name" and nxt.kind == "op" and nxt.text == ":":
            decls = self.decl_list(".")
            self.expect(".")
            body = self.process()
            self.expect("]")
            return Decl(decls, body, start.pos)
        branches = []
        if not self.at("]"):
            branches.append(self.cond_branch())
            while self.at(","):
                self.advance()
                branches.append(self.cond_branch())
        self.expect("]")
        return CondChoice(tuple(branches), start.pos)

    def cond_branch(self):
        t = self.tok
        if self.at("true", "kw"):
            self.advance()
            cond = TrueCond(t.pos)
        else:
            left = self.expr()
            if not (self.at("=") or self.at("!=")):
                self.fail(f"expected '=' or '!=' in condition, found {self.tok.shown()}")
            op = self.advance().text
            cond = Compare(op, left, self.expr(), t.pos)
        self.expect("->")
        return cond, self.process()

    def expr(self):
        t = self.tok
        if t.kind == "nat":
            self.advance()
            return Num(int(t.text), t.pos)
        if t.kind == "name":
            self.advance()
            return Var(t.text, t.pos)
        self.fail(f"expected a number or variable, found {t.shown()}")


def parse_process(text: str):
    p = Parser(text)
    term = p.process()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r}")
    return term


def parse_program(text: str, check: bool = True) -> Program:
    """Parse a whole program.

    With ``check`` the static validator runs too and its first error is raised.
    """
    prog = Parser(text).program()
    if check:
        from .validate import validate

        errs = validate(prog)
        if errs:
            raise ParseError(errs[0])
    return prog
