"""Pretty-printer producing text that parses back to the same term."""
from __future__ import annotations

from .terms import (
    ActivePar,
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
    Program,
    Receive,
    Restrict,
    Scope,
    SendExpr,
    SendMeasure,
    Seq,
    TrueCond,
    Var,
)

WIDTH = 78
INDENT = 4

# binding strength; larger binds tighter
_LEVEL = {Restrict: 0, Par: 1, ActivePar: 1, Choice: 2, Seq: 3, Prefix: 4}
_ATOM = 5


def _level(p) -> int:
    return _LEVEL.get(type(p), _ATOM)


def expr_text(e) -> str:
    return str(e.value) if isinstance(e, Num) else e.name


def cond_text(c) -> str:
    if isinstance(c, TrueCond):
        return "true"
    return f"{expr_text(c.left)} {c.op} {expr_text(c.right)}"


def action_text(a) -> str:
    if isinstance(a, SendExpr):
        return f"{a.gate}!{expr_text(a.expr)}"
    if isinstance(a, SendMeasure):
        return f"{a.gate}!{a.observable}[{', '.join(a.qubits)}]"
    if isinstance(a, Receive):
        return f"{a.gate}?{a.var}"
    if isinstance(a, ApplyUnitary):
        return f"{a.unitary}[{', '.join(a.qubits)}]"
    if isinstance(a, Measure):
        return f"{a.observable}[{', '.join(a.qubits)}]"
    raise TypeError(f"not an action: {a!r}")


def decls_text(decls) -> str:
    return ", ".join(f"{n}:{t}" for n, t in decls)


def _binary_parts(p):
    op = {Seq: ";", Par: "||", ActivePar: "||", Choice: "+"}[type(p)]
    lvl = _level(p)
    if op == ";":
        return op, (p.left, _level(p.left) < lvl), (p.right, _level(p.right) <= lvl)
    # operands of || and + are parenthesized unless atomic, for readability
    left_chain = _level(p.left) == lvl
    return op, (p.left, _level(p.left) < _ATOM and not left_chain), (p.right, _level(p.right) < _ATOM)


def _restrict_paren(p) -> bool:
    # not needed for parsing, but shows which term the gates are hidden in
    return _level(p.body) < _LEVEL[Prefix]


def flat(p) -> str:
    """Single-line rendering."""
    if isinstance(p, Nil):
        return "nil"
    if isinstance(p, End):
        return "end"
    if isinstance(p, Prefix):
        return f"{action_text(p.action)} . {_wrap_flat(p.body, _level(p.body) < _LEVEL[Prefix])}"
    if isinstance(p, (Seq, Par, ActivePar, Choice)):
        op, (l, pl), (r, pr) = _binary_parts(p)
        return f"{_wrap_flat(l, pl)} {op} {_wrap_flat(r, pr)}"
    if isinstance(p, Restrict):
        return f"{_wrap_flat(p.body, _restrict_paren(p))} \\ {{{', '.join(p.gates)}}}"
    if isinstance(p, CondChoice):
        if not p.branches:
            return "[ ]"
        inner = ", ".join(f"{cond_text(c)} -> {flat(b)}" for c, b in p.branches)
        return f"[ {inner} ]"
    if isinstance(p, Decl):
        head = decls_text(p.decls)
        return f"[ {head + ' ' if head else ''}. {flat(p.body)} ]"
    if isinstance(p, Scope):
        return f"[ {flat(p.body)} ]"
    if isinstance(p, Call):
        return f"{p.name}[{', '.join(p.args)}]" if p.args else p.name
    raise TypeError(f"not a process: {p!r}")


def _wrap_flat(p, paren: bool) -> str:
    return f"({flat(p)})" if paren else flat(p)


def pretty(p, indent: int = 0, width: int = WIDTH) -> str:
    """Multi-line rendering; continuation lines are indented by ``indent``."""
    one = flat(p)
    if indent + len(one) <= width or _level(p) == _ATOM and not isinstance(
        p, (Decl, CondChoice, Scope)
    ):
        return one
    pad = " " * indent
    inner = indent + INDENT
    ipad = " " * inner
    if isinstance(p, Prefix):
        paren = _level(p.body) < _LEVEL[Prefix]
        return f"{action_text(p.action)} .\n{pad}{_wrap(p.body, paren, indent, width)}"
    if isinstance(p, (Seq, Par, ActivePar, Choice)):
        op, (l, pl), (r, pr) = _binary_parts(p)
        left = _wrap(l, pl, indent, width)
        right = _wrap(r, pr, indent, width)
        if op == ";":
            return f"{left} ;\n{pad}{right}"
        return f"{left}\n{pad}{op} {right}"
    if isinstance(p, Restrict):
        return f"{_wrap(p.body, _restrict_paren(p), indent, width)} \\ {{{', '.join(p.gates)}}}"
    if isinstance(p, CondChoice):
        lines = [
            f"{cond_text(c)} -> {pretty(b, inner, width)}" for c, b in p.branches
        ]
        return "[ " + f",\n{ipad}".join(lines) + f"\n{pad}]"
    if isinstance(p, Decl):
        head = decls_text(p.decls)
        return f"[ {head + ' ' if head else ''}.\n{ipad}{pretty(p.body, inner, width)}\n{pad}]"
    if isinstance(p, Scope):
        return f"[\n{ipad}{pretty(p.body, inner, width)}\n{pad}]"
    return one


def _wrap(p, paren: bool, indent: int, width: int) -> str:
    if not paren:
        return pretty(p, indent, width)
    return f"({pretty(p, indent + 1, width)})"


def pretty_print(p) -> str:
    """Render a process term or a whole program."""
    if isinstance(p, Program):
        return print_program(p)
    return pretty(p)


def print_program(prog: Program) -> str:
    chunks = []
    for d in prog.defs.values():
        head = f"def {d.name}"
        if d.formals is not None:
            head += f"[{decls_text(d.formals)}]"
        chunks.append(f"{head} =\n{' ' * INDENT}{pretty(d.body, INDENT)}\n")
    chunks.append(f"main =\n{' ' * INDENT}{pretty(prog.main, INDENT)}\n")
    return "\n".join(chunks)
