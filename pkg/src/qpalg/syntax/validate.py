"""Static checks that need no execution context."""
from __future__ import annotations

from ..quantum import builtin_gates, builtin_observables
from . import diagnostics as dg
from .diagnostics import Diagnostic
from .terms import (
    ApplyUnitary,
    Call,
    CondChoice,
    Decl,
    Measure,
    Prefix,
    Program,
    SendMeasure,
    resolve_call,
)


def _children(p):
    if isinstance(p, CondChoice):
        return [b for _, b in p.branches]
    return [getattr(p, a) for a in ("left", "right", "body") if hasattr(p, a)]


def walk(p):
    stack = [p]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(reversed(_children(t)))


def _check_qubit_list(action, arity, kind, diags):
    name = action.unitary if kind == "unitary" else action.observable
    if arity is not None and len(action.qubits) != arity:
        code = dg.UNITARY_ARITY if kind == "unitary" else dg.OBSERVABLE_ARITY
        diags.append(
            Diagnostic(
                code,
                f"{name} acts on {arity} qubit(s) but is applied to {len(action.qubits)}",
                action.pos,
            )
        )
    seen = set()
    for x in action.qubits:
        if x in seen:
            diags.append(
                Diagnostic(dg.DUPLICATE_QUBIT, f"duplicate qubit argument {x} in {name}", action.pos)
            )
        seen.add(x)


def _check_decls(decls, pos, diags, code=dg.DUPLICATE_VARIABLE):
    seen = set()
    for name, _ in decls:
        if name in seen:
            diags.append(Diagnostic(code, f"variable {name} declared twice", pos))
        seen.add(name)


def validate(prog: Program, unitaries=None, observables=None) -> list[Diagnostic]:
    """Report unresolved calls, arity errors and duplicate names."""
    unitaries = builtin_gates() if unitaries is None else unitaries
    observables = builtin_observables() if observables is None else observables
    diags: list[Diagnostic] = []
    bodies = [d.body for d in prog.defs.values()] + [prog.main]
    for d in prog.defs.values():
        if d.formals is not None:
            _check_decls(d.formals, d.pos, diags, dg.DUPLICATE_FORMAL)
    for body in bodies:
        for t in walk(body):
            if isinstance(t, Prefix):
                a = t.action
                if isinstance(a, ApplyUnitary):
                    u = unitaries.get(a.unitary)
                    if u is None:
                        diags.append(Diagnostic(dg.UNKNOWN_UNITARY, f"unknown unitary {a.unitary}", a.pos))
                    _check_qubit_list(a, u.arity if u else None, "unitary", diags)
                elif isinstance(a, (Measure, SendMeasure)):
                    m = observables.get(a.observable)
                    if m is None:
                        diags.append(
                            Diagnostic(dg.UNKNOWN_OBSERVABLE, f"unknown observable {a.observable}", a.pos)
                        )
                    _check_qubit_list(a, m.arity if m else None, "observable", diags)
            elif isinstance(t, Decl):
                _check_decls(t.decls, t.pos, diags)
            elif isinstance(t, Call):
                d = prog.defs.get(t.name)
                if d is None:
                    diags.append(Diagnostic(dg.UNRESOLVED_CALL, f"call to undefined process {t.name}", t.pos))
                elif resolve_call(d, len(t.args)) is None:
                    diags.append(
                        Diagnostic(
                            dg.CALL_ARITY,
                            f"{t.name} called with {len(t.args)} argument(s)",
                            t.pos,
                        )
                    )
    return diags
