"""Brute-force reference simulator for straight-line programs on 1 or 2 qubits.

Written without the package's quantum code: every operator is expanded to a
full 2^n x 2^n matrix by enumerating basis states.
"""
from __future__ import annotations

import math
import random

import numpy as np

S = 1 / math.sqrt(2)
ONE_QUBIT = {
    "I": [[1, 0], [0, 1]],
    "X": [[0, 1], [1, 0]],
    "Y": [[0, -1j], [1j, 0]],
    "Z": [[1, 0], [0, -1]],
    "H": [[S, S], [S, -S]],
}


def _bit(index, wire, n):
    return (index >> (n - 1 - wire)) & 1


def full_operator(gate, wires, n):
    """Matrix of ``gate`` on ``wires`` of an n-wire register, wire 0 most significant."""
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    if gate == "CNot":
        c, t = wires
        for col in range(dim):
            row = col ^ (1 << (n - 1 - t)) if _bit(col, c, n) else col
            out[row, col] = 1
        return out
    g = ONE_QUBIT[gate]
    (w,) = wires
    for col in range(dim):
        for row in range(dim):
            same_elsewhere = (row | (1 << (n - 1 - w))) == (col | (1 << (n - 1 - w)))
            if same_elsewhere:
                out[row, col] = g[_bit(row, w, n)][_bit(col, w, n)]
    return out


def projectors(observable, wires, n):
    """``{outcome: projector}`` on the full register."""
    dim = 2 ** n
    if observable in ("M_std1", "M_std2"):
        out = {}
        for i in range(dim):
            bits = [_bit(i, w, n) for w in wires]
            value = bits[0] if observable == "M_std1" else 2 * bits[0] + bits[1]
            out.setdefault(value, np.zeros((dim, dim), dtype=complex))[i, i] = 1
        return out
    if observable == "M_pm":
        (w,) = wires
        plus = np.array([[0.5, 0.5], [0.5, 0.5]])
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
        out = {}
        for value, p in ((0, plus), (1, minus)):
            m = np.zeros((dim, dim), dtype=complex)
            for row in range(dim):
                for col in range(dim):
                    if (row | (1 << (n - 1 - w))) == (col | (1 << (n - 1 - w))):
                        m[row, col] = p[_bit(row, w, n)][_bit(col, w, n)]
            out[value] = m
        return out
    raise ValueError(observable)


def simulate(n, inits, ops, measurement):
    """Outcome distribution of a straight-line program.

    ``inits`` are the initial bits of wires 0..n-1, ``ops`` a list of
    ``(gate, wires)``, ``measurement`` an ``(observable, wires)`` pair.
    """
    psi = np.zeros(2 ** n, dtype=complex)
    psi[int("".join(str(b) for b in inits), 2)] = 1
    rho = np.outer(psi, psi.conj())
    for gate, wires in ops:
        u = full_operator(gate, wires, n)
        rho = u @ rho @ u.conj().T
    dist = {}
    for value, p in projectors(*measurement, n).items():
        prob = float(np.real(np.trace(p @ rho)))
        if prob > 1e-12:
            dist[value] = prob
    total = sum(dist.values())
    return {k: v / total for k, v in dist.items()}


def random_straight_line(rng: random.Random):
    """``(n, inits, ops, measurement)`` for a random 1 or 2 qubit program."""
    n = rng.choice([1, 2])
    inits = [rng.randrange(2) for _ in range(n)]
    ops = []
    for _ in range(rng.randrange(1, 6)):
        if n == 2 and rng.random() < 0.3:
            ops.append(("CNot", tuple(rng.sample(range(n), 2))))
        else:
            ops.append((rng.choice(list(ONE_QUBIT)), (rng.randrange(n),)))
    choices = [("M_std1", (w,)) for w in range(n)] + [("M_pm", (w,)) for w in range(n)]
    if n == 2:
        choices += [("M_std2", (0, 1)), ("M_std2", (1, 0))]
    return n, inits, ops, rng.choice(choices)


def to_source(n, inits, ops, measurement) -> str:
    """The same program in QPAlg concrete syntax; wire w is qubit ``x{w}``."""
    names = [f"x{w}" for w in range(n)]
    decls = ", ".join(f"{x}:Qubit" for x in names) + ", r:Nat"
    sends = " . ".join(f"i!{b}" for b in inits)
    recvs = " . ".join(f"i?{x}" for x in names)
    steps = "".join(f"{g}[{', '.join(names[w] for w in ws)}] . " for g, ws in ops)
    obs, ws = measurement
    meas = f"(m!{obs}[{', '.join(names[w] for w in ws)}] . end || m?r . end) \\ {{m}}"
    return (
        f"main = [ {decls} .\n"
        f"    ({sends} . end || {recvs} . end) \\ {{i}} ;\n"
        f"    {steps}{meas}\n"
        f"]\n"
    )
