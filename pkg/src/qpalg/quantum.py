"""Dense density-matrix algebra over named qubit registers.

A register is a sequence of qubit names ``q``; the first name is the most
significant bit of the basis index, so prepending a qubit is a Kronecker
product on the left.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

TOL = 1e-9
P_MIN = 1e-12
MAX_QUBITS = 12


class QuantumError(ValueError):
    """Invalid register operation (bad names, dimensions, or values)."""


class RegisterOverflow(QuantumError):
    pass


def validation_enabled() -> bool:
    return os.environ.get("QPALG_VALIDATE", "") not in ("", "0")


class DensityMatrix:
    """Trace-one Hermitian matrix over ``n_qubits`` qubits.

    The wrapped array is made read-only; every operation returns a new value.
    Positive semidefiniteness is only checked when ``validate`` is true or the
    ``QPALG_VALIDATE`` environment variable is set.
    """

    __slots__ = ("mat", "n_qubits")

    def __init__(self, mat, validate: bool | None = None):
        mat = np.array(mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise QuantumError(f"density matrix must be square, got shape {mat.shape}")
        dim = mat.shape[0]
        n = dim.bit_length() - 1
        if 1 << n != dim:
            raise QuantumError(f"dimension {dim} is not a power of two")
        if n > MAX_QUBITS:
            raise RegisterOverflow(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
        mat.setflags(write=False)
        self.mat = mat
        self.n_qubits = n
        if validate is None:
            validate = validation_enabled()
        if validate:
            self.check()

    @classmethod
    def empty(cls) -> "DensityMatrix":
        return cls(np.ones((1, 1)))

    @classmethod
    def basis(cls, bits: str) -> "DensityMatrix":
        """``basis("01")`` is |01><01|."""
        dim = 1 << len(bits)
        m = np.zeros((dim, dim), dtype=np.complex128)
        idx = int(bits, 2) if bits else 0
        m[idx, idx] = 1.0
        return cls(m)

    @classmethod
    def pure(cls, amplitudes) -> "DensityMatrix":
        v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1, 1)
        return cls(v @ v.conj().T)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def check(self, tol: float = TOL) -> None:
        m = self.mat
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise QuantumError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise QuantumError(f"density matrix has trace {np.trace(m)!r}")
        if np.min(np.linalg.eigvalsh(m)) < -tol:
            raise QuantumError("density matrix is not positive semidefinite")

    def allclose(self, other: "DensityMatrix", tol: float = TOL) -> bool:
        return self.mat.shape == other.mat.shape and bool(
            np.max(np.abs(self.mat - other.mat), initial=0.0) <= tol
        )

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    ev = np.linalg.eigvalsh(a.mat - b.mat)
    return float(0.5 * np.sum(np.abs(ev)))


@dataclass(frozen=True, eq=False)
class Unitary:
    name: str
    arity: int
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class Observable:
    """Projective measurement; ``branches`` pairs each eigenvalue with its projector."""

    name: str
    arity: int
    branches: tuple


def tensor(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def _positions(xs: Sequence[str], q: Sequence[str]) -> list[int]:
    if len(set(xs)) != len(xs):
        raise QuantumError(f"duplicate qubit in {list(xs)}")
    index = {name: i for i, name in enumerate(q)}
    try:
        return [index[x] for x in xs]
    except KeyError as e:
        raise QuantumError(f"qubit {e.args[0]!r} not in register {list(q)}") from None


def permutation_to_front(xs: Sequence[str], q: Sequence[str]) -> np.ndarray:
    """0/1 matrix mapping q-ordered basis states to xs-first order.

    Row index is the permuted basis index, column index the original one.
    """
    pos = _positions(xs, q)
    order = pos + [i for i in range(len(q)) if i not in pos]
    n = len(q)
    dim = 1 << n
    perm = np.zeros((dim, dim), dtype=np.complex128)
    for old in range(dim):
        bits = [(old >> (n - 1 - p)) & 1 for p in range(n)]
        new = 0
        for p in order:
            new = (new << 1) | bits[p]
        perm[new, old] = 1.0
    return perm


def lifted_operator(a, xs: Sequence[str], q: Sequence[str]) -> np.ndarray:
    """Full-register operator Pi^dagger (A x I^k) Pi, built literally."""
    a = np.asarray(a, dtype=np.complex128)
    n = len(xs)
    if a.shape != (1 << n, 1 << n):
        raise QuantumError(f"operator of shape {a.shape} does not act on {n} qubits")
    perm = permutation_to_front(xs, q)
    k = len(q) - n
    return perm.conj().T @ np.kron(a, np.eye(1 << k)) @ perm


def _check_register(q: Sequence[str], rho: DensityMatrix) -> None:
    if len(q) != rho.n_qubits:
        raise QuantumError(f"register {list(q)} does not match a {rho.n_qubits}-qubit state")
    if len(set(q)) != len(q):
        raise QuantumError(f"register {list(q)} has duplicate names")


def _apply(a, xs, q, rho: DensityMatrix) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (1 << len(xs), 1 << len(xs)):
        raise QuantumError(f"operator of shape {a.shape} does not act on {len(xs)} qubits")
    _check_register(q, rho)
    pos = _positions(xs, q)
    return kernels.conjugate(rho.mat, a, pos, len(q))


def apply_lifted(a, xs: Sequence[str], q: Sequence[str], rho: DensityMatrix) -> np.ndarray:
    """Conjugate ``rho`` by ``a`` acting on qubits ``xs`` of register ``q``.

    Equal to ``L @ rho @ L^dagger`` with ``L = lifted_operator(a, xs, q)``.
    Returns a raw array since projector conjugation is not trace-preserving.
    """
    return _apply(a, xs, q, rho)


def apply_unitary(u: Unitary, xs, q, rho: DensityMatrix) -> DensityMatrix:
    if u.arity != len(xs):
        raise QuantumError(f"{u.name} acts on {u.arity} qubit(s), got {len(xs)}")
    return DensityMatrix(_apply(u.matrix, xs, q, rho))


def partial_trace(rho: DensityMatrix, q: Sequence[str], e) -> DensityMatrix:
    """Trace the qubits in ``e`` out of ``rho``; survivors keep their order."""
    _check_register(q, rho)
    e = set(e)
    missing = e - set(q)
    if missing:
        raise QuantumError(f"cannot trace out {sorted(missing)}: not in register {list(q)}")
    if not e:
        return rho
    keep = [i for i, name in enumerate(q) if name not in e]
    return DensityMatrix(kernels.partial_trace(rho.mat, keep, len(q)))


def measurement_branches(m: Observable, xs, q, rho: DensityMatrix):
    """Outcomes ``(eigenvalue, probability, post-state)`` with nonnegligible probability."""
    if m.arity != len(xs):
        raise QuantumError(f"{m.name} measures {m.arity} qubit(s), got {len(xs)}")
    raw = []
    for lam, proj in m.branches:
        post = _apply(proj, xs, q, rho)
        p = float(np.real(np.trace(post)))
        if p > P_MIN:
            raw.append((lam, p, post))
    total = sum(p for _, p, _ in raw)
    return [(lam, p / total, DensityMatrix(post / p)) for lam, p, post in raw]


def measure_forget(m: Observable, xs, q, rho: DensityMatrix) -> DensityMatrix:
    if m.arity != len(xs):
        raise QuantumError(f"{m.name} measures {m.arity} qubit(s), got {len(xs)}")
    acc = sum(_apply(proj, xs, q, rho) for _, proj in m.branches)
    return DensityMatrix(acc)


def init_qubit(v: int, x: str, q: Sequence[str], rho: DensityMatrix):
    """Prepend qubit ``x`` in basis state |v><v|."""
    if v not in (0, 1):
        raise QuantumError(f"a qubit can only be initialized with 0 or 1, got {v}")
    if x in q:
        raise QuantumError(f"qubit {x!r} is already initialized")
    _check_register(q, rho)
    if len(q) + 1 > MAX_QUBITS:
        raise RegisterOverflow(f"register would exceed {MAX_QUBITS} qubits")
    ket = np.zeros((2, 2), dtype=np.complex128)
    ket[v, v] = 1.0
    return (x, *q), DensityMatrix(np.kron(ket, rho.mat))


def reorder(rho: DensityMatrix, q: Sequence[str], new_q: Sequence[str]) -> DensityMatrix:
    """Same state, basis relabelled for the register order ``new_q``."""
    if list(q) == list(new_q):
        return rho
    if sorted(q) != sorted(new_q):
        raise QuantumError(f"{list(new_q)} is not a reordering of {list(q)}")
    n = len(q)
    old_pos = {name: i for i, name in enumerate(q)}
    order = [old_pos[name] for name in new_q]
    t = rho.mat.reshape((2,) * (2 * n))
    t = t.transpose(order + [n + p for p in order])
    return DensityMatrix(t.reshape(rho.mat.shape))


# built-in gates and observables

_S2 = 1 / np.sqrt(2)
_KET = {
    "0": np.array([1, 0], dtype=np.complex128),
    "1": np.array([0, 1], dtype=np.complex128),
    "+": np.array([_S2, _S2], dtype=np.complex128),
    "-": np.array([_S2, -_S2], dtype=np.complex128),
}


def _proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1, 1)
    return v @ v.conj().T


def _frozen(m) -> np.ndarray:
    m = np.array(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


_GATES = {
    "I": Unitary("I", 1, _frozen(np.eye(2))),
    "X": Unitary("X", 1, _frozen([[0, 1], [1, 0]])),
    "Y": Unitary("Y", 1, _frozen([[0, -1j], [1j, 0]])),
    "Z": Unitary("Z", 1, _frozen([[1, 0], [0, -1]])),
    "H": Unitary("H", 1, _frozen(np.array([[1, 1], [1, -1]]) * _S2)),
    "CNot": Unitary(
        "CNot", 2, _frozen([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    ),
}

_OBSERVABLES = {
    "M_std1": Observable(
        "M_std1", 1, ((0, _frozen(_proj(_KET["0"]))), (1, _frozen(_proj(_KET["1"]))))
    ),
    # outcome |b1 b2> reports 2*b1 + b2, first listed qubit being the high bit
    "M_std2": Observable(
        "M_std2",
        2,
        tuple(
            (2 * b1 + b2, _frozen(_proj(np.kron(_KET[str(b1)], _KET[str(b2)]))))
            for b1 in (0, 1)
            for b2 in (0, 1)
        ),
    ),
    "M_pm": Observable(
        "M_pm", 1, ((0, _frozen(_proj(_KET["+"]))), (1, _frozen(_proj(_KET["-"]))))
    ),
}


def builtin_gates() -> dict[str, Unitary]:
    return dict(_GATES)


def builtin_observables() -> dict[str, Observable]:
    return dict(_OBSERVABLES)


def register_gate(name: str, matrix) -> Unitary:
    """Add a unitary to the built-in set (for extension, not used by the corpus)."""
    m = _frozen(matrix)
    n = m.shape[0].bit_length() - 1
    if m.shape != (1 << n, 1 << n) or not np.allclose(m @ m.conj().T, np.eye(1 << n), atol=TOL):
        raise QuantumError(f"{name} is not a unitary on whole qubits")
    _GATES[name] = Unitary(name, n, m)
    return _GATES[name]


def register_observable(name: str, branches) -> Observable:
    """Add a projective observable given ``(eigenvalue, projector)`` pairs."""
    bs = tuple((int(lam), _frozen(p)) for lam, p in branches)
    dim = bs[0][1].shape[0]
    n = dim.bit_length() - 1
    if len({lam for lam, _ in bs}) != len(bs):
        raise QuantumError("eigenvalues must be distinct")
    total = sum(p for _, p in bs)
    if not np.allclose(total, np.eye(dim), atol=TOL):
        raise QuantumError("projectors must sum to the identity")
    for _, p in bs:
        if not (np.allclose(p @ p, p, atol=TOL) and np.allclose(p, p.conj().T, atol=TOL)):
            raise QuantumError("branch matrix is not an orthogonal projector")
    _OBSERVABLES[name] = Observable(name, n, bs)
    return _OBSERVABLES[name]
