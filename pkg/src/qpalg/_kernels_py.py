"""Pure numpy implementations of the density-matrix kernels.

Same contract as the compiled ``_kernels`` module: qubit position ``p`` of an
``n``-qubit register owns bit ``n - 1 - p`` of the basis index.
"""
import numpy as np


def conjugate(rho, op, positions, n):
    """Return L rho L^dagger where L applies ``op`` to ``positions``."""
    positions = [int(p) for p in positions]
    m = len(positions)
    dim = 1 << n
    if m == 0:
        c = complex(op[0, 0])
        return np.asarray(rho, dtype=np.complex128) * (c * c.conjugate())
    t = np.asarray(rho, dtype=np.complex128).reshape((2,) * (2 * n))
    a = np.asarray(op, dtype=np.complex128).reshape((2,) * (2 * m))
    inner = list(range(m, 2 * m))

    t = np.tensordot(a, t, axes=(inner, positions))
    t = np.moveaxis(t, list(range(m)), positions)

    cols = [n + p for p in positions]
    t = np.tensordot(t, a.conj(), axes=(cols, inner))
    t = np.moveaxis(t, list(range(2 * n - m, 2 * n)), cols)
    return np.ascontiguousarray(t.reshape(dim, dim))


def partial_trace(rho, keep, n):
    """Trace out every position not listed in ``keep`` (order of ``keep`` kept)."""
    keep = [int(p) for p in keep]
    t = np.asarray(rho, dtype=np.complex128).reshape((2,) * (2 * n))
    rows = list(range(n))
    cols = [n + p for p in range(n)]
    for p in range(n):
        if p not in keep:
            cols[p] = rows[p]
    out = [rows[p] for p in keep] + [cols[p] for p in keep]
    dk = 1 << len(keep)
    return np.ascontiguousarray(np.einsum(t, rows + cols, out).reshape(dk, dk))
