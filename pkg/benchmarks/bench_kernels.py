"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--max-qubits N]
"""
import argparse
import timeit

import numpy as np

from qpalg import kernels
from qpalg.explorer import explore
from qpalg.library import entry
from qpalg.quantum import builtin_gates
from qpalg.semantics import initial_state


def random_rho(rng, n):
    a = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(size=(2 ** n, 2 ** n))
    m = a @ a.conj().T
    return m / np.trace(m)


def best(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def kernel_table(repeat, max_qubits):
    rng = np.random.default_rng(0)
    cnot = builtin_gates()["CNot"].matrix
    h = builtin_gates()["H"].matrix
    print(f"{'n':>3} {'kernel':<14} {'python us':>12} {'cython us':>12} {'speedup':>8}")
    for n in range(2, max_qubits + 1):
        rho = random_rho(rng, n)
        pos = [n - 1, 0]
        keep = list(range(0, n, 2))
        cases = [
            ("conjugate H", lambda k: k.conjugate(rho, h, pos[:1], n)),
            ("conjugate CNot", lambda k: k.conjugate(rho, cnot, pos, n)),
            ("partial_trace", lambda k: k.partial_trace(rho, keep, n)),
        ]
        for name, call in cases:
            py = kernels.BACKENDS["python"]
            t_py = best(lambda: call(py), repeat)
            if "cython" in kernels.BACKENDS:
                cy = kernels.BACKENDS["cython"]
                assert np.allclose(call(py), call(cy), atol=1e-12)
                t_cy = best(lambda: call(cy), repeat)
                print(f"{n:>3} {name:<14} {t_py * 1e6:>12.2f} {t_cy * 1e6:>12.2f} {t_py / t_cy:>7.2f}x")
            else:
                print(f"{n:>3} {name:<14} {t_py * 1e6:>12.2f} {'-':>12} {'-':>8}")


def end_to_end(repeat):
    prog = entry("channel_eve_all").program()
    print()
    print("explore channel_eve_all, fuel 80")
    for name in sorted(kernels.BACKENDS):
        previous = kernels.use_backend(name)
        try:
            t = min(
                timeit.repeat(lambda: explore(initial_state(prog), prog, fuel=80), number=1, repeat=repeat)
            )
        finally:
            kernels.use_backend(previous)
        print(f"  {name:<8} {t:.3f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--max-qubits", type=int, default=10)
    args = ap.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    kernel_table(args.repeat, args.max_qubits)
    end_to_end(max(1, args.repeat // 2))


if __name__ == "__main__":
    main()
