"""Timing of the compiled kernels against the pure-Python fallback.

Run from the repository root after installing the package::

    python benchmarks/bench_kernels.py --sizes 4 8 16 32 --repeat 5

For each kernel and matrix size the script reports the best wall time of
each backend over ``--repeat`` runs and the speed-up of the compiled one.
The end-to-end rows time library calls that go through the kernels, with
the backend swapped by patching ``qdbkit.linalg.kernels``.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qdbkit import _backend, linalg
from qdbkit.channel import invariant_state
from qdbkit.ensembles import ginibre, random_channel, random_hermitian


def kernel_cases(n: int, rng: np.random.Generator) -> dict:
    """Inputs for each raw kernel at size ``n``."""
    H = random_hermitian(n, rng)
    A = ginibre(rng, n, n)
    T = np.triu(ginibre(rng, n, n))
    b = ginibre(rng, n, 1)[:, 0]
    return {
        "jacobi_eigh": lambda k: k.jacobi_eigh(H.copy(), 100),
        "jacobi_svd": lambda k: k.jacobi_svd(A.copy(), 100),
        "hessenberg": lambda k: k.hessenberg(A.copy()),
        "schur_qr": lambda k: k.schur_qr(*k.hessenberg(A.copy()), 100 * n),
        "tri_solve_shifted": lambda k: k.tri_solve_shifted(T.copy(), 0.1 + 0.2j, b.copy(), 1e-14),
    }


def library_cases(n: int, rng: np.random.Generator) -> dict:
    """Library calls whose cost is dominated by the kernels."""
    d = max(2, int(round(np.sqrt(n))))
    ch = random_channel(d, 2, rng)
    H = random_hermitian(n, rng)
    return {
        f"herm_eig n={n}": lambda: linalg.herm_eig(H),
        f"invariant_state d={d}": lambda: invariant_state(ch),
    }


def best_time(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = _backend.available_backends()
    if "compiled" not in backends:
        print("compiled extension not importable; only the python backend is timed")
    names = sorted(backends)
    header = f"{'case':<30}" + "".join(f"{name + ' [ms]':>16}" for name in names) + f"{'speed-up':>10}"
    print(header)
    print("-" * len(header))

    for n in args.sizes:
        rng = np.random.default_rng(args.seed)
        for label, call in kernel_cases(n, rng).items():
            times = {name: best_time(lambda: call(backends[name]), args.repeat) for name in names}
            _row(f"{label} n={n}", times, names)

    saved = linalg.kernels
    try:
        for n in args.sizes:
            rng = np.random.default_rng(args.seed)
            for label, call in library_cases(n, rng).items():
                times = {}
                for name in names:
                    linalg.kernels = backends[name]
                    times[name] = best_time(call, args.repeat)
                _row(label, times, names)
    finally:
        linalg.kernels = saved


def _row(label: str, times: dict, names: list) -> None:
    cells = "".join(f"{1e3 * times[name]:>16.4f}" for name in names)
    speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
    print(f"{label:<30}{cells}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
