"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Each row reports the
median of several repeats for the same inputs on both backends.
"""

import argparse
import statistics
import time

import numpy as np

from nonsubdelay.kernels import available_backends


def learner_loop(k, n, rounds, rng):
    """The per-round work of a bandit learner: decompose, mix, draw, estimate, step."""
    x = rng.random(n)
    us = rng.random(rounds)
    g = np.zeros(n)
    for u in us:
        perm, lam, masks = k.chain_decompose(x)
        p = k.mixture_probs(lam, 0.3)
        i = k.draw_index(p, u)
        g = k.one_point_estimate(perm, p, i, float(masks[i] % 7) - 3.0)
        x = k.project_step(x, g, 1e-3)
    return x


def full_info_loop(k, n, rounds, rng):
    x = rng.random(n)
    vals = np.concatenate([[0.0], rng.normal(size=n)])
    for _ in range(rounds):
        perm, lam, masks = k.chain_decompose(x)
        x = k.project_step(x, k.chain_gradient(perm, vals), 1e-3)
    return x


def gain_table(k, n, rounds, rng):
    A = rng.normal(size=(rounds, 128, n))
    y = rng.normal(size=(rounds, 128))
    gram = np.einsum("tsi,tsj->tij", A, A)
    rhs = np.einsum("tsi,ts->ti", A, y)
    return k.subset_gain_table(gram, rhs)


CASES = {
    "bandit round loop (n=10, 8000 rounds)": (learner_loop, 10, 8000),
    "full-information loop (n=10, 8000 rounds)": (full_info_loop, 10, 8000),
    "subset gain table (n=10, 50 rounds)": (gain_table, 10, 50),
}


def time_case(fn, k, n, rounds, repeats):
    out = []
    for r in range(repeats):
        rng = np.random.default_rng(r)
        start = time.perf_counter()
        fn(k, n, rounds, rng)
        out.append(time.perf_counter() - start)
    return statistics.median(out)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the fallback only")
    names = sorted(backends)
    print(f"{'case':<44}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, (fn, n, rounds) in CASES.items():
        times = {name: time_case(fn, backends[name], n, rounds, args.repeats) for name in names}
        row = f"{label:<44}" + "".join(f"{times[n_] * 1e3:>10.1f}ms" for n_ in names)
        if len(names) == 2:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
