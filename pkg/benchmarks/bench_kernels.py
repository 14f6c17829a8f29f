"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from transdictate import kernels


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    C = 15
    K = C + 1
    trans = rng.dirichlet(np.ones(K), size=(K, K))
    with np.errstate(divide="ignore"):
        logtrans = np.log(trans)
    batch = rng.random((200, 20, C))
    logemit = np.log(rng.random((40, C)))
    n = 4000
    parent = np.array([-1] + [int(rng.integers(max(0, k - 50), k)) for k in range(1, n)])
    phone = np.array([-1] + list(rng.integers(0, 40, n - 1)))
    truth = rng.integers(0, 40, 8)
    return {
        "forward_backward (200 x 20, C=15)": lambda m: m.forward_backward(trans, batch),
        "forward_logprob (L=40, C=15)": lambda m: m.forward_logprob(logtrans, logemit),
        "viterbi (L=40, C=15)": lambda m: m.viterbi(logtrans, logemit),
        "trie_edit_distances (4000 nodes)": lambda m: m.trie_edit_distances(truth, parent, phone),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    mods = kernels.backends()
    rng = np.random.default_rng(0)
    names = sorted(mods)
    print(f"{'kernel':<36}" + "".join(f"{n:>12}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases(rng).items():
        times = {n: _best(lambda: fn(mods[n]), args.repeat) for n in names}
        row = f"{label:<36}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in names)
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:>6.1f}x"
        print(row)
    if len(names) == 1:
        print("compiled backend not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
