"""Compare the compiled and pure-Python modular exponentiation backends.

    python3 benchmarks/bench_kernels.py [--reps N] [--json]
"""

from __future__ import annotations

import argparse
import json
import random
import timeit

from vspace import kernels
from vspace.crypto.group import MODP2048, TEST256


def _bench(ctx_cls, params, reps: int, rng: random.Random) -> dict[str, float]:
    ctx = ctx_cls(params.p)
    bases = [pow(params.g, rng.randrange(1, params.q), params.p) for _ in range(8)]
    exps = [rng.randrange(1, params.q) for _ in range(8)]

    def one() -> None:
        for b, e in zip(bases, exps):
            ctx.pow(b, e)

    def two() -> None:
        for i in range(8):
            ctx.pow2(bases[i], exps[i], bases[i - 1], exps[i - 1])

    per = 8 * reps
    return {
        "pow_us": min(timeit.repeat(one, number=reps, repeat=3)) / per * 1e6,
        "pow2_us": min(timeit.repeat(two, number=reps, repeat=3)) / per * 1e6,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    backends = {"python": kernels.PyModContext}
    if kernels.compiled_available():
        backends["compiled"] = kernels.ModContext
    else:
        print("compiled extension not built; timing the fallback only")

    results: dict[str, dict[str, dict[str, float]]] = {}
    for params in (TEST256, MODP2048):
        reps = args.reps if params is TEST256 else max(1, args.reps // 10)
        results[params.label] = {
            name: _bench(cls, params, reps, random.Random(1)) for name, cls in backends.items()
        }

    if args.json:
        print(json.dumps(results, indent=2, sort_keys=True))
        return
    print(f"{'group':<10}{'backend':<10}{'pow (us)':>12}{'pow2 (us)':>12}")
    for label, by_backend in results.items():
        for name, r in by_backend.items():
            print(f"{label:<10}{name:<10}{r['pow_us']:>12.1f}{r['pow2_us']:>12.1f}")
        if "compiled" in by_backend:
            py, c = by_backend["python"], by_backend["compiled"]
            print(f"{'':<10}{'speedup':<10}{py['pow_us'] / c['pow_us']:>11.2f}x{py['pow2_us'] / c['pow2_us']:>11.2f}x")


if __name__ == "__main__":
    main()
