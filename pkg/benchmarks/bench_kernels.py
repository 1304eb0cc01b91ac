"""Compare the compiled trajectory kernel against the pure-Python twin.

Run: python3 benchmarks/bench_kernels.py
"""

import time

from fairdyn import _loops_py, affine_dynamics, appendix_c_dynamics

try:
    from fairdyn import _loops_c
except ImportError:
    _loops_c = None


def bench(label, loop, args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = loop(*args)
        best = min(best, time.perf_counter() - t0)
    print(f"  {label:10s} {best * 1e3:9.2f} ms  ({len(result[0])} samples)")
    return best


def main():
    cases = [
        (
            "affine fast path, AA mode, 100k steps",
            affine_dynamics(0.1, 0.05, 0.2, 0.6, -0.1, 0.3),
            True,
        ),
        (
            "python callback (appendixC), AA mode, 100k steps",
            appendix_c_dynamics(),
            False,
        ),
    ]
    for title, dyn, use_affine in cases:
        print(title)
        args = (
            0.9, 0.2, 0.5, -1.0, 1.0, 1,
            dyn.f0, dyn.f1,
            dyn.affine if use_affine else None,
            1e-3, 100_000, 50, 1e-10, 0.0,
        )
        t_py = bench("python", _loops_py.ct_loop, args)
        if _loops_c is None:
            print("  compiled   (extension not built)")
        else:
            t_c = bench("compiled", _loops_c.ct_loop, args)
            assert _loops_py.ct_loop(*args) == _loops_c.ct_loop(*args), "backend mismatch"
            print(f"  speedup    {t_py / t_c:9.1f}x  (outputs bit-identical)")
        print()


if __name__ == "__main__":
    main()
