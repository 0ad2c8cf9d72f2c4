"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best-of-``repeat`` wall time per call for both backends
and the speed-up.  Outputs are checked to agree before timing.
"""
import argparse
import math
import sys
import timeit

from wpcn._backend import available_backends

EPS, TERMS = 1e-13, 2000

CASES = {
    "log_bessel_k(10, x) x 200": lambda k: [k.log_bessel_k_all(10, 0.05 * i + 0.01, EPS, TERMS)
                                          for i in range(200)],
    "product_sf(N=5) x 200": lambda k: [k.product_sf(0.05 * i + 0.01, 5, 2.0, EPS, TERMS)
                                      for i in range(200)],
    "capacity_integral(N=2, c=5)": lambda k: k.capacity_integral(2, 5.0, 1e-12, 1e-12, 400,
                                                                 EPS, TERMS)[0],
    "capacity_integral(N=10, c=50)": lambda k: k.capacity_integral(10, 50.0, 1e-12, 1e-12, 400,
                                                                   EPS, TERMS)[0],
    "lambert_w0 x 1000": lambda k: [k.lambert_w0(-0.36 + 0.01 * i) for i in range(1000)],
    "gammainc_upper_reg x 500": lambda k: [k.gammainc_upper_reg(3.6467, 0.02 * i, EPS, TERMS)
                                         for i in range(500)],
}


def _flatten(x):
    if isinstance(x, (list, tuple)):
        for item in x:
            yield from _flatten(item)
    else:
        yield float(x)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the Python kernels are available",
              file=sys.stderr)
    names = sorted(backends)  # "cython" before "python"
    print(f"{'kernel':<32}" + "".join(f"{n + ' [ms]':>14}" for n in names)
          + ("   speed-up" if len(names) == 2 else ""))
    for label, fn in CASES.items():
        outs = [list(_flatten(fn(backends[n]))) for n in names]
        for other in outs[1:]:
            if not all(math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-300)
                       for a, b in zip(outs[0], other)):
                raise SystemExit(f"backends disagree on {label}")
        times = []
        for n in names:
            timer = timeit.Timer(lambda: fn(backends[n]))
            number, _ = timer.autorange()
            times.append(min(timer.repeat(args.repeat, number)) / number)
        line = f"{label:<32}" + "".join(f"{t * 1e3:>14.4f}" for t in times)
        if len(times) == 2:
            line += f"{times[1] / times[0]:>10.1f}x"  # python / cython
        print(line)


if __name__ == "__main__":
    main()
