"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--duration 10]

Streams come from the calibrated source; each kernel runs on identical
inputs in both backends and the outputs are checked for equality.
"""

import argparse
import timeit

import numpy as np

from qmemsim._core import _fallback
from qmemsim.pair_source import paper_source, simulate_timetags
from qmemsim.streams import SIGNAL, TRIGGER

try:
    from qmemsim._core import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=10.0, help="simulated seconds")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    stream = simulate_timetags(paper_source(), args.duration, seed=1)
    trig, sig = stream.channel_times(TRIGGER), stream.channel_times(SIGNAL)
    arm_a, arm_b = np.ascontiguousarray(sig[::2]), np.ascontiguousarray(sig[1::2])
    print(f"{trig.size} trigger and {sig.size} signal tags ({args.duration:g} s)")

    cases = {
        "histogram [-100, 300) ns, 1 ns bins": lambda m: m.histogram_delays(trig, sig, -100.0, 300.0, 1.0, 400),
        "histogram [-1000, 1000) ns, 4 ns bins": lambda m: m.histogram_delays(trig, sig, -1000.0, 1000.0, 4.0, 500),
        "alpha windows, 50 ns": lambda m: m.window_hits(trig, arm_a, arm_b, 19.0, 69.0),
    }
    print(f"{'kernel':40s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, run in cases.items():
        t_py = _best(lambda: run(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:40s} {t_py:10.4f} {'n/a':>10s}")
            continue
        assert np.array_equal(np.asarray(run(_fallback)), np.asarray(run(_kernels)))
        t_cy = _best(lambda: run(_kernels), args.repeat)
        print(f"{name:40s} {t_py:10.4f} {t_cy:10.4f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
