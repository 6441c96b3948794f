"""Benchmark the compiled vs pure-numpy belief-propagation kernels.

Runs the encoder-side hot loop (rate trials over the syndrome ladder) on
identical instances with both backends and reports throughput, plus a whole
practical-mode image encode with each backend if --full is given.

    python benchmarks/bench_backends.py [--full]
"""

import argparse
import math
import time

import numpy as np

from oic360 import fixtures, ldpc
from oic360.kernels import BP_ALPHA, BP_MAX_ITERS, BP_PATIENCE, _bp_py

try:
    from oic360.kernels import _bp_c
except ImportError:
    _bp_c = None

N = 1024


def make_instances(code, n_inst, seed=11):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_inst):
        x = rng.integers(0, 2, N).astype(np.uint8)
        p = float(rng.uniform(0.005, 0.2))
        y = x ^ (rng.random(N) < p).astype(np.uint8)
        t = code.rung_for_bits(math.ceil(N * ldpc.binary_entropy(p)) + 96)
        g = code._graph(t)
        bits = code.prefix_bits(code.accumulated(x), code.rung_bits(t))
        srt = np.argsort(code.order[:code.rung_bits(t)], kind="stable")
        acc_y = code.accumulated(y)
        targets = (code._segment_values(bits[srt])
                   ^ code._segment_values(acc_y[g["pos"]]))[g["kept"]]
        llr0 = math.log((1 - p) / p)
        out.append((g, targets.astype(np.uint8), llr0))
    return out


def bench_kernel(kernel, instances, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        converged = 0
        for g, targets, llr0 in instances:
            ok, _ = kernel(g["var_edge"], g["edge_var"], g["check_ptr"],
                           g["check_edge"], targets, llr0,
                           BP_MAX_ITERS, BP_PATIENCE, BP_ALPHA)
            converged += ok
        best = min(best, time.perf_counter() - t0)
    return best, converged


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--instances", type=int, default=200)
    parser.add_argument("--full", action="store_true",
                        help="also time a whole practical-mode image encode")
    args = parser.parse_args()

    code = ldpc.get_code(N)
    instances = make_instances(code, args.instances)

    t_py, conv_py = bench_kernel(_bp_py.bp_decode, instances)
    print(f"numpy kernel:    {args.instances / t_py:8.1f} decodes/s "
          f"({t_py * 1e3 / args.instances:.2f} ms each, {conv_py} converged)")
    if _bp_c is None:
        print("compiled kernel: not built")
    else:
        t_c, conv_c = bench_kernel(_bp_c.bp_decode, instances)
        print(f"compiled kernel: {args.instances / t_c:8.1f} decodes/s "
              f"({t_c * 1e3 / args.instances:.2f} ms each, {conv_c} converged)")
        assert conv_py == conv_c, "backends disagree"
        print(f"speedup: {t_py / t_c:.1f}x")

    if args.full:
        import os
        import subprocess
        import sys

        img_path = "/tmp/oic_bench_img.pgm"
        fixtures.synthetic_equirect().save(img_path)
        for backend in ("c", "py"):
            if backend == "c" and _bp_c is None:
                continue
            env = dict(os.environ, OIC_KERNEL=backend)
            t0 = time.perf_counter()
            subprocess.run(
                [sys.executable, "-c",
                 "from oic360 import encoder, geom; "
                 f"encoder.encode_image(geom.PlaneImage.load('{img_path}'), "
                 "qp=42, mode='practical')"],
                env=env, check=True)
            print(f"full practical encode qp42 [{backend}]: "
                  f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
