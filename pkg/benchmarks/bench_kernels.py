#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the three per-step operations (full-batch evaluation, fused
evaluation plus gradient, minibatch gradient) and a whole SGLD chain, at a
desk-scale shape and a wider one. Also reports the maximum gradient
disagreement between the backends.

Run:  python benchmarks/bench_kernels.py [--repeat-seconds 0.5]
"""

import argparse
import time

import numpy as np

from gibbsbound import data, model, sampler
from gibbsbound.ergodic import StopConfig
from gibbsbound.kernels import available_backends


def time_call(fn, *args, seconds=0.5):
    fn(*args)
    start = time.perf_counter()
    calls = 0
    while time.perf_counter() - start < seconds:
        fn(*args)
        calls += 1
    return (time.perf_counter() - start) / calls


def bench_kernels(widths, n_full, n_batch, seconds):
    rng = np.random.default_rng(0)
    arch = model.Architecture(widths)
    params = rng.standard_normal(arch.param_count)
    weights, biases = model.unpack(params, arch)
    X = np.ascontiguousarray(rng.standard_normal((n_full, widths[0])))
    y = rng.choice([-1.0, 1.0], n_full)
    Xb, yb = np.ascontiguousarray(X[:n_batch]), y[:n_batch]
    p_min = float(np.exp(-4.0))

    backends = available_backends()
    grads = {}
    print(f"\narch {widths}, full batch {n_full}, minibatch {n_batch}")
    header = f"{'operation':<22}" + "".join(f"{name:>12}" for name in backends)
    print(header)
    ops = [
        ("evaluate(full)", lambda m: (m.evaluate, (X, y, weights, biases, 1, p_min, 0.0))),
        ("evaluate_with_grad", lambda m: (m.evaluate_with_grad, (X, y, weights, biases, 1, p_min, 0.0))),
        ("loss_and_grad(mini)", lambda m: (m.loss_and_grad, (Xb, yb, weights, biases, 1, p_min))),
    ]
    for label, pick in ops:
        row = f"{label:<22}"
        for name, mod in backends.items():
            fn, args = pick(mod)
            row += f"{time_call(fn, *args, seconds=seconds) * 1e6:>10.1f}us"
        print(row)
    for name, mod in backends.items():
        grads[name] = mod.evaluate_with_grad(X, y, weights, biases, 1, p_min, 0.0)[2]
    if len(grads) == 2:
        a, b = grads.values()
        print(f"max |grad difference| between backends: {np.max(np.abs(a - b)):.3e}")


def bench_chain(widths, n, steps, seconds_note=True):
    ds = data.make_synthetic(n, widths[0], separation=6.0, flip_rate=0.0, seed=1)
    arch = model.Architecture(widths)
    loss_cfg = model.LossConfig(kind="savage")
    stop = StopConfig(min_steps=10**9)
    print(f"\nSGLD chain, arch {widths}, n {n}, {steps} steps (active backend)")
    cfg = sampler.SamplerConfig(method="sgld", step=0.01, beta=1600.0, sigma=5.0,
                                max_steps=steps, seed=7)
    start = time.perf_counter()
    sampler.run_chain(ds, arch, loss_cfg, cfg, stop)
    elapsed = time.perf_counter() - start
    print(f"  {elapsed:.2f}s -> {steps / elapsed:,.0f} steps/s")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat-seconds", type=float, default=0.5)
    args = parser.parse_args()

    names = list(available_backends())
    print(f"available backends: {names}")
    if len(names) == 1:
        print("compiled backend not built; numbers below cover the fallback only")

    bench_kernels((20, 32, 1), 500, 30, args.repeat_seconds)
    bench_kernels((784, 200, 200, 1), 2000, 50, args.repeat_seconds)
    bench_chain((20, 32, 1), 500, 20000)


if __name__ == "__main__":
    main()
