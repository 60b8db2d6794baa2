"""Locate the stick/slip and seal/leak crossover in g by bisection.

Each probe is one run of the threshold sweep; the crossover is bracketed
to a relative width of 5 percent.

Usage: python scripts/threshold_crossover.py
"""

from dataclasses import replace

import numpy as np

from friction_flow.diagnostics import threshold_sweep
from friction_flow.stepper import RunConfig


def _case(kind):
    if kind == "SBCF":
        f = lambda t, x, y: (10.0 * (1 - y), 0 * x)
    else:
        f = lambda t, x, y: (0 * x, 10.0 * np.sin(2 * np.pi * x))
    return RunConfig(T_end=0.2, dt=0.02, nx=8, ny=8, epsilon=1e-3, bc_kind=kind, f=f, monitor=False)


def crossover(cfg, lo=1e-3, hi=1e3, rel=0.05):
    """Bracket [lo, hi] with a free state at lo and a stuck state at hi."""
    stuck = lambda g: threshold_sweep(cfg, [g])[0].state in ("stick", "seal")
    if stuck(lo) or not stuck(hi):
        raise RuntimeError("initial bracket does not contain the crossover")
    while hi / lo > 1 + rel:
        mid = np.sqrt(lo * hi)
        lo, hi = (lo, mid) if stuck(mid) else (mid, hi)
    return lo, hi


def main():
    for kind in ("SBCF", "LBCF"):
        for eps in (1e-2, 1e-3):
            lo, hi = crossover(replace(_case(kind), epsilon=eps))
            print(f"{kind} eps={eps:g}: crossover g in [{lo:.4g}, {hi:.4g}]")


if __name__ == "__main__":
    main()
