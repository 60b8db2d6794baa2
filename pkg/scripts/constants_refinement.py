"""Discrete Korn and trace constants under mesh refinement.

Usage: python scripts/constants_refinement.py
"""

from friction_flow.constants import estimate_constants
from friction_flow.forms import assemble_forms
from friction_flow.mesh import build_rectangle_mesh
from friction_flow.spaces import build_mixed_space


def main(sizes=(4, 8, 16, 24)):
    print(f"{'n':>3} {'alpha_h':>10} {'gamma1_h':>10} {'budget':>10}")
    for n in sizes:
        forms = assemble_forms(build_mixed_space(build_rectangle_mesh(1.0, 1.0, n, n)), 1.0)
        est = estimate_constants(forms, n_samples=200, seed=0)
        print(f"{n:3d} {est.alpha_h:10.5f} {est.gamma1_h:10.5f} {est.leak_budget:10.5f}")


if __name__ == "__main__":
    main()
