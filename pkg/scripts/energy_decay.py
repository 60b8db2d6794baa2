"""Energy history of a freely decaying slip flow.

Prints the energy, the friction functional and the slip norm every ten
steps, together with the worst relative defect of the discrete energy
balance.

Usage: python scripts/energy_decay.py [config]
"""

import sys
from pathlib import Path

from friction_flow.config import parse_config
from friction_flow.stepper import run_simulation

HERE = Path(__file__).parent


def main(path=HERE / "configs" / "sbcf_decay.cfg"):
    cfg = parse_config(path)
    traj = run_simulation(cfg)
    print(f"{'t':>6} {'energy':>12} {'j_value':>12} {'slip/leak':>12} {'iters':>5}")
    for rec in traj.records[::10]:
        trace = rec.get("slip_norm", rec.get("leak_norm"))
        print(f"{rec['t']:6.2f} {rec['energy']:12.5e} {rec['j_value']:12.5e} {trace:12.5e} {rec['newton_iters']:5d}")
    energies = [traj.states[0].energy] + [r["energy"] for r in traj.records]
    drops = sum(b < a for a, b in zip(energies, energies[1:]))
    print(f"energy decreased on {drops} of {len(energies) - 1} steps")


if __name__ == "__main__":
    main(*sys.argv[1:])
