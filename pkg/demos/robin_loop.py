"""Robin boundary loop on the free half-line.

The free operator -d^2/dx^2 on the half-line has no gap below zero, so at
E = -1 every eigenvalue near E comes from the boundary.  The Robin
condition sin(pi t) psi'(0) = cos(pi t) psi(0) supports one bound state
exp(-kappa x) exactly when cot(pi t) < 0, with energy -cot(pi t)^2.  Over
one turn of t this state is born at the bottom of the essential spectrum,
sweeps down to -infinity and returns from above, crossing E = -1 once at
t = 3/4.

The spectral flow of the discretized edge operators is compared with the
Maslov index of the decaying plane against the boundary loop and with the
difference of their winding indices.

Run:  python3 demos/robin_loop.py [--plot robin.dat]
"""
import argparse

import numpy as np

from bulkedge.cli import ResultBundle, emit
from bulkedge.indices import FlowSettings, PlaneLoop, verify_main_theorem
from bulkedge.potentials import flat
from bulkedge.symplectic import robin_plane


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plot", help="write branches and phase traces as plot data")
    args = ap.parse_args()

    loop = PlaneLoop(lambda t: robin_plane(np.sin(np.pi * t) * np.eye(1),
                                           np.cos(np.pi * t) * np.eye(1)),
                     name="robin_loop")
    rep = verify_main_theorem(flat(0.0), loop, -1.0, FlowSettings(L=20.0, N=2000))

    print("Robin loop, V = 0, E = -1")
    for name, value in rep.values.items():
        print(f"  {name:18s} {value:+d}")
    (c,) = rep.flows["edge"].crossings
    print(f"  crossing at t = {c.t:.6f} (exact 0.75), slope {c.slope:.4f} "
          f"(exact {-4 * np.pi:.4f})")
    print(f"  I(boundary loop) = {rep.indices['I_boundary'].value:+d}: "
          "det U(t) winds once clockwise")
    print("  all checks passed" if rep.passed else f"  FAILED: {rep.failed_checks()}")

    if args.plot:
        b = ResultBundle("verify", "edge", rep.passed)
        b.add_flow("robin", rep.flows["edge"])
        b.add_index("I_boundary", rep.indices["I_boundary"])
        emit(b, "plotdata", args.plot)
        print(f"  plot data written to {args.plot}")


if __name__ == "__main__":
    main()
