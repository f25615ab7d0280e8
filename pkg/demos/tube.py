"""Edge states of a sliding cosine tube.

V(x, y) = 2 cos(2 pi (x - t)) + cos(2 pi y) on a strip periodic in y.
Keeping the transverse Fourier modes |k| <= K turns the tube into 2K + 1
coupled Hill channels.  Dirichlet and Neumann walls at x = 0 give the same
edge flow, and every integer is required to be unchanged between K and
K + 1 before it is reported.

This takes a few minutes.  Run:  python3 demos/tube.py [K]
"""
import sys

from bulkedge.indices import FlowSettings
from bulkedge.tube import tube_cosine, tube_edge_flows

E = 9.8


def main():
    K = int(sys.argv[1]) if len(sys.argv) > 1 else 2
    rep = tube_edge_flows(tube_cosine(), E, K, settings=FlowSettings(L=60.0))
    for k, vals in rep.values.items():
        print(f"K = {k} ({2 * k + 1} channels): "
              + ", ".join(f"{b} {v:+d}" for b, v in vals.items()))
    print(f"stable in K: {rep.stable}; passed: {rep.passed} {rep.message}")


if __name__ == "__main__":
    main()
