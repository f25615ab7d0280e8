"""Junction of a sliding crystal and a flat insulator.

On the left sits the constant potential 20, an insulator at E = 9.9; on the
right the sliding Mathieu crystal.  The junction flow equals the index
difference I(l+_R) - I(l-_L) whatever the shape of the interface: a sharp
step and a smooth switch give the same integer.  Replacing the insulator by
the crystal itself (no interface at all) gives no flow.

Run:  python3 demos/junction.py
"""
from bulkedge.edgeop import smooth_switch, step_switch
from bulkedge.indices import verify_junction_theorem
from bulkedge.potentials import dislocation, flat, mathieu

E = 9.9


def main():
    rep = verify_junction_theorem(flat(20.0), dislocation(mathieu(2.0)),
                                  {"step": step_switch, "smooth": smooth_switch(2.0)}, E)
    print(f"junction at E = {E}, L = {rep.settings['L']:.1f}, N = {rep.settings['N']}")
    for name, value in rep.values.items():
        print(f"  {name:24s} {value:+d}")
    print(f"  control (crystal on both sides): flow {rep.flows['control'].flow:+d}")
    for name, fl in rep.flows.items():
        for c in fl.crossings:
            print(f"  [{name}] crossing at t = {c.t:.5f}, slope {c.slope:.4f}")
    print("  all checks passed" if rep.passed else f"  FAILED: {rep.failed_checks()}")


if __name__ == "__main__":
    main()
