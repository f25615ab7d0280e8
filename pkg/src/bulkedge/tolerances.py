"""Numerical tolerances shared by every module.

All thresholds live in one frozen dataclass so that a run can be reproduced
from its recorded tolerances alone.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

__all__ = ["Tolerances", "DEFAULT_TOLERANCES"]


@dataclass(frozen=True)
class Tolerances:
    iso: float = 1e-8          # isotropy residual ||F* J F||
    uni: float = 1e-8          # unitarity residual ||U* U - I||
    rank: float = 1e-10        # smallest admissible singular value of a frame
    intersect: float = 1e-6    # eigenphase distance to 1 counted as an intersection
    symp: float = 1e-8         # ||T* J T - J|| for transfer matrices
    circle: float = 1e-6       # |log|lambda|| below this is on the unit circle
    circle_guard: float = 10.0  # undecided band is [circle, circle * circle_guard)
    herm: float = 1e-10        # hermiticity residual (relative to the matrix norm)
    loop: float = 1e-6         # periodicity residual of a plane loop
    slope_floor: float = 1e-6  # crossing slopes below floor * scale are degenerate
    integer: float = 0.1       # max distance to an integer before rounding
    loop_step: float = 0.2     # max plane distance between consecutive loop samples

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **overrides) -> "Tolerances":
        names = {f.name for f in fields(self)}
        unknown = set(overrides) - names
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **overrides)


DEFAULT_TOLERANCES = Tolerances()
