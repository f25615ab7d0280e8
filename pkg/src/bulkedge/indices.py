"""Maslov index, unitary spectral flow and winding numbers of Lagrangian loops.

Sign conventions used throughout:

* eigenphases of unitaries count +1 when they cross the base point
  counter-clockwise (sgn of -i theta');
* the Maslov degree of a crossing is the signature of the crossing form
  b(x, y) = omega(x, P1' y) - omega(x, P2' y) on the intersection;
* edge spectral flow counts eigenvalues crossing E downwards as +1.

With these conventions Mas(l1, l2) equals the unitary spectral flow of
U2* U1 through 1, and I(l) = Winding(det U) = Mas(l, Dirichlet).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .errors import (IndexInconsistencyError, IntegerEmissionError,
                     NonRegularError, NotLagrangianError)
from .symplectic import (LagrangianFrame, dirichlet_plane, intersection_dimension,
                         plane_distance, plane_to_unitary, symplectic_J,
                         unitary_to_plane)
from .tolerances import DEFAULT_TOLERANCES

__all__ = [
    "PlaneLoop", "CrossingRecord", "IndexValue", "maslov_index",
    "unitary_spectral_flow", "winding_number", "loop_winding", "index_I",
    "crossing_form", "projector_derivative", "emit_integer", "FlowSettings",
    "ConsistencyReport", "verify_main_theorem", "verify_junction_theorem",
]

_DERIV_STEP = 1e-5


def emit_integer(raw, tol=DEFAULT_TOLERANCES, what="index"):
    """Round ``raw`` to an integer, refusing if it is not within tol.integer."""
    k = int(round(raw))
    res = abs(raw - k)
    if not res < tol.integer:
        raise IntegerEmissionError(
            f"{what} = {raw:.6f} is not within {tol.integer} of an integer")
    return k, res


@dataclass
class IndexValue:
    """An emitted integer with its pre-rounding value and supporting data."""

    value: int
    raw: float
    residual: float
    method: str
    crossings: list = field(default_factory=list)
    breakdown: dict = field(default_factory=dict)

    def __int__(self):
        return self.value

    def phase_trace(self):
        """(t, unwrapped arg det U) samples when available, else None."""
        if "phase_trace" in self.breakdown:
            return self.breakdown["phase_trace"]
        w = self.breakdown.get("winding")
        return w.phase_trace() if isinstance(w, IndexValue) else None

    def __eq__(self, other):
        return int(self) == int(other)

    def __hash__(self):
        return hash(self.value)

    def to_dict(self):
        out = {"value": self.value, "raw": self.raw, "residual": self.residual,
               "method": self.method}
        if self.crossings:
            out["crossings"] = [c.to_dict() for c in self.crossings]
        if self.breakdown:
            out["breakdown"] = {k: (v.to_dict() if hasattr(v, "to_dict") else v)
                                for k, v in self.breakdown.items()
                                if k != "phase_trace"}
        return out


class PlaneLoop:
    """A 1-periodic loop t -> LagrangianFrame, sampled adaptively.

    ``func`` is evaluated at t mod 1.  The sample grid is refined until
    consecutive planes are closer than ``max_step`` in projector distance.
    """

    def __init__(self, func, grid=32, max_step=None, min_spacing=1e-6,
                 tol=DEFAULT_TOLERANCES, name="loop", constant=False):
        self.func = func
        self.tol = tol
        self.name = name
        self.constant = constant
        self._cache = {}
        self.max_step = tol.loop_step if max_step is None else max_step
        self.min_spacing = min_spacing
        self.grid = grid
        self._samples = None

    def __call__(self, t):
        t = float(t) % 1.0
        if self.constant:
            t = 0.0
        if t not in self._cache:
            F = self.func(t)
            if not isinstance(F, LagrangianFrame):
                F = LagrangianFrame(F, tol=self.tol)
            self._cache[t] = F.orthonormalized()
        return self._cache[t]

    def unitary(self, t):
        return plane_to_unitary(self(t), self.tol)

    @classmethod
    def constant_loop(cls, frame, name="constant"):
        F = frame if isinstance(frame, LagrangianFrame) else LagrangianFrame(frame)
        return cls(lambda t: F, grid=1, name=name, constant=True)

    @classmethod
    def from_unitaries(cls, func, **kw):
        return cls(lambda t: unitary_to_plane(func(t)), **kw)

    def reversed(self):
        return PlaneLoop(lambda t: self.func((1.0 - t) % 1.0), self.grid,
                         self.max_step, self.min_spacing, self.tol,
                         self.name + "_reversed", self.constant)

    def concatenate(self, other):
        """Loop that runs through self on [0, 1/2) and other on [1/2, 1)."""
        def f(t):
            return self.func(2 * t) if t < 0.5 else other.func(2 * t - 1)
        return PlaneLoop(f, max(self.grid, other.grid), self.max_step,
                         self.min_spacing, self.tol,
                         f"{self.name}*{other.name}")

    @property
    def n(self):
        return self(0.0).n

    def periodicity_residual(self):
        return plane_distance(self.func(0.0), self.func(1.0 - 1e-12)) if not self.constant else 0.0

    def samples(self):
        """Adaptive sample grid on [0, 1) (t = 1 is identified with t = 0)."""
        if self._samples is None:
            if self.constant:
                self._samples = np.array([0.0])
                return self._samples
            res = self.periodicity_residual()
            if res > self.tol.loop * 1e3:
                raise NotLagrangianError(
                    f"loop '{self.name}' is not closed (distance {res:.2e})")
            ts = list(np.arange(self.grid) / self.grid) + [1.0]
            k = 0
            while k < len(ts) - 1:
                d = plane_distance(self(ts[k]), self(ts[k + 1]))
                if d >= self.max_step and ts[k + 1] - ts[k] > self.min_spacing:
                    ts.insert(k + 1, 0.5 * (ts[k] + ts[k + 1]))
                    continue
                k += 1
            self._samples = np.array(ts[:-1])
        return self._samples


def _unitary_callable(loop):
    if isinstance(loop, PlaneLoop):
        return loop.unitary, loop
    return loop, None


def _phases(U, base):
    w = np.linalg.eigvals(np.asarray(U, dtype=complex) / base)
    return np.angle(w)


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def _match_phases(a, b):
    """Minimal-total-displacement matching on the circle; returns signed moves."""
    d = _wrap(b[None, :] - a[:, None])
    r, c = linear_sum_assignment(np.abs(d))
    order = np.argsort(r)
    return c[order], d[r, c][order]


@dataclass
class _PhaseCrossing:
    t0: float
    t1: float
    phase0: float
    move: float

    @property
    def sign(self):
        return 1 if self.move > 0 else -1


def _track_phases(func, ts, base=1.0, max_move=np.pi / 4, min_spacing=1e-9):
    """Track eigenphases of a unitary loop through ``base``.

    Returns (net count, crossings, refined grid).  The loop is closed with
    the t = 0 sample so the count telescopes exactly.
    """
    ts = list(ts)
    vals = [_phases(func(t), base) for t in ts]
    ts.append(1.0)
    vals.append(vals[0])
    crossings = []
    k = 0
    while k < len(ts) - 1:
        a, b = vals[k], vals[k + 1]
        perm, move = _match_phases(a, b)
        if np.max(np.abs(move), initial=0.0) >= max_move:
            if ts[k + 1] - ts[k] > min_spacing:
                tm = 0.5 * (ts[k] + ts[k + 1])
                ts.insert(k + 1, tm)
                vals.insert(k + 1, _phases(func(tm), base))
                continue
            raise NonRegularError(
                f"eigenphase tracking failed near t = {ts[k]:.6f}")
        for i, j in enumerate(perm):
            # compare stored samples, not a + move, so counts telescope exactly
            start, end = a[i], b[j]
            if (start < 0) != (end < 0) and abs(start) < np.pi / 2:
                crossings.append(_PhaseCrossing(ts[k], ts[k + 1], start, move[i]))
        k += 1
    net = sum(c.sign for c in crossings)
    return net, crossings, np.array(ts[:-1])


def unitary_spectral_flow(loop, base=1.0, grid=64, return_details=False):
    """Net number of eigenphases of t -> U(t) crossing ``base`` counter-clockwise.

    ``loop`` is a callable returning unitaries or a PlaneLoop.

    Examples
    --------
    >>> unitary_spectral_flow(lambda t: np.array([[np.exp(2j * np.pi * t)]]))
    1
    """
    func, pl = _unitary_callable(loop)
    base = complex(base)
    if abs(abs(base) - 1.0) > 1e-12:
        raise ValueError("base must have unit modulus")
    ts = pl.samples() if pl is not None else np.arange(grid) / grid
    if pl is not None and pl.constant:
        ts = np.array([0.0])
    net, crossings, _ = _track_phases(func, ts, base)
    if return_details:
        return IndexValue(net, float(net), 0.0, "unitary_spectral_flow",
                          breakdown={"crossings": len(crossings)})
    return net


def winding_number(samples, tol=DEFAULT_TOLERANCES, return_details=False):
    """Winding number of a closed loop of nonzero complex samples.

    The loop is closed by joining the last sample to the first.  Consecutive
    samples must differ in argument by less than pi.
    """
    z = np.asarray(samples, dtype=complex).ravel()
    if z.size == 0:
        raise ValueError("no samples")
    if np.min(np.abs(z)) < 1e-12:
        raise IntegerEmissionError("sample within 1e-12 of zero; upstream corruption")
    zc = np.append(z, z[0])
    steps = np.angle(zc[1:] / zc[:-1])
    if np.max(np.abs(steps)) >= np.pi * (1 - 1e-9):
        raise IntegerEmissionError("argument jump of pi between samples; refine the grid")
    raw = float(steps.sum() / (2 * np.pi))
    k, res = emit_integer(raw, tol, "winding number")
    if return_details:
        return IndexValue(k, raw, res, "winding")
    return k


def loop_winding(func, grid=64, max_step=np.pi / 4, min_spacing=1e-9,
                 tol=DEFAULT_TOLERANCES, return_details=False):
    """Winding of t -> func(t) over [0, 1), refining until |d arg| < max_step.

    Refinement cannot detect aliasing, so ``grid`` must already resolve the
    loop: a winding of k needs grid > 4 k samples at the default max_step.
    """
    ts = list(np.arange(grid) / grid) + [1.0]
    vals = [complex(func(t)) for t in ts[:-1]]
    vals.append(vals[0])
    k = 0
    while k < len(ts) - 1:
        if abs(np.angle(vals[k + 1] / vals[k])) >= max_step and ts[k + 1] - ts[k] > min_spacing:
            tm = 0.5 * (ts[k] + ts[k + 1])
            ts.insert(k + 1, tm)
            vals.insert(k + 1, complex(func(tm)))
            continue
        k += 1
    out = winding_number(vals[:-1], tol, return_details=True)
    out.breakdown = {"samples": len(vals) - 1}
    if return_details:
        out.breakdown["phase_trace"] = (np.array(ts), np.unwrap(np.angle(vals)))
        return out
    return out.value


def projector_derivative(loop, t, delta=_DERIV_STEP, richardson=False):
    """Central-difference derivative of the orthogonal projector of a loop."""
    if isinstance(loop, PlaneLoop) and loop.constant:
        return np.zeros((2 * loop.n, 2 * loop.n), dtype=complex)

    def P(s):
        return loop(s).projector()

    D = (P(t + delta) - P(t - delta)) / (2 * delta)
    if richardson:
        D2 = (P(t + delta / 2) - P(t - delta / 2)) / delta
        D = (4 * D2 - D) / 3
    return D


def crossing_form(Z, dP1, dP2):
    """Matrix of b(x, y) = omega(x, P1' y) - omega(x, P2' y) on the columns of Z."""
    J = symplectic_J(Z.shape[0] // 2)
    B = Z.conj().T @ J @ (dP1 - dP2) @ Z
    return B


@dataclass
class CrossingRecord:
    """A crossing of two Lagrangian loops."""

    t: float
    basis: np.ndarray
    form: np.ndarray
    eigenvalues: np.ndarray
    signature: int
    regular: bool
    hermiticity: float

    @property
    def dimension(self):
        return self.basis.shape[1]

    def to_dict(self):
        return {"t": self.t, "dimension": self.dimension,
                "form_eigenvalues": [float(x) for x in self.eigenvalues],
                "signature": self.signature, "regular": self.regular,
                "hermiticity": self.hermiticity}


def _intersection_basis(U1, U2, phase_tol):
    """Orthonormal basis of the intersection of the planes of U1, U2.

    Vectors a with U1 a = U2 a give x = ((I + U1) a, i (I - U1) a).
    """
    W = U2.conj().T @ U1
    w, v = np.linalg.eig(W)
    sel = np.abs(np.angle(w)) < phase_tol
    A = v[:, sel]
    if A.shape[1] == 0:
        return np.zeros((2 * U1.shape[0], 0), dtype=complex)
    A, _ = np.linalg.qr(A)
    n = U1.shape[0]
    eye = np.eye(n)
    Z = np.vstack([(eye + U1) @ A, 1j * (eye - U1) @ A])
    Q, _ = np.linalg.qr(Z)
    return Q


def _locate(func, c, base=1.0):
    """Root of the tracked eigenphase inside [c.t0, c.t1]."""
    slope = c.move / (c.t1 - c.t0)

    def f(t):
        guess = c.phase0 + slope * (t - c.t0)
        ph = _phases(func(t), base)
        return float(ph[np.argmin(np.abs(_wrap(ph - guess)))])

    if c.phase0 == 0.0:
        return c.t0
    lo, hi = c.t0, c.t1
    flo = f(lo)
    if flo * f(hi) > 0:
        # tracked phase not resolved by nearest selection; plain bisection on
        # the phase closest to zero
        def f(t):
            ph = _phases(func(t), base)
            return float(ph[np.argmin(np.abs(ph))])
        flo = f(lo)
        if flo * f(hi) > 0:
            return 0.5 * (lo + hi)
    return brentq(f, lo, hi, xtol=1e-14, maxiter=200)


def _merged_grid(loop1, loop2, grid):
    parts = [np.arange(grid) / grid]
    for lp in (loop1, loop2):
        if not lp.constant:
            parts.append(lp.samples())
    return np.unique(np.concatenate(parts))


def maslov_index(loop1, loop2, tol=DEFAULT_TOLERANCES, grid=32, delta=_DERIV_STEP,
                 return_details=False):
    """Maslov index of a pair of Lagrangian loops via crossing forms.

    Crossings are located as zeros of the eigenphases of U2* U1; at each
    crossing the form b is assembled on an orthonormal basis of the
    intersection and its signature is added.

    Raises
    ------
    NonRegularError
        If some crossing form has an eigenvalue below the slope floor.
    IndexInconsistencyError
        If the signature count disagrees with the eigenphase count.
    """
    if loop1.n != loop2.n:
        raise ValueError("loops live in different spaces")

    def W(t):
        return loop2.unitary(t).conj().T @ loop1.unitary(t)

    ts = _merged_grid(loop1, loop2, grid)
    net, raw_crossings, _ = _track_phases(W, ts)
    # t = 1 is t = 0 on the circle; a crossing there must form one group
    times = sorted(0.0 if t > 1.0 - 1e-7 else t
                   for t in (_locate(W, c) % 1.0 for c in raw_crossings))
    groups = []
    for t in times:
        if groups and abs(t - groups[-1][-1]) < 1e-7:
            groups[-1].append(t)
        else:
            groups.append([t])
    records = []
    for g in groups:
        t = float(np.mean(g))
        U1, U2 = loop1.unitary(t), loop2.unitary(t)
        Z = _intersection_basis(U1, U2, phase_tol=max(1e-6, 1e-3 * tol.intersect))
        if Z.shape[1] != len(g):
            Z = _intersection_basis(U1, U2, phase_tol=1e-4)
        B = crossing_form(Z, projector_derivative(loop1, t, delta),
                          projector_derivative(loop2, t, delta))
        herm = float(np.linalg.norm(B - B.conj().T)) if B.size else 0.0
        mu = np.linalg.eigvalsh(0.5 * (B + B.conj().T)) if B.size else np.zeros(0)
        regular = bool(np.all(np.abs(mu) > tol.slope_floor)) and Z.shape[1] > 0
        sig = int(np.sum(np.sign(mu)))
        records.append(CrossingRecord(t, Z, B, mu, sig, regular, herm))
    bad = [r for r in records if not r.regular]
    if bad:
        raise NonRegularError(f"degenerate crossing form at t = {bad[0].t:.6f}")
    total = sum(r.signature for r in records)
    if total != net:
        raise IndexInconsistencyError(
            f"crossing-form signature sum {total} differs from eigenphase count {net}")
    if return_details:
        return IndexValue(total, float(total), 0.0, "maslov", records,
                          {"eigenphase_count": net})
    return total


def index_I(loop, tol=DEFAULT_TOLERANCES, return_details=False):
    """I(l) from three characterizations that must agree.

    winding of det U(t), Mas(l, Dirichlet) and the unitary spectral flow
    of U(t) through -1.
    """
    if loop.constant:
        wind = IndexValue(0, 0.0, 0.0, "winding")
    else:
        wind = loop_winding(lambda t: np.linalg.det(loop.unitary(t)), tol=tol,
                            return_details=True)
    dir_loop = PlaneLoop.constant_loop(dirichlet_plane(loop.n), "dirichlet")
    mas = maslov_index(loop, dir_loop, tol, return_details=True)
    usf = unitary_spectral_flow(loop, base=-1.0, return_details=True)
    values = {"winding": wind.value, "maslov_dirichlet": mas.value,
              "unitary_flow_minus_one": usf.value}
    if len(set(values.values())) != 1:
        raise IndexInconsistencyError(
            f"characterizations of I disagree for '{loop.name}': {values}")
    if return_details:
        return IndexValue(wind.value, wind.raw, wind.residual, "index_I",
                          mas.crossings, {"winding": wind, "maslov_dirichlet": mas,
                                          "unitary_flow_minus_one": usf})
    return wind.value


def kernel_dimension_at(loop1, loop2, t, tol=None):
    """intersection_dimension of the two loops at t."""
    return intersection_dimension(loop1(t), loop2(t), tol=tol)


# ---------------------------------------------------------------------------
# Bulk-edge consistency checks
# ---------------------------------------------------------------------------

@dataclass
class FlowSettings:
    """Discretization settings for edge and junction flows.

    ``L`` and ``N`` default to :func:`~bulkedge.edgeop.default_length` and
    :func:`~bulkedge.edgeop.default_points`.
    """

    L: float | None = None
    N: int | None = None
    window: float = 0.5
    t_grid: int = 64
    probe_grid: int = 16
    match_dt: float = 0.02
    form_rtol: float = 0.05

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class ConsistencyReport:
    """Integers from every characterization plus the per-crossing checks."""

    kind: str
    values: dict
    passed: bool
    checks: list
    flows: dict
    probes: dict
    settings: dict
    indices: dict = field(default_factory=dict)

    def failed_checks(self):
        return [c for c in self.checks if not c["passed"]]

    def to_dict(self):
        return {"kind": self.kind, "passed": self.passed, "values": self.values,
                "checks": self.checks,
                "flows": {k: v.to_dict() for k, v in self.flows.items()},
                "indices": {k: v.to_dict() for k, v in self.indices.items()},
                "probes": self.probes, "settings": self.settings}


def _require_gap(probe, sides, what):
    for side in sides:
        label = getattr(probe, side)
        if label != "in-gap":
            raise NonRegularError(
                f"E = {probe.E} is {label} on the {side} of {what} "
                f"(margin {getattr(probe, side + '_margin'):.2e})")


def _gram_on(Z, F0, G):
    c = np.linalg.lstsq(F0.frame, Z, rcond=None)[0]
    return c.conj().T @ G @ c


def _crossing_checks(flow, mas, loop1, loop2, gram_fn, settings, label):
    """Kernel-dimension and crossing-form checks at every crossing.

    Each localized finite-difference crossing is paired with the nearest
    Maslov crossing.  At the Maslov crossing the form b is evaluated on
    Cauchy data of L^2-normalized solutions, so its eigenvalues must equal
    -lambda' of the discretized branches.
    """
    checks = []
    fd = list(flow.crossings)
    used = set()
    for rec in mas.crossings:
        near = sorted(fd, key=lambda c: abs(c.t - rec.t))
        near = [c for c in near if abs(c.t - rec.t) < settings.match_dt
                and id(c) not in used][:rec.dimension]
        for c in near:
            used.add(id(c))
        dim = intersection_dimension(loop1(rec.t), loop2(rec.t))
        k_fd = max([c.multiplicity for c in near], default=0)
        k_fd = max(k_fd, len(near))
        checks.append({"name": f"{label}:kernel_dimension", "t": rec.t,
                       "fd_multiplicity": k_fd, "intersection_dimension": dim,
                       "passed": bool(k_fd == dim == rec.dimension)})
        if not near:
            continue
        Z = rec.basis
        Gz = gram_fn(rec.t, Z)
        slopes = np.sort([-c.slope for c in near])
        ok = False
        for richardson in (False, True):
            B = crossing_form(Z, projector_derivative(loop1, rec.t, richardson=richardson),
                              projector_derivative(loop2, rec.t, richardson=richardson))
            B = 0.5 * (B + B.conj().T)
            mu = np.sort(np.linalg.eigvals(np.linalg.solve(Gz, B)).real)
            if mu.size == slopes.size:
                err = np.abs(mu - slopes) / np.maximum(np.abs(slopes), 1e-300)
                ok = bool(np.all(err <= settings.form_rtol))
            else:
                err = np.array([np.inf])
            if ok:
                break
        checks.append({"name": f"{label}:crossing_form", "t": rec.t,
                       "form_eigenvalues": [float(x) for x in mu],
                       "minus_slopes": [float(x) for x in slopes],
                       "relative_error": float(np.max(err)),
                       "richardson": richardson, "passed": ok})
    for c in fd:
        if id(c) not in used:
            checks.append({"name": f"{label}:unpaired_fd_crossing", "t": c.t,
                           "passed": False})
    return checks


def verify_main_theorem(V, boundary_loop, E, settings=None, tol=DEFAULT_TOLERANCES):
    """Check Sf(edge) = Mas(l+, l#) = I(l+) - I(l#) for a boundary loop.

    Returns a :class:`ConsistencyReport`; ``passed`` is False when the
    integers disagree or a crossing check fails.

    Raises
    ------
    NonRegularError
        If E is not in a gap, or some index refuses regularity.
    """
    from .edgeop import (default_length, default_points, edge_family,
                         spectral_flow, track_branches)
    from .propagate import classify_energy, decaying_frame_and_gram, ell_plus

    settings = settings or FlowSettings()
    probe = classify_energy(V, E, settings.probe_grid, tol)
    _require_gap(probe, ["right"], "the bulk family")
    L = settings.L or default_length(V, E)
    N = settings.N or default_points(V, E, L)
    branches = track_branches(edge_family(V, boundary_loop, L, N, tol), E,
                              settings.window, settings.t_grid, tol)
    flow = spectral_flow(branches, E, tol)
    flow.provenance.update({"L": L, "N": N, "t_grid": settings.t_grid})
    lp = PlaneLoop(lambda t: ell_plus(V, t, E, tol=tol), tol=tol, name="ell_plus")
    mas = maslov_index(lp, boundary_loop, tol, return_details=True)
    i_plus = index_I(lp, tol, return_details=True)
    i_sharp = index_I(boundary_loop, tol, return_details=True)
    values = {"spectral_flow": flow.flow, "maslov": mas.value,
              "index_difference": i_plus.value - i_sharp.value}

    def gram(t, Z):
        F0, G = decaying_frame_and_gram(V, t, E, "right", tol=tol)
        return _gram_on(Z, F0, G)

    checks = [{"name": "integers_equal", "passed": len(set(values.values())) == 1,
               **values}]
    checks += _crossing_checks(flow, mas, lp, boundary_loop, gram, settings, "edge")
    passed = all(c["passed"] for c in checks)
    return ConsistencyReport(
        "edge", values, passed, checks, {"edge": flow}, {"bulk": probe.to_dict()},
        {**settings.to_dict(), "L": L, "N": N},
        {"maslov": mas, "I_plus": i_plus, "I_boundary": i_sharp})


def verify_junction_theorem(V_L, V_R, switches, E, settings=None,
                            tol=DEFAULT_TOLERANCES, control=True):
    """Check Sf(junction) = Mas(l+_R, l-_L) = I(l+_R) - I(l-_L) for every switch.

    ``switches`` maps names to switch functions.  Switches flagged ``sharp``
    (a jump at 0) realize the junction whose eigenfunctions have Cauchy data
    in l+_R cap l-_L, so the crossing checks are run for them.  With
    ``control`` the V_L = V_R junction must have zero flow and
    I(l+_R) = I(l-_R).
    """
    from .edgeop import (default_length, default_points, junction_family,
                         spectral_flow, track_branches)
    from .propagate import (classify_energy, decaying_frame_and_gram, ell_minus,
                            ell_plus)

    settings = settings or FlowSettings()
    probe_R = classify_energy(V_R, E, settings.probe_grid, tol)
    probe_L = classify_energy(V_L, E, settings.probe_grid, tol)
    _require_gap(probe_R, ["right"], "the right family")
    _require_gap(probe_L, ["left"], "the left family")
    if control:
        _require_gap(probe_R, ["left"], "the right family")
    L = settings.L or max(default_length(V_R, E), default_length(V_L, E))
    N = settings.N or max(default_points(V_R, E, L), default_points(V_L, E, L))

    lpR = PlaneLoop(lambda t: ell_plus(V_R, t, E, tol=tol), tol=tol, name="ell_plus_R")
    lmL = PlaneLoop(lambda t: ell_minus(V_L, t, E, tol=tol), tol=tol, name="ell_minus_L")
    mas = maslov_index(lpR, lmL, tol, return_details=True)
    iR = index_I(lpR, tol, return_details=True)
    iL = index_I(lmL, tol, return_details=True)

    def gram(t, Z):
        FR, GR = decaying_frame_and_gram(V_R, t, E, "right", tol=tol)
        FL, GL = decaying_frame_and_gram(V_L, t, E, "left", tol=tol)
        return _gram_on(Z, FR, GR) + _gram_on(Z, FL, GL)

    values = {"maslov": mas.value, "index_difference": iR.value - iL.value}
    flows = {}
    checks = []
    for name, chi in switches.items():
        br = track_branches(junction_family(V_L, V_R, chi, L, N, tol), E,
                            settings.window, settings.t_grid, tol)
        fl = spectral_flow(br, E, tol)
        fl.provenance.update({"L": L, "N": N, "switch": name})
        flows[name] = fl
        values[f"spectral_flow[{name}]"] = fl.flow
        if getattr(chi, "sharp", False):
            checks += _crossing_checks(fl, mas, lpR, lmL, gram, settings,
                                       f"junction[{name}]")
    checks.insert(0, {"name": "integers_equal",
                      "passed": len(set(values.values())) == 1, **values})
    indices = {"maslov": mas, "I_plus_R": iR, "I_minus_L": iL}
    if control:
        from .edgeop import step_switch
        br = track_branches(junction_family(V_R, V_R, step_switch, L, N, tol), E,
                            settings.window, settings.t_grid, tol)
        fl = spectral_flow(br, E, tol)
        fl.provenance.update({"L": L, "N": N, "switch": "control"})
        flows["control"] = fl
        lmR = PlaneLoop(lambda t: ell_minus(V_R, t, E, tol=tol), tol=tol,
                        name="ell_minus_R")
        iRm = index_I(lmR, tol, return_details=True)
        indices["I_minus_R"] = iRm
        checks.append({"name": "control_no_flow", "flow": fl.flow,
                       "I_plus_R": iR.value, "I_minus_R": iRm.value,
                       "passed": fl.flow == 0 and iR.value == iRm.value})
    passed = all(c["passed"] for c in checks)
    return ConsistencyReport(
        "junction", values, passed, checks, flows,
        {"right": probe_R.to_dict(), "left": probe_L.to_dict()},
        {**settings.to_dict(), "L": L, "N": N, "switches": list(switches)},
        indices)
