"""Cauchy propagation for -psi'' + V psi = E psi and the planes of decaying data.

The second-order system is written as Psi' = A(x) Psi with
Psi = (psi, psi') and A = [[0, I], [V - E, 0]].  Transfer matrices come from
a fourth-order Magnus integrator (two Gauss nodes per step) and are exactly
complex-symplectic up to roundoff.

Long intervals are cut into segments whose growth stays bounded, so that
every stored transfer matrix is well conditioned.  Products over a full
period (monodromies) are only used through their segment factors: the
Floquet multipliers and the stable subspace are read off the block-cyclic
matrix built from those factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.integrate import simpson

from .errors import EnergyClassificationError, SymplecticityError
from .symplectic import LagrangianFrame, intersection_dimension, symplectic_J
from .tolerances import DEFAULT_TOLERANCES

__all__ = [
    "TransferMatrix", "EnergyProbe", "transfer_matrix", "monodromy",
    "floquet_log_moduli", "classify_energy", "ell_plus", "ell_minus",
    "bulk_kernel_dimension", "decaying_frame_and_gram", "symplectic_inverse",
    "STEPS_PER_PERIOD", "symplectic_audit",
]

STEPS_PER_PERIOD = 64
_GAUSS = math.sqrt(3.0) / 6.0
_MAX_SEGMENT_GROWTH = 2.0

# largest ||T* J T - J|| seen over every propagator built in this process
_AUDIT = {"max": 0.0, "count": 0}


def symplectic_audit(reset=False):
    """Worst symplecticity residual over all propagators built so far.

    Returns a dict with keys ``max`` and ``count``.  Per-step propagators
    are measured in the Frobenius norm, an upper bound for the 2-norm.
    """
    out = dict(_AUDIT)
    if reset:
        _AUDIT.update(max=0.0, count=0)
    return out


def _record(res, count=1):
    _AUDIT["max"] = max(_AUDIT["max"], float(res))
    _AUDIT["count"] += int(count)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Propagator of the first-order system from ``a`` to ``b`` at energy E.

    ``factors`` lists well-conditioned segment propagators in the order they
    act; ``T`` is their product.
    """

    T: np.ndarray
    a: float
    b: float
    E: float
    t: float
    factors: tuple = field(default=())

    @property
    def n(self):
        return self.T.shape[0] // 2

    def symplectic_residual(self):
        return symplectic_residual(self.T)

    def factor_residual(self):
        """Largest ||F* J F - J|| over the stored factors."""
        if not self.factors:
            return self.symplectic_residual()
        return max(symplectic_residual(F) for F in self.factors)


def symplectic_residual(T):
    J = symplectic_J(T.shape[0] // 2)
    return float(np.linalg.norm(T.conj().T @ J @ T - J, 2))


def symplectic_inverse(T):
    """Inverse of a complex-symplectic matrix, -J T* J."""
    J = symplectic_J(T.shape[0] // 2)
    return -J @ T.conj().T @ J


def _chain_product(mats):
    """Ordered product mats[-1] @ ... @ mats[0] by pairwise reduction."""
    mats = np.asarray(mats)
    while mats.shape[0] > 1:
        odd = mats.shape[0] % 2
        head = mats[: mats.shape[0] - odd]
        prod = head[1::2] @ head[0::2]
        mats = np.concatenate([prod, mats[-1:]]) if odd else prod
    return mats[0]


def _magnus_steps(V, t, E, a, b, steps):
    """Stack of per-step propagators exp(Omega_k), shape (steps, 2n, 2n)."""
    n = V.n
    h = (b - a) / steps
    x0 = a + h * np.arange(steps)
    xs = np.concatenate([x0 + (0.5 - _GAUSS) * h, x0 + (0.5 + _GAUSS) * h])
    W = V(t, xs).astype(complex) - E * np.eye(n)
    W1, W2 = W[:steps], W[steps:]
    c = math.sqrt(3.0) / 12.0 * h * h
    Om = np.zeros((steps, 2 * n, 2 * n), dtype=complex)
    Om[:, :n, :n] = c * (W1 - W2)
    Om[:, :n, n:] = h * np.eye(n)
    Om[:, n:, :n] = 0.5 * h * (W1 + W2)
    Om[:, n:, n:] = c * (W2 - W1)
    P = la.expm(Om)
    J = symplectic_J(n)
    R = np.conj(np.swapaxes(P, 1, 2)) @ J @ P - J
    _record(np.sqrt(np.max(np.sum(np.abs(R) ** 2, axis=(1, 2)))), steps)
    return P


def _period(V):
    return min(V.left_period, V.right_period)


def _steps_for(V, a, b, steps_per_period):
    k = int(math.ceil(steps_per_period * (b - a) / _period(V) - 1e-9))
    k = max(k, 2)
    return k + (k % 2)


def _growth_rate(V, t, E, a, b, samples=33):
    xs = np.linspace(a, b, samples)
    w = np.linalg.eigvalsh(V(t, xs) - E * np.eye(V.n))
    return math.sqrt(max(0.0, float(w.max())))


def transfer_matrix(V, t, E, a, b, steps=None, tol=DEFAULT_TOLERANCES,
                    check=True, max_doublings=4):
    """Magnus propagator of Psi' = [[0, I], [V(t, x) - E, 0]] Psi from a to b.

    ``steps`` defaults to 64 per period of ``V``.  The step count is doubled
    until ||T* J T - J|| <= tol.symp.

    Raises
    ------
    SymplecticityError
        If the residual is still too large after ``max_doublings`` doublings.
    """
    if not b > a:
        raise ValueError("transfer_matrix needs a < b")
    steps = _steps_for(V, a, b, STEPS_PER_PERIOD) if steps is None else int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    for _ in range(max_doublings + 1):
        T = _chain_product(_magnus_steps(V, t, E, a, b, steps))
        res = symplectic_residual(T)
        _record(res)
        if not check or res <= tol.symp:
            return TransferMatrix(T, a, b, E, t, (T,))
        steps *= 2
    raise SymplecticityError(
        f"symplecticity residual {res:.2e} > {tol.symp:.0e} on [{a}, {b}]")


def segment_factors(V, t, E, a, b, steps_per_period=STEPS_PER_PERIOD,
                    tol=DEFAULT_TOLERANCES):
    """Split [a, b] into segments of bounded growth and propagate each."""
    rate = _growth_rate(V, t, E, a, b)
    m = max(1, int(math.ceil(rate * (b - a) / _MAX_SEGMENT_GROWTH)))
    edges = np.linspace(a, b, m + 1)
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        steps = _steps_for(V, lo, hi, steps_per_period)
        out.append(transfer_matrix(V, t, E, lo, hi, steps=steps, tol=tol))
    return out


def monodromy(V, t, E, side="right", steps_per_period=STEPS_PER_PERIOD,
              tol=DEFAULT_TOLERANCES):
    """Transfer matrix over one asymptotic period.

    The right cell is [x_match, x_match + p_R], the left cell is
    [-x_match - p_L, -x_match].
    """
    if side == "right":
        a, b = V.x_match, V.x_match + V.right_period
    elif side == "left":
        a, b = -V.x_match - V.left_period, -V.x_match
    else:
        raise ValueError("side must be 'left' or 'right'")
    segs = segment_factors(V, t, E, a, b, steps_per_period, tol)
    factors = tuple(s.T for s in segs)
    T = _chain_product(list(factors)) if len(factors) > 1 else factors[0]
    return TransferMatrix(T, a, b, E, t, factors)


def _block_cyclic(factors):
    m = len(factors)
    k = factors[0].shape[0]
    C = np.zeros((m * k, m * k), dtype=complex)
    for i, F in enumerate(factors):
        j = (i + 1) % m
        C[j * k:(j + 1) * k, i * k:(i + 1) * k] = F
    return C


def floquet_log_moduli(mono):
    """log|lambda| for the 2n Floquet multipliers, sorted ascending.

    Read off the block-cyclic matrix of the segment factors, whose
    eigenvalues are the m-th roots of the multipliers.
    """
    factors = mono.factors or (mono.T,)
    m = len(factors)
    if m == 1:
        return np.sort(np.log(np.abs(np.linalg.eigvals(factors[0]))))
    mu = np.linalg.eigvals(_block_cyclic(factors))
    logs = np.sort(m * np.log(np.abs(mu)))
    # each multiplier appears m times
    return logs.reshape(-1, m).mean(axis=1)


def _invariant_frame(mono, stable=True):
    """Orthonormal frame of the stable (|lambda| < 1) or unstable subspace at
    the start of the cell."""
    factors = mono.factors or (mono.T,)
    m = len(factors)
    k = factors[0].shape[0]
    n = k // 2
    C = _block_cyclic(factors) if m > 1 else factors[0]
    if stable:
        _, Z, sdim = la.schur(C, output="complex", sort=lambda z: abs(z) < 1.0)
    else:
        _, Z, sdim = la.schur(C, output="complex", sort=lambda z: abs(z) > 1.0)
    if sdim != n * m:
        raise EnergyClassificationError(
            f"{'stable' if stable else 'unstable'} subspace has dimension "
            f"{sdim // m}, expected {n}; energy is not in a gap")
    block = Z[:k, :sdim]
    U, s, _ = la.svd(block, full_matrices=False)
    if s.size > n and s[n - 1] < 1e3 * s[n]:
        raise EnergyClassificationError("could not separate the invariant subspace")
    return U[:, :n]


def _refine_invariant(Q, factors, stable, sweeps):
    """Orthogonal iteration with the (inverse) monodromy applied factor by factor."""
    for _ in range(sweeps):
        if stable:
            for F in reversed(factors):
                Q, _ = np.linalg.qr(symplectic_inverse(F) @ Q)
        else:
            for F in factors:
                Q, _ = np.linalg.qr(F @ Q)
    return Q


@dataclass(frozen=True)
class EnergyProbe:
    """Gap classification of an energy for a family, per side."""

    E: float
    left: str
    right: str
    margin: float
    left_margin: float
    right_margin: float
    worst_t: float

    @property
    def in_gap(self):
        return self.left == "in-gap" and self.right == "in-gap"

    def to_dict(self):
        return {"E": self.E, "left": self.left, "right": self.right,
                "margin": self.margin, "left_margin": self.left_margin,
                "right_margin": self.right_margin, "worst_t": self.worst_t}


def _classify(margin, tol):
    if margin < tol.circle:
        return "essential-spectrum"
    if margin < tol.circle * tol.circle_guard:
        return "undecided"
    return "in-gap"


def classify_energy(V, E, t_grid=16, tol=DEFAULT_TOLERANCES,
                    steps_per_period=STEPS_PER_PERIOD):
    """Decide whether E lies in a spectral gap of every h_t on both sides.

    ``t_grid`` is an iterable of t values or a sample count.  The margin is
    the smallest |log|lambda|| over all sampled multipliers.
    """
    ts = (np.arange(t_grid) / t_grid if np.isscalar(t_grid)
          else np.asarray(list(t_grid), dtype=float))
    if ts.size == 0:
        raise ValueError("t_grid is empty")
    margins = {"left": np.inf, "right": np.inf}
    worst_t = float(ts[0])
    for t in ts:
        for side in ("left", "right"):
            mono = monodromy(V, t, E, side, steps_per_period, tol)
            mg = float(np.min(np.abs(floquet_log_moduli(mono))))
            if mg < margins[side]:
                margins[side] = mg
                if mg <= min(margins.values()):
                    worst_t = float(t)
    margin = min(margins.values())
    return EnergyProbe(float(E), _classify(margins["left"], tol),
                       _classify(margins["right"], tol), margin,
                       margins["left"], margins["right"], worst_t)


def _qr_path(Q, mats):
    """Apply mats in order with a QR pass after each; return frames and the
    accumulated triangular factors (Psi_k = F_k K_k)."""
    n = Q.shape[1]
    frames = [Q]
    Ks = [np.eye(n, dtype=complex)]
    K = Ks[0]
    for M in mats:
        Q, R = np.linalg.qr(M @ Q)
        K = R @ K
        frames.append(Q)
        Ks.append(K)
    return frames, Ks


def _right_data(V, t, E, steps_per_period, tol, refine_sweeps):
    mono = monodromy(V, t, E, "right", steps_per_period, tol)
    Q = _invariant_frame(mono, stable=True)
    Q = _refine_invariant(Q, mono.factors, True, refine_sweeps)
    return mono, Q


def _left_data(V, t, E, steps_per_period, tol, refine_sweeps):
    mono = monodromy(V, t, E, "left", steps_per_period, tol)
    Q = _invariant_frame(mono, stable=False)
    Q = _refine_invariant(Q, mono.factors, False, refine_sweeps)
    return mono, Q


def ell_plus(V, t, E, steps_per_period=STEPS_PER_PERIOD, tol=DEFAULT_TOLERANCES,
             refine_sweeps=2):
    """Plane at x = 0 of Cauchy data of solutions decaying at +infinity.

    The stable Floquet subspace of the right monodromy (ordered Schur form)
    is carried back from x_match to 0 with a QR pass after every step.
    """
    _, Q = _right_data(V, t, E, steps_per_period, tol, refine_sweeps)
    X = V.x_match
    if X > 0:
        steps = _steps_for(V, 0.0, X, steps_per_period)
        mats = _magnus_steps(V, t, E, 0.0, X, steps)
        inv = [symplectic_inverse(M) for M in mats[::-1]]
        frames, _ = _qr_path(Q, inv)
        Q = frames[-1]
    return LagrangianFrame(Q, tol=tol)


def ell_minus(V, t, E, steps_per_period=STEPS_PER_PERIOD, tol=DEFAULT_TOLERANCES,
              refine_sweeps=2):
    """Plane at x = 0 of Cauchy data of solutions decaying at -infinity."""
    _, Q = _left_data(V, t, E, steps_per_period, tol, refine_sweeps)
    X = V.x_match
    if X > 0:
        steps = _steps_for(V, -X, 0.0, steps_per_period)
        mats = _magnus_steps(V, t, E, -X, 0.0, steps)
        frames, _ = _qr_path(Q, mats)
        Q = frames[-1]
    return LagrangianFrame(Q, tol=tol)


def bulk_kernel_dimension(V, t, E, tol=None, tolerances=DEFAULT_TOLERANCES,
                          steps_per_period=STEPS_PER_PERIOD):
    """dim Ker(h_t - E) on the whole line, as dim(ell_plus cap ell_minus)."""
    lp = ell_plus(V, t, E, steps_per_period, tolerances)
    lm = ell_minus(V, t, E, steps_per_period, tolerances)
    return intersection_dimension(lp, lm, tol=tol, tolerances=tolerances)


def _cell_gram(V, t, E, Q, a, b, steps_per_period, forward=True):
    """Gram matrix over one cell of the solutions with data Q d at the cell
    entry, plus the n x n matrix R with (cell exit data) = Q R d.

    For ``forward`` the cell is [a, b] entered at a; otherwise it is entered
    at b and traversed towards a.
    """
    n = Q.shape[1]
    steps = _steps_for(V, a, b, steps_per_period)
    mats = _magnus_steps(V, t, E, a, b, steps)
    if not forward:
        mats = [symplectic_inverse(M) for M in mats[::-1]]
    frames, Ks = _qr_path(Q, mats)
    vals = np.array([F[:n] @ K for F, K in zip(frames, Ks)])
    dens = np.einsum("kia,kib->kab", vals.conj(), vals)
    xs = np.linspace(0.0, b - a, steps + 1)
    G = simpson(dens, x=xs, axis=0)
    R = Q.conj().T @ frames[-1] @ Ks[-1]
    return 0.5 * (G + G.conj().T), R


def decaying_frame_and_gram(V, t, E, side="right", steps_per_period=STEPS_PER_PERIOD,
                            tol=DEFAULT_TOLERANCES, refine_sweeps=2):
    """Frame F0 of ell_+ (side='right') or ell_- (side='left') at x = 0 and the
    L^2 Gram matrix G such that the decaying solution with Cauchy data F0 c
    has squared norm c* G c on the corresponding half-line.
    """
    n = V.n
    X = V.x_match
    if side == "right":
        mono, Q = _right_data(V, t, E, steps_per_period, tol, refine_sweeps)
        a, b = mono.a, mono.b
        G_cell, R = _cell_gram(V, t, E, Q, a, b, steps_per_period, forward=True)
    else:
        mono, Q = _left_data(V, t, E, steps_per_period, tol, refine_sweeps)
        a, b = mono.a, mono.b
        G_cell, R = _cell_gram(V, t, E, Q, a, b, steps_per_period, forward=False)
    # tail: sum_m (R^m)* G_cell R^m
    G_tail = la.solve_discrete_lyapunov(R.conj().T, G_cell)
    if X > 0:
        if side == "right":
            steps = _steps_for(V, 0.0, X, steps_per_period)
            mats = _magnus_steps(V, t, E, 0.0, X, steps)
            path = [symplectic_inverse(M) for M in mats[::-1]]
        else:
            steps = _steps_for(V, -X, 0.0, steps_per_period)
            path = list(_magnus_steps(V, t, E, -X, 0.0, steps))
        frames, Ks = _qr_path(Q, path)
        vals = np.array([F[:n] @ K for F, K in zip(frames, Ks)])
        dens = np.einsum("kia,kib->kab", vals.conj(), vals)
        G_inner = simpson(dens, x=np.linspace(0.0, X, steps + 1), axis=0)
        F0, K0 = frames[-1], Ks[-1]
    else:
        G_inner = np.zeros((n, n), dtype=complex)
        F0, K0 = Q, np.eye(n, dtype=complex)
    K0inv = np.linalg.inv(K0)
    G = K0inv.conj().T @ (G_inner + G_tail) @ K0inv
    return LagrangianFrame(F0, tol=tol), 0.5 * (G + G.conj().T)
