"""Elastic curve registration in square-root velocity space.

A trajectory beta is represented by q = sign(beta') * sqrt(|beta'|). Time
warps act on this representation by (q, gamma) -> (q o gamma) * sqrt(gamma'),
which is an isometry of the L2 metric, so the elastic (amplitude) distance
between two curves is the L2 distance after optimizing the warp. The warp
search is a dynamic program over monotone lattice paths with slope bounded
away from 0 and infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import (
    DegenerateInputError,
    DimensionError,
    InsufficientDataError,
    SrvfCurve,
    TimeGrid,
    Trajectory,
    Warping,
    inner_product,
    l2_norm,
)
from .preprocess import derivative

__all__ = [
    "RegistrationResult",
    "to_srvf",
    "from_srvf",
    "group_action",
    "optimal_warping",
    "alignment_cost",
    "amplitude_distance",
    "phase_distance",
    "cosine_distance",
    "phase_amplitude_separation",
    "align_to_reference",
]

DEFAULT_MAX_SLOPE = 7


@dataclass(frozen=True)
class RegistrationResult:
    """Elastic mean plus the per-curve warps and aligned signals."""

    mean: Trajectory
    warps: list[Warping]
    aligned: list[Trajectory]
    iterations: int
    converged: bool


def to_srvf(traj: Trajectory) -> SrvfCurve:
    """Square-root velocity transform q = sign(beta') sqrt(|beta'|).

    Points where the derivative vanishes map to q = 0.
    """
    d = derivative(traj).values
    return SrvfCurve(traj.grid, np.sign(d) * np.sqrt(np.abs(d)))


def from_srvf(q: SrvfCurve, beta0: float = 0.0) -> Trajectory:
    """Invert the SRVF map: beta(t) = beta0 + int_0^t q|q| ds."""
    integrand = q.q * np.abs(q.q)
    beta = beta0 + cumulative_trapezoid(integrand, dx=q.grid.spacing, initial=0.0)
    return Trajectory(q.grid, beta)


def _warp_rate(w: Warping) -> np.ndarray:
    # central differences; the one-sided endpoint stencils can go slightly
    # negative on piecewise-linear warps, so clamp at zero before sqrt.
    rate = np.gradient(w.gamma, w.grid.spacing, edge_order=2)
    return np.maximum(rate, 0.0)


def group_action(q: SrvfCurve, w: Warping) -> SrvfCurve:
    """Apply a warp to an SRVF: (q o gamma) * sqrt(gamma')."""
    if q.grid.n != w.grid.n:
        raise DimensionError("SRVF and warping live on different grids")
    warped = np.interp(w.gamma, q.grid.points, q.q)
    return SrvfCurve(q.grid, warped * np.sqrt(_warp_rate(w)))


def _edge_steps(max_slope: int) -> list[tuple[int, int]]:
    if max_slope < 1:
        raise DegenerateInputError(f"max_slope must be >= 1, got {max_slope}")
    return sorted(
        (a, b)
        for a in range(1, max_slope + 1)
        for b in range(1, max_slope + 1)
        if gcd(a, b) == 1
    )


def _edge_costs(q1: np.ndarray, q2: np.ndarray, n: int,
                edges: list[tuple[int, int]]) -> list[np.ndarray]:
    """Cost of every lattice edge, per step shape.

    The edge from node (i0, j0) to (i0+a, j0+b) carries the trapezoid-rule
    integral of (q1(t) - sqrt(b/a) * q2(gamma(t)))^2 over the a+1 grid points
    it spans, with gamma linear on the segment and q2 linearly interpolated.
    costs[e][i0, j0] holds that value for edge shape e.
    """
    h = 1.0 / (n - 1)
    idx = np.arange(n, dtype=float)
    costs = []
    for a, b in edges:
        if a >= n or b >= n:
            costs.append(None)
            continue
        sq = np.sqrt(b / a)
        rows = n - a
        cols = np.arange(n - b, dtype=float)
        c = np.zeros((rows, n - b))
        for k in range(a + 1):
            w = 0.5 if k in (0, a) else 1.0
            q2v = np.interp(cols + k * b / a, idx, q2)
            diff = q1[k:k + rows, None] - sq * q2v[None, :]
            c += w * diff * diff
        costs.append(c * h)
    return costs


def _dp_path(q1: np.ndarray, q2: np.ndarray, n: int,
             max_slope: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Minimum-cost monotone lattice path from (0,0) to (n-1,n-1).

    Steps are the coprime pairs (a, b) with 1 <= a, b <= max_slope, so path
    slopes stay within [1/max_slope, max_slope]. Ties prefer the diagonal
    step, which keeps the identity warp for self-alignment.
    """
    edges = _edge_steps(max_slope)
    costs = _edge_costs(q1, q2, n, edges)
    dist = np.full((n, n), np.inf)
    dist[0, 0] = 0.0
    pred = np.full((n, n), -1, dtype=np.int32)
    cand = np.empty((len(edges), n))
    for i in range(1, n):
        cand.fill(np.inf)
        for e, (a, b) in enumerate(edges):
            if a > i or costs[e] is None:
                continue
            cand[e, b:] = dist[i - a, : n - b] + costs[e][i - a, :]
        best = cand.argmin(axis=0)  # first minimum wins; (1,1) is edge 0
        dist[i] = cand[best, np.arange(n)]
        pred[i] = np.where(np.isfinite(dist[i]), best, -1)

    vi, vj = [n - 1], [n - 1]
    i, j = n - 1, n - 1
    while (i, j) != (0, 0):
        e = pred[i, j]
        if e < 0:
            raise DegenerateInputError("endpoint unreachable in warp search")
        a, b = edges[e]
        i, j = i - a, j - b
        vi.append(i)
        vj.append(j)
    return np.array(vi[::-1], float), np.array(vj[::-1], float), float(dist[n - 1, n - 1])


def _check_pair(q_ref: SrvfCurve, q_mov: SrvfCurve) -> int:
    if q_ref.grid.n != q_mov.grid.n:
        raise DimensionError(
            f"SRVF grids differ: {q_ref.grid.n} vs {q_mov.grid.n}"
        )
    return q_ref.grid.n


def optimal_warping(q_ref: SrvfCurve, q_mov: SrvfCurve,
                    max_slope: int = DEFAULT_MAX_SLOPE) -> Warping:
    """Warp that best aligns q_mov to q_ref under the elastic L2 cost."""
    n = _check_pair(q_ref, q_mov)
    vi, vj, _ = _dp_path(q_ref.q, q_mov.q, n, max_slope)
    gamma = np.interp(np.arange(n, dtype=float), vi, vj) / (n - 1)
    return Warping(q_ref.grid, gamma)


def alignment_cost(q_ref: SrvfCurve, q_mov: SrvfCurve,
                   max_slope: int = DEFAULT_MAX_SLOPE) -> float:
    """Objective value attained by the optimal lattice path (see _edge_costs)."""
    n = _check_pair(q_ref, q_mov)
    return _dp_path(q_ref.q, q_mov.q, n, max_slope)[2]


def amplitude_distance(b1: Trajectory, b2: Trajectory,
                       max_slope: int = DEFAULT_MAX_SLOPE) -> float:
    """Residual L2 distance between SRVFs after optimally warping b2 to b1."""
    q1, q2 = to_srvf(b1), to_srvf(b2)
    w = optimal_warping(q1, q2, max_slope)
    return l2_norm(q1.q - group_action(q2, w).q, b1.grid)


def phase_distance(w: Warping) -> float:
    """Arc length on the sphere between a warp and the identity.

    The identity warp has sqrt(gamma') identically 1, so the angle is
    arccos <1, sqrt(gamma')>.
    """
    ip = inner_product(np.ones(w.grid.n), np.sqrt(_warp_rate(w)), w.grid)
    return float(np.arccos(np.clip(ip, -1.0, 1.0)))


def _cosine_from_arrays(f: np.ndarray, g: np.ndarray, grid: TimeGrid) -> float:
    nf = l2_norm(f, grid)
    ng = l2_norm(g, grid)
    if nf < 1e-12 or ng < 1e-12:
        raise DegenerateInputError("cosine distance undefined for a zero signal")
    return 1.0 - inner_product(f, g, grid) / (nf * ng)


def cosine_distance(b1: Trajectory, b2: Trajectory) -> float:
    """1 - normalized inner product; meant for already-aligned signals."""
    if b1.grid.n != b2.grid.n:
        raise DimensionError("trajectories live on different grids")
    return _cosine_from_arrays(b1.values, b2.values, b1.grid)


def _compose_signal(traj: Trajectory, w: Warping) -> Trajectory:
    values = np.interp(w.gamma, traj.grid.points, traj.values)
    return Trajectory(traj.grid, values, traj.meta)


def _common_grid(curves: list[Trajectory]) -> TimeGrid:
    if not curves:
        raise InsufficientDataError("no curves given")
    n = curves[0].grid.n
    if any(c.grid.n != n for c in curves):
        raise DimensionError("curves live on different grids")
    return curves[0].grid


def _medoid(qs: list[SrvfCurve], grid: TimeGrid) -> int:
    m = len(qs)
    totals = np.zeros(m)
    for i in range(m):
        for j in range(i + 1, m):
            d = l2_norm(qs[i].q - qs[j].q, grid)
            totals[i] += d
            totals[j] += d
    return int(np.argmin(totals))


def phase_amplitude_separation(curves: list[Trajectory], max_iter: int = 20,
                               tol: float = 1e-4,
                               max_slope: int = DEFAULT_MAX_SLOPE) -> RegistrationResult:
    """Karcher mean in SRVF space with joint alignment.

    Starting from the medoid curve's SRVF, alternate (a) warping every curve
    onto the current mean and (b) replacing the mean by the average of the
    aligned SRVFs, until the summed squared residual stabilizes. Warps are
    then centered so their pointwise mean is the identity, with the mean
    re-warped to match.
    """
    grid = _common_grid(curves)
    qs = [to_srvf(c) for c in curves]
    beta0 = float(np.mean([c.values[0] for c in curves]))

    if len(curves) == 1:
        return RegistrationResult(
            mean=curves[0],
            warps=[Warping.identity(grid)],
            aligned=[curves[0]],
            iterations=0,
            converged=True,
        )

    qbar = qs[_medoid(qs, grid)].q
    warps: list[Warping] = []
    aligned_q: list[np.ndarray] = []
    energy_prev = None
    iterations = 0
    converged = False
    qbar_curve = SrvfCurve(grid, qbar)
    for iterations in range(1, max_iter + 1):
        warps = [optimal_warping(qbar_curve, qi, max_slope) for qi in qs]
        aligned_q = [group_action(qi, wi).q for qi, wi in zip(qs, warps)]
        qbar = np.mean(aligned_q, axis=0)
        qbar_curve = SrvfCurve(grid, qbar)
        energy = sum(l2_norm(a - qbar, grid) ** 2 for a in aligned_q)
        if energy < 1e-30:
            converged = True
            break
        if energy_prev is not None and abs(energy_prev - energy) <= tol * energy_prev:
            converged = True
            break
        energy_prev = energy

    # Center: compose every warp with the inverse of the pointwise mean warp,
    # which makes the mean of the returned warps the identity, and re-warp
    # the mean SRVF accordingly.
    mean_warp = Warping(grid, np.mean([w.gamma for w in warps], axis=0))
    inv = mean_warp.inverse()
    warps = [w.compose(inv) for w in warps]
    qbar_curve = group_action(qbar_curve, inv)

    mean = from_srvf(qbar_curve, beta0)
    aligned = [_compose_signal(c, w) for c, w in zip(curves, warps)]
    return RegistrationResult(mean, warps, aligned, iterations, converged)


def align_to_reference(curves: list[Trajectory], reference: Trajectory,
                       max_slope: int = DEFAULT_MAX_SLOPE) -> RegistrationResult:
    """Single-pass alignment of each curve to a fixed reference."""
    grid = _common_grid(curves)
    if reference.grid.n != grid.n:
        raise DimensionError("reference grid differs from curve grid")
    q_ref = to_srvf(reference)
    warps = [optimal_warping(q_ref, to_srvf(c), max_slope) for c in curves]
    aligned = [_compose_signal(c, w) for c, w in zip(curves, warps)]
    return RegistrationResult(reference, warps, aligned, iterations=1, converged=True)
