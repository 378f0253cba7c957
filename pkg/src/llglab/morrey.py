"""Ball-based norm estimators on the torus.

The spatial norm of a field f is the supremum over lattice balls of

    (r**(q - n) * sum_{x in B_r(c)} |f(x)|**p * h**n) ** (1/p)

with wrapped Euclidean distance and closed balls.  Radii are dyadic
multiples of the grid spacing capped at half the box length (a torus ball of
larger radius is not a ball), and centers run over a strided sub-lattice.

Space-time variants measure trajectories: the parabolic norm integrates
|f|^2 over cylinders B_r(x) x [t - r^2, t], and the trajectory norms take
time-weighted suprema of the spatial norms (components r1, r2, r3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .fields import Grid, Trajectory, gradient, pointwise_magnitude

__all__ = [
    "BallLattice",
    "ball_lattice",
    "MorreyReport",
    "morrey_norm",
    "recompute_witness",
    "ParabolicCylinder",
    "parabolic_morrey_norm",
    "XptReport",
    "xpt_norm",
    "ypt_norm",
]


@dataclass(frozen=True)
class BallLattice:
    """Centers (integer index tuples) and dyadic radii defining the search set."""

    centers: tuple
    radii: tuple
    stride: int = 1

    def __post_init__(self):
        if len(self.radii) == 0:
            raise ValueError("lattice must carry at least one radius")
        for a, b in zip(self.radii, self.radii[1:]):
            if not b == 2.0 * a:
                raise ValueError("radii must be strictly doubling")

    @property
    def n_centers(self) -> int:
        return len(self.centers)


def ball_lattice(grid: Grid, stride: int | None = None, r_max: float | None = None) -> BallLattice:
    """Default search lattice: stride 2 for N >= 64 (cost control), else 1."""
    if stride is None:
        stride = 2 if grid.n >= 64 else 1
    if stride < 1:
        raise ValueError("stride must be >= 1")
    cap = grid.length / 2.0
    if r_max is not None:
        cap = min(cap, float(r_max))
    radii = []
    r = grid.h
    while r <= cap * (1.0 + 1e-12):
        radii.append(r)
        r = 2.0 * r
    if not radii:
        raise ValueError("no admissible radius <= L/2; increase r_max")
    centers = tuple(product(range(0, grid.n, stride), repeat=grid.dim))
    return BallLattice(centers=centers, radii=tuple(radii), stride=stride)


@lru_cache(maxsize=16)
def _offset_dist2(grid: Grid) -> np.ndarray:
    """Squared wrapped distance from the origin, as a grid-shaped table."""
    j = np.arange(grid.n)
    d = np.minimum(j, grid.n - j) * grid.h
    out = np.zeros(grid.shape)
    for ax in range(grid.dim):
        out = out + grid.axis_table(ax, d) ** 2
    return out


@dataclass(frozen=True)
class MorreyReport:
    """Norm value plus the maximizing (center, radius) witness."""

    value: float
    p: float
    q: float
    witness_center: tuple
    witness_radius: float
    lattice: BallLattice

    def csv_header(self, dim: int) -> str:
        coords = ",".join(f"witness_c{ax}" for ax in "xyz"[:dim])
        return f"p,q,value,{coords},witness_r"

    def csv_row(self, grid: Grid) -> str:
        coords = ",".join(repr(c * grid.h) for c in self.witness_center)
        return f"{self.p!r},{self.q!r},{self.value!r},{coords},{self.witness_radius!r}"


def _validate_pq(grid: Grid, p: float, q: float) -> None:
    if not (1.0 <= p < np.inf):
        raise ValueError(f"p must satisfy 1 <= p < inf, got {p}")
    # q <= n is the natural whole-space restriction; q = 2 is additionally
    # admitted in one dimension because torus radii are capped, which keeps
    # the q > n weight finite (the solution-space norms fix q = 2).
    if not (0.0 <= q <= max(2.0, float(grid.dim))):
        raise ValueError(f"q must lie in [0, max(2, n)], got {q}")


def morrey_norm(grid: Grid, values: np.ndarray, p: float, q: float,
                lattice: BallLattice | None = None) -> MorreyReport:
    """Maximum over lattice balls of the r^(q-n)-weighted p-mass of |values|."""
    _validate_pq(grid, p, q)
    if lattice is None:
        lattice = ball_lattice(grid)
    if lattice.n_centers == 0:
        raise ValueError("empty lattice")
    if any(max(c) >= grid.n for c in lattice.centers):
        raise ValueError("lattice centers fall outside the grid")
    magp = pointwise_magnitude(grid, values) ** p
    d2 = _offset_dist2(grid)
    hn = grid.h ** grid.dim
    ndim = grid.dim
    best_val = -1.0
    best_center = lattice.centers[0]
    best_radius = lattice.radii[0]
    ax_all = tuple(range(ndim))
    for center in lattice.centers:
        rolled = np.roll(d2, shift=center, axis=ax_all)
        for r in lattice.radii:
            s = magp[rolled <= r * r].sum()
            val = (r ** (q - ndim) * (s * hn)) ** (1.0 / p)
            if val > best_val:
                best_val = val
                best_center = center
                best_radius = r
    return MorreyReport(
        value=float(best_val),
        p=float(p),
        q=float(q),
        witness_center=tuple(best_center),
        witness_radius=float(best_radius),
        lattice=lattice,
    )


def recompute_witness(grid: Grid, values: np.ndarray, report: MorreyReport) -> float:
    """Re-evaluate the norm candidate at the stored witness (center, radius)."""
    magp = pointwise_magnitude(grid, values) ** report.p
    rolled = np.roll(_offset_dist2(grid), shift=report.witness_center,
                     axis=tuple(range(grid.dim)))
    r = report.witness_radius
    s = magp[rolled <= r * r].sum()
    hn = grid.h ** grid.dim
    return float((r ** (report.q - grid.dim) * (s * hn)) ** (1.0 / report.p))


# ---------------------------------------------------------------------------
# parabolic cylinders


@dataclass(frozen=True)
class ParabolicCylinder:
    """B_r0(center) x [t0 - r0^2, t0]; center is an integer grid index tuple."""

    center: tuple
    t0: float
    r0: float


def _interp_integral(times: np.ndarray, series: np.ndarray, t_lo: float, t_hi: float) -> float:
    """Integral over [t_lo, t_hi] of the linear interpolant through the samples."""
    if t_hi <= t_lo:
        return 0.0
    inner = times[(times > t_lo) & (times < t_hi)]
    nodes = np.concatenate(([t_lo], inner, [t_hi]))
    vals = np.interp(nodes, times, series)
    return float(np.trapezoid(vals, nodes))


def _wrapped_center_dist(grid: Grid, a: tuple, b: tuple) -> float:
    d2 = 0.0
    for ai, bi in zip(a, b):
        delta = abs(int(ai) - int(bi))
        delta = min(delta, grid.n - delta)
        d2 += (delta * grid.h) ** 2
    return float(np.sqrt(d2))


def parabolic_morrey_norm(grid: Grid, traj: Trajectory, cylinder: ParabolicCylinder,
                          spatial_stride: int = 1, subcylinders: bool = True) -> float:
    """Sup over sampled sub-cylinders P_r(z) inside the given cylinder of

        (r**(2 - (n+2)) * int_{P_r(z)} |f|^2 dx dt) ** (1/2),

    with the time integral taken by trapezoid on the stored steps.
    """
    t0, r0 = cylinder.t0, cylinder.r0
    times = np.asarray(traj.times, dtype=float)
    tol = 1e-10
    if r0 > np.sqrt(t0) + tol:
        raise ValueError("cylinder radius must satisfy r0 <= sqrt(t0)")
    if times.min() > t0 - r0 * r0 + tol or times.max() < t0 - tol:
        raise ValueError("trajectory does not cover the cylinder time span")

    g2 = np.stack([pointwise_magnitude(grid, f) ** 2 for f in traj.fields])
    d2 = _offset_dist2(grid)
    hn = grid.h ** grid.dim
    ax_all = tuple(range(grid.dim))

    if subcylinders:
        radii = []
        r = grid.h
        while r < r0 * (1.0 - 1e-12):
            radii.append(r)
            r = 2.0 * r
        radii.append(r0)
        centers = [c for c in product(range(0, grid.n, spatial_stride), repeat=grid.dim)]
        t_candidates = list(times[(times <= t0 + tol)])
        if not any(abs(t - t0) <= tol for t in t_candidates):
            t_candidates.append(t0)
    else:
        radii = [r0]
        centers = [cylinder.center]
        t_candidates = [t0]

    best = 0.0
    exponent = 2.0 - (grid.dim + 2)
    for center in centers:
        rolled = np.roll(d2, shift=center, axis=ax_all)
        dist_c = _wrapped_center_dist(grid, center, cylinder.center)
        series_cache = {}
        for r in radii:
            if dist_c + r > r0 + tol:
                continue
            if r not in series_cache:
                mask = rolled <= r * r
                series_cache[r] = g2[:, mask].sum(axis=1) * hn
            series = series_cache[r]
            for t in t_candidates:
                t_lo = t - r * r
                if t_lo < t0 - r0 * r0 - tol or t > t0 + tol:
                    continue
                if t_lo < times.min() - tol:
                    continue
                integral = _interp_integral(times, series, t_lo, t)
                val = (max(r, 0.0) ** exponent * integral) ** 0.5
                if val > best:
                    best = val
    return float(best)


# ---------------------------------------------------------------------------
# trajectory norms


@dataclass(frozen=True)
class XptReport:
    """Time-weighted trajectory norm split into its three components.

    r1 = sup_t t^(1/2 - 1/p) ||u(t)||_{M^{p,2}},
    r2 = sup_t t^(1/2)       ||grad u(t)||_{M^{2,2}},
    r3 = sup_t               ||u(t)||_{M^{2,2}};
    the t = 0 sample contributes only to r3.
    """

    r1: float
    r2: float
    r3: float
    p: float
    t_end: float
    r1_time: float
    r2_time: float
    r3_time: float

    @property
    def total(self) -> float:
        return self.r1 + self.r2 + self.r3


def xpt_norm(grid: Grid, traj: Trajectory, p: float,
             lattice: BallLattice | None = None) -> XptReport:
    if p <= 2:
        raise ValueError(f"trajectory norm needs p > 2, got {p}")
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if lattice is None:
        lattice = ball_lattice(grid)
    r1 = r2 = r3 = 0.0
    t1 = t2 = t3 = float(traj.times[0])
    for t, u in zip(traj.times, traj.fields):
        n3 = morrey_norm(grid, u, 2.0, 2.0, lattice).value
        if n3 > r3:
            r3, t3 = n3, float(t)
        if t > 0.0:
            n1 = morrey_norm(grid, u, p, 2.0, lattice).value
            w1 = t ** (0.5 - 1.0 / p) * n1
            if w1 > r1:
                r1, t1 = w1, float(t)
            gu = gradient(grid, u)
            n2 = morrey_norm(grid, gu, 2.0, 2.0, lattice).value
            w2 = np.sqrt(t) * n2
            if w2 > r2:
                r2, t2 = w2, float(t)
    return XptReport(r1=float(r1), r2=float(r2), r3=float(r3), p=float(p),
                     t_end=float(traj.times[-1]), r1_time=t1, r2_time=t2, r3_time=t3)


def ypt_norm(grid: Grid, traj: Trajectory, p: float,
             lattice: BallLattice | None = None) -> float:
    """The r1 + r2 part of the trajectory norm (drops the plain sup)."""
    rep = xpt_norm(grid, traj, p, lattice)
    return rep.r1 + rep.r2
