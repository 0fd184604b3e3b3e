"""Three-species competition model and separatrix-surface sampling.

Two of the single-survivor equilibria of the model are simultaneously
stable for the default parameters, so the cube of initial conditions
splits into two basins of attraction. Points on the dividing surface are
located by classifying trajectories of neighboring initial conditions and
bisecting every segment whose endpoints reach different equilibria.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SameBasin
from .geometry import PointSet

Y_ONLY = "y-only"
Z_ONLY = "z-only"
UNRESOLVED = "unresolved"

DEFAULT_STEP = 1e-2
DEFAULT_T_MAX = 500.0
DEFAULT_TOL = 1e-3

_CHECK_EVERY = 10  # integration steps between equilibrium checks


@dataclass(frozen=True)
class CompetitionParams:
    """Growth/capacity/competition rates of the three-species model.

    ``competition`` holds the interaction coefficients in the order
    (xy, xz, yx, yz, zx, zy): the first pair damps species x by y and z,
    and so on. Defaults give two stable single-survivor equilibria.
    """

    growth: tuple = (1.0, 0.5, 2.0)
    capacity: tuple = (1.0, 2.0, 1.0)
    competition: tuple = (1.0, 2.0, 0.3, 1.0, 3.0, 2.0)
    cube_edge: float = 2.0

    def __post_init__(self):
        allv = (*self.growth, *self.capacity, *self.competition)
        if any(v < 0 for v in allv):
            raise ValueError("all rates must be nonnegative")
        if self.cube_edge <= 0:
            raise ValueError("cube_edge must be positive")

    @property
    def y_equilibrium(self) -> np.ndarray:
        return np.array([0.0, self.capacity[1], 0.0])

    @property
    def z_equilibrium(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.capacity[2]])


def rhs(state, params: CompetitionParams = CompetitionParams()):
    """Time derivative of (x, y, z) under the competition dynamics."""
    return _rhs_batch(np.asarray(state, dtype=float)[None, :], params)[0]


def _rhs_batch(states: np.ndarray, params: CompetitionParams) -> np.ndarray:
    x, y, z = states[:, 0], states[:, 1], states[:, 2]
    gx, gy, gz = params.growth
    ux, uy, uz = params.capacity
    cxy, cxz, cyx, cyz, czx, czy = params.competition
    out = np.empty_like(states)
    out[:, 0] = gx * (1.0 - x / ux) * x - cxy * x * y - cxz * x * z
    out[:, 1] = gy * (1.0 - y / uy) * y - cyx * x * y - cyz * y * z
    out[:, 2] = gz * (1.0 - z / uz) * z - czx * x * z - czy * y * z
    return out


def _classify_batch(states, params, tol, t_max, step):
    """Integrate many initial conditions at once (fixed-step RK4).

    Returns one label per row; a trajectory is labeled as soon as it comes
    within ``tol`` of either stable equilibrium.
    """
    y = np.atleast_2d(np.asarray(states, dtype=float)).copy()
    labels = np.array([UNRESOLVED] * len(y), dtype=object)
    active = np.ones(len(y), dtype=bool)
    targets = (params.y_equilibrium, params.z_equilibrium)
    names = (Y_ONLY, Z_ONLY)
    n_steps = int(round(t_max / step))
    for i in range(n_steps):
        if not active.any():
            break
        ya = y[active]
        k1 = _rhs_batch(ya, params)
        k2 = _rhs_batch(ya + 0.5 * step * k1, params)
        k3 = _rhs_batch(ya + 0.5 * step * k2, params)
        k4 = _rhs_batch(ya + step * k3, params)
        y[active] = ya + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if i % _CHECK_EVERY == 0 or i == n_steps - 1:
            rows = np.flatnonzero(active)
            cur = y[rows]
            for target, name in zip(targets, names):
                hit = np.linalg.norm(cur - target, axis=1) <= tol
                labels[rows[hit]] = name
                active[rows[hit]] = False
                rows = rows[~hit]
                cur = cur[~hit]
    return labels


def classify(
    initial,
    params: CompetitionParams = CompetitionParams(),
    tol: float = DEFAULT_TOL,
    t_max: float = DEFAULT_T_MAX,
    step: float = DEFAULT_STEP,
) -> str:
    """Equilibrium reached from one initial condition (or "unresolved")."""
    return str(_classify_batch([initial], params, tol, t_max, step)[0])


def bisect_separatrix(
    p_a,
    p_b,
    params: CompetitionParams = CompetitionParams(),
    tol: float = DEFAULT_TOL,
    t_max: float = DEFAULT_T_MAX,
    step: float = DEFAULT_STEP,
) -> np.ndarray:
    """Point on segment [p_a, p_b] within ``tol`` of the basin boundary.

    Raises SameBasin unless the endpoints resolve to different equilibria.
    An unresolved midpoint already sits on the boundary within integration
    accuracy and is returned directly.
    """
    a = np.asarray(p_a, dtype=float).copy()
    b = np.asarray(p_b, dtype=float).copy()
    label_a, label_b = _classify_batch([a, b], params, tol, t_max, step)
    if UNRESOLVED in (label_a, label_b) or label_a == label_b:
        raise SameBasin(f"endpoints classify as {label_a!r} / {label_b!r}")
    while np.linalg.norm(b - a) > tol:
        mid = 0.5 * (a + b)
        label_mid = str(_classify_batch([mid], params, tol, t_max, step)[0])
        if label_mid == UNRESOLVED:
            return mid
        if label_mid == label_a:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def sample_separatrix(
    params: CompetitionParams = CompetitionParams(),
    n_pairs: int = 600,
    tol: float = DEFAULT_TOL,
    lattice_side: int = 10,
    t_max: float = DEFAULT_T_MAX,
    step: float = DEFAULT_STEP,
) -> PointSet:
    """Separatrix points from axis-adjacent lattice pairs in the cube.

    A lattice of lattice_side^3 initial conditions in [0, cube_edge]^3 is
    classified; up to ``n_pairs`` adjacent pairs with different resolved
    labels are refined in lockstep bisection. May return fewer points than
    pairs when few pairs straddle the boundary.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    axis = np.linspace(0.0, params.cube_edge, lattice_side)
    gx, gy, gz = np.meshgrid(axis, axis, axis, indexing="ij")
    lattice = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    labels = _classify_batch(lattice, params, tol, t_max, step)

    def flat(i, j, k):
        return (i * lattice_side + j) * lattice_side + k

    pairs = []
    for i in range(lattice_side):
        for j in range(lattice_side):
            for k in range(lattice_side):
                here = flat(i, j, k)
                for ii, jj, kk in ((i + 1, j, k), (i, j + 1, k), (i, j, k + 1)):
                    if max(ii, jj, kk) >= lattice_side:
                        continue
                    there = flat(ii, jj, kk)
                    la, lb = labels[here], labels[there]
                    if UNRESOLVED in (la, lb) or la == lb:
                        continue
                    pairs.append((here, there))
    pairs = pairs[:n_pairs]
    if not pairs:
        return PointSet(np.empty((0, 3)))

    a = lattice[[p[0] for p in pairs]].copy()
    b = lattice[[p[1] for p in pairs]].copy()
    label_a = labels[[p[0] for p in pairs]]
    done = np.zeros(len(a), dtype=bool)
    while True:
        gap = np.linalg.norm(b - a, axis=1)
        todo = ~done & (gap > tol)
        if not todo.any():
            break
        mid = 0.5 * (a[todo] + b[todo])
        mid_labels = _classify_batch(mid, params, tol, t_max, step)
        rows = np.flatnonzero(todo)
        for r, lm, m in zip(rows, mid_labels, mid):
            if lm == UNRESOLVED:
                a[r] = b[r] = m
                done[r] = True
            elif lm == label_a[r]:
                a[r] = m
            else:
                b[r] = m
    return PointSet(0.5 * (a + b))
