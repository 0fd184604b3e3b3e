"""Partition-of-unity interpolation over a block-partitioned convex domain.

Subdomain centers are laid out as a grid on the bounding rectangle, reduced
to the hull, and given a common radius tied to the grid resolution. All
point-in-subdomain queries run through the block structure, local kernel
systems are solved per subdomain, and local fits are blended with Shepard
weights into the global interpolant.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve
from scipy.linalg import solve as lin_solve
from scipy.sparse.linalg import LinearOperator, onenormest, splu
from scipy.spatial.distance import cdist

from .blockpart import BlockStructure, blocks_per_side, build, range_search
from .errors import (
    EmptyReduction,
    EmptySubdomainPruned,
    InsufficientCoverage,
    NoActiveSubdomain,
    SingularLocalSystem,
)
from .geometry import (
    Box,
    ConvexDomain,
    PointSet,
    convex_hull,
    fill_distance,
    grid_on_rect,
    reduce_to_domain,
)
from .kernels import Kernel, phi_wendland_c2, sparse_distance_matrix

# Exact SVD condition numbers up to this size; 1-norm estimate beyond.
COND_SVD_LIMIT = 2000

# Sparse local assembly pays off only for large, genuinely sparse systems.
SPARSE_MIN_POINTS = 256

# Fill-distance probes are subsampled beyond this count.
FILL_PROBE_CAP = 20000


@dataclass(frozen=True)
class PumConfig:
    """Tunables of one interpolation run.

    d_r / s_r are the requested subdomain-center and evaluation grid counts
    on the bounding rectangle (defaults: d_r from the node density rule,
    s_r 40x40 in 2D and 20x20x20 in 3D). block_mode selects how the number
    of blocks per side follows from the subdomain radius.
    """

    kernel: Kernel
    d_r: int | None = None
    s_r: int | None = None
    block_mode: str = "cover"
    delta_override: float | None = None
    threads: int = 1

    def __post_init__(self):
        if self.block_mode not in ("cover", "paper"):
            raise ValueError("block_mode must be 'cover' or 'paper'")
        if self.d_r is not None and self.d_r < 1:
            raise ValueError("d_r must be >= 1")
        if self.s_r is not None and self.s_r < 1:
            raise ValueError("s_r must be >= 1")
        if self.delta_override is not None and self.delta_override <= 0:
            raise ValueError("delta_override must be positive")


@dataclass
class Covering:
    """Subdomain centers with common radius and per-subdomain member lists.

    Only subdomains holding at least one data site survive; when an
    evaluation set is attached, every evaluation point is inside at least
    one surviving subdomain.
    """

    centers: np.ndarray
    radius: float
    node_lists: list
    node_dists: list
    eval_lists: list
    eval_dists: list
    d_requested: int
    n_pruned: int

    @property
    def d(self) -> int:
        return len(self.centers)


@dataclass
class LocalFit:
    index: int
    coefficients: np.ndarray
    cond: float


@dataclass
class RunReport:
    n: int
    d: int
    s: int
    delta: float
    q: int
    mae: float | None
    rmse: float | None
    max_cond: float
    av_cond: float
    fill_dist: float
    rate: float | None = None
    timings: dict = field(default_factory=dict)

    _TIMING_KEYS = ("t_structure_s", "t_search_s", "t_solve_s", "t_eval_s", "t_total_s")

    def as_dict(self) -> dict:
        out = {
            "N": self.n,
            "d": self.d,
            "s": self.s,
            "delta": self.delta,
            "q": self.q,
            "mae": self.mae,
            "rmse": self.rmse,
            "max_cond": self.max_cond,
            "av_cond": self.av_cond,
            "fill_distance": self.fill_dist,
            "rate": self.rate,
        }
        for key in self._TIMING_KEYS:
            out[key] = self.timings.get(key, 0.0)
        return out


def suggest_d_r(n: int, measure: float, edge: float, dim: int) -> int:
    """Subdomain-grid count on the rectangle from the node density.

    floor(edge/2 * (n/measure)^(1/M))^M, clamped below by one: with this
    choice the surviving center count is roughly n / 2^M.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if measure <= 0:
        raise ValueError("measure must be positive")
    raw = 0.5 * edge * (n / measure) ** (1.0 / dim)
    if abs(raw - round(raw)) < 1e-9 * max(1.0, abs(raw)):
        raw = round(raw)
    return max(1, int(np.floor(raw))) ** dim


def subdomain_radius(edge: float, d_r: int, dim: int) -> float:
    """Common subdomain radius edge*sqrt(2)/d_r^(1/M)."""
    if d_r < 1:
        raise ValueError("d_r must be >= 1")
    root = d_r ** (1.0 / dim)
    if abs(root - round(root)) < 1e-9 * max(1.0, root):
        root = round(root)
    return float(edge * np.sqrt(2.0) / root)


def _side_count(count: int, dim: int) -> int:
    return max(1, int(round(count ** (1.0 / dim))))


def shepard_weights(p, covering: Covering, active=None) -> np.ndarray:
    """Normalized compact weights of the subdomains containing ``p``.

    The weight generator is the Wendland C2 profile scaled to vanish at the
    subdomain radius. Raises NoActiveSubdomain when nothing covers ``p``.
    """
    p = np.asarray(p, dtype=float)
    if active is None:
        dist_all = np.linalg.norm(covering.centers - p, axis=1)
        active = np.flatnonzero(dist_all < covering.radius)
    else:
        active = np.asarray(active, dtype=np.int64)
    if len(active) == 0:
        raise NoActiveSubdomain(f"point {p} lies in no subdomain")
    dist = np.linalg.norm(covering.centers[active] - p, axis=1)
    w = phi_wendland_c2(dist, 1.0 / covering.radius)
    total = w.sum()
    if total <= 0:
        raise NoActiveSubdomain(f"point {p} lies in no subdomain")
    return w / total


def _memberships(bs: BlockStructure, centers: np.ndarray, radius: float):
    """Strict-interior members of each ball, found through the block grid."""
    lists, dists = [], []
    for c in centers:
        found = range_search(bs, c, radius)
        inside = found.distances < radius
        lists.append(found.indices[inside])
        dists.append(found.distances[inside])
    return lists, dists


def build_covering(nodes: PointSet, dom: ConvexDomain, cfg: PumConfig, eval_points=None) -> Covering:
    """Construct the subdomain covering and membership lists.

    ``eval_points`` defaults to the reduced evaluation grid from the
    config. Empty subdomains are pruned with a warning; if afterwards some
    evaluation point is inside no surviving subdomain, the covering is not
    regular and InsufficientCoverage is raised. When both d_r and the
    radius were defaulted, the center grid is coarsened (larger radius)
    and retried before giving up; sparse inputs need that, explicit
    settings are respected as given.
    """
    eval_coords = _resolve_eval(dom, cfg, eval_points)
    covering, _ = _build_covering(nodes, dom, cfg, eval_coords)
    return covering


def _resolve_eval(dom, cfg, eval_points):
    if eval_points is not None:
        return np.atleast_2d(np.ascontiguousarray(eval_points, dtype=float))
    s_r = cfg.s_r if cfg.s_r is not None else (1600 if dom.dim == 2 else 8000)
    return reduce_to_domain(grid_on_rect(dom.rect, s_r), dom).coords


def _build_covering(nodes, dom, cfg, eval_coords):
    """One covering attempt per d_r candidate, coarsening only defaults."""
    auto = cfg.d_r is None and cfg.delta_override is None
    d_r = cfg.d_r if cfg.d_r is not None else suggest_d_r(len(nodes), dom.measure, dom.box.edge, nodes.dim)
    while True:
        try:
            return _build_covering_once(nodes, dom, cfg, eval_coords, d_r)
        except (InsufficientCoverage, EmptyReduction):
            n_side = _side_count(d_r, nodes.dim)
            if not auto or n_side <= 1:
                raise
            d_r = max(1, n_side // 2) ** nodes.dim
            warnings.warn(
                f"covering too fine for the data, retrying with d_r={d_r}",
                EmptySubdomainPruned,
                stacklevel=3,
            )


def _build_covering_once(nodes, dom, cfg, eval_coords, d_r):
    dim = nodes.dim
    n_side = _side_count(d_r, dim)
    d_r_actual = n_side**dim
    delta = cfg.delta_override
    if delta is None:
        delta = subdomain_radius(dom.box.edge, d_r_actual, dim)

    t0 = time.perf_counter()
    centers = reduce_to_domain(grid_on_rect(dom.rect, d_r_actual), dom).coords
    q = blocks_per_side(dom.box.edge, delta, cfg.block_mode)
    nodes_bs = build(nodes, dom.box, q)
    evals_bs = None if eval_coords is None else build(PointSet(eval_coords), dom.box, q)
    t1 = time.perf_counter()

    node_lists, node_dists = _memberships(nodes_bs, centers, delta)
    occupied = [j for j, members in enumerate(node_lists) if len(members)]
    n_pruned = len(centers) - len(occupied)
    if n_pruned:
        warnings.warn(
            f"pruned {n_pruned} of {len(centers)} subdomains containing no data sites",
            EmptySubdomainPruned,
            stacklevel=2,
        )
    centers = centers[occupied]
    node_lists = [node_lists[j] for j in occupied]
    node_dists = [node_dists[j] for j in occupied]

    if evals_bs is not None:
        eval_lists, eval_dists = _memberships(evals_bs, centers, delta)
        covered = np.zeros(len(eval_coords), dtype=bool)
        for members in eval_lists:
            covered[members] = True
        if not covered.all():
            missing = np.flatnonzero(~covered)
            raise InsufficientCoverage(
                f"{len(missing)} evaluation points lie in no nonempty subdomain, "
                f"first at {eval_coords[missing[0]]}; increase overlap or node density"
            )
    else:
        eval_lists = [np.empty(0, dtype=np.int64) for _ in node_lists]
        eval_dists = [np.empty(0) for _ in node_lists]
    t2 = time.perf_counter()

    covering = Covering(
        centers=centers,
        radius=delta,
        node_lists=node_lists,
        node_dists=node_dists,
        eval_lists=eval_lists,
        eval_dists=eval_dists,
        d_requested=d_r_actual,
        n_pruned=n_pruned,
    )
    extras = {
        "q": q,
        "t_structure_s": t1 - t0,
        "t_search_s": t2 - t1,
    }
    return covering, extras


def _cond_dense(phi: np.ndarray) -> float:
    sv = np.linalg.svd(phi, compute_uv=False)
    if sv[-1] <= 0:
        return float("inf")
    return float(sv[0] / sv[-1])


def _cond_sparse(csr) -> float:
    # 1-norm estimate; only hit when the local system exceeds COND_SVD_LIMIT
    lu = splu(csr.tocsc())
    op = LinearOperator(
        csr.shape,
        matvec=lu.solve,
        rmatvec=lambda x: lu.solve(x, trans="T"),
        dtype=csr.dtype,
    )
    return float(onenormest(csr) * onenormest(op))


def local_solve(coords: np.ndarray, values: np.ndarray, kernel: Kernel, index: int = 0) -> LocalFit:
    """Solve the local kernel system on one subdomain (dense path).

    Tries the symmetric positive-definite factorization first, falls back
    to a pivoted symmetric solve, and reports the 2-norm condition number.
    """
    phi = kernel(cdist(coords, coords))
    try:
        coef = cho_solve(cho_factor(phi, check_finite=False), values, check_finite=False)
    except np.linalg.LinAlgError:
        cond = _cond_dense(phi) if len(coords) <= COND_SVD_LIMIT else float("inf")
        try:
            coef = lin_solve(phi, values, assume_a="sym", check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SingularLocalSystem(
                f"subdomain {index}: factorization failed (cond~{cond:.3e})"
            ) from exc
    if not np.all(np.isfinite(coef)):
        raise SingularLocalSystem(f"subdomain {index}: non-finite coefficients")
    if len(coords) <= COND_SVD_LIMIT:
        cond = _cond_dense(phi)
    else:
        cond = _cond_sparse(sp.csr_matrix(phi))
    return LocalFit(index=index, coefficients=coef, cond=max(cond, 1.0))


def _local_solve_sparse(coords, values, kernel, index) -> LocalFit:
    """Sparse local assembly and solve for narrow supports on large subdomains."""
    lo = float(coords.min())
    hi = float(coords.max())
    local = PointSet(coords)
    q = blocks_per_side(hi - lo, kernel.support_radius, "cover")
    bs = build(local, Box(lo=lo, hi=hi, dim=local.dim), q)
    mat = sparse_distance_matrix(local, local, kernel, bs).to_csr()
    try:
        lu = splu(mat.tocsc())
        coef = lu.solve(values)
    except RuntimeError as exc:
        raise SingularLocalSystem(f"subdomain {index}: sparse factorization failed") from exc
    if not np.all(np.isfinite(coef)):
        raise SingularLocalSystem(f"subdomain {index}: non-finite coefficients")
    if len(coords) <= COND_SVD_LIMIT:
        cond = _cond_dense(mat.toarray())
    else:
        cond = _cond_sparse(mat)
    return LocalFit(index=index, coefficients=coef, cond=max(cond, 1.0))


def _fit_subdomains(nodes, covering, kernel, threads) -> list:
    coords = nodes.coords
    values = nodes.values
    delta = covering.radius

    def fit_one(j):
        members = covering.node_lists[j]
        local_coords = coords[members]
        local_values = values[members]
        if len(members) >= SPARSE_MIN_POINTS and kernel.support_radius <= delta:
            return _local_solve_sparse(local_coords, local_values, kernel, j)
        return local_solve(local_coords, local_values, kernel, j)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fit_one, range(covering.d)))
    return [fit_one(j) for j in range(covering.d)]


def _accumulate(eval_coords, covering, fits, nodes_coords, kernel):
    """Blend local fits with Shepard weights; subdomains in ascending order."""
    num = np.zeros(len(eval_coords))
    den = np.zeros(len(eval_coords))
    inv_delta = 1.0 / covering.radius
    for j in range(covering.d):
        members = covering.eval_lists[j]
        if len(members) == 0:
            continue
        w = phi_wendland_c2(covering.eval_dists[j], inv_delta)
        local = kernel(cdist(eval_coords[members], nodes_coords[covering.node_lists[j]]))
        num[members] += w * (local @ fits[j].coefficients)
        den[members] += w
    return num, den


@dataclass
class PumModel:
    """A fitted partition-of-unity interpolant."""

    domain: ConvexDomain
    kernel: Kernel
    config: PumConfig
    covering: Covering
    fits: list
    nodes: PointSet
    q: int
    build_timings: dict = field(default_factory=dict)

    @property
    def delta(self) -> float:
        return self.covering.radius

    def predict(self, points, on_uncovered: str = "raise") -> np.ndarray:
        """Evaluate the interpolant at arbitrary points.

        Points inside no subdomain either raise NoActiveSubdomain
        (on_uncovered="raise") or take the nearest surviving subdomain's
        local fit with weight one (on_uncovered="nearest").
        """
        if on_uncovered not in ("raise", "nearest"):
            raise ValueError("on_uncovered must be 'raise' or 'nearest'")
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(points))
        box = self.domain.box
        tol = 1e-12 * box.edge
        inbox = np.all((points >= box.lo - tol) & (points <= box.hi + tol), axis=1)
        uncovered_parts = []

        if inbox.any():
            idx = np.flatnonzero(inbox)
            vals, missing = self._predict_inbox(points[idx])
            out[idx] = vals
            uncovered_parts.append(idx[missing])
        if not inbox.all():
            idx = np.flatnonzero(~inbox)
            vals, missing = self._predict_loose(points[idx])
            out[idx] = vals
            uncovered_parts.append(idx[missing])

        uncovered = np.concatenate(uncovered_parts) if uncovered_parts else np.empty(0, np.int64)
        if len(uncovered):
            if on_uncovered == "raise":
                raise NoActiveSubdomain(
                    f"{len(uncovered)} points lie in no subdomain, first at {points[uncovered[0]]}"
                )
            out[uncovered] = self._predict_nearest(points[uncovered])
        return out

    def _predict_inbox(self, pts):
        qbs = build(
            PointSet(pts),
            self.domain.box,
            blocks_per_side(self.domain.box.edge, self.delta, "cover"),
        )
        lists, dists = _memberships(qbs, self.covering.centers, self.delta)
        probe = Covering(
            centers=self.covering.centers,
            radius=self.delta,
            node_lists=self.covering.node_lists,
            node_dists=self.covering.node_dists,
            eval_lists=lists,
            eval_dists=dists,
            d_requested=self.covering.d_requested,
            n_pruned=self.covering.n_pruned,
        )
        num, den = _accumulate(pts, probe, self.fits, self.nodes.coords, self.kernel)
        missing = np.flatnonzero(den == 0)
        vals = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        return vals, missing

    def _predict_loose(self, pts):
        # out-of-box queries: few by construction, evaluated one by one
        vals = np.zeros(len(pts))
        missing = []
        for i, p in enumerate(pts):
            dist = np.linalg.norm(self.covering.centers - p, axis=1)
            active = np.flatnonzero(dist < self.delta)
            if len(active) == 0:
                missing.append(i)
                continue
            w = phi_wendland_c2(dist[active], 1.0 / self.delta)
            local = np.array([self._local_value(j, p) for j in active])
            vals[i] = float(np.dot(w, local) / w.sum())
        return vals, np.asarray(missing, dtype=np.int64)

    def _predict_nearest(self, pts):
        vals = np.empty(len(pts))
        nearest = cdist(pts, self.covering.centers).argmin(axis=1)
        for j in np.unique(nearest):
            rows = np.flatnonzero(nearest == j)
            local = self.kernel(cdist(pts[rows], self.nodes.coords[self.covering.node_lists[j]]))
            vals[rows] = local @ self.fits[j].coefficients
        return vals

    def _local_value(self, j, p):
        members = self.covering.node_lists[j]
        r = np.linalg.norm(self.nodes.coords[members] - p, axis=1)
        return float(self.kernel(r) @ self.fits[j].coefficients)

    def conditioning(self):
        conds = np.array([f.cond for f in self.fits])
        return float(conds.max()), float(conds.mean())


@dataclass
class PumResult:
    values: np.ndarray
    report: RunReport
    model: PumModel
    eval_points: np.ndarray = None


def fit_model(nodes: PointSet, cfg: PumConfig) -> PumModel:
    """Fit the interpolant without attaching an evaluation set."""
    if nodes.values is None:
        raise ValueError("nodes must carry values")
    t_begin = time.perf_counter()
    t0 = time.perf_counter()
    dom = convex_hull(nodes)
    t_hull = time.perf_counter() - t0
    covering, extras = _build_covering(nodes, dom, cfg, None)
    t0 = time.perf_counter()
    fits = _fit_subdomains(nodes, covering, cfg.kernel, cfg.threads)
    t_solve = time.perf_counter() - t0
    model = PumModel(
        domain=dom,
        kernel=cfg.kernel,
        config=cfg,
        covering=covering,
        fits=fits,
        nodes=nodes,
        q=extras["q"],
    )
    model.build_timings = {
        "t_structure_s": t_hull + extras["t_structure_s"],
        "t_search_s": extras["t_search_s"],
        "t_solve_s": t_solve,
        "t_total_s": time.perf_counter() - t_begin,
    }
    return model


def pum_interpolate(nodes: PointSet, cfg: PumConfig, eval_points=None, truth=None) -> PumResult:
    """Full pipeline: domain detection, covering, local solves, blending.

    ``nodes`` must carry values. ``eval_points`` defaults to the reduced
    evaluation grid on the bounding rectangle; ``truth`` (callable or
    array) enables the error metrics in the report.
    """
    if nodes.values is None:
        raise ValueError("nodes must carry values")
    t_begin = time.perf_counter()
    t0 = time.perf_counter()
    dom = convex_hull(nodes)
    t_hull = time.perf_counter() - t0

    eval_coords = _resolve_eval(dom, cfg, eval_points)
    covering, extras = _build_covering(nodes, dom, cfg, eval_coords)

    t0 = time.perf_counter()
    fits = _fit_subdomains(nodes, covering, cfg.kernel, cfg.threads)
    t_solve = time.perf_counter() - t0

    t0 = time.perf_counter()
    num, den = _accumulate(eval_coords, covering, fits, nodes.coords, cfg.kernel)
    values = num / den
    t_eval = time.perf_counter() - t0

    model = PumModel(
        domain=dom,
        kernel=cfg.kernel,
        config=cfg,
        covering=covering,
        fits=fits,
        nodes=nodes,
        q=extras["q"],
    )
    report = _make_report(model, eval_coords, values, truth)
    report.timings = {
        "t_structure_s": t_hull + extras["t_structure_s"],
        "t_search_s": extras["t_search_s"],
        "t_solve_s": t_solve,
        "t_eval_s": t_eval,
        "t_total_s": time.perf_counter() - t_begin,
    }
    model.build_timings = dict(report.timings)
    return PumResult(values=values, report=report, model=model, eval_points=eval_coords)


def evaluate(model: PumModel, eval_points, truth=None):
    """Evaluate a fitted model at given points and report metrics."""
    t_begin = time.perf_counter()
    eval_coords = np.atleast_2d(np.asarray(eval_points, dtype=float))
    values = model.predict(eval_coords, on_uncovered="raise")
    report = _make_report(model, eval_coords, values, truth)
    report.timings = dict(model.build_timings)
    report.timings["t_eval_s"] = time.perf_counter() - t_begin
    report.timings["t_total_s"] = report.timings.get("t_total_s", 0.0) + report.timings["t_eval_s"]
    return values, report


def _make_report(model, eval_coords, values, truth) -> RunReport:
    from .validation import mae as mae_fn
    from .validation import rmse as rmse_fn

    mae_val = rmse_val = None
    if truth is not None:
        truth_vals = truth(eval_coords) if callable(truth) else np.asarray(truth, dtype=float)
        mae_val = mae_fn(truth_vals, values)
        rmse_val = rmse_fn(truth_vals, values)
    max_cond, av_cond = model.conditioning()
    stride = max(1, int(np.ceil(len(eval_coords) / FILL_PROBE_CAP)))
    fd = fill_distance(model.nodes, PointSet(eval_coords[::stride]))
    return RunReport(
        n=len(model.nodes),
        d=model.covering.d,
        s=len(eval_coords),
        delta=model.delta,
        q=model.q,
        mae=mae_val,
        rmse=rmse_val,
        max_cond=max_cond,
        av_cond=av_cond,
        fill_dist=fd,
    )


def audit_partition_of_unity(model: PumModel, points) -> float:
    """Worst |sum of active weights - 1| over the given covered points."""
    worst = 0.0
    for p in np.atleast_2d(np.asarray(points, dtype=float)):
        try:
            w = shepard_weights(p, model.covering)
        except NoActiveSubdomain:
            continue
        worst = max(worst, abs(float(w.sum()) - 1.0))
    return worst
