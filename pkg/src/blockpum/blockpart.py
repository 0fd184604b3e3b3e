"""Block-based space partitioning and its two queries.

The bounding box is cut into q^M equal blocks (q per side). Every stored
point lands in exactly one block, so a fixed-radius query with radius at
most one block width only ever has to look at the query's block and its
<= 3^M - 1 existing neighbors. Block indices are 1-based and follow the
strip numbering k = sum_m (k_m - 1) q^(M-m) + k_M.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import PointOutsideBox
from .geometry import Box, PointSet

# Relative clamping tolerance for "inside the box" checks.
BOX_TOL_REL = 1e-12


class RangeResult(NamedTuple):
    """Result of a fixed-radius search: matches sorted by (distance, index)."""

    indices: np.ndarray
    distances: np.ndarray
    candidates: int  # how many stored points were examined


@dataclass(frozen=True)
class Neighborhood:
    center_block: int
    block_ids: np.ndarray  # center plus existing lattice neighbors, ascending


@dataclass(frozen=True)
class BlockStructure:
    """Static bucket grid over the bounding box of an indexed point set."""

    dim: int
    q: int
    box: Box
    width: float
    points: np.ndarray = field(repr=False)
    sorted_idx: np.ndarray = field(repr=False)  # point indices grouped by block
    starts: np.ndarray = field(repr=False)  # bucket k is sorted_idx[starts[k-1]:starts[k]]

    @property
    def n_blocks(self) -> int:
        return self.q**self.dim

    def bucket(self, k: int) -> np.ndarray:
        """Point indices stored in block k (ascending)."""
        return self.sorted_idx[self.starts[k - 1] : self.starts[k]]

    def bucket_sizes(self) -> np.ndarray:
        return np.diff(self.starts)


def strip_index(coord: float, axis_min: float, width: float, q: int) -> int:
    """1-based strip index of a coordinate; the far boundary clamps to strip q."""
    if width <= 0:
        raise ValueError("width must be positive")
    k = int(np.floor((coord - axis_min) / width)) + 1
    return min(max(k, 1), q)


def block_index(strips, q: int) -> int:
    """Block index from per-axis strip indices: k = sum (k_m-1) q^(M-m) + k_M."""
    strips = tuple(int(s) for s in strips)
    if any(s < 1 or s > q for s in strips):
        raise ValueError(f"strip indices must lie in [1, {q}]")
    k = 0
    for s in strips[:-1]:
        k = (k + (s - 1)) * q
    return k + strips[-1]


def _strip_matrix(coords: np.ndarray, box: Box, width: float, q: int) -> np.ndarray:
    """Vectorized per-axis strip indices, clamped into [1, q]."""
    raw = np.floor((coords - box.lo) / width).astype(np.int64) + 1
    return np.clip(raw, 1, q)


def _block_codes(strips: np.ndarray, q: int) -> np.ndarray:
    codes = strips[:, 0] - 1
    for m in range(1, strips.shape[1]):
        codes = codes * q + (strips[:, m] - 1)
    return codes + 1


def build(pts: PointSet, box: Box, q: int) -> BlockStructure:
    """Assign every point to its block bucket.

    Direct strip-index assignment plus one stable O(N) integer sort; the
    bucket contents come out sorted ascending by point index. Raises
    PointOutsideBox when a point lies outside the box beyond tolerance.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    coords = pts.coords
    tol = BOX_TOL_REL * box.edge
    if coords.size and (coords.min() < box.lo - tol or coords.max() > box.hi + tol):
        bad = coords[((coords < box.lo - tol) | (coords > box.hi + tol)).any(axis=1)][0]
        raise PointOutsideBox(f"point {bad} outside box [{box.lo}, {box.hi}]^{box.dim}")
    width = box.edge / q if box.edge > 0 else 1.0
    strips = _strip_matrix(coords, box, width, q)
    codes = _block_codes(strips, q)
    order = np.argsort(codes, kind="stable")
    counts = np.bincount(codes - 1, minlength=q**pts.dim)
    starts = np.concatenate(([0], np.cumsum(counts)))
    return BlockStructure(
        dim=pts.dim,
        q=q,
        box=box,
        width=width,
        points=coords,
        sorted_idx=order,
        starts=starts,
    )


def containing_query(bs: BlockStructure, p) -> int:
    """Block index of the block containing ``p``."""
    p = np.asarray(p, dtype=float)
    tol = BOX_TOL_REL * bs.box.edge
    if p.min() < bs.box.lo - tol or p.max() > bs.box.hi + tol:
        raise PointOutsideBox(f"point {p} outside box [{bs.box.lo}, {bs.box.hi}]^{bs.dim}")
    strips = [strip_index(c, bs.box.lo, bs.width, bs.q) for c in p]
    return block_index(strips, bs.q)


def neighborhood_of(bs: BlockStructure, k: int) -> Neighborhood:
    """Block k plus all its existing lattice neighbors (offsets in {-1,0,+1})."""
    if not 1 <= k <= bs.n_blocks:
        raise ValueError(f"block index {k} out of range [1, {bs.n_blocks}]")
    strips = _decompose(k, bs.q, bs.dim)
    ranges = [range(max(1, s - 1), min(bs.q, s + 1) + 1) for s in strips]
    ids = sorted(block_index(combo, bs.q) for combo in itertools.product(*ranges))
    return Neighborhood(center_block=k, block_ids=np.array(ids, dtype=np.int64))


def _decompose(k: int, q: int, dim: int):
    rem = k - 1
    strips = []
    for m in range(dim - 1, -1, -1):
        strips.append(rem // q**m + 1)
        rem %= q**m
    return strips


def _neighbor_candidates(bs: BlockStructure, p: np.ndarray):
    """Concatenated buckets of the (clamped) block neighborhood of ``p``."""
    strips = [strip_index(c, bs.box.lo, bs.width, bs.q) for c in p]
    ranges = [range(max(1, s - 1), min(bs.q, s + 1) + 1) for s in strips]
    chunks = []
    for combo in itertools.product(*ranges):
        k = block_index(combo, bs.q)
        lo, hi = bs.starts[k - 1], bs.starts[k]
        if hi > lo:
            chunks.append(bs.sorted_idx[lo:hi])
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


def range_search(bs: BlockStructure, center, radius: float) -> RangeResult:
    """All stored points within ``radius`` of ``center``.

    Results are sorted ascending by distance, ties broken by ascending point
    index. Complete whenever radius <= block width; centers outside the box
    are clamped for the block lookup only (projection onto the box never
    moves the center farther from any stored point), distances are true.
    """
    center = np.asarray(center, dtype=float)
    clamped = np.clip(center, bs.box.lo, bs.box.hi)
    cand = _neighbor_candidates(bs, clamped)
    if len(cand) == 0:
        return RangeResult(cand, np.empty(0), 0)
    delta = bs.points[cand] - center
    dist = np.sqrt(np.einsum("ij,ij->i", delta, delta))
    keep = dist <= radius
    idx, dist = cand[keep], dist[keep]
    order = np.lexsort((idx, dist))
    return RangeResult(idx[order], dist[order], len(cand))


def brute_force_range_search(points: np.ndarray, center, radius: float) -> RangeResult:
    """Reference fixed-radius search scanning all points; same order contract."""
    center = np.asarray(center, dtype=float)
    delta = np.asarray(points, dtype=float) - center
    dist = np.sqrt(np.einsum("ij,ij->i", delta, delta))
    idx = np.flatnonzero(dist <= radius)
    dist = dist[idx]
    order = np.lexsort((idx, dist))
    return RangeResult(idx[order], dist[order], len(points))


def blocks_per_side(edge: float, radius: float, mode: str = "cover") -> int:
    """Number of blocks along one box side for a given search radius.

    "paper" follows q = ceil(edge/radius); "cover" uses floor so that the
    block width never drops below the radius and the 3^M neighborhood
    provably covers every query ball.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if edge <= 0:
        return 1
    if mode == "paper":
        return max(1, int(np.ceil(edge / radius)))
    if mode == "cover":
        return max(1, int(np.floor(edge / radius)))
    raise ValueError(f"unknown block mode {mode!r}")
