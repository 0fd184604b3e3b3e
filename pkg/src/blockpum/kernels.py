"""Compactly supported radial kernels and kernel-distance matrices.

Both shipped kernels vanish identically for r >= 1/epsilon, so kernel
matrices between point sets whose mutual distances exceed the support are
sparse; the block structure finds the nonzero pairs without scanning all
of them. Globally supported kernels would make that wasteful, so they are
only ever assembled densely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .blockpart import BlockStructure, range_search
from .errors import SupportExceedsNeighborhood
from .geometry import PointSet


def phi_wendland_c2(r, epsilon: float):
    """Wendland C2 kernel (1 - eps*r)^4_+ (4 eps*r + 1)."""
    t = epsilon * np.asarray(r, dtype=float)
    cut = np.maximum(1.0 - t, 0.0)
    return cut**4 * (4.0 * t + 1.0)


def phi_wu_c4(r, epsilon: float):
    """Wu C4 kernel (1 - eps*r)^6_+ (5t^5 + 30t^4 + 72t^3 + 82t^2 + 36t + 6), t = eps*r."""
    t = epsilon * np.asarray(r, dtype=float)
    cut = np.maximum(1.0 - t, 0.0)
    poly = ((((5.0 * t + 30.0) * t + 72.0) * t + 82.0) * t + 36.0) * t + 6.0
    return cut**6 * poly


_REGISTRY = {
    "wendland-c2": phi_wendland_c2,
    "wu-c4": phi_wu_c4,
}


@dataclass(frozen=True)
class Kernel:
    """A compactly supported radial kernel with shape parameter epsilon.

    The support radius is 1/epsilon: phi(r) > 0 iff epsilon*r < 1.
    """

    name: str
    epsilon: float

    def __post_init__(self):
        if self.name not in _REGISTRY:
            raise ValueError(f"unknown kernel {self.name!r}; have {sorted(_REGISTRY)}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def support_radius(self) -> float:
        return 1.0 / self.epsilon

    def __call__(self, r):
        return _REGISTRY[self.name](r, self.epsilon)


def make_kernel(name: str, epsilon: float) -> Kernel:
    """Kernel factory; accepts dash or underscore spellings."""
    return Kernel(name.replace("_", "-"), float(epsilon))


def register_kernel(name: str, phi) -> None:
    """Add a kernel profile phi(r, epsilon) under a new name."""
    _REGISTRY[name.replace("_", "-")] = phi


@dataclass(frozen=True)
class SparseKernelMatrix:
    """COO-style kernel matrix holding only entries inside the support."""

    shape: tuple
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, (self.rows, self.cols)), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    @property
    def nnz(self) -> int:
        return len(self.values)


def dense_distance_matrix(a: PointSet, b: PointSet, kernel: Kernel) -> np.ndarray:
    """Full |A| x |B| matrix of phi(||a_i - b_j||)."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return kernel(cdist(a.coords, b.coords))


def sparse_distance_matrix(
    a: PointSet, b: PointSet, kernel: Kernel, b_structure: BlockStructure
) -> SparseKernelMatrix:
    """Kernel matrix with only the entries where phi > 0.

    ``b`` must be the point set indexed by ``b_structure``; for each row
    point the block neighborhood yields every column within the support.
    Entry (i, j) is stored iff ||a_i - b_j|| < 1/epsilon, matching where
    the kernel is strictly positive.
    """
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if b_structure.points is not b.coords and len(b) != len(b_structure.points):
        raise ValueError("b_structure does not index b")
    support = kernel.support_radius
    if support > b_structure.width and b_structure.q > 1:
        raise SupportExceedsNeighborhood(
            f"support {support:g} exceeds block width {b_structure.width:g}; "
            "rebuild the structure in cover mode with radius >= 1/epsilon"
        )
    rows, cols, vals = [], [], []
    for i, p in enumerate(a.coords):
        found = range_search(b_structure, p, support)
        inside = found.distances < support
        if inside.any():
            j = found.indices[inside]
            rows.append(np.full(len(j), i, dtype=np.int64))
            cols.append(j)
            vals.append(kernel(found.distances[inside]))
    if rows:
        rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    else:
        rows = cols = np.empty(0, dtype=np.int64)
        vals = np.empty(0)
    return SparseKernelMatrix(shape=(len(a), len(b)), rows=rows, cols=cols, values=vals)
