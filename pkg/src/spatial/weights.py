# src/spatial/weights.py
"""
Spatial weights matrices.

A SpatialWeights object wraps a read-only CSR matrix together with the unit
identifiers and its normalization state. Builders cover explicit edge lists,
k-nearest neighbours, inverse distance bands and regular lattices.
"""
import threading
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from src.core.config import config
from src.core.exceptions import (
    DuplicateEdge,
    IdMismatch,
    InvalidCoordinates,
    InvalidK,
    InvalidParameter,
    InvalidWeight,
    NoConnectivity,
    ShapeError,
    ZeroDistance,
)
from src.core.models import IslandReport, Normalization

logger = structlog.get_logger(__name__)

Edge = Tuple[str, str, float]


class SpatialWeights:
    """
    Immutable sparse N×N connectivity matrix.

    Attributes:
        matrix: Read-only CSR matrix with zero diagonal and positive entries
        ids: Unit identifiers, position i labels row/column i
        normalization: raw, row or eigen
    """

    def __init__(
        self,
        matrix: Union[np.ndarray, sparse.spmatrix],
        ids: Optional[Sequence[Any]] = None,
        normalization: Union[str, Normalization] = Normalization.RAW,
        validate: bool = True
    ):
        mat = sparse.csr_matrix(matrix, dtype=float, copy=True)
        if mat.shape[0] != mat.shape[1]:
            raise ShapeError("square matrix", mat.shape, "weights matrix")
        mat.eliminate_zeros()
        mat.sum_duplicates()
        mat.sort_indices()

        n = mat.shape[0]
        labels = [str(i) for i in range(n)] if ids is None else [str(i) for i in ids]
        if len(labels) != n:
            raise ShapeError(n, len(labels), "unit identifiers")
        if len(set(labels)) != n:
            seen, dupes = set(), []
            for label in labels:
                if label in seen:
                    dupes.append(label)
                seen.add(label)
            raise IdMismatch("identifiers are not unique", extra=dupes)

        self._ids: Tuple[str, ...] = tuple(labels)
        if validate:
            self._validate(mat)

        for arr in (mat.data, mat.indices, mat.indptr):
            arr.setflags(write=False)

        self._matrix = mat
        self._normalization = Normalization(normalization)
        self._index: Dict[str, int] = {label: i for i, label in enumerate(labels)}
        self._lock = threading.Lock()
        self._eigenvalues: Optional[np.ndarray] = None
        self._spectral_radius: Optional[float] = None

    def _validate(self, mat: sparse.csr_matrix) -> None:
        diagonal = mat.diagonal()
        loops = np.flatnonzero(diagonal != 0)
        if loops.size:
            i = int(loops[0])
            raise InvalidWeight(self._ids[i], self._ids[i], float(diagonal[i]), "no unit is a neighbour of itself")
        bad = np.flatnonzero(~np.isfinite(mat.data) | (mat.data < 0))
        if bad.size:
            coo = mat.tocoo()
            pos = int(bad[0])
            raise InvalidWeight(
                self._ids[coo.row[pos]], self._ids[coo.col[pos]], float(coo.data[pos]),
                "weights must be finite and positive"
            )

    # =============================================
    # ALTERNATE CONSTRUCTORS
    # =============================================

    @classmethod
    def from_dense(
        cls,
        matrix: np.ndarray,
        ids: Optional[Sequence[Any]] = None,
        normalization: Union[str, Normalization] = Normalization.RAW
    ) -> "SpatialWeights":
        return cls(np.asarray(matrix, dtype=float), ids=ids, normalization=normalization)

    def _derive(self, matrix: sparse.spmatrix, normalization: Normalization, ids: Optional[Sequence[str]] = None):
        return SpatialWeights(matrix, ids=self._ids if ids is None else ids, normalization=normalization, validate=False)

    # =============================================
    # PROPERTIES
    # =============================================

    @property
    def matrix(self) -> sparse.csr_matrix:
        return self._matrix

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    @property
    def ids(self) -> List[str]:
        return list(self._ids)

    @property
    def nnz(self) -> int:
        return int(self._matrix.nnz)

    @property
    def normalization(self) -> Normalization:
        return self._normalization

    @property
    def is_normalized(self) -> bool:
        return self._normalization != Normalization.RAW

    @property
    def row_sums(self) -> np.ndarray:
        return np.asarray(self._matrix.sum(axis=1)).ravel()

    @property
    def s0(self) -> float:
        """Sum of all weights"""
        return float(self._matrix.sum())

    @property
    def islands(self) -> np.ndarray:
        return np.flatnonzero(np.diff(self._matrix.indptr) == 0)

    @property
    def has_islands(self) -> bool:
        return bool(self.islands.size)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Full (possibly complex) spectrum from a dense solve, cached"""
        with self._lock:
            if self._eigenvalues is None:
                dense = self.to_dense()
                if np.array_equal(dense, dense.T):
                    values = np.linalg.eigvalsh(dense).astype(complex)
                else:
                    values = np.linalg.eigvals(dense)
                self._eigenvalues = values
                logger.debug("eigenvalues_computed", n=self.n)
            return self._eigenvalues

    @property
    def spectral_radius(self) -> float:
        """Largest eigenvalue modulus, cached"""
        with self._lock:
            if self._spectral_radius is None:
                self._spectral_radius = _largest_eigenvalue(self._matrix)
            return self._spectral_radius

    def real_eigenvalue_range(self, dense_limit: Optional[int] = None) -> Tuple[float, float]:
        """
        Smallest and largest real eigenvalue of W.

        Uses the cached dense spectrum up to dense_limit units and ARPACK beyond.
        When no negative real eigenvalue exists, the lower end is -spectral_radius.
        """
        limit = config.estimation.eigen_logdet_limit if dense_limit is None else dense_limit
        if self.nnz == 0:
            raise NoConnectivity("eigenvalue range")
        if self.n <= limit:
            values = self.eigenvalues
            scale = max(float(np.max(np.abs(values))), 1.0)
            real = values.real[np.abs(values.imag) <= 1e-10 * scale]
            upper = float(real.max()) if real.size else self.spectral_radius
            lower = float(real.min()) if real.size else -self.spectral_radius
        else:
            upper = float(sparse_linalg.eigs(self._matrix, k=1, which="LR", return_eigenvectors=False)[0].real)
            lower = float(sparse_linalg.eigs(self._matrix, k=1, which="SR", return_eigenvectors=False)[0].real)
        if lower >= 0:
            lower = -self.spectral_radius
        return lower, upper

    # =============================================
    # CONVERSIONS
    # =============================================

    def index_of(self, unit_id: Any) -> int:
        key = str(unit_id)
        if key not in self._index:
            raise IdMismatch(f"unknown unit '{key}'", missing=[key])
        return self._index[key]

    def to_dense(self) -> np.ndarray:
        return self._matrix.toarray()

    def to_edges(self) -> List[Edge]:
        """Edges (src, dst, weight) ordered by row then column"""
        coo = self._matrix.tocoo()
        return [(self._ids[i], self._ids[j], float(w)) for i, j, w in zip(coo.row, coo.col, coo.data)]

    def reorder(self, ids: Sequence[Any]) -> "SpatialWeights":
        """Permute rows and columns so that position i holds ids[i]"""
        wanted = [str(i) for i in ids]
        missing = [i for i in wanted if i not in self._index]
        extra = sorted(set(self._ids) - set(wanted))
        if missing or extra or len(wanted) != self.n:
            raise IdMismatch("data and weights cover different units", missing=missing, extra=extra)
        if wanted == list(self._ids):
            return self
        order = np.array([self._index[i] for i in wanted])
        return self._derive(self._matrix[order][:, order], self._normalization, ids=wanted)

    def subset(self, indices: Sequence[int]) -> "SpatialWeights":
        """Weights restricted to the given units, normalization state reset to raw"""
        idx = np.asarray(indices, dtype=int)
        ids = [self._ids[i] for i in idx]
        return self._derive(self._matrix[idx][:, idx], Normalization.RAW, ids=ids)

    def drop_islands(self) -> Tuple["SpatialWeights", np.ndarray]:
        """
        Remove units without neighbours.

        Dropping units may create new islands among the remaining ones; those
        are kept and reported by detect_islands. A normalized matrix is
        re-normalized the same way after the drop.

        Returns:
            Tuple[SpatialWeights, np.ndarray]: Reduced weights and kept indices
        """
        keep = np.setdiff1d(np.arange(self.n), self.islands)
        if keep.size == self.n:
            return self, keep
        reduced = self.subset(keep)
        if self._normalization == Normalization.ROW:
            reduced = row_normalize(reduced)
        elif self._normalization == Normalization.EIGEN:
            reduced = eigen_normalize(reduced)
        logger.info("islands_dropped", dropped=int(self.n - keep.size), remaining=int(keep.size))
        return reduced, keep

    def infer_normalization(self, tol: Optional[float] = None) -> "SpatialWeights":
        """Mark a raw matrix whose non-island rows all sum to 1 as row-normalized"""
        if self._normalization != Normalization.RAW or self.nnz == 0:
            return self
        tolerance = config.weights.row_sum_tol * 10 if tol is None else tol
        sums = self.row_sums
        connected = np.diff(self._matrix.indptr) > 0
        if np.all(np.abs(sums[connected] - 1.0) <= tolerance):
            return self._derive(self._matrix, Normalization.ROW)
        return self

    def __repr__(self) -> str:
        return f"SpatialWeights(n={self.n}, nnz={self.nnz}, normalization={self._normalization.value})"


def _largest_eigenvalue(matrix: sparse.csr_matrix) -> float:
    """
    Spectral radius of a non-negative matrix.

    Power iteration runs on W + I so that bipartite structures (eigenvalues
    ±λ) still converge. The result is accepted only when the eigen-residual
    ‖Wv − λv‖ is within eigen_tol·λ; otherwise the dense solver (small n) or
    ARPACK takes over.
    """
    settings = config.weights
    n = matrix.shape[0]
    if matrix.nnz == 0:
        return 0.0

    v = np.full(n, 1.0 / np.sqrt(n))
    wv = matrix @ v
    estimate = float(v @ wv)
    for iteration in range(1, settings.power_iteration_max_iter + 1):
        shifted = wv + v
        v = shifted / np.linalg.norm(shifted)
        wv = matrix @ v
        current = float(v @ wv)
        if abs(current - estimate) <= settings.power_iteration_tol * max(abs(current), 1.0):
            residual = float(np.linalg.norm(wv - current * v))
            if current > 0 and residual <= settings.eigen_tol * current:
                logger.debug("power_iteration_converged", iterations=iteration, radius=current)
                return current
        estimate = current

    logger.debug("power_iteration_fallback", n=n)
    if n <= settings.dense_eigen_limit:
        return float(np.max(np.abs(np.linalg.eigvals(matrix.toarray()))))
    values = sparse_linalg.eigs(matrix, k=1, which="LM", return_eigenvectors=False)
    return float(np.abs(values[0]))


def _natural_order(labels: Iterable[str]) -> List[str]:
    unique = set(labels)
    try:
        return sorted(unique, key=lambda label: (float(label), label))
    except ValueError:
        return sorted(unique)


def _check_coordinates(coords: Any) -> np.ndarray:
    points = np.asarray(coords, dtype=float)
    if points.ndim != 2:
        raise ShapeError("(n, d) coordinates", points.shape, "coordinates")
    bad = np.flatnonzero(~np.isfinite(points).all(axis=1))
    if bad.size:
        raise InvalidCoordinates(bad.tolist())
    return points


# =============================================
# BUILDERS
# =============================================

def from_edge_list(
    pairs: Iterable[Sequence[Any]],
    symmetrize: bool = False,
    ids: Optional[Sequence[Any]] = None
) -> SpatialWeights:
    """
    Build raw weights from (src, dst) or (src, dst, weight) tuples.

    Args:
        pairs: Edges; a missing or None weight means 1 (contiguity)
        symmetrize: Add (dst, src) whenever (src, dst) is present and the reverse is not listed
        ids: Full unit list; defaults to the identifiers seen in pairs, in natural order

    Returns:
        SpatialWeights: Raw weights

    Raises:
        InvalidWeight: Self-loop with nonzero weight, or negative/non-finite weight
        DuplicateEdge: The same (src, dst) pair listed twice
        IdMismatch: An edge references a unit outside ids
    """
    edges: List[Tuple[str, str, float]] = []
    for pair in pairs:
        if len(pair) == 2:
            src, dst = pair
            weight = 1.0
        elif len(pair) == 3:
            src, dst, weight = pair
            weight = 1.0 if weight is None else float(weight)
        else:
            raise InvalidParameter("pairs", tuple(pair), "expected (src, dst) or (src, dst, weight)")
        edges.append((str(src), str(dst), weight))

    labels = [str(i) for i in ids] if ids is not None else _natural_order(
        [e[0] for e in edges] + [e[1] for e in edges]
    )
    index = {label: i for i, label in enumerate(labels)}
    unknown = sorted({lab for e in edges for lab in e[:2] if lab not in index})
    if unknown:
        raise IdMismatch("edges reference units outside the unit list", missing=unknown)

    entries: Dict[Tuple[int, int], float] = {}
    for src, dst, weight in edges:
        if not np.isfinite(weight) or weight < 0:
            raise InvalidWeight(src, dst, weight, "weights must be finite and non-negative")
        if src == dst:
            if weight != 0:
                raise InvalidWeight(src, dst, weight, "no unit is a neighbour of itself")
            continue
        key = (index[src], index[dst])
        if key in entries:
            raise DuplicateEdge(src, dst)
        entries[key] = weight

    if symmetrize:
        for (i, j), weight in list(entries.items()):
            entries.setdefault((j, i), weight)

    n = len(labels)
    rows = np.fromiter((k[0] for k in entries), dtype=int, count=len(entries))
    cols = np.fromiter((k[1] for k in entries), dtype=int, count=len(entries))
    data = np.fromiter(entries.values(), dtype=float, count=len(entries))
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    weights = SpatialWeights(matrix, ids=labels, normalization=Normalization.RAW, validate=False)
    logger.debug("weights_from_edges", n=n, edges=weights.nnz, symmetrize=symmetrize)
    return weights


def knn_weights(coords: Any, k: int, ids: Optional[Sequence[Any]] = None) -> SpatialWeights:
    """
    Binary k-nearest-neighbour weights.

    Neighbours come from a brute-force Euclidean scan in row blocks; equal
    distances are resolved towards the lower unit index. Coincident points are
    allowed and simply count as nearest neighbours.

    Raises:
        InvalidK: k < 1 or k >= n
        InvalidCoordinates: Non-finite coordinates
    """
    points = _check_coordinates(coords)
    n = points.shape[0]
    if not isinstance(k, (int, np.integer)) or k < 1 or k >= n:
        raise InvalidK(int(k), n)

    block = max(1, config.weights.knn_block_size)
    neighbours = np.empty((n, k), dtype=int)
    for start in range(0, n, block):
        stop = min(start + block, n)
        distances = cdist(points[start:stop], points)
        distances[np.arange(stop - start), np.arange(start, stop)] = np.inf
        neighbours[start:stop] = np.argsort(distances, axis=1, kind="stable")[:, :k]

    rows = np.repeat(np.arange(n), k)
    matrix = sparse.csr_matrix((np.ones(n * k), (rows, neighbours.ravel())), shape=(n, n))
    logger.debug("knn_weights_built", n=n, k=int(k))
    return SpatialWeights(matrix, ids=ids, normalization=Normalization.RAW, validate=False)


def inverse_distance_weights(
    coords: Any,
    alpha: float = 1.0,
    cutoff: float = np.inf,
    ids: Optional[Sequence[Any]] = None
) -> SpatialWeights:
    """
    Inverse-distance band weights w_ij = d_ij^(-alpha) for 0 < d_ij <= cutoff.

    Raises:
        InvalidParameter: alpha <= 0 or cutoff <= 0
        ZeroDistance: Two units share coordinates within the band
    """
    if not np.isfinite(alpha) or alpha <= 0:
        raise InvalidParameter("alpha", alpha, "decay exponent must be positive")
    if np.isnan(cutoff) or cutoff <= 0:
        raise InvalidParameter("cutoff", cutoff, "distance cutoff must be positive")
    points = _check_coordinates(coords)
    n = points.shape[0]
    labels = [str(i) for i in range(n)] if ids is None else [str(i) for i in ids]

    if np.isinf(cutoff):
        upper = np.triu_indices(n, k=1)
        pairs = np.column_stack(upper)
    else:
        pairs = cKDTree(points).query_pairs(r=float(cutoff), output_type="ndarray")
    if pairs.size == 0:
        return SpatialWeights(sparse.csr_matrix((n, n)), ids=labels, validate=False)

    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    distances = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
    coincident = np.flatnonzero(distances == 0)
    if coincident.size:
        i, j = pairs[coincident[0]]
        raise ZeroDistance(labels[i], labels[j])

    weights = distances ** (-float(alpha))
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    matrix = sparse.csr_matrix((np.concatenate([weights, weights]), (rows, cols)), shape=(n, n))
    logger.debug("inverse_distance_weights_built", n=n, pairs=int(pairs.shape[0]), alpha=alpha)
    return SpatialWeights(matrix, ids=labels, normalization=Normalization.RAW, validate=False)


def lattice_weights(nrows: int, ncols: int, contiguity: str = "rook") -> SpatialWeights:
    """
    Binary contiguity on a regular nrows×ncols grid, units numbered row-major.

    Args:
        nrows: Grid rows
        ncols: Grid columns
        contiguity: "rook" (shared edges) or "queen" (shared edges or corners)
    """
    if contiguity not in ("rook", "queen"):
        raise InvalidParameter("contiguity", contiguity, "expected 'rook' or 'queen'")
    if nrows < 1 or ncols < 1:
        raise InvalidParameter("shape", (nrows, ncols), "lattice needs at least one row and column")

    offsets = [(0, 1), (1, 0)]
    if contiguity == "queen":
        offsets += [(1, 1), (1, -1)]

    grid = np.arange(nrows * ncols).reshape(nrows, ncols)
    src, dst = [], []
    for dr, dc in offsets:
        r0, r1 = 0, nrows - dr
        c0, c1 = max(0, -dc), ncols - max(0, dc)
        a = grid[r0:r1, c0:c1].ravel()
        b = grid[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
        src.extend([a, b])
        dst.extend([b, a])
    rows = np.concatenate(src) if src else np.empty(0, dtype=int)
    cols = np.concatenate(dst) if dst else np.empty(0, dtype=int)
    n = nrows * ncols
    matrix = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    return SpatialWeights(matrix, normalization=Normalization.RAW, validate=False)


# =============================================
# NORMALIZATION AND PRODUCTS
# =============================================

def row_normalize(W: SpatialWeights) -> SpatialWeights:
    """Divide each row by its sum; island rows stay zero. Idempotent."""
    if W.normalization == Normalization.ROW:
        return W
    sums = W.row_sums
    scale = np.zeros_like(sums)
    np.divide(1.0, sums, out=scale, where=sums > 0)
    matrix = sparse.diags(scale) @ W.matrix
    return W._derive(matrix, Normalization.ROW)


def eigen_normalize(W: SpatialWeights) -> SpatialWeights:
    """
    Divide every weight by the largest eigenvalue modulus of W.

    Raises:
        NoConnectivity: W has no nonzero entry
    """
    if W.normalization == Normalization.EIGEN:
        return W
    if W.nnz == 0:
        raise NoConnectivity("eigen normalization")
    radius = W.spectral_radius
    logger.debug("eigen_normalize", n=W.n, spectral_radius=radius)
    return W._derive(W.matrix / radius, Normalization.EIGEN)


def normalize(W: SpatialWeights, how: Union[str, Normalization, None]) -> SpatialWeights:
    """Apply the named normalization; None or raw leaves W unchanged"""
    if how is None:
        return W
    target = Normalization(how)
    if target == Normalization.ROW:
        return row_normalize(W)
    if target == Normalization.EIGEN:
        return eigen_normalize(W)
    return W


def spatial_lag(W: SpatialWeights, X: Any) -> np.ndarray:
    """
    Spatial lag WX by sparse product.

    Raises:
        ShapeError: X does not have n rows
    """
    values = np.asarray(X, dtype=float)
    if values.ndim not in (1, 2) or values.shape[0] != W.n:
        raise ShapeError(W.n, values.shape, "spatial lag operand")
    return np.asarray(W.matrix @ values)


def detect_islands(W: SpatialWeights) -> IslandReport:
    """Units whose weights row has no nonzero entry"""
    indices = W.islands
    if indices.size:
        logger.info("islands_detected", count=int(indices.size), n=W.n)
    return IslandReport(
        island_indices=indices.tolist(),
        island_ids=[W.ids[i] for i in indices],
        count=int(indices.size),
        n=W.n,
    )
