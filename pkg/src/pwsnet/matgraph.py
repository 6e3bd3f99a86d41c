"""Dense symmetric eigensolvers and graph-Laplacian construction.

Everything here is small (N <= a few hundred) and deterministic: the
symmetric eigenproblem is solved by cyclic Jacobi rotations with a fixed
sweep order, so repeated calls give bit-identical results on a platform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConnectivityError, ParameterError, SymmetryError
from .rng import make_generator, mix_seed

SYM_ATOL = 1e-12
ROWSUM_ATOL = 1e-10
ER_RETRY_CAP = 64


def require_symmetric(A: np.ndarray, atol: float = SYM_ATOL) -> np.ndarray:
    """Return A as a float array, raising SymmetryError if A != A^T."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {A.shape}")
    dev = np.max(np.abs(A - A.T)) if A.size else 0.0
    if dev > atol:
        raise SymmetryError(f"matrix is not symmetric: max |A - A^T| = {dev:.3e} > {atol:.1e}")
    return A


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a symmetric matrix.

    eigenvalues are ascending; eigenvectors holds the matching orthonormal
    eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def _jacobi_rotate(A: np.ndarray, V: np.ndarray, p: int, q: int) -> None:
    """One Jacobi rotation zeroing A[p, q], updating A and V in place."""
    apq = A[p, q]
    if apq == 0.0:
        return
    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
    # smaller-angle root, standard stable formula
    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0.0 else 1.0
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    rot_p = c * A[:, p] - s * A[:, q]
    rot_q = s * A[:, p] + c * A[:, q]
    A[:, p], A[:, q] = rot_p, rot_q
    A[p, :], A[q, :] = c * A[p, :] - s * A[q, :], s * A[p, :] + c * A[q, :]
    V[:, p], V[:, q] = c * V[:, p] - s * V[:, q], s * V[:, p] + c * V[:, q]


def sym_eigen(A: np.ndarray, sweeps: int = 64) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix via cyclic Jacobi.

    The sweep order is fixed (row-cyclic over the upper triangle), so the
    result is reproducible. Raises SymmetryError on non-symmetric input.
    """
    A = require_symmetric(A)
    n = A.shape[0]
    W = A.copy()
    V = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 0.0)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(W, -1) ** 2))
        if off <= 1e-15 * n * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(W[p, q]) > 1e-18 * scale:
                    _jacobi_rotate(W, V, p, q)
    eigvals = np.diag(W).copy()
    order = np.argsort(eigvals, kind="stable")
    return Spectrum(eigenvalues=eigvals[order], eigenvectors=V[:, order])


def spectral_norm(A: np.ndarray) -> float:
    """Induced 2-norm (largest singular value), via sqrt(lambda_max(A^T A))."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {A.shape}")
    if not np.any(A):
        return 0.0
    gram = A.T @ A
    lam = sym_eigen(0.5 * (gram + gram.T)).lambda_max
    return float(np.sqrt(max(lam, 0.0)))


@dataclass
class Laplacian:
    """Symmetric Laplacian of an undirected unweighted graph.

    Off-diagonal entries are 0 or -1; rows sum to zero; the ascending
    spectrum is computed lazily and cached.
    """

    matrix: np.ndarray
    retries: int = 0  # resamples needed for random constructions
    _spectrum: Spectrum | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.matrix = require_symmetric(self.matrix)
        M = self.matrix
        rowsums = np.abs(M.sum(axis=1))
        if np.max(rowsums, initial=0.0) > ROWSUM_ATOL:
            raise ParameterError(f"Laplacian rows must sum to 0, worst residual {rowsums.max():.3e}")
        off = M[~np.eye(self.N, dtype=bool)]
        if not np.all((off == 0.0) | (off == -1.0)):
            raise ParameterError("off-diagonal Laplacian entries must be 0 or -1")

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> Spectrum:
        if self._spectrum is None:
            self._spectrum = sym_eigen(self.matrix)
        return self._spectrum

    @property
    def lambda2(self) -> float:
        return float(self.spectrum.eigenvalues[1])

    def is_connected(self, tol: float = 1e-9) -> bool:
        return self.lambda2 > tol

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as 0-indexed (i, j) pairs with i < j."""
        i_idx, j_idx = np.nonzero(np.triu(self.matrix, 1) == -1.0)
        return list(zip(i_idx.tolist(), j_idx.tolist()))


def laplacian_from_adjacency(adj: np.ndarray, retries: int = 0) -> Laplacian:
    adj = np.asarray(adj, dtype=float)
    deg = adj.sum(axis=1)
    return Laplacian(np.diag(deg) - adj, retries=retries)


def build_ring_k_nearest(N: int, k: int) -> Laplacian:
    """Ring of N nodes, each adjacent to its k nearest neighbours per side."""
    if N < 2:
        raise ParameterError(f"ring needs N >= 2, got {N}")
    if not 1 <= k <= (N - 1) // 2:
        raise ParameterError(f"k must be in [1, floor((N-1)/2)] = [1, {(N - 1) // 2}], got {k}")
    adj = np.zeros((N, N))
    for i in range(N):
        for d in range(1, k + 1):
            adj[i, (i + d) % N] = 1.0
            adj[i, (i - d) % N] = 1.0
    return laplacian_from_adjacency(adj)


def build_path(N: int) -> Laplacian:
    """Path (chain) graph on N nodes."""
    if N < 2:
        raise ParameterError(f"path needs N >= 2, got {N}")
    adj = np.zeros((N, N))
    idx = np.arange(N - 1)
    adj[idx, idx + 1] = 1.0
    adj[idx + 1, idx] = 1.0
    return laplacian_from_adjacency(adj)


def build_complete(N: int) -> Laplacian:
    if N < 2:
        raise ParameterError(f"complete graph needs N >= 2, got {N}")
    return laplacian_from_adjacency(np.ones((N, N)) - np.eye(N))


def build_single_link(N: int, i: int = 0, j: int = 1) -> Laplacian:
    """Laplacian of the graph with a single edge (i, j); disconnected for N > 2.

    Used as the sparsest possible second coupling layer.
    """
    if N < 2 or not (0 <= i < N and 0 <= j < N and i != j):
        raise ParameterError(f"invalid single link ({i}, {j}) for N = {N}")
    adj = np.zeros((N, N))
    adj[i, j] = adj[j, i] = 1.0
    return laplacian_from_adjacency(adj)


def build_erdos_renyi(N: int, p: float, seed: int) -> Laplacian:
    """Erdos-Renyi G(N, p), resampled (sub-seed incremented) until connected.

    Deterministic given (N, p, seed). Raises ConnectivityError after
    ER_RETRY_CAP failed draws; the successful Laplacian records how many
    resamples were needed.
    """
    if N < 2:
        raise ParameterError(f"ER graph needs N >= 2, got {N}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must be in [0, 1], got {p}")
    for retry in range(ER_RETRY_CAP + 1):
        rng = make_generator(mix_seed(seed, retry))
        upper = rng.random((N, N)) < p
        adj = np.triu(upper, 1).astype(float)
        adj = adj + adj.T
        lap = laplacian_from_adjacency(adj, retries=retry)
        if lap.is_connected():
            return lap
    raise ConnectivityError(
        f"ER(N={N}, p={p}, seed={seed}) still disconnected after {ER_RETRY_CAP} resamples"
    )


def save_edge_list(lap: Laplacian, path) -> None:
    """Plain-text edge list: first line `N <count>`, then `i j` per edge."""
    lines = [f"N {lap.N}"]
    lines += [f"{i} {j}" for i, j in lap.edges()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_edge_list(path) -> Laplacian:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("N "):
        raise ParameterError(f"{path}: expected first line 'N <count>'")
    N = int(lines[0].split()[1])
    adj = np.zeros((N, N))
    for ln in lines[1:]:
        i, j = (int(tok) for tok in ln.split())
        adj[i, j] = adj[j, i] = 1.0
    return laplacian_from_adjacency(adj)
