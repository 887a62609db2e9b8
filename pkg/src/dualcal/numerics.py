"""Small dense linear-algebra kernels used by the rest of the package.

Symmetric matrices are plain numpy arrays; ``symmetrize`` makes the
symmetry exact after assembly.  Sizes stay around 133, so dense LAPACK
routines are the right tool.
"""

import numpy as np

from .errors import EigenConvergenceError, RankDeficientError


def symmetrize(M):
    """Exactly symmetric copy of M (averages with the transpose)."""
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def sym_eig(M):
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues descending, eigenvectors as columns) with
    M = V diag(lam) V^T and V^T V = I.  Raises EigenConvergenceError if
    the underlying solver fails.
    """
    M = symmetrize(M)
    try:
        lam, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        # LAPACK iteration cap: 30*n implicit QR sweeps
        raise EigenConvergenceError(30 * M.shape[0]) from exc
    return lam[::-1].copy(), V[:, ::-1].copy()


def svd3(M):
    """SVD of a 3x3 matrix via the eigendecomposition of M^T M.

    Returns (U, s, V) with M = U diag(s) V^T, U and V orthogonal and s
    nonnegative descending.  Columns of U with negligible singular value
    are completed orthonormally (rank-deficient M), so U stays exactly
    orthogonal up to roundoff.
    """
    M = np.asarray(M, dtype=float)
    lam, V = sym_eig(M.T @ M)
    s = np.sqrt(np.clip(lam, 0.0, None))
    scale = max(s[0], 1.0)
    U = np.zeros((3, 3))
    filled = []
    for i in range(3):
        u = M @ V[:, i]
        if s[i] > 1e-13 * scale:
            u = u / s[i]
            for j in filled:  # re-orthogonalize against earlier columns
                u -= (U[:, j] @ u) * U[:, j]
            U[:, i] = u / np.linalg.norm(u)
            filled.append(i)
    missing = [i for i in range(3) if i not in filled]
    if len(missing) == 1:
        # cross product of the two unit columns completes the basis
        i = missing[0]
        U[:, i] = np.cross(U[:, (i + 1) % 3], U[:, (i + 2) % 3])
    elif len(missing) == 2:
        base = U[:, filled[0]] if filled else np.array([1.0, 0.0, 0.0])
        aux = np.array([1.0, 0.0, 0.0])
        if abs(base @ aux) > 0.9:
            aux = np.array([0.0, 1.0, 0.0])
        u1 = np.cross(base, aux)
        u1 /= np.linalg.norm(u1)
        u2 = np.cross(base, u1)
        U[:, missing[0]] = u1
        U[:, missing[1]] = u2
    elif len(missing) == 3:
        U = np.eye(3)
    return U, s, V


def project_rotation(M):
    """Nearest rotation to a 3x3 matrix (orthogonal Procrustes with
    determinant repair)."""
    U, _, V = svd3(M)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ V.T))])
    return U @ D @ V.T


def numeric_rank(singular_values, rel_threshold=1e-8):
    s = np.asarray(singular_values)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > s[0] * rel_threshold))


def solve_damped_normal(J, e, damping):
    """Solve (J^T J + damping*I) d = J^T e by Cholesky.

    J must have at least as many rows as columns.  With damping == 0 a
    rank-deficient J raises RankDeficientError carrying the numeric rank.
    """
    J = np.asarray(J, dtype=float)
    e = np.asarray(e, dtype=float)
    rows, cols = J.shape
    if rows < cols:
        raise ValueError(f"J has fewer rows ({rows}) than columns ({cols})")
    if damping < 0.0:
        raise ValueError("damping must be nonnegative")
    if damping == 0.0:
        sv = np.linalg.svd(J, compute_uv=False)
        rank = numeric_rank(sv, 1e-12)
        if rank < cols:
            raise RankDeficientError(rank, cols)
    N = J.T @ J + damping * np.eye(cols)
    rhs = J.T @ e
    try:
        L = np.linalg.cholesky(N)
    except np.linalg.LinAlgError:
        sv = np.linalg.svd(J, compute_uv=False)
        raise RankDeficientError(numeric_rank(sv, 1e-12), cols) from None
    y = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, y)
