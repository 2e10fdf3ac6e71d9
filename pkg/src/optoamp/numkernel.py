"""Small dense complex linear algebra and 1-D numerics.

Every function is pure and accepts stacks of matrices (leading batch axes)
wherever that makes sense, so frequency sweeps and stability grids run as a
handful of array operations instead of Python loops.
"""
import numpy as np

from .errors import GridTooSmall, NoConvergence, NonFiniteValue, SingularMatrix

PIVOT_RTOL = 1e-14
DK_TOL = 1e-12
DK_MAX_ITER = 500


def _as_finite(a, name):
    arr = np.asarray(a)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} contains NaN or Inf")
    return arr


def lu_solve(A, B):
    """Solve ``A X = B`` by Gaussian elimination with partial pivoting.

    Parameters
    ----------
    A : array_like, shape (..., n, n)
    B : array_like, shape (..., n, m)
        Broadcast against the batch axes of `A`.

    Returns
    -------
    X : ndarray of complex128, shape (..., n, m)

    Raises
    ------
    SingularMatrix
        If a pivot falls below ``1e-14 * max|A|`` (per matrix in the batch).
    """
    A = _as_finite(A, "A").astype(np.complex128)
    B = _as_finite(B, "B").astype(np.complex128)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    n = A.shape[-1]
    if B.ndim < 2 or B.shape[-2] != n:
        raise ValueError(f"B shape {B.shape} incompatible with A shape {A.shape}")

    batch = np.broadcast_shapes(A.shape[:-2], B.shape[:-2])
    A = np.broadcast_to(A, batch + (n, n)).reshape(-1, n, n).copy()
    B = np.broadcast_to(B, batch + B.shape[-2:]).reshape(-1, n, B.shape[-1]).copy()
    idx = np.arange(A.shape[0])

    threshold = PIVOT_RTOL * np.abs(A).max(axis=(1, 2))
    for k in range(n):
        p = k + np.argmax(np.abs(A[:, k:, k]), axis=1)
        swap = p != k
        if np.any(swap):
            rows_k, rows_p = A[idx, k].copy(), A[idx, p].copy()
            A[idx, k], A[idx, p] = rows_p, rows_k
            rhs_k, rhs_p = B[idx, k].copy(), B[idx, p].copy()
            B[idx, k], B[idx, p] = rhs_p, rhs_k
        pivot = A[:, k, k]
        bad = ~(np.abs(pivot) >= threshold) | (threshold == 0)
        if np.any(bad):
            first = int(np.flatnonzero(bad)[0])
            where = ""
            if batch:
                pos = tuple(int(i) for i in np.unravel_index(first, batch))
                where = f" (batch index {pos})"
            raise SingularMatrix(f"pivot {k} below relative threshold {PIVOT_RTOL:g}{where}")
        factors = A[:, k + 1:, k] / pivot[:, None]
        A[:, k + 1:, k:] -= factors[:, :, None] * A[:, None, k, k:]
        B[:, k + 1:, :] -= factors[:, :, None] * B[:, None, k, :]

    X = np.empty_like(B)
    for k in range(n - 1, -1, -1):
        acc = B[:, k, :] - np.einsum("bj,bjm->bm", A[:, k, k + 1:], X[:, k + 1:, :])
        X[:, k, :] = acc / A[:, k, k][:, None]
    return X.reshape(batch + X.shape[-2:])


def inverse(A):
    """Matrix inverse via :func:`lu_solve` against the identity."""
    A = np.asarray(A)
    n = A.shape[-1]
    return lu_solve(A, np.eye(n, dtype=np.complex128))


def charpoly4(A):
    """Monic coefficients ``[1, c3, c2, c1, c0]`` of ``det(z I - A)`` for 4x4 `A`.

    Uses the principal-minor expansion: the coefficient of ``z**(4-k)`` is
    ``(-1)**k`` times the sum of the k-by-k principal minors.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.shape[-2:] != (4, 4):
        raise ValueError(f"expected 4x4 matrices, got {A.shape}")
    a = lambda i, j: A[..., i, j]  # noqa: E731

    def minor2(i, j):
        return a(i, i) * a(j, j) - a(i, j) * a(j, i)

    def minor3(i, j, k):
        return (a(i, i) * (a(j, j) * a(k, k) - a(j, k) * a(k, j))
                - a(i, j) * (a(j, i) * a(k, k) - a(j, k) * a(k, i))
                + a(i, k) * (a(j, i) * a(k, j) - a(j, j) * a(k, i)))

    trace = a(0, 0) + a(1, 1) + a(2, 2) + a(3, 3)
    m2 = (minor2(0, 1) + minor2(0, 2) + minor2(0, 3)
          + minor2(1, 2) + minor2(1, 3) + minor2(2, 3))
    m3 = minor3(0, 1, 2) + minor3(0, 1, 3) + minor3(0, 2, 3) + minor3(1, 2, 3)
    # Laplace expansion of the full determinant along row 0
    det = (a(0, 0) * minor3(1, 2, 3)
           - a(0, 1) * _cofactor3(A, 1, (0, 2, 3))
           + a(0, 2) * _cofactor3(A, 1, (0, 1, 3))
           - a(0, 3) * _cofactor3(A, 1, (0, 1, 2)))
    one = np.ones_like(trace)
    return np.stack([one, -trace, m2, -m3, det], axis=-1)


def _cofactor3(A, row0, cols):
    """Determinant of rows (row0, row0+1, row0+2) and the given columns."""
    r = (row0, row0 + 1, row0 + 2)
    m = lambda i, j: A[..., r[i], cols[j]]  # noqa: E731
    return (m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)))


def _polyval(coeffs, z):
    acc = np.ones_like(z)
    for k in range(1, coeffs.shape[-1]):
        acc = acc * z + coeffs[..., k, None]
    return acc


def _polyder_val(coeffs, z):
    deg = coeffs.shape[-1] - 1
    acc = deg * np.ones_like(z)
    for k in range(1, deg):
        acc = acc * z + (deg - k) * coeffs[..., k, None]
    return acc


def durand_kerner(coeffs, tol=DK_TOL, max_iter=DK_MAX_ITER):
    """Simultaneous iteration for all roots of monic polynomials.

    Parameters
    ----------
    coeffs : array_like, shape (..., n+1)
        Monic coefficients, highest degree first.

    Returns
    -------
    roots : ndarray, shape (..., n)
    converged : ndarray of bool, shape (...)
        True once every correction dropped below ``tol`` times the root
        magnitude (floored at 1).

    Each root gets one Newton polish step afterwards, kept only where it
    lowers ``|p(z)|``.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    deg = coeffs.shape[-1] - 1
    batch = coeffs.shape[:-1]
    c = coeffs.reshape(-1, deg + 1)

    # Fujiwara bound around the root centroid
    centre = -c[:, 1] / deg
    mags = [np.abs(c[:, k]) ** (1.0 / k) for k in range(1, deg)]
    mags.append(np.abs(c[:, deg] / 2) ** (1.0 / deg))
    radius = 2 * np.max(np.stack(mags), axis=0)
    radius = np.where(radius > 0, radius, 1.0)
    angles = 2 * np.pi * np.arange(deg) / deg + 0.4
    z = centre[:, None] + radius[:, None] * np.exp(1j * angles)[None, :]

    active = np.ones(c.shape[0], dtype=bool)
    converged = np.zeros(c.shape[0], dtype=bool)
    off_diag = ~np.eye(deg, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        za, ca = z[active], c[active]
        diffs = za[:, :, None] - za[:, None, :]
        denom = np.prod(np.where(off_diag, diffs, 1.0), axis=2)
        # coincident iterates: nudge instead of dividing by zero
        denom = np.where(denom == 0, 1e-300, denom)
        step = _polyval(ca, za) / denom
        za = za - step
        z[active] = za
        done = np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(za)), axis=1)
        ids = np.flatnonzero(active)
        converged[ids[done]] = True
        active[ids[done]] = False

    p = _polyval(c, z)
    dp = _polyder_val(c, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        polished = z - p / dp
    better = np.isfinite(polished) & (np.abs(_polyval(c, polished)) < np.abs(p))
    z = np.where(better, polished, z)
    return z.reshape(batch + (deg,)), converged.reshape(batch)


def _eigen_residual_ok(A, roots):
    """Check ``|det(A - lambda I)| <= 1e-8 * scale**4`` for every root."""
    scale = np.abs(A).max(axis=(-2, -1))
    coeffs = charpoly4(A)
    resid = np.abs(_polyval(coeffs.reshape(-1, 5), roots.reshape(-1, 4))).reshape(roots.shape)
    return np.all(resid <= 1e-8 * np.maximum(scale, 1e-300)[..., None] ** 4, axis=-1)


def quartic_eigenvalues_batch(A, tol=DK_TOL, max_iter=DK_MAX_ITER):
    """Eigenvalues of a stack of 4x4 matrices, with a per-matrix success mask.

    A matrix counts as solved when the iteration met `tol`, or when it ran
    out of iterations but every root still satisfies the determinant
    residual bound (multiple roots converge only linearly and stall near
    ``sqrt(eps)`` in the correction size).
    """
    A = _as_finite(A, "A").astype(np.complex128)
    roots, converged = durand_kerner(charpoly4(A), tol=tol, max_iter=max_iter)
    ok = converged | _eigen_residual_ok(A, roots)
    return roots, ok


def quartic_eigenvalues(A, tol=DK_TOL, max_iter=DK_MAX_ITER):
    """The four eigenvalues of a 4x4 complex matrix.

    Roots of the characteristic polynomial by Durand-Kerner iteration.
    Order is deterministic for identical input but otherwise unspecified.

    Raises
    ------
    NoConvergence
        If the iteration does not settle within `max_iter` steps.
    """
    A = np.asarray(A)
    if A.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {A.shape}")
    roots, ok = quartic_eigenvalues_batch(A, tol=tol, max_iter=max_iter)
    if not ok:
        raise NoConvergence(f"Durand-Kerner iteration did not converge in {max_iter} steps")
    return roots


def unwrap_phase(theta):
    """Remove 2*pi jumps so successive differences lie in (-pi, pi]."""
    theta = _as_finite(theta, "theta").astype(float)
    if theta.ndim != 1 or theta.size == 0:
        raise ValueError("theta must be a non-empty 1-D sequence")
    d = np.diff(theta)
    # wrap into (-pi, pi]
    wrapped = np.pi - np.mod(np.pi - d, 2 * np.pi)
    jumps = np.round((wrapped - d) / (2 * np.pi))
    correction = 2 * np.pi * np.concatenate(([0.0], np.cumsum(jumps)))
    return theta + correction


def central_diff(x, y):
    """Derivative dy/dx from three-point Lagrange differences.

    Interior points reduce to the centred difference
    ``(y[i+1] - y[i-1]) / (x[i+1] - x[i-1])`` on uniform grids; the two
    endpoints use one-sided three-point stencils. Exact for polynomials of
    degree <= 2.
    """
    x = _as_finite(x, "x").astype(float)
    y = _as_finite(y, "y")
    if x.ndim != 1 or y.shape[:1] != x.shape:
        raise ValueError("x and y must be 1-D sequences of equal length")
    if x.size < 3:
        raise GridTooSmall(f"need at least 3 points, got {x.size}")
    h = np.diff(x)
    if np.any(h <= 0):
        raise ValueError("x must be strictly increasing")

    out = np.empty(y.shape, dtype=np.result_type(y, float))
    hl, hr = h[:-1], h[1:]
    out[1:-1] = (-hr / (hl * (hl + hr)) * y[:-2]
                 + (hr - hl) / (hl * hr) * y[1:-1]
                 + hl / (hr * (hl + hr)) * y[2:])
    h0, h1 = h[0], h[1]
    out[0] = (-(2 * h0 + h1) / (h0 * (h0 + h1)) * y[0]
              + (h0 + h1) / (h0 * h1) * y[1]
              - h0 / (h1 * (h0 + h1)) * y[2])
    g0, g1 = h[-1], h[-2]
    out[-1] = ((2 * g0 + g1) / (g0 * (g0 + g1)) * y[-1]
               - (g0 + g1) / (g0 * g1) * y[-2]
               + g0 / (g1 * (g0 + g1)) * y[-3])
    return out
