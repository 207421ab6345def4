"""Dense-matrix numerics used across the simulator.

Everything here works on small dense matrices (n <= 8 in the default
setup) and is pure: matrix-exponential discretization of continuous
dynamics, a fixed-point solver for the discrete algebraic Riccati
equation, descending-sorted symmetric/SVD decompositions, and a generic
water-filling bisection.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError

SERIES_TOL = 1e-12


def expm(m: np.ndarray, tol: float = SERIES_TOL, max_terms: int = 80) -> np.ndarray:
    """Matrix exponential via scaled Taylor series.

    The argument is pre-scaled by a power of two so the series converges
    quickly, summed until the next term falls below ``tol`` relative to the
    partial sum, then squared back. Exact (up to roundoff) for nilpotent
    arguments, where the series terminates.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix exponential requires a square matrix")
    norm = np.linalg.norm(m, 1)
    squarings = int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0
    scaled = m / (2.0 ** squarings)
    n = m.shape[0]
    result = np.eye(n)
    term = np.eye(n)
    for j in range(1, max_terms + 1):
        term = term @ scaled / j
        result = result + term
        if np.linalg.norm(term, "fro") <= tol * np.linalg.norm(result, "fro"):
            break
    else:
        raise ConvergenceError("matrix exponential series did not converge")
    for _ in range(squarings):
        result = result @ result
    return result


def discretize(a_cont: np.ndarray, b_cont: np.ndarray, ts: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold discretization of ``dx/dt = A x + B u``.

    Returns ``(A_d, B_d)`` with ``A_d = exp(A*ts)`` and
    ``B_d = (integral_0^ts exp(A*a) da) B``, both evaluated through one
    augmented-block matrix exponential so the integral inherits the series
    tolerance of :func:`expm`.
    """
    a_cont = np.asarray(a_cont, dtype=float)
    b_cont = np.asarray(b_cont, dtype=float)
    if a_cont.ndim != 2 or a_cont.shape[0] != a_cont.shape[1]:
        raise ValueError("continuous-time A must be square")
    if b_cont.ndim != 2 or b_cont.shape[0] != a_cont.shape[0]:
        raise ValueError("continuous-time B must have as many rows as A")
    if ts <= 0:
        raise ValueError("sample time must be positive")
    n, m = b_cont.shape
    block = np.zeros((n + m, n + m))
    block[:n, :n] = a_cont * ts
    block[:n, n:] = b_cont * ts
    exp_block = expm(block)
    return exp_block[:n, :n], exp_block[:n, n:]


def _check_stabilizable(a: np.ndarray, b: np.ndarray) -> None:
    """PBH test: every eigenvalue on or outside the unit circle must be
    controllable."""
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a, "fro")))
    for lam in np.linalg.eigvals(a):
        if abs(lam) < 1.0 - 1e-9:
            continue
        pencil = np.hstack([a - lam * np.eye(n), b.astype(complex)])
        smallest = np.linalg.svd(pencil, compute_uv=False)[-1]
        if smallest <= 1e-9 * scale:
            raise ConvergenceError(
                f"(A, B) is not stabilizable: uncontrollable eigenvalue {lam:.6g}"
            )


def solve_dare(
    a: np.ndarray,
    b: np.ndarray,
    q: np.ndarray,
    r: np.ndarray,
    *,
    step_tol: float = 1e-12,
    max_iter: int = 10_000,
) -> np.ndarray:
    """Solve ``A'SA - S - A'SB (B'SB+R)^-1 B'SA + Q = 0`` for S.

    Fixed-point iteration of the Riccati recursion starting from ``S = Q``,
    declared converged when successive iterates differ by at most
    ``step_tol`` (relative to ``|S|_F`` once that exceeds one). The residual
    is verified explicitly before returning; failure to converge or an
    out-of-tolerance residual raises, never returns silently.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError("A must be square and B must have matching rows")
    if q.shape != (n, n) or r.shape != (b.shape[1], b.shape[1]):
        raise ValueError("Q must be n x n and R must be m x m")
    np.linalg.cholesky(r)  # R must be positive definite
    _check_stabilizable(a, b)

    s = 0.5 * (q + q.T)
    for _ in range(max_iter):
        bs = b.T @ s
        innovation = bs @ b + r
        rhs = bs @ a
        s_next = a.T @ s @ a - rhs.T @ np.linalg.solve(innovation, rhs) + q
        s_next = 0.5 * (s_next + s_next.T)
        delta = np.linalg.norm(s_next - s, "fro")
        s = s_next
        if delta <= step_tol * max(1.0, np.linalg.norm(s, "fro")):
            break
    else:
        raise ConvergenceError(
            f"Riccati iteration did not converge within {max_iter} steps"
        )

    bs = b.T @ s
    rhs = bs @ a
    residual = a.T @ s @ a - s - rhs.T @ np.linalg.solve(bs @ b + r, rhs) + q
    if np.linalg.norm(residual, "fro") > 1e-8 * max(1.0, np.linalg.norm(s, "fro")):
        raise ConvergenceError("Riccati residual exceeds tolerance after convergence")
    return s


class EigDecomposition(NamedTuple):
    """Symmetric eigendecomposition with eigenvalues sorted descending."""

    basis: np.ndarray
    values: np.ndarray


class SvdDecomposition(NamedTuple):
    """SVD ``M = left @ diag(singulars) @ right^H``, singulars descending."""

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray


def eigh_sorted(m: np.ndarray) -> EigDecomposition:
    """Eigendecomposition of a symmetric PSD matrix, sorted descending.

    Tiny negative eigenvalues from roundoff are clipped to zero; a clearly
    indefinite input is rejected.
    """
    sym = 0.5 * (np.asarray(m, dtype=float) + np.asarray(m, dtype=float).T)
    values, basis = np.linalg.eigh(sym)
    scale = max(1.0, float(np.max(np.abs(values))))
    if values[0] < -1e-6 * scale:
        raise ValueError("matrix is not positive semidefinite")
    values = np.maximum(values[::-1], 0.0)
    basis = np.ascontiguousarray(basis[:, ::-1])
    return EigDecomposition(basis, values)


def svd_sorted(m: np.ndarray) -> SvdDecomposition:
    """Full SVD with singular values in descending order (numpy convention)."""
    left, singulars, right_h = np.linalg.svd(np.asarray(m), full_matrices=True)
    return SvdDecomposition(left, singulars, right_h.conj().T)


_LEVEL_MIN = 2.0 ** -900
_LEVEL_MAX = 2.0 ** 900


def waterfill(
    allocate: Callable[[float], np.ndarray],
    budget: float,
    *,
    rel_tol: float = 1e-9,
    max_iter: int = 400,
) -> float:
    """Find the water level at which the total allocation meets the budget.

    ``allocate`` maps a positive level parameter to the vector of per-mode
    allocations; their sum must be continuous and monotone in the level
    (either direction). The bracket is expanded geometrically from 1.0 and
    then bisected on a log scale until ``|sum - budget| <= rel_tol*budget``.

    Raises :class:`ConvergenceError` when no level inside the searchable
    range reaches the budget.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")

    def total(level: float) -> float:
        return float(np.sum(allocate(level)))

    tol = rel_tol * budget
    lo = hi = 1.0
    t_lo = t_hi = total(1.0)
    if abs(t_lo - budget) <= tol:
        return 1.0
    while (t_lo - budget) * (t_hi - budget) > 0:
        moved = False
        if lo > _LEVEL_MIN:
            lo = max(lo / 4.0, _LEVEL_MIN)
            t_lo = total(lo)
            moved = True
            if (t_lo - budget) * (t_hi - budget) <= 0:
                break
        if hi < _LEVEL_MAX:
            hi = min(hi * 4.0, _LEVEL_MAX)
            t_hi = total(hi)
            moved = True
        if not moved:
            raise ConvergenceError("water-filling budget is not reachable at any level")
    increasing = t_hi >= t_lo
    for _ in range(max_iter):
        mid = float(np.sqrt(lo * hi))
        t_mid = total(mid)
        if abs(t_mid - budget) <= tol:
            return mid
        if (t_mid < budget) == increasing:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError("water-filling bisection did not converge")
