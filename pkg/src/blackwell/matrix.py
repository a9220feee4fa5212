"""One-round zero-sum games and the convex separation primitive.

The matrix game is solved with a dense tableau simplex using Bland's rule.
The same code runs over ``Fraction`` (exact mode) or ``float``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

INSIDE = "inside"


@dataclass(frozen=True)
class MatrixSolution:
    value: object
    row_strategy: tuple
    col_strategy: tuple
    certificate_gap: object
    lower: object  # worst case of row_strategy over columns
    upper: object  # worst case of col_strategy over rows


def _coerce(payoffs, exact: bool):
    rows = [list(r) for r in payoffs]
    if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("payoff matrix must be a nonempty rectangle")
    for r in rows:
        for v in r:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"non-finite payoff entry {v!r}")
    if exact:
        return [[v if isinstance(v, Fraction) else Fraction(v) for v in r] for r in rows]
    return [[float(v) for v in r] for r in rows]


def _simplex_max(A, eps):
    """Maximize sum(y) s.t. A y <= 1, y >= 0, for A with positive entries.

    Returns (y, duals, optimum). Bland's rule: lowest-index entering column,
    lowest-index leaving variable among ratio ties.
    """
    m, n = len(A), len(A[0])
    one, zero = (A[0][0] * 0 + 1), A[0][0] * 0
    # tableau rows: coefficients over y_0..y_{n-1}, s_0..s_{m-1}, rhs
    T = [list(A[i]) + [one if k == i else zero for k in range(m)] + [one] for i in range(m)]
    obj = [one] * n + [zero] * m + [zero]  # reduced costs; obj[-1] = -z
    basis = [n + i for i in range(m)]
    width = n + m
    while True:
        enter = next((j for j in range(width) if obj[j] > eps), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = T[i][enter]
            if a > eps:
                ratio = T[i][-1] / a
                if (best is None or ratio < best - eps
                        or (abs(ratio - best) <= eps and basis[i] < basis[leave])):
                    leave, best = i, ratio
        if leave is None:  # cannot happen with positive A
            raise RuntimeError("unbounded matrix-game LP")
        piv = T[leave][enter]
        prow = [v / piv for v in T[leave]]
        T[leave] = prow
        for i in range(m):
            if i != leave:
                f = T[i][enter]
                if f != 0:
                    row = T[i]
                    T[i] = [row[k] - f * prow[k] for k in range(width + 1)]
        f = obj[enter]
        obj = [obj[k] - f * prow[k] for k in range(width + 1)]
        basis[leave] = enter
    y = [zero] * n
    for i, b in enumerate(basis):
        if b < n:
            y[b] = T[i][-1]
    duals = [-obj[n + i] for i in range(m)]
    return y, duals, -obj[-1]


def solve_matrix(payoffs: Sequence[Sequence], tol: float = 1e-9, exact: bool = False) -> MatrixSolution:
    """Optimal mixed strategies of the zero-sum game with the given payoff matrix.

    Rows are player I's moves (maximizer), columns player II's. In exact mode
    all arithmetic is rational and the certificate gap is zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = _coerce(payoffs, exact)
    m, n = len(M), len(M[0])
    lo = min(min(r) for r in M)
    shift = 1 - lo  # makes every entry >= 1
    A = [[v + shift for v in r] for r in M]
    eps = 0 if exact else 1e-12
    y, x, z = _simplex_max(A, eps)
    col = [v / z for v in y]
    row = [v / z for v in x]
    if not exact:
        row = _clean(row)
        col = _clean(col)
    value = 1 / z - shift
    guarantee = min(sum(row[i] * M[i][j] for i in range(m)) for j in range(n))
    restrict = max(sum(col[j] * M[i][j] for j in range(n)) for i in range(m))
    gap = max(value - guarantee, 0) + max(restrict - value, 0)
    return MatrixSolution(value, tuple(row), tuple(col), gap, guarantee, restrict)


def _clean(p):
    p = [v if v > 0 else 0.0 for v in p]
    s = sum(p)
    return [v / s for v in p]


def matrix_value(payoffs, exact: bool = False):
    return solve_matrix(payoffs, exact=exact).value


# ---------------------------------------------------------------------------
# separation

def nearest_point(points, b, tol: float = 1e-12, max_iter: int = 1000):
    """Point of the convex hull of ``points`` nearest to ``b`` (Wolfe's algorithm).

    Returns ``(c, weights)`` with ``c = weights @ points``.
    """
    P = np.asarray(points, dtype=float) - np.asarray(b, dtype=float)
    k = P.shape[0]
    scale = max(1.0, float(np.max(np.sum(P * P, axis=1))))
    S = [int(np.argmin(np.sum(P * P, axis=1)))]
    lam = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_iter):
        j = int(np.argmin(P @ x))
        if x @ x - x @ P[j] <= tol * scale or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            Q = P[S]
            G = Q @ Q.T
            r = len(S)
            K = np.zeros((r + 1, r + 1))
            K[:r, :r] = G
            K[:r, r] = 1.0
            K[r, :r] = 1.0
            rhs = np.zeros(r + 1)
            rhs[r] = 1.0
            alpha = np.linalg.lstsq(K, rhs, rcond=None)[0][:r]
            if np.all(alpha > 1e-14):
                lam = alpha
                break
            neg = alpha <= 1e-14
            theta = min(1.0, float(np.min(lam[neg] / (lam[neg] - alpha[neg]))))
            lam = theta * alpha + (1 - theta) * lam
            keep = lam > 1e-14
            if not np.any(keep):
                keep[int(np.argmax(lam))] = True
            S = [s for s, kf in zip(S, keep) if kf]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ P[S]
    weights = np.zeros(k)
    weights[S] = lam
    return np.asarray(b, dtype=float) + x, weights


def separating_hyperplane(points, b, tol: float = 1e-9):
    """Unit normal ``y`` and offset ``d`` with ``y.b > d > y.z`` for hull points ``z``.

    Returns ``"inside"`` when ``b`` lies within ``tol`` of the convex hull.
    """
    P = np.asarray(points, dtype=float)
    b = np.asarray(b, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise ValueError("need at least one point")
    if P.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: points in R^{P.shape[1]}, b in R^{b.shape[0]}")
    if not (np.all(np.isfinite(P)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite coordinates")
    c, _ = nearest_point(P, b)
    y = b - c
    dist = float(np.linalg.norm(y))
    if dist <= tol:
        return INSIDE
    y = y / dist
    d = 0.5 * (y @ b + y @ c)
    return y, float(d)
