"""Euclidean projections onto probability simplices, optionally intersected
with a linear budget half-space.

The budgeted variant solves

    min ||x - y||^2   s.t.  every row of x lies on the simplex,
                            sum(A * x) <= budget,

by bisecting on the dual multiplier of the budget constraint: the projection
of ``y - lam * A`` onto the row simplices has a total cost that is continuous
and non-increasing in ``lam``, so the binding multiplier is a root of a
monotone scalar function.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetBelowMinCostError

_COST_TOL = 1e-12
_FACE_TOL = 1e-12


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Project each row of ``y`` onto the probability simplex.

    Accepts a 1-D vector or a 2-D stack of rows; returns the same shape.
    Sort-based algorithm, O(k log k) per row.
    """
    arr = np.atleast_2d(np.asarray(y, dtype=np.float64))
    k = arr.shape[1]
    u = np.sort(arr, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, k + 1)
    cond = u - css / ind > 0
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(arr.shape[0]), rho] / (rho + 1)
    out = np.maximum(arr - theta[:, None], 0.0)
    return out.reshape(np.shape(y))


def _row_face_project(y: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    """Project rows onto the cheapest-cost face of their simplices."""
    out = np.zeros_like(y)
    for r in range(y.shape[0]):
        a = coeff[r]
        if a.max() - a.min() <= _FACE_TOL:
            out[r] = project_simplex(y[r])
            continue
        face = a <= a.min() + _FACE_TOL
        out[r, face] = project_simplex(y[r, face])
    return out


def project_budgeted_blocks(ys, coeffs, budget: float):
    """Project stacks of simplex rows onto a shared budget half-space.

    ``ys`` is a list of 2-D arrays whose rows are independent simplices and
    ``coeffs`` the matching list of per-coordinate costs (any row weights
    already multiplied in).  The single constraint couples all blocks:
    ``sum_i sum(coeffs[i] * xs[i]) <= budget``, and one dual multiplier is
    bisected for all of them together.

    Raises
    ------
    BudgetBelowMinCostError
        If even the cheapest vertex combination exceeds the budget.
    """
    ys = [np.atleast_2d(np.asarray(y, dtype=np.float64)) for y in ys]
    coeffs = [np.atleast_2d(np.asarray(c, dtype=np.float64)) for c in coeffs]
    for y, c in zip(ys, coeffs):
        if c.shape != y.shape:
            raise ValueError(f"coeff shape {c.shape} != point shape {y.shape}")

    def total(xs) -> float:
        return float(sum(np.sum(c * x) for c, x in zip(coeffs, xs)))

    floor = sum(c.min(axis=1).sum() for c in coeffs)
    if budget < floor - 1e-9:
        raise BudgetBelowMinCostError(
            f"budget {budget} below minimum achievable cost {floor}"
        )

    xs = [project_simplex(y) for y in ys]
    if total(xs) <= budget + _COST_TOL:
        return xs

    if budget <= floor + _FACE_TOL:
        return [_row_face_project(y, c) for y, c in zip(ys, coeffs)]

    def shifted(lam: float):
        return [project_simplex(y - lam * c) for y, c in zip(ys, coeffs)]

    lo, hi = 0.0, 1.0
    x_hi = shifted(hi)
    for _ in range(200):
        if total(x_hi) <= budget:
            break
        lo, hi = hi, hi * 2.0
        x_hi = shifted(hi)
    else:
        return [_row_face_project(y, c) for y, c in zip(ys, coeffs)]

    best = x_hi
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        x_mid = shifted(mid)
        cost = total(x_mid)
        if cost > budget:
            lo = mid
        else:
            hi = mid
            best = x_mid
            if budget - cost <= _COST_TOL:
                break
    return best


def project_budgeted_rows(
    y: np.ndarray, coeff: np.ndarray, budget: float
) -> np.ndarray:
    """Project rows of ``y`` onto row simplices subject to ``sum(coeff * x) <= budget``.

    ``coeff`` carries any row weights already multiplied in, so the budget
    constraint is the plain inner product of the two matrices.

    Raises
    ------
    BudgetBelowMinCostError
        If even the cheapest vertex combination exceeds the budget.
    """
    return project_budgeted_blocks([y], [coeff], budget)[0]
