"""Gomory mixed-integer cuts read off an optimal simplex tableau.

The program is put in the standard form ``A x + s = rhs`` with one slack per
row (``s >= 0`` for ``<=`` rows, ``s <= 0`` for ``>=`` rows, ``s = 0`` for
equalities). For a basic integer variable with fractional value, the
tableau row ``x_i + sum(alpha_j * x_j) = beta`` over the non-basic columns
yields the classical GMI inequality after shifting every non-basic column
to its active bound. Slacks are treated as continuous, which is always
valid. The cut is finally rewritten over structural variables only.

Cuts derived from the global bounds are valid for every integer point of
the program, and stay valid after further rows are appended.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from . import lp as lpmod

BOUND_TOL = 1e-9
COEF_ZERO = 1e-11


def gomory_cuts(lp: lpmod.LinearProgram, solution: lpmod.LpSolution, integer,
                max_cuts: int = 200, min_frac: float = 0.01, max_dynamism: float = 1e6,
                max_support: int | None = None, min_violation: float = 1e-6) -> list[lpmod.Row]:
    """GMI rows violated by ``solution``; ``integer`` flags the integer columns.

    Rows whose source variable is too close to integral (``min_frac``),
    whose coefficients span more than ``max_dynamism`` or that touch more
    than ``max_support`` columns are dropped as numerically unsafe.
    """
    if not solution.optimal or solution.basis is None:
        return []
    n, m = lp.n_vars, lp.n_rows
    basic = lpmod.basic_indices(lp, solution.basis)
    if basic is None or len(basic) != m or not m:
        return []
    integer = np.asarray(integer, dtype=bool)
    x = solution.x
    frac = x - np.floor(x)
    sources = [(k, j) for k, j in enumerate(basic)
               if j < n and integer[j] and min_frac <= frac[j] <= 1 - min_frac]
    if not sources:
        return []
    sources.sort(key=lambda kj: -min(frac[kj[1]], 1 - frac[kj[1]]))
    sources = sources[:max_cuts]

    A = lp.matrix().tocsc()
    rhs = lp.rhs()
    senses = lp.senses()
    full = sparse.hstack([A, sparse.identity(m, format="csc")]).tocsc()
    try:
        lu = splu(full[:, basic].tocsc())
    except RuntimeError:
        return []

    le, ge, eq = senses == lpmod.LE, senses == lpmod.GE, senses == lpmod.EQ
    lo = np.concatenate([lp.lower, np.where(ge, -np.inf, 0.0)])
    hi = np.concatenate([lp.upper, np.where(le, np.inf, 0.0)])
    val = np.concatenate([x, rhs - A @ x])
    nonbasic = np.ones(n + m, dtype=bool)
    nonbasic[basic] = False
    at_lo = nonbasic & (np.abs(val - lo) <= BOUND_TOL)
    at_hi = nonbasic & ~at_lo & (np.abs(val - hi) <= BOUND_TOL)
    active = nonbasic & (hi - lo > BOUND_TOL)
    if np.any(active & ~(at_lo | at_hi)):
        return []  # a non-basic column strictly inside its bounds
    is_int = np.concatenate([integer, np.zeros(m, dtype=bool)])
    sign = np.where(at_hi, -1.0, 1.0)
    shift = np.where(at_hi, hi, np.where(at_lo, lo, 0.0))

    rows = []
    for k, j in sources:
        e = np.zeros(m)
        e[k] = 1.0
        alpha = full.T @ lu.solve(e, trans="T")
        alpha[np.abs(alpha) < COEF_ZERO] = 0.0
        # in shifted columns x'_j >= 0 the row reads x_i + sum(a_j x'_j) = x_i*
        a = np.where(active, alpha * sign, 0.0)
        f0 = frac[j]
        fj = a - np.floor(a)
        coef = np.zeros(n + m)
        ii = active & is_int & (a != 0)
        coef[ii] = np.where(fj[ii] <= f0, fj[ii] / f0, (1 - fj[ii]) / (1 - f0))
        cc = active & ~is_int & (a != 0)
        coef[cc] = np.where(a[cc] > 0, a[cc] / f0, -a[cc] / (1 - f0))
        used = coef != 0
        if not used.any():
            continue
        # sum(coef * x') >= 1 with x' = sign * (x - shift)
        pi = coef * sign
        pi0 = 1.0 + float(np.sum(pi[used] * shift[used]))
        # substitute s = rhs - A x
        ps = pi[n:]
        px = pi[:n] - A.T @ ps
        p0 = pi0 - float(ps @ rhs)
        px[np.abs(px) < COEF_ZERO] = 0.0
        support = np.flatnonzero(px)
        if not len(support):
            continue
        mags = np.abs(px[support])
        if mags.max() / mags.min() > max_dynamism:
            continue
        if max_support is not None and len(support) > max_support:
            continue
        if p0 - float(px @ x) < min_violation * max(1.0, mags.max()):
            continue
        # a little slack on the right-hand side guards against round-off
        safety = 1e-9 * (1.0 + abs(p0)) + 1e-9 * mags.sum()
        rows.append(lpmod.Row({int(c): float(px[c]) for c in support}, lpmod.GE, p0 - safety))
    return rows


def integer_columns(model) -> np.ndarray:
    """Integer flags for the master's columns (everything but theta)."""
    flags = np.ones(model.lp.n_vars, dtype=bool)
    flags[: model.horizon] = False
    return flags
