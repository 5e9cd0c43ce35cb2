"""Linear programs over bounded variables.

Two interchangeable engines sit behind :func:`solve`:

* ``"simplex"``: a dense bounded-variable revised primal simplex written here.
  Infeasible starting bases are repaired by minimising the sum of bound
  violations, so any previous basis can seed a re-solve after rows are
  appended or bounds change.
* ``"highs"``: the HiGHS simplex through ``highspy``, kept alive between
  calls on the same program so re-solves are warm; used for the larger
  master problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import highspy
import numpy as np
from scipy import sparse

EPS_FEAS = 1e-7
EPS_OPT = 1e-9
PIVOT_TOL = 1e-9
BLAND_AFTER = 1000
REFACTOR_EVERY = 64

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical_failure"

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class Row:
    coeffs: dict
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in (LE, EQ, GE):
            raise ValueError(f"unknown row relation {self.sense!r}")
        if not math.isfinite(self.rhs):
            raise ValueError("row right-hand side must be finite")


@dataclass(frozen=True)
class Basis:
    """Basic column indices plus the at-upper flag of every column.

    Columns are the structural variables followed by one slack per row.
    """

    basic: tuple[int, ...]
    at_upper: tuple[bool, ...]


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    x: Optional[np.ndarray] = None
    basis: object = None  # Basis (simplex) or HighsBasis; only fed back to the same backend
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class LinearProgram:
    """``maximise c @ x`` subject to rows and ``lower <= x <= upper``.

    Rows are append-only; the sparse constraint matrix is cached and
    extended rather than rebuilt.
    """

    def __init__(self, objective, lower, upper, rows: Sequence[Row] = ()):
        self.objective = np.asarray(objective, dtype=float)
        self.lower = np.asarray(lower, dtype=float).copy()
        self.upper = np.asarray(upper, dtype=float).copy()
        n = len(self.objective)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must match the number of variables")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        self.rows: list[Row] = []
        self._data: list[float] = []
        self._cols: list[int] = []
        self._ptr: list[int] = [0]
        self._cache = None
        self.add_rows(rows)

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_row(self, coeffs: dict, sense: str, rhs: float) -> int:
        return self.add_rows([Row(dict(coeffs), sense, float(rhs))])

    def add_rows(self, rows: Sequence[Row]) -> int:
        for row in rows:
            for j, v in row.coeffs.items():
                if not 0 <= j < self.n_vars:
                    raise ValueError(f"row references unknown variable {j}")
                if v != 0:
                    self._cols.append(j)
                    self._data.append(float(v))
            self._ptr.append(len(self._cols))
            self.rows.append(row)
        return len(self.rows) - 1

    def matrix(self) -> sparse.csr_matrix:
        if self._cache is None or self._cache.shape[0] != self.n_rows:
            self._cache = sparse.csr_matrix(
                (np.array(self._data), np.array(self._cols, dtype=np.int64),
                 np.array(self._ptr, dtype=np.int64)),
                shape=(self.n_rows, self.n_vars))
        return self._cache

    def senses(self) -> np.ndarray:
        return np.array([r.sense for r in self.rows], dtype=object)

    def rhs(self) -> np.ndarray:
        return np.array([r.rhs for r in self.rows], dtype=float)

    def copy(self) -> "LinearProgram":
        return LinearProgram(self.objective, self.lower, self.upper, self.rows)


def solve(lp: LinearProgram, *, lower=None, upper=None, basis=None,
          backend: str = "simplex", max_iter: int | None = None) -> LpSolution:
    """Solve ``lp``, optionally under overriding bounds and a starting basis."""
    lower = lp.lower if lower is None else np.asarray(lower, dtype=float)
    upper = lp.upper if upper is None else np.asarray(upper, dtype=float)
    if np.any(lower > upper + EPS_FEAS):
        return LpSolution(INFEASIBLE)
    if backend == "simplex":
        return _BoundedSimplex(lp, lower, upper, max_iter).run(basis)
    if backend == "highs":
        return _solve_highs(lp, lower, upper, basis)
    raise ValueError(f"unknown LP backend {backend!r}")


def add_rows_resolve(lp: LinearProgram, solution: LpSolution, rows: Sequence[Row],
                     **kwargs) -> LpSolution:
    """Append ``rows`` to ``lp`` and re-solve from the previous basis."""
    lp.add_rows(rows)
    basis = solution.basis if solution is not None else None
    return solve(lp, basis=basis, **kwargs)


def basic_indices(lp: LinearProgram, basis) -> np.ndarray | None:
    """Basic columns of ``basis`` in the layout structurals then one slack per row.

    Returns ``None`` if the basis was taken before rows were appended.
    """
    if isinstance(basis, HighsBasis):
        if basis.n_rows != lp.n_rows:
            return None
        code = int(highspy.HighsBasisStatus.kBasic)
        col = np.fromiter((int(v) for v in basis.native.col_status), dtype=int, count=lp.n_vars)
        row = np.fromiter((int(v) for v in basis.native.row_status), dtype=int, count=lp.n_rows)
        return np.concatenate([np.flatnonzero(col == code), lp.n_vars + np.flatnonzero(row == code)])
    if isinstance(basis, Basis):
        if len(basis.at_upper) != lp.n_vars + lp.n_rows:
            return None
        return np.asarray(basis.basic, dtype=int)
    return None


class _HighsSession:
    """A HiGHS model kept in step with an append-only :class:`LinearProgram`.

    Rows appended to the program since the last call are pushed before each
    solve, so re-solves after cuts or bound changes start from HiGHS' current
    basis unless an explicit one is given.
    """

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("primal_feasibility_tolerance", EPS_FEAS)
        h.setOptionValue("dual_feasibility_tolerance", EPS_OPT)
        h.changeObjectiveSense(highspy.ObjSense.kMaximize)
        n = lp.n_vars
        empty = np.zeros(0, dtype=np.int32)
        h.addCols(n, lp.objective, _finite(lp.lower), _finite(lp.upper), 0,
                  np.zeros(n, dtype=np.int32), empty, np.zeros(0))
        self.h = h
        self.synced = 0
        self.cols = np.arange(n, dtype=np.int32)

    def _sync(self):
        lp = self.lp
        m0, m1 = self.synced, lp.n_rows
        if m1 == m0:
            return
        ptr = np.asarray(lp._ptr[m0:m1 + 1], dtype=np.int64)
        idx = np.asarray(lp._cols[ptr[0]:ptr[-1]], dtype=np.int32)
        val = np.asarray(lp._data[ptr[0]:ptr[-1]], dtype=float)
        rows = lp.rows[m0:m1]
        lo = np.array([r.rhs if r.sense != LE else -highspy.kHighsInf for r in rows])
        hi = np.array([r.rhs if r.sense != GE else highspy.kHighsInf for r in rows])
        self.h.addRows(m1 - m0, lo, hi, len(idx), (ptr[:-1] - ptr[0]).astype(np.int32), idx, val)
        self.synced = m1

    def solve(self, lower, upper, basis) -> LpSolution:
        self._sync()
        h = self.h
        n = self.lp.n_vars
        h.changeColsBounds(n, self.cols, _finite(lower), _finite(upper))
        hb = None if basis is None else self._to_highs(basis)
        if hb is not None:
            h.setBasis(hb)
        h.run()
        status = h.getModelStatus()
        iters = int(h.getInfo().simplex_iteration_count)
        if status == highspy.HighsModelStatus.kOptimal:
            x = np.array(h.getSolution().col_value, dtype=float)
            return LpSolution(OPTIMAL, float(self.lp.objective @ x), x, self._from_highs(h.getBasis()), iters)
        if status == highspy.HighsModelStatus.kInfeasible:
            return LpSolution(INFEASIBLE, iterations=iters)
        if status in (highspy.HighsModelStatus.kUnbounded, highspy.HighsModelStatus.kUnboundedOrInfeasible):
            return LpSolution(UNBOUNDED, math.inf, iterations=iters)
        return LpSolution(NUMERICAL_FAILURE, iterations=iters)

    def _from_highs(self, hb) -> "HighsBasis":
        return HighsBasis(hb, self.lp.n_rows)

    def _to_highs(self, basis):
        if not isinstance(basis, HighsBasis):
            return None
        hb = basis.native
        extra = self.lp.n_rows - basis.n_rows
        if extra:
            grown = highspy.HighsBasis()
            grown.col_status = hb.col_status
            grown.row_status = list(hb.row_status) + [highspy.HighsBasisStatus.kBasic] * extra
            grown.valid = True
            hb = grown
        return hb


@dataclass(frozen=True)
class HighsBasis:
    """Opaque HiGHS basis plus the row count it was taken at."""

    native: object
    n_rows: int


def _finite(v):
    v = np.asarray(v, dtype=float)
    return np.clip(v, -highspy.kHighsInf, highspy.kHighsInf)


def _solve_highs(lp: LinearProgram, lower, upper, basis=None) -> LpSolution:
    session = getattr(lp, "_highs_session", None)
    if session is None:
        session = lp._highs_session = _HighsSession(lp)
    return session.solve(lower, upper, basis)


class _BoundedSimplex:
    """Dense revised primal simplex with explicit basis inverse."""

    def __init__(self, lp: LinearProgram, lower, upper, max_iter):
        m, n = lp.n_rows, lp.n_vars
        self.m, self.n = m, n
        A = lp.matrix().toarray() if m else np.zeros((0, n))
        senses = lp.senses()
        b = lp.rhs()
        flip = senses == GE
        A[flip] *= -1
        b = np.where(flip, -b, b)
        self.A = np.hstack([A, np.eye(m)])
        self.b = b
        slack_hi = np.where(senses == EQ, 0.0, np.inf) if m else np.zeros(0)
        self.lo = np.concatenate([lower, np.zeros(m)])
        self.hi = np.concatenate([upper, slack_hi])
        self.c = np.concatenate([lp.objective, np.zeros(m)])
        self.max_iter = max_iter or 50 * (n + m) + 5000

    def _initial(self, basis):
        N = self.n + self.m
        at_upper = np.zeros(N, dtype=bool)
        basic = list(range(self.n, N))
        if isinstance(basis, Basis) and self.n <= len(basis.at_upper) <= N:
            old = list(basis.basic)
            new_slacks = list(range(len(basis.at_upper), N))
            cand = old + new_slacks
            if len(cand) == self.m and len(set(cand)) == self.m:
                basic = cand
                at_upper[: len(basis.at_upper)] = basis.at_upper
        x = np.where(at_upper & np.isfinite(self.hi), self.hi,
                     np.where(np.isfinite(self.lo), self.lo,
                              np.where(np.isfinite(self.hi), self.hi, 0.0)))
        return basic, x

    def _factor(self, basic):
        if not self.m:
            return np.zeros((0, 0))
        B = self.A[:, basic]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(Binv)) or np.linalg.cond(B) > 1e12:
            return None
        return Binv

    def _recompute(self, basic, x, Binv):
        is_basic = np.zeros(len(x), dtype=bool)
        is_basic[basic] = True
        xn = np.where(is_basic, 0.0, x)
        x[basic] = Binv @ (self.b - self.A @ xn)

    def run(self, start: Basis | None) -> LpSolution:
        m = self.m
        N = self.n + m
        basic, x = self._initial(start)
        Binv = self._factor(basic)
        if Binv is None:
            basic, x = self._initial(None)
            Binv = np.eye(m)
        self._recompute(basic, x, Binv)
        is_basic = np.zeros(N, dtype=bool)
        is_basic[basic] = True
        lo, hi, A, c = self.lo, self.hi, self.A, self.c
        movable = hi - lo > 0
        degenerate = 0
        bland = False
        since_refactor = 0

        for it in range(self.max_iter):
            xb = x[basic]
            below = xb < lo[basic] - EPS_FEAS
            above = xb > hi[basic] + EPS_FEAS
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = below.astype(float) - above.astype(float)
                cost = np.zeros(N)
            else:
                cb = c[basic]
                cost = c
            y = cb @ Binv if m else np.zeros(0)
            d = cost - y @ A if m else cost.copy()
            d[is_basic] = 0.0
            up = (d > EPS_OPT) & movable & ~is_basic & (x < hi - EPS_FEAS)
            down = (d < -EPS_OPT) & movable & ~is_basic & (x > lo + EPS_FEAS)
            cand = np.flatnonzero(up | down)
            if cand.size == 0:
                if phase1:
                    return LpSolution(INFEASIBLE, iterations=it)
                xs = x[: self.n].copy()
                return LpSolution(OPTIMAL, float(self.c[: self.n] @ xs), xs,
                                  Basis(tuple(int(j) for j in basic),
                                        tuple(bool(v) for v in ~is_basic & (x >= hi - EPS_FEAS))), it)
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            sigma = 1.0 if up[j] else -1.0
            alpha = Binv @ A[:, j] if m else np.zeros(0)
            rate = -sigma * alpha

            step = hi[j] - lo[j]
            leave = -1
            leave_to_upper = False
            best_piv = 0.0
            for i in np.flatnonzero(np.abs(alpha) > PIVOT_TOL):
                k = basic[i]
                v = x[k]
                r = rate[i]
                if r < 0:
                    if v > hi[k] + EPS_FEAS:
                        lim, to_up = (v - hi[k]) / -r, True
                    elif v >= lo[k] - EPS_FEAS and np.isfinite(lo[k]):
                        lim, to_up = max(v - lo[k], 0.0) / -r, False
                    else:
                        continue
                else:
                    if v < lo[k] - EPS_FEAS:
                        lim, to_up = (lo[k] - v) / r, False
                    elif v <= hi[k] + EPS_FEAS and np.isfinite(hi[k]):
                        lim, to_up = max(hi[k] - v, 0.0) / r, True
                    else:
                        continue
                piv = abs(alpha[i])
                if lim < step - 1e-12 or (
                        lim <= step + 1e-12 and leave >= 0 and (
                            basic[i] < basic[leave] if bland else piv > best_piv)):
                    step, leave, leave_to_upper, best_piv = lim, i, to_up, piv

            if not np.isfinite(step):
                if phase1:
                    return LpSolution(NUMERICAL_FAILURE, iterations=it)
                return LpSolution(UNBOUNDED, math.inf, iterations=it)

            if m:
                x[basic] -= sigma * step * alpha
            x[j] += sigma * step
            if leave < 0:
                x[j] = hi[j] if sigma > 0 else lo[j]
            else:
                k = basic[leave]
                x[k] = hi[k] if leave_to_upper else lo[k]
                is_basic[k] = False
                is_basic[j] = True
                basic[leave] = j
                piv = alpha[leave]
                row = Binv[leave] / piv
                Binv -= np.outer(alpha, row)
                Binv[leave] = row
                since_refactor += 1
                if since_refactor >= REFACTOR_EVERY:
                    fresh = self._factor(basic)
                    if fresh is None:
                        return LpSolution(NUMERICAL_FAILURE, iterations=it)
                    Binv = fresh
                    self._recompute(basic, x, Binv)
                    since_refactor = 0

            if step <= 1e-12:
                degenerate += 1
                if degenerate >= BLAND_AFTER:
                    bland = True
            else:
                degenerate = 0
        return LpSolution(NUMERICAL_FAILURE, iterations=self.max_iter)
