"""Dense two-phase primal simplex.

Problems are converted to standard form ``min c'x, Ax = b, x >= 0`` and
solved on a full tableau. Pricing is Dantzig's most-negative reduced cost;
after ``stall`` consecutive degenerate pivots the solver switches to Bland's
lowest-index rule until the objective moves again, which rules out cycling.
The leaving row is the minimum ratio; ties go to the largest pivot element
under Dantzig pricing and to the lowest basic-variable index under Bland's
rule. Every choice is deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..config import current
from ..errors import NumericalBreakdown

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``min`` (or ``max``) of ``c'x`` subject to equality and <= rows.

    ``bounds`` is a list of ``(lo, hi)`` pairs, ``None`` meaning unbounded on
    that side; when omitted every variable is ``>= 0``.
    """

    c: np.ndarray
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    bounds: tuple = None
    maximize: bool = False

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        object.__setattr__(self, "c", c)
        for A, b, name in (("A_ub", "b_ub", "<="), ("A_eq", "b_eq", "=")):
            Am = getattr(self, A)
            bm = getattr(self, b)
            if Am is None:
                Am = np.zeros((0, n))
                bm = np.zeros(0)
            Am = np.atleast_2d(np.asarray(Am, dtype=float))
            bm = np.asarray(bm, dtype=float).ravel()
            if Am.shape[1] != n or Am.shape[0] != bm.size:
                raise ValueError(f"inconsistent {name} block: A {Am.shape}, b {bm.shape}, n = {n}")
            if not (np.all(np.isfinite(Am)) and np.all(np.isfinite(bm))):
                raise ValueError(f"non-finite coefficients in {name} block")
            object.__setattr__(self, A, Am)
            object.__setattr__(self, b, bm)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite objective")
        bounds = self.bounds
        if bounds is None:
            bounds = [(0.0, None)] * n
        if len(bounds) != n:
            raise ValueError(f"{len(bounds)} bounds for {n} variables")
        clean = []
        for lo, hi in bounds:
            lo = None if lo is None or lo == -np.inf else float(lo)
            hi = None if hi is None or hi == np.inf else float(hi)
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"empty bound interval [{lo}, {hi}]")
            clean.append((lo, hi))
        object.__setattr__(self, "bounds", tuple(clean))

    @property
    def n(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    """Result of :func:`solve_lp`.

    ``duals_eq`` / ``duals_ub`` are the sensitivities of the optimal objective
    to the right-hand sides (so ``duals_ub <= 0`` for a minimization).
    """

    status: str
    x: np.ndarray
    objective: float
    iterations: int
    duals_eq: np.ndarray = None
    duals_ub: np.ndarray = None
    max_violation: float = 0.0
    complementarity: float = 0.0
    basis: tuple = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _StandardForm:
    """``min c'z, Az = b, z >= 0`` plus the map back to the original variables."""

    def __init__(self, lp):
        n = lp.n
        cols = []  # per original variable: list of (std index, sign)
        offset = np.zeros(n)
        ncol = 0
        extra_rows = []  # (std column, upper) for finite boxes
        for j, (lo, hi) in enumerate(lp.bounds):
            if lo is not None:
                offset[j] = lo
                cols.append([(ncol, 1.0)])
                if hi is not None:
                    extra_rows.append((ncol, hi - lo))
                ncol += 1
            elif hi is not None:
                offset[j] = hi
                cols.append([(ncol, -1.0)])
                ncol += 1
            else:
                cols.append([(ncol, 1.0), (ncol + 1, -1.0)])
                ncol += 2
        self.n_struct = ncol
        self.cols = cols
        self.offset = offset

        def expand(A):
            out = np.zeros((A.shape[0], ncol))
            for j, parts in enumerate(cols):
                for k, s in parts:
                    out[:, k] += s * A[:, j]
            return out

        sign = -1.0 if lp.maximize else 1.0
        c_std = np.zeros(ncol)
        for j, parts in enumerate(cols):
            for k, s in parts:
                c_std[k] += sign * s * lp.c[j]
        self.const = sign * float(lp.c @ offset)

        m_eq, m_ub, m_bx = lp.A_eq.shape[0], lp.A_ub.shape[0], len(extra_rows)
        m = m_eq + m_ub + m_bx
        n_slack = m_ub + m_bx
        A = np.zeros((m, ncol + n_slack))
        b = np.zeros(m)
        A[:m_eq, :ncol] = expand(lp.A_eq)
        b[:m_eq] = lp.b_eq - lp.A_eq @ offset
        A[m_eq:m_eq + m_ub, :ncol] = expand(lp.A_ub)
        b[m_eq:m_eq + m_ub] = lp.b_ub - lp.A_ub @ offset
        for r, (k, ub) in enumerate(extra_rows):
            A[m_eq + m_ub + r, k] = 1.0
            b[m_eq + m_ub + r] = ub
        A[m_eq:, ncol:] = np.eye(n_slack)
        self.row_sign = np.where(b < 0, -1.0, 1.0)
        A *= self.row_sign[:, None]
        b *= self.row_sign
        self.A = A
        self.b = b
        self.c = np.concatenate([c_std, np.zeros(n_slack)])
        self.m_eq, self.m_ub = m_eq, m_ub
        self.sign = sign

    def recover(self, z):
        x = self.offset.copy()
        for j, parts in enumerate(self.cols):
            for k, s in parts:
                x[j] += s * z[k]
        return x


class _Tableau:
    def __init__(self, A, b, basis, tol, stall, reinvert):
        m, n = A.shape
        self.A0 = A
        self.b0 = b
        self.b_work = b
        self.m, self.n = m, n
        self.T = np.zeros((m + 1, n + 1))
        self.basis = list(basis)
        self.tol = tol
        self.stall_limit = stall
        self.reinvert_every = reinvert
        self.iterations = 0
        self.cost = None
        self.active_rows = np.arange(m)
        self.refactor()

    def refactor(self):
        A = self.A0[self.active_rows]
        b = self.b_work[self.active_rows]
        B = A[:, self.basis]
        try:
            body = np.linalg.solve(B, np.column_stack([A, b]))
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown(
                f"singular basis during refactorization ({exc})", condition=float("inf")
            ) from None
        m = len(self.basis)
        T = np.zeros((m + 1, self.n + 1))
        T[:m] = body
        # clean columns of basic variables
        for r, k in enumerate(self.basis):
            T[:m, k] = 0.0
            T[r, k] = 1.0
        rhs = T[:m, -1]
        rhs[(rhs < 0.0) & (rhs > -1e-9)] = 0.0
        self.T = T
        if self.cost is not None:
            self.set_cost(self.cost)

    def set_cost(self, cost):
        self.cost = cost
        m = len(self.basis)
        cb = cost[self.basis]
        self.T[m, :-1] = cost - cb @ self.T[:m, :-1]
        self.T[m, -1] = -cb @ self.T[:m, -1]

    def perturb(self, seed=0):
        """Shift the rhs so every basic value is strictly positive.

        The shift is ``B e`` with ``e`` a small random positive vector, so
        the current basis stays feasible. A nondegenerate problem cannot stall;
        :meth:`restore` undoes the shift.
        """
        rows = self.active_rows
        B = self.A0[np.ix_(rows, self.basis)]
        scale = max(1.0, float(np.abs(self.b0).max(initial=0.0)))
        e = 1e-7 * scale * (1.0 + np.random.default_rng(seed).random(len(rows)))
        b = self.b0.copy()
        b[rows] += B @ e
        self.b_work = b
        self.refactor()

    def restore(self):
        self.b_work = self.b0
        self.refactor()

    def dual_simplex(self, allowed, max_iter, feas_tol):
        """Regain primal feasibility from a dual feasible basis.

        Returns False when some row proves the system infeasible.
        """
        m = len(self.basis)
        since_refactor = 0
        while True:
            rhs = self.T[:m, -1]
            r = int(np.argmin(rhs))
            if rhs[r] >= -feas_tol:
                return True
            if self.iterations >= max_iter:
                raise NumericalBreakdown(f"simplex iteration cap {max_iter} reached")
            row = self.T[r, :-1]
            cand = np.flatnonzero((row < -self.tol) & allowed)
            if cand.size == 0:
                return False
            d = np.maximum(self.T[m, :-1][cand], 0.0)
            ratios = d / -row[cand]
            best = ratios.min()
            tied = cand[ratios <= best + 1e-12 * max(1.0, best)]
            j = int(tied[np.argmax(-row[tied])])
            kernels.pivot(self.T, r, j)
            self.basis[r] = j
            self.iterations += 1
            since_refactor += 1
            if since_refactor >= self.reinvert_every:
                self.refactor()
                since_refactor = 0

    def optimize(self, allowed, max_iter, feas_tol):
        """Perturbed primal simplex, then cleanup on the true rhs.

        Returns a status, or INFEASIBLE when the cleanup proves the true
        problem has no feasible point for this cost.
        """
        self.perturb()
        status = self.run(allowed, max_iter)
        self.restore()
        if status == UNBOUNDED:
            return status
        if not self.dual_simplex(allowed, max_iter, feas_tol):
            return INFEASIBLE
        rhs = self.T[:len(self.basis), -1]
        rhs[rhs < 0.0] = 0.0
        return self.run(allowed, max_iter)

    def objective(self) -> float:
        return -self.T[-1, -1]

    def run(self, allowed, max_iter):
        """Pivot to optimality over columns where ``allowed`` is true."""
        tol = self.tol
        bland = False
        stall = 0
        since_refactor = 0
        m = len(self.basis)
        basis_arr = np.array(self.basis)
        while True:
            if self.iterations >= max_iter:
                raise NumericalBreakdown(f"simplex iteration cap {max_iter} reached")
            d = self.T[m, :-1]
            cand = np.flatnonzero((d < -tol) & allowed)
            if cand.size == 0:
                return OPTIMAL
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmin(d[cand])])
            col = self.T[:m, j]
            rows = np.flatnonzero(col > tol)
            if rows.size == 0:
                return UNBOUNDED
            ratios = np.maximum(self.T[rows, -1], 0.0) / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if bland:
                r = int(tied[np.argmin(basis_arr[tied])])
            else:
                # largest pivot among ties keeps the tableau well conditioned
                r = int(tied[np.argmax(col[tied])])
            degenerate = self.T[r, -1] <= tol
            kernels.pivot(self.T, r, j)
            self.basis[r] = j
            basis_arr[r] = j
            self.iterations += 1
            since_refactor += 1
            if degenerate:
                stall += 1
                if stall >= self.stall_limit:
                    bland = True
            else:
                stall = 0
                bland = False
            if since_refactor >= self.reinvert_every:
                self.refactor()
                since_refactor = 0


def solve_lp(lp, tol=None, max_iter=50_000, start_basis=None):
    """Solve ``lp`` with the dense two-phase simplex.

    Infeasible and unbounded problems are reported through ``status``;
    numerical trouble (singular bases, post-solve feasibility loss) raises
    :class:`~zerocert.errors.NumericalBreakdown`.

    ``start_basis`` optionally names one original variable per equality row
    (only for problems with equality rows alone and all variables ``>= 0``)
    forming a primal feasible basis; Phase I is then skipped.
    """
    tol = current() if tol is None else tol
    sf = _StandardForm(lp)
    A, b = sf.A, sf.b
    m, n = A.shape
    if start_basis is not None:
        return _solve_from_basis(lp, sf, list(start_basis), tol, max_iter)

    # Slack columns that kept a +1 after row normalization start basic.
    basis = []
    art_rows = []
    for r in range(m):
        k = None
        if r >= sf.m_eq and sf.row_sign[r] > 0:
            k = sf.n_struct + (r - sf.m_eq)
        if k is None:
            art_rows.append(r)
            basis.append(None)
        else:
            basis.append(k)
    n_art = len(art_rows)
    A_full = np.hstack([A, np.zeros((m, n_art))])
    for i, r in enumerate(art_rows):
        A_full[r, n + i] = 1.0
        basis[r] = n + i

    tab = _Tableau(A_full, b, basis, tol.lp_pivot, tol.lp_stall, tol.lp_reinvert)
    allowed = np.ones(n + n_art, dtype=bool)

    if n_art:
        phase1 = np.zeros(n + n_art)
        phase1[n:] = 1.0
        tab.set_cost(phase1)
        st = tab.optimize(allowed, max_iter, tol.lp_feasibility)
        if st == INFEASIBLE or tab.objective() > tol.lp_feasibility * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution(INFEASIBLE, np.full(lp.n, np.nan), np.nan, tab.iterations)
        _drive_out_artificials(tab, n)
        allowed[n:] = False

    return _phase2(lp, sf, tab, A_full, n, n_art, allowed, tol, max_iter)


def _phase2(lp, sf, tab, A_full, n, n_art, allowed, tol, max_iter):
    m = A_full.shape[0]
    cost = np.concatenate([sf.c, np.zeros(n_art)])
    tab.set_cost(cost)
    status = tab.optimize(allowed, max_iter, tol.lp_feasibility)
    if status == INFEASIBLE:
        raise NumericalBreakdown("lost feasibility while removing the rhs perturbation")
    if status == UNBOUNDED:
        val = -np.inf if not lp.maximize else np.inf
        return LpSolution(UNBOUNDED, np.full(lp.n, np.nan), val, tab.iterations)

    tab.refactor()
    mm = len(tab.basis)
    z = np.zeros(n + n_art)
    z[tab.basis] = tab.T[:mm, -1]
    z = np.maximum(z, 0.0)
    x = sf.recover(z[:sf.n_struct])

    rows = tab.active_rows
    B = A_full[np.ix_(rows, tab.basis)]
    try:
        pi_active = np.linalg.solve(B.T, cost[tab.basis])
    except np.linalg.LinAlgError:
        raise NumericalBreakdown("singular final basis", condition=float("inf")) from None
    pi = np.zeros(m)
    pi[rows] = pi_active
    pi *= sf.row_sign
    pi *= sf.sign
    duals_eq = pi[:sf.m_eq]
    duals_ub = pi[sf.m_eq:sf.m_eq + sf.m_ub]

    viol = _max_violation(lp, x)
    scale = max(1.0, np.abs(lp.b_eq).max(initial=0.0), np.abs(lp.b_ub).max(initial=0.0))
    if viol > tol.lp_feasibility * scale:
        cond = float(np.linalg.cond(B))
        raise NumericalBreakdown(
            f"optimal basis violates constraints by {viol:.3e}", condition=cond
        )
    reduced = cost[:n] - A_full[rows][:, :n].T @ pi_active
    compl = float(np.max(np.abs(reduced * z[:n]), initial=0.0))
    obj = float(lp.c @ x)
    return LpSolution(
        OPTIMAL, x, obj, tab.iterations, duals_eq, duals_ub, viol, compl, tuple(tab.basis)
    )


def _drive_out_artificials(tab, n):
    m = len(tab.basis)
    keep = []
    for r in range(m):
        if tab.basis[r] < n:
            keep.append(r)
            continue
        row = tab.T[r, :n]
        nz = np.flatnonzero(np.abs(row) > 1e-9)
        if nz.size:
            j = int(nz[np.argmax(np.abs(row[nz]))])
            kernels.pivot(tab.T, r, j)
            tab.basis[r] = j
            keep.append(r)
        # else: redundant equality, dropped below
    if len(keep) < m:
        tab.active_rows = tab.active_rows[keep]
        tab.basis = [tab.basis[r] for r in keep]
    tab.refactor()


def _max_violation(lp, x):
    v = 0.0
    if lp.A_eq.shape[0]:
        v = max(v, float(np.abs(lp.A_eq @ x - lp.b_eq).max()))
    if lp.A_ub.shape[0]:
        v = max(v, float(np.maximum(lp.A_ub @ x - lp.b_ub, 0.0).max()))
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            v = max(v, lo - x[j])
        if hi is not None:
            v = max(v, x[j] - hi)
    return v


def _solve_from_basis(lp, sf, basis, tol, max_iter):
    if sf.m_ub or sf.n_struct != lp.n or any(lo != 0.0 or hi is not None for lo, hi in lp.bounds):
        raise ValueError("start_basis needs an equality-form problem with x >= 0")
    A, b = sf.A, sf.b
    m, n = A.shape
    if len(basis) != m:
        raise ValueError(f"start basis has {len(basis)} columns for {m} rows")
    tab = _Tableau(A, b, basis, tol.lp_pivot, tol.lp_stall, tol.lp_reinvert)
    if np.any(tab.T[:m, -1] < -tol.lp_feasibility):
        raise ValueError("start basis is not primal feasible")
    return _phase2(lp, sf, tab, A, n, 0, np.ones(n, dtype=bool), tol, max_iter)
