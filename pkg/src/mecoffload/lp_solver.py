"""Self-contained dense linear-programming solver.

Two-phase simplex with Bland's anti-cycling rule. All variables are
nonnegative by construction; upper bounds must be written as explicit rows.
Rows are equilibrated (scaled by their largest absolute coefficient) before
solving, which changes nothing about the solution set but keeps the fixed
tolerances meaningful across the very different magnitudes that show up in
the offloading models (seconds vs bits/s).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
FAILED = "failed"

RELATIONS = ("<=", "=", ">=")

FEASIBILITY_TOL = 1e-9
PIVOT_TOL = 1e-12


@dataclass
class LinearProgram:
    """Dense LP: optimize objective @ x subject to rows, x >= 0."""

    sense: str                      # "max" or "min"
    objective: np.ndarray
    rows: list                      # [(coeffs, relation, rhs), ...]
    n_vars: int

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise ValueError("objective length does not match n_vars")
        checked = []
        for coeffs, rel, rhs in self.rows:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (self.n_vars,):
                raise ValueError("constraint row length does not match n_vars")
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
            rhs = float(rhs)
            if not np.isfinite(rhs) or not np.all(np.isfinite(coeffs)):
                raise ValueError("constraint coefficients must be finite")
            checked.append((coeffs, rel, rhs))
        self.rows = checked


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    objective_value: float | None = None


def max_violation(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest row violation of x, with each row scaled by its max |coefficient|."""
    worst = max(0.0, -float(np.min(x)) if len(x) else 0.0)
    for coeffs, rel, rhs in lp.rows:
        scale = max(np.max(np.abs(coeffs)), abs(rhs), 1e-300)
        lhs = float(coeffs @ x)
        if rel == "<=":
            v = (lhs - rhs) / scale
        elif rel == ">=":
            v = (rhs - lhs) / scale
        else:
            v = abs(lhs - rhs) / scale
        worst = max(worst, v)
    return worst


def _pivot(T: np.ndarray, zrow: np.ndarray, r: int, c: int):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    zrow -= zrow[c] * T[r]


REDUCED_COST_TOL = 1e-9
REFACTOR_EVERY = 40


def _refactored_tableau(A, b, basis):
    """Rebuild the tableau B^-1 [A | b] from the original data; None if singular.

    One step of iterative refinement claws back most of the accuracy lost to
    an ill-conditioned basis.
    """
    B = A[:, basis]
    rhs = np.hstack([A, b[:, None]])
    try:
        sol = np.linalg.solve(B, rhs)
        sol += np.linalg.solve(B, rhs - B @ sol)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    return sol


def _bland_step(T, zrow, basis, pivot_tol):
    """One simplex pivot. Returns 'step', OPTIMAL, UNBOUNDED or FAILED.

    Entering follows Bland (lowest improvable index). Leaving uses a
    Harris-style two-pass ratio test: the ratio bound comes from every
    usable pivot with a tiny feasibility slack, and within that bound the
    numerically largest pivot wins (ties by lowest basis index), which keeps
    degenerate bases from forcing noise pivots.
    """
    entering = -1
    for j in range(T.shape[1] - 1):
        if zrow[j] < -REDUCED_COST_TOL:
            entering = j
            break
    if entering < 0:
        return OPTIMAL
    col = T[:, entering]
    rhs = T[:, -1]
    usable = col > pivot_tol
    if not np.any(usable):
        return UNBOUNDED
    ratios = rhs[usable] / col[usable]
    theta = float(np.min((rhs[usable] + 1e-9) / col[usable]))
    rows = np.flatnonzero(usable)
    in_bound = rows[ratios <= theta + 1e-15]
    if len(in_bound) == 0:
        in_bound = rows
    leave = -1
    for i in in_bound:
        if leave < 0 or col[i] > col[leave] * (1 + 1e-12) or (
                col[i] >= col[leave] * (1 - 1e-12) and basis[i] < basis[leave]):
            leave = i
    _pivot(T, zrow, leave, entering)
    basis[leave] = entering
    if not np.all(np.isfinite(T[:, -1])):
        return FAILED
    return "step"


def _zrow_for(T, cvec, basis):
    cb = cvec[basis]
    zrow = np.empty(T.shape[1])
    zrow[:-1] = T[:, :-1].T @ cb - cvec
    zrow[-1] = T[:, -1] @ cb
    return zrow


def _run_phase(A, b, cvec, basis, pivot_tol, max_iter):
    """Bland simplex maximizing cvec @ x, refactorizing the tableau periodically.

    A verdict (optimal/unbounded) only stands if it survives a fresh
    refactorization, so accumulated pivot roundoff cannot leak into results.
    Oscillation right at the reduced-cost tolerance (fresh numbers keep
    finding one marginal pivot without moving the objective) is accepted as
    optimal after a bounded number of confirm failures.
    Returns (status, T, basis).
    """
    iters = 0
    prev_obj = -np.inf
    stalled_confirms = 0
    reverts = 0
    checkpoint = list(basis)

    def fresh_tableau():
        """Refactor and verify primal feasibility; None demands a revert."""
        T = _refactored_tableau(A, b, basis)
        if T is None or float(np.min(T[:, -1])) < -1e-7:
            return None
        return T

    while iters <= max_iter:
        T = fresh_tableau()
        if T is None:
            # drift slipped a singular or infeasible basis through: back up
            # to the last verified basis
            basis[:] = checkpoint
            reverts += 1
            if reverts > 8:
                return FAILED, _refactored_tableau(A, b, basis), basis
            T = fresh_tableau()
            if T is None:
                return FAILED, None, basis
        checkpoint = list(basis)
        zrow = _zrow_for(T, cvec, basis)
        verdict = None
        for _ in range(REFACTOR_EVERY):
            step = _bland_step(T, zrow, basis, pivot_tol)
            iters += 1
            if step == "step":
                continue
            verdict = step
            break
        if verdict == FAILED:
            return FAILED, _refactored_tableau(A, b, basis), basis
        if verdict is None:
            continue
        # confirm the verdict on clean numbers
        T = fresh_tableau()
        if T is None:
            basis[:] = checkpoint
            reverts += 1
            if reverts > 8:
                return FAILED, _refactored_tableau(A, b, basis), basis
            continue
        zrow = _zrow_for(T, cvec, basis)
        step = _bland_step(T, zrow, basis, pivot_tol)
        if step != "step":
            if step == verdict or step in (OPTIMAL, UNBOUNDED):
                status = step if step in (OPTIMAL, UNBOUNDED) else FAILED
                return status, T, basis
            return FAILED, T, basis
        # fresh numbers allowed one more pivot: track whether these marginal
        # moves actually improve anything, and settle if they do not
        obj = float(cvec[basis] @ T[:, -1])
        if obj <= prev_obj + 1e-12 * (1.0 + abs(prev_obj)):
            stalled_confirms += 1
            if stalled_confirms >= 25 and verdict == OPTIMAL:
                T = fresh_tableau()
                if T is None:
                    basis[:] = checkpoint
                    T = _refactored_tableau(A, b, basis)
                return OPTIMAL, T, basis
        else:
            stalled_confirms = 0
        prev_obj = max(prev_obj, obj)
    return FAILED, _refactored_tableau(A, b, basis), basis


def solve(lp: LinearProgram, feasibility_tol: float = FEASIBILITY_TOL,
          pivot_tol: float = PIVOT_TOL) -> LpSolution:
    """Two-phase dense simplex. Deterministic for a given input."""
    n = lp.n_vars
    m = len(lp.rows)
    if m == 0:
        # No rows: bounded only if no objective coefficient pushes up.
        c = lp.objective if lp.sense == "max" else -lp.objective
        if np.any(c > 0):
            return LpSolution(UNBOUNDED)
        return LpSolution(OPTIMAL, np.zeros(n), 0.0)

    # Equilibrate rows and flip so every rhs is nonnegative.
    A = np.zeros((m, n))
    b = np.zeros(m)
    rels = []
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        scale = max(np.max(np.abs(coeffs)), abs(rhs))
        if scale <= 0.0:
            scale = 1.0
        a, r = coeffs / scale, rhs / scale
        if r < 0:
            a, r = -a, -r
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        A[i], b[i] = a, r
        rels.append(rel)

    # Column equilibration keeps variables of wildly different natural units
    # (seconds vs bits/s) from wrecking the basis conditioning.
    col_scale = np.max(np.abs(A), axis=0)
    col_scale[col_scale <= 0.0] = 1.0
    A = A / col_scale

    n_slack = sum(1 for r in rels if r == "<=")
    n_surp = sum(1 for r in rels if r == ">=")
    n_art = sum(1 for r in rels if r in ("=", ">="))
    slack0, surp0 = n, n + n_slack
    art0 = n + n_slack + n_surp
    ncols = art0 + n_art

    A_std = np.zeros((m, ncols))
    A_std[:, :n] = A
    basis = [0] * m
    si = ti = ai = 0
    for i, rel in enumerate(rels):
        if rel == "<=":
            A_std[i, slack0 + si] = 1.0
            basis[i] = slack0 + si
            si += 1
        else:
            if rel == ">=":
                A_std[i, surp0 + ti] = -1.0
                ti += 1
            A_std[i, art0 + ai] = 1.0
            basis[i] = art0 + ai
            ai += 1

    max_iter = 5000 + 200 * (m + ncols)

    # Phase one: drive the artificial variables to zero.
    if n_art:
        c1 = np.zeros(ncols)
        c1[art0:] = -1.0
        status, T, basis = _run_phase(A_std, b, c1, basis, pivot_tol, max_iter)
        if status == FAILED:
            return LpSolution(FAILED)
        art_sum = sum(T[i, -1] for i, bc in enumerate(basis) if bc >= art0)
        if art_sum > feasibility_tol * max(1.0, m):
            return LpSolution(INFEASIBLE)
        # Pivot leftover (zero-valued) artificials out of the basis.
        drop_rows = []
        for i in range(len(basis)):
            if basis[i] >= art0:
                piv = -1
                for j in range(art0):
                    if j not in basis and abs(T[i, j]) > pivot_tol * 1e3:
                        piv = j
                        break
                if piv < 0:
                    drop_rows.append(i)
                else:
                    zdummy = np.zeros(T.shape[1])
                    _pivot(T, zdummy, i, piv)
                    basis[i] = piv
        if drop_rows:
            keep = [i for i in range(len(basis)) if i not in drop_rows]
            A_std = A_std[keep]
            b = b[keep]
            basis = [basis[i] for i in keep]

    # Phase two on the real objective, artificial columns excluded.
    cvar = lp.objective / col_scale
    cmax = np.max(np.abs(cvar))
    cscale = cmax if cmax > 0 else 1.0
    c2 = np.zeros(art0)
    c2[:n] = cvar / cscale
    if lp.sense == "min":
        c2 = -c2
    status, T, basis = _run_phase(A_std[:, :art0], b, c2, basis, pivot_tol, max_iter)
    if status != OPTIMAL:
        return LpSolution(status)

    x = np.zeros(art0)
    for i, bc in enumerate(basis):
        x[bc] = T[i, -1]
    xvars = np.maximum(x[:n], 0.0) / col_scale
    # Tiny negatives are roundoff and get clamped; real violations are failures.
    if np.min(x[:n]) < -1e-6 * (1.0 + float(np.max(np.abs(x)))):
        return LpSolution(FAILED)
    if max_violation(lp, xvars) > 1e3 * feasibility_tol:
        return LpSolution(FAILED)
    return LpSolution(OPTIMAL, xvars, float(lp.objective @ xvars))


class UnboundedRegionError(ValueError):
    pass


class NoFeasibleVertexError(ValueError):
    pass


def vertex_enumeration_oracle(lp: LinearProgram, combo_limit: int = 400_000,
                              feasibility_tol: float = 1e-9) -> float:
    """Brute-force optimum over all basic solutions; test oracle for solve().

    Requires a bounded feasible region. A single aggregate box row
    sum(x) <= M is appended; if the optimum lands on it the region is
    reported as unbounded.
    """
    n, m = lp.n_vars, len(lp.rows)
    bmax = max([abs(float(r[2])) for r in lp.rows], default=1.0)
    box = 1e9 * max(1.0, bmax)

    rows = [(np.asarray(c, dtype=float), rel, float(rhs)) for c, rel, rhs in lp.rows]
    rows.append((np.ones(n), "<=", box))
    n_ineq = sum(1 for _, rel, _ in rows if rel != "=")
    mm = len(rows)
    ncols = n + n_ineq
    A = np.zeros((mm, ncols))
    b = np.zeros(mm)
    k = n
    for i, (coeffs, rel, rhs) in enumerate(rows):
        scale = max(np.max(np.abs(coeffs)), abs(rhs), 1e-300)
        A[i, :n] = coeffs / scale
        b[i] = rhs / scale
        if rel == "<=":
            A[i, k] = 1.0
            k += 1
        elif rel == ">=":
            A[i, k] = -1.0
            k += 1

    if mm > ncols:
        raise ValueError("vertex enumeration needs at least as many columns as "
                         "rows; reduce redundant equality rows")
    from math import comb
    if comb(ncols, mm) > combo_limit:
        raise ValueError(f"vertex enumeration too large: C({ncols},{mm}) bases")

    combos = np.array(list(itertools.combinations(range(ncols), mm)), dtype=int)
    sense_mul = 1.0 if lp.sense == "max" else -1.0
    best_val, best_x = None, None
    chunk = 20_000
    for lo in range(0, len(combos), chunk):
        cc = combos[lo:lo + chunk]
        B = A[:, cc].transpose(1, 0, 2)            # (K, mm, mm)
        sign, _ = np.linalg.slogdet(B)
        ok = sign != 0
        if not np.any(ok):
            continue
        rhs = np.broadcast_to(b, (int(ok.sum()), mm))[..., None]
        sol = np.linalg.solve(B[ok], rhs)[..., 0]
        resid = np.max(np.abs(np.einsum("kij,kj->ki", B[ok], sol) - b), axis=1)
        magnitude = 1.0 + np.max(np.abs(sol), axis=1)
        good = (resid <= 1e-7 * magnitude) & \
               (np.min(sol, axis=1) >= -feasibility_tol * magnitude)
        if not np.any(good):
            continue
        idx_ok = np.flatnonzero(ok)[good]
        for zvals, ci in zip(sol[good], idx_ok):
            z = np.zeros(ncols)
            z[cc[ci]] = zvals
            x = np.maximum(z[:n], 0.0)
            val = float(lp.objective @ x)
            if best_val is None or sense_mul * val > sense_mul * best_val + 0.0:
                best_val, best_x = val, x
    if best_val is None:
        raise NoFeasibleVertexError("no feasible basic solution: region empty")
    if float(np.sum(best_x)) >= box * (1.0 - 1e-6):
        raise UnboundedRegionError("optimum hit the enumeration box: region unbounded")
    return best_val


def lp_to_text(lp: LinearProgram) -> str:
    """Plain-text dump (objective line, one constraint per line) for bug reports."""

    def terms(coeffs):
        return " + ".join(f"{c:.17g}*x{j}" for j, c in enumerate(coeffs) if c != 0.0) or "0"

    lines = [f"{lp.sense}: {terms(lp.objective)}"]
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        lines.append(f"r{i}: {terms(coeffs)} {rel} {rhs:.17g}")
    lines.append("x >= 0")
    return "\n".join(lines)
