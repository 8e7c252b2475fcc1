"""Convex quadratic programming by a primal active-set method.

Solves

    min  1/2 x'Dx + c'x
    s.t. Ax + b <= 0,  Ex + d = 0,  lb <= x <= ub

for small dense problems with D symmetric positive semidefinite. The
working-set KKT systems carry a Tikhonov term rho = 1e-9 on the diagonal
so rank-deficient D (common when fitting capacities from few samples)
never breaks a solve; a final unregularized polish removes the bias
whenever the reduced system is nonsingular. All tie-breaks are by lowest
index, so identical inputs produce identical outputs.

Feasibility is established by a phase-1 subproblem min 1/2 t^2 over
(x, t) with every row relaxed by t; t* > 0 certifies infeasibility and
the most-violated rows are reported from the least-infeasible point.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

RHO = 1e-9
FEAS_TOL = 1e-8
STEP_TOL = 1e-11
# multipliers computed against the regularized KKT system carry noise of
# order rho * |x|; the drop threshold must sit safely above it
DUAL_TOL = 1e-7
PSD_FLOOR = -1e-8


class QPInputError(ValueError):
    """Malformed problem data: bad dimensions, asymmetry, NaN, or an
    indefinite D."""


@dataclass(frozen=True)
class QPProblem:
    """min 1/2 x'Dx + c'x with rows Ax + b <= 0, Ex + d = 0, lb <= x <= ub.

    A/b, E/d, lb/ub may each be omitted. Labels, when given, name the
    inequality and equality rows for reporting."""

    D: np.ndarray
    c: np.ndarray
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    E: np.ndarray | None = None
    d: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None
    ineq_labels: tuple[str, ...] | None = None
    eq_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        D = np.array(self.D, dtype=float)
        c = np.array(self.c, dtype=float).reshape(-1)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise QPInputError(f"D must be square, got shape {D.shape}")
        m = D.shape[0]
        if c.shape != (m,):
            raise QPInputError(f"c has shape {c.shape}, expected ({m},)")
        if not np.all(np.isfinite(D)) or not np.all(np.isfinite(c)):
            raise QPInputError("D or c contains NaN or Inf")
        if np.abs(D - D.T).max(initial=0.0) > 1e-10:
            raise QPInputError("D is not symmetric within 1e-10")
        object.__setattr__(self, "D", (D + D.T) / 2.0)
        object.__setattr__(self, "c", c)

        def norm_rows(mat, vec, name):
            if mat is None and vec is None:
                return None, None
            if mat is None or vec is None:
                raise QPInputError(f"{name} rows need both matrix and offset")
            mat = np.array(mat, dtype=float)
            vec = np.array(vec, dtype=float).reshape(-1)
            if mat.ndim != 2 or mat.shape[1] != m or mat.shape[0] != vec.shape[0]:
                raise QPInputError(
                    f"{name} dimensions {mat.shape}/{vec.shape} inconsistent "
                    f"with m={m}"
                )
            if not np.all(np.isfinite(mat)) or not np.all(np.isfinite(vec)):
                raise QPInputError(f"{name} rows contain NaN or Inf")
            return mat, vec

        A, b = norm_rows(self.A, self.b, "inequality")
        E, d = norm_rows(self.E, self.d, "equality")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "d", d)

        def norm_bound(v, name):
            if v is None:
                return None
            v = np.array(v, dtype=float).reshape(-1)
            if v.shape != (m,):
                raise QPInputError(f"{name} has shape {v.shape}, expected ({m},)")
            if np.any(np.isnan(v)):
                raise QPInputError(f"{name} contains NaN")
            return v

        object.__setattr__(self, "lb", norm_bound(self.lb, "lb"))
        object.__setattr__(self, "ub", norm_bound(self.ub, "ub"))
        for labels, rows, name in (
            (self.ineq_labels, A, "ineq_labels"),
            (self.eq_labels, E, "eq_labels"),
        ):
            if labels is not None:
                count = 0 if rows is None else rows.shape[0]
                if len(labels) != count:
                    raise QPInputError(f"{name} count does not match rows")

    @property
    def dim(self) -> int:
        return self.D.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.D @ x + self.c @ x)


@dataclass(frozen=True)
class KKTResiduals:
    stationarity: float
    primal: float
    complementarity: float
    dual: float

    def max_residual(self) -> float:
        return max(self.stationarity, self.primal, self.complementarity, self.dual)

    def to_dict(self) -> dict:
        return {
            "stationarity": self.stationarity,
            "primal": self.primal,
            "complementarity": self.complementarity,
            "dual": self.dual,
        }


@dataclass(frozen=True)
class QPSolution:
    x: np.ndarray = field(repr=False)
    objective: float
    status: str  # "optimal" | "infeasible" | "max-iterations"
    kkt: KKTResiduals
    iterations: int
    active: tuple[tuple[str, int], ...]  # (kind, index), kind in ineq/lb/ub/eq
    active_labels: tuple[str, ...]
    max_violation: float
    violated: tuple[tuple[str, float], ...]  # labels with gaps, worst first


def _row_label(problem: QPProblem, kind: str, idx: int) -> str:
    if kind == "ineq":
        if problem.ineq_labels is not None:
            return problem.ineq_labels[idx]
        return f"ineq[{idx}]"
    if kind == "eq":
        if problem.eq_labels is not None:
            return problem.eq_labels[idx]
        return f"eq[{idx}]"
    return f"{kind}[{idx}]"


def _stack_inequalities(problem: QPProblem):
    """All inequality rows as G x + h <= 0 plus (kind, index) tags."""
    m = problem.dim
    blocks, offsets, tags = [], [], []
    if problem.A is not None:
        blocks.append(problem.A)
        offsets.append(problem.b)
        tags.extend(("ineq", k) for k in range(problem.A.shape[0]))
    if problem.lb is not None:
        rows = np.nonzero(np.isfinite(problem.lb))[0]
        if rows.size:
            mat = np.zeros((rows.size, m))
            mat[np.arange(rows.size), rows] = -1.0
            blocks.append(mat)
            offsets.append(problem.lb[rows])
            tags.extend(("lb", int(i)) for i in rows)
    if problem.ub is not None:
        rows = np.nonzero(np.isfinite(problem.ub))[0]
        if rows.size:
            mat = np.zeros((rows.size, m))
            mat[np.arange(rows.size), rows] = 1.0
            blocks.append(mat)
            offsets.append(-problem.ub[rows])
            tags.extend(("ub", int(i)) for i in rows)
    if blocks:
        return np.vstack(blocks), np.concatenate(offsets), tags
    return np.zeros((0, m)), np.zeros(0), tags


def _psd_work_matrix(D: np.ndarray) -> np.ndarray:
    if D.shape[0] == 0:
        return D
    lam_min = float(np.linalg.eigvalsh(D)[0])
    if lam_min < PSD_FLOOR:
        raise QPInputError(
            f"D is not positive semidefinite (min eigenvalue {lam_min:.3e})"
        )
    if lam_min < 0.0:
        return D + (-lam_min) * np.eye(D.shape[0])
    return D


def _kkt_solve(Dreg, g, C, rhs):
    """Solve [[Dreg, C'], [C, 0]] [p, mult] = [-g, rhs]; lstsq fallback."""
    m = Dreg.shape[0]
    k = C.shape[0]
    M = np.zeros((m + k, m + k))
    M[:m, :m] = Dreg
    if k:
        M[:m, m:] = C.T
        M[m:, :m] = C
    full_rhs = np.concatenate([-g, rhs])
    try:
        sol = np.linalg.solve(M, full_rhs)
        if not np.all(np.isfinite(sol)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, full_rhs, rcond=None)[0]
    return sol[:m], sol[m:]


def _active_set_min(Dwork, c, G, h, E, d, x, max_iter):
    """Core loop: minimize over the polytope from a feasible x.

    Returns (x, ineq multipliers, eq multipliers, working set, iterations,
    hit_cap)."""
    m = Dwork.shape[0]
    Dreg = Dwork + RHO * np.eye(m)
    n_eq = 0 if E is None else E.shape[0]
    working: list[int] = []
    lam = np.zeros(G.shape[0])
    nu = np.zeros(n_eq)
    iterations = 0

    while iterations < max_iter:
        iterations += 1
        g = Dwork @ x + c
        if n_eq:
            C = np.vstack([E, G[working]]) if working else E
        else:
            C = G[working] if working else np.zeros((0, m))
        rhs = np.zeros(C.shape[0])
        p, mults = _kkt_solve(Dreg, g, C, rhs)

        if np.abs(p).max(initial=0.0) < STEP_TOL:
            nu = mults[:n_eq]
            w_mults = mults[n_eq:]
            lam = np.zeros(G.shape[0])
            if working:
                lam[working] = w_mults
            if not working or w_mults.min(initial=0.0) >= -DUAL_TOL:
                return x, lam, nu, list(working), iterations, False
            drop = int(np.argmin(w_mults))  # first minimum: lowest index
            working.pop(drop)
            continue

        alpha = 1.0
        blocker = -1
        in_working = np.zeros(G.shape[0], dtype=bool)
        if working:
            in_working[working] = True
        Gp = G @ p if G.shape[0] else np.zeros(0)
        Gx_h = G @ x + h if G.shape[0] else np.zeros(0)
        for idx in range(G.shape[0]):
            if in_working[idx] or Gp[idx] <= 1e-13:
                continue
            step = -Gx_h[idx] / Gp[idx]
            if step < 0.0:
                step = 0.0
            if step < alpha - 1e-15:
                alpha = step
                blocker = idx
        x = x + alpha * p
        if blocker >= 0 and alpha < 1.0:
            working.append(blocker)
            working.sort()

    return x, lam, nu, list(working), iterations, True


def _phase1(problem, G, h, x_init, max_iter):
    """Find a feasible point by relaxing every row with a slack t.

    The objective is 1/2 t^2 alone: any quadratic pull on x would trade
    a little infeasibility for a shorter x and inflate t* on feasible
    systems. At the optimum t* is the true minimax violation, so
    feasible systems land at t* = 0 up to rounding.

    Returns (x, feasible, t_star, iterations)."""
    m = problem.dim
    E, d = problem.E, problem.d
    if E is not None and E.shape[0]:
        # Shift onto the equality manifold first; its inconsistency is a
        # definitive infeasibility.
        correction = np.linalg.lstsq(E, -(d + E @ x_init), rcond=None)[0]
        x_init = x_init + correction
        if np.abs(E @ x_init + d).max(initial=0.0) > 1e-8:
            return x_init, False, float("inf"), 0
    if G.shape[0] == 0:
        return x_init, True, 0.0, 0

    viol = float((G @ x_init + h).max(initial=0.0))
    if viol <= FEAS_TOL:
        return x_init, True, 0.0, 0

    D1 = np.zeros((m + 1, m + 1))
    D1[m, m] = 1.0
    c1 = np.zeros(m + 1)
    G1 = np.hstack([G, -np.ones((G.shape[0], 1))])
    E1 = None if E is None else np.hstack([E, np.zeros((E.shape[0], 1))])
    z = np.concatenate([x_init, [viol + 1.0]])
    z, _, _, _, iters, hit_cap = _active_set_min(
        D1, c1, G1, h, E1, d, z, max_iter
    )
    t_star = float(z[m])
    x = z[:m]
    residual = float((G @ x + h).max(initial=0.0))
    if residual > FEAS_TOL and t_star <= 1e-7:
        # rows are only violated by slack-level dust; one least-squares
        # pull onto the offending rows usually clears it
        bad = np.nonzero(G @ x + h > 0.0)[0]
        Gb = G[bad]
        gap = Gb @ x + h[bad]
        x = x - Gb.T @ np.linalg.lstsq(Gb @ Gb.T, gap, rcond=None)[0]
        residual = float((G @ x + h).max(initial=0.0))
    feasible = (not hit_cap) and t_star <= 1e-7 and residual <= FEAS_TOL
    return x, feasible, max(t_star, 0.0), iters


def _polish(problem, G, h, x, working, n_eq):
    """Re-solve the working-set equality QP without regularization; keep
    the result only when it stays feasible and does not worsen."""
    m = problem.dim
    D, c = problem.D, problem.c
    rows = [problem.E] if problem.E is not None else []
    rhs_parts = [-problem.d] if problem.d is not None else []
    if working:
        rows.append(G[working])
        rhs_parts.append(-h[np.array(working, dtype=int)])
    C = np.vstack(rows) if rows else np.zeros((0, m))
    rhs = np.concatenate(rhs_parts) if rhs_parts else np.zeros(0)
    k = C.shape[0]
    M = np.zeros((m + k, m + k))
    M[:m, :m] = D
    if k:
        M[:m, m:] = C.T
        M[m:, :m] = C
    full_rhs = np.concatenate([-c, rhs])
    try:
        sol = np.linalg.solve(M, full_rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    if np.abs(M @ sol - full_rhs).max(initial=0.0) > 1e-7:
        return None
    x_new = sol[:m]
    mults = sol[m:]
    if G.shape[0] and float((G @ x_new + h).max(initial=0.0)) > FEAS_TOL:
        return None
    if problem.objective(x_new) > problem.objective(x) + 1e-12:
        return None
    return x_new, mults


def _residuals(problem, G, h, x, lam, nu):
    D, c = problem.D, problem.c
    grad = D @ x + c
    if G.shape[0]:
        grad = grad + G.T @ lam
    if problem.E is not None and problem.E.shape[0]:
        grad = grad + problem.E.T @ nu
    stationarity = float(np.abs(grad).max(initial=0.0))
    primal = 0.0
    if G.shape[0]:
        primal = float(np.maximum(G @ x + h, 0.0).max(initial=0.0))
    if problem.E is not None and problem.E.shape[0]:
        primal = max(primal, float(np.abs(problem.E @ x + problem.d).max()))
    complementarity = 0.0
    if G.shape[0]:
        complementarity = float(np.abs(lam * (G @ x + h)).max(initial=0.0))
    dual = float(max(0.0, -lam.min(initial=0.0)))
    return KKTResiduals(stationarity, primal, complementarity, dual)


def solve_qp(problem: QPProblem, x0: Sequence[float] | None = None) -> QPSolution:
    """Solve the problem; deterministic for identical inputs.

    x0, when given and feasible, is used as the starting point (an exact
    minimizer that is feasible at x0 is returned bit-for-bit)."""
    m = problem.dim
    Dwork = _psd_work_matrix(problem.D)
    G, h, tags = _stack_inequalities(problem)
    n_eq = 0 if problem.E is None else problem.E.shape[0]
    max_iter = 50 * max(m, 1) + 25

    total_iters = 0
    start = None
    if x0 is not None:
        cand = np.array(x0, dtype=float).reshape(-1)
        if cand.shape != (m,):
            raise QPInputError(f"x0 has shape {cand.shape}, expected ({m},)")
        feas = (
            float((G @ cand + h).max(initial=0.0)) <= FEAS_TOL
            if G.shape[0]
            else True
        )
        if feas and n_eq:
            feas = np.abs(problem.E @ cand + problem.d).max() <= FEAS_TOL
        if feas:
            start = cand
    if start is None:
        if problem.lb is not None or problem.ub is not None:
            lo = problem.lb if problem.lb is not None else np.full(m, -np.inf)
            hi = problem.ub if problem.ub is not None else np.full(m, np.inf)
            mid = np.zeros(m)
            both = np.isfinite(lo) & np.isfinite(hi)
            mid[both] = (lo[both] + hi[both]) / 2.0
            only_lo = np.isfinite(lo) & ~np.isfinite(hi)
            mid[only_lo] = lo[only_lo]
            only_hi = ~np.isfinite(lo) & np.isfinite(hi)
            mid[only_hi] = hi[only_hi]
            x_init = mid
        else:
            x_init = np.zeros(m)
        x_start, feasible, t_star, iters = _phase1(problem, G, h, x_init, max_iter)
        total_iters += iters
        if not feasible:
            gaps = G @ x_start + h if G.shape[0] else np.zeros(0)
            eq_gaps = (
                np.abs(problem.E @ x_start + problem.d) if n_eq else np.zeros(0)
            )
            worst = []
            for k in np.argsort(-gaps):
                if gaps[k] > FEAS_TOL:
                    kind, idx = tags[k]
                    worst.append((_row_label(problem, kind, idx), float(gaps[k])))
            for k in np.argsort(-eq_gaps):
                if eq_gaps[k] > FEAS_TOL:
                    worst.append((_row_label(problem, "eq", int(k)), float(eq_gaps[k])))
            max_violation = max(
                float(gaps.max(initial=0.0)), float(eq_gaps.max(initial=0.0))
            )
            lam = np.zeros(G.shape[0])
            nu = np.zeros(n_eq)
            return QPSolution(
                x=x_start,
                objective=problem.objective(x_start),
                status="infeasible",
                kkt=_residuals(problem, G, h, x_start, lam, nu),
                iterations=total_iters,
                active=(),
                active_labels=(),
                max_violation=max_violation,
                violated=tuple(worst[:10]),
            )
        start = x_start

    x, lam, nu, working, iters, hit_cap = _active_set_min(
        Dwork, problem.c, G, h, problem.E, problem.d, start, max_iter
    )
    total_iters += iters

    if not hit_cap:
        polished = _polish(problem, G, h, x, working, n_eq)
        if polished is not None:
            x_new, mults = polished
            nu = mults[:n_eq]
            lam = np.zeros(G.shape[0])
            if working:
                w = mults[n_eq:]
                if w.min(initial=0.0) >= -1e-7:
                    lam[working] = np.maximum(w, 0.0)
                    x = x_new
                # A clearly negative polish multiplier means the working
                # set was not optimal for the unregularized problem; keep
                # the regularized iterate and its multipliers instead.
                else:
                    x2, lam2, nu2, working2, it2, cap2 = _active_set_min(
                        Dwork, problem.c, G, h, problem.E, problem.d, x,
                        max_iter,
                    )
                    total_iters += it2
                    if not cap2:
                        x, lam, nu, working = x2, lam2, nu2, working2
            else:
                x = x_new

    kkt = _residuals(problem, G, h, x, lam, nu)
    # status is decided by the verified residuals, so an iterate that hit
    # the cap while already optimal is still reported as such
    if kkt.max_residual() < 1e-6 and kkt.primal < FEAS_TOL:
        status = "optimal"
    else:
        status = "max-iterations"

    active = tuple(tags[k] for k in working)
    active += tuple(("eq", k) for k in range(n_eq))
    labels = tuple(_row_label(problem, kind, idx) for kind, idx in active)
    return QPSolution(
        x=x,
        objective=problem.objective(x),
        status=status,
        kkt=kkt,
        iterations=total_iters,
        active=active,
        active_labels=labels,
        max_violation=float(kkt.primal),
        violated=(),
    )


# --- debug dump -------------------------------------------------------------


def dump_problem(problem: QPProblem) -> str:
    """Plain-text dump (matrix-market flavored) for reproducing solver
    inputs; load_problem parses it back."""
    lines = ["%%qp-problem 1"]

    def emit_matrix(name, mat):
        if mat is None:
            return
        lines.append(f"matrix {name} {mat.shape[0]} {mat.shape[1]}")
        for row in mat:
            lines.append(" ".join(repr(float(v)) for v in row))

    def emit_vector(name, vec):
        if vec is None:
            return
        lines.append(f"vector {name} {vec.shape[0]}")
        lines.append(" ".join(repr(float(v)) for v in vec))

    emit_matrix("D", problem.D)
    emit_vector("c", problem.c)
    emit_matrix("A", problem.A)
    emit_vector("b", problem.b)
    emit_matrix("E", problem.E)
    emit_vector("d", problem.d)
    emit_vector("lb", problem.lb)
    emit_vector("ub", problem.ub)
    return "\n".join(lines) + "\n"


def load_problem(text: str) -> QPProblem:
    """Parse a dump_problem() document."""
    tokens_by_name: dict[str, np.ndarray] = {}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("%%qp-problem"):
        raise QPInputError("not a qp-problem dump")
    i = 1
    while i < len(lines):
        head = lines[i].split()
        if head[0] == "matrix":
            name, rows, cols = head[1], int(head[2]), int(head[3])
            data = [
                [float(v) for v in lines[i + 1 + r].split()] for r in range(rows)
            ]
            arr = np.array(data, dtype=float).reshape(rows, cols)
            tokens_by_name[name] = arr
            i += 1 + rows
        elif head[0] == "vector":
            name, size = head[1], int(head[2])
            arr = np.array([float(v) for v in lines[i + 1].split()], dtype=float)
            if arr.shape != (size,):
                raise QPInputError(f"vector {name} length mismatch")
            tokens_by_name[name] = arr
            i += 2
        else:
            raise QPInputError(f"unrecognized dump line: {lines[i]!r}")
    return QPProblem(
        D=tokens_by_name["D"],
        c=tokens_by_name["c"],
        A=tokens_by_name.get("A"),
        b=tokens_by_name.get("b"),
        E=tokens_by_name.get("E"),
        d=tokens_by_name.get("d"),
        lb=tokens_by_name.get("lb"),
        ub=tokens_by_name.get("ub"),
    )
