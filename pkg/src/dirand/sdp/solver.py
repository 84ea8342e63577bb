"""Primal-dual interior-point method for block LMI maximization.

The iteration is infeasible-start path following with the HKM scaling
direction and a Mehrotra predictor-corrector step.  For

    maximize  c.y   s.t.   S_k = F0_k + sum_i y_i F_i_k >= 0,   A y = g

the method tracks (y, lambda) together with slack blocks S_k and dual
blocks X_k, driving the residuals

    d      = c + [sum_k <F_i_k, X_k>]_i - A^T lambda      (dual)
    Rp_k   = F0_k + sum_i y_i F_i_k - S_k                 (slack)
    rA     = g - A y                                      (equality)
    X_k S_k -> 0                                          (complementarity)

to zero.  Eliminating (dX, dS) leaves a positive definite Schur system in
dy that is block diagonal over variable groups not sharing a PSD block,
plus a small bordered system for the equality multipliers; this is what
keeps multi-block guessing programs with a handful of coupling
constraints tractable.

Weak duality is verified every iteration through the exact identity

    dual - primal = sum_k <X_k, S_k + Rp_k> + lambda . rA - d . y,

whose violation beyond rounding would mean the assembled system itself is
wrong (it never fires on sane data).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .problem import SDPProblem
from .schur import BlockKernel, complete_upper


@dataclass
class SolverSettings:
    """Interior-point controls; tolerances are relative to problem scale."""

    max_iterations: int = 200
    gap_tolerance: float = 1e-9
    feasibility_tolerance: float = 1e-9
    step_fraction: float = 0.98
    verbose: bool = False

    def __post_init__(self) -> None:
        if self.gap_tolerance <= 0 or self.feasibility_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass
class IterationRecord:
    iteration: int
    mu: float
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    step_primal: float
    step_dual: float


@dataclass
class Solution:
    """Solver outcome; iterates are kept for the dual certificate."""

    status: str
    primal_objective: float
    dual_objective: float
    duality_gap: float
    primal_residual: float
    dual_residual: float
    certified_bound: float
    iterations: int
    y: np.ndarray
    eq_multipliers: np.ndarray
    dual_blocks: list[np.ndarray]
    slack_blocks: list[np.ndarray]
    log: list[IterationRecord] = field(default_factory=list)
    message: str = ""

    def summary(self) -> dict:
        return {
            "status": self.status,
            "primal_objective": self.primal_objective,
            "dual_objective": self.dual_objective,
            "duality_gap": self.duality_gap,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "certified_bound": self.certified_bound,
            "iterations": self.iterations,
            "message": self.message,
        }


class NumericalBreakdown(RuntimeError):
    """Raised internally when factorizations fail beyond repair."""


def _chol(mat: np.ndarray) -> np.ndarray:
    """Cholesky factor with escalating diagonal jitter on failure."""
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        pass
    n = mat.shape[0]
    base = max(float(np.trace(mat)) / max(n, 1), 1.0)
    for exponent in (-14, -12, -10, -8):
        try:
            return np.linalg.cholesky(mat + (base * 10.0**exponent) * np.eye(n))
        except np.linalg.LinAlgError:
            continue
    raise NumericalBreakdown("Cholesky failed despite jitter")


def _max_step(chol_lower: np.ndarray, direction: np.ndarray) -> float:
    """Largest alpha with M + alpha D >= 0, via eigmin of L^-1 D L^-T."""
    t = sla.solve_triangular(chol_lower, direction, lower=True, check_finite=False)
    t = sla.solve_triangular(chol_lower, t.T, lower=True, check_finite=False)
    eigmin = float(np.linalg.eigvalsh((t + t.T) / 2.0)[0])
    if eigmin >= -1e-14:
        return math.inf
    return -1.0 / eigmin


def _sym(mat: np.ndarray) -> np.ndarray:
    return (mat + mat.T) / 2.0


class _SPDFactor:
    """Cholesky with Jacobi equilibration and escalating regularization."""

    def __init__(self, mat: np.ndarray, what: str):
        diag = np.abs(np.diag(mat)).copy()
        diag[diag <= 0.0] = 1.0
        self.d = np.sqrt(diag)
        scaled = mat / np.outer(self.d, self.d)
        reg = 0.0
        while True:
            try:
                shifted = scaled + reg * np.eye(scaled.shape[0]) if reg else scaled
                self.factor = sla.cho_factor(shifted, lower=True, check_finite=False)
                break
            except np.linalg.LinAlgError:
                reg = max(reg * 100.0, 1e-14)
                if reg > 1e-2:
                    raise NumericalBreakdown(f"{what} factorization failed")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if rhs.ndim == 1:
            out = sla.cho_solve(self.factor, rhs / self.d, check_finite=False)
            return out / self.d
        out = sla.cho_solve(self.factor, rhs / self.d[:, None], check_finite=False)
        return out / self.d[:, None]


class _Groups:
    """Static structure: variable groups and per-block Schur kernels."""

    def __init__(self, problem: SDPProblem):
        self.groups = problem.variable_components()
        self.group_of_var = np.empty(problem.num_vars, dtype=np.int64)
        self.local_index = np.empty(problem.num_vars, dtype=np.int64)
        for gi, grp in enumerate(self.groups):
            self.group_of_var[grp] = gi
            self.local_index[grp] = np.arange(len(grp))
        self.block_group: list[int] = []
        self.kernels: list[BlockKernel] = []
        for blk in problem.blocks:
            vs = blk.variables()
            if len(vs) == 0:
                raise ValueError("every PSD block must involve at least one variable")
            gi = int(self.group_of_var[vs[0]])
            local = {int(v): int(self.local_index[v]) for v in vs}
            self.block_group.append(gi)
            self.kernels.append(BlockKernel(blk, local, len(self.groups[gi])))

    def assemble(self, X: list[np.ndarray], Sinv: list[np.ndarray]) -> list[np.ndarray]:
        mats = [np.zeros((len(g), len(g))) for g in self.groups]
        for blk_i, kernel in enumerate(self.kernels):
            kernel.accumulate(mats[self.block_group[blk_i]], X[blk_i], Sinv[blk_i])
        for H in mats:
            complete_upper(H)
        return mats


class _KKT:
    """Factorized KKT system: block-diagonal H plus equality border A.

    Solutions get two rounds of iterative refinement against the stored
    (unfactored) matrices, which buys the last digits the path following
    needs once the system turns ill-conditioned near the optimum.
    """

    def __init__(self, H_groups: list[np.ndarray], groups: list[np.ndarray], A: np.ndarray | None):
        self.groups = groups
        self.H_groups = H_groups
        self.factors = [_SPDFactor(H, "Schur") for H in H_groups]
        self.A = A if A is not None and len(A) else None
        if self.A is not None:
            self.hinv_at = self.solve_h(self.A.T.copy())
            self.border = _SPDFactor(_sym(self.A @ self.hinv_at), "border")

    def solve_h(self, rhs: np.ndarray) -> np.ndarray:
        out = np.empty_like(rhs)
        for grp, factor in zip(self.groups, self.factors):
            out[grp] = factor.solve(rhs[grp])
        return out

    def mult_h(self, vec: np.ndarray) -> np.ndarray:
        out = np.empty_like(vec)
        for grp, H in zip(self.groups, self.H_groups):
            out[grp] = H @ vec[grp]
        return out

    def _solve_once(self, v: np.ndarray, r_eq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        hinv_v = self.solve_h(v)
        if self.A is None:
            return hinv_v, np.zeros(0)
        dlam = self.border.solve(self.A @ hinv_v - r_eq)
        return hinv_v - self.hinv_at @ dlam, dlam

    def solve(self, v: np.ndarray, r_eq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Solve H dy + A^T dlam = v, A dy = r_eq, with refinement."""
        dy, dlam = self._solve_once(v, r_eq)
        for _ in range(2):
            res_v = v - self.mult_h(dy)
            if self.A is not None:
                res_v -= self.A.T @ dlam
                res_eq = r_eq - self.A @ dy
            else:
                res_eq = r_eq
            cy, clam = self._solve_once(res_v, res_eq)
            dy = dy + cy
            dlam = dlam + clam
        return dy, dlam


def _preprocess_equalities(
    problem: SDPProblem, scale: float
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Drop dependent equality rows; flag inconsistent systems."""
    if problem.eq_lhs is None or not len(problem.eq_lhs):
        return np.zeros((0, problem.num_vars)), np.zeros(0), True
    A = np.asarray(problem.eq_lhs, dtype=float)
    g = np.asarray(problem.eq_rhs, dtype=float)
    _, r, piv = sla.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(A.shape) * np.finfo(float).eps * (diag[0] if len(diag) else 1.0)
    rank = int(np.sum(diag > tol))
    if rank == len(g):
        return A, g, True
    keep = np.sort(piv[:rank])
    y0, *_ = np.linalg.lstsq(A[keep], g[keep], rcond=None)
    consistent = bool(np.max(np.abs(A @ y0 - g)) <= 1e-7 * scale)
    return A[keep], g[keep], consistent


def solve(problem: SDPProblem, settings: SolverSettings | None = None) -> Solution:
    """Run the interior-point method and certify the result.

    The returned status is honest: ``optimal`` means the feasibility
    residuals and the relative duality gap met their tolerances,
    ``iteration-limit`` and ``near-optimal`` return the best iterate with
    a message, and ``infeasible`` reports dual-objective divergence with
    vanishing dual residual.  The certified bound always comes from the
    dual side, never from the primal objective.
    """
    from .certificate import dual_certificate_check

    settings = settings or SolverSettings()
    scale = problem.coefficient_scale()
    A, g, consistent = _preprocess_equalities(problem, scale)
    c = np.asarray(problem.objective, dtype=float)
    blocks = problem.blocks
    n_total = sum(b.size for b in blocks)
    groups = _Groups(problem)
    has_eq = len(g) > 0

    y = np.zeros(problem.num_vars)
    lam = np.zeros(len(g))
    S = [scale * np.eye(b.size) for b in blocks]
    X = [scale * np.eye(b.size) for b in blocks]

    def lincomb(blk_i: int, vec: np.ndarray) -> np.ndarray:
        return blocks[blk_i].matrix(vec, include_f0=False)

    def evaluate():
        Rp = []
        for k, blk in enumerate(blocks):
            Fk = lincomb(k, y)
            if blk.f0 is not None:
                Fk = Fk + blk.f0
            Rp.append(Fk - S[k])
        rA = g - A @ y if has_eq else np.zeros(0)
        d = c.copy()
        for k, blk in enumerate(blocks):
            d += blk.inner_products(X[k], problem.num_vars)
        if has_eq:
            d -= A.T @ lam
        primal = float(c @ y)
        dual = float(
            sum(np.sum(blk.f0 * X[k]) for k, blk in enumerate(blocks) if blk.f0 is not None)
        )
        if has_eq:
            dual += float(lam @ g)
        comp = float(sum(np.sum(X[k] * S[k]) for k in range(len(blocks))))
        pres = max(
            max((float(np.max(np.abs(R))) for R in Rp), default=0.0),
            float(np.max(np.abs(rA))) if has_eq else 0.0,
        )
        dres = float(np.max(np.abs(d)))
        # Weak-duality identity; a gross violation means the assembled
        # system is wrong, so fail loudly rather than report bad bounds.
        slack = comp + sum(float(np.sum(X[k] * Rp[k])) for k in range(len(blocks)))
        slack += float(lam @ rA) if has_eq else 0.0
        slack -= float(d @ y)
        err = abs((dual - primal) - slack)
        if not math.isfinite(err) or err > 1e-6 * scale * (
            1.0 + abs(dual) + abs(primal) + comp
        ):
            raise AssertionError(f"weak-duality identity violated: error {err:.3e}")
        return Rp, rA, d, primal, dual, comp, pres, dres

    if not consistent:
        return Solution(
            status="infeasible",
            primal_objective=math.nan,
            dual_objective=math.nan,
            duality_gap=math.nan,
            primal_residual=math.inf,
            dual_residual=math.inf,
            certified_bound=math.inf,
            iterations=0,
            y=y, eq_multipliers=lam, dual_blocks=X, slack_blocks=S,
            message="equality constraints are inconsistent",
        )

    gamma = settings.step_fraction
    log: list[IterationRecord] = []
    status = "iteration-limit"
    message = ""
    stall = 0
    iterations_done = 0

    while iterations_done < settings.max_iterations:
        Rp, rA, d, primal_obj, dual_obj, comp, pres, dres = evaluate()
        mu = comp / n_total
        gap = dual_obj - primal_obj
        rel_gap = abs(gap) / (1.0 + abs(dual_obj))
        if settings.verbose:
            print(
                f"  it {iterations_done:3d}  mu {mu: .3e}  gap {gap: .3e}  "
                f"pres {pres: .3e}  dres {dres: .3e}"
            )

        if (
            rel_gap <= settings.gap_tolerance
            and pres <= settings.feasibility_tolerance * scale
            and dres <= settings.feasibility_tolerance * scale
        ):
            status = "optimal"
            break

        # Primal infeasibility surfaces as the dual objective diverging
        # while dual feasibility holds (an improving dual ray).
        if dual_obj < -1e9 * scale and dres <= 1e-6 * scale:
            status = "infeasible"
            message = "dual objective diverges along a feasible ray"
            break
        if mu < 1e-14 * scale * scale and pres > 1e4 * settings.feasibility_tolerance * scale:
            status = "infeasible"
            message = "complementarity vanished with stuck primal residual"
            break

        try:
            S_chol = [_chol(S[k]) for k in range(len(blocks))]
            Sinv = [
                _sym(sla.cho_solve((S_chol[k], True), np.eye(blocks[k].size), check_finite=False))
                for k in range(len(blocks))
            ]
            X_chol = [_chol(X[k]) for k in range(len(blocks))]
            kkt = _KKT(groups.assemble(X, Sinv), groups.groups, A if has_eq else None)

            def direction(Rc: list[np.ndarray]):
                v = d.copy()
                for k, blk in enumerate(blocks):
                    T = _sym((Rc[k] - X[k] @ Rp[k]) @ Sinv[k])
                    v += blk.inner_products(T, problem.num_vars)
                dy, dlam = kkt.solve(v, rA)
                dS, dX = [], []
                for k in range(len(blocks)):
                    dSk = lincomb(k, dy) + Rp[k]
                    dX.append(_sym((Rc[k] - X[k] @ dSk) @ Sinv[k]))
                    dS.append(dSk)
                return dy, dlam, dS, dX

            Rc_aff = [-(X[k] @ S[k]) for k in range(len(blocks))]
            dy_a, dlam_a, dS_a, dX_a = direction(Rc_aff)
            ap_a = min(1.0, min(_max_step(S_chol[k], dS_a[k]) for k in range(len(blocks))))
            ad_a = min(1.0, min(_max_step(X_chol[k], dX_a[k]) for k in range(len(blocks))))
            comp_aff = sum(
                float(np.sum((X[k] + ad_a * dX_a[k]) * (S[k] + ap_a * dS_a[k])))
                for k in range(len(blocks))
            )
            sigma = min(1.0, max(1e-8, (max(comp_aff, 0.0) / comp) ** 3))

            Rc = [
                sigma * mu * np.eye(blocks[k].size) - X[k] @ S[k] - dX_a[k] @ dS_a[k]
                for k in range(len(blocks))
            ]
            dy, dlam, dS, dX = direction(Rc)

            ap = min(1.0, gamma * min(_max_step(S_chol[k], dS[k]) for k in range(len(blocks))))
            ad = min(1.0, gamma * min(_max_step(X_chol[k], dX[k]) for k in range(len(blocks))))
            if max(ap, ad) < 1e-8:
                # Recentre: a pure sigma = 1 step can free a blocked iterate.
                Rc = [
                    mu * np.eye(blocks[k].size) - X[k] @ S[k]
                    for k in range(len(blocks))
                ]
                dy, dlam, dS, dX = direction(Rc)
                ap = min(1.0, gamma * min(_max_step(S_chol[k], dS[k]) for k in range(len(blocks))))
                ad = min(1.0, gamma * min(_max_step(X_chol[k], dX[k]) for k in range(len(blocks))))
        except NumericalBreakdown as exc:
            status = "near-optimal"
            message = f"numerical breakdown: {exc}"
            break

        if not (math.isfinite(ap) and math.isfinite(ad)) or min(ap, ad) < 0:
            status = "near-optimal"
            message = "non-finite step length"
            break

        y = y + ap * dy
        if has_eq:
            lam = lam + ad * dlam
        for k in range(len(blocks)):
            S[k] = _sym(S[k] + ap * dS[k])
            X[k] = _sym(X[k] + ad * dX[k])
        iterations_done += 1
        log.append(
            IterationRecord(
                iteration=iterations_done, mu=mu,
                primal_objective=primal_obj, dual_objective=dual_obj,
                primal_residual=pres, dual_residual=dres,
                step_primal=ap, step_dual=ad,
            )
        )
        if max(ap, ad) < 1e-8:
            stall += 1
            if stall >= 3:
                status = "near-optimal"
                message = "step lengths collapsed"
                break
        else:
            stall = 0
    else:
        status = "iteration-limit"
        message = f"no convergence within {settings.max_iterations} iterations"

    # Report the final iterate's true residuals and objectives.
    _, _, _, primal_obj, dual_obj, comp, pres, dres = evaluate()
    sol = Solution(
        status=status,
        primal_objective=primal_obj,
        dual_objective=dual_obj,
        duality_gap=dual_obj - primal_obj,
        primal_residual=pres,
        dual_residual=dres,
        certified_bound=math.inf,
        iterations=iterations_done,
        y=y,
        eq_multipliers=lam,
        dual_blocks=X,
        slack_blocks=S,
        log=log,
        message=message,
    )
    if status != "infeasible":
        dual_certificate_check(problem, sol, update=True)
    return sol
