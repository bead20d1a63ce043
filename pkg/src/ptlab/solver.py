"""Equality-constrained l1 minimization over a coefficient set.

solve_p1 minimizes ||x||_{1,X} subject to A x = y and x in X^N via ADMM on
min ||z||_{1,X} + indicator(A x = y), x = z.  The x-update is the projection
onto the affine constraint set through a cached pseudoinverse; the z-update
is the coefficient-set prox.  Block-diagonal operators are solved as a
batch of independent per-block problems iterating in lockstep, which is the
separability of the problem made concrete.
"""

import enum
from dataclasses import dataclass, replace

import numpy as np

from .coeffsets import CoeffSet, SignalVector, norm_l1x, prox_step
from .ensembles import MeasurementOperator, OperatorKind


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-9          # relative primal/dual stopping tolerance
    feas_tol: float = 1e-7     # constraint violation of the returned point
    obj_tol: float = 1e-7      # calibration target vs the LP oracle
    max_iters: int = 50000
    rho: float = 1.0           # ADMM penalty, residual-balanced during warmup
    over_relax: float = 1.0    # values near 2 stall on degenerate instances
    adapt_every: int = 50
    adapt_until: int = 1000    # convergence needs an eventually fixed penalty


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class SolveResult:
    x1: SignalVector
    status: SolveStatus
    primal_residual: float
    dual_residual: float
    iterations: int
    value: float


def _batched_pinv(stack):
    # broadcast-aware: a repeated stack shares one factorization
    if stack.base is not None and stack.strides[0] == 0:
        return np.broadcast_to(np.linalg.pinv(stack[0]),
                               (stack.shape[0], stack.shape[2], stack.shape[1]))
    return np.linalg.pinv(stack)


def admm_l1x(stack, y_blocks, coeff_set, opts=DEFAULT_OPTIONS):
    """Core batched ADMM.  stack: (B, r, c) real blocks; y_blocks: (B, r).

    Returns (z, status, r_norm, s_norm, iterations) with z of shape (B, c).
    """
    B, r, c = stack.shape
    pinv = _batched_pinv(stack)
    rho = opts.rho
    alpha = opts.over_relax

    z = np.einsum("bcr,br->bc", pinv, y_blocks)
    feas = np.linalg.norm(np.einsum("brc,bc->br", stack, z) - y_blocks)
    ynorm = np.linalg.norm(y_blocks)
    if feas > opts.feas_tol * (1.0 + ynorm):
        zero = np.zeros((B, c))
        return zero, SolveStatus.INFEASIBLE, feas, 0.0, 0

    u = np.zeros_like(z)
    sq_dim = np.sqrt(B * c)
    r_norm = s_norm = np.inf
    it = 0
    for it in range(1, opts.max_iters + 1):
        v = z - u
        x = v - np.einsum("bcr,br->bc", pinv,
                          np.einsum("brc,bc->br", stack, v) - y_blocks)
        x_hat = alpha * x + (1.0 - alpha) * z
        z_old = z
        z = _prox_blocks(x_hat + u, 1.0 / rho, coeff_set)
        u = u + x_hat - z
        r_norm = float(np.linalg.norm(x - z))
        s_norm = float(rho * np.linalg.norm(z - z_old))
        eps_pri = opts.tol * (sq_dim + max(np.linalg.norm(x), np.linalg.norm(z)))
        eps_dual = opts.tol * (sq_dim + rho * np.linalg.norm(u))
        if r_norm <= eps_pri and s_norm <= eps_dual:
            return z, SolveStatus.CONVERGED, r_norm, s_norm, it
        if it <= opts.adapt_until and it % opts.adapt_every == 0:
            if r_norm > 10.0 * s_norm:
                rho *= 2.0
                u /= 2.0
            elif s_norm > 10.0 * r_norm:
                rho /= 2.0
                u *= 2.0
    return z, SolveStatus.MAX_ITERS, r_norm, s_norm, it


def _prox_blocks(v, t, coeff_set):
    if coeff_set is CoeffSet.COMPLEX:
        B, c = v.shape
        pairs = v.reshape(B, c // 2, 2)
        nrm = np.linalg.norm(pairs, axis=2, keepdims=True)
        scale = np.where(nrm > t, 1.0 - t / np.where(nrm > 0.0, nrm, 1.0), 0.0)
        return (pairs * scale).reshape(B, c)
    return prox_step(v, t, coeff_set)


def _polish_block(Ab, yb, zb, coeff_set, act_tol=1e-4):
    """Active-set refinement of one nearly-converged block solution.

    Pins coordinates at the pattern read off zb and least-squares the free
    ones.  Returns None when the result leaves the coefficient set or fits
    the measurements worse than zb."""
    if coeff_set is CoeffSet.COMPLEX:
        pairs = zb.reshape(-1, 2)
        free = np.linalg.norm(pairs, axis=1) > act_tol
        free_cols = np.repeat(free, 2)
        target = yb
        fixed = np.zeros_like(zb)
    elif coeff_set is CoeffSet.BOX01:
        at_one = zb > 1.0 - act_tol
        free_cols = (zb > act_tol) & ~at_one
        fixed = np.where(at_one, 1.0, 0.0)
        target = yb - Ab @ fixed
    else:
        free_cols = np.abs(zb) > act_tol
        fixed = np.zeros_like(zb)
        target = yb
    x = fixed.copy()
    if free_cols.any():
        sol, *_ = np.linalg.lstsq(Ab[:, free_cols], target, rcond=None)
        x[free_cols] = sol
    if coeff_set is CoeffSet.BOX01 and not ((x > -1e-9) & (x < 1 + 1e-9)).all():
        return None
    if coeff_set is CoeffSet.NONNEG and not (x > -1e-9).all():
        return None
    if np.linalg.norm(Ab @ x - yb) > np.linalg.norm(Ab @ zb - yb) + 1e-12:
        return None
    return np.clip(x, 0.0, 1.0) if coeff_set is CoeffSet.BOX01 else \
        np.maximum(x, 0.0) if coeff_set is CoeffSet.NONNEG else x


def _polish(stack, y_blocks, z, coeff_set):
    out = z.copy()
    for b in range(stack.shape[0]):
        cand = _polish_block(stack[b], y_blocks[b], z[b], coeff_set)
        if cand is None:
            continue
        # an infeasible z can undercut the optimum, so grant value slack in
        # proportion to the feasibility the polish repairs
        feas_z = np.linalg.norm(stack[b] @ z[b] - y_blocks[b])
        slack = 1e-9 + 1e4 * feas_z
        if norm_l1x(cand, coeff_set) <= norm_l1x(z[b], coeff_set) + slack:
            out[b] = cand
    return out


def solve_p1(A, y_real, coeff_set, opts=DEFAULT_OPTIONS):
    """Solve (P_1,X) for a MeasurementOperator (or dense real matrix) A.

    y_real is the real-representation measurement vector.  Block-diagonal
    operators are solved per block; other kinds run as a single dense block.
    Solves that hit the iteration cap get an active-set polish before the
    result is reported.
    """
    if isinstance(A, MeasurementOperator):
        stack = np.ascontiguousarray(A.real_block_stack(coeff_set)) \
            if A.kind is OperatorKind.BLOCK_DIAG_DISTINCT else A.real_block_stack(coeff_set)
        n_coeffs = A.cols
        M_block = A.block_shape[1]
        B = stack.shape[0]
    else:
        dense = np.asarray(A, dtype=float)
        stack = dense[None]
        n_coeffs = dense.shape[1] // coeff_set.ambient_dim
        M_block = n_coeffs
        B = 1
    y_blocks = np.asarray(y_real, dtype=float).reshape(B, stack.shape[1])

    z, status, r_norm, s_norm, iters = admm_l1x(stack, y_blocks, coeff_set, opts)
    if status is SolveStatus.MAX_ITERS:
        z = _polish(stack, y_blocks, z, coeff_set)
    values = z.reshape(-1)
    x1 = SignalVector(values, coeff_set, M_block, B)

    feas = float(np.linalg.norm(
        np.einsum("brc,bc->br", stack, z) - y_blocks))
    if status is SolveStatus.CONVERGED and \
            feas > opts.feas_tol * (1.0 + np.linalg.norm(y_blocks)):
        status = SolveStatus.MAX_ITERS
    return SolveResult(x1=x1, status=status, primal_residual=feas,
                       dual_residual=s_norm, iterations=iters,
                       value=norm_l1x(values, coeff_set))


def declare_success(x0, x1, threshold=0.001):
    """Reconstruction success: relative l2 error below the fixed threshold."""
    v0 = x0.values if isinstance(x0, SignalVector) else np.asarray(x0, float)
    v1 = x1.values if isinstance(x1, SignalVector) else np.asarray(x1, float)
    if v0.shape != v1.shape:
        raise ValueError(f"shape mismatch: {v0.shape} vs {v1.shape}")
    n0 = np.linalg.norm(v0)
    if n0 == 0.0:
        raise ValueError("declare_success needs a nonzero reference signal")
    return bool(np.linalg.norm(v0 - v1) / n0 < threshold)


def relative_error(x0, x1):
    v0 = x0.values if isinstance(x0, SignalVector) else np.asarray(x0, float)
    v1 = x1.values if isinstance(x1, SignalVector) else np.asarray(x1, float)
    n0 = np.linalg.norm(v0)
    if n0 == 0.0:
        return float(np.linalg.norm(v1) > 0.0)
    return float(np.linalg.norm(v0 - v1) / n0)
