"""Independent reference solver for small instances of (P_1,X).

The real coefficient sets reduce to linear programs (split variables for
REAL, plain nonnegative LP for NONNEG, box LP for BOX01) and are handed to
scipy's HiGHS.  COMPLEX is a second-order cone program, solved by a dense
log-barrier Newton method written here; the same barrier engine also solves
the real sets (1-dimensional cones), which is how it is validated against
HiGHS in the tests.  Never used inside the main solve path.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .coeffsets import CoeffSet

ORACLE_DIM_LIMIT = 64


@dataclass
class OracleResult:
    value: float
    x: np.ndarray  # real representation, same layout as the main solver


def lp_oracle(A, y, coeff_set, engine=None):
    """Optimal value and a solution of (P_1,X) for a dense real matrix A.

    `A` and `y` are in real representation (ambient-2 pair columns for
    COMPLEX).  Guarded to at most 64 coefficients.  `engine` forces
    "highs" or "barrier" (default: highs for LPs, barrier for COMPLEX).
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    n_coeffs = A.shape[1] // coeff_set.ambient_dim
    if n_coeffs > ORACLE_DIM_LIMIT:
        raise ValueError(f"oracle guard: {n_coeffs} coefficients exceeds the "
                         f"desk-scale limit {ORACLE_DIM_LIMIT}")
    if engine is None:
        engine = "barrier" if coeff_set is CoeffSet.COMPLEX else "highs"
    if engine == "barrier":
        val, x = socp_min_l1x(A, y, coeff_set)
        return OracleResult(value=val, x=x)
    return _lp_highs(A, y, coeff_set)


def _lp_highs(A, y, coeff_set):
    m, N = A.shape
    if coeff_set is CoeffSet.REAL:
        res = linprog(np.ones(2 * N), A_eq=np.hstack([A, -A]), b_eq=y,
                      bounds=(0, None), method="highs")
        _check(res)
        x = res.x[:N] - res.x[N:]
    elif coeff_set is CoeffSet.NONNEG:
        res = linprog(np.ones(N), A_eq=A, b_eq=y, bounds=(0, None),
                      method="highs")
        _check(res)
        x = res.x
    elif coeff_set is CoeffSet.BOX01:
        res = linprog(np.ones(N), A_eq=A, b_eq=y, bounds=(0, 1),
                      method="highs")
        _check(res)
        x = res.x
    else:
        raise ValueError("HiGHS path handles the real coefficient sets only")
    return OracleResult(value=float(res.fun), x=x)


def _check(res):
    if not res.success:
        raise RuntimeError(f"LP oracle failed: {res.message}")


# ---------------------------------------------------------------------------
# dense log-barrier engine for  min sum_i s_i  s.t.  A x = y, ||x_i|| <= s_i

def socp_min_l1x(A, y, coeff_set, gap_tol=1e-10, mu=8.0):
    """Barrier path-following on the cone reformulation of (P_1,X).

    REAL uses 1-d cones s_i >= |x_i|; COMPLEX uses 2-d cones on the (re, im)
    pairs.  NONNEG and BOX01 add bound constraints and are not offered here
    (they go through HiGHS).  Returns (value, x).
    """
    if coeff_set is CoeffSet.COMPLEX:
        b = 2
    elif coeff_set is CoeffSet.REAL:
        b = 1
    else:
        raise ValueError("barrier engine covers REAL and COMPLEX")
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    r, n = A.shape
    N = n // b

    x = np.linalg.lstsq(A, y, rcond=None)[0]
    if np.linalg.norm(A @ x - y) > 1e-8 * (1.0 + np.linalg.norm(y)):
        raise RuntimeError("barrier oracle: equality system is inconsistent")
    s = np.linalg.norm(x.reshape(N, b), axis=1) + 1.0
    t = 1.0
    nu = 2.0 * N

    while True:
        s, x = _center(A, y, s, x, t, N, b)
        if nu / t <= gap_tol:
            break
        t *= mu
    value = float(s.sum())
    # cone slacks at the end are gap-sized; report the actual norms
    value = float(np.linalg.norm(x.reshape(N, b), axis=1).sum()) \
        if coeff_set is CoeffSet.COMPLEX else float(np.abs(x).sum())
    return value, x


def _center(A, y, s, x, t, N, b, max_newton=80):
    r, n = A.shape
    dim = N + n
    for _ in range(max_newton):
        X = x.reshape(N, b)
        d = s ** 2 - (X ** 2).sum(axis=1)
        g = np.empty(dim)
        g[:N] = t - 2.0 * s / d
        g[N:] = (2.0 * X / d[:, None]).reshape(-1)
        H = np.zeros((dim, dim))
        H[np.arange(N), np.arange(N)] = 4.0 * s ** 2 / d ** 2 - 2.0 / d
        for i in range(N):
            xi = X[i]
            hsx = -4.0 * s[i] * xi / d[i] ** 2
            hxx = 4.0 * np.outer(xi, xi) / d[i] ** 2 + 2.0 * np.eye(b) / d[i]
            H[i, N + b * i:N + b * i + b] = hsx
            H[N + b * i:N + b * i + b, i] = hsx
            H[N + b * i:N + b * i + b, N + b * i:N + b * i + b] = hxx
        K = np.zeros((dim + r, dim + r))
        K[:dim, :dim] = H
        K[dim:, N:dim] = A
        K[N:dim, dim:] = A.T
        rhs = np.concatenate([-g, np.zeros(r)])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        ds, dx = sol[:N], sol[N:dim]
        lam2 = float(-(g @ sol[:dim]))
        if lam2 / 2.0 <= 1e-11:
            break

        def merit(ss, xx):
            dd = ss ** 2 - (xx.reshape(N, b) ** 2).sum(axis=1)
            if np.any(dd <= 0.0) or np.any(ss <= 0.0):
                return np.inf
            return t * ss.sum() - np.log(dd).sum()

        m0 = merit(s, x)
        step = 1.0
        while step > 1e-14:
            if merit(s + step * ds, x + step * dx) <= m0 - 0.25 * step * lam2:
                break
            step *= 0.5
        s = s + step * ds
        x = x + step * dx
    return s, x
