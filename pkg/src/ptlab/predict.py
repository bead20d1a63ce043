"""Asymptotic phase-transition curves and finite-size offset predictions.

The asymptotic curve eps*(delta; X) is the sparsity fraction at which exact
recovery from dense Gaussian measurements transitions, in k/N units.  BOX01
has the closed form (2*delta - 1)_+; the other sets solve the descent-cone
statistical-dimension fixed point

    delta = min_tau [ eps * E||g_free - tau * df||^2-type term
                      + (1 - eps) * E dist^2(g, tau * subdifferential) ] / ambient

numerically (bisection over eps, inner scalar minimization over tau).

Finite-size predictions displace the asymptotic curve downward by the
relative offset alpha*eta*gamma (+ beta*zeta*gamma^2 at second order) with
gamma = sqrt(2 log(B) / M).
"""

import math
from dataclasses import dataclass

from scipy.optimize import brentq, minimize_scalar
from scipy.special import ndtr

from .coeffsets import CoeffSet

SQRT_2PI = math.sqrt(2.0 * math.pi)

ALPHA = {CoeffSet.BOX01: 1.0, CoeffSet.NONNEG: 1.0,
         CoeffSet.REAL: 1.0, CoeffSet.COMPLEX: 2.0 / 3.0}
BETA = {CoeffSet.BOX01: 0.5, CoeffSet.NONNEG: -1.0 / 3.0,
        CoeffSet.REAL: -0.5, CoeffSet.COMPLEX: -1.0 / 3.0}


@dataclass(frozen=True)
class PredictionConstants:
    alpha: float
    beta: float
    coeff_set: CoeffSet


def constants(coeff_set):
    return PredictionConstants(ALPHA[coeff_set], BETA[coeff_set], coeff_set)


def _phi(t):
    return math.exp(-0.5 * t * t) / SQRT_2PI


def _excess(tau, coeff_set):
    """E dist^2(g, tau * subdifferential at a boundary/zero coefficient)."""
    c = float(ndtr(-tau))
    p = _phi(tau)
    if coeff_set is CoeffSet.REAL:
        return 2.0 * ((1.0 + tau * tau) * c - tau * p)
    if coeff_set is CoeffSet.NONNEG:
        return (1.0 + tau * tau) * c - tau * p
    # COMPLEX: radial part is Rayleigh
    return 2.0 * math.exp(-0.5 * tau * tau) - 2.0 * SQRT_2PI * tau * c


def statdim_ratio(eps, coeff_set):
    """Normalized statistical dimension of the descent cone at sparsity eps;
    recovery succeeds asymptotically iff delta exceeds this value."""
    amb = coeff_set.ambient_dim
    if coeff_set is CoeffSet.BOX01:
        return (1.0 + eps) / 2.0

    def objective(tau):
        return (eps * (amb + tau * tau)
                + (1.0 - eps) * _excess(tau, coeff_set)) / amb

    res = minimize_scalar(objective, bounds=(0.0, 40.0), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun)


def asymptotic_pt(delta, coeff_set):
    """eps*(delta; X) in k/N units, solved by bisection on the fixed point."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if coeff_set is CoeffSet.BOX01:
        return max(2.0 * delta - 1.0, 0.0)
    if delta == 1.0:
        return 1.0
    return float(brentq(lambda e: statdim_ratio(e, coeff_set) - delta,
                        1e-14, 1.0 - 1e-14, xtol=1e-12))


def gamma_factor(M, B):
    """gamma = sqrt(2 log(B) / M); the small parameter of the offset."""
    if M < 2 or B < 2:
        raise ValueError("gamma_factor needs M >= 2 and B >= 2")
    return math.sqrt(2.0 * math.log(B) / M)


def eta_shape(delta, coeff_set):
    """First-order shape eta(delta; X)."""
    if coeff_set is CoeffSet.BOX01:
        if not 0.5 < delta <= 1.0:
            raise ValueError("BOX01 shape defined for delta in (1/2, 1]")
        e = 2.0 * delta - 1.0
        return math.sqrt(1.0 - e) / e
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if coeff_set is CoeffSet.NONNEG:
        e = asymptotic_pt(delta, coeff_set)
        return math.sqrt(1.0 - e) / math.sqrt(delta)
    return 1.0 / math.sqrt(delta)


def zeta_shape(delta, coeff_set):
    """Second-order shape: 1 for BOX01, eta otherwise."""
    if coeff_set is CoeffSet.BOX01:
        if not 0.5 < delta <= 1.0:
            raise ValueError("BOX01 shape defined for delta in (1/2, 1]")
        return 1.0
    return eta_shape(delta, coeff_set)


@dataclass(frozen=True)
class OffsetPrediction:
    coeff_set: CoeffSet
    m: int
    M: int
    B: int
    order: int
    eps_asy: float
    gamma: float
    eta: float
    zeta: float
    eps_bd_first: float
    eps_bd_second: float
    rel_offset_first: float
    rel_offset_second: float
    extrapolated: bool  # the gamma ansatz is validated at B = M only

    @property
    def rel_offset(self):
        return self.rel_offset_first if self.order == 1 else self.rel_offset_second

    @property
    def eps_bd(self):
        return self.eps_bd_first if self.order == 1 else self.eps_bd_second


def predict_pt(m, M, B, coeff_set, order=2):
    """Finite-size transition prediction at delta = m/M.

    Relative offset r = alpha*eta*gamma (+ beta*zeta*gamma^2 at order 2);
    the predicted location is eps_asy * (1 - r).
    """
    return predict_pt_delta(m / M, M, B, coeff_set, order, m=m)


def predict_pt_delta(delta, M, B, coeff_set, order=2, m=None):
    """predict_pt with the undersampling fraction given directly."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if m is None:
        m = int(round(delta * M))
    cst = constants(coeff_set)
    eps_asy = asymptotic_pt(delta, coeff_set)
    gamma = gamma_factor(M, B)
    eta = eta_shape(delta, coeff_set)
    zeta = zeta_shape(delta, coeff_set)
    r1 = cst.alpha * eta * gamma
    r2 = r1 + cst.beta * zeta * gamma * gamma
    return OffsetPrediction(coeff_set=coeff_set, m=m, M=M, B=B, order=order,
                            eps_asy=eps_asy, gamma=gamma, eta=eta, zeta=zeta,
                            eps_bd_first=eps_asy * (1.0 - r1),
                            eps_bd_second=eps_asy * (1.0 - r2),
                            rel_offset_first=r1, rel_offset_second=r2,
                            extrapolated=(B != M))


def general_d_offset(d, d_e, delta, N):
    """Absolute offset for anisotropic sampling of a d-dimensional grid with
    d_e exhaustive axes (BOX01 shape):

        sqrt(4 (d_e/d) (1 - delta) log(N) / N^(d_r/d)),  d_r = d - d_e.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    if not 0 <= d_e <= d:
        raise ValueError("need 0 <= d_e <= d")
    side = round(N ** (1.0 / d))
    if side ** d != N:
        raise ValueError(f"N = {N} is not a perfect {d}-th power")
    if d_e == 0:
        return 0.0
    d_r = d - d_e
    return math.sqrt(4.0 * (d_e / d) * (1.0 - delta) * math.log(N)
                     / N ** (d_r / d))


def mri_offset(dims, delta, M):
    """Offset of the complex-coefficient transition for 2D / 3D imaging grids
    with one exhaustively sampled axis."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if M < 2:
        raise ValueError("need M >= 2")
    logM = math.log(M)
    if dims == 2:
        bracket = (2.0 * math.sqrt(2.0) / 3.0) * math.sqrt(logM / M) \
            - (2.0 / 3.0) * (logM / M)
    elif dims == 3:
        bracket = (2.0 * math.sqrt(2.0) / 3.0) * math.sqrt(logM) / M \
            - (2.0 / 3.0) * (logM / M ** 2)
    else:
        raise ValueError("dims must be 2 or 3")
    return bracket / math.sqrt(delta)
