"""Gamma-family special functions, Gauss hypergeometric evaluation, Frobenius
series at the regular singular points of the fixed-frequency mode ODEs, and the
conformal-smoothness (peeling) classification in general spatial dimension.

The mode ODEs come from separating the scale-invariant wave equation on a
fixed spherical harmonic.  Writing the effective potential strength as
ctilde = -l(l+1), the self-similar profile psi = |u|^(-p) f(u/r) satisfies

    -(x + x^2) f'' + (p - 1 - 2x) f' - ctilde f = 0,

with regular singular points at x = -1 (past null infinity) and x = 0
(future null infinity), while psi = r^(-p) g(t/r) satisfies an ODE in
tau = t/r with regular singular points tau = -1, +1.  Both are solved here by
their coefficient recurrences; the x-form also has terminating/convergent
Gauss hypergeometric representations whose connection coefficients decide
whether a solution with no incoming radiation stays regular in 1/r at future
null infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from scipy import special as sps
from scipy.integrate import solve_ivp

EULER_GAMMA = 0.5772156649015328606

_INT_TOL = 1e-9


class SpecialFnError(ValueError):
    pass


class PoleError(SpecialFnError):
    """Evaluation requested at a pole of the underlying function."""


def _is_nonpos_int(x: float) -> bool:
    return x <= _INT_TOL and abs(x - round(x)) < _INT_TOL


def _is_nat(x) -> bool:
    if isinstance(x, complex):
        return abs(x.imag) < _INT_TOL and _is_nat(x.real)
    return x >= -_INT_TOL and abs(x - round(x)) < _INT_TOL


def gamma_ln(x: float) -> float:
    """log |Gamma(x)|; poles at nonpositive integers are signalled."""
    if _is_nonpos_int(x):
        raise PoleError(f"gamma pole at {x}")
    return math.lgamma(x)


def digamma(x: float) -> float:
    if _is_nonpos_int(x):
        raise PoleError(f"digamma pole at {x}")
    return float(sps.digamma(x))


def harmonic(p: float) -> float:
    """Harmonic number function H(p) = int_0^1 (1 - x^p)/(1 - x) dx."""
    return digamma(p + 1.0) + EULER_GAMMA


def gauss_2f1(a: float, b: float, c: float, z: float, exact: bool = False):
    """Gauss hypergeometric function on z in [-1, 0.7].

    When a (or b) is a nonpositive integer the series terminates and is summed
    directly; with ``exact=True`` and rational inputs the sum is returned as a
    Fraction.  Otherwise the power series is used for |z| <= 0.7 and the Pfaff
    transformation z -> z/(z-1) covers the rest of [-1, 0).
    """
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        if _is_nonpos_int(b) and not _is_nonpos_int(a):
            a, b = b, a
        n = int(round(-a))
        if exact:
            return _terminating_exact(n, Fraction(b), Fraction(c), Fraction(z))
        return _terminating_float(n, float(b), float(c), float(z))
    if _is_nonpos_int(c):
        raise PoleError(f"2F1 parameter pole at c={c}")
    z = float(z)
    if z < -1.0 - 1e-14 or z > 0.7 + 1e-14:
        raise SpecialFnError(f"z={z} outside the supported domain [-1, 0.7]")
    if abs(z) <= 0.7:
        return _series_float(a, b, c, z)
    # Pfaff: 2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)); maps [-1,-0.7) into (0, 0.5]
    w = z / (z - 1.0)
    return (1.0 - z) ** (-a) * _series_float(a, c - b, c, w)


def _terminating_exact(n: int, b: Fraction, c: Fraction, z: Fraction) -> Fraction:
    total = Fraction(0)
    term = Fraction(1)
    for k in range(n + 1):
        if k > 0:
            denom = (c + k - 1) * k
            if denom == 0:
                raise PoleError("2F1 parameter pole inside terminating sum")
            term *= Fraction(-(n - k + 1)) * (b + k - 1) * z / denom
        total += term
    return total


def _terminating_float(n: int, b: float, c: float, z: float) -> float:
    total = 1.0
    term = 1.0
    for k in range(1, n + 1):
        denom = (c + k - 1.0) * k
        if abs(denom) < 1e-300:
            raise PoleError("2F1 parameter pole inside terminating sum")
        term *= (-(n - k + 1.0)) * (b + k - 1.0) * z / denom
        total += term
    return total


def _series_float(a: float, b: float, c: float, z: float) -> float:
    total = 1.0
    term = 1.0
    for k in range(2000):
        term *= (a + k) * (b + k) * z / ((c + k) * (k + 1.0))
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)):
            return total
    raise SpecialFnError("2F1 series failed to converge")


def connection_coeffs(p: float, l: float) -> tuple[float, float]:
    """Connection coefficients between the no-incoming-radiation solution at
    x = -1 and the regular/irregular pair at x = 0:

        c1 = Gamma(1+p) Gamma(p)  / (Gamma(1+p+l) Gamma(p-l)),
        c2 = Gamma(1+p) Gamma(-p) / (Gamma(-l) Gamma(1+l)).

    c2 vanishes exactly when l is a natural number (reciprocal-gamma zero);
    integer p sits on a Gamma(-p) pole and must go through the tau-series
    log machinery instead.
    """
    if abs(p - round(p)) < _INT_TOL:
        raise PoleError("integer p: use series_tau for connection data")
    if isinstance(l, complex):
        raise SpecialFnError("connection coefficients restricted to real l")
    c1 = math.gamma(1 + p) * math.gamma(p) * float(sps.rgamma(1 + p + l)) * float(
        sps.rgamma(p - l)
    )
    c2 = math.gamma(1 + p) * math.gamma(-p) * float(sps.rgamma(-l)) * float(
        sps.rgamma(1 + l)
    )
    if _is_nat(l):
        c2 = 0.0
    return c1, c2


# ---------------------------------------------------------------------------
# Mode parameters and peeling classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeParams:
    """Effective single-mode parameters in n spatial dimensions.

    ctilde = c - ell(ell + n - 2) - (n-1)(n-3)/4, and l solves
    l(l+1) = -ctilde with the principal root Re l >= -1/2 (complex when
    ctilde > 1/4, the oscillatory regime).
    """

    n: int
    ell: int
    c: float
    ctilde: float = field(init=False)
    l: Union[float, complex] = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("spatial dimension must be >= 1")
        ct = self.c - self.ell * (self.ell + self.n - 2) - (self.n - 1) * (self.n - 3) / 4.0
        object.__setattr__(self, "ctilde", ct)
        disc = 1.0 - 4.0 * ct
        if disc >= 0.0:
            lval: Union[float, complex] = (-1.0 + math.sqrt(disc)) / 2.0
        else:
            lval = complex(-0.5, math.sqrt(-disc) / 2.0)
        object.__setattr__(self, "l", lval)

    @property
    def peeling(self) -> bool:
        """Conformal smoothness holds iff ctilde = -m(m+1) for some m in N."""
        return isinstance(self.l, float) and _is_nat(self.l)


def effective_mode(n: int, ell: int, c: float) -> ModeParams:
    return ModeParams(n=n, ell=ell, c=c)


def _l_times_l_plus_one(l) -> float:
    val = l * (l + 1) if not isinstance(l, complex) else (l * (l + 1)).real
    return float(val)


# ---------------------------------------------------------------------------
# Frobenius series
# ---------------------------------------------------------------------------


@dataclass
class SeriesSolution:
    """Series solution at a regular singular point.

    ``coefficients[k]`` multiplies (local variable)^(root + k).  When the
    indicial roots differ by a natural number the companion solution needs a
    log term; ``log_flag``/``c_log`` record that obstruction.
    """

    point: str
    root: float
    coefficients: np.ndarray
    log_flag: bool = False
    c_log: Optional[float] = None

    def __call__(self, s: float) -> float:
        powers = self.root + np.arange(len(self.coefficients))
        return float(np.sum(self.coefficients * s**powers))

    def resubstitution_residual(self, recurrence) -> float:
        """Max relative residual of coefficients against the recurrence."""
        worst = 0.0
        a = self.coefficients
        for k in range(len(a) - 1):
            lhs, rhs = recurrence(self.root, k, a[k], a[k + 1])
            scale = max(abs(lhs), abs(rhs), 1e-300)
            worst = max(worst, abs(lhs - rhs) / scale)
        return worst


def _series_x_recurrence(p: float, ll1: float, at_zero: bool):
    # local variable s = 1+x at the past point, s = -x at the future point;
    # a_{k+1} (R+k+1)(R+k+1+p) = a_k ((R+k)(R+k+1) - l(l+1))   at x = -1
    # a_{k+1} (R+k+1)(R+k+1-p) = a_k ((R+k)(R+k+1) - l(l+1))   at x =  0
    # (the second is the paper's sign-flipped x-variable recursion rewritten
    # in the positive variable -x)
    poff = -p if at_zero else p

    def rec(R, k, ak, ak1):
        lhs = ak1 * (R + k + 1.0) * (R + k + poff + 1.0)
        rhs = ak * ((R + k) * (R + k + 1.0) - ll1)
        return lhs, rhs

    return rec


def series_x(p: float, l, point: int, root, K: int) -> SeriesSolution:
    """Frobenius series of the self-similar ODE at x = -1 or x = 0.

    ``point`` is -1 or 0; ``root`` must be one of the indicial roots
    (0 or -p at x=-1; 0 or p at x=0).  The local variable is (1+x) at the
    past point and -x at the future point (so that it is positive inside
    -1 < x < 0).
    """
    if K > 10_000:
        raise ValueError("series length capped at 1e4")
    if point not in (-1, 0):
        raise ValueError("expansion point must be -1 or 0")
    ll1 = _l_times_l_plus_one(l)
    at_zero = point == 0
    R = float(root)
    valid = (0.0, -p) if not at_zero else (0.0, p)
    if not any(abs(R - v) < 1e-12 for v in valid):
        raise ValueError(f"root {root} is not an indicial root at x={point}")
    degenerate = abs(R - valid[1]) < 1e-12 and abs(p - round(p)) < _INT_TOL and abs(p) > _INT_TOL
    rec = _series_x_recurrence(p, ll1, at_zero)
    a = np.zeros(K + 1)
    a[0] = 1.0
    log_flag = False
    poff = -p if at_zero else p
    for k in range(K):
        denom = (R + k + 1.0) * (R + k + poff + 1.0)
        num = a[k] * ((R + k) * (R + k + 1.0) - ll1)
        if abs(denom) < 1e-12:
            # indicial clash: the lower-root series obstructs here
            log_flag = True
            a = a[: k + 1]
            break
        a[k + 1] = num / denom
    sol = SeriesSolution(point=f"x={point}", root=R, coefficients=np.asarray(a), log_flag=log_flag or degenerate)
    if sol.resubstitution_residual(rec) > 1e-13:
        raise SpecialFnError("series recurrence residual above tolerance")
    return sol


def _tau_factor(p: float, ll1: float, R: float, k: int) -> float:
    """RHS factor of the tau-recursion c_{k+1} 2(R+k+1)(R+k+1+p) = c_k * F."""
    return (R + k) * (R + k + 1.0 + 2.0 * p) + p * (p + 1.0) - ll1


def series_tau(p: float, l, K: int) -> SeriesSolution:
    """Frobenius series at tau = -1 of the spacelike-infinity ODE, root 0.

    The recursion is c_{k+1} 2(k+1)(k+1+p) = c_k ((p-l)(p+l+1) + k(k+1+2p)).
    For p in N the indicial roots {0, -p} differ by an integer and the
    companion solution carries a log; its coefficient c_log vanishes exactly
    when the obstruction chain hits the factor root k = l, i.e. iff p and l
    are natural numbers with p > l.
    """
    if K > 10_000:
        raise ValueError("series length capped at 1e4")
    ll1 = _l_times_l_plus_one(l)
    c = np.zeros(K + 1)
    c[0] = 1.0
    for k in range(K):
        c[k + 1] = c[k] * _tau_factor(p, ll1, 0.0, k) / (2.0 * (k + 1.0) * (k + 1.0 + p))
    sol = SeriesSolution(point="tau=-1", root=0.0, coefficients=c)

    def rec(R, k, ak, ak1):
        return ak1 * 2.0 * (R + k + 1.0) * (R + k + 1.0 + p), ak * _tau_factor(p, ll1, R, k)

    if sol.resubstitution_residual(rec) > 1e-13:
        raise SpecialFnError("series recurrence residual above tolerance")

    if abs(p - round(p)) < _INT_TOL and p > -_INT_TOL:
        pint = int(round(p))
        sol.log_flag = True
        sol.c_log = _tau_companion_log(p, ll1, pint)
    else:
        sol.log_flag = False
        sol.c_log = None
    return sol


def _tau_companion_log(p: float, ll1: float, pint: int) -> float:
    """Log coefficient of the companion (root -p) solution, p in N.

    The d-recursion d_{k+1} 2(k+1-p)(k+1) = d_k F(k) with R=-p obstructs at
    k+1 = p; c_log is the accumulated obstruction, zero iff F vanishes along
    the chain (F(k) = (k-l)(k+l+1) has the admissible root k = l < p).
    """
    if pint == 0:
        return 1.0  # double indicial root: the second solution always logs
    d = 1.0
    for k in range(pint - 1):
        d = d * _tau_factor(p, ll1, -p, k) / (2.0 * (k + 1.0 - p) * (k + 1.0))
    obstruction = d * _tau_factor(p, ll1, -p, pint - 1)
    return obstruction / (2.0 * pint)


def connection_coeffs_numeric(
    p: float,
    l: float,
    eps: float = 1e-5,
    fit_window: tuple[float, float] = (-0.35, -0.02),
    n_samples: int = 60,
) -> tuple[float, float]:
    """Connection coefficients by numerical continuation of the mode ODE.

    Seeds the root-0 series at x = -1 + eps, integrates
    -(x+x^2) f'' + (p-1-2x) f' - ctilde f = 0 across the regular interval,
    and decomposes the result in the exact basis
    {2F1(-l,1+l;1-p;-x), (-x)^p 2F1(p-l,1+l+p;1+p;-x)} by least squares.
    Independent of the Gamma-product formula; used as its cross-check.
    """
    ll1 = _l_times_l_plus_one(l)
    seed = series_x(p, l, point=-1, root=0, K=60)
    f0 = seed(eps)
    ks = np.arange(len(seed.coefficients))
    df0 = float(np.sum(seed.coefficients[1:] * ks[1:] * eps ** (ks[1:] - 1)))

    def rhs(x, y):
        f, df = y
        return [df, ((p - 1.0 - 2.0 * x) * df - (-ll1) * f) / (x + x * x)]

    xs = np.linspace(fit_window[0], fit_window[1], n_samples)
    res = solve_ivp(
        rhs,
        (-1.0 + eps, fit_window[1]),
        [f0, df0],
        t_eval=xs,
        rtol=1e-12,
        atol=1e-14,
        method="DOP853",
    )
    if not res.success:
        raise SpecialFnError(f"ODE continuation failed: {res.message}")
    fvals = res.y[0]
    basis1 = np.array([gauss_2f1(-l, 1 + l, 1 - p, -x) for x in xs])
    basis2 = np.array([(-x) ** p * gauss_2f1(p - l, 1 + l + p, 1 + p, -x) for x in xs])
    A = np.column_stack([basis1, basis2])
    coef, *_ = np.linalg.lstsq(A, fvals, rcond=None)
    return float(coef[0]), float(coef[1])


def series_tau_scaled_growth(p: float, l, K: int) -> np.ndarray:
    """The sequence 2^k c_k of the tau=-1 root-0 series, computed without
    underflow; behaves like k^(p-1) for large k."""
    ll1 = _l_times_l_plus_one(l)
    y = np.zeros(K + 1)
    y[0] = 1.0
    for k in range(K):
        y[k + 1] = y[k] * _tau_factor(p, ll1, 0.0, k) / ((k + 1.0) * (k + 1.0 + p))
    return y


def tau_series_diverges_at_future(p: float, l, K: int = 4000) -> bool:
    """Declare divergence of the tau-series at tau = +1 when the partial sums
    of 2^k c_k grow monotonically in magnitude over the last decade of K."""
    y = series_tau_scaled_growth(p, l, K)
    partial = np.cumsum(y)
    tail = np.abs(partial[int(0.9 * K) :])
    return bool(np.all(np.diff(tail) > 0))
