"""
Special functions, truncated-Taylor jets and quadrature.

Everything in the analytic metrics reduces to three building blocks:
hypergeometric functions on the negative real axis, Taylor jets that
carry exact Laplace-transform derivatives, and adaptive quadrature on
(semi-)infinite intervals. All functions here are pure.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special as sp_special

from cellular.conf import setting
from cellular.exceptions import (
    InvalidParameterError,
    NonFiniteIntegrandError,
    UnsupportedKernelError,
)

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps
_SERIES_CHUNK = 64
_SERIES_MAX_TERMS = 2_000_000
_LOG_TINY = -745.0


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidParameterError("quadrature tolerances must be strictly positive")
        if int(self.max_subdivisions) < 1:
            raise InvalidParameterError("max_subdivisions must be >= 1")

    def tightened(self, rel_tol: float) -> "QuadratureSpec":
        return QuadratureSpec(min(rel_tol, self.rel_tol), self.abs_tol, self.max_subdivisions)


def default_quadrature() -> QuadratureSpec:
    return QuadratureSpec(
        rel_tol=setting("SG_MIMO_QUAD_REL_TOL", 1e-8),
        abs_tol=setting("SG_MIMO_QUAD_ABS_TOL", 1e-12),
        max_subdivisions=setting("SG_MIMO_QUAD_LIMIT", 2000),
    )


@dataclass
class QuadResult:
    value: float
    err_estimate: float
    converged: bool = True
    message: str = ""
    neval: int = 0

    def __iter__(self):
        # allows `value, err = integrate(...)`
        yield self.value
        yield self.err_estimate


def _mapped(f: Callable, a: float, b: float, scale: float):
    """Return (g, lo, hi) with the integral of f over [a, b] equal to that of g over [lo, hi].

    Semi-infinite domains use x = a + scale * t / (1 - t), t in [0, 1).
    """
    if math.isinf(a):
        raise InvalidParameterError("lower integration limit must be finite")
    if not math.isinf(b):
        return f, a, b

    def g(t):
        u = 1.0 - t
        return f(a + scale * t / u) * scale / (u * u)

    return g, 0.0, 1.0


def _checked(f: Callable):
    def wrapper(x):
        val = f(x)
        if not np.all(np.isfinite(val)):
            raise NonFiniteIntegrandError(f"integrand is not finite at x={x!r}")
        return val
    return wrapper


def integrate(f: Callable[[float], float], a: float, b: float,
              spec: Optional[QuadratureSpec] = None, scale: float = 1.0) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature of a scalar integrand.

    ``b`` may be ``math.inf``; ``scale`` is the length at which the
    semi-infinite substitution puts the midpoint of the mapped interval,
    and should match the natural length of the integrand.
    A budget exhaustion is reported through ``converged=False``, never raised.
    """
    spec = spec or default_quadrature()
    g, lo, hi = _mapped(_checked(f), a, b, scale)
    out = sp_integrate.quad(
        g, lo, hi,
        epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=1,
    )
    value, err, info = out[0], out[1], out[2]
    if len(out) > 3:
        message = out[3] if isinstance(out[3], str) else str(out[3])
        logger.warning("quadrature did not meet tolerance: %s", message.splitlines()[0])
        return QuadResult(value, err, False, message, info.get("neval", 0))
    return QuadResult(value, err, True, "", info.get("neval", 0))


def integrate_vec(f: Callable[[float], np.ndarray], a: float, b: float,
                  spec: Optional[QuadratureSpec] = None, scale: float = 1.0) -> Tuple[np.ndarray, float, bool]:
    """Coefficient-wise quadrature of an array-valued integrand (shared subdivision)."""
    spec = spec or default_quadrature()
    g, lo, hi = _mapped(_checked(f), a, b, scale)
    value, err, info = sp_integrate.quad_vec(
        g, lo, hi,
        epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, norm="max", full_output=True,
    )
    if not info.success:
        logger.warning("vector quadrature did not meet tolerance (status=%s)", info.status)
    return np.asarray(value, dtype=float), float(err), bool(info.success)


# ---------------------------------------------------------------------------
# Error function and hypergeometric functions
# ---------------------------------------------------------------------------

def erfc(x: float) -> float:
    return float(sp_special.erfc(x))


def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _series(a: float, b: float, c: float, x: float) -> float:
    """Sum the Gauss series sum_n (a)_n (b)_n / ((c)_n n!) x^n for |x| < 1, in chunks."""
    total = 0.0
    term = 1.0
    n0 = 0
    while n0 < _SERIES_MAX_TERMS:
        n = np.arange(n0, n0 + _SERIES_CHUNK, dtype=float)
        ratios = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x
        terms = term * np.concatenate(([1.0], np.cumprod(ratios[:-1])))
        total += math.fsum(terms)
        term = terms[-1] * ratios[-1]
        if term == 0.0:
            return total
        tail = abs(terms[-1])
        if tail <= _EPS * abs(total) and abs(ratios[-1]) < 1.0:
            return total
        n0 += _SERIES_CHUNK
    logger.warning("2F1 series hit the %d-term cap (a=%g b=%g c=%g x=%g)", _SERIES_MAX_TERMS, a, b, c, x)
    return total


def gauss_2f1_series(a: float, b: float, c: float, x: float) -> float:
    """Direct Gauss series, valid for |x| < 1."""
    if _is_nonpositive_int(c):
        raise InvalidParameterError(f"2F1 undefined for c={c}")
    if abs(x) >= 1.0:
        raise InvalidParameterError("direct 2F1 series needs |x| < 1")
    return _series(a, b, c, x)


def _pfaff(a: float, b: float, c: float, x: float) -> float:
    # 2F1(a,b;c;x) = (1-x)^(-b) 2F1(c-a, b; c; x/(x-1))
    w = x / (x - 1.0)
    return (1.0 - x) ** (-b) * _series(c - a, b, c, w)


def gauss_2f1(a: float, b: float, c: float, x: float) -> float:
    """Gauss hypergeometric 2F1(a, b; c; x) for real x < 1.

    Negative arguments go through the Pfaff transformation, which maps
    x <= 0 into [0, 1). Far out on the negative axis (x < -2) the
    reciprocal-argument connection formula is used instead, whose inner
    functions are again evaluated through Pfaff; it needs b - a not to be
    an integer, otherwise the (slower) Pfaff series is summed directly.
    """
    if _is_nonpositive_int(c):
        raise InvalidParameterError(f"2F1 undefined for c={c}")
    if not math.isfinite(x) or x >= 1.0:
        raise InvalidParameterError(f"2F1 argument must be finite and < 1, got {x}")
    if x == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        # terminating series: a polynomial in x
        return _series(a, b, c, x)
    if x > 0.0:
        return _series(a, b, c, x)
    if x >= -2.0:
        return _pfaff(a, b, c, x)
    return _reciprocal(a, b, c, x)


def _reciprocal(a: float, b: float, c: float, x: float) -> float:
    if float(b - a).is_integer():
        return _pfaff(a, b, c, x)
    y = 1.0 / x
    g = sp_special.gamma
    rg = sp_special.rgamma
    t1 = g(c) * g(b - a) * rg(b) * rg(c - a) * (-x) ** (-a)
    t2 = g(c) * g(a - b) * rg(a) * rg(c - b) * (-x) ** (-b)
    v1 = gauss_2f1(a, a - c + 1.0, a - b + 1.0, y) if t1 != 0.0 else 0.0
    v2 = gauss_2f1(b, b - c + 1.0, b - a + 1.0, y) if t2 != 0.0 else 0.0
    return float(t1 * v1 + t2 * v2)


def kummer_1f1(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric 1F1(a; b; x).

    a = -n gives the degree-n polynomial, summed term by term. Negative
    arguments are reflected with Kummer's transformation
    1F1(a; b; x) = e^x 1F1(b - a; b; -x), so the summed series never alternates.
    """
    if _is_nonpositive_int(b):
        raise InvalidParameterError(f"1F1 undefined for b={b}")
    if x == 0.0 or a == 0.0:
        return 1.0
    if _is_nonpositive_int(a):
        n = int(-a)
        if b > 0.0:
            return float(sp_special.eval_genlaguerre(n, b - 1.0, x) * math.exp(_laguerre_log_scale(n, b)))
        terms = [1.0]
        for k in range(n):
            terms.append(terms[-1] * (a + k) / ((b + k) * (k + 1.0)) * x)
        return math.fsum(terms)
    if x < 0.0:
        return math.exp(x) * kummer_1f1(b - a, b, -x)
    if x > 60.0:
        return _kummer_asymptotic(a, b, x)
    total = 0.0
    term = 1.0
    k = 0
    while True:
        total += term
        term *= (a + k) / (b + k) * x / (k + 1.0)
        k += 1
        if abs(term) <= 1e-17 * abs(total) and k > x:
            return total
        if k > 100_000:
            logger.warning("1F1 series stopped at %d terms (a=%g b=%g x=%g)", k, a, b, x)
            return total


def _kummer_asymptotic(a: float, b: float, x: float) -> float:
    # dominant large-x branch; the other branch is O(x^-a) against O(e^x x^(a-b))
    s = 0.0
    term = 1.0
    prev = math.inf
    for k in range(200):
        if abs(term) > prev:
            break
        s += term
        prev = abs(term)
        term *= (b - a + k) * (1.0 - a + k) / ((k + 1.0) * x)
        if abs(term) < 1e-17 * abs(s):
            s += term
            break
    log_pref = sp_special.gammaln(b) - sp_special.gammaln(a) + x + (a - b) * math.log(x)
    sign = sp_special.gammasgn(b) * sp_special.gammasgn(a)
    return float(sign * math.exp(log_pref) * s)


def _laguerre_log_scale(n: int, b: float) -> float:
    # 1F1(-n; b; x) = n! / (b)_n * L_n^(b-1)(x)
    return float(sp_special.gammaln(n + 1.0) + sp_special.gammaln(b) - sp_special.gammaln(b + n))


def damped_kummer_1f1(n: int, b: float, x: float) -> float:
    """e^-x 1F1(-n; b; x) for x >= 0 and b >= 1, without overflow at large x.

    The polynomial is evaluated as a generalized Laguerre polynomial
    (three-term recurrence, no alternating sum). Since |1F1(-n; b; x)| <=
    (1 + x)^n, the product is returned as 0 once that bound times e^-x
    underflows.
    """
    if n < 0 or int(n) != n:
        raise InvalidParameterError("n must be a non-negative integer")
    if b < 1.0:
        raise InvalidParameterError(f"damped 1F1 needs b >= 1, got {b}")
    if x < 0.0 or not math.isfinite(x):
        raise InvalidParameterError(f"damped 1F1 needs a finite x >= 0, got {x}")
    n = int(n)
    if n == 0:
        return math.exp(-x)
    log_bound = n * math.log1p(x) - x
    if log_bound < _LOG_TINY:
        return 0.0
    log_scale = _laguerre_log_scale(n, b)
    lag = float(sp_special.eval_genlaguerre(n, b - 1.0, x))
    if not math.isfinite(lag):
        # far past the last root the leading term (-x)^n / n! dominates
        log_lead = n * math.log(x) - sp_special.gammaln(n + 1.0) + log_scale - x
        return (-1.0) ** n * math.exp(log_lead)
    if lag == 0.0:
        return 0.0
    return math.copysign(math.exp(math.log(abs(lag)) + log_scale - x), lag)


def binomial_coeffs(nu: float, order: int) -> np.ndarray:
    """C(nu, k) for k = 0..order and any real nu, negative integers included."""
    out = np.ones(order + 1)
    for k in range(1, order + 1):
        out[k] = out[k - 1] * (nu - k + 1.0) / k
    return out


# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------

def _as_coeffs(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim or arr.size == 0:
        raise InvalidParameterError(f"jet coefficients must be a non-empty {ndim}-D array")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("jet coefficients must be finite")
    return arr


@dataclass
class Jet:
    """Truncated Taylor expansion: coeffs[k] = f^(k)(z0) / k!."""

    coeffs: np.ndarray
    z0: float = 0.0

    def __post_init__(self):
        self.coeffs = _as_coeffs(self.coeffs, 1)
        self.z0 = float(self.z0)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, value: float, order: int, z0: float = 0.0) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c, z0)

    @classmethod
    def variable(cls, z0: float, order: int) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = z0
        if order >= 1:
            c[1] = 1.0
        return cls(c, z0)

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def derivative(self, k: int) -> float:
        return float(self.coeffs[k] * math.factorial(k))

    def derivatives(self) -> np.ndarray:
        return self.coeffs * sp_special.factorial(np.arange(self.order + 1))

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise InvalidParameterError("jet orders differ")
            return other
        return Jet.constant(float(other), self.order, self.z0)

    def __add__(self, other):
        return Jet(self.coeffs + self._coerce(other).coeffs, self.z0)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.z0)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * float(other), self.z0)
        other = self._coerce(other)
        return Jet(np.convolve(self.coeffs, other.coeffs)[: self.order + 1], self.z0)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return Jet(self.coeffs / float(scalar), self.z0)

    def exp(self) -> "Jet":
        f = self.coeffs
        g = np.zeros_like(f)
        g[0] = math.exp(f[0])
        k_f = np.arange(len(f)) * f
        for k in range(1, len(f)):
            g[k] = np.dot(k_f[1: k + 1], g[k - 1:: -1][:k]) / k
        return Jet(g, self.z0)

    def power(self, nu: float) -> "Jet":
        f = self.coeffs
        if f[0] <= 0.0:
            raise InvalidParameterError("jet power needs a positive constant term")
        g = np.zeros_like(f)
        g[0] = f[0] ** nu
        for k in range(1, len(f)):
            j = np.arange(1, k + 1)
            g[k] = np.dot((nu * j - (k - j)) * f[1: k + 1], g[k - j]) / (k * f[0])
        return Jet(g, self.z0)

    def rescaled(self, alpha: float) -> "Jet":
        """Jet of h -> f(z0 + alpha*h); the chain rule for a linear inner map."""
        return Jet(self.coeffs * alpha ** np.arange(self.order + 1), self.z0)

    def truncated(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1], self.z0)


@dataclass
class BiJet:
    """Mixed Taylor coefficients c[i, j] = d^(i+j) f / dz1^i dz2^j / (i! j!) at z0."""

    coeffs: np.ndarray
    z0: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.coeffs = _as_coeffs(self.coeffs, 2)
        self.z0 = (float(self.z0[0]), float(self.z0[1]))

    @property
    def orders(self) -> Tuple[int, int]:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    @property
    def value(self) -> float:
        return float(self.coeffs[0, 0])

    @classmethod
    def constant(cls, value: float, orders: Tuple[int, int], z0=(0.0, 0.0)) -> "BiJet":
        c = np.zeros((orders[0] + 1, orders[1] + 1))
        c[0, 0] = value
        return cls(c, z0)

    @classmethod
    def outer(cls, first: Jet, second: Jet) -> "BiJet":
        return cls(np.outer(first.coeffs, second.coeffs), (first.z0, second.z0))

    def _coerce(self, other) -> "BiJet":
        if isinstance(other, BiJet):
            if other.orders != self.orders:
                raise InvalidParameterError("bijet orders differ")
            return other
        return BiJet.constant(float(other), self.orders, self.z0)

    def __add__(self, other):
        return BiJet(self.coeffs + self._coerce(other).coeffs, self.z0)

    __radd__ = __add__

    def __neg__(self):
        return BiJet(-self.coeffs, self.z0)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if not isinstance(other, BiJet):
            return BiJet(self.coeffs * float(other), self.z0)
        b = self._coerce(other).coeffs
        a = self.coeffs
        n1, n2 = a.shape
        out = np.zeros_like(a)
        for p in range(n1):
            for q in range(n2):
                if a[p, q] != 0.0:
                    out[p:, q:] += a[p, q] * b[: n1 - p, : n2 - q]
        return BiJet(out, self.z0)

    __rmul__ = __mul__

    def exp(self) -> "BiJet":
        # Leibniz rule on d/dz1 (rows) and on d/dz2 along the first row
        f = self.coeffs
        n1, n2 = f.shape
        g = np.zeros_like(f)
        g[0, 0] = math.exp(f[0, 0])
        for j in range(1, n2):
            q = np.arange(1, j + 1)
            g[0, j] = np.dot(q * f[0, 1: j + 1], g[0, j - q]) / j
        for i in range(1, n1):
            for j in range(n2):
                acc = 0.0
                for p in range(1, i + 1):
                    acc += p * np.dot(f[p, : j + 1], g[i - p, j::-1])
                g[i, j] = acc / i
        return BiJet(g, self.z0)

    def scaled(self, h1: float, h2: float) -> "BiJet":
        i = np.arange(self.coeffs.shape[0])[:, None]
        j = np.arange(self.coeffs.shape[1])[None, :]
        return BiJet(self.coeffs * (h1 ** i) * (h2 ** j), self.z0)

    def transpose(self) -> "BiJet":
        return BiJet(self.coeffs.T.copy(), (self.z0[1], self.z0[0]))

    def slice_z1(self) -> Jet:
        """Univariate jet in z1 at fixed z2 (the j2 = 0 column)."""
        return Jet(self.coeffs[:, 0].copy(), self.z0[0])

    def slice_z2(self) -> Jet:
        return Jet(self.coeffs[0, :].copy(), self.z0[1])


# ---------------------------------------------------------------------------
# Kernel registry for jet_lift
# ---------------------------------------------------------------------------

KernelFn = Callable[..., np.ndarray]
KERNELS: Dict[str, KernelFn] = {}


def register_kernel(name: str):
    def decorator(fn: KernelFn) -> KernelFn:
        KERNELS[name] = fn
        return fn
    return decorator


@register_kernel("exp")
def _exp_kernel(z0: float, order: int, alpha: float = 1.0) -> np.ndarray:
    k = np.arange(order + 1)
    return math.exp(alpha * z0) * alpha ** k / sp_special.factorial(k)


@register_kernel("affine")
def _affine_kernel(z0: float, order: int, alpha: float = 1.0, beta: float = 0.0) -> np.ndarray:
    c = np.zeros(order + 1)
    c[0] = alpha * z0 + beta
    if order >= 1:
        c[1] = alpha
    return c


@register_kernel("power")
def _power_kernel(z0: float, order: int, alpha: float = 1.0, nu: float = 1.0) -> np.ndarray:
    # (1 + alpha z)^nu
    base = 1.0 + alpha * z0
    if base <= 0.0:
        raise InvalidParameterError("power kernel needs 1 + alpha*z0 > 0")
    k = np.arange(order + 1)
    return binomial_coeffs(nu, order) * alpha ** k * base ** (nu - k)


@register_kernel("gauss_2f1")
def _hyp2f1_kernel(z0: float, order: int, a: float, b: float, c: float) -> np.ndarray:
    # d/dz 2F1(a,b;c;z) = (ab/c) 2F1(a+1,b+1;c+1;z)
    out = np.empty(order + 1)
    for k in range(order + 1):
        pref = sp_special.poch(a, k) * sp_special.poch(b, k) / (sp_special.poch(c, k) * math.factorial(k))
        out[k] = 0.0 if pref == 0.0 else pref * gauss_2f1(a + k, b + k, c + k, z0)
    return out


KernelSpec = Union[str, Sequence[Tuple[str, dict]]]


def jet_lift(kernel: KernelSpec, z0: float, order: int, **params) -> Jet:
    """Jet of a registered kernel about z0.

    ``kernel`` is either a registered name (parameters as keyword
    arguments) or a sequence of ``(name, params)`` pairs whose product is
    lifted.
    """
    if order < 0:
        raise InvalidParameterError("jet order must be non-negative")
    if isinstance(kernel, str):
        factors: List[Tuple[str, dict]] = [(kernel, params)]
    else:
        factors = list(kernel)
    result: Optional[Jet] = None
    for name, kw in factors:
        fn = KERNELS.get(name)
        if fn is None:
            raise UnsupportedKernelError(f"no derivative recurrence registered for {name!r}")
        jet = Jet(fn(z0, order, **kw), z0)
        result = jet if result is None else result * jet
    if result is None:
        raise UnsupportedKernelError("empty kernel product")
    return result


# ---------------------------------------------------------------------------
# Real-axis Laplace inversion
# ---------------------------------------------------------------------------

def _stehfest_weights(n: int) -> np.ndarray:
    half = n // 2
    v = np.zeros(n)
    for k in range(1, n + 1):
        acc = 0.0
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += (j ** half * math.factorial(2 * j)) / (
                math.factorial(half - j) * math.factorial(j) * math.factorial(j - 1)
                * math.factorial(k - j) * math.factorial(2 * j - k)
            )
        v[k - 1] = (-1) ** (k + half) * acc
    return v


def gaver_stehfest(transform: Callable[[float], float], t: float, n: int = 14) -> float:
    """Invert a Laplace transform at t > 0 using real-axis samples only."""
    if n % 2 or n < 2:
        raise InvalidParameterError("Stehfest order must be a positive even integer")
    if t <= 0.0:
        raise InvalidParameterError("inversion point must be positive")
    ln2_t = math.log(2.0) / t
    weights = _stehfest_weights(n)
    return ln2_t * math.fsum(w * transform(k * ln2_t) for k, w in enumerate(weights, start=1))
