"""Radial weight functions on hyperbolic space and their small-x series.

Everything here derives from the volume-element antiderivative

    G(x) = int_0^x sinh(s)^(n-1) ds,

the weight that puts the radial Laplace-Beltrami operator on H^n in
Sturm-Liouville form.  The derived quantities

    m(x) = G cosh(x) - sinh(x)^n / n          (m' = G sinh)
    L(x) = m(x) / sinh(x) = G coth(x) - G'/n
    f(x) = L G' - c G^2                        c = n/(n+2)
    g(x) = (n-2) cosh(x) m(x) - sigma G sinh(x)^2,  sigma = (n-2)/(n+2)
    h(x) = n G cosh(x) - sinh(x)^n             (h' = n G sinh)

all vanish at the origin to high order (m, g, h like x^(n+2), f like
x^(2n+2)), so direct evaluation there loses every significant digit to
cancellation.  Below ``X_SWITCH`` each function therefore uses a power
series in t = x^2 generated from one recurrence; above it the closed
forms are evaluated directly, with G itself coming from cached
Gauss-Legendre panels accurate to ~1e-14 relative.

The dimension n is a real parameter, n > 2; nothing requires it to be an
integer.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Series switch point and truncation order (in t = x^2).  At X_SWITCH the
# truncation is ~x^(2K+2) ~ 1e-56 relative; both branches stay valid on a
# wide overlap around the switch so they can be cross-checked.
X_SWITCH = 1e-2
_K = 14

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)

_polyval = np.polynomial.polynomial.polyval


@dataclass(frozen=True)
class DimensionParam:
    """Dimension parameter n > 2 with its derived exponents.

    p = (n+2)/(n-2) is the critical Sobolev exponent, sigma = 1/p and
    c = n/(n+2) the constants of the pointwise weight inequality; they
    satisfy sigma = 2c - 1 identically.
    """

    n: float

    def __post_init__(self):
        n = float(self.n)
        if not math.isfinite(n) or n <= 2.0:
            raise DomainError(f"dimension parameter must be finite and > 2, got {self.n!r}")
        object.__setattr__(self, "n", n)

    @property
    def p(self) -> float:
        return (self.n + 2.0) / (self.n - 2.0)

    @property
    def sigma(self) -> float:
        return (self.n - 2.0) / (self.n + 2.0)

    @property
    def c(self) -> float:
        return self.n / (self.n + 2.0)


def dimension(n) -> DimensionParam:
    """Coerce a float or DimensionParam to DimensionParam."""
    if isinstance(n, DimensionParam):
        return n
    return DimensionParam(float(n))


@dataclass(frozen=True)
class BoundSet:
    """The three closed-form constants compared throughout.

    paper_bound      n^2(n-1)/(4(n+2)), the radial nonexistence threshold
    stapelkamp_bound n(n-2)/4, the star-shaped-domain threshold
    spectrum_bottom  (n-1)^2/4, bottom of the Laplace-Beltrami spectrum on H^n
    """

    paper_bound: float
    stapelkamp_bound: float
    spectrum_bottom: float


def bounds(n) -> BoundSet:
    """Evaluate the three comparison constants at dimension n."""
    nn = dimension(n).n
    return BoundSet(
        paper_bound=nn * nn * (nn - 1.0) / (4.0 * (nn + 2.0)),
        stapelkamp_bound=nn * (nn - 2.0) / 4.0,
        spectrum_bottom=(nn - 1.0) ** 2 / 4.0,
    )


# ----------------------------------------------------------------------
# series machinery (coefficients in t = x^2)


def _series_pow(base: np.ndarray, alpha: float, K: int) -> np.ndarray:
    """t-coefficients of base(t)**alpha for a series with base[0] == 1."""
    out = np.zeros(K + 1)
    out[0] = 1.0
    for k in range(1, K + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc += ((alpha + 1.0) * j - k) * base[j] * out[k - j]
        out[k] = acc / k
    return out


def _series_mul(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    return np.convolve(a, b)[: K + 1]


def _series_div(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    """t-coefficients of a(t)/b(t) for b[0] == 1."""
    out = np.empty(K + 1)
    for k in range(K + 1):
        acc = a[k] if k < len(a) else 0.0
        for j in range(1, k + 1):
            acc -= b[j] * out[k - j]
        out[k] = acc
    return out


class _NSeries:
    """All t = x^2 coefficient arrays for one value of n.

    Scalings: sinh^(n-1) = x^(n-1) s1(t), sinh^n = x^n sn(t),
    G = x^n gg(t), m = x^(n+2) mm(t), L = x^(n+1) ll(t),
    L G' = x^(2n) lg(t), G^2 = x^(2n) g2(t), f = x^(2n) ff(t),
    g = x^(n+2) gs(t), h = x^(n+2) hh(t).
    """

    def __init__(self, n: float):
        K = _K
        sx = np.array([1.0 / math.factorial(2 * k + 1) for k in range(K + 1)])
        ch = np.array([1.0 / math.factorial(2 * k) for k in range(K + 1)])
        s1 = _series_pow(sx, n - 1.0, K)
        sn = _series_pow(sx, n, K)
        gg = s1 / (n + 2.0 * np.arange(K + 1))
        # leading coefficients of G cosh - sinh^n/n cancel exactly (both 1/n)
        mraw = _series_mul(gg, ch, K) - sn / n
        mm = mraw[1:]
        ll = _series_div(mm, sx, K - 1)
        lg = _series_mul(ll, s1, K - 1)
        g2 = _series_mul(gg, gg, K - 1)
        c = n / (n + 2.0)
        sigma = (n - 2.0) / (n + 2.0)
        sx2 = _series_mul(sx, sx, K - 1)
        gs = (n - 2.0) * _series_mul(ch, mm, K - 1) - sigma * _series_mul(gg, sx2, K - 1)
        # the t^0 coefficients of f and g vanish identically:
        # lg[0] = 1/(n(n+2)) = c*g2[0] and (n-2)*mm[0] = sigma/n; zero the
        # float residuals so the series branch keeps full relative accuracy
        ff = lg - c * g2
        ff[0] = 0.0
        gs[0] = 0.0
        hh = (n * _series_mul(gg, ch, K) - sn)[1:]
        self.n = n
        self.s1, self.sn, self.gg, self.mm = s1, sn, gg, mm
        self.ll, self.lg, self.g2, self.gs, self.hh = ll, lg, g2, gs, hh
        self.ff = ff
        self.c, self.sigma = c, sigma


class _GPanels:
    """Cumulative Gauss-Legendre panels for G(x) above the series region.

    Panel widths double from X_SWITCH until 0.25 (keeping the x^(n-1)
    branch point at the origin outside every panel's Bernstein ellipse),
    then stay fixed; 32-node panels leave truncation far below 1e-14
    relative.  Extension is lazy and lock-protected.
    """

    def __init__(self, n: float, g_switch: float):
        self.n = n
        self._lock = threading.Lock()
        self.breaks = np.array([X_SWITCH])
        self.cum = np.array([g_switch])

    def _panel_integral(self, a: float, b: float) -> float:
        half = 0.5 * (b - a)
        pts = 0.5 * (a + b) + half * _GL_NODES
        return half * float(np.sinh(pts) ** (self.n - 1.0) @ _GL_WEIGHTS)

    def ensure(self, x_max: float) -> None:
        with self._lock:
            breaks = list(self.breaks)
            cum = list(self.cum)
            while breaks[-1] < x_max:
                b = breaks[-1]
                w = min(0.25, b)
                breaks.append(b + w)
                cum.append(cum[-1] + self._panel_integral(b, b + w))
            if len(breaks) > len(self.breaks):
                self.breaks = np.array(breaks)
                self.cum = np.array(cum)

    def eval(self, x: np.ndarray) -> np.ndarray:
        if x.size == 0:
            return np.empty(0)
        self.ensure(float(np.max(x)))
        breaks, cum = self.breaks, self.cum
        idx = np.searchsorted(breaks, x, side="right") - 1
        a = breaks[idx]
        half = 0.5 * (x - a)
        pts = 0.5 * (x + a)[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = np.sinh(pts) ** (self.n - 1.0)
        return cum[idx] + half * (vals @ _GL_WEIGHTS)


_cache_lock = threading.Lock()
_series_cache: dict[float, _NSeries] = {}
_panel_cache: dict[float, _GPanels] = {}


def _series(n: float) -> _NSeries:
    with _cache_lock:
        ser = _series_cache.get(n)
        if ser is None:
            ser = _series_cache[n] = _NSeries(n)
        return ser


def _panels(n: float) -> _GPanels:
    with _cache_lock:
        pan = _panel_cache.get(n)
    if pan is None:
        ser = _series(n)
        g_switch = X_SWITCH**n * float(_polyval(X_SWITCH**2, ser.gg))
        with _cache_lock:
            pan = _panel_cache.setdefault(n, _GPanels(n, g_switch))
    return pan


def _split(x, n):
    """Validate input, return (n, x array, small mask, scalar flag)."""
    nn = dimension(n).n
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if np.any(xa < 0.0) or not np.all(np.isfinite(xa)):
        raise DomainError("x must be finite and >= 0")
    return nn, xa, xa < X_SWITCH, scalar


def _assemble(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


# ----------------------------------------------------------------------
# public functions; all accept scalar or array x, n as float or DimensionParam


def g_big(x, n):
    """G(x) = int_0^x sinh(s)^(n-1) ds, to ~1e-12 relative or better."""
    nn, xa, small, scalar = _split(x, n)
    ser = _series(nn)
    out = np.empty_like(xa)
    xs = xa[small]
    out[small] = xs**nn * _polyval(xs**2, ser.gg)
    out[~small] = _panels(nn).eval(xa[~small])
    return _assemble(out, scalar)


def g_prime(x, n):
    """G'(x) = sinh(x)^(n-1)."""
    nn, xa, _, scalar = _split(x, n)
    return _assemble(np.sinh(xa) ** (nn - 1.0), scalar)


def m_fun(x, n):
    """m(x) = G cosh(x) - sinh(x)^n / n; vanishes like x^(n+2) at 0."""
    nn, xa, small, scalar = _split(x, n)
    ser = _series(nn)
    out = np.empty_like(xa)
    xs = xa[small]
    out[small] = xs ** (nn + 2.0) * _polyval(xs**2, ser.mm)
    xb = xa[~small]
    out[~small] = _panels(nn).eval(xb) * np.cosh(xb) - np.sinh(xb) ** nn / nn
    return _assemble(out, scalar)


def l_fun(x, n):
    """L(x) = m(x)/sinh(x) = G coth(x) - G'(x)/n; L(0) = 0 by continuity."""
    nn, xa, small, scalar = _split(x, n)
    ser = _series(nn)
    out = np.empty_like(xa)
    xs = xa[small]
    out[small] = xs ** (nn + 1.0) * _polyval(xs**2, ser.ll)
    xb = xa[~small]
    out[~small] = (_panels(nn).eval(xb) * np.cosh(xb) - np.sinh(xb) ** nn / nn) / np.sinh(xb)
    return _assemble(out, scalar)


def f_fun(x, n):
    """f(x) = L(x) G'(x) - c G(x)^2 = sinh^(n-2) m - c G^2, c = n/(n+2)."""
    nn, xa, small, scalar = _split(x, n)
    ser = _series(nn)
    out = np.empty_like(xa)
    xs = xa[small]
    out[small] = xs ** (2.0 * nn) * _polyval(xs**2, ser.ff)
    xb = xa[~small]
    sh = np.sinh(xb)
    gb = _panels(nn).eval(xb)
    mb = gb * np.cosh(xb) - sh**nn / nn
    out[~small] = sh ** (nn - 2.0) * mb - ser.c * gb**2
    return _assemble(out, scalar)


def g_fun(x, n):
    """g(x) = (n-2) cosh(x) m(x) - sigma G sinh(x)^2; vanishes like x^(n+4)."""
    nn, xa, small, scalar = _split(x, n)
    ser = _series(nn)
    out = np.empty_like(xa)
    xs = xa[small]
    out[small] = xs ** (nn + 2.0) * _polyval(xs**2, ser.gs)
    xb = xa[~small]
    sh = np.sinh(xb)
    gb = _panels(nn).eval(xb)
    mb = gb * np.cosh(xb) - sh**nn / nn
    out[~small] = (nn - 2.0) * np.cosh(xb) * mb - ser.sigma * gb * sh**2
    return _assemble(out, scalar)


def h_fun(x, n):
    """h(x) = n G cosh(x) - sinh(x)^n; h' = n G sinh."""
    nn, xa, small, scalar = _split(x, n)
    ser = _series(nn)
    out = np.empty_like(xa)
    xs = xa[small]
    out[small] = xs ** (nn + 2.0) * _polyval(xs**2, ser.hh)
    xb = xa[~small]
    out[~small] = nn * _panels(nn).eval(xb) * np.cosh(xb) - np.sinh(xb) ** nn
    return _assemble(out, scalar)


def lemma_terms(x, n):
    """The two sides of the pointwise weight inequality, evaluated stably.

    Returns (L*G', c*G^2) so callers can form margins with a possibly
    perturbed constant; for the unperturbed margin prefer f_fun, whose
    series branch avoids the cancellation between the two terms.
    """
    nn, xa, small, scalar = _split(x, n)
    ser = _series(nn)
    lg = np.empty_like(xa)
    cg2 = np.empty_like(xa)
    xs = xa[small]
    t = xs**2
    lg[small] = xs ** (2.0 * nn) * _polyval(t, ser.lg)
    cg2[small] = ser.c * xs ** (2.0 * nn) * _polyval(t, ser.g2)
    xb = xa[~small]
    sh = np.sinh(xb)
    gb = _panels(nn).eval(xb)
    mb = gb * np.cosh(xb) - sh**nn / nn
    lg[~small] = sh ** (nn - 2.0) * mb
    cg2[~small] = ser.c * gb**2
    if scalar:
        return float(lg[0]), float(cg2[0])
    return lg, cg2
