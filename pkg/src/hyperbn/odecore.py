"""Radial shooting integrator with identity accumulators.

Integrates

    -u'' - (n-1) coth(x) u' = lambda u + |u|^(p-1) u,   u'(0) = 0,

outward from the regular-singular origin (fourth-order Taylor start,
then the Dormand-Prince kernel from ``_dp45``), while accumulating as
extra ODE state every weighted integral the integral identities need.
A "linear mode" suppresses the nonlinearity, which turns the same
machinery into the Dirichlet eigenvalue integrator.

Profiles carry the accepted-step grid, dense-output interpolants and
the accumulated integrals; they serialize to CSV
(``x,u,du,G,Iu2,Idu2,Iup1,IL,IH``) and to JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from . import _dp45, hyperfun
from .errors import DomainError

DEFAULT_TOL = 1e-10
DEFAULT_X_START = 1e-4
DIVERGENCE_LIMIT = 1e100


@dataclass(frozen=True)
class ProblemParams:
    """The triple (n, lambda, R); p = (n+2)/(n-2) is always derived."""

    n: float
    lam: float
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "n", hyperfun.dimension(self.n).n)
        if not math.isfinite(self.lam):
            raise DomainError(f"lambda must be finite, got {self.lam!r}")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise DomainError(f"radius must be finite and > 0, got {self.radius!r}")

    @property
    def dim(self) -> hyperfun.DimensionParam:
        return hyperfun.DimensionParam(self.n)

    @property
    def p(self) -> float:
        return (self.n + 2.0) / (self.n - 2.0)


@dataclass(frozen=True)
class ShootingOutcome:
    """Classification of one trajectory: first_zero / no_zero / diverged."""

    kind: str
    x: float
    note: Optional[str] = None

    FIRST_ZERO = "first_zero"
    NO_ZERO = "no_zero"
    DIVERGED = "diverged"

    @property
    def crossed(self) -> bool:
        return self.kind == self.FIRST_ZERO


class _TaylorStart:
    """Fourth-order origin expansion u = a + b2 x^2 + b4 x^4."""

    def __init__(self, params: ProblemParams, a: float, linear: bool):
        n, lam, p = params.n, params.lam, params.p
        if linear:
            F = lam * a
            dF = lam
        else:
            F = lam * a + abs(a) ** (p - 1.0) * a
            dF = lam + p * abs(a) ** (p - 1.0)
        self.a = a
        self.b2 = -F / (2.0 * n)
        self.b4 = -self.b2 * (dF + 2.0 * (n - 1.0) / 3.0) / (4.0 * (n + 2.0))

    def u(self, x):
        x2 = np.asarray(x) ** 2
        return self.a + x2 * (self.b2 + x2 * self.b4)

    def du(self, x):
        xa = np.asarray(x)
        return xa * (2.0 * self.b2 + 4.0 * self.b4 * xa**2)


@dataclass
class RadialProfile:
    """One integrated trajectory sampled on its accepted-step grid.

    ``grid`` starts at 0; the columns mirror the CSV schema.  The
    accumulated integrals are carried as arrays along the grid; the
    totals over [0, grid[-1]] are exposed through ``integrals``.
    """

    params: ProblemParams
    a: float
    grid: np.ndarray
    u: np.ndarray
    du: np.ndarray
    G: np.ndarray
    Iu2: np.ndarray
    Idu2: np.ndarray
    Iup1: np.ndarray
    IL: np.ndarray
    IH: np.ndarray
    zeros: np.ndarray = field(default_factory=lambda: np.empty(0))
    _dense: Optional[tuple] = field(default=None, repr=False, compare=False)

    _COLUMNS = ("x", "u", "du", "G", "Iu2", "Idu2", "Iup1", "IL", "IH")

    @property
    def integrals(self) -> dict:
        return {
            "Iu2": float(self.Iu2[-1]),
            "Idu2": float(self.Idu2[-1]),
            "Iup1": float(self.Iup1[-1]),
            "IL": float(self.IL[-1]),
            "IH": float(self.IH[-1]),
        }

    @property
    def x_end(self) -> float:
        return float(self.grid[-1])

    @property
    def max_abs_u(self) -> float:
        return float(np.max(np.abs(self.u)))

    def dense_eval(self, x):
        """Interpolated (u, u') anywhere on [0, grid[-1]].

        Uses the origin Taylor polynomial below the kernel start and the
        per-step quartic dense output above it; interpolation error is
        bounded by the integrator tolerance.
        """
        if self._dense is None:
            raise ValueError("profile carries no dense output (loaded from file?)")
        taylor, xs, ys, qs, hs = self._dense
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        scalar = np.ndim(x) == 0
        if np.any(xa < 0.0) or np.any(xa > self.grid[-1] * (1 + 1e-12)):
            raise DomainError("dense evaluation outside [0, x_end]")
        u = np.empty_like(xa)
        du = np.empty_like(xa)
        low = xa <= xs[0]
        u[low] = taylor.u(xa[low])
        du[low] = taylor.du(xa[low])
        hi = ~low
        if np.any(hi):
            idx = np.clip(np.searchsorted(xs, xa[hi], side="right") - 1, 0, len(xs) - 2)
            th = (xa[hi] - xs[idx]) / hs[idx]
            for comp, out in ((0, u), (1, du)):
                q = qs[idx, comp, :]
                poly = q[:, 0] + th * (q[:, 1] + th * (q[:, 2] + th * q[:, 3]))
                out[hi] = ys[idx, comp] + hs[idx] * th * poly
        if scalar:
            return float(u[0]), float(du[0])
        return u, du

    # -- serialization ------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(self._COLUMNS) + "\n")
            cols = (self.grid, self.u, self.du, self.G, self.Iu2, self.Idu2, self.Iup1, self.IL, self.IH)
            for row in zip(*cols):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def to_json_dict(self) -> dict:
        return {
            "params": {"n": self.params.n, "lambda": self.params.lam, "radius": self.params.radius},
            "amplitude": self.a,
            "grid": self.grid.tolist(),
            "u": self.u.tolist(),
            "du": self.du.tolist(),
            "G": self.G.tolist(),
            "Iu2": self.Iu2.tolist(),
            "Idu2": self.Idu2.tolist(),
            "Iup1": self.Iup1.tolist(),
            "IL": self.IL.tolist(),
            "IH": self.IH.tolist(),
            "zeros": self.zeros.tolist(),
        }

    def to_json(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            json.dump(self.to_json_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_csv(cls, path, params: ProblemParams) -> "RadialProfile":
        data = np.genfromtxt(path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        cols = {name: np.asarray(data[name], dtype=float) for name in cls._COLUMNS}
        return cls(
            params=params,
            a=float(cols["u"][0]),
            grid=cols["x"],
            u=cols["u"],
            du=cols["du"],
            G=cols["G"],
            Iu2=cols["Iu2"],
            Idu2=cols["Idu2"],
            Iup1=cols["Iup1"],
            IL=cols["IL"],
            IH=cols["IH"],
        )

    @classmethod
    def from_json(cls, path) -> "RadialProfile":
        with open(path) as fh:
            doc = json.load(fh)
        params = ProblemParams(doc["params"]["n"], doc["params"]["lambda"], doc["params"]["radius"])
        arrays = {k: np.asarray(doc[k], dtype=float) for k in ("grid", "u", "du", "G", "Iu2", "Idu2", "Iup1", "IL", "IH")}
        return cls(
            params=params,
            a=float(doc["amplitude"]),
            zeros=np.asarray(doc.get("zeros", []), dtype=float),
            **arrays,
        )


# ----------------------------------------------------------------------
# operations


def rhs(x, state, params: ProblemParams, linear: bool = False) -> np.ndarray:
    """Derivative of the full shooting state at x > 0.

    ``state`` is either the 8-component vector or just (u, u'), in which
    case the G slot is filled from the closed form.  Raises OverflowError
    once |u| exceeds the divergence limit, which integration reports as a
    Diverged outcome instead.
    """
    x = float(x)
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError("rhs requires x > 0 (the origin is handled by origin_step)")
    y = np.asarray(state, dtype=float)
    if y.shape == (2,):
        full = np.zeros(_dp45.NSTATE)
        full[:2] = y
        full[2] = hyperfun.g_big(x, params.n)
        y = full
    elif y.shape != (_dp45.NSTATE,):
        raise DomainError(f"state must have 2 or {_dp45.NSTATE} components")
    if abs(y[0]) > DIVERGENCE_LIMIT:
        raise OverflowError(f"|u| exceeds the divergence limit at x={x}")
    ser = hyperfun._series(params.n)
    out = np.empty(_dp45.NSTATE)
    _dp45.rhs_core(x, y, out, params.n, params.lam, params.p, linear, hyperfun.X_SWITCH, ser.ll)
    return out


def origin_step(params: ProblemParams, a: float, x1: float, linear: bool = False) -> np.ndarray:
    """Taylor state at 0 < x1 <= 1e-3, seeding the kernel past the coth singularity.

    u and u' come from the fourth-order origin expansion; the accumulated
    integrals are initialized from their leading powers of x1.
    """
    if not (0.0 < x1 <= 1e-3):
        raise DomainError(f"origin offset must be in (0, 1e-3], got {x1!r}")
    if not math.isfinite(a):
        raise DomainError("amplitude must be finite")
    if a == 0.0:
        return np.zeros(_dp45.NSTATE)
    n, p = params.n, params.p
    taylor = _TaylorStart(params, a, linear)
    y = np.zeros(_dp45.NSTATE)
    y[0] = float(taylor.u(x1))
    y[1] = float(taylor.du(x1))
    g1 = hyperfun.g_big(x1, n)
    b2sq = 4.0 * taylor.b2**2
    y[2] = g1
    y[3] = a * a * g1
    y[4] = b2sq * x1 ** (n + 2.0) / (n + 2.0)
    y[5] = abs(a) ** (p + 1.0) * g1
    y[6] = b2sq * x1 ** (n + 4.0) / (n * (n + 2.0) * (n + 4.0))
    y[7] = b2sq * x1 ** (n + 4.0) / (n * n * (n + 4.0))
    return y


def divergence_limit(params: ProblemParams) -> float:
    """|u| threshold for the Diverged classification.

    Nominally 1e100, clamped so |u|^(p+1) stays representable inside the
    right-hand side; blow-up has a vertical asymptote, so the clamp moves
    the reported location by a negligible amount.
    """
    return min(DIVERGENCE_LIMIT, 10.0 ** (250.0 / (params.p + 1.0)))


def core_scale(params: ProblemParams, a: float, linear: bool = False) -> float:
    """Width sqrt(2n |a/F(a)|) of the origin core, infinite when F(a) = 0.

    The Taylor launch is only valid well inside this scale, so the origin
    offset shrinks with it for large amplitudes.
    """
    n, lam, p = params.n, params.lam, params.p
    F = lam * a if linear else lam * a + abs(a) ** (p - 1.0) * a
    if F == 0.0:
        return math.inf
    return math.sqrt(2.0 * n * abs(a / F))


def _trivial_profile(params: ProblemParams, x_max: float) -> RadialProfile:
    grid = np.array([0.0, x_max])
    zeros = np.zeros(2)
    gvals = np.array([0.0, hyperfun.g_big(x_max, params.n)])
    taylor = _TaylorStart(params, 0.0, False)
    dense = (taylor, grid, np.zeros((2, _dp45.NSTATE)), np.zeros((1, _dp45.NSTATE, 4)), np.array([x_max]))
    return RadialProfile(
        params=params,
        a=0.0,
        grid=grid,
        u=zeros.copy(),
        du=zeros.copy(),
        G=gvals,
        Iu2=zeros.copy(),
        Idu2=zeros.copy(),
        Iup1=zeros.copy(),
        IL=zeros.copy(),
        IH=zeros.copy(),
        _dense=dense,
    )


def integrate(
    params: ProblemParams,
    a: float,
    x_max: float,
    tol: float = DEFAULT_TOL,
    *,
    linear: bool = False,
    stop_zeros: int = 1,
    x_start: float = DEFAULT_X_START,
    record: bool = True,
) -> tuple[RadialProfile, ShootingOutcome]:
    """Shoot from u(0) = a to x_max, stopping at the ``stop_zeros``-th zero.

    Adaptive embedded 5(4) stepping at mixed absolute/relative tolerance
    ``tol``; the first ``stop_zeros`` sign changes of u are located on the
    dense output.  Returns the profile truncated at the terminal event and
    its classification.  A step-size collapse is reported through the
    outcome note, not raised.
    """
    if not (1e-13 <= tol <= 1e-6):
        raise DomainError(f"tol must lie in [1e-13, 1e-6], got {tol!r}")
    if not (math.isfinite(x_max) and x_max > 0.0):
        raise DomainError("x_max must be finite and > 0")
    if stop_zeros < 1:
        raise DomainError("stop_zeros must be >= 1")
    if a == 0.0:
        return _trivial_profile(params, x_max), ShootingOutcome(ShootingOutcome.NO_ZERO, x_max)

    # keep the Taylor launch well inside the origin core.  When the core
    # is too narrow for double precision near 0 the trajectory cannot be
    # shot at all; the blow-up-limit profile (the critical bubble) exits
    # the core positive, so such amplitudes are classified NoZero with an
    # explanatory note instead of a fabricated crossing.
    xc = core_scale(params, a, linear)
    x_start = min(x_start, 0.01 * xc)
    if x_start < 1e-12:
        note = "origin core below resolvable scale; bubble-limit NoZero classification"
        grid = np.array([0.0, x_max])
        zeros2 = np.zeros(2)
        stub = RadialProfile(
            params=params,
            a=a,
            grid=grid,
            u=np.array([a, a]),
            du=zeros2.copy(),
            G=np.array([0.0, hyperfun.g_big(x_max, params.n)]),
            Iu2=zeros2.copy(),
            Idu2=zeros2.copy(),
            Iup1=zeros2.copy(),
            IL=zeros2.copy(),
            IH=zeros2.copy(),
        )
        return stub, ShootingOutcome(ShootingOutcome.NO_ZERO, x_max, note)
    if x_max <= x_start:
        raise DomainError("x_max must exceed the origin offset")

    n, lam, p = params.n, params.lam, params.p
    ser = hyperfun._series(n)
    y0 = origin_step(params, a, x_start, linear)
    au = abs(a)
    # G gets a tiny absolute floor (its starting value) so the weight
    # stays under *relative* control from the first step; the x^(n-1)
    # integrand is not smooth at the origin and would otherwise drift
    atol = np.array([au, au, y0[2], au**2, au**2, au ** (p + 1.0), au**2, au**2]) * tol
    atol = np.maximum(atol, 1e-300)
    u_div = divergence_limit(params)

    status, x_fin, y_fin, xs, ys, qs, hs, zx, zy, nz = _dp45.dp45_integrate(
        x_start,
        y0,
        x_max,
        x_start,
        tol,
        atol,
        n,
        lam,
        p,
        linear,
        hyperfun.X_SWITCH,
        ser.ll,
        u_div,
        stop_zeros,
        record,
    )
    if status == _dp45.STEP_BUDGET:
        raise RuntimeError("integrator exceeded its step budget")

    note = None
    if status == _dp45.REACHED_END:
        outcome = ShootingOutcome(ShootingOutcome.NO_ZERO, x_max)
    elif status == _dp45.HIT_ZERO:
        outcome = ShootingOutcome(ShootingOutcome.FIRST_ZERO, float(zx[min(stop_zeros, len(zx)) - 1]))
    elif status == _dp45.DIVERGED:
        outcome = ShootingOutcome(ShootingOutcome.DIVERGED, float(x_fin))
    else:  # STEP_UNDERFLOW
        note = f"step_size_underflow at x={x_fin:.17g}"
        kind = ShootingOutcome.DIVERGED if abs(y_fin[0]) >= 0.01 * u_div else ShootingOutcome.NO_ZERO
        outcome = ShootingOutcome(kind, float(x_fin), note)

    if not record:
        return (
            RadialProfile(
                params=params,
                a=a,
                grid=np.array([0.0, x_fin]),
                u=np.array([a, y_fin[0]]),
                du=np.array([0.0, y_fin[1]]),
                G=np.array([0.0, y_fin[2]]),
                Iu2=np.array([0.0, y_fin[3]]),
                Idu2=np.array([0.0, y_fin[4]]),
                Iup1=np.array([0.0, y_fin[5]]),
                IL=np.array([0.0, y_fin[6]]),
                IH=np.array([0.0, y_fin[7]]),
                zeros=zx.copy(),
            ),
            outcome,
        )

    grid = np.concatenate(([0.0], xs))
    taylor = _TaylorStart(params, a, linear)
    origin_row = np.zeros((1, _dp45.NSTATE))
    origin_row[0, 0] = a
    ys_full = np.vstack([origin_row, ys])
    dense = (taylor, xs.copy(), ys.copy(), qs.copy(), hs.copy())
    profile = RadialProfile(
        params=params,
        a=a,
        grid=grid,
        u=ys_full[:, 0].copy(),
        du=ys_full[:, 1].copy(),
        G=ys_full[:, 2].copy(),
        Iu2=ys_full[:, 3].copy(),
        Idu2=ys_full[:, 4].copy(),
        Iup1=ys_full[:, 5].copy(),
        IL=ys_full[:, 6].copy(),
        IH=ys_full[:, 7].copy(),
        zeros=zx.copy(),
        _dense=dense,
    )
    return profile, outcome


_INTEGRANDS = ("Iu2", "Idu2", "Iup1", "IL", "IH")


def recompute_integral(profile: RadialProfile, which: str = "Iu2", refine: int = 8) -> float:
    """Composite-Simpson recomputation of one accumulated integral.

    The dense output is resampled ``refine`` times per accepted step and
    the weights are evaluated from the closed forms, so this path shares
    nothing with the in-step accumulation it cross-checks.
    """
    if which not in _INTEGRANDS:
        raise ValueError(f"unknown integral {which!r}; expected one of {_INTEGRANDS}")
    n, p = profile.params.n, profile.params.p
    pieces = [np.linspace(profile.grid[i], profile.grid[i + 1], refine + 1)[:-1] for i in range(len(profile.grid) - 1)]
    xg = np.concatenate(pieces + [profile.grid[-1:]])
    u, du = profile.dense_eval(xg)
    w = hyperfun.g_prime(xg, n)
    if which == "Iu2":
        vals = u**2 * w
    elif which == "Idu2":
        vals = du**2 * w
    elif which == "Iup1":
        vals = np.abs(u) ** (p + 1.0) * w
    elif which == "IL":
        vals = du**2 * hyperfun.l_fun(xg, n)
    else:
        G = hyperfun.g_big(xg, n)
        vals = np.zeros_like(xg)
        pos = xg > 0.0
        vals[pos] = du[pos] ** 2 * G[pos] ** 2 / w[pos]
    return float(simpson(vals, x=xg))
