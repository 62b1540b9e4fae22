"""Iteration-count estimates for staircase convergence between two curves.

A decoding trajectory bounces between a lower curve f1 and an upper curve
f2 on [a, b]: from ordinate Z the next abscissa is f2^{-1}(Z) and the next
ordinate is f1 of that.  The number of steps until the abscissa drops below
`a` is the exact iteration count; the integral of f2'/(f2 - f1) over [a, b]
approximates it; Jensen's inequality gives the floor
(b-a)(f2(b)-f2(a))/area.  For a code, f1 = lam, f2 = psi, a = zeta,
b = xi (see de_engine), and the utility value min (psi-lam)/psi' is the
worst-case step size a design should maximize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .de_engine import DEContext, psi, psi_deriv, psi_inverse
from .ensemble import DegreeDistribution, Ensemble
from .errors import DegenerateGap, DomainError, NonConvergent

ITER_CAP = 1_000_000
_REL_TOL = 1e-12


def _central_diff(f: Callable, h: float) -> Callable:
    def deriv(x):
        return (f(np.asarray(x) + h) - f(np.asarray(x) - h)) / (2.0 * h)

    return deriv


def _bisect_inverse(f: Callable, lo: float, hi: float, iters: int = 100) -> Callable:
    """Invert an increasing scalar/vector function on [lo, hi] by bisection."""

    def inverse(y):
        ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
        a = np.full_like(ys, lo)
        b = np.full_like(ys, hi)
        for _ in range(iters):
            mid = 0.5 * (a + b)
            below = f(mid) < ys
            a = np.where(below, mid, a)
            b = np.where(below, b, mid)
        out = 0.5 * (a + b)
        return float(out[0]) if np.isscalar(y) else out

    return inverse


@dataclass(frozen=True)
class CurvePair:
    """Two increasing curves f1 < f2 on [a, b] plus optional analytic extras.

    Callables must accept numpy arrays.  Missing derivatives fall back to
    central differences (which evaluate slightly outside [a, b]); a missing
    f2 inverse falls back to bisection on [a, b].
    """

    f1: Callable
    f2: Callable
    a: float
    b: float
    f1_deriv: Optional[Callable] = None
    f2_deriv: Optional[Callable] = None
    f2_inverse: Optional[Callable] = None

    def d_f1(self) -> Callable:
        return self.f1_deriv or _central_diff(self.f1, 1e-6 * (self.b - self.a))

    def d_f2(self) -> Callable:
        return self.f2_deriv or _central_diff(self.f2, 1e-6 * (self.b - self.a))

    def inv_f2(self) -> Callable:
        return self.f2_inverse or _bisect_inverse(self.f2, self.a, self.b)

    def validate(self, grid_n: int = 257) -> None:
        xs = np.linspace(self.a, self.b, grid_n)
        gaps = self.f2(xs) - self.f1(xs)
        k = int(np.argmin(gaps))
        if gaps[k] <= 0.0:
            raise DegenerateGap(float(xs[k]), float(gaps[k]))
        for name, d in (("f1", self.d_f1()), ("f2", self.d_f2())):
            slopes = np.atleast_1d(d(xs))
            if slopes.min() <= 0.0:
                j = int(np.argmin(slopes))
                raise ValueError(
                    f"{name} is not increasing: slope {slopes[j]:.3e} at x={xs[j]:.6g}"
                )


def exact_iterations(p: CurvePair, cap: int = ITER_CAP) -> int:
    """Count staircase steps from Z_0 = f2(b) until the abscissa reaches a.

    The stop test is tie-inclusive with a 1e-12 relative band so that exact
    landings on the boundary (common in hand-built cases) count as arrived.
    """
    p.validate()
    inv = p.inv_f2()
    z = float(p.f2(np.float64(p.b)))
    target = float(p.f2(np.float64(p.a)))
    stop = target + _REL_TOL * (1.0 + abs(target))
    for l in range(1, cap + 1):
        x = float(inv(z))
        z_new = float(p.f1(np.float64(x)))
        if z_new <= stop:
            return l
        if z_new >= z * (1.0 - _REL_TOL):
            raise NonConvergent(l, f"stalled at Z={z_new!r}")
        z = z_new
    raise NonConvergent(cap, "iteration cap reached before the target")


def local_step_count(p: CurvePair, x_star: float, dx_star: float) -> int:
    """Steps needed to cross [x_star, x_star+dx_star] at the local step size."""
    if not (p.a <= x_star and x_star + dx_star <= p.b):
        raise DomainError(x_star, p.a, p.b, what="x_star window")
    gap = float(p.f2(np.float64(x_star)) - p.f1(np.float64(x_star)))
    if gap <= 0.0:
        raise DegenerateGap(float(x_star), gap)
    v = float(p.d_f2()(np.float64(x_star))) * dx_star / gap
    # guard the ceiling against float noise on exact integers
    return max(1, math.ceil(v - _REL_TOL * (1.0 + abs(v))))


def approx_iterations(p: CurvePair, quad_points: int = 10_000) -> float:
    """Midpoint quadrature of f2'/(f2 - f1) over [a, b].

    Midpoint rather than an endpoint rule: tight designs have gaps
    approaching zero at b, which an endpoint evaluation would hit head-on.
    """
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    dx = (p.b - p.a) / quad_points
    xs = p.a + dx * (np.arange(quad_points) + 0.5)
    gaps = p.f2(xs) - p.f1(xs)
    k = int(np.argmin(gaps))
    if gaps[k] <= 0.0:
        raise DegenerateGap(float(xs[k]), float(gaps[k]))
    return float(np.sum(p.d_f2()(xs) / gaps) * dx)


def lower_bound(f2: Callable, a: float, b: float, c: float) -> float:
    """Equal-step benchmark (b-a)(f2(b)-f2(a))/c, with c the enclosed area.

    This is the step count of the area-c profile whose staircase advances
    a constant amount per iteration (`optimal_f1`).  It floors
    `approx_iterations` only when gap/f2' is constant; profiles that
    concentrate their area where f2' is small can beat it.  For an
    unconditional floor use `jensen_bound`.
    """
    return (b - a) * (float(f2(np.float64(b))) - float(f2(np.float64(a)))) / c


def jensen_bound(p: CurvePair, quad_points: int = 10_000) -> float:
    """Unconditional floor (b-a)^2 / integral of (f2-f1)/f2' over [a, b].

    Convexity of 1/u under the normalized measure dx/(b-a) gives
    approx_iterations >= this for every valid pair, with equality exactly
    when the step profile (f2-f1)/f2' is constant, where it coincides
    with `lower_bound` at c = enclosed area.
    """
    if quad_points < 16:
        raise ValueError("quad_points must be >= 16")
    dx = (p.b - p.a) / quad_points
    xs = p.a + dx * (np.arange(quad_points) + 0.5)
    steps = (p.f2(xs) - p.f1(xs)) / p.d_f2()(xs)
    k = int(np.argmin(steps))
    if steps[k] <= 0.0:
        raise DegenerateGap(float(xs[k]), float(steps[k]))
    return float((p.b - p.a) ** 2 / (np.sum(steps) * dx))


class EqualStepCurve:
    """Lower curve f2 - d*f2' whose staircase advances exactly d per step.

    With d = c/(f2(b)-f2(a)) the enclosed area equals c and the Jensen
    floor is attained with equality.
    """

    def __init__(self, f2: Callable, f2_deriv: Callable, d: float):
        self.f2 = f2
        self.f2_deriv = f2_deriv
        self.d = d

    def __call__(self, x):
        return self.f2(x) - self.d * self.f2_deriv(x)


def optimal_f1(f2: Callable, a: float, b: float, c: float,
               f2_deriv: Optional[Callable] = None) -> EqualStepCurve:
    """The area-c lower curve minimizing the step count under f2."""
    d = c / (float(f2(np.float64(b))) - float(f2(np.float64(a))))
    return EqualStepCurve(f2, f2_deriv or _central_diff(f2, 1e-6 * (b - a)), d)


@dataclass(frozen=True)
class UtilityResult:
    value: float
    argmin_x: float


def utility(
    lam: DegreeDistribution,
    ctx: DEContext,
    zeta_tilde: Optional[float] = None,
    grid_n: int = 4096,
) -> UtilityResult:
    """Worst-case step size min (psi - lam)/psi' over [zeta_tilde, xi].

    Negative values flag an infeasible lam (it crosses psi).  The grid
    minimum is polished by bounded scalar minimization so the reported
    bottleneck location carries no grid bias.
    """
    if zeta_tilde is None:
        zeta_tilde = 0.5 * ctx.zeta
    if not 0.0 <= zeta_tilde < ctx.xi:
        raise DomainError(zeta_tilde, 0.0, ctx.xi, what="zeta_tilde")
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    xs = np.linspace(zeta_tilde, ctx.xi, grid_n)
    vals = (psi(ctx, xs) - lam.eval(xs)) / np.maximum(psi_deriv(ctx, xs), 1e-300)
    k = int(np.argmin(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, grid_n - 1)]

    def step(x: float) -> float:
        return (psi(ctx, x) - lam.eval(x)) / psi_deriv(ctx, x)

    res = minimize_scalar(step, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    if res.fun <= vals[k]:
        return UtilityResult(value=float(res.fun), argmin_x=float(res.x))
    return UtilityResult(value=float(vals[k]), argmin_x=float(xs[k]))


def code_curves(e: Ensemble, ctx: DEContext) -> CurvePair:
    """The (lam, psi) pair on [zeta, xi] with analytic derivative and inverse."""
    return CurvePair(
        f1=e.lam.eval,
        f2=lambda x: psi(ctx, x),
        a=ctx.zeta,
        b=ctx.xi,
        f1_deriv=e.lam.eval_deriv,
        f2_deriv=lambda x: psi_deriv(ctx, x),
        f2_inverse=lambda y: psi_inverse(ctx, y),
    )
