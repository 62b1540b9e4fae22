"""Shared generators and independent oracles for the test suite.

Oracles here deliberately avoid the package's own numeric paths: recursions
are plain Python float loops, polynomial checks go through numpy's reference
routines, and quadrature cross-checks use scipy.  When a test compares the
package against one of these, a bug in the package cannot cancel out.
"""

from __future__ import annotations

import math

import numpy as np

from ldpc_forge import DEContext, DegreeDistribution, Ensemble, check_successful
from ldpc_forge.estimators import CurvePair, code_curves
from ldpc_forge.errors import DegenerateGap


def poly_eval_by_hand(coeffs: dict[int, float], x: float) -> float:
    """Degree-indexed generating polynomial, summed term by term."""
    return sum(v * x ** (d - 1) for d, v in coeffs.items())


def de_recursion_oracle(lam: dict[int, float], rho: dict[int, float],
                        eps: float, eta: float, l_max: int = 200_000):
    """Pure-Python erasure recursion; returns (count, probs) or (None, probs)."""
    probs = [eps]
    p = eps
    for l in range(1, l_max + 1):
        inner = 1.0 - poly_eval_by_hand(rho, 1.0 - p)
        p_next = eps * poly_eval_by_hand(lam, inner)
        probs.append(p_next)
        if p_next < eta:
            return l, probs
        if p_next >= p * (1.0 - 1e-12):
            return None, probs
        p = p_next
    return None, probs


def staircase_oracle(lam: dict[int, float], rho: dict[int, float],
                     eps: float, eta: float, l_max: int = 200_000):
    """Ordinate-domain recursion Z_l = lam(1 - rho(1 - eps*Z_{l-1})), Z_0 = 1.

    Same count as the probability recursion under Z = P/eps with target
    eta/eps; kept separate so the two conventions cross-check each other.
    """
    z = 1.0
    target = eta / eps
    for l in range(1, l_max + 1):
        x = 1.0 - poly_eval_by_hand(rho, 1.0 - eps * z)
        z_next = poly_eval_by_hand(lam, x)
        if z_next < target:
            return l
        if z_next >= z * (1.0 - 1e-12):
            return None
        z = z_next
    return None


def psi_monomial_closed_form(d_c: int, eps: float, x):
    """psi for rho(x) = x^(d_c-1): (1/eps) * (1 - (1-x)^(1/(d_c-1)))."""
    return (1.0 - (1.0 - np.asarray(x)) ** (1.0 / (d_c - 1))) / eps


def psi_deriv_monomial_closed_form(d_c: int, eps: float, x):
    """Derivative of the closed form above."""
    w = 1.0 / (d_c - 1)
    return w / eps * (1.0 - np.asarray(x)) ** (w - 1.0)


def random_simplex_lambda(rng: np.random.Generator, d_v: int = 16,
                          n_support: int | None = None) -> DegreeDistribution:
    """Random degree distribution with support {2, 3} plus a few higher degrees."""
    if n_support is None:
        n_support = int(rng.integers(1, 4))
    pool = np.arange(4, d_v + 1)
    extra = sorted(rng.choice(pool, size=min(n_support, pool.size), replace=False).tolist())
    degs = [2, 3] + extra
    w = rng.dirichlet(np.ones(len(degs)))
    return DegreeDistribution({d: float(v) for d, v in zip(degs, w)})


def random_decodable_ensemble(rng: np.random.Generator, rho: DegreeDistribution,
                              eps: float, eta: float, d_v: int = 16,
                              max_tries: int = 500) -> Ensemble:
    """Rejection-sample a lam whose recursion provably reaches eta."""
    ctx = DEContext.create(rho, eps, eta)
    cap = 1.0 / (eps * rho.eval_deriv(1.0))
    for _ in range(max_tries):
        lam = random_simplex_lambda(rng, d_v)
        if lam.coeff(2) >= 0.95 * cap:
            continue
        e = Ensemble(lam=lam, rho=rho)
        if check_successful(e, ctx, grid_size=2048).ok:
            return e
    raise RuntimeError("could not sample a decodable ensemble")


def random_feasible_pair(rng: np.random.Generator, rho: DegreeDistribution,
                         eps: float, eta: float, d_v: int = 16,
                         max_tries: int = 500) -> CurvePair:
    """Rejection-sample a lam/psi pair with a positive gap on [zeta, xi]."""
    ctx = DEContext.create(rho, eps, eta)
    for _ in range(max_tries):
        lam = random_simplex_lambda(rng, d_v)
        pair = code_curves(Ensemble(lam=lam, rho=rho), ctx)
        try:
            pair.validate()
        except DegenerateGap:
            continue
        return pair
    raise RuntimeError("could not sample a feasible curve pair")


def fixture_context(fx, default_eta: float = 1e-3) -> DEContext:
    """DEContext from a stored fixture's own parameters."""
    eta = fx.params.get("eta") or default_eta
    return DEContext.create(fx.ensemble.rho, fx.params["epsilon"], eta)


def count_at_target(probs, target: float):
    """First index with P <= target (tiny relative band), else None."""
    arr = np.asarray(probs)
    hit = np.nonzero(arr <= target + 1e-12 * (1.0 + target))[0]
    return int(hit[0]) if hit.size else None


def lp_vertex_enumeration_oracle(c, A_ub, b_ub, A_eq=None, b_eq=None):
    """Brute-force LP optimum over all basic feasible points, x >= 0.

    Enumerates every choice of n active constraints among the inequality
    rows, the equality rows (always active), and the axes; solves the
    square system; keeps feasible points.  Only sensible for <= ~6 vars.
    """
    import itertools

    c = np.asarray(c, dtype=float)
    A_ub = np.asarray(A_ub, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float)
    n = c.size
    rows = [(A_ub[i], b_ub[i]) for i in range(A_ub.shape[0])]
    rows += [(np.eye(n)[j], 0.0) for j in range(n)]
    forced = []
    if A_eq is not None:
        A_eq = np.asarray(A_eq, dtype=float)
        b_eq = np.asarray(b_eq, dtype=float)
        forced = [(A_eq[i], b_eq[i]) for i in range(A_eq.shape[0])]
    best = None
    k = n - len(forced)
    for combo in itertools.combinations(range(len(rows)), k):
        sel = forced + [rows[i] for i in combo]
        A = np.array([r for r, _ in sel])
        b = np.array([v for _, v in sel])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, b)
        if np.any(x < -1e-9):
            continue
        if np.any(A_ub @ x > b_ub + 1e-9):
            continue
        if forced and np.max(np.abs(A_eq @ x - b_eq)) > 1e-9:
            continue
        val = float(c @ x)
        if best is None or val < best[0]:
            best = (val, x)
    return best


def poly_product_oracle(*factors) -> np.ndarray:
    """Expand a product of ascending-coefficient polynomials with numpy."""
    out = np.array([1.0])
    for f in factors:
        out = np.convolve(out, np.asarray(f, dtype=float))
    return out


def binom_product_oracle(i: int, D: int, zt: float, xi: float) -> np.ndarray:
    """Coefficients of (zt + xi*u)^i * (1 + u)^(D-i) by direct expansion."""
    factors = [[zt, xi]] * i + [[1.0, 1.0]] * (D - i)
    return poly_product_oracle(*factors) if factors else np.array([1.0])


def enclosed_area(pair: CurvePair, quad_points: int = 20_000) -> float:
    """Midpoint quadrature of f2 - f1 over [a, b]."""
    dx = (pair.b - pair.a) / quad_points
    xs = pair.a + dx * (np.arange(quad_points) + 0.5)
    return float(np.sum(pair.f2(xs) - pair.f1(xs)) * dx)


def stability_cap(rho: DegreeDistribution, eps: float) -> float:
    """Upper limit on lam_2 for the recursion to contract near zero."""
    return 1.0 / (eps * rho.eval_deriv(1.0))


def frac_binom_oracle(omega: float, i: int) -> float:
    """(omega choose i) as an explicit product, float accumulation."""
    num = 1.0
    for k in range(i):
        num *= omega - k
    return num / math.factorial(i)
