"""Naive mean-field solvers for the GRBM.

Type I factorizes the whole joint ``q(v) u(h)``; the optimal ``q_i`` is a
Gaussian with variance ``sigma2_i`` and mean ``nu_i = mu_i(m)``, and each
``u_j`` is a softmax with linear field ``lambda_j(nu)``.

Type II keeps the exact ``P(v | h)`` and factorizes only the marginal hidden
model, so ``u_j(h) ~ exp(field_j h + D_j h^2)`` with
``field_j = B_j + sum_k J_jk m_k``.

Both are solved by damped synchronous successive substitution on ``m``,
restarted from several initial points; the restart with the lowest
variational free energy wins.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from grbm_mf.model import GrbmParams, SampleSpace, marginalize


class Variant(enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


@dataclass(frozen=True)
class SolverOptions:
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10000
    n_restarts: int = 5
    init_scale: float = 1.0
    seed: int | None = 0

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"damping must lie in [0, 1), got {self.damping}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be positive")
        if not self.init_scale >= 0:
            raise ValueError("init_scale must be nonnegative")


@dataclass(frozen=True, eq=False)
class MfSolution:
    """Converged mean-field state.

    ``field`` is the linear field of each hidden factor ``u_j``; for type II
    the factor also carries the quadratic term ``D_j h^2``.
    """

    variant: Variant
    m: np.ndarray
    s: np.ndarray
    nu: np.ndarray
    field: np.ndarray
    free_energy: float
    converged: bool
    iterations: int
    residual: float


def hidden_unit_stats(linear_field, quad_field, space: SampleSpace):
    """Moments of ``u(h) ~ exp(linear_field h + quad_field h^2)`` over the alphabet.

    Fields may be arrays (broadcast together).  Returns ``(mean, second_moment,
    neg_entropy)`` where ``neg_entropy = sum_h u ln u``.
    """
    x = space.array
    a = np.asarray(linear_field, dtype=np.float64)[..., None]
    q = np.asarray(quad_field, dtype=np.float64)[..., None]
    logits = a * x + q * x * x
    top = logits.max(axis=-1, keepdims=True)
    shifted = logits - top
    p = np.exp(shifted)
    z = p.sum(axis=-1, keepdims=True)
    p /= z
    logp = shifted - np.log(z)
    mean = (p * x).sum(axis=-1)
    second = (p * x * x).sum(axis=-1)
    neg_entropy = (p * logp).sum(axis=-1)
    return mean, second, neg_entropy


def _softmax_mean(a: np.ndarray, quad_x2: np.ndarray, x: np.ndarray) -> np.ndarray:
    # mean-only fast path of hidden_unit_stats for the iteration loop
    logits = a[..., None] * x + quad_x2
    p = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return (p @ x) / p.sum(axis=-1)


def _type1_field(params: GrbmParams, m: np.ndarray) -> np.ndarray:
    nu = params.b + m @ params.w.T
    return params.c + (nu / params.sigma2) @ params.w


def _initial_means(space: SampleSpace, n_hidden: int, opts: SolverOptions) -> np.ndarray:
    rng = np.random.default_rng(opts.seed)
    r = max(abs(space.lo), abs(space.hi))
    m0 = rng.uniform(-opts.init_scale * r, opts.init_scale * r, size=(opts.n_restarts, n_hidden))
    m0[0] = 0.0
    return np.clip(m0, space.lo, space.hi)


def _iterate(field_fn, quad, space: SampleSpace, m: np.ndarray, opts: SolverOptions):
    """Damped synchronous substitution ``m <- d m + (1 - d) g(m)`` on each row of ``m``.

    Residual is the undamped change ``max |g(m) - m|``.  Rows stop once their
    residual drops to ``tol``.
    """
    x = space.array
    quad_x2 = np.asarray(quad, dtype=np.float64)[..., None] * x * x
    m = m.copy()
    n = m.shape[0]
    iterations = np.zeros(n, dtype=np.int64)
    residual = np.full(n, np.inf)
    active = np.arange(n)
    d = opts.damping
    for _ in range(opts.max_iter):
        cur = m[active]
        new = _softmax_mean(field_fn(cur), quad_x2, x)
        res = np.abs(new - cur).max(axis=1)
        residual[active] = res
        done = res <= opts.tol
        moving = active[~done]
        m[moving] = d * cur[~done] + (1.0 - d) * new[~done]
        iterations[moving] += 1
        active = moving
        if active.size == 0:
            break
    return m, iterations, residual


def _select(candidates: list[MfSolution]) -> MfSolution:
    converged = [c for c in candidates if c.converged]
    if converged:
        return min(converged, key=lambda c: c.free_energy)
    return min(candidates, key=lambda c: c.residual)


def free_energy_type1(params: GrbmParams, solution: MfSolution) -> float:
    """Type I variational free energy at Gaussian ``q_i = N(nu_i, sigma2_i)`` and softmax ``u_j``."""
    if solution.variant is not Variant.TYPE1:
        raise ValueError("free_energy_type1 needs a type I solution")
    m, _, neg_ent = hidden_unit_stats(solution.field, 0.0, params.space)
    nu = solution.nu
    s2 = params.sigma2
    gauss = np.sum((nu - params.b) ** 2 / (2.0 * s2) - 0.5 * np.log(2.0 * np.pi * s2))
    coupling = (nu / s2) @ params.w @ m
    return float(gauss - coupling - params.c @ m + neg_ent.sum())


def free_energy_type2(params: GrbmParams, solution: MfSolution) -> float:
    """Type II variational free energy of the factorized marginal hidden model."""
    if solution.variant is not Variant.TYPE2:
        raise ValueError("free_energy_type2 needs a type II solution")
    mbm = marginalize(params)
    m, s, neg_ent = hidden_unit_stats(solution.field, mbm.D, params.space)
    pair = 0.5 * m @ mbm.J @ m
    return float(-mbm.B @ m - mbm.D @ s - pair + neg_ent.sum() - mbm.log_zH)


def _finish(params, variant, field, quad, iterations, residual, tol) -> MfSolution:
    m, s, _ = hidden_unit_stats(field, quad, params.space)
    sol = MfSolution(
        variant=variant,
        m=m,
        s=s,
        nu=params.b + params.w @ m,
        field=field,
        free_energy=np.nan,
        converged=bool(residual <= tol),
        iterations=int(iterations),
        residual=float(residual),
    )
    fe = free_energy_type1(params, sol) if variant is Variant.TYPE1 else free_energy_type2(params, sol)
    object.__setattr__(sol, "free_energy", fe)
    return sol


def solve_type1(params: GrbmParams, opts: SolverOptions | None = None, init=None) -> MfSolution:
    """Solve ``m_j = <h>_{u_j}``, ``u_j ~ exp(lambda_j(mu(m)) h)``.

    ``init`` optionally adds starting points (rows of hidden means) after the
    ``n_restarts`` defaults.
    """
    opts = SolverOptions() if opts is None else opts
    m0 = _initial_means(params.space, params.n_hidden, opts)
    if init is not None:
        m0 = np.vstack([m0, np.atleast_2d(init)])
    m, its, res = _iterate(lambda mm: _type1_field(params, mm), 0.0, params.space, m0, opts)
    candidates = [
        _finish(params, Variant.TYPE1, _type1_field(params, m[r]), 0.0, its[r], res[r], opts.tol)
        for r in range(m.shape[0])
    ]
    return _select(candidates)


def solve_type2(params: GrbmParams, opts: SolverOptions | None = None, init=None) -> MfSolution:
    """Solve ``m_j = <h>_{u_j}``, ``u_j ~ exp((B_j + sum_k J_jk m_k) h + D_j h^2)``."""
    opts = SolverOptions() if opts is None else opts
    mbm = marginalize(params)
    m0 = _initial_means(params.space, params.n_hidden, opts)
    if init is not None:
        m0 = np.vstack([m0, np.atleast_2d(init)])

    def field_fn(mm):
        return mbm.B + mm @ mbm.J

    m, its, res = _iterate(field_fn, mbm.D, params.space, m0, opts)
    candidates = [
        _finish(params, Variant.TYPE2, field_fn(m[r]), mbm.D, its[r], res[r], opts.tol)
        for r in range(m.shape[0])
    ]
    return _select(candidates)


def kld_gap(mf_free_energy: float, true_free_energy: float) -> float:
    """Minimized KL divergence of a mean-field approximation: ``F_mf - F``."""
    return float(mf_free_energy - true_free_energy)
