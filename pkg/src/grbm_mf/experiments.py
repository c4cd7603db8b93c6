"""Parameter-SD sweeps comparing exact, type I and type II inference.

Trial seeding: trial ``t`` at grid point ``k`` of a sweep with seed ``S``
uses ``np.random.SeedSequence([S, k, t]).generate_state(2)``; word 0 seeds
the parameter draw and word 1 seeds the solver restarts.  Results therefore
do not depend on how trials are distributed over worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from grbm_mf.exact import ExactMoments, exact_moments
from grbm_mf.meanfield import MfSolution, SolverOptions, solve_type1, solve_type2
from grbm_mf.model import GrbmParams, SampleSpace, sample_params

MODES = ("free-energy", "mse")
VARY = ("w", "b", "c")
DEFAULT_GRID = (0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0)

FE_COLUMNS = ("sd", "f_exact_mean", "f1_mean", "f2_mean", "n_unconverged", "n_trials")
MSE_COLUMNS = ("sd", "mse1_h", "mse1_v", "mse2_h", "mse2_v", "n_unconverged", "n_trials")


@dataclass(frozen=True)
class SweepSpec:
    mode: str = "free-energy"
    vary: str = "w"
    sd_grid: tuple[float, ...] = DEFAULT_GRID
    fixed_sd: float = 0.1
    n_visible: int = 24
    n_hidden: int = 12
    space: SampleSpace = field(default_factory=SampleSpace.binary)
    trials: int = 1000
    sigma2_value: float = 1.0
    solver: SolverOptions = field(default_factory=SolverOptions)
    seed: int = 0
    # drop trials where either solver failed to converge from the averages
    strict: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.vary not in VARY:
            raise ValueError(f"vary must be one of {VARY}, got {self.vary!r}")
        grid = tuple(float(x) for x in self.sd_grid)
        if not grid or grid[0] <= 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sd_grid must be nonempty, positive and strictly increasing")
        object.__setattr__(self, "sd_grid", grid)
        if self.fixed_sd < 0:
            raise ValueError("fixed_sd must be nonnegative")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n_visible < 1 or self.n_hidden < 1:
            raise ValueError("layer sizes must be positive")
        if not self.sigma2_value > 0:
            raise ValueError("sigma2_value must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def sds(self, sd: float) -> tuple[float, float, float]:
        """``(sd_b, sd_c, sd_w)`` for one grid point."""
        out = {"b": self.fixed_sd, "c": self.fixed_sd, "w": self.fixed_sd}
        out[self.vary] = sd
        return out["b"], out["c"], out["w"]


@dataclass(frozen=True)
class SweepRow:
    sd: float
    n_unconverged: int
    n_trials: int
    f_exact_mean: float | None = None
    f1_mean: float | None = None
    f2_mean: float | None = None
    mse1_h: float | None = None
    mse1_v: float | None = None
    mse2_h: float | None = None
    mse2_v: float | None = None

    def values(self, mode: str) -> tuple:
        cols = FE_COLUMNS if mode == "free-energy" else MSE_COLUMNS
        return tuple(getattr(self, c) for c in cols)


def mse(exact, approx) -> float:
    exact = np.asarray(exact, dtype=np.float64)
    approx = np.asarray(approx, dtype=np.float64)
    if exact.shape != approx.shape or exact.ndim != 1 or exact.size == 0:
        raise ValueError(f"mse needs two equal-length nonempty vectors, got {exact.shape} and {approx.shape}")
    return float(np.mean((exact - approx) ** 2))


def run_trial(params: GrbmParams, solver: SolverOptions) -> tuple[ExactMoments, MfSolution, MfSolution]:
    """Exact, type I and type II results for one instance.

    Type II gets the type I hidden means as one extra starting point.  Type I
    factors satisfy ``F1[q, u] >= F2[u]``, so a type II descent from there
    keeps ``F1 >= F2`` even when the restarts miss the global minimum.
    """
    s1 = solve_type1(params, solver)
    return exact_moments(params), s1, solve_type2(params, solver, init=s1.m)


def trial_seeds(seed: int, point: int, trial: int) -> tuple[int, int]:
    state = np.random.SeedSequence([seed, point, trial]).generate_state(2)
    return int(state[0]), int(state[1])


def _trial_values(args) -> tuple[np.ndarray, bool]:
    spec, point, trial = args
    param_seed, solver_seed = trial_seeds(spec.seed, point, trial)
    sd_b, sd_c, sd_w = spec.sds(spec.sd_grid[point])
    params = sample_params(
        spec.n_visible, spec.n_hidden, sd_b, sd_c, sd_w, spec.sigma2_value, spec.space, param_seed
    )
    ex, s1, s2 = run_trial(params, replace(spec.solver, seed=solver_seed))
    if spec.mode == "free-energy":
        vals = [ex.free_energy, s1.free_energy, s2.free_energy]
    else:
        vals = [
            mse(ex.m_exact, s1.m),
            mse(ex.nu_exact, s1.nu),
            mse(ex.m_exact, s2.m),
            mse(ex.nu_exact, s2.nu),
        ]
    return np.array(vals), s1.converged and s2.converged


def _aggregate(spec: SweepSpec, sd: float, results) -> SweepRow:
    vals = np.array([v for v, _ in results])
    ok = np.array([c for _, c in results])
    n_unconverged = int((~ok).sum())
    if spec.strict:
        vals = vals[ok]
    # np.mean over the trial axis sums pairwise in trial order
    means = vals.mean(axis=0) if vals.shape[0] else np.full(vals.shape[1], np.nan)
    base = dict(sd=sd, n_unconverged=n_unconverged, n_trials=len(results))
    if spec.mode == "free-energy":
        return SweepRow(**base, f_exact_mean=float(means[0]), f1_mean=float(means[1]), f2_mean=float(means[2]))
    return SweepRow(
        **base,
        mse1_h=float(means[0]),
        mse1_v=float(means[1]),
        mse2_h=float(means[2]),
        mse2_v=float(means[3]),
    )


def run_sweep(spec: SweepSpec, progress=None) -> list[SweepRow]:
    """One row per grid point, each averaging ``spec.trials`` fresh instances.

    ``progress`` is an optional callable invoked with each finished row.
    """
    rows = []
    pool = ProcessPoolExecutor(spec.workers) if spec.workers > 1 else None
    try:
        for k, sd in enumerate(spec.sd_grid):
            jobs = [(spec, k, t) for t in range(spec.trials)]
            if pool is None:
                results = [_trial_values(j) for j in jobs]
            else:
                results = list(pool.map(_trial_values, jobs, chunksize=max(1, spec.trials // (4 * spec.workers))))
            row = _aggregate(spec, sd, results)
            rows.append(row)
            if progress is not None:
                progress(row)
    finally:
        if pool is not None:
            pool.shutdown()
    return rows
