"""Brute-force oracles: exact enumeration of the marginal model and block Gibbs sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grbm_mf.model import GrbmParams, marginalize

DEFAULT_MAX_STATES = 2**24
_CHUNK = 2**15
_GIBBS_BATCHES = 32


class CapacityError(RuntimeError):
    """The hidden state space is too large to enumerate."""


@dataclass(frozen=True, eq=False)
class ExactMoments:
    m_exact: np.ndarray
    s_exact: np.ndarray
    nu_exact: np.ndarray
    free_energy: float
    log_z_marginal: float


@dataclass(frozen=True, eq=False)
class GibbsEstimate:
    m_hat: np.ndarray
    nu_hat: np.ndarray
    std_err_m: np.ndarray
    std_err_nu: np.ndarray
    n_sweeps: int


def _n_states(params: GrbmParams, max_states: int) -> int:
    n = params.space.size ** params.n_hidden
    if n > max_states:
        raise CapacityError(
            f"{params.space.size}^{params.n_hidden} = {n} hidden states exceeds the cap of {max_states}"
        )
    return n


def _configs(values: np.ndarray, n_hidden: int, start: int, stop: int) -> np.ndarray:
    # mixed-radix digits, last hidden index varies fastest
    k = values.size
    idx = np.arange(start, stop, dtype=np.int64)
    powers = k ** np.arange(n_hidden - 1, -1, -1, dtype=np.int64)
    return values[(idx[:, None] // powers) % k]


def _enumerate(params: GrbmParams, max_states: int, moments: bool):
    """Stream log-weights of every hidden configuration with a running max shift.

    Returns ``(log_sum, sum_h, sum_h2)`` where the sums are normalized
    expectations (``None`` unless ``moments``).
    """
    n = _n_states(params, max_states)
    mbm = marginalize(params)
    values = params.space.array
    shift = -np.inf
    z = 0.0
    s1 = np.zeros(params.n_hidden)
    s2 = np.zeros(params.n_hidden)
    for start in range(0, n, _CHUNK):
        x = _configs(values, params.n_hidden, start, min(n, start + _CHUNK))
        x2 = x * x
        logw = x @ mbm.B + x2 @ mbm.D + 0.5 * np.einsum("sj,sj->s", x @ mbm.J, x)
        top = logw.max()
        if top > shift:
            scale = np.exp(shift - top)
            z *= scale
            s1 *= scale
            s2 *= scale
            shift = top
        p = np.exp(logw - shift)
        z += p.sum()
        if moments:
            s1 += p @ x
            s2 += p @ x2
    log_sum = shift + np.log(z)
    if not moments:
        return log_sum, None, None
    return log_sum, s1 / z, s2 / z


def exact_free_energy(params: GrbmParams, max_states: int = DEFAULT_MAX_STATES) -> float:
    """True free energy ``-ln Z`` by summing the marginal model over all hidden states."""
    log_sum, _, _ = _enumerate(params, max_states, moments=False)
    return float(-marginalize(params).log_zH - log_sum)


def exact_moments(params: GrbmParams, max_states: int = DEFAULT_MAX_STATES) -> ExactMoments:
    log_sum, m, s = _enumerate(params, max_states, moments=True)
    return ExactMoments(
        m_exact=m,
        s_exact=s,
        nu_exact=params.b + params.w @ m,
        free_energy=float(-marginalize(params).log_zH - log_sum),
        log_z_marginal=float(log_sum),
    )


def _batch_means(samples: np.ndarray, n_batches: int):
    n = samples.shape[0] // n_batches * n_batches
    batches = samples[:n].reshape(n_batches, -1, samples.shape[1]).mean(axis=1)
    return samples.mean(axis=0), batches.std(axis=0, ddof=1) / np.sqrt(n_batches)


def gibbs_estimate(params: GrbmParams, n_sweeps: int, n_burnin: int = 1000, seed=None) -> GibbsEstimate:
    """Block Gibbs sampler alternating ``v | h`` (Gaussian) and ``h | v`` (softmax over the alphabet).

    Standard errors are batch means over 32 batches of the post burn-in chain.
    """
    if n_sweeps < _GIBBS_BATCHES * 2:
        raise ValueError(f"n_sweeps must be at least {2 * _GIBBS_BATCHES}")
    if n_burnin < 0:
        raise ValueError("n_burnin must be nonnegative")
    rng = np.random.default_rng(seed)
    values = params.space.array
    w, b, c = params.w, params.b, params.c
    sd = np.sqrt(params.sigma2)
    ws = w / params.sigma2[:, None]
    nh, nv = params.n_hidden, params.n_visible

    h = values[rng.integers(values.size, size=nh)]
    hs = np.empty((n_sweeps, nh))
    vs = np.empty((n_sweeps, nv))
    block = 4096
    total = n_burnin + n_sweeps
    for start in range(0, total, block):
        size = min(block, total - start)
        noise = rng.standard_normal((size, nv))
        unif = rng.random((size, nh))
        for t in range(size):
            v = b + w @ h + sd * noise[t]
            lam = c + v @ ws
            logits = lam[:, None] * values[None, :]
            p = np.exp(logits - logits.max(axis=1, keepdims=True))
            cdf = np.cumsum(p, axis=1)
            k = (cdf < unif[t, :, None] * cdf[:, -1:]).sum(axis=1)
            h = values[np.minimum(k, values.size - 1)]
            step = start + t - n_burnin
            if step >= 0:
                hs[step] = h
                vs[step] = v
    m_hat, se_m = _batch_means(hs, _GIBBS_BATCHES)
    nu_hat, se_nu = _batch_means(vs, _GIBBS_BATCHES)
    return GibbsEstimate(m_hat=m_hat, nu_hat=nu_hat, std_err_m=se_m, std_err_nu=se_nu, n_sweeps=n_sweeps)
