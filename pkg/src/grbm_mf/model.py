"""GRBM parameterization, layer conditionals and the marginal hidden-layer model.

A GRBM has continuous visible units ``v`` (Gaussian given the hidden layer) and
discrete hidden units ``h`` taking values in a finite alphabet.  The energy is

    E(v, h) = sum_i (v_i - b_i)^2 / (2 s2_i) - sum_ij w_ij v_i h_j / s2_i - sum_j c_j h_j

Integrating out ``v`` leaves a pairwise Boltzmann machine over ``h`` with
fields ``B``, self-quadratic terms ``D`` and couplings ``J`` (see
:func:`marginalize`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _frozen(x, ndim: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampleSpace:
    """Finite alphabet of the hidden units."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(x) for x in self.values)
        if not vals:
            raise ValueError("sample space must be nonempty")
        if not all(np.isfinite(vals)):
            raise ValueError("sample space values must be finite")
        if len(set(vals)) != len(vals):
            raise ValueError(f"sample space values must be distinct: {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def binary(cls) -> SampleSpace:
        return cls((-1.0, 1.0))

    @classmethod
    def ternary(cls) -> SampleSpace:
        return cls((-1.0, 0.0, 1.0))

    @classmethod
    def parse(cls, text: str) -> SampleSpace:
        """Parse ``binary``, ``ternary`` or ``custom:v1,v2,...``."""
        if text == "binary":
            return cls.binary()
        if text == "ternary":
            return cls.ternary()
        if text.startswith("custom:"):
            try:
                vals = [float(tok) for tok in text[len("custom:"):].split(",")]
            except ValueError:
                raise ValueError(f"bad custom sample space: {text!r}") from None
            return cls(tuple(vals))
        raise ValueError(f"unknown sample space {text!r}")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values)

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def lo(self) -> float:
        return min(self.values)

    @property
    def hi(self) -> float:
        return max(self.values)

    def label(self) -> str:
        if self == SampleSpace.binary():
            return "binary"
        if self == SampleSpace.ternary():
            return "ternary"
        return "custom:" + ",".join(repr(x) for x in self.values)


@dataclass(frozen=True, eq=False)
class GrbmParams:
    """Parameters ``(b, c, w, sigma2)`` of a GRBM plus its hidden alphabet.

    ``w`` has shape ``(n_visible, n_hidden)``.  Arrays are stored read-only.
    """

    b: np.ndarray
    c: np.ndarray
    w: np.ndarray
    sigma2: np.ndarray
    space: SampleSpace

    def __post_init__(self):
        b = _frozen(self.b, 1, "b")
        c = _frozen(self.c, 1, "c")
        w = _frozen(self.w, 2, "w")
        sigma2 = _frozen(self.sigma2, 1, "sigma2")
        if w.shape != (b.size, c.size):
            raise ValueError(f"w has shape {w.shape}, expected {(b.size, c.size)}")
        if sigma2.shape != b.shape:
            raise ValueError("sigma2 must have one entry per visible unit")
        if b.size == 0 or c.size == 0:
            raise ValueError("need at least one visible and one hidden unit")
        if np.any(sigma2 <= 0):
            raise ValueError("sigma2 must be strictly positive")
        if not isinstance(self.space, SampleSpace):
            raise TypeError("space must be a SampleSpace")
        for name, arr in zip(("b", "c", "w", "sigma2"), (b, c, w, sigma2)):
            object.__setattr__(self, name, arr)

    @property
    def n_visible(self) -> int:
        return self.b.size

    @property
    def n_hidden(self) -> int:
        return self.c.size

    def replace(self, **changes) -> GrbmParams:
        fields = dict(b=self.b, c=self.c, w=self.w, sigma2=self.sigma2, space=self.space)
        fields.update(changes)
        return GrbmParams(**fields)


@dataclass(frozen=True, eq=False)
class MarginalBm:
    """Hidden-layer Boltzmann machine left after integrating out ``v``.

    ``P(h) = exp(log_zH + B.h + D.h^2 + sum_{j<k} J_jk h_j h_k) / Z``.
    """

    B: np.ndarray
    D: np.ndarray
    J: np.ndarray
    log_zH: float


def _check_hidden(params: GrbmParams, h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (params.n_hidden,):
        raise ValueError(f"h has shape {h.shape}, expected ({params.n_hidden},)")
    if not np.all(np.isin(h, params.space.array)):
        raise ValueError(f"h has entries outside the sample space {params.space.values}")
    return h


def _check_visible(params: GrbmParams, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (params.n_visible,):
        raise ValueError(f"v has shape {v.shape}, expected ({params.n_visible},)")
    if not np.all(np.isfinite(v)):
        raise ValueError("v has non-finite entries")
    return v


def energy(v, h, params: GrbmParams) -> float:
    v = _check_visible(params, v)
    h = _check_hidden(params, h)
    quad = 0.5 * np.sum((v - params.b) ** 2 / params.sigma2)
    pair = (v / params.sigma2) @ params.w @ h
    return float(quad - pair - params.c @ h)


def visible_mean_given_hidden(params: GrbmParams, h) -> np.ndarray:
    """``mu_i(h) = b_i + sum_j w_ij h_j``, the mean of ``v_i`` given ``h``."""
    h = _check_hidden(params, h)
    return params.b + params.w @ h


def hidden_field_given_visible(params: GrbmParams, v) -> np.ndarray:
    """``lambda_j(v) = c_j + sum_i w_ij v_i / s2_i``; ``P(h_j | v)`` is ``exp(lambda_j h_j)``."""
    v = _check_visible(params, v)
    return params.c + (v / params.sigma2) @ params.w


def marginalize(params: GrbmParams) -> MarginalBm:
    ws = params.w / params.sigma2[:, None]
    B = params.c + params.b @ ws
    D = 0.5 * np.sum(params.w * ws, axis=0)
    J = params.w.T @ ws
    J = 0.5 * (J + J.T)
    np.fill_diagonal(J, 0.0)
    log_zH = 0.5 * float(np.sum(np.log(2.0 * np.pi * params.sigma2)))
    for arr in (B, D, J):
        arr.setflags(write=False)
    return MarginalBm(B=B, D=D, J=J, log_zH=log_zH)


def sample_params(
    n_visible: int,
    n_hidden: int,
    sd_b: float,
    sd_c: float,
    sd_w: float,
    sigma2_value: float = 1.0,
    space: SampleSpace | None = None,
    seed=None,
) -> GrbmParams:
    """Draw a random GRBM with independent zero-mean Gaussian biases and couplings.

    Draw order from one PCG64 stream: ``b``, then ``c``, then ``w`` row-major.
    ``seed`` is anything ``np.random.default_rng`` accepts.
    """
    if n_visible < 1 or n_hidden < 1:
        raise ValueError("n_visible and n_hidden must be positive")
    if min(sd_b, sd_c, sd_w) < 0:
        raise ValueError("standard deviations must be nonnegative")
    if not sigma2_value > 0:
        raise ValueError(f"sigma2_value must be positive, got {sigma2_value}")
    space = SampleSpace.binary() if space is None else space
    rng = np.random.default_rng(seed)
    b = sd_b * rng.standard_normal(n_visible)
    c = sd_c * rng.standard_normal(n_hidden)
    w = sd_w * rng.standard_normal((n_visible, n_hidden))
    return GrbmParams(b=b, c=c, w=w, sigma2=np.full(n_visible, float(sigma2_value)), space=space)
