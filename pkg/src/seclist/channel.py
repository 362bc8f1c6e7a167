"""Memoryless channels with finite or continuous output.

A channel is stored through its output *cells*.  For a finite output
alphabet every output symbol is its own cell and the measure is counting
measure.  For a real output the cells are the nodes of a composite
Gauss-Legendre rule, and ``pmf[x, j]`` is the quadrature mass
``w_x(node_j) * weight_j``.  Every integral over the output space is then a
finite sum over cells, which keeps divergences and region curves
deterministic.  Continuous channels also keep their analytic density so
that sampling and likelihoods at arbitrary reals are exact.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

LOG2E = 1.0 / np.log(2.0)

__all__ = [
    "Channel",
    "ChannelError",
    "ProductChannel",
    "RedundantInputWarning",
    "make_channel",
    "make_bsc",
    "make_awgn_bpsk",
    "make_additive_gaussian",
    "product",
    "sample",
    "as_rng",
    "gauss_legendre_grid",
]


class ChannelError(ValueError):
    """Raised for malformed channel parameters or failed normalization."""


class RedundantInputWarning(UserWarning):
    """Some row lies (numerically) in the convex hull of the other rows."""


def as_rng(seed) -> np.random.Generator:
    """Return a Generator; integers and None seed a fresh PCG64 stream."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gauss_legendre_grid(lo: float, hi: float, nodes: int = 2048, order: int = 16):
    """Composite Gauss-Legendre rule on ``[lo, hi]``.

    Returns
    -------
    nodes, weights : ndarray
        ``nodes`` sorted ascending; ``weights`` sum to ``hi - lo``.
    """
    if nodes % order:
        raise ChannelError(f"node count {nodes} is not a multiple of panel order {order}")
    panels = nodes // order
    ref_x, ref_w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
    w = (half[:, None] * ref_w[None, :]).ravel()
    return x, w


@dataclass(frozen=True, eq=False)
class Channel:
    """A channel ``W: X -> Y`` represented on output cells.

    Attributes
    ----------
    name : str
        Human-readable label, echoed into reports.
    pmf : ndarray, shape (d, K)
        Cell probabilities ``W_x(cell_j)``.
    log_pmf : ndarray, shape (d, K)
        Base-2 logarithm of ``pmf`` (``-inf`` on zero cells), computed
        analytically for continuous channels so that far tails do not
        underflow.
    nodes : ndarray, shape (K,)
        Output labels (``0..K-1``) or quadrature nodes.
    weights : ndarray, shape (K,)
        Measure weights; ones for counting measure.
    means, variance
        Constellation points and noise variance of an additive Gaussian
        channel, else ``None``.
    norm_error : float
        Largest deviation of a row sum from one.
    redundant_inputs : tuple of int
        Inputs whose row is within KL 1e-9 of a mixture of the others.
    """

    name: str
    pmf: np.ndarray
    log_pmf: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    means: np.ndarray | None = None
    variance: float | None = None
    norm_error: float = 0.0
    redundant_inputs: tuple = field(default=())

    @property
    def d(self) -> int:
        return self.pmf.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.pmf.shape[1]

    @property
    def continuous(self) -> bool:
        return self.means is not None

    @property
    def density(self) -> np.ndarray:
        """Density of each row with respect to the declared measure, at the nodes."""
        return self.pmf / self.weights[None, :]

    @property
    def edges(self) -> np.ndarray | None:
        """Cell boundaries (midpoints between nodes) for continuous output."""
        if not self.continuous:
            return None
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    def cell_of(self, y) -> np.ndarray:
        """Map outputs to cell indices (identity for finite output)."""
        if not self.continuous:
            return np.asarray(y, dtype=np.int64)
        return np.searchsorted(self.edges, np.asarray(y, dtype=float))

    # likelihoods -------------------------------------------------------
    def log_density(self, x, y) -> np.ndarray:
        """Base-2 log density ``log w_x(y)`` with broadcasting.

        For finite output ``y`` holds symbol indices; for continuous output it
        holds real outputs and the analytic Gaussian density is used.
        """
        x = np.asarray(x, dtype=np.int64)
        if not self.continuous:
            return self.log_pmf[x, np.asarray(y, dtype=np.int64)]
        return self.log_density_signal(self.means[x], y)

    def log_density_signal(self, s, y) -> np.ndarray:
        """Gaussian log2-density of output ``y`` given real transmitted signal ``s``."""
        if not self.continuous:
            raise ChannelError("signal-space likelihoods need an additive Gaussian channel")
        v = self.variance
        diff = np.asarray(y, dtype=float) - np.asarray(s, dtype=float)
        return -(diff ** 2) / (2.0 * v) * LOG2E - 0.5 * np.log2(2.0 * np.pi * v)

    def log_mixture_density(self, P, y) -> np.ndarray:
        """``log w_P(y)`` for input distribution ``P``."""
        P = np.asarray(P, dtype=float)
        support = np.flatnonzero(P > 0)
        y = np.asarray(y)
        terms = np.stack([np.log2(P[x]) + self.log_density(x, y) for x in support])
        return _log2sumexp(terms, axis=0)

    # sampling ----------------------------------------------------------
    def sample(self, x, rng=None) -> np.ndarray:
        """Draw one output per entry of ``x`` (any shape)."""
        rng = as_rng(rng)
        x = np.asarray(x, dtype=np.int64)
        if self.continuous:
            return self.sample_signal(self.means[x], rng)
        cdf = np.cumsum(self.pmf, axis=1)
        cdf[:, -1] = 1.0
        u = rng.random(x.shape)
        return np.argmax(u[..., None] < cdf[x], axis=-1)

    def sample_signal(self, s, rng=None) -> np.ndarray:
        """Outputs for arbitrary real inputs of an additive Gaussian channel."""
        if not self.continuous:
            raise ChannelError("signal-space sampling needs an additive Gaussian channel")
        rng = as_rng(rng)
        s = np.asarray(s, dtype=float)
        return s + np.sqrt(self.variance) * rng.standard_normal(s.shape)


def _log2sumexp(a, axis=None):
    from scipy.special import logsumexp

    return logsumexp(np.asarray(a) / LOG2E, axis=axis) * LOG2E


def _check_rows(pmf: np.ndarray, tol: float) -> float:
    if pmf.ndim != 2 or pmf.shape[0] < 1 or pmf.shape[1] < 1:
        raise ChannelError("channel matrix must be 2-D and non-empty")
    if np.any(~np.isfinite(pmf)) or np.any(pmf < 0):
        raise ChannelError("channel entries must be finite and nonnegative")
    err = float(np.max(np.abs(pmf.sum(axis=1) - 1.0)))
    if err > tol:
        raise ChannelError(f"row sums deviate from 1 by {err:.3g} (tolerance {tol:g})")
    return err


def _finalize(ch: Channel, check_redundancy: bool) -> Channel:
    for arr in (ch.pmf, ch.log_pmf, ch.nodes, ch.weights):
        arr.setflags(write=False)
    if ch.means is not None:
        ch.means.setflags(write=False)
    if not check_redundancy or ch.d < 2:
        return ch
    from .scores import redundant_inputs

    flags = redundant_inputs(ch)
    if flags:
        warnings.warn(
            f"{ch.name}: inputs {flags} are mixtures of the other rows; "
            "score construction will fail for them",
            RedundantInputWarning,
            stacklevel=3,
        )
    return replace(ch, redundant_inputs=flags)


def make_channel(matrix, name: str = "dmc", check_redundancy: bool = True) -> Channel:
    """Finite-output channel from a row-stochastic matrix."""
    pmf = np.array(matrix, dtype=float)
    err = _check_rows(pmf, 1e-9)
    with np.errstate(divide="ignore"):
        log_pmf = np.log2(pmf)
    K = pmf.shape[1]
    ch = Channel(name, pmf, log_pmf, np.arange(K, dtype=float), np.ones(K), norm_error=err)
    return _finalize(ch, check_redundancy)


def make_bsc(crossover: float) -> Channel:
    """Binary symmetric channel with the given flip probability in ``[0, 1/2]``."""
    q = float(crossover)
    if not 0.0 <= q <= 0.5:
        raise ChannelError(f"crossover {q} outside [0, 1/2]")
    return make_channel([[1 - q, q], [q, 1 - q]], name=f"bsc({q:g})")


def make_additive_gaussian(
    means: Sequence[float],
    variance: float,
    nodes: int = 2048,
    sigmas: float = 8.0,
    order: int = 16,
    tol: float = 1e-6,
    name: str | None = None,
    check_redundancy: bool = True,
) -> Channel:
    """Gaussian-noise channel ``Y = mean[x] + N`` with ``N ~ N(0, variance)``.

    The quadrature grid spans ``sigmas`` standard deviations beyond the
    outermost constellation points.
    """
    v = float(variance)
    if not v > 0:
        raise ChannelError("variance must be positive")
    mu = np.array(means, dtype=float)
    s = np.sqrt(v)
    lo, hi = mu.min() - sigmas * s, mu.max() + sigmas * s
    x, w = gauss_legendre_grid(lo, hi, nodes, order)
    log_dens = -((x[None, :] - mu[:, None]) ** 2) / (2 * v) * LOG2E - 0.5 * np.log2(2 * np.pi * v)
    log_pmf = log_dens + np.log2(w)[None, :]
    pmf = np.exp2(log_pmf)
    try:
        err = _check_rows(pmf, tol)
    except ChannelError as exc:
        raise ChannelError(f"quadrature grid too narrow: {exc}") from None
    label = name or f"awgn(v={v:g})"
    ch = Channel(label, pmf, log_pmf, x, w, means=mu, variance=v, norm_error=err)
    return _finalize(ch, check_redundancy)


def make_awgn_bpsk(variance: float, nodes: int = 2048, sigmas: float = 8.0, **kw) -> Channel:
    """BPSK over AWGN: input 0 maps to +1 and input 1 maps to -1."""
    return make_additive_gaussian([1.0, -1.0], variance, nodes=nodes, sigmas=sigmas,
                                  name=f"awgn-bpsk(v={float(variance):g})", **kw)


@dataclass(frozen=True, eq=False)
class ProductChannel:
    """The n-fold memoryless extension of ``base``."""

    base: Channel
    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise ChannelError("blocklength must be >= 1")

    def _check(self, arr):
        arr = np.asarray(arr)
        if arr.shape[-1] != self.n:
            raise ChannelError(f"expected trailing length {self.n}, got {arr.shape[-1]}")
        return arr

    def log_density(self, xn, yn) -> np.ndarray:
        """``log w_{x^n}(y^n)`` as a sum of per-letter log densities."""
        xn, yn = self._check(xn), self._check(yn)
        return np.sum(self.base.log_density(xn, yn), axis=-1)

    def sample(self, xn, rng=None) -> np.ndarray:
        return self.base.sample(self._check(xn), rng)

    def output_matrix(self, xs) -> np.ndarray:
        """Probabilities ``W^n_{x^n}(y^n)`` for every ``y^n`` (finite output only).

        Rows follow ``xs``; columns enumerate ``y^n`` in lexicographic order
        with the first letter most significant.
        """
        xs = np.atleast_2d(self._check(xs)).astype(np.int64)
        out = np.ones((xs.shape[0], 1))
        pmf = self.base.pmf
        for i in range(self.n):
            out = (out[:, :, None] * pmf[xs[:, i]][:, None, :]).reshape(xs.shape[0], -1)
        return out

    def all_outputs(self) -> np.ndarray:
        K = self.base.n_outputs
        idx = np.arange(K ** self.n)
        return np.stack(np.unravel_index(idx, (K,) * self.n), axis=1)


def product(ch: Channel, n: int) -> ProductChannel:
    """n-fold memoryless extension of ``ch``."""
    return ProductChannel(ch, int(n))


def sample(ch: Union[Channel, ProductChannel], x, seed=None, size: int | None = None):
    """Sample outputs for input ``x``; ``size`` prepends independent repetitions."""
    rng = as_rng(seed)
    x = np.asarray(x, dtype=np.int64)
    if size is not None:
        x = np.broadcast_to(x, (int(size),) + x.shape)
    return ch.sample(x, rng)
