"""Entropies, divergences and Renyi-type information quantities (bits).

Conventions: logarithms are base 2 and ``0 log 0 = 0``.  Distributions on a
continuous output are passed as cell masses on the channel's quadrature
grid; every quantity below is homogeneous in the cell weights, so cell
masses give the same value as densities integrated with the rule.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .channel import LOG2E, Channel, as_rng, product

__all__ = [
    "as_distribution",
    "entropy",
    "binary_entropy",
    "kl_divergence",
    "renyi_divergence",
    "cond_entropy_xy",
    "mutual_info",
    "sibson_info",
    "sibson_objective",
    "sibson_info_direct",
    "q_alpha_reference",
    "cond_entropy_my",
    "mutual_info_joint",
    "cond_renyi_entropy_my",
    "Equivocation",
    "equivocation",
    "code_joint",
]


def _lse2(a, axis=None):
    """log2 of a sum of powers of two."""
    return logsumexp(np.asarray(a, dtype=float) / LOG2E, axis=axis) * LOG2E


def as_distribution(P, d: int | None = None, tol: float = 1e-12) -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(P, dtype=float)
    if p.ndim != 1 or (d is not None and p.size != d):
        raise ValueError(f"expected a probability vector of length {d}, got shape {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > tol:
        raise ValueError("entries must be nonnegative and sum to 1")
    return p


def entropy(P) -> float:
    p = np.asarray(P, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(q: float) -> float:
    return entropy([q, 1.0 - q])


def kl_divergence(P, Q, weights=None) -> float:
    """``D(P||Q)``; ``+inf`` when ``P`` is not absolutely continuous w.r.t. ``Q``.

    ``P`` and ``Q`` are densities on common points; ``weights`` is the
    measure of each point (counting measure when omitted).
    """
    p = np.asarray(P, dtype=float)
    q = np.asarray(Q, dtype=float)
    w = np.ones_like(p) if weights is None else np.asarray(weights, dtype=float)
    on = p > 0
    if np.any(q[on] <= 0):
        return np.inf
    return float(np.sum(w[on] * p[on] * (np.log2(p[on]) - np.log2(q[on]))))


def renyi_divergence(P, Q, alpha: float, weights=None) -> float:
    """Renyi divergence ``(1/(alpha-1)) log sum p^alpha q^(1-alpha)``."""
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("order must be positive")
    if alpha == 1.0:
        return kl_divergence(P, Q, weights)
    p = np.asarray(P, dtype=float)
    q = np.asarray(Q, dtype=float)
    w = np.ones_like(p) if weights is None else np.asarray(weights, dtype=float)
    if alpha > 1:
        on = p > 0
        if np.any(q[on] <= 0):
            return np.inf
    else:
        on = (p > 0) & (q > 0)
        if not np.any(on):
            return np.inf
    terms = np.log2(w[on]) + alpha * np.log2(p[on]) + (1 - alpha) * np.log2(q[on])
    return float(_lse2(terms) / (alpha - 1))


def _log_joint(ch: Channel, P):
    P = as_distribution(P, ch.d)
    with np.errstate(divide="ignore"):
        logP = np.log2(P)
    return logP[:, None] + ch.log_pmf


def cond_entropy_xy(ch: Channel, P) -> float:
    """``H(X|Y)`` for input ``P`` and channel ``ch``."""
    lj = _log_joint(ch, P)
    finite = np.isfinite(lj)
    ly = _lse2(np.where(finite, lj, -np.inf), axis=0)
    with np.errstate(invalid="ignore"):
        val = np.where(finite, np.exp2(lj) * (ly[None, :] - lj), 0.0)
    return float(max(val.sum(), 0.0))


def mutual_info(ch: Channel, P) -> float:
    """``I(X;Y) = sum_x P(x) D(W_x || W_P)``."""
    P = as_distribution(P, ch.d)
    lj = _log_joint(ch, P)
    lwp = _lse2(np.where(np.isfinite(lj), lj, -np.inf), axis=0)
    total = 0.0
    for x in np.flatnonzero(P > 0):
        on = np.isfinite(ch.log_pmf[x])
        total += P[x] * np.sum(ch.pmf[x, on] * (ch.log_pmf[x, on] - lwp[on]))
    return float(max(total, 0.0))


def sibson_info(ch: Channel, P, alpha: float) -> float:
    """Sibson information via ``(a/(a-1)) log int (sum_x P w_x^a)^(1/a)``."""
    alpha = float(alpha)
    if alpha == 1.0:
        return mutual_info(ch, P)
    P = as_distribution(P, ch.d)
    with np.errstate(divide="ignore"):
        terms = np.log2(P)[:, None] + alpha * ch.log_pmf
    inner = _lse2(np.where(np.isfinite(terms), terms, -np.inf), axis=0) / alpha
    inner = inner[np.isfinite(inner)]
    return float(alpha / (alpha - 1) * _lse2(inner))


def q_alpha_reference(ch: Channel, P, alpha: float) -> np.ndarray:
    """Minimizing output distribution ``q ∝ (sum_x P(x) w_x^a)^(1/a)`` as cell masses."""
    P = as_distribution(P, ch.d)
    with np.errstate(divide="ignore"):
        terms = np.log2(P)[:, None] + alpha * ch.log_pmf
    inner = _lse2(np.where(np.isfinite(terms), terms, -np.inf), axis=0) / alpha
    q = np.exp2(inner - _lse2(inner[np.isfinite(inner)]))
    return np.where(np.isfinite(inner), q, 0.0)


def sibson_objective(ch: Channel, P, alpha: float, q) -> float:
    """``D_a(W x P || Q x P) = (1/(a-1)) log sum_x P(x) sum_y w_x^a q^(1-a)``."""
    P = as_distribution(P, ch.d)
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        lq = np.log2(q)
        terms = np.log2(P)[:, None] + alpha * ch.log_pmf + (1 - alpha) * lq[None, :]
    active = (P[:, None] > 0) & (ch.pmf > 0)
    if alpha > 1 and np.any(active & (q[None, :] <= 0)):
        return np.inf
    return float(_lse2(terms[active]) / (alpha - 1))


def sibson_info_direct(ch: Channel, P, alpha: float, restarts: int = 3, seed: int = 0) -> float:
    """Sibson information by numerically minimizing the Renyi objective over ``q``.

    Independent of the closed form: ``q`` is parametrized by softmax logits
    and minimized with L-BFGS from several starts.
    """
    P = as_distribution(P, ch.d)
    on = np.flatnonzero((P[:, None] * ch.pmf).sum(axis=0) > 0)
    with np.errstate(divide="ignore"):
        A = np.log2(P)[:, None] + alpha * ch.log_pmf[:, on]  # (d, K_on)
    A = np.where(np.isfinite(A), A, -np.inf)
    c = _lse2(A, axis=0)  # log2 sum_x P w^a, per cell
    k = on.size

    def fun(z):
        lq = (z - logsumexp(z)) * LOG2E
        t = c + (1 - alpha) * lq
        f = _lse2(t)
        r = np.exp2(t - f)  # normalized contributions
        # d f / d z_j in bits: (1-alpha) * (r_j - q_j)
        q = np.exp2(lq)
        grad = (1 - alpha) * (r - q)
        return f / (alpha - 1), grad / (alpha - 1)

    rng = as_rng(seed)
    best = np.inf
    for s in range(restarts):
        z0 = np.zeros(k) if s == 0 else rng.normal(size=k)
        res = minimize(fun, z0, jac=True, method="L-BFGS-B",
                       options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 5000})
        best = min(best, float(res.fun))
    return best


def cond_entropy_my(joint) -> float:
    """``H(M|Y)`` of a joint pmf stored as a matrix ``p[m, y]``."""
    J = np.asarray(joint, dtype=float)
    py = J.sum(axis=0)
    on = J > 0
    pyb = np.broadcast_to(py[None, :], J.shape)
    return float(max(np.sum(J[on] * (np.log2(pyb[on]) - np.log2(J[on]))), 0.0))


def mutual_info_joint(joint) -> float:
    """``I(M;Y) = D(P_MY || P_M x P_Y)`` of a joint pmf matrix."""
    J = np.asarray(joint, dtype=float)
    pm = J.sum(axis=1)
    py = J.sum(axis=0)
    on = J > 0
    prod = np.outer(pm, py)
    return float(max(np.sum(J[on] * (np.log2(J[on]) - np.log2(prod[on]))), 0.0))


def cond_renyi_entropy_my(joint, alpha: float) -> float:
    """Conditional Renyi entropy ``(a/(1-a)) log sum_y (sum_m p(m,y)^a)^(1/a)``.

    This is the maximum over output distributions ``Q`` of
    ``-D_a(P_MY || I_M x Q)``, attained at ``q ∝ (sum_m p(m,y)^a)^(1/a)``.
    """
    alpha = float(alpha)
    if alpha == 1.0:
        return cond_entropy_my(joint)
    J = np.asarray(joint, dtype=float)
    with np.errstate(divide="ignore"):
        L = np.log2(J)
    inner = _lse2(L * alpha, axis=0) / alpha
    inner = inner[np.isfinite(inner)]
    return float(alpha / (1 - alpha) * _lse2(inner))


# --- code-level equivocation -----------------------------------------------

def code_joint(ch: Channel, codewords) -> np.ndarray:
    """Joint pmf ``p(m, y^n) = W^n(y^n | phi(m)) / M`` for uniform messages."""
    cw = np.atleast_2d(np.asarray(codewords, dtype=np.int64))
    W = product(ch, cw.shape[1]).output_matrix(cw)
    return W / cw.shape[0]


@dataclass(frozen=True)
class Equivocation:
    """Equivocation ``E = H(M|Y^n)`` and its Renyi version ``E_alpha``.

    In ``monte-carlo`` mode the intervals are jackknife 95% intervals.
    """

    E: float
    E_alpha: float
    alpha: float
    mode: str
    ci_E: tuple | None = None
    ci_E_alpha: tuple | None = None


def equivocation(ch: Channel, codewords, alpha: float = 2.0, budget: int = 2 ** 22,
                 samples: int = 20000, seed=0) -> Equivocation:
    """Equivocation of a deterministic code with uniformly distributed messages.

    Exact when ``M * |Y|^n`` fits into ``budget`` (finite output only);
    otherwise a Monte-Carlo estimate with jackknife intervals.
    """
    cw = np.atleast_2d(np.asarray(codewords, dtype=np.int64))
    M, n = cw.shape
    if not ch.continuous and M * ch.n_outputs ** n <= budget:
        J = code_joint(ch, cw)
        return Equivocation(cond_entropy_my(J), cond_renyi_entropy_my(J, alpha), alpha, "exact")

    rng = as_rng(seed)
    pc = product(ch, n)
    msgs = rng.integers(M, size=samples)
    y = pc.sample(cw[msgs], rng)
    # log-likelihood of every codeword for every sample
    ll = np.stack([pc.log_density(np.broadcast_to(cw[m], y.shape), y) for m in range(M)], axis=1)
    lpost = ll - _lse2(ll, axis=1)[:, None]
    h = -lpost[np.arange(samples), msgs]
    norms = np.exp2(_lse2(alpha * lpost, axis=1) / alpha)

    def f_alpha(mean_norm):
        return alpha / (1 - alpha) * np.log2(mean_norm)

    E = float(h.mean())
    se_E = float(h.std(ddof=1) / np.sqrt(samples))
    tot = norms.sum()
    loo = f_alpha((tot - norms) / (samples - 1))
    full = f_alpha(norms.mean())
    Ea = float(samples * full - (samples - 1) * loo.mean())
    se_Ea = float(np.sqrt((samples - 1) / samples * np.sum((loo - loo.mean()) ** 2)))
    return Equivocation(E, Ea, alpha, "monte-carlo",
                        (E - 1.96 * se_E, E + 1.96 * se_E),
                        (Ea - 1.96 * se_Ea, Ea + 1.96 * se_Ea))
