"""Secure list codes: codebooks, the threshold list decoder and its security.

Decoder: message ``m`` is accepted on output ``y^n`` when

* ``w_{phi(m)}(y^n) >= M' * w_{P^n}(y^n)`` (likelihood test against the
  reference input distribution ``P``), and
* ``xi_{phi(m)}(y^n) >= -n * eps1`` (binding test with the score family).

At most ``L`` accepted messages are returned: the ones with the largest
likelihood, ties broken towards the smaller index.

Security figures of a code:

``eps_A``
    probability that the sent message is missing from the list;
``delta_C``
    largest probability that another codeword's message enters the list
    when an honest sender transmits;
``delta_D``
    largest, over arbitrary channel inputs, second-largest acceptance
    probability (a cheating sender hoping to open two messages);
``E``, ``E_alpha``
    equivocation of the message given the output.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.stats import binomtest

from . import info
from .channel import Channel, as_rng, product
from .scores import ContinuousScoreCert, ScoreFamily, build_scores_discrete

__all__ = [
    "BudgetExceeded",
    "Codebook",
    "DecoderParams",
    "SecureListCode",
    "SecurityReport",
    "AdversaryResult",
    "ExactTables",
    "random_codebook",
    "hamming_distances",
    "min_distance",
    "expurgate",
    "auto_decoder_params",
    "make_code",
    "decision_tables",
    "decode_batch",
    "decode",
    "exact_tables",
    "acceptance_exact",
    "union_bound_terms",
    "evaluate_security",
    "binding_bound_discrete",
    "binding_bound_continuous",
    "adversary_search",
    "clopper_pearson",
]


class BudgetExceeded(RuntimeError):
    """Exact enumeration would exceed the configured budget."""


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple:
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


# --- codebooks -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Codebook:
    """Deterministic encoder table ``phi``: row ``m`` is the codeword of message ``m``.

    ``labels`` keep the original message numbers after expurgation;
    ``eps2`` records the distance parameter the book was expurgated with.
    """

    codewords: np.ndarray
    P: np.ndarray | None = None
    seed: int | None = None
    labels: np.ndarray | None = None
    eps2: float | None = None
    retention: float = 1.0

    def __post_init__(self):
        cw = np.atleast_2d(np.asarray(self.codewords, dtype=np.int64))
        if cw.shape[0] < 2:
            raise ValueError("a codebook needs at least two messages")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)
        if self.labels is None:
            object.__setattr__(self, "labels", np.arange(cw.shape[0]))

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]


def random_codebook(ch: Channel, P, n: int, M: int, seed=None) -> Codebook:
    """``M`` codewords with i.i.d. letters drawn from ``P``."""
    P = info.as_distribution(P, ch.d)
    if M < 2:
        raise ValueError("M must be at least 2")
    rng = as_rng(seed)
    cw = rng.choice(ch.d, size=(int(M), int(n)), p=P)
    return Codebook(cw, P=P, seed=seed if isinstance(seed, (int, np.integer)) else None)


def hamming_distances(cw) -> np.ndarray:
    cw = np.asarray(cw)
    return (cw[:, None, :] != cw[None, :, :]).sum(axis=-1)


def min_distance(cb: Codebook) -> int:
    D = hamming_distances(cb.codewords)
    return int(D[~np.eye(cb.M, dtype=bool)].min())


def expurgate(cb: Codebook, eps2: float) -> Codebook:
    """Greedy pruning to pairwise Hamming distance ``> n * eps2``.

    Messages are visited in order; a message is kept when it is far from
    every message kept so far.
    """
    if not 0 < eps2 < 1:
        raise ValueError("eps2 must lie in (0, 1)")
    D = hamming_distances(cb.codewords)
    thr = cb.n * eps2
    kept = []
    for m in range(cb.M):
        if all(D[m, j] > thr for j in kept):
            kept.append(m)
    if len(kept) < 2:
        raise ValueError(f"only {len(kept)} codeword(s) survive expurgation at eps2={eps2}")
    kept = np.array(kept)
    return Codebook(cb.codewords[kept], P=cb.P, seed=cb.seed, labels=cb.labels[kept],
                    eps2=float(eps2), retention=len(kept) / cb.M)


# --- decoder parameters --------------------------------------------------------

@dataclass(frozen=True)
class DecoderParams:
    """List size, likelihood threshold ``M' = 2^{log_threshold}``, score slack.

    ``R4`` and ``eps2`` are recorded when auto-derived.
    """

    L: int
    log_threshold: float
    eps1: float
    P: tuple
    R4: float | None = None
    eps2: float | None = None

    @property
    def M_prime(self) -> float:
        return float(2.0 ** self.log_threshold)


@dataclass(frozen=True, eq=False)
class SecureListCode:
    channel: Channel
    codebook: Codebook
    params: DecoderParams
    scores: ScoreFamily

    def __post_init__(self):
        if not 1 <= self.params.L < self.codebook.M:
            raise ValueError(f"list size must satisfy 1 <= L < M (L={self.params.L}, "
                             f"M={self.codebook.M})")
        if not self.params.eps1 > 0:
            raise ValueError("eps1 must be positive")

    @property
    def M(self) -> int:
        return self.codebook.M

    @property
    def n(self) -> int:
        return self.codebook.n


def _auto_eps2(P, R1: float) -> float:
    """Largest ``eps2`` with ``-L[G_{P,P}](1 - eps2) > R1``."""
    from .region import legendre_transform

    def gap(e):
        return -legendre_transform(P, P, 1.0 - e) - R1

    lo, hi = 1e-9, 0.5
    if gap(lo) <= 0:
        raise ValueError(f"message rate {R1:.4g} is not below H(P); no valid eps2")
    if gap(hi) > 0:
        return hi
    return float(brentq(gap, lo, hi, xtol=1e-10)) * (1 - 1e-9)


def auto_decoder_params(ch: Channel, cb: Codebook, L: int, sf: ScoreFamily, P=None,
                        R4=None, eps1=None, eps2=None) -> DecoderParams:
    """Fill in unspecified decoder parameters.

    ``R4`` defaults to the midpoint of ``(R1 - R2, I(X;Y)_P)``; ``eps2`` to
    the book's expurgation parameter or else the largest value with
    ``-L[G_{P,P}](1 - eps2) > R1``; ``eps1`` to ``zeta1 * eps2 / 4``.
    """
    if P is None:
        P = cb.P if cb.P is not None else np.full(ch.d, 1.0 / ch.d)
    P = info.as_distribution(P, ch.d)
    n = cb.n
    R1 = np.log2(cb.M) / n
    R2 = np.log2(L) / n
    if R4 is None:
        I = info.mutual_info(ch, P)
        if not R1 - R2 < I:
            raise ValueError(f"R1 - R2 = {R1 - R2:.4g} is not below I(X;Y)_P = {I:.4g}")
        R4 = 0.5 * (R1 - R2 + I)
    if eps2 is None:
        eps2 = cb.eps2 if cb.eps2 is not None else _auto_eps2(P, R1)
    if eps1 is None:
        eps1 = sf.zeta1 * eps2 / 4.0
    return DecoderParams(int(L), float(n * R4), float(eps1), tuple(float(p) for p in P),
                         float(R4), float(eps2))


def make_code(ch: Channel, cb: Codebook, L: int, sf: ScoreFamily | None = None, **kw) -> SecureListCode:
    """Bundle a code; missing decoder parameters are auto-derived."""
    sf = build_scores_discrete(ch) if sf is None else sf
    return SecureListCode(ch, cb, auto_decoder_params(ch, cb, L, sf, **kw), sf)


# --- decoding ------------------------------------------------------------------

def decision_tables(code: SecureListCode, Y):
    """Per-output statistics of every codeword.

    Returns ``loglik (N, M)``, ``logwP (N,)``, ``score (N, M)`` and the
    acceptance mask before list truncation.
    """
    ch, cw, dp = code.channel, code.codebook.codewords, code.params
    Y = np.atleast_2d(np.asarray(Y))
    if Y.shape[1] != code.n:
        raise ValueError(f"output length {Y.shape[1]} does not match n={code.n}")
    N, M = Y.shape[0], cw.shape[0]
    loglik = np.zeros((N, M))
    score = np.zeros((N, M))
    logwP = np.zeros(N)
    P = np.asarray(dp.P)
    for i in range(code.n):
        yi = Y[:, i][:, None]
        loglik += ch.log_density(cw[:, i][None, :], yi)
        score += code.scores.values(cw[:, i][None, :], yi)
        logwP += ch.log_mixture_density(P, Y[:, i])
    accept = (loglik - logwP[:, None] >= dp.log_threshold - 1e-12) & \
             (score >= -code.n * dp.eps1 - 1e-12)
    return loglik, logwP, score, accept


def _truncate(accept: np.ndarray, loglik: np.ndarray, L: int) -> np.ndarray:
    over = accept.sum(axis=1) > L
    if not over.any():
        return accept
    inlist = accept.copy()
    key = np.where(accept[over], loglik[over], -np.inf)
    order = np.argsort(-key, axis=1, kind="stable")  # stable: ties keep index order
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(key.shape[1])[None, :].repeat(key.shape[0], 0), 1)
    inlist[over] = accept[over] & (rank < L)
    return inlist


def decode_batch(code: SecureListCode, Y) -> np.ndarray:
    """Boolean list-membership matrix ``(N, M)`` for a batch of outputs."""
    loglik, _, _, accept = decision_tables(code, Y)
    return _truncate(accept, loglik, code.params.L)


def decode(code: SecureListCode, y) -> list:
    """Decoded list (message indices, likelihood-descending) for one output."""
    loglik, _, _, accept = decision_tables(code, np.asarray(y)[None, :])
    inlist = _truncate(accept, loglik, code.params.L)[0]
    idx = np.flatnonzero(inlist)
    return [int(m) for m in idx[np.argsort(-loglik[0, idx], kind="stable")]]


# --- exact evaluation ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExactTables:
    outputs: np.ndarray          # (Ny, n)
    codeword_probs: np.ndarray   # (M, Ny)
    accept: np.ndarray           # (Ny, M)
    inlist: np.ndarray           # (Ny, M)
    loglik: np.ndarray           # (Ny, M)


def _exact_feasible(code: SecureListCode, budget: int) -> bool:
    ch = code.channel
    return (not ch.continuous) and ch.n_outputs ** code.n * code.M <= budget


def exact_tables(code: SecureListCode, budget: int = 2 ** 22) -> ExactTables:
    """Decoder outcome for every output sequence (finite output only)."""
    if not _exact_feasible(code, budget):
        raise BudgetExceeded(f"exact enumeration of {code.channel.n_outputs}^{code.n} outputs "
                             f"x {code.M} messages exceeds budget {budget}")
    pc = product(code.channel, code.n)
    Y = pc.all_outputs()
    loglik, _, _, accept = decision_tables(code, Y)
    inlist = _truncate(accept, loglik, code.params.L)
    W = pc.output_matrix(code.codebook.codewords)
    return ExactTables(Y, W, accept, inlist, loglik)


def _all_inputs(d: int, n: int) -> np.ndarray:
    idx = np.arange(d ** n)
    return np.stack(np.unravel_index(idx, (d,) * n), axis=1)


def acceptance_exact(code: SecureListCode, xs, tab: ExactTables | None = None,
                     chunk: int = 4096) -> np.ndarray:
    """``Pr[m in list | X^n = x^n]`` for each row of ``xs``; shape ``(len(xs), M)``."""
    tab = exact_tables(code) if tab is None else tab
    pc = product(code.channel, code.n)
    xs = np.atleast_2d(np.asarray(xs, dtype=np.int64))
    out = np.empty((xs.shape[0], code.M))
    lst = tab.inlist.astype(float)
    for s in range(0, xs.shape[0], chunk):
        out[s:s + chunk] = pc.output_matrix(xs[s:s + chunk]) @ lst
    return out


def _second_largest(A: np.ndarray) -> np.ndarray:
    return np.sort(A, axis=-1)[..., -2]


def union_bound_terms(code: SecureListCode, tab: ExactTables | None = None) -> np.ndarray:
    """Per-message union bound on the list-decoding error.

    ``W_m(D_m^c) + (1/L) sum_{j != m} W_m(D_j)`` with ``D_j`` the acceptance
    region before truncation.
    """
    tab = exact_tables(code) if tab is None else tab
    A = tab.codeword_probs @ tab.accept.astype(float)
    own = np.diag(A)
    return (1.0 - own) + (A.sum(axis=1) - own) / code.params.L


# --- bounds --------------------------------------------------------------------

def binding_bound_discrete(sf: ScoreFamily, eps1: float, eps2: float, n: int) -> float:
    """Chebyshev bound ``zeta2 / (n [zeta1 eps2 / 2 - eps1]_+^2)`` on ``delta_D``.

    Returns ``inf`` when the margin is not positive.
    """
    margin = sf.zeta1 * eps2 / 2.0 - eps1
    if margin <= 0:
        return np.inf
    return float(sf.zeta2 / (n * margin ** 2))


def binding_bound_continuous(cert: ContinuousScoreCert, eps1: float, eps2: float, n: int,
                             t: float) -> float:
    """Bound on the continuous-input binding parameter.

    ``2^{t n (2 eps1 - (eps2/4) zetabar1_t(zeta3 eps2 / 4))} + n zetabar2 / [n eps1]_+^2``.
    Values above 1 are vacuous.
    """
    if not 0 < t < 0.5:
        raise ValueError("t must lie in (0, 1/2)")
    zb = cert.zetabar1(t, cert.zeta3 * eps2 / 4.0)
    expo = t * n * (2 * eps1 - eps2 / 4.0 * zb)
    second = np.inf if eps1 <= 0 else n * cert.zetabar2 / (n * eps1) ** 2
    return float(2.0 ** expo + second)


# --- adversaries ---------------------------------------------------------------

@dataclass(frozen=True)
class AdversaryResult:
    """Best input found and its second-largest acceptance probability.

    For Monte-Carlo evaluations ``value`` is the point estimate and
    ``lower`` a Clopper-Pearson lower confidence limit on the true value at
    ``x``; for exact evaluations both coincide.
    """

    x: np.ndarray
    value: float
    lower: float
    strategy: str
    exact: bool
    evaluations: int


def _mc_acceptance(code: SecureListCode, signal, noise_or_rng, samples: int):
    """Monte-Carlo membership frequencies for one input.

    ``signal`` is a symbol sequence (finite output) or a real vector for an
    additive Gaussian channel.
    """
    ch = code.channel
    if ch.continuous:
        Z = noise_or_rng
        Y = np.asarray(signal, dtype=float)[None, :] + np.sqrt(ch.variance) * Z
    else:
        rng = noise_or_rng
        Y = ch.sample(np.broadcast_to(np.asarray(signal), (samples, code.n)), rng)
    hits = np.zeros(code.M, dtype=np.int64)
    for s in range(0, Y.shape[0], 8192):
        hits += decode_batch(code, Y[s:s + 8192]).sum(axis=0)
    return hits


def _lower_second(hits: np.ndarray, N: int) -> float:
    top = np.argsort(hits)[-2:]
    return min(clopper_pearson(hits[j], N)[0] for j in top)


def adversary_search(code: SecureListCode, strategy: str = "exhaustive", budget: int = 2 ** 16,
                     samples: int = 4000, seed=0, restarts: int = 4, grid=None,
                     exact_budget: int = 2 ** 22) -> AdversaryResult:
    """Search channel inputs maximizing the second-largest acceptance probability.

    Strategies: ``exhaustive`` (all ``d^n`` inputs, exact), ``coordinate-greedy``
    (single-letter improvements from every codeword) and ``random-restart``
    (greedy from random starts as well).  Finite outputs are evaluated
    exactly when the enumeration fits ``exact_budget``.  For additive
    Gaussian channels the inputs are real vectors searched over ``grid``
    (default: constellation points and offsets) with common random numbers;
    the returned ``lower`` is a certified lower confidence limit.
    """
    ch = code.channel
    d, n = ch.d, code.n
    rng = as_rng(seed)
    exact = _exact_feasible(code, exact_budget)
    tab = exact_tables(code, exact_budget) if exact else None

    if strategy == "exhaustive":
        if ch.continuous:
            raise ValueError("exhaustive search needs a finite input alphabet")
        if d ** n > budget:
            raise BudgetExceeded(f"{d}^{n} adversarial inputs exceed budget {budget}")
        xs = _all_inputs(d, n)
        if exact:
            sec = _second_largest(acceptance_exact(code, xs, tab))
            k = int(np.argmax(sec))
            return AdversaryResult(xs[k], float(sec[k]), float(sec[k]), strategy, True, len(xs))
        best = (None, -1.0, -1.0)
        for x in xs:
            hits = _mc_acceptance(code, x, rng, samples)
            v = float(np.sort(hits)[-2] / samples)
            if v > best[1]:
                best = (x, v, _lower_second(hits, samples))
        return AdversaryResult(best[0], best[1], best[2], strategy, False, len(xs))

    if strategy not in ("coordinate-greedy", "random-restart"):
        raise ValueError(f"unknown strategy {strategy!r}")

    cw = code.codebook.codewords
    if ch.continuous:
        mu = np.asarray(ch.means, dtype=float)
        levels = np.unique(np.concatenate([mu, np.linspace(mu.min() - 1, mu.max() + 1, 9)])) \
            if grid is None else np.asarray(grid, dtype=float)
        starts = [mu[c] for c in cw]
        starts += [0.5 * (mu[cw[i]] + mu[cw[j]]) for i in range(min(len(cw), 4))
                   for j in range(i + 1, min(len(cw), 4))]
        if strategy == "random-restart":
            starts += [rng.choice(levels, size=n) for _ in range(restarts)]
        Z = rng.standard_normal((samples, n))

        def objective(x):
            return float(np.sort(_mc_acceptance(code, x, Z, samples))[-2] / samples)
    else:
        levels = np.arange(d)
        starts = [c.copy() for c in cw]
        if strategy == "random-restart":
            starts += [rng.integers(d, size=n) for _ in range(restarts)]
        if exact:
            def objective(x):
                return float(_second_largest(acceptance_exact(code, x[None, :], tab))[0])
        else:
            sub_seed = int(rng.integers(2 ** 63))

            def objective(x):
                hits = _mc_acceptance(code, x, as_rng(sub_seed), samples)
                return float(np.sort(hits)[-2] / samples)

    evals = 0
    best_x, best_v = None, -1.0
    for x0 in starts:
        x = np.array(x0, dtype=float if ch.continuous else np.int64)
        v = objective(x)
        evals += 1
        improved = True
        while improved:
            improved = False
            for i in range(n):
                for a in levels:
                    if x[i] == a:
                        continue
                    cand = x.copy()
                    cand[i] = a
                    cv = objective(cand)
                    evals += 1
                    if cv > v + 1e-15:
                        x, v, improved = cand, cv, True
        if v > best_v:
            best_x, best_v = x, v

    if exact:
        return AdversaryResult(best_x, best_v, best_v, strategy, True, evals)
    # fresh samples for an unbiased estimate and a certified lower limit
    fresh = as_rng(int(rng.integers(2 ** 63)))
    noise = fresh.standard_normal((samples, n)) if ch.continuous else fresh
    hits = _mc_acceptance(code, best_x, noise, samples)
    return AdversaryResult(best_x, float(np.sort(hits)[-2] / samples), _lower_second(hits, samples),
                           strategy, False, evals)


# --- full report -----------------------------------------------------------------

@dataclass(frozen=True)
class SecurityReport:
    """Security figures of a code.

    ``mode`` is ``exact`` or ``monte-carlo``; ``delta_D_mode`` is ``exact`` or
    ``lower-bound``.  ``ci`` holds Clopper-Pearson (or jackknife, for the
    equivocations) 95% intervals of estimated quantities.
    """

    mode: str
    eps_A_max: float
    eps_A_avg: float
    eps_A: tuple
    delta_C: float
    delta_D: float | None
    delta_D_mode: str
    delta_D_input: tuple | None
    E: float
    E_alpha: float
    alpha: float
    equivocation_mode: str
    binding_bound: float | None
    binding_bound_gaussian: float | None = None
    delta_Dprime: tuple | None = None
    ci: dict = field(default_factory=dict)
    downgraded: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, np.ndarray):
                out[k] = v.tolist()
        return out


def evaluate_security(code: SecureListCode, budget: int = 2 ** 22, mc_samples: int = 100_000,
                      seed=0, alpha: float = 2.0, adversary: str = "auto",
                      adversary_budget: int = 2 ** 16, cert: ContinuousScoreCert | None = None,
                      t: float = 0.25, adversary_samples: int | None = None) -> SecurityReport:
    """Evaluate all security figures, exactly when the budget allows.

    Exact mode enumerates every output sequence and, for ``delta_D``, every
    channel input.  Otherwise Monte-Carlo estimates with Clopper-Pearson
    intervals are returned and ``downgraded`` is set.
    """
    ch, cb, dp = code.channel, code.codebook, code.params
    rng = as_rng(seed)
    ci: dict = {}
    eps2 = dp.eps2 if dp.eps2 is not None else (cb.eps2 if cb.eps2 is not None
                                                   else min_distance(cb) / cb.n)
    bound = None if ch.continuous else binding_bound_discrete(code.scores, dp.eps1, eps2, cb.n)
    bound_b = None
    if cert is not None:
        bound_b = binding_bound_continuous(cert, dp.eps1, eps2, cb.n, t)

    if _exact_feasible(code, budget):
        tab = exact_tables(code, budget)
        acc = tab.codeword_probs @ tab.inlist.astype(float)
        eps = 1.0 - np.diag(acc)
        off = acc.copy()
        np.fill_diagonal(off, -np.inf)
        delta_C = float(off.max())
        mode = "exact"
    else:
        mode = "monte-carlo"
        eps = np.empty(cb.M)
        deltas = np.empty(cb.M)
        for m in range(cb.M):
            hits = _mc_acceptance(code, cb.codewords[m] if not ch.continuous
                                  else ch.means[cb.codewords[m]],
                                  rng if not ch.continuous
                                  else rng.standard_normal((mc_samples, cb.n)), mc_samples)
            eps[m] = 1.0 - hits[m] / mc_samples
            others = np.delete(hits, m)
            deltas[m] = others.max() / mc_samples
            lo, hi = clopper_pearson(mc_samples - hits[m], mc_samples)
            ci[f"eps_A[{m}]"] = (lo, hi)
        delta_C = float(deltas.max())
        mworst = int(np.argmax(eps))
        ci["eps_A_max"] = ci[f"eps_A[{mworst}]"]
        ci["delta_C"] = clopper_pearson(round(delta_C * mc_samples), mc_samples)
        k_avg = int(round((1 - eps).sum() * mc_samples))
        lo, hi = clopper_pearson(k_avg, cb.M * mc_samples)
        ci["eps_A_avg"] = (1 - hi, 1 - lo)

    # binding against arbitrary inputs
    delta_D, d_mode, d_x, dprime = None, "lower-bound", None, None
    adv_samples = adversary_samples or min(mc_samples, 20_000)
    if ch.continuous:
        res = adversary_search(code, "coordinate-greedy", samples=adv_samples, seed=rng)
        dprime = (res.lower, bound_b if bound_b is not None else np.inf)
        delta_D, d_x = res.value, tuple(float(v) for v in res.x)
        ci["delta_Dprime_lower"] = res.lower
    else:
        strategy = adversary
        if strategy == "auto":
            strategy = "exhaustive" if ch.d ** cb.n <= adversary_budget else "coordinate-greedy"
        res = adversary_search(code, strategy, budget=adversary_budget, samples=adv_samples,
                               seed=rng, exact_budget=budget)
        delta_D = res.value
        d_mode = "exact" if (res.exact and strategy == "exhaustive") else "lower-bound"
        d_x = tuple(int(v) for v in res.x)
        if not res.exact:
            ci["delta_D_lower"] = res.lower

    eq = info.equivocation(ch, cb.codewords, alpha=alpha, budget=budget,
                           samples=min(mc_samples, 50_000), seed=rng)
    if eq.ci_E is not None:
        ci["E"] = eq.ci_E
        ci["E_alpha"] = eq.ci_E_alpha
    return SecurityReport(
        mode=mode, eps_A_max=float(eps.max()), eps_A_avg=float(eps.mean()),
        eps_A=tuple(float(e) for e in eps), delta_C=delta_C, delta_D=delta_D,
        delta_D_mode=d_mode, delta_D_input=d_x, E=eq.E, E_alpha=eq.E_alpha, alpha=alpha,
        equivocation_mode=eq.mode, binding_bound=bound, binding_bound_gaussian=bound_b,
        delta_Dprime=dprime, ci=ci,
        downgraded=(mode != "exact" or d_mode != "exact" or eq.mode != "exact"),
    )
