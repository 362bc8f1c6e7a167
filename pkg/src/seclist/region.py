"""Rate regions for secure list decoding and commitment.

A rate triple ``(R1, R2, R3)`` collects the message rate, the list rate and
the equivocation rate.  Achievable triples are described through an
auxiliary mixture ``P_{UX}`` via ``H(X|U)``, ``I(X;Y|U)`` and, in the Renyi
version, the mixed Sibson information

    2^{(a-1) I_a(X;Y|U)} = sum_u P_U(u) 2^{(a-1) I_a(P_{X|U=u})}.

Boundary curves are sampled on an ``R1`` grid from single-letter constrained
optima and then concavified (upper concave envelope, or a lower convex
envelope of ``2^{(a-1) I_a}`` in the Renyi case).  The module also carries the
Legendre-transform helpers used to pick decoder slack parameters, and a
list-decoding meta-converse sanity check.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linprog, minimize, minimize_scalar

from . import info
from .channel import Channel, as_rng

__all__ = [
    "RateTriple",
    "AuxMixture",
    "BoundaryCurve",
    "gamma_1_o",
    "gamma_alpha_o",
    "gamma_curve",
    "gamma_concavify",
    "running_max",
    "region_contains",
    "capacity_C",
    "capacity_C_alpha",
    "legendre_G",
    "legendre_transform",
    "legendre_eps",
    "MetaConverse",
    "meta_converse_check",
]


@dataclass(frozen=True)
class RateTriple:
    R1: float
    R2: float
    R3: float


@dataclass(frozen=True)
class AuxMixture:
    """Weights ``P_U`` and conditional input distributions ``P_{X|U=u}``."""

    weights: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.size > 4 or abs(w.sum() - 1) > 1e-9 or np.any(w < -1e-12):
            raise ValueError("invalid auxiliary mixture")


@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Sampled boundary ``R1 -> gamma(R1)``.

    ``kind`` is one of ``gamma1_o``, ``gamma1``, ``gamma1s``, ``gamma_alpha_o``,
    ``gamma_alpha``.  ``components[i]`` is the optimizing input distribution
    found at ``R1[i]`` for base curves; concavified curves carry a witness
    mixture per grid point.
    """

    R1: np.ndarray
    values: np.ndarray
    kind: str
    alpha: float | None = None
    components: np.ndarray | None = None
    base: np.ndarray | None = None
    witnesses: tuple = field(default=())

    @property
    def envelope_gap(self) -> float:
        """Largest lift of the envelope above the base curve (0 when concave)."""
        if self.base is None:
            return 0.0
        return float(np.max(self.values - self.base))


# --- single-letter constrained optima -----------------------------------------

def _binary_root(R1: float) -> float:
    """Smaller root ``p`` of ``h(p) = R1`` on ``[0, 1/2]``."""
    if R1 <= 0:
        return 0.0
    if R1 >= 1.0:
        return 0.5
    return brentq(lambda p: info.binary_entropy(p) - R1, 0.0, 0.5, xtol=1e-15, rtol=1e-15)


def _entropy_grad(P):
    Pc = np.clip(P, 1e-300, None)
    return -(np.log2(Pc) + 1 / np.log(2))


def _constrained_opt(ch: Channel, R1: float, objective, restarts: int = 16, seed: int = 0):
    """Maximize ``objective(P)`` subject to ``H(P) = R1`` (``d >= 3``).

    Sequential quadratic programming from ``restarts`` Dirichlet starts; the
    best feasible point (constraint residual <= 1e-6) wins.
    """
    d = ch.d
    rng = as_rng(seed)
    best_val, best_P = -np.inf, None
    cons = [
        {"type": "eq", "fun": lambda P: P.sum() - 1.0, "jac": lambda P: np.ones_like(P)},
        {"type": "eq", "fun": lambda P: info.entropy(np.clip(P, 0, None)) - R1,
         "jac": _entropy_grad},
    ]
    starts = [np.full(d, 1.0 / d)] + [rng.dirichlet(np.full(d, 0.7)) for _ in range(restarts - 1)]
    for P0 in starts:
        res = minimize(lambda P: -objective(_normalize(P)), P0, method="SLSQP",
                       bounds=[(0.0, 1.0)] * d, constraints=cons,
                       options={"ftol": 1e-12, "maxiter": 500})
        P = _normalize(res.x)
        if abs(info.entropy(P) - R1) > 1e-6:
            continue
        val = objective(P)
        if val > best_val:
            best_val, best_P = val, P
    if best_P is None:
        raise RuntimeError(f"no feasible point found at R1={R1}")
    return best_val, best_P


def _normalize(P):
    P = np.clip(np.asarray(P, dtype=float), 0.0, None)
    return P / P.sum()


def _gamma_o_point(ch: Channel, R1: float, objective, seed: int = 0):
    logd = np.log2(ch.d)
    if R1 < -1e-12 or R1 > logd + 1e-9:
        raise ValueError(f"R1={R1} outside [0, log d]")
    R1 = min(max(R1, 0.0), logd)
    if ch.d == 2:
        p = _binary_root(R1)
        cands = [np.array([p, 1 - p]), np.array([1 - p, p])]
        vals = [objective(P) for P in cands]
        k = int(np.argmax(vals))
        return vals[k], cands[k]
    if R1 <= 0:
        vals = [objective(np.eye(ch.d)[x]) for x in range(ch.d)]
        k = int(np.argmax(vals))
        return vals[k], np.eye(ch.d)[k]
    if R1 >= logd - 1e-12:
        P = np.full(ch.d, 1.0 / ch.d)
        return objective(P), P
    return _constrained_opt(ch, R1, objective, seed=seed)


def gamma_1_o(ch: Channel, R1: float) -> float:
    """``max {H(X|Y)_P : H(X)_P = R1}`` over single input distributions."""
    return float(_gamma_o_point(ch, R1, lambda P: info.cond_entropy_xy(ch, P))[0])


def gamma_alpha_o(ch: Channel, R1: float, alpha: float) -> float:
    """``max {R1 - I_alpha(X;Y)_P : H(X)_P = R1}``."""
    val, _ = _gamma_o_point(ch, R1, lambda P: -info.sibson_info(ch, P, alpha))
    return float(R1 + val)


# --- envelopes ---------------------------------------------------------------

def _upper_hull(x: np.ndarray, y: np.ndarray):
    """Indices of the upper convex hull vertices of points sorted by ``x``."""
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull)


def _envelope(x, y, upper: bool = True):
    """Concave (``upper``) or convex envelope of sampled points, evaluated at ``x``.

    Returns the envelope values and, per grid point, the bracketing hull
    vertices ``(i, j)`` with the weight ``lam`` on ``i``.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    h = _upper_hull(x, y if upper else -y)
    vals = np.interp(x, x[h], y[h])
    pos = np.clip(np.searchsorted(x[h], x, side="right") - 1, 0, max(len(h) - 2, 0))
    brackets = []
    for k, xi in enumerate(x):
        if len(h) == 1:
            brackets.append((h[0], h[0], 1.0))
            continue
        i, j = h[pos[k]], h[pos[k] + 1]
        lam = 1.0 if x[j] == x[i] else (x[j] - xi) / (x[j] - x[i])
        lam = min(max(lam, 0.0), 1.0)
        brackets.append((i, j, lam))
    return vals, brackets


def running_max(values) -> np.ndarray:
    return np.maximum.accumulate(np.asarray(values, dtype=float))


def gamma_concavify(curve: BoundaryCurve) -> BoundaryCurve:
    """Envelope of a base curve over auxiliary mixtures.

    ``gamma1_o`` curves get their upper concave envelope.  For
    ``gamma_alpha_o`` the quantity ``2^{(a-1)(R1 - gamma)}`` is convexified
    from below and mapped back, so the mixing follows the exponential
    averaging of Sibson information.  Witness mixtures are two-point chords
    between grid samples.
    """
    R, base = curve.R1, curve.values
    if curve.kind == "gamma1_o":
        vals, br = _envelope(R, base, upper=True)
        kind = "gamma1"
    elif curve.kind == "gamma_alpha_o":
        a = curve.alpha
        g = np.exp2((a - 1) * (R - base))
        hull, br = _envelope(R, g, upper=False)
        vals = R - np.log2(hull) / (a - 1)
        kind = "gamma_alpha"
    else:
        raise ValueError(f"cannot concavify a curve of kind {curve.kind!r}")
    vals = np.maximum(vals, base)  # envelope never lies below its samples
    wit = ()
    if curve.components is not None:
        comps = curve.components
        wit = tuple(
            AuxMixture(np.array([lam, 1 - lam]), np.stack([comps[i], comps[j]]))
            if i != j else AuxMixture(np.array([1.0]), comps[i][None, :])
            for i, j, lam in br
        )
    return BoundaryCurve(R, vals, kind, curve.alpha, curve.components, base, wit)


def gamma_curve(ch: Channel, kind: str = "gamma1", alpha: float | None = None,
                points: int = 201, grid=None) -> BoundaryCurve:
    """Boundary curve on a uniform ``R1`` grid over ``[0, log d]``.

    ``kind``: ``gamma1_o`` / ``gamma_alpha_o`` (single-letter), ``gamma1`` /
    ``gamma_alpha`` (concavified) or ``gamma1s`` (running maximum of ``gamma1``).
    """
    R = np.linspace(0.0, np.log2(ch.d), points) if grid is None else np.asarray(grid, float)
    if kind in ("gamma1_o", "gamma1", "gamma1s"):
        obj = lambda P: info.cond_entropy_xy(ch, P)  # noqa: E731
        pts = [_gamma_o_point(ch, r, obj) for r in R]
        base = BoundaryCurve(R, np.array([v for v, _ in pts]), "gamma1_o", None,
                             np.stack([P for _, P in pts]))
        if kind == "gamma1_o":
            return base
        c = gamma_concavify(base)
        if kind == "gamma1":
            return c
        return BoundaryCurve(R, running_max(c.values), "gamma1s", None, c.components, c.values)
    if kind in ("gamma_alpha_o", "gamma_alpha"):
        if alpha is None or alpha <= 1:
            raise ValueError("Renyi curves need alpha > 1")
        obj = lambda P: -info.sibson_info(ch, P, alpha)  # noqa: E731
        pts = [_gamma_o_point(ch, r, obj) for r in R]
        base = BoundaryCurve(R, R + np.array([v for v, _ in pts]), "gamma_alpha_o", alpha,
                             np.stack([P for _, P in pts]))
        return base if kind == "gamma_alpha_o" else gamma_concavify(base)
    raise ValueError(f"unknown curve kind {kind!r}")


# --- membership --------------------------------------------------------------

def _caratheodory(lam: np.ndarray, F: np.ndarray, tol: float = 1e-14) -> np.ndarray:
    """Reduce the support of ``lam`` to ``<= k + 1`` points keeping ``lam @ F`` fixed."""
    lam = lam.copy()
    k = F.shape[1]
    while True:
        S = np.flatnonzero(lam > tol)
        if S.size <= k + 1:
            lam[lam <= tol] = 0.0
            return lam / lam.sum()
        A = np.vstack([F[S].T, np.ones(S.size)])
        z = np.linalg.svd(A)[2][-1]
        if not np.any(z > 0):
            z = -z
        ratios = np.full(S.size, np.inf)
        pos = z > 1e-15
        ratios[pos] = lam[S][pos] / z[pos]
        j = int(np.argmin(ratios))
        lam[S] -= ratios[j] * z
        lam[S[j]] = 0.0
        lam = np.clip(lam, 0.0, None)


def _candidate_inputs(ch: Channel, samples: int, seed: int):
    if ch.d == 2:
        p = np.linspace(0.0, 1.0, samples)
        return np.stack([p, 1 - p], axis=1)
    rng = as_rng(seed)
    cands = [np.eye(ch.d), np.full((1, ch.d), 1.0 / ch.d), rng.dirichlet(np.ones(ch.d), samples)]
    for r in np.linspace(0, np.log2(ch.d), 21)[1:-1]:
        cands.append(_gamma_o_point(ch, r, lambda P: -info.mutual_info(ch, P), seed)[1][None, :])
    return np.vstack(cands)


def region_contains(kind: str, ch: Channel, triple: RateTriple, alpha: float | None = None,
                    samples: int = 1001, seed: int = 0):
    """Decide membership of a rate triple; returns ``(bool, AuxMixture | None)``.

    ``kind``: ``"C"`` (``R3 <= R1 - I(X;Y|U)``), ``"Cs"`` (``R3 <= H(X|YU)``) or
    ``"Calpha"`` (``R3 < R1 - I_alpha(X;Y|U)``).  Common constraints are
    ``0 < R1 - R2 < I(X;Y|U)`` and ``R1 < H(X|U)``.  Mixtures range over a
    finite candidate set of input distributions; a linear program maximizes
    the slack of the strict inequalities, and a Caratheodory reduction
    shrinks the witness to at most 3 (or 4, Renyi) components.
    """
    R1, R2, R3 = triple.R1, triple.R2, triple.R3
    if not (R1 > 0 and R2 >= 0 and R3 >= 0 and R1 - R2 > 0):
        return False, None
    if kind == "Calpha" and (alpha is None or alpha <= 1):
        raise ValueError("Calpha needs alpha > 1")
    X = _candidate_inputs(ch, samples, seed)
    h = np.array([info.entropy(P) for P in X])
    i = np.array([info.mutual_info(ch, P) for P in X])
    N = len(X)
    # variables: lam (N), slack s; minimize -s
    c = np.zeros(N + 1)
    c[-1] = -1.0
    A, b = [], []
    A.append(np.append(-h, 1.0)), b.append(-R1)             # sum lam h >= R1 + s
    A.append(np.append(-i, 1.0)), b.append(-(R1 - R2))      # sum lam i >= R1 - R2 + s
    feats = [h, i]
    if kind == "C":
        A.append(np.append(i, 0.0)), b.append(R1 - R3)
    elif kind == "Cs":
        A.append(np.append(-(h - i), 0.0)), b.append(-R3)
    elif kind == "Calpha":
        e = np.array([np.exp2((alpha - 1) * info.sibson_info(ch, P, alpha)) for P in X])
        A.append(np.append(e, 1.0)), b.append(np.exp2((alpha - 1) * (R1 - R3)))
        feats.append(e)
    else:
        raise ValueError(f"unknown region {kind!r}")
    Aeq = np.append(np.ones(N), 0.0)[None, :]
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), A_eq=Aeq, b_eq=[1.0],
                  bounds=[(0, None)] * N + [(None, 1.0)], method="highs")
    if res.status != 0 or -res.fun <= 1e-10:
        return False, None
    lam = _caratheodory(np.clip(res.x[:N], 0, None), np.stack(feats, axis=1))
    S = np.flatnonzero(lam > 0)
    return True, AuxMixture(lam[S], X[S])


# --- capacities ----------------------------------------------------------------

def _maximize_over_inputs(ch: Channel, f, restarts: int = 8, seed: int = 0):
    if ch.d == 2:
        p = np.linspace(0.0, 1.0, 401)
        vals = np.array([f(np.array([q, 1 - q])) for q in p])
        k = int(np.argmax(vals))
        lo, hi = p[max(k - 1, 0)], p[min(k + 1, len(p) - 1)]
        res = minimize_scalar(lambda q: -f(np.array([q, 1 - q])), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12})
        if -res.fun >= vals[k]:
            return float(-res.fun), np.array([res.x, 1 - res.x])
        return float(vals[k]), np.array([p[k], 1 - p[k]])
    rng = as_rng(seed)
    best, bestP = -np.inf, None

    def neg(z):
        P = np.exp(z - z.max())
        return -f(P / P.sum())

    for s in range(restarts):
        z0 = np.zeros(ch.d) if s == 0 else rng.normal(size=ch.d)
        res = minimize(neg, z0, method="L-BFGS-B", options={"ftol": 1e-14, "gtol": 1e-10})
        if -res.fun > best:
            P = np.exp(res.x - res.x.max())
            best, bestP = float(-res.fun), P / P.sum()
    for x in range(ch.d):  # vertices, in case the optimum sits on the boundary
        v = f(np.eye(ch.d)[x])
        if v > best:
            best, bestP = v, np.eye(ch.d)[x]
    return best, bestP


def capacity_C(ch: Channel) -> float:
    """Commitment capacity ``max_P H(X|Y)_P``."""
    return _maximize_over_inputs(ch, lambda P: info.cond_entropy_xy(ch, P))[0]


def capacity_C_alpha(ch: Channel, alpha: float) -> float:
    """``max_P H(X)_P - I_alpha(X;Y)_P``."""
    return _maximize_over_inputs(ch, lambda P: info.entropy(P) - info.sibson_info(ch, P, alpha))[0]


# --- Legendre transforms -----------------------------------------------------

def _g_terms(P, t):
    P = np.asarray(P, dtype=float)
    with np.errstate(divide="ignore"):
        return np.logaddexp2(t + np.log2(P), np.log2(1.0 - P))


def legendre_G(P, Pp, t: float) -> float:
    """``G_{P,P'}(t) = sum_x P'(x) log(2^t P(x) + 1 - P(x))``."""
    Pp = np.asarray(Pp, dtype=float)
    g = _g_terms(P, t)
    on = Pp > 0
    return float(Pp[on] @ g[on])


def _min_over_t(fun, slope_inf: float, r: float):
    """``inf_{t > 0} fun(t)`` for a convex ``fun`` with ``fun(0+) = 0``.

    Log-spaced bracket search followed by golden-section refinement.
    """
    if slope_inf < r - 1e-15:
        return -np.inf
    ts = np.logspace(-8, 4, 241)
    vals = np.array([fun(t) for t in ts])
    k = int(np.argmin(vals))
    best = min(0.0, float(vals[k]))
    if 0 < k < len(ts) - 1:
        res = minimize_scalar(fun, bracket=(ts[k - 1], ts[k], ts[k + 1]), method="golden",
                              tol=1e-12)
        best = min(best, float(res.fun))
    return best


def legendre_transform(P, Pp, r: float) -> float:
    """``min_{t > 0} G_{P,P'}(t) - t r`` (infimum; ``-inf`` when unbounded)."""
    P = np.asarray(P, float)
    Pp = np.asarray(Pp, float)
    slope = float(Pp[P > 0].sum())
    return _min_over_t(lambda t: legendre_G(P, Pp, t) - t * r, slope, r)


def _tv_ball_max(P: np.ndarray, g: np.ndarray, eps: float) -> float:
    """``max <P', g>`` over ``P'`` within total variation ``eps`` of ``P``."""
    order = np.argsort(g)
    top = order[-1]
    budget = eps
    val = float(P @ g)
    for x in order:
        if x == top or budget <= 0:
            continue
        move = min(P[x], budget)
        val += move * (g[top] - g[x])
        budget -= move
    return val


def legendre_eps(P, eps: float, r: float) -> float:
    """``max`` over ``P'`` in the total-variation ball of radius ``eps`` of ``L[G_{P,P'}](r)``.

    The objective is linear in ``P'`` and convex in ``t``, so the max-min is
    computed as a min-max with a closed-form inner maximization.
    """
    P = np.asarray(P, float)

    def fun(t):
        return _tv_ball_max(P, _g_terms(P, t), eps) - t * r

    slope = 1.0 if np.all(P > 0) else min(1.0, float(P[P > 0].sum()) + eps)
    return _min_over_t(fun, slope, r)


# --- meta-converse -------------------------------------------------------------

@dataclass(frozen=True)
class MetaConverse:
    """Both sides of ``-log eps_Q <= (D(P||Q) + h(eps_P)) / (1 - eps_P)``."""

    holds: bool
    eps_P: float
    eps_Q: float
    divergence: float
    lhs: float
    rhs: float

    def __bool__(self):
        return self.holds


def meta_converse_check(code, budget: int = 2 ** 22) -> MetaConverse:
    """Check the list-decoding meta-converse on an exactly evaluated code.

    ``P`` is the code-induced joint of message and output, ``Q`` the product
    of uniform messages and the output marginal; ``eps_P`` is the average
    probability that the sent message is missing from the list and ``eps_Q``
    the probability under ``Q`` that the message lands in the list.
    """
    from .slc import exact_tables

    tab = exact_tables(code, budget)
    M = code.codebook.M
    W = tab.codeword_probs  # (M, Ny)
    inlist = tab.inlist
    eps_P = float(1.0 - np.mean(np.einsum("my,ym->m", W, inlist)))
    PY = W.mean(axis=0)
    eps_Q = float(PY @ inlist.sum(axis=1) / M)
    D = info.mutual_info_joint(W / M)
    eps_P = min(max(eps_P, 0.0), 1.0)
    if eps_P >= 1.0 - 1e-15 or eps_Q >= 1.0:
        return MetaConverse(True, eps_P, eps_Q, D, -np.log2(max(eps_Q, 1e-300)), np.inf)
    lhs = -np.log2(eps_Q) if eps_Q > 0 else np.inf
    rhs = (D + info.binary_entropy(eps_P)) / (1.0 - eps_P)
    return MetaConverse(bool(lhs <= rhs + 1e-9), eps_P, eps_Q, D, lhs, rhs)
