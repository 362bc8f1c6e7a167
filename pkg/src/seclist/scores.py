"""Score functions for the list decoder's binding test.

A score family assigns to each input ``x`` a function ``xi_x`` on the output
space with

* zero mean under its own row: ``E_x[xi_x] = 0``;
* a strictly negative mean under every other row, with margin
  ``zeta1 = min_{x != x'} E_{x'}[-xi_x] > 0``;
* bounded variances, ``zeta2 = max_{x, x'} Var_{x'}[xi_x]``.

For finite-output (or partitioned) channels the family is built from the
information projection of each row onto the mixtures of the other rows.
When the row supports differ, rows are smoothed by a small ``delta`` before
projecting.  For additive-noise channels with a real input the score is the
centred log-likelihood, and a certificate tabulates the Renyi-divergence
margin against arbitrary shifted inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import LOG2E, Channel, gauss_legendre_grid

__all__ = [
    "ScoreError",
    "Projection",
    "ScoreFamily",
    "ContinuousScoreCert",
    "kl_project_onto_others",
    "reverse_projection_divergence",
    "redundant_inputs",
    "build_scores_discrete",
    "build_scores_awgn",
    "score_sum",
    "DELTA_GRID",
]

DELTA_GRID = (1e-2, 1e-3, 1e-4)
REDUNDANCY_TOL = 1e-9


class ScoreError(ValueError):
    """Score construction failed; ``input`` names the offending symbol."""

    def __init__(self, msg, input=None):
        super().__init__(msg)
        self.input = input


@dataclass(frozen=True)
class Projection:
    """Result of projecting one row onto the mixtures of the others.

    Attributes
    ----------
    weights : ndarray
        Mixture over all inputs; zero at the projected input.
    divergence : float
        ``D(W_mix || target)`` at the optimum (``inf`` if no feasible mixture).
    gap : float
        Frank-Wolfe duality gap at termination, an upper bound on the
        suboptimality of ``divergence``.
    iterations : int
    """

    weights: np.ndarray
    divergence: float
    gap: float
    iterations: int


def _eg_minimize(fun, grad, k, tol=1e-10, max_iter=200000):
    """Exponentiated-gradient descent on the simplex with Armijo steps.

    Stops when the Frank-Wolfe gap ``<lam, g> - min g`` drops below ``tol``.
    Near the optimum the objective decrease falls under its rounding floor
    while the gap is still resolvable, so a step that leaves ``f`` unchanged
    to rounding is accepted when it shrinks the gap.  Returns the final gap.
    """
    lam = np.full(k, 1.0 / k)
    f = fun(lam)
    eta = 1.0
    gap = np.inf
    it = 0
    g = grad(lam)
    for it in range(1, max_iter + 1):
        gap = float(lam @ g - g.min())
        if gap <= tol:
            break
        floor = 1e-14 * max(1.0, abs(f))
        moved = False
        while eta >= 1e-14:
            new = lam * np.exp(-eta * (g - g.min()))
            new /= new.sum()
            fn = fun(new)
            if fn <= f + 1e-4 * float(g @ (new - lam)):
                moved = True
            elif fn <= f + floor:
                gn = grad(new)
                moved = float(new @ gn - gn.min()) < gap
            if moved:
                break
            eta *= 0.5
        if not moved:
            break
        lam, f = new, min(f, fn)
        g = grad(lam)
        eta *= 2.0
    return lam, f, gap, it


def _project(rows: np.ndarray, target: np.ndarray, tol=1e-10):
    """min over mixtures ``m = lam @ rows`` of ``D(m || target)``."""
    k = rows.shape[0]
    with np.errstate(divide="ignore"):
        lt = np.log2(target)

    if k == 1:
        lam = np.ones(1)
        m = rows[0]
        on = m > 0
        return lam, float(np.sum(m[on] * (np.log2(m[on]) - lt[on]))), 0.0, 0

    def fun(lam):
        m = lam @ rows
        on = m > 0
        return float(np.sum(m[on] * (np.log2(m[on]) - lt[on])))

    def grad(lam):
        m = lam @ rows
        on = m > 0
        r = np.log2(np.where(on, m, 1.0)) - np.where(on, lt, 0.0)
        return rows[:, on] @ r[on] + LOG2E

    return _eg_minimize(fun, grad, k, tol)


def kl_project_onto_others(ch: Channel, x: int, target=None, tol: float = 1e-10) -> Projection:
    """Project row ``x`` onto the mixtures of the other rows in forward KL.

    Minimizes ``D(sum_{x'} P(x') W_{x'} || W_x)`` over mixtures ``P`` of the
    other inputs.  Only rows absolutely continuous with respect to the
    target can carry weight; if none is, the divergence is infinite.

    Parameters
    ----------
    target : array, optional
        Replacement for ``W_x`` (cell masses), e.g. a smoothed row.
    """
    pmf = ch.pmf
    d = ch.d
    if d < 2:
        raise ScoreError("projection needs at least two inputs")
    tgt = pmf[x] if target is None else np.asarray(target, dtype=float)
    others = np.array([j for j in range(d) if j != x])
    feasible = others[[np.all(tgt[pmf[j] > 0] > 0) for j in others]]
    weights = np.zeros(d)
    if feasible.size == 0:
        weights[others] = 1.0 / others.size
        return Projection(weights, np.inf, 0.0, 0)
    lam, div, gap, it = _project(pmf[feasible], tgt, tol)
    weights[feasible] = lam
    return Projection(weights, max(float(div), 0.0), gap, it)


def reverse_projection_divergence(ch: Channel, x: int, tol: float = 1e-10) -> float:
    """``min_P D(W_x || W_P)`` over mixtures of the other rows."""
    pmf = ch.pmf
    others = [j for j in range(ch.d) if j != x]
    rows = pmf[others]
    wx = pmf[x]
    on = wx > 0
    if np.any(rows[:, on].sum(axis=0) <= 0):
        return np.inf
    lwx = np.log2(wx[on])

    def fun(lam):
        m = lam @ rows[:, on]
        if np.any(m <= 0):
            return np.inf
        return float(np.sum(wx[on] * (lwx - np.log2(m))))

    def grad(lam):
        m = lam @ rows[:, on]
        return -(rows[:, on] @ (wx[on] / m)) * LOG2E

    if len(others) == 1:
        return max(fun(np.ones(1)), 0.0)
    _, f, _, _ = _eg_minimize(fun, grad, len(others), tol)
    return max(float(f), 0.0)


def redundant_inputs(ch: Channel) -> tuple:
    """Inputs whose row is (within KL 1e-9) a mixture of the other rows."""
    return tuple(x for x in range(ch.d)
                 if kl_project_onto_others(ch, x).divergence < REDUNDANCY_TOL)


@dataclass(frozen=True, eq=False)
class ScoreFamily:
    """Scores ``xi_x`` with their certified constants.

    ``kind`` is ``"table"`` (values per output cell; real outputs are mapped to
    their quadrature cell) or ``"additive"`` (centred Gaussian
    log-likelihood evaluated analytically).
    """

    kind: str
    zeta1: float
    zeta2: float
    table: np.ndarray | None = None
    projections: tuple = ()
    smoothing_delta: float = 0.0
    certificate: dict = field(default_factory=dict)
    edges: np.ndarray | None = None
    means: np.ndarray | None = None
    variance: float | None = None
    offset: float = 0.0

    @property
    def d(self) -> int:
        return self.table.shape[0] if self.table is not None else len(self.means)

    def values(self, x, y) -> np.ndarray:
        """``xi_x(y)`` with broadcasting over ``x`` (input indices) and ``y``."""
        x = np.asarray(x, dtype=np.int64)
        if self.kind == "additive":
            diff = np.asarray(y, dtype=float) - self.means[x]
            v = self.variance
            return -(diff ** 2) / (2 * v) * LOG2E - 0.5 * np.log2(2 * np.pi * v) - self.offset
        y = np.asarray(y)
        if self.edges is not None:
            y = np.searchsorted(self.edges, y.astype(float))
        return self.table[x, y.astype(np.int64)]


def score_sum(sf: ScoreFamily, xn, yn) -> np.ndarray:
    """``xi_{x^n}(y^n) = sum_i xi_{x_i}(y_i)`` over the trailing axis."""
    xn, yn = np.asarray(xn), np.asarray(yn)
    if xn.shape[-1] != yn.shape[-1]:
        raise ValueError(f"length mismatch: {xn.shape[-1]} vs {yn.shape[-1]}")
    return np.sum(sf.values(xn, yn), axis=-1)


def _moments(table: np.ndarray, pmf: np.ndarray):
    """Means and variances of every score row under every channel row.

    Returns ``mean[x, x'] = E_{x'}[xi_x]`` and ``var[x, x']``; cells of zero
    mass are ignored, so undefined score values there do not matter.
    """
    d = table.shape[0]
    mean = np.empty((d, d))
    var = np.empty((d, d))
    for x in range(d):
        for xp in range(d):
            on = pmf[xp] > 0
            v = table[x, on]
            p = pmf[xp, on]
            mu = float(p @ v)
            mean[x, xp] = mu
            var[x, xp] = float(p @ (v - mu) ** 2)
    return mean, var


def _smoothed(row: np.ndarray, delta: float) -> np.ndarray:
    off = row <= 0
    if not off.any():
        return row.copy()
    out = (1 - delta) * row
    out[off] = delta / off.sum()
    return out


def _step2(ch: Channel):
    pmf, lp = ch.pmf, ch.log_pmf
    d = ch.d
    table = np.zeros_like(pmf)
    projections = []
    for x in range(d):
        pr = kl_project_onto_others(ch, x)
        if not pr.divergence > REDUNDANCY_TOL:
            raise ScoreError(f"input {x} is a mixture of the other inputs", input=x)
        lwp = np.log2(pr.weights @ pmf)
        llr = lp[x] - lwp
        on = pmf[x] > 0
        D = float(pmf[x, on] @ llr[on])  # D(W_x || W_{P_x})
        table[x] = np.where(on, llr - D, 0.0)
        projections.append(pr)
    return table, projections, 0.0, {}


def _step3(ch: Channel):
    pmf = ch.pmf
    d = ch.d
    supp = pmf > 0
    rev = [reverse_projection_divergence(ch, x) for x in range(d)]
    for delta in DELTA_GRID:
        ok = True
        table = np.zeros_like(pmf)
        projections, cases = [], []
        for x in range(d):
            wxd = _smoothed(pmf[x], delta)
            pr = kl_project_onto_others(ch, x, target=wxd)
            full = not np.any(~supp[x])
            # both strict positivity conditions for this delta
            shrink = 0.0 if full else np.log2(1 - delta)
            if not (pr.divergence > REDUNDANCY_TOL and shrink + rev[x] > 0):
                ok = False
                break
            union = supp[np.arange(d) != x].any(axis=0)
            wp = pr.weights @ pmf
            with np.errstate(divide="ignore"):
                llr = np.log2(wxd) - np.log2(wp)
            if np.all(union[supp[x]]):
                # own support covered by the others: centre under W_x
                mu = float(pmf[x, supp[x]] @ llr[supp[x]])
                table[x] = np.where(union, llr - mu, 0.0)
                cases.append("covered")
            else:
                s = float(pmf[x, union] @ llr[union])
                comp = float(pmf[x, ~union].sum())
                table[x] = np.where(union, llr, -s / comp)
                cases.append("uncovered")
            projections.append(pr)
        if ok:
            return table, projections, delta, {"step3_cases": tuple(cases)}
    bad = [x for x in range(d) if not rev[x] > 0]
    raise ScoreError(f"no smoothing parameter in {DELTA_GRID} satisfies the positivity "
                     "conditions", input=bad[0] if bad else None)


def build_scores_discrete(ch: Channel) -> ScoreFamily:
    """Score family for a finite (or quadrature-partitioned) output.

    Equal row supports use the plain projection construction; otherwise the
    rows are smoothed with the largest ``delta`` in ``DELTA_GRID`` for which
    both positivity conditions hold.  Continuous outputs are handled through
    their quadrature-cell partition.  The three defining conditions are
    re-evaluated from the finished table and stored in ``certificate``.

    Raises
    ------
    ScoreError
        If some input is redundant (a mixture of the others).
    """
    if ch.d < 2:
        raise ScoreError("need at least two inputs")
    supp = ch.pmf > 0
    same = bool(np.all(supp == supp[0]))
    table, projections, delta, extra = _step2(ch) if same else _step3(ch)

    mean, var = _moments(table, ch.pmf)
    d = ch.d
    off = ~np.eye(d, dtype=bool)
    zeta1 = float(np.min(-mean[off]))
    zeta2 = float(np.max(var))
    own_mean = float(np.max(np.abs(np.diag(mean))))

    # variational inequality at each projection: for every other row Q,
    # D(W_{P_x} || target) <= E_Q[log w_{P_x} - log target]
    proj_viol = 0.0
    for x, pr in enumerate(projections):
        tgt = ch.pmf[x] if same else _smoothed(ch.pmf[x], delta)
        wp = pr.weights @ ch.pmf
        with np.errstate(divide="ignore"):
            llr = np.log2(wp) - np.log2(tgt)
        for xp in range(d):
            if xp == x:
                continue
            on = ch.pmf[xp] > 0
            rhs = float(ch.pmf[xp, on] @ llr[on])
            proj_viol = max(proj_viol, pr.divergence - rhs - pr.gap)
    if proj_viol > 1e-8:
        raise ScoreError(f"projection optimality check failed by {proj_viol:.3g}")
    if own_mean > 1e-9:
        raise ScoreError(f"own-mean condition violated by {own_mean:.3g}")
    if not zeta1 > 0:
        raise ScoreError(f"cross-mean margin not positive ({zeta1:.3g})")
    if not np.isfinite(zeta2):
        raise ScoreError("variance bound is not finite")

    cert = {"branch": "equal-support" if same else "smoothed", "own_mean_max_abs": own_mean,
            "zeta1": zeta1, "zeta2": zeta2, "projection_max_violation": proj_viol,
            "cross_means": mean, **extra}
    table.setflags(write=False)
    return ScoreFamily("table", zeta1, zeta2, table=table, projections=tuple(projections),
                       smoothing_delta=delta, certificate=cert, edges=ch.edges)


# --- additive-noise channels -------------------------------------------------

@dataclass(frozen=True, eq=False)
class ContinuousScoreCert:
    """Constants for binding against arbitrary real inputs.

    Attributes
    ----------
    zeta3 : float
        Smallest distance between constellation points.
    t_grid, r_grid : ndarray
        Table axes; ``t`` in ``(0, 1/2)`` and distances ``r > 0``.
    table : ndarray, shape (len(t_grid), len(r_grid))
        ``inf`` over input pairs at distance >= r of the order-``(1 - t)``
        Renyi divergence ``D_{1-t}(W_{x'} || W_x)``, minimized over a grid of
        offsets.
    zetabar2 : float
        ``sup_x Var_x[xi_x]``.
    """

    zeta3: float
    t_grid: np.ndarray
    r_grid: np.ndarray
    offsets: np.ndarray
    table: np.ndarray
    zetabar2: float
    variance: float

    def divergence(self, t: float, offset: float) -> float:
        """``(-1/t) log E_{x'}[2^{t(xi_x - xi_{x'})}]`` for ``x' = x + offset`` by quadrature."""
        return _shift_renyi(self.variance, t, offset)

    def zetabar1(self, t: float, r: float) -> float:
        """Conservative lookup of the margin at distance ``r``.

        Uses the largest tabulated distance not exceeding ``r`` (the margin is
        nondecreasing in ``r``); values below the first node are 0.  Orders not
        on the table are evaluated directly on the offset grid.
        """
        j = np.searchsorted(self.r_grid, r, side="right") - 1
        if j < 0:
            return 0.0
        hit = np.flatnonzero(np.isclose(self.t_grid, t, rtol=0, atol=1e-12))
        if hit.size:
            return float(self.table[hit[0], j])
        cand = self.offsets[self.offsets >= self.r_grid[j]]
        return float(min(_shift_renyi(self.variance, t, s) for s in np.concatenate([cand, -cand])))


def _shift_renyi(v: float, t: float, delta: float, nodes: int = 512) -> float:
    """``-(1/t) log E[2^{t (log w_x(Y) - log w_{x'}(Y))}]`` with ``Y = x' + N``.

    ``delta = x' - x``; the expectation is a quadrature over the noise ``N``
    on a window wide enough to hold the exponentially tilted integrand.
    """
    s = np.sqrt(v)
    centre = -t * delta
    half = 12.0 * s + abs(centre)
    z, w = gauss_legendre_grid(-half, half, nodes, 16)
    ln_noise = -(z ** 2) / (2 * v) - 0.5 * np.log(2 * np.pi * v)
    # natural-log likelihood ratio log w_x(y) - log w_{x'}(y) at y = x' + z
    ln_ratio = (z ** 2 - (z + delta) ** 2) / (2 * v)
    from scipy.special import logsumexp

    ln_E = logsumexp(ln_noise + t * ln_ratio, b=w)
    return float(-ln_E / t * LOG2E)


def build_scores_awgn(ch: Channel, t_grid=None, r_grid=None):
    """Centred log-likelihood scores for an additive Gaussian channel.

    ``xi_x(y) = log w_x(y) - E_0[log w_0(Y)]``; own means vanish by shift
    invariance.  Returns the family restricted to the constellation together
    with a :class:`ContinuousScoreCert`.
    """
    if not ch.continuous:
        raise ScoreError("additive construction needs a Gaussian-noise channel")
    v = ch.variance
    mu = np.asarray(ch.means, dtype=float)
    d = mu.size
    # E_0[log w_0] by quadrature on the channel grid, also sanity of finiteness
    on = ch.pmf[0] > 0
    ent = float(ch.pmf[0, on] @ (ch.log_pmf[0, on] - np.log2(ch.weights[on])))
    if not np.isfinite(ent):
        raise ScoreError("E_0[log w_0] is not finite")
    offset = ent

    sf_tmp = ScoreFamily("additive", 0.0, 0.0, means=mu, variance=v, offset=offset)
    vals = np.stack([sf_tmp.values(np.full(ch.n_outputs, x), ch.nodes) for x in range(d)])
    mean, var = _moments(vals, ch.pmf)
    offd = ~np.eye(d, dtype=bool)
    zeta1 = float(np.min(-mean[offd])) if d > 1 else np.inf
    zeta2 = float(np.max(var))
    own_mean = float(np.max(np.abs(np.diag(mean))))
    if own_mean > 1e-8:
        raise ScoreError(f"own-mean condition violated by {own_mean:.3g} (grid too coarse?)")

    dist = np.abs(mu[:, None] - mu[None, :])
    zeta3 = float(dist[offd].min()) if d > 1 else np.inf
    t_grid = np.array([0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45] if t_grid is None
                      else t_grid, dtype=float)
    if np.any((t_grid <= 0) | (t_grid >= 0.5)):
        raise ScoreError("t must lie in (0, 1/2)")
    r_grid = np.linspace(0.02, 2.0 * zeta3, 100) if r_grid is None else np.asarray(r_grid, float)
    offsets = np.concatenate([r_grid, np.linspace(r_grid[-1], 3 * r_grid[-1], 21)[1:]])
    table = np.empty((t_grid.size, r_grid.size))
    for i, t in enumerate(t_grid):
        dv = np.array([min(_shift_renyi(v, t, s), _shift_renyi(v, t, -s)) for s in offsets])
        # running minimum from the right: inf over offsets >= r
        tail = np.minimum.accumulate(dv[::-1])[::-1]
        table[i] = tail[: r_grid.size]
    zetabar2 = float(np.max(np.diag(var)))
    cert = ContinuousScoreCert(zeta3, t_grid, r_grid, offsets, table, zetabar2, v)

    certificate = {"branch": "additive", "own_mean_max_abs": own_mean, "zeta1": zeta1, "zeta2": zeta2,
                   "cross_means": mean, "zetabar2": zetabar2,
                   "table_min_positive": float(table.min())}
    sf = ScoreFamily("additive", zeta1, zeta2, certificate=certificate, means=mu,
                     variance=v, offset=offset)
    return sf, cert
