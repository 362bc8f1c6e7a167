import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from seclist import scores, slc
from seclist.channel import make_awgn_bpsk, product


@pytest.fixture(scope="module")
def sf01(bsc01):
    return scores.build_scores_discrete(bsc01)


def _code(ch, cw, L, sf=None, **kw):
    kw.setdefault("R4", 0.1)
    kw.setdefault("eps1", 0.5)
    kw.setdefault("eps2", 0.2)
    return slc.make_code(ch, slc.Codebook(np.asarray(cw)), L, sf, **kw)


# --- codebooks ---------------------------------------------------------------------

def test_codebook_generation(bsc01):
    cb = slc.random_codebook(bsc01, [1.0, 0.0], 5, 8, seed=1)
    assert np.all(cb.codewords == 0)
    cb = slc.random_codebook(bsc01, [0.3, 0.7], 4, 10 ** 4, seed=2)
    freq = cb.codewords.mean()
    assert abs(freq - 0.7) <= 3 * np.sqrt(0.21 / cb.codewords.size)
    again = slc.random_codebook(bsc01, [0.3, 0.7], 4, 10 ** 4, seed=2)
    assert np.array_equal(cb.codewords, again.codewords)
    with pytest.raises(ValueError):
        slc.random_codebook(bsc01, [0.5, 0.5], 4, 1)


def test_expurgation_rules(bsc01):
    far = slc.Codebook(np.array([[0] * 6, [1] * 6, [0, 0, 0, 1, 1, 1]]))
    assert slc.expurgate(far, 0.1).M == 3
    dup = slc.Codebook(np.array([[0, 1, 0], [0, 1, 0], [1, 1, 1], [0, 1, 0], [1, 1, 1]]))
    kept = slc.expurgate(dup, 0.01)
    assert kept.M == 2 and list(kept.labels) == [0, 2]
    cb = slc.random_codebook(bsc01, [0.5, 0.5], 8, 16, seed=3)
    ex = slc.expurgate(cb, 0.25)
    D = slc.hamming_distances(ex.codewords)
    assert np.all(D[~np.eye(ex.M, dtype=bool)] > 2)
    assert ex.retention == ex.M / 16 and ex.eps2 == 0.25


# --- decoder -------------------------------------------------------------------------

def test_decoder_noiseless(noiseless):
    code = _code(noiseless, [[0, 0, 1], [1, 0, 1], [1, 1, 0]], 1,
                 R4=0.0, eps1=1e6)
    for m, cw in enumerate(code.codebook.codewords):
        assert slc.decode(code, cw) == [m]
    # nothing passes the likelihood test for an output off the codebook
    assert slc.decode(code, [0, 1, 0]) == []


def test_decoder_hand_cases(bsc01, sf01):
    cw = np.array([[0, 0], [1, 1]])
    code = _code(bsc01, cw, 1, sf01, R4=np.log2(1.5) / 2, eps1=0.5)
    assert code.params.M_prime == pytest.approx(1.5)
    W, xi = bsc01.pmf, sf01.table
    for y in itertools.product(range(2), repeat=2):
        expect = []
        for m in range(2):
            lik = W[cw[m, 0], y[0]] * W[cw[m, 1], y[1]]
            wp = 0.25  # uniform reference input
            score = xi[cw[m, 0], y[0]] + xi[cw[m, 1], y[1]]
            if lik >= 1.5 * wp and score >= -2 * 0.5:
                expect.append(m)
        assert slc.decode(code, list(y)) == expect
    assert slc.decode(code, [0, 0]) == [0] and slc.decode(code, [1, 1]) == [1]
    assert slc.decode(code, [0, 1]) == [] and slc.decode(code, [1, 0]) == []


def test_decoder_truncation_keeps_most_likely(bsc01, sf01):
    code = _code(bsc01, [[0, 0, 0], [0, 0, 1], [1, 1, 1]], 2, sf01, R4=-5.0, eps1=50.0)
    assert slc.decode(code, [0, 0, 0]) == [0, 1]
    assert slc.decode(code, [1, 1, 1]) == [2, 1]


def test_code_validation(bsc01, sf01):
    cb = slc.Codebook(np.array([[0, 0], [1, 1]]))
    with pytest.raises(ValueError):
        slc.make_code(bsc01, cb, 2, sf01, R4=0.1, eps1=0.5, eps2=0.2)
    with pytest.raises(ValueError):
        slc.make_code(bsc01, cb, 1, sf01, R4=0.1, eps1=0.0, eps2=0.2)


def test_auto_parameters(bsc01, sf01):
    cb = slc.random_codebook(bsc01, [0.5, 0.5], 6, 16, seed=4)
    code = slc.make_code(bsc01, cb, 4, sf01)
    R1, R2 = 4 / 6, 2 / 6
    I = 1 - 0.4689955935892812
    assert R1 - R2 < code.params.R4 < I
    assert code.params.eps1 == pytest.approx(sf01.zeta1 * code.params.eps2 / 4)
    with pytest.raises(ValueError):
        slc.make_code(bsc01, slc.random_codebook(bsc01, [0.5, 0.5], 4, 16, seed=4), 1, sf01)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), L=st.integers(1, 3))
def test_membership_soundness(bsc01, sf01, seed, L):
    rng = np.random.default_rng(seed)
    cw = rng.integers(0, 2, (5, 6))
    code = _code(bsc01, cw, L, sf01, R4=float(rng.uniform(-0.2, 0.5)), eps1=float(rng.uniform(0.1, 2)))
    Y = rng.integers(0, 2, (20, 6))
    pc = product(bsc01, 6)
    for y in Y:
        lst = slc.decode(code, y)
        assert len(lst) <= L
        for m in lst:
            lik = pc.log_density(cw[m], y)
            ref = np.log2(np.prod(0.5 * np.ones(6)))
            assert lik - ref >= code.params.log_threshold - 1e-9
            assert scores.score_sum(sf01, cw[m], y) >= -6 * code.params.eps1 - 1e-9


# --- exact evaluation --------------------------------------------------------------------

def test_exact_outcomes_partition(bsc01, sf01):
    code = _code(bsc01, np.random.default_rng(0).integers(0, 2, (4, 4)), 2, sf01)
    tab = slc.exact_tables(code)
    lists = [tuple(np.flatnonzero(r)) for r in tab.inlist]
    for m in range(code.M):
        by_list = {}
        for j, key in enumerate(lists):
            by_list[key] = by_list.get(key, 0.0) + tab.codeword_probs[m, j]
        assert sum(by_list.values()) == pytest.approx(1.0, abs=1e-9)


def test_union_bound_dominates(bsc01, sf01):
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        M = int(rng.integers(3, 7))
        code = _code(bsc01, rng.integers(0, 2, (M, n)), int(rng.integers(1, M)), sf01,
                     R4=float(rng.uniform(0, 0.5)), eps1=float(rng.uniform(0.2, 2)))
        tab = slc.exact_tables(code)
        eps = 1 - np.diag(tab.codeword_probs @ tab.inlist.astype(float))
        assert np.all(eps <= slc.union_bound_terms(code, tab) + 1e-12)


def test_budget_exceeded(bsc01, sf01):
    code = _code(bsc01, np.zeros((3, 10), dtype=int) + np.eye(3, 10, dtype=int), 1, sf01)
    with pytest.raises(slc.BudgetExceeded):
        slc.exact_tables(code, budget=100)


def test_report_noiseless(noiseless):
    code = _code(noiseless, [[0, 0, 1], [1, 0, 1], [1, 1, 0]], 1, R4=0.0, eps1=1e6)
    rep = slc.evaluate_security(code)
    assert rep.mode == "exact" and rep.delta_D_mode == "exact"
    assert rep.eps_A_max == 0 and rep.delta_C == 0 and rep.delta_D == 0


def test_report_identical_codewords(bsc01, sf01):
    code = _code(bsc01, np.zeros((3, 4), dtype=int), 2, sf01, R4=-1.0, eps1=3.0)
    rep = slc.evaluate_security(code)
    eps = np.array(rep.eps_A)
    assert eps[2] == 1.0  # always truncated away
    assert rep.delta_C == pytest.approx(1 - eps.min(), abs=1e-12)
    assert rep.delta_D >= rep.delta_C - 1e-12
    for v in (rep.eps_A_max, rep.eps_A_avg, rep.delta_C, rep.delta_D):
        assert 0 <= v <= 1


def test_delta_D_exact_vs_monte_carlo(bsc01, sf01):
    cb = slc.expurgate(slc.random_codebook(bsc01, [0.5, 0.5], 4, 12, seed=5), 0.25)
    code = slc.make_code(bsc01, cb, 1, sf01, R4=0.1, eps1=0.3)
    ex = slc.adversary_search(code, "exhaustive")
    assert ex.exact and ex.evaluations == 16
    sec = np.sort(slc.acceptance_exact(code, slc._all_inputs(2, 4)), axis=1)[:, -2]
    assert ex.value == pytest.approx(sec.max())
    # independent sampling route at the maximizing input
    N = 40000
    rng = np.random.default_rng(9)
    Y = product(bsc01, 4).sample(np.broadcast_to(ex.x, (N, 4)), rng)
    hits = slc.decode_batch(code, Y).sum(axis=0)
    exact_acc = slc.acceptance_exact(code, ex.x[None, :])[0]
    for m in range(code.M):
        lo, hi = slc.clopper_pearson(hits[m], N)
        assert lo - 1e-3 <= exact_acc[m] <= hi + 1e-3
    mc = slc.adversary_search(code, "exhaustive", samples=20000, seed=2, exact_budget=1)
    assert not mc.exact
    assert mc.lower <= ex.value + 1e-12
    assert abs(mc.value - ex.value) <= 0.02


def test_greedy_below_exhaustive(bsc01, sf01):
    for seed in range(5):
        cb = slc.random_codebook(bsc01, [0.5, 0.5], 6, 8, seed=seed)
        code = slc.make_code(bsc01, cb, 2, sf01, R4=0.1, eps1=0.4, eps2=0.2)
        ex = slc.adversary_search(code, "exhaustive")
        for s in ("coordinate-greedy", "random-restart"):
            assert slc.adversary_search(code, s, seed=seed).value <= ex.value + 1e-12


def test_exact_delta_D_dominates_probes(bsc01, sf01):
    cb = slc.random_codebook(bsc01, [0.5, 0.5], 5, 6, seed=8)
    code = slc.make_code(bsc01, cb, 2, sf01, R4=0.1, eps1=0.4, eps2=0.2)
    rep = slc.evaluate_security(code)
    probes = np.random.default_rng(0).integers(0, 2, (30, 5))
    sec = np.sort(slc.acceptance_exact(code, probes), axis=1)[:, -2]
    assert np.all(sec <= rep.delta_D + 1e-12)


# --- bounds ----------------------------------------------------------------------------------

def test_discrete_bound_shape(sf01):
    eps2 = 0.5
    edge = sf01.zeta1 * eps2 / 2
    assert slc.binding_bound_discrete(sf01, edge, eps2, 8) == np.inf
    assert slc.binding_bound_discrete(sf01, edge * (1 - 1e-9), eps2, 8) > 1e10
    b8 = slc.binding_bound_discrete(sf01, 0.1, eps2, 8)
    assert slc.binding_bound_discrete(sf01, 0.1, eps2, 16) == pytest.approx(b8 / 2)


def test_discrete_bound_dominates(bsc01, sf01):
    for seed in range(6):
        cb = slc.expurgate(slc.random_codebook(bsc01, [0.5, 0.5], 8, 16, seed=seed), 0.5)
        code = slc.make_code(bsc01, cb, 1, sf01, R4=0.1, eps1=0.1)
        ex = slc.adversary_search(code, "exhaustive")
        assert ex.value <= slc.binding_bound_discrete(sf01, 0.1, 0.5, 8)


@pytest.fixture(scope="module")
def awgn_family():
    ch = make_awgn_bpsk(1.0)
    sf, cert = scores.build_scores_awgn(ch)
    return ch, sf, cert


def test_continuous_bound_properties(awgn_family):
    _, _, cert = awgn_family
    eps2, t = 0.5, 0.25
    zb = cert.zetabar1(t, cert.zeta3 * eps2 / 4)
    # precondition 2 eps1 < (eps2/4) zetabar1 violated: first term alone is >= 1
    assert slc.binding_bound_continuous(cert, eps2 / 8 * zb * 1.5, eps2, 10, t) > 1
    eps1 = eps2 / 16 * zb
    vals = [slc.binding_bound_continuous(cert, eps1, eps2, n, t) for n in (10, 100, 10 ** 4, 10 ** 6)]
    assert np.all(np.diff(vals) <= 0)
    with pytest.raises(ValueError):
        slc.binding_bound_continuous(cert, eps1, eps2, 10, 0.6)


def test_continuous_adversary_below_bound(awgn_family):
    ch, sf, cert = awgn_family
    cb = slc.Codebook(np.array([[0, 0, 0, 0], [1, 1, 1, 1], [0, 1, 0, 1]]))
    eps2, t = 0.5, 0.25
    eps1 = eps2 / 16 * cert.zetabar1(t, cert.zeta3 * eps2 / 4)
    code = slc.SecureListCode(ch, cb, slc.DecoderParams(1, 0.4, eps1, (0.5, 0.5), 0.1, eps2), sf)
    res = slc.adversary_search(code, "coordinate-greedy", samples=2000, seed=1)
    bound = slc.binding_bound_continuous(cert, eps1, eps2, 4, t)
    assert res.lower <= res.value <= bound


def test_midpoint_adversary_gaussian_tails(awgn_family):
    ch, sf, _ = awgn_family
    R4, eps1 = 0.2, 0.6
    code = slc.SecureListCode(ch, slc.Codebook(np.array([[0], [1]])),
                              slc.DecoderParams(1, R4, eps1, (0.5, 0.5), R4, 0.5), sf)
    # acceptance regions in closed form (unit variance, means +1 and -1):
    # likelihood test  log2(2 / (1 + e^{-+2y})) >= R4,  score test (1 - (y -+ 1)^2) / (2 ln 2) >= -eps1
    y_lik = -0.5 * np.log(2 ** (1 - R4) - 1)
    s = np.sqrt(1 + 2 * np.log(2) * eps1)
    p0 = norm.cdf(1 + s) - norm.cdf(max(y_lik, 1 - s))
    p1 = norm.cdf(min(-y_lik, -1 + s)) - norm.cdf(-1 - s)
    grid = np.linspace(-4, 4, 8001)[:, None]
    acc = slc.decode_batch(code, grid)
    inside0 = (grid[:, 0] >= y_lik) & (np.abs(grid[:, 0] - 1) <= s)
    inside1 = (grid[:, 0] <= -y_lik) & (np.abs(grid[:, 0] + 1) <= s)
    assert np.array_equal(acc[:, 0], inside0) and np.array_equal(acc[:, 1], inside1)
    N = 200000
    Z = np.random.default_rng(3).standard_normal((N, 1))
    hits = slc._mc_acceptance(code, np.array([0.0]), Z, N)
    for h, p in zip(hits, (p0, p1)):
        lo, hi = slc.clopper_pearson(h, N)
        assert lo <= p <= hi


# --- trend ----------------------------------------------------------------------------------

def test_eps_A_trend(bsc01, sf01):
    # fixed rates R1 = 1/3, R2 = 1/6 with R1 - R2 < I(X;Y) at uniform input
    med = []
    for n, M, L in ((6, 4, 2), (12, 16, 4)):
        vals = []
        for seed in range(10):
            cb = slc.random_codebook(bsc01, [0.5, 0.5], n, M, seed=seed)
            code = slc.make_code(bsc01, cb, L, sf01)
            rep = slc.evaluate_security(code, mc_samples=4000, seed=seed, budget=1,
                                        adversary_budget=1, adversary="coordinate-greedy",
                                        adversary_samples=200)
            vals.append(rep.eps_A_avg)
        med.append(np.median(vals))
    assert med[1] <= med[0]
