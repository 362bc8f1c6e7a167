import itertools

import numpy as np
import pytest

from seclist import commitment as cm
from seclist import info, scores, slc
from seclist.channel import make_bsc, make_channel, product


def _code(ch, cw, L=1, **kw):
    kw.setdefault("R4", 0.1)
    kw.setdefault("eps1", 0.5)
    kw.setdefault("eps2", 0.2)
    return slc.make_code(ch, slc.Codebook(np.asarray(cw)), L, **kw)


def _all_words(n):
    return np.array(list(itertools.product(range(2), repeat=n)))


# --- hashing -------------------------------------------------------------------------

def test_primes_and_rank():
    assert [q for q in range(20) if cm.is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert cm.rank_mod_p(np.array([[1, 1], [1, 1]]), 2) == 1
    assert cm.rank_mod_p(np.array([[1, 2], [2, 1]]), 3) == 1
    assert cm.rank_mod_p(np.array([[1, 2], [2, 1]]), 5) == 2
    with pytest.raises(ValueError):
        cm.sample_regular_hash(4, 3, 1, seed=0)
    with pytest.raises(ValueError):
        cm.sample_regular_hash(2, 2, 3, seed=0)


def test_full_dimension_is_bijection():
    for p, m in ((2, 4), (3, 2), (5, 2)):
        h = cm.sample_regular_hash(p, m, m, seed=1)
        assert sorted(h.table()) == list(range(p ** m))


@pytest.mark.parametrize("p,m,k", [(2, 4, 2), (2, 5, 3), (3, 3, 1), (5, 3, 2), (2, 8, 4)])
def test_fibers_equal(p, m, k):
    for seed in range(10):
        h = cm.sample_regular_hash(p, m, k, seed=seed)
        assert cm.rank_mod_p(h.matrix, p) == k
        counts = np.bincount(h.table(), minlength=p ** k)
        assert np.all(counts == p ** (m - k))


def test_collision_rate_universal():
    p, m, k, seeds = 2, 4, 2, 1000
    pairs = list(itertools.combinations(range(p ** m), 2))
    coll = 0
    for s in range(seeds):
        t = cm.sample_regular_hash(p, m, k, seed=s).table()
        coll += sum(t[a] == t[b] for a, b in pairs)
    N = seeds * len(pairs)
    rate = coll / N
    assert rate <= p ** -k + 3 * np.sqrt(p ** -k * (1 - p ** -k) / N)
    # every fixed pair collides with probability <= p^-k over the seed
    per_pair = np.zeros(len(pairs))
    for s in range(seeds):
        t = cm.sample_regular_hash(p, m, k, seed=s).table()
        per_pair += [t[a] == t[b] for a, b in pairs]
    sig = np.sqrt(0.25 * 0.75 / seeds)
    assert np.all(per_pair / seeds <= 0.25 + 4 * sig)


def test_scheme_size_check(bsc01):
    code = _code(bsc01, _all_words(3)[:6])
    with pytest.raises(ValueError):
        cm.CommitmentScheme(code, cm.sample_regular_hash(2, 3, 1, seed=0))


# --- protocol ------------------------------------------------------------------------

def test_protocol_noiseless():
    ch = make_bsc(0.0)
    code = _code(ch, _all_words(2), R4=0.0, eps1=1e6)
    scheme = cm.CommitmentScheme(code, cm.sample_regular_hash(2, 2, 1, seed=3))
    for k in (0, 1):
        for s in range(5):
            tr = cm.run_protocol(scheme, k=k, seed=s)
            assert tr.verdict == "ACC" and tr.recovered_key == k
            assert scheme.hash.key_of(tr.message)[0] == k
    with pytest.raises(ValueError):
        cm.run_protocol(scheme, k=2, seed=0)


def test_dishonest_reveal_outside_list_rejected():
    ch = make_bsc(0.0)
    code = _code(ch, _all_words(2), R4=0.0, eps1=1e6)
    scheme = cm.CommitmentScheme(code, cm.sample_regular_hash(2, 2, 1, seed=3))
    tr = cm.run_protocol(scheme, honest=False, adversary_input=np.array([0, 0]), reveal=3, seed=1)
    assert tr.bob_list == (0,) and tr.verdict == "REJ" and tr.recovered_key is None
    with pytest.raises(ValueError):
        cm.run_protocol(scheme, honest=False, reveal=1, seed=1)


def test_honest_acceptance_rate(bsc01):
    cb = slc.random_codebook(bsc01, [0.5, 0.5], 6, 8, seed=2)
    code = slc.make_code(bsc01, cb, 2, R4=0.2, eps1=0.5, eps2=0.2)
    scheme = cm.CommitmentScheme(code, cm.sample_regular_hash(2, 3, 1, seed=0))
    rep = slc.evaluate_security(code)
    rng = np.random.default_rng(0)
    N = 3000
    acc = sum(cm.run_protocol(scheme, seed=rng).verdict == "ACC" for _ in range(N))
    lo, hi = slc.clopper_pearson(acc, N)
    assert lo <= 1 - rep.eps_A_avg <= hi


def test_binding_inherited(bsc01):
    cb = slc.random_codebook(bsc01, [0.5, 0.5], 5, 8, seed=6)
    code = slc.make_code(bsc01, cb, 3, R4=0.0, eps1=0.8, eps2=0.2)
    rep = slc.evaluate_security(code)
    xs = _all_words(5)
    dbl = cm.double_accept_exact(code, xs)
    sec = np.sort(slc.acceptance_exact(code, xs), axis=1)[:, -2]
    assert np.all(dbl <= sec + 1e-12)
    assert dbl.max() <= rep.delta_D + 1e-12


# --- concealing ----------------------------------------------------------------------------

def test_concealing_trivial_cases(useless):
    # concealing depends on channel and codebook only; a useless channel has no
    # certified scores, so a zero table stands in
    flat = scores.ScoreFamily("table", 1.0, 0.0, table=np.zeros((2, 2)))
    code = slc.SecureListCode(useless, slc.Codebook(_all_words(2)),
                              slc.DecoderParams(1, -1.0, 0.5, (0.5, 0.5)), flat)
    sc = cm.CommitmentScheme(code, cm.sample_regular_hash(2, 2, 1, seed=0))
    rep = cm.concealing_distance(sc)
    assert rep.delta_E == pytest.approx(0.0, abs=1e-15)
    # zero distance means the key is hidden: H(K|Y) = log |K|
    W = product(useless, 2).output_matrix(code.codebook.codewords) / code.M
    keys = sc.hash.table()
    JK = np.stack([W[keys == k].sum(axis=0) for k in range(2)])
    assert info.cond_entropy_my(JK) == pytest.approx(1.0, abs=1e-9)

    noiseless = make_bsc(0.0)
    code = _code(noiseless, _all_words(2), R4=0.0, eps1=1e6)
    sc = cm.CommitmentScheme(code, cm.sample_regular_hash(2, 2, 2, seed=0))
    assert cm.concealing_distance(sc).delta_E == pytest.approx(1.0)


def test_concealing_hand_mixture(bsc01):
    words = _all_words(2)
    code = _code(bsc01, words)
    h = cm.sample_regular_hash(2, 2, 1, seed=5)
    sc = cm.CommitmentScheme(code, h)
    keys = h.table()
    W = bsc01.pmf
    ys = _all_words(2)
    mix = np.zeros((2, 4))
    for m, cw in enumerate(words):
        for j, y in enumerate(ys):
            mix[keys[m], j] += W[cw[0], y[0]] * W[cw[1], y[1]] / 2
    want = 0.5 * np.abs(mix[0] - mix[1]).sum()
    rep = cm.concealing_distance(sc)
    assert rep.delta_E == pytest.approx(want, abs=1e-12)
    assert rep.delta_E <= 2 * rep.delta_E_bar + 1e-12


def test_concealing_budget(bsc01):
    code = _code(bsc01, _all_words(3))
    sc = cm.CommitmentScheme(code, cm.sample_regular_hash(2, 3, 1, seed=0))
    with pytest.raises(slc.BudgetExceeded):
        cm.concealing_distance(sc, budget=10)


def test_hash_bound_formula():
    p, m, k = 2, 8, 1
    hM = m * np.log2(p)  # independent output: H_{1+t}(M|Y) = log M
    for t in (0.2, 0.5, 1.0):
        want = 3 * p / (p - 1) * p ** (t * k / (1 + t)) * (p ** m) ** (-t / (1 + t))
        assert cm.hash_bound_value(p, k, t, hM) == pytest.approx(want)
    assert cm.hash_bound_value(p, k, 1.0, hM) < 1
    assert cm.hash_bound_value(p, k, 1e-9, hM) == pytest.approx(6.0, rel=1e-6)


def test_hash_bound_dominates_small_instance(bsc01):
    cb = slc.random_codebook(bsc01, [0.5, 0.5], 3, 8, seed=4)
    code = slc.make_code(bsc01, cb, 2, R4=0.1, eps1=0.5, eps2=0.2)
    sc = cm.CommitmentScheme(code, cm.sample_regular_hash(2, 3, 1, seed=4))
    hb = cm.hash_bound(sc)
    assert len(hb.keys) == 1 and len(hb.messages) == 4
    kept = cm.CommitmentScheme(code, sc.hash, hb.keys)
    assert cm.concealing_distance(kept).delta_E <= hb.bound
    with pytest.raises(ValueError):
        cm.hash_bound(sc, t_grid=[0.0, 0.5])


def test_key_selection_markov(bsc01):
    # kept keys lie within (p/(p-1)) of the average distance, so the restricted
    # concealing distance is at most 2 (p/(p-1)) times the average
    rng = np.random.default_rng(3)
    for p, m, k, n in ((2, 4, 2, 3), (2, 4, 3, 2), (3, 2, 1, 3)):
        for _ in range(3):
            ch = make_bsc(0.1) if p == 2 else make_channel(rng.dirichlet(np.ones(3), size=2))
            cw = rng.integers(0, 2, (p ** m, n))
            code = slc.make_code(ch, slc.Codebook(cw), 1, R4=0.0, eps1=1.0, eps2=0.2)
            sc = cm.CommitmentScheme(code, cm.sample_regular_hash(p, m, k, seed=int(rng.integers(99))))
            hb = cm.hash_bound(sc)
            full = cm.concealing_distance(sc)
            c = p / (p - 1)
            assert max(hb.distances[j] for j in hb.keys) <= c * full.delta_E_bar + 1e-12
            kept = cm.concealing_distance(cm.CommitmentScheme(code, sc.hash, hb.keys))
            assert kept.delta_E <= 2 * c * full.delta_E_bar + 1e-12


def test_seed_search_record(bsc01):
    cb = slc.random_codebook(bsc01, [0.5, 0.5], 3, 8, seed=1)
    code = slc.make_code(bsc01, cb, 2, R4=0.1, eps1=0.5, eps2=0.2)
    scheme, rec = cm.select_hash_seed(code, 2, 3, 2, seeds=range(8))
    assert rec["delta_E_bar_best"] <= rec["delta_E_bar_mean"] + 1e-15
    assert rec["seeds_tried"] == 8 and len(scheme.key_set) == 2


# --- leftover-hash lower bound --------------------------------------------------------------------

def test_leftover_cases():
    h = cm.sample_regular_hash(2, 3, 2, seed=0)
    indep = np.outer(np.full(8, 1 / 8), [0.2, 0.3, 0.5])
    g = np.linspace(0, 2, 9)  # up to log |Im f|
    ok, lhs, rhs = cm.leftover_lower_bound_check(indep, h, g)
    assert ok and lhs == pytest.approx(0.0, abs=1e-15) and np.all(rhs <= 1e-15)

    hk = cm.sample_regular_hash(2, 3, 3, seed=0)
    det = np.diag(np.full(8, 1 / 8))
    ok, lhs, rhs = cm.leftover_lower_bound_check(det, hk)
    assert ok and lhs == pytest.approx(1 - 1 / 8)
    assert lhs >= rhs.max()


def test_leftover_random_joints():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p, m = (2, 3) if rng.random() < 0.5 else (3, 2)
        k = int(rng.integers(1, m + 1))
        J = rng.dirichlet(np.ones(p ** m * 4) * 0.3).reshape(p ** m, 4)
        ok, lhs, rhs = cm.leftover_lower_bound_check(J, cm.sample_regular_hash(p, m, k, seed=int(rng.integers(1000))))
        assert ok
