import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import logsumexp

from chains import chain_a, chain_b, chain_d, random_spec
from metastab.asymptotics import ONE, evaluate, log_evaluate, make
from metastab.chain_model import ChainSpec, instantiate_generator
from metastab.hierarchy import (
    build_hierarchy,
    cluster_invariant_measure,
    hierarchy_report,
    inverse_transition_rates,
)
from metastab.verify import exact_stationary
from properties import check_tree_invariants


def sub_generator(spec, members, eps):
    """Generator of the chain restricted to ``members`` (rates leaving are dropped)."""
    G = instantiate_generator(spec, eps).entries[np.ix_(members, members)].copy()
    np.fill_diagonal(G, 0.0)
    np.fill_diagonal(G, -G.sum(axis=1))
    return G


class TestInverseTransitionRates:
    def test_two_exits(self):
        T = inverse_transition_rates([[None, make(1, 0, 1), make(2, 0, 1)], [make(1, 0, 1)] * 3, [make(1, 0, 1)] * 3])
        assert T[0] == make(1 / 3, 0, -1)
        eps = 1e-3
        log_exact = -np.logaddexp(log_evaluate(make(1, 0, 1), eps), log_evaluate(make(2, 0, 1), eps))
        assert log_evaluate(T[0], eps) == pytest.approx(log_exact, abs=1e-12)

    def test_single_exit(self):
        T = inverse_transition_rates(chain_a().rates)
        assert T == [make(1, 0, -1), make(1, 0, -2)]

    def test_top_rank_absent(self, hier_a):
        assert hier_a.levels[-1].T is None
        assert hier_a.T(1, 0) is None


class TestClusterMeasure:
    def test_chain_a(self):
        spec = chain_a()
        pairs = cluster_invariant_measure(spec.rates, [0.5, 0.5])
        assert pairs[0][0] == make(1, 0, 1)
        assert pairs[1][0] == ONE
        assert [lim for _, lim in pairs] == [0.0, 1.0]
        exact = exact_stationary(instantiate_generator(spec, 0.05))
        approx = [evaluate(m, 0.05) for m, _ in pairs]
        np.testing.assert_allclose(approx, exact, rtol=1e-8)

    def test_chain_b(self):
        spec = chain_b()
        pairs = cluster_invariant_measure(spec.rates, [1 / 2, 1 / 6, 1 / 3])
        np.testing.assert_allclose([lim for _, lim in pairs], [0, 1 / 3, 2 / 3], atol=1e-12)
        exact = exact_stationary(instantiate_generator(spec, 0.1))
        approx = np.array([evaluate(m, 0.1) for m, _ in pairs])
        assert np.all(np.abs(approx - exact) / exact <= 0.15)

    def test_singleton(self):
        assert cluster_invariant_measure([[None]], [1.0]) == [(ONE, 1.0)]


class TestChainD:
    def test_shape(self, hier_d):
        assert hier_d.sizes == (4, 2, 1)
        assert hier_d.rho == 2
        assert hier_d.tree.resolve(1, 0) == {0, 1}
        assert hier_d.tree.resolve(1, 1) == {2, 3}
        assert hier_d.tree.resolve(2, 0) == {0, 1, 2, 3}

    def test_reduced_rates(self, hier_d):
        Q1 = hier_d.levels[1].Q
        assert Q1[0][1] == make(0.5, 0, 6)
        assert Q1[1][0] == make(0.5, 0, 8)

    def test_reduced_rates_log_oracle(self, hier_d):
        # mu of each rank-0 cluster is exactly (1/2, 1/2) by symmetry
        spec, eps = chain_d(), 1e-3
        for k, l, lo, hi in [(0, 1, (0, 1), (2, 3)), (1, 0, (2, 3), (0, 1))]:
            terms = [math.log(0.5) + log_evaluate(spec.rates[i][j], eps) for i in lo for j in hi]
            assert log_evaluate(hier_d.levels[1].Q[k][l], eps) == pytest.approx(logsumexp(terms), abs=1e-12)

    def test_tilde_rates(self, hier_d):
        Qt = hier_d.levels[1].Qtilde
        assert Qt[(0, 2)] == make(0.5, 0, 6)
        assert Qt[(0, 3)] == make(1, 0, 9)
        spec, eps = chain_d(), 1e-3
        for j in (2, 3):
            terms = [math.log(0.5) + log_evaluate(spec.rates[i][j], eps) for i in (0, 1)]
            assert log_evaluate(Qt[(0, j)], eps) == pytest.approx(logsumexp(terms), abs=1e-12)

    def test_inverse_rates(self, hier_d):
        assert hier_d.T(1, 0) == make(2, 0, -6)
        assert hier_d.T(1, 1) == make(2, 0, -8)

    def test_mu(self, hier_d):
        assert hier_d.mu_limit(0, 0, 0) == hier_d.mu_limit(0, 0, 1) == 0.5
        assert hier_d.mu_limit(1, 0, 0) == 0.0
        assert hier_d.mu_limit(1, 0, 1) == 1.0

    def test_reduced_rate_convergence(self, hier_d):
        """Symbolic Q^1 against numeric rates averaged over exact cluster laws."""
        spec = chain_d()
        clusters = [[0, 1], [2, 3]]
        for k, l in [(0, 1), (1, 0)]:
            errs = []
            for eps in (0.2, 0.1, 0.05):
                G = instantiate_generator(spec, eps).entries
                mu_hat = exact_stationary(sub_generator(spec, clusters[k], eps))
                numeric = sum(mu_hat[a] * G[i, j] for a, i in enumerate(clusters[k]) for j in clusters[l])
                errs.append(abs(evaluate(hier_d.levels[1].Q[k][l], eps) / numeric - 1))
            assert errs[0] > errs[1] > errs[2]
            assert errs[2] < 1e-3

    def test_top_measure_vs_stationary(self, hier_d):
        """Rank-1 weights against exact stationary mass of each rank-1 cluster."""
        errs = []
        for eps in (0.2, 0.1, 0.05):
            pi = exact_stationary(instantiate_generator(chain_d(), eps))
            mass = np.array([pi[[0, 1]].sum(), pi[[2, 3]].sum()])
            approx = np.array([evaluate(hier_d.levels[1].mu[0][i][0], eps) for i in (0, 1)])
            errs.append(np.max(np.abs(approx - mass) / mass))
        assert errs[0] > errs[1] > errs[2]


class TestBuild:
    def test_one_state(self):
        h = build_hierarchy(ChainSpec.from_rates(["only"], {}))
        assert h.rho == 0 and h.sizes == (1,)

    def test_chain_a(self, hier_a):
        assert hier_a.rho == 1
        assert hier_a.tree.resolve(1, 0) == {0, 1}
        assert hier_a.levels[0].Q == [list(r) for r in chain_a().rates]

    def test_chain_b(self, hier_b):
        assert hier_b.rho == 1
        np.testing.assert_allclose([hier_b.mu_limit(0, 0, i) for i in range(3)], [0, 1 / 3, 2 / 3], atol=1e-12)

    def test_transient_singleton_rates(self):
        # state 3 exits to {1,2} and is a transient singleton with mu = 1
        spec = ChainSpec.from_rates(
            ["1", "2", "3"],
            {(0, 1): (1, 0, 1), (1, 0): (1, 0, 1), (0, 2): (1, 0, 3), (1, 2): (1, 0, 3), (2, 0): (1, 0, 2), (2, 1): (1, 0, 2)},
        )
        h = build_hierarchy(spec)
        assert h.sizes == (3, 2, 1)
        assert h.levels[0].mu[1] == {2: (ONE, 1.0)}
        assert h.levels[1].Q[1][0] == make(2, 0, 2)

    def test_ancestors(self, hier_d):
        assert hier_d.tree.ancestors(2) == [2, 1, 0]
        assert hier_d.tree.parent(0, 3) == 1

    @pytest.mark.parametrize("eps_pair", [(0.1, 0.05)])
    @pytest.mark.parametrize("make_spec", [chain_a, chain_b])
    def test_cluster_measure_convergence(self, make_spec, eps_pair):
        spec = make_spec()
        h = build_hierarchy(spec)
        m = h.levels[0].mu[0]
        errs = []
        for eps in eps_pair:
            exact = exact_stationary(instantiate_generator(spec, eps))
            approx = np.array([evaluate(m[i][0], eps) for i in range(spec.N)])
            errs.append(np.abs(approx - exact) / exact)
        assert np.all(errs[1] < errs[0])
        assert np.all(errs[1] <= 0.10)


def test_tree_invariants_random():
    assert check_tree_invariants(np.random.default_rng(31337), 100) == 100


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_rank1_rates_are_closed_form(seed):
    h = build_hierarchy(random_spec(np.random.default_rng(seed), 2, 7))
    for lv in h.levels:
        for (k, j), q in lv.Qtilde.items():
            assert not q.is_zero and j not in h.tree.resolve(lv.rank, k)
        for k, row in enumerate(lv.Q):
            for l, q in enumerate(row):
                assert q.is_zero == (k == l)


def test_report(hier_d):
    rep = hierarchy_report(hier_d)
    json.dumps(rep)
    assert rep["rho"] == 2 and rep["n"] == [4, 2, 1]
    assert rep["ranks"][1]["clusters"] == [["s1", "s2"], ["s3", "s4"]]
