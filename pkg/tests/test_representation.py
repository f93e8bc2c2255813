import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from truncbound import (
    Distribution,
    Kind,
    Measure,
    SparseKernel,
    StateSpace,
    TruncationSpec,
    backward_map,
    build_nu_table,
    censor,
    conditional_distribution,
    dominates,
    forward_decomposition,
    forward_map,
    mixture,
    nu_table,
    restrict,
    stationary_oracle,
    validate_kernel,
)
from truncbound.errors import (
    DimensionMismatch,
    FundamentalDiverges,
    NotDominating,
    NotStationary,
    NotUniqueStationary,
    ValidationError,
    ZeroMass,
)

from conftest import random_irreducible, random_substochastic

NU2 = nu_table([[8 / 3, 4 / 3], [4 / 3, 8 / 3]])
G_QUARTER = SparseKernel.from_dense([[0.25, 0.25], [0.25, 0.25]])


def dense(K):
    return SparseKernel.from_dense(K)


class TestDistribution:
    def test_rejects_bad_mass(self):
        with pytest.raises(ValidationError):
            Distribution([0.5, 0.6])
        with pytest.raises(ValidationError):
            Distribution([1.5, -0.5])

    def test_measure_unnormalized(self):
        assert Measure([2.0, 3.0]).total() == 5.0

    def test_space_size(self):
        with pytest.raises(DimensionMismatch):
            Distribution([1.0], StateSpace.range(2))


class TestMixture:
    def test_point_mass(self):
        assert np.array_equal(mixture([0.0, 1.0], NU2).weights, NU2.nu[1])

    def test_uniform(self):
        np.testing.assert_allclose(mixture([0.5, 0.5], NU2).weights, [0.5, 0.5], rtol=1e-15)

    def test_weighted(self):
        # 0.25 * 2/3 + 0.75 * 1/3 = 5/12
        np.testing.assert_allclose(mixture([0.25, 0.75], NU2).weights, [5 / 12, 7 / 12], rtol=1e-15)

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            mixture([1.0], NU2)


class TestForward:
    def test_single_state(self, backend):
        parts = forward_decomposition(dense([[1.0]]), dense([[0.5]]), [1.0])
        assert parts.pi2.weights.tolist() == [0.5]
        assert parts.eta.weights.tolist() == [1.0]

    def test_two_state(self, backend):
        P = SparseKernel.from_dense([[0.5, 0.5], [0.5, 0.5]], Kind.STOCHASTIC)
        nt = build_nu_table(G_QUARTER)
        np.testing.assert_allclose(nt.g, [2.0, 2.0], rtol=1e-15)
        parts = forward_decomposition(P, G_QUARTER, [0.5, 0.5], nt)
        np.testing.assert_allclose(parts.pi2.weights, [0.25, 0.25], rtol=1e-15)
        np.testing.assert_allclose(parts.eta.weights, [0.5, 0.5], rtol=1e-15)
        np.testing.assert_allclose(mixture(parts.eta, nt).weights, [0.5, 0.5], rtol=1e-15)

    def test_stochastic_g_diverges(self, backend):
        P = SparseKernel.from_dense([[0.5, 0.5], [0.5, 0.5]], Kind.STOCHASTIC)
        with pytest.raises(FundamentalDiverges):
            forward_map(P, P, [0.5, 0.5])

    def test_not_stationary(self):
        P = SparseKernel.from_dense([[0.0, 1.0], [0.5, 0.5]], Kind.STOCHASTIC)
        with pytest.raises(NotStationary):
            forward_map(P, dense([[0.0, 0.5], [0.0, 0.0]]), [0.5, 0.5])

    def test_not_dominating(self):
        P = SparseKernel.from_dense([[0.5, 0.5], [0.5, 0.5]], Kind.STOCHASTIC)
        with pytest.raises(NotDominating):
            forward_map(P, dense([[0.6, 0.0], [0.0, 0.0]]), [0.5, 0.5])

    def test_intermediate_identities(self, backend):
        rng = np.random.default_rng(3)
        Pstar = SparseKernel.from_dense(random_irreducible(rng, 12), Kind.STOCHASTIC)
        pi_star = stationary_oracle(Pstar)
        S = [0, 2, 5, 6, 9]
        A = StateSpace.range(12).labels[:10]
        G = censor(restrict(Pstar, np.arange(10), np.arange(10)), TruncationSpec(A, [(i,) for i in S]))
        P = censor(Pstar, TruncationSpec(StateSpace.range(12), [(i,) for i in S])).G.with_kind(Kind.STOCHASTIC)
        pi = conditional_distribution(pi_star, S)
        parts = forward_decomposition(P, G, pi)
        Gd = G.G.to_dense()
        np.testing.assert_allclose(parts.pi1.weights + parts.pi2.weights, pi.weights, atol=1e-15)
        np.testing.assert_allclose(parts.pi1.weights, parts.pi1.weights @ Gd + parts.kappa.weights, atol=1e-15)


class TestBackward:
    def test_single_state(self, backend):
        P, mu = backward_map([1.0], dense([[0.5]]))
        assert P.to_dense().tolist() == [[1.0]] and mu.weights.tolist() == [1.0]

    def test_uniform(self, backend):
        P, mu = backward_map([0.5, 0.5], G_QUARTER)
        np.testing.assert_allclose(P.to_dense(), [[0.5, 0.5], [0.5, 0.5]], rtol=1e-15)
        np.testing.assert_allclose(mu.weights, [0.5, 0.5], rtol=1e-15)

    def test_point_mass(self, backend):
        # c = 1/g(0) = 1/2, phi = e0, deficiency 0.5 routed to state 0
        P, mu = backward_map([1.0, 0.0], G_QUARTER)
        np.testing.assert_allclose(P.to_dense(), [[0.75, 0.25], [0.75, 0.25]], rtol=1e-15)
        np.testing.assert_allclose(mu.weights, [0.75, 0.25], rtol=1e-15)
        assert np.abs(mu.weights @ P.to_dense() - mu.weights).sum() <= 1e-15


class TestStationaryOracle:
    def test_identity_not_unique(self):
        with pytest.raises(NotUniqueStationary):
            stationary_oracle(SparseKernel.from_dense(np.eye(2), Kind.STOCHASTIC))

    def test_periodic(self, backend):
        pi = stationary_oracle(SparseKernel.from_dense([[0.0, 1.0], [1.0, 0.0]], Kind.STOCHASTIC))
        assert pi.weights.tolist() == [0.5, 0.5]

    def test_random_irreducible(self, backend):
        P = random_irreducible(np.random.default_rng(20), 20)
        pi = stationary_oracle(SparseKernel.from_dense(P, Kind.STOCHASTIC)).weights
        assert np.abs(pi @ P - pi).sum() <= 1e-10

    def test_transient_states_get_zero(self, backend):
        P = SparseKernel.from_dense([[0.5, 0.5, 0.0], [0.0, 0.2, 0.8], [0.0, 0.6, 0.4]], Kind.STOCHASTIC)
        pi = stationary_oracle(P).weights
        assert pi[0] == 0.0
        np.testing.assert_allclose(pi[1:], [0.6 / 1.4, 0.8 / 1.4], rtol=1e-14)


class TestConditional:
    def test_uniform(self):
        assert conditional_distribution([0.25] * 4, [0, 1]).weights.tolist() == [0.5, 0.5]

    def test_zero_mass(self):
        with pytest.raises(ZeroMass):
            conditional_distribution([0.0, 0.0, 1.0], [0, 1])

    def test_geometric(self):
        rho = 3 / 7
        full = (1 - rho) * rho ** np.arange(10)
        full /= full.sum()
        got = conditional_distribution(full, range(5)).weights
        # closed form: rho^n / sum_{k<5} rho^k
        expected = rho ** np.arange(5) * (1 - rho) / (1 - rho ** 5)
        np.testing.assert_allclose(got, expected, rtol=1e-14)


def _truncated_instance(rng, n):
    Pd = random_irreducible(rng, n, density=rng.uniform(0.1, 0.6))
    Pstar = SparseKernel.from_dense(Pd, Kind.STOCHASTIC)
    full = StateSpace.range(n)
    perm = rng.permutation(n)
    s = max(1, n // 2)
    S_idx, A_idx = np.sort(perm[:s]), np.sort(perm[: s + int(rng.integers(0, n - s))])
    S = [full.labels[i] for i in S_idx]
    G = censor(restrict(Pstar, A_idx, A_idx), TruncationSpec([full.labels[i] for i in A_idx], S))
    P = censor(Pstar, TruncationSpec(full, S)).G.with_kind(Kind.STOCHASTIC)
    pi = conditional_distribution(stationary_oracle(Pstar), S_idx)
    return P, G, pi


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 50), st.integers(0, 2**32 - 1))
def test_forward_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    P, G, pi = _truncated_instance(rng, n)
    nt = build_nu_table(G)
    eta = forward_map(P, G, pi, nt)
    assert abs(eta.total() - 1.0) <= 1e-9
    assert np.abs(mixture(eta, nt).weights - pi.weights).sum() <= 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_backward_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    G = SparseKernel.from_dense(random_substochastic(rng, n, 0.95, density=0.5))
    nt = build_nu_table(G)
    gamma = rng.dirichlet(np.ones(n))
    P, mu = backward_map(gamma, G, nt)
    assert validate_kernel(P, Kind.STOCHASTIC, tol=1e-12).passed
    assert dominates(P, G)
    assert np.abs(mu.weights @ P.to_dense() - mu.weights).sum() <= 1e-10
    eta = forward_map(P, G, mu, nt)
    assert np.abs(mixture(eta, nt).weights - mu.weights).sum() <= 1e-8
