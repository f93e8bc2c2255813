from fractions import Fraction

import numpy as np
import pytest

from truncbound import Kind, ModelSpec, closed_form_stationary, stationary_oracle, transition_row, validate_kernel, window
from truncbound.bounds import tv_diameter
from truncbound.censor import TruncationSpec, build_nu_table, censor
from truncbound.errors import InvalidModel, InvalidState, Unavailable, Unstable
from truncbound.models import _row_fractions, neighbors, state_space

BD = ModelSpec("birth_death", {"p": 0.3})
TANDEM = ModelSpec("tandem_2d", {"a": 0.2, "d1": 0.3, "d2": 0.3})
NCD = ModelSpec("ncd_blocks", {"k": 3, "b": 4, "eps": 0.01})
RD = ModelSpec("random_dense", {"n": 10}, seed=7)


class TestTransitionRow:
    def test_birth_death_reflecting_zero(self):
        assert transition_row(BD, 0) == [((0,), 0.7), ((1,), 0.3)]

    def test_birth_death_interior(self):
        assert transition_row(BD, 5) == [((4,), 0.7), ((6,), 0.3)]

    def test_tandem_origin(self):
        row = transition_row(TANDEM, (0, 0))
        assert all(min(lab) >= 0 for lab, _ in row)
        assert sum(w for _, w in row) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("m,x", [(BD, (3,)), (TANDEM, (2, 1)), (TANDEM, (0, 4)), (NCD, (1, 2)), (RD, (4,))])
    def test_exact_rational_rows(self, m, x):
        assert sum(w for _, w in _row_fractions(m, x)) == Fraction(1)

    def test_invalid_state(self):
        with pytest.raises(InvalidState):
            transition_row(BD, -1)
        with pytest.raises(InvalidState):
            transition_row(NCD, (3, 0))

    def test_deterministic(self):
        assert transition_row(RD, 3) == transition_row(ModelSpec("random_dense", {"n": 10}, seed=7), 3)

    def test_neighbors(self):
        assert neighbors(BD, 0) == [(0,), (1,)]


class TestModelSpec:
    def test_bad_probability(self):
        with pytest.raises(InvalidModel):
            ModelSpec("birth_death", {"p": 1.5})

    def test_tandem_overfull(self):
        with pytest.raises(InvalidModel):
            ModelSpec("tandem_2d", {"a": 0.5, "d1": 0.4, "d2": 0.3})

    def test_ncd_coupling(self):
        with pytest.raises(InvalidModel):
            ModelSpec("ncd_blocks", {"eps": 0.0})

    def test_unknown_family(self):
        with pytest.raises(InvalidModel):
            ModelSpec("mm1")

    def test_random_needs_seed(self):
        with pytest.raises(InvalidModel):
            ModelSpec("random_dense", {"n": 3})

    def test_dict_round_trip(self):
        assert ModelSpec.from_dict(RD.to_dict()) == RD


class TestWindow:
    def test_birth_death_leak(self):
        A, P = window(BD, 4)
        assert P.kind is Kind.SUBSTOCHASTIC
        assert P.row_sums()[3] == pytest.approx(0.7, abs=1e-15)
        assert np.all(P.row_sums()[:3] == 1.0)

    def test_tandem_interior_rows(self):
        A, P = window(TANDEM, 6)
        sums = P.row_sums()
        for lab, s in zip(A, sums):
            if max(lab) < 4:
                assert s == pytest.approx(1.0, abs=1e-15)

    def test_random_dense_whole_space(self):
        A, P = window(RD, 10)
        assert len(A) == 10 and P.kind is Kind.STOCHASTIC
        assert validate_kernel(P, Kind.STOCHASTIC).passed

    def test_rows_are_exact_subrows(self):
        A, P = window(TANDEM, 5)
        dense = P.to_dense()
        for i, x in enumerate(A):
            row = dict(transition_row(TANDEM, x))
            for j, y in enumerate(A):
                assert dense[i, j] == row.get(y, 0.0)

    def test_reflect_is_stochastic(self):
        _, P = window(BD, 8, boundary="reflect")
        assert P.kind is Kind.STOCHASTIC and validate_kernel(P).passed


class TestClosedForm:
    def test_ratios(self):
        pi = closed_form_stationary(BD, [0, 1, 2]).weights
        assert pi[1] / pi[0] == pytest.approx(3 / 7, rel=1e-14)
        assert pi[2] / pi[1] == pytest.approx(3 / 7, rel=1e-14)

    def test_matches_oracle_on_large_window(self, backend):
        _, P = window(BD, 61, boundary="reflect")
        pi = stationary_oracle(P).weights
        ratios = pi[1:] / pi[:-1]
        assert np.abs(ratios - 3 / 7).max() <= 1e-6
        np.testing.assert_allclose(pi[:3] / pi[:3].sum(), closed_form_stationary(BD, [0, 1, 2]).weights, rtol=1e-12)

    def test_unstable(self):
        with pytest.raises(Unstable):
            closed_form_stationary(ModelSpec("birth_death", {"p": 0.5}), [0])

    def test_unavailable(self):
        with pytest.raises(Unavailable):
            closed_form_stationary(TANDEM, [(0, 0)])


def test_ncd_weak_coupling_shrinks_within_block_diameter(backend):
    """Reported trend only; no rate is asserted."""
    diam = []
    for eps in (0.1, 0.01, 0.001):
        m = ModelSpec("ncd_blocks", {"k": 3, "b": 4, "eps": eps})
        full = state_space(m)
        block = [(0, i) for i in range(4)]
        A = [lab for lab in full if lab[0] < 2]
        _, P = window(m, 8)
        nt = build_nu_table(censor(P, TruncationSpec(A, block)))
        diam.append(tv_diameter(nt).diameter)
    assert all(d >= 0.0 for d in diam)
