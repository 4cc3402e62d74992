import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimwit.core import (
    Channel,
    Distribution,
    JointDistribution,
    binary_entropy,
    conditional_entropy,
    fano_penalty,
    mutual_information,
    shannon_entropy,
    validate_table,
)
from dimwit.errors import AlphabetTooSmall, NegativeEntry, OutOfRange, RowSumViolation, ShapeMismatch

from conftest import GAMMA, h2


def bsc_joint(gamma):
    return JointDistribution((0, 1), (0, 1),
                             [[gamma / 2, (1 - gamma) / 2], [(1 - gamma) / 2, gamma / 2]])


class TestValidateTable:
    def test_two_state_table_is_valid(self, two_state):
        assert two_state.num_measurements == 2
        assert two_state.num_preparations == 2
        assert two_state.p(1, 1, 1) == 0.5

    def test_row_sum_violation(self):
        with pytest.raises(RowSumViolation):
            validate_table({"alphabet": [0, 1], "probs": [[[0.5, 0.4]]]})

    def test_negative_entry(self):
        with pytest.raises(NegativeEntry):
            validate_table({"alphabet": [0, 1], "probs": [[[-0.1, 1.1]]]})

    def test_small_deviation_is_renormalized_and_reported(self):
        t = validate_table({"alphabet": [0, 1], "probs": [[[0.5, 0.5 + 5e-10]]]})
        assert t.probs[0, 0].sum() == pytest.approx(1.0, abs=1e-15)
        assert len(t.adjustments) == 1

    def test_ragged_rows_are_padded(self):
        t = validate_table({"alphabet": ["a", "b", "c"], "probs": [[[1.0], [0.5, 0.5]]]})
        assert t.probs.shape == (1, 2, 3)
        assert t.p("c", 0, 0) == 0.0

    @pytest.mark.parametrize("raw", [
        {"alphabet": [0, 1], "probs": [[[0.5, 0.5]], [[0.5, 0.5], [1, 0]]]},
        {"alphabet": [0, 1], "measurements": 3, "probs": [[[0.5, 0.5]]]},
        {"alphabet": [0, 0], "probs": [[[0.5, 0.5]]]},
        {"alphabet": [0], "probs": [[[0.5, 0.5]]]},
    ])
    def test_shape_errors(self, raw):
        with pytest.raises(ShapeMismatch):
            validate_table(raw)


class TestEntropies:
    def test_shannon_examples(self):
        assert shannon_entropy(Distribution.uniform("abcd")) == pytest.approx(2.0)
        assert shannon_entropy(Distribution((0, 1), [1.0, 0.0])) == 0.0
        oracle = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
        assert shannon_entropy(Distribution((0, 1), [0.75, 0.25])) == pytest.approx(oracle, abs=1e-12)
        assert oracle == pytest.approx(0.811278, abs=1e-6)

    def test_binary_entropy_examples(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(GAMMA) == pytest.approx(0.600876, abs=1e-6)
        assert binary_entropy(GAMMA) == pytest.approx(h2(GAMMA), abs=1e-14)

    @pytest.mark.parametrize("p", [-0.1, 1.2])
    def test_binary_entropy_range(self, p):
        with pytest.raises(OutOfRange):
            binary_entropy(p)

    def test_conditional_entropy_examples(self):
        ind = JointDistribution((0, 1), (0, 1), np.outer([0.3, 0.7], [0.6, 0.4]))
        assert conditional_entropy(ind) == pytest.approx(h2(0.3), abs=1e-12)
        det = JointDistribution((0, 1, 2), (0, 1, 2), np.diag([0.2, 0.3, 0.5]))
        assert conditional_entropy(det) == pytest.approx(0.0, abs=1e-15)

    def test_conditional_entropy_bsc_by_brute_force(self):
        j = bsc_joint(GAMMA)
        # H(X|Z) = -sum_{x,z} P(x,z) log P(x|z)
        pz = j.matrix.sum(axis=0)
        oracle = -sum(j.matrix[x, z] * math.log2(j.matrix[x, z] / pz[z])
                      for x in range(2) for z in range(2))
        assert conditional_entropy(j) == pytest.approx(oracle, abs=1e-12)
        assert oracle == pytest.approx(0.600876, abs=1e-6)

    def test_mutual_information_examples(self):
        ind = JointDistribution((0, 1), (0, 1), np.outer([0.5, 0.5], [0.1, 0.9]))
        assert mutual_information(ind) == pytest.approx(0.0, abs=1e-12)
        bij = JointDistribution(range(5), range(5), np.eye(5)[[2, 0, 4, 1, 3]] / 5)
        assert mutual_information(bij) == pytest.approx(math.log2(5), abs=1e-12)
        assert mutual_information(bsc_joint(GAMMA)) == pytest.approx(1 - h2(GAMMA), abs=1e-12)
        assert 1 - h2(GAMMA) == pytest.approx(0.399124, abs=1e-6)

    def test_fano_penalty_examples(self):
        assert fano_penalty(1.0, 2) == 0.0
        assert fano_penalty(0.5, 2) == 1.0
        assert fano_penalty(GAMMA, 2) == pytest.approx(0.600876, abs=1e-6)
        assert fano_penalty(0.25, 4) == pytest.approx(2.0, abs=1e-12)
        with pytest.raises(AlphabetTooSmall):
            fano_penalty(0.5, 1)


@st.composite
def distributions(draw, max_size=8):
    n = draw(st.integers(1, max_size))
    w = np.array(draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    if w.sum() == 0:
        w[0] = 1.0
    return Distribution(tuple(range(n)), w / w.sum())


@st.composite
def joints(draw):
    r = draw(st.integers(1, 4))
    c = draw(st.integers(1, 4))
    w = np.array(draw(st.lists(st.floats(0, 1), min_size=r * c, max_size=r * c))).reshape(r, c)
    if w.sum() == 0:
        w[0, 0] = 1.0
    return JointDistribution(tuple(range(r)), tuple(range(c)), w / w.sum())


@given(distributions())
def test_shannon_entropy_range(d):
    H = shannon_entropy(d)
    assert -1e-9 <= H <= math.log2(len(d.labels)) + 1e-9


@given(joints())
def test_conditioning_reduces_entropy(j):
    hx = shannon_entropy(j.input_marginal())
    assert mutual_information(j) >= -1e-9
    assert conditional_entropy(j) <= hx + 1e-9
    assert mutual_information(j) == pytest.approx(hx - conditional_entropy(j), abs=1e-9)


@given(st.floats(0, 1))
def test_binary_entropy_matches_shannon(p):
    assert binary_entropy(p) == pytest.approx(shannon_entropy(Distribution((0, 1), [p, 1 - p])), abs=1e-12)
    assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)


@settings(max_examples=60)
@given(st.integers(2, 6), st.floats(0, 1), distributions(max_size=6))
def test_fano_tight_on_extremal_joint(k, p, prior_d):
    # X from any prior; Z = X with prob p, otherwise uniform over the other k-1 symbols
    prior = np.zeros(k)
    m = min(k, len(prior_d.labels))
    prior[:m] = prior_d.mass[:m]
    prior /= prior.sum()
    W = np.full((k, k), (1 - p) / (k - 1))
    np.fill_diagonal(W, p)
    j = JointDistribution.from_channel(Distribution(tuple(range(k)), prior),
                                       Channel(tuple(range(k)), tuple(range(k)), W))
    assert conditional_entropy(j) <= fano_penalty(p, k) + 1e-9
    # equality needs the posterior to be extremal too, which a uniform prior gives
    uniform = JointDistribution.from_channel(Distribution.uniform(range(k)),
                                             Channel(tuple(range(k)), tuple(range(k)), W))
    assert conditional_entropy(uniform) == pytest.approx(fano_penalty(p, k), abs=1e-9)


def test_distribution_rejects_bad_mass():
    with pytest.raises(RowSumViolation):
        Distribution((0, 1), [0.5, 0.6])
    with pytest.raises(NegativeEntry):
        Distribution((0, 1), [1.5, -0.5])
    with pytest.raises(ShapeMismatch):
        Distribution((0, 1), [1.0])
