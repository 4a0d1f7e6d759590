import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.twolevel.models import QuadratureRule, TwoLevelDataset


class TestTwoLevelDataset:
    def test_valid(self):
        data = TwoLevelDataset(n=3, m=5, y=[0, 5, 2], theta0=0.5, seed=7)
        np.testing.assert_array_equal(data.y_array(), [0, 5, 2])

    def test_counts_sorted(self):
        values, counts = TwoLevelDataset(n=5, m=4, y=[3, 1, 3, 0, 3], theta0=0.5, seed=1).counts()
        np.testing.assert_array_equal(values, [0, 1, 3])
        np.testing.assert_array_equal(counts, [1, 1, 3])

    def test_length_must_match(self):
        with pytest.raises(ValidationError, match="expected 3 counts"):
            TwoLevelDataset(n=3, m=5, y=[1, 2], theta0=0.5, seed=0)

    def test_counts_in_range(self):
        with pytest.raises(ValidationError):
            TwoLevelDataset(n=2, m=5, y=[1, 6], theta0=0.5, seed=0)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            TwoLevelDataset(n=1, m=1, y=[0], theta0=0.5, seed=0, extra=1)

    def test_seed_is_unsigned_64_bit(self):
        TwoLevelDataset(n=1, m=1, y=[0], theta0=0.5, seed=2**64 - 1)
        with pytest.raises(ValidationError):
            TwoLevelDataset(n=1, m=1, y=[0], theta0=0.5, seed=2**64)

    def test_json_fields(self):
        data = TwoLevelDataset(n=2, m=3, y=[1, 2], theta0=0.25, seed=9)
        restored = TwoLevelDataset.from_json(data.to_json())
        assert restored == data
        assert set(restored.model_dump()) == {"n", "m", "y", "theta0", "seed"}


class TestQuadratureRule:
    def test_default_has_twenty_points(self):
        assert QuadratureRule.gauss_hermite().size == 20

    def test_nodes_symmetric_and_weights_positive(self):
        rule = QuadratureRule.gauss_hermite(20)
        np.testing.assert_allclose(np.sort(rule.nodes), -np.sort(rule.nodes)[::-1], atol=1e-13)
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(math.sqrt(math.pi), abs=1e-12)

    @pytest.mark.parametrize("j", [1, 5, 10, 19])
    def test_even_moments_exact(self, j):
        rule = QuadratureRule.gauss_hermite(20)
        # integral of x^(2j) exp(-x^2) is Gamma(j + 1/2)
        assert float(rule.weights @ rule.nodes ** (2 * j)) == pytest.approx(math.gamma(j + 0.5), rel=1e-10)

    def test_cached_arrays_are_read_only(self):
        rule = QuadratureRule.gauss_hermite(20)
        with pytest.raises(ValueError):
            rule.nodes[0] = 0.0

    def test_needs_a_point(self):
        with pytest.raises(ValueError):
            QuadratureRule.gauss_hermite(0)
