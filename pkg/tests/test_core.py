import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uadam.core import (
    ConfigurationError,
    NumericDomainError,
    RunTrace,
    UAdamConfig,
    as_vector,
    elementwise,
    norm_sq,
    sgd_lambda,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
nonzero_floats = finite_floats.filter(lambda v: abs(v) > 1e-6)
# zero or comfortably inside the normal range: products must not hit subnormals,
# where the 1-ulp roundtrip guarantee genuinely breaks down
normal_floats = st.one_of(st.just(0.0), finite_floats.filter(lambda v: abs(v) >= 1e-100))


class TestElementwise:
    def test_div(self):
        np.testing.assert_array_equal(
            elementwise("div", as_vector([2, 4]), as_vector([1, 2])), [2.0, 2.0]
        )

    def test_max(self):
        np.testing.assert_array_equal(
            elementwise("max", as_vector([1, 5]), as_vector([3, 2])), [3.0, 5.0]
        )

    def test_clip(self):
        np.testing.assert_array_equal(
            elementwise("clip", as_vector([0.5, 9.0]), lo=1.0, hi=4.0), [1.0, 4.0]
        )

    def test_scalar_operand(self):
        np.testing.assert_array_equal(elementwise("mul", as_vector([1, 2]), 3.0), [3.0, 6.0])

    def test_inputs_unmodified(self):
        a = as_vector([1.0, 2.0])
        b = as_vector([3.0, 4.0])
        elementwise("add", a, b)
        np.testing.assert_array_equal(a, [1.0, 2.0])
        np.testing.assert_array_equal(b, [3.0, 4.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            elementwise("add", as_vector([1, 2]), as_vector([1, 2, 3]))

    def test_division_by_zero_names_coordinate(self):
        with pytest.raises(NumericDomainError) as err:
            elementwise("div", as_vector([1, 2]), as_vector([1, 0]))
        assert err.value.index == 1

    def test_negative_sqrt_names_coordinate(self):
        with pytest.raises(NumericDomainError) as err:
            elementwise("sqrt", as_vector([4.0, -1.0]))
        assert err.value.index == 1

    def test_fractional_power_of_negative(self):
        with pytest.raises(NumericDomainError):
            elementwise("pow", as_vector([-2.0]), 0.5)

    def test_sign(self):
        np.testing.assert_array_equal(elementwise("sign", as_vector([-3, 0, 2])), [-1.0, 0.0, 1.0])

    def test_unknown_op(self):
        with pytest.raises(ConfigurationError):
            elementwise("mod", as_vector([1.0]), 2.0)

    @given(
        st.lists(nonzero_floats, min_size=1, max_size=8).flatmap(
            lambda b: st.tuples(
                st.lists(normal_floats, min_size=len(b), max_size=len(b)), st.just(b)
            )
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_mul_div_roundtrip(self, pair):
        """div(mul(a, b), b) recovers a to within 1 ulp per coordinate."""
        a, b = as_vector(pair[0]), as_vector(pair[1])
        back = elementwise("div", elementwise("mul", a, b), b)
        ulp = np.spacing(np.abs(a))
        assert np.all(np.abs(back - a) <= ulp)

    def test_purity_bit_identical(self):
        a = as_vector([0.1, 0.2, 0.3])
        b = as_vector([0.7, 0.8, 0.9])
        first = elementwise("pow", a, b)
        second = elementwise("pow", a, b)
        np.testing.assert_array_equal(first, second)


class TestNormSq:
    def test_three_four(self):
        assert norm_sq(as_vector([3, 4])) == 25.0

    def test_zero_vector(self):
        assert norm_sq(np.zeros(5)) == 0.0

    def test_ones(self):
        assert norm_sq(np.ones(4)) == 4.0

    @given(st.lists(normal_floats, min_size=1, max_size=10))
    @settings(max_examples=100, deadline=None)
    def test_zero_iff_zero_vector(self, coords):
        """Zero norm exactly when every coordinate is zero (away from underflow)."""
        v = as_vector(coords)
        assert (norm_sq(v) == 0.0) == bool(np.all(v == 0.0))


class TestAsVector:
    def test_rejects_nan(self):
        with pytest.raises(NumericDomainError) as err:
            as_vector([1.0, np.nan])
        assert err.value.index == 1

    def test_rejects_matrix(self):
        with pytest.raises(ConfigurationError):
            as_vector(np.ones((2, 2)))


class TestUAdamConfig:
    def test_valid_adam(self):
        cfg = UAdamConfig(eta=0.1, beta=0.9, lam=0.0, rule="adam", beta2=0.999, epsilon=1e-8)
        assert cfg.lambda_tilde == 0.0

    def test_lambda_tilde_sgd_endpoint_clamped(self):
        beta = 0.9
        cfg = UAdamConfig(eta=0.1, beta=beta, lam=sgd_lambda(beta), rule="const")
        assert cfg.lambda_tilde == 1.0

    def test_lambda_out_of_range(self):
        with pytest.raises(ConfigurationError):
            UAdamConfig(eta=0.1, beta=0.5, lam=3.0, rule="const")

    def test_missing_rule_param(self):
        with pytest.raises(ConfigurationError, match="requires"):
            UAdamConfig(eta=0.1, beta=0.9, lam=0.0, rule="adam", beta2=0.999)

    def test_extraneous_rule_param(self):
        with pytest.raises(ConfigurationError, match="does not use"):
            UAdamConfig(eta=0.1, beta=0.9, lam=0.0, rule="const", beta2=0.999)

    def test_unknown_rule(self):
        with pytest.raises(ConfigurationError, match="unknown rule"):
            UAdamConfig(eta=0.1, beta=0.9, lam=0.0, rule="adagrad")

    def test_grad_bound_allowed_everywhere(self):
        UAdamConfig(eta=0.1, beta=0.9, lam=0.0, rule="const", grad_bound=5.0)

    def test_adan_beta1_defaults_to_beta(self):
        cfg = UAdamConfig(eta=0.1, beta=0.8, lam=1.0, rule="adan", beta2=0.1, epsilon=1e-8)
        assert cfg.resolved_beta1() == 0.8
        explicit = UAdamConfig(
            eta=0.1, beta=0.8, lam=1.0, rule="adan", beta2=0.1, epsilon=1e-8, beta1=0.7
        )
        assert explicit.resolved_beta1() == 0.7

    def test_reversed_clip_bounds(self):
        with pytest.raises(ConfigurationError):
            UAdamConfig(
                eta=0.1, beta=0.9, lam=0.0, rule="adabound", beta2=0.99, clip_lo=2.0, clip_hi=1.0
            )


class TestRunTrace:
    def test_validate_catches_gaps(self):
        trace = RunTrace.empty()
        trace.validate()
        bad = RunTrace(
            t=np.array([1, 3]), f=np.zeros(2), grad_norm_sq=np.zeros(2), delta_t=np.zeros(2),
            eta_min=np.zeros(2), eta_max=np.zeros(2), step_norm=np.zeros(2),
        )
        with pytest.raises(ConfigurationError):
            bad.validate()

    def test_column_lookup(self):
        trace = RunTrace.empty()
        assert trace.column("f").shape == (0,)
        with pytest.raises(ConfigurationError):
            trace.column("unknown")
