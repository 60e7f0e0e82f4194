"""Expression parser for user-supplied nonlinearities.

Run:
    python -m pytest app/tests/test_expression.py -v
"""
from __future__ import annotations

import numpy as np
import pytest

from app.errors import ValidationError
from app.utils.expression import compile_expression


class TestEvaluation:
    def test_saturable_expression_vanishes_at_background(self):
        fn = compile_expression("(1+r0^2)/(1+s) - 1", r0=1.0)
        assert fn(np.array([1.0]))[0] == pytest.approx(0.0, abs=1e-15)

    def test_power_is_right_associative(self):
        fn = compile_expression("2^3^2", r0=1.0)
        assert fn(np.array(0.0)) == pytest.approx(512.0)

    def test_unary_minus_binds_looser_than_power(self):
        fn = compile_expression("-s^2", r0=1.0)
        assert fn(np.array(2.0)) == pytest.approx(-4.0)

    def test_functions_and_constants(self):
        fn = compile_expression("sqrt(1+s) + cos(pi) + exp(0)", r0=1.0)
        assert fn(np.array(3.0)) == pytest.approx(2.0)

    def test_vectorised_and_shape_preserving(self):
        fn = compile_expression("r0^2 - s", r0=2.0)
        s = np.linspace(0.0, 4.0, 9).reshape(3, 3)
        out = fn(s)
        assert out.shape == (3, 3)
        np.testing.assert_allclose(out, 4.0 - s)

    def test_constant_expression_broadcasts(self):
        fn = compile_expression("3", r0=1.0)
        np.testing.assert_array_equal(fn(np.zeros(4)), np.full(4, 3.0))


class TestErrors:
    @pytest.mark.parametrize("text", ["1+*s", "sqrt(", "s)", ""])
    def test_malformed_expression(self, text):
        with pytest.raises(ValidationError):
            compile_expression(text, r0=1.0)

    def test_unknown_function(self):
        with pytest.raises(ValidationError):
            compile_expression("gamma(s)", r0=1.0)

    def test_unknown_variable_reported_on_evaluation(self):
        fn = compile_expression("t + 1", r0=1.0)
        with pytest.raises(ValidationError, match="unknown variable"):
            fn(np.array(1.0))
