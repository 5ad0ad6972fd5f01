import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tutorloop import expr
from tutorloop.errors import (
    DivisionByZeroError,
    EmptyEquationError,
    EquationSyntaxError,
    EvaluationError,
    LexError,
    NonIntegerExponentError,
    UnboundPlaceholderError,
)

from .oracles import random_ast, random_bindings, stack_evaluate


def B(op, left, right):
    return expr.Binary(op, left, right)


N1, N2, N3 = expr.Placeholder(1), expr.Placeholder(2), expr.Placeholder(3)


class TestParse:
    def test_precedence(self):
        assert expr.parse_equation("N1 + N2 * N3") == B("+", N1, B("*", N2, N3))

    def test_prefix_strip_and_parens(self):
        assert expr.parse_equation("x = (N1 - N2) / N3") == B("/", B("-", N1, N2), N3)
        assert expr.parse_equation("X = N1") == N1

    def test_left_association(self):
        assert expr.parse_equation("8 - 3 - 2") == B(
            "-", B("-", expr.Literal(Fraction(8)), expr.Literal(Fraction(3))), expr.Literal(Fraction(2))
        )

    def test_power_right_association(self):
        assert expr.parse_equation("2 ^ 3 ^ 2") == B(
            "^", expr.Literal(Fraction(2)), B("^", expr.Literal(Fraction(3)), expr.Literal(Fraction(2)))
        )

    def test_unary_minus(self):
        assert expr.parse_equation("-N1 + 3") == B(
            "+", expr.Unary("neg", N1), expr.Literal(Fraction(3))
        )

    def test_decimal_literal(self):
        assert expr.parse_equation("3.5") == expr.Literal(Fraction(7, 2))

    def test_dangling_operator(self):
        with pytest.raises(EquationSyntaxError):
            expr.parse_equation("N1 + ")

    def test_unbalanced_parens(self):
        with pytest.raises(EquationSyntaxError):
            expr.parse_equation("(N1 + N2")

    def test_unknown_token(self):
        with pytest.raises(LexError):
            expr.parse_equation("N1 + $2")

    def test_empty(self):
        with pytest.raises(EmptyEquationError):
            expr.parse_equation("   ")

    def test_placeholder_zero_rejected(self):
        with pytest.raises(EquationSyntaxError):
            expr.parse_equation("N0 + 1")

    def test_literal_exponent_bounds(self):
        expr.parse_equation("2 ^ 8")
        expr.parse_equation("2 ^ -8")
        with pytest.raises(EquationSyntaxError):
            expr.parse_equation("2 ^ 9")
        with pytest.raises(EquationSyntaxError):
            expr.parse_equation("2 ^ 1.5")

    def test_trailing_garbage(self):
        with pytest.raises(EquationSyntaxError):
            expr.parse_equation("N1 N2")


class TestEvaluate:
    def test_basic(self):
        ast = expr.parse_equation("N1 + N2")
        assert expr.evaluate(ast, {1: Fraction(3), 2: Fraction(2)}) == 5

    def test_division_by_zero(self):
        ast = expr.parse_equation("N1 / (N2 - N2)")
        with pytest.raises(DivisionByZeroError):
            expr.evaluate(ast, {1: Fraction(1), 2: Fraction(4)})

    def test_unbound(self):
        with pytest.raises(UnboundPlaceholderError):
            expr.evaluate(expr.parse_equation("N1 + N2"), {1: Fraction(1)})

    def test_non_integer_exponent(self):
        ast = expr.Binary("^", expr.Literal(Fraction(2)), expr.Placeholder(1))
        with pytest.raises(NonIntegerExponentError):
            expr.evaluate(ast, {1: Fraction(1, 2)})

    def test_exact_rationals(self):
        ast = expr.parse_equation("N1 / N2 + N3 / N2")
        value = expr.evaluate(ast, {1: Fraction(1), 2: Fraction(3), 3: Fraction(2)})
        assert value == Fraction(1)  # 1/3 + 2/3, exactly

    def test_agrees_with_stack_machine_oracle(self):
        rng = random.Random(20240817)
        checked = 0
        for _ in range(1000):
            ast = random_ast(rng)
            bindings = random_bindings(rng)
            try:
                expected = stack_evaluate(ast, bindings)
            except EvaluationError as oracle_error:
                with pytest.raises(type(oracle_error)):
                    expr.evaluate(ast, bindings)
                continue
            assert expr.evaluate(ast, bindings) == expected
            checked += 1
        assert checked > 800  # the vast majority evaluate cleanly


class TestPrinters:
    def test_round_trip_full_parens(self):
        rng = random.Random(7)
        for _ in range(1000):
            ast = random_ast(rng)
            assert expr.parse_equation(expr.to_infix(ast)) == ast

    def test_round_trip_pretty(self):
        rng = random.Random(8)
        for _ in range(1000):
            ast = random_ast(rng)
            assert expr.parse_equation(expr.to_pretty_infix(ast)) == ast

    def test_pretty_minimal_parens(self):
        assert expr.to_pretty_infix(expr.parse_equation("N1 + N2 * N3")) == "N1 + N2 * N3"
        assert expr.to_pretty_infix(expr.parse_equation("(N1 + N2) / N3")) == "(N1 + N2) / N3"

    def test_format_value_decimals(self):
        assert expr.format_value(Fraction(7, 2)) == "3.5"
        assert expr.format_value(Fraction(5)) == "5"
        assert expr.format_value(Fraction(1, 3)) == "1/3"


class TestCanonical:
    def test_commutativity(self):
        assert expr.canonical_template(expr.parse_equation("N2 + N1")) == "(+ N1 N2)"

    def test_associative_flattening(self):
        a = expr.parse_equation("(N1 + N2) + N3")
        b = expr.parse_equation("N1 + (N2 + N3)")
        assert expr.canonical_template(a) == expr.canonical_template(b) == "(+ N1 N2 N3)"

    def test_non_commutative_preserved(self):
        assert expr.canonical_template(expr.parse_equation("N1 - N2")) != expr.canonical_template(
            expr.parse_equation("N2 - N1")
        )

    def test_placeholders_sort_before_literals(self):
        assert expr.canonical_template(expr.parse_equation("3 + N2 + N1")) == "(+ N1 N2 3)"

    def test_stable_under_reprint(self):
        rng = random.Random(9)
        for _ in range(300):
            ast = random_ast(rng)
            reparsed = expr.parse_equation(expr.to_pretty_infix(ast))
            assert expr.canonical_template(ast) == expr.canonical_template(reparsed)

    @given(st.permutations([1, 2, 3, 4]))
    @settings(max_examples=24, deadline=None)
    def test_invariant_under_operand_permutation(self, order):
        operands = [expr.Placeholder(i) for i in order]
        ast = operands[0]
        for node in operands[1:]:
            ast = expr.Binary("+", ast, node)
        assert expr.canonical_template(ast) == "(+ N1 N2 N3 N4)"
