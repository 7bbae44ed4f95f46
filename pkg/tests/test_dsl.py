"""Parser and evaluator behavior of the string-transformation language."""

import pytest

from syntra.dsl import DslSyntaxError, eval_dsl, parse_dsl, print_dsl


def run(source, x):
    return eval_dsl(parse_dsl(source), x)


class TestParse:
    def test_identity_program(self):
        assert parse_dsl("(input)").ast == ("input",)

    def test_split_program(self):
        assert parse_dsl('(split_index (input) "," 0)').ast == ("split_index", ("input",), ",", 0)

    def test_unbalanced_form_is_syntax_error(self):
        with pytest.raises(DslSyntaxError):
            parse_dsl("(concat")

    def test_error_carries_position(self):
        with pytest.raises(DslSyntaxError) as err:
            parse_dsl("(concat (input) (bogus))")
        assert err.value.line == 1
        assert err.value.column == 18

    def test_unknown_class_rejected(self):
        with pytest.raises(DslSyntaxError):
            parse_dsl("(take_while_class (input) vowel)")

    def test_wrong_argument_type_rejected(self):
        with pytest.raises(DslSyntaxError):
            parse_dsl('(substring (input) "a" 2)')

    def test_trailing_content_rejected(self):
        with pytest.raises(DslSyntaxError):
            parse_dsl("(input) (input)")

    @pytest.mark.parametrize(
        "source",
        [
            "(input)",
            '(lit "he\\"llo")',
            '(concat (lit "a") (upper (input)))',
            '(split_index (strip (input)) ", " -3)',
            '(if_contains (input) "," (take_while_class (input) alpha) (drop_while_class (input) digit))',
            '(replace (substring (input) 0 3) "a" "b")',
            '(lower (take_while_class (input) not_upper))',
        ],
    )
    def test_parse_print_identity(self, source):
        program = parse_dsl(source)
        printed = print_dsl(program.ast)
        assert parse_dsl(printed).ast == program.ast
        assert print_dsl(parse_dsl(printed).ast) == printed


class TestEval:
    def test_identity(self):
        out = run("(input)", "ac")
        assert out.kind == "value" and out.payload == "ac"

    def test_prefix_before_uppercase(self):
        out = run("(take_while_class (input) not_upper)", "worCiqshrbrgrplzaaBirqvwic")
        assert out.payload == "wor"

    def test_country_extraction_field_from_end(self):
        out = run(
            '(split_index (input) ", " -3)',
            "ILP 2012, Dubrovnik, Croatia, September 17-19, 2012",
        )
        assert out.payload == "Croatia"

    def test_substring_out_of_range(self):
        out = run("(substring (input) 0 3)", "ab")
        assert out.kind == "error" and out.payload == "index out of range"

    def test_substring_in_range(self):
        assert run("(substring (input) 0 3)", "abcd").payload == "abc"

    def test_split_index_out_of_range(self):
        out = run('(split_index (input) "," 5)', "a,b")
        assert out.kind == "error" and out.payload == "index out of range"

    def test_split_negative_index(self):
        assert run('(split_index (input) "," -1)', "a,b,c").payload == "c"
        assert run('(split_index (input) "," -2)', "a,b,c").payload == "b"

    def test_empty_separator_is_error(self):
        out = run('(split_index (input) "" 0)', "abc")
        assert out.kind == "error" and out.payload == "empty separator"

    def test_replace_upper_lower_strip(self):
        assert run('(replace (input) "a" "_")', "banana").payload == "b_n_n_"
        assert run("(upper (input))", "ab").payload == "AB"
        assert run("(lower (input))", "AB").payload == "ab"
        assert run("(strip (input))", "  x ").payload == "x"

    def test_if_contains(self):
        prog = '(if_contains (input) "," (lit "yes") (lit "no"))'
        assert run(prog, "a,b").payload == "yes"
        assert run(prog, "ab").payload == "no"

    def test_drop_while_class(self):
        assert run("(drop_while_class (input) digit)", "123abc").payload == "abc"

    def test_concat(self):
        assert run('(concat (input) (lit "!"))', "hi").payload == "hi!"

    def test_list_input_identity_passes_through(self):
        out = run("(input)", ["hello", "l"])
        assert out.kind == "value" and out.payload == ["hello", "l"]

    def test_string_op_on_list_input_is_error(self):
        out = run("(upper (input))", ["hello", "l"])
        assert out.kind == "error" and out.payload == "expected string"

    def test_non_string_input_is_error(self):
        assert run("(input)", 42).kind == "error"
        assert run("(input)", {"a": 1}).kind == "error"

    def test_eval_never_raises_and_is_pure(self):
        program = parse_dsl('(split_index (input) ", " -3)')
        for x in ["", "a", "a, b", ["x"], 7, None]:
            first = eval_dsl(program, x)
            second = eval_dsl(program, x)
            assert first == second
            assert first.kind in ("value", "error")
