import pytest
from hypothesis import given

from grwhittaker.serialize import (
    parse_diffop,
    parse_exppoly,
    parse_scalar,
    parse_var,
    to_json_value,
    to_text,
)
from grwhittaker.symkernel import DiffOperator, ExpPoly, ParamScalar, gz, torus

from strategies import diffops, exppolys, scalars


def test_zero_prints_as_zero():
    assert to_text(ParamScalar.const(0)) == "0"
    assert to_text(ExpPoly.const(0)) == "0"
    assert to_text(DiffOperator.mult(0)) == "0"


def test_known_rendering():
    D = DiffOperator.d(gz(1, 1), 1, ExpPoly.exp({gz(1, 1): 1}, -1))
    assert to_text(D) == "[{-1}*exp((1)*x[1,1])]*D(x[1,1])^1"


def test_variables_parse():
    assert parse_var("x[3,2]") == gz(3, 2)
    assert parse_var("x[4]") == torus(4)


def test_json_value_is_text_for_exact_objects():
    p = ExpPoly.var(gz(1, 1))
    assert to_json_value(p) == to_text(p)
    assert to_json_value(1.5) == 1.5


@pytest.mark.parametrize("bad", ["x[", "{1}*exp(", "[{1}]*D(y)^1"])
def test_malformed_text_rejected(bad):
    with pytest.raises(ValueError):
        parse_diffop(bad)


@given(scalars())
def test_scalar_roundtrip(a):
    assert parse_scalar(to_text(a)) == a


@given(exppolys())
def test_exppoly_roundtrip(p):
    assert parse_exppoly(to_text(p)) == p


@given(diffops())
def test_diffop_roundtrip(D):
    text = to_text(D)
    assert parse_diffop(text) == D
    assert to_text(parse_diffop(text)) == text
