from fractions import Fraction

import pytest

from free_stein import codec
from free_stein.errors import ParseError, StructuralError
from free_stein.ncalg import GeneratorSystem, NCPoly, TensorPoly, format_poly, jacobian, mai_kernel
from free_stein.parser import parse_poly
from free_stein.scalars import QQi


def test_poly_json_shape(system2):
    x, y = NCPoly.generators(system2)
    data = codec.poly_to_json(x * y * Fraction(2, 3) + 1)
    assert data == {"n": 2, "terms": [[[], ["1", "0"]], [[["t", 1], ["t", 2]], ["2/3", "0"]]]}


def test_poly_round_trip_keeps_exact_coefficients(system2):
    x, y = NCPoly.generators(system2)
    p = x * y * QQi(Fraction(1, 3), Fraction(-5, 7)) - y * y * x
    text = codec.dumps(codec.poly_to_json(p))
    assert codec.poly_from_json(codec.loads(text), system2) == p


def test_kernel_round_trip(system2):
    x, y = NCPoly.generators(system2)
    A = mai_kernel((y * x, x), (x, y))
    assert codec.kernel_from_json(codec.kernel_to_json(A), system2) == A
    J = jacobian((x * y, y * y))
    assert codec.kernel_from_json(codec.kernel_to_json(J), system2) == J


def test_tensor_round_trip_with_b_slots(projection_algebra):
    system = GeneratorSystem(1, b=projection_algebra)
    x = NCPoly.variable(system, 0)
    e = NCPoly.b_element(system, 1)
    u = TensorPoly.elementary(e * x, x * e)
    data = codec.tensor_to_json(u)
    assert data["terms"][0][0] == [["b", 2], ["t", 1], ["b", 1]]
    assert codec.tensor_from_json(data, system) == u


def test_wrong_system_is_rejected(system1, system2):
    data = codec.poly_to_json(NCPoly.variable(system2, 1))
    with pytest.raises(StructuralError):
        codec.poly_from_json(data, system1)


def test_parse_tuple(system2):
    x, y = NCPoly.generators(system2)
    assert parse_poly("(t1*t2 + 2, t2)", system2) == (x * y + 2, y)
    assert parse_poly("3/2*t1 - i*t2", system2) == (x * Fraction(3, 2) - y * QQi(0, 1),)
    assert parse_poly("-(t1 + t2)*t1", system2) == (-(x + y) * x,)
    assert parse_poly("2i*t1", system2) == (x * QQi(0, 2),)


def test_parse_b_letters(projection_algebra):
    system = GeneratorSystem(1, b=projection_algebra)
    (p,) = parse_poly("b2*t1*b2", system)
    e = NCPoly.b_element(system, 1)
    assert p == e * NCPoly.variable(system, 0) * e


def test_b_letters_count_from_one(projection_algebra):
    system = GeneratorSystem(1, b=projection_algebra)
    assert parse_poly("b1", system) == (NCPoly.one(system),)
    (p,) = parse_poly("b2", system)
    assert [w.slots for w, _ in p.items()] == [(1,)]
    assert format_poly(p) == "b2"
    assert codec.poly_to_json(p)["terms"][0][0] == [["b", 2]]
    assert codec.poly_from_json({"n": 1, "terms": [[[["b", 1]], ["1", "0"]]]}, system) == NCPoly.one(system)
    with pytest.raises(ParseError) as exc:
        parse_poly("t1 + b0", system)
    assert exc.value.token == "b0"
    with pytest.raises(ParseError):
        parse_poly("b3", system)


def test_parse_error_reports_position(system2):
    with pytest.raises(ParseError) as exc:
        parse_poly("(t3)", system2)
    assert exc.value.position == 1
    assert exc.value.token == "t3"

    with pytest.raises(ParseError) as exc:
        parse_poly("t1 + $", system2)
    assert exc.value.position == 5

    with pytest.raises(ParseError):
        parse_poly("(t1, t2", system2)
