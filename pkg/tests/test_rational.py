"""Backend-selection and exact-arithmetic tests."""

import fractions

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nashreduce import _rational
from nashreduce._rational import (
    ACTIVE,
    FRACTIONS,
    GMPY2,
    R,
    iceil,
    ifloor,
    rational,
    rational_str,
)

BACKENDS = [b for b in (GMPY2, FRACTIONS) if b is not None]


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.name)
class TestParsing:
    def test_int(self, backend):
        assert backend.rational(7) == 7

    def test_pair(self, backend):
        q = backend.rational(3, 4)
        assert q * 4 == 3

    def test_string_fraction(self, backend):
        assert backend.rational("3/4") == backend.rational(3, 4)

    def test_string_integer(self, backend):
        assert backend.rational("-12") == -12

    def test_negative_denominator_normalizes(self, backend):
        q = backend.rational(1, -2)
        assert q == backend.rational(-1, 2)

    def test_cross_backend(self, backend):
        other = fractions.Fraction(22, 7)
        assert backend.rational(other) == other

    def test_float_rejected(self, backend):
        with pytest.raises(TypeError):
            backend.rational(0.5)
        with pytest.raises(TypeError):
            backend.rational(1, 2.0)

    def test_zero_denominator(self, backend):
        with pytest.raises(ZeroDivisionError):
            backend.rational("1/0")


def test_active_backend_prefers_gmpy2():
    if GMPY2 is not None:
        assert ACTIVE is GMPY2
    else:
        assert ACTIVE is FRACTIONS


def test_select_env_override():
    assert _rational._select("fractions") is FRACTIONS
    assert _rational._select("pure") is FRACTIONS
    assert _rational._select(None) is ACTIVE
    if GMPY2 is not None:
        assert _rational._select("gmpy2") is GMPY2
    with pytest.raises(RuntimeError):
        _rational._select("decimal")


def test_rational_str():
    assert rational_str(R(5)) == "5"
    assert rational_str(R(10, 4)) == "5/2"
    assert rational_str(R(-1, 3)) == "-1/3"
    assert rational_str(R(4, 2)) == "2"


def test_floor_ceil():
    assert ifloor(R(7, 2)) == 3
    assert iceil(R(7, 2)) == 4
    assert ifloor(R(-7, 2)) == -4
    assert iceil(R(-7, 2)) == -3
    assert ifloor(R(6, 2)) == iceil(R(6, 2)) == 3
    assert ifloor(5) == iceil(5) == 5


@given(
    n1=st.integers(-10**6, 10**6),
    d1=st.integers(1, 10**4),
    n2=st.integers(-10**6, 10**6),
    d2=st.integers(1, 10**4),
)
def test_backends_agree(n1, d1, n2, d2):
    """Both backends produce identical exact results for field operations."""
    results = []
    for backend in BACKENDS:
        a = backend.rational(n1, d1)
        b = backend.rational(n2, d2)
        ops = [a + b, a - b, a * b]
        if n2 != 0:
            ops.append(a / b)
        results.append([(int(q.numerator), int(q.denominator)) for q in ops])
    for got in results[1:]:
        assert got == results[0]


@given(n=st.integers(-10**9, 10**9), d=st.integers(1, 10**6))
def test_floor_ceil_consistent(n, d):
    q = R(n, d)
    f, c = ifloor(q), iceil(q)
    assert f <= q <= c
    assert c - f == (0 if q == f else 1)
