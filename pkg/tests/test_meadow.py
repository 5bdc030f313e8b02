"""Arithmetic core: exact rationals with total inverse and signum."""

from fractions import Fraction

from hypothesis import given, strategies as st

from pacp.meadow import Rat, ZERO, ONE, rat


rats = st.builds(Rat,
                 st.integers(min_value=-10**6, max_value=10**6),
                 st.integers(min_value=-10**6, max_value=10**6).filter(bool))


def frac(x):
    return Fraction(x.num, x.den)


def test_construction_normalizes():
    assert Rat(2, 4) == Rat(1, 2)
    assert Rat(-3, -6) == Rat(1, 2)
    assert Rat(3, -6).num == -1 and Rat(3, -6).den == 2
    assert Rat(0, 7) == ZERO
    assert str(Rat(-4, 8)) == "-1/2"
    assert str(Rat(6, 3)) == "2"


def test_from_str():
    assert Rat.from_str("2/3") == Rat(2, 3)
    assert Rat.from_str(" -1 / 2 ") == Rat(-1, 2)
    assert Rat.from_str("7") == Rat(7)
    assert Rat.from_str("-0") == ZERO


def test_zero_denominator_rejected():
    try:
        Rat(1, 0)
    except ZeroDivisionError:
        pass
    else:
        assert False, "Rat(1, 0) must be rejected"


def test_total_inverse_of_zero():
    assert ZERO.inv() == ZERO
    assert ONE / ZERO == ZERO
    assert Rat(5) / 0 == ZERO


def test_int_coercion():
    assert Rat(1, 2) + 1 == Rat(3, 2)
    assert 1 - Rat(1, 4) == Rat(3, 4)
    assert 2 * Rat(1, 3) == Rat(2, 3)
    assert 1 / Rat(4) == Rat(1, 4)


@given(rats, rats, rats)
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x + y == y + x
    assert x + ZERO == x
    assert x + (-x) == ZERO
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    assert x * ONE == x
    assert x * (y + z) == x * y + x * z


@given(rats)
def test_inverse_axioms(x):
    assert x.inv().inv() == x
    assert x * (x * x.inv()) == x


@given(rats, rats, rats)
def test_cancellation(x, y, z):
    if x != ZERO:
        assert (x * y == x * z) == (y == z)


@given(rats, rats)
def test_signum_axioms(x, y):
    assert (x / x).sign() == x / x
    assert (ONE - x / x).sign() == ONE - x / x
    assert Rat(-1).sign() == Rat(-1)
    assert x.inv().sign() == x.sign()
    assert (x * y).sign() == x.sign() * y.sign()
    d = x.sign() - y.sign()
    assert (ONE - d / d) * ((x + y).sign() - x.sign()) == ZERO


@given(rats, rats)
def test_order_matches_fractions(x, y):
    # the predicates run through signum; cross-check against Fraction
    assert (x < y) == (frac(x) < frac(y))
    assert (x <= y) == (frac(x) <= frac(y))
    assert (x > y) == (frac(x) > frac(y))
    assert (x >= y) == (frac(x) >= frac(y))


@given(rats)
def test_is_prob_matches_comparison(x):
    assert x.is_prob() == (ZERO <= x <= ONE)


def test_is_prob_boundaries():
    assert ZERO.is_prob()
    assert ONE.is_prob()
    assert not Rat(-1, 10**6).is_prob()
    assert not Rat(10**6 + 1, 10**6).is_prob()


def test_display():
    assert repr(Rat(5, 3)) == "Rat(5, 3)"
    assert float(Rat(1, 4)) == 0.25
    assert rat(3, 9) == Rat(1, 3)


def test_hash_consistent_with_eq():
    assert hash(Rat(2, 4)) == hash(Rat(1, 2))
    assert len({Rat(1, 2), Rat(2, 4), Rat(3, 6)}) == 1
