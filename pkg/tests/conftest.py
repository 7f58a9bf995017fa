from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from sspace.vectors import FiniteVector

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

rationals = st.builds(
    Fraction,
    st.integers(-20, 20).filter(lambda n: n != 0),
    st.integers(1, 12),
)


@st.composite
def vectors(draw, max_support: int = 6, span: int = 15):
    k = draw(st.integers(1, max_support))
    positions = sorted(draw(st.sets(st.integers(1, span), min_size=k, max_size=k)))
    return FiniteVector.from_map({p: draw(rationals) for p in positions})


def interval_contains(value, enclosure, slack=None) -> bool:
    """True when an mpmath value lies in a CertScalar, up to the oracle's own rounding."""
    from mpmath import mpf

    if slack is None:
        slack = mpf(10) ** -40
    return mpf(enclosure.lo_q.numerator) / enclosure.lo_q.denominator - slack <= value <= (
        mpf(enclosure.hi_q.numerator) / enclosure.hi_q.denominator + slack
    )


@pytest.fixture
def ones():
    return lambda n: FiniteVector.ones(n)
