import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

MODELS = Path(__file__).parent.parent / "models"


@pytest.fixture
def ts3():
    """u -> w, v and w terminal."""
    from fixwit.bisim import TransitionSystem

    return TransitionSystem(3, ((2,), (), ()))


@pytest.fixture
def bisim3(ts3):
    from fixwit.bisim import BisimInstance

    return BisimInstance(ts3)


@pytest.fixture
def chain43():
    """a -> b -> c versus a2 -> b2 (c, b2 terminal)."""
    from fixwit.bisim import TransitionSystem

    return TransitionSystem(5, ((1,), (2,), (), (4,), ()))


@pytest.fixture
def geometric():
    """delta(x) = {t: 1/2, x: 1/2}, T = {t}."""
    from fixwit.termination import MarkovChain

    return MarkovChain(2, frozenset({1}), (((1, Fraction(1, 2)), (0, Fraction(1, 2))), None))


@pytest.fixture
def term_g(geometric):
    from fixwit.termination import TerminationInstance

    return TerminationInstance(geometric)


@pytest.fixture
def lmc4():
    """s:a, t:b, x1:c, x2:c with delta(x1)={s:1/2,t:1/2}, delta(x2)={s:1/3,t:2/3}."""
    from fixwit.metric import LabelledMarkovChain

    return LabelledMarkovChain(
        4,
        ("a", "b", "c", "c"),
        (
            ((0, Fraction(1)),),
            ((1, Fraction(1)),),
            ((0, Fraction(1, 2)), (1, Fraction(1, 2))),
            ((0, Fraction(1, 3)), (1, Fraction(2, 3))),
        ),
    )


@pytest.fixture
def metric4(lmc4):
    from fixwit.metric import MetricInstance

    return MetricInstance(lmc4)


@pytest.fixture
def models_dir():
    return MODELS
