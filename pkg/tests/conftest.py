import math

import hypothesis.strategies as st
import pytest
from hypothesis import settings

from mpemba.bloch import BlochState, SystemParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def system_params(draw, max_n=2000, min_t2_ratio=0.01, max_t2_ratio=2.0, shared=None):
    t1 = draw(st.floats(0.1, 10.0))
    ratio = draw(st.floats(min_t2_ratio, max_t2_ratio))
    n = draw(st.integers(1, max_n))
    m0 = draw(st.floats(-0.95, 0.95))
    shared_env = draw(st.booleans()) if shared is None else shared
    return SystemParams(t1=t1, t2=ratio * t1, n=n, m0=m0, shared_env=shared_env)


@st.composite
def bloch_states(draw, r_min=0.0, r_max=1.0):
    r = draw(st.floats(r_min, r_max))
    theta = draw(st.floats(0.0, math.pi))
    phi = draw(st.floats(0.0, 2 * math.pi, exclude_max=True))
    return BlochState(r, theta, phi)


@pytest.fixture
def fig2_params():
    return SystemParams(t1=1.0, t2=1.0, n=1000, m0=0.5, shared_env=True)
