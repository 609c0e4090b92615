"""Hypothesis strategies shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def unit_quaternions(draw):
    v = np.array(draw(st.lists(st.floats(-1, 1), min_size=4, max_size=4)))
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([1.0, 0.0, 0.0, 0.0]), 1.0
    return v / n


curvatures = st.floats(-4, 4, allow_nan=False)
angles = st.floats(0, 2 * np.pi, allow_nan=False)
