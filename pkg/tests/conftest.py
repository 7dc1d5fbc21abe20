"""Shared fixtures.

Frame construction dominates test startup, so the common frames are built
once per session. Tests that need a nonstandard frame build their own.
"""

import numpy as np
import pytest

from needlets import build_frame, jacobi_basis, make_filter, make_profile, wicksell_model


@pytest.fixture(scope="session")
def filt():
    return make_filter(make_profile("polynomial-shape", 2))


@pytest.fixture(scope="session")
def frame7(filt):
    # budget 256, exact span 129
    return build_frame(jacobi_basis(0.0, 1.0), filt, j_max=7)


@pytest.fixture(scope="session")
def frame8(filt):
    # budget 512, matches the default simulation setup
    return build_frame(jacobi_basis(0.0, 1.0), filt, j_max=8)


@pytest.fixture(scope="session")
def wicksell512():
    return wicksell_model(512)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
