from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from mechrev import CorrelationSpec, Dist1D, build_joint

# derandomized so that the suite is reproducible run to run
settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")

H = Fraction(1, 2)


@pytest.fixture
def u12():
    return Dist1D.of([(1, H), (2, H)])


@pytest.fixture
def uniform_sq(u12):
    return build_joint(CorrelationSpec.independent([u12, u12]))


@pytest.fixture
def tied_pair(u12):
    return build_joint(CorrelationSpec.semi_independent([(u12, 2)]))


@pytest.fixture
def point_pair():
    return build_joint(CorrelationSpec.independent([Dist1D.point(1), Dist1D.point(1)]))
