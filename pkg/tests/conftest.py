import numpy as np
import pytest

from compressible.distributions import DistributionModel


@pytest.fixture
def laplace():
    return DistributionModel.laplace()


@pytest.fixture
def pzero():
    return DistributionModel.pzero()


ALL_FAMILIES = [
    DistributionModel.laplace(),
    DistributionModel.laplace(2.5),
    DistributionModel.ggd(0.3),
    DistributionModel.ggd(0.7, 5.0),
    DistributionModel.ggd(2.0),
    DistributionModel.tau_s(1.0, 2.69, 8.0),
    DistributionModel.tau_s(2.0, 2.64, 4.5),
    DistributionModel.tau_s(0.5, 4.0),
    DistributionModel.pzero(),
]


def family_id(d):
    return d.spec


@pytest.fixture(params=ALL_FAMILIES, ids=family_id)
def any_dist(request):
    return request.param


def rng(seed=0):
    return np.random.default_rng(seed)
