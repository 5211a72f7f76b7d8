import numpy as np
import pytest

from gibbs_burnin.models import WORKED_MODEL, ModelSpec

# selected parameters of the published worked example
R_REF = 0.1895820
GAMMA_REF = 0.25
W_REF = 2.203030


@pytest.fixture
def worked():
    return WORKED_MODEL


@pytest.fixture
def bb111():
    return ModelSpec.beta_binomial(1, 1, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
