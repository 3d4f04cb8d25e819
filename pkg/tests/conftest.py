import pytest

from anderson_corr import AnalyticDensity


@pytest.fixture(scope="session")
def gaussian():
    return AnalyticDensity.gaussian(1.0, 1.0)


@pytest.fixture(scope="session")
def cauchy():
    return AnalyticDensity.cauchy(1.0, 0.5)


@pytest.fixture(scope="session")
def densities(gaussian, cauchy):
    return [gaussian, cauchy]
