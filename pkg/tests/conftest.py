import pytest

from ucont.coefficients import CoefficientField
from ucont.evolution import GaussianPacket, WaveState
from ucont.expressions import parse_expression
from ucont.grids import Grid


@pytest.fixture(scope="session")
def line_grid():
    return Grid((15.0,), (1024,))


@pytest.fixture(scope="session")
def identity_field_1d():
    return CoefficientField.identity(1)


@pytest.fixture(scope="session")
def mild_field_1d():
    # smallness metric 0.044 on any box containing |x| <= 13
    return CoefficientField(1, ((parse_expression("1 + 0.06*exp(-x1^2/4)"),),))


@pytest.fixture(scope="session")
def unit_packet():
    return GaussianPacket(1.0, (0.0,))


@pytest.fixture(scope="session")
def chirped_packet():
    # symmetric complex covariance: admissible weights up to beta < 1/4
    return GaussianPacket(0.5 - 0.5j, (0.0,))


def gaussian_state(grid, packet):
    return WaveState(0.0, packet.sample(grid), grid)
