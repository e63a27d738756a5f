import pytest

from pressmat.calibration import build_curve, sweep_samples
from pressmat.geometry import SensorLayout
from pressmat.simulate import DividerConfig, SensorModel


@pytest.fixture(scope="session")
def layout():
    return SensorLayout()


@pytest.fixture(scope="session")
def divider():
    return DividerConfig()


@pytest.fixture(scope="session")
def model_no_hyst():
    return SensorModel(hysteresis_band=0.0)


@pytest.fixture(scope="session")
def curve_no_hyst(model_no_hyst, divider):
    """Calibration curve for the hysteresis-free sensor model."""
    return build_curve(sweep_samples(model_no_hyst, divider), divider)


@pytest.fixture(scope="session")
def curve_default(divider):
    """Calibration curve for the default (hysteretic) sensor model."""
    return build_curve(sweep_samples(SensorModel(), divider), divider)


def point_in_polygon(px: float, py: float, vertices) -> bool:
    """Independent even-odd test: plain per-point crossing count."""
    inside = False
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if (y1 > py) != (y2 > py):
            x_cross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < x_cross:
                inside = not inside
    return inside
