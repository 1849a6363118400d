import pytest

from adaptive_planner.coverage import FieldPolygon
from adaptive_planner.detect import default_profile
from adaptive_planner.geo import CameraModel


@pytest.fixture
def camera36():
    """Camera whose footprint is exactly 12 m x 8 m at 12 m altitude."""
    return CameraModel(sensor_width=36.0, sensor_height=24.0, focal_length=36.0, image_width=6000, image_height=4000)


@pytest.fixture
def camera():
    return CameraModel()


@pytest.fixture
def field():
    return FieldPolygon.rectangle(100.0, 75.0)


@pytest.fixture(scope="session")
def profile():
    return default_profile()


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
