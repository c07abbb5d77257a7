import math
import os

import pytest

from pyspl.partition import build_radial_partition, build_rect_partition, orient_interfaces
from pyspl.rect import cross_partition
from pyspl.variation import groundstate_data

CFG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "cfg")


@pytest.fixture
def cfg_dir():
    return CFG_DIR


@pytest.fixture(scope="session")
def square():
    return build_rect_partition(1.0, [])


@pytest.fixture(scope="session")
def square_cross():
    return cross_partition(1.0)


@pytest.fixture(scope="session")
def rect_cross():
    return cross_partition(1.5)


@pytest.fixture(scope="session")
def rect_cross_frame(rect_cross):
    return orient_interfaces(rect_cross)


@pytest.fixture(scope="session")
def rect_cross_data(rect_cross):
    return groundstate_data(rect_cross)


@pytest.fixture(scope="session")
def staggered_cross():
    cuts = [((0.48 * math.pi, 0.0), (0.48 * math.pi, 0.5 * math.pi)),
            ((0.52 * math.pi, 0.5 * math.pi), (0.52 * math.pi, math.pi)),
            ((0.0, 0.5 * math.pi), (math.pi, 0.5 * math.pi))]
    return build_rect_partition(1.0, cuts)


@pytest.fixture(scope="session")
def radial6():
    return build_radial_partition(6)
