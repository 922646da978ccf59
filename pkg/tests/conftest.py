import pytest

from fatou_lab.boundary import BoundaryRegion, periodic_ray
from fatou_lab.config import settings
from fatou_lab.groups import build_group
from fatou_lab.walks import simple_random_walk

SEED = 20240601


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    """Run trajectory batches in-process"""
    monkeypatch.setattr(settings, "workers", 1)


@pytest.fixture(scope="session")
def free2():
    return build_group("free:2")


@pytest.fixture(scope="session")
def srw(free2):
    return simple_random_walk(free2)


@pytest.fixture(scope="session")
def theta_a(free2):
    return periodic_ray(free2, "a")


@pytest.fixture(scope="session")
def theta_b(free2):
    return periodic_ray(free2, "b")


@pytest.fixture(scope="session")
def cyl_a(free2):
    return BoundaryRegion.cylinders(["a"], free2)


@pytest.fixture
def seed():
    return SEED
