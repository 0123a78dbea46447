import os
import pytest
from hypothesis import HealthCheck, settings
from boundary_wave_lab.assembly import build_system
from boundary_wave_lab.geometry import build_annulus_mesh

settings.register_profile('default', max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.register_profile('fast', max_examples=5, deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get('HYPOTHESIS_PROFILE', 'default'))


@pytest.fixture(scope='session')
def small_mesh():
    return build_annulus_mesh(1.0, 2.0, 4, 16)


@pytest.fixture(scope='session')
def small_system(small_mesh):
    return build_system(small_mesh, 1.0)


@pytest.fixture(scope='session')
def undamped_system(small_mesh):
    return build_system(small_mesh, 0.0, allow_undamped=True)


@pytest.fixture(scope='session')
def default_mesh():
    return build_annulus_mesh(1.0, 2.0, 8, 32)


@pytest.fixture(scope='session')
def default_system(default_mesh):
    return build_system(default_mesh, 1.0)
