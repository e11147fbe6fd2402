import pytest

from uvgi import fixtures, planner, radiometry, workflows

EBOLA_K = 0.0867  # m^2/J, Ebola Sudan


@pytest.fixture(scope="session")
def reference_profile():
    return fixtures.reference_profile()


@pytest.fixture(scope="session")
def reference_kernel():
    return fixtures.reference_kernel()


@pytest.fixture(scope="session")
def d90_spec():
    return radiometry.DisinfectionSpec(k=EBOLA_K, rate=0.90)


@pytest.fixture(scope="session")
def standard_region():
    return planner.RegionSpec.from_vertices(
        [(0.0, 0.0, 0.0), (0.1, 0.0, 0.0), (0.1, 1.0, 0.0), (0.0, 1.0, 0.0)]
    )


@pytest.fixture(scope="session")
def d90_plan(reference_profile, standard_region, d90_spec):
    return workflows.make_plan(reference_profile, standard_region, d90_spec)


@pytest.fixture()
def standard_grid(standard_region):
    return workflows.make_grid(standard_region)
