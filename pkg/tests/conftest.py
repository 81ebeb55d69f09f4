import pytest

from spinbath.schema import Boundary, ChainSpec, ModelKind, TimeGrid


def pytest_addoption(parser):
    parser.addoption(
        "--skip-slow",
        action="store_true",
        default=False,
        help="Skip tests marked slow (long adiabatic integrations)",
    )


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    skip = pytest.mark.skip(reason="--skip-slow given")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def make_spec():
    """Factory for chain specs: make_spec("xx", 8, 0.1, boundary="periodic")."""
    def _make(model: str = "ising", n_bath: int = 8, j: float = 0.5, v: float = 1.0,
              boundary: str = "open") -> ChainSpec:
        return ChainSpec(model=ModelKind(model), n_bath=n_bath, j_coupling=j, v_coupling=v,
                         boundary=Boundary(boundary))
    return _make


@pytest.fixture(scope="session")
def grid_0_10():
    return TimeGrid(t_start=0.0, t_end=10.0, n_samples=200)


@pytest.fixture(scope="session")
def short_grid():
    return TimeGrid(t_start=0.0, t_end=4.0, n_samples=81)
