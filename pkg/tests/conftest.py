import pytest

from sqlgauge.bundled import materialize_demo
from sqlgauge.datastore import Catalog


@pytest.fixture(scope="session")
def demo_root(tmp_path_factory):
    """One materialized demo working directory shared by the whole session.

    Tests that mutate state (runs, workload versions, scaled copies) must
    use their own tmp_path instead.
    """
    root = tmp_path_factory.mktemp("demo")
    materialize_demo(root)
    return root


@pytest.fixture(scope="session")
def catalog(demo_root):
    return Catalog.load(demo_root / "catalog.json")


@pytest.fixture(scope="session")
def campus_db(catalog):
    return catalog.get("campus").path


@pytest.fixture(scope="session")
def retail_db(catalog):
    return catalog.get("retail").path
