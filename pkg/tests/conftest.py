import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from aflux.schema import bundled_registry, bundled_schema_bytes  # noqa: E402
from aflux.simulator import bundled_dataset, bundled_dataset_bytes, running  # noqa: E402
from aflux.transport import Transport  # noqa: E402

import oracle  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def registry():
    return bundled_registry()


@pytest.fixture(scope="session")
def dataset():
    return bundled_dataset()


@pytest.fixture(scope="session")
def oracle_records():
    return oracle.load_records(bundled_dataset_bytes(), bundled_schema_bytes())


@pytest.fixture(scope="session")
def server(dataset):
    with running(dataset) as srv:
        yield srv


@pytest.fixture(scope="session")
def root(server):
    return server.root


@pytest.fixture
def transport():
    return Transport(retries=0)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
