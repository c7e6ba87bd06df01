import pytest
from click.testing import CliRunner

from elementary import seed_registry
from session import DerivativeSession


@pytest.fixture
def registry():
    return seed_registry()


@pytest.fixture
def session():
    return DerivativeSession().start()


@pytest.fixture
def runner():
    return CliRunner()
