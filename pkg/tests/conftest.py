import pytest

from lobforge import backend


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="run the slow statistical tests as well",
    )


@pytest.fixture(params=backend.available_backends())
def backend_kind(request):
    """Run a test once per available book-engine backend."""
    return request.param
