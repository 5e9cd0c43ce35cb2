import pytest

from helpers import series_network, two_layer_network


@pytest.fixture
def series():
    return series_network()


@pytest.fixture
def layered():
    return two_layer_network()


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
