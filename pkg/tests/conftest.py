import pytest

from kottler.models import BKParameters, bk_profile, nariai_profile


@pytest.fixture(scope="session")
def bk3():
    return BKParameters(3, 0.1)


@pytest.fixture(scope="session")
def bk3_profile(bk3):
    return bk_profile(bk3)


@pytest.fixture(scope="session")
def nariai3():
    return nariai_profile(3)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[number])
