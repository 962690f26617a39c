import pytest

from vinesem.datasets import consent_dag, reference_data
from vinesem.lgbn import fit_lgbn
from vinesem.sem import SemConfig, fit_sem


@pytest.fixture(scope="session")
def ref_data():
    return reference_data(log=True)


@pytest.fixture(scope="session")
def dag():
    return consent_dag()


@pytest.fixture(scope="session")
def gauss_sem(ref_data, dag):
    return fit_sem(ref_data, dag, SemConfig("gaussian", "gaussian", "caic"))


@pytest.fixture(scope="session")
def pnp_sem(ref_data, dag):
    return fit_sem(ref_data, dag, SemConfig("kde", "pnp", "caic"), threads=4)


@pytest.fixture(scope="session")
def lgbn(ref_data, dag):
    return fit_lgbn(ref_data, dag)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
