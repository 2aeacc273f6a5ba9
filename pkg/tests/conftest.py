import pytest

from symlap.models.meshgen import gen_hyperbolic_genus2, gen_icosphere, gen_torus_grid
from symlap.verify.context import ManifoldContext

# lines recorded by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def ico2():
    return gen_icosphere(2)


@pytest.fixture(scope="session")
def ico3():
    return gen_icosphere(3)


@pytest.fixture(scope="session")
def ico4():
    return gen_icosphere(4)


@pytest.fixture(scope="session")
def torus8():
    return gen_torus_grid(8)


@pytest.fixture(scope="session")
def torus64():
    return gen_torus_grid(64)


@pytest.fixture(scope="session")
def hyp2():
    return gen_hyperbolic_genus2(2)


@pytest.fixture(scope="session")
def hyp4():
    return gen_hyperbolic_genus2(4)


@pytest.fixture(scope="session")
def ctx_ico4():
    return ManifoldContext.from_recipe("icosphere:4")


@pytest.fixture(scope="session")
def ctx_ico3():
    return ManifoldContext.from_recipe("icosphere:3")


@pytest.fixture(scope="session")
def ctx_torus64():
    return ManifoldContext.from_recipe("torus-grid:64")


@pytest.fixture(scope="session")
def ctx_hyp4():
    return ManifoldContext.from_recipe("hyperbolic-genus2:4")
