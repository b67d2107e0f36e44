import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dirichlet_flows import TruncatedDirichletSeries

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_series(rng, N, density=1.0, radius=1.0):
    a = radius * np.sqrt(rng.random(N)) * np.exp(2j * np.pi * rng.random(N))
    a = a * (rng.random(N) < density)
    return TruncatedDirichletSeries(a)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for r in results:
        terminalreporter.write_line(r.line())
    passed = sum(r.passed for r in results)
    terminalreporter.write_line(f"{passed}/{len(results)} acceptance checks passed")
