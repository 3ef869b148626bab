import pytest

from radialtomo.filterbank import build_bank
from radialtomo.wavelet1d import autocorrelation_pair

CRITERIA = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def db6():
    return autocorrelation_pair(6, 10)


@pytest.fixture(scope="session")
def bank00():
    """Scaling, horizontal and diagonal kernels at level 0."""
    return build_bank(6, J=0, Jmax=0, include_vertical=False)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for the acceptance summary."""
    lines = request.config.stash.setdefault(CRITERIA, [])

    def record(number, title, passed, **measured):
        vals = " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                        for k, v in measured.items())
        line = f"criterion {number} {title}: {'PASS' if passed else 'FAIL'} {vals}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
