import pytest

from mtobench import _kernels
from mtobench._kernels import _pykernels

BACKENDS = ["python"] + (["cython"] if _kernels.BACKEND == "cython" else [])
_KERNEL_NAMES = ("nondominated_ranks", "hv2d", "min_distances")

_ACCEPTANCE: dict = {}


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    impl = _pykernels if request.param == "python" else _kernels._impl
    for name in _KERNEL_NAMES:
        monkeypatch.setattr(_kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def acceptance(request):
    """Record the outcome of an acceptance criterion for the terminal summary."""
    def record(number: int, ok: bool, detail: str):
        _ACCEPTANCE[number] = (ok, detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
