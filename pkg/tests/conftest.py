import numpy as np
import pytest

from subpel.filter_bank import FilterKind, FilterSpec

KIND_TAPS = [
    (FilterKind.POLYNOMIAL, 2),
    (FilterKind.POLYNOMIAL, 4),
    (FilterKind.WINDOWED_SINC, 2),
    (FilterKind.WINDOWED_SINC, 4),
    (FilterKind.WINDOWED_SINC, 8),
    (FilterKind.WINDOWED_SINC, 12),
]


def keys_cubic(x, a=-0.75):
    """Keys cubic convolution kernel, written out piecewise."""
    x = abs(x)
    if x <= 1:
        return (a + 2) * x**3 - (a + 3) * x**2 + 1
    if x < 2:
        return a * x**3 - 5 * a * x**2 + 8 * a * x - 4 * a
    return 0.0


def numpy_sinc_taps(N, s, normalize=True):
    """Windowed-sinc taps through numpy's own sinc, independent of the math path."""
    kappa = np.arange(1, N + 1) - N / 2
    u = s - kappa
    h = np.cos(u * np.pi / N) * np.sinc(u)
    return h / h.sum() if normalize else h


def random_frame(rng, width, height, channels=1):
    from subpel import Frame
    return Frame(rng.uniform(0.0, 1.0, size=(channels, height, width)))


def random_field(rng, width, height, block_size, scale=3.0):
    from subpel import MotionField
    gh, gw = -(-height // block_size), -(-width // block_size)
    return MotionField(width, height, block_size, rng.uniform(-scale, scale, size=(gh, gw, 2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=KIND_TAPS, ids=lambda kt: f"{kt[0].value}{kt[1]}")
def spec(request):
    kind, taps = request.param
    return FilterSpec(kind, taps)


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
