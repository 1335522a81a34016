import pytest

STEP = """function.variant = step
function.breakpoints = 0.0 0.5
function.values = 0.0 1.5
"""
COSINE = """function.variant = trig
function.cos[0] = 2.0
"""

# one small, fast run description per experiment kind
KIND_CONFIGS = {
    "lyapunov-scan": COSINE + "energy_lo = -3\nenergy_hi = 3\nenergy_count = 7\nlyapunov_N = 2000\n",
    "m-function": COSINE + "energy_lo = -1\nenergy_hi = 1\nenergy_count = 3\nenergy_imag = 0.5\nsamples = 16\n",
    "measure": COSINE + "grid_count = 20\nlyapunov_N = 2000\n",
    "coupling-sweep": COSINE + "coupling_max = 1\ncoupling_count = 3\ngrid_count = 10\nlyapunov_N = 2000\n",
    "approximation": STEP + "schedule = 16 64\ngrid_count = 10\nlyapunov_N = 2000\nhorizon = 50\n",
    "sc-weight": "bound = 1.0\ngrid_count = 9\n",
    "harmonic-check": COSINE + "center_im = 2\nradius = 1\npoints = 8\nsamples = 16\n",
}


@pytest.fixture
def kind_configs():
    return {k: f"experiment = {k}\n" + v for k, v in KIND_CONFIGS.items()}


ACCEPTANCE_LINES = {}


@pytest.fixture
def verdict(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
