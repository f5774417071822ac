import numpy as np
import pytest

from pdvoice.audio import AudioSegment


def sine(freq, duration=1.0, sample_rate=16000, amp=0.5, phase=0.0):
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    return AudioSegment(amp * np.sin(2 * np.pi * freq * t + phase), sample_rate)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_table(n_groups=20, per_group=3, d=5, seed=0, shift=0.0):
    """Balanced table: even groups PD, odd groups HC; PD rows shifted by ``shift``."""
    from pdvoice.dataset import FeatureTable

    r = np.random.default_rng(seed)
    groups = np.repeat([f"g{i:03d}" for i in range(n_groups)], per_group)
    labels = np.repeat([1 - i % 2 for i in range(n_groups)], per_group)
    X = r.standard_normal((groups.size, d)) + shift * labels[:, None]
    return FeatureTable(X, [f"x{j}" for j in range(d)], groups, labels)


# verdict lines from tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
