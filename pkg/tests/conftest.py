import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flowsvm.dataset import TEST1, TEST3, stratified_split  # noqa: E402
from flowsvm.multiclass import train_ovo  # noqa: E402
from flowsvm.smo import TrainConfig  # noqa: E402
from flowsvm.synthetic import synth_generate  # noqa: E402

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def full_scale():
    """The 5676-sample surrogate with the stratified 80/20 split (seed 7)."""
    data = synth_generate(seed=7, n=5676)
    train, test = stratified_split(data, 0.2, seed=7)
    return data, train, test


@pytest.fixture(scope="session")
def model_test1(full_scale):
    _, train, _ = full_scale
    return train_ovo(train, TEST1, TrainConfig.of(100, 10))


@pytest.fixture(scope="session")
def model_test3(full_scale):
    _, train, _ = full_scale
    return train_ovo(train, TEST3, TrainConfig.of(1000, 10))


@pytest.fixture(scope="session")
def small_data():
    return synth_generate(seed=3, n=300)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else ""))
