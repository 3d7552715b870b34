import numpy as np
import pytest

from _acceptance_report import LINES
from mmokit import FoldPlan, TabularDataset


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)


def make_tabular(n=24, d=4, classes=2, seed=0, informative=1.8):
    """Small continuous dataset; feature 0 separates the classes."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % classes
    X = rng.normal(0.0, 1.0, size=(n, d))
    X[:, 0] += labels * informative
    return TabularDataset(X, labels, classes)


@pytest.fixture
def toy_dataset():
    return make_tabular()


@pytest.fixture
def toy_plan(toy_dataset):
    return FoldPlan.build(toy_dataset.n_samples, 5, seed=3)
