import sys
from pathlib import Path

import numpy as np
import pytest

from acme_explain.tabular import Dataset, FeatureColumn

HELPERS = Path(__file__).parent / "helpers"


def child_command(mode: str, *params: float) -> list[str]:
    return [sys.executable, str(HELPERS / "child_model.py"), mode,
            *[str(p) for p in params]]


def numeric_dataset(X: np.ndarray, y=None, names=None) -> Dataset:
    p = X.shape[1]
    names = names or [f"f{j}" for j in range(p)]
    cols = tuple(FeatureColumn.numeric(names[j], X[:, j]) for j in range(p))
    target = FeatureColumn.numeric("y", y) if y is not None else None
    return Dataset(columns=cols, target=target)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
