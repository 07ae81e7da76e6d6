import importlib.util
import os
from typing import Callable

import numpy as np
import pandas as pd
import pytest

from core.filters import FilterParams, Variant
from core.hashing import HashScheme, SchemeTag

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def load_script() -> Callable:
    """Import scripts/<name>.py as a module (scripts/ is not a package)."""
    cache = {}

    def _load(name: str):
        if name not in cache:
            path = os.path.join(ROOT, "scripts", f"{name}.py")
            spec = importlib.util.spec_from_file_location(f"scripts_{name}", path)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            cache[name] = module
        return cache[name]

    return _load


@pytest.fixture(scope="session")
def golden() -> Callable[[int], pd.DataFrame]:
    def _read(which: int) -> pd.DataFrame:
        return pd.read_csv(os.path.join(DATA_DIR, f"table{which}.csv"), dtype={"occupation": str})

    return _read


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


def random_elements(rng: np.random.Generator, count: int, nbytes: int = 12):
    return [rng.bytes(nbytes) for _ in range(count)]


# Every (variant, scheme) pair that can address a 4096-bit filter with k=8.
ALL_COMBOS = [
    (variant, scheme)
    for variant in Variant
    for scheme in SchemeTag
]


def params_for(variant: Variant, scheme: SchemeTag, seed: int = 7, m: int = 4096, k: int = 8) -> FilterParams:
    blocked = variant in (Variant.BLOCKED_STANDARD, Variant.BLOCKED_PARTITIONED)
    return FilterParams(
        m=m,
        k=k,
        variant=variant,
        block_bits=512 if blocked else 0,
        scheme=HashScheme(scheme, seed),
    )
