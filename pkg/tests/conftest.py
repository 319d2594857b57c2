import numpy as np
import pytest

from coursecast import build_catalog, build_examples, generate, split_dataset
from coursecast.synth import SynthConfig


@pytest.fixture(scope="session")
def small_corpus():
    """A 60-student corpus shared by tests that just need real-shaped data.

    The ability shift keeps both labels common enough for tiny splits.
    """
    records, truth = generate(
        SynthConfig(num_students=60, catalog_size=12, ability_mean=1.2, withdraw_prob=0.0, seed=3)
    )
    return records, truth


@pytest.fixture(scope="session")
def small_split(small_corpus):
    records, _ = small_corpus
    catalog = build_catalog(records)
    examples, _ = build_examples(records, catalog)
    return catalog, split_dataset(examples, validation_fraction=0.2, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
