import numpy as np
import pytest

from haneat.config import EvolutionConfig
from haneat.data import Dataset
from haneat.genome import (
    Genome,
    minimal_genome,
    mutate_activation,
    mutate_add_connection,
    mutate_add_node,
    mutate_toggle,
    mutate_weights,
)
from haneat.innovation import InnovationRegistry

MAX_NODES = 20


def grow_random_genome(rng: np.random.Generator) -> Genome:
    """Small valid genome built only through the mutation operators."""
    n_inputs = int(rng.integers(1, 4))
    n_outputs = int(rng.integers(1, 3))
    registry = InnovationRegistry.for_interface(n_inputs, n_outputs)
    genome = minimal_genome(n_inputs, n_outputs, rng)
    for _ in range(int(rng.integers(0, 14))):
        roll = rng.random()
        if roll < 0.35 and len(genome.nodes) < MAX_NODES:
            genome = mutate_add_node(genome, registry, rng)
        elif roll < 0.7:
            genome = mutate_add_connection(genome, registry, rng)
        elif roll < 0.85:
            genome = mutate_activation(genome, registry, rng)
        else:
            genome = mutate_toggle(genome, rng, p_enable=0.3, p_disable=0.3)
    return mutate_weights(genome, rng, p_weight=0.5, delta=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_cfg():
    return EvolutionConfig(population_size=12, max_generations=4, seed=3)


@pytest.fixture
def line_data():
    x = np.linspace(-1.0, 1.0, 25)
    return Dataset(name="line", inputs=x[:, None], targets=(0.5 + 0.4 * x)[:, None])
