from dataclasses import replace

import numpy as np
import pytest

from haneat.activation import ActivationKind
from haneat.config import Coefficients
from haneat.genome import (
    ConnectionGene,
    Genome,
    NodeGene,
    NodeRole,
    compatibility_distance,
    minimal_genome,
    mutate_activation,
)
from haneat.innovation import InnovationRegistry
from haneat.speciation import (
    Species,
    SpeciationState,
    adjust_threshold,
    assign_species,
    census,
    shared_fitness,
    update_stagnation,
)


@pytest.fixture
def pair(rng):
    a = minimal_genome(1, 1, rng)
    b = Genome(nodes=a.nodes, connections=tuple(replace(c, weight=c.weight + 50.0) for c in a.connections))
    return a, b


def test_first_match_assignment(pair, rng):
    a, b = pair
    state = assign_species([a, a, b], SpeciationState(threshold=3.0, target_species=2), Coefficients(), rng)
    assert [sp.id for sp in state.species] == [0, 1]
    assert [sp.members for sp in state.species] == [[0, 1], [2]]
    assert state.next_species_id == 2
    assert state.species_of()[2].id == 1


def test_empty_species_are_dropped(pair, rng):
    a, b = pair
    state = assign_species([a, b], SpeciationState(threshold=3.0, target_species=2), Coefficients(), rng)
    state = assign_species([b, b, b], state, Coefficients(), rng)
    assert [sp.id for sp in state.species] == [1]
    assert state.species[0].members == [0, 1, 2]
    assert state.next_species_id == 2


def test_representative_is_a_member(pair, rng):
    a, b = pair
    population = [a, b, a, b]
    state = assign_species(population, SpeciationState(threshold=3.0, target_species=2), Coefficients(), rng)
    for sp in state.species:
        assert any(sp.representative is population[m] for m in sp.members)


def test_threshold_controller():
    rep = object()
    many = SpeciationState(threshold=2.0, target_species=1, species=[Species(0, rep, [0]), Species(1, rep, [1])])
    assert adjust_threshold(many).threshold == 2.5
    few = SpeciationState(threshold=2.0, target_species=5, species=[Species(0, rep, [0])])
    assert adjust_threshold(few).threshold == 1.5
    exact = SpeciationState(threshold=2.0, target_species=1, species=[Species(0, rep, [0])])
    assert adjust_threshold(exact).threshold == 2.0
    low = SpeciationState(threshold=0.7, target_species=5, species=[])
    assert adjust_threshold(low).threshold == 0.5


def test_stagnation_counter():
    state = SpeciationState(threshold=1.0, target_species=1, species=[Species(0, None, [0, 1])])
    state = update_stagnation(state, [0.2, 0.4])
    assert state.species[0].best_fitness_ever == 0.4
    assert state.species[0].generations_since_improvement == 0
    state = update_stagnation(state, [0.3, 0.4])
    assert state.species[0].generations_since_improvement == 1
    state = update_stagnation(state, [0.5, 0.1])
    assert state.species[0].generations_since_improvement == 0


def test_shared_fitness_and_dropoff():
    stale = Species(0, None, [0, 1], best_fitness_ever=1.0, generations_since_improvement=20)
    fresh = Species(1, None, [2])
    state = SpeciationState(threshold=1.0, target_species=2, species=[stale, fresh])

    adjusted = shared_fitness(state, [0.5, 0.4, 0.9], dropoff_age=15)
    np.testing.assert_allclose(adjusted, [0.0, 0.0, 0.9])

    # the champion's species is never dropped
    adjusted = shared_fitness(state, [0.9, 0.4, 0.5], dropoff_age=15)
    np.testing.assert_allclose(adjusted, [0.45, 0.2, 0.5])


def test_census_rows():
    state = SpeciationState(threshold=1.5, target_species=2, species=[Species(4, None, [0, 2]), Species(7, None, [1])])
    rows = census(state, [0.1, 0.8, 0.3])
    assert rows == [
        {"species": 4, "size": 2, "best_fitness": 0.3, "threshold": 1.5},
        {"species": 7, "size": 1, "best_fitness": 0.8, "threshold": 1.5},
    ]


def test_activation_mutation_of_a_hub_node_starts_a_new_species(rng):
    nodes = [NodeGene(i, NodeRole.INPUT) for i in range(3)]
    nodes += [NodeGene(3, NodeRole.BIAS), NodeGene(4, NodeRole.OUTPUT), NodeGene(5, NodeRole.OUTPUT)]
    nodes.append(NodeGene(6, NodeRole.HIDDEN, ActivationKind.SIGMOID))
    edges = [(3, 4), (3, 5), (0, 6), (1, 6), (2, 6), (6, 4), (6, 5)]
    parent = Genome(
        nodes=tuple(nodes),
        connections=tuple(ConnectionGene(i, s, t, 0.5) for i, (s, t) in enumerate(edges)),
    )
    child = mutate_activation(parent, InnovationRegistry(next_innovation=7, next_node_id=7), rng)

    # five renumbered genes are disjoint in the parent and excess in the child
    assert compatibility_distance(parent, child, Coefficients()) == 10.0
    state = assign_species([parent, child], SpeciationState(threshold=3.0, target_species=2), Coefficients(), rng)
    assert [sp.members for sp in state.species] == [[0], [1]]
