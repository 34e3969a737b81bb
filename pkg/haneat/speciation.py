"""Species assignment, threshold control, fitness sharing and stagnation."""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence

import numpy as np

from .config import Coefficients
from .genome import Genome, compatibility_distance

logger = logging.getLogger(__name__)


@dataclass
class Species:
    id: int
    representative: Genome
    members: List[int] = field(default_factory=list)
    best_fitness_ever: float = -math.inf
    generations_since_improvement: int = 0

    def is_stagnant(self, dropoff_age: int) -> bool:
        return self.generations_since_improvement >= dropoff_age


@dataclass
class SpeciationState:
    threshold: float
    target_species: int
    species: List[Species] = field(default_factory=list)
    next_species_id: int = 0

    def species_of(self) -> Dict[int, Species]:
        """Population index -> its species."""
        return {member: sp for sp in self.species for member in sp.members}


def assign_species(
    population: Sequence[Genome],
    state: SpeciationState,
    coeffs: Coefficients,
    rng: np.random.Generator,
) -> SpeciationState:
    """First-match assignment against representatives, in species-id order."""
    species = [replace(sp, members=[]) for sp in sorted(state.species, key=lambda s: s.id)]
    next_id = state.next_species_id
    for index, genome in enumerate(population):
        for sp in species:
            if compatibility_distance(genome, sp.representative, coeffs) < state.threshold:
                sp.members.append(index)
                break
        else:
            species.append(Species(id=next_id, representative=genome, members=[index]))
            next_id += 1

    survivors = [sp for sp in species if sp.members]
    for sp in survivors:
        sp.representative = population[sp.members[int(rng.integers(len(sp.members)))]]
    dropped = len(species) - len(survivors)
    if dropped:
        logger.debug("%d species went extinct", dropped)
    return replace(state, species=survivors, next_species_id=next_id)


def adjust_threshold(state: SpeciationState, step: float = 0.5, floor: float = 0.5) -> SpeciationState:
    """Additive controller steering the species count towards the target."""
    count = len(state.species)
    threshold = state.threshold
    if count > state.target_species:
        threshold += step
    elif count < state.target_species:
        threshold -= step
    return replace(state, threshold=max(threshold, floor))


def update_stagnation(state: SpeciationState, fitnesses: Sequence[float]) -> SpeciationState:
    """Refresh each species' best fitness and its generations-without-improvement counter."""
    species = []
    for sp in state.species:
        best = max(fitnesses[m] for m in sp.members)
        if best > sp.best_fitness_ever:
            sp = replace(sp, best_fitness_ever=best, generations_since_improvement=0)
        else:
            sp = replace(sp, generations_since_improvement=sp.generations_since_improvement + 1)
        species.append(sp)
    return replace(state, species=species)


def shared_fitness(state: SpeciationState, fitnesses: Sequence[float], dropoff_age: int = 15) -> np.ndarray:
    """Raw fitness divided by species size; stagnant species other than the champion's get 0."""
    raw = np.asarray(fitnesses, dtype=np.float64)
    adjusted = np.zeros_like(raw)
    champion = int(np.argmax(raw)) if raw.size else -1
    for sp in state.species:
        if sp.is_stagnant(dropoff_age) and champion not in sp.members:
            logger.debug("Species %d stagnant for %d generations", sp.id, sp.generations_since_improvement)
            continue
        for member in sp.members:
            adjusted[member] = raw[member] / len(sp.members)
    return adjusted


def census(state: SpeciationState, fitnesses: Sequence[float]) -> List[dict]:
    return [
        {
            "species": sp.id,
            "size": len(sp.members),
            "best_fitness": max(fitnesses[m] for m in sp.members),
            "threshold": state.threshold,
        }
        for sp in state.species
    ]
