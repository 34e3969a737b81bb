"""Generational loop: evaluate, speciate, allocate offspring, reproduce."""

import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .activation import ActivationKind, hidden_catalog
from .config import EvolutionConfig
from .data import Dataset
from .errors import ConfigError, HaneatError, NumericError
from .genome import (
    Genome,
    activation_counts,
    crossover,
    minimal_genome,
    mutate_activation,
    mutate_add_connection,
    mutate_add_node,
    mutate_toggle,
    mutate_weights,
    validate_genome,
)
from .innovation import InnovationRegistry
from .network import compile_genome, label_mse, mse
from .speciation import (
    SpeciationState,
    adjust_threshold,
    assign_species,
    census,
    shared_fitness,
    update_stagnation,
)

logger = logging.getLogger(__name__)

METRIC_COLUMNS = (
    "generation",
    "best_train_mse",
    "best_test_mse",
    "n_nodes",
    "n_enabled_connections",
    "n_species",
    "threshold",
)


@dataclass
class RunState:
    generation: int
    population: List[Genome]
    speciation: SpeciationState
    registry: InnovationRegistry
    rng: np.random.Generator
    champion: Optional[Genome] = None
    champion_mse: float = math.inf


@dataclass
class StepReport:
    generation: int
    champion_mse: float
    n_species: int
    threshold: float
    census: List[dict]


@dataclass
class RunMetrics:
    rows: List[dict] = field(default_factory=list)
    census: List[dict] = field(default_factory=list)
    activations: List[dict] = field(default_factory=list)
    train_mse: float = math.inf
    test_mse: float = math.inf

    def final(self, champion: Genome) -> dict:
        nodes, connections = champion.size()
        return {
            "train_mse": self.train_mse,
            "test_mse": self.test_mse,
            "n_nodes": nodes,
            "n_hidden": len(champion.hidden_nodes),
            "n_enabled_connections": connections,
        }


def fitness_of(error: float) -> float:
    """Map an MSE onto a fitness to maximise: 1 / (1 + mse)."""
    if math.isnan(error):
        return 0.0
    if error < 0:
        raise HaneatError(f"Negative mean squared error {error}.")
    return 1.0 / (1.0 + error)


def genome_error(g: Genome, data: Dataset, cfg: EvolutionConfig) -> float:
    """Error used for selection: label MSE for classification (unless configured raw), MSE otherwise."""
    try:
        phenotype = compile_genome(g)
        if data.task == "classification" and cfg.classification_fitness == "label":
            return label_mse(phenotype, data.inputs, data.targets)
        return mse(phenotype, data.inputs, data.targets)
    except NumericError:
        logger.debug("Genome produced a non-finite activation input; scored as infinite error")
        return math.inf


def evaluate_population(
    population: Sequence[Genome],
    data: Dataset,
    cfg: EvolutionConfig,
    executor: Optional[Executor] = None,
) -> List[float]:
    if executor is None:
        return [genome_error(g, data, cfg) for g in population]
    chunk = max(1, len(population) // (4 * max(cfg.eval_workers, 1)))
    return list(executor.map(partial(genome_error, data=data, cfg=cfg), population, chunksize=chunk))


# ---------------- reproduction ----------------
def allocate_offspring(totals: Sequence[float], pop_size: int) -> List[int]:
    """Largest-remainder split of ``pop_size`` proportional to ``totals``; uniform when all are 0."""
    shares = np.asarray(totals, dtype=np.float64)
    if shares.size == 0:
        return []
    if shares.sum() <= 0:
        shares = np.ones_like(shares)
    quotas = shares / shares.sum() * pop_size
    counts = np.floor(quotas).astype(int)
    remainder = pop_size - int(counts.sum())
    # stable sort keeps species order among equal remainders
    order = np.argsort(-(quotas - counts), kind="stable")
    for index in order[:remainder]:
        counts[index] += 1
    return [int(c) for c in counts]


def _tournament(members: Sequence[int], adjusted: np.ndarray, size: int, rng: np.random.Generator) -> int:
    picks = [members[int(rng.integers(len(members)))] for _ in range(size)]
    best = picks[0]
    for pick in picks[1:]:
        if adjusted[pick] > adjusted[best]:
            best = pick
    return best


def mutate(
    child: Genome,
    registry: InnovationRegistry,
    cfg: EvolutionConfig,
    rng: np.random.Generator,
) -> Genome:
    """Structural operators first (per-genome chances), then per-gene weight and toggle changes.

    Every Bernoulli trial is drawn whatever the outcome, so the random stream
    does not depend on which operators are switched on.
    """
    if rng.random() < cfg.p_add_node:
        child = mutate_add_node(child, registry, rng, cfg.catalog)
    if rng.random() < cfg.p_add_connection:
        child = mutate_add_connection(
            child, registry, rng, attempts=cfg.add_connection_attempts, weight_range=cfg.initial_weight_range
        )
    if rng.random() < cfg.p_mutate_activation:
        child = mutate_activation(child, registry, rng, cfg.catalog)
    child = mutate_weights(child, rng, cfg.p_mutate_weight, cfg.delta_weight)
    child = mutate_toggle(child, rng, cfg.p_enable, cfg.p_disable)
    return child


def _reproduce(
    population: List[Genome],
    fitnesses: np.ndarray,
    adjusted: np.ndarray,
    speciation: SpeciationState,
    registry: InnovationRegistry,
    cfg: EvolutionConfig,
    rng: np.random.Generator,
) -> List[Genome]:
    species = speciation.species
    champion_index = int(np.argmax(fitnesses))
    totals = [float(sum(adjusted[m] for m in sp.members)) for sp in species]
    counts = allocate_offspring(totals, cfg.population_size)

    home = next(i for i, sp in enumerate(species) if champion_index in sp.members)
    if counts[home] == 0:
        donor = int(np.argmax(counts))
        counts[donor] -= 1
        counts[home] += 1

    registry.new_generation()
    offspring: List[Genome] = []
    for sp, count in zip(species, counts):
        if count == 0:
            continue
        ranked = sorted(sp.members, key=lambda m: -fitnesses[m])
        if len(sp.members) > cfg.elitism_min_species_size or champion_index in sp.members:
            offspring.append(population[ranked[0]])
            count -= 1
        for _ in range(count):
            if rng.random() < cfg.crossover_fraction:
                first = _tournament(sp.members, adjusted, cfg.tournament_size, rng)
                second = _tournament(sp.members, adjusted, cfg.tournament_size, rng)
                if fitnesses[second] > fitnesses[first]:
                    first, second = second, first
                child = crossover(population[first], population[second], rng, cfg.disabled_inherit_rate)
            else:
                child = population[_tournament(sp.members, adjusted, cfg.tournament_size, rng)]
            offspring.append(mutate(child, registry, cfg, rng).with_fitness(None))
    return offspring


# ---------------- generational loop ----------------
def initial_state(cfg: EvolutionConfig, n_inputs: int, n_outputs: int) -> RunState:
    rng = np.random.default_rng(cfg.seed)
    population = [
        minimal_genome(n_inputs, n_outputs, rng, cfg.initial_weight_range) for _ in range(cfg.population_size)
    ]
    return RunState(
        generation=0,
        population=population,
        speciation=SpeciationState(threshold=cfg.compatibility_threshold, target_species=cfg.target_species),
        registry=InnovationRegistry.for_interface(n_inputs, n_outputs),
        rng=rng,
    )


def _update_champion(state: RunState, population: List[Genome], errors: List[float]) -> None:
    best = int(np.argmin(errors))
    if state.champion is None or errors[best] < state.champion_mse:
        state.champion = population[best]
        state.champion_mse = errors[best]


def step(
    state: RunState,
    cfg: EvolutionConfig,
    train: Dataset,
    executor: Optional[Executor] = None,
) -> Tuple[RunState, StepReport]:
    """Evaluate the current population and breed the next one."""
    errors = evaluate_population(state.population, train, cfg, executor)
    fitnesses = np.array([fitness_of(e) for e in errors])
    population = [g.with_fitness(float(f)) for g, f in zip(state.population, fitnesses)]
    _update_champion(state, population, errors)

    speciation = assign_species(population, state.speciation, cfg.coefficients, state.rng)
    speciation = update_stagnation(speciation, fitnesses)
    adjusted = shared_fitness(speciation, fitnesses, cfg.dropoff_age)
    report = StepReport(
        generation=state.generation,
        champion_mse=state.champion_mse,
        n_species=len(speciation.species),
        threshold=speciation.threshold,
        census=census(speciation, fitnesses),
    )
    population = [g.with_fitness(g.fitness, float(a)) for g, a in zip(population, adjusted)]

    offspring = _reproduce(population, fitnesses, adjusted, speciation, state.registry, cfg, state.rng)
    if cfg.debug_checks:
        for child in offspring:
            validate_genome(child)

    next_state = replace(
        state,
        generation=state.generation + 1,
        population=offspring,
        speciation=adjust_threshold(speciation, cfg.threshold_step, cfg.threshold_floor),
    )
    return next_state, report


def _histogram_row(generation: int, champion: Genome) -> dict:
    counts = activation_counts(champion)
    return {"generation": generation, **{kind.label: counts.get(kind, 0) for kind in hidden_catalog()}}


def run(
    cfg: EvolutionConfig,
    train: Dataset,
    test: Optional[Dataset] = None,
    log_every: int = 0,
) -> Tuple[Genome, RunMetrics]:
    """Evolve for ``cfg.max_generations``; the test set is only measured, never selected on."""
    cfg.validate()
    state = initial_state(cfg, train.n_inputs, train.n_targets)
    metrics = RunMetrics()
    executor = ProcessPoolExecutor(max_workers=cfg.eval_workers) if cfg.eval_workers > 1 else None
    measured: List = [None, math.nan]  # (champion, its test error)

    def test_error(genome: Genome) -> float:
        if test is None:
            return math.nan
        if measured[0] is not genome:
            measured[:] = [genome, genome_error(genome, test, cfg)]
        return measured[1]

    try:
        for _ in range(cfg.max_generations):
            state, report = step(state, cfg, train, executor)
            champion = state.champion
            nodes, connections = champion.size()
            metrics.rows.append(
                {
                    "generation": report.generation,
                    "best_train_mse": state.champion_mse,
                    "best_test_mse": test_error(champion),
                    "n_nodes": nodes,
                    "n_enabled_connections": connections,
                    "n_species": report.n_species,
                    "threshold": report.threshold,
                }
            )
            metrics.census.extend({"generation": report.generation, **row} for row in report.census)
            metrics.activations.append(_histogram_row(report.generation, champion))
            if log_every and (report.generation + 1) % log_every == 0:
                logger.info(
                    "gen %d: train mse %.6f, %d nodes, %d connections, %d species (threshold %.2f)",
                    report.generation,
                    state.champion_mse,
                    nodes,
                    connections,
                    report.n_species,
                    report.threshold,
                )
        if state.champion is None:
            errors = evaluate_population(state.population, train, cfg, executor)
            population = [g.with_fitness(fitness_of(e)) for g, e in zip(state.population, errors)]
            _update_champion(state, population, errors)
    finally:
        if executor is not None:
            executor.shutdown()

    metrics.train_mse = state.champion_mse
    metrics.test_mse = test_error(state.champion)
    return state.champion, metrics


def homogeneous_config(cfg: EvolutionConfig, fixed: ActivationKind) -> EvolutionConfig:
    if fixed not in hidden_catalog():
        raise ConfigError(f"'{ActivationKind(fixed).label}' cannot be used as a hidden activation.")
    return replace(cfg, catalog=(ActivationKind(fixed),), p_mutate_activation=0.0)


def run_homogeneous(
    cfg: EvolutionConfig,
    fixed: ActivationKind,
    train: Dataset,
    test: Optional[Dataset] = None,
    log_every: int = 0,
) -> Tuple[Genome, RunMetrics]:
    """Standard NEAT: every new node gets ``fixed`` and activations never mutate."""
    return run(homogeneous_config(cfg, fixed), train, test, log_every)

