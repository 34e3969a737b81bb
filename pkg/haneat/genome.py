"""Direct encoding of heterogeneous feedforward networks and the genetic operators.

Genomes are immutable: every operator takes a genome and returns a new one
(or the same object when nothing changed). Node ids are laid out as inputs
``0..n_in-1``, bias ``n_in``, outputs ``n_in+1..n_in+n_out``; hidden nodes
get ids from the ``InnovationRegistry``.
"""

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .activation import ActivationKind, hidden_catalog
from .config import Coefficients
from .errors import ConfigError, StructureError
from .innovation import InnovationRegistry

logger = logging.getLogger(__name__)

# N stays 1 while both genomes are smaller than this
DISTANCE_NORMALIZE_FROM = 20


class NodeRole(str, Enum):
    INPUT = "input"
    OUTPUT = "output"
    HIDDEN = "hidden"
    BIAS = "bias"


@dataclass(frozen=True)
class NodeGene:
    id: int
    role: NodeRole
    activation: ActivationKind = ActivationKind.LINEAR


@dataclass(frozen=True)
class ConnectionGene:
    innovation: int
    source: int
    target: int
    weight: float
    enabled: bool = True


@dataclass(frozen=True)
class Genome:
    """Node genes sorted by id, connection genes sorted by innovation."""

    nodes: Tuple[NodeGene, ...]
    connections: Tuple[ConnectionGene, ...]
    fitness: Optional[float] = None
    adjusted_fitness: Optional[float] = None

    @property
    def node_map(self) -> Dict[int, NodeGene]:
        return {node.id: node for node in self.nodes}

    def ids_with_role(self, role: NodeRole) -> List[int]:
        return [node.id for node in self.nodes if node.role is role]

    @property
    def input_ids(self) -> List[int]:
        return self.ids_with_role(NodeRole.INPUT)

    @property
    def output_ids(self) -> List[int]:
        return self.ids_with_role(NodeRole.OUTPUT)

    @property
    def bias_id(self) -> int:
        return self.ids_with_role(NodeRole.BIAS)[0]

    @property
    def hidden_nodes(self) -> List[NodeGene]:
        return [node for node in self.nodes if node.role is NodeRole.HIDDEN]

    @property
    def enabled_connections(self) -> List[ConnectionGene]:
        return [conn for conn in self.connections if conn.enabled]

    @property
    def interface(self) -> Tuple[Tuple[int, NodeRole], ...]:
        return tuple((node.id, node.role) for node in self.nodes if node.role is not NodeRole.HIDDEN)

    def with_fitness(self, fitness: Optional[float], adjusted_fitness: Optional[float] = None) -> "Genome":
        return replace(self, fitness=fitness, adjusted_fitness=adjusted_fitness)

    def size(self) -> Tuple[int, int]:
        """(node count, enabled connection count)."""
        return len(self.nodes), len(self.enabled_connections)


def _rebuild(nodes: Iterable[NodeGene], connections: Iterable[ConnectionGene]) -> Genome:
    return Genome(
        nodes=tuple(sorted(nodes, key=lambda n: n.id)),
        connections=tuple(sorted(connections, key=lambda c: c.innovation)),
    )


# ---------------- graph helpers ----------------
def _adjacency(connections: Iterable[ConnectionGene]) -> Dict[int, List[int]]:
    graph: Dict[int, List[int]] = defaultdict(list)
    for conn in connections:
        if conn.enabled:
            graph[conn.source].append(conn.target)
    return graph


def _reaches(graph: Dict[int, List[int]], start: int, goal: int) -> bool:
    stack = [start]
    seen: Set[int] = set()
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(graph.get(node, ()))
    return False


def creates_cycle(connections: Iterable[ConnectionGene], source: int, target: int) -> bool:
    """True when enabling ``source -> target`` closes a directed cycle over enabled edges."""
    if source == target:
        return True
    return _reaches(_adjacency(connections), target, source)


def is_acyclic(connections: Iterable[ConnectionGene]) -> bool:
    graph = _adjacency(connections)
    state: Dict[int, int] = {}  # 1 = on stack, 2 = done
    for root in list(graph):
        if state.get(root):
            continue
        stack = [(root, iter(graph[root]))]
        state[root] = 1
        while stack:
            node, children = stack[-1]
            child = next(children, None)
            if child is None:
                state[node] = 2
                stack.pop()
            elif state.get(child) == 1:
                return False
            elif not state.get(child):
                state[child] = 1
                stack.append((child, iter(graph.get(child, ()))))
    return True


def validate_genome(g: Genome) -> Genome:
    """Raise ``StructureError`` unless every genome invariant holds."""
    nodes = g.node_map
    if len(nodes) != len(g.nodes):
        raise StructureError("Duplicate node ids in genome.")
    for node in g.nodes:
        if node.role is NodeRole.HIDDEN:
            if node.activation not in hidden_catalog():
                raise StructureError(f"Hidden node {node.id} carries {node.activation.label}.")
        elif node.activation is not ActivationKind.LINEAR:
            raise StructureError(f"{node.role.value} node {node.id} must be linear.")
    innovations = [conn.innovation for conn in g.connections]
    if innovations != sorted(set(innovations)):
        raise StructureError("Connection genes are not sorted by unique innovation.")
    endpoints = set()
    for conn in g.connections:
        if conn.source not in nodes or conn.target not in nodes:
            raise StructureError(f"Connection {conn.innovation} refers to a missing node.")
        if conn.source == conn.target:
            raise StructureError(f"Connection {conn.innovation} is a self loop.")
        if nodes[conn.target].role in (NodeRole.INPUT, NodeRole.BIAS):
            raise StructureError(f"Connection {conn.innovation} targets an input.")
        if nodes[conn.source].role is NodeRole.OUTPUT:
            raise StructureError(f"Connection {conn.innovation} leaves an output.")
        if (conn.source, conn.target) in endpoints:
            raise StructureError(f"Connection {conn.innovation} duplicates an existing edge.")
        endpoints.add((conn.source, conn.target))
    if not is_acyclic(g.connections):
        raise StructureError("Enabled connections contain a cycle.")
    return g


def activation_counts(g: Genome) -> Counter:
    return Counter(node.activation for node in g.hidden_nodes)


# ---------------- construction ----------------
def minimal_genome(
    n_inputs: int,
    n_outputs: int,
    rng: np.random.Generator,
    weight_range: float = 2.0,
) -> Genome:
    """Inputs and bias fully connected to linear outputs, no hidden nodes."""
    if n_inputs < 1 or n_outputs < 1:
        raise ConfigError(f"A genome needs at least one input and one output, got {n_inputs}/{n_outputs}.")
    nodes = [NodeGene(i, NodeRole.INPUT) for i in range(n_inputs)]
    nodes.append(NodeGene(n_inputs, NodeRole.BIAS))
    outputs = [n_inputs + 1 + j for j in range(n_outputs)]
    nodes.extend(NodeGene(node_id, NodeRole.OUTPUT) for node_id in outputs)

    weights = rng.uniform(-weight_range, weight_range, size=(n_inputs + 1) * n_outputs)
    connections = []
    for source in range(n_inputs + 1):
        for j, target in enumerate(outputs):
            innovation = source * n_outputs + j
            connections.append(ConnectionGene(innovation, source, target, float(weights[innovation])))
    return _rebuild(nodes, connections)


# ---------------- structural mutations ----------------
def mutate_add_node(
    g: Genome,
    innovations: InnovationRegistry,
    rng: np.random.Generator,
    catalog: Sequence[ActivationKind] = tuple(hidden_catalog()),
) -> Genome:
    """Split an enabled connection with a new hidden node of random activation."""
    enabled = g.enabled_connections
    if not enabled:
        return g
    chosen = enabled[int(rng.integers(len(enabled)))]
    kind = catalog[int(rng.integers(len(catalog)))]
    node_id, in_innovation, out_innovation = innovations.split(chosen.innovation, chosen.source, chosen.target)
    if node_id in g.node_map:
        logger.debug("Split of %d already present in genome; skipping", chosen.innovation)
        return g

    connections = [replace(conn, enabled=False) if conn is chosen else conn for conn in g.connections]
    connections.append(ConnectionGene(in_innovation, chosen.source, node_id, 1.0))
    connections.append(ConnectionGene(out_innovation, node_id, chosen.target, chosen.weight))
    nodes = list(g.nodes) + [NodeGene(node_id, NodeRole.HIDDEN, ActivationKind(kind))]
    return _rebuild(nodes, connections)


def mutate_add_connection(
    g: Genome,
    innovations: InnovationRegistry,
    rng: np.random.Generator,
    attempts: int = 20,
    weight_range: float = 2.0,
) -> Genome:
    """Add one role-legal, acyclic, not yet present edge; no-op when none is found."""
    sources = [node.id for node in g.nodes if node.role is not NodeRole.OUTPUT]
    targets = [node.id for node in g.nodes if node.role in (NodeRole.HIDDEN, NodeRole.OUTPUT)]
    existing = {(conn.source, conn.target) for conn in g.connections}
    for _ in range(attempts):
        source = sources[int(rng.integers(len(sources)))]
        target = targets[int(rng.integers(len(targets)))]
        if (source, target) in existing or creates_cycle(g.connections, source, target):
            continue
        weight = float(rng.uniform(-weight_range, weight_range))
        innovation = innovations.connection(source, target)
        return _rebuild(g.nodes, list(g.connections) + [ConnectionGene(innovation, source, target, weight)])
    return g


def mutate_activation(
    g: Genome,
    innovations: InnovationRegistry,
    rng: np.random.Generator,
    catalog: Sequence[ActivationKind] = tuple(hidden_catalog()),
) -> Genome:
    """Redraw the activation of one hidden node and give it a new identity.

    The node gets a fresh id and every incident connection, enabled or not,
    a fresh innovation number. Weights and enabled flags are kept. With a
    single-kind catalog there is nothing to choose and no random draw is made.
    """
    if len(catalog) < 2:
        return g
    hidden = g.hidden_nodes
    if not hidden:
        return g
    node = hidden[int(rng.integers(len(hidden)))]
    kind = ActivationKind(catalog[int(rng.integers(len(catalog)))])
    new_id = innovations.fresh_node_id()

    connections = []
    for conn in g.connections:
        if node.id in (conn.source, conn.target):
            conn = replace(
                conn,
                innovation=innovations.fresh_innovation(),
                source=new_id if conn.source == node.id else conn.source,
                target=new_id if conn.target == node.id else conn.target,
            )
        connections.append(conn)
    nodes = [n for n in g.nodes if n.id != node.id] + [NodeGene(new_id, NodeRole.HIDDEN, kind)]
    logger.debug("Node %d (%s) -> %d (%s)", node.id, node.activation.label, new_id, kind.label)
    return _rebuild(nodes, connections)


# ---------------- parametric mutations ----------------
def mutate_weights(g: Genome, rng: np.random.Generator, p_weight: float = 0.2, delta: float = 2.0) -> Genome:
    """Perturb each weight with probability ``p_weight`` by U(-delta, delta)."""
    n = len(g.connections)
    if n == 0:
        return g
    hits = rng.random(n) < p_weight
    shifts = rng.uniform(-delta, delta, size=n)
    if not hits.any():
        return g
    connections = [
        replace(conn, weight=float(conn.weight + shifts[i])) if hits[i] else conn
        for i, conn in enumerate(g.connections)
    ]
    return _rebuild(g.nodes, connections)


def mutate_toggle(g: Genome, rng: np.random.Generator, p_enable: float = 0.0002, p_disable: float = 0.002) -> Genome:
    """Flip enabled flags per gene, refusing cycles and orphaned outputs."""
    n = len(g.connections)
    if n == 0:
        return g
    draws = rng.random(n)
    outputs = set(g.output_ids)
    connections = list(g.connections)
    changed = False
    for i, conn in enumerate(connections):
        if conn.enabled and draws[i] < p_disable:
            if conn.target in outputs:
                feeding = sum(1 for c in connections if c.enabled and c.target == conn.target)
                if feeding <= 1:
                    continue
            connections[i] = replace(conn, enabled=False)
            changed = True
        elif not conn.enabled and draws[i] < p_enable:
            if creates_cycle(connections, conn.source, conn.target):
                continue
            connections[i] = replace(conn, enabled=True)
            changed = True
    if not changed:
        return g
    return _rebuild(g.nodes, connections)


# ---------------- crossover and distance ----------------
def crossover(
    fitter: Genome,
    other: Genome,
    rng: np.random.Generator,
    disabled_inherit_rate: float = 0.75,
) -> Genome:
    """Child aligned on innovation numbers; disjoint and excess genes come from ``fitter``."""
    if fitter.interface != other.interface:
        raise StructureError("Crossover between genomes with different input/output interfaces.")
    other_genes = {conn.innovation: conn for conn in other.connections}

    inherited: List[ConnectionGene] = []
    for conn in fitter.connections:
        match = other_genes.get(conn.innovation)
        if match is None:
            inherited.append(conn)
            continue
        pick = conn if rng.random() < 0.5 else match
        if not (conn.enabled and match.enabled):
            pick = replace(pick, enabled=bool(rng.random() >= disabled_inherit_rate))
        inherited.append(pick)

    # re-enabled genes may close a cycle: keep the oldest edges, disable the rest
    accepted: List[ConnectionGene] = []
    for conn in inherited:
        if conn.enabled and creates_cycle(accepted, conn.source, conn.target):
            logger.debug("Crossover disabled innovation %d to stay acyclic", conn.innovation)
            conn = replace(conn, enabled=False)
        accepted.append(conn)

    other_nodes = other.node_map
    nodes = []
    for node in fitter.nodes:
        twin = other_nodes.get(node.id)
        if node.role is NodeRole.HIDDEN and twin is not None and rng.random() >= 0.5:
            node = twin
        nodes.append(node)
    return _rebuild(nodes, accepted)


def compatibility_distance(a: Genome, b: Genome, coeffs: Coefficients = Coefficients()) -> float:
    """c_excess*E/N + c_disjoint*D/N + c_weight*mean|dw| over matching genes."""
    genes_a = {conn.innovation: conn for conn in a.connections}
    genes_b = {conn.innovation: conn for conn in b.connections}
    cutoff = min(max(genes_a, default=-1), max(genes_b, default=-1))

    excess = disjoint = 0
    for innovation in genes_a.keys() ^ genes_b.keys():
        if innovation > cutoff:
            excess += 1
        else:
            disjoint += 1
    matching = genes_a.keys() & genes_b.keys()
    weight_gap = (
        sum(abs(genes_a[i].weight - genes_b[i].weight) for i in matching) / len(matching) if matching else 0.0
    )
    larger = max(len(genes_a), len(genes_b))
    norm = 1.0 if larger < DISTANCE_NORMALIZE_FROM else float(larger)
    return coeffs.c_excess * excess / norm + coeffs.c_disjoint * disjoint / norm + coeffs.c_weight * weight_gap


# ---------------- genome file format ----------------
def to_dict(g: Genome) -> Dict[str, Any]:
    return {
        "nodes": [{"id": n.id, "role": n.role.value, "activation": n.activation.label} for n in g.nodes],
        "connections": [
            {
                "innovation": c.innovation,
                "source": c.source,
                "target": c.target,
                "weight": c.weight,
                "enabled": c.enabled,
            }
            for c in g.connections
        ],
        "fitness": g.fitness,
    }


def from_dict(payload: Dict[str, Any]) -> Genome:
    try:
        nodes = [
            NodeGene(int(n["id"]), NodeRole(n["role"]), ActivationKind.from_label(n["activation"]))
            for n in payload["nodes"]
        ]
        connections = [
            ConnectionGene(
                int(c["innovation"]), int(c["source"]), int(c["target"]), float(c["weight"]), bool(c["enabled"])
            )
            for c in payload["connections"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"Malformed genome document: {exc}") from exc
    fitness = payload.get("fitness")
    genome = _rebuild(nodes, connections)
    return genome.with_fitness(None if fitness is None else float(fitness))


def dumps(g: Genome) -> str:
    return json.dumps(to_dict(g), indent=2) + "\n"


def loads(text: str) -> Genome:
    return from_dict(json.loads(text))
