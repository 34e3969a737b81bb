"""Feedforward phenotype compiled from a genome."""

import heapq
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .activation import ActivationKind, apply_array
from .errors import StructureError, UsageError
from .genome import Genome

CLASSIFICATION_THRESHOLD = 0.5


@dataclass(frozen=True)
class Phenotype:
    eval_order: Tuple[int, ...]
    incoming: Dict[int, Tuple[Tuple[int, float], ...]]
    activations: Dict[int, ActivationKind]
    input_ids: Tuple[int, ...]
    output_ids: Tuple[int, ...]
    bias_id: int


def compile_genome(g: Genome) -> Phenotype:
    """Topologically order the enabled digraph (ties broken by ascending node id)."""
    incoming: Dict[int, List[Tuple[int, float]]] = defaultdict(list)
    children: Dict[int, List[int]] = defaultdict(list)
    indegree = {node.id: 0 for node in g.nodes}
    for conn in sorted(g.connections, key=lambda c: c.innovation):
        if not conn.enabled:
            continue
        if conn.source not in indegree or conn.target not in indegree:
            raise StructureError(f"Connection {conn.innovation} refers to a missing node.")
        incoming[conn.target].append((conn.source, conn.weight))
        children[conn.source].append(conn.target)
        indegree[conn.target] += 1

    ready = [node_id for node_id, degree in indegree.items() if degree == 0]
    heapq.heapify(ready)
    order: List[int] = []
    while ready:
        node_id = heapq.heappop(ready)
        order.append(node_id)
        for child in children[node_id]:
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(ready, child)
    if len(order) != len(indegree):
        raise StructureError("Cycle among enabled connections; genome cannot be compiled.")

    return Phenotype(
        eval_order=tuple(order),
        incoming={node_id: tuple(edges) for node_id, edges in incoming.items()},
        activations={node.id: node.activation for node in g.nodes},
        input_ids=tuple(g.input_ids),
        output_ids=tuple(g.output_ids),
        bias_id=g.bias_id,
    )


def evaluate_batch(p: Phenotype, X: np.ndarray) -> np.ndarray:
    """Outputs for every row of ``X``; shape (rows, outputs), float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(p.input_ids):
        raise UsageError(f"Expected input rows of length {len(p.input_ids)}, got shape {X.shape}.")
    rows = X.shape[0]
    column = {node_id: i for i, node_id in enumerate(p.input_ids)}
    values: Dict[int, np.ndarray] = {}
    for node_id in p.eval_order:
        if node_id in column:
            values[node_id] = X[:, column[node_id]]
        elif node_id == p.bias_id:
            values[node_id] = np.ones(rows)
        else:
            total = np.zeros(rows)
            for source, weight in p.incoming.get(node_id, ()):
                total = total + weight * values[source]
            values[node_id] = apply_array(p.activations[node_id], total)
    if not p.output_ids:
        return np.zeros((rows, 0))
    return np.stack([values[node_id] for node_id in p.output_ids], axis=1)


def evaluate(p: Phenotype, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise UsageError(f"Expected a single input vector, got shape {x.shape}.")
    return evaluate_batch(p, x[np.newaxis, :])[0]


def _check_rows(X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, np.newaxis]
    if X.shape[0] == 0:
        raise UsageError("Cannot compute an error over an empty dataset.")
    if X.shape[0] != Y.shape[0]:
        raise UsageError(f"Row count mismatch: {X.shape[0]} inputs vs {Y.shape[0]} targets.")
    return X, Y


def mse(p: Phenotype, X: np.ndarray, Y: np.ndarray) -> float:
    """Mean squared error over all samples and all target columns."""
    X, Y = _check_rows(X, Y)
    return float(np.mean(np.square(evaluate_batch(p, X) - Y)))


def classify(p: Phenotype, x) -> int:
    if len(p.output_ids) != 1:
        raise UsageError(f"classify needs a single-output network, this one has {len(p.output_ids)}.")
    return int(evaluate(p, x)[0] >= CLASSIFICATION_THRESHOLD)


def predict_labels(p: Phenotype, X: np.ndarray) -> np.ndarray:
    return (evaluate_batch(p, X) >= CLASSIFICATION_THRESHOLD).astype(np.float64)


def label_mse(p: Phenotype, X: np.ndarray, Y: np.ndarray) -> float:
    """MSE of the rounded outputs against 0/1 labels."""
    X, Y = _check_rows(X, Y)
    return float(np.mean(np.square(predict_labels(p, X) - Y)))
