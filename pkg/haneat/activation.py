"""Activation catalog shared by every node of a network.

Hidden nodes choose from step, relu, sigmoid and gaussian. Input, bias and
output nodes are always linear.
"""

from enum import IntEnum
from typing import List, Sequence

import numpy as np

from .errors import ConfigError, NumericError


class ActivationKind(IntEnum):
    """Integer activation gene; the value is the index in the catalog."""

    LINEAR = 0
    STEP = 1
    RELU = 2
    SIGMOID = 3
    GAUSSIAN = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ActivationKind":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            known = ", ".join(kind.label for kind in cls)
            raise ConfigError(f"Unknown activation '{label}' (expected one of: {known}).") from None


_HIDDEN = (ActivationKind.STEP, ActivationKind.RELU, ActivationKind.SIGMOID, ActivationKind.GAUSSIAN)


def hidden_catalog() -> List[ActivationKind]:
    """Return the kinds a hidden node may carry, in stable order."""
    return list(_HIDDEN)


def _linear(x: np.ndarray) -> np.ndarray:
    return x


def _step(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0.0, 1.0, 0.0)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # exp(-log(1 + e^-x)) == 1 / (1 + e^-x) without overflow for large |x|
    return np.exp(-np.logaddexp(0.0, -x))


def _gaussian(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.square(x))


_FUNCTIONS = {
    ActivationKind.LINEAR: _linear,
    ActivationKind.STEP: _step,
    ActivationKind.RELU: _relu,
    ActivationKind.SIGMOID: _sigmoid,
    ActivationKind.GAUSSIAN: _gaussian,
}


def apply_array(kind: ActivationKind, x: np.ndarray) -> np.ndarray:
    """Vectorised ``apply`` over a float64 array."""
    values = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NumericError(f"Non-finite input to {ActivationKind(kind).label} activation.")
    return _FUNCTIONS[ActivationKind(kind)](values)


def apply(kind: ActivationKind, x: float) -> float:
    """Transfer function f(x) of a single node."""
    return float(apply_array(kind, np.float64(x)))


def parse_catalog(labels: Sequence[str]) -> tuple:
    """Turn activation names into a catalog tuple of hidden kinds."""
    kinds = []
    for label in labels:
        kind = label if isinstance(label, ActivationKind) else ActivationKind.from_label(str(label))
        if kind not in _HIDDEN:
            raise ConfigError(f"'{kind.label}' is reserved for input/output nodes.")
        if kind not in kinds:
            kinds.append(kind)
    if not kinds:
        raise ConfigError("Activation catalog must contain at least one kind.")
    return tuple(kinds)
