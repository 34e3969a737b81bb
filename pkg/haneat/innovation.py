"""Historical markings handed out during reproduction."""

import logging
import threading
from typing import Dict, Hashable, Tuple

logger = logging.getLogger(__name__)


class InnovationRegistry:
    """Global counters for innovation numbers and node ids.

    Identical structural mutations inside one generation (same split
    connection, same new edge endpoints) get identical numbers through a
    per-generation memo. The memo is cleared by ``new_generation``; the
    counters never go backwards.
    """

    def __init__(self, next_innovation: int = 0, next_node_id: int = 0):
        self.next_innovation = next_innovation
        self.next_node_id = next_node_id
        self.generation = 0
        self._memo: Dict[Hashable, object] = {}
        self._lock = threading.Lock()

    @classmethod
    def for_interface(cls, n_inputs: int, n_outputs: int) -> "InnovationRegistry":
        """Registry whose counters start after the ids used by ``minimal_genome``."""
        return cls(
            next_innovation=(n_inputs + 1) * n_outputs,
            next_node_id=n_inputs + 1 + n_outputs,
        )

    def new_generation(self) -> None:
        with self._lock:
            self._memo.clear()
            self.generation += 1

    def fresh_innovation(self) -> int:
        with self._lock:
            return self._take_innovation()

    def fresh_node_id(self) -> int:
        with self._lock:
            node_id = self.next_node_id
            self.next_node_id += 1
            return node_id

    def connection(self, source: int, target: int) -> int:
        """Innovation number of a new edge ``source -> target``."""
        with self._lock:
            return self._connection(source, target)

    def split(self, innovation: int, source: int, target: int) -> Tuple[int, int, int]:
        """(node id, incoming innovation, outgoing innovation) for splitting ``innovation``."""
        with self._lock:
            key = ("split", innovation)
            if key not in self._memo:
                node_id = self.next_node_id
                self.next_node_id += 1
                self._memo[key] = (node_id, self._connection(source, node_id), self._connection(node_id, target))
            else:
                logger.debug("Reusing split of innovation %d in generation %d", innovation, self.generation)
            return self._memo[key]

    def _connection(self, source: int, target: int) -> int:
        key = ("connection", source, target)
        if key not in self._memo:
            self._memo[key] = self._take_innovation()
        return self._memo[key]

    def _take_innovation(self) -> int:
        innovation = self.next_innovation
        self.next_innovation += 1
        return innovation
