"""
Markov feedback policies.

A policy maps (t, x) to an index of its finite control set; tabulated
policies use the nearest lattice node and the time slice containing t, so
they only ever return points of the control set.
"""

from abc import ABC, abstractmethod
from typing import Protocol, Sequence

import numpy as np

from ..core.controls import ControlSet
from ..core.errors import PreconditionError


class NodeLocator(Protocol):
    """What a tabulated policy needs from a lattice."""
    n_t: int
    n_nodes: int

    def time_index(self, t: float) -> int: ...

    def nearest_node(self, x: np.ndarray) -> np.ndarray: ...


class FeedbackPolicy(ABC):
    """A control law u = pi(t, x) with values in a ControlSet."""

    def __init__(self, control_set: ControlSet):
        self.control_set = control_set

    @abstractmethod
    def indices(self, t: float, x: np.ndarray) -> np.ndarray:
        """Control-set indices for a batch of states x of shape [n, d]."""

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.control_set.points[self.indices(t, x)]


class ConstantPolicy(FeedbackPolicy):
    """Plays the same control point everywhere."""

    def __init__(self, control_set: ControlSet, point: Sequence[float]):
        super().__init__(control_set)
        try:
            self.index = control_set.index_of(point)
        except KeyError as e:
            raise PreconditionError(str(e))

    @classmethod
    def at_index(cls, control_set: ControlSet, index: int) -> "ConstantPolicy":
        return cls(control_set, control_set.point(index))

    def indices(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.full(x.shape[0], self.index, dtype=np.int64)

    def __repr__(self) -> str:
        return f"ConstantPolicy({self.control_set.point(self.index).tolist()})"


class TabulatedPolicy(FeedbackPolicy):
    """Nearest-node lookup in a [n_t, nodes] table of control indices."""

    def __init__(self, control_set: ControlSet, table: np.ndarray, locator: NodeLocator):
        super().__init__(control_set)
        table = np.asarray(table, dtype=np.int64)
        if table.shape != (locator.n_t, locator.n_nodes):
            raise PreconditionError(
                f"policy table has shape {table.shape}, expected {(locator.n_t, locator.n_nodes)}")
        if table.size and (table.min() < 0 or table.max() >= control_set.size):
            raise PreconditionError("policy table holds indices outside the control set")
        self.table = table
        self.locator = locator

    def indices(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.table[self.locator.time_index(t), self.locator.nearest_node(x)]

    def __repr__(self) -> str:
        return f"TabulatedPolicy(n_t={self.table.shape[0]}, nodes={self.table.shape[1]})"
