"""
Polynomial regression basis for conditional expectations.

Conditional expectations E[. | X_k] are least-squares projections onto
monomials of total degree <= p in the standardized state coordinates.
Coordinates with no cross-path spread (e.g. a deterministic X_0) are dropped,
so the projection degenerates to the sample mean instead of failing.
"""

import itertools
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class RegressionBasis:
    """Monomials of total degree <= ``degree``; fits above ``condition_limit`` are rejected."""
    degree: int = 2
    condition_limit: float = 1e12

    def exponents(self, dim: int) -> List[Tuple[int, ...]]:
        """Exponent tuples ordered by total degree, then lexicographically (descending)."""
        out = []
        for total in range(self.degree + 1):
            for combo in itertools.product(range(total, -1, -1), repeat=dim):
                if sum(combo) == total:
                    out.append(combo)
        return out

    def size(self, dim: int) -> int:
        return len(self.exponents(dim))

    def design(self, x: np.ndarray) -> np.ndarray:
        """Design matrix [n, basis] over the coordinates of x that vary."""
        mean = x.mean(axis=0)
        spread = x.std(axis=0)
        active = spread > 1e-12 * (1.0 + np.abs(mean))
        u = (x[:, active] - mean[active]) / spread[active]
        columns = []
        for powers in self.exponents(u.shape[1]):
            column = np.ones(x.shape[0])
            for j, p in enumerate(powers):
                if p:
                    column = column * u[:, j] ** p
            columns.append(column)
        return np.column_stack(columns)


@dataclass
class Projection:
    """Orthogonal projector onto the basis evaluated at one time step."""
    q: np.ndarray
    condition_number: float

    @classmethod
    def fit(cls, basis: RegressionBasis, x: np.ndarray) -> "Projection":
        phi = basis.design(x)
        q, r = scipy.linalg.qr(phi, mode="economic")
        singular = scipy.linalg.svdvals(r)
        smallest = singular[-1]
        cond = float(singular[0] / smallest) if smallest > 0 else float("inf")
        return cls(q=q, condition_number=cond)

    @property
    def n_basis(self) -> int:
        return self.q.shape[1]

    def __call__(self, target: np.ndarray) -> np.ndarray:
        """Fitted values of the regression of ``target`` ([n] or [n, m]) on the basis."""
        return self.q @ (self.q.T @ target)
