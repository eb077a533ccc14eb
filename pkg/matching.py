"""
Pairing computed eigenpairs with reference eigenpairs.

Implements minimal-cost bipartite matching on eigenvalues and on the
product distance dP2, plus detection of paths that converged to the
same eigenpair.
"""

from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from eigen_geometry import dP2
from models import EigenTriple


def eigenvalue_matching(computed: Sequence[complex],
                        reference: Sequence[complex]) -> Tuple[List[Tuple[int, int]], float]:
    """
    Optimal matching of two eigenvalue multisets.

    Returns:
        (list of (computed index, reference index), matching distance);
        the distance is the largest |λ − λ'| over matched pairs
    """
    computed = np.asarray(computed, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    if computed.size == 0 or reference.size == 0:
        return [], 0.0

    cost = np.abs(computed[:, None] - reference[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols)]
    return pairs, float(np.max(cost[rows, cols]))


def matching_distance(computed: Sequence[complex], reference: Sequence[complex]) -> float:
    """Bottleneck distance of the optimal eigenvalue matching."""
    if len(computed) != len(reference):
        return float("inf")
    return eigenvalue_matching(computed, reference)[1]


def pair_matching(computed: Sequence[EigenTriple],
                  reference: Sequence[EigenTriple]) -> List[Tuple[int, int, float]]:
    """
    Minimal total dP2 matching of computed to reference triples.

    Returns:
        List of (computed index, reference index, dP2)
    """
    if not computed or not reference:
        return []

    cost = np.array([[dP2(c, r) for r in reference] for c in computed])
    rows, cols = linear_sum_assignment(cost)
    return [(int(r), int(c), float(cost[r, c])) for r, c in zip(rows, cols)]


def nearest_pair(triple: EigenTriple, candidates: Sequence[EigenTriple]) -> Tuple[int, float]:
    """Index and dP2 of the candidate closest to `triple`."""
    distances = [dP2(triple, c) for c in candidates]
    best = int(np.argmin(distances))
    return best, distances[best]


def find_coincident_pairs(pairs: Sequence[EigenTriple],
                          tolerance: float = 1e-8) -> List[Tuple[int, int]]:
    """
    Index pairs (i, j), i < j, whose triples are within `tolerance` in dP2.

    Distinct paths ending on one eigenpair means a path jumped.
    """
    coincident = []
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            if dP2(pairs[i], pairs[j]) <= tolerance:
                coincident.append((i, j))
    return coincident
