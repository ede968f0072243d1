"""The two bundled 12-vertex reference tournaments.

Both are specified by their backward edges under the identity ordering,
using 1-based labels as in the source data; the module stores them 0-based.
The first decomposes into left stars and 2-vertex stars and embeds into a
product-form left nebula; the second is a central nebula.  Both are prime.
"""

from __future__ import annotations

from .core import Tournament, from_backward_edges

# 1-based: {(5,1),(9,1),(8,6),(11,6),(4,2),(10,3),(12,7)}
LEFT_EXAMPLE_BACK_EDGES: tuple[tuple[int, int], ...] = (
    (4, 0),
    (8, 0),
    (7, 5),
    (10, 5),
    (3, 1),
    (9, 2),
    (11, 6),
)

# 1-based: {(4,1),(8,4),(5,3),(9,5),(6,2),(11,6),(10,7),(12,10)}
CENTRAL_EXAMPLE_BACK_EDGES: tuple[tuple[int, int], ...] = (
    (3, 0),
    (7, 3),
    (4, 2),
    (8, 4),
    (5, 1),
    (10, 5),
    (9, 6),
    (11, 9),
)

IDENTITY_12 = tuple(range(12))


def left_example() -> Tournament:
    return from_backward_edges(12, IDENTITY_12, LEFT_EXAMPLE_BACK_EDGES)


def central_example() -> Tournament:
    return from_backward_edges(12, IDENTITY_12, CENTRAL_EXAMPLE_BACK_EDGES)
