"""Exception types shared across the library."""


class NebulabError(Exception):
    """Base class for library errors."""


class BudgetError(NebulabError):
    """An exact solver was asked to exceed its configured search budget."""


class InvariantError(NebulabError):
    """An internal invariant that should hold by construction was violated."""


class CoverageTieError(NebulabError):
    """Raised when a coverage tie makes the pair-fallback size bounds unachievable.

    Happens only for triples where both cumulative coverages cross the half
    threshold at the same step and no witness vertex triple exists; the
    guaranteed construction then cannot meet both half-size bounds.
    """


class LambdaTooLargeError(NebulabError):
    """Product extraction failed and the density slack exceeds the Turan threshold."""

    def __init__(self, lam, threshold):
        super().__init__(
            f"no clique found: lambda {lam} is not below the guarantee threshold {threshold}"
        )
        self.lam = lam
        self.threshold = threshold
