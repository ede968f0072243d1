"""Tournament combinatorics lab.

Backward-edge stars and nebulae, product tournaments, density structures,
and transitive-subtournament extraction, all validated at desk scale by
exhaustive oracles.
"""

__version__ = "0.1.0"
