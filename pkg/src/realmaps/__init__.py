"""Positivity and separability checks for linear maps on real and complex matrix algebras."""

from realmaps.matkit import BipartiteOperator, Field
from realmaps.chanrep import LinearMapRep
from realmaps.posit import SolverConfig, Status, Verdict

__version__ = "0.1.0"

__all__ = ["BipartiteOperator", "Field", "LinearMapRep", "SolverConfig", "Status", "Verdict", "__version__"]
