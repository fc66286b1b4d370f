"""Predimension workbench: strong extensions, amalgams and the j-function toys."""
from .core import delta, is_strong, self_sufficient_closure, submodularity_audit
from .errors import PredimError
from .universe import ClassId, Point, Substructure, Universe, generate, whole

__version__ = "0.1.0"
