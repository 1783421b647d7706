"""Simulation of a real harmonizable fractional stable process and of the heat
equation it drives, with two independent solution routes."""

from .errors import DomainError, InputError, NumericalError, ParameterError, StableSPDEError
from .stable_core import AtomSequence, StableParams, generate_atoms

__all__ = [
    "AtomSequence",
    "DomainError",
    "InputError",
    "NumericalError",
    "ParameterError",
    "StableParams",
    "StableSPDEError",
    "generate_atoms",
]
__version__ = "0.1.0"
