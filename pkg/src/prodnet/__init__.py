"""Daily input-output simulator of production networks under lockdown shocks."""

from .dynamics import Params, Trajectory, run
from .economy import CriticalityMatrix, Economy, validate_economy
from .errors import ModelError, ProdNetError, ValidationError
from .production import ProductionFunction
from .shocks import Calendar, IndustryAttributes, ScenarioSpec, compile_schedule

__version__ = "0.1.0"

__all__ = [
    "Calendar",
    "CriticalityMatrix",
    "Economy",
    "IndustryAttributes",
    "ModelError",
    "Params",
    "ProdNetError",
    "ProductionFunction",
    "ScenarioSpec",
    "Trajectory",
    "ValidationError",
    "compile_schedule",
    "run",
    "validate_economy",
]
