from .behavior import Behavior, BellFunctional, SettingsSet
from .grid import PolarizationGrid
from .matrix import CMatrix
from .polarization import DensityMatrix, PolarizationVector
from .subensemble import SubensembleModel

__all__ = [
    "Behavior",
    "BellFunctional",
    "SettingsSet",
    "PolarizationGrid",
    "CMatrix",
    "DensityMatrix",
    "PolarizationVector",
    "SubensembleModel",
]
