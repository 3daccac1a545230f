"""
Exception hierarchy for calkin-lift
"""

from typing import Optional


class CalkinLiftError(Exception):
    """Base class for every error raised by the library"""


class ConfigError(CalkinLiftError):
    """Invalid run configuration or threshold override"""


class SpecSyntaxError(CalkinLiftError):
    """Malformed spectrum document"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SpecSemanticError(CalkinLiftError):
    """Well-formed document describing an inadmissible spectrum"""


class RasterAliasingError(CalkinLiftError):
    """Distinct lattice points would share raster cells"""


class GeometryMismatchError(CalkinLiftError):
    """Rasters with different grids were combined"""


class TowerConsistencyError(CalkinLiftError):
    """Squaring map or norm bound violated beyond raster tolerance"""


class OnCurveError(CalkinLiftError):
    """Query point lies on the symbol curve (within the refinement floor)"""

    def __init__(self, message: str, distance: float = 0.0):
        self.distance = distance
        super().__init__(message)


class EssentialSpectrumError(CalkinLiftError):
    """Index requested at a point of the essential spectrum"""


class ModelMismatchError(CalkinLiftError):
    """Operator model does not fit the tower level it is checked against"""


class ProbeDepthError(CalkinLiftError):
    """Continuity probe refers to levels deeper than the sampled fibers"""


class DepthMismatchError(CalkinLiftError):
    """Evidence computed at different tower depths was combined"""
