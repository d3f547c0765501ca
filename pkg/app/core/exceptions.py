"""
Exception hierarchy for the colander toolkit
Usage errors (bad parameters) are kept apart from runtime failures so the CLI can map exit codes
"""
from typing import Any, Dict, Optional


class ColanderError(Exception):
    """Base class for every error raised by the toolkit"""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class SpecInvalid(ColanderError):
    """Problem parameters violate R < a/2, epsilon > 0 or a similar hard precondition"""

    exit_code = 2


class CoincidentCircles(ColanderError):
    """Two circles share center and radius; the caller has to deduplicate or perturb"""


class DegenerateInput(ColanderError):
    """Anchors coincide after deduplication"""


class TooManyAnchors(ColanderError):
    pass


class GridTooLarge(ColanderError):
    pass


class EmptyFace(ColanderError):
    pass


class CrossCheckFailure(ColanderError):
    """Analytic and sampling verification disagree beyond the documented slack"""


class InfeasibleSignature(ColanderError):
    pass


class TooManyPoints(ColanderError):
    pass


class SearchExhausted(ColanderError):
    pass


class DegenerateFit(ColanderError):
    """A scaling fit was requested on fewer than three distinct abscissae"""

    exit_code = 2
