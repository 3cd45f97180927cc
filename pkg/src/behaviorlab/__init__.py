"""behaviorlab: label-driven behavior sequence analytics for game telemetry.

Pipeline: ingest spatio-temporal events -> humans label behaviors over
(time window x units x events) -> labels become per-player and per-team
state sequences -> DTW similarity, clustering, 2D layout, transition graphs,
and inter-rater agreement, all exposed through a library, a CLI, and a JSON
HTTP API.
"""

from .errors import (ConflictError, DegenerateInputError, NotFoundError,
                     ValidationError, WorkbenchError)

__version__ = "0.1.0"

__all__ = [
    "WorkbenchError",
    "NotFoundError",
    "ConflictError",
    "ValidationError",
    "DegenerateInputError",
    "__version__",
]
