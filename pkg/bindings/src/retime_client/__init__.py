from .client import DEFAULT_COMMAND, PlanClient, PlanServiceError

__version__ = "0.1.0"

__all__ = ["DEFAULT_COMMAND", "PlanClient", "PlanServiceError"]
