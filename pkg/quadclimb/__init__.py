"""Planning and simulation toolkit for a four-limbed free-climbing robot."""

from .config import ConfigurationError, QuadclimbError, RobotModel, default_model

__version__ = "0.1.0"

__all__ = ["ConfigurationError", "QuadclimbError", "RobotModel", "default_model", "__version__"]
