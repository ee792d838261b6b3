"""Seven-DOF semi-submersible floating wind turbine simulator with RISE and GSPI pitch control."""

from .errors import FowtError

__version__ = "0.1.0"

__all__ = ["FowtError", "__version__"]
