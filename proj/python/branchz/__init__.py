"""Branch impedance estimation from boundary voltage/current magnitudes."""

from ._branchz import *  # noqa: F401,F403
from ._branchz import __doc__  # noqa: F401

__version__ = "0.1.0"
