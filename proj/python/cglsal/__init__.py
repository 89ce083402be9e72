"""RGB-T saliency detection by collaborative graph learning."""

from ._core import *  # noqa: F401,F403
from ._core import CglError, Config, detect, load_pair, slic_segment, solve  # noqa: F401

__version__ = "0.1.0"
