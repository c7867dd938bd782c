"""Grid-world self-play data engine and evaluation harness."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
