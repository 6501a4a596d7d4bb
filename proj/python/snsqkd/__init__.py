from snsqkd._core import *  # noqa: F401,F403
from snsqkd._core import __version__  # noqa: F401
