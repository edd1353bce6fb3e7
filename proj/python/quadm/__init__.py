from ._quadm import *  # noqa: F401,F403
from ._quadm import __version__, PointSet
