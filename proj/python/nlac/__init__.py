from ._nlac import *  # noqa: F401,F403
from ._nlac import __version__  # noqa: F401
