from ._cmrf import *  # noqa: F401,F403
