try:
    from ._corrlasso import *  # noqa: F401,F403
except ImportError:
    # in-tree builds leave the extension next to the build outputs
    from _corrlasso import *  # noqa: F401,F403
