"""Budget-constrained link additions that guide graphs toward group fairness."""

try:
    from ._fairguide import *  # noqa: F401,F403  (installed wheel layout)
    from ._fairguide import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension module sits on PYTHONPATH
    from _fairguide import *  # noqa: F401,F403
    from _fairguide import __version__  # noqa: F401
