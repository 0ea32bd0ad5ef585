"""Joint power allocation and QoS admission for multibeam satellite downlinks."""

from ._beamalloc import *  # noqa: F401,F403
from ._beamalloc import __doc__  # noqa: F401
