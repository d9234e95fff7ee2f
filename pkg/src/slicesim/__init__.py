"""slicesim: discrete-event simulation of online network slice placement
on a tiered substrate, with a power-of-two-choices heuristic and four
online actor-critic placement agents (plain, load-aware state, and
heuristically-assisted variants of each).
"""

from .config import SimConfig, load_config
from .engine import RunReport, compare, run
from .substrate import PhysicalNetwork, TopologyConfig, build_topology

__version__ = "0.1.0"

__all__ = [
    "PhysicalNetwork",
    "RunReport",
    "SimConfig",
    "TopologyConfig",
    "build_topology",
    "compare",
    "load_config",
    "run",
    "__version__",
]
