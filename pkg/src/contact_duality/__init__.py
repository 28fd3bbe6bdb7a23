"""
Two-type contact process toolkit.

Supports:
- Graphical construction on tori and truncated regular trees
- Ancestor duality with the pathwise duality check
- Exact transient laws on tiny graphs (CTMC oracle)
- Monte Carlo estimators and batch experiments
"""

__version__ = "0.1.0"
__all__ = [
    "core",
    "topology",
    "graphical",
    "forward",
    "dual",
    "oracle",
    "estimators",
    "experiments",
    "reporting",
    "runner",
    "cli",
]
