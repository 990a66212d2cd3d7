"""saltlab: exact solvers, provable bounds and simulators for salted games."""

__version__ = "0.1.0"
