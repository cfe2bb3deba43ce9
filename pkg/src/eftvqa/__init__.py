"""Resource estimation and simulation for variational algorithms on early fault-tolerant devices."""

__version__ = "0.1.0"
