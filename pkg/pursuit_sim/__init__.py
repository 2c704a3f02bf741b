"""Alert-Turn pursuit-evasion simulation and experiment harness."""

__version__ = "0.1.0"
