"""
tentctl: predictive control, exact enumeration and statistics of tent-map cycles
"""

__version__ = "0.1.0"
