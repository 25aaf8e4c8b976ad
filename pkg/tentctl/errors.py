"""
Exception types shared by the library, the CLI and the HTTP service
"""


class ParameterError(ValueError):
    """Invalid input. `field` names the offending parameter (H, T, theta, ...)"""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field


class OracleRangeError(ParameterError):
    """Period outside the range the exact enumeration supports"""
