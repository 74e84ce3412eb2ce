"""Exception hierarchy shared by every hamext module."""


class HamextError(Exception):
    """Base class for all library errors."""


class ParseError(HamextError):
    """Raised for malformed expression text.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        detail = f"{message} at position {position}"
        if text:
            detail += f"\n  {text}\n  {' ' * position}^"
        super().__init__(detail)


class UnboundSymbolError(HamextError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no binding for symbol {name!r}")

    def __str__(self) -> str:
        return self.args[0]


class PoleError(HamextError, ZeroDivisionError):
    """Evaluation hit a singular point (negative power of zero)."""


class MomentumPowerError(HamextError, ValueError):
    """A momentum appears with a negative power or inside a function."""


class ChartMismatchError(HamextError, ValueError):
    pass


class SamplingError(HamextError):
    """Could not draw enough finite sample points within the retry budget."""


class SystemConfigError(HamextError, ValueError):
    """A system definition is malformed or violates the CG condition."""
