"""Exception hierarchy shared by every engine module."""

from __future__ import annotations


class KahaniaError(Exception):
    """Base class for engine errors (CLI exit code 2)."""


class DomainError(KahaniaError):
    """Numeric evaluation hit a singularity."""


class UnboundSymbol(KahaniaError):
    """A symbol had no value in the binding."""


class EssentialSingularity(KahaniaError):
    pass


class UnsupportedForm(KahaniaError):
    pass


class NonlinearConstraint(KahaniaError):
    pass


class InfiniteAnchor(KahaniaError):
    pass


class InvalidAnchor(KahaniaError):
    pass


class NoValidAnchor(KahaniaError):
    pass


class DivergentIntegral(KahaniaError):
    pass


class ParseError(Exception):
    """Malformed expression text; ``span`` holds byte offsets into the input."""

    def __init__(self, message: str, span: tuple[int, int]):
        super().__init__(f"{message} at bytes {span[0]}..{span[1]}")
        self.message = message
        self.span = span
