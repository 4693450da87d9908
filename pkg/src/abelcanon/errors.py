"""Domain errors raised by the counting and oracle layers.

Parse errors live next to the parsers in :mod:`abelcanon.groups`; the
classes here signal mathematically well-posed requests whose answer does
not exist (or is out of reach) rather than malformed input.
"""


class DomainError(Exception):
    """Base for errors that map to CLI exit code 3."""

    code = "DomainError"


class InfiniteClassesError(DomainError):
    """The group has free rank >= 1, so it has infinitely many
    automorphism classes of elements."""

    code = "InfiniteClasses"


class InfiniteGroupError(DomainError):
    """An exhaustive computation was requested on an infinite group."""

    code = "InfiniteGroup"


class CapExceededError(DomainError):
    """An exhaustive computation would exceed the configured cap."""

    code = "CapExceeded"

    def __init__(self, message, count, cap):
        super().__init__(message)
        self.count = count
        self.cap = cap
