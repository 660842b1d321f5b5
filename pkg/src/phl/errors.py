"""Exception types shared across the pod server modules."""

from __future__ import annotations


class PhlError(Exception):
    """Base class for errors raised by pod operations."""


class NotFoundError(PhlError):
    pass


class InvalidSlugError(PhlError):
    pass


class SlugConflictError(PhlError):
    """De-confliction limit exhausted for a POSTed slug."""


class ContainerNotEmptyError(PhlError):
    pass


class ProfileExistsError(PhlError):
    pass


class MalformedAclError(PhlError):
    pass


class AuthorizationError(PhlError):
    def __init__(self, message: str, mode: str = "", resource: str = ""):
        super().__init__(message)
        self.mode = mode
        self.resource = resource


class UnsupportedPayloadError(PhlError):
    pass


class FetchError(PhlError):
    """Dereference failed at the transport level."""


class UnresolvableSegmentError(PhlError):
    def __init__(self, segment: str, message: str = ""):
        super().__init__(message or f"cannot resolve path segment {segment!r}")
        self.segment = segment


class BudgetExhaustedError(PhlError):
    """Fetch budget ran out; partial results are attached, never silently returned."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class FrequencyGateClosedError(PhlError):
    def __init__(self, focus: str, window: str):
        super().__init__(f"already pushed a {focus} recommendation this {window}")
        self.focus = focus
        self.window = window


class ScenarioStepError(PhlError):
    def __init__(self, index: int, message: str):
        super().__init__(f"step {index}: {message}")
        self.index = index
