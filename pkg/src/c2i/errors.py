"""Exception types shared across the toolkit."""


class C2IError(Exception):
    """Base class for all toolkit errors."""


class SpecError(C2IError):
    """Problem with a canvas spec document, located by an element path."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.message = message
        self.path = path


class SpecSyntaxError(SpecError):
    """Spec document is not valid JSON."""


class SchemaError(SpecError):
    """Missing field, unknown field, or wrong type in a spec document."""


class InvariantError(SpecError):
    """Well-typed value that violates a domain invariant."""


class AssetError(C2IError):
    """Asset missing or unusable (e.g. cutout without an alpha channel)."""


class DimensionError(C2IError):
    """Canvas dimensions outside the supported range."""


class RenderError(C2IError):
    """Render refused because validation reported errors."""

    def __init__(self, report):
        issues = ", ".join(i.code for i in report.issues if i.severity.value == "error")
        super().__init__(f"spec failed validation: {issues}")
        self.report = report


class DegenerateError(C2IError):
    """Keypoint set with no visible keypoints."""


class ShapeError(C2IError):
    """Vector length mismatch."""


class InsufficientDataError(C2IError):
    """Scene lacks the frames/instances a pair builder needs."""


class LineError(C2IError):
    """Malformed JSONL row, with its 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ArityError(C2IError):
    """Mismatched element counts (identities vs boxes/poses, image counts)."""


class ParseError(C2IError):
    """Judge response without a usable score line; raw response retained."""

    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class TransportError(C2IError):
    """Judge backend unreachable after retries."""
