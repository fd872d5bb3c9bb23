"""Exception hierarchy shared by all mafe modules."""


class MafeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(MafeError):
    """Operand shapes are incompatible."""


class ModulusMismatchError(MafeError):
    """Operands live over different moduli."""


class ParameterError(MafeError):
    """A parameter set violates one of its validation rules.

    The message names the violated inequality or constraint.
    """


class WidthError(ParameterError):
    """A Gaussian width is too small for the requested sampling operation."""


class PolicyError(MafeError):
    """Decryption attempted without key shares covering the attribute set."""


class ShareMismatchError(MafeError):
    """Supplied key shares disagree on (gid, key vector) or duplicate an authority."""


class ArtifactError(MafeError):
    """A serialized artifact is malformed, truncated or inconsistent."""
