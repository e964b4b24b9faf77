"""Exception hierarchy shared by all modules."""


class SdpNormalError(Exception):
    """Base class for every error raised by the package."""


class ModeMismatch(SdpNormalError):
    """Exact and float data were mixed in one operation."""


class DimensionMismatch(SdpNormalError):
    pass


class AsymmetricMatrix(SdpNormalError):
    pass


class InvalidStep(SdpNormalError):
    """A reformulation step is malformed for the system it is applied to."""


class FingerprintMismatch(SdpNormalError):
    pass


class InfeasibleSystem(SdpNormalError):
    """The semidefinite system has no slack.

    ``certificate`` is either a matrix ``W`` with ``W`` in the dual of the
    current face, ``A_i . W = 0`` and ``B . W < 0``, or ``None`` when the
    proof is a plain linear inconsistency.
    """

    def __init__(self, message, certificate=None, face=None):
        super().__init__(message)
        self.certificate = certificate
        self.face = face


class CertificateRoundingFailed(SdpNormalError):
    pass


class InconsistentSlack(SdpNormalError):
    pass


class InconsistentCertificate(SdpNormalError):
    pass


class Unbounded(SdpNormalError):
    pass


class NumericalLimit(SdpNormalError):
    pass


class SchemaError(SdpNormalError):
    """Input document failed validation; ``path`` locates the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class InfeasiblePoint(SdpNormalError):
    """A supplied primal or dual point violates a constraint."""
