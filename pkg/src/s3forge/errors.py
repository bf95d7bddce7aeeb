"""Exception types raised across the package."""


class S3ForgeError(Exception):
    """Base class for all package errors."""


class ZeroQuaternion(S3ForgeError, ZeroDivisionError):
    pass


class NotUnit(S3ForgeError, ValueError):
    pass


class AtPole(S3ForgeError, ValueError):
    """A point sits on (or numerically at) the projection point."""


class DegenerateCircle(S3ForgeError, ValueError):
    pass


class NotIncident(S3ForgeError, ValueError):
    pass


class AntipodalEdge(S3ForgeError, ValueError):
    pass


class PoleCollision(S3ForgeError, ValueError):
    """Geometry to be meshed reaches the projection point."""


class OutOfDomain(S3ForgeError, ValueError):
    pass


class DegenerateTangent(S3ForgeError, ValueError):
    pass


class BadIdentification(S3ForgeError, ValueError):
    """Glued parameter edges do not land on the same points."""


class SchemaError(S3ForgeError, ValueError):
    pass


class IoFailure(S3ForgeError, OSError):
    pass
