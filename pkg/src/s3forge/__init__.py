"""s3forge: geometry in the three-sphere, stereographic projection, printable meshes."""
from .errors import (
    AntipodalEdge,
    AtPole,
    BadIdentification,
    DegenerateCircle,
    DegenerateTangent,
    IoFailure,
    NotIncident,
    NotUnit,
    OutOfDomain,
    PoleCollision,
    S3ForgeError,
    SchemaError,
    ZeroQuaternion,
)
from .quat import Quaternion, UnitQuaternion

__version__ = "0.1.0"

__all__ = [
    "Quaternion",
    "UnitQuaternion",
    "S3ForgeError",
    "ZeroQuaternion",
    "NotUnit",
    "AtPole",
    "DegenerateCircle",
    "NotIncident",
    "AntipodalEdge",
    "PoleCollision",
    "OutOfDomain",
    "DegenerateTangent",
    "BadIdentification",
    "SchemaError",
    "IoFailure",
    "__version__",
]
