"""Exception types raised across the package."""


class HarmfieldError(Exception):
    """Base class for all package errors."""


class NullPivot(HarmfieldError, ValueError):
    """Gram-Schmidt ran out of non-null candidate directions."""


class Singular(HarmfieldError, ValueError):
    """A fibre point lies on the singular sphere bundle <e,e> = -1."""


class SingularPatch(Singular):
    """A quadrature patch meets the set where <sigma,sigma> = -1."""


class NotPreharmonic(HarmfieldError, ValueError):
    """A Killing field whose cubed extension is not proportional to itself."""


class NotConstantLength(HarmfieldError, ValueError):
    pass


class ZeroField(HarmfieldError, ValueError):
    pass


class NonInvertible(HarmfieldError, ValueError):
    pass


class DegenerateTangent(HarmfieldError, ValueError):
    """Numerical guard: a neutral tangent plane failed to split into null lines."""


class SchemaError(HarmfieldError, ValueError):
    """A field specification document failed validation."""
