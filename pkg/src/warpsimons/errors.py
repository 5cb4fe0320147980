"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by warpsimons."""


class JetShapeError(GeometryError, ValueError):
    pass


class SingularityError(GeometryError, ArithmeticError):
    pass


class ParseError(GeometryError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    def __init__(self, name, offset, declared):
        self.name = name
        self.declared = tuple(sorted(declared))
        listed = ", ".join(self.declared) or "<none>"
        GeometryError.__init__(
            self, f"unknown identifier {name!r} at offset {offset}; declared: {listed}"
        )
        self.offset = offset


class ConfigError(GeometryError, ValueError):
    pass


class ChartDomainError(GeometryError, ValueError):
    pass


class SpacelikeViolation(GeometryError):
    def __init__(self, eigenvalue):
        super().__init__(f"induced metric not positive definite (smallest eigenvalue {eigenvalue:.3e})")
        self.eigenvalue = eigenvalue


class FrameError(GeometryError):
    pass


class UnsupportedSignature(GeometryError):
    pass


class PreconditionError(GeometryError):
    pass


class CatalogError(GeometryError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class CaseError(PreconditionError):
    """Ambient configuration outside every threshold case."""
