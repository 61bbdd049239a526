"""Exception types raised across the package."""


class LoopStructureError(ValueError):
    """Base class for malformed or unusable loop structures."""


class DanglingCrossing(LoopStructureError):
    pass


class SelfCrossing(LoopStructureError):
    pass


class HandednessMismatch(LoopStructureError):
    """Both records of one crossing carry the same handedness bit."""


class GenusMismatch(LoopStructureError):
    pass


class UnorientedLoop(LoopStructureError):
    pass


class InvalidStructure(LoopStructureError):
    """Raised when an operation requires a valid polycube loop structure."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StaleCandidate(LoopStructureError):
    pass


class UnknownLoop(LoopStructureError, KeyError):
    pass


class NotRemovable(LoopStructureError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MeshError(ValueError):
    """Base class for surface mesh problems."""


class NonManifold(MeshError):
    pass


class Disconnected(MeshError):
    pass


class NotClosed(MeshError):
    pass


class ParseError(MeshError):
    pass


class IoError(OSError):
    pass


class EmbeddingFailed(RuntimeError):
    pass


class PrimalizationFailed(RuntimeError):
    pass
