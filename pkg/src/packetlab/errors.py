"""Exception types shared across the package."""


class PacketLabError(Exception):
    """Base class for every error raised by this package."""


class NonSquareError(PacketLabError, ValueError):
    """Matrix input is not a square 2-d array of integers."""


class SingularOrUnitError(PacketLabError, ValueError):
    """Matrix determinant has absolute value 0 or 1."""


class NotExpandingError(PacketLabError, ValueError):
    """Some eigenvalue of the matrix has modulus <= 1 (within tolerance)."""


class SizeOverflowError(PacketLabError, ValueError):
    """Requested quotient lattice exceeds the configured cell limit."""


class InternalInconsistencyError(PacketLabError, RuntimeError):
    """Invariant violated by corrupted internal state."""


class ChannelOutOfRangeError(PacketLabError, IndexError):
    """Channel index r outside [0, |det A|)."""


class NotUnitaryError(PacketLabError, ValueError):
    """Supplied matrix fails the unitarity tolerance."""


class LowPassNotIsometricError(PacketLabError, ValueError):
    """Low-pass symbol rows are not orthonormal at some grid point."""

    def __init__(self, xi, defect):
        self.xi = xi
        self.defect = defect
        super().__init__(
            f"low-pass rows not orthonormal at xi={xi!r} (defect {defect:.3e})"
        )


class NotOrthonormalError(PacketLabError, ValueError):
    """Bank fails the exact splitting check and force=False."""


class LevelZeroError(PacketLabError, ValueError):
    """Analysis step requested on a level-0 grid."""


class ShapeMismatchError(PacketLabError, ValueError):
    """Grid, bank, or child-tuple shapes are incompatible."""


class DepthExceedsLevelError(PacketLabError, ValueError):
    """Requested tree depth exceeds the data level."""


class InadmissibleBasisError(PacketLabError, ValueError):
    """Node set does not tile the target index range."""


class MissingNodeError(PacketLabError, KeyError):
    """Basis refers to a node the tree does not hold."""


class IncompleteTreeError(PacketLabError, ValueError):
    """Best-basis search requires every node down to the tree depth."""


class InvalidBoundsError(PacketLabError, ValueError):
    """Frame bound inputs violate 0 < C1 <= C2."""


class EigenFailureError(PacketLabError, RuntimeError):
    """Eigenvalue solve failed at some grid point."""


class FormatError(PacketLabError, ValueError):
    """Malformed or unsupported serialized document."""
