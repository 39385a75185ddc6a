"""Exception types raised across the package."""


class ProxDivError(Exception):
    """Base class for all package errors."""


class MatrixValidationError(ProxDivError, ValueError):
    """Input does not describe a valid proximity matrix or partition."""


class NonSquareError(MatrixValidationError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"matrix must be square with n >= 2, got shape {self.shape}")


class AsymmetryBeyondToleranceError(MatrixValidationError):
    def __init__(self, i, j, delta):
        self.i, self.j, self.delta = int(i), int(j), float(delta)
        super().__init__(
            f"entries ({self.i}, {self.j}) and ({self.j}, {self.i}) differ by {self.delta:.3g}"
        )


class DiagonalNotUnitError(MatrixValidationError):
    def __init__(self, i, value):
        self.i, self.value = int(i), float(value)
        super().__init__(f"diagonal entry ({self.i}, {self.i}) is {self.value!r}, expected 1")


class EntryOutOfRangeError(MatrixValidationError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = int(i), int(j), float(value)
        super().__init__(f"entry ({self.i}, {self.j}) = {self.value!r} is outside [0, 1]")


class DimensionMismatchError(ProxDivError, ValueError):
    def __init__(self, n1, n2):
        self.n1, self.n2 = int(n1), int(n2)
        super().__init__(f"matrices have different sizes: {self.n1} vs {self.n2}")


class PermutationLengthMismatchError(ProxDivError, ValueError):
    pass


class WeightMissingError(ProxDivError, ValueError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"no weight supplied for populated node {node!r}")


class InconsistentPartitionError(ProxDivError, ValueError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = int(i), int(j), float(value)
        super().__init__(
            f"surrogate entry ({self.i}, {self.j}) = {self.value!r} is nonzero "
            "but the pair is split across nodes"
        )


class DegenerateMatrixError(ProxDivError, ValueError):
    pass


class WindowTooLargeError(ProxDivError, ValueError):
    pass
