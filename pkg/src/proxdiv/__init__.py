"""Agreement measures between ensemble and surrogate co-occurrence matrices."""
from .errors import (
    AsymmetryBeyondToleranceError,
    DegenerateMatrixError,
    DiagonalNotUnitError,
    DimensionMismatchError,
    EntryOutOfRangeError,
    InconsistentPartitionError,
    MatrixValidationError,
    NonSquareError,
    PermutationLengthMismatchError,
    ProxDivError,
    WeightMissingError,
    WindowTooLargeError,
)
from .matrix import (
    NodeWeights,
    Partition,
    ProximityMatrix,
    crisp_from_partition,
    pair_split,
    permute_rows_cols,
    validate_matrix,
)
from .measures import (
    LoIDecomposition,
    MeasureKind,
    Orientation,
    freeman_tukey,
    hellinger,
    loi,
    loi_decompose,
    mantel,
    nloi,
    rv_coefficient,
    ssim,
    wrmse,
)
from .permtest import (
    MeasureTest,
    PermTestConfig,
    TestReport,
    permutation_ci,
    phipson_smyth_p,
    run_permutation_test,
)
from .simgen import SimScenario, apply_signal, gen_crisp_matrix, gen_ensemble_matrix, gen_pair

__version__ = "0.1.0"
