"""Space-time finite element solver for the heat equation.

Assembles the Kronecker-structured global system

    K = A_t (x) M_x + M_t (x) A_x

arising from a tensor-product P1 discretization with the modified Hilbert
transformation in time, and solves it with three direct methods: the
Bartels-Stewart method with real or complex Schur decomposition of the
temporal pencil, and Fast Diagonalization with time parallelism.
"""

from .errors import (
    ConvergenceFailure,
    DefectivePencil,
    DegenerateElement,
    DimensionMismatch,
    ImaginaryResidueTooLarge,
    KronheatError,
    NotPositiveDefinite,
    SingularMatrix,
    SizeGuardExceeded,
    TruncationBudgetExceeded,
    UsageError,
)
from .temporal import (
    DEFAULT_J_MAX,
    SineCoefficientTable,
    TemporalMesh,
    TemporalOperators,
    assemble_temporal_A,
    assemble_temporal_C,
    assemble_temporal_M,
    assemble_temporal_operators,
    refine_bisect,
    sine_coefficients,
    tail_bounds,
)
from .lshape import (
    TriangleMesh,
    build_lshape_mesh,
    dump_mesh_txt,
    on_lshape_boundary,
    refine_uniform,
)
from .fem import (
    SpatialOperators,
    assemble_global_rhs,
    assemble_p1,
    dirichlet_lift,
    error_norms,
    gauss_rule_01,
    project_rhs,
    triangle_rule,
)
from .solvers import (
    PencilFactorization,
    SolveReport,
    SpaceTimeSolution,
    SpaceTimeSystem,
    build_pencil,
    eig_study,
    residual,
    solve,
    solve_bs_complex,
    solve_bs_real,
    solve_dense_oracle,
    solve_fd,
)
from . import manufactured

__all__ = [
    "ConvergenceFailure",
    "DefectivePencil",
    "DegenerateElement",
    "DimensionMismatch",
    "ImaginaryResidueTooLarge",
    "KronheatError",
    "NotPositiveDefinite",
    "SingularMatrix",
    "SizeGuardExceeded",
    "TruncationBudgetExceeded",
    "UsageError",
    "DEFAULT_J_MAX",
    "SineCoefficientTable",
    "TemporalMesh",
    "TemporalOperators",
    "assemble_temporal_A",
    "assemble_temporal_C",
    "assemble_temporal_M",
    "assemble_temporal_operators",
    "refine_bisect",
    "sine_coefficients",
    "tail_bounds",
    "TriangleMesh",
    "build_lshape_mesh",
    "dump_mesh_txt",
    "on_lshape_boundary",
    "refine_uniform",
    "SpatialOperators",
    "assemble_global_rhs",
    "assemble_p1",
    "dirichlet_lift",
    "error_norms",
    "gauss_rule_01",
    "project_rhs",
    "triangle_rule",
    "PencilFactorization",
    "SolveReport",
    "SpaceTimeSolution",
    "SpaceTimeSystem",
    "build_pencil",
    "eig_study",
    "residual",
    "solve",
    "solve_bs_complex",
    "solve_bs_real",
    "solve_dense_oracle",
    "solve_fd",
    "manufactured",
]
