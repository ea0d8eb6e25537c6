//! Core library for certifying SOS-convexity of polynomials, building
//! semidefinite / linear-programming duals of convex minimax, robust and
//! rational optimization problems, solving them with a built-in dense
//! interior-point conic solver, and cross-checking the results against an
//! independent primal-side oracle.

pub mod dual;
pub mod gen;
pub mod oracle;
pub mod poly;
pub mod probfile;
pub mod report;
pub mod solver;
pub mod sos;

pub use poly::{MonomialBasis, MultiIndex, Polynomial, SymmetricMatrixPoly};
pub use solver::{
    BlockPoint, ConicProgram, LinExpr, SolveReport, SolveStatus, SolverConfig, SolverError,
};
pub use dual::{
    build_dual, build_fractional_dual, build_linear_fractional_dual, build_quadratic_dual,
    DualCertificate, DualError, DualKind, DualProgram, DualSolution, MinimaxProblem,
    RationalMinimaxProblem, RobustMode, RobustProblem,
};
pub use oracle::{
    find_slater_point, solve_fractional_primal, solve_primal, InfeasibilityReport, LpOutcome,
    OracleError, OracleOptions, OracleResult, PrimalReport,
};
pub use probfile::{LoadedProblem, ProbfileError, ProblemFile, ProblemKind};
pub use report::RunReport;
pub use sos::{
    is_sos, is_sos_convex, is_sos_matrix, is_sos_with_basis, SosCertificate, SosDecision,
    SosOptions, SosRefutation,
};
