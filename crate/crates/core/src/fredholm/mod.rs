//! Fredholm triples and quadruples in finite dimensions: index arithmetic,
//! normal coordinates, finite-dimensional reduction of graph pairs, exactness
//! of morphisms, parametrized indices, and Newton intersection solving.

mod newton;
mod reduction;
mod triple;

pub use newton::{gauss_newton, intersect_newton, NewtonOutcome};
pub use reduction::{finite_dim_reduction, FiniteDimReduction, GraphPairLocal, Monomial, PolynomialDims, PolynomialMap, TangentReport};
pub use triple::{
    exactness_check, index_stability_check, normal_coordinates, parametrized_index, parametrized_triple,
    triple_index, ExactnessReport, NormalCoordinates, StabilityReport, StabilityStatus, SubspaceTriple,
    TripleIndex, DEFAULT_RANK_TOL,
};
