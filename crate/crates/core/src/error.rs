use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("Sobolev exponent must be nonnegative, got {0}")]
    NegativeSobolev(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("point {point} lies outside the annulus {r_in} <= |x| <= {r_out}")]
    OutsideAnnulus { point: String, r_in: f64, r_out: f64 },

    #[error("invalid annulus radii r_in={r_in}, r_out={r_out}")]
    InvalidRadii { r_in: f64, r_out: f64 },

    #[error("winding number undefined: loop comes within {min_modulus:e} of the origin")]
    WindingUndefined { min_modulus: f64 },

    #[error("degree {degree} exceeds truncation order {n_max}")]
    TruncationOverflow { degree: usize, n_max: usize },

    #[error("gluing parameter must satisfy |z| < 1, got |z| = {0}")]
    GluingParameter(f64),

    #[error("loop has nonzero modes outside its allowed support: {0}")]
    Support(String),

    #[error("boundary data is not in the node manifold (residual {residual:e})")]
    NotMember { residual: f64 },

    #[error("evaluation point outside the open unit disk: {0}")]
    OutsideDisk(String),

    #[error("chart family undefined at {0}")]
    FamilyUndefined(String),

    #[error("annulus modulus must lie in (0, 1), got {0}")]
    InvalidDelta(f64),

    #[error("basis is rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid graph-form data: {0}")]
    InvalidGraphPair(String),

    #[error("invalid nodal configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid deformation: {0}")]
    InvalidDeformation(String),

    #[error("invalid energy schedule: {0}")]
    EnergySchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
