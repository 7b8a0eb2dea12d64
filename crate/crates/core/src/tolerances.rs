//! Pass thresholds for every numerical check.
//!
//! All thresholds are relative: each check divides its raw residual by a
//! bound on the magnitude of the quantities that produced it (operand
//! norms times the size of the structure constants at the sampled point).

/// Mirror avoidance: `|1 - e^alpha(x)|` must exceed this.
pub const MIRROR_DISTANCE: f64 = 1e-6;

/// `metric_scalar` below this magnitude is treated as the degenerate locus.
pub const DEGENERATE_METRIC: f64 = 1e-14;

/// Relative residual of the one-parameter least-squares fit for `c^kappa`.
pub const C_KAPPA_FIT: f64 = 1e-12;

/// Nondegeneracy: `|det| > GRAM_DET * prod_i |row_i|`.
pub const GRAM_DET: f64 = 1e-12;

/// Minimum real-part margin of simple root values for series evaluation.
pub const CHAMBER_MARGIN: f64 = 0.2;

pub const FROBENIUS_CONDITION: f64 = 1e-10;
pub const ASSOCIATIVITY: f64 = 1e-9;
pub const CUBIC_SYMMETRY: f64 = 1e-10;
pub const WEYL_EQUIVARIANCE: f64 = 1e-10;

pub const DUAL_FORM: f64 = 1e-12;
pub const CURVATURE: f64 = 1e-9;
pub const RECOMPOSITION: f64 = 1e-13;
pub const TORSION: f64 = 1e-12;
pub const DILATATION: f64 = 1e-12;
/// Analytic against central-difference derivative of the multiplication
/// operator.
pub const CONNECTION_FD: f64 = 1e-6;
/// Default central-difference step on the base point.
pub const CONNECTION_FD_STEP: f64 = 1e-5;
/// A perturbed metric must raise the curvature residual by this factor.
pub const PERTURBATION_SEPARATION: f64 = 1e3;
pub const PERTURBATION_FACTOR: f64 = 1.01;

pub const POTENTIAL_PRODUCT: f64 = 1e-9;
pub const POTENTIAL_FD: f64 = 1e-5;
pub const WDVV: f64 = 1e-8;
pub const CUBIC_B_SYMMETRY: f64 = 1e-13;

/// Relative accuracy of the closed form for `q'''` against its series.
pub const Q_THIRD_CLOSED_FORM: f64 = 1e-13;
/// Sixth-order stencil for `q'''` against the closed form.
pub const Q_STENCIL: f64 = 1e-7;
/// Step of that stencil. At `1e-3` the f64 roundoff `eps |q| / h^3`
/// alone is already of order `1e-7`.
pub const Q_STENCIL_STEP: f64 = 1e-2;
