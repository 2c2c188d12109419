//! Numerics for a family of positive linear operators built from q-series
//! generating functions: certified adaptive evaluation, moment identities,
//! statistical and power-series summability methods, and convergence
//! harnesses with machine-checkable reports.
//!
//! Module map:
//!
//! * [`qcalc`]: q-integers, q-Pochhammer products, and base validation.
//! * [`lagrange_hermite`]: weighted compositions and the coefficient layer
//!   of the operator's generating function.
//! * [`operator`]: the operator itself with certified truncation, moments,
//!   second-moment bounds, parameter schedules, and the square-perturbed
//!   variant.
//! * [`summability`]: natural density, deferred weighted means, matrix
//!   methods, regularity residuals, and power-series (Abel-type) methods.
//! * [`korovkin`]: sup-norm and modulus surrogates, operator families, and
//!   the convergence reports.
//! * [`real`], [`certified`], [`error`]: scalar abstraction, certified
//!   values, and the error type.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below pin `f64`, which all stated tolerances assume.

pub mod certified;
pub mod error;
pub mod korovkin;
pub mod lagrange_hermite;
pub mod operator;
pub mod qcalc;
pub mod real;
pub mod summability;

pub use certified::Certified;
pub use error::{Error, Result};
pub use real::Real;

pub type Certified64 = Certified<f64>;
pub type QBase64 = qcalc::QBase<f64>;
pub type LHParams64 = lagrange_hermite::LHParams<f64>;
pub type OperatorParams64 = operator::OperatorParams<f64>;
pub type ParamSchedule64 = operator::ParamSchedule<f64>;
pub type TestFunction64 = operator::TestFunction<f64>;
pub type OperatorEvaluator64 = operator::OperatorEvaluator<f64>;
pub type RealSequence64 = summability::RealSequence<f64>;
pub type DeferredScheme64 = summability::DeferredScheme<f64>;
pub type SummabilityMatrix64 = summability::SummabilityMatrix<f64>;
pub type PowerSeriesMethod64 = summability::PowerSeriesMethod<f64>;
pub type OperatorFamily64 = korovkin::OperatorFamily<f64>;
pub type RateSequence64 = korovkin::RateSequence<f64>;
pub type ConvergenceReport64 = korovkin::ConvergenceReport<f64>;
