//! Weighted shifts, singular inner functions and the series, sums and block
//! operators used to certify non-cyclic vectors at finite truncation.
//!
//! Everything is generic over the scalar (`f32`, `f64`); the aliases below fix `f64`.

pub mod blockops;
pub mod calculus;
pub mod certify;
pub mod coeffs;
pub mod error;
pub mod gate;
pub mod inner;
pub mod linalg;
pub mod scalar;
pub mod shifts;
pub mod sparse;
pub mod trend;
pub mod weights;

pub use error::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;
pub type CoeffVector = coeffs::CoeffVector<f64>;
pub type WeightSequence = weights::WeightSequence<f64>;
pub type SingularMeasure = inner::SingularMeasure<f64>;
pub type InnerFn = inner::InnerFn<f64>;
pub type TruncatedOperator = shifts::TruncatedOperator<f64>;
pub type AnalyticFn = calculus::AnalyticFn<f64>;
pub type WitnessPair = calculus::WitnessPair<f64>;
pub type ConditionStatus = gate::ConditionStatus<f64>;
pub type GateParams = gate::GateParams<f64>;
pub type CertificateReport = certify::CertificateReport<f64>;
pub type CertifyInput = certify::CertifyInput<f64>;
pub type BlockOperator = blockops::BlockOperator<f64>;
