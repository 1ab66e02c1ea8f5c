//! Train fleets of small models on a shared test set and measure how
//! correlated their errors are.
//!
//! The statistics layer ([`error_metrics`], [`correlation`]) is generic over
//! the scalar type; models and datasets work in `f64`.

pub mod correlation;
pub mod data;
pub mod error;
pub mod error_metrics;
pub mod external;
pub mod models;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod scenarios;

pub use correlation::{
    corr_matrix, def2_correlation, def2_matrix, pearson, phik, CorrValue, CorrelationMatrix, Method, MethodChoice,
    PerformanceSeries,
};
pub use data::{Dataset, Target, Task, TaskKind};
pub use error::{Error, ErrorClass, Result};
pub use error_metrics::{average_error, indicator_errors, residual_errors, ErrorKind, ErrorVector};
pub use models::{predict, train, Family, ModelSpec, TrainedModel};
pub use scalar::Scalar;

pub type CorrValueF32 = CorrValue<f32>;
pub type CorrValueF64 = CorrValue<f64>;
pub type ErrorVectorF32 = ErrorVector<f32>;
pub type ErrorVectorF64 = ErrorVector<f64>;
pub type CorrelationMatrixF32 = CorrelationMatrix<f32>;
pub type CorrelationMatrixF64 = CorrelationMatrix<f64>;
pub type PerformanceSeriesF64 = PerformanceSeries<f64>;
