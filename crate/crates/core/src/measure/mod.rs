//! Series dichotomies, predicted dimensions, cover-based dimension
//! estimates and the greedy disjoint-ball selection.

pub mod dimension;
pub mod functions;
pub mod kgb;
pub mod series;

pub use dimension::{box_dimension_estimate, DimensionEstimate, Level};
pub use functions::{DimensionFn, LogExponent, TargetFn, Trend};
pub use series::{
    predicted_hausdorff, series_thm1, series_thm2, term_form, term_ln, Ambient, Checkpoint,
    MeasureVerdict, SeriesReport, TermForm, Verdict,
};
pub use kgb::{dyadic_family, kgb_select, Ball, BallFamily, IndexedBall, KgbOptions, KgbSelection};
