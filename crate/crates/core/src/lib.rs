//! Certified beta-expansions and shrinking-target dichotomies.

pub mod admissibility;
pub mod arith;
pub mod beta;
pub mod cylinders;
pub mod error;
pub mod expansion;
pub mod measure;
pub mod numfmt;
pub mod targets;

pub use arith::{Backend, Interval, IntervalField, QuadElem, QuadraticField, RationalField};
pub use beta::{Beta, BetaKind, PrecisionCfg, Value};
pub use error::{Error, Result};
pub use expansion::{digits, reconstruct, star_sequence, t_beta_step, DigitSeq, StarSeq};
pub use admissibility::{
    count_admissible, enumerate_admissible, is_admissible, lex_compare, AdmissibleCount, Word,
};
pub use cylinders::{
    cylinder, cylinders, partition_check, target_interval, target_ratio_check, Cylinder,
    PartitionReport, RatioReport, TargetInterval,
};
pub use measure::{
    box_dimension_estimate, predicted_hausdorff, series_thm1, series_thm2, Ambient,
    DimensionEstimate, DimensionFn, LogExponent, MeasureVerdict, SeriesReport, TargetFn, Verdict,
};
pub use targets::{
    grid_cells, hit_sequence, hit_sequence_2d, monte_carlo_measure, rectangle_cover, Centre,
    HitMode, HitRecord, McOptions, McReport, RectCover,
};

/// Float-typed instances of the ball selection.
pub type Ball = measure::Ball<f64>;
pub type IndexedBall = measure::IndexedBall<f64>;
pub type BallFamily = measure::BallFamily<f64>;
pub type KgbOptions = measure::KgbOptions<f64>;
pub type KgbSelection = measure::KgbSelection<f64>;

/// [`measure::kgb_select`] on `f64`.
pub fn kgb_select(
    family: &[IndexedBall],
    f: &DimensionFn,
    b: (f64, f64),
    g: usize,
    opts: &KgbOptions,
) -> Result<KgbSelection> {
    measure::kgb_select(family, f, b, g, opts)
}
