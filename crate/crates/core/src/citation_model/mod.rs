//! The statistical core: a lognormal citation model expressed in the
//! world reference frame, fitted from percentile observations.
//!
//! Citation counts of a large publication set are modelled as lognormal.
//! The world's log-citation distribution is normalized to the standard
//! normal ("world z-space"), so an institution is characterized by the
//! location `m` and scale `s` of its own log-citation distribution in
//! that frame. Percentile indicators — the share of an institution's
//! papers inside the world top-x% — pin the model down: the probit
//! transform of the share is linear in the probit of the level, with
//! slope `1/s` and intercept `-m/s`. Two observations give a closed-form
//! fit; more are combined by ordinary least squares. The fitted model
//! extrapolates to far smaller tail fractions than the observed ones,
//! which is where the interesting publications live.

mod normal;

pub use normal::{erf, erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from model fitting and evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    /// A probability-like argument fell outside the open unit interval.
    #[error("probability {value} outside the open interval (0, 1)")]
    ProbabilityOutOfRange { value: f64 },
    /// A percentile level fell outside the open unit interval.
    #[error("level {value} outside the open interval (0, 1)")]
    LevelOutOfRange { value: f64 },
    /// A proportion sat on or beyond the closed unit interval boundary
    /// where the probit transform is undefined.
    #[error("proportion {value} cannot enter the probit transform")]
    BoundaryProportion { value: f64 },
    /// A scale parameter was not strictly positive.
    #[error("scale must be strictly positive, got {value}")]
    NonPositiveScale { value: f64 },
    /// The observations do not determine a valid model.
    #[error("degenerate fit: {reason}")]
    DegenerateFit { reason: String },
    /// Fewer usable observations than a fit requires.
    #[error("need at least {required} observations with distinct levels, got {available}")]
    NotEnoughObservations { required: usize, available: usize },
}

/// An institution's log-citation distribution in world z-space.
///
/// `location` and `scale` are relative to the world distribution, which
/// is fixed to the standard normal; the world itself is `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CitationModel {
    location: f64,
    scale: f64,
}

impl CitationModel {
    /// Builds a model, rejecting non-positive or non-finite scales.
    pub fn new(location: f64, scale: f64) -> Result<Self, ModelError> {
        if !location.is_finite() {
            return Err(ModelError::DegenerateFit {
                reason: format!("non-finite location {location}"),
            });
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ModelError::NonPositiveScale { value: scale });
        }
        Ok(Self { location, scale })
    }

    /// The world reference distribution itself.
    pub fn world() -> Self {
        Self { location: 0.0, scale: 1.0 }
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Probability that a random paper of this institution lands in the
    /// world top-`level` set: `1 - Φ((z_level - m) / s)`.
    pub fn top_fraction_probability(&self, level: f64) -> Result<f64, ModelError> {
        let z = world_threshold(level)?;
        Ok(1.0 - std_normal_cdf((z - self.location) / self.scale))
    }

    /// The model's own percentile observation at `level`; the inverse
    /// workflow of fitting.
    pub fn observation_at(&self, level: f64) -> Result<PercentileObservation, ModelError> {
        PercentileObservation::new(level, self.top_fraction_probability(level)?)
    }

    /// Closed-form fit from two observations at distinct levels.
    ///
    /// With `z_i` the world threshold of the level and `u_i` the probit
    /// of the proportion, `s = (z_a - z_b) / (u_a - u_b)` and
    /// `m = z_a - s * u_a`.
    pub fn fit_two_point(
        obs_a: PercentileObservation,
        obs_b: PercentileObservation,
    ) -> Result<Self, ModelError> {
        if obs_a.level() == obs_b.level() {
            return Err(ModelError::DegenerateFit {
                reason: format!("both observations at level {}", obs_a.level()),
            });
        }
        let (z_a, u_a) = probit_point(&obs_a)?;
        let (z_b, u_b) = probit_point(&obs_b)?;
        if u_a == u_b {
            return Err(ModelError::DegenerateFit {
                reason: "observations imply identical probits".to_string(),
            });
        }
        let scale = (z_a - z_b) / (u_a - u_b);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ModelError::DegenerateFit {
                reason: format!("implied scale {scale} is not positive"),
            });
        }
        Self::new(z_a - scale * u_a, scale)
    }

    /// Least-squares fit over two or more observations.
    ///
    /// Ordinary least squares of the proportion probits `u_i` against
    /// the level thresholds `z_i`; slope `b` and intercept `a` map back
    /// via `s = 1/b`, `m = -a/b`. With exactly two points this reduces
    /// to the closed form of [`fit_two_point`].
    pub fn fit_least_squares(observations: &[PercentileObservation]) -> Result<Self, ModelError> {
        let mut points = Vec::with_capacity(observations.len());
        for obs in observations {
            points.push(probit_point(obs)?);
        }
        let distinct = {
            let mut levels: Vec<f64> = observations.iter().map(|o| o.level()).collect();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            levels.len()
        };
        if distinct < 2 {
            return Err(ModelError::NotEnoughObservations {
                required: 2,
                available: distinct,
            });
        }
        let n = points.len() as f64;
        let sum_z: f64 = points.iter().map(|(z, _)| z).sum();
        let sum_u: f64 = points.iter().map(|(_, u)| u).sum();
        let mean_z = sum_z / n;
        let mean_u = sum_u / n;
        let mut s_zu = 0.0;
        let mut s_zz = 0.0;
        for (z, u) in &points {
            s_zu += (z - mean_z) * (u - mean_u);
            s_zz += (z - mean_z) * (z - mean_z);
        }
        // Slope of u on z; the model scale is its reciprocal.
        let slope = s_zu / s_zz;
        if !(slope.is_finite() && slope > 0.0) {
            return Err(ModelError::DegenerateFit {
                reason: format!("probit regression slope {slope} is not positive"),
            });
        }
        let intercept = mean_u - slope * mean_z;
        Self::new(-intercept / slope, 1.0 / slope)
    }

    /// Residual sum of squares of the probit regression under this model.
    pub fn probit_residual(&self, observations: &[PercentileObservation]) -> Result<f64, ModelError> {
        let mut rss = 0.0;
        for obs in observations {
            let (z, u) = probit_point(obs)?;
            let predicted = (z - self.location) / self.scale;
            rss += (u - predicted) * (u - predicted);
        }
        Ok(rss)
    }
}

/// A (world level, institutional share) pair from a ranking dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileObservation {
    level: f64,
    proportion: f64,
}

impl PercentileObservation {
    pub fn new(level: f64, proportion: f64) -> Result<Self, ModelError> {
        if !(level > 0.0 && level < 1.0) {
            return Err(ModelError::LevelOutOfRange { value: level });
        }
        if !(0.0..=1.0).contains(&proportion) || proportion.is_nan() {
            return Err(ModelError::ProbabilityOutOfRange { value: proportion });
        }
        Ok(Self { level, proportion })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn proportion(&self) -> f64 {
        self.proportion
    }

    /// True when the proportion can enter the probit transform.
    pub fn usable_for_fit(&self) -> bool {
        self.proportion > 0.0 && self.proportion < 1.0
    }
}

/// The world top-fraction an assessment extrapolates to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssessmentLevel(f64);

impl AssessmentLevel {
    /// Fraction of world publications counted as breakthrough-grade.
    pub const BREAKTHROUGH: AssessmentLevel = AssessmentLevel(0.0002);
    /// The far stricter prize-grade fraction.
    pub const PRIZE: AssessmentLevel = AssessmentLevel(0.00001);

    pub fn new(x: f64) -> Result<Self, ModelError> {
        if !(x > 0.0 && x < 1.0) {
            return Err(ModelError::LevelOutOfRange { value: x });
        }
        Ok(Self(x))
    }

    pub fn fraction(&self) -> f64 {
        self.0
    }
}

impl Default for AssessmentLevel {
    fn default() -> Self {
        Self::BREAKTHROUGH
    }
}

/// World z-space threshold of the top-`level` cut:
/// `Φ⁻¹(1 - level)`, strictly decreasing in the level.
pub fn world_threshold(level: f64) -> Result<f64, ModelError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(ModelError::LevelOutOfRange { value: level });
    }
    std_normal_quantile(1.0 - level)
}

/// Expected number of top-`level` papers: the tail probability scaled
/// by the publication count.
pub fn expected_breakthroughs(probability: f64, n_publications: u64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&probability));
    probability * n_publications as f64
}

fn probit_point(obs: &PercentileObservation) -> Result<(f64, f64), ModelError> {
    if !obs.usable_for_fit() {
        return Err(ModelError::BoundaryProportion {
            value: obs.proportion(),
        });
    }
    let z = world_threshold(obs.level())?;
    let u = std_normal_quantile(1.0 - obs.proportion())?;
    Ok((z, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(level: f64, proportion: f64) -> PercentileObservation {
        PercentileObservation::new(level, proportion).unwrap()
    }

    #[test]
    fn world_threshold_reference_points() {
        assert_eq!(world_threshold(0.5).unwrap(), 0.0);
        // Frozen from bisection on the quadrature-checked CDF.
        assert!((world_threshold(0.0002).unwrap() - 3.540_083_799_206_145_1).abs() < 1e-9);
        assert!((world_threshold(0.10).unwrap() - 1.281_551_565_544_600_5).abs() < 1e-9);
    }

    #[test]
    fn world_threshold_rejects_bad_levels() {
        assert!(world_threshold(0.0).is_err());
        assert!(world_threshold(1.0).is_err());
        assert!(world_threshold(-0.1).is_err());
    }

    #[test]
    fn world_institution_fits_to_identity() {
        let fitted = CitationModel::fit_two_point(obs(0.10, 0.10), obs(0.01, 0.01)).unwrap();
        assert!(fitted.location().abs() < 1e-12);
        assert!((fitted.scale() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_round_trip() {
        let truth = CitationModel::new(0.4, 1.2).unwrap();
        let a = truth.observation_at(0.10).unwrap();
        let b = truth.observation_at(0.01).unwrap();
        let fitted = CitationModel::fit_two_point(a, b).unwrap();
        assert!((fitted.location() - 0.4).abs() < 1e-9);
        assert!((fitted.scale() - 1.2).abs() < 1e-9);
        for level in [0.10, 0.01] {
            let p = fitted.top_fraction_probability(level).unwrap();
            let q = truth.top_fraction_probability(level).unwrap();
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn two_point_matches_published_scale_institution() {
        // Fixture derived by choosing s = 1.1 and solving the location so
        // the extrapolated breakthrough probability is 0.28e-3, then
        // generating the two proportions from the resulting model.
        let a = obs(0.10, 0.081_196_038_587_703_38);
        let b = obs(0.01, 0.009_465_515_212_086_107);
        let fitted = CitationModel::fit_two_point(a, b).unwrap();
        assert!((fitted.location() - (-0.255_227_062_402_034_83)).abs() < 1e-9);
        assert!((fitted.scale() - 1.1).abs() < 1e-9);
        let p = fitted.top_fraction_probability(0.0002).unwrap();
        assert!((p - 0.28e-3).abs() < 1e-9);
    }

    #[test]
    fn two_point_rejects_contradictory_observations() {
        // Proportion falling as the level widens implies a negative scale.
        let err = CitationModel::fit_two_point(obs(0.10, 0.05), obs(0.01, 0.20)).unwrap_err();
        assert!(matches!(err, ModelError::DegenerateFit { .. }));
        // Identical proportions give u_a = u_b.
        let err = CitationModel::fit_two_point(obs(0.10, 0.05), obs(0.01, 0.05)).unwrap_err();
        assert!(matches!(err, ModelError::DegenerateFit { .. }));
    }

    #[test]
    fn two_point_rejects_boundary_proportions() {
        let boundary = obs(0.10, 0.0);
        let err = CitationModel::fit_two_point(boundary, obs(0.01, 0.01)).unwrap_err();
        assert!(matches!(err, ModelError::BoundaryProportion { .. }));
    }

    #[test]
    fn least_squares_exact_on_model_points() {
        let truth = CitationModel::new(-0.2, 0.9).unwrap();
        let observations: Vec<_> = [0.5, 0.1, 0.01]
            .iter()
            .map(|&l| truth.observation_at(l).unwrap())
            .collect();
        let fitted = CitationModel::fit_least_squares(&observations).unwrap();
        assert!((fitted.location() - -0.2).abs() < 1e-9);
        assert!((fitted.scale() - 0.9).abs() < 1e-9);
        assert!(fitted.probit_residual(&observations).unwrap() < 1e-18);
    }

    #[test]
    fn least_squares_two_points_equals_closed_form() {
        let a = obs(0.10, 0.163);
        let b = obs(0.01, 0.027);
        let ls = CitationModel::fit_least_squares(&[a, b]).unwrap();
        let tp = CitationModel::fit_two_point(a, b).unwrap();
        assert!((ls.location() - tp.location()).abs() < 1e-12);
        assert!((ls.scale() - tp.scale()).abs() < 1e-12);
    }

    #[test]
    fn least_squares_on_perturbed_points() {
        // Expected values frozen from an independent normal-equations
        // solve of the 3x2 system (sums of squares carried at high
        // precision): each exact proportion shifted by +0.001.
        let truth = CitationModel::new(-0.2, 0.9).unwrap();
        let observations: Vec<_> = [0.5, 0.1, 0.01]
            .iter()
            .map(|&l| {
                let exact = truth.observation_at(l).unwrap();
                obs(l, exact.proportion() + 0.001)
            })
            .collect();
        let fitted = CitationModel::fit_least_squares(&observations).unwrap();
        assert!((fitted.location() - -0.220_594_695_968_757_02).abs() < 1e-10);
        assert!((fitted.scale() - 0.937_765_340_164_272_31).abs() < 1e-10);
        let rss = fitted.probit_residual(&observations).unwrap();
        assert!((rss - 1.811_556_5e-3).abs() < 1e-9);
        assert!(rss > 0.0);
        // Recovery stays within 5% of the parameter scale.
        assert!((fitted.location() - -0.2).abs() < 0.05);
        assert!((fitted.scale() - 0.9).abs() / 0.9 < 0.05);
    }

    #[test]
    fn least_squares_needs_two_distinct_levels() {
        let err = CitationModel::fit_least_squares(&[obs(0.1, 0.2)]).unwrap_err();
        assert!(matches!(err, ModelError::NotEnoughObservations { .. }));
        let err =
            CitationModel::fit_least_squares(&[obs(0.1, 0.2), obs(0.1, 0.25)]).unwrap_err();
        assert!(matches!(err, ModelError::NotEnoughObservations { .. }));
    }

    #[test]
    fn top_fraction_identity_for_world() {
        let world = CitationModel::world();
        for level in [0.0002, 0.01, 0.1, 0.5, 0.9] {
            let p = world.top_fraction_probability(level).unwrap();
            assert!((p - level).abs() < 1e-12, "level {level} gave {p}");
        }
    }

    #[test]
    fn top_fraction_shifted_institution() {
        // 1 - Φ(Φ⁻¹(0.99) - 0.5); frozen from the analytic route and
        // cross-checked against Monte Carlo in the simulation tests.
        let model = CitationModel::new(0.5, 1.0).unwrap();
        let p = model.top_fraction_probability(0.01).unwrap();
        assert!((p - 0.033_898_939_122_8).abs() < 1e-10);
    }

    #[test]
    fn expected_breakthroughs_reference_rows() {
        let e = expected_breakthroughs(0.50e-3, 1355);
        assert!((e - 0.6775).abs() < 1e-12);
        assert_eq!(expected_breakthroughs(0.0, 5000), 0.0);
        let e = expected_breakthroughs(0.34e-3, 1255);
        assert!((e - 0.4267).abs() < 1e-12);
    }

    #[test]
    fn assessment_level_bounds() {
        assert!(AssessmentLevel::new(0.0).is_err());
        assert!(AssessmentLevel::new(1.0).is_err());
        assert_eq!(AssessmentLevel::default().fraction(), 0.0002);
        assert_eq!(AssessmentLevel::PRIZE.fraction(), 0.00001);
    }
}
