//! Derived quantities: per-institution assessments, publication-weighted
//! pooling, exclusion analysis, period comparison, researcher counts,
//! per-capita ratios, and rankings.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::citation_model::{
    expected_breakthroughs, AssessmentLevel, CitationModel, ModelError, PercentileObservation,
};
use crate::datasets::{normalized_name, InstitutionRecord, PopulationRecord, ResearcherRecord};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{institution}: insufficient data ({reason})")]
    InsufficientData { institution: String, reason: String },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("report set carries no publications")]
    NoPublications,
    #[error("exclusion removed every report")]
    AllExcluded,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How far the fit had to fall back from the preferred levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Normal,
    Low,
}

/// Everything derived for one institution-period.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentReport {
    pub institution: String,
    pub country: String,
    pub period: String,
    /// Tail probability at the configured assessment level.
    pub probability: f64,
    pub publications: u64,
    /// `probability * publications`, exactly.
    pub expected_breakthroughs: f64,
    pub ioannidis_count: usize,
    pub confidence: Confidence,
    pub tags: BTreeSet<String>,
}

/// Observation set an assessment will fit, after the fallback rule.
///
/// Preferred levels are top-10% and top-1%; when the top-1% share is
/// missing or sits on a probit boundary, the top-50%/top-10% pair is
/// used instead and the result is flagged low-confidence. Boundary
/// shares are dropped, never clamped.
pub fn usable_observations(
    record: &InstitutionRecord,
) -> Result<(Vec<PercentileObservation>, Confidence, Vec<String>), AnalysisError> {
    let mut notes = Vec::new();
    let mut usable = |level: f64, value: Option<f64>, label: &str| -> Option<PercentileObservation> {
        let v = value?;
        if v > 0.0 && v < 1.0 {
            Some(PercentileObservation::new(level, v).expect("validated fraction"))
        } else {
            notes.push(format!(
                "{}: {label} = {v} cannot enter the probit transform; dropped",
                record.institution
            ));
            None
        }
    };
    let top50 = usable(0.50, record.pp_top50, "pp_top50");
    let top10 = usable(0.10, record.pp_top10, "pp_top10");
    let top1 = usable(0.01, record.pp_top1, "pp_top1");
    match (top50, top10, top1) {
        (_, Some(a), Some(b)) => Ok((vec![a, b], Confidence::Normal, notes)),
        (Some(a), Some(b), None) => {
            notes.push(format!(
                "{}: top-1% share unusable; fell back to top-50%/top-10% (low confidence)",
                record.institution
            ));
            Ok((vec![a, b], Confidence::Low, notes))
        }
        _ => Err(AnalysisError::InsufficientData {
            institution: record.institution.clone(),
            reason: "fewer than two usable percentile shares".to_string(),
        }),
    }
}

/// Fits the record's citation model under the fallback rule.
pub fn fit_record(
    record: &InstitutionRecord,
) -> Result<(CitationModel, Confidence), AnalysisError> {
    let (observations, confidence, _) = usable_observations(record)?;
    let model = CitationModel::fit_least_squares(&observations)?;
    Ok((model, confidence))
}

/// Assesses one institution-period: fit, extrapolate, scale by output,
/// and count matching researchers.
pub fn assess(
    record: &InstitutionRecord,
    researchers: &[ResearcherRecord],
    level: AssessmentLevel,
) -> Result<AssessmentReport, AnalysisError> {
    let (model, confidence) = fit_record(record)?;
    let probability = model.top_fraction_probability(level.fraction())?;
    let key = normalized_name(&record.institution);
    let ioannidis_count = researchers
        .iter()
        .filter(|r| normalized_name(&r.institution) == key)
        .count();
    Ok(AssessmentReport {
        institution: record.institution.clone(),
        country: record.country.clone(),
        period: record.period.clone(),
        probability,
        publications: record.publications,
        expected_breakthroughs: expected_breakthroughs(probability, record.publications),
        ioannidis_count,
        confidence,
        tags: record.tags.clone(),
    })
}

/// Publication-weighted mean tail probability:
/// total expected breakthroughs over total publications.
pub fn pooled_probability(reports: &[AssessmentReport]) -> Result<f64, AnalysisError> {
    if reports.is_empty() {
        return Err(AnalysisError::EmptyInput("no reports to pool"));
    }
    let total_pubs: u64 = reports.iter().map(|r| r.publications).sum();
    if total_pubs == 0 {
        return Err(AnalysisError::NoPublications);
    }
    let total_eb: f64 = reports.iter().map(|r| r.expected_breakthroughs).sum();
    Ok(total_eb / total_pubs as f64)
}

/// Unweighted mean probability, for comparison against the pooled one.
pub fn unweighted_mean_probability(reports: &[AssessmentReport]) -> Result<f64, AnalysisError> {
    if reports.is_empty() {
        return Err(AnalysisError::EmptyInput("no reports to average"));
    }
    Ok(reports.iter().map(|r| r.probability).sum::<f64>() / reports.len() as f64)
}

/// Pooled probability of the complement of the named institutions.
///
/// Excluded names that match nothing produce warnings, not errors.
pub fn pooled_excluding(
    reports: &[AssessmentReport],
    excluded: &[String],
) -> Result<(f64, Vec<String>), AnalysisError> {
    let excluded_keys: BTreeSet<String> = excluded.iter().map(|n| normalized_name(n)).collect();
    let present: BTreeSet<String> = reports
        .iter()
        .map(|r| normalized_name(&r.institution))
        .collect();
    let mut warnings = Vec::new();
    for name in excluded {
        if !present.contains(&normalized_name(name)) {
            warnings.push(format!("excluded institution `{name}` matches no report"));
        }
    }
    let complement: Vec<AssessmentReport> = reports
        .iter()
        .filter(|r| !excluded_keys.contains(&normalized_name(&r.institution)))
        .cloned()
        .collect();
    if complement.is_empty() && !reports.is_empty() {
        return Err(AnalysisError::AllExcluded);
    }
    Ok((pooled_probability(&complement)?, warnings))
}

/// What to group researcher counts by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Institution,
    Country,
}

/// Exact researcher multiplicities per group, keyed by the first-seen
/// spelling of each normalized name.
pub fn count_researchers(
    researchers: &[ResearcherRecord],
    group_by: GroupBy,
) -> BTreeMap<String, usize> {
    let mut by_key: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for r in researchers {
        let name = match group_by {
            GroupBy::Institution => &r.institution,
            GroupBy::Country => &r.country,
        };
        let entry = by_key
            .entry(normalized_name(name))
            .or_insert_with(|| (name.clone(), 0));
        entry.1 += 1;
    }
    by_key.into_values().collect()
}

/// One country's researcher density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryAggregate {
    pub country: String,
    pub ioannidis_count: usize,
    pub population_millions: f64,
    /// `ioannidis_count / population_millions`.
    pub per_million: f64,
}

/// Researchers per million inhabitants, sorted descending.
///
/// Counted countries without a population record are omitted with a
/// warning.
pub fn per_million(
    counts: &BTreeMap<String, usize>,
    populations: &[PopulationRecord],
) -> (Vec<CountryAggregate>, Vec<String>) {
    let by_key: BTreeMap<String, &PopulationRecord> = populations
        .iter()
        .map(|p| (normalized_name(&p.country), p))
        .collect();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (country, &count) in counts {
        match by_key.get(&normalized_name(country)) {
            Some(pop) => rows.push(CountryAggregate {
                country: country.clone(),
                ioannidis_count: count,
                population_millions: pop.population_millions,
                per_million: count as f64 / pop.population_millions,
            }),
            None => warnings.push(format!("no population record for `{country}`; omitted")),
        }
    }
    rows.sort_by(|a, b| {
        b.per_million
            .total_cmp(&a.per_million)
            .then_with(|| a.country.cmp(&b.country))
    });
    (rows, warnings)
}

/// One period's figures inside a comparison row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodFigures {
    pub probability: f64,
    pub publications: u64,
    pub expected_breakthroughs: f64,
}

/// Paired assessment of one institution across two periods; either side
/// may be missing when the institution appears only once or its data
/// were insufficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodComparisonRow {
    pub institution: String,
    pub first: Option<PeriodFigures>,
    pub second: Option<PeriodFigures>,
}

/// Column sums and pooled probabilities of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonTotals {
    pub publications_first: u64,
    pub publications_second: u64,
    pub expected_breakthroughs_first: f64,
    pub expected_breakthroughs_second: f64,
    /// Publication-weighted mean probability per period.
    pub pooled_first: f64,
    pub pooled_second: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodComparisonReport {
    pub rows: Vec<PeriodComparisonRow>,
    pub totals: ComparisonTotals,
    pub warnings: Vec<String>,
}

/// Pairs two record lists by exact normalized institution name and
/// assesses both sides.
///
/// Unmatched institutions appear one-sided with a warning; rows keep
/// the order of the first list, then second-list-only stragglers in
/// their own order.
pub fn compare_periods(
    records_first: &[InstitutionRecord],
    records_second: &[InstitutionRecord],
    level: AssessmentLevel,
) -> Result<PeriodComparisonReport, AnalysisError> {
    if records_first.is_empty() && records_second.is_empty() {
        return Err(AnalysisError::EmptyInput("both record lists are empty"));
    }
    let mut warnings = Vec::new();
    let second_by_key: BTreeMap<String, &InstitutionRecord> = records_second
        .iter()
        .map(|r| (normalized_name(&r.institution), r))
        .collect();
    let first_keys: BTreeSet<String> = records_first
        .iter()
        .map(|r| normalized_name(&r.institution))
        .collect();
    let mut rows = Vec::new();
    for record in records_first {
        let key = normalized_name(&record.institution);
        let first = period_figures(record, level, &mut warnings);
        let second = match second_by_key.get(&key) {
            Some(other) => period_figures(other, level, &mut warnings),
            None => {
                warnings.push(format!(
                    "{} appears only in the first period",
                    record.institution
                ));
                None
            }
        };
        rows.push(PeriodComparisonRow {
            institution: record.institution.clone(),
            first,
            second,
        });
    }
    for record in records_second {
        if !first_keys.contains(&normalized_name(&record.institution)) {
            warnings.push(format!(
                "{} appears only in the second period",
                record.institution
            ));
            let second = period_figures(record, level, &mut warnings);
            rows.push(PeriodComparisonRow {
                institution: record.institution.clone(),
                first: None,
                second,
            });
        }
    }
    let sum = |side: fn(&PeriodComparisonRow) -> Option<PeriodFigures>| -> (u64, f64) {
        rows.iter().filter_map(side).fold((0, 0.0), |(n, e), f| {
            (n + f.publications, e + f.expected_breakthroughs)
        })
    };
    let (pubs_first, eb_first) = sum(|r| r.first);
    let (pubs_second, eb_second) = sum(|r| r.second);
    let totals = ComparisonTotals {
        publications_first: pubs_first,
        publications_second: pubs_second,
        expected_breakthroughs_first: eb_first,
        expected_breakthroughs_second: eb_second,
        pooled_first: if pubs_first > 0 { eb_first / pubs_first as f64 } else { 0.0 },
        pooled_second: if pubs_second > 0 { eb_second / pubs_second as f64 } else { 0.0 },
    };
    Ok(PeriodComparisonReport {
        rows,
        totals,
        warnings,
    })
}

fn period_figures(
    record: &InstitutionRecord,
    level: AssessmentLevel,
    warnings: &mut Vec<String>,
) -> Option<PeriodFigures> {
    let assessed = fit_record(record).and_then(|(model, _)| {
        model
            .top_fraction_probability(level.fraction())
            .map_err(AnalysisError::from)
    });
    match assessed {
        Ok(probability) => Some(PeriodFigures {
            probability,
            publications: record.publications,
            expected_breakthroughs: expected_breakthroughs(probability, record.publications),
        }),
        Err(e) => {
            warnings.push(format!("{}: {e}; side left blank", record.period));
            None
        }
    }
}

/// Ranking key for [`rank`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKey {
    Probability,
    Avances,
    Ioannidis,
    Publications,
}

/// Stable descending sort by the key, ties broken by institution name
/// ascending; only reports carrying all `filter_tags` are retained.
pub fn rank(
    reports: &[AssessmentReport],
    key: RankKey,
    filter_tags: &BTreeSet<String>,
) -> Vec<AssessmentReport> {
    let mut out: Vec<AssessmentReport> = reports
        .iter()
        .filter(|r| filter_tags.iter().all(|t| r.tags.contains(t)))
        .cloned()
        .collect();
    out.sort_by(|a, b| {
        let ordering = match key {
            RankKey::Probability => b.probability.total_cmp(&a.probability),
            RankKey::Avances => b
                .expected_breakthroughs
                .total_cmp(&a.expected_breakthroughs),
            RankKey::Ioannidis => b.ioannidis_count.cmp(&a.ioannidis_count),
            RankKey::Publications => b.publications.cmp(&a.publications),
        };
        ordering.then_with(|| a.institution.cmp(&b.institution))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Counting;

    fn record(institution: &str, publications: u64, pp: [Option<f64>; 3]) -> InstitutionRecord {
        InstitutionRecord {
            institution: institution.to_string(),
            country: "España".to_string(),
            period: "2015-2018".to_string(),
            counting: Counting::Fractional,
            publications,
            pp_top50: pp[0],
            pp_top10: pp[1],
            pp_top1: pp[2],
            tags: BTreeSet::new(),
        }
    }

    fn report(institution: &str, probability: f64, publications: u64) -> AssessmentReport {
        AssessmentReport {
            institution: institution.to_string(),
            country: String::new(),
            period: String::new(),
            probability,
            publications,
            expected_breakthroughs: expected_breakthroughs(probability, publications),
            ioannidis_count: 0,
            confidence: Confidence::Normal,
            tags: BTreeSet::new(),
        }
    }

    #[test]
    fn world_average_record_assesses_to_the_level() {
        let rec = record("Mundo", 10_000, [Some(0.5), Some(0.1), Some(0.01)]);
        let out = assess(&rec, &[], AssessmentLevel::default()).unwrap();
        assert!((out.probability - 0.0002).abs() < 1e-12);
        assert!((out.expected_breakthroughs - 0.0002 * 10_000.0).abs() < 1e-9);
        assert_eq!(out.confidence, Confidence::Normal);
    }

    #[test]
    fn fallback_to_wider_levels_lowers_confidence() {
        let rec = record("Pequeña", 300, [Some(0.4), Some(0.07), Some(0.0)]);
        let (obs, confidence, notes) = usable_observations(&rec).unwrap();
        assert_eq!(confidence, Confidence::Low);
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].level(), 0.50);
        assert_eq!(obs[1].level(), 0.10);
        assert_eq!(notes.len(), 2);

        let missing = record("Sin cola", 300, [Some(0.4), Some(0.07), None]);
        let (_, confidence, _) = usable_observations(&missing).unwrap();
        assert_eq!(confidence, Confidence::Low);
    }

    #[test]
    fn one_usable_share_is_insufficient() {
        let rec = record("Escasa", 50, [None, Some(0.07), None]);
        let err = assess(&rec, &[], AssessmentLevel::default()).unwrap_err();
        assert!(matches!(err, AnalysisError::InsufficientData { .. }));
    }

    #[test]
    fn researcher_counting_matches_names_in_any_case() {
        let researchers: Vec<ResearcherRecord> = (0..5)
            .map(|i| ResearcherRecord {
                researcher_id: format!("r{i}"),
                name: String::new(),
                institution: if i < 3 { "Universidad A".into() } else { "universidad a".into() },
                country: "España".into(),
                field: String::new(),
                rank_score: None,
            })
            .collect();
        let counts = count_researchers(&researchers, GroupBy::Institution);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["Universidad A"], 5);
        assert!(count_researchers(&[], GroupBy::Country).is_empty());
    }

    #[test]
    fn pooled_probability_is_the_weighted_mean() {
        let reports = vec![report("A", 0.4e-3, 1000), report("B", 0.1e-3, 3000)];
        let pooled = pooled_probability(&reports).unwrap();
        assert!((pooled - (0.4e-3 * 1000.0 + 0.1e-3 * 3000.0) / 4000.0).abs() < 1e-18);
        let single = pooled_probability(&reports[..1]).unwrap();
        assert!((single - 0.4e-3).abs() < 1e-18);
        assert!(pooled_probability(&[]).is_err());
    }

    #[test]
    fn pooled_lies_between_extremes() {
        let reports = vec![
            report("A", 0.3e-3, 123),
            report("B", 0.9e-3, 4567),
            report("C", 0.05e-3, 890),
        ];
        let pooled = pooled_probability(&reports).unwrap();
        assert!(pooled >= 0.05e-3 && pooled <= 0.9e-3);
    }

    #[test]
    fn exclusion_complement_and_warnings() {
        let reports = vec![
            report("A", 0.4e-3, 1000),
            report("B", 0.1e-3, 3000),
            report("C", 0.2e-3, 2000),
        ];
        let (p, warnings) = pooled_excluding(&reports, &["a".to_string()]).unwrap();
        assert!(warnings.is_empty());
        assert!((p - pooled_probability(&reports[1..]).unwrap()).abs() < 1e-18);

        let (p, warnings) = pooled_excluding(&reports, &["Nadie".to_string()]).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!((p - pooled_probability(&reports).unwrap()).abs() < 1e-18);

        let all: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            pooled_excluding(&reports, &all),
            Err(AnalysisError::AllExcluded)
        ));
    }

    #[test]
    fn per_million_ratios_and_sorting() {
        let mut counts = BTreeMap::new();
        counts.insert("España".to_string(), 2291usize);
        counts.insert("Suiza".to_string(), 2545usize);
        counts.insert("Atlantis".to_string(), 10usize);
        let populations = vec![
            PopulationRecord { country: "España".into(), population_millions: 47.0 },
            PopulationRecord { country: "Suiza".into(), population_millions: 8.6 },
        ];
        let (rows, warnings) = per_million(&counts, &populations);
        assert_eq!(rows.len(), 2);
        assert_eq!(warnings.len(), 1);
        assert_eq!(rows[0].country, "Suiza");
        assert!((rows[0].per_million - 2545.0 / 8.6).abs() < 1e-9);
        assert!((rows[1].per_million - 2291.0 / 47.0).abs() < 1e-9);
    }

    #[test]
    fn per_million_scale_invariance() {
        let mut a = BTreeMap::new();
        a.insert("X".to_string(), 100usize);
        let mut b = BTreeMap::new();
        b.insert("X".to_string(), 300usize);
        let (rows_a, _) = per_million(
            &a,
            &[PopulationRecord { country: "X".into(), population_millions: 5.0 }],
        );
        let (rows_b, _) = per_million(
            &b,
            &[PopulationRecord { country: "X".into(), population_millions: 15.0 }],
        );
        assert!((rows_a[0].per_million - rows_b[0].per_million).abs() < 1e-12);
    }

    #[test]
    fn identical_period_lists_give_zero_deltas() {
        let records = vec![
            record("A", 1000, [Some(0.5), Some(0.1), Some(0.01)]),
            record("B", 2000, [Some(0.6), Some(0.15), Some(0.02)]),
        ];
        let cmp = compare_periods(&records, &records, AssessmentLevel::default()).unwrap();
        assert!(cmp.warnings.is_empty());
        for row in &cmp.rows {
            let (a, b) = (row.first.unwrap(), row.second.unwrap());
            assert_eq!(a, b);
        }
        assert_eq!(cmp.totals.publications_first, cmp.totals.publications_second);
    }

    #[test]
    fn one_sided_institutions_warn() {
        let first = vec![record("Sola", 500, [Some(0.5), Some(0.1), Some(0.01)])];
        let second = vec![record("Nueva", 700, [Some(0.5), Some(0.1), Some(0.01)])];
        let cmp = compare_periods(&first, &second, AssessmentLevel::default()).unwrap();
        assert_eq!(cmp.rows.len(), 2);
        assert_eq!(cmp.warnings.len(), 2);
        assert!(cmp.rows[0].second.is_none());
        assert!(cmp.rows[1].first.is_none());
    }

    #[test]
    fn rank_orders_and_filters() {
        let mut a = report("Beta", 0.3e-3, 100);
        a.ioannidis_count = 10;
        a.tags.insert("technical".to_string());
        let mut b = report("Alfa", 0.3e-3, 500);
        b.ioannidis_count = 10;
        let mut c = report("Gamma", 0.9e-3, 50);
        c.ioannidis_count = 3;

        let all = vec![a.clone(), b.clone(), c.clone()];
        let by_ioannidis = rank(&all, RankKey::Ioannidis, &BTreeSet::new());
        assert_eq!(
            by_ioannidis.iter().map(|r| r.institution.as_str()).collect::<Vec<_>>(),
            vec!["Alfa", "Beta", "Gamma"],
        );
        let by_prob = rank(&all, RankKey::Probability, &BTreeSet::new());
        assert_eq!(by_prob[0].institution, "Gamma");

        let technical: BTreeSet<String> = ["technical".to_string()].into();
        let filtered = rank(&all, RankKey::Avances, &technical);
        assert_eq!(filtered.len(), 1);
        assert_eq!(filtered[0].institution, "Beta");

        let nothing: BTreeSet<String> = ["missing".to_string()].into();
        assert!(rank(&all, RankKey::Avances, &nothing).is_empty());

        // Idempotence: ranking a ranked list changes nothing.
        let again = rank(&by_ioannidis, RankKey::Ioannidis, &BTreeSet::new());
        assert_eq!(again, by_ioannidis);
    }
}
