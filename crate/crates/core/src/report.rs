//! Rendering: display rounding, markdown/CSV/JSON table output, and
//! Figure-style distribution-curve data.
//!
//! Probabilities are stored as pure fractions everywhere; reports
//! display them scaled by 1000 with two decimals. Rounding is half-up
//! on the stored double, so display strings are a pure function of the
//! full-precision values. Spanish-style decimal commas appear only in
//! markdown output under the `es` locale; CSV and JSON always use
//! periods.

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::analysis::{
    AssessmentReport, Confidence, CountryAggregate, PeriodComparisonReport, PeriodFigures,
};
use crate::citation_model::{
    std_normal_pdf, world_threshold, AssessmentLevel, CitationModel, ModelError,
};
use crate::simulate::ValidationReport;

pub const TOOL_NAME: &str = "avance";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("distribution curve needs at least 10 points, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("render failed: {0}")]
    Render(String),
}

/// Output syntax of a rendered report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

/// Decimal-separator convention for markdown display.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locale {
    En,
    Es,
}

impl Locale {
    pub fn as_str(&self) -> &'static str {
        match self {
            Locale::En => "en",
            Locale::Es => "es",
        }
    }
}

/// Report-wide context rendered into the header / JSON `meta`.
#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub command: String,
    pub level: f64,
    pub locale: Locale,
    pub period: Option<String>,
    pub counting: Option<String>,
}

impl ReportMeta {
    pub fn new(command: &str, level: AssessmentLevel, locale: Locale) -> Self {
        Self {
            command: command.to_string(),
            level: level.fraction(),
            locale,
            period: None,
            counting: None,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        json!({
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "command": self.command,
            "level": self.level,
            "locale": self.locale.as_str(),
            "period": self.period,
            "counting": self.counting,
        })
    }
}

/// Half-up rounding of the stored double at `decimals` places.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    if value < 0.0 {
        -((-value * scale + 0.5).floor() / scale)
    } else {
        (value * scale + 0.5).floor() / scale
    }
}

/// Fixed-point decimal display with period separator.
pub fn display_decimal(value: f64, decimals: usize) -> String {
    format!("{:.*}", decimals, round_half_up(value, decimals as u32))
}

/// The paper-style probability column: fraction scaled by 1000, two
/// decimals.
pub fn display_probability_x1000(p: f64) -> String {
    display_decimal(p * 1000.0, 2)
}

/// Expected-breakthrough display, two decimals.
pub fn display_avances(avances: f64) -> String {
    display_decimal(avances, 2)
}

/// Per-million ratio display, whole numbers.
pub fn display_ratio(ratio: f64) -> String {
    display_decimal(ratio, 0)
}

fn localize(s: &str, locale: Locale) -> String {
    match locale {
        Locale::En => s.to_string(),
        Locale::Es => s.replace('.', ","),
    }
}

/// An institution the assessment had to skip, with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedInstitution {
    pub institution: String,
    pub reason: String,
}

#[derive(Serialize)]
struct AssessmentRow<'a> {
    institution: &'a str,
    country: &'a str,
    period: &'a str,
    probability: f64,
    probability_x1000_display: String,
    publications: u64,
    avances: f64,
    avances_display: String,
    ioannidis: usize,
    confidence: Confidence,
    tags: Vec<&'a str>,
}

fn assessment_row<'a>(r: &'a AssessmentReport) -> AssessmentRow<'a> {
    AssessmentRow {
        institution: &r.institution,
        country: &r.country,
        period: &r.period,
        probability: r.probability,
        probability_x1000_display: display_probability_x1000(r.probability),
        publications: r.publications,
        avances: r.expected_breakthroughs,
        avances_display: display_avances(r.expected_breakthroughs),
        ioannidis: r.ioannidis_count,
        confidence: r.confidence,
        tags: r.tags.iter().map(String::as_str).collect(),
    }
}

/// Renders the per-institution assessment table.
///
/// The total row sums full-precision expected breakthroughs first and
/// rounds once, rather than summing rounded cells.
pub fn render_assessments(
    reports: &[AssessmentReport],
    skipped: &[SkippedInstitution],
    meta: &ReportMeta,
    format: Format,
) -> Result<String, ReportError> {
    let total_pubs: u64 = reports.iter().map(|r| r.publications).sum();
    let total_avances: f64 = reports.iter().map(|r| r.expected_breakthroughs).sum();
    let total_ioannidis: usize = reports.iter().map(|r| r.ioannidis_count).sum();
    match format {
        Format::Json => {
            let rows: Vec<_> = reports.iter().map(assessment_row).collect();
            let doc = json!({
                "meta": meta.to_json(),
                "rows": rows,
                "totals": {
                    "publications": total_pubs,
                    "avances": total_avances,
                    "avances_display": display_avances(total_avances),
                    "ioannidis": total_ioannidis,
                },
                "skipped": skipped,
            });
            to_pretty_json(&doc)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "institution",
                "country",
                "period",
                "probability",
                "probability_x1000_display",
                "publications",
                "avances",
                "avances_display",
                "ioannidis",
                "confidence",
                "tags",
            ])
            .map_err(csv_err)?;
            for r in reports {
                let row = assessment_row(r);
                w.write_record([
                    row.institution,
                    row.country,
                    row.period,
                    &row.probability.to_string(),
                    &row.probability_x1000_display,
                    &row.publications.to_string(),
                    &row.avances.to_string(),
                    &row.avances_display,
                    &row.ioannidis.to_string(),
                    confidence_str(row.confidence),
                    &row.tags.join("|"),
                ])
                .map_err(csv_err)?;
            }
            w.write_record([
                "Total",
                "",
                "",
                "",
                "",
                &total_pubs.to_string(),
                &total_avances.to_string(),
                &display_avances(total_avances),
                &total_ioannidis.to_string(),
                "",
                "",
            ])
            .map_err(csv_err)?;
            for s in skipped {
                w.write_record([
                    s.institution.as_str(),
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                ])
                .map_err(csv_err)?;
            }
            finish_csv(w)
        }
        Format::Markdown => {
            let loc = meta.locale;
            let mut out = String::new();
            header_line(&mut out, meta);
            out.push_str(
                "| Institution | Probability (x1000) | Publications | Avances | Ioannidis |\n",
            );
            out.push_str("|---|---:|---:|---:|---:|\n");
            let mut any_low = false;
            for r in reports {
                let flag = if r.confidence == Confidence::Low {
                    any_low = true;
                    " *"
                } else {
                    ""
                };
                out.push_str(&format!(
                    "| {}{flag} | {} | {} | {} | {} |\n",
                    r.institution,
                    localize(&display_probability_x1000(r.probability), loc),
                    r.publications,
                    localize(&display_avances(r.expected_breakthroughs), loc),
                    r.ioannidis_count,
                ));
            }
            out.push_str(&format!(
                "| Total |  | {} | {} | {} |\n",
                total_pubs,
                localize(&display_avances(total_avances), loc),
                total_ioannidis,
            ));
            if any_low {
                out.push_str("\n\\* low confidence: fallback percentile levels used.\n");
            }
            if !skipped.is_empty() {
                out.push_str("\nSkipped (insufficient data):\n");
                for s in skipped {
                    out.push_str(&format!("- {}: {}\n", s.institution, s.reason));
                }
            }
            Ok(out)
        }
    }
}

/// Renders the researchers-per-million country table.
pub fn render_ratios(
    rows: &[CountryAggregate],
    meta: &ReportMeta,
    format: Format,
) -> Result<String, ReportError> {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct RatioRow<'a> {
                country: &'a str,
                ioannidis: usize,
                population_millions: f64,
                per_million: f64,
                per_million_display: String,
            }
            let rows: Vec<_> = rows
                .iter()
                .map(|r| RatioRow {
                    country: &r.country,
                    ioannidis: r.ioannidis_count,
                    population_millions: r.population_millions,
                    per_million: r.per_million,
                    per_million_display: display_ratio(r.per_million),
                })
                .collect();
            let doc = json!({ "meta": meta.to_json(), "rows": rows });
            to_pretty_json(&doc)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "country",
                "ioannidis",
                "population_millions",
                "per_million",
                "per_million_display",
            ])
            .map_err(csv_err)?;
            for r in rows {
                w.write_record([
                    r.country.as_str(),
                    &r.ioannidis_count.to_string(),
                    &r.population_millions.to_string(),
                    &r.per_million.to_string(),
                    &display_ratio(r.per_million),
                ])
                .map_err(csv_err)?;
            }
            finish_csv(w)
        }
        Format::Markdown => {
            let loc = meta.locale;
            let mut out = String::new();
            header_line(&mut out, meta);
            out.push_str("| Country | Ioannidis | Population (millions) | Per million |\n");
            out.push_str("|---|---:|---:|---:|\n");
            for r in rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    r.country,
                    r.ioannidis_count,
                    localize(&format!("{}", r.population_millions), loc),
                    display_ratio(r.per_million),
                ));
            }
            Ok(out)
        }
    }
}

/// Pooled-complement summary attached to a comparison when names are
/// excluded.
#[derive(Debug, Clone, Serialize)]
pub struct ExclusionSummary {
    pub excluded: Vec<String>,
    pub pooled_first: f64,
    pub pooled_second: f64,
}

#[derive(Serialize)]
struct ComparisonSide {
    probability: f64,
    probability_x1000_display: String,
    publications: u64,
    avances: f64,
    avances_display: String,
}

impl ComparisonSide {
    fn new(f: &PeriodFigures) -> Self {
        Self {
            probability: f.probability,
            probability_x1000_display: display_probability_x1000(f.probability),
            publications: f.publications,
            avances: f.expected_breakthroughs,
            avances_display: display_avances(f.expected_breakthroughs),
        }
    }
}

/// Renders the two-period comparison with Total and Media rows.
pub fn render_comparison(
    cmp: &PeriodComparisonReport,
    labels: (&str, &str),
    exclusion: Option<&ExclusionSummary>,
    meta: &ReportMeta,
    format: Format,
) -> Result<String, ReportError> {
    let totals = &cmp.totals;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                institution: &'a str,
                first: Option<ComparisonSide>,
                second: Option<ComparisonSide>,
            }
            let rows: Vec<_> = cmp
                .rows
                .iter()
                .map(|r| Row {
                    institution: &r.institution,
                    first: r.first.as_ref().map(ComparisonSide::new),
                    second: r.second.as_ref().map(ComparisonSide::new),
                })
                .collect();
            let doc = json!({
                "meta": meta.to_json(),
                "labels": { "first": labels.0, "second": labels.1 },
                "rows": rows,
                "totals": {
                    "publications_first": totals.publications_first,
                    "publications_second": totals.publications_second,
                    "avances_first": totals.expected_breakthroughs_first,
                    "avances_first_display": display_avances(totals.expected_breakthroughs_first),
                    "avances_second": totals.expected_breakthroughs_second,
                    "avances_second_display": display_avances(totals.expected_breakthroughs_second),
                    "pooled_first": totals.pooled_first,
                    "pooled_first_display": display_probability_x1000(totals.pooled_first),
                    "pooled_second": totals.pooled_second,
                    "pooled_second_display": display_probability_x1000(totals.pooled_second),
                },
                "exclusion": exclusion.map(|e| json!({
                    "excluded": e.excluded,
                    "pooled_first": e.pooled_first,
                    "pooled_first_display": display_probability_x1000(e.pooled_first),
                    "pooled_second": e.pooled_second,
                    "pooled_second_display": display_probability_x1000(e.pooled_second),
                })),
            });
            to_pretty_json(&doc)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "institution",
                "probability_first",
                "probability_first_display",
                "probability_second",
                "probability_second_display",
                "publications_first",
                "publications_second",
                "avances_first",
                "avances_first_display",
                "avances_second",
                "avances_second_display",
            ])
            .map_err(csv_err)?;
            let opt =
                |v: Option<String>| -> String { v.unwrap_or_default() };
            for r in &cmp.rows {
                w.write_record([
                    r.institution.clone(),
                    opt(r.first.map(|f| f.probability.to_string())),
                    opt(r.first.map(|f| display_probability_x1000(f.probability))),
                    opt(r.second.map(|f| f.probability.to_string())),
                    opt(r.second.map(|f| display_probability_x1000(f.probability))),
                    opt(r.first.map(|f| f.publications.to_string())),
                    opt(r.second.map(|f| f.publications.to_string())),
                    opt(r.first.map(|f| f.expected_breakthroughs.to_string())),
                    opt(r.first.map(|f| display_avances(f.expected_breakthroughs))),
                    opt(r.second.map(|f| f.expected_breakthroughs.to_string())),
                    opt(r.second.map(|f| display_avances(f.expected_breakthroughs))),
                ])
                .map_err(csv_err)?;
            }
            w.write_record([
                "Total".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                totals.publications_first.to_string(),
                totals.publications_second.to_string(),
                totals.expected_breakthroughs_first.to_string(),
                display_avances(totals.expected_breakthroughs_first),
                totals.expected_breakthroughs_second.to_string(),
                display_avances(totals.expected_breakthroughs_second),
            ])
            .map_err(csv_err)?;
            w.write_record([
                "Media".to_string(),
                totals.pooled_first.to_string(),
                display_probability_x1000(totals.pooled_first),
                totals.pooled_second.to_string(),
                display_probability_x1000(totals.pooled_second),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])
            .map_err(csv_err)?;
            if let Some(e) = exclusion {
                w.write_record([
                    format!("Media excluding {}", e.excluded.join("; ")),
                    e.pooled_first.to_string(),
                    display_probability_x1000(e.pooled_first),
                    e.pooled_second.to_string(),
                    display_probability_x1000(e.pooled_second),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ])
                .map_err(csv_err)?;
            }
            finish_csv(w)
        }
        Format::Markdown => {
            let loc = meta.locale;
            let mut out = String::new();
            header_line(&mut out, meta);
            out.push_str(&format!(
                "| Institution | Prob. (x1000) {a} | Prob. (x1000) {b} | Publications {a} | Publications {b} | Avances {a} | Avances {b} |\n",
                a = labels.0,
                b = labels.1
            ));
            out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
            let show_prob = |f: Option<PeriodFigures>| -> String {
                f.map(|f| localize(&display_probability_x1000(f.probability), loc))
                    .unwrap_or_default()
            };
            let show_pubs = |f: Option<PeriodFigures>| -> String {
                f.map(|f| f.publications.to_string()).unwrap_or_default()
            };
            let show_avances = |f: Option<PeriodFigures>| -> String {
                f.map(|f| localize(&display_avances(f.expected_breakthroughs), loc))
                    .unwrap_or_default()
            };
            for r in &cmp.rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} | {} |\n",
                    r.institution,
                    show_prob(r.first),
                    show_prob(r.second),
                    show_pubs(r.first),
                    show_pubs(r.second),
                    show_avances(r.first),
                    show_avances(r.second),
                ));
            }
            out.push_str(&format!(
                "| Total |  |  | {} | {} | {} | {} |\n",
                totals.publications_first,
                totals.publications_second,
                localize(&display_avances(totals.expected_breakthroughs_first), loc),
                localize(&display_avances(totals.expected_breakthroughs_second), loc),
            ));
            out.push_str(&format!(
                "| Media | {} | {} |  |  |  |  |\n",
                localize(&display_probability_x1000(totals.pooled_first), loc),
                localize(&display_probability_x1000(totals.pooled_second), loc),
            ));
            if let Some(e) = exclusion {
                out.push_str(&format!(
                    "| Media excluding {} | {} | {} |  |  |  |  |\n",
                    e.excluded.join("; "),
                    localize(&display_probability_x1000(e.pooled_first), loc),
                    localize(&display_probability_x1000(e.pooled_second), loc),
                ));
            }
            Ok(out)
        }
    }
}

/// Renders a Monte Carlo validation report.
pub fn render_simulation(
    report: &ValidationReport,
    meta: &ReportMeta,
    format: Format,
) -> Result<String, ReportError> {
    match format {
        Format::Json => {
            let doc = json!({ "meta": meta.to_json(), "report": report });
            to_pretty_json(&doc)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "trial",
                "fitted_location",
                "fitted_scale",
                "location_error",
                "scale_error",
                "analytic_probability",
                "empirical_probability",
            ])
            .map_err(csv_err)?;
            for t in &report.trials {
                w.write_record([
                    t.trial.to_string(),
                    t.fitted_location.to_string(),
                    t.fitted_scale.to_string(),
                    t.location_error.to_string(),
                    t.scale_error.to_string(),
                    t.analytic_probability.to_string(),
                    t.empirical_probability.to_string(),
                ])
                .map_err(csv_err)?;
            }
            finish_csv(w)
        }
        Format::Markdown => {
            let mut out = String::new();
            header_line(&mut out, meta);
            out.push_str(&format!(
                "true model: location {} scale {}; tail level {}\n\n",
                report.true_location, report.true_scale, report.target_level
            ));
            out.push_str(
                "| Trial | Fitted location | Fitted scale | Analytic p | Empirical p |\n",
            );
            out.push_str("|---:|---:|---:|---:|---:|\n");
            for t in &report.trials {
                out.push_str(&format!(
                    "| {} | {:.6} | {:.6} | {:e} | {:e} |\n",
                    t.trial,
                    t.fitted_location,
                    t.fitted_scale,
                    t.analytic_probability,
                    t.empirical_probability,
                ));
                for (level, proportion) in &t.observations {
                    out.push_str(&format!(
                        "|  | level {level} | proportion {proportion} |  |  |\n"
                    ));
                }
                if !t.dropped_levels.is_empty() {
                    out.push_str(&format!(
                        "|  | dropped levels {:?} |  |  |  |\n",
                        t.dropped_levels
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// One sampled point of the model's citation-density curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Citations relative to the world median (log scale grid).
    pub citations_relative: f64,
    /// Lognormal density at that point.
    pub density: f64,
    /// Set on the rows marking the distribution mean and the top cut.
    pub marker: Option<CurveMarker>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMarker {
    Mean,
    TopCut,
}

/// Samples the model's lognormal citation density on a log-spaced grid
/// spanning `[0.01, 100]` times the distribution median, inserting
/// marker rows at the mean and at the top-`level` world cut.
pub fn distribution_curve(
    model: &CitationModel,
    n_points: usize,
    level: AssessmentLevel,
) -> Result<Vec<CurvePoint>, ReportError> {
    if n_points < 10 {
        return Err(ReportError::TooFewPoints(n_points));
    }
    let median = model.location().exp();
    let density = |x: f64| -> f64 {
        let z = (x.ln() - model.location()) / model.scale();
        std_normal_pdf(z) / (model.scale() * x)
    };
    let lo = 0.01 * median;
    let hi = 100.0 * median;
    let ratio = (hi / lo).ln();
    let mut points: Vec<CurvePoint> = (0..n_points)
        .map(|i| {
            let x = lo * (ratio * i as f64 / (n_points - 1) as f64).exp();
            CurvePoint {
                citations_relative: x,
                density: density(x),
                marker: None,
            }
        })
        .collect();
    let mean = (model.location() + 0.5 * model.scale() * model.scale()).exp();
    let cut = world_threshold(level.fraction())?.exp();
    for (x, marker) in [(mean, CurveMarker::Mean), (cut, CurveMarker::TopCut)] {
        points.push(CurvePoint {
            citations_relative: x,
            density: density(x),
            marker: Some(marker),
        });
    }
    points.sort_by(|a, b| {
        a.citations_relative
            .total_cmp(&b.citations_relative)
            .then_with(|| a.marker.is_some().cmp(&b.marker.is_some()))
    });
    points.dedup_by(|a, b| {
        if a.citations_relative == b.citations_relative {
            // Keep the marked row when a marker collides with the grid.
            if a.marker.is_some() && b.marker.is_none() {
                b.marker = a.marker;
            }
            true
        } else {
            false
        }
    });
    Ok(points)
}

/// CSV projection of a distribution curve.
pub fn curve_to_csv(points: &[CurvePoint]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["citations_relative", "density", "marker"])
        .map_err(csv_err)?;
    for p in points {
        let marker = match p.marker {
            None => "",
            Some(CurveMarker::Mean) => "mean",
            Some(CurveMarker::TopCut) => "top_cut",
        };
        w.write_record([
            p.citations_relative.to_string(),
            p.density.to_string(),
            marker.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

fn confidence_str(c: Confidence) -> &'static str {
    match c {
        Confidence::Normal => "normal",
        Confidence::Low => "low",
    }
}

fn header_line(out: &mut String, meta: &ReportMeta) {
    out.push_str(&format!(
        "{} {} — {} (level {})\n\n",
        TOOL_NAME, TOOL_VERSION, meta.command, meta.level
    ));
}

fn to_pretty_json(doc: &serde_json::Value) -> Result<String, ReportError> {
    serde_json::to_string_pretty(doc)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| ReportError::Render(e.to_string()))
}

fn csv_err(e: csv::Error) -> ReportError {
    ReportError::Render(e.to_string())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, ReportError> {
    let bytes = w
        .into_inner()
        .map_err(|e| ReportError::Render(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ReportError::Render(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up(0.125, 2), 0.13);
        assert_eq!(round_half_up(0.1249, 2), 0.12);
        assert_eq!(round_half_up(295.93, 0), 296.0);
        assert_eq!(round_half_up(48.74, 0), 49.0);
        assert_eq!(round_half_up(-0.125, 2), -0.13);
    }

    #[test]
    fn probability_display_follows_the_x1000_convention() {
        assert_eq!(display_probability_x1000(0.28e-3), "0.28");
        assert_eq!(display_probability_x1000(0.137025e-3), "0.14");
        assert_eq!(display_probability_x1000(0.129465e-3), "0.13");
        assert_eq!(display_probability_x1000(0.118595e-3), "0.12");
    }

    #[test]
    fn ratio_display_is_integer() {
        assert_eq!(display_ratio(2545.0 / 8.6), "296");
        assert_eq!(display_ratio(2291.0 / 47.0), "49");
        assert_eq!(display_ratio(384.0 / 10.3), "37");
    }

    #[test]
    fn locale_swaps_separator_in_markdown_strings() {
        assert_eq!(localize("0.28", Locale::Es), "0,28");
        assert_eq!(localize("0.28", Locale::En), "0.28");
    }

    #[test]
    fn curve_grid_is_strictly_increasing() {
        let model = CitationModel::world();
        let points = distribution_curve(&model, 100, AssessmentLevel::default()).unwrap();
        for pair in points.windows(2) {
            assert!(pair[0].citations_relative < pair[1].citations_relative);
        }
        assert!(points.iter().any(|p| p.marker == Some(CurveMarker::Mean)));
        assert!(points.iter().any(|p| p.marker == Some(CurveMarker::TopCut)));
    }

    #[test]
    fn curve_density_integrates_to_one() {
        let model = CitationModel::world();
        let points = distribution_curve(&model, 100, AssessmentLevel::default()).unwrap();
        let mut integral = 0.0;
        for pair in points.windows(2) {
            integral += (pair[1].citations_relative - pair[0].citations_relative)
                * (pair[0].density + pair[1].density)
                / 2.0;
        }
        assert!((integral - 1.0).abs() < 0.01, "integral {integral}");
    }

    #[test]
    fn mass_beyond_the_mean_is_the_lognormal_skew() {
        // Mass right of the mean marker, by trapezoid over the grid.
        let model = CitationModel::world();
        let points = distribution_curve(&model, 200, AssessmentLevel::default()).unwrap();
        let mean_x = points
            .iter()
            .find(|p| p.marker == Some(CurveMarker::Mean))
            .unwrap()
            .citations_relative;
        let mut right = 0.0;
        for pair in points.windows(2) {
            if pair[0].citations_relative >= mean_x {
                right += (pair[1].citations_relative - pair[0].citations_relative)
                    * (pair[0].density + pair[1].density)
                    / 2.0;
            }
        }
        assert!((0.30..=0.35).contains(&right), "right mass {right}");
    }

    #[test]
    fn curve_rejects_tiny_grids() {
        let model = CitationModel::world();
        assert!(matches!(
            distribution_curve(&model, 9, AssessmentLevel::default()),
            Err(ReportError::TooFewPoints(9))
        ));
    }
}
