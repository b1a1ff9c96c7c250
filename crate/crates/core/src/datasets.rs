//! Ingestion and validation of the three canonical CSV inputs.
//!
//! Formats (UTF-8, comma-delimited, `"`-quoted, LF or CRLF):
//!
//! * `institutions.csv` —
//!   `institution,country,period,counting,publications,pp_top50,pp_top10,pp_top1,tags`;
//!   `counting` is `fractional` or `full`, the `pp_*` fields are decimal
//!   fractions or empty, and `tags` is `|`-separated.
//! * `researchers.csv` —
//!   `researcher_id,name,institution,country,field,rank_score`.
//! * `populations.csv` — `country,population_millions`.
//!
//! Rows that violate an invariant become line-numbered warnings, never
//! fatal errors; the record list is always the maximal valid subset.
//! Decimal separators are always `.` regardless of display locale.

use std::collections::BTreeSet;
use std::io;

use serde::Serialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed header: expected `{expected}`, found `{found}`")]
    MalformedHeader { expected: String, found: String },
    #[error("unreadable stream: {0}")]
    Unreadable(#[from] csv::Error),
    #[error("write failed: {0}")]
    Write(io::Error),
}

/// A line-numbered, non-fatal data complaint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: u64,
    pub message: String,
}

impl std::fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Records plus the warnings produced while reading them.
#[derive(Debug, Clone)]
pub struct ParseOutcome<T> {
    pub records: Vec<T>,
    pub warnings: Vec<ParseWarning>,
}

/// How multi-institution papers were counted upstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Counting {
    Fractional,
    Full,
}

impl Counting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Counting::Fractional => "fractional",
            Counting::Full => "full",
        }
    }
}

impl std::str::FromStr for Counting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fractional" => Ok(Counting::Fractional),
            "full" => Ok(Counting::Full),
            other => Err(format!("unknown counting `{other}`")),
        }
    }
}

/// One institution-period row of a percentile-indicator export.
#[derive(Debug, Clone, PartialEq)]
pub struct InstitutionRecord {
    pub institution: String,
    pub country: String,
    pub period: String,
    pub counting: Counting,
    pub publications: u64,
    pub pp_top50: Option<f64>,
    pub pp_top10: Option<f64>,
    pub pp_top1: Option<f64>,
    pub tags: BTreeSet<String>,
}

/// One highly-cited researcher with affiliation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResearcherRecord {
    pub researcher_id: String,
    pub name: String,
    pub institution: String,
    pub country: String,
    pub field: String,
    pub rank_score: Option<f64>,
}

/// One country population row.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRecord {
    pub country: String,
    pub population_millions: f64,
}

/// Canonical form used whenever names are matched across datasets:
/// Unicode NFC, then lowercase, then trimmed. No fuzzy matching.
pub fn normalized_name(name: &str) -> String {
    name.nfc().collect::<String>().trim().to_lowercase()
}

const INSTITUTION_HEADER: [&str; 9] = [
    "institution",
    "country",
    "period",
    "counting",
    "publications",
    "pp_top50",
    "pp_top10",
    "pp_top1",
    "tags",
];
const RESEARCHER_HEADER: [&str; 6] = [
    "researcher_id",
    "name",
    "institution",
    "country",
    "field",
    "rank_score",
];
const POPULATION_HEADER: [&str; 2] = ["country", "population_millions"];
const ALIAS_HEADER: [&str; 2] = ["from", "to"];

pub fn parse_institutions<R: io::Read>(
    reader: R,
) -> Result<ParseOutcome<InstitutionRecord>, DataError> {
    let mut rows = RowReader::new(reader, &INSTITUTION_HEADER)?;
    let mut records = Vec::new();
    while let Some((line, fields)) = rows.next_row()? {
        let institution = fields[0].trim().to_string();
        if institution.is_empty() {
            rows.warn(line, "empty institution name; row skipped".into());
            continue;
        }
        let counting: Counting = match fields[3].trim().parse() {
            Ok(c) => c,
            Err(e) => {
                rows.warn(line, format!("{e}; row skipped"));
                continue;
            }
        };
        let publications: u64 = match fields[4].trim().parse() {
            Ok(n) => n,
            Err(_) => {
                rows.warn(line, format!("invalid publications `{}`; row skipped", fields[4]));
                continue;
            }
        };
        let mut pp = [None, None, None];
        let mut ok = true;
        for (slot, idx) in pp.iter_mut().zip([5usize, 6, 7]) {
            match parse_fraction(&fields[idx]) {
                Ok(v) => *slot = v,
                Err(msg) => {
                    rows.warn(line, format!("{} in `{}`; row skipped", msg, INSTITUTION_HEADER[idx]));
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let [pp_top50, pp_top10, pp_top1] = pp;
        // Shares of nested top sets must be nested themselves.
        let ordered = pp_top1.zip(pp_top10).map_or(true, |(a, b)| a <= b)
            && pp_top10.zip(pp_top50).map_or(true, |(a, b)| a <= b)
            && pp_top1.zip(pp_top50).map_or(true, |(a, b)| a <= b);
        if !ordered {
            rows.warn(
                line,
                "pp values not non-decreasing from pp_top1 to pp_top50; row skipped".into(),
            );
            continue;
        }
        if publications == 0 && (pp_top50.is_some() || pp_top10.is_some() || pp_top1.is_some()) {
            rows.warn(line, "pp values present but publications is 0; row skipped".into());
            continue;
        }
        let tags: BTreeSet<String> = fields[8]
            .split('|')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect();
        records.push(InstitutionRecord {
            institution,
            country: fields[1].trim().to_string(),
            period: fields[2].trim().to_string(),
            counting,
            publications,
            pp_top50,
            pp_top10,
            pp_top1,
            tags,
        });
    }
    Ok(ParseOutcome {
        records,
        warnings: rows.warnings,
    })
}

pub fn parse_researchers<R: io::Read>(
    reader: R,
) -> Result<ParseOutcome<ResearcherRecord>, DataError> {
    let mut rows = RowReader::new(reader, &RESEARCHER_HEADER)?;
    let mut records: Vec<ResearcherRecord> = Vec::new();
    let mut seen = BTreeSet::new();
    while let Some((line, fields)) = rows.next_row()? {
        let researcher_id = fields[0].trim().to_string();
        if researcher_id.is_empty() {
            rows.warnings.push(ParseWarning {
                line,
                message: "empty researcher_id; row skipped".into(),
            });
            continue;
        }
        if !seen.insert(researcher_id.clone()) {
            rows.warnings.push(ParseWarning {
                line,
                message: format!("duplicate researcher_id `{researcher_id}`; first occurrence kept"),
            });
            continue;
        }
        let rank_score = match parse_optional_number(&fields[5]) {
            Ok(v) => v,
            Err(msg) => {
                rows.warnings.push(ParseWarning {
                    line,
                    message: format!("{msg} in `rank_score`; row skipped"),
                });
                continue;
            }
        };
        records.push(ResearcherRecord {
            researcher_id,
            name: fields[1].trim().to_string(),
            institution: fields[2].trim().to_string(),
            country: fields[3].trim().to_string(),
            field: fields[4].trim().to_string(),
            rank_score,
        });
    }
    Ok(ParseOutcome {
        records,
        warnings: rows.warnings,
    })
}

pub fn parse_populations<R: io::Read>(
    reader: R,
) -> Result<ParseOutcome<PopulationRecord>, DataError> {
    let mut rows = RowReader::new(reader, &POPULATION_HEADER)?;
    let mut records: Vec<PopulationRecord> = Vec::new();
    let mut seen = BTreeSet::new();
    while let Some((line, fields)) = rows.next_row()? {
        let country = fields[0].trim().to_string();
        if country.is_empty() {
            rows.warnings.push(ParseWarning {
                line,
                message: "empty country name; row skipped".into(),
            });
            continue;
        }
        let population_millions: f64 = match fields[1].trim().parse() {
            Ok(v) if v > 0.0 && f64::is_finite(v) => v,
            _ => {
                rows.warnings.push(ParseWarning {
                    line,
                    message: format!(
                        "population_millions `{}` is not a positive number; row skipped",
                        fields[1]
                    ),
                });
                continue;
            }
        };
        if !seen.insert(normalized_name(&country)) {
            rows.warnings.push(ParseWarning {
                line,
                message: format!("duplicate country `{country}`; first occurrence kept"),
            });
            continue;
        }
        records.push(PopulationRecord {
            country,
            population_millions,
        });
    }
    Ok(ParseOutcome {
        records,
        warnings: rows.warnings,
    })
}

/// Rename mapping applied to institution names at ingestion
/// (`aliases.csv` with header `from,to`).
#[derive(Debug, Clone, Default)]
pub struct AliasMap {
    by_normalized_from: std::collections::BTreeMap<String, String>,
}

impl AliasMap {
    pub fn resolve<'a>(&'a self, name: &'a str) -> &'a str {
        self.by_normalized_from
            .get(&normalized_name(name))
            .map(String::as_str)
            .unwrap_or(name)
    }

    pub fn is_empty(&self) -> bool {
        self.by_normalized_from.is_empty()
    }
}

pub fn parse_aliases<R: io::Read>(reader: R) -> Result<ParseOutcome<AliasMap>, DataError> {
    let mut rows = RowReader::new(reader, &ALIAS_HEADER)?;
    let mut map = AliasMap::default();
    while let Some((line, fields)) = rows.next_row()? {
        let from = fields[0].trim();
        let to = fields[1].trim();
        if from.is_empty() || to.is_empty() {
            rows.warnings.push(ParseWarning {
                line,
                message: "alias rows need both `from` and `to`; row skipped".into(),
            });
            continue;
        }
        if map
            .by_normalized_from
            .insert(normalized_name(from), to.to_string())
            .is_some()
        {
            rows.warnings.push(ParseWarning {
                line,
                message: format!("duplicate alias for `{from}`; last mapping wins"),
            });
        }
    }
    Ok(ParseOutcome {
        records: vec![map],
        warnings: rows.warnings,
    })
}

pub fn write_institutions<W: io::Write>(
    records: &[InstitutionRecord],
    writer: W,
) -> Result<(), DataError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(INSTITUTION_HEADER)?;
    for r in records {
        out.write_record([
            r.institution.as_str(),
            r.country.as_str(),
            r.period.as_str(),
            r.counting.as_str(),
            &r.publications.to_string(),
            &fraction_to_string(r.pp_top50),
            &fraction_to_string(r.pp_top10),
            &fraction_to_string(r.pp_top1),
            &r.tags.iter().cloned().collect::<Vec<_>>().join("|"),
        ])?;
    }
    out.flush().map_err(DataError::Write)?;
    Ok(())
}

pub fn write_researchers<W: io::Write>(
    records: &[ResearcherRecord],
    writer: W,
) -> Result<(), DataError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(RESEARCHER_HEADER)?;
    for r in records {
        out.write_record([
            r.researcher_id.as_str(),
            r.name.as_str(),
            r.institution.as_str(),
            r.country.as_str(),
            r.field.as_str(),
            &r.rank_score.map(|v| format!("{v}")).unwrap_or_default(),
        ])?;
    }
    out.flush().map_err(DataError::Write)?;
    Ok(())
}

pub fn write_populations<W: io::Write>(
    records: &[PopulationRecord],
    writer: W,
) -> Result<(), DataError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(POPULATION_HEADER)?;
    for r in records {
        out.write_record([r.country.as_str(), &format!("{}", r.population_millions)])?;
    }
    out.flush().map_err(DataError::Write)?;
    Ok(())
}

fn parse_fraction(field: &str) -> Result<Option<f64>, String> {
    let t = field.trim();
    if t.is_empty() {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(Some(v)),
        Ok(v) => Err(format!("fraction {v} outside [0, 1]")),
        Err(_) => Err(format!("invalid fraction `{t}`")),
    }
}

fn parse_optional_number(field: &str) -> Result<Option<f64>, String> {
    let t = field.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("invalid number `{t}`"))
}

fn fraction_to_string(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// Shared header-checked, warning-collecting CSV row iterator.
struct RowReader<R: io::Read> {
    inner: csv::Reader<R>,
    expected_fields: usize,
    record: csv::ByteRecord,
    warnings: Vec<ParseWarning>,
}

impl<R: io::Read> RowReader<R> {
    fn warn(&mut self, line: u64, message: String) {
        self.warnings.push(ParseWarning { line, message });
    }

    fn new(reader: R, expected_header: &[&str]) -> Result<Self, DataError> {
        let mut inner = csv::ReaderBuilder::new()
            .flexible(true)
            .from_reader(reader);
        let headers = inner.byte_headers()?.clone();
        let found: Vec<String> = headers
            .iter()
            .map(|h| {
                String::from_utf8_lossy(h)
                    .trim_start_matches('\u{feff}')
                    .trim()
                    .to_lowercase()
            })
            .collect();
        if found != expected_header {
            return Err(DataError::MalformedHeader {
                expected: expected_header.join(","),
                found: found.join(","),
            });
        }
        Ok(Self {
            inner,
            expected_fields: expected_header.len(),
            record: csv::ByteRecord::new(),
            warnings: Vec::new(),
        })
    }

    /// Next structurally valid row as (line number, fields); structural
    /// problems become warnings and the row is skipped.
    fn next_row(&mut self) -> Result<Option<(u64, Vec<String>)>, DataError> {
        loop {
            let line = self
                .inner
                .position()
                .line();
            if !self.inner.read_byte_record(&mut self.record)? {
                return Ok(None);
            }
            if self.record.len() != self.expected_fields {
                self.warnings.push(ParseWarning {
                    line,
                    message: format!(
                        "expected {} fields, found {}; row skipped",
                        self.expected_fields,
                        self.record.len()
                    ),
                });
                continue;
            }
            let mut fields = Vec::with_capacity(self.record.len());
            let mut valid = true;
            for raw in self.record.iter() {
                match std::str::from_utf8(raw) {
                    Ok(s) => fields.push(s.to_string()),
                    Err(_) => {
                        self.warnings.push(ParseWarning {
                            line,
                            message: "field is not valid UTF-8; row skipped".into(),
                        });
                        valid = false;
                        break;
                    }
                }
            }
            if valid {
                return Ok(Some((line, fields)));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INST_HEADER: &str =
        "institution,country,period,counting,publications,pp_top50,pp_top10,pp_top1,tags\n";

    #[test]
    fn well_formed_institution_row() {
        let csv = format!(
            "{INST_HEADER}Universidad de Barcelona,ES,2015-2018,fractional,6015,0.55,0.12,0.015,\n"
        );
        let out = parse_institutions(csv.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.warnings.is_empty());
        let r = &out.records[0];
        assert_eq!(r.institution, "Universidad de Barcelona");
        assert_eq!(r.publications, 6015);
        assert_eq!(r.counting, Counting::Fractional);
        assert_eq!(r.pp_top50, Some(0.55));
        assert_eq!(r.pp_top1, Some(0.015));
        assert!(r.tags.is_empty());
    }

    #[test]
    fn unordered_pp_values_become_a_warning() {
        let csv = format!("{INST_HEADER}X,ES,2015-2018,fractional,100,0.10,0.55,,\n");
        let out = parse_institutions(csv.as_bytes()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].line, 2);
    }

    #[test]
    fn missing_pp_top1_is_representable() {
        let csv = format!("{INST_HEADER}X,ES,2015-2018,full,100,0.5,0.1,,small|technical\n");
        let out = parse_institutions(csv.as_bytes()).unwrap();
        let r = &out.records[0];
        assert_eq!(r.pp_top1, None);
        assert_eq!(r.counting, Counting::Full);
        assert!(r.tags.contains("technical") && r.tags.contains("small"));
    }

    #[test]
    fn zero_publications_with_pp_values_is_invalid() {
        let csv = format!("{INST_HEADER}X,ES,2015-2018,fractional,0,0.5,0.1,0.01,\n");
        let out = parse_institutions(csv.as_bytes()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn malformed_header_is_fatal() {
        let csv = "institución,country\nX,ES\n";
        assert!(matches!(
            parse_institutions(csv.as_bytes()),
            Err(DataError::MalformedHeader { .. })
        ));
    }

    #[test]
    fn field_count_mismatch_is_a_warning_not_an_abort() {
        let csv = format!(
            "{INST_HEADER}short,row\nY,ES,2015-2018,fractional,50,,0.1,0.01,\n"
        );
        let out = parse_institutions(csv.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].institution, "Y");
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].line, 2);
    }

    #[test]
    fn researcher_duplicates_keep_first() {
        let csv = "researcher_id,name,institution,country,field,rank_score\n\
                   r1,Ana,UB,España,Physics,12.5\n\
                   r2,Luis,UAM,España,Chemistry,\n\
                   r1,Ana Again,UB,España,Physics,99\n";
        let out = parse_researchers(csv.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.records[0].name, "Ana");
        assert_eq!(out.records[0].rank_score, Some(12.5));
        assert_eq!(out.records[1].rank_score, None);
    }

    #[test]
    fn population_rows_validate() {
        let csv = "country,population_millions\nEspaña,47\nNowhere,abc\nEspaña,48\n";
        let out = parse_populations(csv.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].country, "España");
        assert_eq!(out.records[0].population_millions, 47.0);
        assert_eq!(out.warnings.len(), 2);
    }

    #[test]
    fn institutions_round_trip() {
        let csv = format!(
            "{INST_HEADER}\
             \"Comma, SA\",ES,2015-2018,fractional,100,0.5,0.1,0.01,technical|small\n\
             Plain,FR,2006-2009,full,7,,,,\n"
        );
        let first = parse_institutions(csv.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_institutions(&first.records, &mut buf).unwrap();
        let second = parse_institutions(buf.as_slice()).unwrap();
        assert_eq!(first.records, second.records);
        assert!(second.warnings.is_empty());
    }

    #[test]
    fn crlf_and_quotes_are_accepted() {
        let csv = format!(
            "{}\r\n\"Universidad, de Prueba\",ES,2015-2018,fractional,10,0.5,0.1,,\r\n",
            INST_HEADER.trim_end()
        );
        let out = parse_institutions(csv.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].institution, "Universidad, de Prueba");
    }

    #[test]
    fn normalized_name_is_case_and_form_insensitive() {
        // "ñ" precomposed vs "n" + combining tilde.
        let precomposed = "Espa\u{f1}a";
        let decomposed = "Espa\u{6e}\u{303}a";
        assert_eq!(normalized_name(precomposed), normalized_name(decomposed));
        assert_eq!(normalized_name(" BARCELONA "), "barcelona");
    }

    #[test]
    fn aliases_resolve_case_insensitively() {
        let csv = "from,to\nUPC,Politécnica de Cataluña\n";
        let out = parse_aliases(csv.as_bytes()).unwrap();
        let map = &out.records[0];
        assert_eq!(map.resolve("upc"), "Politécnica de Cataluña");
        assert_eq!(map.resolve("unknown"), "unknown");
    }
}
