//! Preference profiles, pairwise counts and matrix CSV files.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PairOrderMatrix;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ballot {
    pub multiplicity: u64,
    /// 0-based items, best first. May omit items.
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreferenceProfile {
    pub n: usize,
    pub labels: Vec<String>,
    pub ballots: Vec<Ballot>,
    /// Non-fatal remarks collected while parsing.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PreferenceProfile {
    /// Total number of voters.
    pub fn voters(&self) -> u64 {
        self.ballots.iter().map(|b| b.multiplicity).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.ballots.iter().all(|b| b.ranking.len() == self.n)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "FILE NAME",
    "TITLE",
    "DESCRIPTION",
    "DATA TYPE",
    "MODIFICATION TYPE",
    "RELATES TO",
    "RELATED FILES",
    "PUBLICATION DATE",
    "MODIFICATION DATE",
    "NUMBER ALTERNATIVES",
    "NUMBER VOTERS",
    "NUMBER UNIQUE ORDERS",
    "NUMBER CATEGORIES",
];

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses a strict-order profile.
///
/// The current PrefLib layout (`# KEY: value` headers, then `count: i1,i2,...`)
/// and the legacy layout (item count, `id,name` lines, a totals line, then
/// `count,i1,i2,...`) are both accepted. Ballots with ties are rejected.
pub fn parse_profile(text: &str) -> Result<PreferenceProfile> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    match first {
        None => Err(parse_err(1, "empty profile")),
        Some(l) if l.starts_with('#') => parse_current(text),
        Some(_) => parse_legacy(text),
    }
}

fn parse_current(text: &str) -> Result<PreferenceProfile> {
    let mut n: Option<usize> = None;
    let mut declared_voters: Option<u64> = None;
    let mut names: Vec<(usize, usize, String)> = Vec::new();
    let mut warnings = Vec::new();
    let mut ballot_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let header = header.trim();
            let Some((key, value)) = header.split_once(':') else {
                warnings.push(format!("line {line_no}: header without a value ignored"));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if key == "NUMBER ALTERNATIVES" {
                n = Some(value.parse().map_err(|_| parse_err(line_no, format!("bad item count `{value}`")))?);
            } else if key == "NUMBER VOTERS" {
                declared_voters =
                    Some(value.parse().map_err(|_| parse_err(line_no, format!("bad voter count `{value}`")))?);
            } else if let Some(id) = key.strip_prefix("ALTERNATIVE NAME") {
                let id: usize =
                    id.trim().parse().map_err(|_| parse_err(line_no, format!("bad alternative id in `{key}`")))?;
                names.push((line_no, id, value.to_string()));
            } else if key == "DATA TYPE" && !matches!(value, "soc" | "soi") {
                return Err(parse_err(
                    line_no,
                    format!("data type `{value}` not supported: only strict orders (soc, soi) are accepted"),
                ));
            } else if !KNOWN_KEYS.contains(&key) {
                warnings.push(format!("line {line_no}: unknown header `{key}` ignored"));
            }
            continue;
        }
        ballot_lines.push((line_no, line));
    }

    let n = n.ok_or_else(|| parse_err(1, "missing `# NUMBER ALTERNATIVES` header"))?;
    let mut labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    for (line_no, id, name) in names {
        if id == 0 || id > n {
            return Err(parse_err(line_no, format!("alternative id {id} out of range 1..={n}")));
        }
        labels[id - 1] = name;
    }
    let mut ballots = Vec::with_capacity(ballot_lines.len());
    for (line_no, line) in ballot_lines {
        let (count, ranking) = line.split_once(':').ok_or_else(|| parse_err(line_no, "expected `count: i1,i2,...`"))?;
        ballots.push(parse_ballot(line_no, count, ranking, n)?);
    }
    finish(n, labels, ballots, declared_voters, warnings)
}

fn parse_legacy(text: &str) -> Result<PreferenceProfile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (line_no, first) = lines.next().ok_or_else(|| parse_err(1, "empty profile"))?;
    let n: usize = first.parse().map_err(|_| parse_err(line_no, format!("expected item count, found `{first}`")))?;
    let mut labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    for _ in 0..n {
        let (line_no, line) = lines.next().ok_or_else(|| parse_err(line_no, "missing item names"))?;
        let (id, name) = line.split_once(',').ok_or_else(|| parse_err(line_no, "expected `id,name`"))?;
        let id: usize = id.trim().parse().map_err(|_| parse_err(line_no, format!("bad item id `{id}`")))?;
        if id == 0 || id > n {
            return Err(parse_err(line_no, format!("item id {id} out of range 1..={n}")));
        }
        labels[id - 1] = name.trim().to_string();
    }
    let (totals_no, totals) = lines.next().ok_or_else(|| parse_err(line_no, "missing voter totals line"))?;
    let declared: u64 = totals
        .split(',')
        .next()
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| parse_err(totals_no, "expected `voters,sum,unique`"))?;
    let mut ballots = Vec::new();
    for (line_no, line) in lines {
        let (count, ranking) = line.split_once(',').ok_or_else(|| parse_err(line_no, "expected `count,i1,i2,...`"))?;
        ballots.push(parse_ballot(line_no, count, ranking, n)?);
    }
    finish(n, labels, ballots, Some(declared), Vec::new())
}

fn parse_ballot(line_no: usize, count: &str, ranking: &str, n: usize) -> Result<Ballot> {
    let multiplicity: u64 =
        count.trim().parse().map_err(|_| parse_err(line_no, format!("bad multiplicity `{}`", count.trim())))?;
    if multiplicity == 0 {
        return Err(parse_err(line_no, "multiplicity must be positive"));
    }
    if ranking.contains('{') || ranking.contains('}') {
        return Err(parse_err(line_no, "ballot contains ties; only strict rankings are supported"));
    }
    let mut seen = vec![false; n];
    let mut items = Vec::new();
    for tok in ranking.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            return Err(parse_err(line_no, "empty item in ballot"));
        }
        let id: usize = tok.parse().map_err(|_| parse_err(line_no, format!("bad item `{tok}`")))?;
        if id == 0 || id > n {
            return Err(parse_err(line_no, format!("item {id} out of range 1..={n}")));
        }
        if seen[id - 1] {
            return Err(parse_err(line_no, format!("item {id} appears twice in the ballot")));
        }
        seen[id - 1] = true;
        items.push(id - 1);
    }
    Ok(Ballot { multiplicity, ranking: items })
}

fn finish(
    n: usize,
    labels: Vec<String>,
    ballots: Vec<Ballot>,
    declared_voters: Option<u64>,
    mut warnings: Vec<String>,
) -> Result<PreferenceProfile> {
    if n == 0 {
        return Err(parse_err(1, "profile has no items"));
    }
    let profile = PreferenceProfile { n, labels, ballots, warnings: Vec::new() };
    if let Some(d) = declared_voters {
        if d != profile.voters() {
            warnings.push(format!("header declares {d} voters but ballots sum to {}", profile.voters()));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(PreferenceProfile { warnings, ..profile })
}

/// a_rs: voters ranking r strictly before s, both present on the ballot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreferenceCounts {
    n: usize,
    counts: Vec<u64>,
}

impl PreferenceCounts {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, s: usize) -> u64 {
        self.counts[r * self.n + s]
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<PreferenceCounts> {
        let n = rows.len();
        let mut counts = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
            if row[r] != 0 {
                return Err(Error::InvalidMatrix(format!("count ({0},{0}) must be zero", r + 1)));
            }
            counts.extend_from_slice(row);
        }
        Ok(PreferenceCounts { n, counts })
    }
}

pub fn preference_counts(profile: &PreferenceProfile) -> PreferenceCounts {
    let n = profile.n;
    let mut counts = vec![0u64; n * n];
    for ballot in &profile.ballots {
        for (i, &r) in ballot.ranking.iter().enumerate() {
            for &s in &ballot.ranking[i + 1..] {
                counts[r * n + s] += ballot.multiplicity;
            }
        }
    }
    PreferenceCounts { n, counts }
}

/// c_rs = a_rs / (a_rs + a_sr), or 1/2 when neither order was observed.
pub fn pair_order_matrix(counts: &PreferenceCounts) -> PairOrderMatrix {
    let n = counts.n;
    PairOrderMatrix::from_upper(n, |r, s| {
        let (a, b) = (counts.get(r, s), counts.get(s, r));
        if a + b == 0 {
            Rational::half()
        } else {
            Rational::from_big(a.into(), (a + b).into())
        }
    })
    .expect("counts always give a valid matrix")
}

/// Profile straight to matrix, carrying the item labels along.
pub fn profile_matrix(profile: &PreferenceProfile) -> PairOrderMatrix {
    pair_order_matrix(&preference_counts(profile)).with_labels(profile.labels.clone()).expect("one label per item")
}

/// Reads a square CSV of exact decimals or `p/q` fractions. A first row that
/// does not parse as numbers is taken as item labels.
pub fn load_matrix_csv(text: &str) -> Result<PairOrderMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut labels = None;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<Rational>, _> = record.iter().map(str::parse::<Rational>).collect();
        match parsed {
            Ok(row) => rows.push((line, row)),
            Err(e) => {
                if rows.is_empty() && labels.is_none() {
                    labels = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
                } else {
                    return Err(parse_err(line, e.to_string()));
                }
            }
        }
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(1, "no matrix rows"));
    }
    for (line, row) in &rows {
        if row.len() != n {
            return Err(parse_err(*line, format!("row has {} entries but the matrix has {n} rows", row.len())));
        }
    }
    let m = PairOrderMatrix::new(rows.into_iter().map(|(_, r)| r).collect())?;
    match labels {
        Some(l) => m.with_labels(l),
        None => Ok(m),
    }
}

/// Writes the matrix with exact decimals where they terminate and `p/q` otherwise.
pub fn save_matrix_csv(c: &PairOrderMatrix) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    if let Some(labels) = c.labels() {
        writer.write_record(labels)?;
    }
    for row in c.rows() {
        writer.write_record(row.iter().map(|v| v.to_exact_decimal().unwrap_or_else(|| v.to_string())))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidMatrix(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
