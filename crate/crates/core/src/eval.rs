//! Listening-test statistics: AB preference percentages, mean opinion
//! scores and word recognition rates with Wilson score intervals.
//!
//! Responses are read from a CSV with header
//! `listener_id,system,utterance_id,payload`. A system written `A|B` marks
//! a paired comparison whose payload is `A`, `B` or `C` (no preference). An
//! integer payload is a 1-5 opinion score. Anything else is a transcript,
//! scored against the reference text of its utterance.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use statrs::distribution::{ContinuousCDF, Normal};

use crate::csvout::{csv_err, write_matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AbCounts {
    pub a: u64,
    pub b: u64,
    pub no_pref: u64,
}

impl AbCounts {
    pub fn total(&self) -> u64 {
        self.a + self.b + self.no_pref
    }
}

/// Integer percentages `(A, B, no preference)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbPercentages {
    pub a: u64,
    pub b: u64,
    pub no_pref: u64,
}

fn percent_half_up(count: u64, total: u64) -> u64 {
    (200 * count + total) / (2 * total)
}

/// Each count as a percentage of the total, rounded half up. The three
/// values may sum to 99-101.
pub fn ab_summary(counts: AbCounts) -> Result<AbPercentages> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::arg("AB summary of zero responses"));
    }
    Ok(AbPercentages {
        a: percent_half_up(counts.a, total),
        b: percent_half_up(counts.b, total),
        no_pref: percent_half_up(counts.no_pref, total),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosSummary {
    pub mean: f64,
    pub n: usize,
    /// `mean ± 1.96 s / √n`; needs at least two ratings.
    pub ci: Option<(f64, f64)>,
}

impl MosSummary {
    /// The mean to two decimals, e.g. `4.08`.
    pub fn display(&self) -> String {
        format!("{:.2}", self.mean)
    }
}

pub fn mos_mean(ratings: &[u8]) -> Result<MosSummary> {
    if ratings.is_empty() {
        return Err(Error::arg("MOS of zero ratings"));
    }
    if let Some(r) = ratings.iter().find(|r| !(1..=5).contains(*r)) {
        return Err(Error::arg(format!("rating {r} outside 1..=5")));
    }
    let n = ratings.len();
    let mean = ratings.iter().map(|&r| r as f64).sum::<f64>() / n as f64;
    let ci = (n >= 2).then(|| {
        let var = ratings.iter().map(|&r| (r as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let half = 1.96 * var.sqrt() / (n as f64).sqrt();
        (mean - half, mean + half)
    });
    Ok(MosSummary { mean, n, ci })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrrResult {
    pub correct: u64,
    pub total: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Recognition rate with a Wilson score interval at `confidence`.
pub fn wrr(correct: u64, total: u64, confidence: f64) -> Result<WrrResult> {
    if total == 0 || correct > total {
        return Err(Error::arg(format!("need 0 <= correct <= total and total >= 1, got {correct}/{total}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::arg(format!("confidence {confidence} outside (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = total as f64;
    let p = correct as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the interval always contains p; clamping only absorbs rounding
    Ok(WrrResult {
        correct,
        total,
        rate: p,
        ci_low: (centre - half).clamp(0.0, p),
        ci_high: (centre + half).clamp(p, 1.0),
    })
}

fn normalise_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect()
}

/// `(correct, total)`: reference words found in the response, each
/// response word used at most once. Case and punctuation are ignored.
pub fn word_score(reference: &str, response: &str) -> (u64, u64) {
    let mut pool: HashMap<String, usize> = HashMap::new();
    for w in normalise_words(response) {
        *pool.entry(w).or_default() += 1;
    }
    let words = normalise_words(reference);
    let mut correct = 0;
    for w in &words {
        if let Some(c) = pool.get_mut(w).filter(|c| **c > 0) {
            *c -= 1;
            correct += 1;
        }
    }
    (correct, words.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbChoice {
    A,
    B,
    NoPreference,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Choice(AbChoice),
    Rating(u8),
    Transcript(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub listener_id: String,
    pub system: String,
    pub utterance_id: String,
    pub payload: Payload,
}

const RESPONSE_HEADER: [&str; 4] = ["listener_id", "system", "utterance_id", "payload"];

fn parse_payload(system: &str, payload: &str) -> std::result::Result<Payload, String> {
    let p = payload.trim();
    if system.contains('|') {
        return match p.to_ascii_uppercase().as_str() {
            "A" => Ok(Payload::Choice(AbChoice::A)),
            "B" => Ok(Payload::Choice(AbChoice::B)),
            "C" => Ok(Payload::Choice(AbChoice::NoPreference)),
            _ => Err(format!("AB payload must be A, B or C, got `{p}`")),
        };
    }
    if let Ok(r) = p.parse::<i64>() {
        return match u8::try_from(r) {
            Ok(r @ 1..=5) => Ok(Payload::Rating(r)),
            _ => Err(format!("rating {r} outside 1..=5")),
        };
    }
    Ok(Payload::Transcript(p.to_string()))
}

/// Reads a responses CSV. Errors carry the line number.
pub fn read_responses<R: Read>(r: R) -> Result<Vec<Response>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != RESPONSE_HEADER {
        return Err(Error::Format(format!(
            "responses header must be `{}`, got `{}`",
            RESPONSE_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let system = field(1);
        if system.is_empty() {
            return Err(Error::Format(format!("line {line}: empty system name")));
        }
        let payload = parse_payload(&system, &field(3)).map_err(|m| Error::Format(format!("line {line}: {m}")))?;
        out.push(Response { listener_id: field(0), system, utterance_id: field(2), payload });
    }
    Ok(out)
}

/// Reads `utterance_id,text` reference transcripts.
pub fn read_references<R: Read>(r: R) -> Result<HashMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let (Some(id), Some(text)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::Format(format!("line {line}: expected utterance_id,text")));
        };
        if out.insert(id.to_string(), text.to_string()).is_some() {
            return Err(Error::Format(format!("line {line}: duplicate utterance `{id}`")));
        }
    }
    Ok(out)
}

/// Aggregated results, one entry per system (or system pair), sorted by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub ab: BTreeMap<(String, String), AbCounts>,
    pub mos: BTreeMap<String, Vec<u8>>,
    /// `(correct, total)` word counts.
    pub words: BTreeMap<String, (u64, u64)>,
}

impl EvalReport {
    pub fn from_responses(responses: &[Response], references: &HashMap<String, String>) -> Result<Self> {
        let mut report = EvalReport::default();
        for r in responses {
            match &r.payload {
                Payload::Choice(c) => {
                    let (a, b) = r.system.split_once('|').expect("AB rows contain `|`");
                    let counts = report.ab.entry((a.trim().to_string(), b.trim().to_string())).or_default();
                    match c {
                        AbChoice::A => counts.a += 1,
                        AbChoice::B => counts.b += 1,
                        AbChoice::NoPreference => counts.no_pref += 1,
                    }
                }
                Payload::Rating(v) => report.mos.entry(r.system.clone()).or_default().push(*v),
                Payload::Transcript(t) => {
                    let reference = references
                        .get(&r.utterance_id)
                        .ok_or_else(|| Error::arg(format!("no reference text for utterance `{}`", r.utterance_id)))?;
                    let (c, n) = word_score(reference, t);
                    let e = report.words.entry(r.system.clone()).or_default();
                    e.0 += c;
                    e.1 += n;
                }
            }
        }
        Ok(report)
    }

    /// `system_a,system_b,n,a,b,no_preference` with integer percentages.
    pub fn write_ab_csv<W: Write>(&self, w: W) -> Result<()> {
        let header = ["system_a", "system_b", "n", "a", "b", "no_preference"].map(String::from);
        let mut rows = Vec::new();
        for ((a, b), counts) in &self.ab {
            let p = ab_summary(*counts)?;
            rows.push(vec![
                a.clone(),
                b.clone(),
                counts.total().to_string(),
                p.a.to_string(),
                p.b.to_string(),
                p.no_pref.to_string(),
            ]);
        }
        write_matrix(w, &header, rows)
    }

    /// `system,n,mos,ci_low,ci_high,ci_method`.
    pub fn write_mos_csv<W: Write>(&self, w: W) -> Result<()> {
        let header = ["system", "n", "mos", "ci_low", "ci_high", "ci_method"].map(String::from);
        let mut rows = Vec::new();
        for (system, ratings) in &self.mos {
            let m = mos_mean(ratings)?;
            let (lo, hi) = m.ci.map_or((String::new(), String::new()), |(l, h)| (format!("{l:.2}"), format!("{h:.2}")));
            rows.push(vec![system.clone(), m.n.to_string(), m.display(), lo, hi, "normal".into()]);
        }
        write_matrix(w, &header, rows)
    }

    /// `system,correct,total,wrr,ci_low,ci_high,ci_method,scoring`.
    pub fn write_wrr_csv<W: Write>(&self, w: W) -> Result<()> {
        let header =
            ["system", "correct", "total", "wrr", "ci_low", "ci_high", "ci_method", "scoring"].map(String::from);
        let mut rows = Vec::new();
        for (system, &(c, n)) in &self.words {
            let r = wrr(c, n, 0.95)?;
            rows.push(vec![
                system.clone(),
                c.to_string(),
                n.to_string(),
                format!("{:.4}", r.rate),
                format!("{:.4}", r.ci_low),
                format!("{:.4}", r.ci_high),
                "wilson".into(),
                "keyword-multiset".into(),
            ]);
        }
        write_matrix(w, &header, rows)
    }
}
