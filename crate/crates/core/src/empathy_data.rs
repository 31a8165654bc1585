//! Interpersonal Reactivity Index scoring and the cohort analysis built on it.
//!
//! Each of the 28 items is answered on a 0..=4 scale and belongs to one of
//! four subscales of seven items. Reversed items score `4 - answer`.
//! Cohort reports tabulate forwarding decisions, correlate subscale scores
//! and estimate cooperation rates. The published aggregate tables of the
//! original study ship as reference data and are reported as such.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const ITEMS: usize = 28;
pub const MAX_ANSWER: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subscale {
    PT,
    EC,
    FS,
    PD,
}

impl Subscale {
    pub const ALL: [Subscale; 4] = [Subscale::PT, Subscale::EC, Subscale::FS, Subscale::PD];
}

impl fmt::Display for Subscale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Subscale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PT" => Ok(Subscale::PT),
            "EC" => Ok(Subscale::EC),
            "FS" => Ok(Subscale::FS),
            "PD" => Ok(Subscale::PD),
            other => Err(Error::Parse(format!("unknown subscale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemKey {
    pub subscale: Subscale,
    pub reversed: bool,
}

/// Subscale and reversal flag of each item, indexed from item 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IriKey {
    items: Vec<ItemKey>,
}

impl IriKey {
    /// The standard Davis key. The source table prints item 24 as "(44)".
    pub fn davis() -> Self {
        use Subscale::*;
        let scale = [
            FS, EC, PT, EC, FS, PD, FS, PT, EC, PD, PT, FS, PD, EC, PT, FS, PD, EC, PD, EC, PT, EC, FS, PD, PT, FS, PD, PT,
        ];
        const REVERSED: [usize; 9] = [3, 4, 7, 12, 13, 14, 15, 18, 19];
        let items = scale
            .iter()
            .enumerate()
            .map(|(k, &subscale)| ItemKey {
                subscale,
                reversed: REVERSED.contains(&(k + 1)),
            })
            .collect();
        Self { items }
    }

    pub fn new(items: Vec<ItemKey>) -> Result<Self> {
        let key = Self { items };
        key.validate()?;
        Ok(key)
    }

    pub fn validate(&self) -> Result<()> {
        if self.items.len() != ITEMS {
            return Err(Error::Dimension(format!("key lists {} items, expected {ITEMS}", self.items.len())));
        }
        for s in Subscale::ALL {
            let count = self.items.iter().filter(|k| k.subscale == s).count();
            if count != 7 {
                return Err(invalid("key", format!("subscale {s} has {count} items, expected 7")));
            }
        }
        Ok(())
    }

    /// Key of item `item` (1-based).
    pub fn item(&self, item: usize) -> ItemKey {
        self.items[item - 1]
    }

    pub fn items_of(&self, s: Subscale) -> Vec<usize> {
        (1..=ITEMS).filter(|&k| self.item(k).subscale == s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    F,
    #[serde(rename = "nF")]
    NF,
    #[serde(rename = "other")]
    Other,
}

impl std::str::FromStr for Decision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "F" | "f" => Ok(Decision::F),
            "nF" | "nf" | "NF" => Ok(Decision::NF),
            "" | "other" | "Other" => Ok(Decision::Other),
            other => Err(Error::Parse(format!("unknown decision `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    Friend,
    Stranger,
}

impl std::str::FromStr for Context {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "friend" => Ok(Context::Friend),
            "stranger" => Ok(Context::Stranger),
            other => Err(Error::Parse(format!("unknown context `{other}`"))),
        }
    }
}

/// One questionnaire sitting: a participant's answers and their forwarding
/// decision in one relationship context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IriRecord {
    pub id: String,
    pub gender: String,
    pub answers: Vec<Option<u8>>,
    pub decision: Decision,
    pub context: Context,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubscaleScores {
    pub pt: u32,
    pub ec: u32,
    pub fs: u32,
    pub pd: u32,
    pub missing: u32,
}

impl SubscaleScores {
    pub fn get(&self, s: Subscale) -> u32 {
        match s {
            Subscale::PT => self.pt,
            Subscale::EC => self.ec,
            Subscale::FS => self.fs,
            Subscale::PD => self.pd,
        }
    }

    fn slot(&mut self, s: Subscale) -> &mut u32 {
        match s {
            Subscale::PT => &mut self.pt,
            Subscale::EC => &mut self.ec,
            Subscale::FS => &mut self.fs,
            Subscale::PD => &mut self.pd,
        }
    }
}

/// Sums each subscale over its answered items; missing items are counted
/// and skipped.
pub fn score_iri(record: &IriRecord, key: &IriKey) -> Result<SubscaleScores> {
    key.validate()?;
    if record.answers.len() != ITEMS {
        return Err(Error::Dimension(format!("record `{}` has {} answers", record.id, record.answers.len())));
    }
    let mut scores = SubscaleScores::default();
    for (k, answer) in record.answers.iter().enumerate() {
        let item = k + 1;
        let Some(a) = *answer else {
            scores.missing += 1;
            continue;
        };
        if a > MAX_ANSWER {
            return Err(Error::Item {
                item,
                reason: format!("answer {a} outside 0..=4"),
            });
        }
        let ik = key.item(item);
        *scores.slot(ik.subscale) += u32::from(if ik.reversed { MAX_ANSWER - a } else { a });
    }
    Ok(scores)
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("{} vs {} observations", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Parses the cohort CSV: `id,gender,q1..q28,decision,context`. Empty cells
/// and `NA` are missing answers.
pub fn read_records<R: std::io::Read>(reader: R) -> Result<Vec<IriRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    };
    let id = col("id")?;
    let gender = col("gender")?;
    let decision = col("decision")?;
    let context = col("context")?;
    let items: Vec<usize> = (1..=ITEMS).map(|k| col(&format!("q{k}"))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let answers = items
            .iter()
            .enumerate()
            .map(|(k, &c)| match row.get(c).unwrap_or("") {
                "" | "NA" | "na" => Ok(None),
                v => v
                    .parse::<u8>()
                    .ok()
                    .filter(|a| *a <= MAX_ANSWER)
                    .map(Some)
                    .ok_or_else(|| Error::Item {
                        item: k + 1,
                        reason: format!("row {}: answer `{v}` outside 0..=4", line + 1),
                    }),
            })
            .collect::<Result<_>>()?;
        out.push(IriRecord {
            id: row.get(id).unwrap_or("").to_string(),
            gender: row.get(gender).unwrap_or("").to_string(),
            answers,
            decision: row.get(decision).unwrap_or("").parse()?,
            context: row.get(context).unwrap_or("").parse()?,
        });
    }
    Ok(out)
}

pub fn read_records_path(path: &Path) -> Result<Vec<IriRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    read_records(file)
}

/// Counts of (friend-context decision, stranger-context decision).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    pub ff: u32,
    pub fnf: u32,
    pub nff: u32,
    pub nfnf: u32,
}

impl OutcomeMatrix {
    pub fn total(&self) -> u32 {
        self.ff + self.fnf + self.nff + self.nfnf
    }

    pub fn as_array(&self) -> [u32; 4] {
        [self.ff, self.fnf, self.nff, self.nfnf]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenderOutcome {
    pub gender: String,
    pub participants: u32,
    pub outcomes: OutcomeMatrix,
    /// Participants lacking a decision in one of the two contexts.
    pub unpaired: u32,
    /// Cooperators among participants whose decision depends on the context.
    pub refined: Option<OutcomeMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub first: Subscale,
    pub second: Subscale,
    /// `None` when undefined (zero variance) or not published.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooperationLevel {
    pub scales: Vec<Subscale>,
    pub participants: Option<u32>,
    pub cooperators: Option<u32>,
    pub level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalProbability {
    pub condition: String,
    pub p_condition: f64,
    pub p_f_given_condition: Option<f64>,
    pub p_f_given_not: Option<f64>,
    /// `P(F|1)P(1) + P(F|0)P(0)`.
    pub p_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReportSource {
    Computed,
    PublishedAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub source: ReportSource,
    pub genders: Vec<GenderOutcome>,
    pub correlations: Vec<Correlation>,
    pub cooperation: Vec<CooperationLevel>,
    pub total_probability: Option<TotalProbability>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn gender(&self, name: &str) -> Option<&GenderOutcome> {
        self.genders.iter().find(|g| g.gender.eq_ignore_ascii_case(name))
    }

    pub fn correlation(&self, a: Subscale, b: Subscale) -> Option<f64> {
        self.correlations
            .iter()
            .find(|c| (c.first, c.second) == (a, b) || (c.first, c.second) == (b, a))
            .and_then(|c| c.value)
    }

    pub fn outcomes_csv(&self) -> String {
        let mut out = String::from("gender,friend,stranger,count\n");
        for g in &self.genders {
            let m = g.outcomes;
            for (f, s, c) in [("F", "F", m.ff), ("F", "nF", m.fnf), ("nF", "F", m.nff), ("nF", "nF", m.nfnf)] {
                let _ = writeln!(out, "{},{f},{s},{c}", g.gender);
            }
        }
        out
    }

    pub fn correlations_csv(&self) -> String {
        let mut out = String::from("first,second,pearson\n");
        for c in &self.correlations {
            let v = c.value.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(out, "{},{},{v}", c.first, c.second);
        }
        out
    }

    pub fn cooperation_csv(&self) -> String {
        let mut out = String::from("scales,participants,cooperators,level\n");
        for c in &self.cooperation {
            let name: Vec<String> = c.scales.iter().map(ToString::to_string).collect();
            let opt = |v: Option<u32>| v.map_or(String::new(), |v| v.to_string());
            let level = c.level.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(out, "{},{},{},{level}", name.join("+"), opt(c.participants), opt(c.cooperators));
        }
        out
    }

    /// Plain-text rendering in the layout of the study's tables.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "source: {:?}", self.source);
        for g in &self.genders {
            let m = g.outcomes;
            let _ = writeln!(out, "\n{} population ({} participants)", g.gender, g.participants);
            let _ = writeln!(out, "              friend F  friend nF");
            let _ = writeln!(out, "stranger F    {:>8}  {:>9}", m.ff, m.nff);
            let _ = writeln!(out, "stranger nF   {:>8}  {:>9}", m.fnf, m.nfnf);
            if let Some(r) = g.refined {
                let _ = writeln!(out, "refined: FF {} FnF {} nFF {} nFnF {}", r.ff, r.fnf, r.nff, r.nfnf);
            }
        }
        let _ = writeln!(out, "\nPearson correlation");
        for c in &self.correlations {
            let v = c.value.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(out, "{}-{}: {v}", c.first, c.second);
        }
        let _ = writeln!(out, "\nCooperation level");
        for c in &self.cooperation {
            let name: Vec<String> = c.scales.iter().map(ToString::to_string).collect();
            let v = c.level.map_or("-".to_string(), |v| format!("{:.2}%", 100.0 * v));
            let _ = writeln!(out, "{}: {v}", name.join(" + "));
        }
        if let Some(tp) = &self.total_probability {
            let _ = writeln!(out, "\nP(F) = {:.4} conditioning on {}", tp.p_f, tp.condition);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// Participant-level conditioning event for the total probability split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighScore {
    pub subscale: Subscale,
    /// Scores at or above this count as high.
    pub cut: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Subscale score at or above which a scale counts as dominant.
    pub dominant_cut: u32,
    /// Groups smaller than this are flagged.
    pub min_group: u32,
    pub condition: HighScore,
    /// Scale combinations whose cooperation level is reported.
    pub groups: Vec<Vec<Subscale>>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        use Subscale::*;
        Self {
            dominant_cut: 18,
            min_group: 2,
            condition: HighScore { subscale: PT, cut: 18 },
            groups: vec![vec![PT, EC], vec![PT, FS], vec![PT, PD], vec![EC, FS], vec![EC, PD]],
        }
    }
}

struct Participant {
    gender: String,
    scores: SubscaleScores,
    friend: Option<Decision>,
    stranger: Option<Decision>,
}

impl Participant {
    /// The decision used for cooperation rates: friend context first.
    fn primary(&self) -> Option<Decision> {
        self.friend.or(self.stranger).filter(|d| *d != Decision::Other)
    }
}

const ITEM_NOTE: &str = "the item printed as (44) in the source table is scored as item 24";

fn participants(records: &[IriRecord], key: &IriKey) -> Result<Vec<Participant>> {
    let mut by_id: BTreeMap<&str, Participant> = BTreeMap::new();
    for r in records {
        let scores = score_iri(r, key)?;
        let p = by_id.entry(r.id.as_str()).or_insert_with(|| Participant {
            gender: r.gender.clone(),
            scores,
            friend: None,
            stranger: None,
        });
        let slot = match r.context {
            Context::Friend => &mut p.friend,
            Context::Stranger => &mut p.stranger,
        };
        *slot = Some(r.decision);
    }
    Ok(by_id.into_values().collect())
}

fn rate(hits: u32, total: u32) -> Option<f64> {
    (total > 0).then(|| f64::from(hits) / f64::from(total))
}

/// Outcome tables per gender, subscale correlations across participants,
/// cooperation levels per scale combination and the total probability split.
pub fn experiment_report(records: &[IriRecord], key: &IriKey, options: &ReportOptions) -> Result<ExperimentReport> {
    if records.is_empty() {
        return Err(invalid("records", "the cohort is empty"));
    }
    let people = participants(records, key)?;
    let mut warnings = Vec::new();

    let mut genders: BTreeMap<String, GenderOutcome> = BTreeMap::new();
    for p in &people {
        let g = genders.entry(p.gender.clone()).or_insert_with(|| GenderOutcome {
            gender: p.gender.clone(),
            participants: 0,
            outcomes: OutcomeMatrix::default(),
            unpaired: 0,
            refined: None,
        });
        g.participants += 1;
        let m = &mut g.outcomes;
        match (p.friend, p.stranger) {
            (Some(Decision::F), Some(Decision::F)) => m.ff += 1,
            (Some(Decision::F), Some(Decision::NF)) => m.fnf += 1,
            (Some(Decision::NF), Some(Decision::F)) => m.nff += 1,
            (Some(Decision::NF), Some(Decision::NF)) => m.nfnf += 1,
            _ => g.unpaired += 1,
        }
    }
    for g in genders.values() {
        if g.unpaired > 0 {
            warnings.push(format!("{}: {} participants without a decision in both contexts", g.gender, g.unpaired));
        }
    }

    let series: Vec<Vec<f64>> = Subscale::ALL
        .iter()
        .map(|&s| people.iter().map(|p| f64::from(p.scores.get(s))).collect())
        .collect();
    let mut correlations = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            let value = match pearson(&series[a], &series[b]) {
                Ok(v) => Some(v),
                Err(Error::UndefinedCorrelation(why)) => {
                    warnings.push(format!("{}-{} correlation undefined: {why}", Subscale::ALL[a], Subscale::ALL[b]));
                    None
                }
                Err(e) => return Err(e),
            };
            correlations.push(Correlation {
                first: Subscale::ALL[a],
                second: Subscale::ALL[b],
                value,
            });
        }
    }

    let dominant = |p: &Participant, s: Subscale| p.scores.get(s) >= options.dominant_cut;
    let mut cooperation = Vec::new();
    for group in &options.groups {
        let members: Vec<&Participant> = people
            .iter()
            .filter(|p| p.primary().is_some() && group.iter().all(|&s| dominant(p, s)))
            .collect();
        let n = members.len() as u32;
        let coop = members.iter().filter(|p| p.primary() == Some(Decision::F)).count() as u32;
        if n < options.min_group {
            let name: Vec<String> = group.iter().map(ToString::to_string).collect();
            warnings.push(format!("group {} has only {n} participants", name.join("+")));
        }
        cooperation.push(CooperationLevel {
            scales: group.clone(),
            participants: Some(n),
            cooperators: Some(coop),
            level: rate(coop, n),
        });
    }

    let decided: Vec<&Participant> = people.iter().filter(|p| p.primary().is_some()).collect();
    let total_probability = if decided.is_empty() {
        warnings.push("no participant has a usable decision".into());
        None
    } else {
        let cond = options.condition;
        let (mut n1, mut f1, mut f0) = (0u32, 0u32, 0u32);
        for p in &decided {
            let high = p.scores.get(cond.subscale) >= cond.cut;
            let f = p.primary() == Some(Decision::F);
            if high {
                n1 += 1;
                f1 += u32::from(f);
            } else {
                f0 += u32::from(f);
            }
        }
        let n = decided.len() as u32;
        let n0 = n - n1;
        let p1 = f64::from(n1) / f64::from(n);
        let (pf1, pf0) = (rate(f1, n1), rate(f0, n0));
        Some(TotalProbability {
            condition: format!("{} >= {}", cond.subscale, cond.cut),
            p_condition: p1,
            p_f_given_condition: pf1,
            p_f_given_not: pf0,
            p_f: pf1.unwrap_or(0.0) * p1 + pf0.unwrap_or(0.0) * (1.0 - p1),
        })
    };

    Ok(ExperimentReport {
        source: ReportSource::Computed,
        genders: genders.into_values().collect(),
        correlations,
        cooperation,
        total_probability,
        notes: vec![ITEM_NOTE.to_string()],
        warnings,
    })
}

/// The study's published tables, stored verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedAggregates {
    pub description: String,
    pub genders: Vec<PublishedGender>,
    pub correlations: Vec<PublishedCorrelation>,
    pub cooperation: Vec<PublishedLevel>,
    #[serde(default)]
    pub scale_distribution: Vec<PublishedScaleCount>,
    /// Per-item coefficients printed in the subscale table, estimator unknown.
    #[serde(default)]
    pub item_coefficients: Vec<PublishedItemCoefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedGender {
    pub gender: String,
    pub participants: u32,
    /// FF, FnF, nFF, nFnF.
    pub outcomes: [u32; 4],
    #[serde(default)]
    pub refined: Option<[u32; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedCorrelation {
    pub first: Subscale,
    pub second: Subscale,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedLevel {
    pub scales: Vec<Subscale>,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedScaleCount {
    pub scales: String,
    pub women: Option<u32>,
    pub men: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedItemCoefficient {
    pub item: usize,
    pub gender: String,
    pub subscale: Subscale,
    pub value: f64,
}

const BUNDLED_AGGREGATES: &str = include_str!("../data/published_aggregates.toml");

impl PublishedAggregates {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_AGGREGATES).expect("bundled aggregate file is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn matrix(a: [u32; 4]) -> OutcomeMatrix {
    OutcomeMatrix {
        ff: a[0],
        fnf: a[1],
        nff: a[2],
        nfnf: a[3],
    }
}

/// The published tables in report form, marked as stored aggregates.
pub fn published_report(agg: &PublishedAggregates) -> ExperimentReport {
    let genders = agg
        .genders
        .iter()
        .map(|g| GenderOutcome {
            gender: g.gender.clone(),
            participants: g.participants,
            outcomes: matrix(g.outcomes),
            unpaired: 0,
            refined: g.refined.map(matrix),
        })
        .collect();
    let correlations = agg
        .correlations
        .iter()
        .map(|c| Correlation {
            first: c.first,
            second: c.second,
            value: c.value,
        })
        .collect();
    let cooperation = agg
        .cooperation
        .iter()
        .map(|c| CooperationLevel {
            scales: c.scales.clone(),
            participants: None,
            cooperators: None,
            level: Some(c.level),
        })
        .collect();
    ExperimentReport {
        source: ReportSource::PublishedAggregate,
        genders,
        correlations,
        cooperation,
        total_probability: None,
        notes: vec![agg.description.clone(), ITEM_NOTE.to_string()],
        warnings: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(answers: Vec<Option<u8>>) -> IriRecord {
        IriRecord {
            id: "p".into(),
            gender: "women".into(),
            answers,
            decision: Decision::F,
            context: Context::Friend,
        }
    }

    #[test]
    fn davis_key_is_valid() {
        let key = IriKey::davis();
        key.validate().unwrap();
        assert_eq!(key.items_of(Subscale::PT), vec![3, 8, 11, 15, 21, 25, 28]);
        assert_eq!(key.items_of(Subscale::PD), vec![6, 10, 13, 17, 19, 24, 27]);
        assert!(key.item(3).reversed && key.item(15).reversed && !key.item(24).reversed);
    }

    #[test]
    fn constant_answers() {
        let key = IriKey::davis();
        let zeros = score_iri(&record(vec![Some(0); 28]), &key).unwrap();
        let fours = score_iri(&record(vec![Some(4); 28]), &key).unwrap();
        assert_eq!(zeros.pt, 8);
        assert_eq!(fours.pt, 20);
        // reversed: EC 4, 14, 18; FS 7, 12; PD 13, 19
        assert_eq!((zeros.ec, zeros.fs, zeros.pd), (12, 8, 8));
        assert_eq!((fours.ec, fours.fs, fours.pd), (16, 20, 20));
    }

    #[test]
    fn missing_and_invalid_answers() {
        let key = IriKey::davis();
        let mut a = vec![Some(2); 28];
        a[2] = None;
        a[23] = None;
        let s = score_iri(&record(a.clone()), &key).unwrap();
        assert_eq!(s.missing, 2);
        assert_eq!(s.pt, 12);
        assert_eq!(s.pd, 12);
        a[9] = Some(5);
        assert!(matches!(score_iri(&record(a), &key), Err(Error::Item { item: 10, .. })));
    }

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn bundled_aggregates_parse() {
        let r = published_report(&PublishedAggregates::bundled());
        assert_eq!(r.source, ReportSource::PublishedAggregate);
        assert_eq!(r.gender("women").unwrap().outcomes.as_array(), [19, 16, 4, 16]);
        assert_eq!(r.gender("men").unwrap().outcomes.as_array(), [11, 8, 3, 13]);
        assert_eq!(r.correlation(Subscale::EC, Subscale::PT), Some(0.81));
        assert_eq!(r.correlation(Subscale::FS, Subscale::PD), None);
    }

    #[test]
    fn csv_round_trip() {
        let mut text = String::from("id,gender");
        for k in 1..=28 {
            text.push_str(&format!(",q{k}"));
        }
        text.push_str(",decision,context\n");
        text.push_str("a,women");
        for k in 0..28 {
            text.push_str(if k == 5 { "," } else { ",3" });
        }
        text.push_str(",nF,stranger\n");
        let recs = read_records(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].answers[5], None);
        assert_eq!(recs[0].decision, Decision::NF);
        assert_eq!(recs[0].context, Context::Stranger);
        let bad = text.replace(",3,3,3,3,,", ",3,3,3,9,,");
        assert!(read_records(bad.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn reversal_involution(answers in prop::collection::vec(0u8..=4, 28)) {
            let key = IriKey::davis();
            let a = score_iri(&record(answers.iter().map(|&x| Some(x)).collect()), &key).unwrap();
            let b = score_iri(&record(answers.iter().map(|&x| Some(4 - x)).collect()), &key).unwrap();
            for s in Subscale::ALL {
                prop_assert_eq!(a.get(s) + b.get(s), 28);
                prop_assert!(a.get(s) <= 28);
            }
        }

        #[test]
        fn pearson_properties(
            xs in prop::collection::vec(-10.0..10.0f64, 3..20),
            scale in 0.1..5.0f64,
            shift in -3.0..3.0f64,
            seed in any::<u64>(),
        ) {
            let ys: Vec<f64> = xs.iter().enumerate().map(|(k, x)| x.sin() + ((seed >> (k % 60)) & 1) as f64).collect();
            let Ok(r) = pearson(&xs, &ys) else { return Ok(()); };
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((pearson(&ys, &xs).unwrap() - r).abs() < 1e-12);
            let moved: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            prop_assert!((pearson(&moved, &ys).unwrap() - r).abs() < 1e-9);
        }
    }
}
