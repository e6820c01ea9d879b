//! Report documents and their renderers.
//!
//! Every rational is a string in lowest terms (`"2/3"`, `"-1"`), tables are
//! indexed `[time][outcome]` with outcomes in model order, and hitting times
//! are either an integer string or `"+inf"`. The JSON form is the serde
//! encoding of these types and parses back to an equal value.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub type Table = Vec<Vec<String>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub name: String,
    pub prob: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub horizon: usize,
    pub outcomes: Vec<Outcome>,
    pub public_filtration: Vec<Vec<Vec<String>>>,
    pub insider_filtration: Vec<Vec<Vec<String>>>,
    pub process: String,
    pub random_time: String,
    pub tau: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AzemaTables {
    pub z: Table,
    pub z_tilde: Table,
    pub m: Table,
    pub a: Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingTimes {
    pub r1: Vec<String>,
    pub r2: Vec<String>,
    pub r3: Vec<String>,
    pub sigma1: Vec<String>,
    pub sigma2: Vec<String>,
    pub sigma3: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomRef {
    pub time: usize,
    pub atom: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HonestyReport {
    pub honest: bool,
    pub strictly_honest: bool,
    /// Atom on which `τ` takes two values, for the strict form.
    pub counterexample: Option<AtomRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRef {
    pub time: usize,
    pub atom: Vec<String>,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaSummary {
    pub holds: bool,
    pub witness: Option<WitnessRef>,
    /// Holdings `H₁..H_N`, one row per trading time.
    pub strategy: Option<Table>,
    pub gains: Option<Vec<String>>,
    /// Density of an equivalent martingale measure.
    pub emm: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketVerdicts {
    /// Absent when the market is not adapted to the public filtration.
    pub public: Option<NaSummary>,
    pub insider: NaSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    pub level_sets: bool,
    pub hitting_times_aligned: bool,
    pub predictable: bool,
    pub density_trivial: bool,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReverseSummary {
    /// The truncated process tested under the public filtration.
    pub truncated: Table,
    pub insider_holds: bool,
    pub public_holds: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalitySummary {
    /// Entry `n - 1` is the verdict at time `n`.
    pub per_time: Vec<bool>,
    pub witness: Option<AtomRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeflatorSummary {
    pub martingale: Table,
    pub deflator: Table,
    pub one_plus_jumps_positive: bool,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub increments: Table,
    pub density: Table,
    pub terminal: Vec<String>,
    pub equals_base: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideReport {
    /// `X^τ` before, `X − X^τ` after.
    pub market: Table,
    pub conditions: Conditions,
    pub verdicts: MarketVerdicts,
    /// Entry `n - 1`: outcomes where the increment at `n` meets the level
    /// set that blocks the condition.
    pub exposed: Vec<Vec<String>>,
    pub orthogonality: OrthogonalitySummary,
    pub reverse: ReverseSummary,
    pub deflator: DeflatorSummary,
    pub measure_change: MeasureSummary,
    /// Compensated insider martingale, present when the process is a
    /// public martingale.
    pub compensated: Option<Table>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model: ModelSummary,
    pub azema: AzemaTables,
    pub hitting_times: HittingTimes,
    pub honesty: HonestyReport,
    pub full_market: MarketVerdicts,
    pub insider_martingale: Option<Table>,
    pub before: Option<SideReport>,
    pub after: Option<SideReport>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    /// Equivalence or reverse-theorem disagreements.
    pub fn breaches(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (label, side) in [("before", &self.before), ("after", &self.after)] {
            if let Some(side) = side {
                if !side.conditions.consistent {
                    out.push(format!("{label} τ: equivalent conditions disagree"));
                }
                if !side.reverse.agree {
                    out.push(format!("{label} τ: paired reverse verdicts disagree"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaCheckReport {
    pub outcomes: Vec<String>,
    pub process: String,
    pub random_time: String,
    pub full_market: MarketVerdicts,
    pub before: Option<MarketVerdicts>,
    pub after: Option<MarketVerdicts>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub holds: bool,
    pub strategy: Option<Table>,
    pub gains: Option<Vec<String>>,
    pub explored: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub market: String,
    pub filtration: String,
    pub result: Option<SearchResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub outcomes: Vec<String>,
    pub process: String,
    pub random_time: String,
    pub entries: Vec<SearchEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeflatorEntry {
    pub side: String,
    pub summary: DeflatorSummary,
    pub deflated_market: Table,
    pub deflated_is_insider_martingale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeflatorReport {
    pub outcomes: Vec<String>,
    pub process: String,
    pub random_time: String,
    pub entries: Vec<DeflatorEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub outcomes: Vec<String>,
    pub which: String,
    pub random_time: String,
    pub density: Vec<String>,
    pub max: String,
    pub min: String,
    pub process: String,
    /// The process tested for the martingale property under the new measure.
    pub tested: Table,
    pub martingale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub process: Option<String>,
    pub random_time: String,
    pub honesty: HonestyReport,
    pub before: Conditions,
    pub after: Option<Conditions>,
    pub reverse_before: Option<bool>,
    pub reverse_after: Option<bool>,
}

impl TheoremReport {
    pub fn breaches(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.before.consistent {
            out.push("before τ: equivalent conditions disagree".to_string());
        }
        if self.after.as_ref().is_some_and(|c| !c.consistent) {
            out.push("after τ: equivalent conditions disagree".to_string());
        }
        if self.reverse_before == Some(false) {
            out.push("before τ: paired reverse verdicts disagree".to_string());
        }
        if self.reverse_after == Some(false) {
            out.push("after τ: paired reverse verdicts disagree".to_string());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub attempts: usize,
    pub successes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedMessage {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub count: u64,
    pub max_outcomes: usize,
    pub max_horizon: usize,
    pub instances: usize,
    pub before_disagreements: Vec<u64>,
    pub after_disagreements: Vec<u64>,
    pub reverse_before_mismatches: Vec<u64>,
    pub reverse_after_mismatches: Vec<u64>,
    pub negative_before: Tally,
    pub negative_after: Tally,
    pub positive_before: Tally,
    pub positive_after: Tally,
    pub invariant_failures: Vec<SeedMessage>,
    pub errors: Vec<SeedMessage>,
    pub clean: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleParameters {
    pub u: String,
    pub d: String,
    pub lambda: Option<String>,
    pub s0: String,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub id: u8,
    pub parameters: ExampleParameters,
    /// Number of displayed values compared against the analysis.
    pub verified_values: usize,
    pub analysis: AnalysisReport,
}

pub trait RenderText {
    fn render_text(&self, out: &mut TextWriter);
}

pub fn render<T: Serialize + RenderText>(value: &T, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
            s.push('\n');
            s.into_bytes()
        }
        Format::Text => {
            let mut w = TextWriter::default();
            value.render_text(&mut w);
            w.out.into_bytes()
        }
    }
}

pub fn render_report(report: &AnalysisReport, format: Format) -> Vec<u8> {
    render(report, format)
}

#[derive(Debug, Default)]
pub struct TextWriter {
    out: String,
    outcomes: Vec<String>,
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn set(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

impl TextWriter {
    pub fn into_string(self) -> String {
        self.out
    }

    fn heading(&mut self, title: &str) {
        if !self.out.is_empty() {
            self.out.push('\n');
        }
        let _ = writeln!(self.out, "== {title} ==");
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let line = format!("{key:<28} {value}");
        let _ = writeln!(self.out, "{}", line.trim_end());
    }

    fn table(&mut self, title: &str, label: &str, first: usize, rows: &[Vec<String>]) {
        let labels: Vec<String> = (first..first + rows.len()).map(|n| n.to_string()).collect();
        self.grid(title, label, &labels, rows);
    }

    fn row(&mut self, title: &str, values: &[String]) {
        self.grid(title, "", &[String::new()], std::slice::from_ref(&values.to_vec()));
    }

    fn grid(&mut self, title: &str, label: &str, labels: &[String], rows: &[Vec<String>]) {
        let mut header = vec![label.to_string()];
        header.extend(self.outcomes.iter().cloned());
        let mut body = vec![header];
        for (l, row) in labels.iter().zip(rows) {
            let mut r = vec![l.clone()];
            r.extend(row.iter().cloned());
            body.push(r);
        }
        let widths: Vec<usize> = (0..body[0].len())
            .map(|c| body.iter().map(|r| r.get(c).map_or(0, |s| s.chars().count())).max().unwrap_or(0))
            .collect();
        if !title.is_empty() {
            let _ = writeln!(self.out, "{title}");
        }
        for row in body {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell:>w$}"))
                .collect();
            let _ = writeln!(self.out, "  {}", cells.join("  ").trim_end());
        }
    }

    fn verdict(&mut self, title: &str, v: &NaSummary) {
        let state = if v.holds { "no arbitrage" } else { "ARBITRAGE" };
        self.line(title, state);
        if let Some(w) = &v.witness {
            self.line(
                "  first violation",
                format!("time {} on {} (sign {:+})", w.time, set(&w.atom), w.sign),
            );
        }
        if let Some(s) = &v.strategy {
            self.table("  strategy", "n", 1, s);
        }
        if let Some(g) = &v.gains {
            self.row("  gains", g);
        }
        if let Some(e) = &v.emm {
            self.row("  martingale density", e);
        }
    }

    fn public_verdict(&mut self, title: &str, v: &Option<NaSummary>) {
        match v {
            Some(v) => self.verdict(title, v),
            None => self.line(title, "not adapted to the public filtration"),
        }
    }

    fn conditions(&mut self, c: &Conditions) {
        self.line("  level sets", yes(c.level_sets));
        self.line("  hitting times aligned", yes(c.hitting_times_aligned));
        self.line("  predictable hitting time", yes(c.predictable));
        self.line("  trivial density", yes(c.density_trivial));
        self.line("  consistent", yes(c.consistent));
    }

    fn honesty(&mut self, h: &HonestyReport) {
        self.line("honest", yes(h.honest));
        self.line("strictly honest", yes(h.strictly_honest));
        if let Some(c) = &h.counterexample {
            self.line("  two values on", format!("{} at time {}", set(&c.atom), c.time));
        }
    }

    fn deflator(&mut self, d: &DeflatorSummary) {
        self.table("  deflator martingale", "n", 0, &d.martingale);
        self.table("  stochastic exponential", "n", 0, &d.deflator);
        self.line("  1 + jumps positive", yes(d.one_plus_jumps_positive));
        self.line("  insider martingale", yes(d.verified));
    }
}

impl RenderText for AnalysisReport {
    fn render_text(&self, w: &mut TextWriter) {
        let m = &self.model;
        w.outcomes = m.outcomes.iter().map(|o| o.name.clone()).collect();
        w.heading("model");
        w.line("horizon", m.horizon);
        w.line("process", &m.process);
        w.line("random time", &m.random_time);
        let probs: Vec<String> = m.outcomes.iter().map(|o| o.prob.clone()).collect();
        w.row("probabilities", &probs);
        let tau: Vec<String> = m.tau.iter().map(ToString::to_string).collect();
        w.row("random time values", &tau);
        for (label, levels) in [("public", &m.public_filtration), ("insider", &m.insider_filtration)] {
            let _ = writeln!(w.out, "{label} filtration");
            for (n, atoms) in levels.iter().enumerate() {
                let atoms: Vec<String> = atoms.iter().map(|a| set(a)).collect();
                let _ = writeln!(w.out, "  {n}  {}", atoms.join(" "));
            }
        }

        w.heading("survival processes");
        w.table("Z", "n", 0, &self.azema.z);
        w.table("Z~", "n", 0, &self.azema.z_tilde);
        w.table("m", "n", 0, &self.azema.m);
        w.table("A", "n", 0, &self.azema.a);

        w.heading("hitting times");
        let h = &self.hitting_times;
        let rows = [&h.r1, &h.r2, &h.r3, &h.sigma1, &h.sigma2, &h.sigma3].map(|r| r.clone());
        let labels = ["R1", "R2", "R3", "sigma1", "sigma2", "sigma3"].map(String::from);
        w.grid("", "", &labels, &rows);

        w.heading("honesty");
        w.honesty(&self.honesty);

        w.heading("full market");
        w.public_verdict("public traders", &self.full_market.public);
        w.verdict("insiders", &self.full_market.insider);
        if let Some(t) = &self.insider_martingale {
            w.table("insider martingale part", "n", 0, t);
        }

        for (label, side) in [("before τ", &self.before), ("after τ", &self.after)] {
            let Some(side) = side else { continue };
            w.heading(label);
            w.table("market", "n", 0, &side.market);
            w.line("conditions", "");
            w.conditions(&side.conditions);
            w.public_verdict("public traders", &side.verdicts.public);
            w.verdict("insiders", &side.verdicts.insider);
            for (n, names) in side.exposed.iter().enumerate() {
                w.line(&format!("exposed at time {}", n + 1), set(names));
            }
            let per: Vec<String> = side.orthogonality.per_time.iter().map(|&b| yes(b).to_string()).collect();
            w.line("indicator orthogonality", per.join(" "));
            if let Some(a) = &side.orthogonality.witness {
                w.line("  fails on", format!("{} at time {}", set(&a.atom), a.time));
            }
            w.table("truncated process", "n", 0, &side.reverse.truncated);
            w.line(
                "reverse verdicts",
                format!(
                    "insider {} / public {} ({})",
                    if side.reverse.insider_holds { "NA" } else { "arbitrage" },
                    if side.reverse.public_holds { "NA" } else { "arbitrage" },
                    if side.reverse.agree { "agree" } else { "DISAGREE" }
                ),
            );
            w.deflator(&side.deflator);
            w.table("  measure change increments", "n", 0, &side.measure_change.increments);
            w.table("  density process", "n", 0, &side.measure_change.density);
            w.line("  equals base measure", yes(side.measure_change.equals_base));
            if let Some(t) = &side.compensated {
                w.table("compensated martingale", "n", 0, t);
            }
        }

        if !self.notes.is_empty() {
            w.heading("notes");
            for n in &self.notes {
                let _ = writeln!(w.out, "- {n}");
            }
        }
    }
}

impl RenderText for NaCheckReport {
    fn render_text(&self, w: &mut TextWriter) {
        w.outcomes = self.outcomes.clone();
        w.heading(&format!("no-arbitrage check: {} with {}", self.process, self.random_time));
        w.public_verdict("full market, public", &self.full_market.public);
        w.verdict("full market, insider", &self.full_market.insider);
        for (label, v) in [("stopped", &self.before), ("after", &self.after)] {
            if let Some(v) = v {
                w.public_verdict(&format!("{label} market, public"), &v.public);
                w.verdict(&format!("{label} market, insider"), &v.insider);
            }
        }
    }
}

impl RenderText for SearchReport {
    fn render_text(&self, w: &mut TextWriter) {
        w.outcomes = self.outcomes.clone();
        w.heading(&format!("grid search: {} with {}", self.process, self.random_time));
        for e in &self.entries {
            let title = format!("{} / {}", e.market, e.filtration);
            match (&e.result, &e.skipped) {
                (Some(r), _) => {
                    w.line(&title, if r.holds { "no arbitrage" } else { "ARBITRAGE" });
                    w.line("  strategies explored", r.explored);
                    if let Some(s) = &r.strategy {
                        w.table("  strategy", "n", 1, s);
                    }
                    if let Some(g) = &r.gains {
                        w.row("  gains", g);
                    }
                }
                (None, Some(reason)) => w.line(&title, format!("skipped: {reason}")),
                (None, None) => w.line(&title, "skipped"),
            }
        }
    }
}

impl RenderText for DeflatorReport {
    fn render_text(&self, w: &mut TextWriter) {
        w.outcomes = self.outcomes.clone();
        w.heading(&format!("deflators: {} with {}", self.process, self.random_time));
        for e in &self.entries {
            w.line(&e.side, "");
            w.deflator(&e.summary);
            w.table("  deflated market", "n", 0, &e.deflated_market);
            w.line("  deflated market is insider martingale", yes(e.deflated_is_insider_martingale));
        }
    }
}

impl RenderText for MeasureReport {
    fn render_text(&self, w: &mut TextWriter) {
        w.outcomes = self.outcomes.clone();
        w.heading(&format!("measure {} for {}", self.which, self.random_time));
        w.row("density", &self.density);
        w.line("max", &self.max);
        w.line("min", &self.min);
        w.table(&format!("tested process ({})", self.process), "n", 0, &self.tested);
        w.line("public martingale under it", yes(self.martingale));
    }
}

impl RenderText for TheoremReport {
    fn render_text(&self, w: &mut TextWriter) {
        w.heading(&format!("equivalence conditions for {}", self.random_time));
        w.honesty(&self.honesty);
        w.line("before τ", "");
        w.conditions(&self.before);
        match &self.after {
            Some(c) => {
                w.line("after τ", "");
                w.conditions(c);
            }
            None => w.line("after τ", "skipped: not strictly honest"),
        }
        if let Some(p) = &self.process {
            let fmt = |v: Option<bool>| match v {
                Some(true) => "agree",
                Some(false) => "DISAGREE",
                None => "skipped",
            };
            w.line(&format!("reverse before τ ({p})"), fmt(self.reverse_before));
            w.line(&format!("reverse after τ ({p})"), fmt(self.reverse_after));
        }
    }
}

impl RenderText for FuzzReport {
    fn render_text(&self, w: &mut TextWriter) {
        w.heading(&format!(
            "fuzz: seeds {}..{} (|Ω| ≤ {}, N ≤ {})",
            self.seed,
            self.seed + self.count,
            self.max_outcomes,
            self.max_horizon
        ));
        w.line("instances", self.instances);
        let list = |v: &[u64]| {
            if v.is_empty() {
                "none".to_string()
            } else {
                format!("{} (first seeds: {:?})", v.len(), &v[..v.len().min(8)])
            }
        };
        w.line("before disagreements", list(&self.before_disagreements));
        w.line("after disagreements", list(&self.after_disagreements));
        w.line("reverse before mismatches", list(&self.reverse_before_mismatches));
        w.line("reverse after mismatches", list(&self.reverse_after_mismatches));
        let tally = |t: &Tally| format!("{}/{}", t.successes, t.attempts);
        w.line("counterexamples before", tally(&self.negative_before));
        w.line("counterexamples after", tally(&self.negative_after));
        w.line("no-arbitrage before", tally(&self.positive_before));
        w.line("no-arbitrage after", tally(&self.positive_after));
        w.line("invariant failures", self.invariant_failures.len());
        for f in self.invariant_failures.iter().take(8) {
            let _ = writeln!(w.out, "  seed {}: {}", f.seed, f.message);
        }
        w.line("errors", self.errors.len());
        for f in self.errors.iter().take(8) {
            let _ = writeln!(w.out, "  seed {}: {}", f.seed, f.message);
        }
        w.line("clean", yes(self.clean));
    }
}

impl RenderText for ExampleReport {
    fn render_text(&self, w: &mut TextWriter) {
        w.heading(&format!("example {}", self.id));
        let p = &self.parameters;
        w.line("u", &p.u);
        w.line("d", &p.d);
        if let Some(l) = &p.lambda {
            w.line("lambda", l);
        }
        w.line("S0", &p.s0);
        w.line("p", &p.p);
        w.line("verified values", self.verified_values);
        self.analysis.render_text(w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_right_aligned() {
        let mut w = TextWriter {
            outcomes: vec!["a".into(), "bb".into()],
            ..Default::default()
        };
        w.table("T", "n", 0, &[vec!["1/3".into(), "7".into()], vec!["-2".into(), "0".into()]]);
        assert_eq!(w.into_string(), "T\n  n    a  bb\n  0  1/3   7\n  1   -2   0\n");
    }
}
