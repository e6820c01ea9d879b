//! Runs the engine over a parsed model and assembles report documents.

use insider_na::arbitrage::GRID_MAX_COMBINATIONS;
use insider_na::fuzz::{check_instance, FuzzOptions, FuzzSummary};
use insider_na::random_time::ExtendedTime;
use insider_na::rational::format_rational;
use insider_na::{
    brute_force_na, na_check, validate_after_theorem, validate_before_theorem,
    validate_reverse_after, validate_reverse_before, EnlargedModel, EquivalenceReport, Filtration,
    Grid, Honesty, NaVerdict, Process, Rational, Side,
};
use rayon::prelude::*;

use crate::error::CliError;
use crate::model::ParsedModel;
use crate::report::{
    AnalysisReport, AtomRef, AzemaTables, Conditions, DeflatorEntry, DeflatorReport,
    DeflatorSummary, FuzzReport, HittingTimes, HonestyReport, MarketVerdicts, MeasureReport,
    MeasureSummary, ModelSummary, NaCheckReport, NaSummary, Outcome, OrthogonalitySummary,
    ReverseSummary, SearchEntry, SearchReport, SearchResult, SeedMessage, SideReport, Table, Tally,
    TheoremReport, WitnessRef,
};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub process: Option<String>,
    pub time: Option<String>,
    /// With neither flag set, the before-τ side always runs and the after-τ
    /// side runs when the time is strictly honest.
    pub before: bool,
    pub after: bool,
}

/// A model with one process and one random time picked out.
pub struct Selection<'a> {
    pub process_name: &'a str,
    pub time_name: &'a str,
    pub process: &'a Process,
    pub model: EnlargedModel,
    pub parsed: &'a ParsedModel,
}

impl<'a> Selection<'a> {
    pub fn new(parsed: &'a ParsedModel, options: &AnalyzeOptions) -> Result<Self, CliError> {
        let (process_name, process) = pick(&parsed.processes, options.process.as_deref(), "process")?;
        let (time_name, tau) = pick(&parsed.random_times, options.time.as_deref(), "random time")?;
        let model = EnlargedModel::new(parsed.space.clone(), parsed.filtration.clone(), tau.clone())?;
        Ok(Selection {
            process_name,
            time_name,
            process,
            model,
            parsed,
        })
    }

    fn strictly_honest(&self) -> bool {
        self.model.strict_honesty().is_honest()
    }

    /// `(before, after)`; asking for the after side of a time that is not
    /// strictly honest is an error.
    fn sides(&self, options: &AnalyzeOptions) -> Result<(bool, bool), CliError> {
        let honest = self.strictly_honest();
        if options.after && !honest {
            return Err(not_honest(&self.model));
        }
        Ok(match (options.before, options.after) {
            (false, false) => (true, honest),
            other => other,
        })
    }

    fn names(&self, set: &[usize]) -> Vec<String> {
        self.parsed.outcome_names(set.iter().copied())
    }

    fn is_public_martingale(&self) -> bool {
        self.model
            .public
            .is_martingale(&self.model.space, self.process)
            .is_ok_and(|v| v.holds())
    }
}

fn not_honest(model: &EnlargedModel) -> CliError {
    match model.strict_honesty() {
        Honesty::NotHonest { time, atom } => CliError::Domain(insider_na::Error::NotHonest { time, atom }),
        Honesty::Honest { .. } => unreachable!("checked by caller"),
    }
}

fn pick<'a, T>(
    items: &'a [(String, T)],
    wanted: Option<&str>,
    what: &str,
) -> Result<(&'a str, &'a T), CliError> {
    match wanted {
        Some(name) => items
            .iter()
            .find(|(n, _)| n == name)
            .map(|(n, t)| (n.as_str(), t))
            .ok_or_else(|| {
                let known: Vec<&str> = items.iter().map(|(n, _)| n.as_str()).collect();
                CliError::Usage(format!("no {what} named `{name}` (known: {})", known.join(", ")))
            }),
        None => items.first().map(|(n, t)| (n.as_str(), t)).ok_or_else(|| {
            CliError::Model(crate::model::ModelError::Semantic {
                path: if what == "process" { "processes" } else { "random_times" }.into(),
                message: format!("the model defines no {what}"),
            })
        }),
    }
}

pub fn row(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

pub fn table(process: &Process) -> Table {
    process.values().iter().map(|r| row(r)).collect()
}

fn times(values: &[ExtendedTime]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

fn atoms(sel: &Selection, f: &Filtration) -> Vec<Vec<Vec<String>>> {
    f.levels()
        .iter()
        .map(|level| level.atoms().iter().map(|a| sel.names(a)).collect())
        .collect()
}

fn conditions(r: &EquivalenceReport) -> Conditions {
    Conditions {
        level_sets: r.b,
        hitting_times_aligned: r.c,
        predictable: r.d,
        density_trivial: r.e,
        consistent: r.consistent,
    }
}

/// Replays any reported strategy before it is emitted.
fn na_summary(sel: &Selection, f: &Filtration, market: &Process, v: &NaVerdict) -> Result<NaSummary, CliError> {
    if let Some(h) = &v.strategy {
        f.check_predictable(h)
            .map_err(|e| CliError::Invariant(format!("reported strategy: {e}")))?;
        if !h.is_arbitrage_for(market) {
            return Err(CliError::Invariant(
                "reported strategy does not replay to an arbitrage".into(),
            ));
        }
    }
    Ok(NaSummary {
        holds: v.holds,
        witness: v.witness.as_ref().map(|w| WitnessRef {
            time: w.time,
            atom: sel.names(&w.atom),
            sign: w.sign,
        }),
        strategy: v.strategy.as_ref().map(|h| h.holdings().iter().map(|r| row(r)).collect()),
        gains: v.strategy.as_ref().map(|h| row(&h.gains(market))),
        emm: v.emm.as_ref().map(|d| row(d.values())),
    })
}

fn verdicts(sel: &Selection, market: &Process) -> Result<MarketVerdicts, CliError> {
    let m = &sel.model;
    let public = if m.public.is_adapted(market) {
        let v = na_check(&m.space, &m.public, market)?;
        Some(na_summary(sel, &m.public, market, &v)?)
    } else {
        None
    };
    let insider = na_check(&m.space, &m.insider, market)?;
    Ok(MarketVerdicts {
        public,
        insider: na_summary(sel, &m.insider, market, &insider)?,
    })
}

fn honesty(sel: &Selection) -> HonestyReport {
    let strict = sel.model.strict_honesty();
    HonestyReport {
        honest: sel.model.honesty().is_honest(),
        strictly_honest: strict.is_honest(),
        counterexample: match strict {
            Honesty::NotHonest { time, atom } => Some(AtomRef {
                time,
                atom: sel.names(&atom),
            }),
            Honesty::Honest { .. } => None,
        },
    }
}

fn deflator_summary(r: &insider_na::DeflatorReport) -> DeflatorSummary {
    DeflatorSummary {
        martingale: table(&r.martingale),
        deflator: table(&r.deflator),
        one_plus_jumps_positive: r.one_plus_jumps_positive,
        verified: r.martingale_verified,
    }
}

fn side_report(sel: &Selection, side: Side) -> Result<SideReport, CliError> {
    let m = &sel.model;
    let x = sel.process;
    let (market, equivalence, reverse, truncated, deflator, measure) = match side {
        Side::Before => (
            m.stopped(x),
            validate_before_theorem(m)?,
            validate_reverse_before(m, x)?,
            m.truncate_before(x),
            m.deflator_before()?,
            m.measure_change_before()?,
        ),
        Side::After => (
            m.after(x),
            validate_after_theorem(m)?,
            validate_reverse_after(m, x)?,
            m.truncate_after(x),
            m.deflator_after()?,
            m.measure_change_after()?,
        ),
    };
    let compensated = if sel.is_public_martingale() {
        Some(table(&match side {
            Side::Before => m.g_compensated_before(x)?,
            Side::After => m.g_compensated_after(x)?,
        }))
    } else {
        None
    };
    let ortho = m.orthogonality_check(x, side);
    Ok(SideReport {
        verdicts: verdicts(sel, &market)?,
        market: table(&market),
        conditions: conditions(&equivalence),
        exposed: m
            .exposed_outcomes(x, side)
            .iter()
            .map(|hit| sel.parsed.outcome_names((0..hit.len()).filter(|&w| hit[w])))
            .collect(),
        orthogonality: OrthogonalitySummary {
            per_time: ortho.per_time,
            witness: ortho.witness.map(|(time, atom)| AtomRef {
                time,
                atom: sel.names(&atom),
            }),
        },
        reverse: ReverseSummary {
            truncated: table(&truncated),
            insider_holds: reverse.insider.holds,
            public_holds: reverse.public.holds,
            agree: reverse.agree,
        },
        deflator: deflator_summary(&deflator),
        measure_change: MeasureSummary {
            increments: table(&measure.increments),
            density: table(&measure.density_process),
            terminal: row(measure.terminal.values()),
            equals_base: measure.equals_base,
        },
        compensated,
    })
}

pub fn run_analyze(parsed: &ParsedModel, options: &AnalyzeOptions) -> Result<AnalysisReport, CliError> {
    let sel = Selection::new(parsed, options)?;
    let (before, after) = sel.sides(options)?;
    let m = &sel.model;
    let (mart, comp) = m.m_a_decomposition()?;
    let r = m.zero_hitting_times();
    let s = m.one_hitting_times();
    let mut notes = Vec::new();

    let public_martingale = sel.is_public_martingale();
    let insider_martingale = if public_martingale && sel.strictly_honest() {
        Some(table(&m.g_martingale(sel.process)?))
    } else {
        if !public_martingale {
            notes.push(format!(
                "{} is not a public martingale; compensated martingales are omitted",
                sel.process_name
            ));
        }
        None
    };
    if !after && !sel.strictly_honest() {
        notes.push(format!(
            "{} is not strictly honest; the after-τ analysis is omitted",
            sel.time_name
        ));
    }

    Ok(AnalysisReport {
        model: ModelSummary {
            horizon: m.horizon(),
            outcomes: m
                .space
                .outcomes()
                .iter()
                .zip(m.space.weights())
                .map(|(name, p)| Outcome {
                    name: name.clone(),
                    prob: format_rational(p),
                })
                .collect(),
            public_filtration: atoms(&sel, &m.public),
            insider_filtration: atoms(&sel, &m.insider),
            process: sel.process_name.to_string(),
            random_time: sel.time_name.to_string(),
            tau: m.tau.values().to_vec(),
        },
        azema: AzemaTables {
            z: table(&m.azema.z),
            z_tilde: table(&m.azema.z_tilde),
            m: table(&mart),
            a: table(&comp),
        },
        hitting_times: HittingTimes {
            r1: times(&r.first),
            r2: times(&r.second),
            r3: times(&r.third),
            sigma1: times(&s.first),
            sigma2: times(&s.second),
            sigma3: times(&s.third),
        },
        honesty: honesty(&sel),
        full_market: verdicts(&sel, sel.process)?,
        insider_martingale,
        before: before.then(|| side_report(&sel, Side::Before)).transpose()?,
        after: after.then(|| side_report(&sel, Side::After)).transpose()?,
        notes,
    })
}

pub fn run_na_check(parsed: &ParsedModel, options: &AnalyzeOptions) -> Result<NaCheckReport, CliError> {
    let sel = Selection::new(parsed, options)?;
    let (before, after) = sel.sides(options)?;
    let m = &sel.model;
    Ok(NaCheckReport {
        outcomes: m.space.outcomes().to_vec(),
        process: sel.process_name.to_string(),
        random_time: sel.time_name.to_string(),
        full_market: verdicts(&sel, sel.process)?,
        before: before.then(|| verdicts(&sel, &m.stopped(sel.process))).transpose()?,
        after: after.then(|| verdicts(&sel, &m.after(sel.process))).transpose()?,
    })
}

pub fn run_find_arbitrage(
    parsed: &ParsedModel,
    options: &AnalyzeOptions,
    grid: &Grid,
) -> Result<SearchReport, CliError> {
    let sel = Selection::new(parsed, options)?;
    let (before, after) = sel.sides(options)?;
    let m = &sel.model;
    let mut markets = vec![("X".to_string(), sel.process.clone())];
    if before {
        markets.push(("X^tau".to_string(), m.stopped(sel.process)));
    }
    if after {
        markets.push(("X - X^tau".to_string(), m.after(sel.process)));
    }
    let mut entries = Vec::new();
    for (label, market) in &markets {
        for (fname, f) in [("public", &m.public), ("insider", &m.insider)] {
            let mut entry = SearchEntry {
                market: label.clone(),
                filtration: fname.to_string(),
                result: None,
                skipped: None,
            };
            if !f.is_adapted(market) {
                entry.skipped = Some(format!("not adapted to the {fname} filtration"));
                entries.push(entry);
                continue;
            }
            match brute_force_na(&m.space, f, market, grid) {
                Ok(found) => {
                    if let Some(h) = &found.strategy {
                        if !h.is_arbitrage_for(market) || f.check_predictable(h).is_err() {
                            return Err(CliError::Invariant(
                                "grid strategy does not replay to an arbitrage".into(),
                            ));
                        }
                    }
                    entry.result = Some(SearchResult {
                        holds: found.holds,
                        strategy: found.strategy.as_ref().map(|h| h.holdings().iter().map(|r| row(r)).collect()),
                        gains: found.gains.as_deref().map(row),
                        explored: found.explored,
                    });
                }
                Err(insider_na::Error::TooLarge(why)) => {
                    entry.skipped = Some(format!("{why} (limit {GRID_MAX_COMBINATIONS} strategies)"));
                }
                Err(e) => return Err(e.into()),
            }
            entries.push(entry);
        }
    }
    Ok(SearchReport {
        outcomes: m.space.outcomes().to_vec(),
        process: sel.process_name.to_string(),
        random_time: sel.time_name.to_string(),
        entries,
    })
}

pub fn run_deflator(parsed: &ParsedModel, options: &AnalyzeOptions) -> Result<DeflatorReport, CliError> {
    let sel = Selection::new(parsed, options)?;
    let (before, after) = sel.sides(options)?;
    let m = &sel.model;
    let mut entries = Vec::new();
    if before {
        let deflated = m.deflated_stopped(sel.process)?;
        entries.push(DeflatorEntry {
            side: "before τ".into(),
            summary: deflator_summary(&m.deflator_before()?),
            deflated_is_insider_martingale: m.insider.is_martingale(&m.space, &deflated)?.holds(),
            deflated_market: table(&deflated),
        });
    }
    if after {
        let deflated = m.deflated_after(sel.process)?;
        entries.push(DeflatorEntry {
            side: "after τ".into(),
            summary: deflator_summary(&m.deflator_after()?),
            deflated_is_insider_martingale: m.insider.is_martingale(&m.space, &deflated)?.holds(),
            deflated_market: table(&deflated),
        });
    }
    Ok(DeflatorReport {
        outcomes: m.space.outcomes().to_vec(),
        process: sel.process_name.to_string(),
        random_time: sel.time_name.to_string(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MeasureKind {
    /// Before-τ measure change.
    Q,
    /// After-τ measure change.
    Qa,
    /// Measure for the truncated process before τ.
    Qe,
    /// Measure for the truncated process after τ.
    QeTilde,
}

impl MeasureKind {
    fn label(self) -> &'static str {
        match self {
            MeasureKind::Q => "q",
            MeasureKind::Qa => "qa",
            MeasureKind::Qe => "qe",
            MeasureKind::QeTilde => "qe-tilde",
        }
    }
}

pub fn run_measure(
    parsed: &ParsedModel,
    options: &AnalyzeOptions,
    which: MeasureKind,
) -> Result<MeasureReport, CliError> {
    let sel = Selection::new(parsed, options)?;
    let m = &sel.model;
    let x = sel.process;
    let (density, tested) = match which {
        MeasureKind::Q => (m.measure_change_before()?.terminal, x.clone()),
        MeasureKind::Qa => {
            if !sel.strictly_honest() {
                return Err(not_honest(m));
            }
            (m.measure_change_after()?.terminal, x.clone())
        }
        MeasureKind::Qe => (m.qe_measures()?.0, m.truncate_before(x)),
        MeasureKind::QeTilde => (m.qe_measures()?.1, m.truncate_after(x)),
    };
    let reweighted = m.space.apply_density(&density)?;
    Ok(MeasureReport {
        outcomes: m.space.outcomes().to_vec(),
        which: which.label().to_string(),
        random_time: sel.time_name.to_string(),
        density: row(density.values()),
        max: format_rational(density.max()),
        min: format_rational(density.min()),
        process: sel.process_name.to_string(),
        tested: table(&tested),
        martingale: m.public.is_martingale(&reweighted, &tested)?.holds(),
    })
}

/// The process is optional here; without one the reverse checks are skipped.
pub fn run_validate_theorems(parsed: &ParsedModel, options: &AnalyzeOptions) -> Result<TheoremReport, CliError> {
    let (time_name, tau) = pick(&parsed.random_times, options.time.as_deref(), "random time")?;
    let model = EnlargedModel::new(parsed.space.clone(), parsed.filtration.clone(), tau.clone())?;
    let process = match (&options.process, parsed.processes.first()) {
        (Some(name), _) => Some(pick(&parsed.processes, Some(name), "process")?),
        (None, Some((n, p))) => Some((n.as_str(), p)),
        (None, None) => None,
    };
    let honest = model.strict_honesty().is_honest();
    if options.after && !honest {
        return Err(not_honest(&model));
    }
    let strict = model.strict_honesty();
    let honesty = HonestyReport {
        honest: model.honesty().is_honest(),
        strictly_honest: honest,
        counterexample: match strict {
            Honesty::NotHonest { time, atom } => Some(AtomRef {
                time,
                atom: parsed.outcome_names(atom),
            }),
            Honesty::Honest { .. } => None,
        },
    };
    Ok(TheoremReport {
        process: process.map(|(n, _)| n.to_string()),
        random_time: time_name.to_string(),
        honesty,
        before: conditions(&validate_before_theorem(&model)?),
        after: honest.then(|| validate_after_theorem(&model).map(|r| conditions(&r))).transpose()?,
        reverse_before: process
            .map(|(_, x)| validate_reverse_before(&model, x).map(|r| r.agree))
            .transpose()?,
        reverse_after: match process {
            Some((_, x)) if honest => Some(validate_reverse_after(&model, x)?.agree),
            _ => None,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzRequest {
    pub seed: u64,
    pub count: u64,
    pub max_outcomes: usize,
    pub max_horizon: usize,
}

/// Seeds run in parallel; results are merged in seed order.
pub fn run_fuzz(request: FuzzRequest) -> Result<FuzzReport, CliError> {
    if request.max_outcomes < 2 || request.max_horizon < 1 {
        return Err(CliError::Usage(
            "fuzzing needs --max-outcomes ≥ 2 and --max-horizon ≥ 1".into(),
        ));
    }
    let end = request
        .seed
        .checked_add(request.count)
        .ok_or_else(|| CliError::Usage("seed range overflows".into()))?;
    let options = FuzzOptions {
        max_outcomes: request.max_outcomes,
        max_horizon: request.max_horizon,
    };
    let findings: Vec<_> = (request.seed..end)
        .into_par_iter()
        .map(|s| (s, check_instance(s, options)))
        .collect();
    let summary = FuzzSummary::from_findings(findings);
    let tally = |(attempts, successes): (usize, usize)| Tally { attempts, successes };
    let messages = |v: &[(u64, String)]| {
        v.iter()
            .map(|(seed, message)| SeedMessage {
                seed: *seed,
                message: message.clone(),
            })
            .collect()
    };
    Ok(FuzzReport {
        seed: request.seed,
        count: request.count,
        max_outcomes: request.max_outcomes,
        max_horizon: request.max_horizon,
        instances: summary.instances,
        clean: summary.clean(),
        before_disagreements: summary.before_disagreements.clone(),
        after_disagreements: summary.after_disagreements.clone(),
        reverse_before_mismatches: summary.reverse_before_mismatches.clone(),
        reverse_after_mismatches: summary.reverse_after_mismatches.clone(),
        negative_before: tally(summary.negative_before),
        negative_after: tally(summary.negative_after),
        positive_before: tally(summary.positive_before),
        positive_after: tally(summary.positive_after),
        invariant_failures: messages(&summary.invariant_failures),
        errors: messages(&summary.errors),
    })
}
