//! Per-seed property campaigns over random instances.
//!
//! Each seed yields one general instance (used for everything before `τ`)
//! and one instance with a strictly honest time (used after `τ`). The
//! per-seed work is independent, so callers may run seeds in parallel and
//! merge with [`FuzzSummary::from_findings`] in seed order.

use crate::arbitrage::{
    after_counterexample, before_counterexample, na_check, validate_after_theorem,
    validate_before_theorem, validate_reverse_after, validate_reverse_before, EquivalenceReport,
};
use crate::error::Result;
use crate::generate::{perturb, random_adapted, random_honest_instance, random_instance, random_martingale};
use crate::random_time::{all_nonnegative, stop_at, EnlargedModel};
use crate::space::Process;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzOptions {
    pub max_outcomes: usize,
    pub max_horizon: usize,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        Self {
            max_outcomes: 8,
            max_horizon: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFindings {
    pub seed: u64,
    pub before: EquivalenceReport,
    pub after: EquivalenceReport,
    pub reverse_before_agree: bool,
    pub reverse_after_agree: bool,
    /// Present when the level-set condition fails; true when the
    /// counter-martingale produced a verified insider arbitrage.
    pub negative_before: Option<bool>,
    pub negative_after: Option<bool>,
    /// Present when the level-set condition holds; true when a random
    /// martingale's insider market kept NA.
    pub positive_before: Option<bool>,
    pub positive_after: Option<bool>,
    pub invariant_failures: Vec<String>,
}

fn model_for(instance: (crate::space::SampleSpace, crate::space::Filtration, crate::random_time::RandomTime)) -> Result<EnlargedModel> {
    let (space, f, tau) = instance;
    EnlargedModel::new(space, f, tau)
}

fn test_process(model: &EnlargedModel, seed: u64) -> Process {
    let (space, f) = (&model.space, &model.public);
    match seed % 3 {
        0 => random_martingale(space, f, seed),
        1 => perturb(&random_martingale(space, f, seed), f, seed),
        _ => random_adapted(space, f, seed),
    }
}

pub fn check_instance(seed: u64, options: FuzzOptions) -> Result<InstanceFindings> {
    let general = model_for(random_instance(seed, options.max_outcomes, options.max_horizon))?;
    let honest = model_for(random_honest_instance(seed, options.max_outcomes, options.max_horizon))?;

    let before = validate_before_theorem(&general)?;
    let after = validate_after_theorem(&honest)?;

    let x = test_process(&general, seed);
    let reverse_before_agree = validate_reverse_before(&general, &x)?.agree;
    let y = test_process(&honest, seed);
    let reverse_after_agree = validate_reverse_after(&honest, &y)?.agree;

    let negative_before = if before.b {
        None
    } else {
        Some(before_counterexample(&general)?.succeeded(&general))
    };
    let negative_after = if after.b {
        None
    } else {
        Some(after_counterexample(&honest)?.succeeded(&honest))
    };
    let positive_before = if before.b {
        let m = random_martingale(&general.space, &general.public, seed);
        Some(na_check(&general.space, &general.insider, &general.stopped(&m))?.holds)
    } else {
        None
    };
    let positive_after = if after.b {
        let m = random_martingale(&honest.space, &honest.public, seed);
        Some(na_check(&honest.space, &honest.insider, &honest.after(&m))?.holds)
    } else {
        None
    };

    let mut invariant_failures = density_invariants(&general, false);
    invariant_failures.extend(density_invariants(&honest, true).into_iter().map(|s| format!("honest: {s}")));

    Ok(InstanceFindings {
        seed,
        before,
        after,
        reverse_before_agree,
        reverse_after_agree,
        negative_before,
        negative_after,
        positive_before,
        positive_after,
        invariant_failures,
    })
}

/// Deflators are `G`-martingales with `1 + Δ > 0`, measure changes are
/// `F`-martingales with `1 + Δ > 0`, every density is positive with unit
/// mean, and the stopped `Y` never decreases. Returns what failed.
pub fn density_invariants(model: &EnlargedModel, honest: bool) -> Vec<String> {
    let mut failures = Vec::new();
    let mut note = |ok: bool, what: &str| {
        if !ok {
            failures.push(what.to_string());
        }
    };
    match model.deflator_before() {
        Ok(r) => note(
            r.martingale_verified && r.one_plus_jumps_positive,
            "deflator before τ",
        ),
        Err(e) => note(false, &format!("deflator before τ: {e}")),
    }
    match model.measure_change_before() {
        Ok(r) => {
            note(
                r.density_process.values().iter().flatten().all(|v| v > &num_traits::Zero::zero()),
                "density process D positive",
            );
            note(stop_at(&r.increments, &model.tau).is_nondecreasing(), "stopped Y nondecreasing");
        }
        Err(e) => note(false, &format!("measure change before τ: {e}")),
    }
    match model.measure_change_after() {
        Ok(r) => note(
            r.density_process.values().iter().flatten().all(|v| v > &num_traits::Zero::zero()),
            "density process D(a) positive",
        ),
        Err(e) => note(false, &format!("measure change after τ: {e}")),
    }
    if let Err(e) = model.per_period_density_before() {
        note(false, &format!("per-period density before τ: {e}"));
    }
    if let Err(e) = model.qe_measures() {
        note(false, &format!("Q(e) densities: {e}"));
    }
    if honest {
        match model.deflator_after() {
            Ok(r) => note(
                r.martingale_verified && r.one_plus_jumps_positive,
                "deflator after τ",
            ),
            Err(e) => note(false, &format!("deflator after τ: {e}")),
        }
        if let Err(e) = model.per_period_density_after() {
            note(false, &format!("per-period density after τ: {e}"));
        }
    }
    let jumps = crate::random_time::dual_optional_increments(&model.azema);
    note(
        jumps.values().iter().all(|row| all_nonnegative(row)),
        "Z̃ − Z nonnegative",
    );
    failures
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzSummary {
    pub instances: usize,
    pub before_disagreements: Vec<u64>,
    pub after_disagreements: Vec<u64>,
    pub reverse_before_mismatches: Vec<u64>,
    pub reverse_after_mismatches: Vec<u64>,
    pub negative_before: (usize, usize),
    pub negative_after: (usize, usize),
    pub positive_before: (usize, usize),
    pub positive_after: (usize, usize),
    pub invariant_failures: Vec<(u64, String)>,
    pub errors: Vec<(u64, String)>,
}

impl FuzzSummary {
    pub fn from_findings(findings: impl IntoIterator<Item = (u64, Result<InstanceFindings>)>) -> Self {
        let mut s = FuzzSummary::default();
        let tally = |slot: &mut (usize, usize), outcome: Option<bool>| {
            if let Some(ok) = outcome {
                slot.0 += 1;
                slot.1 += usize::from(ok);
            }
        };
        for (seed, result) in findings {
            s.instances += 1;
            let f = match result {
                Ok(f) => f,
                Err(e) => {
                    s.errors.push((seed, e.to_string()));
                    continue;
                }
            };
            if !f.before.consistent {
                s.before_disagreements.push(seed);
            }
            if !f.after.consistent {
                s.after_disagreements.push(seed);
            }
            if !f.reverse_before_agree {
                s.reverse_before_mismatches.push(seed);
            }
            if !f.reverse_after_agree {
                s.reverse_after_mismatches.push(seed);
            }
            tally(&mut s.negative_before, f.negative_before);
            tally(&mut s.negative_after, f.negative_after);
            tally(&mut s.positive_before, f.positive_before);
            tally(&mut s.positive_after, f.positive_after);
            s.invariant_failures
                .extend(f.invariant_failures.into_iter().map(|m| (seed, m)));
        }
        s
    }

    /// Anything that contradicts an equivalence or a construction.
    pub fn clean(&self) -> bool {
        self.before_disagreements.is_empty()
            && self.after_disagreements.is_empty()
            && self.reverse_before_mismatches.is_empty()
            && self.reverse_after_mismatches.is_empty()
            && self.negative_before.0 == self.negative_before.1
            && self.negative_after.0 == self.negative_after.1
            && self.positive_before.0 == self.positive_before.1
            && self.positive_after.0 == self.positive_after.1
            && self.invariant_failures.is_empty()
            && self.errors.is_empty()
    }
}

pub fn run_sequential(start: u64, count: u64, options: FuzzOptions) -> FuzzSummary {
    FuzzSummary::from_findings((start..start + count).map(|s| (s, check_instance(s, options))))
}
