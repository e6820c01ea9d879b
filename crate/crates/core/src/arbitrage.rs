//! No-arbitrage decisions with certificates.
//!
//! Three independent deciders share one contract: [`na_check`] applies the
//! per-period sign test, [`na_check_lp`] solves a strictly-positive
//! martingale-weight program per atom, and [`brute_force_na`] enumerates
//! predictable strategies on a grid. On a finite space with a scalar price,
//! NA holds iff no atom of `F_{n-1}` sees a nonzero, single-signed `ΔXₙ`.

use std::ops::{AddAssign, SubAssign};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome};
use crate::random_time::{stop_at, EnlargedModel, ExtendedTime};
use crate::rational::{indicator, int, Rational};
use crate::space::{Filtration, MartingaleVerdict, MeasureDensity, Process, SampleSpace, Strategy};

/// A period and atom of `F_{time-1}` on which `sign·ΔX_time` is nonnegative
/// and somewhere positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub time: usize,
    pub atom: Vec<usize>,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaVerdict {
    pub holds: bool,
    /// The first violation in time order.
    pub witness: Option<Witness>,
    /// Every violating period and atom.
    pub violations: Vec<Witness>,
    /// `Σ sign·1_atom` over all violations, at their periods.
    pub strategy: Option<Strategy>,
    pub emm: Option<MeasureDensity>,
}

impl NaVerdict {
    fn from_violations(
        horizon: usize,
        len: usize,
        violations: Vec<Witness>,
        emm: Option<MeasureDensity>,
    ) -> Self {
        if violations.is_empty() {
            return NaVerdict {
                holds: true,
                witness: None,
                violations,
                strategy: None,
                emm,
            };
        }
        let mut strategy = Strategy::zeros(horizon, len);
        for v in &violations {
            strategy.set_on(v.time, &v.atom, &int(v.sign.into()));
        }
        NaVerdict {
            holds: false,
            witness: violations.first().cloned(),
            violations,
            strategy: Some(strategy),
            emm: None,
        }
    }
}

/// Children of an atom of `F_{n-1}` in `F_n`, with their conditional
/// probabilities and the (constant) increment on each.
struct Children {
    sets: Vec<Vec<usize>>,
    prob: Vec<Rational>,
    delta: Vec<Rational>,
}

fn children(space: &SampleSpace, f: &Filtration, delta: &[Rational], n: usize, atom: &[usize]) -> Children {
    let level = f.level(n);
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for &w in atom {
        let a = level.atom_of(w);
        if a[0] == w {
            sets.push(a.to_vec());
        }
    }
    let mass = space.mass(atom);
    let prob = sets.iter().map(|s| space.mass(s) / &mass).collect();
    let delta = sets.iter().map(|s| delta[s[0]].clone()).collect();
    Children { sets, prob, delta }
}

fn sign_violation(values: &[Rational]) -> Option<i8> {
    let pos = values.iter().any(Signed::is_positive);
    let neg = values.iter().any(Signed::is_negative);
    match (pos, neg) {
        (true, false) => Some(1),
        (false, true) => Some(-1),
        _ => None,
    }
}

pub fn na_check(space: &SampleSpace, f: &Filtration, x: &Process) -> Result<NaVerdict> {
    f.check_adapted(x)?;
    let mut violations = Vec::new();
    for n in 1..=f.horizon() {
        let delta = x.increment(n);
        for atom in f.level(n - 1).atoms() {
            let values: Vec<Rational> = atom.iter().map(|&w| delta[w].clone()).collect();
            if let Some(sign) = sign_violation(&values) {
                violations.push(Witness {
                    time: n,
                    atom: atom.clone(),
                    sign,
                });
            }
        }
    }
    let emm = if violations.is_empty() {
        Some(construct_emm(space, f, x)?)
    } else {
        None
    };
    Ok(NaVerdict::from_violations(f.horizon(), space.len(), violations, emm))
}

/// A martingale measure built one atom at a time: children where `ΔX > 0`
/// are scaled by `b`, children where `ΔX < 0` by `a`, with `a`, `b` the
/// positive and negative parts of the conditional mean. Atoms where `X` is
/// already a martingale keep their `ℙ`-weights.
pub fn construct_emm(space: &SampleSpace, f: &Filtration, x: &Process) -> Result<MeasureDensity> {
    f.check_adapted(x)?;
    let mut density = vec![Rational::one(); space.len()];
    for n in 1..=f.horizon() {
        let delta = x.increment(n);
        for atom in f.level(n - 1).atoms() {
            let ch = children(space, f, &delta, n, atom);
            let (mut a, mut b) = (Rational::zero(), Rational::zero());
            let (mut pi_pos, mut pi_neg, mut pi_zero) =
                (Rational::zero(), Rational::zero(), Rational::zero());
            for (p, d) in ch.prob.iter().zip(&ch.delta) {
                if d.is_positive() {
                    a += p * d;
                    pi_pos += p;
                } else if d.is_negative() {
                    b -= p * d;
                    pi_neg += p;
                } else {
                    pi_zero += p;
                }
            }
            if a.is_zero() && b.is_zero() {
                continue;
            }
            if a.is_zero() || b.is_zero() {
                return Err(Error::Arbitrage {
                    time: n,
                    atom: atom.clone(),
                });
            }
            let k = (Rational::one() - pi_zero) / (&b * &pi_pos + &a * &pi_neg);
            for (set, d) in ch.sets.iter().zip(&ch.delta) {
                let factor = if d.is_positive() {
                    &k * &b
                } else if d.is_negative() {
                    &k * &a
                } else {
                    Rational::one()
                };
                for &w in set {
                    density[w] *= &factor;
                }
            }
        }
    }
    let density = MeasureDensity::new(space, density)
        .map_err(|e| Error::Invariant(format!("constructed EMM: {e}")))?;
    verify_emm(space, f, x, &density)?;
    Ok(density)
}

fn verify_emm(space: &SampleSpace, f: &Filtration, x: &Process, density: &MeasureDensity) -> Result<()> {
    let q = space.apply_density(density)?;
    match f.is_martingale(&q, x)? {
        MartingaleVerdict::Martingale => Ok(()),
        MartingaleVerdict::Violated { time, atom, .. } => Err(Error::Invariant(format!(
            "EMM leaves drift at time {time} on atom {atom:?}"
        ))),
    }
}

/// Per atom: maximize `t` subject to `w_c = t + s_c`, `Σ w_c = 1`,
/// `Σ w_c ΔX_c = 0`, `t, s ≥ 0`. NA holds on the atom iff `t* > 0`.
fn atom_program(delta: &[Rational]) -> LinearProgram {
    let k = delta.len();
    let mut objective = vec![Rational::zero(); k + 1];
    objective[0] = Rational::one();
    let mut mass = vec![int(k as i64)];
    mass.extend((0..k).map(|_| Rational::one()));
    let mut mean = vec![delta.iter().sum()];
    mean.extend(delta.iter().cloned());
    LinearProgram {
        objective,
        rows: vec![mass, mean],
        rhs: vec![Rational::one(), Rational::zero()],
    }
}

/// NA via exact linear programming, one atom at a time; the EMM glues the
/// optimal conditional weights.
pub fn na_check_lp(space: &SampleSpace, f: &Filtration, x: &Process) -> Result<NaVerdict> {
    f.check_adapted(x)?;
    let mut violations = Vec::new();
    let mut density = vec![Rational::one(); space.len()];
    for n in 1..=f.horizon() {
        let delta = x.increment(n);
        for atom in f.level(n - 1).atoms() {
            let ch = children(space, f, &delta, n, atom);
            let weights = match atom_program(&ch.delta).solve() {
                LpOutcome::Optimal { x: sol, value } if value.is_positive() => {
                    Some(sol[1..].iter().map(|s| s + &value).collect::<Vec<_>>())
                }
                LpOutcome::Optimal { .. } | LpOutcome::Infeasible => None,
                LpOutcome::Unbounded => {
                    return Err(Error::Invariant("weight program is unbounded".into()))
                }
            };
            match weights {
                Some(w) => {
                    for ((set, wc), pc) in ch.sets.iter().zip(&w).zip(&ch.prob) {
                        let factor = wc / pc;
                        for &o in set {
                            density[o] *= &factor;
                        }
                    }
                }
                None => {
                    let sign = farkas_sign(&ch.delta).ok_or_else(|| {
                        Error::Invariant(format!(
                            "no positive weights at time {n} on {atom:?} but no one-sided certificate"
                        ))
                    })?;
                    violations.push(Witness {
                        time: n,
                        atom: atom.clone(),
                        sign,
                    });
                }
            }
        }
    }
    let emm = if violations.is_empty() {
        let density = MeasureDensity::new(space, density)
            .map_err(|e| Error::Invariant(format!("glued LP weights: {e}")))?;
        verify_emm(space, f, x, &density)?;
        Some(density)
    } else {
        None
    };
    Ok(NaVerdict::from_violations(f.horizon(), space.len(), violations, emm))
}

/// A scalar direction `h ∈ {+1, −1}` with `h·Δ ≥ 0` everywhere, `> 0`
/// somewhere.
fn farkas_sign(delta: &[Rational]) -> Option<i8> {
    [1i8, -1].into_iter().find(|&h| {
        let h = int(h.into());
        delta.iter().all(|d| !(&h * d).is_negative()) && delta.iter().any(|d| (&h * d).is_positive())
    })
}

/// Candidate holdings for the grid search.
#[derive(Debug, Clone, Default)]
pub struct Grid {
    /// Also try `±ΔX(ω)/ΔX(ω')` for outcomes of the same atom.
    pub hedge_ratios: bool,
}

impl Grid {
    pub fn unit() -> Self {
        Self { hedge_ratios: false }
    }

    pub fn with_hedge_ratios() -> Self {
        Self { hedge_ratios: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSearch {
    pub holds: bool,
    pub strategy: Option<Strategy>,
    pub gains: Option<Vec<Rational>>,
    pub explored: u64,
}

pub const GRID_MAX_OUTCOMES: usize = 6;
pub const GRID_MAX_HORIZON: usize = 3;
pub const GRID_MAX_COMBINATIONS: u64 = 1 << 20;

struct Position {
    time: usize,
    atom: Vec<usize>,
    values: Vec<Rational>,
}

/// Enumerates every predictable strategy whose holding on each atom is a
/// grid value. Among the arbitrages found, prefers the one positive on the
/// most outcomes, then the latest first trade, then the fewest trades.
pub fn brute_force_na(space: &SampleSpace, f: &Filtration, x: &Process, grid: &Grid) -> Result<GridSearch> {
    f.check_adapted(x)?;
    if space.len() > GRID_MAX_OUTCOMES || f.horizon() > GRID_MAX_HORIZON {
        return Err(Error::TooLarge(format!(
            "{} outcomes over {} periods; the grid search handles at most {GRID_MAX_OUTCOMES} and {GRID_MAX_HORIZON}",
            space.len(),
            f.horizon()
        )));
    }
    let increments = x.increments();
    let mut positions = Vec::new();
    for n in 1..=f.horizon() {
        for atom in f.level(n - 1).atoms() {
            if atom.iter().all(|&w| increments[n][w].is_zero()) {
                continue;
            }
            let mut values = vec![Rational::zero(), Rational::one(), int(-1)];
            if grid.hedge_ratios {
                for &a in atom {
                    for &b in atom {
                        let (da, db) = (&increments[n][a], &increments[n][b]);
                        if a != b && !da.is_zero() && !db.is_zero() {
                            let r = (da / db).abs();
                            for v in [r.clone(), -r] {
                                if !values.contains(&v) {
                                    values.push(v);
                                }
                            }
                        }
                    }
                }
            }
            positions.push(Position {
                time: n,
                atom: atom.clone(),
                values,
            });
        }
    }
    let mut combos: u64 = 1;
    for p in &positions {
        combos = combos.saturating_mul(p.values.len() as u64);
        if combos > GRID_MAX_COMBINATIONS {
            return Err(Error::TooLarge(format!(
                "more than {GRID_MAX_COMBINATIONS} grid strategies"
            )));
        }
    }

    let times: Vec<usize> = positions.iter().map(|p| p.time).collect();
    let best = match scaled_search(space.len(), &positions, &increments) {
        Some(terms) => search(space.len(), &times, &terms),
        None => {
            let terms = contributions(&positions, &increments, |r| r.clone());
            search(space.len(), &times, &terms)
        }
    };
    let (choice, explored) = best;
    Ok(match choice {
        None => GridSearch {
            holds: true,
            strategy: None,
            gains: None,
            explored,
        },
        Some(picks) => {
            let mut strategy = Strategy::zeros(f.horizon(), space.len());
            for (p, &i) in positions.iter().zip(&picks) {
                strategy.set_on(p.time, &p.atom, &p.values[i]);
            }
            let gains = strategy.gains(x);
            if !strategy.is_arbitrage_for(x) {
                return Err(Error::Invariant("grid search returned a losing strategy".into()));
            }
            GridSearch {
                holds: false,
                strategy: Some(strategy),
                gains: Some(gains),
                explored,
            }
        }
    })
}

/// `terms[p][v][ω]`: gain at `ω` from holding value `v` at position `p`.
fn contributions<T>(
    positions: &[Position],
    increments: &[Vec<Rational>],
    mut convert: impl FnMut(&Rational) -> T,
) -> Terms<T> {
    let mut terms = Vec::with_capacity(positions.len());
    for p in positions {
        let mut per_value = Vec::with_capacity(p.values.len());
        for v in &p.values {
            let row = p
                .atom
                .iter()
                .map(|&w| (w, convert(&(v * &increments[p.time][w]))))
                .collect();
            per_value.push(row);
        }
        terms.push(per_value);
    }
    terms
}

type Terms<T> = Vec<Vec<Vec<(usize, T)>>>;

/// Integer contributions after clearing denominators, when they fit.
fn scaled_search(
    _len: usize,
    positions: &[Position],
    increments: &[Vec<Rational>],
) -> Option<Terms<i128>> {
    let mut lcm = num_bigint::BigInt::one();
    for p in positions {
        for v in &p.values {
            for &w in &p.atom {
                lcm = lcm.lcm((v * &increments[p.time][w]).denom());
            }
        }
    }
    let limit = num_bigint::BigInt::from(1i128 << 100);
    let mut overflow = false;
    let terms = contributions(positions, increments, |r| {
        let scaled = r * Rational::from_integer(lcm.clone());
        debug_assert!(scaled.is_integer());
        let n = scaled.to_integer();
        if n.abs() > limit {
            overflow = true;
            0i128
        } else {
            n.to_i128().unwrap_or(0)
        }
    });
    (!overflow).then_some(terms)
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Rank {
    support: usize,
    first_trade: usize,
    trades: std::cmp::Reverse<usize>,
}

trait Gain: Clone + Signed + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self> {}
impl<T: Clone + Signed + for<'a> AddAssign<&'a T> + for<'a> SubAssign<&'a T>> Gain for T {}

struct Search<'t, T> {
    times: &'t [usize],
    terms: &'t [Vec<Vec<(usize, T)>>],
    gains: Vec<T>,
    picks: Vec<usize>,
    best: Option<(Rank, Vec<usize>)>,
    explored: u64,
}

impl<T: Gain> Search<'_, T> {
    fn rank(&self, support: usize) -> Rank {
        let first = self.picks.iter().position(|&i| i != 0).map_or(usize::MAX, |p| self.times[p]);
        Rank {
            support,
            first_trade: first,
            trades: std::cmp::Reverse(self.picks.iter().filter(|&&i| i != 0).count()),
        }
    }

    fn leaf(&mut self) {
        self.explored += 1;
        if self.gains.iter().any(Signed::is_negative) {
            return;
        }
        let support = self.gains.iter().filter(|g| g.is_positive()).count();
        if support == 0 {
            return;
        }
        let rank = self.rank(support);
        if self.best.as_ref().map_or(true, |(b, _)| rank > *b) {
            self.best = Some((rank, self.picks.clone()));
        }
    }

    fn descend(&mut self, p: usize) {
        if p == self.terms.len() {
            return self.leaf();
        }
        let terms = self.terms;
        for (i, contrib) in terms[p].iter().enumerate() {
            for (w, g) in contrib {
                self.gains[*w] += g;
            }
            self.picks.push(i);
            self.descend(p + 1);
            self.picks.pop();
            for (w, g) in contrib {
                self.gains[*w] -= g;
            }
        }
    }
}

fn search<T: Gain>(len: usize, times: &[usize], terms: &[Vec<Vec<(usize, T)>>]) -> (Option<Vec<usize>>, u64) {
    let mut s = Search {
        times,
        terms,
        gains: vec![T::zero(); len],
        picks: Vec::new(),
        best: None,
        explored: 0,
    };
    s.descend(0);
    (s.best.map(|(_, picks)| picks), s.explored)
}

/// `{R = n}` is a union of `F_{n-1}`-atoms for every finite `n`, with
/// `F_{-1} = F_0`.
pub fn is_predictable_time(f: &Filtration, times: &[ExtendedTime]) -> bool {
    (0..=f.horizon()).all(|n| {
        let event: Vec<bool> = times.iter().map(|&t| t == ExtendedTime::At(n)).collect();
        f.predictable_level(n).contains_event(&event)
    })
}

/// The four conditions of an equivalence theorem, evaluated separately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    /// Level sets of `Z̃ₙ` and `Zₙ₋₁` coincide for every `n ≥ 1`.
    pub b: bool,
    /// The three hitting times line up.
    pub c: bool,
    /// The third hitting time is predictable.
    pub d: bool,
    /// The measure-change martingale vanishes.
    pub e: bool,
    pub consistent: bool,
}

impl EquivalenceReport {
    fn new(b: bool, c: bool, d: bool, e: bool) -> Self {
        Self {
            b,
            c,
            d,
            e,
            consistent: b == c && c == d && d == e,
        }
    }

    pub fn all_true(&self) -> bool {
        self.b && self.c && self.d && self.e
    }
}

fn sets_equal(a: &[bool], b: &[bool]) -> bool {
    a == b
}

pub fn validate_before_theorem(model: &EnlargedModel) -> Result<EquivalenceReport> {
    let az = &model.azema;
    let horizon = model.horizon();
    let b = (1..=horizon).all(|n| sets_equal(&az.z_tilde_is_zero(n), &az.z_is_zero(n - 1)));
    let r = model.zero_hitting_times();
    let c = (0..model.len())
        .all(|w| r.first[w].succ_within(horizon) == r.second[w] && r.second[w] == r.third[w]);
    let d = is_predictable_time(&model.public, &r.third);
    let e = model.measure_change_before()?.equals_base;
    Ok(EquivalenceReport::new(b, c, d, e))
}

/// The first hitting time of `{Z < 1}` here starts at `n = 0`; see
/// [`one_hitting_times`](crate::random_time::one_hitting_times) for the
/// tabulated version starting at 1.
pub fn validate_after_theorem(model: &EnlargedModel) -> Result<EquivalenceReport> {
    model.require_strictly_honest()?;
    let az = &model.azema;
    let horizon = model.horizon();
    let b = (1..=horizon).all(|n| sets_equal(&az.z_tilde_is_one(n), &az.z_is_one(n - 1)));
    let s = model.one_hitting_times();
    let c = (0..model.len()).all(|w| {
        let first = (0..=horizon)
            .find(|&n| az.z.value(n, w) < &Rational::one())
            .map_or(ExtendedTime::Infinity, ExtendedTime::At);
        first.succ_within(horizon) == s.second[w] && s.second[w] == s.third[w]
    });
    let d = is_predictable_time(&model.public, &s.third);
    let e = model.measure_change_after()?.equals_base;
    Ok(EquivalenceReport::new(b, c, d, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReverseReport {
    /// NA of the insider market (`X^τ` or `X − X^τ` under `G`).
    pub insider: NaVerdict,
    /// NA of the truncated process under `F`.
    pub public: NaVerdict,
    pub agree: bool,
}

pub fn validate_reverse_before(model: &EnlargedModel, x: &Process) -> Result<ReverseReport> {
    model.public.check_adapted(x)?;
    let insider = na_check(&model.space, &model.insider, &model.stopped(x))?;
    let public = na_check(&model.space, &model.public, &model.truncate_before(x))?;
    Ok(ReverseReport {
        agree: insider.holds == public.holds,
        insider,
        public,
    })
}

pub fn validate_reverse_after(model: &EnlargedModel, x: &Process) -> Result<ReverseReport> {
    model.require_strictly_honest()?;
    model.public.check_adapted(x)?;
    let insider = na_check(&model.space, &model.insider, &model.after(x))?;
    let public = na_check(&model.space, &model.public, &model.truncate_after(x))?;
    Ok(ReverseReport {
        agree: insider.holds == public.holds,
        insider,
        public,
    })
}

/// `V − Ṽ` for `Vₙ = 1_{R₃ > n}`, with `Ṽ` the `F`-compensator of `V`.
/// Its stopped version never decreases under `G`.
pub fn before_counter_martingale(model: &EnlargedModel) -> Process {
    let r3 = model.zero_hitting_times().third;
    let v = Process::from_fn(model.horizon(), model.len(), |n, w| {
        indicator(r3[w] > ExtendedTime::At(n))
    });
    compensate(model, &v)
}

/// `Mₙ = Σ_{k ≤ n} (1_{Z̃ₖ=1} − P[Z̃ₖ=1 | Fₖ₋₁])`. After `τ` it only
/// decreases, predictably.
pub fn after_counter_martingale(model: &EnlargedModel) -> Process {
    let mut inc = vec![vec![Rational::zero(); model.len()]];
    for k in 1..=model.horizon() {
        let full = model.azema.z_tilde_is_one(k);
        let p = model.cond_prob(&full, k - 1);
        inc.push(full.iter().zip(&p).map(|(&e, p)| indicator(e) - p).collect());
    }
    Process::from_increments(vec![Rational::zero(); model.len()], &inc)
}

fn compensate(model: &EnlargedModel, v: &Process) -> Process {
    let mut inc = vec![vec![Rational::zero(); model.len()]];
    for k in 1..=model.horizon() {
        let expected = model.cond_exp(v.at(k), k - 1);
        inc.push(v.at(k).iter().zip(&expected).map(|(a, e)| a - e).collect());
    }
    Process::from_increments(v.at(0).to_vec(), &inc)
}

/// Result of the negative-direction construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterExample {
    pub martingale: Process,
    pub market: Process,
    pub verdict: NaVerdict,
}

impl CounterExample {
    /// The martingale is an `F`-martingale, its insider market fails NA, and
    /// the reported strategy really is an arbitrage.
    pub fn succeeded(&self, model: &EnlargedModel) -> bool {
        let is_mart = matches!(
            model.public.is_martingale(&model.space, &self.martingale),
            Ok(MartingaleVerdict::Martingale)
        );
        let sound = self
            .verdict
            .strategy
            .as_ref()
            .is_some_and(|h| model.insider.check_predictable(h).is_ok() && h.is_arbitrage_for(&self.market));
        is_mart && !self.verdict.holds && sound
    }
}

pub fn before_counterexample(model: &EnlargedModel) -> Result<CounterExample> {
    let martingale = before_counter_martingale(model);
    let market = stop_at(&martingale, &model.tau);
    let verdict = na_check(&model.space, &model.insider, &market)?;
    Ok(CounterExample {
        martingale,
        market,
        verdict,
    })
}

pub fn after_counterexample(model: &EnlargedModel) -> Result<CounterExample> {
    let martingale = after_counter_martingale(model);
    let market = model.after(&martingale);
    let verdict = na_check(&model.space, &model.insider, &market)?;
    Ok(CounterExample {
        martingale,
        market,
        verdict,
    })
}
