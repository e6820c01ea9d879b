//! Random times, the progressively enlarged filtration and the Azéma
//! supermartingales.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::space::{Filtration, Partition, Process, SampleSpace};

/// A time in `{0, …, N}` or `+∞` (an empty infimum).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedTime {
    At(usize),
    Infinity,
}

impl ExtendedTime {
    pub fn finite(self) -> Option<usize> {
        match self {
            ExtendedTime::At(n) => Some(n),
            ExtendedTime::Infinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedTime::At(_))
    }

    /// `self + 1`, sent to `+∞` past the horizon.
    pub fn succ_within(self, horizon: usize) -> ExtendedTime {
        match self {
            ExtendedTime::At(n) if n < horizon => ExtendedTime::At(n + 1),
            _ => ExtendedTime::Infinity,
        }
    }

    fn first(times: impl IntoIterator<Item = usize>, hit: impl Fn(usize) -> bool) -> Self {
        times
            .into_iter()
            .find(|&n| hit(n))
            .map_or(ExtendedTime::Infinity, ExtendedTime::At)
    }
}

impl fmt::Display for ExtendedTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedTime::At(n) => write!(f, "{n}"),
            ExtendedTime::Infinity => f.write_str("+inf"),
        }
    }
}

/// Anything that assigns a (possibly infinite) time to each outcome.
pub trait TimeMap {
    /// `None` means never.
    fn time_at(&self, outcome: usize) -> Option<usize>;
}

impl TimeMap for [ExtendedTime] {
    fn time_at(&self, outcome: usize) -> Option<usize> {
        self[outcome].finite()
    }
}

impl TimeMap for Vec<ExtendedTime> {
    fn time_at(&self, outcome: usize) -> Option<usize> {
        self[outcome].finite()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomTime {
    values: Vec<usize>,
    horizon: usize,
}

impl RandomTime {
    pub fn new(space: &SampleSpace, values: Vec<usize>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Shape(format!(
                "random time has {} values for {} outcomes",
                values.len(),
                space.len()
            )));
        }
        if let Some(outcome) = values.iter().position(|&v| v > space.horizon()) {
            return Err(Error::RandomTimeRange {
                outcome,
                value: values[outcome],
                horizon: space.horizon(),
            });
        }
        Ok(Self {
            values,
            horizon: space.horizon(),
        })
    }

    /// Values past the horizon are kept as `N + 1`, which behaves as
    /// "not yet occurred" at every time of the model.
    pub fn allowing_beyond_horizon(space: &SampleSpace, values: Vec<usize>) -> Result<Self> {
        let mut tau = Self::new(space, vec![0; values.len()])?;
        tau.values = values.into_iter().map(|v| v.min(space.horizon() + 1)).collect();
        Ok(tau)
    }

    pub fn constant(space: &SampleSpace, value: usize) -> Result<Self> {
        Self::new(space, vec![value; space.len()])
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, outcome: usize) -> usize {
        self.values[outcome]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn exceeds_horizon(&self) -> bool {
        self.values.iter().any(|&v| v > self.horizon)
    }

    pub fn event(&self, pred: impl Fn(usize) -> bool) -> Vec<bool> {
        self.values.iter().map(|&v| pred(v)).collect()
    }

    /// `{τ = n} ∈ Fₙ` for every `n`.
    pub fn is_stopping_time(&self, filtration: &Filtration) -> bool {
        (0..=self.horizon).all(|n| {
            filtration
                .level(n)
                .contains_event(&self.event(|v| v == n))
        })
    }
}

impl TimeMap for RandomTime {
    fn time_at(&self, outcome: usize) -> Option<usize> {
        Some(self.values[outcome])
    }
}

/// `Zₙ = P[τ > n | Fₙ]` and `Z̃ₙ = P[τ ≥ n | Fₙ]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AzemaPair {
    pub z: Process,
    pub z_tilde: Process,
}

impl AzemaPair {
    pub fn horizon(&self) -> usize {
        self.z.horizon()
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    fn test(row: &[Rational], pred: impl Fn(&Rational) -> bool) -> Vec<bool> {
        row.iter().map(pred).collect()
    }

    pub fn z_is_zero(&self, time: usize) -> Vec<bool> {
        Self::test(self.z.at(time), Zero::is_zero)
    }

    pub fn z_is_one(&self, time: usize) -> Vec<bool> {
        Self::test(self.z.at(time), One::is_one)
    }

    pub fn z_tilde_is_zero(&self, time: usize) -> Vec<bool> {
        Self::test(self.z_tilde.at(time), Zero::is_zero)
    }

    pub fn z_tilde_is_one(&self, time: usize) -> Vec<bool> {
        Self::test(self.z_tilde.at(time), One::is_one)
    }
}

pub fn azema_supermartingales(
    space: &SampleSpace,
    filtration: &Filtration,
    tau: &RandomTime,
) -> AzemaPair {
    let n_max = filtration.horizon();
    let z = (0..=n_max)
        .map(|n| filtration.conditional_probability(space, &tau.event(|t| t > n), n))
        .collect();
    let z_tilde = (0..=n_max)
        .map(|n| filtration.conditional_probability(space, &tau.event(|t| t >= n), n))
        .collect();
    AzemaPair {
        z: Process::new(z).expect("horizon ≥ 1"),
        z_tilde: Process::new(z_tilde).expect("horizon ≥ 1"),
    }
}

/// `Z = m − A` with `Aₙ = Σ_{k ≤ n} P[τ = k | F_k]`; `m` is checked to be
/// an `F`-martingale.
pub fn m_a_decomposition(
    space: &SampleSpace,
    filtration: &Filtration,
    tau: &RandomTime,
) -> Result<(Process, Process)> {
    let azema = azema_supermartingales(space, filtration, tau);
    let jumps = dual_optional_increments(&azema);
    let mut a_rows: Vec<Vec<Rational>> = Vec::new();
    for n in 0..=filtration.horizon() {
        let row = match a_rows.last() {
            Some(prev) => prev.iter().zip(jumps.at(n)).map(|(a, j)| a + j).collect(),
            None => jumps.at(0).to_vec(),
        };
        a_rows.push(row);
    }
    let a = Process::new(a_rows)?;
    let m = &azema.z + &a;
    if let crate::space::MartingaleVerdict::Violated { time, atom, .. } =
        filtration.is_martingale(space, &m)?
    {
        return Err(Error::Invariant(format!(
            "m = Z + A has drift at time {time} on atom {atom:?}"
        )));
    }
    Ok((m, a))
}

/// `Z̃ₙ − Zₙ = P[τ = n | Fₙ]` for every `n ≥ 0`.
pub fn dual_optional_increments(azema: &AzemaPair) -> Process {
    &azema.z_tilde - &azema.z
}

/// `Gₙ` is generated by `Fₙ` and the events `{τ = k}`, `k ≤ n`.
pub fn progressive_enlargement(
    space: &SampleSpace,
    filtration: &Filtration,
    tau: &RandomTime,
) -> Filtration {
    let levels = (0..=filtration.horizon())
        .map(|n| {
            let split = Partition::from_key(space.len(), |w| {
                let t = tau.value(w);
                (t <= n).then_some(t)
            });
            filtration.level(n).meet(&split)
        })
        .collect();
    Filtration::from_partitions(space, levels).expect("meets of a refining chain refine")
}

/// Three hitting times, each per outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoppingTriple {
    pub first: Vec<ExtendedTime>,
    pub second: Vec<ExtendedTime>,
    pub third: Vec<ExtendedTime>,
}

/// `R₁ = inf{n ≥ 0 : Zₙ = 0}`, `R₂ = inf{n ≥ 1 : Zₙ₋₁ = 0}`,
/// `R₃ = inf{n ≥ 0 : Z̃ₙ = 0}`.
pub fn zero_hitting_times(azema: &AzemaPair) -> StoppingTriple {
    let n_max = azema.horizon();
    let per = |f: &dyn Fn(usize) -> ExtendedTime| (0..azema.len()).map(f).collect();
    StoppingTriple {
        first: per(&|w| ExtendedTime::first(0..=n_max, |n| azema.z.value(n, w).is_zero())),
        second: per(&|w| ExtendedTime::first(1..=n_max, |n| azema.z.value(n - 1, w).is_zero())),
        third: per(&|w| ExtendedTime::first(0..=n_max, |n| azema.z_tilde.value(n, w).is_zero())),
    }
}

/// `σ₁ = inf{n ≥ 1 : Zₙ < 1}`, `σ₂ = inf{n ≥ 1 : Zₙ₋₁ < 1}`,
/// `σ₃ = inf{n ≥ 1 : Z̃ₙ < 1}`.
pub fn one_hitting_times(azema: &AzemaPair) -> StoppingTriple {
    let n_max = azema.horizon();
    let below = |v: &Rational| v < &Rational::one();
    let per = |f: &dyn Fn(usize) -> ExtendedTime| (0..azema.len()).map(f).collect();
    StoppingTriple {
        first: per(&|w| ExtendedTime::first(1..=n_max, |n| below(azema.z.value(n, w)))),
        second: per(&|w| ExtendedTime::first(1..=n_max, |n| below(azema.z.value(n - 1, w)))),
        third: per(&|w| ExtendedTime::first(1..=n_max, |n| below(azema.z_tilde.value(n, w)))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Honesty {
    /// `witness[n][ω]` is the `Fₙ`-measurable value `τₙ(ω)`.
    Honest { witness: Vec<Vec<usize>> },
    NotHonest { time: usize, atom: Vec<usize> },
}

impl Honesty {
    pub fn is_honest(&self) -> bool {
        matches!(self, Honesty::Honest { .. })
    }
}

/// For each `n`, `τ` agrees on `{τ < n}` with an `Fₙ`-measurable variable.
pub fn is_honest(filtration: &Filtration, tau: &RandomTime) -> Honesty {
    honesty(filtration, tau, |t, n| t < n)
}

/// For each `n`, `τ` agrees on `{τ ≤ n}` with an `Fₙ`-measurable variable,
/// i.e. `τ` is the end of an optional set. Everything after `τ` uses this.
pub fn is_honest_strict(filtration: &Filtration, tau: &RandomTime) -> Honesty {
    honesty(filtration, tau, |t, n| t <= n)
}

fn honesty(filtration: &Filtration, tau: &RandomTime, known: impl Fn(usize, usize) -> bool) -> Honesty {
    let mut witness = Vec::new();
    for n in 0..=filtration.horizon() {
        let mut row = vec![0; tau.len()];
        for atom in filtration.level(n).atoms() {
            let mut seen = None;
            for &w in atom {
                let t = tau.value(w);
                if !known(t, n) {
                    continue;
                }
                match seen {
                    None => seen = Some(t),
                    Some(s) if s != t => {
                        return Honesty::NotHonest {
                            time: n,
                            atom: atom.clone(),
                        }
                    }
                    Some(_) => {}
                }
            }
            for &w in atom {
                row[w] = seen.unwrap_or(0);
            }
        }
        witness.push(row);
    }
    Honesty::Honest { witness }
}

/// `Xₙ^T = X_{n ∧ T}` per outcome.
pub fn stop_at<T: TimeMap + ?Sized>(process: &Process, time: &T) -> Process {
    Process::from_fn(process.horizon(), process.len(), |n, w| {
        let m = time.time_at(w).map_or(n, |t| t.min(n));
        process.value(m, w).clone()
    })
}

/// `X − X^τ`: only the increments strictly after `τ`.
pub fn after_part<T: TimeMap + ?Sized>(process: &Process, time: &T) -> Process {
    process - &stop_at(process, time)
}

/// The public filtration, a random time and everything derived from them.
#[derive(Debug, Clone)]
pub struct EnlargedModel {
    pub space: SampleSpace,
    pub public: Filtration,
    pub tau: RandomTime,
    pub insider: Filtration,
    pub azema: AzemaPair,
}

impl EnlargedModel {
    pub fn new(space: SampleSpace, public: Filtration, tau: RandomTime) -> Result<Self> {
        if public.horizon() != space.horizon() || tau.len() != space.len() {
            return Err(Error::Shape(
                "filtration, random time and space disagree in size".into(),
            ));
        }
        let insider = progressive_enlargement(&space, &public, &tau);
        let azema = azema_supermartingales(&space, &public, &tau);
        Ok(Self {
            space,
            public,
            tau,
            insider,
            azema,
        })
    }

    pub fn horizon(&self) -> usize {
        self.space.horizon()
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn honesty(&self) -> Honesty {
        is_honest(&self.public, &self.tau)
    }

    pub fn strict_honesty(&self) -> Honesty {
        is_honest_strict(&self.public, &self.tau)
    }

    pub(crate) fn require_strictly_honest(&self) -> Result<()> {
        match self.strict_honesty() {
            Honesty::Honest { .. } => Ok(()),
            Honesty::NotHonest { time, atom } => Err(Error::NotHonest { time, atom }),
        }
    }

    pub fn zero_hitting_times(&self) -> StoppingTriple {
        zero_hitting_times(&self.azema)
    }

    pub fn one_hitting_times(&self) -> StoppingTriple {
        one_hitting_times(&self.azema)
    }

    pub fn m_a_decomposition(&self) -> Result<(Process, Process)> {
        m_a_decomposition(&self.space, &self.public, &self.tau)
    }

    pub fn stopped(&self, process: &Process) -> Process {
        stop_at(process, &self.tau)
    }

    pub fn after(&self, process: &Process) -> Process {
        after_part(process, &self.tau)
    }

    /// `P[event | F_time]`.
    pub fn cond_prob(&self, event: &[bool], time: usize) -> Vec<Rational> {
        self.public.conditional_probability(&self.space, event, time)
    }

    pub fn cond_exp(&self, rv: &[Rational], time: usize) -> Vec<Rational> {
        self.public.conditional_expectation(&self.space, rv, time)
    }

    /// The model under an equivalent measure with the given terminal density.
    pub fn reweighted(&self, density: &crate::space::MeasureDensity) -> Result<EnlargedModel> {
        let space = self.space.apply_density(density)?;
        EnlargedModel::new(space, self.public.clone(), self.tau.clone())
    }
}

pub(crate) fn all_nonnegative(values: &[Rational]) -> bool {
    values.iter().all(|v| !v.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn setup() -> (SampleSpace, Filtration, RandomTime) {
        let space =
            SampleSpace::numbered(vec![rat(1, 9), rat(2, 9), rat(2, 9), rat(4, 9)], 2).unwrap();
        let f = Filtration::new(
            &space,
            vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0, 1], vec![2, 3]],
                vec![vec![0], vec![1], vec![2], vec![3]],
            ],
        )
        .unwrap();
        let tau = RandomTime::new(&space, vec![2, 2, 1, 2]).unwrap();
        (space, f, tau)
    }

    #[test]
    fn enlargement_splits_the_time() {
        let (space, f, tau) = setup();
        let g = progressive_enlargement(&space, &f, &tau);
        assert_eq!(g.level(1).atoms(), &[vec![0, 1], vec![2], vec![3]]);
        assert_eq!(g.atom_of(1, 2).unwrap(), &[2]);
        assert!(tau.is_stopping_time(&g));
        assert!(!tau.is_stopping_time(&f));
        assert!(g.refines(&f));
        let sigma = RandomTime::new(&space, vec![2, 2, 1, 1]).unwrap();
        assert!(sigma.is_stopping_time(&f));
        assert_eq!(progressive_enlargement(&space, &f, &sigma), f);
    }

    #[test]
    fn azema_tables() {
        let (space, f, tau) = setup();
        let az = azema_supermartingales(&space, &f, &tau);
        assert_eq!(az.z.at(1), &[int(1), int(1), rat(2, 3), rat(2, 3)]);
        assert_eq!(az.z.at(2), &vec![int(0); 4][..]);
        assert_eq!(az.z_tilde.at(2), &[int(1), int(1), int(0), int(1)]);
        let (m, a) = m_a_decomposition(&space, &f, &tau).unwrap();
        assert_eq!(a.at(1), &[int(0), int(0), rat(1, 3), rat(1, 3)]);
        assert_eq!(m.at(2), &[int(1), int(1), rat(1, 3), rat(4, 3)]);
        assert!(a.is_nondecreasing());
        assert_eq!(&m - &a, az.z);
    }

    #[test]
    fn terminal_time_has_flat_azema_pair() {
        let (space, f, _) = setup();
        let tau = RandomTime::constant(&space, 2).unwrap();
        let az = azema_supermartingales(&space, &f, &tau);
        assert!(az.z_tilde.values().iter().flatten().all(One::is_one));
        let r = zero_hitting_times(&az);
        assert_eq!(r.first, vec![ExtendedTime::At(2); 4]);
        assert_eq!(r.second, vec![ExtendedTime::Infinity; 4]);
        assert_eq!(r.third, vec![ExtendedTime::Infinity; 4]);
        let s = one_hitting_times(&az);
        assert_eq!(s.first, vec![ExtendedTime::At(2); 4]);
        assert_eq!(s.second, vec![ExtendedTime::Infinity; 4]);
        let (m, a) = m_a_decomposition(&space, &f, &tau).unwrap();
        assert!(m.values().iter().flatten().all(One::is_one));
        assert_eq!(a.at(2), &vec![int(1); 4][..]);
        assert!(a.at(1).iter().all(Zero::is_zero));
    }

    #[test]
    fn hitting_times_of_the_binomial_example() {
        let (space, f, tau) = setup();
        let az = azema_supermartingales(&space, &f, &tau);
        let r = zero_hitting_times(&az);
        use ExtendedTime::{At, Infinity};
        assert_eq!(r.first, vec![At(2); 4]);
        assert_eq!(r.second, vec![Infinity; 4]);
        assert_eq!(r.third, vec![Infinity, Infinity, At(2), Infinity]);
        let s = one_hitting_times(&az);
        assert_eq!(s.first, vec![At(2), At(2), At(1), At(1)]);
        assert_eq!(s.second, vec![Infinity, Infinity, At(2), At(2)]);
        assert_eq!(s.third, vec![Infinity, Infinity, At(2), Infinity]);
        assert_eq!(At(2).succ_within(2), Infinity);
        assert_eq!(At(1).succ_within(2), At(2));
    }

    #[test]
    fn honesty_checks() {
        let (_, f, tau) = setup();
        assert!(is_honest(&f, &tau).is_honest());
        assert!(is_honest_strict(&f, &tau).is_honest());

        let space = SampleSpace::numbered(vec![rat(1, 4); 4], 2).unwrap();
        let coarse = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let f = Filtration::from_partitions(
            &space,
            vec![Partition::trivial(4), coarse.clone(), coarse],
        )
        .unwrap();
        let tau = RandomTime::new(&space, vec![2, 2, 0, 1]).unwrap();
        assert_eq!(
            is_honest(&f, &tau),
            Honesty::NotHonest {
                time: 2,
                atom: vec![2, 3]
            }
        );
        assert!(is_honest(&f, &RandomTime::constant(&space, 1).unwrap()).is_honest());
    }

    #[test]
    fn strict_honesty_is_stronger() {
        let space = SampleSpace::numbered(vec![rat(1, 3); 3], 2).unwrap();
        let f = Filtration::from_partitions(
            &space,
            vec![Partition::trivial(3), Partition::trivial(3), Partition::discrete(3)],
        )
        .unwrap();
        let tau = RandomTime::new(&space, vec![0, 1, 2]).unwrap();
        assert!(is_honest(&f, &tau).is_honest());
        assert!(!is_honest_strict(&f, &tau).is_honest());
    }

    #[test]
    fn stopping_and_after_parts() {
        let (_, _, tau) = setup();
        let s = Process::new(vec![
            vec![int(1); 4],
            vec![int(2), int(2), rat(1, 2), rat(1, 2)],
            vec![int(4), int(1), int(1), rat(1, 4)],
        ])
        .unwrap();
        let stopped = stop_at(&s, &tau);
        assert_eq!(stopped.value(2, 2), &rat(1, 2));
        let after = after_part(&s, &tau);
        assert_eq!(after.at(2), &[int(0), int(0), rat(1, 2), int(0)]);
        let never = vec![ExtendedTime::Infinity; 4];
        assert_eq!(stop_at(&s, &never), s);
    }

    #[test]
    fn beyond_horizon_sentinel() {
        let (space, f, _) = setup();
        let tau = RandomTime::allowing_beyond_horizon(&space, vec![5, 5, 1, 2]).unwrap();
        assert_eq!(tau.values(), &[3, 3, 1, 2]);
        assert!(tau.exceeds_horizon());
        assert!(RandomTime::new(&space, vec![5, 5, 1, 2]).is_err());
        let az = azema_supermartingales(&space, &f, &tau);
        assert_eq!(az.z.at(2), &[int(1), int(1), int(0), int(0)]);
        assert!(m_a_decomposition(&space, &f, &tau).is_ok());
    }
}
