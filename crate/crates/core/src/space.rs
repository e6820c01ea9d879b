//! Finite filtered probability spaces.
//!
//! Outcomes are addressed by index everywhere; names only matter at the
//! edges. A process stores one value per (time, outcome) and is checked
//! against a filtration when it is used, so the same process can be tested
//! for adaptedness under both the public and the enlarged filtration.

use std::collections::HashSet;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    outcomes: Vec<String>,
    weights: Vec<Rational>,
    horizon: usize,
}

impl SampleSpace {
    pub fn new(outcomes: Vec<String>, weights: Vec<Rational>, horizon: usize) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptySpace);
        }
        if horizon == 0 {
            return Err(Error::ZeroHorizon);
        }
        if weights.len() != outcomes.len() {
            return Err(Error::WeightCount {
                expected: outcomes.len(),
                found: weights.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &outcomes {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateOutcome(name.clone()));
            }
        }
        for (name, weight) in outcomes.iter().zip(&weights) {
            if !weight.is_positive() {
                return Err(Error::NonPositiveWeight {
                    outcome: name.clone(),
                    weight: format_rational(weight),
                });
            }
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(Error::WeightsNotNormalized {
                sum: format_rational(&sum),
            });
        }
        Ok(Self {
            outcomes,
            weights,
            horizon,
        })
    }

    /// Outcomes named `ω1, ω2, …` with the given weights.
    pub fn numbered(weights: Vec<Rational>, horizon: usize) -> Result<Self> {
        let names = (1..=weights.len()).map(|i| format!("ω{i}")).collect();
        Self::new(names, weights, horizon)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, outcome: usize) -> &Rational {
        &self.weights[outcome]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| Error::UnknownOutcome(name.to_string()))
    }

    pub fn mass(&self, set: &[usize]) -> Rational {
        set.iter().map(|&w| &self.weights[w]).sum()
    }

    pub fn expectation(&self, rv: &[Rational]) -> Rational {
        self.weights.iter().zip(rv).map(|(p, x)| p * x).sum()
    }

    /// The same outcomes reweighted by `ℙ(ω)·density(ω)`.
    pub fn apply_density(&self, density: &MeasureDensity) -> Result<SampleSpace> {
        if density.len() != self.len() {
            return Err(Error::Shape(format!(
                "density has {} entries for {} outcomes",
                density.len(),
                self.len()
            )));
        }
        let weights = self
            .weights
            .iter()
            .zip(density.values())
            .map(|(p, d)| p * d)
            .collect();
        SampleSpace::new(self.outcomes.clone(), weights, self.horizon)
    }
}

/// A partition of `{0, …, len-1}`. Atoms are sorted and ordered by their
/// smallest member, so equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    atoms: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl Partition {
    pub fn new(len: usize, atoms: Vec<Vec<usize>>) -> std::result::Result<Self, String> {
        let mut owner = vec![usize::MAX; len];
        for (a, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err("empty atom".into());
            }
            for &w in atom {
                if w >= len {
                    return Err(format!("outcome index {w} out of range"));
                }
                if owner[w] != usize::MAX {
                    return Err(format!("outcome {w} appears in two atoms"));
                }
                owner[w] = a;
            }
        }
        if let Some(w) = owner.iter().position(|&a| a == usize::MAX) {
            return Err(format!("outcome {w} is not covered"));
        }
        Ok(Self::canonical(atoms))
    }

    fn canonical(mut atoms: Vec<Vec<usize>>) -> Self {
        let len = atoms.iter().map(Vec::len).sum();
        for atom in &mut atoms {
            atom.sort_unstable();
        }
        atoms.sort_unstable_by_key(|atom| atom[0]);
        let mut owner = vec![0; len];
        for (a, atom) in atoms.iter().enumerate() {
            for &w in atom {
                owner[w] = a;
            }
        }
        Self { atoms, owner }
    }

    /// Groups outcomes with equal keys.
    pub fn from_key<K: Eq + std::hash::Hash>(len: usize, key: impl Fn(usize) -> K) -> Self {
        let mut index = std::collections::HashMap::new();
        let mut atoms: Vec<Vec<usize>> = Vec::new();
        for w in 0..len {
            let slot = *index.entry(key(w)).or_insert_with(|| {
                atoms.push(Vec::new());
                atoms.len() - 1
            });
            atoms[slot].push(w);
        }
        Self::canonical(atoms)
    }

    pub fn trivial(len: usize) -> Self {
        Self::canonical(vec![(0..len).collect()])
    }

    pub fn discrete(len: usize) -> Self {
        Self::canonical((0..len).map(|w| vec![w]).collect())
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn atom_index(&self, outcome: usize) -> usize {
        self.owner[outcome]
    }

    pub fn atom_of(&self, outcome: usize) -> &[usize] {
        &self.atoms[self.owner[outcome]]
    }

    /// True when every atom of `self` lies inside one atom of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.offending_atom(coarser).is_none()
    }

    fn offending_atom(&self, coarser: &Partition) -> Option<&[usize]> {
        self.atoms
            .iter()
            .find(|atom| atom.iter().any(|&w| coarser.owner[w] != coarser.owner[atom[0]]))
            .map(Vec::as_slice)
    }

    /// The coarsest common refinement.
    pub fn meet(&self, other: &Partition) -> Partition {
        Partition::from_key(self.len(), |w| (self.owner[w], other.owner[w]))
    }

    pub fn is_measurable(&self, rv: &[Rational]) -> bool {
        self.non_constant_atom(rv).is_none()
    }

    /// First atom on which `rv` is not constant.
    pub fn non_constant_atom(&self, rv: &[Rational]) -> Option<&[usize]> {
        self.atoms
            .iter()
            .find(|atom| atom.iter().any(|&w| rv[w] != rv[atom[0]]))
            .map(Vec::as_slice)
    }

    /// Is the set a union of atoms?
    pub fn contains_event(&self, event: &[bool]) -> bool {
        self.atoms
            .iter()
            .all(|atom| atom.iter().all(|&w| event[w] == event[atom[0]]))
    }

    pub fn conditional_expectation(&self, space: &SampleSpace, rv: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.len()];
        for atom in &self.atoms {
            let mut num = Rational::zero();
            let mut mass = Rational::zero();
            for &w in atom {
                num += space.weight(w) * &rv[w];
                mass += space.weight(w);
            }
            let value = num / mass;
            for &w in atom {
                out[w] = value.clone();
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MartingaleVerdict {
    Martingale,
    Violated {
        time: usize,
        atom: Vec<usize>,
        drift: Rational,
    },
}

impl MartingaleVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, MartingaleVerdict::Martingale)
    }
}

/// Refining partitions `F₀ ⊆ F₁ ⊆ … ⊆ F_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    levels: Vec<Partition>,
}

impl Filtration {
    /// `partitions[n]` lists the atoms of level `n` as outcome indices.
    pub fn new(space: &SampleSpace, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let levels = partitions
            .into_iter()
            .enumerate()
            .map(|(time, atoms)| {
                Partition::new(space.len(), atoms)
                    .map_err(|reason| Error::NotAPartition { time, reason })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_partitions(space, levels)
    }

    pub fn from_partitions(space: &SampleSpace, levels: Vec<Partition>) -> Result<Self> {
        if levels.len() != space.horizon() + 1 {
            return Err(Error::LevelCount {
                expected: space.horizon() + 1,
                found: levels.len(),
            });
        }
        for (time, level) in levels.iter().enumerate() {
            if level.len() != space.len() {
                return Err(Error::NotAPartition {
                    time,
                    reason: format!("covers {} outcomes, expected {}", level.len(), space.len()),
                });
            }
        }
        for n in 1..levels.len() {
            if let Some(atom) = levels[n].offending_atom(&levels[n - 1]) {
                return Err(Error::RefinementViolated {
                    coarser: n - 1,
                    finer: n,
                    atom: atom.to_vec(),
                });
            }
        }
        Ok(Self { levels })
    }

    pub fn constant(space: &SampleSpace, level: Partition) -> Result<Self> {
        Self::from_partitions(space, vec![level; space.horizon() + 1])
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    pub fn level(&self, time: usize) -> &Partition {
        &self.levels[time]
    }

    /// `F_{n-1}`, reading `F_{-1}` as `F_0`.
    pub fn predictable_level(&self, time: usize) -> &Partition {
        &self.levels[time.saturating_sub(1)]
    }

    pub fn atom_of(&self, time: usize, outcome: usize) -> Result<&[usize]> {
        if time > self.horizon() {
            return Err(Error::TimeOutOfRange {
                time,
                horizon: self.horizon(),
            });
        }
        if outcome >= self.levels[time].len() {
            return Err(Error::OutcomeOutOfRange {
                index: outcome,
                len: self.levels[time].len(),
            });
        }
        Ok(self.levels[time].atom_of(outcome))
    }

    pub fn refines(&self, coarser: &Filtration) -> bool {
        self.levels
            .iter()
            .zip(&coarser.levels)
            .all(|(fine, coarse)| fine.refines(coarse))
    }

    pub fn conditional_expectation(
        &self,
        space: &SampleSpace,
        rv: &[Rational],
        time: usize,
    ) -> Vec<Rational> {
        self.levels[time].conditional_expectation(space, rv)
    }

    /// `P[event | F_time]` per outcome.
    pub fn conditional_probability(
        &self,
        space: &SampleSpace,
        event: &[bool],
        time: usize,
    ) -> Vec<Rational> {
        let rv: Vec<Rational> = event.iter().map(|&e| crate::rational::indicator(e)).collect();
        self.conditional_expectation(space, &rv, time)
    }

    pub fn check_adapted(&self, process: &Process) -> Result<()> {
        self.check_shape(process.horizon(), process.len())?;
        for (time, level) in self.levels.iter().enumerate() {
            if let Some(atom) = level.non_constant_atom(process.at(time)) {
                return Err(Error::NotAdapted {
                    time,
                    atom: atom.to_vec(),
                });
            }
        }
        Ok(())
    }

    pub fn is_adapted(&self, process: &Process) -> bool {
        self.check_adapted(process).is_ok()
    }

    pub fn check_predictable(&self, strategy: &Strategy) -> Result<()> {
        self.check_shape(strategy.horizon(), strategy.len())?;
        for time in 1..=self.horizon() {
            if let Some(atom) = self.levels[time - 1].non_constant_atom(strategy.holding(time)) {
                return Err(Error::NotPredictable {
                    time,
                    atom: atom.to_vec(),
                });
            }
        }
        Ok(())
    }

    fn check_shape(&self, horizon: usize, len: usize) -> Result<()> {
        if horizon != self.horizon() || len != self.levels[0].len() {
            return Err(Error::Shape(format!(
                "object spans {} times × {} outcomes, filtration {} × {}",
                horizon + 1,
                len,
                self.horizon() + 1,
                self.levels[0].len()
            )));
        }
        Ok(())
    }

    /// Checks `E[ΔXₙ | F_{n-1}] = 0` for every `n ≥ 1`; the witness is the
    /// earliest time and first atom with nonzero drift.
    pub fn is_martingale(&self, space: &SampleSpace, process: &Process) -> Result<MartingaleVerdict> {
        self.check_adapted(process)?;
        for time in 1..=self.horizon() {
            let delta = process.increment(time);
            let level = &self.levels[time - 1];
            for atom in level.atoms() {
                let drift: Rational = atom.iter().map(|&w| space.weight(w) * &delta[w]).sum();
                if !drift.is_zero() {
                    return Ok(MartingaleVerdict::Violated {
                        time,
                        atom: atom.clone(),
                        drift: drift / space.mass(atom),
                    });
                }
            }
        }
        Ok(MartingaleVerdict::Martingale)
    }
}

/// Values indexed `[time][outcome]` for `time ∈ 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process {
    values: Vec<Vec<Rational>>,
}

impl Process {
    pub fn new(values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Shape("a process needs at least times 0 and 1".into()));
        }
        let len = values[0].len();
        if len == 0 || values.iter().any(|row| row.len() != len) {
            return Err(Error::Shape("ragged or empty value table".into()));
        }
        Ok(Self { values })
    }

    pub fn from_fn(horizon: usize, len: usize, f: impl Fn(usize, usize) -> Rational) -> Self {
        Self {
            values: (0..=horizon)
                .map(|n| (0..len).map(|w| f(n, w)).collect())
                .collect(),
        }
    }

    pub fn zeros(horizon: usize, len: usize) -> Self {
        Self::constant(horizon, len, Rational::zero())
    }

    pub fn constant(horizon: usize, len: usize, value: Rational) -> Self {
        Self {
            values: vec![vec![value; len]; horizon + 1],
        }
    }

    /// Cumulates `initial` and `increments[n]` for `n ≥ 1`; `increments[0]`
    /// is ignored.
    pub fn from_increments(initial: Vec<Rational>, increments: &[Vec<Rational>]) -> Self {
        let mut values = vec![initial];
        for delta in &increments[1..] {
            let prev = values.last().unwrap();
            values.push(prev.iter().zip(delta).map(|(a, b)| a + b).collect());
        }
        Self { values }
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.values[0].is_empty()
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn at(&self, time: usize) -> &[Rational] {
        &self.values[time]
    }

    pub fn value(&self, time: usize, outcome: usize) -> &Rational {
        &self.values[time][outcome]
    }

    pub fn terminal(&self) -> &[Rational] {
        &self.values[self.horizon()]
    }

    /// `ΔXₙ = Xₙ − Xₙ₋₁`, for `time ≥ 1`.
    pub fn increment(&self, time: usize) -> Vec<Rational> {
        self.values[time]
            .iter()
            .zip(&self.values[time - 1])
            .map(|(a, b)| a - b)
            .collect()
    }

    /// Increments indexed by time; entry 0 is all zeros.
    pub fn increments(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.len()]];
        out.extend((1..=self.horizon()).map(|n| self.increment(n)));
        out
    }

    /// `ℰ(X)ₙ = Π_{k ≤ n} (1 + ΔXₖ)`, starting from 1.
    pub fn stochastic_exponential(&self) -> Process {
        let mut values = vec![vec![Rational::one(); self.len()]];
        for n in 1..=self.horizon() {
            let delta = self.increment(n);
            let prev = &values[n - 1];
            let next = prev
                .iter()
                .zip(&delta)
                .map(|(e, d)| e * (Rational::one() + d))
                .collect();
            values.push(next);
        }
        Process { values }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(Zero::is_zero)
    }

    pub fn is_nondecreasing(&self) -> bool {
        (1..=self.horizon()).all(|n| self.increment(n).iter().all(|d| !d.is_negative()))
    }

    /// Pointwise product.
    pub fn times(&self, other: &Process) -> Process {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Process {
        Process {
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(&f).collect())
                .collect(),
        }
    }

    fn zip_with(&self, other: &Process, f: impl Fn(&Rational, &Rational) -> Rational) -> Process {
        assert_eq!(
            (self.horizon(), self.len()),
            (other.horizon(), other.len()),
            "process shapes differ"
        );
        Process {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
                .collect(),
        }
    }
}

impl Add for &Process {
    type Output = Process;
    fn add(self, rhs: &Process) -> Process {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Process {
    type Output = Process;
    fn sub(self, rhs: &Process) -> Process {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Process {
    type Output = Process;
    fn neg(self) -> Process {
        self.map(|v| -v)
    }
}

/// Holdings `H₁, …, H_N`; `H_n` is chosen with time `n-1` information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    holdings: Vec<Vec<Rational>>,
}

impl Strategy {
    pub fn zeros(horizon: usize, len: usize) -> Self {
        Self {
            holdings: vec![vec![Rational::zero(); len]; horizon],
        }
    }

    /// `holdings[n-1]` is `Hₙ`.
    pub fn new(holdings: Vec<Vec<Rational>>) -> Result<Self> {
        if holdings.is_empty() {
            return Err(Error::Shape("a strategy needs at least one period".into()));
        }
        let len = holdings[0].len();
        if len == 0 || holdings.iter().any(|row| row.len() != len) {
            return Err(Error::Shape("ragged or empty holdings table".into()));
        }
        Ok(Self { holdings })
    }

    pub fn horizon(&self) -> usize {
        self.holdings.len()
    }

    pub fn len(&self) -> usize {
        self.holdings[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.holdings[0].is_empty()
    }

    pub fn holding(&self, time: usize) -> &[Rational] {
        &self.holdings[time - 1]
    }

    pub fn holdings(&self) -> &[Vec<Rational>] {
        &self.holdings
    }

    pub fn set_on(&mut self, time: usize, atom: &[usize], value: &Rational) {
        for &w in atom {
            self.holdings[time - 1][w] = value.clone();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.holdings.iter().flatten().all(Zero::is_zero)
    }

    /// Terminal gains `Σₙ Hₙ·ΔXₙ` per outcome.
    pub fn gains(&self, process: &Process) -> Vec<Rational> {
        self.gains_process(process).terminal().to_vec()
    }

    pub fn gains_process(&self, process: &Process) -> Process {
        assert_eq!(
            (self.horizon(), self.len()),
            (process.horizon(), process.len()),
            "strategy and process shapes differ"
        );
        let mut values = vec![vec![Rational::zero(); self.len()]];
        for n in 1..=self.horizon() {
            let delta = process.increment(n);
            let prev = &values[n - 1];
            let next = prev
                .iter()
                .zip(self.holding(n))
                .zip(&delta)
                .map(|((g, h), d)| g + h * d)
                .collect();
            values.push(next);
        }
        Process { values }
    }

    /// Nonnegative everywhere and positive somewhere.
    pub fn is_arbitrage_for(&self, process: &Process) -> bool {
        let gains = self.gains(process);
        gains.iter().all(|g| !g.is_negative()) && gains.iter().any(Signed::is_positive)
    }
}

/// A terminal Radon–Nikodym density: strictly positive with unit mean.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureDensity {
    values: Vec<Rational>,
}

impl MeasureDensity {
    pub fn new(space: &SampleSpace, values: Vec<Rational>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Shape(format!(
                "density has {} entries for {} outcomes",
                values.len(),
                space.len()
            )));
        }
        if let Some(outcome) = values.iter().position(|v| !v.is_positive()) {
            return Err(Error::NonPositiveDensity { outcome });
        }
        let mean = space.expectation(&values);
        if !mean.is_one() {
            return Err(Error::DensityMean {
                mean: format_rational(&mean),
            });
        }
        Ok(Self { values })
    }

    pub fn identity(len: usize) -> Self {
        Self {
            values: vec![Rational::one(); len],
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().all(One::is_one)
    }

    pub fn max(&self) -> &Rational {
        self.values.iter().max().expect("density is non-empty")
    }

    pub fn min(&self) -> &Rational {
        self.values.iter().min().expect("density is non-empty")
    }

    pub fn is_measurable(&self, level: &Partition) -> bool {
        level.is_measurable(&self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn example_space() -> SampleSpace {
        SampleSpace::numbered(vec![rat(1, 9), rat(2, 9), rat(2, 9), rat(4, 9)], 2).unwrap()
    }

    fn example_filtration(space: &SampleSpace) -> Filtration {
        Filtration::new(
            space,
            vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0, 1], vec![2, 3]],
                vec![vec![0], vec![1], vec![2], vec![3]],
            ],
        )
        .unwrap()
    }

    fn binomial_price() -> Process {
        Process::new(vec![
            vec![int(1); 4],
            vec![int(2), int(2), rat(1, 2), rat(1, 2)],
            vec![int(4), int(1), int(1), rat(1, 4)],
        ])
        .unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(SampleSpace::numbered(vec![rat(1, 2), rat(1, 2), int(0)], 1).is_err());
        assert!(matches!(
            SampleSpace::numbered(vec![rat(1, 2), rat(1, 3)], 1),
            Err(Error::WeightsNotNormalized { .. })
        ));
        assert!(matches!(
            SampleSpace::new(vec!["a".into(), "a".into()], vec![rat(1, 2), rat(1, 2)], 1),
            Err(Error::DuplicateOutcome(_))
        ));
        assert!(matches!(
            SampleSpace::numbered(vec![int(1)], 0),
            Err(Error::ZeroHorizon)
        ));
        assert_eq!(example_space().len(), 4);
    }

    #[test]
    fn filtration_validation() {
        let space = example_space();
        let f = example_filtration(&space);
        assert_eq!(f.atom_of(1, 2).unwrap(), &[2, 3]);
        assert_eq!(f.atom_of(0, 3).unwrap(), &[0, 1, 2, 3]);
        assert!(f.atom_of(3, 0).is_err());

        let reversed = Filtration::new(
            &space,
            vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0], vec![1], vec![2], vec![3]],
                vec![vec![0, 1, 2, 3]],
            ],
        );
        assert!(matches!(
            reversed,
            Err(Error::RefinementViolated {
                coarser: 1,
                finer: 2,
                ..
            })
        ));
        let overlapping = Filtration::new(
            &space,
            vec![vec![vec![0, 1, 2, 3]], vec![vec![0, 1], vec![1, 2, 3]], vec![vec![0, 1, 2, 3]]],
        );
        assert!(matches!(overlapping, Err(Error::NotAPartition { time: 1, .. })));
        assert!(Filtration::constant(&space, Partition::trivial(4)).is_ok());
    }

    #[test]
    fn partitions_are_canonical() {
        let a = Partition::new(4, vec![vec![3, 2], vec![1, 0]]).unwrap();
        let b = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(Partition::from_key(4, |w| w / 2), b);
        assert!(Partition::discrete(4).refines(&a));
        assert!(!a.refines(&Partition::discrete(4)));
        let c = Partition::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        assert_eq!(a.meet(&c), Partition::discrete(4));
    }

    #[test]
    fn conditional_expectation_on_atoms() {
        let space = example_space();
        let f = example_filtration(&space);
        let survive = [true, true, false, true];
        let e = f.conditional_probability(&space, &survive, 1);
        assert_eq!(e, vec![int(1), int(1), rat(2, 3), rat(2, 3)]);
        let c = vec![rat(5, 7); 4];
        assert_eq!(f.conditional_expectation(&space, &c, 0), c);
        let x = vec![int(1), int(2), int(3), int(4)];
        assert_eq!(f.conditional_expectation(&space, &x, 2), x);
    }

    #[test]
    fn martingale_test() {
        let space = example_space();
        let f = example_filtration(&space);
        assert!(f.is_martingale(&space, &binomial_price()).unwrap().holds());
        assert!(f
            .is_martingale(&space, &Process::constant(2, 4, int(3)))
            .unwrap()
            .holds());
        let not_adapted = Process::from_fn(2, 4, |n, w| if n == 1 { int(w as i64) } else { int(0) });
        assert!(matches!(
            f.is_martingale(&space, &not_adapted),
            Err(Error::NotAdapted { time: 1, .. })
        ));
        let drift = Process::from_fn(2, 4, |n, _| int(n as i64));
        assert!(matches!(
            f.is_martingale(&space, &drift).unwrap(),
            MartingaleVerdict::Violated { time: 1, .. }
        ));
    }

    #[test]
    fn gains_and_predictability() {
        let space = example_space();
        let f = example_filtration(&space);
        let s = binomial_price();
        let mut h = Strategy::zeros(2, 4);
        h.set_on(2, &[2], &int(1));
        h.set_on(2, &[3], &int(-1));
        assert!(f.check_predictable(&h).is_err());
        assert_eq!(h.gains(&s), vec![int(0), int(0), rat(1, 2), rat(1, 4)]);
        assert!(h.is_arbitrage_for(&s));
        assert!(Strategy::zeros(2, 4).gains(&s).iter().all(Zero::is_zero));
    }

    #[test]
    fn exponential_and_density() {
        let space = example_space();
        let y = Process::new(vec![
            vec![int(0); 4],
            vec![int(0); 4],
            vec![int(0), int(0), rat(-2, 3), rat(1, 3)],
        ])
        .unwrap();
        let d = y.stochastic_exponential();
        assert_eq!(d.terminal(), &[int(1), int(1), rat(1, 3), rat(4, 3)]);
        let density = MeasureDensity::new(&space, d.terminal().to_vec()).unwrap();
        let q = space.apply_density(&density).unwrap();
        assert_eq!(q.weights(), &[rat(1, 9), rat(2, 9), rat(2, 27), rat(16, 27)]);
        assert_eq!(space.apply_density(&MeasureDensity::identity(4)).unwrap(), space);
        assert!(matches!(
            MeasureDensity::new(&space, vec![int(0), int(1), int(1), int(1)]),
            Err(Error::NonPositiveDensity { outcome: 0 })
        ));
        assert!(matches!(
            MeasureDensity::new(&space, vec![int(2); 4]),
            Err(Error::DensityMean { .. })
        ));
        let one_step = Process::new(vec![vec![int(0); 2], vec![int(1), int(0)]]).unwrap();
        assert_eq!(one_step.stochastic_exponential().at(1), &[int(2), int(1)]);
        assert!(Process::zeros(3, 2).stochastic_exponential().values().iter().flatten().all(One::is_one));
    }

    #[test]
    fn increments_of_binomial_price() {
        let s = binomial_price();
        assert_eq!(s.increment(2)[0], int(2));
        assert_eq!(s.increments()[0], vec![int(0); 4]);
        let rebuilt = Process::from_increments(s.at(0).to_vec(), &s.increments());
        assert_eq!(rebuilt, s);
        assert!(Process::constant(2, 3, int(5)).increments().iter().flatten().all(Zero::is_zero));
    }
}
