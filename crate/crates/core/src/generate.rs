//! Seeded random instances. Every function is a pure function of its seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::{int, rat, Rational};
use crate::random_time::RandomTime;
use crate::space::{Filtration, MeasureDensity, Partition, Process, SampleSpace};

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Positive integer weights in `1..=6`, normalized.
pub fn random_space(r: &mut impl Rng, outcomes: usize, horizon: usize) -> SampleSpace {
    let raw: Vec<i64> = (0..outcomes).map(|_| r.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    let weights = raw.into_iter().map(|w| rat(w, total)).collect();
    SampleSpace::numbered(weights, horizon).expect("positive normalized weights")
}

fn split(r: &mut impl Rng, level: &Partition) -> Partition {
    let mut atoms = Vec::new();
    for atom in level.atoms() {
        let parts = r.gen_range(1..=atom.len().min(3));
        let mut pieces = vec![Vec::new(); parts];
        let mut members = atom.clone();
        members.shuffle(r);
        for (i, &w) in members.iter().enumerate() {
            let slot = if i < parts { i } else { r.gen_range(0..parts) };
            pieces[slot].push(w);
        }
        atoms.extend(pieces);
    }
    Partition::new(level.len(), atoms).expect("splitting keeps a partition")
}

/// A refining chain, usually starting trivial and often ending discrete.
pub fn random_filtration(r: &mut impl Rng, space: &SampleSpace) -> Filtration {
    let len = space.len();
    let mut level = if r.gen_bool(0.8) {
        Partition::trivial(len)
    } else {
        split(r, &Partition::trivial(len))
    };
    let mut levels = vec![level.clone()];
    for n in 1..=space.horizon() {
        level = if n == space.horizon() && r.gen_bool(0.6) {
            Partition::discrete(len)
        } else {
            split(r, &level)
        };
        levels.push(level.clone());
    }
    Filtration::from_partitions(space, levels).expect("generated levels refine")
}

/// A space with `2..=max_outcomes` outcomes, horizon `1..=max_horizon`, a
/// random filtration and a random time uniform on `0..=N`.
pub fn random_instance(
    seed: u64,
    max_outcomes: usize,
    max_horizon: usize,
) -> (SampleSpace, Filtration, RandomTime) {
    let mut r = rng(seed, 0);
    let outcomes = r.gen_range(2..=max_outcomes.max(2));
    let horizon = r.gen_range(1..=max_horizon.max(1));
    let space = random_space(&mut r, outcomes, horizon);
    let f = random_filtration(&mut r, &space);
    let values = (0..outcomes).map(|_| r.gen_range(0..=horizon)).collect();
    let tau = RandomTime::new(&space, values).expect("values within the horizon");
    (space, f, tau)
}

/// As [`random_instance`], but `τ` is the last time a random adapted set is
/// visited (0 if never), so `τ` is honest in the strict sense.
pub fn random_honest_instance(
    seed: u64,
    max_outcomes: usize,
    max_horizon: usize,
) -> (SampleSpace, Filtration, RandomTime) {
    let (space, f, _) = random_instance(seed, max_outcomes, max_horizon);
    let mut r = rng(seed, 1);
    let mut tau = vec![0; space.len()];
    for n in 0..=space.horizon() {
        for atom in f.level(n).atoms() {
            if r.gen_bool(0.5) {
                for &w in atom {
                    tau[w] = n;
                }
            }
        }
    }
    let tau = RandomTime::new(&space, tau).expect("values within the horizon");
    (space, f, tau)
}

/// `Xₙ = E[X_N | Fₙ]` for a random `F_N`-measurable terminal value in
/// `-5..=5`.
pub fn random_martingale(space: &SampleSpace, f: &Filtration, seed: u64) -> Process {
    let mut r = rng(seed, 2);
    let mut terminal = vec![Rational::default(); space.len()];
    for atom in f.level(f.horizon()).atoms() {
        let v = int(r.gen_range(-5..=5));
        for &w in atom {
            terminal[w] = v.clone();
        }
    }
    martingale_from_terminal(space, f, &terminal)
}

pub fn martingale_from_terminal(space: &SampleSpace, f: &Filtration, terminal: &[Rational]) -> Process {
    Process::from_fn(f.horizon(), space.len(), |n, w| {
        f.conditional_expectation(space, terminal, n)[w].clone()
    })
}

/// Values in `-3..=3`, constant on atoms.
pub fn random_adapted(space: &SampleSpace, f: &Filtration, seed: u64) -> Process {
    let mut r = rng(seed, 3);
    let mut values = Vec::new();
    for n in 0..=f.horizon() {
        let mut row = vec![Rational::default(); space.len()];
        for atom in f.level(n).atoms() {
            let v = int(r.gen_range(-3..=3));
            for &w in atom {
                row[w] = v.clone();
            }
        }
        values.push(row);
    }
    Process::new(values).expect("horizon ≥ 1")
}

/// Adds `±1` from a random time on, on one atom of that time.
pub fn perturb(process: &Process, f: &Filtration, seed: u64) -> Process {
    let mut r = rng(seed, 4);
    let n = r.gen_range(1..=f.horizon());
    let atoms = f.level(n).atoms();
    let atom = &atoms[r.gen_range(0..atoms.len())];
    let bump = if r.gen_bool(0.5) { int(1) } else { int(-1) };
    Process::from_fn(process.horizon(), process.len(), |m, w| {
        let v = process.value(m, w).clone();
        if m >= n && atom.contains(&w) {
            v + &bump
        } else {
            v
        }
    })
}

/// A strictly positive density with unit mean.
pub fn random_density(space: &SampleSpace, seed: u64) -> MeasureDensity {
    let mut r = rng(seed, 5);
    let raw: Vec<Rational> = (0..space.len()).map(|_| int(r.gen_range(1..=5))).collect();
    let mean = space.expectation(&raw);
    MeasureDensity::new(space, raw.into_iter().map(|v| v / &mean).collect())
        .expect("normalized positive density")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_time::is_honest_strict;

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(random_instance(7, 6, 3), random_instance(7, 6, 3));
        assert_eq!(random_honest_instance(7, 6, 3), random_honest_instance(7, 6, 3));
    }

    #[test]
    fn generated_objects_are_valid() {
        for seed in 0..200 {
            let (space, f, tau) = random_instance(seed, 8, 4);
            assert!(space.len() <= 8 && space.horizon() <= 4);
            assert!(Filtration::from_partitions(&space, f.levels().to_vec()).is_ok());
            assert!(tau.values().iter().all(|&t| t <= space.horizon()));
            let m = random_martingale(&space, &f, seed);
            assert!(f.is_martingale(&space, &m).unwrap().holds());
            assert!(f.is_adapted(&perturb(&m, &f, seed)));
            assert!(f.is_adapted(&random_adapted(&space, &f, seed)));
            let (_, hf, htau) = random_honest_instance(seed, 8, 4);
            assert!(is_honest_strict(&hf, &htau).is_honest());
        }
    }

    #[test]
    fn constant_terminal_gives_constant_martingale() {
        let (space, f, _) = random_instance(3, 5, 3);
        let m = martingale_from_terminal(&space, &f, &vec![int(2); space.len()]);
        assert_eq!(m, Process::constant(space.horizon(), space.len(), int(2)));
    }
}
