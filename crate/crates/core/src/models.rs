//! The two four-outcome binomial insider models.
//!
//! Both share the public filtration of a two-period binomial tree
//! (`ω1 = uu`, `ω2 = ud`, `ω3`, `ω4` below `d`) and the random time equal
//! to 1 on `ω3` and 2 elsewhere.
//!
//! - [`example_one`]: the stock is an ordinary binomial martingale under
//!   `ℙ = (p², pq, pq, q²)` with `p = (1−d)/(u−d)`. The insider can
//!   arbitrage both `S` and `S^τ`.
//! - [`example_two`]: the stock no longer moves after `d`, and `λ` splits
//!   the down branch. The time carries no exploitable information.

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::random_time::{EnlargedModel, RandomTime};
use crate::rational::Rational;
use crate::space::{Filtration, Process, SampleSpace};

#[derive(Debug, Clone)]
pub struct InsiderExample {
    pub model: EnlargedModel,
    pub price: Process,
    /// Up-probability `p = (1−d)/(u−d)`.
    pub p: Rational,
    pub u: Rational,
    pub d: Rational,
    pub s0: Rational,
    pub lambda: Option<Rational>,
}

fn check(u: &Rational, d: &Rational, s0: &Rational) -> Result<()> {
    if u <= &Rational::one() {
        return Err(Error::InvalidParameter(format!("u = {u} must exceed 1")));
    }
    if !d.is_positive() || d >= &Rational::one() {
        return Err(Error::InvalidParameter(format!("d = {d} must lie in (0, 1)")));
    }
    if !s0.is_positive() {
        return Err(Error::InvalidParameter(format!("S0 = {s0} must be positive")));
    }
    Ok(())
}

fn tree(weights: Vec<Rational>) -> Result<(SampleSpace, Filtration)> {
    let space = SampleSpace::numbered(weights, 2)?;
    let f = Filtration::new(
        &space,
        vec![
            vec![vec![0, 1, 2, 3]],
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0], vec![1], vec![2], vec![3]],
        ],
    )?;
    Ok((space, f))
}

fn price(s0: &Rational, terminal: [Rational; 4], u: &Rational, d: &Rational) -> Result<Process> {
    Process::new(vec![
        vec![s0.clone(); 4],
        vec![u * s0, u * s0, d * s0, d * s0],
        terminal.map(|t| t * s0).to_vec(),
    ])
}

pub fn example_one(u: Rational, d: Rational, s0: Rational) -> Result<InsiderExample> {
    check(&u, &d, &s0)?;
    let p = (Rational::one() - &d) / (&u - &d);
    let q = Rational::one() - &p;
    let (space, f) = tree(vec![&p * &p, &p * &q, &p * &q, &q * &q])?;
    let price = price(&s0, [&u * &u, &u * &d, &d * &u, &d * &d], &u, &d)?;
    let tau = RandomTime::new(&space, vec![2, 2, 1, 2])?;
    Ok(InsiderExample {
        model: EnlargedModel::new(space, f, tau)?,
        price,
        p,
        u,
        d,
        s0,
        lambda: None,
    })
}

/// The second model. The terminal price is `(u², ud, d, d)·S₀`, so it stays
/// flat below `d`.
pub fn example_two(u: Rational, d: Rational, lambda: Rational, s0: Rational) -> Result<InsiderExample> {
    check(&u, &d, &s0)?;
    if !lambda.is_positive() || lambda >= Rational::one() {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must lie in (0, 1)")));
    }
    let p = (Rational::one() - &d) / (&u - &d);
    let q = Rational::one() - &p;
    let (space, f) = tree(vec![
        &p * &p,
        &p * &q,
        &lambda * &q,
        (Rational::one() - &lambda) * &q,
    ])?;
    let price = price(&s0, [&u * &u, &u * &d, d.clone(), d.clone()], &u, &d)?;
    let tau = RandomTime::new(&space, vec![2, 2, 1, 2])?;
    Ok(InsiderExample {
        model: EnlargedModel::new(space, f, tau)?,
        price,
        p,
        u,
        d,
        s0,
        lambda: Some(lambda),
    })
}
