//! Martingales, deflators and measure changes that move between the public
//! filtration and the insider one.
//!
//! Quotients only appear behind the indicator that keeps their denominator
//! positive. If the indicator holds and the denominator is still zero, an
//! [`Error::Invariant`] is returned instead of dividing.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::random_time::{stop_at, EnlargedModel};
use crate::rational::{indicator, Rational};
use crate::space::{MartingaleVerdict, MeasureDensity, Process};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeflatorReport {
    /// The `G`-martingale `N̂`.
    pub martingale: Process,
    /// `ℰ(N̂)`.
    pub deflator: Process,
    pub one_plus_jumps_positive: bool,
    pub martingale_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureChangeReport {
    pub increments: Process,
    pub density_process: Process,
    pub terminal: MeasureDensity,
    pub equals_base: bool,
}

/// Per-period result of a conditional orthogonality test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orthogonality {
    /// Entry `n - 1` is the verdict at time `n`.
    pub per_time: Vec<bool>,
    /// First failing `(time, atom of F_{time-1})`.
    pub witness: Option<(usize, Vec<usize>)>,
}

impl Orthogonality {
    pub fn holds(&self) -> bool {
        self.per_time.iter().all(|&b| b)
    }
}

fn quotient(num: &Rational, den: &Rational, what: &str) -> Result<Rational> {
    if den.is_zero() {
        Err(Error::Invariant(format!("{what}: zero denominator inside its guard")))
    } else {
        Ok(num / den)
    }
}

fn one_plus_positive(process: &Process) -> bool {
    (1..=process.horizon()).all(|n| {
        process
            .increment(n)
            .iter()
            .all(|d| (Rational::one() + d).is_positive())
    })
}

impl EnlargedModel {
    fn require_f_martingale(&self, m: &Process) -> Result<()> {
        match self.public.is_martingale(&self.space, m)? {
            MartingaleVerdict::Martingale => Ok(()),
            MartingaleVerdict::Violated { time, atom, .. } => {
                Err(Error::NotMartingale { time, atom })
            }
        }
    }

    fn require_g_martingale(&self, m: &Process, what: &str) -> Result<()> {
        match self.insider.is_martingale(&self.space, m) {
            Ok(MartingaleVerdict::Martingale) => Ok(()),
            Ok(MartingaleVerdict::Violated { time, atom, .. }) => Err(Error::Invariant(format!(
                "{what} is not a G-martingale: drift at time {time} on atom {atom:?}"
            ))),
            Err(e) => Err(Error::Invariant(format!("{what}: {e}"))),
        }
    }

    fn is_g_martingale(&self, m: &Process) -> bool {
        matches!(
            self.insider.is_martingale(&self.space, m),
            Ok(MartingaleVerdict::Martingale)
        )
    }

    fn from_increments(&self, increments: Vec<Vec<Rational>>) -> Process {
        Process::from_increments(vec![Rational::zero(); self.len()], &increments)
    }

    /// `M^τ` minus its `G`-compensator before `τ`.
    pub fn g_compensated_before(&self, m: &Process) -> Result<Process> {
        self.require_f_martingale(m)?;
        let mut comp = vec![vec![Rational::zero(); self.len()]];
        for k in 1..=self.horizon() {
            let weighted: Vec<Rational> = m
                .increment(k)
                .iter()
                .zip(self.azema.z_tilde.at(k))
                .map(|(d, zt)| d * zt)
                .collect();
            let proj = self.cond_exp(&weighted, k - 1);
            let row = (0..self.len())
                .map(|w| {
                    if self.tau.value(w) >= k {
                        quotient(&proj[w], self.azema.z.value(k - 1, w), "1/Z_{k-1} on {τ ≥ k}")
                    } else {
                        Ok(Rational::zero())
                    }
                })
                .collect::<Result<_>>()?;
            comp.push(row);
        }
        let hat = &self.stopped(m) - &self.from_increments(comp);
        self.require_g_martingale(&hat, "compensated stopped martingale")?;
        Ok(hat)
    }

    /// `M − M^τ` minus its `G`-compensator after `τ`.
    pub fn g_compensated_after(&self, m: &Process) -> Result<Process> {
        self.require_strictly_honest()?;
        self.require_f_martingale(m)?;
        let mut comp = vec![vec![Rational::zero(); self.len()]];
        for k in 1..=self.horizon() {
            let weighted: Vec<Rational> = m
                .increment(k)
                .iter()
                .zip(self.azema.z_tilde.at(k))
                .map(|(d, zt)| d * (Rational::one() - zt))
                .collect();
            let proj = self.cond_exp(&weighted, k - 1);
            let row = (0..self.len())
                .map(|w| {
                    if self.tau.value(w) < k {
                        let den = Rational::one() - self.azema.z.value(k - 1, w);
                        quotient(&proj[w], &den, "1/(1 - Z_{k-1}) on {τ < k}")
                    } else {
                        Ok(Rational::zero())
                    }
                })
                .collect::<Result<_>>()?;
            comp.push(row);
        }
        let hat = &self.after(m) - &self.from_increments(comp);
        self.require_g_martingale(&hat, "compensated post-τ martingale")?;
        Ok(hat)
    }

    /// The sum of both compensated parts; a `G`-martingale equal to `M` up
    /// to its `G`-drift.
    pub fn g_martingale(&self, m: &Process) -> Result<Process> {
        let before = self.g_compensated_before(m)?;
        let after = self.g_compensated_after(m)?;
        Ok(&before + &after)
    }

    pub fn deflator_before(&self) -> Result<DeflatorReport> {
        let mut inc = vec![vec![Rational::zero(); self.len()]];
        for k in 1..=self.horizon() {
            let positive: Vec<bool> = self.azema.z_tilde.at(k).iter().map(Signed::is_positive).collect();
            let p_pos = self.cond_prob(&positive, k - 1);
            let row = (0..self.len())
                .map(|w| {
                    if self.tau.value(w) >= k {
                        let ratio = quotient(
                            self.azema.z.value(k - 1, w),
                            self.azema.z_tilde.value(k, w),
                            "Z_{k-1}/Z̃_k on {τ ≥ k}",
                        )?;
                        Ok(ratio - &p_pos[w])
                    } else {
                        Ok(Rational::zero())
                    }
                })
                .collect::<Result<_>>()?;
            inc.push(row);
        }
        Ok(self.deflator_report(self.from_increments(inc)))
    }

    pub fn deflator_after(&self) -> Result<DeflatorReport> {
        self.require_strictly_honest()?;
        let mut inc = vec![vec![Rational::zero(); self.len()]];
        for k in 1..=self.horizon() {
            let below: Vec<bool> = self.azema.z_tilde.at(k).iter().map(|v| !v.is_one()).collect();
            let p_below = self.cond_prob(&below, k - 1);
            let row = (0..self.len())
                .map(|w| {
                    if self.tau.value(w) < k {
                        let ratio = quotient(
                            &(Rational::one() - self.azema.z.value(k - 1, w)),
                            &(Rational::one() - self.azema.z_tilde.value(k, w)),
                            "(1 - Z_{k-1})/(1 - Z̃_k) on {τ < k}",
                        )?;
                        Ok(ratio - &p_below[w])
                    } else {
                        Ok(Rational::zero())
                    }
                })
                .collect::<Result<_>>()?;
            inc.push(row);
        }
        Ok(self.deflator_report(self.from_increments(inc)))
    }

    fn deflator_report(&self, martingale: Process) -> DeflatorReport {
        DeflatorReport {
            deflator: martingale.stochastic_exponential(),
            one_plus_jumps_positive: one_plus_positive(&martingale),
            martingale_verified: self.is_g_martingale(&martingale),
            martingale,
        }
    }

    /// `Y` with `ΔYₙ = Z̃ₙ 1_{Zₙ₋₁>0} P[Z̃ₙ=0 | Fₙ₋₁] − Zₙ₋₁ 1_{Z̃ₙ=0}` and
    /// `D = ℰ(Y)`.
    pub fn measure_change_before(&self) -> Result<MeasureChangeReport> {
        let mut inc = vec![vec![Rational::zero(); self.len()]];
        for n in 1..=self.horizon() {
            let hit = self.azema.z_tilde_is_zero(n);
            let p_hit = self.cond_prob(&hit, n - 1);
            let row = (0..self.len())
                .map(|w| {
                    let zp = self.azema.z.value(n - 1, w);
                    let zt = self.azema.z_tilde.value(n, w);
                    zt * indicator(zp.is_positive()) * &p_hit[w] - zp * indicator(hit[w])
                })
                .collect();
            inc.push(row);
        }
        self.measure_change_report(self.from_increments(inc), "Y")
    }

    /// `Y⁽ᵃ⁾` with `ΔY⁽ᵃ⁾ₙ = (1−Z̃ₙ) 1_{Zₙ₋₁<1} P[Z̃ₙ=1 | Fₙ₋₁] − (1−Zₙ₋₁) 1_{Z̃ₙ=1}`.
    pub fn measure_change_after(&self) -> Result<MeasureChangeReport> {
        let one = Rational::one();
        let mut inc = vec![vec![Rational::zero(); self.len()]];
        for n in 1..=self.horizon() {
            let full = self.azema.z_tilde_is_one(n);
            let p_full = self.cond_prob(&full, n - 1);
            let row = (0..self.len())
                .map(|w| {
                    let zp = self.azema.z.value(n - 1, w);
                    let zt = self.azema.z_tilde.value(n, w);
                    (&one - zt) * indicator(zp < &one) * &p_full[w]
                        - (&one - zp) * indicator(full[w])
                })
                .collect();
            inc.push(row);
        }
        self.measure_change_report(self.from_increments(inc), "Y(a)")
    }

    fn measure_change_report(&self, y: Process, name: &str) -> Result<MeasureChangeReport> {
        if let MartingaleVerdict::Violated { time, atom, .. } =
            self.public.is_martingale(&self.space, &y)?
        {
            return Err(Error::Invariant(format!(
                "{name} has drift at time {time} on atom {atom:?}"
            )));
        }
        if !one_plus_positive(&y) {
            return Err(Error::Invariant(format!("1 + Δ{name} is not strictly positive")));
        }
        let density_process = y.stochastic_exponential();
        let terminal = MeasureDensity::new(&self.space, density_process.terminal().to_vec())
            .map_err(|e| Error::Invariant(format!("ℰ({name}) terminal density: {e}")))?;
        Ok(MeasureChangeReport {
            equals_base: y.is_zero(),
            increments: y,
            density_process,
            terminal,
        })
    }

    /// `Π qₙ` with `qₙ = (Zₙ₋₁/Z̃ₙ) / P[Z̃ₙ>0 | Fₙ₋₁]` on `{n ≤ τ}` and 1
    /// elsewhere.
    pub fn per_period_density_before(&self) -> Result<MeasureDensity> {
        let mut density = vec![Rational::one(); self.len()];
        for n in 1..=self.horizon() {
            let positive: Vec<bool> = self.azema.z_tilde.at(n).iter().map(Signed::is_positive).collect();
            let p_pos = self.cond_prob(&positive, n - 1);
            for (w, d) in density.iter_mut().enumerate() {
                if n <= self.tau.value(w) {
                    let ratio = quotient(
                        self.azema.z.value(n - 1, w),
                        self.azema.z_tilde.value(n, w),
                        "Z_{n-1}/Z̃_n on {n ≤ τ}",
                    )?;
                    *d *= quotient(&ratio, &p_pos[w], "P(Z̃_n > 0 | F_{n-1}) on {n ≤ τ}")?;
                }
            }
        }
        MeasureDensity::new(&self.space, density)
            .map_err(|e| Error::Invariant(format!("per-period density before τ: {e}")))
    }

    /// `Π q⁽ᵃ⁾ₙ`, the mirror image on `{n > τ}`.
    pub fn per_period_density_after(&self) -> Result<MeasureDensity> {
        self.require_strictly_honest()?;
        let one = Rational::one();
        let mut density = vec![Rational::one(); self.len()];
        for n in 1..=self.horizon() {
            let below: Vec<bool> = self.azema.z_tilde.at(n).iter().map(|v| v < &one).collect();
            let p_below = self.cond_prob(&below, n - 1);
            for (w, d) in density.iter_mut().enumerate() {
                if n > self.tau.value(w) {
                    let ratio = quotient(
                        &(&one - self.azema.z.value(n - 1, w)),
                        &(&one - self.azema.z_tilde.value(n, w)),
                        "(1 - Z_{n-1})/(1 - Z̃_n) on {n > τ}",
                    )?;
                    *d *= quotient(&ratio, &p_below[w], "P(Z̃_n < 1 | F_{n-1}) on {n > τ}")?;
                }
            }
        }
        MeasureDensity::new(&self.space, density)
            .map_err(|e| Error::Invariant(format!("per-period density after τ: {e}")))
    }

    /// Terminal densities of `Q⁽ᵉ⁾` and its mirror `Q̃⁽ᵉ⁾`.
    pub fn qe_measures(&self) -> Result<(MeasureDensity, MeasureDensity)> {
        let one = Rational::one();
        let mut before = vec![Rational::one(); self.len()];
        let mut after = vec![Rational::one(); self.len()];
        for n in 1..=self.horizon() {
            let zp = self.azema.z.at(n - 1);
            let zt = self.azema.z_tilde.at(n);
            let jump_down: Vec<bool> = (0..self.len())
                .map(|w| zt[w].is_zero() && zp[w].is_positive())
                .collect();
            let jump_up: Vec<bool> = (0..self.len())
                .map(|w| zt[w].is_one() && zp[w] < one)
                .collect();
            let p_down = self.cond_prob(&jump_down, n - 1);
            let p_up = self.cond_prob(&jump_up, n - 1);
            for w in 0..self.len() {
                let mut num = indicator(jump_down[w]) + indicator(zp[w].is_zero());
                if zp[w].is_positive() {
                    num += &zt[w] / &zp[w];
                }
                before[w] *= num / (&one + &p_down[w]);

                let mut num = indicator(jump_up[w]) + indicator(zp[w].is_one());
                if zp[w] < one {
                    num += (&one - &zt[w]) / (&one - &zp[w]);
                }
                after[w] *= num / (&one + &p_up[w]);
            }
        }
        let wrap = |values, name| {
            MeasureDensity::new(&self.space, values)
                .map_err(|e| Error::Invariant(format!("{name} density: {e}")))
        };
        Ok((wrap(before, "Q(e)")?, wrap(after, "Q~(e)")?))
    }

    /// Increments zeroed where `Z̃ₙ = 0`.
    pub fn truncate_before(&self, x: &Process) -> Process {
        self.truncate(x, |n, w| !self.azema.z_tilde.value(n, w).is_zero())
    }

    /// Increments zeroed where `Z̃ₙ = 1`.
    pub fn truncate_after(&self, x: &Process) -> Process {
        self.truncate(x, |n, w| !self.azema.z_tilde.value(n, w).is_one())
    }

    fn truncate(&self, x: &Process, keep: impl Fn(usize, usize) -> bool) -> Process {
        let mut inc = x.increments();
        for (n, row) in inc.iter_mut().enumerate().skip(1) {
            for (w, d) in row.iter_mut().enumerate() {
                if !keep(n, w) {
                    *d = Rational::zero();
                }
            }
        }
        Process::from_increments(x.at(0).to_vec(), &inc)
    }

    /// `E[ΔXₙ 1_{Z̃ₙ=0} | Fₙ₋₁] = 0` (before) or `E[ΔXₙ 1_{Z̃ₙ=1} | Fₙ₋₁] = 0`
    /// (after), per `n`.
    pub fn orthogonality_check(&self, x: &Process, side: Side) -> Orthogonality {
        let weights: Vec<Vec<Rational>> = (0..=self.horizon())
            .map(|n| {
                let hit = match side {
                    Side::Before => self.azema.z_tilde_is_zero(n),
                    Side::After => self.azema.z_tilde_is_one(n),
                };
                hit.into_iter().map(indicator).collect()
            })
            .collect();
        self.orthogonal_to(x, &Process::new(weights).expect("horizon ≥ 1"), false)
    }

    /// Per `n ≥ 1` (index `n−1`): `{ΔXₙ ≠ 0} ∩ {Z̃ₙ = 0} ∩ {Zₙ₋₁ > 0}` before
    /// `τ`, `{ΔXₙ ≠ 0} ∩ {Z̃ₙ = 1} ∩ {Zₙ₋₁ < 1}` after.
    pub fn exposed_outcomes(&self, x: &Process, side: Side) -> Vec<Vec<bool>> {
        (1..=self.horizon())
            .map(|n| {
                let dx = x.increment(n);
                let (hit, prev) = match side {
                    Side::Before => (self.azema.z_tilde_is_zero(n), self.azema.z_is_zero(n - 1)),
                    Side::After => (self.azema.z_tilde_is_one(n), self.azema.z_is_one(n - 1)),
                };
                (0..self.len())
                    .map(|w| !dx[w].is_zero() && hit[w] && !prev[w])
                    .collect()
            })
            .collect()
    }

    /// `E[ΔXₙ ΔYₙ | Fₙ₋₁] = 0` per `n`.
    pub fn pairwise_orthogonality(&self, x: &Process, y: &Process) -> Orthogonality {
        self.orthogonal_to(x, y, true)
    }

    fn orthogonal_to(&self, x: &Process, other: &Process, use_increments: bool) -> Orthogonality {
        let mut per_time = Vec::new();
        let mut witness = None;
        for n in 1..=self.horizon() {
            let dx = x.increment(n);
            let factor = if use_increments {
                other.increment(n)
            } else {
                other.at(n).to_vec()
            };
            let product: Vec<Rational> = dx.iter().zip(&factor).map(|(a, b)| a * b).collect();
            let mut ok = true;
            for atom in self.public.level(n - 1).atoms() {
                let s: Rational = atom.iter().map(|&w| self.space.weight(w) * &product[w]).sum();
                if !s.is_zero() {
                    ok = false;
                    if witness.is_none() {
                        witness = Some((n, atom.clone()));
                    }
                    break;
                }
            }
            per_time.push(ok);
        }
        Orthogonality { per_time, witness }
    }

    /// `ℰ(N̂⁽ᵇ⁾)·X^τ`.
    pub fn deflated_stopped(&self, x: &Process) -> Result<Process> {
        Ok(self.deflator_before()?.deflator.times(&stop_at(x, &self.tau)))
    }

    /// `ℰ(N̂⁽ᵃ⁾)·(X − X^τ)`.
    pub fn deflated_after(&self, x: &Process) -> Result<Process> {
        Ok(self.deflator_after()?.deflator.times(&self.after(x)))
    }
}
