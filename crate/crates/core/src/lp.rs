//! Exact two-phase simplex for `max cᵀx` subject to `Ax = b`, `x ≥ 0`.
//!
//! Dense tableau, Bland's rule for both entering and leaving variables, so
//! it terminates on degenerate problems. Meant for the handful of variables
//! a single market period produces.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut r = cost[j].clone();
        for (i, &b) in self.basis.iter().enumerate() {
            r -= &cost[b] * &self.rows[i][j];
        }
        r
    }

    /// Maximizes `cost` over the columns `0..usable`.
    fn optimize(&mut self, cost: &[Rational], usable: usize) -> Step {
        loop {
            let entering = (0..usable)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(cost, j).is_positive());
            let Some(c) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.rows[i][c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Step::Unbounded,
            }
        }
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&b, v)| &cost[b] * v)
            .sum()
    }
}

impl LinearProgram {
    pub fn solve(&self) -> LpOutcome {
        let n = self.objective.len();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            assert_eq!(row.len(), n, "constraint row width");
            if row.iter().all(Zero::is_zero) {
                if b.is_zero() {
                    continue;
                }
                return LpOutcome::Infeasible;
            }
            if b.is_negative() {
                rows.push(row.iter().map(|v| -v).collect::<Vec<_>>());
                rhs.push(-b);
            } else {
                rows.push(row.clone());
                rhs.push(b.clone());
            }
        }
        let m = rows.len();
        for (i, row) in rows.iter_mut().enumerate() {
            row.extend((0..m).map(|k| crate::rational::indicator(k == i)));
        }
        let mut t = Tableau {
            rows,
            rhs,
            basis: (n..n + m).collect(),
        };

        let phase_one: Vec<Rational> = (0..n + m)
            .map(|j| if j < n { Rational::zero() } else { crate::rational::int(-1) })
            .collect();
        t.optimize(&phase_one, n + m);
        if !t.objective(&phase_one).is_zero() {
            return LpOutcome::Infeasible;
        }

        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n {
                match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        let mut cost = self.objective.clone();
        cost.extend((0..m).map(|_| Rational::zero()));
        match t.optimize(&cost, n) {
            Step::Unbounded => LpOutcome::Unbounded,
            Step::Optimal => {
                let mut x = vec![Rational::zero(); n];
                for (&b, v) in t.basis.iter().zip(&t.rhs) {
                    if b < n {
                        x[b] = v.clone();
                    }
                }
                let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                LpOutcome::Optimal { x, value }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn lp(objective: Vec<i64>, rows: Vec<Vec<i64>>, rhs: Vec<i64>) -> LinearProgram {
        LinearProgram {
            objective: objective.into_iter().map(int).collect(),
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().map(int).collect())
                .collect(),
            rhs: rhs.into_iter().map(int).collect(),
        }
    }

    #[test]
    fn solves_a_small_program() {
        // max x + y, x + 2y + s1 = 4, 3x + y + s2 = 6
        let out = lp(vec![1, 1, 0, 0], vec![vec![1, 2, 1, 0], vec![3, 1, 0, 1]], vec![4, 6]).solve();
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, rat(14, 5));
                assert_eq!(&x[..2], &[rat(8, 5), rat(6, 5)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        assert_eq!(lp(vec![0, 0], vec![vec![1, 1]], vec![-1]).solve(), LpOutcome::Infeasible);
        assert_eq!(lp(vec![1, 0], vec![vec![1, -1]], vec![0]).solve(), LpOutcome::Unbounded);
        assert_eq!(lp(vec![1], vec![vec![0]], vec![1]).solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn tolerates_redundant_rows() {
        let out = lp(vec![1, 0], vec![vec![1, 1], vec![2, 2], vec![0, 0]], vec![1, 2, 0]).solve();
        assert_eq!(
            out,
            LpOutcome::Optimal {
                x: vec![int(1), int(0)],
                value: int(1)
            }
        );
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, written with slack columns.
        let objective = vec![rat(3, 4), int(-150), rat(1, 50), int(-6), int(0), int(0), int(0)];
        let rows = vec![
            vec![rat(1, 4), int(-60), rat(-1, 25), int(9), int(1), int(0), int(0)],
            vec![rat(1, 2), int(-90), rat(-1, 50), int(3), int(0), int(1), int(0)],
            vec![int(0), int(0), int(1), int(0), int(0), int(0), int(1)],
        ];
        let program = LinearProgram {
            objective,
            rows,
            rhs: vec![int(0), int(0), int(1)],
        };
        match program.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
