//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `maximize c·y subject to A y <= b, y >= 0`. Problems here are
//! tiny (a handful of variables, a few dozen rows) so a dense tableau is
//! the right tool.

use num_traits::{One, Signed, Zero};

use crate::ratgeom::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    /// reduced costs; the last entry holds minus the objective value
    obj: Vec<Rat>,
    basis: Vec<usize>,
    /// columns allowed to enter the basis
    active: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.obj.len() - 1
    }

    fn set_objective(&mut self, costs: &[Rat]) {
        let width = self.obj.len();
        self.obj = vec![Rat::zero(); width];
        self.obj[..costs.len()].clone_from_slice(costs);
        for (r, &b) in self.basis.iter().enumerate() {
            if b < costs.len() && !costs[b].is_zero() {
                let cb = costs[b].clone();
                for (o, v) in self.obj.iter_mut().zip(&self.rows[r]) {
                    if !v.is_zero() {
                        *o -= &cb * v;
                    }
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v / &p;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations; `false` means unbounded.
    fn optimize(&mut self) -> bool {
        let rhs = self.rhs();
        loop {
            let entering = (0..self.active).find(|&j| self.obj[j].is_positive());
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Rat)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

pub fn maximize(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> LpOutcome {
    let nv = c.len();
    let m = a.len();
    let n_art = b.iter().filter(|v| v.is_negative()).count();
    let width = nv + m + n_art + 1;
    let rhs = width - 1;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = nv + m;
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let mut t = vec![Rat::zero(); width];
        let flip = bi.is_negative();
        for (j, v) in row.iter().enumerate() {
            t[j] = if flip { -v } else { v.clone() };
        }
        t[nv + i] = if flip { -Rat::one() } else { Rat::one() };
        t[rhs] = if flip { -bi } else { bi.clone() };
        if flip {
            t[art] = Rat::one();
            basis.push(art);
            art += 1;
        } else {
            basis.push(nv + i);
        }
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        obj: vec![Rat::zero(); width],
        basis,
        active: width - 1,
    };

    if n_art > 0 {
        let mut phase1 = vec![Rat::zero(); nv + m + n_art];
        for v in phase1[nv + m..].iter_mut() {
            *v = -Rat::one();
        }
        tab.set_objective(&phase1);
        tab.optimize();
        if !tab.obj[rhs].is_zero() {
            return LpOutcome::Infeasible;
        }
        // drive artificial variables out of the basis
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= nv + m {
                match (0..nv + m).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }
    tab.active = nv + m;
    tab.set_objective(c);
    if !tab.optimize() {
        return LpOutcome::Unbounded;
    }
    let mut point = vec![Rat::zero(); nv];
    for (r, &bcol) in tab.basis.iter().enumerate() {
        if bcol < nv {
            point[bcol] = tab.rows[r][rhs].clone();
        }
    }
    LpOutcome::Optimal {
        value: -tab.obj[rhs].clone(),
        point,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratgeom::{int, rat};

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y; x <= 4; 2y <= 12; 3x + 2y <= 18 -> (2, 6), 36
        let out = maximize(
            &ints(&[3, 5]),
            &[ints(&[1, 0]), ints(&[0, 2]), ints(&[3, 2])],
            &ints(&[4, 12, 18]),
        );
        assert_eq!(
            out,
            LpOutcome::Optimal {
                value: int(36),
                point: ints(&[2, 6])
            }
        );
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y; x + y >= 1/2 (as -x - y <= -1/2); x <= 3
        let out = maximize(&ints(&[-1, -1]), &[ints(&[-1, -1]), ints(&[1, 0])], &[rat(-1, 2), int(3)]);
        match out {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(-1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x <= -1 with x >= 0
        assert_eq!(maximize(&ints(&[1]), &[ints(&[1])], &ints(&[-1])), LpOutcome::Infeasible);
        // max x with only -x <= 0
        assert_eq!(maximize(&ints(&[1]), &[ints(&[-1])], &ints(&[0])), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_guard() {
        // Beale's cycling example (converted to max), Bland's rule terminates
        let c = vec![rat(3, 4), int(-150), rat(1, 50), int(-6)];
        let a = vec![
            vec![rat(1, 4), int(-60), rat(-1, 25), int(9)],
            vec![rat(1, 2), int(-90), rat(-1, 50), int(3)],
            vec![int(0), int(0), int(1), int(0)],
        ];
        let b = ints(&[0, 0, 1]);
        match maximize(&c, &a, &b) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
