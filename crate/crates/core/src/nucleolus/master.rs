//! The restricted master problem of one stage and the bookkeeping of which
//! coalitions it has seen.

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::Game;
use crate::lp::{self, LinearProgram, LpSolution};

/// Orthonormal basis of the incidence vectors pinned so far, always
/// including the all-ones vector of the efficiency row.
#[derive(Debug, Clone)]
pub(crate) struct Span {
    n: usize,
    basis: Vec<Vec<f64>>,
}

const SPAN_TOL: f64 = 1e-9;

impl Span {
    pub(crate) fn new(n: usize) -> Self {
        let mut span = Span {
            n,
            basis: Vec::new(),
        };
        span.add(Coalition::grand(n));
        span
    }

    fn residual(&self, s: Coalition) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.n)
            .map(|i| if s.contains(i) { 1.0 } else { 0.0 })
            .collect();
        // two passes keep the basis orthogonal in floating point
        for _ in 0..2 {
            for b in &self.basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        v
    }

    pub(crate) fn contains(&self, s: Coalition) -> bool {
        let r = self.residual(s);
        r.iter().map(|x| x * x).sum::<f64>().sqrt() < SPAN_TOL
    }

    /// Adds `s`; false when it was already in the span.
    pub(crate) fn add(&mut self, s: Coalition) -> bool {
        let mut r = self.residual(s);
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < SPAN_TOL {
            return false;
        }
        r.iter_mut().for_each(|x| *x /= norm);
        self.basis.push(r);
        true
    }

    pub(crate) fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// Rows of the current stage problem
///
/// ```text
/// max w   s.t.  y(S) + w <= c(S)        S in `ineq`
///               y(S)     =  c(S) - l_S  (S, l_S) in `fixed`
///               y(N)     =  c(N)
/// ```
#[derive(Debug, Clone)]
pub struct MasterState {
    pub stage: usize,
    pub ineq: Vec<Coalition>,
    pub fixed: Vec<(Coalition, f64)>,
    /// Coalitions whose excess is already determined by `fixed` and
    /// efficiency; kept out of the problem.
    pub settled: Vec<Coalition>,
    pub(crate) span: Span,
    n: usize,
    seen: Vec<bool>,
}

/// One solved master problem.
#[derive(Debug, Clone)]
pub struct MasterSolve {
    pub lp: LinearProgram,
    pub solution: LpSolution,
    pub y: Vec<f64>,
    pub w: f64,
}

impl MasterState {
    pub fn new(n: usize) -> Self {
        MasterState {
            stage: 1,
            ineq: Vec::new(),
            fixed: Vec::new(),
            settled: Vec::new(),
            span: Span::new(n),
            n,
            seen: vec![false; 1 << n],
        }
    }

    pub fn players(&self) -> usize {
        self.n
    }

    /// Whether `s` has ever entered the problem.
    pub fn contains(&self, s: Coalition) -> bool {
        self.seen[s.mask() as usize]
    }

    /// Whether a generator should skip `s`.
    pub fn excludes(&self, s: Coalition) -> bool {
        self.contains(s) || self.span.contains(s)
    }

    /// Adds an inequality row; false if `s` was already present.
    pub fn insert(&mut self, s: Coalition) -> bool {
        if self.contains(s) {
            return false;
        }
        self.seen[s.mask() as usize] = true;
        self.ineq.push(s);
        true
    }

    /// Number of distinct coalitions that ever entered the problem.
    pub fn seen_count(&self) -> usize {
        self.seen.iter().filter(|&&b| b).count()
    }

    pub fn rank(&self) -> usize {
        self.span.rank()
    }

    /// Moves `rows` from the inequalities to equalities at `level`, then
    /// settles every remaining inequality the new equalities determine.
    /// Returns the independent rows and the settled ones.
    pub fn fix(&mut self, rows: &[Coalition], level: f64) -> (Vec<Coalition>, Vec<Coalition>) {
        let mut pinned = Vec::new();
        let mut settled = Vec::new();
        for &s in rows {
            if self.span.add(s) {
                self.fixed.push((s, level));
                pinned.push(s);
            } else {
                self.settled.push(s);
                settled.push(s);
            }
        }
        let mut keep = Vec::with_capacity(self.ineq.len());
        for &s in &self.ineq {
            if rows.contains(&s) {
                continue;
            }
            if self.span.contains(s) {
                self.settled.push(s);
                settled.push(s);
            } else {
                keep.push(s);
            }
        }
        self.ineq = keep;
        self.stage += 1;
        (pinned, settled)
    }

    /// The stage problem over variables `(y_1..y_n, w)`.
    pub fn program(&self, game: &Game) -> LinearProgram {
        let n = self.n;
        let mut objective = vec![0.0; n + 1];
        if !self.ineq.is_empty() {
            objective[n] = 1.0;
        }
        let mut lp = LinearProgram::new(objective);
        let row = |s: Coalition, w: f64| -> Vec<f64> {
            let mut r: Vec<f64> = (0..n)
                .map(|i| if s.contains(i) { 1.0 } else { 0.0 })
                .collect();
            r.push(w);
            r
        };
        for &s in &self.ineq {
            lp.add_le(row(s, 1.0), game.cost(s));
        }
        for &(s, level) in &self.fixed {
            lp.add_eq(row(s, 0.0), game.cost(s) - level);
        }
        lp.add_eq(row(Coalition::grand(n), 0.0), game.grand_cost());
        lp
    }
}

/// Solves the current stage problem.
pub fn step_master(game: &Game, state: &MasterState) -> Result<MasterSolve> {
    let lp = state.program(game);
    let solution = lp::solve(&lp).into_result().map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(format!("stage {} master: {msg}", state.stage)),
        e => e,
    })?;
    let n = state.n;
    let y = solution.x[..n].to_vec();
    let w = if state.ineq.is_empty() {
        f64::INFINITY
    } else {
        solution.x[n]
    };
    Ok(MasterSolve { lp, solution, y, w })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_tracks_dependence() {
        let mut span = Span::new(3);
        assert!(span.contains(Coalition::grand(3)));
        assert!(!span.contains(Coalition::singleton(0)));
        assert!(span.add(Coalition::singleton(0)));
        // {2,3} = N - {1}
        assert!(span.contains(Coalition::from_members([1, 2])));
        assert!(!span.add(Coalition::from_members([1, 2])));
        assert!(span.add(Coalition::singleton(1)));
        assert_eq!(span.rank(), 3);
        assert!(span.contains(Coalition::singleton(2)));
    }

    #[test]
    fn fixing_settles_dependent_rows() {
        let mut st = MasterState::new(3);
        for m in [1u32, 2, 4, 6] {
            st.insert(Coalition::from_mask(m));
        }
        let (pinned, settled) = st.fix(&[Coalition::from_mask(1)], -1.0);
        assert_eq!(pinned, vec![Coalition::from_mask(1)]);
        assert_eq!(settled, vec![Coalition::from_mask(6)]);
        assert_eq!(
            st.ineq,
            vec![Coalition::from_mask(2), Coalition::from_mask(4)]
        );
        assert!(st.excludes(Coalition::from_mask(6)));
        assert_eq!(st.seen_count(), 4);
        assert_eq!(st.stage, 2);
    }
}
