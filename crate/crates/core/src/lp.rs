//! Dense two-phase primal simplex.
//!
//! Problems are maximizations over rows tagged `≤` or `=`. Variables may be
//! free, bounded below, bounded above or boxed. Pivoting is fully
//! deterministic: the most negative reduced cost enters (lowest index on
//! ties, Bland's rule during degenerate stretches) and ratio ties leave by
//! lowest basic index, so identical inputs give bit-identical outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primal feasibility tolerance (scaled by row magnitude).
pub const FEAS_TOL: f64 = 1e-8;
/// Reduced-cost tolerance for optimality.
pub const OPT_TOL: f64 = 1e-9;
/// Degenerate pivots in a row before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;
/// Smallest pivot magnitude accepted.
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub kind: RowKind,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarBound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl VarBound {
    pub const FREE: VarBound = VarBound {
        lower: None,
        upper: None,
    };
    pub const NON_NEGATIVE: VarBound = VarBound {
        lower: Some(0.0),
        upper: None,
    };

    pub fn boxed(lower: f64, upper: f64) -> Self {
        VarBound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

/// `max objective·x` subject to `rows` and `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: Vec<VarBound>,
}

impl LinearProgram {
    /// All variables free, no rows.
    pub fn new(objective: Vec<f64>) -> Self {
        let bounds = vec![VarBound::FREE; objective.len()];
        LinearProgram {
            objective,
            rows: Vec::new(),
            bounds,
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.push(coeffs, RowKind::Le, rhs)
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.push(coeffs, RowKind::Eq, rhs)
    }

    pub fn push(&mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) -> &mut Self {
        assert_eq!(
            coeffs.len(),
            self.vars(),
            "row arity must equal variable count"
        );
        self.rows.push(Row { coeffs, kind, rhs });
        self
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let finite = |v: &f64| v.is_finite();
        if !self.objective.iter().all(finite) {
            return Err("non-finite objective coefficient".into());
        }
        if self.bounds.len() != self.vars() {
            return Err("bound count differs from variable count".into());
        }
        for (k, r) in self.rows.iter().enumerate() {
            if r.coeffs.len() != self.vars() || !r.coeffs.iter().all(finite) || !r.rhs.is_finite() {
                return Err(format!("row {k} malformed"));
            }
        }
        for b in &self.bounds {
            if let (Some(l), Some(u)) = (b.lower, b.upper) {
                if l > u {
                    return Err("empty variable box".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: Status,
    pub x: Vec<f64>,
    /// One entry per row of the input problem. For `≤` rows of a
    /// maximization these are non-negative.
    pub duals: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn failed(status: Status, lp: &LinearProgram) -> Self {
        LpSolution {
            status,
            x: vec![f64::NAN; lp.vars()],
            duals: vec![f64::NAN; lp.rows.len()],
            objective: match status {
                Status::Unbounded => f64::INFINITY,
                _ => f64::NAN,
            },
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Turns every non-optimal status into an error.
    pub fn into_result(self) -> Result<LpSolution> {
        match self.status {
            Status::Optimal => Ok(self),
            Status::Numerical => Err(Error::Numerical("simplex did not converge".into())),
            s => Err(Error::Numerical(format!("linear program is {s:?}"))),
        }
    }
}

/// How an original variable is rebuilt from non-negative columns.
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Le,
    Ge,
    Eq,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// `rows + 1` lines of `width + 1`; the last line is the objective and
    /// the last column the right-hand side.
    cells: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * (self.width + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width + 1;
        let p = self.cells[r * w + c];
        for j in 0..w {
            self.cells[r * w + j] /= p;
        }
        self.cells[r * w + c] = 1.0;
        let (before, rest) = self.cells.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |line: &mut [f64]| {
            let f = line[c];
            if f != 0.0 {
                for j in 0..w {
                    line[j] -= f * prow[j];
                }
                line[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        self.basis[r] = c;
    }

    /// Writes `-cost` into the objective line and prices out the basis.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width + 1;
        let o = self.obj_row();
        for j in 0..w {
            self.cells[o * w + j] = 0.0;
        }
        for (j, &c) in cost.iter().enumerate() {
            self.cells[o * w + j] = -c;
        }
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.cells[o * w + j] += cb * self.cells[i * w + j];
                }
            }
        }
    }

    /// Primal simplex iterations. Entering columns are priced by the most
    /// negative reduced cost; after a run of degenerate pivots the rule
    /// switches to Bland's, which cannot cycle. `limit` bounds the entering
    /// column range.
    fn optimize(&mut self, limit: usize, max_iter: usize) -> Status {
        let o = self.obj_row();
        let mut stalled = 0usize;
        for _ in 0..max_iter {
            let bland = stalled > DEGENERATE_RUN;
            let enter = if bland {
                (0..limit).find(|&j| self.at(o, j) < -OPT_TOL)
            } else {
                (0..limit)
                    .filter(|&j| self.at(o, j) < -OPT_TOL)
                    .min_by(|&a, &b| self.at(o, a).total_cmp(&self.at(o, b)))
            };
            let Some(enter) = enter else {
                return Status::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let slack = 1e-12 * best.abs().max(1.0);
                            if ratio < best - slack
                                || (ratio <= best + slack && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Status::Unbounded;
            };
            if ratio == 0.0 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            self.pivot(r, enter);
            if !self.rhs(o).is_finite() {
                return Status::Numerical;
            }
        }
        Status::Numerical
    }

    fn dump(&self, label: &str) {
        if log::log_enabled!(log::Level::Trace) {
            log::trace!("tableau {label}: basis {:?}", self.basis);
            for line in self.cells.chunks(self.width + 1) {
                log::trace!("  {line:?}");
            }
        }
    }
}

/// Solves `lp` to optimality or reports why it cannot.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    if let Err(msg) = lp.validate() {
        log::debug!("rejecting malformed LP: {msg}");
        return LpSolution::failed(Status::Numerical, lp);
    }

    // Map every original variable onto non-negative columns.
    let mut maps = Vec::with_capacity(lp.vars());
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        let m = match (b.lower, b.upper) {
            (Some(l), u) => {
                if let Some(u) = u {
                    bound_rows.push((ncols, u - l));
                }
                VarMap {
                    offset: l,
                    cols: vec![(ncols, 1.0)],
                }
            }
            (None, Some(u)) => VarMap {
                offset: u,
                cols: vec![(ncols, -1.0)],
            },
            (None, None) => {
                ncols += 1;
                VarMap {
                    offset: 0.0,
                    cols: vec![(ncols - 1, 1.0), (ncols, -1.0)],
                }
            }
        };
        ncols += 1;
        maps.push(m);
    }

    // Rows over the new columns, right-hand sides made non-negative.
    let mut rows: Vec<(Vec<f64>, Sense, f64, bool)> = Vec::new();
    for r in &lp.rows {
        let mut coeffs = vec![0.0; ncols];
        let mut rhs = r.rhs;
        for (j, &a) in r.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            rhs -= a * maps[j].offset;
            for &(c, s) in &maps[j].cols {
                coeffs[c] += a * s;
            }
        }
        let sense = match r.kind {
            RowKind::Le => Sense::Le,
            RowKind::Eq => Sense::Eq,
        };
        rows.push((coeffs, sense, rhs, false));
    }
    for &(c, width) in &bound_rows {
        let mut coeffs = vec![0.0; ncols];
        coeffs[c] = 1.0;
        rows.push((coeffs, Sense::Le, width, false));
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|a| *a = -*a);
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            row.3 = true;
        }
    }

    // Column layout: structural | slack or surplus | artificial.
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let first_slack = ncols;
    let first_art = ncols + n_slack;
    let width = first_art + n_art;
    let mut t = Tableau {
        rows: m,
        width,
        cells: vec![0.0; (m + 1) * (width + 1)],
        basis: vec![0; m],
        first_artificial: first_art,
    };
    // column carrying +e_i for each row, used to read duals
    let mut unit_col = vec![0usize; m];
    let (mut s, mut a) = (first_slack, first_art);
    for (i, (coeffs, sense, rhs, _)) in rows.iter().enumerate() {
        let w = width + 1;
        t.cells[i * w..i * w + ncols].copy_from_slice(coeffs);
        t.cells[i * w + width] = *rhs;
        match sense {
            Sense::Le => {
                t.cells[i * w + s] = 1.0;
                t.basis[i] = s;
                unit_col[i] = s;
                s += 1;
            }
            Sense::Ge => {
                t.cells[i * w + s] = -1.0;
                t.cells[i * w + a] = 1.0;
                t.basis[i] = a;
                unit_col[i] = a;
                s += 1;
                a += 1;
            }
            Sense::Eq => {
                t.cells[i * w + a] = 1.0;
                t.basis[i] = a;
                unit_col[i] = a;
                a += 1;
            }
        }
    }
    let max_iter = 50_000 + 50 * (m + width);
    t.dump("initial");

    // Phase 1: drive artificials to zero.
    if n_art > 0 {
        let mut cost = vec![0.0; width];
        cost[first_art..].iter_mut().for_each(|c| *c = -1.0);
        t.set_objective(&cost);
        match t.optimize(width, max_iter) {
            Status::Optimal => {}
            _ => return LpSolution::failed(Status::Numerical, lp),
        }
        let infeas = -t.rhs(t.obj_row());
        let scale = rows.iter().map(|r| r.2).fold(1.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return LpSolution::failed(Status::Infeasible, lp);
        }
        for i in 0..m {
            if t.basis[i] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| t.at(i, j).abs() > PIVOT_TOL) {
                    t.pivot(i, j);
                }
            }
        }
        t.dump("after phase 1");
    }

    // Phase 2: the real objective; artificials may not re-enter.
    let mut cost = vec![0.0; width];
    for (j, &c) in lp.objective.iter().enumerate() {
        for &(col, s) in &maps[j].cols {
            cost[col] += c * s;
        }
    }
    t.set_objective(&cost);
    match t.optimize(t.first_artificial, max_iter) {
        Status::Optimal => {}
        s => return LpSolution::failed(s, lp),
    }
    t.dump("optimal");

    let mut z = vec![0.0; width];
    for i in 0..m {
        z[t.basis[i]] = t.rhs(i);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|vm| vm.offset + vm.cols.iter().map(|&(c, s)| s * z[c]).sum::<f64>())
        .collect();
    let o = t.obj_row();
    let duals: Vec<f64> = (0..lp.rows.len())
        .map(|i| {
            let d = t.at(o, unit_col[i]);
            if rows[i].3 {
                -d
            } else {
                d
            }
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    // Reject solutions that drifted outside the feasible region.
    for r in &lp.rows {
        let lhs: f64 = r.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum();
        let scale = r
            .coeffs
            .iter()
            .zip(&x)
            .map(|(a, v)| (a * v).abs())
            .fold(r.rhs.abs().max(1.0), f64::max);
        let viol = match r.kind {
            RowKind::Le => lhs - r.rhs,
            RowKind::Eq => (lhs - r.rhs).abs(),
        };
        if viol > FEAS_TOL * scale {
            log::debug!("primal residual {viol} exceeds tolerance");
            return LpSolution::failed(Status::Numerical, lp);
        }
    }

    LpSolution {
        status: Status::Optimal,
        x,
        duals,
        objective,
    }
}

/// Maximum (or minimum) of `direction·x` over the optimal face
/// `{x feasible : objective·x = optimum}`; infinite when unbounded.
pub fn face_extreme(
    lp: &LinearProgram,
    optimum: f64,
    direction: &[f64],
    maximize: bool,
) -> Result<f64> {
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut face = lp.clone();
    face.add_eq(lp.objective.clone(), optimum);
    face.objective = direction.iter().map(|d| sign * d).collect();
    let mut sol = solve(&face);
    if sol.status == Status::Infeasible {
        // optimum may sit a hair above the attainable value
        let tol = FEAS_TOL * optimum.abs().max(1.0);
        let last = face.rows.len() - 1;
        face.rows[last] = Row {
            coeffs: lp.objective.iter().map(|c| -c).collect(),
            kind: RowKind::Le,
            rhs: -(optimum - tol),
        };
        sol = solve(&face);
    }
    match sol.status {
        Status::Optimal => Ok(sign * sol.objective),
        Status::Unbounded => Ok(sign * f64::INFINITY),
        s => Err(Error::Numerical(format!("face probe is {s:?}"))),
    }
}

/// Minimum and maximum of `direction·x` over the optimal face.
pub fn face_range(lp: &LinearProgram, optimum: f64, direction: &[f64]) -> Result<(f64, f64)> {
    let lo = face_extreme(lp, optimum, direction, false)?;
    let hi = face_extreme(lp, optimum, direction, true)?;
    Ok((lo, hi))
}

/// Range of variable `var` over the optimal face.
pub fn probe_range(lp: &LinearProgram, optimum: f64, var: usize) -> Result<(f64, f64)> {
    let mut dir = vec![0.0; lp.vars()];
    dir[var] = 1.0;
    face_range(lp, optimum, &dir)
}
