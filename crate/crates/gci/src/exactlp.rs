//! Exact rational linear feasibility (phase-1 simplex with Bland's rule).
//!
//! `is_feasible` is the reference solver: pure rational arithmetic, exact
//! decisions, witnesses re-checked against every constraint. `is_feasible_accel`
//! answers the same question but probes with a floating-point phase-1 first and
//! only trusts exactly verified rational witnesses / Farkas certificates,
//! falling back to the reference path otherwise. The census pipelines call the
//! accelerated entry point; both must agree everywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::gaussians::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Geq,
}

#[derive(Debug, Clone)]
pub struct Row {
    /// sparse coefficients, strictly increasing variable indices
    pub coeffs: Vec<(u32, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
}

/// Feasibility instance: equality and >= constraints over rational variables.
/// Variables are free by default; `nonneg` marks sign-restricted ones.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub nonneg: Vec<bool>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Feasible(Vec<Rat>),
    Infeasible,
}

impl Verdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Verdict::Feasible(_))
    }
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            nonneg: vec![false; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn with_nonneg_vars(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            nonneg: vec![true; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn add_sparse(&mut self, mut coeffs: Vec<(u32, Rat)>, rel: Rel, rhs: Rat) {
        coeffs.retain(|(_, c)| !c.is_zero());
        coeffs.sort_by_key(|&(v, _)| v);
        debug_assert!(coeffs.iter().all(|&(v, _)| (v as usize) < self.num_vars));
        debug_assert!(coeffs.windows(2).all(|w| w[0].0 < w[1].0));
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn add_dense(&mut self, coeffs: &[Rat], rel: Rel, rhs: Rat) {
        assert_eq!(coeffs.len(), self.num_vars);
        let sparse = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| (v as u32, c.clone()))
            .collect();
        self.rows.push(Row {
            coeffs: sparse,
            rel,
            rhs,
        });
    }

    pub fn eval_row(row: &Row, x: &[Rat]) -> Rat {
        row.coeffs
            .iter()
            .map(|(v, c)| c * &x[*v as usize])
            .fold(Rat::zero(), |a, b| a + b)
    }

    /// Exact check of a candidate point against every constraint.
    pub fn satisfies(&self, x: &[Rat]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        for (v, &nn) in self.nonneg.iter().enumerate() {
            if nn && x[v].is_negative() {
                return false;
            }
        }
        self.rows.iter().all(|row| {
            let lhs = Self::eval_row(row, x);
            match row.rel {
                Rel::Eq => lhs == row.rhs,
                Rel::Geq => lhs >= row.rhs,
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Standard form shared by the exact and float simplex paths.

/// Column layout of the standard form A z = b, z >= 0:
/// per-variable columns (one for nonneg vars, a +/- pair for free vars),
/// then one surplus column per Geq row, then artificials.
struct StdShape {
    // var -> (positive column, optional negative column)
    var_cols: Vec<(usize, Option<usize>)>,
    n_struct_cols: usize, // structural + surplus columns (Farkas checks these)
    n_cols: usize,        // including artificials
    // per row: sign flip applied, artificial column (usize::MAX = none)
    flip: Vec<bool>,
    art_col: Vec<usize>,
    surplus_col: Vec<usize>, // usize::MAX for Eq rows
}

fn build_shape(sys: &LinearSystem) -> StdShape {
    let mut var_cols = Vec::with_capacity(sys.num_vars);
    let mut next = 0usize;
    for &nn in &sys.nonneg {
        if nn {
            var_cols.push((next, None));
            next += 1;
        } else {
            var_cols.push((next, Some(next + 1)));
            next += 2;
        }
    }
    let mut surplus_col = vec![usize::MAX; sys.rows.len()];
    for (r, row) in sys.rows.iter().enumerate() {
        if row.rel == Rel::Geq {
            surplus_col[r] = next;
            next += 1;
        }
    }
    let n_struct_cols = next;
    let mut flip = vec![false; sys.rows.len()];
    let mut art_col = vec![usize::MAX; sys.rows.len()];
    for (r, row) in sys.rows.iter().enumerate() {
        match row.rel {
            Rel::Geq => {
                if row.rhs.is_positive() {
                    // a.x - s = b, b > 0: artificial basic
                    art_col[r] = next;
                    next += 1;
                } else {
                    // negate: -a.x + s = -b >= 0: surplus basic
                    flip[r] = true;
                }
            }
            Rel::Eq => {
                flip[r] = row.rhs.is_negative();
                art_col[r] = next;
                next += 1;
            }
        }
    }
    StdShape {
        var_cols,
        n_struct_cols,
        n_cols: next,
        flip,
        art_col,
        surplus_col,
    }
}

trait LpNum: Clone + std::fmt::Debug {
    fn lp_zero() -> Self;
    fn lp_one() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn lp_add(&self, o: &Self) -> Self;
    fn lp_sub(&self, o: &Self) -> Self;
    fn lp_mul(&self, o: &Self) -> Self;
    fn lp_div(&self, o: &Self) -> Self;
    fn lp_neg(&self) -> Self;
    fn lp_is_zero(&self) -> bool;
    fn lp_is_negative(&self) -> bool;
    fn lp_is_positive(&self) -> bool {
        !self.lp_is_zero() && !self.lp_is_negative()
    }
    fn lp_ratio_lt(a: (&Self, &Self), b: (&Self, &Self)) -> bool;
}

impl LpNum for Rat {
    fn lp_zero() -> Self {
        Zero::zero()
    }
    fn lp_one() -> Self {
        One::one()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn lp_add(&self, o: &Self) -> Self {
        self + o
    }
    fn lp_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn lp_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn lp_div(&self, o: &Self) -> Self {
        self / o
    }
    fn lp_neg(&self) -> Self {
        -self
    }
    fn lp_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn lp_is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn lp_ratio_lt(a: (&Self, &Self), b: (&Self, &Self)) -> bool {
        // a.0/a.1 < b.0/b.1 with positive denominators
        a.0 * b.1 < b.0 * a.1
    }
}

const FEPS: f64 = 1e-9;

impl LpNum for f64 {
    fn lp_zero() -> Self {
        0.0
    }
    fn lp_one() -> Self {
        1.0
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
    fn lp_add(&self, o: &Self) -> Self {
        self + o
    }
    fn lp_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn lp_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn lp_div(&self, o: &Self) -> Self {
        self / o
    }
    fn lp_neg(&self) -> Self {
        -self
    }
    fn lp_is_zero(&self) -> bool {
        self.abs() <= FEPS
    }
    fn lp_is_negative(&self) -> bool {
        *self < -FEPS
    }
    fn lp_ratio_lt(a: (&Self, &Self), b: (&Self, &Self)) -> bool {
        a.0 / a.1 < b.0 / b.1
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let num: f64 = parse_bigint_f64(r.numer());
    let den: f64 = parse_bigint_f64(r.denom());
    num / den
}

fn parse_bigint_f64(b: &BigInt) -> f64 {
    // digit-string conversion keeps magnitude for values beyond i64
    b.to_string().parse().unwrap_or(f64::NAN)
}

struct Tableau<T> {
    ncols: usize,
    rows: Vec<Vec<T>>, // dense, rhs at index ncols
    basis: Vec<usize>,
    is_art: Vec<bool>,
}

fn build_tableau<T: LpNum>(sys: &LinearSystem, shape: &StdShape) -> Tableau<T> {
    let ncols = shape.n_cols;
    let mut rows = Vec::with_capacity(sys.rows.len());
    let mut basis = Vec::with_capacity(sys.rows.len());
    for (r, row) in sys.rows.iter().enumerate() {
        let mut dense = vec![T::lp_zero(); ncols + 1];
        let sign = if shape.flip[r] { -1 } else { 1 };
        for (v, c) in &row.coeffs {
            let (pc, nc) = shape.var_cols[*v as usize];
            let val = T::from_rat(c);
            let val = if sign < 0 { val.lp_neg() } else { val };
            dense[pc] = dense[pc].lp_add(&val);
            if let Some(ncol) = nc {
                dense[ncol] = dense[ncol].lp_sub(&val);
            }
        }
        if shape.surplus_col[r] != usize::MAX {
            // a.x - s = b, flipped to -a.x + s = -b when rhs <= 0
            dense[shape.surplus_col[r]] = if shape.flip[r] { T::lp_one() } else { T::lp_one().lp_neg() };
        }
        let rhs = T::from_rat(&row.rhs);
        dense[ncols] = if shape.flip[r] { rhs.lp_neg() } else { rhs };
        if shape.art_col[r] != usize::MAX {
            dense[shape.art_col[r]] = T::lp_one();
            basis.push(shape.art_col[r]);
        } else {
            basis.push(shape.surplus_col[r]);
        }
        rows.push(dense);
    }
    let is_art = (0..ncols).map(|c| c >= shape.n_struct_cols).collect();
    Tableau {
        ncols,
        rows,
        basis,
        is_art,
    }
}

enum Phase1<T> {
    Optimal { objective_zero: bool, solution: Vec<T> },
    IterationLimit,
}

/// Phase-1 simplex minimizing the artificial sum, Bland's rule throughout.
/// Artificials never re-enter the basis.
fn phase1<T: LpNum>(t: &mut Tableau<T>, max_iter: usize) -> Phase1<T> {
    let m = t.rows.len();
    let ncols = t.ncols;
    for _ in 0..max_iter {
        // reduced costs d_j = c_j - sum over rows with artificial basics
        let mut entering = usize::MAX;
        for j in 0..ncols {
            if t.is_art[j] {
                continue; // artificials never re-enter
            }
            let mut d = T::lp_zero();
            for r in 0..m {
                if t.is_art[t.basis[r]] {
                    d = d.lp_sub(&t.rows[r][j]);
                }
            }
            if d.lp_is_negative() {
                entering = j;
                break; // Bland: lowest index
            }
        }
        if entering == usize::MAX {
            let solution = basic_solution(t);
            let objective_zero = (0..m)
                .filter(|&r| t.is_art[t.basis[r]])
                .all(|r| t.rows[r][ncols].lp_is_zero());
            return Phase1::Optimal {
                objective_zero,
                solution,
            };
        }
        // ratio test, ties broken by lowest basis index (Bland)
        let mut leave = usize::MAX;
        for r in 0..m {
            if !t.rows[r][entering].lp_is_positive() {
                continue;
            }
            if leave == usize::MAX
                || T::lp_ratio_lt(
                    (&t.rows[r][ncols], &t.rows[r][entering]),
                    (&t.rows[leave][ncols], &t.rows[leave][entering]),
                )
                || (!T::lp_ratio_lt(
                    (&t.rows[leave][ncols], &t.rows[leave][entering]),
                    (&t.rows[r][ncols], &t.rows[r][entering]),
                ) && t.basis[r] < t.basis[leave])
            {
                leave = r;
            }
        }
        if leave == usize::MAX {
            // phase-1 objective is bounded below; only float noise lands here
            return Phase1::IterationLimit;
        }
        pivot(t, leave, entering);
    }
    Phase1::IterationLimit
}

fn pivot<T: LpNum>(t: &mut Tableau<T>, leave: usize, enter: usize) {
    let piv = t.rows[leave][enter].clone();
    for c in 0..=t.ncols {
        t.rows[leave][c] = t.rows[leave][c].lp_div(&piv);
    }
    for r in 0..t.rows.len() {
        if r == leave || t.rows[r][enter].lp_is_zero() {
            continue;
        }
        let f = t.rows[r][enter].clone();
        for c in 0..=t.ncols {
            let delta = f.lp_mul(&t.rows[leave][c]);
            t.rows[r][c] = t.rows[r][c].lp_sub(&delta);
        }
    }
    t.basis[leave] = enter;
}

fn basic_solution<T: LpNum>(t: &Tableau<T>) -> Vec<T> {
    let mut sol = vec![T::lp_zero(); t.ncols];
    for (r, &b) in t.basis.iter().enumerate() {
        sol[b] = t.rows[r][t.ncols].clone();
    }
    sol
}

fn witness_from_std<T: LpNum>(shape: &StdShape, sol: &[T]) -> Vec<T> {
    shape
        .var_cols
        .iter()
        .map(|&(pc, nc)| match nc {
            Some(ncol) => sol[pc].lp_sub(&sol[ncol]),
            None => sol[pc].clone(),
        })
        .collect()
}

/// Reference exact feasibility decision. FEASIBLE returns a rational witness
/// satisfying every constraint exactly (re-substitution is checked);
/// INFEASIBLE is certified by a positive phase-1 optimum.
pub fn is_feasible(sys: &LinearSystem) -> Verdict {
    if sys.rows.is_empty() {
        return Verdict::Feasible(vec![Rat::zero(); sys.num_vars]);
    }
    let shape = build_shape(sys);
    let mut t = build_tableau::<Rat>(sys, &shape);
    match phase1(&mut t, usize::MAX) {
        Phase1::Optimal {
            objective_zero: true,
            solution,
        } => {
            let x = witness_from_std(&shape, &solution);
            assert!(sys.satisfies(&x), "exact witness failed re-substitution");
            Verdict::Feasible(x)
        }
        Phase1::Optimal {
            objective_zero: false,
            ..
        } => Verdict::Infeasible,
        Phase1::IterationLimit => unreachable!("exact phase-1 with Bland terminates"),
    }
}

// ---------------------------------------------------------------------------
// Accelerated path: float probe, rational rounding, exact certificates.

/// Continued-fraction rationalization with bounded denominator.
fn round_to_rat(x: f64, max_den: u64) -> Rat {
    if !x.is_finite() {
        return Rat::zero();
    }
    if x.abs() < 1e-12 {
        return Rat::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    // continued fraction convergents
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    for _ in 0..40 {
        let a = v.floor();
        if a >= u64::MAX as f64 {
            break;
        }
        let ai = a as u64;
        let p2 = ai.checked_mul(p1).and_then(|t| t.checked_add(p0));
        let q2 = ai.checked_mul(q1).and_then(|t| t.checked_add(q0));
        let (Some(p2), Some(q2)) = (p2, q2) else { break };
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return Rat::zero();
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

enum FloatOutcome {
    Feasible(Vec<f64>),
    Infeasible(Vec<f64>), // row duals y
    Unreliable,
}

fn float_probe(sys: &LinearSystem) -> FloatOutcome {
    let shape = build_shape(sys);
    let mut t = build_tableau::<f64>(sys, &shape);
    let cap = 400 + 40 * (sys.rows.len() + sys.num_vars);
    match phase1(&mut t, cap) {
        Phase1::Optimal {
            objective_zero,
            solution,
        } => {
            if objective_zero {
                FloatOutcome::Feasible(witness_from_std(&shape, &solution))
            } else {
                // duals y_r = 1 - reduced cost of the artificial column r;
                // artificial col of row r is the unit vector e_r, so its
                // tableau column holds B^-1 e_r and the reduced cost is
                // 1 - sum over artificial-basic rows of that column.
                let m = t.rows.len();
                let mut y = vec![0.0; m];
                for (r, yr) in y.iter_mut().enumerate() {
                    let col = shape.art_col[r];
                    let mut price = 0.0;
                    if col != usize::MAX {
                        for rr in 0..m {
                            if t.is_art[t.basis[rr]] {
                                price += t.rows[rr][col];
                            }
                        }
                    } else {
                        // no artificial: price out the original unit column
                        // via the surplus column (it equals -/+ e_r scaled)
                        let sc = shape.surplus_col[r];
                        let mut s = 0.0;
                        for rr in 0..m {
                            if t.is_art[t.basis[rr]] {
                                s += t.rows[rr][sc];
                            }
                        }
                        // surplus col was +-e_r: recover the e_r price
                        price = if shape.flip[r] { s } else { -s };
                    }
                    // undo row sign normalization
                    *yr = if shape.flip[r] { -price } else { price };
                }
                FloatOutcome::Infeasible(y)
            }
        }
        Phase1::IterationLimit => FloatOutcome::Unreliable,
    }
}

/// Verifies a rational Farkas certificate y for infeasibility of `sys`:
/// y_r >= 0 on Geq rows, y^T A <= 0 on nonneg vars (= 0 on free vars),
/// and y^T b > 0.
pub fn verify_farkas(sys: &LinearSystem, y: &[Rat]) -> bool {
    if y.len() != sys.rows.len() {
        return false;
    }
    for (r, row) in sys.rows.iter().enumerate() {
        if row.rel == Rel::Geq && y[r].is_negative() {
            return false;
        }
    }
    let mut combo = vec![Rat::zero(); sys.num_vars];
    let mut rhs = Rat::zero();
    for (r, row) in sys.rows.iter().enumerate() {
        if y[r].is_zero() {
            continue;
        }
        for (v, c) in &row.coeffs {
            combo[*v as usize] += &y[r] * c;
        }
        rhs += &y[r] * &row.rhs;
    }
    if !rhs.is_positive() {
        return false;
    }
    combo.iter().zip(&sys.nonneg).all(|(c, &nn)| {
        if nn {
            !c.is_positive()
        } else {
            c.is_zero()
        }
    })
}

/// Result of exact equality elimination.
struct Reduced {
    sys: LinearSystem,
    // old var -> Err(column in reduced system) or Ok(affine expr over old vars)
    expr: Vec<ExprOrCol>,
    old_num_vars: usize,
}

enum ExprOrCol {
    Col(u32),
    // eliminated: constant + sum coeff * old_var
    Expr(Rat, Vec<(u32, Rat)>),
}

/// Gaussian elimination of equality rows; keeps equivalence by emitting
/// `expr >= 0` rows for eliminated nonneg variables. Returns None when an
/// inconsistent equality (0 = c, c != 0) is found.
fn eliminate_equalities(sys: &LinearSystem) -> Option<Reduced> {
    #[derive(Clone)]
    struct EqRow {
        coeffs: Vec<(u32, Rat)>, // sorted
        rhs: Rat,
    }
    let mut eqs: Vec<EqRow> = Vec::new();
    let mut geqs: Vec<(Vec<(u32, Rat)>, Rat)> = Vec::new();
    for row in &sys.rows {
        match row.rel {
            Rel::Eq => eqs.push(EqRow {
                coeffs: row.coeffs.clone(),
                rhs: row.rhs.clone(),
            }),
            Rel::Geq => geqs.push((row.coeffs.clone(), row.rhs.clone())),
        }
    }
    // substitution per eliminated var: affine expr over *remaining* old vars
    let mut subst: Vec<Option<(Rat, Vec<(u32, Rat)>)>> = vec![None; sys.num_vars];
    let apply_subst = |coeffs: &mut Vec<(u32, Rat)>,
                       rhs: &mut Rat,
                       subst: &Vec<Option<(Rat, Vec<(u32, Rat)>)>>| {
        loop {
            let Some(pos) = coeffs.iter().position(|(v, _)| subst[*v as usize].is_some()) else {
                break;
            };
            let (v, c) = coeffs.remove(pos);
            let (k, expr) = subst[v as usize].as_ref().unwrap();
            // v = k + expr: the constant part c*k moves to the rhs
            *rhs -= &c * k;
            for (ev, ec) in expr {
                let add = &c * ec;
                match coeffs.binary_search_by_key(ev, |&(vv, _)| vv) {
                    Ok(i) => {
                        coeffs[i].1 += add;
                        if coeffs[i].1.is_zero() {
                            coeffs.remove(i);
                        }
                    }
                    Err(i) => {
                        if !add.is_zero() {
                            coeffs.insert(i, (*ev, add));
                        }
                    }
                }
            }
        }
    };
    let mut processed: Vec<EqRow> = Vec::new();
    while let Some(mut row) = eqs.pop() {
        apply_subst(&mut row.coeffs, &mut row.rhs, &subst);
        if row.coeffs.is_empty() {
            if !row.rhs.is_zero() {
                return None;
            }
            continue;
        }
        // pivot on the variable with coefficient of smallest magnitude 1 if
        // possible, else the first
        let pidx = row
            .coeffs
            .iter()
            .position(|(_, c)| c.numer().magnitude() == c.denom().magnitude())
            .unwrap_or(0);
        let (pv, pc) = row.coeffs.remove(pidx);
        // pv = (rhs - rest)/pc
        let k = &row.rhs / &pc;
        let expr: Vec<(u32, Rat)> = row
            .coeffs
            .iter()
            .map(|(v, c)| (*v, -(c / &pc)))
            .collect();
        // substitute into existing substitutions
        for s in subst.iter_mut().flatten() {
            if let Ok(i) = s.1.binary_search_by_key(&pv, |&(vv, _)| vv) {
                let (_, c) = s.1.remove(i);
                s.0 += &c * &k;
                for (ev, ec) in &expr {
                    let add = &c * ec;
                    match s.1.binary_search_by_key(ev, |&(vv, _)| vv) {
                        Ok(t) => {
                            s.1[t].1 += add;
                            if s.1[t].1.is_zero() {
                                s.1.remove(t);
                            }
                        }
                        Err(t) => {
                            if !add.is_zero() {
                                s.1.insert(t, (*ev, add));
                            }
                        }
                    }
                }
            }
        }
        subst[pv as usize] = Some((k, expr));
        processed.push(EqRow {
            coeffs: Vec::new(),
            rhs: Rat::zero(),
        });
    }
    drop(processed);
    // remaining variables get new columns
    let mut expr_out: Vec<ExprOrCol> = Vec::with_capacity(sys.num_vars);
    let mut col_of: Vec<u32> = vec![u32::MAX; sys.num_vars];
    let mut ncols = 0u32;
    for v in 0..sys.num_vars {
        if subst[v].is_none() {
            col_of[v] = ncols;
            expr_out.push(ExprOrCol::Col(ncols));
            ncols += 1;
        } else {
            let (k, e) = subst[v].clone().unwrap();
            expr_out.push(ExprOrCol::Expr(k, e));
        }
    }
    let mut out = LinearSystem::new(ncols as usize);
    for v in 0..sys.num_vars {
        if let ExprOrCol::Col(c) = expr_out[v] {
            out.nonneg[c as usize] = sys.nonneg[v];
        }
    }
    let remap = |coeffs: &[(u32, Rat)]| -> Vec<(u32, Rat)> {
        coeffs
            .iter()
            .map(|(v, c)| (col_of[*v as usize], c.clone()))
            .collect()
    };
    for (mut coeffs, mut rhs) in geqs {
        apply_subst(&mut coeffs, &mut rhs, &subst);
        if coeffs.is_empty() {
            if rhs.is_positive() {
                return None; // 0 >= positive
            }
            continue;
        }
        out.add_sparse(remap(&coeffs), Rel::Geq, rhs);
    }
    // nonneg bounds for eliminated nonneg vars: expr >= 0
    for v in 0..sys.num_vars {
        if !sys.nonneg[v] {
            continue;
        }
        if let ExprOrCol::Expr(k, e) = &expr_out[v] {
            let mut coeffs = e.clone();
            let mut rhs = -k.clone();
            apply_subst(&mut coeffs, &mut rhs, &subst);
            if coeffs.is_empty() {
                if rhs.is_positive() {
                    return None;
                }
                continue;
            }
            out.add_sparse(remap(&coeffs), Rel::Geq, rhs);
        }
    }
    Some(Reduced {
        sys: out,
        expr: expr_out,
        old_num_vars: sys.num_vars,
    })
}

impl Reduced {
    fn reconstruct(&self, x_reduced: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.old_num_vars];
        // first pass: direct columns
        for (v, e) in self.expr.iter().enumerate() {
            if let ExprOrCol::Col(c) = e {
                out[v] = x_reduced[*c as usize].clone();
            }
        }
        // second pass: eliminated vars (exprs reference only remaining vars)
        for (v, e) in self.expr.iter().enumerate() {
            if let ExprOrCol::Expr(k, terms) = e {
                let mut val = k.clone();
                for (ov, c) in terms {
                    val += c * &out[*ov as usize];
                }
                out[v] = val;
            }
        }
        out
    }
}

/// Same contract as [`is_feasible`], accelerated: exact equality elimination,
/// float phase-1 probe, exactly verified witness or Farkas certificate, and
/// the exact reference solver as a fallback. Systems with many rows go
/// through row generation so the dense tableau stays small. Never returns an
/// unverified answer.
pub fn is_feasible_accel(sys: &LinearSystem) -> Verdict {
    let Some(red) = eliminate_equalities(sys) else {
        return Verdict::Infeasible;
    };
    if red.sys.rows.is_empty() {
        let x = red.reconstruct(&vec![Rat::zero(); red.sys.num_vars]);
        if sys.satisfies(&x) {
            return Verdict::Feasible(x);
        }
        return is_feasible(sys);
    }
    let verdict = if red.sys.rows.len() > 700 {
        solve_by_row_generation(&red.sys)
    } else {
        solve_inequalities(&red.sys)
    };
    match verdict {
        Verdict::Feasible(xr) => {
            let x = red.reconstruct(&xr);
            if sys.satisfies(&x) {
                Verdict::Feasible(x)
            } else {
                // elimination bug guard: authoritative answer from the reference
                is_feasible(sys)
            }
        }
        Verdict::Infeasible => Verdict::Infeasible,
    }
}

/// Feasibility of a (mostly inequality) system: float probe with exactly
/// verified certificates, exact phase-1 as the fallback.
fn solve_inequalities(sys: &LinearSystem) -> Verdict {
    match float_probe(sys) {
        FloatOutcome::Feasible(xf) => {
            // margins first: re-probe with unit slack on tight homogeneous rows
            let mut tight = sys.clone();
            for row in tight.rows.iter_mut() {
                if row.rel == Rel::Geq && row.rhs.is_zero() {
                    row.rhs = Rat::one();
                }
            }
            let cand = match float_probe(&tight) {
                FloatOutcome::Feasible(xt) => Some(xt),
                _ => None,
            };
            for xf in cand.iter().chain(std::iter::once(&xf)) {
                let xr: Vec<Rat> = xf.iter().map(|&v| round_to_rat(v, 1 << 20)).collect();
                if sys.satisfies(&xr) {
                    return Verdict::Feasible(xr);
                }
            }
        }
        FloatOutcome::Infeasible(yf) => {
            let yr: Vec<Rat> = yf.iter().map(|&v| round_to_rat(v, 1 << 20)).collect();
            if verify_farkas(sys, &yr) {
                return Verdict::Infeasible;
            }
        }
        FloatOutcome::Unreliable => {}
    }
    is_feasible(sys)
}

/// Lazy-constraint loop: solve a working subset, check the witness against
/// every row exactly, pull in violated rows, repeat. An infeasible subset
/// certifies infeasibility of the whole system.
fn solve_by_row_generation(sys: &LinearSystem) -> Verdict {
    let zero_violated = |row: &Row| match row.rel {
        Rel::Eq => !row.rhs.is_zero(),
        Rel::Geq => row.rhs.is_positive(),
    };
    let mut active: Vec<usize> = (0..sys.rows.len())
        .filter(|&r| zero_violated(&sys.rows[r]) || sys.rows[r].rel == Rel::Eq)
        .collect();
    if active.is_empty() {
        let x = vec![Rat::zero(); sys.num_vars];
        if sys.satisfies(&x) {
            return Verdict::Feasible(x);
        }
        active = (0..sys.rows.len().min(64)).collect();
    }
    let mut in_active = vec![false; sys.rows.len()];
    for &r in &active {
        in_active[r] = true;
    }
    loop {
        let mut sub = LinearSystem::new(sys.num_vars);
        sub.nonneg = sys.nonneg.clone();
        for &r in &active {
            sub.rows.push(sys.rows[r].clone());
        }
        match solve_inequalities(&sub) {
            Verdict::Infeasible => return Verdict::Infeasible,
            Verdict::Feasible(x) => {
                let mut added = 0;
                for (r, row) in sys.rows.iter().enumerate() {
                    if in_active[r] {
                        continue;
                    }
                    let lhs = LinearSystem::eval_row(row, &x);
                    let violated = match row.rel {
                        Rel::Eq => lhs != row.rhs,
                        Rel::Geq => lhs < row.rhs,
                    };
                    if violated {
                        in_active[r] = true;
                        active.push(r);
                        added += 1;
                        if added >= 256 {
                            break;
                        }
                    }
                }
                if added == 0 {
                    debug_assert!(sys.satisfies(&x));
                    return Verdict::Feasible(x);
                }
            }
        }
    }
}

/// Independent feasibility oracle for small systems: vertex enumeration over
/// the constraint planes plus a bounding box (any feasible system with small
/// integer data has a feasible point well inside the box).
pub fn brute_force_feasible(sys: &LinearSystem, box_bound: i64) -> bool {
    let n = sys.num_vars;
    assert!(n <= 4, "vertex enumeration is exponential");
    // candidate tight sets: constraint rows and box planes x_i = +-M
    let mut planes: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for row in &sys.rows {
        let mut a = vec![Rat::zero(); n];
        for (v, c) in &row.coeffs {
            a[*v as usize] = c.clone();
        }
        planes.push((a, row.rhs.clone()));
    }
    for v in 0..n {
        for m in [box_bound, -box_bound] {
            let mut a = vec![Rat::zero(); n];
            a[v] = Rat::one();
            planes.push((a, Rat::from(BigInt::from(m))));
        }
    }
    let idx: Vec<usize> = (0..planes.len()).collect();
    let mut chosen = vec![0usize; n];
    fn rec(
        planes: &[(Vec<Rat>, Rat)],
        idx: &[usize],
        chosen: &mut [usize],
        depth: usize,
        start: usize,
        sys: &LinearSystem,
    ) -> bool {
        let n = sys.num_vars;
        if depth == n {
            // solve square system
            let mut a: Vec<Vec<Rat>> = chosen.iter().map(|&p| planes[p].0.clone()).collect();
            let b: Vec<Rat> = chosen.iter().map(|&p| planes[p].1.clone()).collect();
            if let Some(x) = solve_square(&mut a, &b) {
                if sys.satisfies(&x) {
                    return true;
                }
            }
            return false;
        }
        for s in start..idx.len() {
            chosen[depth] = idx[s];
            if rec(planes, idx, chosen, depth + 1, s + 1, sys) {
                return true;
            }
        }
        false
    }
    if sys.satisfies(&vec![Rat::zero(); n]) {
        return true;
    }
    rec(&planes, &idx, &mut chosen, 0, 0, sys)
}

fn solve_square(a: &mut [Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, p);
        let piv = aug[col][col].clone();
        for c in col..=n {
            let t = &aug[col][c] / &piv;
            aug[col][c] = t;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..=n {
                    let t = &aug[r][c] - &f * &aug[col][c];
                    aug[r][c] = t;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[row.len() - 1].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussians::{rat, rat_int};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn dense(sys: &mut LinearSystem, coeffs: &[i64], rel: Rel, rhs: i64) {
        let c: Vec<Rat> = coeffs.iter().map(|&v| rat_int(v)).collect();
        sys.add_dense(&c, rel, rat_int(rhs));
    }

    #[test]
    fn trivial_examples() {
        let sys = LinearSystem::new(1);
        match is_feasible(&sys) {
            Verdict::Feasible(x) => assert!(x[0].is_zero()),
            _ => panic!(),
        }
        let mut sys = LinearSystem::new(1);
        dense(&mut sys, &[1], Rel::Geq, 1);
        dense(&mut sys, &[1], Rel::Eq, 0);
        assert_eq!(is_feasible(&sys), Verdict::Infeasible);
        let mut sys = LinearSystem::new(2);
        dense(&mut sys, &[1, 1], Rel::Eq, 1);
        dense(&mut sys, &[1, 0], Rel::Geq, 1);
        dense(&mut sys, &[0, 1], Rel::Geq, 1);
        assert_eq!(is_feasible(&sys), Verdict::Infeasible);
    }

    #[test]
    fn feasible_with_witness() {
        let mut sys = LinearSystem::new(2);
        dense(&mut sys, &[1, 1], Rel::Eq, 2);
        dense(&mut sys, &[1, -1], Rel::Geq, 0);
        match is_feasible(&sys) {
            Verdict::Feasible(x) => {
                assert_eq!(&x[0] + &x[1], rat_int(2));
                assert!(&x[0] - &x[1] >= rat_int(0));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn free_variables_can_go_negative() {
        let mut sys = LinearSystem::new(1);
        dense(&mut sys, &[-1], Rel::Geq, 3); // -x >= 3, x free
        assert!(is_feasible(&sys).is_feasible());
        let mut sys = LinearSystem::with_nonneg_vars(1);
        dense(&mut sys, &[-1], Rel::Geq, 3);
        assert_eq!(is_feasible(&sys), Verdict::Infeasible);
    }

    #[test]
    fn rational_data() {
        let mut sys = LinearSystem::new(2);
        sys.add_dense(&[rat(1, 3), rat(1, 2)], Rel::Eq, rat(5, 6));
        sys.add_dense(&[rat(1, 1), rat(0, 1)], Rel::Geq, rat(1, 7));
        match is_feasible(&sys) {
            Verdict::Feasible(x) => {
                assert_eq!(rat(1, 3) * &x[0] + rat(1, 2) * &x[1], rat(5, 6));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn degenerate_termination_battery() {
        // many coinciding hyperplanes through the origin plus demands
        let mut sys = LinearSystem::with_nonneg_vars(3);
        for _ in 0..6 {
            dense(&mut sys, &[1, -1, 0], Rel::Geq, 0);
            dense(&mut sys, &[0, 1, -1], Rel::Geq, 0);
            dense(&mut sys, &[-1, 0, 1], Rel::Geq, 0);
        }
        dense(&mut sys, &[1, 1, 1], Rel::Eq, 0);
        assert!(is_feasible(&sys).is_feasible());
        dense(&mut sys, &[1, 0, 0], Rel::Geq, 1);
        assert_eq!(is_feasible(&sys), Verdict::Infeasible);
    }

    #[test]
    fn beale_style_degenerate_system() {
        // constraint data from the classical cycling example, posed as exact
        // feasibility with a demanding objective cut; Bland must terminate
        let mut sys = LinearSystem::with_nonneg_vars(4);
        sys.add_dense(
            &[rat(1, 4), rat_int(-60), rat(-1, 25), rat_int(9)],
            Rel::Eq,
            rat_int(0),
        );
        sys.add_dense(
            &[rat(1, 2), rat_int(-90), rat(-1, 50), rat_int(3)],
            Rel::Eq,
            rat_int(0),
        );
        sys.add_dense(
            &[rat_int(0), rat_int(0), rat_int(1), rat_int(0)],
            Rel::Eq,
            rat_int(1),
        );
        let v1 = is_feasible(&sys);
        assert!(v1.is_feasible());
        // demand a large objective value; brute force is the referee
        sys.add_dense(
            &[rat(3, 4), rat_int(150), rat(1, 50), rat_int(-6)],
            Rel::Geq,
            rat_int(1),
        );
        let fast = is_feasible(&sys).is_feasible();
        let brute = brute_force_feasible(&sys, 1_000_000);
        assert_eq!(fast, brute);
    }

    #[test]
    fn agrees_with_brute_force_on_random_small_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..120 {
            let nv = rng.gen_range(1..=3);
            let mut sys = LinearSystem::new(nv);
            for v in 0..nv {
                sys.nonneg[v] = rng.gen_bool(0.5);
            }
            let nrows = rng.gen_range(1..=5);
            for _ in 0..nrows {
                let coeffs: Vec<Rat> = (0..nv).map(|_| rat_int(rng.gen_range(-4..=4))).collect();
                let rel = if rng.gen_bool(0.4) { Rel::Eq } else { Rel::Geq };
                sys.add_dense(&coeffs, rel, rat_int(rng.gen_range(-4..=4)));
            }
            let fast = is_feasible(&sys).is_feasible();
            let brute = brute_force_feasible(&sys, 10_000);
            assert_eq!(fast, brute, "mismatch on {sys:?}");
        }
    }

    #[test]
    fn accel_agrees_with_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(4096);
        for _ in 0..200 {
            let nv = rng.gen_range(1..=5);
            let mut sys = LinearSystem::new(nv);
            for v in 0..nv {
                sys.nonneg[v] = rng.gen_bool(0.6);
            }
            let nrows = rng.gen_range(1..=8);
            for _ in 0..nrows {
                let coeffs: Vec<Rat> = (0..nv)
                    .map(|_| rat(rng.gen_range(-5..=5), rng.gen_range(1..=3)))
                    .collect();
                let rel = if rng.gen_bool(0.35) { Rel::Eq } else { Rel::Geq };
                sys.add_dense(&coeffs, rel, rat(rng.gen_range(-5..=5), 1));
            }
            let reference = is_feasible(&sys);
            let accel = is_feasible_accel(&sys);
            assert_eq!(reference.is_feasible(), accel.is_feasible(), "{sys:?}");
            if let Verdict::Feasible(x) = accel {
                assert!(sys.satisfies(&x));
            }
        }
    }

    #[test]
    fn farkas_verifier_rejects_junk() {
        let mut sys = LinearSystem::with_nonneg_vars(1);
        dense(&mut sys, &[1], Rel::Geq, 1);
        // system is feasible; no valid certificate exists
        assert!(!verify_farkas(&sys, &[rat_int(1)]));
        assert!(!verify_farkas(&sys, &[rat_int(-1)]));
    }
}
