//! Exact symmetric-matrix algebra: positive definiteness, Schur complements,
//! almost-principal minors, CI structure extraction and adhesive extensions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cicore::{num_statements, table, CIStructure};
use crate::error::{GciError, Result};

pub type Rat = BigRational;

pub fn rat(p: i64, q: i64) -> Rat {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    BigRational::from(BigInt::from(p))
}

/// Prints a rational as `p/q` (or just `p` for integers), no whitespace.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    let bad = || GciError::Parse(format!("bad rational `{t}`"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(p, q))
    } else {
        let p: BigInt = t.parse().map_err(|_| bad())?;
        Ok(BigRational::from(p))
    }
}

/// Symmetric matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatrixQ {
    n: usize,
    e: Vec<Rat>,
}

impl SymMatrixQ {
    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrixQ {
            n,
            e: vec![Rat::zero(); n * n],
        };
        for i in 0..n {
            m.e[i * n + i] = Rat::one();
        }
        m
    }

    /// Builds from row-major entries; rejects asymmetric input.
    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GciError::Parse("matrix is not square".into()));
        }
        let mut e = vec![Rat::zero(); n * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if j >= i {
                    e[i * n + j] = v.clone();
                    e[j * n + i] = v.clone();
                }
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if e[i * n + j] != *v {
                    return Err(GciError::Parse(format!(
                        "asymmetric entry at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(SymMatrixQ { n, e })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.e[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: Rat) {
        self.e[i * self.n + j] = v.clone();
        self.e[j * self.n + i] = v;
    }

    /// Principal submatrix on the 0-based index list (order preserved).
    pub fn principal(&self, idx: &[usize]) -> SymMatrixQ {
        let k = idx.len();
        let mut e = Vec::with_capacity(k * k);
        for &r in idx {
            for &c in idx {
                e.push(self.e[r * self.n + c].clone());
            }
        }
        SymMatrixQ { n: k, e }
    }

    /// General submatrix with given 0-based row and column lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|&r| cols.iter().map(|&c| self.e[r * self.n + c].clone()).collect())
            .collect()
    }

    /// Matrix file format: first line n, then n rows of n entries, each an
    /// integer or `p/q`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| GciError::Parse("empty matrix file".into()))?
            .trim()
            .parse()
            .map_err(|_| GciError::Parse("bad dimension line".into()))?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| GciError::Parse("missing matrix row".into()))?;
            let row: Result<Vec<Rat>> = line.split_whitespace().map(parse_rat).collect();
            let row = row?;
            if row.len() != n {
                return Err(GciError::Parse("wrong row length".into()));
            }
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| rat_to_string(self.get(i, j))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Exact determinant of a square rational matrix (fraction-free Bareiss on
/// the denominator-cleared integer matrix).
pub fn det_q(rows: &[Vec<Rat>]) -> Rat {
    let n = rows.len();
    if n == 0 {
        return Rat::one();
    }
    debug_assert!(rows.iter().all(|r| r.len() == n));
    let mut scale = BigInt::one();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in rows {
        let mut l = BigInt::one();
        for v in row {
            l = num_integer::lcm(l, v.denom().clone());
        }
        scale *= &l;
        m.push(row.iter().map(|v| v.numer() * (&l / v.denom())).collect());
    }
    let d = det_bareiss(&mut m);
    BigRational::new(d, scale)
}

fn det_bareiss(m: &mut [Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = t / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    if sign < 0 {
        -m[n - 1][n - 1].clone()
    } else {
        m[n - 1][n - 1].clone()
    }
}

/// Exact rank via rational Gaussian elimination.
pub fn rank_q(rows: &[Vec<Rat>]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let nrows = m.len();
    let ncols = if nrows == 0 { 0 } else { m[0].len() };
    let mut rank = 0;
    let mut col = 0;
    while rank < nrows && col < ncols {
        let Some(p) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            col += 1;
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].clone();
        for r in (rank + 1)..nrows {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &inv;
            for c in col..ncols {
                let t = &m[r][c] - &f * &m[rank][c];
                m[r][c] = t;
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Sylvester criterion: all leading principal minors positive.
pub fn is_positive_definite(m: &SymMatrixQ) -> bool {
    for k in 1..=m.n {
        let idx: Vec<usize> = (0..k).collect();
        let d = det_q(&m.submatrix(&idx, &idx));
        if !d.is_positive() {
            return false;
        }
    }
    true
}

/// All 2^n - 1 nonempty principal minors nonzero.
pub fn is_principally_regular(m: &SymMatrixQ) -> bool {
    let n = m.n;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if det_q(&m.submatrix(&idx, &idx)).is_zero() {
            return false;
        }
    }
    true
}

/// Schur complement of the block on `k_mask` (bit e-1 for element e),
/// returned on the complement indices in ascending order.
pub fn schur_complement(m: &SymMatrixQ, k_mask: u32) -> Result<SymMatrixQ> {
    let n = m.n;
    let k_idx: Vec<usize> = (0..n).filter(|&i| k_mask >> i & 1 == 1).collect();
    let c_idx: Vec<usize> = (0..n).filter(|&i| k_mask >> i & 1 == 0).collect();
    let xk = m.submatrix(&k_idx, &k_idx);
    let inv = invert_q(&xk).ok_or(GciError::SingularBlock)?;
    let a = m.submatrix(&c_idx, &k_idx);
    let b = m.submatrix(&k_idx, &c_idx);
    let c = m.submatrix(&c_idx, &c_idx);
    let k = k_idx.len();
    let cn = c_idx.len();
    let mut tmp = vec![vec![Rat::zero(); cn]; k];
    for r in 0..k {
        for cc in 0..cn {
            let mut s = Rat::zero();
            for t in 0..k {
                s += &inv[r][t] * &b[t][cc];
            }
            tmp[r][cc] = s;
        }
    }
    let mut out = vec![vec![Rat::zero(); cn]; cn];
    for r in 0..cn {
        for cc in 0..cn {
            let mut s = c[r][cc].clone();
            for t in 0..k {
                s -= &a[r][t] * &tmp[t][cc];
            }
            out[r][cc] = s;
        }
    }
    SymMatrixQ::from_rows(out)
}

/// Exact inverse via Gauss-Jordan; None when singular.
pub fn invert_q(rows: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = rows.len();
    let mut a: Vec<Vec<Rat>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        let piv = a[col][col].clone();
        for c in 0..2 * n {
            let t = &a[col][c] / &piv;
            a[col][c] = t;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let t = &a[r][c] - &f * &a[col][c];
                a[r][c] = t;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Almost-principal minor det Sigma_{iK,jK}: rows i then K ascending,
/// columns j then K ascending. i, j are 1-based elements, K a bitmask.
pub fn almost_principal_minor(m: &SymMatrixQ, i: usize, j: usize, k_mask: u32) -> Rat {
    assert!(i != j);
    assert_eq!(k_mask >> (i - 1) & 1, 0);
    assert_eq!(k_mask >> (j - 1) & 1, 0);
    let ks: Vec<usize> = (0..m.n).filter(|&e| k_mask >> e & 1 == 1).collect();
    let mut rows = vec![i - 1];
    rows.extend(&ks);
    let mut cols = vec![j - 1];
    cols.extend(&ks);
    det_q(&m.submatrix(&rows, &cols))
}

/// CI structure of a positive-definite matrix: statements with vanishing
/// almost-principal minor.
pub fn ci_structure_of(m: &SymMatrixQ) -> Result<CIStructure> {
    if !is_positive_definite(m) {
        return Err(GciError::NotPositiveDefinite);
    }
    let n = m.n;
    let tbl = table(n);
    let mut out = CIStructure::empty(n);
    for idx in 0..num_statements(n) {
        let s = tbl.stmts[idx];
        if almost_principal_minor(m, s.i as usize, s.j as usize, s.cond).is_zero() {
            out.insert(&s);
        }
    }
    Ok(out)
}

/// Alignment of two matrices along a shared block: the last `overlap` indices
/// of the left matrix are identified with the first `overlap` indices of the
/// right matrix.
#[derive(Debug, Clone, Copy)]
pub struct GlueSpec {
    pub n_left: usize,
    pub n_right: usize,
    pub overlap: usize,
}

impl GlueSpec {
    pub fn new(n_left: usize, n_right: usize, overlap: usize) -> Result<Self> {
        if overlap > n_left.min(n_right) {
            return Err(GciError::BadOverlap {
                overlap,
                n_left,
                n_right,
            });
        }
        Ok(GlueSpec {
            n_left,
            n_right,
            overlap,
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_left + self.n_right - self.overlap
    }
}

/// The unique positive-definite common extension with the two ground sets
/// conditionally independent given the overlap; the cross block is
/// Lambda = A_cross X^-1 B_cross.
///
/// Output layout: left-only indices, then the overlap, then right-only.
pub fn adhesive_extension(a: &SymMatrixQ, b: &SymMatrixQ, g: &GlueSpec) -> Result<SymMatrixQ> {
    assert_eq!(a.n, g.n_left);
    assert_eq!(b.n, g.n_right);
    let ov = g.overlap;
    let la = g.n_left - ov;
    let rb = g.n_right - ov;
    if !is_positive_definite(a) || !is_positive_definite(b) {
        return Err(GciError::NotPositiveDefinite);
    }
    for r in 0..ov {
        for c in 0..ov {
            if a.get(la + r, la + c) != b.get(r, c) {
                return Err(GciError::RestrictionMismatch);
            }
        }
    }
    let nt = g.n_total();
    let mut phi = SymMatrixQ {
        n: nt,
        e: vec![Rat::zero(); nt * nt],
    };
    for r in 0..g.n_left {
        for c in 0..g.n_left {
            phi.e[r * nt + c] = a.get(r, c).clone();
        }
    }
    for r in 0..g.n_right {
        for c in 0..g.n_right {
            phi.e[(la + r) * nt + (la + c)] = b.get(r, c).clone();
        }
    }
    if la > 0 && rb > 0 && ov > 0 {
        let ov_idx: Vec<usize> = (la..g.n_left).collect();
        let x = a.submatrix(&ov_idx, &ov_idx);
        let xinv = invert_q(&x).ok_or(GciError::SingularBlock)?;
        let left_idx: Vec<usize> = (0..la).collect();
        let a_cross = a.submatrix(&left_idx, &ov_idx);
        let right_only: Vec<usize> = (ov..g.n_right).collect();
        let ov_b: Vec<usize> = (0..ov).collect();
        let b_cross = b.submatrix(&ov_b, &right_only);
        for r in 0..la {
            for c in 0..rb {
                let mut s = Rat::zero();
                for t in 0..ov {
                    for u in 0..ov {
                        s += &a_cross[r][t] * &xinv[t][u] * &b_cross[u][c];
                    }
                }
                phi.e[r * nt + (g.n_left + c)] = s.clone();
                phi.e[(g.n_left + c) * nt + r] = s;
            }
        }
    }
    // overlap = 0 leaves the cross block zero: direct sum
    Ok(phi)
}

/// Checks both restriction equalities and the exact rank condition
/// rank Phi_{N,M} = overlap.
pub fn verify_adhesion(phi: &SymMatrixQ, a: &SymMatrixQ, b: &SymMatrixQ, g: &GlueSpec) -> bool {
    if phi.n != g.n_total() || a.n != g.n_left || b.n != g.n_right {
        return false;
    }
    let la = g.n_left - g.overlap;
    for r in 0..g.n_left {
        for c in 0..g.n_left {
            if phi.get(r, c) != a.get(r, c) {
                return false;
            }
        }
    }
    for r in 0..g.n_right {
        for c in 0..g.n_right {
            if phi.get(la + r, la + c) != b.get(r, c) {
                return false;
            }
        }
    }
    let n_idx: Vec<usize> = (0..g.n_left).collect();
    let m_idx: Vec<usize> = (la..phi.n).collect();
    rank_q(&phi.submatrix(&n_idx, &m_idx)) == g.overlap
}

/// Random strictly PD matrix M^T M + I with integer entries of M in [-3,3].
pub fn random_pd<R: rand::Rng>(n: usize, rng: &mut R) -> SymMatrixQ {
    let m: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect())
        .collect();
    let mut e = vec![Rat::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s: i64 = (0..n).map(|t| m[t][i] * m[t][j]).sum();
            if i == j {
                s += 1;
            }
            e[i * n + j] = rat_int(s);
        }
    }
    SymMatrixQ { n, e }
}

// ---------------------------------------------------------------------------
// Floating-point mirror for matrices with irrational entries.

/// Symmetric matrix with f64 entries; symmetry exact by mirrored storage.
#[derive(Debug, Clone)]
pub struct SymMatrixF {
    n: usize,
    e: Vec<f64>,
}

impl SymMatrixF {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GciError::Parse("matrix is not square".into()));
        }
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                e[i * n + j] = rows[i][j];
                e[j * n + i] = rows[i][j];
            }
        }
        Ok(SymMatrixF { n, e })
    }

    /// Accepts the rational matrix format plus decimal entries.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| GciError::Parse("empty matrix file".into()))?
            .trim()
            .parse()
            .map_err(|_| GciError::Parse("bad dimension line".into()))?;
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| GciError::Parse("missing matrix row".into()))?;
            let row: Result<Vec<f64>> = line
                .split_whitespace()
                .map(|tok| {
                    if let Some((p, q)) = tok.split_once('/') {
                        let p: f64 = p
                            .parse()
                            .map_err(|_| GciError::Parse(format!("bad entry `{tok}`")))?;
                        let q: f64 = q
                            .parse()
                            .map_err(|_| GciError::Parse(format!("bad entry `{tok}`")))?;
                        Ok(p / q)
                    } else {
                        tok.parse::<f64>()
                            .map_err(|_| GciError::Parse(format!("bad entry `{tok}`")))
                    }
                })
                .collect();
            let row = row?;
            if row.len() != n {
                return Err(GciError::Parse("wrong row length".into()));
            }
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.e[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.e[i * self.n + j] = v;
        self.e[j * self.n + i] = v;
    }

    pub fn principal_det(&self, idx: &[usize]) -> f64 {
        let mut m: Vec<Vec<f64>> = idx
            .iter()
            .map(|&r| idx.iter().map(|&c| self.e[r * self.n + c]).collect())
            .collect();
        det_f(&mut m, idx.len())
    }

    pub fn submatrix_det(&self, rows: &[usize], cols: &[usize]) -> f64 {
        let mut m: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| self.e[r * self.n + c]).collect())
            .collect();
        det_f(&mut m, rows.len())
    }
}

fn det_f(m: &mut [Vec<f64>], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let (p, piv) = (k..n)
            .map(|r| (r, m[r][k].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if piv == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(k, p);
            det = -det;
        }
        det *= m[k][k];
        for r in (k + 1)..n {
            let f = m[r][k] / m[k][k];
            for c in k..n {
                m[r][c] -= f * m[k][c];
            }
        }
    }
    det
}

/// Float principal regularity: every nonempty principal minor exceeds `tol`
/// in absolute value.
pub fn is_principally_regular_f(m: &SymMatrixF, tol: f64) -> bool {
    let n = m.n;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if m.principal_det(&idx).abs() <= tol {
            return false;
        }
    }
    true
}

/// Float adhesive extension, same layout as the exact version.
pub fn adhesive_extension_f(a: &SymMatrixF, b: &SymMatrixF, g: &GlueSpec) -> Result<SymMatrixF> {
    let ov = g.overlap;
    let la = g.n_left - ov;
    let rb = g.n_right - ov;
    let nt = g.n_total();
    for r in 0..ov {
        for c in 0..ov {
            if (a.get(la + r, la + c) - b.get(r, c)).abs() > 1e-12 {
                return Err(GciError::RestrictionMismatch);
            }
        }
    }
    let mut phi = SymMatrixF {
        n: nt,
        e: vec![0.0; nt * nt],
    };
    for r in 0..g.n_left {
        for c in 0..g.n_left {
            phi.e[r * nt + c] = a.get(r, c);
        }
    }
    for r in 0..g.n_right {
        for c in 0..g.n_right {
            phi.e[(la + r) * nt + (la + c)] = b.get(r, c);
        }
    }
    if la > 0 && rb > 0 && ov > 0 {
        let mut x: Vec<Vec<f64>> = (0..ov)
            .map(|r| {
                let mut row: Vec<f64> = (0..ov).map(|c| a.get(la + r, la + c)).collect();
                row.extend((0..ov).map(|c| if r == c { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        for col in 0..ov {
            let p = (col..ov)
                .max_by(|&r1, &r2| x[r1][col].abs().total_cmp(&x[r2][col].abs()))
                .unwrap();
            if x[p][col].abs() < 1e-12 {
                return Err(GciError::SingularBlock);
            }
            x.swap(col, p);
            let piv = x[col][col];
            for c in 0..2 * ov {
                x[col][c] /= piv;
            }
            for r in 0..ov {
                if r != col {
                    let f = x[r][col];
                    for c in 0..2 * ov {
                        x[r][c] -= f * x[col][c];
                    }
                }
            }
        }
        for r in 0..la {
            for c in 0..rb {
                let mut s = 0.0;
                for t in 0..ov {
                    for u in 0..ov {
                        s += a.get(r, la + t) * x[t][ov + u] * b.get(u, ov + c);
                    }
                }
                phi.e[r * nt + (g.n_left + c)] = s;
                phi.e[(g.n_left + c) * nt + r] = s;
            }
        }
    }
    Ok(phi)
}
