//! Rational set functions: polymatroid axioms, the delta functional, the
//! Zhang-Yeung functional and multiinformation vectors.

use num_traits::Zero;

use crate::cicore::{full_mask, num_statements, table, CIStructure};
use crate::error::{GciError, Result};
use crate::gaussians::{parse_rat, rat_to_string, Rat, SymMatrixF};

/// Function on all subsets of {1,..,n}, indexed by subset bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFunction {
    n: usize,
    values: Vec<Rat>,
}

impl SetFunction {
    pub fn zero(n: usize) -> Self {
        SetFunction {
            n,
            values: vec![Rat::zero(); 1 << n],
        }
    }

    pub fn from_values(n: usize, values: Vec<Rat>) -> Self {
        assert_eq!(values.len(), 1 << n);
        SetFunction { n, values }
    }

    /// h(S) = f(|S|) for a profile function f, e.g. min(|S|, t).
    pub fn from_cardinality_profile(n: usize, f: impl Fn(usize) -> i64) -> Self {
        let values = (0u32..(1 << n))
            .map(|m| Rat::from(num_bigint::BigInt::from(f(m.count_ones() as usize))))
            .collect();
        SetFunction { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, mask: u32) -> &Rat {
        &self.values[mask as usize]
    }

    pub fn set(&mut self, mask: u32, v: Rat) {
        self.values[mask as usize] = v;
    }

    /// Set-function file: line `n`, then one `bitmask value` pair per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| GciError::Parse("empty set-function file".into()))?
            .trim()
            .parse()
            .map_err(|_| GciError::Parse("bad size line".into()))?;
        let mut f = SetFunction::zero(n);
        for line in lines {
            let (m, v) = line
                .trim()
                .split_once(char::is_whitespace)
                .ok_or_else(|| GciError::Parse(format!("bad line `{line}`")))?;
            let mask: u32 = m
                .trim()
                .parse()
                .map_err(|_| GciError::Parse(format!("bad bitmask `{m}`")))?;
            if mask >= (1 << n) {
                return Err(GciError::Parse(format!("bitmask {mask} out of range")));
            }
            f.set(mask, parse_rat(v)?);
        }
        Ok(f)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for mask in 0..(1u32 << self.n) {
            s.push_str(&format!("{} {}\n", mask, rat_to_string(self.get(mask))));
        }
        s
    }
}

/// delta<I,J|K>.h = h(IK) + h(JK) - h(IJK) - h(K) for pairwise disjoint
/// subsets given as bitmasks.
pub fn delta(h: &SetFunction, i_mask: u32, j_mask: u32, k_mask: u32) -> Rat {
    assert_eq!(i_mask & j_mask, 0);
    assert_eq!(i_mask & k_mask, 0);
    assert_eq!(j_mask & k_mask, 0);
    h.get(i_mask | k_mask).clone() + h.get(j_mask | k_mask)
        - h.get(i_mask | j_mask | k_mask)
        - h.get(k_mask)
}

/// Normalized, isotone (single-element ascents) and elementarily submodular.
pub fn is_polymatroid(h: &SetFunction) -> bool {
    if !h.get(0).is_zero() {
        return false;
    }
    let n = h.n;
    let full = full_mask(n);
    for s in 0..(1u32 << n) {
        let mut m = full & !s;
        while m != 0 {
            let x = m & m.wrapping_neg();
            m &= m - 1;
            if h.get(s | x) < h.get(s) {
                return false;
            }
        }
    }
    for st in table(n).stmts.iter() {
        let d = delta(h, 1 << (st.i - 1), 1 << (st.j - 1), st.cond);
        if d < Rat::zero() {
            return false;
        }
    }
    true
}

/// CI structure of a polymatroid: statements with vanishing delta.
pub fn ci_structure_of_polymatroid(h: &SetFunction) -> Result<CIStructure> {
    if !is_polymatroid(h) {
        return Err(GciError::NotPolymatroid);
    }
    let n = h.n;
    let tbl = table(n);
    let mut out = CIStructure::empty(n);
    for idx in 0..num_statements(n) {
        let s = tbl.stmts[idx];
        if delta(h, 1 << (s.i - 1), 1 << (s.j - 1), s.cond).is_zero() {
            out.insert(&s);
        }
    }
    Ok(out)
}

/// Zhang-Yeung functional, transcribed verbatim including the doubled
/// delta<kl|i> term:
/// box<i,j|kl> = d<kl|i> + d<kl|j> + d<ij|> - d<kl|> + d<ik|l> + d<il|k> + d<kl|i>.
pub fn zy_functional(h: &SetFunction, i: usize, j: usize, k: usize, l: usize) -> Rat {
    assert!(i != j && i != k && i != l && j != k && j != l && k != l);
    let (bi, bj, bk, bl) = (
        1u32 << (i - 1),
        1u32 << (j - 1),
        1u32 << (k - 1),
        1u32 << (l - 1),
    );
    delta(h, bk, bl, bi)
        + delta(h, bk, bl, bj)
        + delta(h, bi, bj, 0)
        - delta(h, bk, bl, 0)
        + delta(h, bi, bk, bl)
        + delta(h, bi, bl, bk)
        + delta(h, bk, bl, bi)
}

/// Float set function, for multiinformation vectors of correlation matrices.
#[derive(Debug, Clone)]
pub struct SetFunctionF {
    n: usize,
    values: Vec<f64>,
}

impl SetFunctionF {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    pub fn delta(&self, i_mask: u32, j_mask: u32, k_mask: u32) -> f64 {
        self.get(i_mask | k_mask) + self.get(j_mask | k_mask)
            - self.get(i_mask | j_mask | k_mask)
            - self.get(k_mask)
    }
}

/// Multiinformation vector m(K) = -1/2 log det Sigma_K of a positive-definite
/// matrix, rescaled to a correlation matrix first.
pub fn multiinformation_float(m: &SymMatrixF) -> Result<SetFunctionF> {
    let n = m.n();
    let mut corr = m.clone();
    let scale: Vec<f64> = (0..n).map(|i| m.get(i, i).sqrt()).collect();
    if scale.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(GciError::NotPositiveDefinite);
    }
    for i in 0..n {
        for j in i..n {
            corr.set_sym(i, j, m.get(i, j) / (scale[i] * scale[j]));
        }
    }
    let mut values = vec![0.0; 1 << n];
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
        let d = corr.principal_det(&idx);
        if d <= 0.0 {
            return Err(GciError::NotPositiveDefinite);
        }
        values[mask as usize] = -0.5 * d.ln();
    }
    Ok(SetFunctionF { n, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cicore::CIStatement;
    use crate::gaussians::{rat, rat_int};
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bit(e: usize) -> u32 {
        1 << (e - 1)
    }

    #[test]
    fn delta_examples() {
        let modular = SetFunction::from_cardinality_profile(4, |k| k as i64);
        for st in table(4).stmts.iter() {
            assert!(delta(&modular, bit(st.i as usize), bit(st.j as usize), st.cond).is_zero());
        }
        let h = SetFunction::from_cardinality_profile(4, |k| k.min(2) as i64);
        assert_eq!(delta(&h, bit(3), bit(4), bit(1)), rat_int(1));
        let z = SetFunction::zero(3);
        assert!(delta(&z, bit(1), bit(2), 0).is_zero());
    }

    #[test]
    fn polymatroid_examples() {
        assert!(is_polymatroid(&SetFunction::from_cardinality_profile(
            4,
            |k| k as i64
        )));
        assert!(is_polymatroid(&SetFunction::from_cardinality_profile(
            4,
            |k| k.min(2) as i64
        )));
        let mut bad = SetFunction::zero(3);
        bad.set(0, Rat::one());
        assert!(!is_polymatroid(&bad));
        let mut dec = SetFunction::from_cardinality_profile(2, |k| k as i64);
        dec.set(0b11, rat_int(0));
        assert!(!is_polymatroid(&dec));
    }

    #[test]
    fn ci_structure_of_polymatroid_examples() {
        let modular = SetFunction::from_cardinality_profile(3, |k| k as i64);
        assert_eq!(
            ci_structure_of_polymatroid(&modular).unwrap(),
            CIStructure::full(3)
        );
        let h1 = SetFunction::from_cardinality_profile(3, |k| k.min(1) as i64);
        let s = ci_structure_of_polymatroid(&h1).unwrap();
        let expect = CIStructure::from_statements(
            3,
            &[
                CIStatement::new(1, 2, bit(3)),
                CIStatement::new(1, 3, bit(2)),
                CIStatement::new(2, 3, bit(1)),
            ],
        );
        assert_eq!(s, expect);
        // min(|S|,2) on n=3: delta vanishes exactly for empty conditioning
        // sets (1 + 1 - 2 - 0), not for singletons (2 + 2 - 2 - 1)
        let h2 = SetFunction::from_cardinality_profile(3, |k| k.min(2) as i64);
        let s2 = ci_structure_of_polymatroid(&h2).unwrap();
        let expect2 = CIStructure::from_statements(
            3,
            &[
                CIStatement::new(1, 2, 0),
                CIStatement::new(1, 3, 0),
                CIStatement::new(2, 3, 0),
            ],
        );
        assert_eq!(s2, expect2);
        let mut bad = SetFunction::zero(3);
        bad.set(0, Rat::one());
        assert!(ci_structure_of_polymatroid(&bad).is_err());
    }

    #[test]
    fn zy_examples() {
        let modular = SetFunction::from_cardinality_profile(4, |k| k as i64);
        for p in crate::cicore::permutations(4) {
            let (i, j, k, l) = (p[0] as usize, p[1] as usize, p[2] as usize, p[3] as usize);
            assert!(zy_functional(&modular, i, j, k, l).is_zero());
        }
        // seven terms: 1 + 1 + 0 - 0 + 1 + 1 + 1
        let h = SetFunction::from_cardinality_profile(4, |k| k.min(2) as i64);
        assert_eq!(zy_functional(&h, 1, 2, 3, 4), rat_int(5));
    }

    #[test]
    fn zy_nonnegative_on_step_functions() {
        let n = 4;
        for t in 1..=n {
            let h = SetFunction::from_cardinality_profile(n, |k| k.min(t) as i64);
            for p in crate::cicore::permutations(n) {
                let v =
                    zy_functional(&h, p[0] as usize, p[1] as usize, p[2] as usize, p[3] as usize);
                assert!(v >= Rat::zero());
            }
        }
    }

    #[test]
    fn multiinformation_examples() {
        let id = SymMatrixF::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let m = multiinformation_float(&id).unwrap();
        for mask in 0..8u32 {
            assert!(m.get(mask).abs() < 1e-15);
        }
        let c = SymMatrixF::from_rows(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let m = multiinformation_float(&c).unwrap();
        assert!((m.get(0b11) - (-0.5 * 0.75f64.ln())).abs() < 1e-12);
        assert!((m.get(0b11) - 0.1438).abs() < 1e-4);
        assert!(m.get(0b01).abs() < 1e-15);
    }

    #[test]
    fn multiinformation_supermodular_and_matches_minors() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let n = 4;
            let mq = crate::gaussians::random_pd(n, &mut rng);
            let mf = SymMatrixF::from_rows(
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let v = mq.get(i, j);
                                let num: f64 = v.numer().to_string().parse().unwrap();
                                let den: f64 = v.denom().to_string().parse().unwrap();
                                num / den
                            })
                            .collect()
                    })
                    .collect(),
            )
            .unwrap();
            let m = multiinformation_float(&mf).unwrap();
            let ci = crate::gaussians::ci_structure_of(&mq).unwrap();
            for st in table(n).stmts.iter() {
                let d = m.delta(bit(st.i as usize), bit(st.j as usize), st.cond);
                // supermodular facet form: -delta >= 0
                assert!(d <= 1e-9, "delta = {d}");
                let vanishes = d.abs() <= 1e-9;
                assert_eq!(vanishes, ci.contains(st));
            }
        }
    }

    #[test]
    fn set_function_text_roundtrip() {
        let mut h = SetFunction::zero(2);
        h.set(0b11, rat(3, 2));
        h.set(0b01, rat_int(1));
        let parsed = SetFunction::parse(&h.to_text()).unwrap();
        assert_eq!(parsed, h);
    }
}
