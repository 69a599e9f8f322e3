//! Blackbox selfadhesion membership testing: build an L-copy of the ground
//! set, assemble the doubled partial structure (copied constraints plus the
//! cross-independence block) and ask a property oracle whether it extends.
//!
//! Two verdict-preserving fast paths keep census runs tractable: closing the
//! forced statements under the Horn inference rules catches many failures
//! without a solver call, and for the structural oracle a conditional-product
//! witness built from a relative-interior point of the input structure
//! certifies success whenever its only nontrivial supermodularity instances
//! (both legs inside L) check out. Both paths fall back to the plain oracle.

use num_traits::Zero;

use crate::cicore::{
    full_mask, gaussoid_horn_closure, localize_gauss, localize_prime, sg_closure,
    table, CIStatement, CIStructure, PartialCIStructure, TriState, MAX_TABLE_N,
};
use crate::error::{GciError, Result};
use crate::gaussians::Rat;
use crate::oracles::{
    is_meet, is_orientable, is_structural_with_blocks, structural_witness, AggBlock, MeetMode,
    OracleKind,
};
use crate::polymatroids::SetFunction;

/// L-copy of the ground set {1,..,n}: the copy map fixes L pointwise and
/// sends the remaining elements, in ascending order, to n+1, n+2, ...
#[derive(Debug, Clone)]
pub struct CopyInstance {
    pub n_base: usize,
    pub l_mask: u32,
    pub n_total: usize,
    /// 1-based images: pi[e-1] is the copy of element e
    pub pi: Vec<u8>,
}

pub fn build_copy_instance(n: usize, l_mask: u32) -> CopyInstance {
    assert_eq!(l_mask & !full_mask(n), 0);
    let l_size = l_mask.count_ones() as usize;
    let n_total = 2 * n - l_size;
    let mut pi = Vec::with_capacity(n);
    let mut fresh = n as u8;
    for e in 1..=n {
        if l_mask >> (e - 1) & 1 == 1 {
            pi.push(e as u8);
        } else {
            fresh += 1;
            pi.push(fresh);
        }
    }
    CopyInstance {
        n_base: n,
        l_mask,
        n_total,
        pi,
    }
}

impl CopyInstance {
    pub fn map_mask(&self, mask: u32) -> u32 {
        let mut out = 0;
        let mut m = mask;
        while m != 0 {
            let e = m.trailing_zeros() as usize;
            out |= 1 << (self.pi[e] - 1);
            m &= m - 1;
        }
        out
    }

    pub fn map_statement(&self, s: &CIStatement) -> CIStatement {
        CIStatement::new(
            self.pi[s.i as usize - 1] as usize,
            self.pi[s.j as usize - 1] as usize,
            self.map_mask(s.cond),
        )
    }

    /// Preimage of the copy mask under pi (identity on L).
    pub fn unmap_mask(&self, mask: u32) -> u32 {
        let mut out = 0;
        for e in 1..=self.n_base {
            if mask >> (self.pi[e - 1] - 1) & 1 == 1 {
                out |= 1 << (e - 1);
            }
        }
        out
    }

    /// Mask of the original-only elements N \ L within the doubled set.
    pub fn n_minus_l(&self) -> u32 {
        full_mask(self.n_base) & !self.l_mask
    }

    /// Mask of the copy-only elements M \ L within the doubled set.
    pub fn m_minus_l(&self) -> u32 {
        full_mask(self.n_total) & !full_mask(self.n_base)
    }
}

/// Cross-block expansion rule for the statement <N,M|L>.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossExpansion {
    /// (L'): all (i,j|S) with L subseteq S subseteq N'M'L minus ij.
    /// Valid for every semigraphoid-implying property.
    Prime,
    /// (L): fixed conditioning set L only. Offered for the orientable oracle
    /// where composition holds; results must agree with Prime.
    Gauss,
}

/// Algorithm-1 assembly: both copies of every statement forced to the input
/// membership, the cross-independence block forced IN, the rest FREE.
pub fn assemble_partial(lstruct: &CIStructure, c: &CopyInstance) -> PartialCIStructure {
    assemble_partial_with(lstruct, c, CrossExpansion::Prime)
}

pub fn assemble_partial_with(
    lstruct: &CIStructure,
    c: &CopyInstance,
    expansion: CrossExpansion,
) -> PartialCIStructure {
    assert_eq!(lstruct.n(), c.n_base);
    let nt = c.n_total;
    let mut t = PartialCIStructure::all_free(nt);
    let tbl_base = table(c.n_base);
    let tbl = table(nt);
    for (idx, s) in tbl_base.stmts.iter().enumerate() {
        let st = if lstruct.contains_index(idx) {
            TriState::In
        } else {
            TriState::Out
        };
        t.set_state_index(tbl.index(s), st);
        t.set_state_index(tbl.index(&c.map_statement(s)), st);
    }
    let n_only = c.n_minus_l();
    let m_only = c.m_minus_l();
    if n_only != 0 && m_only != 0 {
        let cross = match expansion {
            CrossExpansion::Prime => localize_prime(n_only, m_only, c.l_mask),
            CrossExpansion::Gauss => localize_gauss(n_only, m_only, c.l_mask),
        };
        for s in cross {
            t.set_state_index(tbl.index(&s), TriState::In);
        }
    }
    t
}

#[derive(Debug, Clone)]
pub struct SelfadhesionOptions {
    pub skip_empty: bool,
    pub expansion: CrossExpansion,
    /// Deduplicate L-subsets up to the stabilizer of the input structure.
    pub stabilizer_dedup: bool,
    /// Closure pruning and conditional-product witnesses (verdict-preserving).
    pub fast_paths: bool,
}

impl Default for SelfadhesionOptions {
    fn default() -> Self {
        SelfadhesionOptions {
            skip_empty: false,
            expansion: CrossExpansion::Prime,
            stabilizer_dedup: false,
            fast_paths: true,
        }
    }
}

/// Conditional-product certificate: with m a relative-interior witness of the
/// input structure, f(S) = m(S cap N) + m(pi^-1(S cap M)) - m(S cap L) is an
/// exact LP witness for selfadhesivity at L unless a supermodularity instance
/// with both elements inside L fails; only those instances are checked.
fn conditional_product_certifies(m: &SetFunction, c: &CopyInstance) -> bool {
    let l_mask = c.l_mask;
    if l_mask.count_ones() < 2 {
        return true;
    }
    let nt = c.n_total;
    let n_mask = full_mask(c.n_base);
    let m_mask = c.map_mask(full_mask(c.n_base));
    let delta = |x: usize, y: usize, cond: u32| -> Rat {
        let bx = 1u32 << (x - 1);
        let by = 1u32 << (y - 1);
        m.get(cond | bx).clone() + m.get(cond | by) - m.get(cond | bx | by) - m.get(cond)
    };
    let mut xs = l_mask;
    while xs != 0 {
        let x = xs.trailing_zeros() as usize + 1;
        xs &= xs - 1;
        let mut ys = l_mask & !((1u32 << x) - 1);
        while ys != 0 {
            let y = ys.trailing_zeros() as usize + 1;
            ys &= ys - 1;
            let rest = full_mask(nt) & !(1 << (x - 1)) & !(1 << (y - 1));
            for s in crate::bits::submasks_ascending(rest) {
                let a = s & n_mask;
                let b = c.unmap_mask(s & m_mask);
                let l = s & l_mask;
                let val = delta(x, y, a) + delta(x, y, b) - delta(x, y, l);
                if val > Rat::zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Selfadhesivity at a single subset L, with an optional precomputed witness
/// of the input structure for the conditional-product fast path.
pub fn is_selfadhesive_at_with(
    lstruct: &CIStructure,
    l_mask: u32,
    oracle: OracleKind,
    opts: &SelfadhesionOptions,
    witness: Option<&SetFunction>,
) -> Result<bool> {
    let n = lstruct.n();
    let c = build_copy_instance(n, l_mask);
    if c.n_total > MAX_TABLE_N {
        return Err(GciError::GroundSetOutOfRange(c.n_total, 1, MAX_TABLE_N));
    }
    if matches!(oracle, OracleKind::Sg4SelfadhesivePolymatroid) {
        return Err(GciError::WrongGroundSet {
            expected: 4,
            got: n,
        });
    }
    let expansion = match oracle {
        OracleKind::Orientable => opts.expansion,
        _ => CrossExpansion::Prime,
    };
    // conditional-product certificate settles the pure structural oracle
    // before any assembly or closure work
    let cp_ok = opts.fast_paths
        && witness.is_some_and(|m| conditional_product_certifies(m, &c));
    if cp_ok && matches!(oracle, OracleKind::Structural) {
        return Ok(true);
    }
    let t = assemble_partial_with(lstruct, &c, expansion);
    let wants_structural =
        matches!(oracle, OracleKind::Structural | OracleKind::Meet(_)) && !cp_ok;
    let wants_orientable = matches!(oracle, OracleKind::Orientable | OracleKind::Meet(_));
    if opts.fast_paths {
        let in_s = t.in_structure();
        let out_s = t.out_structure();
        if wants_structural && sg_closure(&in_s, Some(&out_s)).is_none() {
            return Ok(false);
        }
        if wants_orientable && gaussoid_horn_closure(&in_s, Some(&out_s)).is_none() {
            return Ok(false);
        }
    }
    let blocks = if c.n_minus_l() != 0 && c.m_minus_l() != 0 {
        vec![AggBlock {
            i_mask: c.n_minus_l(),
            j_mask: c.m_minus_l(),
            k_mask: c.l_mask,
        }]
    } else {
        Vec::new()
    };
    let structural_ok = |t: &PartialCIStructure| -> bool {
        cp_ok || is_structural_with_blocks(t, &blocks)
    };
    match oracle {
        OracleKind::Structural => Ok(structural_ok(&t)),
        OracleKind::Orientable => Ok(is_orientable(&t)),
        OracleKind::Meet(MeetMode::Separate) => Ok(is_orientable(&t) && structural_ok(&t)),
        OracleKind::Meet(MeetMode::Joint) => Ok(is_meet(&t, MeetMode::Joint)),
        OracleKind::Sg4SelfadhesivePolymatroid => unreachable!(),
    }
}

/// Oracle verdict on the doubled partial structure for one subset L.
pub fn is_selfadhesive_at(lstruct: &CIStructure, l_mask: u32, oracle: OracleKind) -> Result<bool> {
    is_selfadhesive_at_with(
        lstruct,
        l_mask,
        oracle,
        &SelfadhesionOptions::default(),
        None,
    )
}

/// Blackbox selfadhesion membership test: conjunction over all L subseteq N,
/// cheap L = N first (subset order descending by size).
pub fn is_selfadhesive(lstruct: &CIStructure, oracle: OracleKind, skip_empty: bool) -> Result<bool> {
    let opts = SelfadhesionOptions {
        skip_empty,
        ..SelfadhesionOptions::default()
    };
    is_selfadhesive_with(lstruct, oracle, &opts)
}

pub fn is_selfadhesive_with(
    lstruct: &CIStructure,
    oracle: OracleKind,
    opts: &SelfadhesionOptions,
) -> Result<bool> {
    let n = lstruct.n();
    let witness = if opts.fast_paths && matches!(oracle, OracleKind::Structural | OracleKind::Meet(_))
    {
        structural_witness(&PartialCIStructure::from_total(lstruct))
    } else {
        None
    };
    // a missing witness means the structure is not structural at all
    if witness.is_none()
        && opts.fast_paths
        && matches!(oracle, OracleKind::Structural | OracleKind::Meet(_))
    {
        return Ok(false);
    }
    let stabilizer: Vec<Vec<u8>> = if opts.stabilizer_dedup {
        crate::cicore::permutations(n)
            .into_iter()
            .filter(|p| &crate::cicore::apply_permutation(lstruct, p) == lstruct)
            .collect()
    } else {
        Vec::new()
    };
    let mut masks: Vec<u32> = (0..=full_mask(n)).collect();
    masks.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
    let mut seen_reps: std::collections::HashSet<u32> = std::collections::HashSet::new();
    for l_mask in masks {
        if opts.skip_empty && l_mask == 0 {
            continue;
        }
        if opts.stabilizer_dedup && stabilizer.len() > 1 {
            let rep = stabilizer
                .iter()
                .map(|p| {
                    let mut out = 0u32;
                    let mut m = l_mask;
                    while m != 0 {
                        let e = m.trailing_zeros() as usize;
                        out |= 1 << (p[e] - 1);
                        m &= m - 1;
                    }
                    out
                })
                .min()
                .unwrap();
            if !seen_reps.insert(rep) {
                continue;
            }
        }
        if !is_selfadhesive_at_with(lstruct, l_mask, oracle, opts, witness.as_ref())? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVec;
    use crate::cicore::{apply_permutation, is_semigraphoid, num_statements, permutations};
    use crate::oracles::is_structural;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn stmt(i: usize, j: usize, cond: &[usize]) -> CIStatement {
        CIStatement::new(i, j, cond.iter().fold(0, |m, e| m | 1 << (e - 1)))
    }

    #[test]
    fn copy_instance_convention() {
        let c = build_copy_instance(3, 0b001);
        assert_eq!(c.n_total, 5);
        assert_eq!(c.pi, vec![1, 4, 5]);
        let c = build_copy_instance(3, 0b111);
        assert_eq!(c.n_total, 3);
        assert_eq!(c.pi, vec![1, 2, 3]);
        let c = build_copy_instance(3, 0);
        assert_eq!(c.n_total, 6);
        assert_eq!(c.pi, vec![4, 5, 6]);
    }

    #[test]
    fn assemble_counts_n3_l1() {
        // cross block <N,M|L> with |N'|=|J'|=2, |L|=1 contributes 16 INs
        let c = build_copy_instance(3, 0b001);
        let l = CIStructure::from_statements(3, &[stmt(1, 2, &[])]);
        let t = assemble_partial(&l, &c);
        let cross = localize_prime(c.n_minus_l(), c.m_minus_l(), c.l_mask);
        assert_eq!(cross.len(), 16);
        for s in &cross {
            let idx = crate::cicore::statement_index(5, s);
            assert_eq!(t.state(idx), TriState::In);
        }
    }

    #[test]
    fn assemble_full_l_is_total_structure() {
        let l = CIStructure::from_statements(3, &[stmt(1, 2, &[3])]);
        let c = build_copy_instance(3, 0b111);
        let t = assemble_partial(&l, &c);
        assert!(t.is_total());
        assert_eq!(t.in_structure(), l);
    }

    #[test]
    fn assemble_empty_l_on_n2() {
        let l = CIStructure::empty(2);
        let c = build_copy_instance(2, 0);
        let t = assemble_partial(&l, &c);
        // copies OUT, 16 cross INs, 6 FREE
        let mut ins = 0;
        let mut outs = 0;
        let mut free = 0;
        for idx in 0..num_statements(4) {
            match t.state(idx) {
                TriState::In => ins += 1,
                TriState::Out => outs += 1,
                TriState::Free => free += 1,
            }
        }
        assert_eq!((ins, outs, free), (16, 2, 6));
    }

    #[test]
    fn selfadhesive_at_full_l_is_oracle_verdict() {
        for mask in 0u32..64 {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            let direct = is_structural(&PartialCIStructure::from_total(&l));
            let at_full =
                is_selfadhesive_at(&l, full_mask(3), OracleKind::Structural).unwrap();
            assert_eq!(direct, at_full, "mask {mask}");
        }
    }

    #[test]
    fn full_structure_always_selfadhesive() {
        let l = CIStructure::full(3);
        assert!(is_selfadhesive(&l, OracleKind::Structural, false).unwrap());
        assert!(is_selfadhesive(&l, OracleKind::Orientable, false).unwrap());
    }

    #[test]
    fn gaussian_structures_are_structurally_selfadhesive() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for n in [3usize, 4] {
            for _ in 0..4 {
                let m = crate::gaussians::random_pd(n, &mut rng);
                let l = crate::gaussians::ci_structure_of(&m).unwrap();
                assert!(is_selfadhesive(&l, OracleKind::Structural, false).unwrap());
            }
        }
    }

    #[test]
    fn fast_paths_preserve_verdicts_exhaustively_n3() {
        let plain = SelfadhesionOptions {
            fast_paths: false,
            ..SelfadhesionOptions::default()
        };
        let fast = SelfadhesionOptions::default();
        for mask in 0u32..64 {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            if !is_semigraphoid(&l) {
                // skip obvious failures to keep the loop fast; they are
                // covered by the recessiveness test below
                continue;
            }
            for oracle in [OracleKind::Structural, OracleKind::Orientable] {
                let a = is_selfadhesive_with(&l, oracle, &plain).unwrap();
                let b = is_selfadhesive_with(&l, oracle, &fast).unwrap();
                assert_eq!(a, b, "mask {mask} oracle {oracle:?}");
            }
        }
    }

    #[test]
    fn fast_paths_preserve_verdicts_per_subset_n3() {
        let plain = SelfadhesionOptions {
            fast_paths: false,
            ..SelfadhesionOptions::default()
        };
        for mask in [0u32, 1, 3, 9, 33, 63] {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            let witness = structural_witness(&PartialCIStructure::from_total(&l));
            for l_mask in 0..=full_mask(3) {
                let a = is_selfadhesive_at_with(
                    &l,
                    l_mask,
                    OracleKind::Structural,
                    &plain,
                    None,
                )
                .unwrap();
                let b = is_selfadhesive_at_with(
                    &l,
                    l_mask,
                    OracleKind::Structural,
                    &SelfadhesionOptions::default(),
                    witness.as_ref(),
                )
                .unwrap();
                assert_eq!(a, b, "structure {mask} at L {l_mask}");
            }
        }
    }

    #[test]
    fn recessive_failing_oracle_fails_selfadhesion() {
        // not a semigraphoid, hence not structural: L = N already fails
        let l = CIStructure::from_statements(3, &[stmt(1, 2, &[]), stmt(1, 3, &[2])]);
        assert!(!is_selfadhesive(&l, OracleKind::Structural, false).unwrap());
    }

    #[test]
    fn cross_expansions_agree_for_orientable_n3() {
        let gauss = SelfadhesionOptions {
            expansion: CrossExpansion::Gauss,
            ..SelfadhesionOptions::default()
        };
        for mask in 0u32..64 {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            if !crate::cicore::is_gaussoid(&l) {
                continue;
            }
            let a = is_selfadhesive_with(&l, OracleKind::Orientable, &SelfadhesionOptions::default())
                .unwrap();
            let b = is_selfadhesive_with(&l, OracleKind::Orientable, &gauss).unwrap();
            assert_eq!(a, b, "mask {mask}");
        }
    }

    #[test]
    fn isomorphy_invariance_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut tested = 0;
        while tested < 6 {
            let mut l = CIStructure::empty(3);
            for idx in 0..num_statements(3) {
                if rng.gen_bool(0.4) {
                    l.insert(&table(3).stmts[idx]);
                }
            }
            if !is_semigraphoid(&l) {
                continue;
            }
            tested += 1;
            let perms = permutations(3);
            let p = &perms[rng.gen_range(0..perms.len())];
            let lp = apply_permutation(&l, p);
            let a = is_selfadhesive(&l, OracleKind::Structural, false).unwrap();
            let b = is_selfadhesive(&lp, OracleKind::Structural, false).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn stabilizer_dedup_matches_default() {
        let opts = SelfadhesionOptions {
            stabilizer_dedup: true,
            ..SelfadhesionOptions::default()
        };
        for mask in [0u32, 1, 5, 21, 42, 63] {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            if !is_semigraphoid(&l) {
                continue;
            }
            let a = is_selfadhesive(&l, OracleKind::Structural, false).unwrap();
            let b = is_selfadhesive_with(&l, OracleKind::Structural, &opts).unwrap();
            assert_eq!(a, b, "mask {mask}");
        }
    }

    #[test]
    fn skip_empty_skips_only_empty() {
        // structural property is closed under direct sums, so skip_empty
        // cannot change verdicts
        for mask in [0u32, 9, 33, 63] {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            if !is_semigraphoid(&l) {
                continue;
            }
            let a = is_selfadhesive(&l, OracleKind::Structural, false).unwrap();
            let b = is_selfadhesive(&l, OracleKind::Structural, true).unwrap();
            assert_eq!(a, b);
        }
    }
}
