//! Ground-set combinatorics: elementary CI statements, CI structures, minors,
//! isomorphy, semigraphoid/gaussoid axiom checks and localization expansions.
//!
//! Statements are ordered by (i, j) lexicographically, then by the
//! conditioning set read as the integer with bit e-1 per element e. This
//! order fixes bit positions for all file formats and canonical forms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::bits::{submask_rank, submasks_ascending, BitVec};
use crate::error::{GciError, Result};

/// Largest ground-set size for the public API.
pub const MAX_N: usize = 12;
/// Largest ground-set size for which statement tables are built (doubled
/// ground sets in selfadhesion tests reach 2n - |L|).
pub const MAX_TABLE_N: usize = 16;

/// Finite ground set {1, .., n}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: u8,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if (1..=MAX_N).contains(&n) {
            Ok(GroundSet { n: n as u8 })
        } else {
            Err(GciError::GroundSetOutOfRange(n, 1, MAX_N))
        }
    }

    pub fn size(&self) -> usize {
        self.n as usize
    }

    pub fn full_mask(&self) -> u32 {
        full_mask(self.n as usize)
    }
}

pub fn full_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

/// Elementary CI statement (i,j|K) with i < j and i,j not in K.
/// Elements are 1-based; `cond` holds bit e-1 for element e.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CIStatement {
    pub i: u8,
    pub j: u8,
    pub cond: u32,
}

impl CIStatement {
    pub fn new(a: usize, b: usize, cond: u32) -> Self {
        assert!(a != b && a >= 1 && b >= 1);
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        assert_eq!(cond & (1 << (i - 1)) | cond & (1 << (j - 1)), 0, "i,j in K");
        CIStatement {
            i: i as u8,
            j: j as u8,
            cond,
        }
    }

    /// Text form `(i,j|K)` with K as concatenated digits, e.g. `(1,2|35)`.
    pub fn to_text(&self) -> String {
        let mut k: Vec<String> = (1..=9)
            .filter(|e| self.cond >> (e - 1) & 1 == 1)
            .map(|e| e.to_string())
            .collect();
        debug_assert_eq!(self.cond >> 9, 0, "text form supports elements 1-9");
        let ks = k.drain(..).collect::<String>();
        format!("({},{}|{})", self.i, self.j, ks)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || GciError::Parse(format!("bad statement `{s}`"));
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (pair, k) = inner.split_once('|').ok_or_else(bad)?;
        let (is, js) = pair.split_once(',').ok_or_else(bad)?;
        let i: usize = is.trim().parse().map_err(|_| bad())?;
        let j: usize = js.trim().parse().map_err(|_| bad())?;
        let mut cond = 0u32;
        for c in k.trim().chars() {
            let d = c.to_digit(10).filter(|&d| d >= 1).ok_or_else(bad)?;
            cond |= 1 << (d - 1);
        }
        if i == j || i == 0 || j == 0 || cond >> (i - 1) & 1 == 1 || cond >> (j - 1) & 1 == 1 {
            return Err(bad());
        }
        Ok(CIStatement::new(i, j, cond))
    }
}

/// Number of elementary statements over n elements: C(n,2) * 2^(n-2).
pub fn num_statements(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2 * (1usize << (n - 2))
    }
}

/// Infers the ground-set size from a bitstring length, if any.
pub fn n_from_len(len: usize) -> Option<usize> {
    (1..=MAX_TABLE_N).find(|&n| num_statements(n) == len)
}

pub(crate) struct StatementTable {
    pub n: usize,
    pub stmts: Vec<CIStatement>,
    // offset of the (i,j) pair block, 1-based indices
    pair_offset: Vec<usize>,
}

impl StatementTable {
    fn build(n: usize) -> StatementTable {
        let mut stmts = Vec::with_capacity(num_statements(n));
        let mut pair_offset = vec![0usize; (n + 1) * (n + 1)];
        for i in 1..=n {
            for j in (i + 1)..=n {
                pair_offset[i * (n + 1) + j] = stmts.len();
                let comp = full_mask(n) & !(1 << (i - 1)) & !(1 << (j - 1));
                for k in submasks_ascending(comp) {
                    stmts.push(CIStatement {
                        i: i as u8,
                        j: j as u8,
                        cond: k,
                    });
                }
            }
        }
        StatementTable { n, stmts, pair_offset }
    }

    #[inline]
    pub fn index(&self, s: &CIStatement) -> usize {
        let (i, j) = (s.i as usize, s.j as usize);
        let comp = full_mask(self.n) & !(1 << (i - 1)) & !(1 << (j - 1));
        self.pair_offset[i * (self.n + 1) + j] + submask_rank(s.cond, comp) as usize
    }

    #[inline]
    pub fn index_of(&self, a: usize, b: usize, cond: u32) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let comp = full_mask(self.n) & !(1 << (i - 1)) & !(1 << (j - 1));
        self.pair_offset[i * (self.n + 1) + j] + submask_rank(cond, comp) as usize
    }
}

pub(crate) fn table(n: usize) -> Arc<StatementTable> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<StatementTable>>>> = OnceLock::new();
    assert!(
        (1..=MAX_TABLE_N).contains(&n),
        "statement table for n={n} out of range"
    );
    let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(StatementTable::build(n)))
        .clone()
}

/// All elementary statements over {1,..,n} in canonical order.
pub fn enumerate_statements(n: usize) -> Result<Vec<CIStatement>> {
    if !(1..=MAX_N).contains(&n) {
        return Err(GciError::GroundSetOutOfRange(n, 1, MAX_N));
    }
    Ok(table(n).stmts.clone())
}

/// Index of a statement in the canonical order over {1,..,n}.
pub fn statement_index(n: usize, s: &CIStatement) -> usize {
    table(n).index(s)
}

/// CI structure: a set of elementary statements over {1,..,n}, stored as a
/// bitset in canonical statement order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CIStructure {
    n: u8,
    bits: BitVec,
}

impl std::fmt::Debug for CIStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CIStructure(n={}, {})", self.n, self.bits.to_bitstring())
    }
}

impl CIStructure {
    pub fn empty(n: usize) -> Self {
        CIStructure {
            n: n as u8,
            bits: BitVec::zeros(num_statements(n)),
        }
    }

    /// The full structure A_n.
    pub fn full(n: usize) -> Self {
        CIStructure {
            n: n as u8,
            bits: BitVec::ones(num_statements(n)),
        }
    }

    pub fn from_statements<'a>(n: usize, stmts: impl IntoIterator<Item = &'a CIStatement>) -> Self {
        let tbl = table(n);
        let mut s = Self::empty(n);
        for st in stmts {
            s.bits.set(tbl.index(st), true);
        }
        s
    }

    pub fn from_bits(n: usize, bits: BitVec) -> Self {
        assert_eq!(bits.len(), num_statements(n));
        CIStructure { n: n as u8, bits }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, s: &CIStatement) -> bool {
        self.bits.get(table(self.n()).index(s))
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.bits.get(idx)
    }

    pub fn insert(&mut self, s: &CIStatement) {
        let idx = table(self.n()).index(s);
        self.bits.set(idx, true);
    }

    pub fn statements(&self) -> Vec<CIStatement> {
        let tbl = table(self.n());
        self.bits.iter_ones().map(|i| tbl.stmts[i]).collect()
    }

    pub fn intersect(&self, other: &CIStructure) -> CIStructure {
        assert_eq!(self.n, other.n);
        CIStructure {
            n: self.n,
            bits: self.bits.intersect(&other.bits),
        }
    }

    pub fn is_subset_of(&self, other: &CIStructure) -> bool {
        assert_eq!(self.n, other.n);
        self.bits.is_subset_of(&other.bits)
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.to_bitstring()
    }

    /// Parses a bitstring; the ground-set size is inferred from its length.
    pub fn parse_bitstring(s: &str) -> Result<Self> {
        let t = s.trim();
        let n = n_from_len(t.len())
            .ok_or_else(|| GciError::Parse(format!("bitstring length {} is not |A_n|", t.len())))?;
        let bits = BitVec::from_bitstring(t)
            .ok_or_else(|| GciError::Parse("bitstring may contain only 0/1".into()))?;
        Ok(CIStructure { n: n as u8, bits })
    }
}

/// All permutations of {1,..,n} in lexicographic order, as 1-based image
/// vectors (`p[e-1]` is the image of e).
pub fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = (1..=n as u8).collect();
    let mut out = vec![cur.clone()];
    loop {
        // next_permutation
        let Some(k) = (0..n.saturating_sub(1)).rev().find(|&k| cur[k] < cur[k + 1]) else {
            break;
        };
        let l = (k + 1..n).rev().find(|&l| cur[l] > cur[k]).unwrap();
        cur.swap(k, l);
        cur[k + 1..].reverse();
        out.push(cur.clone());
    }
    out
}

fn map_mask(mask: u32, p: &[u8]) -> u32 {
    let mut out = 0;
    let mut m = mask;
    while m != 0 {
        let e = m.trailing_zeros() as usize; // element e+1
        out |= 1 << (p[e] - 1);
        m &= m - 1;
    }
    out
}

/// Per-statement index map of a permutation: entry idx is the index of the
/// image of statement idx.
pub fn statement_perm_map(n: usize, p: &[u8]) -> Vec<u32> {
    let tbl = table(n);
    tbl.stmts
        .iter()
        .map(|s| {
            let a = p[s.i as usize - 1] as usize;
            let b = p[s.j as usize - 1] as usize;
            tbl.index_of(a, b, map_mask(s.cond, p)) as u32
        })
        .collect()
}

/// Cached statement maps for all n! permutations (small n only).
pub(crate) fn all_stmt_maps(n: usize) -> Arc<Vec<Vec<u32>>> {
    static MAPS: OnceLock<Mutex<HashMap<usize, Arc<Vec<Vec<u32>>>>>> = OnceLock::new();
    assert!(n <= 8, "all_stmt_maps is factorial in n");
    let map = MAPS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            Arc::new(
                permutations(n)
                    .iter()
                    .map(|p| statement_perm_map(n, p))
                    .collect(),
            )
        })
        .clone()
}

/// Relabels a structure along a permutation of {1,..,n}.
pub fn apply_permutation(l: &CIStructure, p: &[u8]) -> CIStructure {
    let n = l.n();
    assert_eq!(p.len(), n);
    {
        let mut seen = 0u32;
        for &v in p {
            assert!((1..=n as u8).contains(&v), "not a permutation");
            seen |= 1 << (v - 1);
        }
        assert_eq!(seen, full_mask(n), "not a permutation");
    }
    let map = statement_perm_map(n, p);
    let mut bits = BitVec::zeros(num_statements(n));
    for idx in l.bits.iter_ones() {
        bits.set(map[idx] as usize, true);
    }
    CIStructure { n: l.n, bits }
}

/// Canonical representative of the S_n-orbit of `l`: the orbit minimum in
/// the canonical order (at the first differing statement index, the
/// structure containing the statement is smaller).
pub fn canonical_form(l: &CIStructure) -> CIStructure {
    let n = l.n();
    if n <= 1 {
        return l.clone();
    }
    let count = num_statements(n);
    if count <= 128 && n <= 8 {
        let key = canonical_key_u128(n, l.bits.to_u128());
        return CIStructure {
            n: l.n,
            bits: BitVec::from_u128(count, key),
        };
    }
    let mut best: Option<BitVec> = None;
    for p in permutations(n) {
        let cand = apply_permutation(l, &p).bits;
        if best
            .as_ref()
            .map(|b| cand.cmp_canonical(b) == std::cmp::Ordering::Less)
            .unwrap_or(true)
        {
            best = Some(cand);
        }
    }
    CIStructure { n: l.n, bits: best.unwrap() }
}

#[inline]
fn u128_canonical_less(a: u128, b: u128) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let low = diff & diff.wrapping_neg();
    a & low != 0
}

/// Canonical form on the u128 fast path (statement idx at bit idx).
pub fn canonical_key_u128(n: usize, raw: u128) -> u128 {
    let maps = all_stmt_maps(n);
    let mut best = raw;
    for map in maps.iter().skip(1) {
        let mut out = 0u128;
        let mut m = raw;
        while m != 0 {
            let idx = m.trailing_zeros() as usize;
            out |= 1 << map[idx];
            m &= m - 1;
        }
        if u128_canonical_less(out, best) {
            best = out;
        }
    }
    best
}

/// Restriction of `l` to the elements of `k_mask`, reindexed to a ground set
/// of size |K| (elements of K in ascending order become 1,..,|K|).
pub fn restrict(l: &CIStructure, k_mask: u32) -> CIStructure {
    let n = l.n();
    assert_eq!(k_mask & !full_mask(n), 0);
    let m = k_mask.count_ones() as usize;
    // old element -> new element (1-based), 0 if dropped
    let mut rename = [0u8; 33];
    let mut next = 1u8;
    for e in 1..=n {
        if k_mask >> (e - 1) & 1 == 1 {
            rename[e] = next;
            next += 1;
        }
    }
    let tbl = table(n);
    let out_tbl = table(m.max(1));
    let mut bits = BitVec::zeros(num_statements(m));
    for idx in l.bits.iter_ones() {
        let s = tbl.stmts[idx];
        if k_mask >> (s.i - 1) & 1 == 1 && k_mask >> (s.j - 1) & 1 == 1 && s.cond & !k_mask == 0 {
            let cond = {
                let mut c = 0u32;
                let mut rest = s.cond;
                while rest != 0 {
                    let e = rest.trailing_zeros() as usize + 1;
                    c |= 1 << (rename[e] - 1);
                    rest &= rest - 1;
                }
                c
            };
            bits.set(
                out_tbl.index_of(rename[s.i as usize] as usize, rename[s.j as usize] as usize, cond),
                true,
            );
        }
    }
    CIStructure { n: m as u8, bits }
}

/// Marginal minor: drops x and keeps statements not mentioning it.
pub fn marginal(l: &CIStructure, x: usize) -> CIStructure {
    let n = l.n();
    assert!((1..=n).contains(&x));
    restrict(l, full_mask(n) & !(1 << (x - 1)))
}

/// Conditional minor: {(i,j|K) : (i,j|xK) in L}, reindexed to n-1 elements.
pub fn conditional(l: &CIStructure, x: usize) -> CIStructure {
    let n = l.n();
    assert!((1..=n).contains(&x));
    let keep = full_mask(n) & !(1 << (x - 1));
    let mut rename = [0u8; 33];
    let mut next = 1u8;
    for e in 1..=n {
        if keep >> (e - 1) & 1 == 1 {
            rename[e] = next;
            next += 1;
        }
    }
    let tbl = table(n);
    let out_tbl = table((n - 1).max(1));
    let mut bits = BitVec::zeros(num_statements(n - 1));
    for idx in l.bits.iter_ones() {
        let s = tbl.stmts[idx];
        if s.i as usize != x && s.j as usize != x && s.cond >> (x - 1) & 1 == 1 {
            let cond_old = s.cond & !(1 << (x - 1));
            let mut c = 0u32;
            let mut rest = cond_old;
            while rest != 0 {
                let e = rest.trailing_zeros() as usize + 1;
                c |= 1 << (rename[e] - 1);
                rest &= rest - 1;
            }
            bits.set(
                out_tbl.index_of(rename[s.i as usize] as usize, rename[s.j as usize] as usize, c),
                true,
            );
        }
    }
    CIStructure { n: (n - 1) as u8, bits }
}

/// Semigraphoid test: rule (S) for all distinct i,j,k and K disjoint from
/// them: (i,j|K) and (i,k|jK) imply (i,j|kK) and (i,k|K).
pub fn is_semigraphoid(l: &CIStructure) -> bool {
    let n = l.n();
    let tbl = table(n);
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                if i == j || i == k || j == k {
                    continue;
                }
                let rest =
                    full_mask(n) & !(1 << (i - 1)) & !(1 << (j - 1)) & !(1 << (k - 1));
                for kk in submasks_ascending(rest) {
                    if l.bits.get(tbl.index_of(i, j, kk))
                        && l.bits.get(tbl.index_of(i, k, kk | (1 << (j - 1))))
                        && !(l.bits.get(tbl.index_of(i, j, kk | (1 << (k - 1))))
                            && l.bits.get(tbl.index_of(i, k, kk)))
                    {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Gaussoid test: axioms (g1)-(g4) for all distinct i,j,k and disjoint K.
pub fn is_gaussoid(l: &CIStructure) -> bool {
    let n = l.n();
    let tbl = table(n);
    let has = |a: usize, b: usize, c: u32| l.bits.get(tbl.index_of(a, b, c));
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                if i == j || i == k || j == k {
                    continue;
                }
                let rest =
                    full_mask(n) & !(1 << (i - 1)) & !(1 << (j - 1)) & !(1 << (k - 1));
                let jb = 1u32 << (j - 1);
                let kb = 1u32 << (k - 1);
                for kk in submasks_ascending(rest) {
                    // (g1)
                    if has(i, j, kk) && has(i, k, kk | jb) && !(has(i, j, kk | kb) && has(i, k, kk)) {
                        return false;
                    }
                    // (g2)
                    if has(i, j, kk | kb) && has(i, k, kk | jb) && !(has(i, j, kk) && has(i, k, kk)) {
                        return false;
                    }
                    // (g3)
                    if has(i, j, kk) && has(i, k, kk) && !(has(i, j, kk | kb) && has(i, k, kk | jb)) {
                        return false;
                    }
                    // (g4)
                    if has(i, j, kk) && has(i, j, kk | kb) && !(has(i, k, kk) || has(j, k, kk)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Closure of `l` under the semigraphoid rule (S); used as a sound pruning
/// step for any semigraphoid-implying property oracle.
pub fn sg_closure(l: &CIStructure, out: Option<&CIStructure>) -> Option<CIStructure> {
    closure_under(l, out, false)
}

/// Closure under the Horn gaussoid rules (g1)-(g3); sound for gaussoid-
/// implying properties. (g4) is disjunctive and not used.
pub fn gaussoid_horn_closure(l: &CIStructure, out: Option<&CIStructure>) -> Option<CIStructure> {
    closure_under(l, out, true)
}

/// Returns None when the closure collides with a statement in `out`.
fn closure_under(l: &CIStructure, out: Option<&CIStructure>, horn_gauss: bool) -> Option<CIStructure> {
    let n = l.n();
    let tbl = table(n);
    let mut cur = l.clone();
    if let Some(o) = out {
        if !cur.bits.is_disjoint_from(&o.bits) {
            return None;
        }
    }
    loop {
        let mut changed = false;
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    if i == j || i == k || j == k {
                        continue;
                    }
                    let rest =
                        full_mask(n) & !(1 << (i - 1)) & !(1 << (j - 1)) & !(1 << (k - 1));
                    let jb = 1u32 << (j - 1);
                    let kb = 1u32 << (k - 1);
                    for kk in submasks_ascending(rest) {
                        let idx_ij = tbl.index_of(i, j, kk);
                        let idx_ikj = tbl.index_of(i, k, kk | jb);
                        let idx_ijk = tbl.index_of(i, j, kk | kb);
                        let idx_ik = tbl.index_of(i, k, kk);
                        let mut derived: [usize; 2] = [usize::MAX; 2];
                        if cur.bits.get(idx_ij) && cur.bits.get(idx_ikj) {
                            derived = [idx_ijk, idx_ik];
                        } else if horn_gauss && cur.bits.get(idx_ijk) && cur.bits.get(idx_ikj) {
                            derived = [idx_ij, idx_ik];
                        } else if horn_gauss && cur.bits.get(idx_ij) && cur.bits.get(idx_ik) {
                            derived = [idx_ijk, idx_ikj];
                        }
                        for d in derived {
                            if d != usize::MAX && !cur.bits.get(d) {
                                if let Some(o) = out {
                                    if o.bits.get(d) {
                                        return None;
                                    }
                                }
                                cur.bits.set(d, true);
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            return Some(cur);
        }
    }
}

/// (L') expansion: all (i,j|S) with i in I, j in J and K ⊆ S ⊆ IJK∖ij.
pub fn localize_prime(i_mask: u32, j_mask: u32, k_mask: u32) -> Vec<CIStatement> {
    assert!(i_mask != 0 && j_mask != 0, "I and J must be nonempty");
    assert_eq!(i_mask & j_mask, 0);
    assert_eq!(i_mask & k_mask, 0);
    assert_eq!(j_mask & k_mask, 0);
    let ijk = i_mask | j_mask | k_mask;
    let mut out = std::collections::BTreeSet::new();
    let mut im = i_mask;
    while im != 0 {
        let i = im.trailing_zeros() as usize + 1;
        im &= im - 1;
        let mut jm = j_mask;
        while jm != 0 {
            let j = jm.trailing_zeros() as usize + 1;
            jm &= jm - 1;
            let free = ijk & !(1 << (i - 1)) & !(1 << (j - 1)) & !k_mask;
            for extra in submasks_ascending(free) {
                out.insert(CIStatement::new(i, j, k_mask | extra));
            }
        }
    }
    out.into_iter().collect()
}

/// (L) expansion: all (i,j|K) with i in I, j in J, fixed conditioning set K.
pub fn localize_gauss(i_mask: u32, j_mask: u32, k_mask: u32) -> Vec<CIStatement> {
    assert!(i_mask != 0 && j_mask != 0, "I and J must be nonempty");
    assert_eq!(i_mask & j_mask, 0);
    assert_eq!(i_mask & k_mask, 0);
    assert_eq!(j_mask & k_mask, 0);
    let mut out = std::collections::BTreeSet::new();
    let mut im = i_mask;
    while im != 0 {
        let i = im.trailing_zeros() as usize + 1;
        im &= im - 1;
        let mut jm = j_mask;
        while jm != 0 {
            let j = jm.trailing_zeros() as usize + 1;
            jm &= jm - 1;
            out.insert(CIStatement::new(i, j, k_mask));
        }
    }
    out.into_iter().collect()
}

/// Tri-state constraint on one statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriState {
    In,
    Out,
    Free,
}

/// Partially defined CI structure: one state per statement of A_n.
#[derive(Debug, Clone)]
pub struct PartialCIStructure {
    n: u8,
    states: Vec<TriState>,
}

impl PartialCIStructure {
    pub fn all_free(n: usize) -> Self {
        PartialCIStructure {
            n: n as u8,
            states: vec![TriState::Free; num_statements(n)],
        }
    }

    /// Total structure: every statement IN or OUT per membership.
    pub fn from_total(l: &CIStructure) -> Self {
        let n = l.n();
        let mut t = Self::all_free(n);
        for idx in 0..num_statements(n) {
            t.states[idx] = if l.contains_index(idx) {
                TriState::In
            } else {
                TriState::Out
            };
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn state(&self, idx: usize) -> TriState {
        self.states[idx]
    }

    pub fn set_state(&mut self, s: &CIStatement, st: TriState) {
        let idx = table(self.n()).index(s);
        self.states[idx] = st;
    }

    pub fn set_state_index(&mut self, idx: usize, st: TriState) {
        self.states[idx] = st;
    }

    pub fn states(&self) -> &[TriState] {
        &self.states
    }

    pub fn is_total(&self) -> bool {
        self.states.iter().all(|s| !matches!(s, TriState::Free))
    }

    pub fn in_structure(&self) -> CIStructure {
        let mut bits = BitVec::zeros(self.states.len());
        for (i, s) in self.states.iter().enumerate() {
            if matches!(s, TriState::In) {
                bits.set(i, true);
            }
        }
        CIStructure { n: self.n, bits }
    }

    pub fn out_structure(&self) -> CIStructure {
        let mut bits = BitVec::zeros(self.states.len());
        for (i, s) in self.states.iter().enumerate() {
            if matches!(s, TriState::Out) {
                bits.set(i, true);
            }
        }
        CIStructure { n: self.n, bits }
    }

    /// Parses `+ (i,j|K)` / `- (i,j|K)` lines; unlisted statements stay FREE.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut t = Self::all_free(n);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (sign, rest) = line
                .split_at_checked(1)
                .ok_or_else(|| GciError::Parse(format!("bad line `{line}`")))?;
            let st = match sign {
                "+" => TriState::In,
                "-" => TriState::Out,
                _ => return Err(GciError::Parse(format!("bad line `{line}`"))),
            };
            let stmt = CIStatement::parse(rest)?;
            if stmt.j as usize > n || stmt.cond & !full_mask(n) != 0 {
                return Err(GciError::Parse(format!("statement outside ground set: `{line}`")));
            }
            t.set_state(&stmt, st);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn stmt(i: usize, j: usize, cond: &[usize]) -> CIStatement {
        CIStatement::new(i, j, cond.iter().fold(0, |m, e| m | 1 << (e - 1)))
    }

    #[test]
    fn statement_counts() {
        assert_eq!(enumerate_statements(2).unwrap().len(), 1);
        assert_eq!(enumerate_statements(3).unwrap().len(), 6);
        assert_eq!(enumerate_statements(5).unwrap().len(), 80);
        assert!(enumerate_statements(0).is_err());
        assert!(enumerate_statements(13).is_err());
    }

    #[test]
    fn statement_order_is_pair_then_cond() {
        let stmts = enumerate_statements(3).unwrap();
        let expect = vec![
            stmt(1, 2, &[]),
            stmt(1, 2, &[3]),
            stmt(1, 3, &[]),
            stmt(1, 3, &[2]),
            stmt(2, 3, &[]),
            stmt(2, 3, &[1]),
        ];
        assert_eq!(stmts, expect);
        for (k, s) in stmts.iter().enumerate() {
            assert_eq!(statement_index(3, s), k);
        }
    }

    #[test]
    fn permutation_relabels() {
        let l = CIStructure::from_statements(3, &[stmt(1, 3, &[])]);
        let swapped = apply_permutation(&l, &[2, 1, 3]);
        assert_eq!(swapped.statements(), vec![stmt(2, 3, &[])]);
        let id = apply_permutation(&l, &[1, 2, 3]);
        assert_eq!(id, l);
        let full = CIStructure::full(4);
        assert_eq!(apply_permutation(&full, &[3, 1, 4, 2]), full);
    }

    #[test]
    fn permutation_preserves_cardinality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(2..=5);
            let mut l = CIStructure::empty(n);
            for idx in 0..num_statements(n) {
                if rng.gen_bool(0.3) {
                    l.bits.set(idx, true);
                }
            }
            let mut p: Vec<u8> = (1..=n as u8).collect();
            p.shuffle(&mut rng);
            assert_eq!(apply_permutation(&l, &p).len(), l.len());
        }
    }

    #[test]
    fn canonical_form_examples() {
        let l = CIStructure::from_statements(3, &[stmt(1, 3, &[])]);
        let c = canonical_form(&l);
        assert_eq!(c.statements(), vec![stmt(1, 2, &[])]);
        let e = CIStructure::empty(3);
        assert_eq!(canonical_form(&e), e);
    }

    #[test]
    fn canonical_form_constant_on_orbits_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..=5);
            let mut l = CIStructure::empty(n);
            for idx in 0..num_statements(n) {
                if rng.gen_bool(0.4) {
                    l.bits.set(idx, true);
                }
            }
            let mut p: Vec<u8> = (1..=n as u8).collect();
            p.shuffle(&mut rng);
            let c1 = canonical_form(&l);
            let c2 = canonical_form(&apply_permutation(&l, &p));
            assert_eq!(c1, c2);
            assert_eq!(canonical_form(&c1), c1);
        }
    }

    #[test]
    fn restrict_examples() {
        let full = CIStructure::full(4);
        let k_mask = 0b0111; // {1,2,3}
        assert_eq!(restrict(&full, k_mask), CIStructure::full(3));
        let l = CIStructure::from_statements(3, &[stmt(1, 2, &[3])]);
        assert_eq!(restrict(&l, full_mask(3)), l);
        assert!(restrict(&l, 0b011).is_empty());
    }

    #[test]
    fn minors() {
        assert_eq!(marginal(&CIStructure::full(4), 2), CIStructure::full(3));
        let l = CIStructure::from_statements(3, &[stmt(1, 2, &[3])]);
        let c = conditional(&l, 3);
        assert_eq!(c.statements(), vec![stmt(1, 2, &[])]);
        assert!(conditional(&CIStructure::empty(4), 1).is_empty());
    }

    #[test]
    fn restrict_is_iterated_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(3..=5);
            let mut l = CIStructure::empty(n);
            for idx in 0..num_statements(n) {
                if rng.gen_bool(0.4) {
                    l.bits.set(idx, true);
                }
            }
            let keep: u32 = rng.gen_range(0..=full_mask(n));
            let mut by_marginal = l.clone();
            for e in (1..=n).rev() {
                if keep >> (e - 1) & 1 == 0 {
                    by_marginal = marginal(&by_marginal, e);
                }
            }
            // marginal drops high elements first so indices stay aligned
            assert_eq!(restrict(&l, keep), by_marginal);
        }
    }

    #[test]
    fn semigraphoid_examples() {
        assert!(is_semigraphoid(&CIStructure::empty(3)));
        assert!(is_semigraphoid(&CIStructure::full(4)));
        let bad = CIStructure::from_statements(3, &[stmt(1, 2, &[]), stmt(1, 3, &[2])]);
        assert!(!is_semigraphoid(&bad));
    }

    #[test]
    fn gaussoid_examples() {
        let bad = CIStructure::from_statements(3, &[stmt(1, 2, &[]), stmt(1, 2, &[3])]);
        assert!(!is_gaussoid(&bad));
        let good = CIStructure::from_statements(
            3,
            &[stmt(1, 2, &[]), stmt(1, 2, &[3]), stmt(1, 3, &[]), stmt(1, 3, &[2])],
        );
        assert!(is_gaussoid(&good));
    }

    #[test]
    fn three_element_gaussoid_count_is_11() {
        let mut count = 0;
        for mask in 0u32..64 {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            if is_gaussoid(&l) {
                count += 1;
            }
        }
        assert_eq!(count, 11);
    }

    #[test]
    fn gaussoid_implies_semigraphoid_small() {
        for mask in 0u32..64 {
            let l = CIStructure::from_bits(3, BitVec::from_u128(6, mask as u128));
            if is_gaussoid(&l) {
                assert!(is_semigraphoid(&l));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut l = CIStructure::empty(4);
            for idx in 0..num_statements(4) {
                if rng.gen_bool(0.5) {
                    l.bits.set(idx, true);
                }
            }
            if is_gaussoid(&l) {
                assert!(is_semigraphoid(&l));
            }
        }
    }

    #[test]
    fn minors_of_gaussoids_are_gaussoids() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut found = 0;
        while found < 40 {
            let mut l = CIStructure::empty(4);
            for idx in 0..num_statements(4) {
                if rng.gen_bool(0.35) {
                    l.bits.set(idx, true);
                }
            }
            if !is_gaussoid(&l) {
                continue;
            }
            found += 1;
            for x in 1..=4 {
                assert!(is_gaussoid(&marginal(&l, x)));
                assert!(is_gaussoid(&conditional(&l, x)));
            }
        }
    }

    #[test]
    fn localize_prime_examples() {
        let r = localize_prime(0b1, 0b10, 0);
        assert_eq!(r, vec![stmt(1, 2, &[])]);
        // I={2,3}, J={4,5}, K={1} on 5 elements: 4 pairs x 4 sets
        let r = localize_prime(0b00110, 0b11000, 0b00001);
        assert_eq!(r.len(), 16);
        for s in &r {
            assert!(s.cond & 1 == 1);
        }
        // |I| * |J| * 2^(|I|+|J|-2)
        let r = localize_prime(0b0011, 0b0100, 0b1000);
        assert_eq!(r.len(), 2 * 1 * (1 << (2 + 1 - 2)));
    }

    #[test]
    fn localize_gauss_examples() {
        let r = localize_gauss(0b001, 0b010, 0b100);
        assert_eq!(r, vec![stmt(1, 2, &[3])]);
        let r = localize_gauss(0b00110, 0b11000, 0b00001);
        assert_eq!(r.len(), 4);
        let lp = localize_prime(0b00110, 0b11000, 0b00001);
        for s in &r {
            assert!(lp.contains(s));
        }
    }

    #[test]
    fn statement_text_roundtrip() {
        let s = stmt(1, 2, &[3, 5]);
        assert_eq!(s.to_text(), "(1,2|35)");
        assert_eq!(CIStatement::parse("(1,2|35)").unwrap(), s);
        assert_eq!(CIStatement::parse("(2,1|)").unwrap(), stmt(1, 2, &[]));
        assert!(CIStatement::parse("(1,1|)").is_err());
        assert!(CIStatement::parse("(1,2|1)").is_err());
    }

    #[test]
    fn partial_structure_parse() {
        let t = PartialCIStructure::parse(3, "+ (1,2|)\n- (1,3|2)\n").unwrap();
        let tbl = table(3);
        assert_eq!(t.state(tbl.index(&stmt(1, 2, &[]))), TriState::In);
        assert_eq!(t.state(tbl.index(&stmt(1, 3, &[2]))), TriState::Out);
        assert_eq!(t.state(tbl.index(&stmt(2, 3, &[]))), TriState::Free);
    }

    #[test]
    fn sg_closure_derives_rule_conclusions() {
        let l = CIStructure::from_statements(3, &[stmt(1, 2, &[]), stmt(1, 3, &[2])]);
        let c = sg_closure(&l, None).unwrap();
        assert!(c.contains(&stmt(1, 2, &[3])));
        assert!(c.contains(&stmt(1, 3, &[])));
        let out = CIStructure::from_statements(3, &[stmt(1, 3, &[])]);
        assert!(sg_closure(&l, Some(&out)).is_none());
    }

    #[test]
    fn bitstring_roundtrip() {
        let l = CIStructure::from_statements(3, &[stmt(1, 2, &[3]), stmt(2, 3, &[])]);
        let s = l.to_bitstring();
        assert_eq!(s, "010010");
        assert_eq!(CIStructure::parse_bitstring(&s).unwrap(), l);
    }
}
