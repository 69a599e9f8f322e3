//! CNF construction, a CDCL satisfiability solver (two-watched literals,
//! first-UIP learning, Luby restarts, deterministic lowest-index branching)
//! and model enumeration: blocking-clause AllSAT for arbitrary projections
//! plus a chronological-backtracking enumerator for full-assignment streams,
//! which the census pipelines use to avoid one blocking clause per model.

use crate::error::{GciError, Result};

/// Clause set over variables 1..=num_vars; literals are nonzero signed
/// integers, DIMACS style.
#[derive(Debug, Clone, Default)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Self {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn add_clause(&mut self, lits: Vec<i32>) {
        debug_assert!(lits
            .iter()
            .all(|&l| l != 0 && (l.unsigned_abs() as usize) <= self.num_vars));
        self.clauses.push(lits);
    }

    pub fn add_unit(&mut self, lit: i32) {
        self.add_clause(vec![lit]);
    }

    /// Evaluates the formula under a total assignment (index 1..=num_vars).
    pub fn eval(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = l.unsigned_abs() as usize;
                if l > 0 {
                    model[v]
                } else {
                    !model[v]
                }
            })
        })
    }

    /// DIMACS text (`p cnf V C` header, zero-terminated clause lines).
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&l.to_string());
                s.push(' ');
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut cnf: Option<Cnf> = None;
        let mut cur: Vec<i32> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("p cnf") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(GciError::Parse("bad DIMACS header".into()));
                }
                let v: usize = parts[0]
                    .parse()
                    .map_err(|_| GciError::Parse("bad DIMACS header".into()))?;
                cnf = Some(Cnf::new(v));
                continue;
            }
            let cnf = cnf
                .as_mut()
                .ok_or_else(|| GciError::Parse("clause before DIMACS header".into()))?;
            for tok in line.split_whitespace() {
                let l: i32 = tok
                    .parse()
                    .map_err(|_| GciError::Parse(format!("bad literal `{tok}`")))?;
                if l == 0 {
                    cnf.clauses.push(std::mem::take(&mut cur));
                } else {
                    cur.push(l);
                }
            }
        }
        cnf.ok_or_else(|| GciError::Parse("missing DIMACS header".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Total satisfying assignment, indexed by variable (entry 0 unused).
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

// internal literal: var << 1 | (1 if negative)
type Lit = u32;

#[inline]
fn lit_from_dimacs(l: i32) -> Lit {
    let v = l.unsigned_abs();
    (v << 1) | (l < 0) as u32
}

#[inline]
fn lit_neg(l: Lit) -> Lit {
    l ^ 1
}

#[inline]
fn lit_var(l: Lit) -> usize {
    (l >> 1) as usize
}

#[inline]
fn lit_is_pos(l: Lit) -> bool {
    l & 1 == 0
}

const NO_REASON: u32 = u32::MAX;

/// CDCL solver. Branching is deterministic (lowest-index unassigned variable,
/// positive polarity) so enumeration order is reproducible.
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>, // original + learned + blocking
    watches: Vec<Vec<u32>>, // lit -> clause indices watching it
    assign: Vec<i8>,        // var -> 0 unassigned, 1 true, -1 false
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    conflicts: u64,
    ok: bool,
}

impl Solver {
    pub fn new(cnf: &Cnf) -> Self {
        let mut s = Solver {
            num_vars: cnf.num_vars,
            clauses: Vec::with_capacity(cnf.clauses.len()),
            watches: vec![Vec::new(); 2 * (cnf.num_vars + 1)],
            assign: vec![0; cnf.num_vars + 1],
            level: vec![0; cnf.num_vars + 1],
            reason: vec![NO_REASON; cnf.num_vars + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            conflicts: 0,
            ok: true,
        };
        for c in &cnf.clauses {
            s.add_clause_dimacs(c);
        }
        s
    }

    pub fn num_conflicts(&self) -> u64 {
        self.conflicts
    }

    /// Builds a solver from a shared base formula plus unit assumptions,
    /// simplifying base clauses against the units during construction. The
    /// base formula is not copied wholesale; satisfied clauses are dropped.
    pub fn with_base_and_units(base: &Cnf, units: &[i32]) -> Self {
        let mut s = Solver {
            num_vars: base.num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * (base.num_vars + 1)],
            assign: vec![0; base.num_vars + 1],
            level: vec![0; base.num_vars + 1],
            reason: vec![NO_REASON; base.num_vars + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            conflicts: 0,
            ok: true,
        };
        for &u in units {
            s.add_clause_dimacs(&[u]);
        }
        for c in &base.clauses {
            if !s.ok {
                break;
            }
            s.add_clause_dimacs(c);
        }
        s
    }

    fn value(&self, l: Lit) -> i8 {
        let v = self.assign[lit_var(l)];
        if lit_is_pos(l) {
            v
        } else {
            -v
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause in DIMACS form; must be called at decision level 0.
    pub fn add_clause_dimacs(&mut self, lits: &[i32]) {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return;
        }
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            let lit = lit_from_dimacs(l);
            if c.contains(&lit) {
                continue;
            }
            if c.contains(&lit_neg(lit)) {
                return; // tautology
            }
            match self.value(lit) {
                1 => return, // satisfied at level 0
                -1 => continue,
                _ => c.push(lit),
            }
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                if !self.enqueue(c[0], NO_REASON) || self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[c[0] as usize].push(idx);
        self.watches[c[1] as usize].push(idx);
        self.clauses.push(c);
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: u32) -> bool {
        match self.value(l) {
            1 => true,
            -1 => false,
            _ => {
                let v = lit_var(l);
                self.assign[v] = if lit_is_pos(l) { 1 } else { -1 };
                self.level[v] = self.decision_level();
                self.reason[v] = reason;
                self.trail.push(l);
                true
            }
        }
    }

    /// Unit propagation with two watched literals; returns a conflicting
    /// clause index.
    fn propagate(&mut self) -> Option<u32> {
        fn lit_value(assign: &[i8], l: Lit) -> i8 {
            let v = assign[lit_var(l)];
            if lit_is_pos(l) {
                v
            } else {
                -v
            }
        }
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = lit_neg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                let clause = &mut self.clauses[ci as usize];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if lit_value(&self.assign, first) == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    if lit_value(&self.assign, clause[k]) != -1 {
                        clause.swap(1, k);
                        let w = clause[1];
                        self.watches[w as usize].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if lit_value(&self.assign, first) == -1 {
                    self.watches[false_lit as usize] = ws;
                    self.qhead = self.trail.len();
                    return Some(ci);
                }
                let ok = self.enqueue(first, ci);
                debug_assert!(ok);
                i += 1;
            }
            self.watches[false_lit as usize] = ws;
        }
        None
    }

    fn cancel_until(&mut self, level: u32) {
        while self.decision_level() > level {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let l = self.trail.pop().unwrap();
                let v = lit_var(l);
                self.assign[v] = 0;
                self.reason[v] = NO_REASON;
            }
        }
        self.qhead = self.trail.len().min(self.qhead);
        if level == 0 {
            self.qhead = self.trail.len();
        }
    }

    /// First-UIP conflict analysis; returns the learned clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, conflict: u32) -> (Vec<Lit>, u32) {
        let mut learned: Vec<Lit> = Vec::new();
        let mut seen = vec![false; self.num_vars + 1];
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut reason_idx = conflict;
        let mut trail_pos = self.trail.len();
        let cur_level = self.decision_level();
        loop {
            let clause = &self.clauses[reason_idx as usize];
            let skip = usize::from(p.is_some());
            for &q in clause.iter().skip(skip) {
                let v = lit_var(q);
                if !seen[v] && self.level[v] > 0 {
                    seen[v] = true;
                    if self.level[v] == cur_level {
                        counter += 1;
                    } else {
                        learned.push(q);
                    }
                }
            }
            loop {
                trail_pos -= 1;
                let l = self.trail[trail_pos];
                if seen[lit_var(l)] {
                    p = Some(l);
                    break;
                }
            }
            let v = lit_var(p.unwrap());
            seen[v] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            reason_idx = self.reason[v];
            debug_assert_ne!(reason_idx, NO_REASON);
        }
        let uip = lit_neg(p.unwrap());
        let mut clause = vec![uip];
        clause.extend(learned);
        let backjump = if clause.len() == 1 {
            0
        } else {
            let mut max = 0;
            let mut argmax = 1;
            for (k, &l) in clause.iter().enumerate().skip(1) {
                if self.level[lit_var(l)] > max {
                    max = self.level[lit_var(l)];
                    argmax = k;
                }
            }
            clause.swap(1, argmax);
            max
        };
        (clause, backjump)
    }

    fn luby(mut x: u64) -> u64 {
        let (mut size, mut seq) = (1u64, 0u32);
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1u64 << seq
    }

    /// Complete decision procedure.
    pub fn solve(&mut self) -> SatResult {
        if !self.ok {
            return SatResult::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SatResult::Unsat;
        }
        let mut restart_count = 0u64;
        let mut conflicts_until_restart = Self::luby(restart_count) * 64;
        loop {
            match self.propagate() {
                Some(conflict) => {
                    self.conflicts += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return SatResult::Unsat;
                    }
                    let (clause, backjump) = self.analyze(conflict);
                    self.cancel_until(backjump);
                    let assert_lit = clause[0];
                    let reason = if clause.len() == 1 {
                        NO_REASON
                    } else {
                        self.attach(clause)
                    };
                    if !self.enqueue(assert_lit, reason) {
                        self.ok = false;
                        return SatResult::Unsat;
                    }
                    conflicts_until_restart = conflicts_until_restart.saturating_sub(1);
                    if conflicts_until_restart == 0 {
                        restart_count += 1;
                        conflicts_until_restart = Self::luby(restart_count) * 64;
                        self.cancel_until(0);
                    }
                }
                None => {
                    // deterministic branching: lowest-index unassigned, positive
                    let next = (1..=self.num_vars).find(|&v| self.assign[v] == 0);
                    match next {
                        None => {
                            let model: Vec<bool> = self.assign.iter().map(|&a| a == 1).collect();
                            return SatResult::Sat(model);
                        }
                        Some(v) => {
                            self.trail_lim.push(self.trail.len());
                            let ok = self.enqueue((v as u32) << 1, NO_REASON);
                            debug_assert!(ok);
                        }
                    }
                }
            }
        }
    }

    /// Adds a clause after a solve (resets to level 0 first).
    pub fn add_blocking_clause(&mut self, lits: &[i32]) {
        self.cancel_until(0);
        self.add_clause_dimacs(lits);
    }
}

/// Complete decision for a CNF.
pub fn solve(cnf: &Cnf) -> SatResult {
    Solver::new(cnf).solve()
}

/// Enumerates every distinct restriction of the satisfying assignments to
/// `proj` (variable list, deduplicated and sorted internally) via blocking
/// clauses. The callback receives values aligned with the sorted projection
/// and returns false to stop early.
pub fn all_sat(cnf: &Cnf, proj: &[usize], mut f: impl FnMut(&[bool]) -> bool) {
    assert!(!proj.is_empty(), "projection must be nonempty");
    let mut proj: Vec<usize> = proj.to_vec();
    proj.sort_unstable();
    proj.dedup();
    assert!(*proj.last().unwrap() <= cnf.num_vars);
    let mut solver = Solver::new(cnf);
    loop {
        match solver.solve() {
            SatResult::Unsat => return,
            SatResult::Sat(model) => {
                let values: Vec<bool> = proj.iter().map(|&v| model[v]).collect();
                let blocking: Vec<i32> = proj
                    .iter()
                    .zip(&values)
                    .map(|(&v, &val)| if val { -(v as i32) } else { v as i32 })
                    .collect();
                if !f(&values) {
                    return;
                }
                solver.add_blocking_clause(&blocking);
            }
        }
    }
}

/// Chronological-backtracking enumeration of all total satisfying
/// assignments, without learning or blocking clauses. Models arrive in the
/// deterministic branching order; the callback returns false to stop.
pub fn for_each_model(cnf: &Cnf, mut f: impl FnMut(&[bool]) -> bool) {
    let num_vars = cnf.num_vars;
    let mut assign = vec![0i8; num_vars + 1];
    let mut clauses: Vec<Vec<Lit>> = Vec::with_capacity(cnf.clauses.len());
    let mut units: Vec<Lit> = Vec::new();
    for c in &cnf.clauses {
        let mut lits: Vec<Lit> = Vec::with_capacity(c.len());
        let mut taut = false;
        for &l in c {
            let lit = lit_from_dimacs(l);
            if lits.contains(&lit) {
                continue;
            }
            if lits.contains(&lit_neg(lit)) {
                taut = true;
                break;
            }
            lits.push(lit);
        }
        if taut {
            continue;
        }
        match lits.len() {
            0 => return,
            1 => units.push(lits[0]),
            _ => clauses.push(lits),
        }
    }
    let mut watches: Vec<Vec<u32>> = vec![Vec::new(); 2 * (num_vars + 1)];
    for (ci, c) in clauses.iter().enumerate() {
        watches[c[0] as usize].push(ci as u32);
        watches[c[1] as usize].push(ci as u32);
    }
    let mut trail: Vec<Lit> = Vec::new();
    let mut qhead = 0usize;
    // decision frames: (var, flipped, trail length before the decision)
    let mut decisions: Vec<(usize, bool, usize)> = Vec::new();

    for &u in &units {
        let v = lit_var(u);
        let want: i8 = if lit_is_pos(u) { 1 } else { -1 };
        match assign[v] {
            0 => {
                assign[v] = want;
                trail.push(u);
            }
            a if a == want => {}
            _ => return,
        }
    }

    fn value(assign: &[i8], l: Lit) -> i8 {
        let v = assign[lit_var(l)];
        if lit_is_pos(l) {
            v
        } else {
            -v
        }
    }

    'outer: loop {
        let mut conflict = false;
        while qhead < trail.len() {
            let p = trail[qhead];
            qhead += 1;
            let false_lit = lit_neg(p);
            let mut ws = std::mem::take(&mut watches[false_lit as usize]);
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i] as usize;
                let clause = &mut clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if value(&assign, first) == 1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    if value(&assign, clause[k]) != -1 {
                        clause.swap(1, k);
                        watches[clause[1] as usize].push(ci as u32);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if value(&assign, first) == -1 {
                    conflict = true;
                    break;
                }
                let v = lit_var(first);
                assign[v] = if lit_is_pos(first) { 1 } else { -1 };
                trail.push(first);
                i += 1;
            }
            watches[false_lit as usize] = ws;
            if conflict {
                break;
            }
        }
        if !conflict {
            if let Some(v) = (1..=num_vars).find(|&v| assign[v] == 0) {
                decisions.push((v, false, trail.len()));
                assign[v] = 1;
                trail.push((v as u32) << 1);
                continue 'outer;
            }
            let model: Vec<bool> = assign.iter().map(|&a| a == 1).collect();
            if !f(&model) {
                return;
            }
        }
        // backtrack to the last unflipped decision and flip it
        loop {
            let Some((v, flipped, mark)) = decisions.pop() else {
                return;
            };
            while trail.len() > mark {
                let l = trail.pop().unwrap();
                assign[lit_var(l)] = 0;
            }
            qhead = trail.len();
            if !flipped {
                decisions.push((v, true, mark));
                assign[v] = -1;
                trail.push(((v as u32) << 1) | 1);
                continue 'outer;
            }
        }
    }
}
