//! A small complete CDCL satisfiability engine.
//!
//! Two watched literals per clause, first-UIP conflict analysis and
//! non-chronological backjumping, no restarts. The decision heuristic is a
//! fixed variable order (ascending or descending index) with `false` tried
//! first, so runs are reproducible; VSIDS scoring can be switched on where
//! speed matters more than stable model order. A conflict budget turns
//! pathological inputs into a clean resource error.

use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, PropVar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("conflict budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("literal over variable {var} out of range (solver has {num_vars} variables)")]
    VarOutOfRange { var: u32, num_vars: u32 },
}

/// Decision variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecisionOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_conflicts: u64,
    pub order: DecisionOrder,
    /// Activity-driven search (VSIDS scoring plus phase saving and Luby
    /// restarts) instead of the fixed variable order. Still deterministic,
    /// but model order is no longer the lexicographically first one; use it
    /// when instance size matters more than stable test logs.
    pub vsids: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_conflicts: 10_000_000,
            order: DecisionOrder::Ascending,
            vsids: false,
        }
    }
}

/// A total assignment satisfying the formula it answers for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, var: PropVar) -> bool {
        self.values[(var.index() - 1) as usize]
    }

    pub fn lit_value(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    /// Values indexed by variable, `values()[i]` belonging to variable `i+1`.
    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

// Internal literal: var * 2 + sign bit, 0-based variables.
type ILit = u32;

#[inline]
fn ilit(var: u32, positive: bool) -> ILit {
    var << 1 | u32::from(!positive)
}

#[inline]
fn ivar(lit: ILit) -> u32 {
    lit >> 1
}

#[inline]
fn ineg(lit: ILit) -> ILit {
    lit ^ 1
}

#[inline]
fn ipos(lit: ILit) -> bool {
    lit & 1 == 0
}

const VSIDS_DECAY: f64 = 0.95;
const VSIDS_RESCALE: f64 = 1e100;

pub struct Solver {
    config: SolverConfig,
    num_vars: u32,
    clauses: Vec<Vec<ILit>>,
    watches: Vec<Vec<u32>>, // literal -> clause indices watching it
    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    activity: Vec<f64>,
    bump: f64,
    saved_phase: Vec<bool>,
    conflicts: u64,
    unsat: bool,
}

/// The Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ...
fn luby(mut i: u64) -> u64 {
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i + 1 {
            k += 1;
        }
        if (1u64 << k) - 1 == i + 1 {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

const RESTART_BASE: u64 = 100;

impl Solver {
    pub fn new(num_vars: u32, config: SolverConfig) -> Solver {
        let n = num_vars as usize;
        Solver {
            config,
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assign: vec![None; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; n],
            activity: vec![0.0; n],
            bump: 1.0,
            saved_phase: vec![false; n],
            conflicts: 0,
            unsat: false,
        }
    }

    pub fn from_formula(formula: &CnfFormula, config: SolverConfig) -> Solver {
        let mut solver = Solver::new(formula.num_vars, config);
        for clause in &formula.clauses {
            solver
                .add_clause(clause)
                .expect("formula invariant: clause variables within num_vars");
        }
        solver
    }

    pub fn num_conflicts(&self) -> u64 {
        self.conflicts
    }

    #[inline]
    fn lit_value(&self, lit: ILit) -> Option<bool> {
        self.assign[ivar(lit) as usize].map(|b| b == ipos(lit))
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause, usable between solves (a blocking clause). The solver
    /// first backtracks to the root level; the clause is simplified against
    /// root-level facts before being attached.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SolveError> {
        for lit in lits {
            let var = lit.var().index();
            if var > self.num_vars {
                return Err(SolveError::VarOutOfRange {
                    var,
                    num_vars: self.num_vars,
                });
            }
        }
        self.backtrack(0);
        if self.unsat {
            return Ok(());
        }

        let mut clause: Vec<ILit> = Vec::with_capacity(lits.len());
        for lit in lits {
            let il = ilit(lit.var().index() - 1, lit.is_positive());
            if clause.contains(&ineg(il)) {
                return Ok(()); // tautology
            }
            match self.lit_value(il) {
                Some(true) => return Ok(()), // satisfied at root
                Some(false) => {}            // falsified at root: drop literal
                None => {
                    if !clause.contains(&il) {
                        clause.push(il);
                    }
                }
            }
        }

        match clause.len() {
            0 => self.unsat = true,
            1 => {
                self.enqueue(clause[0], None);
            }
            _ => self.attach(clause),
        }
        Ok(())
    }

    fn attach(&mut self, clause: Vec<ILit>) {
        let idx = self.clauses.len() as u32;
        self.watches[clause[0] as usize].push(idx);
        self.watches[clause[1] as usize].push(idx);
        self.clauses.push(clause);
    }

    fn enqueue(&mut self, lit: ILit, reason: Option<u32>) {
        let var = ivar(lit) as usize;
        debug_assert!(self.assign[var].is_none());
        self.assign[var] = Some(ipos(lit));
        self.saved_phase[var] = ipos(lit);
        self.level[var] = self.decision_level();
        self.reason[var] = reason;
        self.trail.push(lit);
    }

    fn backtrack(&mut self, target: u32) {
        if self.decision_level() <= target {
            return;
        }
        let keep = self.trail_lim[target as usize];
        for &lit in &self.trail[keep..] {
            self.assign[ivar(lit) as usize] = None;
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(target as usize);
        self.qhead = self.trail.len();
    }

    /// Propagates enqueued assignments; returns the index of a conflicting
    /// clause if one arises.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let assigned = self.trail[self.qhead];
            self.qhead += 1;
            let falsified = ineg(assigned);

            let mut watch_list = std::mem::take(&mut self.watches[falsified as usize]);
            let mut keep = 0;
            let mut conflict = None;
            'clauses: for scan in 0..watch_list.len() {
                let ci = watch_list[scan];
                let clause = &mut self.clauses[ci as usize];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                debug_assert_eq!(clause[1], falsified);
                let first = clause[0];
                if self.assign[ivar(first) as usize].map(|b| b == ipos(first)) == Some(true) {
                    watch_list[keep] = ci;
                    keep += 1;
                    continue;
                }
                for k in 2..clause.len() {
                    let cand = clause[k];
                    if self.assign[ivar(cand) as usize].map(|b| b == ipos(cand)) != Some(false) {
                        clause.swap(1, k);
                        self.watches[cand as usize].push(ci);
                        continue 'clauses;
                    }
                }
                // No replacement watch: unit or conflict.
                watch_list[keep] = ci;
                keep += 1;
                match self.lit_value(first) {
                    Some(false) => {
                        // Conflict: keep the remaining watches untouched.
                        for j in scan + 1..watch_list.len() {
                            watch_list[keep] = watch_list[j];
                            keep += 1;
                        }
                        conflict = Some(ci);
                        break;
                    }
                    _ => self.enqueue(first, Some(ci)),
                }
            }
            watch_list.truncate(keep);
            self.watches[falsified as usize] = watch_list;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, var: usize) {
        self.activity[var] += self.bump;
        if self.activity[var] > VSIDS_RESCALE {
            for a in self.activity.iter_mut() {
                *a /= VSIDS_RESCALE;
            }
            self.bump /= VSIDS_RESCALE;
        }
    }

    /// First-UIP conflict analysis; returns the learned clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, conflict: u32) -> (Vec<ILit>, u32) {
        let current = self.decision_level();
        let mut learned: Vec<ILit> = Vec::new();
        let mut counter = 0u32;
        let mut trail_idx = self.trail.len();
        let mut reason_clause = Some(conflict);
        let mut pivot: Option<ILit> = None;

        loop {
            if let Some(ci) = reason_clause {
                let clause = self.clauses[ci as usize].clone();
                for &q in &clause {
                    // A reason clause contains the literal it implied; skip it.
                    if Some(q) == pivot {
                        continue;
                    }
                    let var = ivar(q) as usize;
                    if !self.seen[var] && self.level[var] > 0 {
                        self.seen[var] = true;
                        self.bump_var(var);
                        if self.level[var] == current {
                            counter += 1;
                        } else {
                            learned.push(q);
                        }
                    }
                }
            }
            // Walk the trail backwards to the next marked literal.
            loop {
                trail_idx -= 1;
                if self.seen[ivar(self.trail[trail_idx]) as usize] {
                    break;
                }
            }
            let p = self.trail[trail_idx];
            self.seen[ivar(p) as usize] = false;
            counter -= 1;
            if counter == 0 {
                pivot = Some(p);
                break;
            }
            pivot = Some(p);
            reason_clause = self.reason[ivar(p) as usize];
        }

        for &q in &learned {
            self.seen[ivar(q) as usize] = false;
        }

        let uip = pivot.unwrap();
        let mut clause = Vec::with_capacity(learned.len() + 1);
        clause.push(ineg(uip));
        clause.extend(learned);

        let backjump = if clause.len() == 1 {
            0
        } else {
            // Move a literal of the highest remaining level into the second
            // watch position.
            let mut best = 1;
            for i in 2..clause.len() {
                if self.level[ivar(clause[i]) as usize] > self.level[ivar(clause[best]) as usize] {
                    best = i;
                }
            }
            clause.swap(1, best);
            self.level[ivar(clause[1]) as usize]
        };
        (clause, backjump)
    }

    fn decide(&mut self) -> bool {
        let pick = if self.config.vsids {
            let mut best: Option<usize> = None;
            for v in 0..self.num_vars as usize {
                if self.assign[v].is_none()
                    && best.is_none_or(|b| self.activity[v] > self.activity[b])
                {
                    best = Some(v);
                }
            }
            best
        } else {
            match self.config.order {
                DecisionOrder::Ascending => {
                    (0..self.num_vars as usize).find(|&v| self.assign[v].is_none())
                }
                DecisionOrder::Descending => {
                    (0..self.num_vars as usize).rfind(|&v| self.assign[v].is_none())
                }
            }
        };
        match pick {
            None => false,
            Some(var) => {
                self.trail_lim.push(self.trail.len());
                // Phase: false first.
                self.enqueue(ilit(var as u32, false), None);
                true
            }
        }
    }

    /// Complete decision procedure. The returned model is total; variables
    /// untouched by any clause come out `false`.
    pub fn solve(&mut self) -> Result<SatResult, SolveError> {
        if self.unsat {
            return Ok(SatResult::Unsat);
        }
        self.backtrack(0);
        loop {
            if let Some(conflict) = self.propagate() {
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return Ok(SatResult::Unsat);
                }
                self.conflicts += 1;
                if self.conflicts > self.config.max_conflicts {
                    return Err(SolveError::BudgetExceeded {
                        budget: self.config.max_conflicts,
                    });
                }
                let (clause, backjump) = self.analyze(conflict);
                self.backtrack(backjump);
                let asserting = clause[0];
                if clause.len() == 1 {
                    self.enqueue(asserting, None);
                } else {
                    self.attach(clause);
                    let ci = (self.clauses.len() - 1) as u32;
                    self.enqueue(asserting, Some(ci));
                }
                self.bump /= VSIDS_DECAY;
            } else if !self.decide() {
                let values: Vec<bool> = self.assign.iter().map(|a| a.unwrap()).collect();
                debug_assert!(
                    self.clauses
                        .iter()
                        .all(|c| c.iter().any(|&l| values[ivar(l) as usize] == ipos(l))),
                    "internal model check failed"
                );
                return Ok(SatResult::Sat(Model { values }));
            }
        }
    }
}

/// One-shot convenience wrapper.
pub fn solve_formula(
    formula: &CnfFormula,
    config: SolverConfig,
) -> Result<SatResult, SolveError> {
    Solver::from_formula(formula, config).solve()
}

/// All-SAT over a projection: enumerates the distinct restrictions of the
/// formula's models to `vars` by repeated solving under blocking clauses.
/// Returns one bit vector per distinct projection, in discovery order.
pub fn enumerate_projections(
    formula: &CnfFormula,
    vars: &[PropVar],
    config: SolverConfig,
) -> Result<Vec<Vec<bool>>, SolveError> {
    let mut solver = Solver::from_formula(formula, config);
    let mut projections = Vec::new();
    loop {
        match solver.solve()? {
            SatResult::Unsat => return Ok(projections),
            SatResult::Sat(model) => {
                let bits: Vec<bool> = vars.iter().map(|&v| model.value(v)).collect();
                let blocking: Vec<Lit> = vars
                    .iter()
                    .zip(&bits)
                    .map(|(&v, &b)| Lit::new(v, !b))
                    .collect();
                projections.push(bits);
                if blocking.is_empty() {
                    return Ok(projections);
                }
                solver.add_clause(&blocking)?;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::VarAlloc;
    use proptest::collection::vec as pvec;
    use proptest::prelude::*;

    fn clause(codes: &[i32]) -> Vec<Lit> {
        codes.iter().map(|&c| Lit::from_dimacs(c)).collect()
    }

    fn formula(num_vars: u32, clauses: &[&[i32]]) -> CnfFormula {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.push_clause(clause(c));
        }
        f
    }

    fn brute_force_sat(f: &CnfFormula) -> bool {
        let n = f.num_vars;
        (0u64..1 << n).any(|bits| {
            let assignment: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            f.evaluate(&assignment)
        })
    }

    /// Solve and, on Sat, re-evaluate the clause set under the model.
    fn solve_checked(f: &CnfFormula, config: SolverConfig) -> SatResult {
        let result = solve_formula(f, config).unwrap();
        if let SatResult::Sat(model) = &result {
            assert!(f.evaluate(model.values()), "model fails its own formula");
        }
        result
    }

    fn pigeonhole(pigeons: u32, holes: u32) -> CnfFormula {
        let var = |p: u32, h: u32| (p * holes + h + 1) as i32;
        let mut f = CnfFormula::new(pigeons * holes);
        for p in 0..pigeons {
            f.push_clause((0..holes).map(|h| Lit::from_dimacs(var(p, h))).collect());
        }
        for h in 0..holes {
            for p1 in 0..pigeons {
                for p2 in p1 + 1..pigeons {
                    f.push_clause(clause(&[-var(p1, h), -var(p2, h)]));
                }
            }
        }
        f
    }

    #[test]
    fn contradictory_units_are_unsat() {
        let f = formula(1, &[&[1], &[-1]]);
        assert_eq!(solve_checked(&f, SolverConfig::default()), SatResult::Unsat);
    }

    #[test]
    fn empty_clause_is_unsat() {
        let mut solver = Solver::new(3, SolverConfig::default());
        solver.add_clause(&[]).unwrap();
        assert_eq!(solver.solve().unwrap(), SatResult::Unsat);
    }

    #[test]
    fn unconstrained_vars_default_to_false() {
        let f = formula(4, &[&[2]]);
        match solve_checked(&f, SolverConfig::default()) {
            SatResult::Sat(m) => {
                assert_eq!(m.values(), &[false, true, false, false]);
            }
            SatResult::Unsat => panic!("satisfiable formula"),
        }
    }

    #[test]
    fn pigeonhole_4_into_3_is_unsat() {
        let f = pigeonhole(4, 3);
        assert!(!brute_force_sat(&f));
        assert_eq!(solve_checked(&f, SolverConfig::default()), SatResult::Unsat);
    }

    #[test]
    fn budget_error_on_tiny_budget() {
        let f = pigeonhole(5, 4);
        let config = SolverConfig {
            max_conflicts: 2,
            ..SolverConfig::default()
        };
        assert_eq!(
            solve_formula(&f, config),
            Err(SolveError::BudgetExceeded { budget: 2 })
        );
    }

    #[test]
    fn add_clause_rejects_out_of_range_vars() {
        let mut solver = Solver::new(2, SolverConfig::default());
        assert_eq!(
            solver.add_clause(&[Lit::from_dimacs(3)]),
            Err(SolveError::VarOutOfRange {
                var: 3,
                num_vars: 2
            })
        );
    }

    #[test]
    fn blocking_clauses_enumerate_all_assignments() {
        // Free formula over 4 variables: blocking each model in turn must
        // produce exactly 16 distinct assignments, then Unsat.
        let mut alloc = VarAlloc::new();
        let vars: Vec<PropVar> = (0..4).map(|_| alloc.fresh()).collect();
        let f = CnfFormula::new(alloc.num_vars());
        let mut solver = Solver::from_formula(&f, SolverConfig::default());
        let mut seen = std::collections::BTreeSet::new();
        loop {
            match solver.solve().unwrap() {
                SatResult::Unsat => break,
                SatResult::Sat(model) => {
                    let bits: Vec<bool> = vars.iter().map(|&v| model.value(v)).collect();
                    assert!(seen.insert(bits.clone()), "model repeated: {bits:?}");
                    let blocking: Vec<Lit> = vars
                        .iter()
                        .map(|&v| Lit::new(v, !model.value(v)))
                        .collect();
                    solver.add_clause(&blocking).unwrap();
                }
            }
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn blocked_model_differs_on_some_bit() {
        let f = formula(3, &[&[1, 2], &[-1, 3]]);
        let mut solver = Solver::from_formula(&f, SolverConfig::default());
        let first = match solver.solve().unwrap() {
            SatResult::Sat(m) => m,
            SatResult::Unsat => panic!("satisfiable"),
        };
        let blocking: Vec<Lit> = (1..=3)
            .map(|i| {
                let v = PropVar::new(i);
                Lit::new(v, !first.value(v))
            })
            .collect();
        solver.add_clause(&blocking).unwrap();
        match solver.solve().unwrap() {
            SatResult::Sat(second) => assert_ne!(first, second),
            SatResult::Unsat => panic!("only one model blocked"),
        }
    }

    #[test]
    fn identical_runs_return_identical_models() {
        let f = formula(5, &[&[1, -2, 3], &[-1, 4], &[2, 5], &[-3, -4]]);
        let a = solve_checked(&f, SolverConfig::default());
        let b = solve_checked(&f, SolverConfig::default());
        assert_eq!(a, b);
    }

    #[test]
    fn decision_orders_both_satisfy() {
        let f = formula(5, &[&[1, 2], &[-2, 3], &[-4, -5]]);
        for order in [DecisionOrder::Ascending, DecisionOrder::Descending] {
            let config = SolverConfig {
                order,
                ..SolverConfig::default()
            };
            assert!(matches!(solve_checked(&f, config), SatResult::Sat(_)));
        }
    }

    fn small_instance() -> impl Strategy<Value = CnfFormula> {
        (1u32..=8).prop_flat_map(|n| {
            let lit = (1u32..=n, any::<bool>())
                .prop_map(|(v, pos)| Lit::new(PropVar::new(v), pos));
            pvec(pvec(lit, 0..=4), 0..=12).prop_map(move |clauses| {
                let mut f = CnfFormula::new(n);
                for c in clauses {
                    f.push_clause(c);
                }
                f
            })
        })
    }

    proptest! {
        #[test]
        fn agrees_with_truth_table(f in small_instance()) {
            let expected = brute_force_sat(&f);
            for vsids in [false, true] {
                let config = SolverConfig { vsids, ..SolverConfig::default() };
                let got = matches!(solve_checked(&f, config), SatResult::Sat(_));
                prop_assert_eq!(got, expected);
            }
        }
    }
}
