//! The inference loop: the most precise congruence system describing a
//! propositional relation, computed by alternating SAT model search with
//! affine merges until no model escapes the abstraction.
//!
//! Starting from one model read as a point, each round asks the solver for a
//! model violating the current system; a hit is merged in (strictly
//! enlarging the space), a miss proves every model is described and the loop
//! stops. Ascending chains of affine spaces in (Z/2^w)^n have length at most
//! n·w + 1, which bounds the iteration count and is asserted at runtime.

use thiserror::Error;

use crate::blast::Relation;
use crate::cnf::VarAlloc;
use crate::domain::{self, encode_negation, from_model, merge, DomainError, NamedBitOrder};
use crate::modlin::{constraints_of, AffineSpace, CongruenceSystem};
use crate::sat::{SatResult, SolveError, Solver, SolverConfig};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InferError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Default)]
pub struct InferConfig {
    pub solver: SolverConfig,
}

/// Counters exposed for termination-bound checks and the CLI stats block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InferStats {
    pub iterations: u32,
    pub sat_calls: u32,
    pub conflicts: u64,
}

/// One round of the loop: the model found outside the previous system and
/// the merged system after taking it in.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub model_bits: Vec<bool>,
    pub system: CongruenceSystem,
}

/// Result of an inference run: the final system, the affine space behind it,
/// run statistics and the per-iteration trace.
#[derive(Debug, Clone)]
pub struct Inference {
    pub system: CongruenceSystem,
    pub space: AffineSpace,
    pub stats: InferStats,
    pub trace: Vec<TraceStep>,
}

/// Infers the most precise congruence system over `order` describing the
/// 0-1 models of the relation's formula. An unsatisfiable relation yields
/// the canonical inconsistent system.
pub fn infer(
    relation: &Relation,
    order: &NamedBitOrder,
    config: &InferConfig,
) -> Result<Inference, InferError> {
    let width = order.width();
    let base = &relation.formula;
    let mut stats = InferStats::default();
    let mut trace = Vec::new();

    let mut solver = Solver::from_formula(base, config.solver.clone());
    let first = solver.solve()?;
    stats.sat_calls += 1;
    stats.conflicts += solver.num_conflicts();

    let model = match first {
        SatResult::Unsat => {
            return Ok(Inference {
                system: CongruenceSystem::inconsistent(width, order.names()),
                space: AffineSpace::empty(width, order.names()),
                stats,
                trace,
            })
        }
        SatResult::Sat(model) => model,
    };
    let mut space = from_model(&model, order)?;
    let mut last_bits: Vec<bool> = order.vars().iter().map(|&v| model.value(v)).collect();

    let chain_bound = order.len() as u32 * width + 1;
    loop {
        stats.iterations += 1;
        assert!(
            stats.iterations <= chain_bound,
            "ascending chain bound n*width+1 = {chain_bound} exceeded"
        );
        let system = constraints_of(&space);
        trace.push(TraceStep {
            model_bits: last_bits.clone(),
            system: system.clone(),
        });

        let mut alloc = VarAlloc::resuming(base.num_vars);
        let negation = encode_negation(&system, order, &mut alloc)?;
        let combined = base.conjoin(&negation);
        let mut solver = Solver::from_formula(&combined, config.solver.clone());
        let result = solver.solve()?;
        stats.sat_calls += 1;
        stats.conflicts += solver.num_conflicts();

        match result {
            SatResult::Unsat => {
                return Ok(Inference {
                    system,
                    space,
                    stats,
                    trace,
                })
            }
            SatResult::Sat(model) => {
                debug_assert!(
                    !domain::describes(&system, &model, order),
                    "negation encoding returned a described model"
                );
                let point = from_model(&model, order)?;
                let next = merge(&space, &point)?;
                assert_ne!(
                    next, space,
                    "merge with an escaping model must strictly enlarge the space"
                );
                last_bits = order.vars().iter().map(|&v| model.value(v)).collect();
                space = next;
            }
        }
    }
}

/// Infers over the full order (inputs, intermediates, outputs), then
/// projects the result onto the input and output bits, surfacing the
/// relationships the intermediate versions would otherwise hide.
pub fn infer_io(relation: &Relation, config: &InferConfig) -> Result<Inference, InferError> {
    let full = NamedBitOrder::full_of(relation);
    let inference = infer(relation, &full, config)?;
    let io = NamedBitOrder::io_of(relation);
    let k_in = io.len() / 2;
    let keep: Vec<usize> = (0..k_in)
        .chain(full.len() - k_in..full.len())
        .collect();
    let space = inference.space.project(&keep);
    debug_assert_eq!(space.var_names(), &io.names()[..]);
    Ok(Inference {
        system: constraints_of(&space),
        space,
        stats: inference.stats,
        trace: inference.trace,
    })
}

/// Brute-force affine hull of every model of the relation, by all-SAT
/// enumeration over the named bits plus a merge fold — the optimality oracle
/// for `infer`.
pub fn model_hull(
    relation: &Relation,
    order: &NamedBitOrder,
    config: &InferConfig,
) -> Result<AffineSpace, InferError> {
    let projections = crate::sat::enumerate_projections(
        &relation.formula,
        &order.vars(),
        config.solver.clone(),
    )?;
    let mut space = AffineSpace::empty(order.width(), order.names());
    for bits in projections {
        let point: Vec<u64> = bits.iter().map(|&b| u64::from(b)).collect();
        let point_space = AffineSpace::single_point(order.width(), order.names(), point);
        space = merge(&space, &point_space)?;
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blast::blast_program;
    use crate::cnf::CnfFormula;
    use crate::machine::{parse, Program, Source};
    use crate::modlin::{space_of, Row};
    use crate::sat::DecisionOrder;
    use std::collections::BTreeSet;

    fn program(source: &str) -> Program {
        match parse(source).unwrap() {
            Source::Program(p) => p,
            Source::Cfg(_) => panic!("expected straight-line program"),
        }
    }

    fn zero_one_solutions(system: &CongruenceSystem) -> BTreeSet<Vec<u64>> {
        let n = system.num_vars();
        (0u64..1 << n)
            .map(|code| (0..n).map(|i| code >> i & 1).collect::<Vec<u64>>())
            .filter(|v| system.satisfied_by(v))
            .collect()
    }

    /// The worked example's S₁₀, rewritten with unsigned residues mod 16
    /// over ⟨r₀..r₃, r'₀..r'₃, r''₀..r''₃⟩:
    ///   r0 + r'0 = 1
    ///   r1 + r''1 = 1
    ///   4r2 + 4r''2 + 4 = 8r3 + 4r'0 + 4r'1 + 8r'2 + 8r''3
    ///   r'0 + r''0 = 1
    ///   2r'1 + 4r'2 + 2 = 8r'3 + 2r''0 + 2r''1 + 4r''2 + 8r''3
    fn s10(names: Vec<String>) -> CongruenceSystem {
        CongruenceSystem::new(
            4,
            names,
            vec![
                Row::new(vec![1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0], 1),
                Row::new(vec![0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0], 1),
                Row::new(vec![0, 0, 4, 8, 12, 12, 8, 0, 0, 0, 4, 8], 12),
                Row::new(vec![0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0], 1),
                Row::new(vec![0, 0, 0, 0, 0, 2, 4, 8, 14, 14, 12, 8], 14),
            ],
        )
    }

    /// The final three-congruence system over ⟨r₀..r₃, r''₀..r''₃⟩:
    ///   r0 = r''0, r1 + r''1 = 1, 2r1 + 4r2 + 8r3 + 2 = 2r''1 + 4r''2 + 8r''3
    fn final_io_system(names: Vec<String>) -> CongruenceSystem {
        CongruenceSystem::new(
            4,
            names,
            vec![
                Row::new(vec![1, 0, 0, 0, 15, 0, 0, 0], 0),
                Row::new(vec![0, 1, 0, 0, 0, 1, 0, 0], 1),
                Row::new(vec![0, 2, 4, 8, 0, 14, 12, 8], 14),
            ],
        )
    }

    #[test]
    fn double_increment_full_system_matches_worked_example() {
        let relation = blast_program(&program(".width 4\n.regs r\n  inc r\n  inc r\n"));
        let order = NamedBitOrder::full_of(&relation);
        let inference = infer(&relation, &order, &InferConfig::default()).unwrap();
        let expected = s10(order.names());
        assert_eq!(
            inference.system.canonicalize(),
            expected.canonicalize(),
            "canonical forms differ"
        );
        assert_eq!(
            zero_one_solutions(&inference.system),
            zero_one_solutions(&expected)
        );
        // The model sequence is heuristic-dependent, but the trace must grow
        // strictly and end in the final system.
        assert_eq!(
            inference.trace.last().unwrap().system.canonicalize(),
            expected.canonicalize()
        );
    }

    #[test]
    fn double_increment_io_projection_matches_worked_example() {
        let relation = blast_program(&program(".width 4\n.regs r\n  inc r\n  inc r\n"));
        let inference = infer_io(&relation, &InferConfig::default()).unwrap();
        let expected = final_io_system(inference.system.var_names.clone());
        assert_eq!(inference.system.canonicalize(), expected.canonicalize());
        assert_eq!(
            zero_one_solutions(&inference.system),
            zero_one_solutions(&expected)
        );
    }

    #[test]
    fn unsatisfiable_relation_yields_inconsistent_system() {
        let mut relation = blast_program(&program(".width 4\n.regs r\n"));
        relation.formula = CnfFormula::contradiction(relation.formula.num_vars);
        let order = NamedBitOrder::full_of(&relation);
        let inference = infer(&relation, &order, &InferConfig::default()).unwrap();
        assert!(inference.system.is_inconsistent());
        assert!(inference.space.is_empty());
        assert_eq!(inference.stats.sat_calls, 1);
    }

    #[test]
    fn single_increment_equals_model_hull() {
        let relation = blast_program(&program(".width 2\n.regs r\n  inc r\n"));
        let order = NamedBitOrder::full_of(&relation);
        let config = InferConfig::default();
        let inference = infer(&relation, &order, &config).unwrap();
        let hull = model_hull(&relation, &order, &config).unwrap();
        assert_eq!(inference.space, hull);
    }

    #[test]
    fn identity_program_relates_inputs_to_outputs() {
        let relation = blast_program(&program(".width 3\n.regs r\n"));
        let inference = infer_io(&relation, &InferConfig::default()).unwrap();
        // Same solution set as { r_i = r'_i for all i }.
        let expected = CongruenceSystem::new(
            3,
            inference.system.var_names.clone(),
            (0..3)
                .map(|i| {
                    let mut coeffs = vec![0u64; 6];
                    coeffs[i] = 1;
                    coeffs[i + 3] = 7;
                    Row::new(coeffs, 0)
                })
                .collect(),
        );
        assert_eq!(inference.system.canonicalize(), expected.canonicalize());
    }

    #[test]
    fn final_system_is_independent_of_decision_heuristic() {
        let relation = blast_program(&program(".width 3\n.regs a, b\n  add a, b\n  xor b, a\n"));
        let order = NamedBitOrder::full_of(&relation);
        let mut results = Vec::new();
        for (order_choice, vsids) in [
            (DecisionOrder::Ascending, false),
            (DecisionOrder::Descending, false),
            (DecisionOrder::Ascending, true),
        ] {
            let config = InferConfig {
                solver: SolverConfig {
                    order: order_choice,
                    vsids,
                    ..SolverConfig::default()
                },
            };
            results.push(infer(&relation, &order, &config).unwrap().system.canonicalize());
        }
        assert_eq!(results[0], results[1]);
        assert_eq!(results[0], results[2]);
    }

    #[test]
    fn sat_call_count_respects_chain_bound() {
        for source in [
            ".width 4\n.regs r\n  inc r\n  inc r\n",
            ".width 3\n.regs a, b\n  add a, b\n",
            ".width 2\n.regs a, b\n  xor a, b\n  sub b, a\n",
        ] {
            let relation = blast_program(&program(source));
            let order = NamedBitOrder::full_of(&relation);
            let inference = infer(&relation, &order, &InferConfig::default()).unwrap();
            let bound = order.len() as u32 * order.width() + 2;
            assert!(
                inference.stats.sat_calls <= bound,
                "{} sat calls exceed bound {} for {source:?}",
                inference.stats.sat_calls,
                bound
            );
            assert_eq!(inference.stats.iterations + 1, inference.stats.sat_calls);
        }
    }

    #[test]
    fn width32_double_increment_congruence_membership() {
        // At width 32 the full 0-1 solution set is far beyond enumeration;
        // the value-level congruence 2 + Σ 2^i r_i ≡ Σ 2^i r'_i (mod 2^32)
        // must instead lie in the span of the inferred system.
        let relation = blast_program(&program(".width 32\n.regs r\n  inc r\n  inc r\n"));
        let inference = infer_io(&relation, &InferConfig::default()).unwrap();
        let ring = crate::modlin::Ring::new(32);
        let mut coeffs = vec![0u64; 64];
        for i in 0..32 {
            coeffs[i] = 1 << i;
            coeffs[32 + i] = ring.neg(1 << i);
        }
        let row = Row::new(coeffs, ring.neg(2));
        assert!(inference.system.implies_row(&row));
        // Spaces behind systems of settled runs are exact: check the graph of
        // a few concrete executions satisfies the system.
        for x in [0u64, 1, 0xffff_fffe, 0xffff_ffff, 0x1234_5678] {
            let y = (x + 2) & 0xffff_ffff;
            let mut point = Vec::new();
            for i in 0..32 {
                point.push(x >> i & 1);
            }
            for i in 0..32 {
                point.push(y >> i & 1);
            }
            assert!(inference.system.satisfied_by(&point));
        }
    }
}
