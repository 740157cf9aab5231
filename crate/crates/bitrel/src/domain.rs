//! The congruence abstract domain over relation bits.
//!
//! A SAT model of a blasted relation, read as a 0-1 vector over the named
//! bits, is a point in (Z/2^w)^n; the abstraction of a relation is the
//! smallest affine space containing all such points. This module supplies
//! the pieces the inference loop composes: model-to-point conversion, the
//! merge (affine hull of two spaces), the concretisation test `describes`,
//! and the CNF encoding of "violates at least one congruence", which is what
//! lets a SAT solver search for models outside the current abstraction.

use thiserror::Error;

use crate::blast::{Bit, CircuitBuilder, Relation};
use crate::cnf::{CnfFormula, Lit, PropVar, VarAlloc};
use crate::modlin::{
    constraints_of, intersect, space_of, AffineSpace, CongruenceSystem, ModlinError, Row,
};
use crate::sat::Model;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("bit orders do not match")]
    OrderMismatch,
    #[error("named bit `{0}` is not assigned by the model")]
    UnassignedBit(String),
    #[error("cannot encode the negation of an inconsistent system")]
    InconsistentSystem,
    #[error(transparent)]
    Modlin(#[from] ModlinError),
}

/// The fixed ordering of named bits shared by model vectors, affine-space
/// coordinates and printed congruences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedBitOrder {
    width: u32,
    entries: Vec<(String, PropVar)>,
}

impl NamedBitOrder {
    pub fn new(width: u32, entries: Vec<(String, PropVar)>) -> NamedBitOrder {
        NamedBitOrder { width, entries }
    }

    /// Inputs, temporaries in sequence, outputs — the order the worked
    /// examples use for model vectors.
    pub fn full_of(relation: &Relation) -> NamedBitOrder {
        NamedBitOrder::new(relation.word.width(), relation.named_bits_full())
    }

    /// Input and output bits only.
    pub fn io_of(relation: &Relation) -> NamedBitOrder {
        NamedBitOrder::new(relation.word.width(), relation.named_bits_io())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn vars(&self) -> Vec<PropVar> {
        self.entries.iter().map(|(_, v)| *v).collect()
    }

    pub fn entries(&self) -> &[(String, PropVar)] {
        &self.entries
    }
}

/// Reinterprets a model as the point-only affine space over the order's
/// coordinates (the paper's Mₖ-to-Sₖ' reading).
pub fn from_model(model: &Model, order: &NamedBitOrder) -> Result<AffineSpace, DomainError> {
    let point = order
        .entries
        .iter()
        .map(|(name, var)| {
            if var.index() as usize > model.num_vars() {
                Err(DomainError::UnassignedBit(name.clone()))
            } else {
                Ok(u64::from(model.value(*var)))
            }
        })
        .collect::<Result<Vec<u64>, _>>()?;
    Ok(AffineSpace::single_point(
        order.width(),
        order.names(),
        point,
    ))
}

/// The merge: the smallest affine space containing both operands, the
/// domain's join. Commutative, associative and idempotent up to canonical
/// form, and monotone in both arguments.
pub fn merge(a: &AffineSpace, b: &AffineSpace) -> Result<AffineSpace, DomainError> {
    if a.width() != b.width() || a.var_names() != b.var_names() {
        return Err(DomainError::OrderMismatch);
    }
    let (pa, pb) = match (a.point(), b.point()) {
        (None, _) => return Ok(b.clone()),
        (_, None) => return Ok(a.clone()),
        (Some(pa), Some(pb)) => (pa, pb),
    };
    let ring = a.ring();
    let mut gens: Vec<Vec<u64>> = a.generators().to_vec();
    gens.extend(b.generators().iter().cloned());
    gens.push(
        pb.iter()
            .zip(pa)
            .map(|(&x, &y)| ring.sub(x, y))
            .collect(),
    );
    Ok(AffineSpace::affine(
        a.width(),
        a.var_names().to_vec(),
        pa.to_vec(),
        gens,
    ))
}

/// Concretisation test: does the model's 0-1 vector satisfy every row?
/// Only 0-1 vectors are ever consulted; solutions of the congruences with
/// residues outside {0, 1} play no role in the abstraction.
pub fn describes(system: &CongruenceSystem, model: &Model, order: &NamedBitOrder) -> bool {
    debug_assert_eq!(system.var_names, order.names());
    let point: Vec<u64> = order
        .entries
        .iter()
        .map(|(_, var)| u64::from(model.value(*var)))
        .collect();
    system.satisfied_by(&point)
}

/// CNF whose models, projected onto the order's variables, are exactly the
/// 0-1 vectors violating at least one row of the system.
///
/// Per row, a ripple-carry accumulator sums the coefficients of the true
/// bits (constants folded), a comparator checks the result against the
/// right-hand side, and the negated comparison defines a violation
/// indicator; one final clause requires some indicator to hold. All
/// auxiliaries are functionally determined, so the projection is exact.
///
/// A system with no rows describes everything, so its negation is the FALSE
/// formula. An inconsistent system is rejected.
pub fn encode_negation(
    system: &CongruenceSystem,
    order: &NamedBitOrder,
    alloc: &mut VarAlloc,
) -> Result<CnfFormula, DomainError> {
    if system.is_inconsistent() {
        return Err(DomainError::InconsistentSystem);
    }
    debug_assert_eq!(system.var_names, order.names());
    if system.rows.is_empty() {
        return Ok(CnfFormula::contradiction(alloc.num_vars()));
    }

    let width = system.width;
    let mut builder = CircuitBuilder::new(alloc);
    let mut indicators: Vec<Lit> = Vec::new();

    for row in &system.rows {
        let mut acc = CircuitBuilder::const_bits(0, width);
        for (&coeff, (_, var)) in row.coeffs.iter().zip(order.entries()) {
            if coeff == 0 {
                continue;
            }
            let x = Lit::positive(*var);
            let term: Vec<Bit> = (0..width)
                .map(|i| {
                    if coeff >> i & 1 == 1 {
                        Bit::Of(x)
                    } else {
                        Bit::Const(false)
                    }
                })
                .collect();
            acc = builder.ripple_add(&acc, &term, Bit::Const(false));
        }

        // Literals true exactly when the accumulator differs from the rhs.
        let mut mismatches: Vec<Lit> = Vec::new();
        let mut constant_mismatch = false;
        for (i, &bit) in acc.iter().enumerate() {
            let want = row.rhs >> i & 1 == 1;
            match bit {
                Bit::Const(b) => constant_mismatch |= b != want,
                Bit::Of(l) => mismatches.push(if want { !l } else { l }),
            }
        }

        let v = Lit::positive(builder.fresh_aux());
        if constant_mismatch {
            builder.clauses.push(vec![v]);
        } else if mismatches.is_empty() {
            builder.clauses.push(vec![!v]);
        } else {
            let mut long = vec![!v];
            long.extend(mismatches.iter().copied());
            builder.clauses.push(long);
            for &m in &mismatches {
                builder.clauses.push(vec![v, !m]);
            }
        }
        indicators.push(v);
    }

    builder.clauses.push(indicators);
    let clauses = builder.clauses;
    let mut formula = CnfFormula::new(alloc.num_vars());
    formula.clauses = clauses;
    Ok(formula)
}

/// Composition of two affine relations sharing a mid coordinate block:
/// `first` over (in, mid), `second` over (mid, out), each block the same
/// size. Both are embedded into (in, mid, out), intersected in constraint
/// form, and the mid block is projected away.
pub fn compose_abstract(
    first: &AffineSpace,
    second: &AffineSpace,
) -> Result<AffineSpace, DomainError> {
    if first.width() != second.width()
        || first.var_names().len() != second.var_names().len()
        || first.var_names().len() % 2 != 0
    {
        return Err(DomainError::OrderMismatch);
    }
    let k = first.var_names().len() / 2;
    if first.var_names()[k..] != second.var_names()[..k] {
        return Err(DomainError::OrderMismatch);
    }

    let mut names: Vec<String> = first.var_names().to_vec();
    names.extend_from_slice(&second.var_names()[k..]);
    let n = names.len();

    let embed = |system: &CongruenceSystem, offset: usize| -> CongruenceSystem {
        let rows = system
            .rows
            .iter()
            .map(|r| {
                let mut coeffs = vec![0u64; n];
                coeffs[offset..offset + r.coeffs.len()].copy_from_slice(&r.coeffs);
                Row::new(coeffs, r.rhs)
            })
            .collect();
        CongruenceSystem::new(first.width(), names.clone(), rows)
    };

    let combined = intersect(
        &embed(&constraints_of(first), 0),
        &embed(&constraints_of(second), k),
    )?;
    let joint = space_of(&combined);
    let keep: Vec<usize> = (0..k).chain(2 * k..3 * k).collect();
    Ok(joint.project(&keep))
}
