//! Bit-blasting: instructions and instruction sequences become CNF relations
//! between named input and output bit-vectors.
//!
//! Every register version (input, output, or an intermediate produced by
//! composition) is a vector of fresh propositional variables, LSB first.
//! Gates go through Tseitin encoding with one auxiliary per gate; since each
//! auxiliary is functionally determined, projecting models onto the named
//! bits recovers exactly the circuit's relation, not merely an
//! equisatisfiable stand-in. Composition renames rather than re-blasts: the
//! left relation's outputs and the right relation's inputs are both
//! substituted by a fresh temporary version.

use std::fmt;

use thiserror::Error;

use crate::cnf::{CnfFormula, Lit, PropVar, VarAlloc};
use crate::machine::{Instruction, Program, RegisterId, WordSpec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlastError {
    #[error("cannot compose relations of width {0} and {1}")]
    WidthMismatch(u32, u32),
    #[error("cannot compose relations over different register sets")]
    RegisterMismatch,
}

/// Register-vector version tag, used in variable names such as `r[0]@in`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Version {
    In,
    Out,
    Tmp(usize),
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Version::In => f.write_str("in"),
            Version::Out => f.write_str("out"),
            Version::Tmp(k) => write!(f, "tmp{k}"),
        }
    }
}

pub fn bit_name(reg: &RegisterId, bit: u32, version: Version) -> String {
    format!("{reg}[{bit}]@{version}")
}

/// One propositional variable per (register, bit) for a single version;
/// bit 0 is the least significant and carries weight 2^0 downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVarMap {
    entries: Vec<(RegisterId, Vec<PropVar>)>,
}

impl BitVarMap {
    fn fresh(registers: &[RegisterId], width: u32, alloc: &mut VarAlloc) -> BitVarMap {
        let entries = registers
            .iter()
            .map(|r| (r.clone(), (0..width).map(|_| alloc.fresh()).collect()))
            .collect();
        BitVarMap { entries }
    }

    pub fn bits(&self, reg: &RegisterId) -> &[PropVar] {
        &self
            .entries
            .iter()
            .find(|(r, _)| r == reg)
            .expect("register present in map")
            .1
    }

    pub fn registers(&self) -> impl Iterator<Item = &RegisterId> {
        self.entries.iter().map(|(r, _)| r)
    }

    /// All variables in declaration order, LSB first within a register.
    pub fn all_vars(&self) -> impl Iterator<Item = PropVar> + '_ {
        self.entries.iter().flat_map(|(_, bits)| bits.iter().copied())
    }

    fn remapped(&self, subst: &[PropVar]) -> BitVarMap {
        BitVarMap {
            entries: self
                .entries
                .iter()
                .map(|(r, bits)| {
                    (
                        r.clone(),
                        bits.iter().map(|v| subst[v.index() as usize]).collect(),
                    )
                })
                .collect(),
        }
    }
}

/// A propositional relation between the bits of the input and output
/// register vectors: (x, y) are related iff some assignment to the auxiliary
/// variables (temporaries plus Tseitin gates) satisfies the formula with the
/// input bits at x and the output bits at y.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub word: WordSpec,
    pub formula: CnfFormula,
    pub inputs: BitVarMap,
    pub outputs: BitVarMap,
    pub temps: Vec<BitVarMap>,
    pub tseitin: Vec<PropVar>,
}

impl Relation {
    pub fn registers(&self) -> Vec<RegisterId> {
        self.inputs.registers().cloned().collect()
    }

    /// Named bits in the order (inputs, temporaries in sequence, outputs),
    /// each version listing registers in declaration order, LSB first.
    pub fn named_bits_full(&self) -> Vec<(String, PropVar)> {
        let mut out = self.version_bits(Version::In);
        for k in 0..self.temps.len() {
            out.extend(self.version_bits(Version::Tmp(k)));
        }
        out.extend(self.version_bits(Version::Out));
        out
    }

    /// Named input and output bits only.
    pub fn named_bits_io(&self) -> Vec<(String, PropVar)> {
        let mut out = self.version_bits(Version::In);
        out.extend(self.version_bits(Version::Out));
        out
    }

    fn version_bits(&self, version: Version) -> Vec<(String, PropVar)> {
        let map = match version {
            Version::In => &self.inputs,
            Version::Out => &self.outputs,
            Version::Tmp(k) => &self.temps[k],
        };
        map.entries
            .iter()
            .flat_map(|(reg, bits)| {
                bits.iter()
                    .enumerate()
                    .map(move |(i, &var)| (bit_name(reg, i as u32, version), var))
            })
            .collect()
    }

    /// DIMACS rendering with a `c var <idx> = <reg>[<bit>]@<version>` header
    /// line for every named bit.
    pub fn to_dimacs(&self) -> String {
        let names: Vec<(PropVar, String)> = self
            .named_bits_full()
            .into_iter()
            .map(|(name, var)| (var, name))
            .collect();
        self.formula.to_dimacs(&names)
    }
}

/// A bit in a circuit under construction: a constant or a literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Bit {
    Const(bool),
    Of(Lit),
}

impl Bit {
    pub(crate) fn negated(self) -> Bit {
        match self {
            Bit::Const(b) => Bit::Const(!b),
            Bit::Of(l) => Bit::Of(!l),
        }
    }
}

/// Clause accumulator with Tseitin gate helpers. Constant operands fold
/// away; gates over equal or complementary literals simplify without
/// allocating.
pub(crate) struct CircuitBuilder<'a> {
    alloc: &'a mut VarAlloc,
    pub(crate) clauses: Vec<Vec<Lit>>,
    pub(crate) aux: Vec<PropVar>,
}

impl<'a> CircuitBuilder<'a> {
    pub(crate) fn new(alloc: &'a mut VarAlloc) -> CircuitBuilder<'a> {
        CircuitBuilder {
            alloc,
            clauses: Vec::new(),
            aux: Vec::new(),
        }
    }

    pub(crate) fn fresh_aux(&mut self) -> PropVar {
        let v = self.alloc.fresh();
        self.aux.push(v);
        v
    }

    pub(crate) fn and2(&mut self, a: Bit, b: Bit) -> Bit {
        use Bit::*;
        match (a, b) {
            (Const(false), _) | (_, Const(false)) => Const(false),
            (Const(true), x) | (x, Const(true)) => x,
            (Of(la), Of(lb)) if la == lb => Of(la),
            (Of(la), Of(lb)) if la == !lb => Const(false),
            (Of(la), Of(lb)) => {
                let t = Lit::positive(self.fresh_aux());
                self.clauses.push(vec![!t, la]);
                self.clauses.push(vec![!t, lb]);
                self.clauses.push(vec![t, !la, !lb]);
                Of(t)
            }
        }
    }

    pub(crate) fn or2(&mut self, a: Bit, b: Bit) -> Bit {
        self.and2(a.negated(), b.negated()).negated()
    }

    pub(crate) fn xor2(&mut self, a: Bit, b: Bit) -> Bit {
        use Bit::*;
        match (a, b) {
            (Const(false), x) | (x, Const(false)) => x,
            (Const(true), x) | (x, Const(true)) => x.negated(),
            (Of(la), Of(lb)) if la == lb => Const(false),
            (Of(la), Of(lb)) if la == !lb => Const(true),
            (Of(la), Of(lb)) => {
                let t = Lit::positive(self.fresh_aux());
                self.clauses.push(vec![!t, la, lb]);
                self.clauses.push(vec![!t, !la, !lb]);
                self.clauses.push(vec![t, !la, lb]);
                self.clauses.push(vec![t, la, !lb]);
                Of(t)
            }
        }
    }

    pub(crate) fn maj3(&mut self, a: Bit, b: Bit, c: Bit) -> Bit {
        use Bit::*;
        match (a, b, c) {
            (Const(false), x, y) | (x, Const(false), y) | (x, y, Const(false)) => self.and2(x, y),
            (Const(true), x, y) | (x, Const(true), y) | (x, y, Const(true)) => self.or2(x, y),
            (Of(la), Of(lb), Of(lc)) => {
                if la == lb {
                    return Of(la);
                }
                if la == !lb {
                    return Of(lc);
                }
                if la == lc {
                    return Of(la);
                }
                if la == !lc {
                    return Of(lb);
                }
                if lb == lc {
                    return Of(lb);
                }
                if lb == !lc {
                    return Of(la);
                }
                let t = Lit::positive(self.fresh_aux());
                self.clauses.push(vec![!t, la, lb]);
                self.clauses.push(vec![!t, la, lc]);
                self.clauses.push(vec![!t, lb, lc]);
                self.clauses.push(vec![t, !la, !lb]);
                self.clauses.push(vec![t, !la, !lc]);
                self.clauses.push(vec![t, !lb, !lc]);
                Of(t)
            }
        }
    }

    pub(crate) fn xor3(&mut self, a: Bit, b: Bit, c: Bit) -> Bit {
        let ab = self.xor2(a, b);
        self.xor2(ab, c)
    }

    /// Constrains an allocated variable to equal a computed bit.
    pub(crate) fn define(&mut self, var: PropVar, bit: Bit) {
        let out = Lit::positive(var);
        match bit {
            Bit::Const(true) => self.clauses.push(vec![out]),
            Bit::Const(false) => self.clauses.push(vec![!out]),
            Bit::Of(l) => {
                self.clauses.push(vec![!out, l]);
                self.clauses.push(vec![out, !l]);
            }
        }
    }

    /// Ripple-carry addition of two equal-length bit vectors, truncating at
    /// their width.
    pub(crate) fn ripple_add(&mut self, a: &[Bit], b: &[Bit], carry_in: Bit) -> Vec<Bit> {
        debug_assert_eq!(a.len(), b.len());
        let mut carry = carry_in;
        let mut sum = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            sum.push(self.xor3(x, y, carry));
            carry = self.maj3(x, y, carry);
        }
        sum
    }

    /// The bits of a constant, LSB first.
    pub(crate) fn const_bits(value: u64, width: u32) -> Vec<Bit> {
        (0..width).map(|i| Bit::Const(value >> i & 1 == 1)).collect()
    }
}

fn input_bits(map: &BitVarMap, reg: &RegisterId) -> Vec<Bit> {
    map.bits(reg)
        .iter()
        .map(|&v| Bit::Of(Lit::positive(v)))
        .collect()
}

/// Blasts one instruction against the given input version. Output variables
/// are allocated first (registers in declaration order, LSB first), then the
/// Tseitin auxiliaries in gate order, so blasting is reproducible
/// bit-for-bit. Registers the instruction leaves alone get their output bits
/// equated to their input bits.
pub fn blast_instruction(
    instr: &Instruction,
    in_map: &BitVarMap,
    word: WordSpec,
    alloc: &mut VarAlloc,
) -> Relation {
    let registers: Vec<RegisterId> = in_map.registers().cloned().collect();
    let width = word.width();
    let out_map = BitVarMap::fresh(&registers, width, alloc);
    let mut builder = CircuitBuilder::new(alloc);

    let dest = instr.destination().clone();
    let dest_bits: Vec<Bit> = {
        use Instruction::*;
        let a = input_bits(in_map, &dest);
        match instr {
            Inc(_) => {
                let zero = CircuitBuilder::const_bits(0, width);
                builder.ripple_add(&a, &zero, Bit::Const(true))
            }
            Dec(_) => {
                let ones = CircuitBuilder::const_bits(u64::MAX, width);
                builder.ripple_add(&a, &ones, Bit::Const(false))
            }
            Mov(_, rs) => input_bits(in_map, rs),
            Movi(_, imm) => CircuitBuilder::const_bits(*imm, width),
            Add(_, rs) => {
                let b = input_bits(in_map, rs);
                builder.ripple_add(&a, &b, Bit::Const(false))
            }
            Addi(_, imm) => {
                let b = CircuitBuilder::const_bits(*imm, width);
                builder.ripple_add(&a, &b, Bit::Const(false))
            }
            Sub(_, rs) => {
                let b: Vec<Bit> = input_bits(in_map, rs)
                    .into_iter()
                    .map(Bit::negated)
                    .collect();
                builder.ripple_add(&a, &b, Bit::Const(true))
            }
            Xor(_, rs) => {
                let b = input_bits(in_map, rs);
                a.iter().zip(&b).map(|(&x, &y)| builder.xor2(x, y)).collect()
            }
            And(_, rs) => {
                let b = input_bits(in_map, rs);
                a.iter().zip(&b).map(|(&x, &y)| builder.and2(x, y)).collect()
            }
            Or(_, rs) => {
                let b = input_bits(in_map, rs);
                a.iter().zip(&b).map(|(&x, &y)| builder.or2(x, y)).collect()
            }
            Not(_) => a.iter().map(|&x| x.negated()).collect(),
            Shl(_, k) => (0..width)
                .map(|i| {
                    if i >= *k {
                        a[(i - k) as usize]
                    } else {
                        Bit::Const(false)
                    }
                })
                .collect(),
            Shr(_, k) => (0..width)
                .map(|i| {
                    if i + k < width {
                        a[(i + k) as usize]
                    } else {
                        Bit::Const(false)
                    }
                })
                .collect(),
        }
    };

    for reg in &registers {
        let outs = out_map.bits(reg);
        if *reg == dest {
            for (&var, &bit) in outs.iter().zip(&dest_bits) {
                builder.define(var, bit);
            }
        } else {
            for (&var, &in_var) in outs.iter().zip(in_map.bits(reg)) {
                builder.define(var, Bit::Of(Lit::positive(in_var)));
            }
        }
    }

    let clauses = builder.clauses;
    let tseitin = builder.aux;
    let mut formula = CnfFormula::new(alloc.num_vars());
    formula.clauses = clauses;
    Relation {
        word,
        formula,
        inputs: in_map.clone(),
        outputs: out_map,
        temps: Vec::new(),
        tseitin,
    }
}

/// The identity relation over the given registers: fresh output bits
/// constrained equal to fresh input bits.
pub fn identity_relation(word: WordSpec, registers: &[RegisterId], alloc: &mut VarAlloc) -> Relation {
    let in_map = BitVarMap::fresh(registers, word.width(), alloc);
    let out_map = BitVarMap::fresh(registers, word.width(), alloc);
    let mut builder = CircuitBuilder::new(alloc);
    for reg in registers {
        for (&o, &i) in out_map.bits(reg).iter().zip(in_map.bits(reg)) {
            builder.define(o, Bit::Of(Lit::positive(i)));
        }
    }
    let clauses = builder.clauses;
    let mut formula = CnfFormula::new(alloc.num_vars());
    formula.clauses = clauses;
    Relation {
        word,
        formula,
        inputs: in_map,
        outputs: out_map,
        temps: Vec::new(),
        tseitin: Vec::new(),
    }
}

/// Relational composition: (x, z) related iff some y has (x, y) in `first`
/// and (y, z) in `second`.
///
/// `first`'s outputs and `second`'s inputs are renamed to one fresh
/// temporary version; the rest of `second` is renamed to fresh variables so
/// the result is well-formed regardless of where the operands were blasted.
/// The identified bits join the auxiliaries — intermediate versions are kept,
/// not eliminated. `alloc` must already cover `first`'s variables.
pub fn compose(
    first: &Relation,
    second: &Relation,
    alloc: &mut VarAlloc,
) -> Result<Relation, BlastError> {
    if first.word.width() != second.word.width() {
        return Err(BlastError::WidthMismatch(
            first.word.width(),
            second.word.width(),
        ));
    }
    let registers = first.registers();
    if registers != second.registers() {
        return Err(BlastError::RegisterMismatch);
    }
    assert!(
        alloc.num_vars() >= first.formula.num_vars,
        "allocator must dominate the left relation's variables"
    );

    let mid = BitVarMap::fresh(&registers, first.word.width(), alloc);

    // first: substitute outputs -> mid.
    let mut first_subst: Vec<PropVar> = (0..=first.formula.num_vars)
        .map(|i| PropVar::new(i.max(1)))
        .collect();
    for (reg, bits) in &first.outputs.entries {
        for (&old, &new) in bits.iter().zip(mid.bits(reg)) {
            first_subst[old.index() as usize] = new;
        }
    }

    // second: inputs -> mid, everything else -> fresh.
    let mut second_subst: Vec<PropVar> = (0..=second.formula.num_vars)
        .map(|i| PropVar::new(i.max(1)))
        .collect();
    for (reg, bits) in &second.inputs.entries {
        for (&old, &new) in bits.iter().zip(mid.bits(reg)) {
            second_subst[old.index() as usize] = new;
        }
    }
    let out_map = BitVarMap::fresh(&registers, first.word.width(), alloc);
    for (reg, bits) in &second.outputs.entries {
        for (&old, &new) in bits.iter().zip(out_map.bits(reg)) {
            second_subst[old.index() as usize] = new;
        }
    }
    let second_temps: Vec<BitVarMap> = second
        .temps
        .iter()
        .map(|tmp| {
            let fresh = BitVarMap::fresh(&registers, first.word.width(), alloc);
            for (reg, bits) in &tmp.entries {
                for (&old, &new) in bits.iter().zip(fresh.bits(reg)) {
                    second_subst[old.index() as usize] = new;
                }
            }
            fresh
        })
        .collect();
    let second_tseitin: Vec<PropVar> = second
        .tseitin
        .iter()
        .map(|&old| {
            let new = alloc.fresh();
            second_subst[old.index() as usize] = new;
            new
        })
        .collect();

    let apply = |clauses: &[Vec<Lit>], subst: &[PropVar]| -> Vec<Vec<Lit>> {
        clauses
            .iter()
            .map(|clause| {
                clause
                    .iter()
                    .map(|lit| Lit::new(subst[lit.var().index() as usize], lit.is_positive()))
                    .collect()
            })
            .collect()
    };

    let mut clauses = apply(&first.formula.clauses, &first_subst);
    clauses.extend(apply(&second.formula.clauses, &second_subst));
    let formula = CnfFormula {
        num_vars: alloc.num_vars(),
        clauses,
    };

    let mut temps = first.temps.clone();
    temps.push(mid);
    temps.extend(second_temps);
    let mut tseitin = first.tseitin.clone();
    tseitin.extend(second_tseitin);

    Ok(Relation {
        word: first.word,
        formula,
        inputs: first.inputs.clone(),
        outputs: out_map,
        temps,
        tseitin,
    })
}

/// Left fold of `compose` over per-instruction relations; the empty body
/// yields the identity relation.
pub fn blast_program(program: &Program) -> Relation {
    let mut alloc = VarAlloc::new();
    let in_map = BitVarMap::fresh(&program.registers, program.word.width(), &mut alloc);
    let Some((head, tail)) = program.body.split_first() else {
        let mut alloc = VarAlloc::new();
        return identity_relation(program.word, &program.registers, &mut alloc);
    };
    let mut relation = blast_instruction(head, &in_map, program.word, &mut alloc);
    for instr in tail {
        let next_in = BitVarMap::fresh(&program.registers, program.word.width(), &mut alloc);
        let next = blast_instruction(instr, &next_in, program.word, &mut alloc);
        relation = compose(&relation, &next, &mut alloc)
            .expect("per-instruction relations share registers and width");
    }
    relation
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{self, parse, Source, State};
    use crate::sat::{enumerate_projections, SolverConfig};
    use std::collections::BTreeSet;

    fn program(source: &str) -> Program {
        match parse(source).unwrap() {
            Source::Program(p) => p,
            Source::Cfg(_) => panic!("expected straight-line program"),
        }
    }

    /// All (input, output) bit-vector pairs of a relation, by all-SAT over
    /// the named io bits.
    fn io_pairs(rel: &Relation) -> BTreeSet<Vec<bool>> {
        let vars: Vec<PropVar> = rel.named_bits_io().into_iter().map(|(_, v)| v).collect();
        enumerate_projections(&rel.formula, &vars, SolverConfig::default())
            .unwrap()
            .into_iter()
            .collect()
    }

    /// The concrete graph of a program as (input, output) bit-vectors over
    /// every input state.
    fn concrete_pairs(p: &Program) -> BTreeSet<Vec<bool>> {
        let width = p.word.width();
        let regs = &p.registers;
        let total = 1u64 << (width as usize * regs.len());
        (0..total)
            .map(|code| {
                let mut state = State::new();
                for (i, reg) in regs.iter().enumerate() {
                    let v = code >> (i as u32 * width) & ((1 << width) - 1);
                    state.insert(reg.clone(), v);
                }
                let after = machine::run_program(p, &state);
                let mut bits = Vec::new();
                for reg in regs {
                    for i in 0..width {
                        bits.push(state[reg] >> i & 1 == 1);
                    }
                }
                for reg in regs {
                    for i in 0..width {
                        bits.push(after[reg] >> i & 1 == 1);
                    }
                }
                bits
            })
            .collect()
    }

    fn assert_matches_concrete(source: &str) {
        let p = program(source);
        let rel = blast_program(&p);
        let got = io_pairs(&rel);
        let expected = concrete_pairs(&p);
        assert_eq!(got, expected, "relation disagrees with interpreter for {source:?}");
        // Functionality: exactly one output per input.
        let in_bits = p.word.width() as usize * p.registers.len();
        let inputs: BTreeSet<Vec<bool>> =
            got.iter().map(|pair| pair[..in_bits].to_vec()).collect();
        assert_eq!(inputs.len(), got.len());
        assert_eq!(got.len(), 1 << in_bits);
    }

    #[test]
    fn every_opcode_agrees_with_interpreter() {
        for body in [
            "inc r0", "dec r0", "mov r0, r1", "movi r0, 2", "add r0, r1", "addi r0, 3",
            "sub r0, r1", "xor r0, r1", "and r0, r1", "or r0, r1", "not r0", "shl r0, 1",
            "shr r0, 1",
        ] {
            assert_matches_concrete(&format!(".width 2\n.regs r0, r1\n  {body}\n"));
        }
        // Single-register width 3 variants exercise longer carry chains.
        for body in ["inc r0", "dec r0", "addi r0, 5", "shl r0, 2", "shr r0, 2"] {
            assert_matches_concrete(&format!(".width 3\n.regs r0\n  {body}\n"));
        }
    }

    #[test]
    fn increment_matches_carry_chain_formulas() {
        // r'0 = ¬r0, r'1 = r1⊕r0, r'2 = r2⊕(r0∧r1), r'3 = r3⊕(r0∧r1∧r2).
        let p = program(".width 4\n.regs r\n  inc r\n");
        let rel = blast_program(&p);
        let expected: BTreeSet<Vec<bool>> = (0u32..16)
            .map(|x| {
                let r: Vec<bool> = (0..4).map(|i| x >> i & 1 == 1).collect();
                let out = [
                    !r[0],
                    r[1] ^ r[0],
                    r[2] ^ (r[0] && r[1]),
                    r[3] ^ (r[0] && r[1] && r[2]),
                ];
                r.iter().copied().chain(out).collect()
            })
            .collect();
        assert_eq!(io_pairs(&rel), expected);
    }

    #[test]
    fn xor_with_self_clears_register() {
        let p = program(".width 2\n.regs r\n  xor r, r\n");
        let rel = blast_program(&p);
        for pair in io_pairs(&rel) {
            assert!(!pair[2] && !pair[3], "output bits must be zero");
        }
    }

    #[test]
    fn composed_double_increment_adds_two() {
        let p = program(".width 4\n.regs r\n  inc r\n  inc r\n");
        let rel = blast_program(&p);
        assert_eq!(rel.temps.len(), 1);
        assert_eq!(rel.named_bits_full().len(), 12);
        let pairs = io_pairs(&rel);
        assert_eq!(pairs.len(), 16);
        for pair in pairs {
            let x: u32 = (0..4).map(|i| (pair[i] as u32) << i).sum();
            let y: u32 = (0..4).map(|i| (pair[4 + i] as u32) << i).sum();
            assert_eq!(y, (x + 2) % 16);
        }
    }

    #[test]
    fn compose_with_identity_preserves_semantics() {
        let p = program(".width 3\n.regs r\n  addi r, 3\n");
        let rel = blast_program(&p);
        let mut alloc = VarAlloc::resuming(rel.formula.num_vars);
        let ident = identity_relation(p.word, &p.registers, &mut alloc);
        let composed = compose(&rel, &ident, &mut alloc).unwrap();
        assert_eq!(io_pairs(&composed), io_pairs(&rel));
    }

    #[test]
    fn shift_left_then_right_masks_top_bit() {
        let p = program(".width 4\n.regs r\n  shl r, 1\n  shr r, 1\n");
        let rel = blast_program(&p);
        for pair in io_pairs(&rel) {
            let x: u32 = (0..4).map(|i| (pair[i] as u32) << i).sum();
            let y: u32 = (0..4).map(|i| (pair[4 + i] as u32) << i).sum();
            assert_eq!(y, x % 8);
        }
    }

    #[test]
    fn empty_body_is_identity() {
        let p = program(".width 3\n.regs r\n");
        let rel = blast_program(&p);
        for pair in io_pairs(&rel) {
            assert_eq!(pair[..3], pair[3..]);
        }
    }

    #[test]
    fn constant_program_forces_output() {
        let p = program(".width 4\n.regs r\n  movi r, 0\n  not r\n");
        let rel = blast_program(&p);
        let pairs = io_pairs(&rel);
        assert_eq!(pairs.len(), 16);
        for pair in pairs {
            let y: u32 = (0..4).map(|i| (pair[4 + i] as u32) << i).sum();
            assert_eq!(y, 15);
        }
    }

    #[test]
    fn compose_rejects_width_mismatch() {
        let a = blast_program(&program(".width 3\n.regs r\n  inc r\n"));
        let b = blast_program(&program(".width 4\n.regs r\n  inc r\n"));
        let mut alloc = VarAlloc::resuming(a.formula.num_vars);
        assert_eq!(
            compose(&a, &b, &mut alloc).unwrap_err(),
            BlastError::WidthMismatch(3, 4)
        );
    }

    #[test]
    fn blasting_is_deterministic() {
        let p = program(".width 4\n.regs a, b\n  add a, b\n  xor b, a\n");
        assert_eq!(blast_program(&p), blast_program(&p));
    }

    #[test]
    fn dimacs_header_names_every_named_bit() {
        let p = program(".width 2\n.regs r\n  inc r\n  inc r\n");
        let rel = blast_program(&p);
        let text = rel.to_dimacs();
        for name in ["r[0]@in", "r[1]@in", "r[0]@tmp0", "r[1]@tmp0", "r[0]@out", "r[1]@out"] {
            assert!(text.contains(&format!(" = {name}\n")), "missing {name}");
        }
        let parsed = crate::cnf::parse_dimacs(&text).unwrap();
        assert_eq!(parsed, rel.formula);
    }
}
