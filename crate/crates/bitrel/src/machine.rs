//! The toy machine: word width, registers, a small RISC-like instruction
//! set, straight-line programs and control-flow graphs, plus the line
//! oriented text format for all of them.
//!
//! The instruction set deliberately exercises the three circuit families the
//! bit-blaster has to support: adders (`inc`/`dec`/`add`/`addi`/`sub`),
//! bitwise logic (`xor`/`and`/`or`/`not`) and shifts (`shl`/`shr`). There
//! are no flags, no memory and no branch conditions; control-flow joins are
//! nondeterministic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::modlin::Ring;

/// Number of bits per machine word, fixed for an entire analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordSpec {
    width: u32,
}

impl WordSpec {
    pub fn new(width: u32) -> Result<WordSpec, ParseError> {
        if (1..=64).contains(&width) {
            Ok(WordSpec { width })
        } else {
            Err(ParseError::at(0, format!("width {width} out of range 1..=64")))
        }
    }

    pub fn width(self) -> u32 {
        self.width
    }

    /// Arithmetic context mod 2^width.
    pub fn ring(self) -> Ring {
        Ring::new(self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegisterId(String);

impl RegisterId {
    pub fn new(name: impl Into<String>) -> RegisterId {
        RegisterId(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RegisterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Inc(RegisterId),
    Dec(RegisterId),
    Mov(RegisterId, RegisterId),
    Movi(RegisterId, u64),
    Add(RegisterId, RegisterId),
    Addi(RegisterId, u64),
    Sub(RegisterId, RegisterId),
    Xor(RegisterId, RegisterId),
    And(RegisterId, RegisterId),
    Or(RegisterId, RegisterId),
    Not(RegisterId),
    Shl(RegisterId, u32),
    Shr(RegisterId, u32),
}

impl Instruction {
    /// Registers the instruction reads or writes.
    pub fn registers(&self) -> Vec<&RegisterId> {
        use Instruction::*;
        match self {
            Inc(r) | Dec(r) | Not(r) | Movi(r, _) | Addi(r, _) | Shl(r, _) | Shr(r, _) => {
                vec![r]
            }
            Mov(rd, rs) | Add(rd, rs) | Sub(rd, rs) | Xor(rd, rs) | And(rd, rs) | Or(rd, rs) => {
                vec![rd, rs]
            }
        }
    }

    /// The register written by the instruction.
    pub fn destination(&self) -> &RegisterId {
        use Instruction::*;
        match self {
            Inc(r) | Dec(r) | Not(r) | Movi(r, _) | Addi(r, _) | Shl(r, _) | Shr(r, _) => r,
            Mov(rd, _) | Add(rd, _) | Sub(rd, _) | Xor(rd, _) | And(rd, _) | Or(rd, _) => rd,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Instruction::*;
        match self {
            Inc(r) => write!(f, "inc {r}"),
            Dec(r) => write!(f, "dec {r}"),
            Mov(rd, rs) => write!(f, "mov {rd}, {rs}"),
            Movi(rd, imm) => write!(f, "movi {rd}, {imm}"),
            Add(rd, rs) => write!(f, "add {rd}, {rs}"),
            Addi(rd, imm) => write!(f, "addi {rd}, {imm}"),
            Sub(rd, rs) => write!(f, "sub {rd}, {rs}"),
            Xor(rd, rs) => write!(f, "xor {rd}, {rs}"),
            And(rd, rs) => write!(f, "and {rd}, {rs}"),
            Or(rd, rs) => write!(f, "or {rd}, {rs}"),
            Not(r) => write!(f, "not {r}"),
            Shl(r, k) => write!(f, "shl {r}, {k}"),
            Shr(r, k) => write!(f, "shr {r}, {k}"),
        }
    }
}

/// A straight-line program: declared registers and an instruction sequence.
/// An empty body denotes the identity relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub word: WordSpec,
    pub registers: Vec<RegisterId>,
    pub body: Vec<Instruction>,
}

/// A control-flow graph of straight-line blocks. Edges carry no conditions;
/// every block is reachable from the entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub word: WordSpec,
    pub registers: Vec<RegisterId>,
    pub blocks: BTreeMap<String, Vec<Instruction>>,
    pub edges: Vec<(String, String)>,
    pub entry: String,
}

impl Cfg {
    /// The block body as a straight-line program (for summarization).
    pub fn block_program(&self, label: &str) -> Program {
        Program {
            word: self.word,
            registers: self.registers.clone(),
            body: self.blocks[label].clone(),
        }
    }

    pub fn successors<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a str> {
        self.edges
            .iter()
            .filter(move |(from, _)| from == label)
            .map(|(_, to)| to.as_str())
    }
}

/// Result of parsing a source file: CFG mode iff any label is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Program(Program),
    Cfg(Cfg),
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, ".width {}", self.word.width())?;
        let regs: Vec<&str> = self.registers.iter().map(|r| r.name()).collect();
        writeln!(f, ".regs {}", regs.join(", "))?;
        for instr in &self.body {
            writeln!(f, "  {instr}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, ".width {}", self.word.width())?;
        let regs: Vec<&str> = self.registers.iter().map(|r| r.name()).collect();
        writeln!(f, ".regs {}", regs.join(", "))?;
        for (label, body) in &self.blocks {
            writeln!(f, "{label}:")?;
            for instr in body {
                writeln!(f, "  {instr}")?;
            }
        }
        for (from, to) in &self.edges {
            writeln!(f, ".edge {from} -> {to}")?;
        }
        writeln!(f, ".entry {}", self.entry)?;
        Ok(())
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Program(p) => p.fmt(f),
            Source::Cfg(c) => c.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl ParseError {
    fn at(line: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            line,
            msg: msg.into(),
        }
    }
}

/// A concrete machine state: one residue per register.
pub type State = BTreeMap<RegisterId, u64>;

/// Reference semantics of one instruction, unsigned with wrap-around: the
/// oracle everything else is tested against.
pub fn concrete_step(instr: &Instruction, state: &State, word: WordSpec) -> State {
    let ring = word.ring();
    let mut next = state.clone();
    let get = |r: &RegisterId| state[r];
    use Instruction::*;
    let (dest, value) = match instr {
        Inc(r) => (r, ring.add(get(r), 1)),
        Dec(r) => (r, ring.sub(get(r), 1)),
        Mov(rd, rs) => (rd, get(rs)),
        Movi(rd, imm) => (rd, ring.reduce(*imm)),
        Add(rd, rs) => (rd, ring.add(get(rd), get(rs))),
        Addi(rd, imm) => (rd, ring.add(get(rd), *imm)),
        Sub(rd, rs) => (rd, ring.sub(get(rd), get(rs))),
        Xor(rd, rs) => (rd, get(rd) ^ get(rs)),
        And(rd, rs) => (rd, get(rd) & get(rs)),
        Or(rd, rs) => (rd, get(rd) | get(rs)),
        Not(r) => (r, ring.reduce(!get(r))),
        Shl(r, k) => (r, ring.reduce(get(r) << k)),
        Shr(r, k) => (r, get(r) >> k),
    };
    next.insert(dest.clone(), value);
    next
}

/// Runs a straight-line program from an initial state.
pub fn run_program(program: &Program, initial: &State) -> State {
    program
        .body
        .iter()
        .fold(initial.clone(), |state, instr| {
            concrete_step(instr, &state, program.word)
        })
}

struct Parser<'a> {
    width: Option<(usize, u32)>,
    registers: Option<(usize, Vec<RegisterId>)>,
    blocks: BTreeMap<String, Vec<Instruction>>,
    block_lines: BTreeMap<String, usize>,
    block_order_current: Option<String>,
    straight_body: Vec<Instruction>,
    edges: Vec<(String, String)>,
    entry: Option<(usize, String)>,
    saw_label: bool,
    text: &'a str,
}

/// Parses the text IR. Any label switches the file into CFG mode; a file
/// without labels is a straight-line program.
pub fn parse(text: &str) -> Result<Source, ParseError> {
    let mut parser = Parser {
        width: None,
        registers: None,
        blocks: BTreeMap::new(),
        block_lines: BTreeMap::new(),
        block_order_current: None,
        straight_body: Vec::new(),
        edges: Vec::new(),
        entry: None,
        saw_label: false,
        text,
    };
    parser.run()
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().unwrap().is_ascii_alphabetic()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Parser<'_> {
    fn run(&mut self) -> Result<Source, ParseError> {
        for (idx, raw) in self.text.lines().enumerate() {
            let no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            self.line(no, line)?;
        }
        self.finish()
    }

    fn line(&mut self, no: usize, line: &str) -> Result<(), ParseError> {
        if let Some(rest) = line.strip_prefix(".width") {
            if self.width.is_some() {
                return Err(ParseError::at(no, "duplicate .width directive"));
            }
            if self.registers.is_some() || self.saw_label || !self.straight_body.is_empty() {
                return Err(ParseError::at(no, ".width must be the first directive"));
            }
            let width: u32 = rest
                .trim()
                .parse()
                .map_err(|_| ParseError::at(no, format!("bad width `{}`", rest.trim())))?;
            WordSpec::new(width).map_err(|e| ParseError::at(no, e.msg))?;
            self.width = Some((no, width));
            return Ok(());
        }
        if let Some(rest) = line.strip_prefix(".regs") {
            if self.width.is_none() {
                return Err(ParseError::at(no, ".width must come before .regs"));
            }
            if self.registers.is_some() {
                return Err(ParseError::at(no, "duplicate .regs directive"));
            }
            let mut regs = Vec::new();
            for name in rest.split(',').map(str::trim) {
                if !is_identifier(name) {
                    return Err(ParseError::at(no, format!("bad register name `{name}`")));
                }
                let reg = RegisterId::new(name);
                if regs.contains(&reg) {
                    return Err(ParseError::at(no, format!("duplicate register `{name}`")));
                }
                regs.push(reg);
            }
            self.registers = Some((no, regs));
            return Ok(());
        }
        if let Some(rest) = line.strip_prefix(".edge") {
            let parts: Vec<&str> = rest.split("->").map(str::trim).collect();
            if parts.len() != 2 || !is_identifier(parts[0]) || !is_identifier(parts[1]) {
                return Err(ParseError::at(no, "expected `.edge <label> -> <label>`"));
            }
            self.edges
                .push((parts[0].to_string(), parts[1].to_string()));
            return Ok(());
        }
        if let Some(rest) = line.strip_prefix(".entry") {
            if self.entry.is_some() {
                return Err(ParseError::at(no, "duplicate .entry directive"));
            }
            let label = rest.trim();
            if !is_identifier(label) {
                return Err(ParseError::at(no, format!("bad entry label `{label}`")));
            }
            self.entry = Some((no, label.to_string()));
            return Ok(());
        }
        if line.starts_with('.') {
            return Err(ParseError::at(no, format!("unknown directive `{line}`")));
        }
        if let Some(label) = line.strip_suffix(':') {
            let label = label.trim();
            if !is_identifier(label) {
                return Err(ParseError::at(no, format!("bad label `{label}`")));
            }
            if self.blocks.contains_key(label) {
                return Err(ParseError::at(no, format!("duplicate label `{label}`")));
            }
            if !self.straight_body.is_empty() {
                return Err(ParseError::at(
                    no,
                    "instructions before the first label are not allowed in CFG mode",
                ));
            }
            self.saw_label = true;
            self.blocks.insert(label.to_string(), Vec::new());
            self.block_lines.insert(label.to_string(), no);
            self.block_order_current = Some(label.to_string());
            return Ok(());
        }
        // An instruction line.
        let instr = self.instruction(no, line)?;
        match &self.block_order_current {
            Some(label) => self.blocks.get_mut(label).unwrap().push(instr),
            None => {
                if self.saw_label {
                    return Err(ParseError::at(no, "instruction outside any block"));
                }
                self.straight_body.push(instr);
            }
        }
        Ok(())
    }

    fn instruction(&self, no: usize, line: &str) -> Result<Instruction, ParseError> {
        let (width, regs) = match (&self.width, &self.registers) {
            (Some((_, w)), Some((_, r))) => (*w, r),
            _ => {
                return Err(ParseError::at(
                    no,
                    "instructions must follow .width and .regs",
                ))
            }
        };
        let ring = Ring::new(width);
        let (opcode, rest) = match line.split_once(char::is_whitespace) {
            Some((op, rest)) => (op, rest.trim()),
            None => (line, ""),
        };
        let operands: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',').map(str::trim).collect()
        };

        let reg = |name: &str| -> Result<RegisterId, ParseError> {
            let id = RegisterId::new(name);
            if regs.contains(&id) {
                Ok(id)
            } else {
                Err(ParseError::at(no, format!("undeclared register `{name}`")))
            }
        };
        let imm = |text: &str| -> Result<u64, ParseError> {
            let parsed = if let Some(hex) = text.strip_prefix("0x") {
                u64::from_str_radix(hex, 16)
            } else {
                text.parse()
            };
            parsed
                .map(|v| ring.reduce(v))
                .map_err(|_| ParseError::at(no, format!("bad immediate `{text}`")))
        };
        let shift = |text: &str| -> Result<u32, ParseError> {
            let k: u32 = text
                .parse()
                .map_err(|_| ParseError::at(no, format!("bad shift amount `{text}`")))?;
            if k < width {
                Ok(k)
            } else {
                Err(ParseError::at(no, "shift amount out of range"))
            }
        };
        let arity = |want: usize| -> Result<(), ParseError> {
            if operands.len() == want {
                Ok(())
            } else {
                Err(ParseError::at(
                    no,
                    format!(
                        "`{opcode}` expects {want} operand{}, got {}",
                        if want == 1 { "" } else { "s" },
                        operands.len()
                    ),
                ))
            }
        };

        use Instruction::*;
        let instr = match opcode {
            "inc" => {
                arity(1)?;
                Inc(reg(operands[0])?)
            }
            "dec" => {
                arity(1)?;
                Dec(reg(operands[0])?)
            }
            "not" => {
                arity(1)?;
                Not(reg(operands[0])?)
            }
            "mov" => {
                arity(2)?;
                Mov(reg(operands[0])?, reg(operands[1])?)
            }
            "movi" => {
                arity(2)?;
                Movi(reg(operands[0])?, imm(operands[1])?)
            }
            "add" => {
                arity(2)?;
                Add(reg(operands[0])?, reg(operands[1])?)
            }
            "addi" => {
                arity(2)?;
                Addi(reg(operands[0])?, imm(operands[1])?)
            }
            "sub" => {
                arity(2)?;
                Sub(reg(operands[0])?, reg(operands[1])?)
            }
            "xor" => {
                arity(2)?;
                Xor(reg(operands[0])?, reg(operands[1])?)
            }
            "and" => {
                arity(2)?;
                And(reg(operands[0])?, reg(operands[1])?)
            }
            "or" => {
                arity(2)?;
                Or(reg(operands[0])?, reg(operands[1])?)
            }
            "shl" => {
                arity(2)?;
                Shl(reg(operands[0])?, shift(operands[1])?)
            }
            "shr" => {
                arity(2)?;
                Shr(reg(operands[0])?, shift(operands[1])?)
            }
            other => return Err(ParseError::at(no, format!("unknown opcode `{other}`"))),
        };
        Ok(instr)
    }

    fn finish(&mut self) -> Result<Source, ParseError> {
        let (_, width) = self
            .width
            .ok_or_else(|| ParseError::at(1, "missing .width directive"))?;
        let (_, registers) = self
            .registers
            .clone()
            .ok_or_else(|| ParseError::at(1, "missing .regs directive"))?;
        let word = WordSpec::new(width).unwrap();

        if !self.saw_label {
            if let Some((no, _)) = &self.entry {
                return Err(ParseError::at(*no, ".entry requires labeled blocks"));
            }
            if let Some((from, _)) = self.edges.first() {
                let no = self.directive_line(".edge").unwrap_or(1);
                return Err(ParseError::at(no, format!(".edge {from} ... requires labeled blocks")));
            }
            return Ok(Source::Program(Program {
                word,
                registers,
                body: std::mem::take(&mut self.straight_body),
            }));
        }

        let (entry_line, entry) = self
            .entry
            .clone()
            .ok_or_else(|| ParseError::at(1, "CFG mode requires an .entry directive"))?;
        if !self.blocks.contains_key(&entry) {
            return Err(ParseError::at(
                entry_line,
                format!("entry label `{entry}` is not a block"),
            ));
        }
        for (from, to) in &self.edges {
            for label in [from, to] {
                if !self.blocks.contains_key(label) {
                    let no = self.directive_line(".edge").unwrap_or(1);
                    return Err(ParseError::at(no, format!("edge endpoint `{label}` is not a block")));
                }
            }
        }

        // Every block must be reachable from the entry.
        let mut reachable: BTreeSet<&String> = BTreeSet::new();
        let mut queue = VecDeque::from([&entry]);
        while let Some(label) = queue.pop_front() {
            if !reachable.insert(label) {
                continue;
            }
            for (from, to) in &self.edges {
                if from == label && !reachable.contains(to) {
                    queue.push_back(to);
                }
            }
        }
        for label in self.blocks.keys() {
            if !reachable.contains(label) {
                let no = self.block_lines[label];
                return Err(ParseError::at(no, format!("unreachable block `{label}`")));
            }
        }

        Ok(Source::Cfg(Cfg {
            word,
            registers,
            blocks: std::mem::take(&mut self.blocks),
            edges: std::mem::take(&mut self.edges),
            entry,
        }))
    }

    fn directive_line(&self, directive: &str) -> Option<usize> {
        self.text.lines().position(|l| l.trim().starts_with(directive)).map(|i| i + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(pairs: &[(&str, u64)]) -> State {
        pairs
            .iter()
            .map(|(name, v)| (RegisterId::new(*name), *v))
            .collect()
    }

    #[test]
    fn parses_double_increment() {
        let source = ".width 4\n.regs r\n  inc r\n  inc r\n";
        match parse(source).unwrap() {
            Source::Program(p) => {
                assert_eq!(p.word.width(), 4);
                assert_eq!(p.registers, vec![RegisterId::new("r")]);
                assert_eq!(
                    p.body,
                    vec![
                        Instruction::Inc(RegisterId::new("r")),
                        Instruction::Inc(RegisterId::new("r"))
                    ]
                );
            }
            Source::Cfg(_) => panic!("no labels, expected straight-line program"),
        }
    }

    #[test]
    fn parses_empty_body_as_identity_program() {
        let source = ".width 8\n.regs r\n";
        match parse(source).unwrap() {
            Source::Program(p) => assert!(p.body.is_empty()),
            Source::Cfg(_) => panic!("expected program"),
        }
    }

    #[test]
    fn rejects_out_of_range_shift() {
        let err = parse(".width 4\n.regs r\n  shl r, 4\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.msg, "shift amount out of range");
    }

    #[test]
    fn rejects_undeclared_register() {
        let err = parse(".width 4\n.regs r\n  inc q\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.msg.contains("undeclared register"));
    }

    #[test]
    fn rejects_unreachable_block() {
        let source = ".width 4\n.regs r\na:\n  inc r\nb:\n  dec r\n.entry a\n";
        let err = parse(source).unwrap_err();
        assert_eq!(err.line, 5);
        assert!(err.msg.contains("unreachable block `b`"));
    }

    #[test]
    fn rejects_edges_in_straight_mode() {
        let err = parse(".width 4\n.regs r\n  inc r\n.edge a -> b\n").unwrap_err();
        assert!(err.msg.contains("labeled blocks"));
    }

    #[test]
    fn rejects_bad_width() {
        assert!(parse(".width 0\n.regs r\n").is_err());
        assert!(parse(".width 65\n.regs r\n").is_err());
        assert!(parse(".width 64\n.regs r\n").is_ok());
    }

    #[test]
    fn parses_cfg_with_self_loop() {
        let source = "\
.width 4
.regs r
start:
  movi r, 0
loop:
  addi r, 2
.edge start -> loop
.edge loop -> loop
.entry start
";
        match parse(source).unwrap() {
            Source::Cfg(cfg) => {
                assert_eq!(cfg.entry, "start");
                assert_eq!(cfg.blocks.len(), 2);
                assert_eq!(cfg.successors("loop").collect::<Vec<_>>(), vec!["loop"]);
            }
            Source::Program(_) => panic!("expected CFG"),
        }
    }

    #[test]
    fn immediates_reduce_at_parse_time() {
        let source = ".width 4\n.regs r\n  movi r, 0x1f\n  addi r, 250\n";
        match parse(source).unwrap() {
            Source::Program(p) => {
                assert_eq!(p.body[0], Instruction::Movi(RegisterId::new("r"), 15));
                assert_eq!(p.body[1], Instruction::Addi(RegisterId::new("r"), 10));
            }
            _ => panic!("expected program"),
        }
    }

    #[test]
    fn increment_wraps_at_word_size() {
        let word = WordSpec::new(4).unwrap();
        let s = concrete_step(&Instruction::Inc(RegisterId::new("r")), &state(&[("r", 15)]), word);
        assert_eq!(s[&RegisterId::new("r")], 0);
    }

    #[test]
    fn mov_copies_between_registers() {
        let word = WordSpec::new(4).unwrap();
        let s = concrete_step(
            &Instruction::Mov(RegisterId::new("r0"), RegisterId::new("r1")),
            &state(&[("r0", 3), ("r1", 7)]),
            word,
        );
        assert_eq!(s, state(&[("r0", 7), ("r1", 7)]));
    }

    #[test]
    fn add_wraps_mod_16() {
        let word = WordSpec::new(4).unwrap();
        let s = concrete_step(
            &Instruction::Add(RegisterId::new("r0"), RegisterId::new("r1")),
            &state(&[("r0", 9), ("r1", 9)]),
            word,
        );
        assert_eq!(s, state(&[("r0", 2), ("r1", 9)]));
    }

    #[test]
    fn shifts_and_logic_reduce_to_width() {
        let word = WordSpec::new(4).unwrap();
        let r = RegisterId::new("r");
        let s = concrete_step(&Instruction::Shl(r.clone(), 2), &state(&[("r", 5)]), word);
        assert_eq!(s[&r], 4); // 20 mod 16
        let s = concrete_step(&Instruction::Not(r.clone()), &state(&[("r", 5)]), word);
        assert_eq!(s[&r], 10);
        let s = concrete_step(&Instruction::Shr(r.clone(), 1), &state(&[("r", 9)]), word);
        assert_eq!(s[&r], 4);
    }

    // Strategy for random well-formed programs, also reused as text via
    // Display for the round-trip property.
    fn arb_program() -> impl Strategy<Value = Program> {
        let width = 1u32..=8;
        (width, 1usize..=3).prop_flat_map(|(w, nregs)| {
            let regs: Vec<RegisterId> =
                (0..nregs).map(|i| RegisterId::new(format!("r{i}"))).collect();
            let reg = (0..nregs).prop_map({
                let regs = regs.clone();
                move |i| regs[i].clone()
            });
            let instr = prop_oneof![
                reg.clone().prop_map(Instruction::Inc),
                reg.clone().prop_map(Instruction::Dec),
                (reg.clone(), reg.clone()).prop_map(|(a, b)| Instruction::Mov(a, b)),
                (reg.clone(), 0u64..1 << w).prop_map(|(a, i)| Instruction::Movi(a, i)),
                (reg.clone(), reg.clone()).prop_map(|(a, b)| Instruction::Add(a, b)),
                (reg.clone(), 0u64..1 << w).prop_map(|(a, i)| Instruction::Addi(a, i)),
                (reg.clone(), reg.clone()).prop_map(|(a, b)| Instruction::Sub(a, b)),
                (reg.clone(), reg.clone()).prop_map(|(a, b)| Instruction::Xor(a, b)),
                (reg.clone(), reg.clone()).prop_map(|(a, b)| Instruction::And(a, b)),
                (reg.clone(), reg.clone()).prop_map(|(a, b)| Instruction::Or(a, b)),
                reg.clone().prop_map(Instruction::Not),
                (reg.clone(), 0u32..w).prop_map(|(a, k)| Instruction::Shl(a, k)),
                (reg.clone(), 0u32..w).prop_map(|(a, k)| Instruction::Shr(a, k)),
            ];
            proptest::collection::vec(instr, 0..=6).prop_map(move |body| Program {
                word: WordSpec::new(w).unwrap(),
                registers: regs.clone(),
                body,
            })
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(program in arb_program()) {
            let text = program.to_string();
            let reparsed = parse(&text).unwrap();
            prop_assert_eq!(reparsed, Source::Program(program));
        }
    }
}
