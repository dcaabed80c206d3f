//! Textual IR trace model.
//!
//! A trace is a linearized record of executed instructions, one per line, in
//! a small subset of LLVM-IR textual syntax:
//!
//! ```text
//! %r = load <ty>, <ty>* %p[, align N]
//! store <ty> <value>, <ty>* %p[, align N]
//! %r = <binop> [flags] <ty> <a>, <b>        ; add sub mul fadd fsub fmul
//!                                          ; sdiv udiv fdiv srem urem frem
//! %r = icmp|fcmp <pred> <ty> <a>, <b>
//! %r = alloca <ty>[, align N]
//! br label %l  |  br i1 <cond>, label %t, label %f
//! ret void     |  ret <ty> <value>
//! ```
//!
//! Operands are registers (`%` followed by ASCII alphanumerics) or numeric
//! constants. A line whose trailing comment is exactly `; cycles=N` gets a
//! latency of `N` cycles; any other `;` comment is ignored. Blank lines and
//! comment-only lines are skipped and do not consume an instruction number.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Opcode {
    Load,
    Store,
    Add,
    Sub,
    Mul,
    Fadd,
    Fsub,
    Fmul,
    Sdiv,
    Udiv,
    Fdiv,
    Srem,
    Urem,
    Frem,
    Icmp,
    Fcmp,
    Br,
    Ret,
    Alloca,
}

impl Opcode {
    pub const ALL: [Opcode; 19] = [
        Opcode::Load,
        Opcode::Store,
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::Fadd,
        Opcode::Fsub,
        Opcode::Fmul,
        Opcode::Sdiv,
        Opcode::Udiv,
        Opcode::Fdiv,
        Opcode::Srem,
        Opcode::Urem,
        Opcode::Frem,
        Opcode::Icmp,
        Opcode::Fcmp,
        Opcode::Br,
        Opcode::Ret,
        Opcode::Alloca,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Opcode::Load => "load",
            Opcode::Store => "store",
            Opcode::Add => "add",
            Opcode::Sub => "sub",
            Opcode::Mul => "mul",
            Opcode::Fadd => "fadd",
            Opcode::Fsub => "fsub",
            Opcode::Fmul => "fmul",
            Opcode::Sdiv => "sdiv",
            Opcode::Udiv => "udiv",
            Opcode::Fdiv => "fdiv",
            Opcode::Srem => "srem",
            Opcode::Urem => "urem",
            Opcode::Frem => "frem",
            Opcode::Icmp => "icmp",
            Opcode::Fcmp => "fcmp",
            Opcode::Br => "br",
            Opcode::Ret => "ret",
            Opcode::Alloca => "alloca",
        }
    }

    pub fn group(self) -> InstructionGroup {
        match self {
            Opcode::Load | Opcode::Store | Opcode::Alloca => InstructionGroup::M,
            Opcode::Br | Opcode::Ret => InstructionGroup::B,
            Opcode::Sdiv
            | Opcode::Udiv
            | Opcode::Fdiv
            | Opcode::Srem
            | Opcode::Urem
            | Opcode::Frem => InstructionGroup::D,
            _ => InstructionGroup::G,
        }
    }

    fn is_binary(self) -> bool {
        matches!(
            self,
            Opcode::Add
                | Opcode::Sub
                | Opcode::Mul
                | Opcode::Fadd
                | Opcode::Fsub
                | Opcode::Fmul
                | Opcode::Sdiv
                | Opcode::Udiv
                | Opcode::Fdiv
                | Opcode::Srem
                | Opcode::Urem
                | Opcode::Frem
        )
    }
}

impl FromStr for Opcode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Opcode::ALL
            .iter()
            .copied()
            .find(|op| op.as_str() == s)
            .ok_or(())
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    I1,
    I32,
    I64,
    Float,
    Double,
    Ptr,
}

impl ValueType {
    pub fn size_bytes(self) -> u64 {
        match self {
            ValueType::I1 => 1,
            ValueType::I32 | ValueType::Float => 4,
            ValueType::I64 | ValueType::Double | ValueType::Ptr => 8,
        }
    }

    fn parse(token: &str) -> Option<ValueType> {
        if token.ends_with('*') {
            let base = token.trim_end_matches('*');
            return ValueType::parse(base).map(|_| ValueType::Ptr);
        }
        Some(match token {
            "i1" => ValueType::I1,
            "i32" => ValueType::I32,
            "i64" => ValueType::I64,
            "float" => ValueType::Float,
            "double" => ValueType::Double,
            "ptr" => ValueType::Ptr,
            _ => return None,
        })
    }
}

/// Energy class of an instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InstructionGroup {
    /// Memory: load, store, alloca.
    M,
    /// Program flow: br, ret.
    B,
    /// Division and remainder.
    D,
    /// Everything else.
    G,
}

impl InstructionGroup {
    pub const ALL: [InstructionGroup; 4] = [
        InstructionGroup::M,
        InstructionGroup::B,
        InstructionGroup::D,
        InstructionGroup::G,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for InstructionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A virtual register name, including the leading `%`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Register(String);

impl Register {
    pub fn parse(token: &str) -> Option<Register> {
        let name = token.strip_prefix('%')?;
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric()) {
            return None;
        }
        Some(Register(token.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    /// 1-based instruction number in execution order.
    pub line_no: usize,
    /// Physical line in the trace document.
    pub source_line: usize,
    pub opcode: Opcode,
    pub result_reg: Option<Register>,
    pub source_regs: Vec<Register>,
    /// Pointer written by a store.
    pub dest_pointer: Option<Register>,
    pub value_type: ValueType,
    pub data_size: u64,
    pub latency: u64,
}

impl Instruction {
    /// The register this instruction defines: its result, or for a store the
    /// pointer it writes through.
    pub fn destination(&self) -> Option<&Register> {
        self.result_reg.as_ref().or(self.dest_pointer.as_ref())
    }

    pub fn group(&self) -> InstructionGroup {
        classify(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceProgram {
    pub instructions: Vec<Instruction>,
}

impl TraceProgram {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn group_counts(&self) -> GroupCounts {
        let mut counts = GroupCounts::default();
        for instr in &self.instructions {
            counts.add_one(instr.group());
        }
        counts
    }
}

/// Per-opcode latency defaults, in cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyTable {
    /// load, store and alloca.
    pub memory: u64,
    /// sdiv, udiv, fdiv, srem, urem, frem.
    pub division: u64,
    pub other: u64,
    #[serde(default)]
    pub overrides: BTreeMap<Opcode, u64>,
}

impl Default for LatencyTable {
    fn default() -> Self {
        LatencyTable {
            memory: 2,
            division: 10,
            other: 1,
            overrides: BTreeMap::new(),
        }
    }
}

impl LatencyTable {
    pub fn latency(&self, opcode: Opcode) -> u64 {
        if let Some(&cycles) = self.overrides.get(&opcode) {
            return cycles;
        }
        match opcode {
            Opcode::Load | Opcode::Store => self.memory,
            op if op.group() == InstructionGroup::D => self.division,
            _ => self.other,
        }
    }
}

/// Energy per executed instruction for each group, in joules.
///
/// The shipped defaults are arbitrary placeholders for reproducible runs, not
/// measured values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyTable {
    pub m: f64,
    pub b: f64,
    pub d: f64,
    pub g: f64,
}

impl Default for EnergyTable {
    fn default() -> Self {
        EnergyTable {
            m: 3e-12,
            b: 1e-12,
            d: 5e-12,
            g: 1e-12,
        }
    }
}

impl EnergyTable {
    pub fn cost(&self, group: InstructionGroup) -> f64 {
        match group {
            InstructionGroup::M => self.m,
            InstructionGroup::B => self.b,
            InstructionGroup::D => self.d,
            InstructionGroup::G => self.g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for group in InstructionGroup::ALL {
            let c = self.cost(group);
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::Config(format!(
                    "energy cost for group {group} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GroupCounts([u64; 4]);

impl GroupCounts {
    pub fn new(m: u64, b: u64, d: u64, g: u64) -> Self {
        GroupCounts([m, b, d, g])
    }

    pub fn get(&self, group: InstructionGroup) -> u64 {
        self.0[group.index()]
    }

    pub fn add_one(&mut self, group: InstructionGroup) {
        self.0[group.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl Add for GroupCounts {
    type Output = GroupCounts;

    fn add(self, rhs: GroupCounts) -> GroupCounts {
        let mut out = self;
        for (a, b) in out.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        out
    }
}

pub fn classify(instr: &Instruction) -> InstructionGroup {
    instr.opcode.group()
}

/// Sequential node energy: the sum over groups of cost times count.
pub fn node_energy(counts: &GroupCounts, table: &EnergyTable) -> f64 {
    InstructionGroup::ALL
        .iter()
        .map(|&g| table.cost(g) * counts.get(g) as f64)
        .fold(0.0, |acc, x| acc + x)
}

pub fn parse_trace(text: &str) -> Result<TraceProgram> {
    parse_trace_with(text, &LatencyTable::default())
}

pub fn parse_trace_with(text: &str, latencies: &LatencyTable) -> Result<TraceProgram> {
    let mut instructions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let source_line = idx + 1;
        let (code, comment) = match raw.find(';') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        let code = code.trim();
        if code.is_empty() {
            continue;
        }
        let annotated = match comment {
            Some(c) => parse_cycles_annotation(c, source_line)?,
            None => None,
        };
        let mut instr = parse_line(code, source_line)?;
        instr.line_no = instructions.len() + 1;
        instr.latency = annotated.unwrap_or_else(|| latencies.latency(instr.opcode));
        instructions.push(instr);
    }
    Ok(TraceProgram { instructions })
}

fn parse_cycles_annotation(comment: &str, line: usize) -> Result<Option<u64>> {
    let body = comment.trim();
    let Some(rest) = body.strip_prefix("cycles") else {
        return Ok(None);
    };
    let Some(value) = rest.trim_start().strip_prefix('=') else {
        return Ok(None);
    };
    value
        .trim()
        .parse::<u64>()
        .map(Some)
        .map_err(|_| syntax(line, format!("invalid cycle annotation `{body}`")))
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

const ARITH_FLAGS: &[&str] = &[
    "nsw", "nuw", "exact", "fast", "nnan", "ninf", "nsz", "arcp", "contract", "afn", "reassoc",
];
const ICMP_PREDICATES: &[&str] = &[
    "eq", "ne", "ugt", "uge", "ult", "ule", "sgt", "sge", "slt", "sle",
];
const FCMP_PREDICATES: &[&str] = &[
    "false", "oeq", "ogt", "oge", "olt", "ole", "one", "ord", "ueq", "ugt", "uge", "ult", "ule",
    "une", "uno", "true",
];

enum Operand {
    Reg(Register),
    Const,
}

struct LineParser<'a> {
    line: usize,
    segments: Vec<Vec<&'a str>>,
}

impl<'a> LineParser<'a> {
    fn new(body: &'a str, line: usize) -> Self {
        let segments = body
            .split(',')
            .map(|seg| seg.split_whitespace().collect::<Vec<_>>())
            .collect();
        LineParser { line, segments }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        syntax(self.line, message)
    }

    fn segment(&self, i: usize) -> Result<&[&'a str]> {
        match self.segments.get(i) {
            Some(seg) if !seg.is_empty() => Ok(seg),
            _ => Err(self.err(format!("missing operand group {}", i + 1))),
        }
    }

    fn ty(&self, token: &str) -> Result<ValueType> {
        ValueType::parse(token).ok_or_else(|| self.err(format!("unknown type `{token}`")))
    }

    fn register(&self, token: &str) -> Result<Register> {
        Register::parse(token).ok_or_else(|| Error::MalformedRegister {
            line: self.line,
            token: token.to_string(),
        })
    }

    fn operand(&self, token: &str) -> Result<Operand> {
        if token.starts_with('%') {
            return self.register(token).map(Operand::Reg);
        }
        let numeric = token.parse::<f64>().is_ok()
            || token.parse::<i64>().is_ok()
            || (token.starts_with("0x") && u64::from_str_radix(&token[2..], 16).is_ok())
            || matches!(token, "true" | "false");
        if numeric {
            Ok(Operand::Const)
        } else {
            Err(self.err(format!("invalid operand `{token}`")))
        }
    }

    /// Trailing `align N` groups after the mandatory ones.
    fn check_trailing(&self, from: usize) -> Result<()> {
        for seg in self.segments.iter().skip(from) {
            match seg.as_slice() {
                ["align", n] if n.parse::<u64>().is_ok() => {}
                other => return Err(self.err(format!("unexpected trailing `{}`", other.join(" ")))),
            }
        }
        Ok(())
    }

    fn single(&self, i: usize) -> Result<&'a str> {
        match self.segment(i)? {
            [tok] => Ok(tok),
            other => Err(self.err(format!("expected one operand, found `{}`", other.join(" ")))),
        }
    }
}

fn push_operand(sources: &mut Vec<Register>, op: Operand) {
    if let Operand::Reg(r) = op {
        sources.push(r);
    }
}

fn parse_line(code: &str, line: usize) -> Result<Instruction> {
    let (result_reg, rest) = match code.find('=') {
        Some(pos) => {
            let lhs = code[..pos].trim();
            let reg = Register::parse(lhs).ok_or_else(|| Error::MalformedRegister {
                line,
                token: lhs.to_string(),
            })?;
            (Some(reg), code[pos + 1..].trim())
        }
        None => (None, code),
    };
    let (op_token, body) = match rest.find(char::is_whitespace) {
        Some(pos) => (&rest[..pos], rest[pos..].trim()),
        None => (rest, ""),
    };
    if op_token.is_empty() {
        return Err(syntax(line, "missing opcode"));
    }
    let opcode: Opcode = op_token.parse().map_err(|_| Error::UnknownOpcode {
        line,
        opcode: op_token.to_string(),
    })?;

    let needs_result = !matches!(opcode, Opcode::Store | Opcode::Br | Opcode::Ret);
    match (&result_reg, needs_result) {
        (None, true) => {
            return Err(syntax(
                line,
                format!("`{opcode}` requires a result register"),
            ))
        }
        (Some(_), false) => return Err(syntax(line, format!("`{opcode}` cannot assign a result"))),
        _ => {}
    }

    let p = LineParser::new(body, line);
    let mut sources = Vec::new();
    let mut dest_pointer = None;

    let value_type = match opcode {
        Opcode::Load => {
            let ty = match p.segment(0)? {
                [ty] | ["volatile", ty] => p.ty(ty)?,
                other => return Err(p.err(format!("bad load type `{}`", other.join(" ")))),
            };
            match p.segment(1)? {
                [ptr_ty, ptr] => {
                    p.ty(ptr_ty)?;
                    sources.push(p.register(ptr)?);
                }
                other => return Err(p.err(format!("bad load pointer `{}`", other.join(" ")))),
            }
            p.check_trailing(2)?;
            ty
        }
        Opcode::Store => {
            let ty = match p.segment(0)? {
                [ty, value] | ["volatile", ty, value] => {
                    let ty = p.ty(ty)?;
                    push_operand(&mut sources, p.operand(value)?);
                    ty
                }
                other => return Err(p.err(format!("bad store value `{}`", other.join(" ")))),
            };
            match p.segment(1)? {
                [ptr_ty, ptr] => {
                    p.ty(ptr_ty)?;
                    dest_pointer = Some(p.register(ptr)?);
                }
                other => return Err(p.err(format!("bad store pointer `{}`", other.join(" ")))),
            }
            p.check_trailing(2)?;
            ty
        }
        op if op.is_binary() => {
            let seg = p.segment(0)?;
            let (last, head) = seg.split_last().expect("segment is non-empty");
            let (ty, flags) = match head.split_last() {
                Some((ty, flags)) => (p.ty(ty)?, flags),
                None => return Err(p.err("missing operand type")),
            };
            if let Some(bad) = flags.iter().find(|f| !ARITH_FLAGS.contains(f)) {
                return Err(p.err(format!("unknown flag `{bad}`")));
            }
            push_operand(&mut sources, p.operand(last)?);
            push_operand(&mut sources, p.operand(p.single(1)?)?);
            if p.segments.len() > 2 {
                return Err(p.err("too many operands"));
            }
            ty
        }
        Opcode::Icmp | Opcode::Fcmp => {
            let preds = if opcode == Opcode::Icmp {
                ICMP_PREDICATES
            } else {
                FCMP_PREDICATES
            };
            match p.segment(0)? {
                [pred, ty, a] => {
                    if !preds.contains(pred) {
                        return Err(p.err(format!("unknown predicate `{pred}`")));
                    }
                    p.ty(ty)?;
                    push_operand(&mut sources, p.operand(a)?);
                }
                other => return Err(p.err(format!("bad compare `{}`", other.join(" ")))),
            }
            push_operand(&mut sources, p.operand(p.single(1)?)?);
            if p.segments.len() > 2 {
                return Err(p.err("too many operands"));
            }
            ValueType::I1
        }
        Opcode::Alloca => {
            match p.segment(0)? {
                [ty] => {
                    p.ty(ty)?;
                }
                other => return Err(p.err(format!("bad alloca type `{}`", other.join(" ")))),
            }
            p.check_trailing(1)?;
            ValueType::Ptr
        }
        Opcode::Br => {
            match p.segments.len() {
                1 => match p.segment(0)? {
                    ["label", target] => {
                        p.register(target)?;
                    }
                    other => return Err(p.err(format!("bad branch `{}`", other.join(" ")))),
                },
                3 => {
                    match p.segment(0)? {
                        ["i1", cond] => push_operand(&mut sources, p.operand(cond)?),
                        other => {
                            return Err(p.err(format!("bad branch condition `{}`", other.join(" "))))
                        }
                    }
                    for i in 1..3 {
                        match p.segment(i)? {
                            ["label", target] => {
                                p.register(target)?;
                            }
                            other => {
                                return Err(
                                    p.err(format!("bad branch target `{}`", other.join(" ")))
                                )
                            }
                        }
                    }
                }
                _ => return Err(p.err("branch expects one or three operand groups")),
            }
            ValueType::I1
        }
        Opcode::Ret => {
            if p.segments.len() != 1 {
                return Err(p.err("ret takes a single operand"));
            }
            match p.segments[0].as_slice() {
                ["void"] => ValueType::I1,
                [ty, value] => {
                    let ty = p.ty(ty)?;
                    push_operand(&mut sources, p.operand(value)?);
                    ty
                }
                other => return Err(p.err(format!("bad return `{}`", other.join(" ")))),
            }
        }
        _ => unreachable!("all opcodes handled"),
    };

    Ok(Instruction {
        line_no: 0,
        source_line: line,
        opcode,
        result_reg,
        source_regs: sources,
        dest_pointer,
        value_type,
        data_size: value_type.size_bytes(),
        latency: 0,
    })
}

/// One producer an instruction depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepEntry {
    pub producer: usize,
    pub latency: u64,
    pub data_size: u64,
}

/// Source, destination and dependency hash tables built while replaying a
/// trace.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DependencyTables {
    /// Register -> lines that read it.
    pub src_table: IndexMap<Register, Vec<usize>>,
    /// Register -> line that most recently wrote it.
    pub dest_table: IndexMap<Register, usize>,
    /// Consumer line -> producers, in source-operand order.
    pub dep_table: BTreeMap<usize, Vec<DepEntry>>,
}

pub fn build_tables(prog: &TraceProgram) -> DependencyTables {
    let mut tables = DependencyTables::default();
    for instr in &prog.instructions {
        let line = instr.line_no;
        let mut seen: Vec<&Register> = Vec::new();
        for reg in &instr.source_regs {
            if seen.contains(&reg) {
                continue;
            }
            seen.push(reg);
            tables.src_table.entry(reg.clone()).or_default().push(line);
            if let Some(&producer) = tables.dest_table.get(reg) {
                let deps = tables.dep_table.entry(line).or_default();
                if deps.iter().all(|d| d.producer != producer) {
                    let p = &prog.instructions[producer - 1];
                    deps.push(DepEntry {
                        producer,
                        latency: p.latency,
                        data_size: p.data_size,
                    });
                }
            }
        }
        if let Some(dest) = instr.destination() {
            tables.dest_table.insert(dest.clone(), line);
        }
    }
    tables
}

impl DependencyTables {
    /// Registers read before any write in the trace.
    pub fn graph_inputs(&self, prog: &TraceProgram) -> Vec<Register> {
        let mut inputs = Vec::new();
        for (reg, lines) in &self.src_table {
            let first_read = lines[0];
            let written_before = prog.instructions[..first_read - 1]
                .iter()
                .any(|i| i.destination() == Some(reg));
            if !written_before {
                inputs.push(reg.clone());
            }
        }
        inputs
    }

    /// Three-column view with one row per line in the source table and line
    /// numbers only in the dependency column.
    pub fn render_table_view(&self) -> String {
        let mut by_line: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for (reg, lines) in &self.src_table {
            for &l in lines {
                by_line.entry(l).or_default().push(reg.as_str());
            }
        }
        let src_rows: Vec<(String, String)> = by_line
            .iter()
            .map(|(l, regs)| (regs.join(", "), l.to_string()))
            .collect();
        let dest_rows: Vec<(String, String)> = self
            .dest_table
            .iter()
            .map(|(r, l)| (r.to_string(), l.to_string()))
            .collect();
        let dep_rows: Vec<(String, String)> = self
            .dep_table
            .iter()
            .map(|(l, deps)| {
                let producers: Vec<String> = deps.iter().map(|d| d.producer.to_string()).collect();
                (l.to_string(), producers.join(","))
            })
            .collect();

        let columns = [&src_rows, &dest_rows, &dep_rows];
        let widths: Vec<(usize, usize)> = columns
            .iter()
            .map(|rows| {
                let k = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(3);
                let v = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(5);
                (k, v)
            })
            .collect();
        let mut out = String::new();
        let titles = ["Src Table", "Dest Table", "Dependency Table"];
        let header: Vec<String> = titles
            .iter()
            .zip(&widths)
            .map(|(t, (k, v))| format!("{:<w$}", t, w = k + v + 3))
            .collect();
        out.push_str(header.join(" | ").trim_end());
        out.push('\n');
        let keys: Vec<String> = widths
            .iter()
            .map(|(k, v)| format!("{:<k$} | {:<v$}", "Key", "Value"))
            .collect();
        out.push_str(keys.join(" | ").trim_end());
        out.push('\n');
        let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
        for i in 0..rows {
            let cells: Vec<String> = columns
                .iter()
                .zip(&widths)
                .map(|(col, (k, v))| match col.get(i) {
                    Some((key, value)) => format!("{key:<k$} | {value:<v$}"),
                    None => format!("{:<k$} | {:<v$}", "", ""),
                })
                .collect();
            out.push_str(cells.join(" | ").trim_end());
            out.push('\n');
        }
        out
    }
}
