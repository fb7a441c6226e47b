//! Blank decoding: record copy/XOR operations once per loss pattern, then
//! replay them over every byte column of a packet block.
//!
//! Slots `0..n` of a schedule are the codeword positions; received slots are
//! read-only. Every other slot is scratch, append-allocated and written once.

use std::sync::OnceLock;

use crate::code::{emit_extract, generator_matrix, parity_check_matrix, CodeParams, Symbol};
use crate::error::{Error, Result};
use crate::gf2::{ge_reduce, ml_solve_into, Gf2Matrix};
use crate::packet::PacketBlock;
use crate::pattern::ErasurePattern;
use crate::recursive::{decode_slots, DecodeOptions};

/// Index of a packet slot in a schedule arena.
pub type Slot = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// `slot[dst] = slot[src]`
    Copy { src: Slot, dst: Slot },
    /// `slot[dst] ^= slot[src]`
    Xor { src: Slot, dst: Slot },
}

impl Op {
    pub fn src(&self) -> Slot {
        match *self {
            Op::Copy { src, .. } | Op::Xor { src, .. } => src,
        }
    }

    pub fn dst(&self) -> Slot {
        match *self {
            Op::Copy { dst, .. } | Op::Xor { dst, .. } => dst,
        }
    }
}

/// What to do when the recursive decoder does not recover the whole codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FallbackPolicy {
    /// Report the partial result.
    #[default]
    None,
    /// Solve the residual erasures by Gaussian elimination, treating every
    /// recursively recovered position as received.
    GeAfterPartial,
    /// Skip the recursive decoder and run maximum-likelihood elimination.
    GeOnly,
}

impl FallbackPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            FallbackPolicy::None => "none",
            FallbackPolicy::GeAfterPartial => "ge_after_partial",
            FallbackPolicy::GeOnly => "ge_only",
        }
    }
}

impl std::str::FromStr for FallbackPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(FallbackPolicy::None),
            "ge_after_partial" => Ok(FallbackPolicy::GeAfterPartial),
            "ge_only" => Ok(FallbackPolicy::GeOnly),
            _ => Err(Error::UnknownName {
                kind: "policy",
                name: s.to_string(),
            }),
        }
    }
}

/// Work counters gathered while building a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BuildStats {
    /// Position pairs inspected by XOR-mask searches (`(n/2)^2` per search).
    pub candidate_evaluations: u64,
    pub mask_searches: u64,
    /// Plotkin-level sweeps executed.
    pub sweeps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OpCount {
    pub copies: usize,
    pub xors: usize,
}

impl OpCount {
    fn of(ops: &[Op]) -> Self {
        let xors = ops.iter().filter(|op| matches!(op, Op::Xor { .. })).count();
        Self {
            copies: ops.len() - xors,
            xors,
        }
    }

    pub fn total(&self) -> usize {
        self.copies + self.xors
    }
}

/// A recorded decoding path for one erasure pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    slot_count: u32,
    ops: Vec<Op>,
    tail_start: usize,
    success: bool,
    input_mask: ErasurePattern,
    recovered_mask: ErasurePattern,
    message_slots: Option<Vec<Slot>>,
    stats: BuildStats,
}

impl Schedule {
    pub fn slot_count(&self) -> u32 {
        self.slot_count
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// Ops that recover the primary output: codeword positions for the
    /// recursive path, message symbols for elimination.
    pub fn decode_ops(&self) -> &[Op] {
        &self.ops[..self.tail_start]
    }

    /// Remaining ops: message extraction after a recursive decode, or
    /// re-encoding of erased positions after elimination.
    pub fn tail_ops(&self) -> &[Op] {
        &self.ops[self.tail_start..]
    }

    pub fn tail_op_count(&self) -> OpCount {
        OpCount::of(self.tail_ops())
    }

    pub fn success(&self) -> bool {
        self.success
    }

    /// The pattern the schedule was recorded for.
    pub fn input_mask(&self) -> &ErasurePattern {
        &self.input_mask
    }

    pub fn recovered_mask(&self) -> &ErasurePattern {
        &self.recovered_mask
    }

    pub fn message_slots(&self) -> Option<&[Slot]> {
        self.message_slots.as_deref()
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    /// Executes the schedule on one symbol per position. Values at erased
    /// positions are ignored. Returns the codeword (unrecovered positions
    /// hold `T::default()`) and, on success, the message.
    pub fn replay_symbols<T: Symbol>(&self, received: &[T]) -> Result<(Vec<T>, Option<Vec<T>>)> {
        let n = self.input_mask.len();
        if received.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: received.len(),
            });
        }
        let mut arena = vec![T::default(); self.slot_count as usize];
        for p in self.input_mask.known_positions() {
            arena[p] = received[p];
        }
        for op in &self.ops {
            match *op {
                Op::Copy { src, dst } => arena[dst as usize] = arena[src as usize],
                Op::Xor { src, dst } => {
                    let s = arena[src as usize];
                    arena[dst as usize] ^= s;
                }
            }
        }
        let codeword = (0..n)
            .map(|p| {
                if self.recovered_mask.is_known(p) {
                    arena[p]
                } else {
                    T::default()
                }
            })
            .collect();
        let message = self
            .message_slots
            .as_ref()
            .map(|slots| slots.iter().map(|&s| arena[s as usize]).collect());
        Ok((codeword, message))
    }

    /// Binary op list: header `RMSC`, version, slot count, op count, then
    /// `{opcode u8, src u32, dst u32}` per op, little-endian.
    pub fn serialize_ops(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(SCHEDULE_HEADER_LEN + 9 * self.ops.len());
        out.extend_from_slice(SCHEDULE_MAGIC);
        out.push(SCHEDULE_VERSION);
        out.extend_from_slice(&self.slot_count.to_le_bytes());
        out.extend_from_slice(&(self.ops.len() as u32).to_le_bytes());
        for op in &self.ops {
            let code = match op {
                Op::Copy { .. } => OPCODE_COPY,
                Op::Xor { .. } => OPCODE_XOR,
            };
            out.push(code);
            out.extend_from_slice(&op.src().to_le_bytes());
            out.extend_from_slice(&op.dst().to_le_bytes());
        }
        out
    }
}

const SCHEDULE_MAGIC: &[u8; 4] = b"RMSC";
const SCHEDULE_VERSION: u8 = 1;
const SCHEDULE_HEADER_LEN: usize = 13;
const OPCODE_COPY: u8 = 0;
const OPCODE_XOR: u8 = 1;

/// Parses the output of [`Schedule::serialize_ops`] into `(slot_count, ops)`.
pub fn parse_ops(bytes: &[u8]) -> Result<(u32, Vec<Op>)> {
    let bad = |what: &str| Error::Malformed(format!("schedule: {what}"));
    if bytes.len() < SCHEDULE_HEADER_LEN {
        return Err(bad("truncated header"));
    }
    if &bytes[..4] != SCHEDULE_MAGIC {
        return Err(bad("bad magic"));
    }
    if bytes[4] != SCHEDULE_VERSION {
        return Err(bad("unsupported version"));
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let slot_count = u32_at(5);
    let count = u32_at(9) as usize;
    let body = &bytes[SCHEDULE_HEADER_LEN..];
    if body.len() != count * 9 {
        return Err(bad("op count does not match length"));
    }
    let ops = body
        .chunks_exact(9)
        .map(|rec| {
            let src = u32::from_le_bytes(rec[1..5].try_into().unwrap());
            let dst = u32::from_le_bytes(rec[5..9].try_into().unwrap());
            if src >= slot_count || dst >= slot_count {
                return Err(bad("slot index out of range"));
            }
            match rec[0] {
                OPCODE_COPY => Ok(Op::Copy { src, dst }),
                OPCODE_XOR => Ok(Op::Xor { src, dst }),
                _ => Err(bad("unknown opcode")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((slot_count, ops))
}

pub fn op_count(schedule: &Schedule) -> OpCount {
    OpCount::of(&schedule.ops)
}

/// Records ops while tracking which slots hold a known value.
///
/// With `record == false` only the known flags are tracked; decoders use
/// this for fast success checks.
#[derive(Debug, Clone)]
pub struct ScheduleBuilder {
    input: ErasurePattern,
    known: Vec<bool>,
    ops: Vec<Op>,
    record: bool,
    tail_start: Option<usize>,
    message: Option<Vec<Slot>>,
    pub(crate) stats: BuildStats,
}

impl ScheduleBuilder {
    pub fn new(pattern: &ErasurePattern, record: bool) -> Self {
        Self {
            input: pattern.clone(),
            known: pattern.as_slice().to_vec(),
            ops: Vec::new(),
            record,
            tail_start: None,
            message: None,
            stats: BuildStats::default(),
        }
    }

    /// Number of codeword positions.
    pub fn n(&self) -> usize {
        self.input.len()
    }

    pub fn recording(&self) -> bool {
        self.record
    }

    #[inline]
    pub fn is_known(&self, slot: Slot) -> bool {
        self.known[slot as usize]
    }

    /// Known flags of the codeword positions.
    pub fn codeword_mask(&self) -> ErasurePattern {
        ErasurePattern::from_known(self.known[..self.n()].to_vec())
    }

    /// Appends `count` fresh unknown slots and returns the first index.
    pub fn alloc(&mut self, count: usize) -> Slot {
        let first = self.known.len() as Slot;
        self.known.resize(self.known.len() + count, false);
        first
    }

    /// `dst = XOR of srcs`, emitted as one COPY followed by XORs.
    pub fn combine(&mut self, dst: Slot, srcs: impl IntoIterator<Item = Slot>) {
        assert!(!self.known[dst as usize], "slot {dst} written twice");
        if self.record {
            let mut srcs = srcs.into_iter();
            if let Some(first) = srcs.next() {
                debug_assert!(self.known[first as usize]);
                self.ops.push(Op::Copy { src: first, dst });
                for src in srcs {
                    debug_assert!(self.known[src as usize]);
                    self.ops.push(Op::Xor { src, dst });
                }
            }
        }
        self.known[dst as usize] = true;
    }

    pub(crate) fn mark_decode_end(&mut self) {
        self.tail_start = Some(self.ops.len());
    }

    pub(crate) fn set_message_slots(&mut self, slots: Vec<Slot>) {
        self.message = Some(slots);
    }

    pub fn finish(self) -> Schedule {
        let n = self.input.len();
        let recovered_mask = ErasurePattern::from_known(self.known[..n].to_vec());
        Schedule {
            slot_count: self.known.len() as u32,
            tail_start: self.tail_start.unwrap_or(self.ops.len()),
            ops: self.ops,
            success: recovered_mask.is_complete(),
            input_mask: self.input,
            recovered_mask,
            message_slots: self.message,
            stats: self.stats,
        }
    }
}

/// A code together with its lazily built generator and parity-check matrices.
#[derive(Debug)]
pub struct Codec {
    params: CodeParams,
    generator: OnceLock<Gf2Matrix>,
    parity: OnceLock<Gf2Matrix>,
}

impl Codec {
    pub fn new(params: CodeParams) -> Self {
        Self {
            params,
            generator: OnceLock::new(),
            parity: OnceLock::new(),
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn generator(&self) -> &Gf2Matrix {
        self.generator
            .get_or_init(|| generator_matrix(&self.params))
    }

    pub fn parity_check(&self) -> &Gf2Matrix {
        self.parity
            .get_or_init(|| parity_check_matrix(&self.params))
    }

    pub fn build_schedule(
        &self,
        pattern: &ErasurePattern,
        opts: &DecodeOptions,
        policy: FallbackPolicy,
    ) -> Result<Schedule> {
        self.check_len(pattern)?;
        let mut b = ScheduleBuilder::new(pattern, true);
        self.run(&mut b, opts, policy);
        Ok(b.finish())
    }

    /// Whether the full codeword is recoverable, without recording ops.
    pub fn decodable(
        &self,
        pattern: &ErasurePattern,
        opts: &DecodeOptions,
        policy: FallbackPolicy,
    ) -> Result<bool> {
        self.check_len(pattern)?;
        let mut b = ScheduleBuilder::new(pattern, false);
        Ok(self.run(&mut b, opts, policy))
    }

    fn check_len(&self, pattern: &ErasurePattern) -> Result<()> {
        if pattern.len() != self.params.n() {
            return Err(Error::DimensionMismatch {
                expected: self.params.n(),
                actual: pattern.len(),
            });
        }
        Ok(())
    }

    fn run(&self, b: &mut ScheduleBuilder, opts: &DecodeOptions, policy: FallbackPolicy) -> bool {
        if policy == FallbackPolicy::GeOnly {
            return ml_solve_into(self.generator(), b).is_ok();
        }
        let slots: Vec<Slot> = (0..self.params.n() as Slot).collect();
        let mut ok = decode_slots(b, &self.params, opts, &slots);
        if !ok && policy == FallbackPolicy::GeAfterPartial {
            ok = solve_residual(self.parity_check(), b);
        }
        if ok && b.recording() {
            b.mark_decode_end();
            let message = emit_extract(b, &self.params, &slots);
            b.set_message_slots(message);
        }
        ok
    }
}

/// Solves the still-erased codeword positions from the parity checks, with
/// every known position (received or recovered) on the right-hand side.
fn solve_residual(h: &Gf2Matrix, b: &mut ScheduleBuilder) -> bool {
    let n = b.n();
    let unknown: Vec<usize> = (0..n).filter(|&p| !b.is_known(p as Slot)).collect();
    if unknown.is_empty() {
        return true;
    }
    let log = ge_reduce(&h.select_columns(&unknown));
    if log.rank < unknown.len() {
        return false;
    }
    let mut reduced = h.clone();
    reduced.apply_log(&log).expect("same row count");
    for (row, &col) in log.pivot_cols.iter().enumerate() {
        let target = unknown[col];
        let sources: Vec<Slot> = reduced
            .row_ones(row)
            .filter(|&p| p != target)
            .map(|p| p as Slot)
            .collect();
        b.combine(target as Slot, sources);
    }
    true
}

/// Builds the blank schedule for one erasure pattern.
pub fn build_schedule(
    pattern: &ErasurePattern,
    params: &CodeParams,
    opts: &DecodeOptions,
    policy: FallbackPolicy,
) -> Result<Schedule> {
    Codec::new(*params).build_schedule(pattern, opts, policy)
}

/// Flat `slot_count x z` byte arena a schedule executes in.
#[derive(Debug, Clone)]
pub struct PacketArena {
    z: usize,
    data: Vec<u8>,
}

impl PacketArena {
    /// Loads the received packets of `block` into a fresh arena for `schedule`.
    pub fn load(schedule: &Schedule, block: &PacketBlock) -> Result<Self> {
        if block.pattern() != schedule.input_mask {
            return Err(Error::PatternMismatch);
        }
        let z = block.z();
        let mut data = vec![0u8; schedule.slot_count as usize * z];
        for (p, payload) in block.slots().iter().enumerate() {
            if let Some(bytes) = payload {
                data[p * z..(p + 1) * z].copy_from_slice(bytes);
            }
        }
        Ok(Self { z, data })
    }

    /// Arena whose first slots hold `payloads`; the rest are zeroed scratch.
    pub(crate) fn from_payloads(slot_count: u32, z: usize, payloads: &[Vec<u8>]) -> Self {
        let mut data = vec![0u8; slot_count as usize * z];
        for (i, p) in payloads.iter().enumerate() {
            data[i * z..(i + 1) * z].copy_from_slice(p);
        }
        Self { z, data }
    }

    pub fn run(&mut self, ops: &[Op]) {
        let z = self.z;
        if z == 0 {
            return;
        }
        for op in ops {
            let (src, dst) = (op.src() as usize * z, op.dst() as usize * z);
            debug_assert_ne!(src, dst);
            let (s, d) = if src < dst {
                let (head, tail) = self.data.split_at_mut(dst);
                (&head[src..src + z], &mut tail[..z])
            } else {
                let (head, tail) = self.data.split_at_mut(src);
                (&tail[..z], &mut head[dst..dst + z])
            };
            match op {
                Op::Copy { .. } => d.copy_from_slice(s),
                Op::Xor { .. } => {
                    for (a, b) in d.iter_mut().zip(s) {
                        *a ^= *b;
                    }
                }
            }
        }
    }

    pub fn slot(&self, slot: Slot) -> &[u8] {
        let at = slot as usize * self.z;
        &self.data[at..at + self.z]
    }

    /// Block holding every position recovered by `schedule`.
    pub fn codeword_block(&self, schedule: &Schedule, params: CodeParams) -> PacketBlock {
        let slots = (0..params.n())
            .map(|p| {
                schedule
                    .recovered_mask
                    .is_known(p)
                    .then(|| self.slot(p as Slot).to_vec())
            })
            .collect();
        PacketBlock::from_slots_unchecked(params, self.z, slots)
    }

    pub fn message(&self, schedule: &Schedule) -> Option<Vec<Vec<u8>>> {
        schedule
            .message_slots
            .as_ref()
            .map(|slots| slots.iter().map(|&s| self.slot(s).to_vec()).collect())
    }
}

/// Block after replay, plus the source packets when the decode succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replayed {
    pub block: PacketBlock,
    pub message: Option<Vec<Vec<u8>>>,
}

/// Replays `schedule` over a received block, filling every recovered slot.
pub fn replay(schedule: &Schedule, block: &PacketBlock) -> Result<PacketBlock> {
    Ok(replay_with_message(schedule, block)?.block)
}

pub fn replay_with_message(schedule: &Schedule, block: &PacketBlock) -> Result<Replayed> {
    let mut arena = PacketArena::load(schedule, block)?;
    arena.run(&schedule.ops);
    Ok(Replayed {
        block: arena.codeword_block(schedule, *block.params()),
        message: arena.message(schedule),
    })
}
