//! Packet blocks and their wire framing.
//!
//! A block carries `z`-byte packets; byte column `c` of the block is an
//! independent binary codeword over every bit of that byte, so all coding
//! work is whole-packet XOR and copy.

use crate::code::{emit_encode, CodeParams};
use crate::error::{Error, Result};
use crate::pattern::ErasurePattern;
use crate::schedule::{PacketArena, ScheduleBuilder, Slot};

/// `n` packet slots of `z` bytes, each either received or erased.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketBlock {
    params: CodeParams,
    z: usize,
    slots: Vec<Option<Vec<u8>>>,
}

impl PacketBlock {
    /// Validates slot count and payload sizes.
    pub fn new(params: CodeParams, z: usize, slots: Vec<Option<Vec<u8>>>) -> Result<Self> {
        if slots.len() != params.n() {
            return Err(Error::DimensionMismatch {
                expected: params.n(),
                actual: slots.len(),
            });
        }
        for (index, s) in slots.iter().enumerate() {
            if let Some(p) = s {
                if p.len() != z {
                    return Err(Error::RaggedPayloads {
                        index,
                        expected: z,
                        actual: p.len(),
                    });
                }
            }
        }
        Ok(Self { params, z, slots })
    }

    pub(crate) fn from_slots_unchecked(
        params: CodeParams,
        z: usize,
        slots: Vec<Option<Vec<u8>>>,
    ) -> Self {
        debug_assert!(Self::new(params, z, slots.clone()).is_ok());
        Self { params, z, slots }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn slots(&self) -> &[Option<Vec<u8>>] {
        &self.slots
    }

    pub fn into_slots(self) -> Vec<Option<Vec<u8>>> {
        self.slots
    }

    pub fn pattern(&self) -> ErasurePattern {
        ErasurePattern::from_known(self.slots.iter().map(Option::is_some).collect())
    }

    /// Copy of the block with every position outside `pattern` erased.
    pub fn erase_to(&self, pattern: &ErasurePattern) -> Result<Self> {
        if pattern.len() != self.slots.len() {
            return Err(Error::DimensionMismatch {
                expected: self.slots.len(),
                actual: pattern.len(),
            });
        }
        let slots = self
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| if pattern.is_known(i) { s.clone() } else { None })
            .collect();
        Ok(Self { slots, ..*self })
    }
}

/// Encodes `k` source packets into an `n`-packet block.
pub fn encode_block(source: &[Vec<u8>], params: &CodeParams) -> Result<PacketBlock> {
    if source.len() != params.k() {
        return Err(Error::DimensionMismatch {
            expected: params.k(),
            actual: source.len(),
        });
    }
    let z = source.first().map_or(0, Vec::len);
    if let Some((index, p)) = source.iter().enumerate().find(|(_, p)| p.len() != z) {
        return Err(Error::RaggedPayloads {
            index,
            expected: z,
            actual: p.len(),
        });
    }
    Ok(EncodePlan::new(params).encode(source, z, params))
}

/// Copy/XOR program mapping message slots `0..k` to the `n` codeword positions.
struct EncodePlan {
    schedule: crate::schedule::Schedule,
    outputs: Vec<Slot>,
}

impl EncodePlan {
    fn new(params: &CodeParams) -> Self {
        let mut b = ScheduleBuilder::new(&ErasurePattern::all_known(params.k()), true);
        let message: Vec<Slot> = (0..params.k() as Slot).collect();
        let outputs = emit_encode(&mut b, params, &message);
        Self {
            schedule: b.finish(),
            outputs,
        }
    }

    fn encode(&self, source: &[Vec<u8>], z: usize, params: &CodeParams) -> PacketBlock {
        let mut arena = PacketArena::from_payloads(self.schedule.slot_count(), z, source);
        arena.run(self.schedule.ops());
        let slots = self
            .outputs
            .iter()
            .map(|&s| Some(arena.slot(s).to_vec()))
            .collect();
        PacketBlock::from_slots_unchecked(*params, z, slots)
    }
}

/// Recovers the `k` source packets from a fully known block.
pub fn block_to_message(block: &PacketBlock) -> Result<Vec<Vec<u8>>> {
    let pattern = block.pattern();
    if !pattern.is_complete() {
        return Err(Error::DimensionMismatch {
            expected: pattern.len(),
            actual: pattern.known_count(),
        });
    }
    let schedule = crate::schedule::build_schedule(
        &pattern,
        block.params(),
        &crate::recursive::DecodeOptions::classical(),
        crate::schedule::FallbackPolicy::None,
    )?;
    Ok(crate::schedule::replay_with_message(&schedule, block)?
        .message
        .expect("complete block always yields a message"))
}

pub const FRAME_MAGIC: &[u8; 4] = b"RMPK";
pub const FRAME_VERSION: u8 = 1;
/// magic(4) version(1) r(1) m(1) block_id(4) slot(2) z(4)
pub const FRAME_HEADER_LEN: usize = 17;
pub const TRAILER_MAGIC: &[u8; 4] = b"RMLN";
pub const TRAILER_LEN: usize = 12;

/// One framed packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub r: u8,
    pub m: u8,
    pub block_id: u32,
    pub slot: u16,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn params(&self) -> Result<CodeParams> {
        crate::code::code_params(self.r as u32, self.m as u32)
    }
}

/// Serializes a packet with its little-endian header.
pub fn frame_packet(
    params: &CodeParams,
    block_id: u32,
    slot: u16,
    payload: &[u8],
) -> Result<Vec<u8>> {
    if slot as usize >= params.n() {
        return Err(Error::Malformed(format!(
            "slot {slot} out of range for {params}"
        )));
    }
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + payload.len());
    out.extend_from_slice(FRAME_MAGIC);
    out.push(FRAME_VERSION);
    out.push(params.r() as u8);
    out.push(params.m() as u8);
    out.extend_from_slice(&block_id.to_le_bytes());
    out.extend_from_slice(&slot.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
    Ok(out)
}

/// Parses one frame from the front of `buf`; returns it with the number of
/// bytes consumed.
pub fn deframe_packet(buf: &[u8]) -> Result<(Frame, usize)> {
    let bad = |what: String| Error::Malformed(what);
    if buf.len() < FRAME_HEADER_LEN {
        return Err(bad(format!("truncated header ({} bytes)", buf.len())));
    }
    if &buf[..4] != FRAME_MAGIC {
        return Err(bad("bad frame magic".into()));
    }
    if buf[4] != FRAME_VERSION {
        return Err(bad(format!("unsupported frame version {}", buf[4])));
    }
    let (r, m) = (buf[5], buf[6]);
    let params = crate::code::code_params(r as u32, m as u32)
        .map_err(|_| bad(format!("invalid code RM({r},{m})")))?;
    let block_id = u32::from_le_bytes(buf[7..11].try_into().unwrap());
    let slot = u16::from_le_bytes(buf[11..13].try_into().unwrap());
    let z = u32::from_le_bytes(buf[13..17].try_into().unwrap()) as usize;
    if slot as usize >= params.n() {
        return Err(bad(format!("slot {slot} out of range for {params}")));
    }
    let end = FRAME_HEADER_LEN
        .checked_add(z)
        .filter(|&e| e <= buf.len())
        .ok_or_else(|| bad(format!("payload truncated (need {z} bytes)")))?;
    Ok((
        Frame {
            r,
            m,
            block_id,
            slot,
            payload: buf[FRAME_HEADER_LEN..end].to_vec(),
        },
        end,
    ))
}

/// Length trailer closing a block file.
pub fn length_trailer(length: u64) -> [u8; TRAILER_LEN] {
    let mut out = [0u8; TRAILER_LEN];
    out[..4].copy_from_slice(TRAILER_MAGIC);
    out[4..].copy_from_slice(&length.to_le_bytes());
    out
}

/// Parses a length trailer, if `buf` starts with one.
pub fn parse_trailer(buf: &[u8]) -> Option<u64> {
    (buf.len() >= TRAILER_LEN && &buf[..4] == TRAILER_MAGIC)
        .then(|| u64::from_le_bytes(buf[4..TRAILER_LEN].try_into().unwrap()))
}
