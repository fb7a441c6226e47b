//! Block files: every block's framed packets in slot order, then a length
//! trailer carrying the original file size.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmfec::packet::{length_trailer, parse_trailer, FRAME_MAGIC, TRAILER_LEN, TRAILER_MAGIC};
use rmfec::schedule::replay_with_message;
use rmfec::{deframe_packet, encode_block, frame_packet, CodeParams, Codec, Frame, PacketBlock};

use crate::args::DecodeArgs;
use crate::error::CliError;

fn block_count(len: u64, params: &CodeParams, z: usize) -> u64 {
    len.div_ceil((params.k() * z) as u64).max(1)
}

/// Encodes `input` into framed blocks; returns the number of blocks.
pub fn encode_file(
    input: &Path,
    output: &Path,
    params: &CodeParams,
    z: u32,
) -> Result<u64, CliError> {
    let data = std::fs::read(input).map_err(|e| CliError::io(input, e))?;
    let z = z as usize;
    let blocks = block_count(data.len() as u64, params, z);
    if blocks > u32::MAX as u64 + 1 {
        return Err(CliError::Usage(format!(
            "{blocks} blocks do not fit a 32-bit block id"
        )));
    }
    let block_bytes = params.k() * z;
    let mut out =
        Vec::with_capacity(blocks as usize * params.n() * (z + rmfec::packet::FRAME_HEADER_LEN));
    for b in 0..blocks as usize {
        let start = (b * block_bytes).min(data.len());
        let end = ((b + 1) * block_bytes).min(data.len());
        let mut chunk = data[start..end].to_vec();
        chunk.resize(block_bytes, 0);
        let source: Vec<Vec<u8>> = chunk.chunks(z).map(<[u8]>::to_vec).collect();
        let block = encode_block(&source, params)?;
        for (slot, payload) in block.slots().iter().enumerate() {
            let payload = payload.as_deref().expect("encoded blocks are complete");
            out.extend(frame_packet(params, b as u32, slot as u16, payload)?);
        }
    }
    out.extend(length_trailer(data.len() as u64));
    std::fs::write(output, out).map_err(|e| CliError::io(output, e))?;
    Ok(blocks)
}

struct Parsed {
    frames: Vec<Frame>,
    length: u64,
    malformed: usize,
}

/// Splits a block file into frames. Malformed frames are skipped by
/// scanning ahead to the next frame or trailer magic.
fn parse_stream(buf: &[u8]) -> Result<Parsed, CliError> {
    let mut frames = Vec::new();
    let mut malformed = 0;
    let mut at = 0;
    loop {
        let rest = &buf[at..];
        if rest.starts_with(TRAILER_MAGIC) && rest.len() == TRAILER_LEN {
            let length = parse_trailer(rest).expect("checked magic and size");
            return Ok(Parsed {
                frames,
                length,
                malformed,
            });
        }
        if rest.is_empty() {
            return Err(CliError::Format("missing length trailer".into()));
        }
        match deframe_packet(rest) {
            Ok((frame, used)) => {
                frames.push(frame);
                at += used;
            }
            Err(_) => {
                malformed += 1;
                at += 1 + next_magic(&buf[at + 1..]).unwrap_or(buf.len() - at - 1);
            }
        }
    }
}

fn next_magic(buf: &[u8]) -> Option<usize> {
    buf.windows(4)
        .position(|w| w == FRAME_MAGIC || w == TRAILER_MAGIC)
}

#[derive(Debug)]
pub struct DecodeReport {
    pub params: CodeParams,
    pub blocks: u64,
    pub sent: usize,
    pub received: usize,
}

pub fn decode_file(args: &DecodeArgs) -> Result<DecodeReport, CliError> {
    let buf = std::fs::read(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let parsed = parse_stream(&buf)?;
    if parsed.malformed > 0 {
        eprintln!("skipped {} malformed frame(s)", parsed.malformed);
    }
    let sent = parsed.frames.len();

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let survivors: Vec<Frame> = parsed
        .frames
        .into_iter()
        .filter(|_| rng.random::<f64>() >= args.loss)
        .collect();
    let received = survivors.len();
    let Some(first) = survivors.first() else {
        return Err(CliError::Decode("no packets received".into()));
    };
    let params = first.params()?;
    let (code, z) = ((first.r, first.m), first.payload.len());
    let blocks = block_count(parsed.length, &params, z);

    let mut slots: Vec<Vec<Option<Vec<u8>>>> = vec![vec![None; params.n()]; blocks as usize];
    for f in survivors {
        let same_code = (f.r, f.m) == code && f.payload.len() == z;
        if let (true, Some(block)) = (same_code, slots.get_mut(f.block_id as usize)) {
            block[f.slot as usize].get_or_insert(f.payload);
        }
    }

    let codec = Codec::new(params);
    let opts = args.algo.decode_options();
    let mut data = Vec::with_capacity(blocks as usize * params.k() * z);
    for (b, block_slots) in slots.into_iter().enumerate() {
        let block = PacketBlock::new(params, z, block_slots)?;
        let pattern = block.pattern();
        let schedule = codec.build_schedule(&pattern, &opts, args.algo.policy())?;
        let message = replay_with_message(&schedule, &block)?
            .message
            .ok_or_else(|| {
                CliError::Decode(format!(
                    "block {b}: {} of {} packets received, {} could not recover it",
                    pattern.known_count(),
                    params.n(),
                    args.algo
                ))
            })?;
        data.extend(message.into_iter().flatten());
    }
    if parsed.length > data.len() as u64 {
        return Err(CliError::Format(format!(
            "trailer length {} exceeds decoded size {}",
            parsed.length,
            data.len()
        )));
    }
    data.truncate(parsed.length as usize);
    std::fs::write(&args.output, data).map_err(|e| CliError::io(&args.output, e))?;
    Ok(DecodeReport {
        params,
        blocks,
        sent,
        received,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resyncs_after_garbage() {
        let p = rmfec::code_params(1, 2).unwrap();
        let mut buf = b"junkRM".to_vec();
        buf.extend(frame_packet(&p, 0, 1, b"ab").unwrap());
        let mut bad = frame_packet(&p, 0, 2, b"cd").unwrap();
        bad[4] = 9;
        buf.extend(bad);
        buf.extend(length_trailer(6));
        let parsed = parse_stream(&buf).unwrap();
        assert_eq!(parsed.frames.len(), 1);
        assert_eq!(parsed.frames[0].slot, 1);
        assert_eq!(parsed.length, 6);
        assert_eq!(parsed.malformed, 2);
    }

    #[test]
    fn missing_trailer() {
        let p = rmfec::code_params(1, 2).unwrap();
        let buf = frame_packet(&p, 0, 1, b"ab").unwrap();
        assert!(matches!(parse_stream(&buf), Err(CliError::Format(_))));
        assert!(matches!(parse_stream(&[]), Err(CliError::Format(_))));
    }

    #[test]
    fn block_counts() {
        let p = rmfec::code_params(1, 3).unwrap();
        assert_eq!(block_count(0, &p, 10), 1);
        assert_eq!(block_count(40, &p, 10), 1);
        assert_eq!(block_count(41, &p, 10), 2);
    }
}
