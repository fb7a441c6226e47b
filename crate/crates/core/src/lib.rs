//! Reed-Muller codes for the packet erasure channel.
//!
//! * [`code`]: parameters, Plotkin encoder, generator and parity-check matrices.
//! * [`recursive`]: recursive erasure decoder with XOR-mask permutation
//!   selection and partial information passing.
//! * [`gf2`]: bit-packed GF(2) elimination and the maximum-likelihood decoder.
//! * [`schedule`]: blank decoding. Decoders run on the erasure pattern alone
//!   and record copy/XOR ops that are then replayed over whole packets.
//! * [`packet`]: packet blocks and wire framing.
//! * [`sim`]: Monte Carlo overhead and failure-rate curves.

pub mod code;
pub mod error;
pub mod gf2;
pub mod packet;
pub mod pattern;
pub mod recursive;
pub mod schedule;
pub mod sim;

pub use code::{
    code_params, codeword_to_message, generator_matrix, parity_check_matrix, plotkin_encode,
    CodeParams, Symbol,
};
pub use error::{Error, Result};
pub use gf2::{ge_reduce, mat_vec_mul, ml_blank_decode, Gf2Matrix, RowOp, RowOpLog};
pub use packet::{
    block_to_message, deframe_packet, encode_block, frame_packet, Frame, PacketBlock,
};
pub use pattern::ErasurePattern;
pub use recursive::{
    blank_decode_rm, count_known_v, decode_word, select_xor_mask, DecodeOptions, WordDecode,
    XorMask,
};
pub use schedule::{
    build_schedule, op_count, replay, replay_with_message, Codec, FallbackPolicy, Op, OpCount,
    Schedule, ScheduleBuilder,
};
pub use sim::{needed_symbols, run_curve, Algorithm, OverheadStats, TrialConfig};
