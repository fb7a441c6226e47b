//! Reed-Muller code parameters and the Plotkin `(u | u+v)` encoder.
//!
//! Position `i` of a length-`2^m` codeword is the binary expansion of `i`;
//! the left Plotkin half holds the indices whose most significant bit is 0.
//! Messages are laid out as `(m_u | m_v)` at every recursion level, with three
//! leaves: repetition (`r = 0`), identity (`r = m`) and the single parity
//! check code (`r = m - 1`), which is encoded systematically with the parity
//! bit in the last position.
//!
//! Every routine is generic over [`Symbol`], so the same code encodes single
//! bits, one byte column of a packet block, or whole 64-bit lanes.

use std::ops::{BitXor, BitXorAssign};

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::schedule::{ScheduleBuilder, Slot};

pub const MAX_M: u32 = 16;

/// A value of a binary linear code coordinate (XOR is addition).
pub trait Symbol: Copy + Default + PartialEq + BitXor<Output = Self> + BitXorAssign {}

impl<T> Symbol for T where T: Copy + Default + PartialEq + BitXor<Output = T> + BitXorAssign {}

/// The `(r, m, k, n)` identity of RM(r, m).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    r: u32,
    m: u32,
    k: usize,
    n: usize,
}

/// Structural role of a code in the Plotkin recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Shape {
    Repetition,
    Identity,
    ParityCheck,
    Plotkin,
}

/// Builds RM(r, m) parameters.
pub fn code_params(r: u32, m: u32) -> Result<CodeParams> {
    if !(1..=MAX_M).contains(&m) || r > m {
        return Err(Error::InvalidParams { r, m });
    }
    Ok(CodeParams {
        r,
        m,
        k: dimension(r, m),
        n: 1 << m,
    })
}

fn dimension(r: u32, m: u32) -> usize {
    let mut binom = 1usize;
    let mut k = 1usize;
    for i in 1..=r as usize {
        binom = binom * (m as usize + 1 - i) / i;
        k += binom;
    }
    k
}

impl CodeParams {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn shape(&self) -> Shape {
        if self.r == 0 {
            Shape::Repetition
        } else if self.r == self.m {
            Shape::Identity
        } else if self.r + 1 == self.m {
            Shape::ParityCheck
        } else {
            Shape::Plotkin
        }
    }

    /// Code of the left half `u`: RM(r, m-1).
    pub(crate) fn u_code(&self) -> CodeParams {
        CodeParams {
            r: self.r,
            m: self.m - 1,
            k: dimension(self.r, self.m - 1),
            n: self.n / 2,
        }
    }

    /// Code of the difference `v`: RM(r-1, m-1).
    pub(crate) fn v_code(&self) -> CodeParams {
        CodeParams {
            r: self.r - 1,
            m: self.m - 1,
            k: dimension(self.r - 1, self.m - 1),
            n: self.n / 2,
        }
    }

    /// The dual code RM(m-r-1, m), or `None` for the identity code.
    pub fn dual(&self) -> Option<CodeParams> {
        (self.r < self.m).then(|| CodeParams {
            r: self.m - self.r - 1,
            m: self.m,
            k: self.n - self.k,
            n: self.n,
        })
    }

    /// Code rate `k / n`.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

impl std::fmt::Display for CodeParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RM({},{})", self.r, self.m)
    }
}

/// Encodes a `k`-symbol message into an `n`-symbol codeword.
pub fn plotkin_encode<T: Symbol>(message: &[T], params: &CodeParams) -> Result<Vec<T>> {
    if message.len() != params.k {
        return Err(Error::DimensionMismatch {
            expected: params.k,
            actual: message.len(),
        });
    }
    let mut out = vec![T::default(); params.n];
    encode_into(params, message, &mut out);
    Ok(out)
}

fn encode_into<T: Symbol>(params: &CodeParams, msg: &[T], out: &mut [T]) {
    match params.shape() {
        Shape::Repetition => out.fill(msg[0]),
        Shape::Identity => out.copy_from_slice(msg),
        Shape::ParityCheck => {
            let (data, parity) = out.split_at_mut(params.n - 1);
            data.copy_from_slice(msg);
            parity[0] = msg.iter().fold(T::default(), |acc, &s| acc ^ s);
        }
        Shape::Plotkin => {
            let (uc, vc) = (params.u_code(), params.v_code());
            let (mu, mv) = msg.split_at(uc.k);
            let (left, right) = out.split_at_mut(params.n / 2);
            encode_into(&uc, mu, left);
            encode_into(&vc, mv, right);
            for (r, &l) in right.iter_mut().zip(left.iter()) {
                *r ^= l;
            }
        }
    }
}

/// Recovers the message from a complete codeword; the inverse of [`plotkin_encode`].
///
/// The input is assumed to be a codeword; no validity check is performed.
pub fn codeword_to_message<T: Symbol>(codeword: &[T], params: &CodeParams) -> Result<Vec<T>> {
    if codeword.len() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            actual: codeword.len(),
        });
    }
    let mut out = Vec::with_capacity(params.k);
    extract_into(params, codeword, &mut out);
    Ok(out)
}

fn extract_into<T: Symbol>(params: &CodeParams, cw: &[T], out: &mut Vec<T>) {
    match params.shape() {
        Shape::Repetition => out.push(cw[0]),
        Shape::Identity => out.extend_from_slice(cw),
        Shape::ParityCheck => out.extend_from_slice(&cw[..params.n - 1]),
        Shape::Plotkin => {
            let (left, right) = cw.split_at(params.n / 2);
            let v: Vec<T> = left.iter().zip(right).map(|(&a, &b)| a ^ b).collect();
            extract_into(&params.u_code(), left, out);
            extract_into(&params.v_code(), &v, out);
        }
    }
}

/// `k x n` generator matrix whose row `i` is the encoding of the unit message `e_i`.
pub fn generator_matrix(params: &CodeParams) -> Gf2Matrix {
    let mut g = Gf2Matrix::zeros(params.k, params.n);
    let mut unit = vec![false; params.k];
    for i in 0..params.k {
        unit[i] = true;
        let row = plotkin_encode(&unit, params).expect("message length is k");
        unit[i] = false;
        for (j, &b) in row.iter().enumerate() {
            if b {
                g.set(i, j, true);
            }
        }
    }
    g
}

/// `(n-k) x n` parity-check matrix: the generator of the dual code.
pub fn parity_check_matrix(params: &CodeParams) -> Gf2Matrix {
    match params.dual() {
        Some(d) => generator_matrix(&d),
        None => Gf2Matrix::zeros(0, params.n),
    }
}

/// Emits ops computing a codeword from message slots. Returned references may
/// alias (a repetition leaf points every position at one slot).
pub(crate) fn emit_encode(b: &mut ScheduleBuilder, params: &CodeParams, msg: &[Slot]) -> Vec<Slot> {
    debug_assert_eq!(msg.len(), params.k);
    match params.shape() {
        Shape::Repetition => vec![msg[0]; params.n],
        Shape::Identity => msg.to_vec(),
        Shape::ParityCheck => {
            let parity = b.alloc(1);
            b.combine(parity, msg.iter().copied());
            let mut cw = msg.to_vec();
            cw.push(parity);
            cw
        }
        Shape::Plotkin => {
            let (uc, vc) = (params.u_code(), params.v_code());
            let (mu, mv) = msg.split_at(uc.k);
            let mut cw = emit_encode(b, &uc, mu);
            let v = emit_encode(b, &vc, mv);
            let first = b.alloc(params.n / 2);
            for (j, &vj) in v.iter().enumerate() {
                let dst = first + j as Slot;
                b.combine(dst, [cw[j], vj]);
                cw.push(dst);
            }
            cw
        }
    }
}

/// Emits ops extracting the message from fully known codeword slots.
pub(crate) fn emit_extract(b: &mut ScheduleBuilder, params: &CodeParams, cw: &[Slot]) -> Vec<Slot> {
    debug_assert_eq!(cw.len(), params.n);
    match params.shape() {
        Shape::Repetition => vec![cw[0]],
        Shape::Identity => cw.to_vec(),
        Shape::ParityCheck => cw[..params.n - 1].to_vec(),
        Shape::Plotkin => {
            let h = params.n / 2;
            let first = b.alloc(h);
            let v: Vec<Slot> = (0..h)
                .map(|j| {
                    let dst = first + j as Slot;
                    b.combine(dst, [cw[j], cw[h + j]]);
                    dst
                })
                .collect();
            let mut msg = emit_extract(b, &params.u_code(), &cw[..h]);
            msg.extend(emit_extract(b, &params.v_code(), &v));
            msg
        }
    }
}
