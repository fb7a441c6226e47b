//! Recursive Plotkin erasure decoding with XOR-mask permutations and
//! partial information passing.
//!
//! A codeword `a = (u | u+v)` of RM(r, m) is split into its halves. Position
//! `j` of `v` is computable when both `a[j]` and `a[n/2 + j]` are known, so
//! the decoder works on `v` first, pushes what it learns back into `a`, then
//! decodes `u`.
//!
//! Before splitting, the word may be re-indexed by an automorphism that fixes
//! the left half: `a'[n/2 + j] = a[n/2 + (j ^ t)]`. These are the affine maps
//! whose linear part is the identity on the low `m-1` coordinates with a free
//! last column `(1, t)`. The offset `t` is chosen to maximise the number of
//! known `v` positions. Instead of permuting symbols the decoder simply pairs
//! `left[j]` with `right[j ^ t]`.
//!
//! The decoder never reads symbol values. It only tracks which schedule
//! slots are known and records the copy/XOR ops that make them known, so the
//! same decisions apply to every byte column of a packet block.

use crate::code::{CodeParams, Shape, Symbol};
use crate::error::{Error, Result};
use crate::pattern::ErasurePattern;
use crate::schedule::{ScheduleBuilder, Slot};

/// Re-indexing `j -> j ^ t` of the right Plotkin half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct XorMask {
    t: usize,
    half: usize,
}

impl XorMask {
    pub fn new(t: usize, half: usize) -> Result<Self> {
        if !half.is_power_of_two() || t >= half {
            return Err(Error::InvalidConfig(format!(
                "xor offset {t} outside half length {half}"
            )));
        }
        Ok(Self { t, half })
    }

    pub fn identity(half: usize) -> Self {
        Self { t: 0, half }
    }

    pub fn offset(&self) -> usize {
        self.t
    }

    /// Right-half index paired with left-half index `j`.
    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        j ^ self.t
    }

    /// Re-indexes a full codeword: left half fixed, `right'[j] = right[j ^ t]`.
    pub fn permute<T: Copy>(&self, word: &[T]) -> Vec<T> {
        assert_eq!(word.len(), 2 * self.half);
        let (left, right) = word.split_at(self.half);
        left.iter()
            .copied()
            .chain((0..self.half).map(|j| right[self.apply(j)]))
            .collect()
    }
}

/// Which enhancements the recursive decoder uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodeOptions {
    pub use_permutations: bool,
    pub use_partial: bool,
    /// Cap on `v`/`u` sweeps per Plotkin level when passing partial results.
    pub max_sweeps: u32,
}

impl DecodeOptions {
    pub const DEFAULT_MAX_SWEEPS: u32 = 4;

    pub fn classical() -> Self {
        Self::with(false, false)
    }

    pub fn perm_only() -> Self {
        Self::with(true, false)
    }

    pub fn partial_only() -> Self {
        Self::with(false, true)
    }

    pub fn full() -> Self {
        Self::with(true, true)
    }

    fn with(use_permutations: bool, use_partial: bool) -> Self {
        Self {
            use_permutations,
            use_partial,
            max_sweeps: Self::DEFAULT_MAX_SWEEPS,
        }
    }
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self::full()
    }
}

/// Number of `v` positions computable under offset `t`:
/// `|{ j : left[j] and right[j ^ t] }|`.
pub fn count_known_v(left: &[bool], right: &[bool], t: usize) -> usize {
    debug_assert_eq!(left.len(), right.len());
    debug_assert!(t < left.len());
    left.iter()
        .enumerate()
        .filter(|&(j, &l)| l && right[j ^ t])
        .count()
}

/// Scans all `n/2` offsets and returns the smallest one maximising
/// [`count_known_v`], with its count.
pub fn select_xor_mask(left: &[bool], right: &[bool]) -> (XorMask, usize) {
    let half = left.len();
    let mut best = (0, count_known_v(left, right, 0));
    if best.1 == half {
        return (XorMask::identity(half), best.1);
    }
    for t in 1..half {
        let c = count_known_v(left, right, t);
        if c > best.1 {
            best = (t, c);
            if c == half {
                break;
            }
        }
    }
    (XorMask { t: best.0, half }, best.1)
}

/// Runs the recursive decoder over codeword slots `0..n` of `builder`,
/// appending ops, and returns the improved mask of the codeword positions.
pub fn blank_decode_rm(
    builder: &mut ScheduleBuilder,
    params: &CodeParams,
    opts: &DecodeOptions,
) -> Result<ErasurePattern> {
    if builder.n() != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            actual: builder.n(),
        });
    }
    if opts.max_sweeps == 0 {
        return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
    }
    let slots: Vec<Slot> = (0..params.n() as Slot).collect();
    decode_slots(builder, params, opts, &slots);
    Ok(builder.codeword_mask())
}

pub(crate) fn decode_slots(
    b: &mut ScheduleBuilder,
    params: &CodeParams,
    opts: &DecodeOptions,
    slots: &[Slot],
) -> bool {
    Recursion { b, opts: *opts }.decode(params, slots)
}

struct Recursion<'a> {
    b: &'a mut ScheduleBuilder,
    opts: DecodeOptions,
}

/// The `v` slots of one Plotkin level, for one pairing offset.
struct Frame {
    mask: XorMask,
    v: Vec<Slot>,
}

impl Recursion<'_> {
    fn known(&self, s: Slot) -> bool {
        self.b.is_known(s)
    }

    fn known_count(&self, slots: &[Slot]) -> usize {
        slots.iter().filter(|&&s| self.known(s)).count()
    }

    fn decode(&mut self, params: &CodeParams, slots: &[Slot]) -> bool {
        if self.known_count(slots) == slots.len() {
            return true;
        }
        match params.shape() {
            Shape::Repetition => {
                let Some(&src) = slots.iter().find(|&&s| self.known(s)) else {
                    return false;
                };
                for &s in slots {
                    if !self.known(s) {
                        self.b.combine(s, [src]);
                    }
                }
                true
            }
            Shape::Identity => false,
            Shape::ParityCheck => {
                let mut erased = slots.iter().filter(|&&s| !self.known(s));
                let (Some(&missing), None) = (erased.next(), erased.next()) else {
                    return false;
                };
                let sources: Vec<Slot> = slots.iter().copied().filter(|&s| s != missing).collect();
                self.b.combine(missing, sources);
                true
            }
            Shape::Plotkin => self.plotkin(params, slots),
        }
    }

    fn plotkin(&mut self, params: &CodeParams, slots: &[Slot]) -> bool {
        let h = slots.len() / 2;
        let (left, right) = slots.split_at(h);
        let (u_code, v_code) = (params.u_code(), params.v_code());
        let sweeps = if self.opts.use_partial {
            self.opts.max_sweeps
        } else {
            1
        };
        let mut frame: Option<Frame> = None;
        for _ in 0..sweeps {
            self.b.stats.sweeps += 1;
            let before = self.known_count(slots);
            let f = self.next_frame(left, right, frame.take());
            for j in 0..h {
                let (l, r, d) = (left[j], right[f.mask.apply(j)], f.v[j]);
                if !self.known(d) && self.known(l) && self.known(r) {
                    self.b.combine(d, [l, r]);
                }
            }
            let v_ok = self.decode(&v_code, &f.v);
            if !v_ok && !self.opts.use_partial {
                return false;
            }
            self.fill_halves(left, right, &f);
            let u_ok = self.decode(&u_code, left);
            if !u_ok && !self.opts.use_partial {
                return false;
            }
            self.fill_halves(left, right, &f);
            let after = self.known_count(slots);
            if after == slots.len() {
                return true;
            }
            if after == before {
                break;
            }
            frame = Some(f);
        }
        false
    }

    /// Keeps the current pairing unless another offset would know strictly
    /// more `v` positions than the current frame already does.
    fn next_frame(&mut self, left: &[Slot], right: &[Slot], current: Option<Frame>) -> Frame {
        let h = left.len();
        let mask = if self.opts.use_permutations {
            let lk: Vec<bool> = left.iter().map(|&s| self.known(s)).collect();
            let rk: Vec<bool> = right.iter().map(|&s| self.known(s)).collect();
            let (best, best_count) = select_xor_mask(&lk, &rk);
            self.b.stats.mask_searches += 1;
            self.b.stats.candidate_evaluations += (h * h) as u64;
            if let Some(f) = &current {
                let have = (0..h)
                    .filter(|&j| self.known(f.v[j]) || (lk[j] && rk[f.mask.apply(j)]))
                    .count();
                if have >= best_count {
                    return current.unwrap();
                }
            }
            best
        } else {
            XorMask::identity(h)
        };
        match current {
            Some(f) if f.mask == mask => f,
            _ => {
                let first = self.b.alloc(h);
                Frame {
                    mask,
                    v: (first..first + h as Slot).collect(),
                }
            }
        }
    }

    /// Completes each triple `(left[j], right[j^t], v[j])` with two known members
    /// and a known `v`.
    fn fill_halves(&mut self, left: &[Slot], right: &[Slot], f: &Frame) {
        for (j, &d) in f.v.iter().enumerate() {
            if !self.known(d) {
                continue;
            }
            let (l, r) = (left[j], right[f.mask.apply(j)]);
            match (self.known(l), self.known(r)) {
                (true, false) => self.b.combine(r, [l, d]),
                (false, true) => self.b.combine(l, [r, d]),
                _ => {}
            }
        }
    }
}

/// Result of decoding a single word of symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordDecode<T> {
    Complete(Vec<T>),
    /// Unrecovered positions hold `T::default()`.
    Partial {
        symbols: Vec<T>,
        mask: ErasurePattern,
    },
}

/// Decodes one received word by building a blank schedule and replaying it.
pub fn decode_word<T: Symbol>(
    received: &[T],
    pattern: &ErasurePattern,
    params: &CodeParams,
    opts: &DecodeOptions,
) -> Result<WordDecode<T>> {
    if received.len() != params.n() || pattern.len() != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            actual: if received.len() != params.n() {
                received.len()
            } else {
                pattern.len()
            },
        });
    }
    let mut b = ScheduleBuilder::new(pattern, true);
    let mask = blank_decode_rm(&mut b, params, opts)?;
    let schedule = b.finish();
    let (symbols, _) = schedule.replay_symbols(received)?;
    Ok(if mask.is_complete() {
        WordDecode::Complete(symbols)
    } else {
        WordDecode::Partial { symbols, mask }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{code_params, plotkin_encode};

    fn half_mask(h: usize, known: &[usize]) -> Vec<bool> {
        ErasurePattern::from_positions(h, known.iter().copied())
            .as_slice()
            .to_vec()
    }

    #[test]
    fn count_examples() {
        let all = vec![true; 8];
        for t in 0..8 {
            assert_eq!(count_known_v(&all, &all, t), 8);
        }
        // received (a0, x, x, x, x, a5, a6, a7)
        let l = half_mask(4, &[0]);
        let r = half_mask(4, &[1, 2, 3]);
        assert_eq!(count_known_v(&l, &r, 0), 0);
        assert_eq!(count_known_v(&l, &r, 2), 1);
        let l = half_mask(4, &[0, 1]);
        let r = half_mask(4, &[2, 3]);
        assert_eq!(count_known_v(&l, &r, 2), 2);
    }

    #[test]
    fn select_examples() {
        let all = vec![true; 8];
        assert_eq!(select_xor_mask(&all, &all), (XorMask::identity(8), 8));
        let l = half_mask(4, &[0]);
        let r = half_mask(4, &[1, 2, 3]);
        let (mask, count) = select_xor_mask(&l, &r);
        assert_eq!((mask.offset(), count), (1, 1));
        let none = vec![false; 4];
        let (mask, count) = select_xor_mask(&none, &r);
        assert_eq!((mask.offset(), count), (0, 0));
    }

    #[test]
    fn xor_mask_is_an_involution() {
        let word: Vec<u32> = (0..16).collect();
        for t in 0..8 {
            let m = XorMask::new(t, 8).unwrap();
            assert_eq!(m.permute(&m.permute(&word)), word);
        }
        assert!(XorMask::new(8, 8).is_err());
    }

    #[test]
    fn worked_pattern_needs_a_permutation() {
        let p = code_params(1, 3).unwrap();
        let pat = ErasurePattern::from_positions(8, [0, 5, 6, 7]);

        let mut b = ScheduleBuilder::new(&pat, true);
        let mask = blank_decode_rm(&mut b, &p, &DecodeOptions::classical()).unwrap();
        assert_eq!(mask, pat);

        let mut b = ScheduleBuilder::new(&pat, true);
        let mask = blank_decode_rm(&mut b, &p, &DecodeOptions::full()).unwrap();
        assert!(mask.is_complete());

        for x in 0..16u8 {
            let msg: Vec<bool> = (0..4).map(|i| (x >> i) & 1 == 1).collect();
            let cw = plotkin_encode(&msg, &p).unwrap();
            let received: Vec<bool> = (0..8).map(|i| pat.is_known(i) && cw[i]).collect();
            let got = decode_word(&received, &pat, &p, &DecodeOptions::full()).unwrap();
            assert_eq!(got, WordDecode::Complete(cw));
        }
    }

    #[test]
    fn all_known_is_a_no_op() {
        let p = code_params(2, 5).unwrap();
        let mut b = ScheduleBuilder::new(&ErasurePattern::all_known(32), true);
        let mask = blank_decode_rm(&mut b, &p, &DecodeOptions::full()).unwrap();
        assert!(mask.is_complete());
        assert!(b.finish().ops().is_empty());
    }

    #[test]
    fn repetition_fill_from_one_symbol() {
        let p = code_params(0, 4).unwrap();
        let pat = ErasurePattern::from_positions(16, [9]);
        let mut received = vec![false; 16];
        received[9] = true;
        let got = decode_word(&received, &pat, &p, &DecodeOptions::full()).unwrap();
        assert_eq!(got, WordDecode::Complete(vec![true; 16]));
    }

    #[test]
    fn zero_erasures_return_input() {
        let p = code_params(2, 4).unwrap();
        let msg: Vec<u8> = (0..11).map(|i| i * 17 + 3).collect();
        let cw = plotkin_encode(&msg, &p).unwrap();
        let got = decode_word(
            &cw,
            &ErasurePattern::all_known(16),
            &p,
            &DecodeOptions::full(),
        );
        assert_eq!(got.unwrap(), WordDecode::Complete(cw));
    }

    #[test]
    fn rejects_zero_sweeps() {
        let p = code_params(1, 3).unwrap();
        let mut b = ScheduleBuilder::new(&ErasurePattern::all_known(8), true);
        let opts = DecodeOptions {
            max_sweeps: 0,
            ..DecodeOptions::full()
        };
        assert!(blank_decode_rm(&mut b, &p, &opts).is_err());
    }
}
