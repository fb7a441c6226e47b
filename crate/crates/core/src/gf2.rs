//! Bit-packed GF(2) matrices and Gaussian elimination.
//!
//! Rows are packed into `u64` words, least significant bit first, so column
//! `c` of a row lives in word `c / 64` at bit `c % 64`. Elimination never
//! touches the caller's matrix: [`ge_reduce`] returns a [`RowOpLog`] that can
//! be replayed on the original matrix, or on any matrix with the same row
//! count (an identity, a right-hand side, ...). That log is what turns a
//! pattern-only elimination into a reusable packet schedule.

use crate::error::{Error, Result};
use crate::pattern::ErasurePattern;
use crate::schedule::{Schedule, ScheduleBuilder};

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Dense bit-packed matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    /// All-zero `rows x cols` matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            bits: vec![0; rows * stride],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from boolean rows; all rows must have the same length.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            for (j, &b) in row.iter().enumerate() {
                if b {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        (self.bits[row * self.stride + col / WORD] >> (col % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        let word = &mut self.bits[row * self.stride + col / WORD];
        let mask = 1u64 << (col % WORD);
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    /// Packed words of one row.
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.stride..(row + 1) * self.stride]
    }

    /// Row as booleans.
    pub fn row(&self, row: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// Column as booleans.
    pub fn column(&self, col: usize) -> Vec<bool> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Indices of the set bits in `row`, ascending.
    pub fn row_ones(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(row)
            .iter()
            .enumerate()
            .flat_map(|(w, &word)| BitIter(word).map(move |b| w * WORD + b))
    }

    pub fn is_zero_row(&self, row: usize) -> bool {
        self.row_words(row).iter().all(|&w| w == 0)
    }

    /// `row[dst] ^= row[src]`.
    pub fn add_row(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        let (s, d) = (src * self.stride, dst * self.stride);
        if src < dst {
            let (head, tail) = self.bits.split_at_mut(d);
            xor_words(&mut tail[..self.stride], &head[s..s + self.stride]);
        } else {
            let (head, tail) = self.bits.split_at_mut(s);
            xor_words(&mut head[d..d + self.stride], &tail[..self.stride]);
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.bits.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_ones(r) {
                out.set(c, r, true);
            }
        }
        out
    }

    /// Replays a row-operation log recorded on a matrix with the same row count.
    pub fn apply_log(&mut self, log: &RowOpLog) -> Result<()> {
        if log.rows != self.rows {
            return Err(Error::DimensionMismatch {
                expected: log.rows,
                actual: self.rows,
            });
        }
        for op in &log.ops {
            match *op {
                RowOp::AddRow { src, dst } => self.add_row(src, dst),
                RowOp::SwapRow { a, b } => self.swap_rows(a, b),
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        ge_reduce(self).rank
    }

    /// True when the matrix is in reduced row-echelon form.
    pub fn is_rref(&self) -> bool {
        let mut last_pivot: Option<usize> = None;
        let mut seen_zero = false;
        for r in 0..self.rows {
            let Some(p) = self.row_ones(r).next() else {
                seen_zero = true;
                continue;
            };
            if seen_zero || last_pivot.is_some_and(|lp| p <= lp) {
                return false;
            }
            if (0..self.rows).any(|o| o != r && self.get(o, p)) {
                return false;
            }
            last_pivot = Some(p);
        }
        true
    }
}

impl std::fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

#[inline]
fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// GF(2) product `M x`.
pub fn mat_vec_mul(m: &Gf2Matrix, x: &[bool]) -> Result<Vec<bool>> {
    if x.len() != m.cols {
        return Err(Error::DimensionMismatch {
            expected: m.cols,
            actual: x.len(),
        });
    }
    Ok((0..m.rows)
        .map(|r| m.row_ones(r).fold(false, |acc, c| acc ^ x[c]))
        .collect())
}

/// One elementary row operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowOp {
    /// `row[dst] ^= row[src]`
    AddRow {
        src: usize,
        dst: usize,
    },
    SwapRow {
        a: usize,
        b: usize,
    },
}

/// Row operations that bring a matrix to reduced row-echelon form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowOpLog {
    pub ops: Vec<RowOp>,
    /// Pivot column of echelon row `i`, in elimination order.
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
    rows: usize,
}

impl RowOpLog {
    /// Row count of the matrix the log was recorded on.
    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// Gauss-Jordan elimination. Pivot: leftmost column with a nonzero entry in
/// an unused row, topmost such row. The input matrix is left untouched.
pub fn ge_reduce(m: &Gf2Matrix) -> RowOpLog {
    let mut a = m.clone();
    let mut ops = Vec::new();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&i| a.get(i, col)) else {
            continue;
        };
        if p != row {
            a.swap_rows(p, row);
            ops.push(RowOp::SwapRow { a: p, b: row });
        }
        for i in 0..a.rows {
            if i != row && a.get(i, col) {
                a.add_row(row, i);
                ops.push(RowOp::AddRow { src: row, dst: i });
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    RowOpLog {
        ops,
        pivot_cols,
        rank: row,
        rows: m.rows,
    }
}

/// Incremental rank of a growing set of GF(2) vectors.
#[derive(Debug, Clone)]
pub struct RankTracker {
    width: usize,
    basis: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl RankTracker {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            basis: vec![None; width],
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.width
    }

    /// Adds a packed vector; returns whether it increased the rank.
    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        debug_assert_eq!(v.len(), words_for(self.width));
        loop {
            let Some((w, &word)) = v.iter().enumerate().find(|(_, &x)| x != 0) else {
                return false;
            };
            let p = w * WORD + word.trailing_zeros() as usize;
            match &self.basis[p] {
                Some(b) => xor_words(&mut v, b),
                None => {
                    self.basis[p] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
    }
}

/// Blank maximum-likelihood decoding of the linear code generated by `g`.
///
/// Row-reduces the transposed generator restricted to the known columns
/// (one equation per received symbol) and turns the log into a schedule:
/// every message slot becomes a XOR of received slots, then every erased
/// position is re-encoded from the message slots through the columns of `g`.
pub fn ml_blank_decode(g: &Gf2Matrix, pattern: &ErasurePattern) -> Result<Schedule> {
    if pattern.len() != g.cols() {
        return Err(Error::DimensionMismatch {
            expected: g.cols(),
            actual: pattern.len(),
        });
    }
    let mut b = ScheduleBuilder::new(pattern, true);
    ml_solve_into(g, &mut b)?;
    Ok(b.finish())
}

pub(crate) fn ml_solve_into(g: &Gf2Matrix, b: &mut ScheduleBuilder) -> Result<()> {
    let k = g.rows();
    let n = g.cols();
    let known: Vec<usize> = (0..n).filter(|&p| b.is_known(p as u32)).collect();
    let equations = g.select_columns(&known).transpose();
    let log = ge_reduce(&equations);
    if log.rank < k {
        return Err(Error::RankDeficient {
            rank: log.rank,
            needed: k,
        });
    }
    if !b.recording() {
        return Ok(());
    }
    let mut combos = Gf2Matrix::identity(known.len());
    combos.apply_log(&log)?;
    let first = b.alloc(k);
    let message: Vec<u32> = (first..first + k as u32).collect();
    for (i, &slot) in message.iter().enumerate() {
        debug_assert_eq!(log.pivot_cols[i], i);
        b.combine(slot, combos.row_ones(i).map(|e| known[e] as u32));
    }
    b.mark_decode_end();
    for p in 0..n as u32 {
        if !b.is_known(p) {
            let col = g.column(p as usize);
            b.combine(p, (0..k).filter(|&i| col[i]).map(|i| message[i]));
        }
    }
    b.set_message_slots(message);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_times_vector() {
        let x = [true, false, true, true];
        assert_eq!(mat_vec_mul(&Gf2Matrix::identity(4), &x).unwrap(), x);
    }

    #[test]
    fn zero_matrix_times_vector() {
        let m = Gf2Matrix::zeros(3, 5);
        assert_eq!(
            mat_vec_mul(&m, &[true; 5]).unwrap(),
            vec![false, false, false]
        );
    }

    #[test]
    fn mat_vec_dimension_mismatch() {
        let m = Gf2Matrix::zeros(3, 5);
        assert_eq!(
            mat_vec_mul(&m, &[true; 4]),
            Err(Error::DimensionMismatch {
                expected: 5,
                actual: 4
            })
        );
    }

    #[test]
    fn identity_has_full_rank_and_no_additions() {
        let log = ge_reduce(&Gf2Matrix::identity(6));
        assert_eq!(log.rank, 6);
        assert_eq!(log.pivot_cols, (0..6).collect::<Vec<_>>());
        assert!(log.ops.is_empty());
    }

    #[test]
    fn equal_rows_have_rank_one() {
        let row = [true, false, true, true, false];
        let m = Gf2Matrix::from_rows(&[row, row]).unwrap();
        let log = ge_reduce(&m);
        assert_eq!(log.rank, 1);
        let mut reduced = m.clone();
        reduced.apply_log(&log).unwrap();
        assert!(reduced.is_rref());
        assert!(reduced.is_zero_row(1));
    }

    #[test]
    fn zero_matrix_rank_zero() {
        let log = ge_reduce(&Gf2Matrix::zeros(4, 70));
        assert_eq!(log.rank, 0);
        assert!(log.ops.is_empty());
    }

    #[test]
    fn wide_rows_cross_word_boundary() {
        let mut m = Gf2Matrix::zeros(3, 130);
        m.set(0, 129, true);
        m.set(1, 64, true);
        m.set(1, 129, true);
        m.set(2, 0, true);
        let log = ge_reduce(&m);
        assert_eq!(log.rank, 3);
        assert_eq!(log.pivot_cols, vec![0, 64, 129]);
        let mut r = m.clone();
        r.apply_log(&log).unwrap();
        assert!(r.is_rref());
        assert_eq!(r.row_ones(1).collect::<Vec<_>>(), vec![64]);
    }

    #[test]
    fn input_not_mutated() {
        let m = Gf2Matrix::from_rows(&[[true, true], [true, false]]).unwrap();
        let before = m.clone();
        let _ = ge_reduce(&m);
        assert_eq!(m, before);
    }

    #[test]
    fn rank_tracker_matches_ge() {
        let rows = [
            [true, true, false, false],
            [false, true, true, false],
            [true, false, true, false],
            [false, false, false, true],
        ];
        let mut t = RankTracker::new(4);
        let inserted: Vec<bool> = rows
            .iter()
            .map(|r| {
                let mut w = 0u64;
                for (i, &b) in r.iter().enumerate() {
                    w |= (b as u64) << i;
                }
                t.insert(vec![w])
            })
            .collect();
        assert_eq!(inserted, vec![true, true, false, true]);
        assert_eq!(t.rank(), Gf2Matrix::from_rows(&rows).unwrap().rank());
    }

    #[test]
    fn log_applies_only_to_matching_row_count() {
        let log = ge_reduce(&Gf2Matrix::identity(3));
        assert!(Gf2Matrix::zeros(4, 4).apply_log(&log).is_err());
    }
}
