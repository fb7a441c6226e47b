//! Test oracles that do not share code paths with the library decoders.
#![allow(dead_code)]

use rand::Rng;
use rmfec::{plotkin_encode, CodeParams, DecodeOptions, ErasurePattern, Symbol};

/// Rank of a boolean matrix by plain Gaussian elimination on `Vec<Vec<bool>>`.
pub fn naive_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][c]) else {
            continue;
        };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i][c] {
                let pivot = rows[rank].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Generator rows built by encoding unit messages with the bitwise encoder.
pub fn naive_generator(params: &CodeParams) -> Vec<Vec<bool>> {
    (0..params.k())
        .map(|i| {
            let mut e = vec![false; params.k()];
            e[i] = true;
            plotkin_encode(&e, params).unwrap()
        })
        .collect()
}

/// ML erasure decodability: the known columns of G have rank k.
pub fn naive_ml_decodable(params: &CodeParams, pattern: &ErasurePattern) -> bool {
    let g = naive_generator(params);
    let sub: Vec<Vec<bool>> = g
        .iter()
        .map(|row| pattern.known_positions().map(|p| row[p]).collect())
        .collect();
    pattern.known_count() >= params.k() && naive_rank(sub) == params.k()
}

pub fn random_message<R: Rng>(rng: &mut R, k: usize) -> Vec<bool> {
    (0..k).map(|_| rng.random()).collect()
}

pub fn random_bytes<R: Rng>(rng: &mut R, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random()).collect()
}

pub fn random_pattern<R: Rng>(rng: &mut R, n: usize, known: usize) -> ErasurePattern {
    let order = rand::seq::index::sample(rng, n, known);
    ErasurePattern::from_positions(n, order.iter())
}

/// Recursive decoder working directly on symbol values, with no schedule.
///
/// It follows the same decision rules as the blank decoder (v first, XOR
/// offset chosen by brute force with smallest-offset ties, frame kept unless
/// another offset knows strictly more, sweep cap, abort without partial
/// passing), so for identical patterns it must recover exactly the same
/// positions with exactly the same values.
pub fn reference_decode<T: Symbol>(
    word: &mut [Option<T>],
    r: u32,
    m: u32,
    opts: &DecodeOptions,
) -> bool {
    if word.iter().all(Option::is_some) {
        return true;
    }
    if r == 0 {
        let Some(value) = word.iter().flatten().next().copied() else {
            return false;
        };
        word.fill(Some(value));
        return true;
    }
    if r == m {
        return false;
    }
    if r + 1 == m {
        let erased: Vec<usize> = (0..word.len()).filter(|&i| word[i].is_none()).collect();
        if erased.len() != 1 {
            return false;
        }
        let sum = word.iter().flatten().fold(T::default(), |a, &b| a ^ b);
        word[erased[0]] = Some(sum);
        return true;
    }
    let h = word.len() / 2;
    let sweeps = if opts.use_partial { opts.max_sweeps } else { 1 };
    let mut frame: Option<(usize, Vec<Option<T>>)> = None;
    for _ in 0..sweeps {
        let before = word.iter().filter(|s| s.is_some()).count();
        let t = if opts.use_permutations {
            let counts: Vec<usize> = (0..h)
                .map(|t| {
                    (0..h)
                        .filter(|&j| word[j].is_some() && word[h + (j ^ t)].is_some())
                        .count()
                })
                .collect();
            let best_count = *counts.iter().max().unwrap();
            let best_t = counts.iter().position(|&c| c == best_count).unwrap();
            match &frame {
                Some((ft, v)) => {
                    let have = (0..h)
                        .filter(|&j| {
                            v[j].is_some() || (word[j].is_some() && word[h + (j ^ ft)].is_some())
                        })
                        .count();
                    if have >= best_count {
                        *ft
                    } else {
                        best_t
                    }
                }
                None => best_t,
            }
        } else {
            0
        };
        let mut v = match frame.take() {
            Some((ft, v)) if ft == t => v,
            _ => vec![None; h],
        };
        for j in 0..h {
            if v[j].is_none() {
                if let (Some(a), Some(b)) = (word[j], word[h + (j ^ t)]) {
                    v[j] = Some(a ^ b);
                }
            }
        }
        let v_ok = reference_decode(&mut v, r - 1, m - 1, opts);
        if !v_ok && !opts.use_partial {
            return false;
        }
        fill(word, &v, t);
        let u_ok = reference_decode(&mut word[..h], r, m - 1, opts);
        if !u_ok && !opts.use_partial {
            return false;
        }
        fill(word, &v, t);
        let after = word.iter().filter(|s| s.is_some()).count();
        if after == word.len() {
            return true;
        }
        if after == before {
            break;
        }
        frame = Some((t, v));
    }
    false
}

fn fill<T: Symbol>(word: &mut [Option<T>], v: &[Option<T>], t: usize) {
    let h = v.len();
    for j in 0..h {
        let Some(d) = v[j] else { continue };
        match (word[j], word[h + (j ^ t)]) {
            (Some(a), None) => word[h + (j ^ t)] = Some(a ^ d),
            (None, Some(b)) => word[j] = Some(b ^ d),
            _ => {}
        }
    }
}

/// Reference decode of a packet block: the byte-column decoder applied to
/// whole packets (XOR on `Vec<u8>`).
pub fn reference_decode_packets(
    slots: &[Option<Vec<u8>>],
    params: &CodeParams,
    opts: &DecodeOptions,
) -> (Vec<Option<Vec<u8>>>, bool) {
    let mut word: Vec<Option<Packet>> = slots.iter().map(|s| s.clone().map(Packet::from)).collect();
    let ok = reference_decode_boxed(&mut word, params.r(), params.m(), opts);
    (word.into_iter().map(|s| s.map(|p| p.0)).collect(), ok)
}

/// Packet decoding is byte-column decoding; run the symbol reference once
/// per column and reassemble.
fn reference_decode_boxed(
    word: &mut [Option<Packet>],
    r: u32,
    m: u32,
    opts: &DecodeOptions,
) -> bool {
    let z = word.iter().flatten().map(|p| p.0.len()).next().unwrap_or(0);
    let mask: Vec<bool> = word.iter().map(Option::is_some).collect();
    let mut ok = None;
    let mut columns: Vec<Vec<Option<u8>>> = Vec::with_capacity(z.max(1));
    for c in 0..z.max(1) {
        let mut col: Vec<Option<u8>> = word
            .iter()
            .map(|s| s.as_ref().map(|p| p.0.get(c).copied().unwrap_or(0)))
            .collect();
        let col_ok = reference_decode(&mut col, r, m, opts);
        assert!(ok.is_none_or(|o| o == col_ok));
        ok = Some(col_ok);
        columns.push(col);
    }
    for (i, slot) in word.iter_mut().enumerate() {
        if columns[0][i].is_some() && !mask[i] {
            *slot = Some(Packet((0..z).map(|c| columns[c][i].unwrap()).collect()));
        }
    }
    ok.unwrap()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Packet(pub Vec<u8>);

impl From<Vec<u8>> for Packet {
    fn from(v: Vec<u8>) -> Self {
        Packet(v)
    }
}
