//! Monte Carlo overhead and failure-rate estimation on the packet erasure
//! channel.
//!
//! Each trial draws a uniformly random arrival order of the `n` packets and
//! records how long a prefix of it the decoder needs. Trial `i` seeds its own
//! generator from `seed ^ i`, so results do not depend on scheduling and all
//! algorithms see the same arrival orders for the same seed.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::code::CodeParams;
use crate::error::{Error, Result};
use crate::gf2::RankTracker;
use crate::pattern::ErasurePattern;
use crate::recursive::DecodeOptions;
use crate::schedule::{Codec, FallbackPolicy};

/// Decoder variants compared by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Classical,
    PermOnly,
    PartialOnly,
    Full,
    FullGeHybrid,
    Ml,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Classical,
        Algorithm::PermOnly,
        Algorithm::PartialOnly,
        Algorithm::Full,
        Algorithm::FullGeHybrid,
        Algorithm::Ml,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Classical => "classical",
            Algorithm::PermOnly => "perm_only",
            Algorithm::PartialOnly => "partial_only",
            Algorithm::Full => "full",
            Algorithm::FullGeHybrid => "full_ge_hybrid",
            Algorithm::Ml => "ml",
        }
    }

    pub fn decode_options(&self) -> DecodeOptions {
        match self {
            Algorithm::Classical => DecodeOptions::classical(),
            Algorithm::PermOnly => DecodeOptions::perm_only(),
            Algorithm::PartialOnly => DecodeOptions::partial_only(),
            Algorithm::Full | Algorithm::FullGeHybrid | Algorithm::Ml => DecodeOptions::full(),
        }
    }

    pub fn policy(&self) -> FallbackPolicy {
        match self {
            Algorithm::FullGeHybrid => FallbackPolicy::GeAfterPartial,
            Algorithm::Ml => FallbackPolicy::GeOnly,
            _ => FallbackPolicy::None,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "algorithm",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    pub params: CodeParams,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub seed: u64,
    /// Largest number of extra symbols reported in the failure curve.
    pub max_extra: usize,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        let room = self.params.n() - self.params.k();
        if self.max_extra > room {
            return Err(Error::InvalidConfig(format!(
                "max_extra {} exceeds n-k = {room}",
                self.max_extra
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadStats {
    /// Mean of `(needed - k) / k`, in percent.
    pub mean_overhead_pct: f64,
    /// Mean of `needed - k`.
    pub mean_extra_symbols: f64,
    /// `(e, fraction of trials needing more than k + e symbols)`.
    pub failure_rates: Vec<(usize, f64)>,
    pub trials: usize,
}

/// Uniformly random arrival order for trial `trial`.
pub fn arrival_order(n: usize, seed: u64, trial: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ trial);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order
}

/// Reusable per-code state for computing needed symbol counts.
#[derive(Debug)]
pub struct Simulator {
    codec: Codec,
    columns: Vec<Vec<u64>>,
}

impl Simulator {
    pub fn new(params: CodeParams) -> Self {
        let codec = Codec::new(params);
        let gt = codec.generator().transpose();
        let columns = (0..params.n()).map(|j| gt.row_words(j).to_vec()).collect();
        Self { codec, columns }
    }

    pub fn params(&self) -> &CodeParams {
        self.codec.params()
    }

    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    /// Whether `algorithm` recovers the whole codeword from `pattern`.
    pub fn succeeds(&self, algorithm: Algorithm, pattern: &ErasurePattern) -> Result<bool> {
        if algorithm == Algorithm::Ml {
            if pattern.len() != self.params().n() {
                return Err(Error::DimensionMismatch {
                    expected: self.params().n(),
                    actual: pattern.len(),
                });
            }
            let mut rank = RankTracker::new(self.params().k());
            for p in pattern.known_positions() {
                rank.insert(self.columns[p].clone());
            }
            return Ok(rank.is_full());
        }
        self.codec
            .decodable(pattern, &algorithm.decode_options(), algorithm.policy())
    }

    /// Smallest prefix length of `order` that `algorithm` decodes, scanning
    /// upward from `k`; `n + 1` if even the full set fails.
    pub fn needed_symbols(&self, algorithm: Algorithm, order: &[usize]) -> Result<usize> {
        let (k, n) = (self.params().k(), self.params().n());
        check_order(order, n)?;
        if algorithm == Algorithm::Ml {
            let mut rank = RankTracker::new(k);
            for (i, &p) in order.iter().enumerate() {
                rank.insert(self.columns[p].clone());
                if rank.is_full() {
                    return Ok(i + 1);
                }
            }
            return Ok(n + 1);
        }
        let mut pattern = ErasurePattern::from_positions(n, order[..k].iter().copied());
        for len in k..=n {
            if len > k {
                pattern.set_known(order[len - 1]);
            }
            if self.succeeds(algorithm, &pattern)? {
                return Ok(len);
            }
        }
        Ok(n + 1)
    }

    /// Needed symbol counts for trials `0..config.trials`, in trial order.
    pub fn needed_per_trial(&self, config: &TrialConfig) -> Result<Vec<usize>> {
        config.validate()?;
        let n = self.params().n();
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| self.needed_symbols(config.algorithm, &arrival_order(n, config.seed, i)))
            .collect()
    }
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: order.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in order {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidConfig(
                "arrival order is not a permutation".into(),
            ));
        }
    }
    Ok(())
}

pub fn needed_symbols(params: &CodeParams, algorithm: Algorithm, order: &[usize]) -> Result<usize> {
    Simulator::new(*params).needed_symbols(algorithm, order)
}

/// Summarises per-trial needed counts into a failure curve and mean overhead.
pub fn summarize(params: &CodeParams, needed: &[usize], max_extra: usize) -> OverheadStats {
    let k = params.k();
    let trials = needed.len();
    let extra_sum: usize = needed.iter().map(|&x| x - k).sum();
    let mean_extra_symbols = extra_sum as f64 / trials as f64;
    let failure_rates = (0..=max_extra)
        .map(|e| {
            let fails = needed.iter().filter(|&&x| x > k + e).count();
            (e, fails as f64 / trials as f64)
        })
        .collect();
    OverheadStats {
        mean_overhead_pct: 100.0 * mean_extra_symbols / k as f64,
        mean_extra_symbols,
        failure_rates,
        trials,
    }
}

pub fn run_curve(config: &TrialConfig) -> Result<OverheadStats> {
    let sim = Simulator::new(config.params);
    let needed = sim.needed_per_trial(config)?;
    Ok(summarize(&config.params, &needed, config.max_extra))
}

/// Writes the curve as CSV: `code,algorithm,extra,failure_rate,trials,seed`,
/// one row per extra-symbol count, then an `overhead_pct` summary row whose
/// value sits in the `failure_rate` column.
pub fn write_csv<W: Write>(out: W, config: &TrialConfig, stats: &OverheadStats) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidConfig(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "code",
        "algorithm",
        "extra",
        "failure_rate",
        "trials",
        "seed",
    ])
    .map_err(io)?;
    let code = config.params.to_string();
    let trials = stats.trials.to_string();
    let seed = config.seed.to_string();
    for &(e, rate) in &stats.failure_rates {
        w.write_record([
            code.as_str(),
            config.algorithm.name(),
            &e.to_string(),
            &format!("{rate:.6}"),
            &trials,
            &seed,
        ])
        .map_err(io)?;
    }
    w.write_record([
        code.as_str(),
        config.algorithm.name(),
        "overhead_pct",
        &format!("{:.6}", stats.mean_overhead_pct),
        &trials,
        &seed,
    ])
    .map_err(io)?;
    w.flush()
        .map_err(|e| Error::InvalidConfig(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::code_params;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("gauss".parse::<Algorithm>().is_err());
    }

    #[test]
    fn identity_code_needs_everything() {
        let p = code_params(4, 4).unwrap();
        let sim = Simulator::new(p);
        for a in Algorithm::ALL {
            for trial in 0..5 {
                let order = arrival_order(16, 9, trial);
                assert_eq!(sim.needed_symbols(a, &order).unwrap(), 16, "{a}");
            }
        }
    }

    #[test]
    fn identity_order_ml() {
        let p = code_params(1, 3).unwrap();
        let sim = Simulator::new(p);
        let order: Vec<usize> = (0..8).collect();
        let needed = sim.needed_symbols(Algorithm::Ml, &order).unwrap();
        let rank = crate::schedule::Codec::new(p)
            .generator()
            .select_columns(&[0, 1, 2, 3])
            .rank();
        assert!(needed >= p.k());
        assert_eq!(needed == p.k(), rank == p.k());
    }

    #[test]
    fn rejects_bad_orders_and_configs() {
        let p = code_params(1, 3).unwrap();
        let sim = Simulator::new(p);
        assert!(sim.needed_symbols(Algorithm::Ml, &[0, 1, 2]).is_err());
        assert!(sim
            .needed_symbols(Algorithm::Full, &[0, 1, 2, 3, 4, 5, 6, 6])
            .is_err());
        let cfg = TrialConfig {
            params: p,
            algorithm: Algorithm::Ml,
            trials: 0,
            seed: 1,
            max_extra: 0,
        };
        assert!(run_curve(&cfg).is_err());
        let cfg = TrialConfig {
            trials: 1,
            max_extra: 5,
            ..cfg
        };
        assert!(run_curve(&cfg).is_err());
    }

    #[test]
    fn full_reception_never_fails_ml() {
        let p = code_params(2, 5).unwrap();
        let cfg = TrialConfig {
            params: p,
            algorithm: Algorithm::Ml,
            trials: 200,
            seed: 3,
            max_extra: p.n() - p.k(),
        };
        let stats = run_curve(&cfg).unwrap();
        assert_eq!(stats.failure_rates.last().unwrap().1, 0.0);
        for w in stats.failure_rates.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
    }

    #[test]
    fn csv_layout() {
        let p = code_params(1, 3).unwrap();
        let cfg = TrialConfig {
            params: p,
            algorithm: Algorithm::Full,
            trials: 10,
            seed: 7,
            max_extra: 2,
        };
        let stats = run_curve(&cfg).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &cfg, &stats).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "code,algorithm,extra,failure_rate,trials,seed");
        assert_eq!(lines.len(), 1 + 3 + 1);
        assert!(lines[1].starts_with("\"RM(1,3)\",full,0,"));
        assert!(lines[4].contains(",overhead_pct,"));
    }
}
