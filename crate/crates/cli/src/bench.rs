use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmfec::schedule::PacketArena;
use rmfec::{encode_block, op_count, Algorithm, Codec, ErasurePattern, OpCount};

use crate::args::BenchArgs;
use crate::error::CliError;

#[derive(Debug, Default)]
struct Totals {
    successes: usize,
    build: Duration,
    replay: Duration,
    extract: Duration,
    decode_ops: OpCount,
    tail_ops: OpCount,
}

impl Totals {
    fn add_ops(acc: &mut OpCount, ops: OpCount) {
        acc.copies += ops.copies;
        acc.xors += ops.xors;
    }
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let params = args.code.params()?;
    if args.extra_pct.is_nan() || args.extra_pct < 0.0 {
        return Err(CliError::Usage("--extra-pct must be non-negative".into()));
    }
    let extra = (params.k() as f64 * args.extra_pct / 100.0).round() as usize;
    if extra > params.n() - params.k() {
        return Err(CliError::Usage(format!(
            "{extra} extra symbols exceed n-k = {}",
            params.n() - params.k()
        )));
    }
    let codec = Codec::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let z = args.z;
    let source: Vec<Vec<u8>> = (0..params.k())
        .map(|_| (0..z).map(|_| rng.random()).collect())
        .collect();
    let block = encode_block(&source, &params)?;
    let patterns: Vec<ErasurePattern> = (0..args.patterns)
        .map(|_| {
            let known = sample(&mut rng, params.n(), params.k() + extra);
            ErasurePattern::from_positions(params.n(), known.iter())
        })
        .collect();
    let received: Vec<_> = patterns
        .iter()
        .map(|p| block.erase_to(p))
        .collect::<Result<_, _>>()?;

    println!(
        "{params} z={z} extra={extra} ({:.1}% of k) patterns={} seed={}",
        args.extra_pct, args.patterns, args.seed
    );
    println!(
        "{:<15} {:>8} {:>9} {:>9} {:>10} {:>11} {:>11} {:>7} {:>9} {:>9} {:>9} {:>8}",
        "algorithm",
        "success",
        "build_ms",
        "replay_ms",
        "extract_ms",
        "replay_mbps",
        "decode_mbps",
        "blank%",
        "dec_copy",
        "dec_xor",
        "tail_ops",
        "xor_rel"
    );
    let mut first_xors: Option<usize> = None;
    for &algo in &args.algo {
        let t = measure(&codec, algo, &patterns, &received)?;
        let runs = patterns.len() as f64;
        let ms = |d: Duration| d.as_secs_f64() * 1e3 / runs;
        let bits = (t.successes * params.k() * z * 8) as f64;
        let mbps = |d: Duration| {
            if z == 0 || d.is_zero() {
                "n/a".to_string()
            } else {
                format!("{:.1}", bits / d.as_secs_f64() / 1e6)
            }
        };
        let decode_time = t.build + t.replay;
        let share =
            100.0 * t.build.as_secs_f64() / decode_time.as_secs_f64().max(f64::MIN_POSITIVE);
        let xors = t.decode_ops.xors + t.tail_ops.xors;
        let base = *first_xors.get_or_insert(xors);
        println!(
            "{:<15} {:>8} {:>9.3} {:>9.3} {:>10.3} {:>11} {:>11} {:>7.1} {:>9.1} {:>9.1} {:>9.1} {:>8.2}",
            algo.name(),
            format!("{}/{}", t.successes, patterns.len()),
            ms(t.build),
            ms(t.replay),
            ms(t.extract),
            mbps(t.replay),
            mbps(decode_time),
            share,
            t.decode_ops.copies as f64 / runs,
            t.decode_ops.xors as f64 / runs,
            t.tail_ops.total() as f64 / runs,
            xors as f64 / base.max(1) as f64,
        );
    }
    Ok(())
}

fn measure(
    codec: &Codec,
    algo: Algorithm,
    patterns: &[ErasurePattern],
    received: &[rmfec::PacketBlock],
) -> Result<Totals, CliError> {
    let mut t = Totals::default();
    let opts = algo.decode_options();
    for (pattern, block) in patterns.iter().zip(received) {
        let start = Instant::now();
        let schedule = codec.build_schedule(pattern, &opts, algo.policy())?;
        t.build += start.elapsed();

        let mut arena = PacketArena::load(&schedule, block)?;
        let start = Instant::now();
        arena.run(schedule.decode_ops());
        t.replay += start.elapsed();
        let start = Instant::now();
        arena.run(schedule.tail_ops());
        t.extract += start.elapsed();
        std::hint::black_box(&arena);

        t.successes += schedule.success() as usize;
        let tail = schedule.tail_op_count();
        let all = op_count(&schedule);
        Totals::add_ops(
            &mut t.decode_ops,
            OpCount {
                copies: all.copies - tail.copies,
                xors: all.xors - tail.xors,
            },
        );
        Totals::add_ops(&mut t.tail_ops, tail);
    }
    Ok(t)
}
