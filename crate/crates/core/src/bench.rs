//! Timing of fixed-pass parallel addition against sequential references.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adder::{build_pipeline, digitwise_sum, ripple_reference, AdderError};
use crate::algebra::values_equal;
use crate::digits::DigitString;
use crate::system::NumerationSystem;

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub workers: usize,
    /// Best of the runs.
    pub millis: f64,
    pub digits_per_sec_per_pass: f64,
    pub identical: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub base: String,
    pub alphabet: String,
    pub length: usize,
    pub passes: usize,
    pub effective_window: (usize, usize),
    pub sequential_millis: f64,
    pub rows: Vec<BenchRow>,
    pub ripple_millis: Option<f64>,
    /// The ripple result has the same value as the windowed sum.
    pub ripple_value_equal: Option<bool>,
    /// Every parallel run produced exactly the sequential digits.
    pub identical: bool,
}

impl BenchReport {
    pub fn row(&self, workers: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.workers == workers)
    }
}

/// Random digit string over the system alphabet.
pub fn random_operand(system: &NumerationSystem, length: usize, rng: &mut ChaCha8Rng) -> DigitString {
    let a = system.alphabet;
    DigitString::new(0, (0..length).map(|_| rng.gen_range(a.min()..=a.max())).collect())
}

fn best_of<T>(runs: usize, mut f: impl FnMut() -> T) -> (Duration, T) {
    let mut best = None;
    let mut out = None;
    for _ in 0..runs.max(1) {
        let start = Instant::now();
        let v = f();
        let dt = start.elapsed();
        if best.is_none_or(|b| dt < b) {
            best = Some(dt);
        }
        out = Some(v);
    }
    (best.unwrap(), out.unwrap())
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Adds two random operands of `length` digits sequentially, then on rayon
/// pools of each size in `workers`, and with the ripple reference when the
/// base is rational.
pub fn run_bench(
    system: &NumerationSystem,
    length: usize,
    workers: &[usize],
    runs: usize,
    seed: u64,
) -> Result<BenchReport, AdderError> {
    let pipeline = build_pipeline(system)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_operand(system, length, &mut rng);
    let y = random_operand(system, length, &mut rng);

    let pools: Vec<_> = workers
        .iter()
        .map(|&w| rayon::ThreadPoolBuilder::new().num_threads(w).build().expect("thread pool"))
        .collect();
    // Runs are interleaved so that drift in machine load hits every method alike.
    let mut seq_time = Duration::MAX;
    let mut times = vec![Duration::MAX; workers.len()];
    let mut identical = vec![true; workers.len()];
    let mut reference = None;
    for _ in 0..runs.max(1) {
        let (dt, out) = best_of(1, || pipeline.add(&x, &y));
        seq_time = seq_time.min(dt);
        let out = out?;
        for (i, pool) in pools.iter().enumerate() {
            let (dt, par) = best_of(1, || pool.install(|| pipeline.add_parallel(&x, &y)));
            times[i] = times[i].min(dt);
            identical[i] &= par? == out;
        }
        reference = Some(out);
    }
    let reference = reference.unwrap();
    let passes = pipeline.pass_count();
    let rows: Vec<BenchRow> = workers
        .iter()
        .zip(times.iter().zip(&identical))
        .map(|(&w, (&dt, &same))| BenchRow {
            workers: w,
            millis: ms(dt),
            digits_per_sec_per_pass: (length * passes.max(1)) as f64 / dt.as_secs_f64(),
            identical: same,
        })
        .collect();

    let sum = digitwise_sum(&x, &y);
    let ripple = best_of(runs, || ripple_reference(&sum, &system.base));
    let (ripple_millis, ripple_value_equal) = match ripple {
        (dt, Some(r)) => (Some(ms(dt)), Some(values_equal(&r, &reference, &system.base))),
        (_, None) => (None, None),
    };

    Ok(BenchReport {
        base: system.base.mnemonic(),
        alphabet: system.alphabet.to_string(),
        length,
        passes,
        effective_window: pipeline.effective_window(),
        sequential_millis: ms(seq_time),
        identical: rows.iter().all(|r| r.identical),
        rows,
        ripple_millis,
        ripple_value_equal,
    })
}
