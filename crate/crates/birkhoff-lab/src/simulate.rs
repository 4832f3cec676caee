//! Monte Carlo engine: trajectories of the renewal-type Markov shift and
//! the normalized Birkhoff sums read off them.
//!
//! One trajectory is a sequence of i.i.d. excursions: from the base state
//! the walk jumps to the start of an excursion of length Y and climbs
//! deterministically 0, 1, ..., Y-1 before returning.  Simulation therefore
//! needs one truncated draw per excursion, not one per step — O(number of
//! excursions) work per trajectory, which at the log-squared law's infinite
//! mean is a few dozen draws even at horizon 10^6.  A step-granular
//! evaluator survives as a test oracle ([`stretched_log_sum_stepwise`]).
//!
//! Scenarios:
//!
//! * `Stretched` — the main construction: the step observable summed over
//!   the log-squared law, normalized by e^{n^alpha}.  Per trajectory the
//!   Birkhoff sum telescopes to a sum of e^{l^alpha} - 1 over completed
//!   excursion lengths l plus the same term at the final height.
//! * `Degenerate` — identical pipeline over a power law with gamma > 1,
//!   where the normalized sum collapses to 0 while the final height keeps
//!   a spread-out law on [0, n].
//! * `Decorated` — each excursion carries an i.i.d. mark t; the summed
//!   observable telescopes to t_last e^{h^alpha} - t_0, normalized.
//! * `Parity` — the even-length law with the parity-weighted observable
//!   g(k) = e^{k^alpha} / 2^{[k odd]}, and a choice of starting the clock
//!   at the base state or one step into an excursion.  The two starts
//!   produce limits separated by a factor of 2: height parity is locked to
//!   time parity, so shifting the start by one step flips every weight.
//! * `IidGaussian` — sums of standard normals over sqrt(n), the classical
//!   calibration case for the statistical comparators.
//!
//! Runs are deterministic functions of (config, seed, workers): each worker
//! owns counter-derived stream `worker_index` of a ChaCha8 generator seeded
//! with the run seed, and records are merged in (worker, local index)
//! order.  Worker 0's stream is the single-worker stream, so adding workers
//! never silently reshuffles the base sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{ExcursionLaw, ExcursionOutcome, LawSpec};
use crate::logspace::{excursion_sum, height_log_ratio, step_value, SignedLog};

/// Which observable/law pair a run simulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Stretched,
    Degenerate,
    Decorated,
    Parity,
    IidGaussian,
}

/// Where the parity scenario starts its clock.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartState {
    /// At the base state (height 0).
    P0,
    /// One step into an excursion (height 1), which flips the parity of
    /// every later height relative to `P0`.
    Q1,
}

/// Mark distribution for the decorated scenario.  The construction admits
/// any integrable mark law; these two cover the bounded and unbounded
/// cases the diagnostics care about, and adding more is a one-line match
/// arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkLaw {
    Uniform01,
    Gaussian01,
}

/// Full description of one simulation run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Stretching exponent in (0, 1); ignored by `IidGaussian`.
    pub alpha: f64,
    /// Power-law exponent; `Degenerate` only.
    pub gamma: Option<f64>,
    /// Time horizon.
    pub n: u64,
    pub samples: u64,
    pub seed: u64,
    pub workers: u64,
    /// `Parity` only; others must leave it at `P0`.
    pub start: StartState,
    /// `Decorated` only; others must leave it at `Uniform01`.
    pub mark_law: MarkLaw,
}

impl ScenarioConfig {
    fn base(scenario: Scenario, alpha: f64, n: u64, samples: u64, seed: u64) -> Self {
        ScenarioConfig {
            scenario,
            alpha,
            gamma: None,
            n,
            samples,
            seed,
            workers: 1,
            start: StartState::P0,
            mark_law: MarkLaw::Uniform01,
        }
    }

    pub fn stretched(alpha: f64, n: u64, samples: u64, seed: u64) -> Self {
        Self::base(Scenario::Stretched, alpha, n, samples, seed)
    }

    pub fn degenerate(gamma: f64, alpha: f64, n: u64, samples: u64, seed: u64) -> Self {
        ScenarioConfig {
            gamma: Some(gamma),
            ..Self::base(Scenario::Degenerate, alpha, n, samples, seed)
        }
    }

    pub fn decorated(alpha: f64, n: u64, samples: u64, seed: u64) -> Self {
        Self::base(Scenario::Decorated, alpha, n, samples, seed)
    }

    pub fn parity(alpha: f64, n: u64, samples: u64, seed: u64) -> Self {
        Self::base(Scenario::Parity, alpha, n, samples, seed)
    }

    pub fn iid_gaussian(n: u64, samples: u64, seed: u64) -> Self {
        Self::base(Scenario::IidGaussian, 0.5, n, samples, seed)
    }

    pub fn with_workers(mut self, workers: u64) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_start(mut self, start: StartState) -> Self {
        self.start = start;
        self
    }

    pub fn with_mark_law(mut self, mark_law: MarkLaw) -> Self {
        self.mark_law = mark_law;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.workers < 1 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        let uses_alpha = self.scenario != Scenario::IidGaussian;
        if uses_alpha && (!(self.alpha > 0.0 && self.alpha < 1.0) || !self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha = {} must lie strictly inside (0, 1)",
                self.alpha
            )));
        }
        match (self.scenario, self.gamma) {
            (Scenario::Degenerate, Some(g)) => {
                if !g.is_finite() || g <= 1.0 {
                    return Err(Error::DivergingSeries(g));
                }
            }
            (Scenario::Degenerate, None) => {
                return Err(Error::InvalidConfig(
                    "degenerate scenario requires gamma".into(),
                ));
            }
            (_, Some(g)) => {
                return Err(Error::InvalidConfig(format!(
                    "gamma = {g} given, but only the degenerate scenario takes one"
                )));
            }
            (_, None) => {}
        }
        if self.start != StartState::P0 && self.scenario != Scenario::Parity {
            return Err(Error::InvalidConfig(
                "start state is a parity-scenario option".into(),
            ));
        }
        if self.mark_law != MarkLaw::Uniform01 && self.scenario != Scenario::Decorated {
            return Err(Error::InvalidConfig(
                "mark law is a decorated-scenario option".into(),
            ));
        }
        if self.scenario == Scenario::IidGaussian && self.n < 1 {
            return Err(Error::InvalidConfig(
                "gaussian calibration needs n >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One simulated trajectory, reduced to the quantities the diagnostics
/// consume.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    /// S_n f / B_n in signed log representation.
    pub ratio: SignedLog,
    /// Height at time n.
    pub height: u64,
    /// Completed excursions before time n.
    pub excursions: u64,
    /// Last mark drawn (decorated scenario only).
    pub mark: Option<f64>,
}

/// The full output of one run.
#[derive(Clone, Debug)]
pub struct RatioSampleSet {
    pub config: ScenarioConfig,
    /// ln B_n for the normalization the ratios were divided by.
    pub normalization_logmag: f64,
    /// Exactly `config.samples` records, in (worker, local index) order.
    pub records: Vec<TrajectoryRecord>,
}

impl RatioSampleSet {
    /// Ratio values as native floats, saturated at +/-1e300 (the CSV
    /// convention) so downstream statistics never meet an infinity.
    pub fn ratio_values(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.ratio.value_clamped(1e300))
            .collect()
    }
}

/// Reads the `BIRKHOFF_LAB_THREADS` environment variable as the default
/// worker count; absent or unparseable values fall back to 1.
pub fn default_workers() -> u64 {
    std::env::var("BIRKHOFF_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}

/// Simulates the height process to time n: draws excursions against the
/// shrinking remaining horizon until one outlives it.  Returns the
/// completed lengths and the final height; their sum is exactly n.
pub fn simulate_height_path<R: Rng + ?Sized>(
    law: &ExcursionLaw,
    n: u64,
    rng: &mut R,
) -> (Vec<u64>, u64) {
    let mut lengths = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        match law.sample_truncated(remaining, rng) {
            ExcursionOutcome::Completed(l) => {
                lengths.push(l);
                remaining -= l;
            }
            ExcursionOutcome::Survives => break,
        }
    }
    debug_assert_eq!(lengths.iter().sum::<u64>() + remaining, n);
    (lengths, remaining)
}

/// Birkhoff sum of the step observable along a trajectory, via the
/// telescoped per-excursion closed form: sum of e^{l^alpha} - 1 over
/// completed lengths plus the same term at the final height.
pub fn stretched_log_sum(lengths: &[u64], final_height: u64, alpha: f64) -> SignedLog {
    let mut acc = SignedLog::ZERO;
    for &l in lengths {
        acc = acc.add(excursion_sum(l, alpha));
    }
    acc.add(excursion_sum(final_height, alpha))
}

/// The same Birkhoff sum accumulated step by step — O(n) per trajectory
/// and numerically independent of the telescoped route.  Test oracle only;
/// keep n modest.
pub fn stretched_log_sum_stepwise(lengths: &[u64], final_height: u64, alpha: f64) -> SignedLog {
    let mut acc = SignedLog::ZERO;
    for &l in lengths {
        for j in 0..l {
            acc = acc.add(step_value(j, alpha));
        }
    }
    for j in 0..final_height {
        acc = acc.add(step_value(j, alpha));
    }
    acc
}

fn worker_counts(samples: u64, workers: u64) -> Vec<u64> {
    let base = samples / workers;
    let rem = samples % workers;
    (0..workers).map(|w| base + u64::from(w < rem)).collect()
}

/// Runs `per_sample` across the configured workers, each on its own
/// counter-derived ChaCha8 stream, and merges in (worker, local index)
/// order.  The output is a pure function of (seed, workers, counts).
fn collect_records<F>(config: &ScenarioConfig, per_sample: F) -> Vec<TrajectoryRecord>
where
    F: Fn(&mut ChaCha8Rng) -> TrajectoryRecord + Sync,
{
    let counts = worker_counts(config.samples, config.workers);
    let worker_rng = |w: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(w as u64);
        rng
    };
    if config.workers == 1 {
        let mut rng = worker_rng(0);
        return (0..counts[0]).map(|_| per_sample(&mut rng)).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = counts
            .iter()
            .enumerate()
            .map(|(w, &count)| {
                let per_sample = &per_sample;
                let mut rng = worker_rng(w);
                scope.spawn(move || {
                    (0..count)
                        .map(|_| per_sample(&mut rng))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut merged = Vec::with_capacity(config.samples as usize);
        for handle in handles {
            merged.extend(handle.join().expect("simulation worker panicked"));
        }
        merged
    })
}

/// Walks excursions to time n accumulating the telescoped observable;
/// returns (log-sum, final height, completed excursions).
fn excursion_walk<R: Rng + ?Sized>(
    law: &ExcursionLaw,
    n: u64,
    alpha: f64,
    rng: &mut R,
) -> (SignedLog, u64, u64) {
    let mut acc = SignedLog::ZERO;
    let mut excursions = 0u64;
    let mut remaining = n;
    while remaining > 0 {
        match law.sample_truncated(remaining, rng) {
            ExcursionOutcome::Completed(l) => {
                acc = acc.add(excursion_sum(l, alpha));
                excursions += 1;
                remaining -= l;
            }
            ExcursionOutcome::Survives => break,
        }
    }
    (acc.add(excursion_sum(remaining, alpha)), remaining, excursions)
}

/// Sanity bound on a normalized sum: every one of the at-most-n terms is
/// below e^{n^alpha}, so ratio <= n always.  Tighter concentration is a
/// statistical statement checked by the diagnostics, not asserted here.
fn assert_loose_ratio_bound(ratio: SignedLog, n: u64) {
    assert!(
        ratio.is_zero() || ratio.logmag() <= (n.max(1) as f64).ln() + 1e-9,
        "normalized ratio exceeded its a priori bound: logmag = {}, n = {n}",
        ratio.logmag()
    );
}

/// The main construction: step observable over the log-squared law,
/// normalized by e^{n^alpha}.
pub fn run_stretched(config: &ScenarioConfig) -> Result<RatioSampleSet> {
    expect_scenario(config, Scenario::Stretched)?;
    let law = ExcursionLaw::new(LawSpec::log_squared())?;
    run_excursion_scenario(config, law)
}

/// The contrast case: same observable over a light-tailed power law, where
/// the normalized sum degenerates to 0.
pub fn run_degenerate(config: &ScenarioConfig) -> Result<RatioSampleSet> {
    expect_scenario(config, Scenario::Degenerate)?;
    let law = ExcursionLaw::new(LawSpec::power_law(
        config.gamma.expect("validated: degenerate carries gamma"),
    ))?;
    run_excursion_scenario(config, law)
}

fn run_excursion_scenario(config: &ScenarioConfig, law: ExcursionLaw) -> Result<RatioSampleSet> {
    let n = config.n;
    let alpha = config.alpha;
    if n > 0 {
        law.ensure_horizon(n);
    }
    let normalization_logmag = (n as f64).powf(alpha);
    let scale = SignedLog::positive(-normalization_logmag);
    let records = collect_records(config, |rng| {
        let (sum, height, excursions) = excursion_walk(&law, n, alpha, rng);
        let ratio = sum.mul(scale);
        debug_assert!(ratio.sign() >= 0);
        assert_loose_ratio_bound(ratio, n);
        TrajectoryRecord {
            ratio,
            height,
            excursions,
            mark: None,
        }
    });
    Ok(RatioSampleSet {
        config: *config,
        normalization_logmag,
        records,
    })
}

/// Decorated scenario: marks are drawn once at the start and again at each
/// return to the base state (in that order relative to the length draws),
/// and the summed observable telescopes to
/// t_last e^{h^alpha} - t_0, normalized by e^{n^alpha}.
pub fn run_decorated(config: &ScenarioConfig) -> Result<RatioSampleSet> {
    expect_scenario(config, Scenario::Decorated)?;
    let law = ExcursionLaw::new(LawSpec::log_squared())?;
    let n = config.n;
    let alpha = config.alpha;
    if n > 0 {
        law.ensure_horizon(n);
    }
    let normalization_logmag = (n as f64).powf(alpha);
    let mark_law = config.mark_law;
    let records = collect_records(config, |rng| {
        let t0 = draw_mark(mark_law, rng);
        let mut t_last = t0;
        let mut excursions = 0u64;
        let mut remaining = n;
        while remaining > 0 {
            match law.sample_truncated(remaining, rng) {
                ExcursionOutcome::Completed(l) => {
                    excursions += 1;
                    remaining -= l;
                    t_last = draw_mark(mark_law, rng);
                }
                ExcursionOutcome::Survives => break,
            }
        }
        let height = remaining;
        // t_last e^{h^alpha - n^alpha} - t_0 e^{-n^alpha}, all in log space:
        // the first factor's exponent comes from the stable difference form.
        let lead = SignedLog::from_value(t_last)
            .mul(SignedLog::positive(height_log_ratio(height, n.max(1), alpha)));
        let trail =
            SignedLog::from_value(t0).mul(SignedLog::positive(-normalization_logmag));
        TrajectoryRecord {
            ratio: lead.sub(trail),
            height,
            excursions,
            mark: Some(t_last),
        }
    });
    Ok(RatioSampleSet {
        config: *config,
        normalization_logmag,
        records,
    })
}

/// Parity scenario: even-length excursions, parity-weighted observable
/// g(k) = e^{k^alpha} / 2^{[k odd]}, normalization B_n = e^{n^alpha} /
/// 2^{[n odd]}.  The summed observable telescopes to g(h_n) - g(h_0).
/// Starting at `Q1` means the clock starts one step into an excursion, so
/// the height at time n is the height a base-state start sees at n + 1.
pub fn run_parity(config: &ScenarioConfig) -> Result<RatioSampleSet> {
    expect_scenario(config, Scenario::Parity)?;
    let law = ExcursionLaw::new(LawSpec::log_squared_even_only())?;
    let n = config.n;
    let alpha = config.alpha;
    let (start_height, sim_n) = match config.start {
        StartState::P0 => (0u64, n),
        StartState::Q1 => (1u64, n + 1),
    };
    if sim_n > 0 {
        law.ensure_horizon(sim_n);
    }
    let normalization_logmag =
        (n as f64).powf(alpha) - if n % 2 == 1 { std::f64::consts::LN_2 } else { 0.0 };
    let scale = SignedLog::positive(-normalization_logmag);
    let g = |k: u64| {
        let halving = if k % 2 == 1 { std::f64::consts::LN_2 } else { 0.0 };
        SignedLog::positive((k as f64).powf(alpha) - halving)
    };
    let g_start = g(start_height);
    let records = collect_records(config, |rng| {
        let mut excursions = 0u64;
        let mut remaining = sim_n;
        while remaining > 0 {
            match law.sample_truncated(remaining, rng) {
                ExcursionOutcome::Completed(l) => {
                    excursions += 1;
                    remaining -= l;
                }
                ExcursionOutcome::Survives => break,
            }
        }
        let height = remaining;
        TrajectoryRecord {
            ratio: g(height).sub(g_start).mul(scale),
            height,
            excursions,
            mark: None,
        }
    });
    Ok(RatioSampleSet {
        config: *config,
        normalization_logmag,
        records,
    })
}

/// CLT calibration: sums of n standard normals over sqrt(n).  The ratio is
/// exactly standard normal for every n, making this the known-answer case
/// for the statistical comparators.
pub fn run_iid_gaussian(config: &ScenarioConfig) -> Result<RatioSampleSet> {
    expect_scenario(config, Scenario::IidGaussian)?;
    let n = config.n;
    let scale = 1.0 / (n as f64).sqrt();
    let normalization_logmag = 0.5 * (n as f64).ln();
    let records = collect_records(config, |rng| {
        let mut sum = 0.0f64;
        for _ in 0..n {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            sum += z;
        }
        TrajectoryRecord {
            ratio: SignedLog::from_value(sum * scale),
            height: 0,
            excursions: 0,
            mark: None,
        }
    });
    Ok(RatioSampleSet {
        config: *config,
        normalization_logmag,
        records,
    })
}

fn expect_scenario(config: &ScenarioConfig, want: Scenario) -> Result<()> {
    config.validate()?;
    if config.scenario != want {
        return Err(Error::InvalidConfig(format!(
            "config names scenario {:?}, but {:?} was invoked",
            config.scenario, want
        )));
    }
    Ok(())
}

/// Dispatches on the configured scenario.
pub fn run(config: &ScenarioConfig) -> Result<RatioSampleSet> {
    config.validate()?;
    match config.scenario {
        Scenario::Stretched => run_stretched(config),
        Scenario::Degenerate => run_degenerate(config),
        Scenario::Decorated => run_decorated(config),
        Scenario::Parity => run_parity(config),
        Scenario::IidGaussian => run_iid_gaussian(config),
    }
}

fn draw_mark<R: Rng + ?Sized>(mark_law: MarkLaw, rng: &mut R) -> f64 {
    match mark_law {
        MarkLaw::Uniform01 => rng.gen::<f64>(),
        MarkLaw::Gaussian01 => rng.sample(rand_distr::StandardNormal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::ks_two_sample;
    use approx::assert_relative_eq;
    use rand::RngCore;
    use rand::SeedableRng;

    #[test]
    fn path_accounting_is_exact() {
        let law = ExcursionLaw::new(LawSpec::log_squared()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [0u64, 1, 2, 17, 1000, 12_345] {
            for _ in 0..50 {
                let (lengths, h) = simulate_height_path(&law, n, &mut rng);
                assert_eq!(lengths.iter().sum::<u64>() + h, n);
                assert!(lengths.iter().all(|&l| l >= 2));
            }
        }
        // Degenerate horizons force survival without drawing excursions.
        let (lengths, h) = simulate_height_path(&law, 0, &mut rng);
        assert!(lengths.is_empty());
        assert_eq!(h, 0);
        let (lengths, h) = simulate_height_path(&law, 1, &mut rng);
        assert!(lengths.is_empty());
        assert_eq!(h, 1);
    }

    #[test]
    fn stepwise_and_telescoped_sums_agree() {
        let law = ExcursionLaw::new(LawSpec::log_squared()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (lengths, h) = simulate_height_path(&law, 2000, &mut rng);
            for &alpha in &[0.3, 0.5, 0.7] {
                let fast = stretched_log_sum(&lengths, h, alpha);
                let slow = stretched_log_sum_stepwise(&lengths, h, alpha);
                assert_eq!(fast.sign(), slow.sign());
                assert!(
                    (fast.logmag() - slow.logmag()).abs()
                        <= 1e-9 * fast.logmag().abs().max(1.0),
                    "telescoping mismatch: {} vs {}",
                    fast.logmag(),
                    slow.logmag()
                );
            }
        }
    }

    /// Always emits the largest u64, so every truncated draw survives.
    struct AlwaysSurvive;

    impl RngCore for AlwaysSurvive {
        fn next_u32(&mut self) -> u32 {
            u32::MAX
        }
        fn next_u64(&mut self) -> u64 {
            u64::MAX
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(0xff);
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
            self.fill_bytes(dest);
            Ok(())
        }
    }

    #[test]
    fn single_excursion_path_gives_ratio_near_one() {
        // A path that never returns has h = n and ratio (e^{n^a} - 1)e^{-n^a}.
        let law = ExcursionLaw::new(LawSpec::log_squared()).unwrap();
        let n = 10_000u64;
        let alpha = 0.5;
        let (sum, h, exc) = excursion_walk(&law, n, alpha, &mut AlwaysSurvive);
        assert_eq!(h, n);
        assert_eq!(exc, 0);
        let ratio = sum.mul(SignedLog::positive(-(n as f64).powf(alpha)));
        let expect = -(-(n as f64).powf(alpha)).exp_m1(); // 1 - e^{-n^a}
        assert_relative_eq!(ratio.value(), expect, max_relative = 1e-12);
        // e^{-100} underflows the distance to 1 entirely (even in the
        // log-magnitude), so exact equality with 1.0 is the right answer.
        assert!(ratio.value() <= 1.0 && ratio.value() > 0.9999);
    }

    #[test]
    fn decorated_single_mark_path_reduces_to_t0() {
        // No returns: t_last = t_0, ratio = t_0 (1 - e^{-n^alpha}).
        let config = ScenarioConfig::decorated(0.5, 4096, 1, 99);
        let law = ExcursionLaw::new(LawSpec::log_squared()).unwrap();
        let mut rng = AlwaysSurvive;
        let t0 = draw_mark(MarkLaw::Uniform01, &mut rng);
        let lead = SignedLog::from_value(t0)
            .mul(SignedLog::positive(height_log_ratio(4096, 4096, 0.5)));
        let trail = SignedLog::from_value(t0).mul(SignedLog::positive(-(4096f64).powf(0.5)));
        let expect = lead.sub(trail).value();
        assert_relative_eq!(expect, t0 * (1.0 - (-64.0f64).exp()), max_relative = 1e-12);
        // And the full pipeline records a mark for every trajectory.
        let out = run(&config).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.records[0].mark.is_some());
        let _ = law;
    }

    #[test]
    fn run_is_deterministic_for_fixed_seed_and_workers() {
        let config = ScenarioConfig::stretched(0.5, 5000, 200, 42).with_workers(3);
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a.records.len(), 200);
        for (ra, rb) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(ra.ratio.sign(), rb.ratio.sign());
            assert_eq!(ra.ratio.logmag().to_bits(), rb.ratio.logmag().to_bits());
            assert_eq!(ra.height, rb.height);
            assert_eq!(ra.excursions, rb.excursions);
        }
    }

    #[test]
    fn worker_zero_prefix_matches_single_worker_run() {
        // Worker 0 always consumes stream 0, so the first chunk of a
        // multi-worker run must reproduce a single-worker run of that size.
        let multi = run(&ScenarioConfig::stretched(0.5, 5000, 100, 7).with_workers(4)).unwrap();
        let counts = worker_counts(100, 4);
        let solo = run(&ScenarioConfig::stretched(0.5, 5000, counts[0], 7)).unwrap();
        for (rm, rs) in multi.records.iter().take(counts[0] as usize).zip(&solo.records) {
            assert_eq!(rm.ratio.logmag().to_bits(), rs.ratio.logmag().to_bits());
            assert_eq!(rm.height, rs.height);
        }
    }

    #[test]
    fn worker_counts_balance_and_cover() {
        assert_eq!(worker_counts(10, 3), vec![4, 3, 3]);
        assert_eq!(worker_counts(2, 5), vec![1, 1, 0, 0, 0]);
        for (samples, workers) in [(1u64, 1u64), (99, 7), (1000, 13)] {
            let counts = worker_counts(samples, workers);
            assert_eq!(counts.iter().sum::<u64>(), samples);
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn worker_count_leaves_the_distribution_alone() {
        // Different worker counts reshuffle which stream serves which
        // sample, but the pooled law must not move: two-sample KS below the
        // ~0.001-level asymptotic threshold 1.95 sqrt((m+n)/(mn)).
        let m = 4000u64;
        let a = run(&ScenarioConfig::stretched(0.5, 10_000, m, 5)).unwrap();
        let b = run(&ScenarioConfig::stretched(0.5, 10_000, m, 5).with_workers(8)).unwrap();
        let d = ks_two_sample(&a.ratio_values(), &b.ratio_values()).unwrap();
        let threshold = 1.95 * ((2.0 * m as f64) / (m as f64 * m as f64)).sqrt();
        assert!(
            d < threshold,
            "worker split moved the law: KS = {d:.4} >= {threshold:.4}"
        );
    }

    #[test]
    fn parity_heights_carry_the_time_parity() {
        let n = 10_000u64; // even
        let p_run = run(&ScenarioConfig::parity(0.5, n, 300, 21)).unwrap();
        for r in &p_run.records {
            assert_eq!(r.height % 2, 0, "P start at even n must see even heights");
        }
        let q_run =
            run(&ScenarioConfig::parity(0.5, n, 300, 21).with_start(StartState::Q1)).unwrap();
        for r in &q_run.records {
            assert_eq!(r.height % 2, 1, "Q start at even n must see odd heights");
        }
        // Odd horizons flip the normalization by exactly ln 2.
        let odd = run(&ScenarioConfig::parity(0.5, n + 1, 10, 21)).unwrap();
        assert_relative_eq!(
            odd.normalization_logmag,
            ((n + 1) as f64).powf(0.5) - std::f64::consts::LN_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gaussian_ratio_is_centered_and_normalized() {
        let samples = 20_000u64;
        let out = run(&ScenarioConfig::iid_gaussian(1000, samples, 13)).unwrap();
        let values = out.ratio_values();
        let mean = values.iter().sum::<f64>() / samples as f64;
        assert!(
            mean.abs() < 3.0 / (samples as f64).sqrt(),
            "sample mean {mean} too far from 0"
        );
        assert_relative_eq!(out.normalization_logmag, 0.5 * 1000f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected_before_any_work() {
        let mut c = ScenarioConfig::stretched(0.5, 100, 0, 1);
        assert!(run(&c).is_err()); // samples = 0
        c.samples = 10;
        c.alpha = 1.0;
        assert!(run(&c).is_err()); // alpha at the boundary
        assert!(run(&ScenarioConfig::degenerate(1.0, 0.5, 100, 10, 1)).is_err());
        let mut c = ScenarioConfig::stretched(0.5, 100, 10, 1);
        c.gamma = Some(2.0);
        assert!(run(&c).is_err()); // stray gamma
        let c = ScenarioConfig::stretched(0.5, 100, 10, 1).with_start(StartState::Q1);
        assert!(run(&c).is_err()); // start state outside parity
        let c = ScenarioConfig::stretched(0.5, 100, 10, 1).with_mark_law(MarkLaw::Gaussian01);
        assert!(run(&c).is_err()); // mark law outside decorated
        let c = ScenarioConfig::iid_gaussian(0, 10, 1);
        assert!(run(&c).is_err()); // gaussian needs n >= 1
        let mut c = ScenarioConfig::stretched(0.5, 100, 10, 1);
        c.workers = 0;
        assert!(run(&c).is_err());
    }

    #[test]
    fn scenario_dispatch_guards_against_mismatched_entry_points() {
        let c = ScenarioConfig::stretched(0.5, 100, 10, 1);
        assert!(run_degenerate(&c).is_err());
        assert!(run_parity(&c).is_err());
    }
}
