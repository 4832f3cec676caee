//! Growth diagnostics for normalizing sequences, plus the distribution
//! comparators used to judge simulated ratio laws.
//!
//! The object under study is a positive sequence B_1, ..., B_N carried as
//! log-magnitudes ([`NormSeq`]), so e^{n^alpha} at n = 10^6 is an ordinary
//! number here rather than an overflow.  The diagnostics answer, from the
//! sequence alone, the questions that separate normalizations compatible
//! with a conservative-map limit theorem from those that are not:
//!
//! * [`ratio_profile`] — does B_{n+1}/B_n settle, and to what?  A limit
//!   above 1 or a persistent oscillation each carries information; the
//!   parity normalization oscillates between ~1/2 and ~2 forever.
//! * [`doubling_sup`] — sup over n <= N/2 of B_{2n}/B_n, the scale-doubling
//!   cost.  Polynomial growth keeps it finite (n^2 gives exactly 4);
//!   stretched-exponential growth lets it run away with N.
//! * [`poly_fit`] — least-squares exponent of log B against ln n on the
//!   upper half, with a two-window curvature statistic that flags
//!   superpolynomial growth instead of reporting a meaningless slope.
//! * [`stretched_fit`] — slope of ln log B against ln n, which reads off
//!   alpha when log B ~ n^alpha.  An exponential sequence lands at
//!   alpha ~ 1 and a polynomial one near 0, so the estimate doubles as a
//!   regime classifier.
//! * [`subexp_check`] — is log B_n / n eventually below each tolerance rho?
//!   Failing every rho on the grid is the exponential signature, which is
//!   inconsistent with a conservative-map limit theorem.
//! * [`max_ratio_bounds`] — the global constant C with B_{n+1} <= C max of
//!   the sequence so far, and the density of n violating L-fold jumps for
//!   each L in a grid.
//!
//! On the distribution side, [`two_point_fit`] summarizes a sample against
//! the two-point limit law (an atom at 0 plus a bump near 1),
//! [`ks_distance`] and [`ks_two_sample`] are plain Kolmogorov–Smirnov
//! statistics (both one-sided gaps), and [`standard_normal_cdf`] is the
//! reference CDF for the i.i.d. calibration case.  Verdict-grade summaries
//! of all of the above land in a [`GrowthReport`] with a byte-stable JSON
//! rendering.

use crate::error::{Error, Result};
use crate::output::fmt_sig12;

/// Fits refuse sequences shorter than this: a quartile window needs a
/// handful of points before a slope or a spread means anything.
pub const MIN_FIT_LEN: usize = 16;

/// Spread of B_{n+1}/B_n log-ratios over the last quartile above which the
/// ratio is reported as oscillating rather than convergent.
pub const RATIO_OSCILLATION_SPREAD: f64 = 0.1;

/// Difference between late and mid window slopes of log B vs ln n above
/// which a single polynomial exponent is refused.
pub const CURVATURE_THRESHOLD: f64 = 0.5;

/// RMS residual of the ln log B vs ln n fit above which the sequence is
/// not reported as stretched-exponential.
pub const STRETCHED_RMS_THRESHOLD: f64 = 0.1;

/// Fraction trimmed from each end when locating the upper cluster in
/// [`two_point_fit`].
pub const TRIM_FRACTION: f64 = 0.1;

/// Fraction of early indices excluded from [`max_ratio_bounds`] violation
/// densities (the global constant ignores no indices).
pub const BURN_IN_FRACTION: f64 = 0.1;

/// Default tolerance grid for [`subexp_check`].
pub const DEFAULT_RHO_GRID: [f64; 3] = [0.5, 0.1, 0.01];

/// Default jump-factor grid for [`max_ratio_bounds`].
pub const DEFAULT_L_GRID: [f64; 2] = [1.5, 3.0];

/// A positive sequence B_1, ..., B_N stored as log-magnitudes.
#[derive(Clone, Debug)]
pub struct NormSeq {
    log_values: Vec<f64>,
}

impl NormSeq {
    /// Wraps explicit log-magnitudes ln B_1, ..., ln B_N.  Every entry must
    /// be finite (B_n strictly positive and representable).
    pub fn from_log_values(log_values: Vec<f64>) -> Result<Self> {
        if log_values.is_empty() {
            return Err(Error::InvalidConfig("empty sequence".into()));
        }
        if let Some(bad) = log_values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite log-magnitude {bad} in sequence"
            )));
        }
        Ok(NormSeq { log_values })
    }

    /// B_n = e^{n^alpha} for n = 1..=n_max, the stretched-exponential
    /// family; alpha must lie in (0, 1).
    pub fn stretched(alpha: f64, n_max: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stretching exponent {alpha} outside (0, 1)"
            )));
        }
        Self::family(n_max, |n| n.powf(alpha))
    }

    /// B_n = n^p for p > 0.
    pub fn power(p: f64, n_max: u64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidConfig(format!("power exponent {p} not positive")));
        }
        Self::family(n_max, |n| p * n.ln())
    }

    /// B_n = base^n for base > 1, the exponential contrast family.
    pub fn exponential(base: f64, n_max: u64) -> Result<Self> {
        if !(base.is_finite() && base > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "exponential base {base} must exceed 1"
            )));
        }
        Self::family(n_max, |n| n * base.ln())
    }

    /// B_n = e^{n^alpha} / 2^{[n odd]}, the parity-adapted normalization
    /// whose consecutive ratio oscillates between ~1/2 and ~2 forever.
    pub fn parity(alpha: f64, n_max: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stretching exponent {alpha} outside (0, 1)"
            )));
        }
        Self::family(n_max, |n| {
            let halving = if (n as u64) % 2 == 1 { std::f64::consts::LN_2 } else { 0.0 };
            n.powf(alpha) - halving
        })
    }

    fn family(n_max: u64, log_b: impl Fn(f64) -> f64) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        Self::from_log_values((1..=n_max).map(|n| log_b(n as f64)).collect())
    }

    /// Number of terms N.
    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    /// ln B_n, 1-indexed.
    pub fn log_value(&self, n: u64) -> f64 {
        self.log_values[(n - 1) as usize]
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    fn require_fit_len(&self) -> Result<()> {
        if self.len() < MIN_FIT_LEN {
            return Err(Error::InvalidConfig(format!(
                "sequence has {} terms; fits need at least {MIN_FIT_LEN}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Behavior of the consecutive ratio B_{n+1}/B_n over the last quartile.
#[derive(Clone, Copy, Debug)]
pub struct RatioProfile {
    /// Geometric mean of the last-quartile ratios when they have settled;
    /// `None` when the spread exceeds [`RATIO_OSCILLATION_SPREAD`].
    pub estimate: Option<f64>,
    pub last_quartile_min: f64,
    pub last_quartile_max: f64,
    /// max - min of the log-ratios over the window.
    pub log_spread: f64,
}

impl RatioProfile {
    pub fn is_oscillating(&self) -> bool {
        self.estimate.is_none()
    }
}

/// Consecutive-ratio behavior read from the last quartile of log
/// differences d_n = ln B_{n+1} - ln B_n.
pub fn ratio_profile(seq: &NormSeq) -> Result<RatioProfile> {
    seq.require_fit_len()?;
    let logs = seq.log_values();
    let diffs: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let window = &diffs[diffs.len() - diffs.len() / 4..];
    let min = window.iter().copied().fold(f64::INFINITY, f64::min);
    let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = max - min;
    let estimate = if spread > RATIO_OSCILLATION_SPREAD {
        None
    } else {
        Some((window.iter().sum::<f64>() / window.len() as f64).exp())
    };
    Ok(RatioProfile {
        estimate,
        last_quartile_min: min.exp(),
        last_quartile_max: max.exp(),
        log_spread: spread,
    })
}

/// sup over 1 <= n <= N/2 of B_{2n}/B_n.  May overflow to infinity for
/// exponential-scale sequences; callers that need the log should take it
/// from the sequence directly.
pub fn doubling_sup(seq: &NormSeq) -> Result<f64> {
    if seq.len() < 2 {
        return Err(Error::InvalidConfig(
            "doubling statistic needs at least 2 terms".into(),
        ));
    }
    let logs = seq.log_values();
    let mut best = f64::NEG_INFINITY;
    for n in 1..=seq.len() / 2 {
        best = best.max(logs[2 * n - 1] - logs[n - 1]);
    }
    Ok(best.exp())
}

/// Least-squares polynomial exponent with a curvature cross-check.
#[derive(Clone, Copy, Debug)]
pub struct PolyFit {
    /// Slope of ln B vs ln n over the upper half — the exponent if the
    /// sequence really is polynomial.  Meaningful only when
    /// `superpolynomial` is false.
    pub exponent: f64,
    /// Late-window slope minus mid-window slope; a polynomial sequence
    /// keeps this near 0.
    pub curvature: f64,
    /// True when curvature exceeds [`CURVATURE_THRESHOLD`], i.e. the slope
    /// is still climbing and no single exponent describes the data.
    pub superpolynomial: bool,
}

/// Fits ln B = p ln n + const on the upper half of the range, and compares
/// the slope over the last quarter against the second quarter to detect a
/// still-accelerating (superpolynomial) sequence.
pub fn poly_fit(seq: &NormSeq) -> Result<PolyFit> {
    seq.require_fit_len()?;
    let logs = seq.log_values();
    let n = logs.len();
    let slope_over = |range: std::ops::Range<usize>| {
        let xs: Vec<f64> = range.clone().map(|i| ((i + 1) as f64).ln()).collect();
        let ys: Vec<f64> = range.map(|i| logs[i]).collect();
        linear_fit(&xs, &ys).0
    };
    let exponent = slope_over(n - n / 2..n);
    let late = slope_over(n - n / 4..n);
    let mid = slope_over(n / 4..n / 2);
    let curvature = late - mid;
    Ok(PolyFit {
        exponent,
        curvature,
        superpolynomial: curvature > CURVATURE_THRESHOLD,
    })
}

/// Stretched-exponential profile fit.
#[derive(Clone, Copy, Debug)]
pub struct StretchedFit {
    /// Slope of ln ln B vs ln n over the upper half: the exponent alpha
    /// when ln B ~ c n^alpha.
    pub alpha_hat: f64,
    /// RMS residual of that fit.
    pub residual_rms: f64,
    /// True when the residual is below [`STRETCHED_RMS_THRESHOLD`].
    pub is_stretched: bool,
}

/// Fits ln ln B = alpha ln n + const on the upper half.  Errors with
/// `RangeRestriction` when ln B is not strictly positive on that range
/// (the inner logarithm would be undefined), e.g. for bounded or decaying
/// sequences.
pub fn stretched_fit(seq: &NormSeq) -> Result<StretchedFit> {
    seq.require_fit_len()?;
    let logs = seq.log_values();
    let n = logs.len();
    let range = n - n / 2..n;
    if let Some(i) = range.clone().find(|&i| logs[i] <= 0.0) {
        return Err(Error::RangeRestriction(format!(
            "log-magnitude {} at n = {} is not positive; ln ln B undefined on fit range",
            logs[i],
            i + 1
        )));
    }
    let xs: Vec<f64> = range.clone().map(|i| ((i + 1) as f64).ln()).collect();
    let ys: Vec<f64> = range.map(|i| logs[i].ln()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(StretchedFit {
        alpha_hat: slope,
        residual_rms: rms,
        is_stretched: rms <= STRETCHED_RMS_THRESHOLD,
    })
}

/// One row of the subexponentiality check.
#[derive(Clone, Copy, Debug)]
pub struct SubexpRow {
    pub rho: f64,
    /// Last-quartile maximum of ln B_n / n (shared across rows).
    pub margin: f64,
    /// margin < rho.
    pub pass: bool,
}

/// Outcome of [`subexp_check`] over a tolerance grid.
#[derive(Clone, Debug)]
pub struct SubexpReport {
    pub margin: f64,
    pub rows: Vec<SubexpRow>,
    /// Every grid tolerance failed: the exponential signature.
    pub exponential: bool,
}

/// Checks ln B_n / n < rho over the last quartile for each rho in the
/// grid.  The margin statistic is the window maximum of ln B_n / n, so for
/// B_n = e^{n^alpha} it equals (3N/4)^{alpha-1} up to the window edge and
/// shrinks with N — a check at fixed rho is implicitly a check at a scale.
pub fn subexp_check(seq: &NormSeq, rho_grid: &[f64]) -> Result<SubexpReport> {
    seq.require_fit_len()?;
    if rho_grid.is_empty() {
        return Err(Error::InvalidConfig("empty tolerance grid".into()));
    }
    if let Some(bad) = rho_grid.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "tolerance {bad} must be a positive real"
        )));
    }
    let logs = seq.log_values();
    let n = logs.len();
    let margin = (n - n / 4..n)
        .map(|i| logs[i] / (i + 1) as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let rows: Vec<SubexpRow> = rho_grid
        .iter()
        .map(|&rho| SubexpRow {
            rho,
            margin,
            pass: margin < rho,
        })
        .collect();
    let exponential = rows.iter().all(|r| !r.pass);
    Ok(SubexpReport {
        margin,
        rows,
        exponential,
    })
}

/// Violation density for one jump factor L.
#[derive(Clone, Copy, Debug)]
pub struct DensityRow {
    pub l: f64,
    /// Fraction of post-burn-in indices n with B_{n+1} > L max_{m<=n} B_m.
    pub density: f64,
}

/// Global max-ratio constant and jump-violation densities.
#[derive(Clone, Debug)]
pub struct MaxRatioReport {
    /// Smallest C with B_{n+1} <= C max_{m<=n} B_m for every n — computed
    /// over all indices, no burn-in.
    pub global_c: f64,
    pub rows: Vec<DensityRow>,
}

/// Computes the global constant C = max_n B_{n+1} / max_{m<=n} B_m and,
/// for each L in the grid (each must exceed 1), the density of violating
/// indices after discarding the first [`BURN_IN_FRACTION`] of them.
pub fn max_ratio_bounds(seq: &NormSeq, l_grid: &[f64]) -> Result<MaxRatioReport> {
    if seq.len() < 2 {
        return Err(Error::InvalidConfig(
            "max-ratio statistics need at least 2 terms".into(),
        ));
    }
    if let Some(bad) = l_grid.iter().find(|l| !(l.is_finite() && **l > 1.0)) {
        return Err(Error::InvalidConfig(format!(
            "jump factor {bad} must be a real above 1"
        )));
    }
    let logs = seq.log_values();
    let count = logs.len() - 1;
    let mut log_ratios = Vec::with_capacity(count);
    let mut running_max = logs[0];
    for i in 0..count {
        running_max = running_max.max(logs[i]);
        log_ratios.push(logs[i + 1] - running_max);
    }
    let global_c = log_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp();
    let burn_in = (BURN_IN_FRACTION * count as f64).floor() as usize;
    let considered = &log_ratios[burn_in..];
    let rows = l_grid
        .iter()
        .map(|&l| {
            let threshold = l.ln();
            let violations = considered.iter().filter(|&&r| r > threshold).count();
            DensityRow {
                l,
                density: violations as f64 / considered.len() as f64,
            }
        })
        .collect();
    Ok(MaxRatioReport { global_c, rows })
}

/// Summary of a sample against the two-point limit shape: an atom at 0
/// and a cluster near 1.
#[derive(Clone, Copy, Debug)]
pub struct TwoPointFit {
    pub split: f64,
    /// Fraction of the sample at or below the split.
    pub mass_low: f64,
    /// Exactly 1 - mass_low.
    pub mass_high: f64,
    /// [`TRIM_FRACTION`]-trimmed mean of the values above the split;
    /// `None` when nothing lies above it.
    pub loc_high: Option<f64>,
}

/// Splits a sample at `split` and locates the upper cluster by a trimmed
/// mean (robust to the stray near-boundary values a finite-n law puts
/// between its two limit points).
pub fn two_point_fit(values: &[f64], split: f64) -> Result<TwoPointFit> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("empty sample".into()));
    }
    if !split.is_finite() {
        return Err(Error::InvalidConfig(format!("split {split} must be finite")));
    }
    let m = values.len() as f64;
    let mut high: Vec<f64> = values.iter().copied().filter(|&v| v > split).collect();
    let mass_low = (values.len() - high.len()) as f64 / m;
    let loc_high = if high.is_empty() {
        None
    } else {
        high.sort_by(f64::total_cmp);
        let trim = (TRIM_FRACTION * high.len() as f64).floor() as usize;
        let kept = &high[trim..high.len() - trim];
        Some(kept.iter().sum::<f64>() / kept.len() as f64)
    };
    Ok(TwoPointFit {
        split,
        mass_low,
        mass_high: 1.0 - mass_low,
        loc_high,
    })
}

/// One-sample Kolmogorov–Smirnov distance between an empirical sample and
/// a reference CDF, taking the max of both one-sided gaps at every jump.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / m);
        d = d.max((i + 1) as f64 / m - f);
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov statistic.  Ties are handled by advancing
/// both empirical CDFs past the tied value before measuring the gap.  No
/// p-value is attached; tests compare against the asymptotic threshold
/// c sqrt((m+n)/(mn)) directly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidConfig("empty sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (m, n) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    Ok(d)
}

/// Standard normal CDF via the complementary error function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Everything the growth diagnostics conclude about one sequence.
#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub n_max: u64,
    pub ratio: RatioProfile,
    pub doubling_sup: f64,
    pub poly: PolyFit,
    /// `None` when the stretched fit was range-restricted (ln B not
    /// positive on the fit window).
    pub stretched: Option<StretchedFit>,
    pub subexp: SubexpReport,
    pub max_ratio: MaxRatioReport,
    /// Human-readable conclusions, in order: ratio behavior, growth class.
    pub verdicts: Vec<String>,
}

/// Runs every diagnostic and assembles verdicts.  Growth-class precedence:
/// an exponential signature (all subexponentiality tolerances failed)
/// dominates, then a superpolynomial flag (qualified by the stretched fit
/// when it holds), then the polynomial exponent.
pub fn growth_report(seq: &NormSeq, rho_grid: &[f64], l_grid: &[f64]) -> Result<GrowthReport> {
    let ratio = ratio_profile(seq)?;
    let doubling = doubling_sup(seq)?;
    let poly = poly_fit(seq)?;
    let stretched = match stretched_fit(seq) {
        Ok(f) => Some(f),
        Err(Error::RangeRestriction(_)) => None,
        Err(e) => return Err(e),
    };
    let subexp = subexp_check(seq, rho_grid)?;
    let max_ratio = max_ratio_bounds(seq, l_grid)?;

    let mut verdicts = Vec::new();
    match ratio.estimate {
        Some(est) => verdicts.push(format!(
            "consecutive ratio B(n+1)/B(n) settles near {est:.6}"
        )),
        None => verdicts.push(format!(
            "consecutive ratio B(n+1)/B(n) does not converge: oscillates persistently between {:.6} and {:.6}",
            ratio.last_quartile_min, ratio.last_quartile_max
        )),
    }
    if subexp.exponential {
        verdicts.push(
            "exponential-scale growth: log B(n)/n stays above every tolerance; \
             inconsistent with a conservative-map limit theorem"
                .to_string(),
        );
    } else if poly.superpolynomial {
        match stretched {
            Some(f) if f.is_stretched && f.alpha_hat >= 0.2 => verdicts.push(format!(
                "superpolynomial, subexponential growth with stretched-exponential profile, \
                 alpha ~= {:.3}",
                f.alpha_hat
            )),
            _ => verdicts.push(
                "superpolynomial, subexponential growth (no clean stretched-exponential fit)"
                    .to_string(),
            ),
        }
    } else {
        verdicts.push(format!(
            "polynomial growth, exponent ~= {:.3}",
            poly.exponent
        ));
    }

    Ok(GrowthReport {
        n_max: seq.len() as u64,
        ratio,
        doubling_sup: doubling,
        poly,
        stretched,
        subexp,
        max_ratio,
        verdicts,
    })
}

impl GrowthReport {
    /// Stable JSON rendering: fixed key order, 12-significant-digit
    /// numbers, flags as strings.  `doubling_sup` can overflow the float
    /// range for exponential sequences and is then written as "overflow".
    pub fn to_json(&self) -> String {
        let num_or = |x: f64, fallback: &str| {
            if x.is_finite() {
                fmt_sig12(x)
            } else {
                format!("\"{fallback}\"")
            }
        };
        let mut s = String::new();
        s.push_str("{\n");
        s.push_str(&format!("  \"n_max\": {},\n", self.n_max));
        match self.ratio.estimate {
            Some(est) => s.push_str(&format!("  \"ratio_limit_estimate\": {},\n", fmt_sig12(est))),
            None => s.push_str("  \"ratio_limit_estimate\": \"oscillating\",\n"),
        }
        s.push_str(&format!(
            "  \"ratio_last_quartile_min\": {},\n",
            fmt_sig12(self.ratio.last_quartile_min)
        ));
        s.push_str(&format!(
            "  \"ratio_last_quartile_max\": {},\n",
            fmt_sig12(self.ratio.last_quartile_max)
        ));
        s.push_str(&format!(
            "  \"doubling_sup\": {},\n",
            num_or(self.doubling_sup, "overflow")
        ));
        if self.poly.superpolynomial {
            s.push_str("  \"poly_exponent\": \"superpolynomial\",\n");
        } else {
            s.push_str(&format!(
                "  \"poly_exponent\": {},\n",
                fmt_sig12(self.poly.exponent)
            ));
        }
        s.push_str(&format!(
            "  \"poly_curvature\": {},\n",
            fmt_sig12(self.poly.curvature)
        ));
        match &self.stretched {
            Some(f) if f.is_stretched => {
                s.push_str(&format!(
                    "  \"stretched_alpha\": {},\n",
                    fmt_sig12(f.alpha_hat)
                ));
                s.push_str(&format!(
                    "  \"stretched_rms\": {},\n",
                    fmt_sig12(f.residual_rms)
                ));
            }
            Some(f) => {
                s.push_str("  \"stretched_alpha\": \"not-stretched-exponential\",\n");
                s.push_str(&format!(
                    "  \"stretched_rms\": {},\n",
                    fmt_sig12(f.residual_rms)
                ));
            }
            None => {
                s.push_str("  \"stretched_alpha\": \"range-restricted\",\n");
                s.push_str("  \"stretched_rms\": null,\n");
            }
        }
        s.push_str("  \"subexp_margin\": [\n");
        for (i, row) in self.subexp.rows.iter().enumerate() {
            s.push_str(&format!(
                "    {{\"rho\": {}, \"margin\": {}, \"pass\": {}}}{}\n",
                fmt_sig12(row.rho),
                fmt_sig12(row.margin),
                row.pass,
                if i + 1 < self.subexp.rows.len() { "," } else { "" }
            ));
        }
        s.push_str("  ],\n");
        s.push_str(&format!(
            "  \"global_C\": {},\n",
            num_or(self.max_ratio.global_c, "overflow")
        ));
        s.push_str("  \"density_violation\": [\n");
        for (i, row) in self.max_ratio.rows.iter().enumerate() {
            s.push_str(&format!(
                "    {{\"L\": {}, \"density\": {}}}{}\n",
                fmt_sig12(row.l),
                fmt_sig12(row.density),
                if i + 1 < self.max_ratio.rows.len() { "," } else { "" }
            ));
        }
        s.push_str("  ],\n");
        s.push_str("  \"constants\": {\n");
        s.push_str(&format!("    \"min_fit_len\": {MIN_FIT_LEN},\n"));
        s.push_str(&format!(
            "    \"ratio_oscillation_spread\": {},\n",
            fmt_sig12(RATIO_OSCILLATION_SPREAD)
        ));
        s.push_str(&format!(
            "    \"curvature_threshold\": {},\n",
            fmt_sig12(CURVATURE_THRESHOLD)
        ));
        s.push_str(&format!(
            "    \"stretched_rms_threshold\": {},\n",
            fmt_sig12(STRETCHED_RMS_THRESHOLD)
        ));
        s.push_str(&format!("    \"trim_fraction\": {},\n", fmt_sig12(TRIM_FRACTION)));
        s.push_str(&format!(
            "    \"burn_in_fraction\": {}\n",
            fmt_sig12(BURN_IN_FRACTION)
        ));
        s.push_str("  },\n");
        s.push_str("  \"verdicts\": [\n");
        for (i, v) in self.verdicts.iter().enumerate() {
            s.push_str(&format!(
                "    \"{}\"{}\n",
                v,
                if i + 1 < self.verdicts.len() { "," } else { "" }
            ));
        }
        s.push_str("  ]\n");
        s.push_str("}\n");
        s
    }
}

/// Centered least-squares line fit: returns (slope, intercept).
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cubic_sequence_fits_its_exponent_exactly() {
        let seq = NormSeq::power(3.0, 2000).unwrap();
        let fit = poly_fit(&seq).unwrap();
        assert!(!fit.superpolynomial);
        assert_relative_eq!(fit.exponent, 3.0, epsilon = 1e-9);
        assert!(fit.curvature.abs() < 1e-9);
    }

    #[test]
    fn log_corrected_square_still_reads_as_quadratic() {
        // B = n^2 ln n: the slope picks up the slowly-varying correction
        // (about 1/ln n) but stays within the polynomial tolerance band,
        // and the curvature stays far below the superpolynomial flag.
        let logs: Vec<f64> = (1..=10_000)
            .map(|n| {
                let x = n as f64;
                2.0 * x.ln() + x.ln().max(1.0).ln()
            })
            .collect();
        let seq = NormSeq::from_log_values(logs).unwrap();
        let fit = poly_fit(&seq).unwrap();
        assert!(!fit.superpolynomial, "curvature {} tripped the flag", fit.curvature);
        assert!((fit.exponent - 2.0).abs() < 0.2, "exponent {}", fit.exponent);
    }

    #[test]
    fn stretched_family_profile() {
        let seq = NormSeq::stretched(0.5, 10_000).unwrap();
        // Ratio: settles toward 1 from above.
        let profile = ratio_profile(&seq).unwrap();
        let est = profile.estimate.expect("tiny spread must not read as oscillation");
        assert!(est > 1.0 && est < 1.01, "estimate {est}");
        // Polynomial fit: refuses an exponent.
        let poly = poly_fit(&seq).unwrap();
        assert!(poly.superpolynomial);
        // Stretched fit: recovers alpha almost exactly.
        let fit = stretched_fit(&seq).unwrap();
        assert!((fit.alpha_hat - 0.5).abs() < 1e-6, "alpha_hat {}", fit.alpha_hat);
        assert!(fit.residual_rms < 1e-9);
        assert!(fit.is_stretched);
        // Doubling: attained at n = N/2 with the closed-form gap.
        let doubling = doubling_sup(&seq).unwrap();
        assert_relative_eq!(
            doubling,
            ((2f64.sqrt() - 1.0) * 5000f64.sqrt()).exp(),
            max_relative = 1e-9
        );
        // Subexponentiality margin at this scale: max of sqrt(n)/n over the
        // last quartile, i.e. 1/sqrt(7501) — above a 0.01 tolerance, below
        // 0.1.  The margin halves for every 4x in N.
        let sub = subexp_check(&seq, &[0.1, 0.01]).unwrap();
        assert_relative_eq!(sub.margin, 1.0 / 7501f64.sqrt(), max_relative = 1e-12);
        assert!(sub.rows[0].pass && !sub.rows[1].pass);
        assert!(!sub.exponential);
        let sub = subexp_check(&NormSeq::stretched(0.5, 40_000).unwrap(), &[0.01]).unwrap();
        assert!(sub.rows[0].pass, "margin {} at N = 40000", sub.margin);
    }

    #[test]
    fn exponential_family_is_flagged_on_every_axis() {
        let seq = NormSeq::exponential(2.0, 1000).unwrap();
        let profile = ratio_profile(&seq).unwrap();
        assert_relative_eq!(profile.estimate.unwrap(), 2.0, epsilon = 1e-12);
        let sub = subexp_check(&seq, &DEFAULT_RHO_GRID).unwrap();
        assert!(sub.exponential);
        assert_relative_eq!(sub.margin, std::f64::consts::LN_2, epsilon = 1e-12);
        let fit = stretched_fit(&seq).unwrap();
        assert!((fit.alpha_hat - 1.0).abs() < 0.01, "alpha_hat {}", fit.alpha_hat);
        let bounds = max_ratio_bounds(&seq, &[1.5, 3.0]).unwrap();
        assert_relative_eq!(bounds.global_c, 2.0, epsilon = 1e-12);
        assert_relative_eq!(bounds.rows[0].density, 1.0, epsilon = 1e-12);
        assert_relative_eq!(bounds.rows[1].density, 0.0, epsilon = 1e-12);
        let report = growth_report(&seq, &DEFAULT_RHO_GRID, &DEFAULT_L_GRID).unwrap();
        assert!(report
            .verdicts
            .iter()
            .any(|v| v.contains("inconsistent with a conservative-map limit theorem")));
    }

    #[test]
    fn quadratic_doubling_cost_is_exactly_four() {
        let seq = NormSeq::power(2.0, 4096).unwrap();
        assert_relative_eq!(doubling_sup(&seq).unwrap(), 4.0, epsilon = 1e-12);
        let report = growth_report(&seq, &DEFAULT_RHO_GRID, &DEFAULT_L_GRID).unwrap();
        assert!(report.verdicts.iter().any(|v| v.contains("polynomial growth")));
        // The stretched read-out lands near 0, the polynomial-regime
        // signature for that statistic.
        assert!(report.stretched.unwrap().alpha_hat < 0.2);
    }

    #[test]
    fn parity_normalization_oscillates_but_stays_subexponential() {
        let seq = NormSeq::parity(0.5, 10_000).unwrap();
        let profile = ratio_profile(&seq).unwrap();
        assert!(profile.is_oscillating(), "spread {}", profile.log_spread);
        // Consecutive ratios alternate between ~e^d/2 and ~2e^d with d the
        // tiny stretched increment.
        assert!((profile.last_quartile_min - 0.5).abs() < 0.02);
        assert!((profile.last_quartile_max - 2.0).abs() < 0.02);
        // The one 3-fold jump (B_2/B_1 = 2 e^{sqrt2 - 1}) sits at n = 1,
        // inside the burn-in, so the density at L = 3 is zero while the
        // global constant still sees it.
        let bounds = max_ratio_bounds(&seq, &[3.0]).unwrap();
        assert_relative_eq!(
            bounds.global_c,
            2.0 * (2f64.sqrt() - 1.0).exp(),
            max_relative = 1e-12
        );
        assert!(bounds.rows[0].density < 0.01);
        // Still comfortably subexponential at scale, and still carrying the
        // alpha = 1/2 profile underneath the oscillation.
        let big = NormSeq::parity(0.5, 4_000_000).unwrap();
        let sub = subexp_check(&big, &DEFAULT_RHO_GRID).unwrap();
        assert!(sub.rows.iter().all(|r| r.pass), "margin {}", sub.margin);
        let fit = stretched_fit(&seq).unwrap();
        assert!(fit.is_stretched);
        assert!((fit.alpha_hat - 0.5).abs() < 0.05, "alpha_hat {}", fit.alpha_hat);
    }

    #[test]
    fn two_point_fit_handles_degenerate_and_clean_splits() {
        let all_ones = vec![1.0; 100];
        let fit = two_point_fit(&all_ones, 0.05).unwrap();
        assert_eq!(fit.mass_low, 0.0);
        assert_eq!(fit.mass_high, 1.0);
        assert_relative_eq!(fit.loc_high.unwrap(), 1.0, epsilon = 1e-12);

        let all_zero = vec![0.0; 50];
        let fit = two_point_fit(&all_zero, 0.05).unwrap();
        assert_eq!(fit.mass_low, 1.0);
        assert_eq!(fit.mass_high, 0.0);
        assert!(fit.loc_high.is_none());

        let mixed = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let fit = two_point_fit(&mixed, 0.05).unwrap();
        assert_relative_eq!(fit.mass_low, 0.3, epsilon = 1e-12);
        assert_relative_eq!(fit.mass_high, 0.7, epsilon = 1e-12);
        assert_relative_eq!(fit.loc_high.unwrap(), 1.0, epsilon = 1e-12);

        // The trim discards outliers the untrimmed mean would absorb.
        let mut with_outlier = vec![1.0; 98];
        with_outlier.push(50.0);
        with_outlier.push(0.9);
        let fit = two_point_fit(&with_outlier, 0.05).unwrap();
        assert!((fit.loc_high.unwrap() - 1.0).abs() < 1e-6);

        assert!(two_point_fit(&[], 0.05).is_err());
        assert!(two_point_fit(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn ks_distance_matches_hand_computations() {
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        assert_relative_eq!(ks_distance(&[0.5], uniform).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            ks_distance(&[0.25, 0.75], uniform).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        // Both one-sided gaps matter: a sample hugging 0 shows its gap on
        // the (i+1)/m side.
        assert_relative_eq!(
            ks_distance(&[0.0, 0.0], uniform).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ks_distance_of_seeded_uniforms_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let sample: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let d = ks_distance(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < 0.01, "KS = {d}");
    }

    #[test]
    fn two_sample_ks_hand_values_and_symmetry() {
        assert_relative_eq!(
            ks_two_sample(&[1.0, 2.0], &[1.5, 2.5]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let a = [0.1, 0.4, 0.4, 0.7];
        assert_relative_eq!(ks_two_sample(&a, &a).unwrap(), 0.0, epsilon = 1e-12);
        let b = [0.2, 0.4, 0.9];
        assert_relative_eq!(
            ks_two_sample(&a, &b).unwrap(),
            ks_two_sample(&b, &a).unwrap(),
            epsilon = 1e-12
        );
        assert!(ks_two_sample(&a, &[]).is_err());
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_relative_eq!(standard_normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(standard_normal_cdf(1.959_963_985), 0.975, epsilon = 1e-9);
        assert_relative_eq!(
            standard_normal_cdf(-1.0),
            1.0 - standard_normal_cdf(1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn report_json_is_valid_and_carries_the_stable_keys() {
        let seq = NormSeq::stretched(0.5, 10_000).unwrap();
        let report = growth_report(&seq, &DEFAULT_RHO_GRID, &DEFAULT_L_GRID).unwrap();
        let json = report.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).expect("report must be JSON");
        assert_eq!(value["n_max"], 10_000);
        assert_eq!(value["poly_exponent"], "superpolynomial");
        let alpha = value["stretched_alpha"].as_f64().unwrap();
        assert!((alpha - 0.5).abs() < 1e-6);
        assert_eq!(value["subexp_margin"].as_array().unwrap().len(), 3);
        assert_eq!(value["density_violation"][0]["L"].as_f64().unwrap(), 1.5);
        assert!(value["constants"]["trim_fraction"].as_f64().unwrap() == 0.1);
        assert!(value["verdicts"].as_array().unwrap().len() == 2);
        // Identical inputs produce byte-identical reports.
        let again = growth_report(&seq, &DEFAULT_RHO_GRID, &DEFAULT_L_GRID).unwrap();
        assert_eq!(json, again.to_json());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(NormSeq::from_log_values(vec![]).is_err());
        assert!(NormSeq::from_log_values(vec![1.0, f64::NAN]).is_err());
        assert!(NormSeq::stretched(1.0, 100).is_err());
        assert!(NormSeq::power(0.0, 100).is_err());
        assert!(NormSeq::exponential(1.0, 100).is_err());
        let short = NormSeq::power(2.0, 8).unwrap();
        assert!(poly_fit(&short).is_err());
        assert!(ratio_profile(&short).is_err());
        let seq = NormSeq::power(2.0, 100).unwrap();
        assert!(subexp_check(&seq, &[]).is_err());
        assert!(subexp_check(&seq, &[-0.1]).is_err());
        assert!(max_ratio_bounds(&seq, &[1.0]).is_err());
        // Decaying sequences restrict the stretched fit's range.
        let decaying = NormSeq::from_log_values(vec![-1.0; 64]).unwrap();
        match stretched_fit(&decaying) {
            Err(Error::RangeRestriction(_)) => {}
            other => panic!("expected range restriction, got {other:?}"),
        }
        // The report survives that restriction and says so.
        let report = growth_report(&decaying, &DEFAULT_RHO_GRID, &DEFAULT_L_GRID).unwrap();
        assert!(report.stretched.is_none());
        assert!(report.to_json().contains("range-restricted"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// Rescaling B by a constant c shifts every log by ln c, which the
        /// difference- and slope-based statistics must not see (up to float
        /// wobble from the shifted subtraction).
        #[test]
        fn scale_invariant_statistics_ignore_constant_factors(
            c in 0.5f64..2.0,
            p in 0.5f64..4.0,
        ) {
            let base = NormSeq::power(p, 512).unwrap();
            let scaled = NormSeq::from_log_values(
                base.log_values().iter().map(|&v| v + c.ln()).collect(),
            ).unwrap();
            let (fa, fb) = (poly_fit(&base).unwrap(), poly_fit(&scaled).unwrap());
            prop_assert!((fa.exponent - fb.exponent).abs() < 1e-9);
            prop_assert!((fa.curvature - fb.curvature).abs() < 1e-9);
            let (ra, rb) = (ratio_profile(&base).unwrap(), ratio_profile(&scaled).unwrap());
            prop_assert!((ra.last_quartile_min - rb.last_quartile_min).abs() < 1e-9);
            prop_assert!((ra.last_quartile_max - rb.last_quartile_max).abs() < 1e-9);
            prop_assert!((ra.estimate.unwrap() - rb.estimate.unwrap()).abs() < 1e-9);
            let (da, db) = (doubling_sup(&base).unwrap(), doubling_sup(&scaled).unwrap());
            prop_assert!((da - db).abs() <= 1e-9 * da.abs());
            let (ma, mb) = (
                max_ratio_bounds(&base, &[1.5]).unwrap(),
                max_ratio_bounds(&scaled, &[1.5]).unwrap(),
            );
            prop_assert!((ma.global_c - mb.global_c).abs() < 1e-9);
        }

        /// The stretched fit is only asymptotically scale-invariant (the
        /// inner logarithm sees the shift), so the property is asserted for
        /// near-unit factors only.
        #[test]
        fn stretched_fit_is_stable_under_near_unit_rescaling(
            log_c in -1e-7f64..1e-7,
        ) {
            let base = NormSeq::stretched(0.5, 3000).unwrap();
            let scaled = NormSeq::from_log_values(
                base.log_values().iter().map(|&v| v + log_c).collect(),
            ).unwrap();
            let (fa, fb) = (stretched_fit(&base).unwrap(), stretched_fit(&scaled).unwrap());
            prop_assert!((fa.alpha_hat - fb.alpha_hat).abs() < 1e-5);
        }

        /// Violation densities are monotone nonincreasing in L and vanish
        /// beyond the global constant.
        #[test]
        fn violation_density_is_monotone_in_the_jump_factor(
            base in 1.1f64..3.0,
        ) {
            let seq = NormSeq::exponential(base, 256).unwrap();
            let grid = [1.0 + (base - 1.0) * 0.5, base - 1e-9, base + 1e-9, base * 1.5];
            let grid: Vec<f64> = grid.iter().copied().filter(|&l| l > 1.0).collect();
            let report = max_ratio_bounds(&seq, &grid).unwrap();
            for w in report.rows.windows(2) {
                prop_assert!(w[0].density >= w[1].density);
            }
            let beyond = max_ratio_bounds(&seq, &[report.global_c * 1.001]).unwrap();
            prop_assert!(beyond.rows[0].density == 0.0);
        }
    }
}
