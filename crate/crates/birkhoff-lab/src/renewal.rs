//! Exact renewal tables: return-time masses, height laws, and the
//! dominant-excursion functionals built from them.
//!
//! For an excursion law with masses p_k (k >= 2) the renewal masses
//!
//! ```text
//!     u[0] = 1,   u[1] = 0,   u[s] = sum_{k=2}^{s} p_k u[s-k]
//! ```
//!
//! give the probability that the walk sits at the base state at time s.
//! Everything else here is a functional of u and the law's tail T:
//!
//! * the height law  P(height at time n = k) = T(k) * u[n-k],
//! * its completeness  sum_{k<=n} T(k) u[n-k] = 1  — an algebraic identity
//!   that holds for any summable p whatsoever, so its defect measures pure
//!   floating-point drift and nothing about the law,
//! * window masses  P(height in [n - n^beta, n)),
//! * the ratio  u_s T(s)^2 / p_s  that tends to 1 exactly when single long
//!   excursions dominate the tail,
//! * the law of the dominant-term surrogate  e^{h^alpha - n^alpha}, both as
//!   a distribution function over a threshold grid and as a single
//!   exceedance probability computed by the complementary window sum —
//!   the latter needs u only out to n - k*(t), which is what makes exact
//!   predictions at n = 10^6 affordable while the full table stops at 10^5.
//!
//! The quadratic-time builder uses a compensated inner product per entry,
//! keeping the completeness defect near 1e-12 even at tables of 10^5
//! entries.  [`composition_oracle`] recomputes u[s] by exhaustively
//! enumerating integer compositions — exponentially slow and deliberately
//! independent of the convolution recursion, it exists so the recursion can
//! be checked against something that cannot share its bugs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::law::{ExcursionLaw, Kahan};

/// Work/memory guard for table construction.
#[derive(Clone, Copy, Debug)]
pub struct RenewalBudget {
    /// Largest admissible table horizon.  The build is quadratic in this,
    /// so the default keeps a single-core build in the tens of seconds.
    pub max_table: u64,
}

impl Default for RenewalBudget {
    fn default() -> Self {
        RenewalBudget { max_table: 200_000 }
    }
}

/// The exact height law at one time n: probabilities for heights 0..=n.
#[derive(Clone, Debug)]
pub struct HeightDistribution {
    n: u64,
    probs: Vec<f64>,
    total: f64,
}

impl HeightDistribution {
    /// The time the law was evaluated at.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// P(height = k); zero beyond n.
    pub fn prob(&self, k: u64) -> f64 {
        self.probs.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Compensated total mass; its distance from 1 is the completeness
    /// defect at n.
    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Renewal masses u[0..=n_max] for one excursion law, plus the exact
/// functionals computed from them.
pub struct RenewalTable {
    law: Arc<ExcursionLaw>,
    u: Vec<f64>,
}

impl RenewalTable {
    /// Builds the table with the default budget.
    pub fn build(law: Arc<ExcursionLaw>, n_max: u64) -> Result<Self> {
        Self::build_with_budget(law, n_max, RenewalBudget::default())
    }

    pub fn build_with_budget(
        law: Arc<ExcursionLaw>,
        n_max: u64,
        budget: RenewalBudget,
    ) -> Result<Self> {
        if n_max > budget.max_table {
            return Err(Error::BudgetExceeded(format!(
                "renewal table horizon {n_max} exceeds budget {} (quadratic build)",
                budget.max_table
            )));
        }
        law.ensure_horizon(n_max);
        let n = n_max as usize;
        let p: Vec<f64> = (0..=n).map(|k| law.pmf(k as u64)).collect();
        let mut u = vec![0.0f64; n + 1];
        u[0] = 1.0;
        // u[1] stays 0: no mass below the support floor.
        for s in 2..=n {
            let mut acc = Kahan::default();
            // sum_{m=0}^{s-2} u[m] p[s-m]; the reversed zip walks p from
            // index s down to 2.
            for (&um, &pk) in u[..=s - 2].iter().zip(p[2..=s].iter().rev()) {
                acc.add(um * pk);
            }
            u[s] = acc.value();
        }
        Ok(RenewalTable { law, u })
    }

    pub fn law(&self) -> &Arc<ExcursionLaw> {
        &self.law
    }

    /// Largest index the table holds.
    pub fn n_max(&self) -> u64 {
        (self.u.len() - 1) as u64
    }

    /// u[s] = P(walk is at the base state at time s).
    pub fn u(&self, s: u64) -> Result<f64> {
        self.u
            .get(s as usize)
            .copied()
            .ok_or(Error::OutOfHorizon {
                index: s,
                horizon: self.n_max(),
            })
    }

    /// The exact height law at time n <= n_max.
    pub fn height_distribution(&self, n: u64) -> Result<HeightDistribution> {
        if n > self.n_max() {
            return Err(Error::OutOfHorizon {
                index: n,
                horizon: self.n_max(),
            });
        }
        self.law.ensure_horizon(n);
        let n_us = n as usize;
        let mut probs = Vec::with_capacity(n_us + 1);
        let mut acc = Kahan::default();
        for k in 0..=n_us {
            let mass = self.law.tail(k as u64) * self.u[n_us - k];
            probs.push(mass);
            acc.add(mass);
        }
        Ok(HeightDistribution {
            n,
            probs,
            total: acc.value(),
        })
    }

    /// |sum_{k<=n} T(k) u[n-k] - 1|: pure accumulated rounding, since the
    /// identity is algebraic.
    pub fn completeness_defect(&self, n: u64) -> Result<f64> {
        Ok((self.height_distribution(n)?.total() - 1.0).abs())
    }

    /// The largest completeness defect over every n <= n_max.  Quadratic:
    /// at the default budget this is seconds, not minutes, but it is the
    /// most expensive self-check in the crate.
    pub fn max_completeness_defect(&self) -> f64 {
        let n = self.u.len() - 1;
        self.law.ensure_horizon(n as u64);
        let tails: Vec<f64> = (0..=n).map(|k| self.law.tail(k as u64)).collect();
        let mut worst = 0.0f64;
        for s in 0..=n {
            let mut acc = Kahan::default();
            for (&t, &um) in tails[..=s].iter().zip(self.u[..=s].iter().rev()) {
                acc.add(t * um);
            }
            worst = worst.max((acc.value() - 1.0).abs());
        }
        worst
    }

    /// P(height at time n lies in [n - n^beta, n)): the mass of returns
    /// within the last floor(n^beta) steps.  This is the quantity whose
    /// limit is beta itself.
    pub fn window_mass(&self, n: u64, beta: f64) -> Result<f64> {
        if !(beta > 0.0 && beta < 1.0) || !beta.is_finite() {
            return Err(Error::InvalidWindow(format!(
                "beta = {beta} must lie strictly inside (0, 1)"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidWindow(format!("n = {n} too small")));
        }
        if n > self.n_max() {
            return Err(Error::OutOfHorizon {
                index: n,
                horizon: self.n_max(),
            });
        }
        let width = (n as f64).powf(beta).floor() as u64;
        debug_assert!(width >= 1 && width < n);
        self.law.ensure_horizon(n);
        let mut acc = Kahan::default();
        // Heights k in [n - width, n - 1] are returns m = n - k steps ago.
        for m in 1..=width {
            acc.add(self.u[m as usize] * self.law.tail(n - m));
        }
        Ok(acc.value())
    }

    /// u_s T(s)^2 / p_s.  For the log-squared family the slowly varying
    /// factors cancel exactly and the ratio tends to 1; for fast-decaying
    /// families it merely stays bounded.  Errors when p_s = 0.
    pub fn nagaev_ratio(&self, s: u64) -> Result<f64> {
        let p = self.law.pmf(s);
        if p == 0.0 {
            return Err(Error::UndefinedRatio(s));
        }
        let u = self.u(s)?;
        let t = self.law.tail(s);
        Ok(u * t * t / p)
    }

    /// Distribution function of the dominant-term surrogate
    /// e^{h^alpha - n^alpha} over a strictly increasing positive threshold
    /// grid: entry i is P(h^alpha - n^alpha <= ln t_i) under the exact
    /// height law at time n.  The comparison runs entirely in log space, so
    /// thresholds far below e^{-n^alpha} are handled without underflow.
    pub fn dominant_ratio_law(&self, n: u64, alpha: f64, thresholds: &[f64]) -> Result<Vec<f64>> {
        validate_alpha(alpha)?;
        validate_grid(thresholds, "threshold")?;
        if n < 1 {
            return Err(Error::InvalidWindow("n = 0 has no height law".into()));
        }
        let dist = self.height_distribution(n)?;
        let mut cum = Vec::with_capacity(dist.probs.len());
        let mut acc = Kahan::default();
        for &p in &dist.probs {
            acc.add(p);
            cum.push(acc.value());
        }
        let na = (n as f64).powf(alpha);
        let masses = thresholds
            .iter()
            .map(|&t| {
                let bound = na + t.ln();
                if bound < 0.0 {
                    return 0.0;
                }
                cum[largest_height_within(bound, alpha, n) as usize]
            })
            .collect();
        Ok(masses)
    }

    /// P(e^{h^alpha - n^alpha} > t), computed as the complementary window
    /// sum over recent returns: only u[m] for m <= n - k*(t) is touched,
    /// where k*(t) is the smallest height exceeding the threshold.  At
    /// n = 10^6, alpha = 1/2, t = 1/2 that window is ~1400 entries, which is
    /// why this works far beyond the full table's reach.  Errors if the
    /// window itself outgrows the table.
    pub fn dominant_exceedance(&self, n: u64, alpha: f64, threshold: f64) -> Result<f64> {
        validate_alpha(alpha)?;
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::InvalidWindow(format!(
                "threshold = {threshold} must be positive and finite"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidWindow("n = 0 has no height law".into()));
        }
        let na = (n as f64).powf(alpha);
        let bound = na + threshold.ln();
        let k_min = if bound < 0.0 {
            0
        } else {
            let mut g = bound.powf(1.0 / alpha).floor().min(n as f64) as u64;
            while g > 0 && (g as f64).powf(alpha) > bound {
                g -= 1;
            }
            while (g as f64).powf(alpha) <= bound {
                g += 1;
            }
            g
        };
        if k_min > n {
            return Ok(0.0);
        }
        let window = n - k_min;
        if window > self.n_max() {
            return Err(Error::OutOfHorizon {
                index: window,
                horizon: self.n_max(),
            });
        }
        self.law.ensure_horizon(n);
        let mut acc = Kahan::default();
        for m in 0..=window {
            acc.add(self.u[m as usize] * self.law.tail(n - m));
        }
        Ok(acc.value())
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "alpha = {alpha} must lie strictly inside (0, 1)"
        )));
    }
    Ok(())
}

fn validate_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig(format!("empty {what} grid")));
    }
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidConfig(format!(
                "{what} grid must increase strictly: {} !< {}",
                w[0], w[1]
            )));
        }
    }
    if grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "{what} grid entries must be positive and finite"
        )));
    }
    Ok(())
}

/// Largest height k <= n with k^alpha <= bound (bound >= 0 so k = 0 always
/// qualifies).  A float estimate plus integer fix-up steps, immune to powf
/// rounding at the boundary.
fn largest_height_within(bound: f64, alpha: f64, n: u64) -> u64 {
    debug_assert!(bound >= 0.0);
    let raw = bound.powf(1.0 / alpha);
    let mut k = if raw >= n as f64 { n } else { raw.floor() as u64 };
    while k < n && ((k + 1) as f64).powf(alpha) <= bound {
        k += 1;
    }
    while k > 0 && (k as f64).powf(alpha) > bound {
        k -= 1;
    }
    k
}

/// u[s] by brute force: enumerates every composition of s into parts >= 2
/// and sums the products of part masses.  Exponential in s (the tree has
/// on the order of 1.6^s leaves); practical to s ~ 35.  Shares nothing
/// with the convolution recursion beyond the pmf itself.
pub fn composition_oracle(law: &ExcursionLaw, s: u64) -> f64 {
    fn walk(law: &ExcursionLaw, rem: u64, prod: f64, acc: &mut f64) {
        if rem == 0 {
            *acc += prod;
            return;
        }
        for first in 2..=rem {
            walk(law, rem - first, prod * law.pmf(first), acc);
        }
    }
    let mut acc = 0.0;
    walk(law, s, 1.0, &mut acc);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::LawSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn logsq_table(n: u64) -> RenewalTable {
        let law = Arc::new(ExcursionLaw::new(LawSpec::log_squared()).unwrap());
        RenewalTable::build(law, n).unwrap()
    }

    #[test]
    fn first_masses_match_hand_expansion() {
        for spec in [LawSpec::log_squared(), LawSpec::power_law(2.0)] {
            let law = Arc::new(ExcursionLaw::new(spec).unwrap());
            let t = RenewalTable::build(Arc::clone(&law), 8).unwrap();
            let p = |k: u64| law.pmf(k);
            assert_eq!(t.u(0).unwrap(), 1.0);
            assert_eq!(t.u(1).unwrap(), 0.0);
            assert_relative_eq!(t.u(2).unwrap(), p(2), max_relative = 1e-15);
            assert_relative_eq!(t.u(3).unwrap(), p(3), max_relative = 1e-15);
            assert_relative_eq!(t.u(4).unwrap(), p(4) + p(2) * p(2), max_relative = 1e-14);
            assert_relative_eq!(
                t.u(5).unwrap(),
                p(5) + 2.0 * p(2) * p(3),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn composition_oracle_agrees_with_the_recursion() {
        for spec in [
            LawSpec::log_squared(),
            LawSpec::log_squared_even_only(),
            LawSpec::power_law(2.0),
        ] {
            let law = Arc::new(ExcursionLaw::new(spec).unwrap());
            let t = RenewalTable::build(Arc::clone(&law), 30).unwrap();
            for s in 0..=30u64 {
                let brute = composition_oracle(&law, s);
                let fast = t.u(s).unwrap();
                assert!(
                    (brute - fast).abs() <= 1e-12 * brute.max(1.0),
                    "{:?}: u[{s}] = {fast} vs brute {brute}",
                    spec.kind
                );
            }
        }
    }

    #[test]
    fn completeness_defect_stays_at_rounding_scale() {
        for spec in [
            LawSpec::log_squared(),
            LawSpec::log_squared_even_only(),
            LawSpec::power_law(1.5),
        ] {
            let law = Arc::new(ExcursionLaw::new(spec).unwrap());
            let t = RenewalTable::build(law, 2000).unwrap();
            let worst = t.max_completeness_defect();
            assert!(
                worst <= 1e-9,
                "{:?}: completeness defect {worst:e}",
                spec.kind
            );
        }
    }

    #[test]
    fn height_distribution_is_a_probability_law() {
        let t = logsq_table(5000);
        let d = t.height_distribution(5000).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-10);
        assert!(d.probs().iter().all(|&p| p >= 0.0));
        assert_eq!(d.prob(5001), 0.0);
        // Height n means no return at all: tail(n) * u[0].
        assert_relative_eq!(
            d.prob(5000),
            t.law().tail(5000),
            max_relative = 1e-15
        );
    }

    #[test]
    fn window_mass_matches_the_height_law_route() {
        let t = logsq_table(10_000);
        let d = t.height_distribution(10_000).unwrap();
        for beta in [0.3, 0.5, 0.7] {
            let direct = t.window_mass(10_000, beta).unwrap();
            let width = (10_000f64).powf(beta).floor() as u64;
            let mut via_law = Kahan::default();
            for k in (10_000 - width)..10_000 {
                via_law.add(d.prob(k));
            }
            assert_relative_eq!(direct, via_law.value(), max_relative = 1e-12);
            assert!(direct > 0.0 && direct < 1.0);
        }
        // Wider windows capture more mass.
        let lo = t.window_mass(10_000, 0.2).unwrap();
        let mid = t.window_mass(10_000, 0.5).unwrap();
        let hi = t.window_mass(10_000, 0.8).unwrap();
        assert!(lo < mid && mid < hi);
    }

    #[test]
    fn nagaev_ratio_trends_toward_one_for_the_log_squared_family() {
        let t = logsq_table(10_000);
        let r3 = t.nagaev_ratio(1_000).unwrap();
        let r4 = t.nagaev_ratio(10_000).unwrap();
        assert!((1.10..1.12).contains(&r3), "ratio at 10^3: {r3}");
        assert!((1.03..1.05).contains(&r4), "ratio at 10^4: {r4}");
        assert!((r4 - 1.0).abs() < (r3 - 1.0).abs());
        // Off-support points have no ratio.
        assert!(matches!(
            t.nagaev_ratio(1),
            Err(Error::UndefinedRatio(1))
        ));
    }

    #[test]
    fn dominant_ratio_law_is_a_distribution_function() {
        let t = logsq_table(10_000);
        let grid = [1e-250, 1e-10, 0.01, 0.5, 0.9, 1.0, 2.0];
        let masses = t.dominant_ratio_law(10_000, 0.5, &grid).unwrap();
        for w in masses.windows(2) {
            assert!(w[0] <= w[1], "distribution function must be monotone");
        }
        for &m in &masses {
            assert!((0.0..=1.0 + 1e-12).contains(&m));
        }
        // At t = 1 every height k <= n qualifies.
        assert_relative_eq!(masses[5], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn exceedance_complements_the_distribution_function() {
        let t = logsq_table(10_000);
        for &thr in &[0.1, 0.5, 0.9] {
            let below = t.dominant_ratio_law(10_000, 0.5, &[thr]).unwrap()[0];
            let above = t.dominant_exceedance(10_000, 0.5, thr).unwrap();
            assert!(
                (below + above - 1.0).abs() < 1e-9,
                "split at {thr}: {below} + {above}"
            );
        }
        // Exceedance reaches beyond the table horizon when the window is
        // short enough...
        let far = t.dominant_exceedance(1_000_000, 0.5, 0.5).unwrap();
        assert!(far > 0.0 && far < 1.0);
        // ...but an absurdly small threshold would need the whole height
        // law at n and must refuse rather than approximate.
        assert!(matches!(
            t.dominant_exceedance(1_000_000, 0.5, 1e-300),
            Err(Error::OutOfHorizon { .. })
        ));
    }

    #[test]
    fn budget_and_horizon_errors() {
        let law = Arc::new(ExcursionLaw::new(LawSpec::log_squared()).unwrap());
        assert!(matches!(
            RenewalTable::build_with_budget(
                Arc::clone(&law),
                1000,
                RenewalBudget { max_table: 999 }
            ),
            Err(Error::BudgetExceeded(_))
        ));
        let t = RenewalTable::build(law, 100).unwrap();
        assert!(matches!(
            t.u(101),
            Err(Error::OutOfHorizon {
                index: 101,
                horizon: 100
            })
        ));
        assert!(t.window_mass(100, 1.0).is_err());
        assert!(t.window_mass(101, 0.5).is_err());
        assert!(t.dominant_ratio_law(100, 0.5, &[]).is_err());
        assert!(t.dominant_ratio_law(100, 0.5, &[0.5, 0.5]).is_err());
        assert!(t.dominant_ratio_law(100, 1.5, &[0.5]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn dominant_law_valid_for_random_parameters(
            n in 50u64..400,
            alpha in 0.1f64..0.9,
        ) {
            let law = Arc::new(ExcursionLaw::new(LawSpec::log_squared()).unwrap());
            let t = RenewalTable::build(law, n).unwrap();
            let grid = [0.01, 0.1, 0.5, 1.0];
            let masses = t.dominant_ratio_law(n, alpha, &grid).unwrap();
            for w in masses.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            for (i, &thr) in grid.iter().enumerate() {
                let above = t.dominant_exceedance(n, alpha, thr).unwrap();
                prop_assert!((masses[i] + above - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn window_mass_monotone_in_beta(n in 100u64..2000) {
            let law = Arc::new(ExcursionLaw::new(LawSpec::log_squared()).unwrap());
            let t = RenewalTable::build(law, n).unwrap();
            let mut last = 0.0;
            for beta in [0.15, 0.35, 0.55, 0.75, 0.95f64] {
                let m = t.window_mass(n, beta).unwrap();
                prop_assert!(m + 1e-15 >= last, "beta sweep must widen mass");
                last = m;
            }
        }
    }
}
