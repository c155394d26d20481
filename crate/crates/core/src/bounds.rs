//! Closed-form constants, drift conditions, the percolation exclusion
//! interval, and the integral inclusion criterion — the analytic side of
//! the infinite-cycle question, evaluated numerically.
//!
//! Conventions: `d` counts offspring (every vertex has `d` children), `d0`
//! counts graph degree (`d0 = d + 1`).  `T` is the cylinder period.

use serde::{Deserialize, Serialize};

use crate::error::Error;

fn check_d(d: u32) -> Result<f64, Error> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "offspring bound must be at least 2, got {d}"
        )));
    }
    Ok(f64::from(d))
}

fn check_t(t: f64) -> Result<f64, Error> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "period must be finite and nonnegative, got {t}"
        )));
    }
    Ok(t)
}

/// Expected fresh-descent rate constant:
/// `d²(d−1) / (2(d+1)²) · (1 − e^{−(d+1)T/2})`.
pub fn c1(d: u32, t: f64) -> Result<f64, Error> {
    let d = check_d(d)?;
    let t = check_t(t)?;
    Ok(d * d * (d - 1.0) / (2.0 * (d + 1.0) * (d + 1.0)) * (-(-(d + 1.0) * t / 2.0).exp_m1()))
}

/// Good-return rate constant: `(d−1) / (4(d+1)) · (1 − e^{−(d−1)T/2})`.
pub fn c2(d: u32, t: f64) -> Result<f64, Error> {
    let d = check_d(d)?;
    let t = check_t(t)?;
    Ok((d - 1.0) / (4.0 * (d + 1.0)) * (-(-(d - 1.0) * t / 2.0).exp_m1()))
}

/// Sharpened descent constant `d/18` used in the high-degree regime.
pub fn c1_star(d: u32) -> Result<f64, Error> {
    Ok(check_d(d)? / 18.0)
}

/// Sharpened good-return constant: `3(d−1) / (4(d+1)) · (1 − e^{−(d−1)T/2})`.
pub fn c2_star(d: u32, t: f64) -> Result<f64, Error> {
    let d = check_d(d)?;
    let t = check_t(t)?;
    Ok(3.0 * (d - 1.0) / (4.0 * (d + 1.0)) * (-(-(d - 1.0) * t / 2.0).exp_m1()))
}

/// Left-hand side of the transience drift condition
/// `c2·c1·T − 2(1 − c2)`; positivity is the sufficient condition.  With
/// `starred` the sharpened constants are used.
pub fn drift_condition(d: u32, t: f64, starred: bool) -> Result<f64, Error> {
    check_d(d)?;
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drift condition needs a positive period, got {t}"
        )));
    }
    let (a, b) = if starred {
        (c1_star(d)?, c2_star(d, t)?)
    } else {
        (c1(d, t)?, c2(d, t)?)
    };
    Ok(b * a * t - 2.0 * (1.0 - b))
}

/// Right endpoint of the percolation exclusion interval for the
/// `d`-offspring tree: `−log(1 − 1/d)`.  Periods below it put the origin
/// in a finite cluster, so no infinite cycle can contain the root.
pub fn percolation_exclusion(d: u32) -> Result<f64, Error> {
    let d = check_d(d)?;
    Ok(-(-1.0 / d).ln_1p())
}

/// The decreasing rational threshold function
/// `(31γ/6 + 395/36) / (γ − 13/6)`, defined for `γ > 13/6`.
pub fn threshold_f(gamma: f64) -> Result<f64, Error> {
    if !(gamma > 13.0 / 6.0) {
        return Err(Error::DomainError(format!(
            "threshold function needs gamma > 13/6, got {gamma}"
        )));
    }
    Ok((31.0 * gamma / 6.0 + 395.0 / 36.0) / (gamma - 13.0 / 6.0))
}

/// Log of the inclusion integrand `(e^{−a} + e^{−(T−a)} − e^{−T})^{d0−2}`,
/// evaluated as `(d0−2)·ln(1 + (e^{−a}−1) + e^{−T}(e^{a}−1))` so the
/// plateau between the two endpoint boundary layers underflows gracefully
/// instead of poisoning the power.
fn ln_integrand(d0: f64, t: f64, a: f64) -> f64 {
    (d0 - 2.0) * ((-a).exp_m1() + (-t).exp() * a.exp_m1()).ln_1p()
}

fn integrand(d0: f64, t: f64, a: f64) -> f64 {
    ln_integrand(d0, t, a).exp()
}

fn validate_criterion_args(d0: u32, t: f64) -> Result<(f64, f64), Error> {
    if d0 < 3 {
        return Err(Error::InvalidParameter(format!(
            "inclusion criterion needs degree at least 3, got {d0}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "inclusion criterion needs a positive finite period, got {t}"
        )));
    }
    Ok((f64::from(d0), t))
}

/// Recursive Simpson refinement with Richardson correction.  `fa`, `fm`,
/// `fb` are integrand values at the ends and midpoint, `whole` the panel's
/// Simpson estimate.  A leaf is accepted when its Richardson error clears
/// the local tolerance, when it reaches the rounding floor of the panel
/// sums (further splitting only chases noise), or when depth runs out; the
/// error actually incurred accumulates into `err_acc` so the caller can
/// judge the overall tolerance honestly.
#[allow(clippy::too_many_arguments)]
fn adapt(
    d0: f64,
    t: f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err_acc: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = integrand(d0, t, lm);
    let frm = integrand(d0, t, rm);
    let h12 = (b - a) / 12.0;
    let left = h12 * (fa + 4.0 * flm + fm);
    let right = h12 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below this, delta is cancellation noise of the panel sums and
    // further splitting cannot improve the estimate.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs() + whole.abs());
    if delta.abs() <= 15.0 * tol || delta.abs() <= floor || depth == 0 {
        *err_acc += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    let half_tol = 0.5 * tol;
    adapt(d0, t, a, m, fa, flm, fm, left, half_tol, depth - 1, err_acc)
        + adapt(d0, t, m, b, fm, frm, fb, right, half_tol, depth - 1, err_acc)
}

fn adaptive_panel(d0: f64, t: f64, a: f64, b: f64, tol: f64, err_acc: &mut f64) -> f64 {
    let fa = integrand(d0, t, a);
    let fm = integrand(d0, t, 0.5 * (a + b));
    let fb = integrand(d0, t, b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adapt(d0, t, a, b, fa, fm, fb, whole, tol, 40, err_acc)
}

/// Inclusion criterion `(d0−1)·e^{−T}·∫₀ᵀ (e^{−a}+e^{−(T−a)}−e^{−T})^{d0−2} da`
/// for the degree-`d0` tree, by adaptive Simpson quadrature to absolute
/// tolerance `quad_tol`.  A value above 1 certifies that infinite cycles
/// occur at period `T`.
///
/// The integrand is 1 at both endpoints and collapses over an interior
/// plateau, with boundary layers of width on the order of `1/d0`; the
/// initial panels are carved at width `min(T/2, 10/d0)` so refinement
/// starts inside the layers.
pub fn integral_criterion(d0: u32, t: f64, quad_tol: f64) -> Result<f64, Error> {
    let (d0f, t) = validate_criterion_args(d0, t)?;
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {quad_tol}"
        )));
    }
    let scale = (d0f - 1.0) * (-t).exp();
    if scale == 0.0 {
        // The integrand is at most 1, so the integral is at most T and the
        // product vanishes with the prefactor.
        return Ok(0.0);
    }
    let inner_tol = quad_tol / scale;
    let w = (t / 2.0).min(10.0 / d0f);
    let knots: &[f64] = if w < t / 2.0 {
        &[0.0, w, t - w, t]
    } else {
        &[0.0, t / 2.0, t]
    };
    let per_panel = inner_tol / (knots.len() - 1) as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for pair in knots.windows(2) {
        total += adaptive_panel(d0f, t, pair[0], pair[1], per_panel, &mut err);
    }
    if err > inner_tol {
        return Err(Error::ToleranceNotMet {
            requested: quad_tol,
            achieved: err * scale,
        });
    }
    Ok(scale * total)
}

/// Fixed-panel midpoint-rule evaluation of the same criterion, as an
/// independent cross-check for the adaptive integrator.
pub fn riemann_criterion(d0: u32, t: f64, panels: u64) -> Result<f64, Error> {
    let (d0f, t) = validate_criterion_args(d0, t)?;
    if panels == 0 {
        return Err(Error::InvalidParameter("need at least one panel".into()));
    }
    let dx = t / panels as f64;
    let sum: f64 = (0..panels)
        .map(|i| integrand(d0f, t, (i as f64 + 0.5) * dx))
        .sum();
    Ok((d0f - 1.0) * (-t).exp() * sum * dx)
}

/// Which certificate settled a classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    /// `T` below the percolation exclusion endpoint.
    Percolation,
    /// Degree at least 40 with `1/d0 + 3/d0² ≤ T ≤ 2/d0`.
    NarrowWindow,
    /// Degree at least 1287 with `2/d0 ≤ T ≤ 429/d0`.
    MidWindow,
    /// Degree at least 40 with `T ≥ 429/d0`.
    HighPeriod,
    /// Degree at least 2544 with `2/d0 ≤ T ≤ 0.14`.
    WideWindow,
    /// Direct numeric evaluation of the inclusion criterion above 1.
    IntegralCriterion,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::Percolation => "percolation",
            Clause::NarrowWindow => "narrow-window",
            Clause::MidWindow => "mid-window",
            Clause::HighPeriod => "high-period",
            Clause::WideWindow => "wide-window",
            Clause::IntegralCriterion => "integral-criterion",
        }
    }
}

impl std::fmt::Display for Clause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of classifying a `(d0, T)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    ProvedInfiniteCycles(Clause),
    ProvedExcluded,
    Unresolved,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ProvedInfiniteCycles(_) => "ProvedInfiniteCycles",
            Verdict::ProvedExcluded => "ProvedExcluded",
            Verdict::Unresolved => "Unresolved",
        }
    }
}

/// Full classification record for one `(d0, T)` query.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub d0: u32,
    pub t: f64,
    /// Right endpoint of the exclusion interval used.
    pub percolation_bound: f64,
    /// Numeric criterion value, when it was consulted.
    pub criterion_value: Option<f64>,
    pub verdict: Verdict,
}

impl Classification {
    pub fn clause_label(&self) -> &'static str {
        match self.verdict {
            Verdict::ProvedInfiniteCycles(c) => c.label(),
            Verdict::ProvedExcluded => "percolation",
            Verdict::Unresolved => "none",
        }
    }

    pub const CSV_HEADER: &'static str = "d0,T,percolation_bound,criterion_value,clause,verdict";

    pub fn csv_row(&self) -> String {
        let value = self
            .criterion_value
            .map(|v| format!("{v}"))
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.d0,
            self.t,
            self.percolation_bound,
            value,
            self.clause_label(),
            self.verdict.label()
        )
    }
}

/// Classifies the period `T` on the degree-`d0` tree: excluded by
/// percolation, certified to carry infinite cycles (by the first matching
/// closed-form window, else by direct criterion evaluation), or unresolved.
///
/// The exclusion endpoint is computed with the degree in place of the
/// offspring count, which shrinks the excluded interval slightly and so
/// stays conservative.
pub fn classify(d0: u32, t: f64, quad_tol: f64) -> Result<Classification, Error> {
    if d0 < 2 {
        return Err(Error::InvalidParameter(format!(
            "degree must be at least 2, got {d0}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "period must be positive and finite, got {t}"
        )));
    }
    let percolation_bound = percolation_exclusion(d0)?;
    let d0f = f64::from(d0);
    let mut criterion_value = None;
    let verdict = if t < percolation_bound {
        Verdict::ProvedExcluded
    } else if d0 >= 40 && 1.0 / d0f + 3.0 / (d0f * d0f) <= t && t <= 2.0 / d0f {
        Verdict::ProvedInfiniteCycles(Clause::NarrowWindow)
    } else if d0 >= 1287 && 2.0 / d0f <= t && t <= 429.0 / d0f {
        Verdict::ProvedInfiniteCycles(Clause::MidWindow)
    } else if d0 >= 40 && t >= 429.0 / d0f {
        Verdict::ProvedInfiniteCycles(Clause::HighPeriod)
    } else if d0 >= 2544 && 2.0 / d0f <= t && t <= 0.14 {
        Verdict::ProvedInfiniteCycles(Clause::WideWindow)
    } else if d0 >= 3 {
        let value = integral_criterion(d0, t, quad_tol)?;
        criterion_value = Some(value);
        if value > 1.0 {
            Verdict::ProvedInfiniteCycles(Clause::IntegralCriterion)
        } else {
            Verdict::Unresolved
        }
    } else {
        Verdict::Unresolved
    };
    Ok(Classification {
        d0,
        t,
        percolation_bound,
        criterion_value,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIG_T: f64 = 1e6;

    #[test]
    fn rate_constants_approach_their_suprema() {
        assert!((c1(2, BIG_T).unwrap() - 2.0 / 9.0).abs() < 1e-12);
        assert!((c2(2, BIG_T).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        assert!((c1_star(39).unwrap() - 39.0 / 18.0).abs() < 1e-12);
        assert!((c2_star(39, 11.0).unwrap() - 0.7125).abs() < 1e-9);
        assert_eq!(c2_star(7, 0.0).unwrap(), 0.0);
        assert_eq!(c2(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rate_constants_increase_in_t_below_their_suprema() {
        for &d in &[2u32, 5, 39] {
            let df = f64::from(d);
            let sup1 = df * df * (df - 1.0) / (2.0 * (df + 1.0) * (df + 1.0));
            let sup2 = (df - 1.0) / (4.0 * (df + 1.0));
            let mut prev = (0.0, 0.0);
            for k in 1..40 {
                // Keep (d+1)T/2 well below the point where 1 − e^{-x}
                // rounds to 1, so strict inequalities stay meaningful.
                let t = 1.5 * k as f64 / (df + 1.0);
                let v1 = c1(d, t).unwrap();
                let v2 = c2(d, t).unwrap();
                assert!(v1 > prev.0 && v2 > prev.1, "d={d} t={t}");
                assert!(v1 > 0.0 && v1 < sup1);
                assert!(v2 > 0.0 && v2 < sup2);
                prev = (v1, v2);
            }
        }
    }

    #[test]
    fn drift_hinge_value() {
        let v = drift_condition(39, 11.0, true).unwrap();
        assert!((v - 16.40625).abs() < 1e-12, "got {v}");
        assert!(drift_condition(39, 429.0 / 39.0, true).unwrap() > 0.0);
    }

    #[test]
    fn drift_is_negative_at_tiny_periods() {
        let v = drift_condition(2, 0.01, false).unwrap();
        assert!(v < -1.9, "got {v}");
    }

    #[test]
    fn starred_drift_nondecreasing_in_t() {
        for &d in &[39u32, 45, 52, 60] {
            let mut prev = f64::NEG_INFINITY;
            for k in 0..50 {
                let t = 1.0 + k as f64;
                let v = drift_condition(d, t, true).unwrap();
                assert!(v >= prev, "d={d} t={t}");
                prev = v;
            }
        }
    }

    #[test]
    fn threshold_function_values() {
        let f3 = threshold_f(3.0).unwrap();
        assert!((f3 - 953.0 / 30.0).abs() < 1e-12);
        assert!(f3 <= 32.0);
        assert!(threshold_f(4.0).unwrap() < f3);
        assert!((threshold_f(1e12).unwrap() - 31.0 / 6.0).abs() < 1e-9);
        assert!(matches!(threshold_f(13.0 / 6.0), Err(Error::DomainError(_))));
        assert!(threshold_f(2.0).is_err());
    }

    #[test]
    fn percolation_exclusion_values() {
        assert!((percolation_exclusion(2).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        for d in 2..=10_000u32 {
            let df = f64::from(d);
            assert!(
                percolation_exclusion(d).unwrap() > 1.0 / df + 0.5 / (df * df),
                "series bound fails at d={d}"
            );
        }
        let d = 1_000_000_000u32;
        assert!((f64::from(d) * percolation_exclusion(d).unwrap() - 1.0).abs() < 1e-8);
        assert!(percolation_exclusion(1).is_err());
    }

    #[test]
    fn criterion_matches_precomputed_values() {
        // High-precision reference values for the closed-form integral.
        let cases = [
            (1287, 2.0 / 1287.0, 1.994_311_960_539_456_7),
            (1287, 1.0 / 3.0, 5.143_888_536_292_396),
            (1287, 0.5 / 1287.0, 0.499_401_297_967_378_9),
            (40, 429.0 / 40.0, 4.513_495_773_848_72e-5),
            (10, 0.5, 2.106_355_121_082_222),
        ];
        for &(d0, t, expected) in &cases {
            let v = integral_criterion(d0, t, 1e-9).unwrap();
            assert!(
                (v - expected).abs() < 1e-6 * expected.max(1.0),
                "({d0}, {t}): {v} vs {expected}"
            );
        }
    }

    #[test]
    fn criterion_signs() {
        assert!(integral_criterion(1287, 2.0 / 1287.0, 1e-8).unwrap() > 1.0);
        assert!(integral_criterion(1287, 1.0 / 3.0, 1e-8).unwrap() > 1.0);
        assert!(integral_criterion(1287, 0.5 / 1287.0, 1e-8).unwrap() < 1.0);
        // Long periods at moderate degree slip the criterion even where the
        // closed-form windows certify inclusion: the certificate is
        // sufficient, not necessary.
        assert!(integral_criterion(40, 429.0 / 40.0, 1e-8).unwrap() < 1.0);
    }

    #[test]
    fn adaptive_agrees_with_riemann_oracle() {
        let grid = [
            (5u32, 0.2),
            (5, 1.0),
            (10, 0.5),
            (40, 0.05),
            (40, 1.0),
            (100, 0.03),
            (300, 0.01),
            (1287, 2.0 / 1287.0),
            (1287, 0.1),
            (2544, 0.14),
        ];
        for &(d0, t) in &grid {
            let fast = integral_criterion(d0, t, 1e-8).unwrap();
            let slow = riemann_criterion(d0, t, 200_000).unwrap();
            assert!(
                (fast - slow).abs() < 1e-5,
                "({d0}, {t}): adaptive {fast} vs riemann {slow}"
            );
        }
    }

    #[test]
    fn unattainable_tolerance_is_reported() {
        assert!(matches!(
            integral_criterion(1287, 1.0 / 3.0, 1e-300),
            Err(Error::ToleranceNotMet { .. })
        ));
    }

    #[test]
    fn criterion_argument_validation() {
        assert!(integral_criterion(2, 1.0, 1e-6).is_err());
        assert!(integral_criterion(10, 0.0, 1e-6).is_err());
        assert!(integral_criterion(10, 1.0, 0.0).is_err());
        assert!(riemann_criterion(10, 1.0, 0).is_err());
        // A period far past the exponential prefactor's underflow point.
        assert_eq!(integral_criterion(10, 800.0, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn classification_examples() {
        let high = classify(40, 429.0 / 40.0, 1e-6).unwrap();
        assert_eq!(high.verdict, Verdict::ProvedInfiniteCycles(Clause::HighPeriod));
        assert_eq!(high.clause_label(), "high-period");
        assert_eq!(high.criterion_value, None);

        let excluded = classify(100, 0.005, 1e-6).unwrap();
        assert_eq!(excluded.verdict, Verdict::ProvedExcluded);
        assert!((excluded.percolation_bound - 0.010_050_335_853_501_44).abs() < 1e-12);

        let consulted = classify(10, 0.5, 1e-6).unwrap();
        assert_eq!(
            consulted.verdict,
            Verdict::ProvedInfiniteCycles(Clause::IntegralCriterion)
        );
        let v = consulted.criterion_value.expect("criterion consulted");
        assert!((v - 2.106_355_121_082_222).abs() < 1e-4);

        let narrow = classify(2000, 1.0 / 2000.0 + 3.0 / 4e6, 1e-6).unwrap();
        assert_eq!(narrow.verdict, Verdict::ProvedInfiniteCycles(Clause::NarrowWindow));
        let mid = classify(1287, 0.1, 1e-6).unwrap();
        assert_eq!(mid.verdict, Verdict::ProvedInfiniteCycles(Clause::MidWindow));
        let wide = classify(2544, 0.14, 1e-6).unwrap();
        // 0.14 < 429/2544 = 0.1686, so the mid window claims it first.
        assert_eq!(wide.verdict, Verdict::ProvedInfiniteCycles(Clause::MidWindow));

        let unresolved = classify(3, 0.9, 1e-6).unwrap();
        assert_eq!(unresolved.verdict, Verdict::Unresolved);
        assert!(unresolved.criterion_value.unwrap() <= 1.0);

        let csv = consulted.csv_row();
        assert!(csv.starts_with("10,0.5,"));
        assert!(csv.ends_with(",integral-criterion,ProvedInfiniteCycles"));
    }

    #[test]
    fn certificates_never_conflict_and_windows_clear_the_exclusion() {
        for &d0 in &[2u32, 3, 10, 39, 40, 100, 1287, 2544, 10_000] {
            let d0f = f64::from(d0);
            for &t in &[
                0.2 / d0f,
                1.0 / d0f,
                1.5 / d0f,
                2.0 / d0f,
                10.0 / d0f,
                429.0 / d0f,
                0.14,
                1.0,
                20.0,
            ] {
                let c = classify(d0, t, 1e-6).unwrap();
                match c.verdict {
                    Verdict::ProvedExcluded => assert!(t < c.percolation_bound),
                    Verdict::ProvedInfiniteCycles(_) => assert!(t >= c.percolation_bound),
                    Verdict::Unresolved => {}
                }
            }
        }
        for d0 in 40..=10_000u32 {
            let d0f = f64::from(d0);
            assert!(
                percolation_exclusion(d0).unwrap() < 1.0 / d0f + 3.0 / (d0f * d0f),
                "exclusion endpoint must sit below the narrow window at d0={d0}"
            );
        }
    }
}
