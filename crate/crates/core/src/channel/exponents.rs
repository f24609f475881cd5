//! Random-coding and sequential-decoding exponents, in bits per channel use.
//!
//! Every rate and exponent here uses base-2 logarithms. The one exception is
//! [`jelinek_constant`], which keeps the natural exponentials of the original
//! bound on the constant `A` verbatim; mixing it with the base-2 exponents
//! is the caller's responsibility.

use super::ChannelModel;
use crate::{Error, Result};

const GRID_STEPS: usize = 1000;
const GOLDEN_TOL: f64 = 1e-6;
const CRITICAL_STEP: f64 = 1e-5;

/// A maximized exponent together with its maximizing `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentResult {
    pub value: f64,
    pub rho_star: f64,
}

/// Gallager's `E_0(ρ)` for equiprobable inputs.
///
/// Defined for every `ρ ≥ 0`; values above 1 are needed when solving for
/// the Pareto exponent of the computation distribution.
pub fn e0(ch: &ChannelModel, rho: f64) -> f64 {
    let a = 1.0 / (1.0 + rho);
    let sum: f64 = ch
        .transitions(false)
        .iter()
        .zip(ch.transitions(true))
        .map(|(&p0, &p1)| (p0.powf(a) + p1.powf(a)).powf(1.0 + rho))
        .sum();
    1.0 + rho - sum.log2()
}

/// `E_G(R) = max_{0≤ρ≤1} [E_0(ρ) − ρR]`.
pub fn gallager_exponent(ch: &ChannelModel, rate: f64) -> ExponentResult {
    maximize_unit_interval(|rho| e0(ch, rho) - rho * rate)
}

/// `R_0 = E_0(1)`.
pub fn cutoff_rate(ch: &ChannelModel) -> f64 {
    e0(ch, 1.0)
}

/// `E_0'(1)` by a symmetric finite difference.
pub fn critical_rate(ch: &ChannelModel) -> f64 {
    let h = CRITICAL_STEP;
    let d = (e0(ch, 1.0 + h) - e0(ch, 1.0 - h)) / (2.0 * h);
    let coarse = (e0(ch, 1.0 + 10.0 * h) - e0(ch, 1.0 - 10.0 * h)) / (20.0 * h);
    debug_assert!(
        (d - coarse).abs() < 1e-6,
        "critical rate difference quotient not converged: {d} vs {coarse}"
    );
    d
}

/// Mutual information with equiprobable inputs, which is capacity for
/// MBIOS channels.
pub fn capacity(ch: &ChannelModel) -> f64 {
    let mut c = 0.0;
    for (&p0, &p1) in ch.transitions(false).iter().zip(ch.transitions(true)) {
        let pz = 0.5 * (p0 + p1);
        for p in [p0, p1] {
            if p > 0.0 {
                c += 0.5 * p * (p / pz).log2();
            }
        }
    }
    c
}

/// `E_J(B, R) = max_{0≤ρ≤1} ρ/(1+ρ) [E_0(ρ) + B − (1+ρ)R]`.
pub fn jelinek_exponent(ch: &ChannelModel, bias: f64, rate: f64) -> ExponentResult {
    let r0 = cutoff_rate(ch);
    if bias >= r0 {
        log::debug!("bias {bias} is not below the cutoff rate {r0}; the error-bound constant is unbounded");
    }
    maximize_unit_interval(|rho| rho / (1.0 + rho) * (e0(ch, rho) + bias - (1.0 + rho) * rate))
}

/// Upper bound on the constant `A` multiplying `2^{-E_J n d}`:
/// `e^{ρΔ/(1+ρ)} / (1 − e^{−[E_0(ρ) − ρB]})` in natural base. `delta = 0`
/// gives the stack-algorithm constant.
pub fn jelinek_constant(ch: &ChannelModel, rho: f64, bias: f64, delta: f64) -> Result<f64> {
    if delta < 0.0 {
        return Err(Error::invalid(format!("Fano quantization {delta} < 0")));
    }
    let gap = e0(ch, rho) - rho * bias;
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::invalid(format!(
            "E_0({rho}) - {rho}*{bias} = {gap} is not positive"
        )));
    }
    Ok((rho / (1.0 + rho) * delta).exp() / (1.0 - (-gap).exp()))
}

/// Probability that a code drawn from the LTI ensemble misses exponent
/// `E_G(R) − ε` at some delay `d ≥ d0`: `2^{−εn d0} / (1 − 2^{−εn})`.
pub fn certification_bound(eps: f64, n: usize, d0: usize) -> f64 {
    let en = eps * n as f64;
    (-en * d0 as f64).exp2() / (1.0 - (-en).exp2())
}

/// The `ρ > 0` solving `R = E_0(ρ)/ρ`, the Pareto exponent of the
/// sequential-decoding computation distribution.
pub fn pareto_exponent(ch: &ChannelModel, rate: f64) -> Result<f64> {
    let c = capacity(ch);
    if !(rate > 0.0 && rate < c) {
        return Err(Error::invalid(format!("rate {rate} outside (0, C = {c})")));
    }
    let ratio = |rho: f64| e0(ch, rho) / rho;
    let mut lo = 1e-9;
    let mut hi = 1.0;
    while ratio(hi) > rate {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::invalid(format!("no Pareto exponent for rate {rate}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Grid search over `[0, 1]` followed by golden-section refinement around
/// the best grid point. Endpoints are always candidates, so a maximum on
/// the boundary is returned exactly.
fn maximize_unit_interval(f: impl Fn(f64) -> f64) -> ExponentResult {
    let step = 1.0 / GRID_STEPS as f64;
    let mut best_i = 0;
    let mut best_v = f(0.0);
    for i in 1..=GRID_STEPS {
        let v = f(i as f64 * step);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut best = ExponentResult { value: best_v, rho_star: best_i as f64 * step };

    let mut a = best_i.saturating_sub(1) as f64 * step;
    let mut b = (best_i + 1).min(GRID_STEPS) as f64 * step;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x);
    if v > best.value {
        best = ExponentResult { value: v, rho_star: x };
    }
    best.value = best.value.max(0.0);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(p: f64) -> ChannelModel {
        ChannelModel::bsc(p).unwrap()
    }

    fn bsc_cutoff_closed_form(p: f64) -> f64 {
        1.0 - (1.0 + 2.0 * (p * (1.0 - p)).sqrt()).log2()
    }

    #[test]
    fn e0_vanishes_at_zero() {
        for ch in [bsc(0.0), bsc(0.01), bsc(0.3), ChannelModel::bec(0.2).unwrap()] {
            assert!(e0(&ch, 0.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_rates() {
        assert!((cutoff_rate(&bsc(0.01)) - 0.7382).abs() < 1e-3);
        assert!((cutoff_rate(&bsc(0.0)) - 1.0).abs() < 1e-12);
        let r0 = cutoff_rate(&bsc(0.1));
        assert!((r0 - 0.32193).abs() < 1e-4);
        assert!((r0 - bsc_cutoff_closed_form(0.1)).abs() < 1e-12);
        // BEC: R_0 = 1 - log2(1 + eps)
        let bec = ChannelModel::bec(0.3).unwrap();
        assert!((cutoff_rate(&bec) - (1.0 - 1.3f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn e0_shape_on_grid() {
        for ch in [bsc(0.01), bsc(0.1), ChannelModel::bec(0.4).unwrap()] {
            let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
            let vals: Vec<f64> = grid.iter().map(|&r| e0(&ch, r)).collect();
            for w in vals.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "E_0 not nondecreasing");
            }
            let slopes: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]) / 0.05).collect();
            for s in slopes.windows(2) {
                assert!(s[1] <= s[0] + 1e-9, "E_0 not concave");
            }
            let ratios: Vec<f64> = grid[1..].iter().map(|&r| e0(&ch, r) / r).collect();
            for w in ratios.windows(2) {
                assert!(w[1] < w[0], "E_0(rho)/rho not strictly decreasing");
            }
        }
    }

    #[test]
    fn gallager_exponent_at_half_rate() {
        let r = gallager_exponent(&bsc(0.01), 0.5);
        assert!((r.value - 0.2382).abs() < 1e-3);
        assert_eq!(r.rho_star, 1.0);
    }

    #[test]
    fn gallager_exponent_above_capacity_is_zero() {
        let ch = bsc(0.1);
        let c = capacity(&ch);
        for rate in [c, c + 0.01, 0.9] {
            let r = gallager_exponent(&ch, rate);
            assert_eq!(r.value, 0.0);
            assert_eq!(r.rho_star, 0.0);
        }
    }

    #[test]
    fn gallager_exponent_matches_fine_grid() {
        // brute force over a 1e-6 grid in rho
        let ch = bsc(0.1);
        let rate = 0.25;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=1_000_000u32 {
            let rho = f64::from(i) * 1e-6;
            best = best.max(e0(&ch, rho) - rho * rate);
        }
        let r = gallager_exponent(&ch, rate);
        assert!((r.value - best).abs() < 1e-9, "{} vs {best}", r.value);
        assert!(r.rho_star > 0.0 && r.rho_star < 1.0);
    }

    #[test]
    fn gallager_exponent_nonincreasing_in_rate() {
        let ch = bsc(0.05);
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let v = gallager_exponent(&ch, i as f64 * 0.01).value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn critical_rate_values() {
        assert!((critical_rate(&bsc(0.0)) - 1.0).abs() < 1e-9);
        // Richardson extrapolation over steps 1e-4, 1e-5, 1e-6 as an
        // independent derivative estimate
        for p in [0.01, 0.1] {
            let ch = bsc(p);
            let cd = |h: f64| (e0(&ch, 1.0 + h) - e0(&ch, 1.0 - h)) / (2.0 * h);
            let rich = |h: f64| (4.0 * cd(h / 2.0) - cd(h)) / 3.0;
            let oracle = rich(1e-4);
            for h in [1e-4, 1e-5, 1e-6] {
                assert!((cd(h) - oracle).abs() < 1e-6);
            }
            assert!((critical_rate(&ch) - oracle).abs() < 1e-8);
            assert!(critical_rate(&ch) < cutoff_rate(&ch));
        }
    }

    #[test]
    fn jelinek_reference_values() {
        let ch = bsc(0.01);
        let r0 = cutoff_rate(&ch);
        assert!((jelinek_exponent(&ch, r0, 0.5).value - 0.2382).abs() < 1e-3);
        assert!((jelinek_exponent(&ch, r0, 0.2).value - 0.5382).abs() < 1e-3);
    }

    #[test]
    fn jelinek_matches_grid_oracle() {
        let ch = bsc(0.1);
        for i in 1..30 {
            let rate = i as f64 * 0.01;
            let mut best = f64::NEG_INFINITY;
            for j in 0..=100_000u32 {
                let rho = f64::from(j) * 1e-5;
                best = best.max(rho / (1.0 + rho) * (e0(&ch, rho) + rate - (1.0 + rho) * rate));
            }
            let got = jelinek_exponent(&ch, rate, rate).value;
            assert!((got - best.max(0.0)).abs() < 1e-8, "R={rate}: {got} vs {best}");
        }
    }

    #[test]
    fn jelinek_monotone_in_bias() {
        let ch = bsc(0.05);
        let rate = 0.2;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=40 {
            let bias = i as f64 * 0.0125;
            let v = jelinek_exponent(&ch, bias, rate).value;
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn exponent_identities_below_critical_rate() {
        for p in [0.01, 0.1] {
            let ch = bsc(p);
            let r0 = cutoff_rate(&ch);
            for i in 1..200 {
                let rate = i as f64 * 0.005;
                let g = gallager_exponent(&ch, rate);
                if g.rho_star != 1.0 {
                    continue;
                }
                let j0 = jelinek_exponent(&ch, r0, rate).value;
                assert!((j0 - g.value).abs() < 1e-6);
                let jr = jelinek_exponent(&ch, rate, rate).value;
                assert!(jr >= g.value / 2.0 - 1e-9);
            }
        }
    }

    #[test]
    fn jelinek_constant_cases() {
        let ch = bsc(0.01);
        let gap = e0(&ch, 1.0) - 0.5;
        let a0 = jelinek_constant(&ch, 1.0, 0.5, 0.0).unwrap();
        assert!((a0 - 1.0 / (1.0 - (-gap).exp())).abs() < 1e-12);
        let a2 = jelinek_constant(&ch, 1.0, 0.5, 2.0).unwrap();
        assert!((a2 - a0 * 1f64.exp()).abs() < 1e-9);
        // bias at or above R_0 with rho = 1 leaves no positive gap
        assert!(jelinek_constant(&ch, 1.0, cutoff_rate(&ch), 0.0).is_err());
        assert!(jelinek_constant(&ch, 1.0, 0.5, -1.0).is_err());
    }

    #[test]
    fn certification_bound_values() {
        assert!((certification_bound(0.5, 2, 1) - 1.0).abs() < 1e-15);
        let expected = 2f64.powi(-10) / (1.0 - 0.25);
        assert!((certification_bound(0.1, 20, 5) - expected).abs() < 1e-15);
        assert!((certification_bound(0.1, 20, 5) - 1.302e-3).abs() < 1e-6);
        assert!(certification_bound(0.1, 20, 10_000) < 1e-300);
    }

    #[test]
    fn pareto_exponent_solves_root() {
        let ch = bsc(0.01);
        let rho = pareto_exponent(&ch, 0.5).unwrap();
        assert!((e0(&ch, rho) - rho * 0.5).abs() < 1e-9);
        assert!(rho > 1.0, "below R_0 the Pareto exponent exceeds 1");
        // rate equal to R_0 gives rho = 1
        let r0 = cutoff_rate(&ch);
        assert!((pareto_exponent(&ch, r0).unwrap() - 1.0).abs() < 1e-8);
        assert!(pareto_exponent(&ch, 0.95).is_err());
    }

    #[test]
    fn capacity_of_bsc() {
        let p: f64 = 0.1;
        let h = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((capacity(&bsc(p)) - (1.0 - h)).abs() < 1e-12);
        assert!((capacity(&ChannelModel::bec(0.3).unwrap()) - 0.7).abs() < 1e-12);
    }
}
