//! Scalar auxiliary functions: truncations, cutoffs, sign functions and the
//! level-indicator ramps, each exposed pointwise and vectorized over nodal
//! arrays. The vectorized forms apply the scalar map entry by entry, so both
//! agree exactly.

/// Clamp of `r` to `[-k, k]`.
pub fn truncate(k: f64, r: f64) -> f64 {
    debug_assert!(k > 0.0);
    r.clamp(-k, k)
}

/// `T_1(r - T_l(r))`: zero on `|r| <= l`, `sign(r)` once `|r| >= l + 1`,
/// linear in between.
pub fn tail_cut(l: f64, r: f64) -> f64 {
    debug_assert!(l > 0.0);
    truncate(1.0, r - truncate(l, r))
}

/// Plateau cutoff: 1 on `|r| <= l`, 0 on `|r| >= l + 1`, linear in between.
pub fn plateau_cutoff(l: f64, r: f64) -> f64 {
    debug_assert!(l > 0.0);
    (l + 1.0 - r.abs()).clamp(0.0, 1.0)
}

/// Ramp from 0 at `lambda - 1/n` up to 1 at `lambda`; nondecreasing in both
/// `r` and `n`.
pub fn level_indicator_ramp(n: u32, lambda: f64, r: f64) -> f64 {
    debug_assert!(n >= 1);
    let n = n as f64;
    (n * r - n * lambda + 1.0).clamp(0.0, 1.0)
}

/// Mirror of [`level_indicator_ramp`]: 1 at or below `lambda`, 0 beyond
/// `lambda + 1/n`.
pub fn level_indicator_ramp_below(n: u32, lambda: f64, r: f64) -> f64 {
    debug_assert!(n >= 1);
    let n = n as f64;
    (n * lambda - n * r + 1.0).clamp(0.0, 1.0)
}

/// Sign with `sign0(0) = 0`.
pub fn sign0(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One-sided sign: 1 iff `r > 0`.
pub fn sign0_plus(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn truncate_slice(k: f64, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&r| truncate(k, r)).collect()
}

pub fn tail_cut_slice(l: f64, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&r| tail_cut(l, r)).collect()
}

pub fn plateau_cutoff_slice(l: f64, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&r| plateau_cutoff(l, r)).collect()
}

pub fn level_indicator_ramp_slice(n: u32, lambda: f64, values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&r| level_indicator_ramp(n, lambda, r))
        .collect()
}

pub fn sign0_slice(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&r| sign0(r)).collect()
}

pub fn sign0_plus_slice(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&r| sign0_plus(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn truncate_examples() {
        assert_eq!(truncate(2.0, 5.0), 2.0);
        assert_eq!(truncate(2.0, -5.0), -2.0);
        assert_eq!(truncate(2.0, 1.5), 1.5);
    }

    #[test]
    fn tail_cut_examples() {
        assert_eq!(tail_cut(3.0, 2.0), 0.0);
        assert_eq!(tail_cut(3.0, 3.5), 0.5);
        assert_eq!(tail_cut(3.0, 10.0), 1.0);
        assert_eq!(tail_cut(3.0, -10.0), -1.0);
    }

    #[test]
    fn plateau_cutoff_examples() {
        assert_eq!(plateau_cutoff(5.0, 4.0), 1.0);
        assert_eq!(plateau_cutoff(5.0, 5.5), 0.5);
        assert_eq!(plateau_cutoff(5.0, 7.0), 0.0);
    }

    #[test]
    fn level_indicator_ramp_examples() {
        assert_eq!(level_indicator_ramp(10, 1.0, 1.0), 1.0);
        assert!((level_indicator_ramp(10, 1.0, 0.95) - 0.5).abs() < 1e-12);
        assert_eq!(level_indicator_ramp(10, 1.0, 0.5), 0.0);
    }

    #[test]
    fn signs() {
        assert_eq!(sign0(-3.0), -1.0);
        assert_eq!(sign0(0.0), 0.0);
        assert_eq!(sign0(3.0), 1.0);
        assert_eq!(sign0_plus(0.0), 0.0);
        assert_eq!(sign0_plus(1e-30), 1.0);
        assert_eq!(sign0_plus(-1.0), 0.0);
    }

    #[test]
    fn vectorized_agrees_with_pointwise() {
        let vals = [-7.25, -3.0, -0.5, 0.0, 0.125, 2.0, 9.75];
        assert_eq!(
            truncate_slice(2.0, &vals),
            vals.iter().map(|&r| truncate(2.0, r)).collect::<Vec<_>>()
        );
        assert_eq!(
            tail_cut_slice(3.0, &vals),
            vals.iter().map(|&r| tail_cut(3.0, r)).collect::<Vec<_>>()
        );
        assert_eq!(
            plateau_cutoff_slice(3.0, &vals),
            vals.iter()
                .map(|&r| plateau_cutoff(3.0, r))
                .collect::<Vec<_>>()
        );
        assert_eq!(
            sign0_slice(&vals),
            vals.iter().map(|&r| sign0(r)).collect::<Vec<_>>()
        );
    }

    proptest! {
        #[test]
        fn truncate_is_lipschitz_odd_idempotent(k in 0.1f64..50.0, a in -100.0f64..100.0, b in -100.0f64..100.0) {
            prop_assert!((truncate(k, a) - truncate(k, b)).abs() <= (a - b).abs() + 1e-15);
            prop_assert_eq!(truncate(k, -a), -truncate(k, a));
            prop_assert_eq!(truncate(k, truncate(k, a)), truncate(k, a));
        }

        #[test]
        fn plateau_and_tail_partition_the_band(l in 0.5f64..20.0, r in -50.0f64..50.0) {
            let h = plateau_cutoff(l, r);
            let w = tail_cut(l, r).abs();
            if r.abs() >= l && r.abs() <= l + 1.0 {
                prop_assert!((h + w - 1.0).abs() < 1e-12);
            }
            prop_assert!((0.0..=1.0).contains(&h));
            prop_assert!((0.0..=1.0).contains(&w));
        }

        #[test]
        fn ramp_monotone_in_r_toward_indicator(lambda in -5.0f64..5.0, a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(level_indicator_ramp(8, lambda, lo) <= level_indicator_ramp(8, lambda, hi));
            // the n-sweep converges monotonically to the indicator of [r >= lambda]
            let indicator = if a >= lambda { 1.0 } else { 0.0 };
            let gap8 = (level_indicator_ramp(8, lambda, a) - indicator).abs();
            let gap16 = (level_indicator_ramp(16, lambda, a) - indicator).abs();
            prop_assert!(gap16 <= gap8 + 1e-15);
        }
    }

    #[test]
    fn cutoff_breakpoints_are_at_l_and_l_plus_one() {
        let l = 2.0;
        for &r in &[l, l + 1.0, -l, -(l + 1.0)] {
            // one-sided slopes differ exactly at the breakpoints
            let d = 1e-6;
            let left = (plateau_cutoff(l, r) - plateau_cutoff(l, r - d)) / d;
            let right = (plateau_cutoff(l, r + d) - plateau_cutoff(l, r)) / d;
            assert!((left - right).abs() > 0.5, "no kink at {r}");
        }
    }
}
