//! Exhaustive small-case oracles for the significance tests.
//!
//! Fisher: every 2×2 table with all margins at most 8, checked against
//! an exact rational enumeration (integer binomials, integer
//! probability comparisons — no floating point until the final ratio).
//!
//! Mann–Whitney: every labeling of small pooled samples, with the U
//! statistic recomputed by pair counting rather than rank sums.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use falstl::experiment::{fisher_exact, mann_whitney_u};

mod common;
use common::{binomials, fisher_oracle, mwu_oracle};

#[test]
fn fisher_matches_the_rational_oracle_on_all_small_tables() {
    let binom = binomials(16);
    let mut checked = 0usize;
    for a in 0..=8u64 {
        for b in 0..=8u64 {
            for c in 0..=8u64 {
                for d in 0..=8u64 {
                    let margins = [a + b, c + d, a + c, b + d];
                    if margins.iter().any(|&m| m == 0 || m > 8) {
                        continue;
                    }
                    let ours = fisher_exact([[a, b], [c, d]]);
                    let oracle = fisher_oracle(a, b, c, d, &binom);
                    assert!(
                        (ours - oracle).abs() < 1e-9,
                        "[[{a},{b}],[{c},{d}]]: ours {ours}, oracle {oracle}"
                    );
                    checked += 1;
                }
            }
        }
    }
    // Sanity: the sweep actually covered a substantial family.
    assert!(checked > 1_000, "only {checked} tables checked");
}

fn check_against_oracle(a: &[f64], b: &[f64]) {
    let (u, p) = mann_whitney_u(a, b);
    let (u_oracle, p_oracle) = mwu_oracle(a, b);
    assert_eq!(u, u_oracle, "U mismatch on a={a:?} b={b:?}");
    assert!(
        (p - p_oracle).abs() < 1e-12,
        "p mismatch on a={a:?} b={b:?}: ours {p}, oracle {p_oracle}"
    );
}

#[test]
fn mwu_matches_full_permutation_on_distinct_samples() {
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    for na in 2..=6usize {
        for nb in 2..=6usize {
            for _ in 0..4 {
                // Continuous draws: ties have probability zero.
                let a: Vec<f64> = (0..na).map(|_| rng.gen_range(0.0..10.0)).collect();
                let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(0.0..10.0)).collect();
                check_against_oracle(&a, &b);
            }
        }
    }
}

#[test]
fn mwu_matches_full_permutation_under_heavy_ties() {
    let mut rng = ChaCha20Rng::seed_from_u64(32);
    for na in 2..=6usize {
        for nb in 2..=6usize {
            for _ in 0..4 {
                // A three-letter alphabet forces many tied ranks.
                let a: Vec<f64> = (0..na).map(|_| rng.gen_range(0..3) as f64).collect();
                let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(0..3) as f64).collect();
                check_against_oracle(&a, &b);
            }
        }
    }
}

#[test]
fn mwu_matches_permutation_on_episode_count_shapes() {
    // The shapes the benchmark actually produces: small integers with a
    // censoring cap, including an all-capped group.
    check_against_oracle(&[3.0, 5.0, 8.0, 200.0], &[200.0, 200.0, 200.0, 200.0]);
    check_against_oracle(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0, 200.0]);
    check_against_oracle(&[200.0; 5], &[200.0; 5]);
}
