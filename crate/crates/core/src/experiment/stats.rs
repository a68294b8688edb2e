//! The two significance tests the benchmark tables use: Fisher's exact
//! test on success counts and the Mann–Whitney U test on episode
//! counts.
//!
//! Both are self-contained: log-factorial arithmetic for the
//! hypergeometric probabilities, full enumeration for small U samples,
//! and a tie-corrected normal approximation beyond that.

/// Two-sided Fisher's exact test for a 2×2 contingency table
/// `[[a, b], [c, d]]` (rows = groups, columns = success/failure).
///
/// The p-value follows the probability-mass convention: the sum of the
/// hypergeometric probabilities of every table (with the same margins)
/// whose probability does not exceed the observed table's.  Degenerate
/// tables — an empty row or column — carry no evidence and return 1.
pub fn fisher_exact(table: [[u64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = table;
    let row1 = a + b;
    let row2 = c + d;
    let col1 = a + c;
    let col2 = b + d;
    if row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0 {
        log::warn!(
            "fisher_exact on degenerate table [[{a},{b}],[{c},{d}]]: returning p = 1"
        );
        return 1.0;
    }
    let n = row1 + row2;
    let lnf = ln_factorials(n as usize);
    // ln P(A = k) for the hypergeometric family sharing our margins.
    let ln_p = |k: u64| -> f64 {
        lnf[row1 as usize] - lnf[k as usize] - lnf[(row1 - k) as usize]
            + lnf[row2 as usize]
            - lnf[(col1 - k) as usize]
            - lnf[(row2 - (col1 - k)) as usize]
            - (lnf[n as usize] - lnf[col1 as usize] - lnf[col2 as usize])
    };
    let k_min = col1.saturating_sub(row2);
    let k_max = col1.min(row1);
    let observed = ln_p(a);
    // Tables at most this much more probable than the observed one are
    // counted as "as extreme"; the slack absorbs log-space round-off.
    let cutoff = observed + 1e-7;
    let mut p = 0.0;
    for k in k_min..=k_max {
        let lp = ln_p(k);
        if lp <= cutoff {
            p += lp.exp();
        }
    }
    p.min(1.0)
}

/// Mann–Whitney U test: returns `(U, two-sided p)` where `U` is the
/// statistic of the first sample, with ties earning half credit.
///
/// For combined sizes up to 12 the p-value is exact, by enumerating
/// every assignment of the pooled values to the two groups; beyond
/// that, a normal approximation with tie correction and continuity
/// correction is used.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty(), "both samples must be non-empty");
    let na = a.len();
    let nb = b.len();
    let n = na + nb;
    let ranks = average_ranks(a, b);
    let r_a: f64 = ranks[..na].iter().sum();
    let u = r_a - (na * (na + 1)) as f64 / 2.0;
    let mu = (na * nb) as f64 / 2.0;

    let p = if n <= 12 {
        exact_p(&ranks, na, u, mu)
    } else {
        approximate_p(&ranks, na, nb, u, mu)
    };
    (u, p.clamp(0.0, 1.0))
}

/// Ranks (1-based, ties averaged) of the pooled samples, first `a`'s
/// entries then `b`'s.
fn average_ranks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len() + b.len();
    let mut order: Vec<usize> = (0..n).collect();
    let value = |i: usize| if i < a.len() { a[i] } else { b[i - a.len()] };
    order.sort_by(|&x, &y| value(x).total_cmp(&value(y)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && value(order[j + 1]) == value(order[i]) {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let avg = ((i + 1 + j + 1) as f64) / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Exact two-sided p: the fraction of group assignments whose U is at
/// least as far from the null mean as the observed one.
fn exact_p(ranks: &[f64], na: usize, u_obs: f64, mu: f64) -> f64 {
    let n = ranks.len();
    let threshold = (u_obs - mu).abs() - 1e-12;
    let offset = (na * (na + 1)) as f64 / 2.0;
    let mut total = 0u64;
    let mut extreme = 0u64;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        let mut r = 0.0;
        for (i, rank) in ranks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                r += rank;
            }
        }
        let u = r - offset;
        if (u - mu).abs() >= threshold {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Normal approximation with tie-corrected variance and continuity
/// correction.
fn approximate_p(ranks: &[f64], na: usize, nb: usize, u: f64, mu: f64) -> f64 {
    let n = (na + nb) as f64;
    // Tie groups: counts of equal ranks.
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let variance = (na * nb) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        // Every pooled value identical: U is deterministic, no evidence.
        return 1.0;
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / variance.sqrt();
    erfc(z / std::f64::consts::SQRT_2)
}

/// Natural logs of factorials `0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lnf = vec![0.0; n + 1];
    for k in 1..=n {
        lnf[k] = lnf[k - 1] + (k as f64).ln();
    }
    lnf
}

/// Complementary error function via the Abramowitz–Stegun 7.1.26
/// polynomial (absolute error below 1.5e-7), extended to negative
/// arguments by symmetry.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    const P: f64 = 0.3275911;
    const A1: f64 = 0.254829592;
    const A2: f64 = -0.284496736;
    const A3: f64 = 1.421413741;
    const A4: f64 = -1.453152027;
    const A5: f64 = 1.061405429;
    let t = 1.0 / (1.0 + P * x);
    let poly = ((((A5 * t + A4) * t + A3) * t + A2) * t + A1) * t;
    poly * (-x * x).exp()
}
