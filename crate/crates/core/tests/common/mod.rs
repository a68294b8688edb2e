//! Shared randomized-case machinery for the cross-evaluator suites:
//! formula and trace generators plus the equivalence checkers they feed.
// Each integration-test binary uses its own slice of this module.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use falstl::robustness::{
    brute_bool, brute_rob_kappa, eval_rob_kappa, Monitor, Trace, DEFAULT_KAPPA,
};
use falstl::stl::{past_reach, Comparator, Formula, Interval, SignalKind, SignalSchema};

/// Deterministic generator state for one suite run.
pub struct CaseGen {
    pub rng: ChaCha20Rng,
    pub schema: SignalSchema,
    pub dt: f64,
}

impl CaseGen {
    pub fn new(seed: u64) -> Self {
        let schema = SignalSchema::new(vec![
            ("x".to_string(), SignalKind::Real),
            ("y".to_string(), SignalKind::Real),
            ("p".to_string(), SignalKind::Bool),
            ("q".to_string(), SignalKind::Bool),
        ])
        .unwrap();
        Self { rng: ChaCha20Rng::seed_from_u64(seed), schema, dt: 0.5 }
    }

    fn atom(&mut self) -> Formula {
        let idx = self.rng.gen_range(0..self.schema.len());
        match self.schema.kind(idx) {
            SignalKind::Real => {
                let cmp = match self.rng.gen_range(0..4) {
                    0 => Comparator::Lt,
                    1 => Comparator::Le,
                    2 => Comparator::Gt,
                    _ => Comparator::Ge,
                };
                // Half the bounds land on the integer lattice the traces
                // draw from, forcing exact-equality edges.
                let bound = if self.rng.gen_bool(0.5) {
                    self.rng.gen_range(-4..=4) as f64
                } else {
                    self.rng.gen_range(-4.0..4.0)
                };
                Formula::cmp(self.schema.name(idx), idx, cmp, bound)
            }
            SignalKind::Bool => Formula::prop(self.schema.name(idx), idx),
        }
    }

    /// Bounded interval whose endpoints sit on half-sample multiples, so
    /// windows exercise on-grid and between-grid edges alike.
    fn bounded_interval(&mut self) -> Interval {
        let half = self.dt / 2.0;
        let lo = self.rng.gen_range(0..=6) as f64 * half;
        let len = self.rng.gen_range(0..=6) as f64 * half;
        Interval::new(lo, lo + len).unwrap()
    }

    fn interval(&mut self) -> Interval {
        // Past operators tolerate unbounded windows; sprinkle some in.
        if self.rng.gen_bool(0.15) {
            Interval::new(self.rng.gen_range(0..=2) as f64 * self.dt, f64::INFINITY).unwrap()
        } else {
            self.bounded_interval()
        }
    }

    /// Random formula of at most the given depth, drawing from every
    /// operator in the language.
    pub fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return self.atom();
        }
        match self.rng.gen_range(0..14) {
            0 | 1 => self.atom(),
            2 => self.formula(depth - 1).negate(),
            3 => self.formula(depth - 1).and(self.formula(depth - 1)),
            4 => self.formula(depth - 1).or(self.formula(depth - 1)),
            5 => self.formula(depth - 1).implies(self.formula(depth - 1)),
            6 => {
                let i = self.bounded_interval();
                self.formula(depth - 1).always(i)
            }
            7 => {
                let i = self.bounded_interval();
                self.formula(depth - 1).eventually(i)
            }
            8 => {
                let i = self.bounded_interval();
                self.formula(depth - 1).until(i, self.formula(depth - 1))
            }
            9 => {
                let i = self.interval();
                self.formula(depth - 1).since(i, self.formula(depth - 1))
            }
            10 => {
                let i = self.interval();
                self.formula(depth - 1).historically(i)
            }
            11 => {
                let i = self.interval();
                self.formula(depth - 1).once(i)
            }
            12 => self.formula(depth - 1).next(),
            _ => self.formula(depth - 1).prev(),
        }
    }

    /// Bounded interval whose endpoints are whole sample periods. Formulas
    /// built from these keep every reach quantity on the sample grid, so a
    /// horizon shift maps indices to indices.
    fn on_grid_interval(&mut self) -> Interval {
        let lo = self.rng.gen_range(0..=3) as f64 * self.dt;
        let len = self.rng.gen_range(0..=3) as f64 * self.dt;
        Interval::new(lo, lo + len).unwrap()
    }

    /// Random formula like [`formula`](Self::formula) but with every window
    /// endpoint a whole multiple of the sample period, keeping the future
    /// horizon aligned with the trace grid.
    pub fn on_grid_formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return self.atom();
        }
        match self.rng.gen_range(0..14) {
            0 | 1 => self.atom(),
            2 => self.on_grid_formula(depth - 1).negate(),
            3 => self.on_grid_formula(depth - 1).and(self.on_grid_formula(depth - 1)),
            4 => self.on_grid_formula(depth - 1).or(self.on_grid_formula(depth - 1)),
            5 => self.on_grid_formula(depth - 1).implies(self.on_grid_formula(depth - 1)),
            6 => {
                let i = self.on_grid_interval();
                self.on_grid_formula(depth - 1).always(i)
            }
            7 => {
                let i = self.on_grid_interval();
                self.on_grid_formula(depth - 1).eventually(i)
            }
            8 => {
                let i = self.on_grid_interval();
                self.on_grid_formula(depth - 1).until(i, self.on_grid_formula(depth - 1))
            }
            9 => {
                let i = self.on_grid_interval();
                self.on_grid_formula(depth - 1).since(i, self.on_grid_formula(depth - 1))
            }
            10 => {
                let i = self.on_grid_interval();
                self.on_grid_formula(depth - 1).historically(i)
            }
            11 => {
                let i = self.on_grid_interval();
                self.on_grid_formula(depth - 1).once(i)
            }
            12 => self.on_grid_formula(depth - 1).next(),
            _ => self.on_grid_formula(depth - 1).prev(),
        }
    }

    /// Past-only formula: every node has zero future reach, so it is a
    /// candidate for incremental monitoring.
    pub fn past_formula(&mut self, depth: usize) -> Formula {
        if depth == 0 {
            return self.atom();
        }
        match self.rng.gen_range(0..9) {
            0 | 1 => self.atom(),
            2 => self.past_formula(depth - 1).negate(),
            3 => self.past_formula(depth - 1).and(self.past_formula(depth - 1)),
            4 => self.past_formula(depth - 1).or(self.past_formula(depth - 1)),
            5 => {
                let i = self.bounded_interval();
                self.past_formula(depth - 1).since(i, self.past_formula(depth - 1))
            }
            6 => {
                let i = self.bounded_interval();
                self.past_formula(depth - 1).historically(i)
            }
            7 => {
                let i = self.bounded_interval();
                self.past_formula(depth - 1).once(i)
            }
            _ => self.past_formula(depth - 1).prev(),
        }
    }

    /// Random trace on the uniform grid, values on and off the integer
    /// lattice, booleans stored as 0.0/1.0.
    pub fn trace(&mut self, max_len: usize) -> Trace {
        let len = self.rng.gen_range(1..=max_len);
        self.trace_exact(len)
    }

    /// Random trace of exactly the given length.
    pub fn trace_exact(&mut self, len: usize) -> Trace {
        let mut tr = Trace::new(self.schema.clone());
        for n in 0..len {
            let state: Vec<f64> = (0..self.schema.len())
                .map(|idx| match self.schema.kind(idx) {
                    SignalKind::Real => {
                        if self.rng.gen_bool(0.5) {
                            self.rng.gen_range(-4..=4) as f64
                        } else {
                            self.rng.gen_range(-4.0..4.0)
                        }
                    }
                    SignalKind::Bool => {
                        if self.rng.gen_bool(0.5) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                })
                .collect();
            tr.push(n as f64 * self.dt, &state).unwrap();
        }
        tr
    }
}

/// Checks the recursive evaluator against the brute-force one at every
/// index of the trace: identical values on the extended reals, identical
/// error verdicts, and sign-consistency with the boolean semantics.
/// Returns the number of indices where both evaluated.
pub fn check_eval_vs_brute(f: &Formula, tr: &Trace, kappa: f64) -> usize {
    let mut compared = 0;
    for n in 0..tr.len() {
        let fast = eval_rob_kappa(f, tr, n, kappa);
        let brute = brute_rob_kappa(f, tr, n, kappa);
        match (&fast, &brute) {
            (Ok(a), Ok(b)) => {
                assert!(
                    a == b || (a.is_nan() && b.is_nan()),
                    "robustness mismatch at index {n}: fast {a}, brute {b}\nformula: {f}"
                );
                compared += 1;
                // Sign soundness: strictly signed robustness decides the
                // boolean verdict.
                if *a != 0.0 && a.is_finite() {
                    let sat = brute_bool(f, tr, n).unwrap();
                    assert_eq!(
                        sat,
                        *a > 0.0,
                        "sign/boolean disagreement at index {n} (rho = {a})\nformula: {f}"
                    );
                }
            }
            // Both refusing is agreement; the diagnostics may anchor at
            // different subformulas because the two evaluators traverse
            // in different orders.
            (Err(_), Err(_)) => {}
            _ => panic!(
                "error-verdict mismatch at index {n}: fast {fast:?}, brute {brute:?}\nformula: {f}"
            ),
        }
    }
    compared
}

/// Runs the monitor over the trace and checks each push's return against
/// the offline evaluator on the corresponding prefix.  Returns false if
/// the formula is not monitorable (future reach nonzero or unbounded
/// past), true once the full comparison ran.
pub fn check_monitor_vs_offline(f: &Formula, tr: &Trace, dt: f64, kappa: f64) -> bool {
    if !past_reach(f).resolve(dt).is_finite() {
        return false;
    }
    let mut monitor = match Monitor::with_kappa(f.clone(), tr.schema().clone(), dt, kappa) {
        Ok(m) => m,
        Err(_) => return false,
    };
    let mut prefix = Trace::new(tr.schema().clone());
    for n in 0..tr.len() {
        let t = n as f64 * dt;
        let state: Vec<f64> = tr.state(n).to_vec();
        prefix.push(t, &state).unwrap();
        let streamed = monitor.push(t, &state);
        let offline = eval_rob_kappa(f, &prefix, n, kappa);
        match (&streamed, &offline) {
            (Ok(s), Ok(o)) => assert!(
                s == o || (s.is_nan() && o.is_nan()),
                "monitor diverged from offline at index {n}: {s} vs {o}\nformula: {f}"
            ),
            // A formula whose net future reach cancels to zero (a future
            // window absorbed by a nested past shift) passes construction
            // yet still anchors intermediate evaluations beyond the newest
            // sample.  Both the stream and the offline pass refuse such a
            // prefix; refusing together is agreement.
            (Err(_), Err(_)) => {}
            _ => panic!(
                "error-verdict mismatch at index {n}: stream {streamed:?}, offline {offline:?}\nformula: {f}"
            ),
        }
    }
    true
}

/// Convenience wrapper with the default proposition weight.
pub fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

/// Runs the horizon-shifted verdict comparison for one body over one
/// trace: the body at index `n` against its lagged rewrite at index
/// `n + shift`.  Returns the number of indices where both forms produced
/// a verdict; panics on any mismatch.
pub fn check_shifted_verdicts(
    body: &Formula,
    rewritten: &Formula,
    trace: &Trace,
    shift: usize,
) -> usize {
    let mut compared = 0;
    for m in shift..trace.len() {
        let n = m - shift;
        let original = brute_bool(body, trace, n);
        let lagged = brute_bool(rewritten, trace, m);
        match (&original, &lagged) {
            (Ok(a), Ok(b)) => {
                assert_eq!(
                    a, b,
                    "verdict mismatch: body at index {n} vs rewrite at index {m}\nbody: {body}\nrewrite: {rewritten}"
                );
                compared += 1;
            }
            // The structural evaluator refuses an index when a nested
            // window demands samples past the trace end; the lagged form
            // anchors the same sub-evaluations at the same absolute
            // times, so it must refuse exactly the same indices.
            (Err(_), Err(_)) => {}
            _ => panic!(
                "refusal mismatch: body at {n} gave {original:?}, rewrite at {m} gave {lagged:?}\nbody: {body}"
            ),
        }
    }
    compared
}

/// Pascal's triangle in exact integers, for the rational Fisher oracle.
pub fn binomials(n_max: usize) -> Vec<Vec<u128>> {
    let mut c = vec![vec![0u128; n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        c[n][0] = 1;
        for k in 1..=n {
            c[n][k] = c[n - 1][k - 1] + if k <= n - 1 { c[n - 1][k] } else { 0 };
        }
    }
    c
}

/// Exact two-sided Fisher p for `[[a,b],[c,d]]` by hypergeometric
/// enumeration over a shared integer denominator: integer binomials and
/// integer probability comparisons, no floating point until the final
/// ratio.
pub fn fisher_oracle(a: u64, b: u64, c: u64, d: u64, binom: &[Vec<u128>]) -> f64 {
    let (r1, r2) = ((a + b) as usize, (c + d) as usize);
    let c1 = (a + c) as usize;
    let n = r1 + r2;
    // Numerator of P(A = k) over the common denominator C(n, c1).
    let num = |k: usize| -> Option<u128> {
        if k > r1 || c1 < k || c1 - k > r2 {
            return None;
        }
        Some(binom[r1][k] * binom[r2][c1 - k])
    };
    let observed = num(a as usize).expect("observed table is consistent");
    let mut extreme: u128 = 0;
    for k in 0..=c1.min(r1) {
        if let Some(nk) = num(k) {
            if nk <= observed {
                extreme += nk;
            }
        }
    }
    extreme as f64 / binom[n][c1] as f64
}

/// U statistic by direct pair counting (ties worth one half) — the
/// definition, independent of rank arithmetic.
pub fn u_by_pairs(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided permutation p over every labeling of the pooled sample,
/// scoring each labeling by pair counting.
pub fn mwu_oracle(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pool: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pool.len();
    let na = a.len();
    let u_obs = u_by_pairs(a, b);
    let mu = (na * (n - na)) as f64 / 2.0;
    let (mut total, mut extreme) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let mut ga = Vec::with_capacity(na);
        let mut gb = Vec::with_capacity(n - na);
        for (i, &v) in pool.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ga.push(v);
            } else {
                gb.push(v);
            }
        }
        total += 1;
        if (u_by_pairs(&ga, &gb) - mu).abs() >= (u_obs - mu).abs() - 1e-12 {
            extreme += 1;
        }
    }
    (u_obs, extreme as f64 / total as f64)
}
