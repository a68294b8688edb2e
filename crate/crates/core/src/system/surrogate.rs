//! A deterministic surrogate automatic-transmission plant: throttle and
//! brake in, velocity, engine speed, and gear state out. The dynamics are a
//! small fixed-step ODE chosen for qualitative realism (gears climb under
//! throttle, engine speed re-drops after each shift), not fidelity to any
//! particular vehicle.

use crate::stl::{SignalKind, SignalSchema};
use crate::system::{clamp_input, InputChannel, ModelError, SystemModel};

pub const GEAR_RATIOS: [f64; 4] = [4.0, 2.5, 1.5, 1.0];
pub const IDLE_OMEGA: f64 = 800.0;
pub const UPSHIFT_OMEGA: f64 = 3500.0;
pub const DOWNSHIFT_OMEGA: f64 = 1200.0;
pub const SHIFT_DWELL: f64 = 0.5;
pub const DEFAULT_SUBSTEP: f64 = 0.01;

const THROTTLE_GAIN: f64 = 0.04;
const BRAKE_GAIN: f64 = 0.10;
const DRAG: f64 = 0.02;
const OMEGA_PER_SPEED: f64 = 40.0;

/// Surrogate automatic transmission.
///
/// State: velocity `v ≥ 0` (km/h), engine speed `ω ≥ 800` (RPM), gear
/// `g ∈ {1..4}`, and a dwell timer enforcing at least half a second between
/// gear shifts. Velocity integrates
/// `dv/dt = 0.04·throttle·r_g − 0.10·brake − 0.02·v` by explicit fixed-step
/// integration; engine speed is the output map `ω = 40·r_g·v + 800`.
///
/// Output signals: `v`, `omega`, `g` (gear number as a real), and the
/// one-hot gear propositions `g1..g4`.
#[derive(Debug, Clone)]
pub struct SurrogateAt {
    v: f64,
    omega: f64,
    gear: usize,
    dwell: f64,
    substep: f64,
    channels: Vec<InputChannel>,
    schema: SignalSchema,
}

impl Default for SurrogateAt {
    fn default() -> Self {
        Self::new()
    }
}

impl SurrogateAt {
    pub fn new() -> Self {
        Self::with_substep(DEFAULT_SUBSTEP)
    }

    /// A plant integrating at a non-default internal step. Exists so
    /// convergence can be checked by integrating the same scenario at a
    /// finer step; everything else uses the default.
    pub fn with_substep(substep: f64) -> Self {
        assert!(substep.is_finite() && substep > 0.0, "bad integrator step {substep}");
        let channels = vec![
            InputChannel::new("throttle", 0.0, 100.0),
            InputChannel::new("brake", 0.0, 325.0),
        ];
        let schema = SignalSchema::new(vec![
            ("v".into(), SignalKind::Real),
            ("omega".into(), SignalKind::Real),
            ("g".into(), SignalKind::Real),
            ("g1".into(), SignalKind::Bool),
            ("g2".into(), SignalKind::Bool),
            ("g3".into(), SignalKind::Bool),
            ("g4".into(), SignalKind::Bool),
        ])
        .expect("static schema is valid");
        let mut plant =
            Self { v: 0.0, omega: IDLE_OMEGA, gear: 1, dwell: 0.0, substep, channels, schema };
        plant.reinit();
        plant
    }

    fn reinit(&mut self) {
        self.v = 0.0;
        self.omega = IDLE_OMEGA;
        self.gear = 1;
        // A fresh plant owes no dwell: the first shift is ungated.
        self.dwell = SHIFT_DWELL;
    }

    fn ratio(&self) -> f64 {
        GEAR_RATIOS[self.gear - 1]
    }

    fn state_vector(&self) -> Vec<f64> {
        let mut out = vec![self.v, self.omega, self.gear as f64, 0.0, 0.0, 0.0, 0.0];
        out[2 + self.gear] = 1.0;
        out
    }

    fn integrate(&mut self, throttle: f64, brake: f64, dt: f64) {
        let n = ((dt / self.substep) - 1e-9).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        for _ in 0..n {
            let r = self.ratio();
            let dv = THROTTLE_GAIN * throttle * r - BRAKE_GAIN * brake - DRAG * self.v;
            self.v = (self.v + h * dv).max(0.0);
            self.dwell += h;
            let omega = OMEGA_PER_SPEED * r * self.v + IDLE_OMEGA;
            if self.dwell >= SHIFT_DWELL {
                if omega > UPSHIFT_OMEGA && self.gear < 4 {
                    self.gear += 1;
                    self.dwell = 0.0;
                } else if omega < DOWNSHIFT_OMEGA && self.gear > 1 {
                    self.gear -= 1;
                    self.dwell = 0.0;
                }
            }
            self.omega = OMEGA_PER_SPEED * self.ratio() * self.v + IDLE_OMEGA;
        }
    }
}

impl SystemModel for SurrogateAt {
    fn input_channels(&self) -> &[InputChannel] {
        &self.channels
    }

    fn output_schema(&self) -> &SignalSchema {
        &self.schema
    }

    fn reset(&mut self) -> Result<Vec<f64>, ModelError> {
        self.reinit();
        Ok(self.state_vector())
    }

    fn step(&mut self, u: &[f64], dt: f64) -> Result<Vec<f64>, ModelError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ModelError::InvalidSamplePeriod(dt));
        }
        let u = clamp_input(&self.channels, u)?;
        self.integrate(u[0], u[1], dt);
        Ok(self.state_vector())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{run_signal, InputSignal};

    fn full_throttle(steps: usize, dt: f64) -> InputSignal {
        InputSignal::from_steps(dt, 2, (0..steps).map(|_| vec![100.0, 0.0])).unwrap()
    }

    #[test]
    fn idle_is_an_equilibrium() {
        let mut plant = SurrogateAt::new();
        let x0 = plant.reset().unwrap();
        assert_eq!(x0, vec![0.0, 800.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        for _ in 0..5 {
            let x = plant.step(&[0.0, 0.0], 1.0).unwrap();
            assert_eq!(x, x0);
        }
    }

    #[test]
    fn first_second_matches_fine_step_reference() {
        let mut plant = SurrogateAt::new();
        plant.reset().unwrap();
        let x = plant.step(&[100.0, 0.0], 1.0).unwrap();

        // Reference: same equations integrated literally at h = 0.0001 in
        // gear 1 (no shift occurs in the first second from rest).
        let mut v_ref = 0.0_f64;
        let h = 0.0001;
        for _ in 0..10_000 {
            let dv = 0.04 * 100.0 * 4.0 - 0.02 * v_ref;
            v_ref = (v_ref + h * dv).max(0.0);
        }
        let rel = ((x[0] - v_ref) / v_ref).abs();
        assert!(rel < 0.005, "v = {} vs reference {v_ref} ({:.4}% off)", x[0], rel * 100.0);
        assert_eq!(x[2], 1.0, "no shift expected in the first second");
    }

    #[test]
    fn full_throttle_climbs_through_all_gears() {
        let mut plant = SurrogateAt::new();
        let tr = run_signal(&mut plant, &full_throttle(100, 0.1)).unwrap();
        let gears: Vec<f64> = (0..tr.len()).map(|n| tr.value(n, 2)).collect();
        // Gears climb 1 -> 2 -> 3 -> 4 with no skips and no downshifts.
        let mut seen = vec![1.0];
        for &g in &gears {
            let last = *seen.last().unwrap();
            assert!(g == last || g == last + 1.0, "gear jumped {last} -> {g}");
            if g != last {
                seen.push(g);
            }
        }
        assert_eq!(seen, vec![1.0, 2.0, 3.0, 4.0]);
        // Engine speed re-drops below the upshift threshold right after
        // each shift.
        for n in 1..tr.len() {
            if tr.value(n, 2) != tr.value(n - 1, 2) {
                assert!(
                    tr.value(n, 1) < UPSHIFT_OMEGA,
                    "omega {} still above threshold after shift at sample {n}",
                    tr.value(n, 1)
                );
            }
        }
        // One-hot gear signals stay consistent with the gear number.
        for n in 0..tr.len() {
            let g = tr.value(n, 2) as usize;
            for i in 1..=4 {
                let expect = if i == g { 1.0 } else { 0.0 };
                assert_eq!(tr.value(n, 2 + i), expect, "g{i} at sample {n}");
            }
        }
    }

    #[test]
    fn state_stays_in_bounds_under_scrambled_inputs() {
        let mut plant = SurrogateAt::new();
        plant.reset().unwrap();
        let mut x = 0.613_f64;
        for _ in 0..300 {
            x = (x * 9.71 + 0.37).rem_euclid(1.0);
            let throttle = x * 120.0 - 10.0; // deliberately strays out of range
            let brake = ((x * 7.0).rem_euclid(1.0)) * 400.0 - 30.0;
            let out = plant.step(&[throttle, brake], 0.5).unwrap();
            assert!(out[0] >= 0.0, "v went negative: {}", out[0]);
            assert!(out[1] >= 800.0, "omega sagged below idle: {}", out[1]);
            assert!((1.0..=4.0).contains(&out[2]), "gear out of range: {}", out[2]);
        }
    }

    #[test]
    fn halving_the_integrator_step_barely_moves_outputs() {
        let coarse = run_signal(&mut SurrogateAt::new(), &full_throttle(15, 1.0)).unwrap();
        let fine =
            run_signal(&mut SurrogateAt::with_substep(DEFAULT_SUBSTEP / 2.0), &full_throttle(15, 1.0))
                .unwrap();
        for n in 0..coarse.len() {
            for s in 0..coarse.schema().len() {
                let (a, b) = (coarse.value(n, s), fine.value(n, s));
                let denom = a.abs().max(b.abs());
                let rel = if denom == 0.0 { 0.0 } else { (a - b).abs() / denom };
                assert!(
                    rel < 0.005,
                    "sample {n} signal {s}: {a} vs {b} ({:.4}% off)",
                    rel * 100.0
                );
            }
        }
    }

    #[test]
    fn determinism_is_bit_for_bit() {
        let u = full_throttle(40, 0.5);
        let a = run_signal(&mut SurrogateAt::new(), &u).unwrap();
        let b = run_signal(&mut SurrogateAt::new(), &u).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prefix_closure_holds() {
        let u = full_throttle(20, 0.5);
        let full = run_signal(&mut SurrogateAt::new(), &u).unwrap();
        let partial = run_signal(&mut SurrogateAt::new(), &u.prefix(7)).unwrap();
        for n in 0..partial.len() {
            assert_eq!(partial.time(n), full.time(n));
            assert_eq!(partial.state(n), full.state(n));
        }
    }

    #[test]
    fn hard_braking_holds_velocity_at_zero() {
        let mut plant = SurrogateAt::new();
        plant.reset().unwrap();
        plant.step(&[100.0, 0.0], 2.0).unwrap();
        let mut last = f64::INFINITY;
        for _ in 0..20 {
            let x = plant.step(&[0.0, 325.0], 1.0).unwrap();
            assert!(x[0] <= last);
            last = x[0];
        }
        assert_eq!(last, 0.0);
    }
}
