use crate::avatar::{wrap_hue, AppearanceState, SwayOscillator, SwayState, MAX_SWAY};
use crate::config::GenerationConfig;
use crate::rng::RngStream;

/// Second-order sway model `ψ̈ = −ω²ψ − c·ψ̇ + k·v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwayParams {
    pub omega: f64,
    pub damping: f64,
    pub gain: f64,
}

impl Default for SwayParams {
    fn default() -> Self {
        SwayParams {
            omega: 6.0,
            damping: 2.0,
            gain: 40.0,
        }
    }
}

impl From<&GenerationConfig> for SwayParams {
    fn from(c: &GenerationConfig) -> Self {
        SwayParams {
            omega: c.sway_omega,
            damping: c.sway_damping,
            gain: c.sway_gain,
        }
    }
}

impl SwayParams {
    /// One Euler step: velocity first, then position from the new velocity.
    pub fn step(&self, o: SwayOscillator, root_velocity: f64, dt: f64) -> SwayOscillator {
        let accel = -self.omega * self.omega * o.angle - self.damping * o.velocity
            + self.gain * root_velocity;
        let mut velocity = o.velocity + dt * accel;
        let mut angle = o.angle + dt * velocity;
        if angle.abs() > MAX_SWAY {
            angle = angle.clamp(-MAX_SWAY, MAX_SWAY);
            if velocity * angle > 0.0 {
                velocity = 0.0;
            }
        }
        SwayOscillator { angle, velocity }
    }
}

/// Advances every sway region by one frame.
pub fn step_sway(state: &SwayState, root_velocity: f64, dt: f64, params: &SwayParams) -> SwayState {
    SwayState {
        regions: state
            .regions
            .iter()
            .map(|&o| params.step(o, root_velocity, dt))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppearanceMode {
    Locked,
    Walk,
}

/// One frame of appearance evolution. `Walk` draws three Gaussians per part,
/// in covered-part order.
pub fn step_appearance(
    state: &AppearanceState,
    mode: AppearanceMode,
    rng: &mut RngStream,
    config: &GenerationConfig,
) -> AppearanceState {
    if mode == AppearanceMode::Locked {
        return state.clone();
    }
    let sigma = config.drift_sigma;
    let mut next = state.clone();
    for p in &mut next.parts {
        let (g0, g1, g2) = (
            rng.next_gaussian(),
            rng.next_gaussian(),
            rng.next_gaussian(),
        );
        if sigma == 0.0 {
            continue;
        }
        p.hue_shift = wrap_hue(p.hue_shift + sigma * g0);
        p.brightness = (p.brightness + 0.3 * sigma * g1).clamp(0.5, 1.5);
        p.phase = (p.phase + 0.6 * sigma * g2).rem_euclid(1.0);
        if p.phase >= 1.0 {
            p.phase = 0.0;
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avatar::{GarmentSpec, PartAppearance};
    use crate::rng::derive_rng;

    fn osc(angle: f64, velocity: f64) -> SwayOscillator {
        SwayOscillator { angle, velocity }
    }

    #[test]
    fn equilibrium_is_fixed() {
        let p = SwayParams::default();
        assert_eq!(p.step(osc(0.0, 0.0), 0.0, 0.125), osc(0.0, 0.0));
    }

    #[test]
    fn single_step_hand_evaluated() {
        // v' = 0 + 0.125 * (-36 * 0.1) = -0.45 ; ψ' = 0.1 + 0.125 * -0.45
        let next = SwayParams::default().step(osc(0.1, 0.0), 0.0, 0.125);
        assert!((next.velocity + 0.45).abs() < 1e-15);
        assert!((next.angle - 0.04375).abs() < 1e-15);
    }

    #[test]
    fn constant_drive_converges_to_static_deflection() {
        let p = SwayParams::default();
        let v = 0.05;
        let mut o = osc(0.0, 0.0);
        for _ in 0..400 {
            o = p.step(o, v, 0.125);
        }
        let expected = p.gain * v / (p.omega * p.omega);
        assert!(
            (o.angle - expected).abs() < 1e-3,
            "{} vs {expected}",
            o.angle
        );
    }

    #[test]
    fn sway_is_clamped() {
        let p = SwayParams::default();
        let mut o = osc(0.0, 0.0);
        for _ in 0..100 {
            o = p.step(o, 10.0, 0.125);
            assert!(o.angle.abs() <= MAX_SWAY);
        }
    }

    fn state() -> (GarmentSpec, AppearanceState) {
        let g = GarmentSpec::builtin("top").unwrap();
        let s = AppearanceState {
            parts: vec![
                PartAppearance {
                    hue_shift: 0.4,
                    brightness: 1.1,
                    phase: 0.3,
                };
                3
            ],
        };
        (g, s)
    }

    #[test]
    fn locked_and_zero_sigma_are_identity() {
        let (_, s) = state();
        let mut rng = derive_rng(1, 0, "drift").unwrap();
        let cfg = GenerationConfig::default();
        assert_eq!(
            step_appearance(&s, AppearanceMode::Locked, &mut rng, &cfg),
            s
        );
        let still = GenerationConfig {
            drift_sigma: 0.0,
            ..cfg
        };
        assert_eq!(
            step_appearance(&s, AppearanceMode::Walk, &mut rng, &still),
            s
        );
    }

    #[test]
    fn walk_matches_standalone_simulation() {
        let (_, s) = state();
        let cfg = GenerationConfig::default();
        let mut rng = derive_rng(42, 3, "drift").unwrap();
        let mut walked = s.clone();
        for _ in 0..240 {
            walked = step_appearance(&walked, AppearanceMode::Walk, &mut rng, &cfg);
        }
        // oracle: raw SplitMix64 + Box-Muller written out here
        let mut state_word = 42u64 ^ crate::rng::hash64(3, "drift");
        let mut next = || {
            state_word = state_word.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state_word;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut gauss = || {
            let u1 = 1.0 - next();
            let u2 = next();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let pi = std::f64::consts::PI;
        let mut expect = vec![(0.4f64, 1.1f64, 0.3f64); 3];
        for _ in 0..240 {
            for e in expect.iter_mut() {
                let (a, b, c) = (gauss(), gauss(), gauss());
                e.0 = (e.0 + 0.02 * a + pi).rem_euclid(2.0 * pi) - pi;
                e.1 = (e.1 + 0.006 * b).clamp(0.5, 1.5);
                e.2 = (e.2 + 0.012 * c).rem_euclid(1.0);
            }
        }
        for (p, e) in walked.parts.iter().zip(&expect) {
            assert!((p.hue_shift - e.0).abs() < 1e-9);
            assert!((p.brightness - e.1).abs() < 1e-9);
            assert!((p.phase - e.2).abs() < 1e-9);
        }
        assert!(walked != s);
    }
}
