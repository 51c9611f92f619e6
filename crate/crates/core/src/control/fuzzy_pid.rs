use super::{pid_step, ControlError, PidGains, PidState};
use crate::fuzzy::GainScheduler;
use serde::{Deserialize, Serialize};

/// Base gains plus the quantization and scale factors mapping physical
/// signals into the normalized fuzzy universes and back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzyPidConfig {
    pub base: PidGains,
    /// Normalized error per unit physical error.
    pub error_scale: f64,
    /// Normalized error rate per unit physical error rate.
    pub rate_scale: f64,
    /// Physical gain change per normalized inference output, per term.
    pub delta_scale: PidGains,
    pub integral_limit: f64,
}

/// PID step whose gains are base + fuzzy increment, clamped at zero.
/// Returns the control output, next state and the gains actually used.
pub fn fuzzy_pid_step(
    cfg: &FuzzyPidConfig,
    state: &PidState,
    error: f64,
    dt: f64,
    scheduler: &GainScheduler,
) -> Result<(f64, PidState, PidGains), ControlError> {
    if !(dt > 0.0) {
        return Err(ControlError::NonPositiveDt(dt));
    }
    let rate = state.error_rate(error, dt);
    let delta = scheduler.increments(error * cfg.error_scale, rate * cfg.rate_scale)?;
    let effective = PidGains {
        kp: (cfg.base.kp + cfg.delta_scale.kp * delta.kp).max(0.0),
        ki: (cfg.base.ki + cfg.delta_scale.ki * delta.ki).max(0.0),
        kd: (cfg.base.kd + cfg.delta_scale.kd * delta.kd).max(0.0),
    };
    let (output, next) = pid_step(&effective, state, error, dt, cfg.integral_limit)?;
    Ok((output, next, effective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{GainTarget, LinguisticLabel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(delta: PidGains) -> FuzzyPidConfig {
        FuzzyPidConfig {
            base: PidGains::new(1.2, 0.1, 0.8),
            error_scale: 1.0,
            rate_scale: 0.5,
            delta_scale: delta,
            integral_limit: 3.0,
        }
    }

    #[test]
    fn equilibrium_reduces_kp_by_ns() {
        let s = GainScheduler::default();
        let cfg = config(PidGains::new(0.1, 0.01, 0.05));
        let (_, _, eff) = fuzzy_pid_step(&cfg, &PidState::default(), 0.0, 0.01, &s).unwrap();
        let ns = s.output_center(LinguisticLabel::NS);
        assert!((eff.kp - (1.2 + 0.1 * ns)).abs() < 1e-12);
        assert!((eff.kp - 1.1).abs() < 1e-12);
    }

    #[test]
    fn saturated_pb_error_with_nb_rate_uses_pm() {
        let s = GainScheduler::default();
        let cfg = config(PidGains::new(0.1, 0.0, 0.0));
        // error +10 saturates PB; a fall from 12 to 10 in 0.01 s saturates NB.
        let state = PidState {
            integral: 0.0,
            prev_error: Some(12.0),
        };
        let (_, _, eff) = fuzzy_pid_step(&cfg, &state, 10.0, 0.01, &s).unwrap();
        assert_eq!(
            s.table(GainTarget::Kp)
                .lookup(LinguisticLabel::PB, LinguisticLabel::NB),
            LinguisticLabel::PM
        );
        let pm = s.output_center(LinguisticLabel::PM);
        assert!((eff.kp - (1.2 + 0.1 * pm)).abs() < 1e-12);
    }

    #[test]
    fn zero_scale_matches_plain_pid_on_random_streams() {
        let s = GainScheduler::default();
        let cfg = config(PidGains::default());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (mut fs, mut ps) = (PidState::default(), PidState::default());
            for _ in 0..50 {
                let e = rng.random_range(-8.0..8.0);
                let (uf, nf, eff) = fuzzy_pid_step(&cfg, &fs, e, 0.01, &s).unwrap();
                let (up, np) = pid_step(&cfg.base, &ps, e, 0.01, cfg.integral_limit).unwrap();
                assert_eq!(uf.to_bits(), up.to_bits());
                assert_eq!(eff, cfg.base);
                (fs, ps) = (nf, np);
            }
        }
    }

    #[test]
    fn effective_gains_never_negative_or_nan() {
        let s = GainScheduler::default();
        let mut cfg = config(PidGains::new(5.0, 5.0, 5.0));
        cfg.base = PidGains::new(0.1, 0.0, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = PidState::default();
        for _ in 0..2000 {
            let e = rng.random_range(-1e6..1e6);
            let (u, next, eff) = fuzzy_pid_step(&cfg, &state, e, 0.01, &s).unwrap();
            assert!(u.is_finite());
            for g in [eff.kp, eff.ki, eff.kd] {
                assert!(g >= 0.0 && g.is_finite());
            }
            state = next;
        }
    }

    #[test]
    fn rejects_non_positive_dt() {
        let s = GainScheduler::default();
        let cfg = config(PidGains::default());
        assert!(matches!(
            fuzzy_pid_step(&cfg, &PidState::default(), 1.0, 0.0, &s),
            Err(ControlError::NonPositiveDt(_))
        ));
    }
}
