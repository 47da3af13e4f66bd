//! Constructors for the states the protocol works with.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, DensityMatrix, PureState, C64, ZERO};

/// Angles of `cos(theta)|00> + e^{i phi} sin(theta)|11>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub theta: f64,
    pub phi: f64,
}

impl StateParams {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// `cos(phi) sin(2 theta)`, the XX correlation of the pure family.
    pub fn xx_correlation(&self) -> f64 {
        self.phi.cos() * (2.0 * self.theta).sin()
    }
}

/// Singlet weight of a Werner state, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct WernerParam(f64);

impl WernerParam {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

pub fn pure_system_state(params: StateParams) -> PureState {
    let (s, c) = params.theta.sin_cos();
    let amps = vec![C64::new(c, 0.0), ZERO, ZERO, C64::from_polar(s, params.phi)];
    PureState::new(2, amps).expect("cos^2 + sin^2 = 1")
}

pub fn bell_state(kind: BellKind) -> PureState {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let amps = match kind {
        BellKind::PhiPlus => vec![h, ZERO, ZERO, h],
        BellKind::PhiMinus => vec![h, ZERO, ZERO, -h],
        BellKind::PsiPlus => vec![ZERO, h, h, ZERO],
        BellKind::PsiMinus => vec![ZERO, h, -h, ZERO],
    };
    PureState::new(2, amps).expect("Bell vectors are normalized")
}

/// `p |Psi-><Psi-| + (1 - p) I / 4`
pub fn werner_state(p: WernerParam) -> DensityMatrix {
    let p = p.value();
    let singlet = bell_state(BellKind::PsiMinus).projector();
    let noise = ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
    DensityMatrix::new(&singlet.scale_real(p) + &noise)
        .expect("Werner state is a valid density matrix")
}

/// Meter preparations: 1 is `(|00> + |11>)/sqrt2` (up/down basis), 2 is
/// `(|01> + |10>)/sqrt2` (circle/cross basis).
pub fn meter_state(index: usize) -> Result<PureState> {
    match index {
        1 => Ok(bell_state(BellKind::PhiPlus)),
        2 => Ok(bell_state(BellKind::PsiPlus)),
        _ => Err(Error::InvalidIndex { index, limit: 3 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: C64, re: f64, im: f64) -> bool {
        (a - C64::new(re, im)).norm() < 1e-15
    }

    #[test]
    fn pure_state_examples() {
        let s = pure_system_state(StateParams::new(0.0, 0.0));
        assert_eq!(s, PureState::basis(2, 0).unwrap());

        let h = FRAC_1_SQRT_2;
        let a = pure_system_state(StateParams::new(FRAC_PI_4, 0.0));
        assert!(close(a.amplitudes()[0], h, 0.0) && close(a.amplitudes()[3], h, 0.0));

        let b = pure_system_state(StateParams::new(FRAC_PI_4, FRAC_PI_2));
        assert!(close(b.amplitudes()[0], h, 0.0) && close(b.amplitudes()[3], 0.0, h));
    }

    #[test]
    fn bell_vectors() {
        let h = FRAC_1_SQRT_2;
        let m = bell_state(BellKind::PsiMinus);
        assert!(close(m.amplitudes()[1], h, 0.0) && close(m.amplitudes()[2], -h, 0.0));
        let p = bell_state(BellKind::PhiPlus);
        assert!(close(p.amplitudes()[0], h, 0.0) && close(p.amplitudes()[3], h, 0.0));
        for k in [
            BellKind::PhiPlus,
            BellKind::PhiMinus,
            BellKind::PsiPlus,
            BellKind::PsiMinus,
        ] {
            assert!((bell_state(k).norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn werner_examples() {
        let w0 = werner_state(WernerParam::new(0.0).unwrap());
        assert!(
            w0.matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                < 1e-15
        );

        let w1 = werner_state(WernerParam::new(1.0).unwrap());
        assert!(
            w1.matrix()
                .max_abs_diff(&bell_state(BellKind::PsiMinus).projector())
                < 1e-15
        );

        let w = werner_state(WernerParam::new(0.5).unwrap());
        let expected = ComplexMatrix::from_real_rows(&[
            &[0.125, 0.0, 0.0, 0.0],
            &[0.0, 0.375, -0.25, 0.0],
            &[0.0, -0.25, 0.375, 0.0],
            &[0.0, 0.0, 0.0, 0.125],
        ]);
        assert!(w.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn werner_param_range() {
        assert!(WernerParam::new(-0.01).is_err());
        assert!(WernerParam::new(1.01).is_err());
        assert!(WernerParam::new(f64::NAN).is_err());
    }

    #[test]
    fn meters() {
        let h = FRAC_1_SQRT_2;
        let m1 = meter_state(1).unwrap();
        assert!(close(m1.amplitudes()[0], h, 0.0) && close(m1.amplitudes()[3], h, 0.0));
        let m2 = meter_state(2).unwrap();
        assert!(close(m2.amplitudes()[1], h, 0.0) && close(m2.amplitudes()[2], h, 0.0));
        assert_eq!(m1, bell_state(BellKind::PhiPlus));
        assert_eq!(m2, bell_state(BellKind::PsiPlus));
        assert!(matches!(meter_state(3), Err(Error::InvalidIndex { .. })));
        assert!(matches!(meter_state(0), Err(Error::InvalidIndex { .. })));
    }

    #[test]
    fn phi_periodicity() {
        for k in 0..10 {
            let t = 0.3 * k as f64;
            let a = pure_system_state(StateParams::new(t, 0.7));
            let b = pure_system_state(StateParams::new(t, 0.7 + 2.0 * PI));
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() < 1e-12);
            }
            let p = a.probabilities();
            assert!((p[0] - t.cos().powi(2)).abs() < 1e-12);
            assert!((p[3] - t.sin().powi(2)).abs() < 1e-12);
            assert_eq!(p[1] + p[2], 0.0);
        }
    }
}
