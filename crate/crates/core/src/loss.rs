//! Pluggable convex loss layer.
//!
//! Each loss provides the per-sample value `l(u; y)`, its derivative in the
//! prediction `u`, the Fenchel conjugate `l*(a; y) = sup_u { a u - l(u; y) }`
//! together with its derivative, a projection onto the feasible set of the
//! conjugate, and the strong-smoothness constant `mu` (each `l` is
//! `1/mu`-strongly smooth).

use crate::error::Error;
use crate::Result;
use libm::{exp, log, log1p};

/// Guard width keeping the logistic conjugate and its derivative finite at
/// the boundary of the feasible interval `a + y in [0, 1]`.
pub const LOGISTIC_BOUNDARY_EPS: f64 = 1e-12;

/// Slack tolerated when checking dual feasibility, absorbing roundoff from
/// projected iterates.
const FEAS_TOL: f64 = 1e-12;

/// A convex per-sample loss with its conjugate calculus.
///
/// Immutable; safe to share across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossModel {
    /// `l(u; y) = (y - u)^2 / 2`, labels unrestricted.
    Square,
    /// `l(u; y) = -y u + log(1 + e^u)`, labels in `{0, 1}`.
    Logistic,
    /// Smoothed hinge in margin form `l(u; y) = phi(y u)` with transition
    /// width `gamma`, labels in `{-1, +1}`.
    Huber { gamma: f64 },
}

impl LossModel {
    /// Builds a Huber loss, validating the transition width.
    pub fn huber(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain("huber gamma must be positive and finite"));
        }
        Ok(LossModel::Huber { gamma })
    }

    /// Checks that a label is in the domain required by this loss.
    pub fn check_label(&self, y: f64) -> Result<()> {
        match self {
            LossModel::Square => Ok(()),
            LossModel::Logistic => {
                if y == 0.0 || y == 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLabel {
                        expected: "0 or 1 (logistic)",
                        got: y,
                    })
                }
            }
            LossModel::Huber { .. } => {
                if y == 1.0 || y == -1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidLabel {
                        expected: "-1 or +1 (huber)",
                        got: y,
                    })
                }
            }
        }
    }

    /// Checks every label of a response vector.
    pub fn check_labels(&self, y: &[f64]) -> Result<()> {
        for &yi in y {
            self.check_label(yi)?;
        }
        Ok(())
    }

    /// Loss value `l(u; y)`.
    pub fn value(&self, u: f64, y: f64) -> Result<f64> {
        self.check_label(y)?;
        Ok(self.value_raw(u, y))
    }

    #[inline]
    pub(crate) fn value_raw(&self, u: f64, y: f64) -> f64 {
        match *self {
            LossModel::Square => {
                let d = y - u;
                0.5 * d * d
            }
            LossModel::Logistic => -y * u + log1p_exp(u),
            LossModel::Huber { gamma } => {
                let m = y * u;
                if m >= 1.0 {
                    0.0
                } else if m < 1.0 - gamma {
                    1.0 - m - gamma / 2.0
                } else {
                    let d = 1.0 - m;
                    d * d / (2.0 * gamma)
                }
            }
        }
    }

    /// Derivative of the loss in the prediction, `dl/du`.
    pub fn derivative(&self, u: f64, y: f64) -> Result<f64> {
        self.check_label(y)?;
        Ok(self.derivative_raw(u, y))
    }

    #[inline]
    pub(crate) fn derivative_raw(&self, u: f64, y: f64) -> f64 {
        match *self {
            LossModel::Square => u - y,
            LossModel::Logistic => -y + sigmoid(u),
            LossModel::Huber { gamma } => {
                let m = y * u;
                // C^1: the kink values coincide with the smooth branch.
                if m >= 1.0 {
                    0.0
                } else if m < 1.0 - gamma {
                    -y
                } else {
                    y * (m - 1.0) / gamma
                }
            }
        }
    }

    /// Fenchel conjugate `l*(a; y)`; `a` must be feasible.
    pub fn conjugate_value(&self, a: f64, y: f64) -> Result<f64> {
        self.check_label(y)?;
        match *self {
            LossModel::Square => Ok(0.5 * a * a + y * a),
            LossModel::Logistic => {
                let t = a + y;
                if !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&t) {
                    return Err(Error::Infeasible { value: a });
                }
                let t = t.clamp(0.0, 1.0);
                Ok(xlogx(t) + xlogx(1.0 - t))
            }
            LossModel::Huber { gamma } => {
                let m = y * a;
                if !(-1.0 - FEAS_TOL..=FEAS_TOL).contains(&m) {
                    return Err(Error::Infeasible { value: a });
                }
                Ok(y * a + 0.5 * gamma * a * a)
            }
        }
    }

    /// Derivative of the conjugate, `dl*/da`; `a` must be strictly interior
    /// to the feasible set.
    pub fn conjugate_derivative(&self, a: f64, y: f64) -> Result<f64> {
        self.check_label(y)?;
        match *self {
            LossModel::Square => Ok(a + y),
            LossModel::Logistic => {
                let t = a + y;
                if t <= 0.0 || t >= 1.0 {
                    return Err(Error::Infeasible { value: a });
                }
                Ok(log(t / (1.0 - t)))
            }
            LossModel::Huber { gamma } => {
                let m = y * a;
                if !(-1.0 - FEAS_TOL..=FEAS_TOL).contains(&m) {
                    return Err(Error::Infeasible { value: a });
                }
                Ok(y + gamma * a)
            }
        }
    }

    #[inline]
    pub(crate) fn conjugate_derivative_raw(&self, a: f64, y: f64) -> f64 {
        match *self {
            LossModel::Square => a + y,
            LossModel::Logistic => {
                let t = a + y;
                log(t / (1.0 - t))
            }
            LossModel::Huber { gamma } => y + gamma * a,
        }
    }

    /// Projects `a` onto the feasible set of the conjugate.
    ///
    /// For the logistic loss the projection leaves a margin of
    /// [`LOGISTIC_BOUNDARY_EPS`] so that `l*` and its derivative stay finite.
    #[inline]
    pub fn project_feasible(&self, a: f64, y: f64) -> f64 {
        match *self {
            LossModel::Square => a,
            LossModel::Logistic => {
                let eps = LOGISTIC_BOUNDARY_EPS;
                (a + y).clamp(eps, 1.0 - eps) - y
            }
            LossModel::Huber { .. } => {
                // feasible set: -1 <= y a <= 0, with y in {-1, +1}
                y * (y * a).clamp(-1.0, 0.0)
            }
        }
    }

    /// True when `a` is feasible for the conjugate (up to roundoff slack).
    pub fn is_feasible(&self, a: f64, y: f64) -> bool {
        match *self {
            LossModel::Square => a.is_finite(),
            LossModel::Logistic => (-FEAS_TOL..=1.0 + FEAS_TOL).contains(&(a + y)),
            LossModel::Huber { .. } => (-1.0 - FEAS_TOL..=FEAS_TOL).contains(&(y * a)),
        }
    }

    /// Strong-smoothness constant `mu`: each loss is `1/mu`-strongly smooth.
    pub fn smoothness_mu(&self) -> f64 {
        match *self {
            LossModel::Square => 1.0,
            LossModel::Logistic => 4.0,
            LossModel::Huber { gamma } => gamma,
        }
    }
}

#[inline]
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + exp(-u))
    } else {
        let e = exp(u);
        e / (1.0 + e)
    }
}

/// Numerically stable `log(1 + e^u)`.
#[inline]
fn log1p_exp(u: f64) -> f64 {
    if u > 0.0 {
        u + log1p(exp(-u))
    } else {
        log1p(exp(u))
    }
}

/// `t log t` with the `0 log 0 = 0` convention.
#[inline]
fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * log(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn square_values() {
        let l = LossModel::Square;
        assert_eq!(l.value(0.0, 0.0).unwrap(), 0.0);
        assert!(close(l.value(0.5, 1.0).unwrap(), 0.125, 1e-15));
        assert!(close(l.derivative(0.5, 1.0).unwrap(), -0.5, 1e-15));
        assert_eq!(l.derivative(2.5, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn square_conjugate() {
        let l = LossModel::Square;
        assert!(close(l.conjugate_value(0.5, 1.0).unwrap(), 0.625, 1e-15));
        assert_eq!(l.conjugate_value(0.0, 42.0).unwrap(), 0.0);
        assert!(close(l.conjugate_derivative(0.5, 1.0).unwrap(), 1.5, 1e-15));
        assert_eq!(l.conjugate_derivative(-3.0, 3.0).unwrap(), 0.0);
        assert_eq!(l.project_feasible(7.3, -2.0), 7.3);
    }

    #[test]
    fn logistic_forms() {
        let l = LossModel::Logistic;
        assert!(close(l.derivative(0.0, 0.0).unwrap(), 0.5, 1e-15));
        let v = l.conjugate_value(0.5, 0.0).unwrap();
        assert!(close(v, -core::f64::consts::LN_2, 1e-12));
        // boundary terms evaluate to zero
        assert_eq!(l.conjugate_value(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(l.conjugate_value(0.0, 1.0).unwrap(), 0.0);
        assert!(l.conjugate_derivative(1.0, 0.0).is_err());
        assert!(close(
            l.project_feasible(2.0, 0.0),
            1.0 - LOGISTIC_BOUNDARY_EPS,
            0.0
        ));
        assert!(l.value(0.0, 0.5).is_err());
    }

    #[test]
    fn huber_forms() {
        let l = LossModel::huber(0.5).unwrap();
        assert_eq!(l.value(1.2, 1.0).unwrap(), 0.0); // flat region y*u >= 1
        assert!(l.value(0.0, 0.3).is_err());
        assert_eq!(l.project_feasible(0.5, 1.0), 0.0);
        assert_eq!(l.project_feasible(-3.0, 1.0), -1.0);
        // conjugate on the feasible set: y*a + (gamma/2)*a^2
        assert!(close(l.conjugate_value(-0.5, 1.0).unwrap(), -0.4375, 1e-15));
        assert!(l.conjugate_value(0.5, 1.0).is_err());
    }

    #[test]
    fn smoothness_constants() {
        assert_eq!(LossModel::Square.smoothness_mu(), 1.0);
        assert_eq!(LossModel::Logistic.smoothness_mu(), 4.0);
        assert_eq!(LossModel::huber(0.5).unwrap().smoothness_mu(), 0.5);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for (loss, u, y) in [
            (LossModel::Square, 0.7, -1.3),
            (LossModel::Logistic, -0.4, 1.0),
            (LossModel::huber(0.5).unwrap(), 0.3, -1.0),
            (LossModel::huber(0.5).unwrap(), -2.0, 1.0),
        ] {
            let fd = (loss.value(u + h, y).unwrap() - loss.value(u - h, y).unwrap()) / (2.0 * h);
            assert!(close(loss.derivative(u, y).unwrap(), fd, 1e-6));
        }
    }
}
