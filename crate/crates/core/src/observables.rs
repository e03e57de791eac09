//! Lifting maps from physical state to observables, and the algebraic
//! constraints tying the observables together.
//!
//! Vectors are block-stacked by variable: a state with `m` variables on `N`
//! cells is `[q1(0..N); q2(0..N); ...]`, and likewise for observables.
//! Every constraint is pointwise and of the form
//! `h_k = y_{target(k)} - N_k(y at the same cell)`, which is what the
//! empirical interpolation of the constraints relies on.

use crate::fvm::{OperatorKind, SparseOperator, TripletBuilder};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ObservableError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("constraint {family} is singular at cell {cell}")]
    Singular { family: usize, cell: usize },
    #[error("invalid state at cell {cell}: {msg}")]
    InvalidState { cell: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A lifted system: observables, the lifting map and its pointwise
/// constraints.
pub trait LiftedSystem: Send + Sync {
    fn name(&self) -> &str;
    /// State variables per cell.
    fn n_state(&self) -> usize;
    /// Observables per cell.
    fn n_observables(&self) -> usize;
    fn observable_names(&self) -> Vec<String>;
    /// Constraints per cell.
    fn n_constraints(&self) -> usize;
    /// Index of the observable isolated by constraint `k`.
    fn target(&self, k: usize) -> usize;
    /// `N_k` at one cell, given all observables at that cell.
    fn nonlinear(&self, k: usize, y: &[f64]) -> Option<f64>;
    /// Gradient of `N_k` with respect to the observables at one cell.
    fn nonlinear_gradient(&self, k: usize, y: &[f64], grad: &mut [f64]) -> Option<()>;

    fn lift_cell(&self, state: &[f64], out: &mut [f64]) -> Result<(), String>;
    fn restrict_cell(&self, y: &[f64], out: &mut [f64]) -> Result<(), String>;

    fn lift(&self, state: &[f64]) -> Result<Vec<f64>, ObservableError> {
        let m = self.n_state();
        let n = cells_of(state.len(), m)?;
        let l = self.n_observables();
        let mut y = vec![0.0; l * n];
        let mut s = vec![0.0; m];
        let mut o = vec![0.0; l];
        for i in 0..n {
            gather(state, n, i, &mut s);
            self.lift_cell(&s, &mut o)
                .map_err(|msg| ObservableError::InvalidState { cell: i, msg })?;
            scatter(&o, n, i, &mut y);
        }
        Ok(y)
    }

    fn restrict(&self, y: &[f64]) -> Result<Vec<f64>, ObservableError> {
        let l = self.n_observables();
        let n = cells_of(y.len(), l)?;
        let m = self.n_state();
        let mut state = vec![0.0; m * n];
        let mut o = vec![0.0; l];
        let mut s = vec![0.0; m];
        for i in 0..n {
            gather(y, n, i, &mut o);
            self.restrict_cell(&o, &mut s)
                .map_err(|msg| ObservableError::InvalidState { cell: i, msg })?;
            scatter(&s, n, i, &mut state);
        }
        Ok(state)
    }

    /// `h(y)`, block-stacked by constraint.
    fn constraint_residual(&self, y: &[f64]) -> Result<Vec<f64>, ObservableError> {
        let l = self.n_observables();
        let n = cells_of(y.len(), l)?;
        let q = self.n_constraints();
        let mut h = vec![0.0; q * n];
        let mut o = vec![0.0; l];
        for i in 0..n {
            gather(y, n, i, &mut o);
            for k in 0..q {
                let nl = self
                    .nonlinear(k, &o)
                    .ok_or(ObservableError::Singular { family: k, cell: i })?;
                h[k * n + i] = o[self.target(k)] - nl;
            }
        }
        Ok(h)
    }

    /// Sparse `dh/dy`, of size `(q N) x (l N)`.
    fn constraint_jacobian(&self, y: &[f64]) -> Result<SparseOperator, ObservableError> {
        let l = self.n_observables();
        let n = cells_of(y.len(), l)?;
        let q = self.n_constraints();
        let mut b = TripletBuilder::with_capacity(q * n, l * n, q * (l + 1) * n);
        let mut o = vec![0.0; l];
        let mut g = vec![0.0; l];
        for i in 0..n {
            gather(y, n, i, &mut o);
            for k in 0..q {
                self.nonlinear_gradient(k, &o, &mut g)
                    .ok_or(ObservableError::Singular { family: k, cell: i })?;
                b.push(k * n + i, self.target(k) * n + i, 1.0);
                for (j, &gj) in g.iter().enumerate() {
                    if gj != 0.0 {
                        b.push(k * n + i, j * n + i, -gj);
                    }
                }
            }
        }
        Ok(b.build(OperatorKind::General).expect("indices are in range"))
    }
}

fn cells_of(len: usize, per_cell: usize) -> Result<usize, ObservableError> {
    if len == 0 || !len.is_multiple_of(per_cell) {
        return Err(ObservableError::DimensionMismatch {
            expected: per_cell * (len / per_cell).max(1),
            found: len,
        });
    }
    Ok(len / per_cell)
}

fn gather(v: &[f64], n: usize, i: usize, out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = v[k * n + i];
    }
}

fn scatter(src: &[f64], n: usize, i: usize, v: &mut [f64]) {
    for (k, s) in src.iter().enumerate() {
        v[k * n + i] = *s;
    }
}

/// Lifting of `-lap(u) + s(u) = F` with `s(u) = mu1 (exp(mu2 u) - 1) / mu2`
/// to `y = [u, s(u)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalSystem {
    pub mu1: f64,
    pub mu2: f64,
}

impl CanonicalSystem {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self, ObservableError> {
        if !mu1.is_finite() || !mu2.is_finite() {
            return Err(ObservableError::InvalidParameter(format!(
                "non-finite parameters ({mu1}, {mu2})"
            )));
        }
        Ok(Self { mu1, mu2 })
    }

    /// `s(u)`, stable as `mu2 -> 0`.
    pub fn source(&self, u: f64) -> f64 {
        if self.mu2 == 0.0 {
            self.mu1 * u
        } else {
            self.mu1 * (self.mu2 * u).exp_m1() / self.mu2
        }
    }

    /// `s'(u) = mu1 exp(mu2 u)`.
    pub fn source_derivative(&self, u: f64) -> f64 {
        self.mu1 * (self.mu2 * u).exp()
    }
}

impl LiftedSystem for CanonicalSystem {
    fn name(&self) -> &str {
        "canonical"
    }
    fn n_state(&self) -> usize {
        1
    }
    fn n_observables(&self) -> usize {
        2
    }
    fn observable_names(&self) -> Vec<String> {
        vec!["u".into(), "s(u)".into()]
    }
    fn n_constraints(&self) -> usize {
        1
    }
    fn target(&self, _k: usize) -> usize {
        1
    }
    fn nonlinear(&self, _k: usize, y: &[f64]) -> Option<f64> {
        let v = self.source(y[0]);
        v.is_finite().then_some(v)
    }
    fn nonlinear_gradient(&self, _k: usize, y: &[f64], grad: &mut [f64]) -> Option<()> {
        grad[0] = self.source_derivative(y[0]);
        grad[1] = 0.0;
        grad[0].is_finite().then_some(())
    }
    fn lift_cell(&self, state: &[f64], out: &mut [f64]) -> Result<(), String> {
        out[0] = state[0];
        out[1] = self.source(state[0]);
        if out[1].is_finite() {
            Ok(())
        } else {
            Err(format!("s(u) overflows at u = {}", state[0]))
        }
    }
    fn restrict_cell(&self, y: &[f64], out: &mut [f64]) -> Result<(), String> {
        out[0] = y[0];
        Ok(())
    }
}

/// Lifting of the steady two-dimensional Euler equations. The state per cell
/// is `(rho, u, v, p)`; the observables are
/// `[rho u, rho v, rho u v, p, rho u^2, rho v^2, rho u H, rho v H]`, with the
/// ratio of specific heats held as a constant side value.
///
/// The four constraints isolate `y5..y8`. They divide by both momenta, so
/// states with a vanishing velocity component are singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerSystem {
    pub gamma: f64,
}

impl EulerSystem {
    pub fn new(gamma: f64) -> Result<Self, ObservableError> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(ObservableError::InvalidParameter(format!(
                "ratio of specific heats must exceed 1, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// `(1/2)(y5 + y6) + y4 gamma / (gamma - 1)`, the total enthalpy density
    /// written in observables.
    fn enthalpy_density(&self, y: &[f64]) -> f64 {
        0.5 * (y[4] + y[5]) + y[3] * self.gamma / (self.gamma - 1.0)
    }
}

impl LiftedSystem for EulerSystem {
    fn name(&self) -> &str {
        "euler"
    }
    fn n_state(&self) -> usize {
        4
    }
    fn n_observables(&self) -> usize {
        8
    }
    fn observable_names(&self) -> Vec<String> {
        ["rho_u", "rho_v", "rho_uv", "p", "rho_uu", "rho_vv", "rho_uH", "rho_vH"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }
    fn n_constraints(&self) -> usize {
        4
    }
    fn target(&self, k: usize) -> usize {
        4 + k
    }

    fn nonlinear(&self, k: usize, y: &[f64]) -> Option<f64> {
        if y[0] == 0.0 || y[1] == 0.0 {
            return None;
        }
        // y3 / (y1 y2) = 1 / rho
        let v = match k {
            0 => y[0] * y[2] / y[1],
            1 => y[1] * y[2] / y[0],
            2 => y[2] * self.enthalpy_density(y) / y[1],
            3 => y[2] * self.enthalpy_density(y) / y[0],
            _ => unreachable!("constraint index {k}"),
        };
        v.is_finite().then_some(v)
    }

    fn nonlinear_gradient(&self, k: usize, y: &[f64], g: &mut [f64]) -> Option<()> {
        if y[0] == 0.0 || y[1] == 0.0 {
            return None;
        }
        g.fill(0.0);
        let c = self.gamma / (self.gamma - 1.0);
        match k {
            0 => {
                g[0] = y[2] / y[1];
                g[1] = -y[0] * y[2] / (y[1] * y[1]);
                g[2] = y[0] / y[1];
            }
            1 => {
                g[0] = -y[1] * y[2] / (y[0] * y[0]);
                g[1] = y[2] / y[0];
                g[2] = y[1] / y[0];
            }
            2 | 3 => {
                let p = self.enthalpy_density(y);
                // the dividing momentum: y2 for k = 2, y1 for k = 3
                let d = if k == 2 { 1 } else { 0 };
                let m = y[d];
                g[d] = -y[2] * p / (m * m);
                g[2] = p / m;
                g[3] = y[2] / m * c;
                g[4] = 0.5 * y[2] / m;
                g[5] = 0.5 * y[2] / m;
            }
            _ => unreachable!("constraint index {k}"),
        }
        g.iter().all(|v| v.is_finite()).then_some(())
    }

    fn lift_cell(&self, s: &[f64], out: &mut [f64]) -> Result<(), String> {
        let (rho, u, v, p) = (s[0], s[1], s[2], s[3]);
        if !(rho > 0.0) || !(p > 0.0) {
            return Err(format!("non-physical state rho = {rho}, p = {p}"));
        }
        let energy = p / (self.gamma - 1.0) + 0.5 * rho * (u * u + v * v);
        let h = (energy + p) / rho;
        out.copy_from_slice(&[
            rho * u,
            rho * v,
            rho * u * v,
            p,
            rho * u * u,
            rho * v * v,
            rho * u * h,
            rho * v * h,
        ]);
        Ok(())
    }

    /// Density comes from whichever momentum is larger, via
    /// `rho = (rho u)^2 / (rho u^2)`; this stays defined when one velocity
    /// component vanishes.
    fn restrict_cell(&self, y: &[f64], out: &mut [f64]) -> Result<(), String> {
        let (m, e) = if y[0].abs() >= y[1].abs() {
            (y[0], y[4])
        } else {
            (y[1], y[5])
        };
        if m == 0.0 || e == 0.0 {
            return Err("density is undefined at rest".into());
        }
        let rho = m * m / e;
        out.copy_from_slice(&[rho, y[0] / rho, y[1] / rho, y[3]]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fd_jacobian(sys: &dyn LiftedSystem, y: &[f64]) -> nalgebra::DMatrix<f64> {
        let h0 = sys.constraint_residual(y).unwrap();
        let mut jac = nalgebra::DMatrix::zeros(h0.len(), y.len());
        for j in 0..y.len() {
            let step = 1e-6 * y[j].abs().max(1.0);
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[j] += step;
            ym[j] -= step;
            let hp = sys.constraint_residual(&yp).unwrap();
            let hm = sys.constraint_residual(&ym).unwrap();
            for i in 0..h0.len() {
                jac[(i, j)] = (hp[i] - hm[i]) / (2.0 * step);
            }
        }
        jac
    }

    #[test]
    fn canonical_source_is_stable_for_small_mu2() {
        let s = CanonicalSystem::new(1.3, 1e-12).unwrap();
        assert!((s.source(0.7) - 1.3 * 0.7).abs() < 1e-12);
        let s0 = CanonicalSystem::new(1.3, 0.0).unwrap();
        assert_eq!(s0.source(2.0), 2.6);
        assert!(CanonicalSystem::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn canonical_jacobian_matches_finite_differences() {
        let sys = CanonicalSystem::new(0.8, 1.7).unwrap();
        let y = vec![0.1, -0.4, 0.9, 0.3, 0.2, 0.5];
        let jac = sys.constraint_jacobian(&y).unwrap().to_dense();
        let fd = fd_jacobian(&sys, &y);
        assert!((jac - fd).amax() < 1e-6);
    }

    #[test]
    fn uniform_flow_round_trips() {
        // uniform flow along x: rho = 1, u = 1, v = 0, p = 1
        let sys = EulerSystem::new(1.4).unwrap();
        let y = sys.lift(&[1.0, 1.0, 0.0, 1.0]).unwrap();
        let expected = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 4.0, 0.0];
        for (a, b) in y.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(sys.restrict(&y).unwrap(), vec![1.0, 1.0, 0.0, 1.0]);
        // the constraints divide by rho v
        assert!(matches!(
            sys.constraint_residual(&y),
            Err(ObservableError::Singular { .. })
        ));
    }

    /// The constraints as written in terms of the specific total energy.
    fn euler_oracle(y: &[f64], gamma: f64) -> [f64; 4] {
        let r = y[2] / (y[0] * y[1]);
        let e = 0.5 * (y[2] * y[4] / (y[0] * y[1]) + y[2] * y[5] / (y[0] * y[1]))
            + y[2] * y[3] / (y[0] * y[1] * (gamma - 1.0));
        [
            y[4] - y[0] * y[2] / y[1],
            y[5] - y[1] * y[2] / y[0],
            y[6] - y[0] * (e + y[3] * r),
            y[7] - y[1] * (e + y[3] * r),
        ]
    }

    #[test]
    fn euler_constraints_match_energy_form() {
        let sys = EulerSystem::new(1.4).unwrap();
        let y = [0.7, -1.1, 0.4, 2.0, 0.9, 1.3, 0.2, -0.8];
        let h = sys.constraint_residual(&y).unwrap();
        let o = euler_oracle(&y, 1.4);
        for k in 0..4 {
            assert!((h[k] - o[k]).abs() < 1e-13 * o[k].abs().max(1.0));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let sys = EulerSystem::new(1.4).unwrap();
        assert!(EulerSystem::new(1.0).is_err());
        assert!(sys.lift(&[1.0, 1.0, 1.0]).is_err());
        assert!(matches!(
            sys.lift(&[-1.0, 1.0, 1.0, 1.0]),
            Err(ObservableError::InvalidState { cell: 0, .. })
        ));
        assert!(sys.restrict(&[0.0; 8]).is_err());
        assert!(sys.constraint_residual(&[]).is_err());
    }

    fn euler_state() -> impl Strategy<Value = Vec<f64>> {
        let comp = || prop_oneof![-3.0..-0.1f64, 0.1..3.0f64];
        (
            prop::collection::vec(0.2..5.0f64, 3),
            prop::collection::vec(comp(), 3),
            prop::collection::vec(comp(), 3),
            prop::collection::vec(0.2..5.0f64, 3),
        )
            .prop_map(|(r, u, v, p)| [r, u, v, p].concat())
    }

    proptest! {
        #[test]
        fn euler_lift_satisfies_constraints(state in euler_state(), gamma in 1.05..2.0f64) {
            let sys = EulerSystem::new(gamma).unwrap();
            let y = sys.lift(&state).unwrap();
            let h = sys.constraint_residual(&y).unwrap();
            let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for v in h {
                prop_assert!(v.abs() <= 1e-12 * scale);
            }
            let back = sys.restrict(&y).unwrap();
            for (a, b) in back.iter().zip(&state) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }

        #[test]
        fn euler_jacobian_matches_finite_differences(state in euler_state()) {
            let sys = EulerSystem::new(1.4).unwrap();
            let y = sys.lift(&state).unwrap();
            let jac = sys.constraint_jacobian(&y).unwrap().to_dense();
            let fd = fd_jacobian(&sys, &y);
            let scale = fd.amax().max(1.0);
            prop_assert!((jac - fd).amax() <= 1e-6 * scale);
        }

        #[test]
        fn canonical_lift_satisfies_constraint(u in prop::collection::vec(-2.0..2.0f64, 1..20),
                                              mu1 in 0.01..2.0f64, mu2 in 0.01..2.0f64) {
            let sys = CanonicalSystem::new(mu1, mu2).unwrap();
            let y = sys.lift(&u).unwrap();
            for v in sys.constraint_residual(&y).unwrap() {
                prop_assert_eq!(v, 0.0);
            }
            prop_assert_eq!(sys.restrict(&y).unwrap(), u);
        }
    }
}
