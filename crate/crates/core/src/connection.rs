//! The structure-connection pencil `nabla(mu) = nabla^0 + mu iota` in the flat
//! frame `{p_1, .., p_n, e}` and its curvature.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fiber::{trig_factor_derivative, BasePoint, FiberAlgebra, TangentVec};
use crate::tolerances;

type C64 = Complex64;

/// An endomorphism of `h (+) C` in the flat frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperator {
    pub matrix: DMatrix<C64>,
}

impl FrameOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    fn from_columns(cols: &[TangentVec]) -> Self {
        let dim = cols.len();
        let mut matrix = DMatrix::zeros(dim, dim);
        for (j, c) in cols.iter().enumerate() {
            matrix.set_column(j, &c.to_coords());
        }
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &TangentVec) -> TangentVec {
        TangentVec::from_coords(&(&self.matrix * v.to_coords()))
    }

    pub fn norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == DMatrix::identity(self.dim(), self.dim())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            matrix: &self.matrix + &o.matrix,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            matrix: &self.matrix - &o.matrix,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            matrix: &self.matrix * c,
        }
    }

    pub fn compose(&self, o: &Self) -> Self {
        Self {
            matrix: &self.matrix * &o.matrix,
        }
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.compose(o).sub(&o.compose(self))
    }
}

/// `iota_X : Y -> X . Y`.
pub fn mult_operator(alg: &FiberAlgebra, point: &BasePoint, x: &TangentVec) -> Result<FrameOperator> {
    let n = alg.rank();
    let f = alg.trig_factors(point)?;
    let cols: Vec<TangentVec> = (0..=n)
        .map(|j| alg.product_with(&f, x, &TangentVec::frame(n, j)))
        .collect();
    Ok(FrameOperator::from_columns(&cols))
}

/// `d_Z iota_Y`: derivative of the multiplication operator along the flat
/// field `Z`. Only the trigonometric coefficients depend on the base point.
pub fn derivative_operator(
    alg: &FiberAlgebra,
    point: &BasePoint,
    z: &TangentVec,
    y: &TangentVec,
) -> Result<FrameOperator> {
    alg.check_point(point)?;
    let n = alg.rank();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    let coroots: Vec<Vec<f64>> = alg
        .datum()
        .positive_roots()
        .iter()
        .map(|r| r.coroot_coweight.iter().map(|&c| c as f64).collect())
        .collect();
    for (idx, coroot) in coroots.iter().enumerate() {
        let dz = alg.root_value(idx, &z.h_part);
        let ay = alg.root_value(idx, &y.h_part);
        let d = trig_factor_derivative(alg.root_value(idx, &point.x));
        let w = 0.5 * alg.root_multiplicity(idx) * d * dz * ay;
        for j in 0..n {
            let aw = alg.root_value(idx, &TangentVec::frame(n, j).h_part);
            if aw.is_zero() {
                continue;
            }
            for (i, c) in coroot.iter().enumerate() {
                m[(i, j)] += w * aw * c;
            }
        }
    }
    Ok(FrameOperator { matrix: m })
}

/// Central difference of `iota_Y` along the horizontal part of `Z`.
pub fn derivative_operator_fd(
    alg: &FiberAlgebra,
    point: &BasePoint,
    z: &TangentVec,
    y: &TangentVec,
    step: f64,
) -> Result<FrameOperator> {
    let shifted = |sign: f64| {
        let x = point
            .x
            .iter()
            .zip(&z.h_part)
            .map(|(a, d)| a + d * (sign * step))
            .collect();
        BasePoint::new(x, point.s)
    };
    let plus = mult_operator(alg, &shifted(1.0), y)?;
    let minus = mult_operator(alg, &shifted(-1.0), y)?;
    Ok(plus.sub(&minus).scale(C64::new(0.5 / step, 0.0)))
}

/// The dual connection form contracted with `direction`, assembled term by
/// term from its tensor expression in `d alpha`, `dt/t`, `d_{p_i}` and
/// `t d/dt`.
pub fn dual_form_matrix(alg: &FiberAlgebra, point: &BasePoint, direction: &TangentVec) -> Result<FrameOperator> {
    let f = alg.trig_factors(point)?;
    let n = alg.rank();
    let datum = alg.datum().clone();
    let dir = &direction.h_part;
    let mut m = DMatrix::<C64>::zeros(n + 1, n + 1);
    for (idx, r) in datum.positive_roots().iter().enumerate() {
        let ax = alg.root_value(idx, dir);
        for j in 0..n {
            let aw = C64::new(r.simple_coeffs[j] as f64, 0.0);
            if aw.is_zero() {
                continue;
            }
            let w = 0.5 * alg.root_multiplicity(idx) * f[idx] * ax * aw;
            for (i, &c) in r.coroot_coweight.iter().enumerate() {
                m[(i, j)] += w * c as f64;
            }
            m[(n, j)] -= alg.c_kappa() * ax * aw;
        }
    }
    for j in 0..n {
        let b = alg.b_map(dir, &TangentVec::frame(n, j).h_part);
        for i in 0..n {
            m[(i, j)] -= b[i];
        }
    }
    // d alpha_i (x) d_{p_i} (x) dt/t and its transpose, then dt/t (x) e (x) dt/t.
    for i in 0..n {
        m[(i, n)] += dir[i];
        m[(i, i)] += direction.lambda;
    }
    m[(n, n)] += direction.lambda;
    Ok(FrameOperator { matrix: m })
}

/// [`dual_form_matrix`], checked against `iota_direction`.
pub fn dual_form_operator(
    alg: &FiberAlgebra,
    point: &BasePoint,
    direction: &TangentVec,
) -> Result<FrameOperator> {
    let op = dual_form_matrix(alg, point, direction)?;
    let reference = mult_operator(alg, point, direction)?;
    let scale = alg.product_bound(point)? * direction.norm_inf().max(f64::MIN_POSITIVE);
    let diff = op.sub(&reference).max_abs();
    if !(diff <= tolerances::DUAL_FORM * scale) {
        return Err(Error::Consistency(format!(
            "dual connection form differs from the multiplication operator by {diff:.3e}"
        )));
    }
    Ok(op)
}

/// `R'(X, Y) = d_X iota_Y - d_Y iota_X`.
pub fn r_prime(alg: &FiberAlgebra, point: &BasePoint, x: &TangentVec, y: &TangentVec) -> Result<FrameOperator> {
    Ok(derivative_operator(alg, point, x, y)?.sub(&derivative_operator(alg, point, y, x)?))
}

/// `R''(X, Y) = [iota_X, iota_Y]`.
pub fn r_double_prime(
    alg: &FiberAlgebra,
    point: &BasePoint,
    x: &TangentVec,
    y: &TangentVec,
) -> Result<FrameOperator> {
    Ok(mult_operator(alg, point, x)?.commutator(&mult_operator(alg, point, y)?))
}

/// Curvature of `nabla(mu)` on the flat fields `X, Y`, computed from the
/// connection coefficients `Gamma_X = mu iota_X`.
pub fn curvature(
    alg: &FiberAlgebra,
    point: &BasePoint,
    mu: C64,
    x: &TangentVec,
    y: &TangentVec,
) -> Result<FrameOperator> {
    let (mx, my) = (x.scale(mu), y.scale(mu));
    let gx = mult_operator(alg, point, &mx)?;
    let gy = mult_operator(alg, point, &my)?;
    let dx_gy = derivative_operator(alg, point, x, &my)?;
    let dy_gx = derivative_operator(alg, point, y, &mx)?;
    Ok(dx_gy.sub(&dy_gx).add(&gx.commutator(&gy)))
}

/// [`curvature`] with finite-difference derivatives.
pub fn curvature_fd(
    alg: &FiberAlgebra,
    point: &BasePoint,
    mu: C64,
    x: &TangentVec,
    y: &TangentVec,
    step: f64,
) -> Result<FrameOperator> {
    let (mx, my) = (x.scale(mu), y.scale(mu));
    let gx = mult_operator(alg, point, &mx)?;
    let gy = mult_operator(alg, point, &my)?;
    let dx_gy = derivative_operator_fd(alg, point, x, &my, step)?;
    let dy_gx = derivative_operator_fd(alg, point, y, &mx, step)?;
    Ok(dx_gy.sub(&dy_gx).add(&gx.commutator(&gy)))
}

/// Magnitude bound for the curvature of `nabla(mu)` on `X, Y` at `point`.
pub fn curvature_scale(alg: &FiberAlgebra, point: &BasePoint, mu: C64, x: &TangentVec, y: &TangentVec) -> Result<f64> {
    let dim = (alg.rank() + 1) as f64;
    let k = alg.product_bound(point)?;
    let kd = alg.derivative_bound(point)?;
    let m = mu.norm();
    Ok(dim * (2.0 * dim * m * m * k * k + 2.0 * m * kd) * x.norm_inf() * y.norm_inf())
}

/// `|nabla_X(e) - X|`, with `nabla_X(e)` read off the dual connection form.
pub fn dilatation_check(alg: &FiberAlgebra, point: &BasePoint, x: &TangentVec) -> Result<f64> {
    let op = dual_form_operator(alg, point, x)?;
    let image = op.apply(&TangentVec::identity(alg.rank()));
    Ok(image.sub(x).norm_inf())
}

/// `|Gamma_X(Y) - Gamma_Y(X)|` with both sides from the dual connection form.
pub fn torsion_residual(alg: &FiberAlgebra, point: &BasePoint, x: &TangentVec, y: &TangentVec) -> Result<f64> {
    let gx = dual_form_operator(alg, point, x)?;
    let gy = dual_form_operator(alg, point, y)?;
    Ok(gx.apply(y).sub(&gy.apply(x)).norm_inf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{build_root_system, Family, Multiplicity, RootSystemSpec};
    use crate::sampling::Sampler;
    use std::sync::Arc;

    fn alg(f: Family, n: usize, k: f64, kp: f64) -> FiberAlgebra {
        let d = Arc::new(build_root_system(RootSystemSpec::new(f, n).unwrap()));
        FiberAlgebra::new(d, Multiplicity::real(k, kp)).unwrap()
    }

    #[test]
    fn mult_operator_examples() {
        let a = alg(Family::C, 3, 0.7, 0.3);
        let mut smp = Sampler::new(2, 0);
        let p = smp.point(3);
        assert!(mult_operator(&a, &p, &TangentVec::identity(3)).unwrap().is_identity());
        assert_eq!(
            mult_operator(&a, &p, &TangentVec::zero(3)).unwrap(),
            FrameOperator::zeros(4)
        );

        let a1 = alg(Family::A, 1, 1.0, 0.0);
        let p = BasePoint::new(vec![C64::new(0.0, std::f64::consts::PI)], C64::zero());
        let m = mult_operator(&a1, &p, &TangentVec::horizontal(vec![C64::new(2.0, 0.0)])).unwrap();
        // alpha^vee = 2 p_1, so the p_1 column is half of alpha^vee . alpha^vee = -e.
        assert!(m.matrix[(0, 0)].norm() < 1e-15);
        assert!((m.matrix[(1, 0)] - C64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dual_form_examples() {
        let a = alg(Family::A, 3, 0.7, 0.3);
        let mut smp = Sampler::new(4, 0);
        let p = smp.point(3);
        assert!(dual_form_operator(&a, &p, &TangentVec::identity(3)).unwrap().is_identity());
        assert_eq!(
            dual_form_operator(&a, &p, &TangentVec::zero(3)).unwrap(),
            FrameOperator::zeros(4)
        );
        for _ in 0..5 {
            let x = smp.tangent(3);
            let d = dual_form_operator(&a, &p, &x).unwrap();
            let m = mult_operator(&a, &p, &x).unwrap();
            assert!(d.sub(&m).max_abs() <= 1e-12 * a.product_bound(&p).unwrap() * x.norm_inf());
        }
    }

    #[test]
    fn dual_form_detects_wrong_metric_constant() {
        // A dual form built with a different c^kappa than the product disagrees.
        let a = alg(Family::B, 3, 0.7, 0.3);
        let mut smp = Sampler::new(4, 0);
        let p = smp.point(3);
        let x = smp.horizontal(3);
        let d = dual_form_operator(&a, &p, &x).unwrap();
        let b = FiberAlgebra::with_metric_scalar(a.datum().clone(), a.kappa(), a.metric_scalar() * 2.0).unwrap();
        let m = mult_operator(&b, &p, &x).unwrap();
        assert!(d.sub(&m).max_abs() > 1e-3);
    }

    #[test]
    fn curvature_vanishes_for_table_metric() {
        for (f, n, k, kp) in [(Family::G, 2, 1.0, 2.0), (Family::A, 3, 0.7, 0.3), (Family::F, 4, 0.7, 0.3)] {
            let a = alg(f, n, k, kp);
            let mut smp = Sampler::new(7, 0);
            let p = smp.point(n);
            let (x, y) = (smp.tangent(n), smp.tangent(n));
            for mu in [C64::zero(), C64::new(1.0, 0.0), C64::new(0.37, 0.2)] {
                let r = curvature(&a, &p, mu, &x, &y).unwrap();
                let s = curvature_scale(&a, &p, mu, &x, &y).unwrap();
                if mu.is_zero() {
                    assert_eq!(r, FrameOperator::zeros(n + 1));
                } else {
                    assert!(r.norm() <= 1e-9 * s, "{f}{n} {mu}: {}", r.norm() / s);
                }
            }
        }
    }

    #[test]
    fn perturbed_metric_is_not_flat() {
        let base = alg(Family::G, 2, 1.0, 2.0);
        let a = FiberAlgebra::with_metric_scalar(base.datum().clone(), base.kappa(), base.metric_scalar() * 1.01)
            .unwrap();
        let mut smp = Sampler::new(7, 0);
        let p = smp.point(2);
        let (x, y) = (smp.tangent(2), smp.tangent(2));
        let one = C64::new(1.0, 0.0);
        let s = curvature_scale(&a, &p, one, &x, &y).unwrap();
        let r0 = curvature(&base, &p, one, &x, &y).unwrap().norm() / s;
        let r1 = curvature(&a, &p, one, &x, &y).unwrap().norm() / s;
        assert!(r1 >= 1e3 * r0.max(f64::EPSILON));
    }

    #[test]
    fn r_tensors() {
        let a = alg(Family::B, 3, 0.7, 0.3);
        let mut smp = Sampler::new(8, 0);
        let p = smp.point(3);
        let x = smp.tangent(3);
        assert_eq!(
            r_double_prime(&a, &p, &x, &TangentVec::identity(3)).unwrap(),
            FrameOperator::zeros(4)
        );
        let y = smp.tangent(3);
        let s = curvature_scale(&a, &p, C64::new(1.0, 0.0), &x, &y).unwrap();
        assert!(r_prime(&a, &p, &x, &y).unwrap().norm() <= 1e-9 * s);
        assert!(r_double_prime(&a, &p, &x, &y).unwrap().norm() <= 1e-9 * s);
        let mu = C64::new(0.37, 0.2);
        let whole = curvature(&a, &p, mu, &x, &y).unwrap();
        let parts = r_prime(&a, &p, &x, &y)
            .unwrap()
            .scale(mu)
            .add(&r_double_prime(&a, &p, &x, &y).unwrap().scale(mu * mu));
        assert!(whole.sub(&parts).norm() <= 1e-13 * s);
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        let a = alg(Family::D, 4, 0.7, 0.3);
        let mut smp = Sampler::new(12, 0);
        let p = smp.point(4);
        let (z, y) = (smp.horizontal(4), smp.tangent(4));
        let exact = derivative_operator(&a, &p, &z, &y).unwrap();
        let fd = derivative_operator_fd(&a, &p, &z, &y, 1e-5).unwrap();
        let s = 5.0 * a.derivative_bound(&p).unwrap() * z.norm_inf() * y.norm_inf();
        assert!(exact.sub(&fd).norm() <= 1e-6 * s);
    }

    #[test]
    fn dilatation_and_torsion() {
        let a = alg(Family::E, 6, 0.7, 0.3);
        let mut smp = Sampler::new(13, 0);
        let p = smp.point(6);
        assert_eq!(dilatation_check(&a, &p, &TangentVec::identity(6)).unwrap(), 0.0);
        let k = a.product_bound(&p).unwrap();
        for x in [smp.horizontal(6), smp.tangent(6)] {
            assert!(dilatation_check(&a, &p, &x).unwrap() <= 1e-12 * k * x.norm_inf());
            let y = smp.tangent(6);
            assert!(torsion_residual(&a, &p, &x, &y).unwrap() <= 1e-12 * k * x.norm_inf() * y.norm_inf());
        }
    }
}
