//! The potential `Phi` on the convergence chamber, its third derivatives and
//! the WDVV residual.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fiber::{BasePoint, FiberAlgebra, TangentVec};
use crate::tolerances;

type C64 = Complex64;

const SERIES_RADIUS: f64 = 0.9;

/// `sum_{m>=1} z^m / m^s`, truncated once the remaining tail is below
/// double precision relative to the partial sum.
pub fn polylog_series(s: u32, z: C64) -> Result<C64> {
    if !(z.norm() <= SERIES_RADIUS) {
        return Err(Error::Domain(format!("|z| = {:.6} exceeds {SERIES_RADIUS}", z.norm())));
    }
    let r = z.norm();
    let mut sum = C64::zero();
    let mut pow = z;
    let mut m = 1u32;
    loop {
        let term = pow / (m as f64).powi(s as i32);
        sum += term;
        let tail = term.norm() * r / (1.0 - r);
        if tail <= 1e-17 * sum.norm() || pow.is_zero() {
            return Ok(sum);
        }
        pow *= z;
        m += 1;
    }
}

/// The trilogarithm on `|z| <= 0.9`.
pub fn li3(z: C64) -> Result<C64> {
    polylog_series(3, z)
}

/// `q` and its first three derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValues {
    pub q: C64,
    pub q1: C64,
    pub q2: C64,
    pub q3: C64,
}

fn check_chamber_arg(w: C64) -> Result<()> {
    if !(w.re <= -tolerances::CHAMBER_MARGIN * (1.0 - 1e-12)) {
        return Err(Error::OutsideChamber(format!("Re w = {:.6} > -{}", w.re, tolerances::CHAMBER_MARGIN)));
    }
    Ok(())
}

/// `q(w) = w^3/12 + Li_3(e^w)` together with its derivatives, all from the
/// polylogarithm series. Requires `Re w <= -0.2`.
pub fn q_eval(w: C64) -> Result<QValues> {
    check_chamber_arg(w)?;
    q_series(w)
}

fn q_series(w: C64) -> Result<QValues> {
    let z = w.exp();
    Ok(QValues {
        q: w * w * w / 12.0 + polylog_series(3, z)?,
        q1: w * w / 4.0 + polylog_series(2, z)?,
        q2: w / 2.0 + polylog_series(1, z)?,
        q3: C64::new(0.5, 0.0) + polylog_series(0, z)?,
    })
}

/// `(1/2)(1 + e^w)/(1 - e^w)`, defined off the mirrors.
pub fn q_third_closed_form(w: C64) -> C64 {
    0.5 * crate::fiber::trig_factor(w)
}

/// Sixth-order central stencil for the third derivative of `q`.
pub fn q_third_stencil(w: C64, h: f64) -> Result<C64> {
    const W: [f64; 9] = [
        -7.0 / 240.0,
        3.0 / 10.0,
        -169.0 / 120.0,
        61.0 / 30.0,
        0.0,
        -61.0 / 30.0,
        169.0 / 120.0,
        -3.0 / 10.0,
        7.0 / 240.0,
    ];
    let mut acc = C64::zero();
    for (i, c) in W.iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        let off = (i as f64 - 4.0) * h;
        acc += *c * q_eval(w + off)?.q;
    }
    Ok(acc / (h * h * h))
}

#[derive(Debug, Clone)]
pub struct PotentialContext {
    alg: FiberAlgebra,
    c_kappa: C64,
    /// `T_b(p_i, p_j, p_l)` at index `(i * n + j) * n + l`.
    trilinear_b: Vec<C64>,
    coeffs: Vec<C64>,
}

/// Best-fit `d` with `T_b(u, v, w) ~ d sum_{alpha>0} alpha(u) alpha(v) alpha(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicFit {
    pub d_kappa: C64,
    pub relative_residual: f64,
}

impl PotentialContext {
    pub fn new(alg: FiberAlgebra) -> Self {
        let n = alg.rank();
        let mut trilinear_b = vec![C64::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                let b = alg.b_map(&TangentVec::frame(n, i).h_part, &TangentVec::frame(n, j).h_part);
                for l in 0..n {
                    trilinear_b[(i * n + j) * n + l] =
                        alg.horizontal_metric(&b, &TangentVec::frame(n, l).h_part);
                }
            }
        }
        let coeffs = (0..alg.root_count())
            .map(|idx| alg.root_multiplicity(idx) * alg.coroot_weight(idx))
            .collect();
        Self {
            c_kappa: alg.c_kappa(),
            alg,
            trilinear_b,
            coeffs,
        }
    }

    pub fn algebra(&self) -> &FiberAlgebra {
        &self.alg
    }

    pub fn c_kappa(&self) -> C64 {
        self.c_kappa
    }

    pub fn trilinear_b(&self) -> &[C64] {
        &self.trilinear_b
    }

    fn rank(&self) -> usize {
        self.alg.rank()
    }

    pub fn t_b(&self, u: &[C64], v: &[C64], w: &[C64]) -> C64 {
        let n = self.rank();
        let mut acc = C64::zero();
        for i in 0..n {
            for j in 0..n {
                let uv = u[i] * v[j];
                for l in 0..n {
                    acc += self.trilinear_b[(i * n + j) * n + l] * uv * w[l];
                }
            }
        }
        acc
    }

    fn t_b_abs(&self, u: &[C64], v: &[C64], w: &[C64]) -> f64 {
        let n = self.rank();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    acc += self.trilinear_b[(i * n + j) * n + l].norm() * u[i].norm() * v[j].norm() * w[l].norm();
                }
            }
        }
        acc
    }

    /// Largest deviation of `T_b` from full symmetry, relative to its entries.
    pub fn trilinear_b_asymmetry(&self) -> (f64, f64) {
        let n = self.rank();
        let at = |i: usize, j: usize, l: usize| self.trilinear_b[(i * n + j) * n + l];
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let t = at(i, j, l);
                    scale = scale.max(t.norm());
                    for o in [at(j, i, l), at(i, l, j), at(l, j, i), at(j, l, i), at(l, i, j)] {
                        worst = worst.max((t - o).norm());
                    }
                }
            }
        }
        (worst, scale)
    }

    pub fn check_chamber(&self, point: &BasePoint) -> Result<()> {
        if point.x.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: point.x.len(),
            });
        }
        for (i, x) in point.x.iter().enumerate() {
            if !(x.re <= -tolerances::CHAMBER_MARGIN * (1.0 - 1e-12)) {
                return Err(Error::OutsideChamber(format!(
                    "Re alpha_{}(x) = {:.6} > -{}",
                    i + 1,
                    x.re,
                    tolerances::CHAMBER_MARGIN
                )));
            }
        }
        Ok(())
    }

    /// `Phi` at `point`; the polylogarithm only needs `|e^alpha(x)| <= 0.9`.
    fn phi_unchecked(&self, point: &BasePoint) -> Result<C64> {
        let s = point.s;
        let mut quad = C64::zero();
        let mut series = C64::zero();
        for (idx, c) in self.coeffs.iter().enumerate() {
            let w = self.alg.root_value(idx, &point.x);
            quad += w * w;
            if !c.is_zero() {
                series += c * (w * w * w / 12.0 + li3(w.exp())?);
            }
        }
        let cubic = self.t_b(&point.x, &point.x, &point.x);
        Ok(-s * s * s / 6.0 + s / 2.0 * self.c_kappa * quad + series - cubic / 6.0)
    }

    pub fn phi_eval(&self, point: &BasePoint) -> Result<C64> {
        self.check_chamber(point)?;
        self.phi_unchecked(point)
    }

    /// Analytic third directional derivative of `Phi` along flat fields.
    pub fn third_derivative(
        &self,
        point: &BasePoint,
        x: &TangentVec,
        y: &TangentVec,
        z: &TangentVec,
    ) -> Result<C64> {
        self.check_chamber(point)?;
        let (l1, l2, l3) = (x.lambda, y.lambda, z.lambda);
        let mut sxy = C64::zero();
        let mut sxz = C64::zero();
        let mut syz = C64::zero();
        let mut trig = C64::zero();
        for (idx, c) in self.coeffs.iter().enumerate() {
            let (ax, ay, az) = (
                self.alg.root_value(idx, &x.h_part),
                self.alg.root_value(idx, &y.h_part),
                self.alg.root_value(idx, &z.h_part),
            );
            sxy += ax * ay;
            sxz += ax * az;
            syz += ay * az;
            if !c.is_zero() {
                let q3 = q_eval(self.alg.root_value(idx, &point.x))?.q3;
                trig += c * q3 * ax * ay * az;
            }
        }
        Ok(-l1 * l2 * l3 + self.c_kappa * (l1 * syz + l2 * sxz + l3 * sxy) + trig
            - self.t_b(&x.h_part, &y.h_part, &z.h_part))
    }

    /// Sum of the magnitudes of the terms of [`Self::third_derivative`].
    pub fn third_derivative_scale(
        &self,
        point: &BasePoint,
        x: &TangentVec,
        y: &TangentVec,
        z: &TangentVec,
    ) -> Result<f64> {
        self.check_chamber(point)?;
        let (l1, l2, l3) = (x.lambda.norm(), y.lambda.norm(), z.lambda.norm());
        let mut quad = 0.0;
        let mut trig = 0.0;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let (ax, ay, az) = (
                self.alg.root_value(idx, &x.h_part).norm(),
                self.alg.root_value(idx, &y.h_part).norm(),
                self.alg.root_value(idx, &z.h_part).norm(),
            );
            quad += l1 * ay * az + l2 * ax * az + l3 * ax * ay;
            let w = self.alg.root_value(idx, &point.x);
            trig += c.norm() * q_third_closed_form(w).norm() * ax * ay * az;
        }
        Ok(l1 * l2 * l3
            + self.c_kappa.norm() * quad
            + trig
            + self.t_b_abs(&x.h_part, &y.h_part, &z.h_part)
            + f64::MIN_POSITIVE)
    }

    /// `d^3/dtau^3 Phi(point + tau v)` at `tau = 0` from a discrete Cauchy
    /// integral over a circle of radius `r` with `max |r alpha(v)| = 0.05`.
    fn cubic_along(&self, point: &BasePoint, v: &TangentVec) -> Result<C64> {
        const N: usize = 32;
        let reach = (0..self.alg.root_count())
            .map(|idx| self.alg.root_value(idx, &v.h_part).norm())
            .fold(v.lambda.norm(), f64::max);
        if reach == 0.0 {
            return Ok(C64::zero());
        }
        let r = 0.05 / reach;
        let mut acc = C64::zero();
        for k in 0..N {
            let theta = 2.0 * PI * k as f64 / N as f64;
            let tau = C64::from_polar(r, theta);
            let shifted = BasePoint::new(
                point.x.iter().zip(&v.h_part).map(|(a, d)| a + tau * d).collect(),
                point.s + tau * v.lambda,
            );
            acc += self.phi_unchecked(&shifted)? * C64::from_polar(1.0, -3.0 * theta);
        }
        Ok(acc * 6.0 / (N as f64 * r * r * r))
    }

    /// Numerical third derivative: contour differentiation along the lines
    /// `x + y + z`, `x + y - z`, `x - y + z`, `x - y - z`, then polarization.
    pub fn fd_third_derivative(
        &self,
        point: &BasePoint,
        x: &TangentVec,
        y: &TangentVec,
        z: &TangentVec,
    ) -> Result<C64> {
        self.check_chamber(point)?;
        let c = |a: f64, b: f64, d: f64| -> Result<C64> {
            let v = x
                .scale(C64::new(a, 0.0))
                .add(&y.scale(C64::new(b, 0.0)))
                .add(&z.scale(C64::new(d, 0.0)));
            self.cubic_along(point, &v)
        };
        Ok((c(1.0, 1.0, 1.0)? - c(1.0, 1.0, -1.0)? - c(1.0, -1.0, 1.0)? + c(1.0, -1.0, -1.0)?) / 24.0)
    }

    /// `T_{ijk}` in the flat frame `{p_1, .., p_n, e}`, row-major.
    pub fn third_derivative_tensor(&self, point: &BasePoint) -> Result<Vec<C64>> {
        let dim = self.rank() + 1;
        let frame: Vec<TangentVec> = (0..dim).map(|i| TangentVec::frame(dim - 1, i)).collect();
        let mut t = Vec::with_capacity(dim * dim * dim);
        for a in &frame {
            for b in &frame {
                for c in &frame {
                    t.push(self.third_derivative(point, a, b, c)?);
                }
            }
        }
        Ok(t)
    }

    /// WDVV residual at `point`, or `None` when the Gram matrix is degenerate.
    pub fn wdvv_residual(&self, point: &BasePoint) -> Result<Option<f64>> {
        let gram = self.alg.gram_matrix();
        if !gram.nondegenerate {
            return Ok(None);
        }
        let t = self.third_derivative_tensor(point)?;
        Ok(wdvv_residual_from_tensor(&t, &gram.matrix))
    }

    pub fn fit_d_kappa(&self) -> CubicFit {
        let n = self.rank();
        let mut num = C64::zero();
        let mut den = 0.0;
        let mut sums = vec![0.0; n * n * n];
        for r in self.alg.datum().positive_roots() {
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        sums[(i * n + j) * n + l] +=
                            (r.simple_coeffs[i] * r.simple_coeffs[j] * r.simple_coeffs[l]) as f64;
                    }
                }
            }
        }
        for (t, s) in self.trilinear_b.iter().zip(&sums) {
            num += t * s;
            den += s * s;
        }
        let d = if den > 0.0 { num / den } else { C64::zero() };
        let resid: f64 = self
            .trilinear_b
            .iter()
            .zip(&sums)
            .map(|(t, s)| (t - d * s).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = self.trilinear_b.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
        CubicFit {
            d_kappa: d,
            relative_residual: if norm > 0.0 { resid / norm } else { 0.0 },
        }
    }
}

/// `max |T_ijp g^pq T_qkl - T_jkp g^pq T_iql|` divided by the largest single
/// term magnitude, for a row-major `dim^3` tensor and Gram matrix `g`.
/// `None` if `g` is singular.
pub fn wdvv_residual_from_tensor(t: &[C64], gram: &DMatrix<C64>) -> Option<f64> {
    let dim = gram.nrows();
    assert_eq!(t.len(), dim * dim * dim);
    let inv = gram.clone().try_inverse()?;
    let at = |i: usize, j: usize, k: usize| t[(i * dim + j) * dim + k];
    // u[i][j][q] = sum_p T_ijp g^pq, and its magnitude analogue.
    let mut u = vec![C64::zero(); dim * dim * dim];
    let mut ua = vec![0.0; dim * dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            for q in 0..dim {
                let mut s = C64::zero();
                let mut sa = 0.0;
                for p in 0..dim {
                    s += at(i, j, p) * inv[(p, q)];
                    sa += at(i, j, p).norm() * inv[(p, q)].norm();
                }
                u[(i * dim + j) * dim + q] = s;
                ua[(i * dim + j) * dim + q] = sa;
            }
        }
    }
    let mut worst = 0.0f64;
    let mut mag = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut lhs = C64::zero();
                    let mut rhs = C64::zero();
                    for q in 0..dim {
                        lhs += u[(i * dim + j) * dim + q] * at(q, k, l);
                        rhs += u[(j * dim + k) * dim + q] * at(i, q, l);
                        mag = mag.max(ua[(i * dim + j) * dim + q] * at(q, k, l).norm());
                        mag = mag.max(ua[(j * dim + k) * dim + q] * at(i, q, l).norm());
                    }
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    Some(if mag > 0.0 { worst / mag } else { worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{build_root_system, Family, Multiplicity, RootSystemSpec};
    use crate::sampling::Sampler;
    use std::sync::Arc;

    fn ctx(f: Family, n: usize, k: f64, kp: f64) -> PotentialContext {
        let d = Arc::new(build_root_system(RootSystemSpec::new(f, n).unwrap()));
        PotentialContext::new(FiberAlgebra::new(d, Multiplicity::real(k, kp)).unwrap())
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn li3_values() {
        assert_eq!(li3(C64::zero()).unwrap(), C64::zero());
        let direct: f64 = (1..=40).map(|m| 0.5f64.powi(m) / (m as f64).powi(3)).sum();
        assert!((li3(c(0.5)).unwrap() - c(direct)).norm() < 1e-9);
        assert!((li3(c(0.5)).unwrap() - c(0.5372131936080402)).norm() < 1e-15);
        let direct: f64 = (1..=80).map(|m| (-0.5f64).powi(m) / (m as f64).powi(3)).sum();
        assert!((li3(c(-0.5)).unwrap() - c(direct)).norm() < 1e-15);
        assert!(matches!(li3(c(0.95)), Err(Error::Domain(_))));
    }

    #[test]
    fn q_values() {
        let v = q_eval(c(-1.0)).unwrap();
        assert!((v.q - c(0.30366209087686646)).norm() < 1e-14);
        assert!((v.q3 - c(1.0819767068693265)).norm() < 1e-14);
        assert!((q_third_closed_form(c(-1.0)) - c(1.0819767068693265)).norm() < 1e-14);
        assert!(q_third_closed_form(C64::new(0.0, PI)).norm() < 1e-15);
        assert!(matches!(q_eval(c(-0.1)), Err(Error::OutsideChamber(_))));

        let w = C64::new(-1.3, 0.4);
        let fd = q_third_stencil(w, tolerances::Q_STENCIL_STEP).unwrap();
        assert!((fd - q_eval(w).unwrap().q3).norm() < tolerances::Q_STENCIL);
    }

    #[test]
    fn q_derivatives_chain() {
        // q'' and q' from the series agree with the closed forms.
        let w = C64::new(-0.7, 1.9);
        let v = q_eval(w).unwrap();
        assert!((v.q2 - (w / 2.0 - (1.0 - w.exp()).ln())).norm() < 1e-14);
        let h = 1e-4;
        let d = (q_eval(w + h).unwrap().q1 - q_eval(w - h).unwrap().q1) / (2.0 * h);
        assert!((d - v.q2).norm() < 1e-7);
    }

    #[test]
    fn phi_examples() {
        let a1 = ctx(Family::A, 1, 1.0, 0.0);
        let phi = a1.phi_eval(&BasePoint::new(vec![c(-1.0)], C64::zero())).unwrap();
        assert!((phi - c(0.5 * 0.30366209087686646)).norm() < 1e-14);

        let zero = ctx(Family::B, 3, 0.0, 0.0);
        let s = C64::new(0.3, -1.2);
        let p = BasePoint::new(vec![c(-0.5); 3], s);
        assert_eq!(zero.phi_eval(&p).unwrap(), -s * s * s / 6.0);

        assert!(matches!(
            a1.phi_eval(&BasePoint::new(vec![c(-0.1)], C64::zero())),
            Err(Error::OutsideChamber(_))
        ));
    }

    #[test]
    fn third_derivative_examples() {
        let cx = ctx(Family::A, 3, 0.7, 0.3);
        let mut smp = Sampler::new(21, 0);
        let p = smp.point(3);
        let e = TangentVec::identity(3);
        assert_eq!(cx.third_derivative(&p, &e, &e, &e).unwrap(), c(-1.0));
        let (x, y) = (smp.horizontal(3), smp.horizontal(3));
        let mixed = cx.third_derivative(&p, &e, &x, &y).unwrap();
        let a = cx.algebra().horizontal_metric(&x.h_part, &y.h_part);
        assert!((mixed - a).norm() < 1e-13 * (1.0 + a.norm()));
    }

    #[test]
    fn trilinear_b_support_and_symmetry() {
        for (f, n) in [(Family::B, 3), (Family::A, 1), (Family::G, 2)] {
            assert!(ctx(f, n, 0.7, 0.3).trilinear_b().iter().all(|t| t.is_zero()));
        }
        let a4 = ctx(Family::A, 4, 0.7, 0.3);
        let (asym, scale) = a4.trilinear_b_asymmetry();
        assert!(scale > 0.0);
        assert!(asym <= 1e-13 * scale);
    }

    #[test]
    fn d_kappa_is_not_a_fit() {
        let a2 = ctx(Family::A, 2, 0.7, 0.3);
        assert!(a2.fit_d_kappa().relative_residual > 0.1);
    }

    #[test]
    fn potential_matches_product() {
        for (f, n) in [(Family::A, 3), (Family::C, 3), (Family::G, 2)] {
            let cx = ctx(f, n, 0.7, 0.3);
            let mut smp = Sampler::new(3, 1);
            let p = smp.point(n);
            for _ in 0..5 {
                let (x, y, z) = (smp.tangent(n), smp.tangent(n), smp.tangent(n));
                let t = cx.third_derivative(&p, &x, &y, &z).unwrap();
                let m = cx.algebra().cubic(&p, &x, &y, &z).unwrap();
                let s = cx.third_derivative_scale(&p, &x, &y, &z).unwrap();
                assert!((t - m).norm() <= 1e-9 * s, "{f}{n}");
                let fd = cx.fd_third_derivative(&p, &x, &y, &z).unwrap();
                assert!((t - fd).norm() <= 1e-5 * s, "{f}{n}: {}", (t - fd).norm() / s);
            }
        }
    }

    #[test]
    fn wdvv_fixture_cubic_sum() {
        let dim = 4;
        let mut t = vec![C64::zero(); dim * dim * dim];
        for i in 0..dim {
            t[(i * dim + i) * dim + i] = c(1.0);
        }
        let r = wdvv_residual_from_tensor(&t, &DMatrix::identity(dim, dim)).unwrap();
        assert_eq!(r, 0.0);
        assert!(wdvv_residual_from_tensor(&t, &DMatrix::zeros(dim, dim)).is_none());
    }

    #[test]
    fn wdvv_detects_non_associative_tensor() {
        let dim = 2;
        let t: Vec<C64> = (0..8).map(|i| c((i * i) as f64 + 1.0)).collect();
        assert!(wdvv_residual_from_tensor(&t, &DMatrix::identity(dim, dim)).unwrap() > 1e-3);
    }

    #[test]
    fn wdvv_on_systems() {
        for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 3), (Family::F, 4)] {
            let cx = ctx(f, n, 0.7, 0.3);
            let mut smp = Sampler::new(5, 0);
            let r = cx.wdvv_residual(&smp.point(n)).unwrap().unwrap();
            assert!(r <= 1e-8, "{f}{n}: {r}");
        }
        assert!(ctx(Family::A, 3, 0.5, 0.5)
            .wdvv_residual(&Sampler::new(1, 0).point(3))
            .unwrap()
            .is_none());
    }
}
