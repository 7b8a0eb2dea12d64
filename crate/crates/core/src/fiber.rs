//! The fiberwise algebra on `h (+) C`.
//!
//! Horizontal vectors are stored in the fundamental-coweight basis, so the
//! `i`-th coordinate of `X` is `alpha_i(X)` and every root acts on it as an
//! integer linear form. The vertical direction is `e = t d/dt`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{self as rat, q, q_frac, Q, QVec};
use crate::roots::{Family, Multiplicity, RootDatum};
use crate::tolerances;

type C64 = Complex64;

/// A point of `H° x C*` in logarithmic coordinates: `x_i = alpha_i(x)` and
/// `s = log t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint {
    pub x: Vec<C64>,
    pub s: C64,
}

impl BasePoint {
    pub fn new(x: Vec<C64>, s: C64) -> Self {
        Self { x, s }
    }
}

/// `X + lambda e` with `X` in coweight coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec {
    pub h_part: Vec<C64>,
    pub lambda: C64,
}

impl TangentVec {
    pub fn new(h_part: Vec<C64>, lambda: C64) -> Self {
        Self { h_part, lambda }
    }

    pub fn horizontal(h_part: Vec<C64>) -> Self {
        Self::new(h_part, C64::zero())
    }

    pub fn zero(rank: usize) -> Self {
        Self::new(vec![C64::zero(); rank], C64::zero())
    }

    /// The unit field `e = t d/dt`.
    pub fn identity(rank: usize) -> Self {
        Self::new(vec![C64::zero(); rank], C64::new(1.0, 0.0))
    }

    /// Frame vector `j` of `{p_1, .., p_n, e}`.
    pub fn frame(rank: usize, j: usize) -> Self {
        if j == rank {
            return Self::identity(rank);
        }
        let mut v = Self::zero(rank);
        v.h_part[j] = C64::new(1.0, 0.0);
        v
    }

    pub fn rank(&self) -> usize {
        self.h_part.len()
    }

    pub fn to_coords(&self) -> DVector<C64> {
        DVector::from_iterator(
            self.rank() + 1,
            self.h_part.iter().copied().chain(std::iter::once(self.lambda)),
        )
    }

    pub fn from_coords(v: &DVector<C64>) -> Self {
        let n = v.len() - 1;
        Self::new(v.iter().take(n).copied().collect(), v[n])
    }

    pub fn norm_inf(&self) -> f64 {
        self.h_part
            .iter()
            .chain(std::iter::once(&self.lambda))
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            self.h_part.iter().zip(&other.h_part).map(|(a, b)| a - b).collect(),
            self.lambda - other.lambda,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.h_part.iter().zip(&other.h_part).map(|(a, b)| a + b).collect(),
            self.lambda + other.lambda,
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::new(self.h_part.iter().map(|a| a * c).collect(), self.lambda * c)
    }
}

/// Value of `c` with `a^kappa = c (.,.)` on `h`.
pub fn metric_scalar(datum: &RootDatum, kappa: &Multiplicity) -> C64 {
    let n = datum.rank() as f64;
    let (k, kp) = (kappa.k, kappa.k_prime);
    match datum.spec().family() {
        Family::A => (n + 1.0) / 4.0 * (k * k - kp * kp),
        Family::B => (n - 2.0) * k * k + k * kp,
        Family::C => (n - 2.0) * k * k + 2.0 * k * kp,
        Family::D => (n - 2.0) * k * k,
        Family::E => {
            let c = match datum.rank() {
                6 => 6.0,
                7 => 12.0,
                _ => 30.0,
            };
            c * k * k
        }
        Family::F => (k + kp) * (2.0 * k + kp),
        Family::G => 0.75 * (k + 3.0 * kp) * (k + kp),
    }
}

/// Fits `c` in `scalar (u, v) = c sum_{alpha>0} alpha(u) alpha(v)` over all
/// coweight basis pairs.
fn fit_c_kappa(datum: &RootDatum, scalar: C64) -> Result<C64> {
    let n = datum.rank();
    let gram = datum.coweight_gram();
    let mut lhs = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            lhs.push(scalar * rat::to_f64(&gram[i][j]));
            let s: i64 = datum
                .positive_roots()
                .iter()
                .map(|r| r.simple_coeffs[i] * r.simple_coeffs[j])
                .sum();
            rhs.push(s as f64);
        }
    }
    let num: C64 = lhs.iter().zip(&rhs).map(|(l, r)| l * r).sum();
    let den: f64 = rhs.iter().map(|r| r * r).sum();
    let c = num / den;
    let resid: f64 = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - c * r).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm: f64 = lhs.iter().map(|l| l.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 && resid > tolerances::C_KAPPA_FIT * norm {
        return Err(Error::Consistency(format!(
            "c^kappa fit residual {:.3e} exceeds bound",
            resid / norm
        )));
    }
    Ok(c)
}

/// `c^kappa` with `a^kappa(u, v) = c^kappa sum_{alpha>0} alpha(u) alpha(v)`.
pub fn c_kappa(datum: &RootDatum, kappa: &Multiplicity) -> Result<C64> {
    fit_c_kappa(datum, metric_scalar(datum, kappa))
}

/// For `A_n` with `n >= 2`: the vectors `alpha' = e_i + e_j - 2/(n+1) sum e_l`
/// of each positive root `z_i - z_j`, in coweight coordinates.
fn b_directions(datum: &RootDatum) -> Option<Vec<QVec>> {
    let spec = datum.spec();
    if spec.family() != Family::A || spec.rank() < 2 {
        return None;
    }
    let m = datum.ambient_dim();
    let shift = q_frac(2, m as i64);
    let dirs = datum
        .positive_roots()
        .iter()
        .map(|r| {
            let i = r.vector.iter().position(|c| *c == q(1)).expect("A_n root");
            let j = r.vector.iter().position(|c| *c == q(-1)).expect("A_n root");
            let mut alpha_prime: QVec = vec![-shift.clone(); m];
            alpha_prime[i] += q(1);
            alpha_prime[j] += q(1);
            datum.to_coweight_coords(&alpha_prime)
        })
        .collect();
    Some(dirs)
}

/// The equivariant symmetric map `b^kappa(X, Y)`, zero outside `A_{n>=2}`.
pub fn b_map(datum: &RootDatum, kappa: &Multiplicity, x: &[C64], y: &[C64]) -> Vec<C64> {
    let n = datum.rank();
    let mut out = vec![C64::zero(); n];
    let Some(dirs) = b_directions(datum) else {
        return out;
    };
    for (r, dir) in datum.positive_roots().iter().zip(&dirs) {
        let ax: C64 = r.simple_coeffs.iter().zip(x).map(|(&m, v)| v * m as f64).sum();
        let ay: C64 = r.simple_coeffs.iter().zip(y).map(|(&m, v)| v * m as f64).sum();
        let w = 0.5 * kappa.k_prime * (ax * ay);
        for (o, d) in out.iter_mut().zip(dir) {
            *o += w * rat::to_f64(d);
        }
    }
    out
}

#[derive(Debug, Clone)]
struct RootTerm {
    coeffs: Vec<f64>,
    coroot: Vec<f64>,
    k: C64,
    /// `(alpha^vee, alpha^vee)`.
    coroot_norm2: f64,
    b_dir: Option<Vec<f64>>,
    coeff_l1: f64,
    coroot_inf: f64,
    b_dir_inf: f64,
}

impl RootTerm {
    fn eval(&self, v: &[C64]) -> C64 {
        self.coeffs.iter().zip(v).map(|(&m, z)| z * m).sum()
    }
}

/// `(1 + e^w) / (1 - e^w)`.
pub fn trig_factor(w: C64) -> C64 {
    let e = w.exp();
    (1.0 + e) / (1.0 - e)
}

/// `d/dw (1 + e^w)/(1 - e^w) = 2 e^w / (1 - e^w)^2`.
pub fn trig_factor_derivative(w: C64) -> C64 {
    let e = w.exp();
    let d = 1.0 - e;
    2.0 * e / (d * d)
}

/// Verdict on the Gram matrix of `a^kappa` in the frame `{p_1..p_n, e}`.
#[derive(Debug, Clone)]
pub struct GramVerdict {
    pub matrix: DMatrix<C64>,
    pub determinant: C64,
    /// Product of the row norms; bounds `|det|` by Hadamard's inequality.
    pub scale: f64,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone)]
pub struct FiberAlgebra {
    datum: Arc<RootDatum>,
    kappa: Multiplicity,
    metric_scalar: C64,
    c_kappa: C64,
    degenerate: bool,
    terms: Vec<RootTerm>,
    gram: Vec<Vec<f64>>,
    gram_abs_sum: f64,
}

impl FiberAlgebra {
    /// Builds the algebra with the tabulated metric.
    pub fn new(datum: Arc<RootDatum>, kappa: Multiplicity) -> Result<Self> {
        let scalar = metric_scalar(&datum, &kappa);
        Self::with_metric_scalar(datum, kappa, scalar)
    }

    /// Builds the algebra with an arbitrary multiple of the inner product
    /// in place of the tabulated one.
    pub fn with_metric_scalar(datum: Arc<RootDatum>, kappa: Multiplicity, scalar: C64) -> Result<Self> {
        let c_kappa = fit_c_kappa(&datum, scalar)?;
        let dirs = b_directions(&datum);
        let terms = datum
            .positive_roots()
            .iter()
            .enumerate()
            .map(|(idx, r)| {
                let coeffs: Vec<f64> = r.simple_coeffs.iter().map(|&c| c as f64).collect();
                let coroot: Vec<f64> = r.coroot_coweight.iter().map(|&c| c as f64).collect();
                let b_dir = dirs.as_ref().map(|d| rat::to_f64_vec(&d[idx]));
                RootTerm {
                    coeff_l1: coeffs.iter().map(|c| c.abs()).sum(),
                    coroot_inf: coroot.iter().map(|c| c.abs()).fold(0.0, f64::max),
                    b_dir_inf: b_dir
                        .as_ref()
                        .map_or(0.0, |d| d.iter().map(|c| c.abs()).fold(0.0, f64::max)),
                    coeffs,
                    coroot,
                    k: if r.orbit == 0 { kappa.k } else { kappa.k_prime },
                    coroot_norm2: rat::to_f64(&rat::dot(&r.coroot, &r.coroot)),
                    b_dir,
                }
            })
            .collect();
        let gram: Vec<Vec<f64>> = datum
            .coweight_gram()
            .iter()
            .map(|row| rat::to_f64_vec(row))
            .collect();
        let gram_abs_sum = gram.iter().flatten().map(|g| g.abs()).sum();
        Ok(Self {
            degenerate: scalar.norm() <= tolerances::DEGENERATE_METRIC,
            datum,
            kappa,
            metric_scalar: scalar,
            c_kappa,
            terms,
            gram,
            gram_abs_sum,
        })
    }

    pub fn datum(&self) -> &Arc<RootDatum> {
        &self.datum
    }

    pub fn kappa(&self) -> Multiplicity {
        self.kappa
    }

    pub fn rank(&self) -> usize {
        self.datum.rank()
    }

    pub fn metric_scalar(&self) -> C64 {
        self.metric_scalar
    }

    pub fn c_kappa(&self) -> C64 {
        self.c_kappa
    }

    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn root_count(&self) -> usize {
        self.terms.len()
    }

    /// `alpha(v)` for positive root `idx`.
    pub fn root_value(&self, idx: usize, v: &[C64]) -> C64 {
        self.terms[idx].eval(v)
    }

    pub fn root_multiplicity(&self, idx: usize) -> C64 {
        self.terms[idx].k
    }

    /// `a^kappa(alpha^vee, alpha^vee) / alpha(alpha^vee)` for positive root `idx`.
    pub fn coroot_weight(&self, idx: usize) -> C64 {
        self.metric_scalar * self.terms[idx].coroot_norm2 / 2.0
    }

    /// The Euclidean inner product in coweight coordinates, arranged so the
    /// result is bitwise symmetric in its arguments.
    pub fn inner(&self, x: &[C64], y: &[C64]) -> C64 {
        let n = self.rank();
        let mut acc = C64::zero();
        for i in 0..n {
            acc += self.gram[i][i] * (x[i] * y[i]);
            for j in (i + 1)..n {
                acc += self.gram[i][j] * (x[i] * y[j] + x[j] * y[i]);
            }
        }
        acc
    }

    /// `a^kappa` on `h`.
    pub fn horizontal_metric(&self, x: &[C64], y: &[C64]) -> C64 {
        self.metric_scalar * self.inner(x, y)
    }

    /// Extended pseudometric: `a(X, e) = 0`, `a(e, e) = -1`.
    pub fn metric(&self, x: &TangentVec, y: &TangentVec) -> C64 {
        self.horizontal_metric(&x.h_part, &y.h_part) - x.lambda * y.lambda
    }

    /// `I(X~) = a(X~, e) = -lambda`.
    pub fn trace(&self, x: &TangentVec) -> C64 {
        -x.lambda
    }

    pub fn b_map(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::zero(); self.rank()];
        for t in &self.terms {
            if let Some(dir) = &t.b_dir {
                let w = 0.5 * self.kappa.k_prime * (t.eval(x) * t.eval(y));
                for (o, d) in out.iter_mut().zip(dir) {
                    *o += w * d;
                }
            }
        }
        out
    }

    /// Fails with the offending root when `point` is within
    /// [`tolerances::MIRROR_DISTANCE`] of a mirror.
    pub fn check_point(&self, point: &BasePoint) -> Result<()> {
        self.trig_factors(point).map(|_| ())
    }

    /// `(1 + e^alpha(x)) / (1 - e^alpha(x))` for every positive root.
    pub fn trig_factors(&self, point: &BasePoint) -> Result<Vec<C64>> {
        if point.x.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: point.x.len(),
            });
        }
        self.terms
            .iter()
            .enumerate()
            .map(|(idx, t)| {
                let w = t.eval(&point.x);
                let distance = (1.0 - w.exp()).norm();
                if !(distance >= tolerances::MIRROR_DISTANCE) {
                    return Err(Error::SingularPoint {
                        root: format!(
                            "{:?}",
                            rat::format_qvec(&self.datum.positive_roots()[idx].vector)
                        ),
                        distance,
                    });
                }
                Ok(trig_factor(w))
            })
            .collect()
    }

    /// The product with precomputed trigonometric factors.
    pub fn product_with(&self, factors: &[C64], x: &TangentVec, y: &TangentVec) -> TangentVec {
        let n = self.rank();
        let (l1, l2) = (x.lambda, y.lambda);
        let mut h = vec![C64::zero(); n];
        for (t, f) in self.terms.iter().zip(factors) {
            let axy = t.eval(&x.h_part) * t.eval(&y.h_part);
            let w = 0.5 * t.k * *f * axy;
            for (hi, c) in h.iter_mut().zip(&t.coroot) {
                *hi += w * c;
            }
            if let Some(dir) = &t.b_dir {
                let wb = 0.5 * self.kappa.k_prime * axy;
                for (hi, d) in h.iter_mut().zip(dir) {
                    *hi -= wb * d;
                }
            }
        }
        for i in 0..n {
            h[i] += l2 * x.h_part[i] + l1 * y.h_part[i];
        }
        let lambda = -self.horizontal_metric(&x.h_part, &y.h_part) + l1 * l2;
        TangentVec::new(h, lambda)
    }

    /// `X~ . Y~` at `point`.
    pub fn product(&self, point: &BasePoint, x: &TangentVec, y: &TangentVec) -> Result<TangentVec> {
        self.check_dims(x)?;
        self.check_dims(y)?;
        let f = self.trig_factors(point)?;
        Ok(self.product_with(&f, x, y))
    }

    fn check_dims(&self, v: &TangentVec) -> Result<()> {
        if v.rank() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: v.rank(),
            });
        }
        Ok(())
    }

    /// `T(X~, Y~, Z~) = a(X~ . Y~, Z~)`.
    pub fn cubic(&self, point: &BasePoint, x: &TangentVec, y: &TangentVec, z: &TangentVec) -> Result<C64> {
        Ok(self.metric(&self.product(point, x, y)?, z))
    }

    /// Closed form of `T` on horizontal fields, summed root by root:
    /// `1/2 sum k f a(av, av)/alpha(av) alpha(X)alpha(Y)alpha(Z) - a(b(X,Y), Z)`.
    pub fn horizontal_cubic_closed_form(
        &self,
        point: &BasePoint,
        x: &[C64],
        y: &[C64],
        z: &[C64],
    ) -> Result<C64> {
        let f = self.trig_factors(point)?;
        let mut acc = C64::zero();
        for (idx, (t, fa)) in self.terms.iter().zip(&f).enumerate() {
            acc += 0.5 * t.k * fa * self.coroot_weight(idx) * t.eval(x) * t.eval(y) * t.eval(z);
        }
        Ok(acc - self.horizontal_metric(&self.b_map(x, y), z))
    }

    /// Upper bound `K` with `|X~ . Y~|_inf <= K |X~|_inf |Y~|_inf` at `point`.
    pub fn product_bound(&self, point: &BasePoint) -> Result<f64> {
        let f = self.trig_factors(point)?;
        let kp = self.kappa.k_prime.norm();
        let mut k = 2.0 + self.metric_bound();
        for (t, fa) in self.terms.iter().zip(&f) {
            let sq = t.coeff_l1 * t.coeff_l1;
            k += 0.5 * t.k.norm() * fa.norm() * sq * t.coroot_inf;
            k += 0.5 * kp * sq * t.b_dir_inf;
        }
        Ok(k)
    }

    /// Upper bound `K'` for the base-point derivative of the product.
    pub fn derivative_bound(&self, point: &BasePoint) -> Result<f64> {
        self.check_point(point)?;
        Ok(self
            .terms
            .iter()
            .map(|t| {
                let d = trig_factor_derivative(t.eval(&point.x)).norm();
                0.5 * t.k.norm() * d * t.coeff_l1.powi(3) * t.coroot_inf
            })
            .sum::<f64>()
            + f64::MIN_POSITIVE)
    }

    /// Upper bound `A` with `|a(X~, Y~)| <= A |X~|_inf |Y~|_inf`.
    pub fn metric_bound(&self) -> f64 {
        1.0 + self.metric_scalar.norm() * self.gram_abs_sum
    }

    pub fn gram_matrix(&self) -> GramVerdict {
        let n = self.rank();
        let matrix = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            self.metric(&TangentVec::frame(n, i), &TangentVec::frame(n, j))
        });
        let determinant = matrix.determinant();
        let scale = matrix
            .row_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .product::<f64>();
        let nondegenerate = determinant.norm() > tolerances::GRAM_DET * scale;
        GramVerdict {
            matrix,
            determinant,
            scale,
            nondegenerate,
        }
    }
}

/// Action of the reflection `s_root` on `(point, X~)`: linear on the
/// logarithmic coordinate and on `h`, trivial on `e` and on `s`.
pub fn weyl_act(
    datum: &RootDatum,
    root: &[Q],
    point: &BasePoint,
    v: &TangentVec,
) -> Result<(BasePoint, TangentVec)> {
    let m = datum.reflection_matrix(root)?;
    let apply = |x: &[C64]| -> Vec<C64> {
        m.iter()
            .map(|row| row.iter().zip(x).map(|(&a, z)| z * a as f64).sum())
            .collect()
    };
    Ok((
        BasePoint::new(apply(&point.x), point.s),
        TangentVec::new(apply(&v.h_part), v.lambda),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{build_root_system, RootSystemSpec};
    use crate::sampling::Sampler;

    fn alg(f: Family, n: usize, k: f64, kp: f64) -> FiberAlgebra {
        let d = Arc::new(build_root_system(RootSystemSpec::new(f, n).unwrap()));
        FiberAlgebra::new(d, Multiplicity::real(k, kp)).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn metric_scalar_table_examples() {
        assert_eq!(alg(Family::D, 4, 1.0, 0.0).metric_scalar(), c(2.0));
        assert_eq!(alg(Family::G, 2, 1.0, 1.0).metric_scalar(), c(6.0));
        let a3 = alg(Family::A, 3, 0.5, 0.5);
        assert_eq!(a3.metric_scalar(), c(0.0));
        assert!(a3.degenerate());
        assert!(!a3.gram_matrix().nondegenerate);
    }

    #[test]
    fn metric_examples() {
        let a = alg(Family::B, 3, 0.7, 0.3);
        let e = TangentVec::identity(3);
        assert_eq!(a.metric(&e, &e), c(-1.0));
        let x = TangentVec::horizontal(vec![c(1.0), c(-2.0), c(0.5)]);
        assert_eq!(a.metric(&x, &e), c(0.0));

        let a1 = alg(Family::A, 1, 1.0, 0.0);
        let p1 = TangentVec::frame(1, 0);
        assert!((a1.metric(&p1, &p1) - c(0.25)).norm() < 1e-15);
    }

    #[test]
    fn c_kappa_examples() {
        let a1 = alg(Family::A, 1, 0.9, 0.4);
        let want = (0.81 - 0.16) / 4.0;
        assert!((a1.c_kappa() - c(want)).norm() < 1e-15);
        assert_eq!(alg(Family::E, 7, 0.0, 0.0).c_kappa(), c(0.0));
        // G2: sum_{alpha>0} alpha (x) alpha = g (.,.) with 2g = sum_{alpha>0} |alpha|^2
        // = 3 * 2 + 3 * 6, so g = 12 and c^kappa = 6 / 12.
        let g2 = alg(Family::G, 2, 1.0, 1.0);
        assert!((g2.c_kappa() - c(0.5)).norm() < 1e-14);
    }

    #[test]
    fn b_map_examples() {
        let a1 = alg(Family::A, 1, 1.0, 1.0);
        assert_eq!(a1.b_map(&[c(1.3)], &[c(-0.2)]), vec![c(0.0)]);

        // A2, k' = 1, X = Y = e1 - e2 gives (1/2, 1/2, -1) in e-coordinates.
        let a2 = alg(Family::A, 2, 0.0, 1.0);
        let d = a2.datum().clone();
        let x: Vec<C64> = d
            .to_coweight_coords(&[q(1), q(-1), q(0)])
            .iter()
            .map(|v| c(rat::to_f64(v)))
            .collect();
        let b = a2.b_map(&x, &x);
        let want: Vec<C64> = d
            .to_coweight_coords(&[q_frac(1, 2), q_frac(1, 2), q(-1)])
            .iter()
            .map(|v| c(rat::to_f64(v)))
            .collect();
        for (g, w) in b.iter().zip(&want) {
            assert!((g - w).norm() < 1e-14);
        }
        assert_eq!(b_map(&d, &a2.kappa(), &x, &x), b);
    }

    #[test]
    fn b_map_is_equivariant() {
        let a3 = alg(Family::A, 3, 0.4, 1.3);
        let d = a3.datum().clone();
        let s = d.simple_roots()[0].clone();
        let mut smp = Sampler::new(5, 0);
        let point = smp.point(3);
        for _ in 0..5 {
            let x = smp.horizontal(3);
            let y = smp.horizontal(3);
            let (_, wx) = weyl_act(&d, &s, &point, &x).unwrap();
            let (_, wy) = weyl_act(&d, &s, &point, &y).unwrap();
            let b = TangentVec::horizontal(a3.b_map(&x.h_part, &y.h_part));
            let (_, wb) = weyl_act(&d, &s, &point, &b).unwrap();
            let direct = TangentVec::horizontal(a3.b_map(&wx.h_part, &wy.h_part));
            assert!(direct.sub(&wb).norm_inf() < 1e-13);
        }
    }

    #[test]
    fn identity_and_commutativity_are_exact() {
        let a = alg(Family::A, 4, 0.7, 0.3);
        let mut smp = Sampler::new(1, 0);
        let p = smp.point(4);
        let e = TangentVec::identity(4);
        for _ in 0..20 {
            let x = smp.tangent(4);
            let y = smp.tangent(4);
            assert_eq!(a.product(&p, &e, &y).unwrap(), y);
            assert_eq!(a.product(&p, &x, &y).unwrap(), a.product(&p, &y, &x).unwrap());
        }
    }

    #[test]
    fn a1_at_minus_one() {
        // alpha(x) = i pi: the trigonometric factor vanishes and
        // a(alpha^vee, alpha^vee) = 1, so alpha^vee . alpha^vee = -e.
        let a1 = alg(Family::A, 1, 1.0, 0.0);
        let p = BasePoint::new(vec![C64::new(0.0, std::f64::consts::PI)], c(0.0));
        let coroot = TangentVec::horizontal(vec![c(2.0)]);
        let prod = a1.product(&p, &coroot, &coroot).unwrap();
        assert!(prod.h_part[0].norm() < 1e-15);
        assert!((prod.lambda - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_point_names_root() {
        let a = alg(Family::B, 2, 1.0, 1.0);
        let p = BasePoint::new(vec![c(0.0), c(-0.5)], c(0.0));
        let err = a.product(&p, &TangentVec::identity(2), &TangentVec::identity(2)).unwrap_err();
        match err {
            Error::SingularPoint { root, .. } => assert!(root.contains('1')),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trace_examples() {
        let a = alg(Family::C, 3, 1.0, 0.5);
        assert_eq!(a.trace(&TangentVec::identity(3)), c(-1.0));
        assert_eq!(a.trace(&TangentVec::horizontal(vec![c(1.0); 3])), c(0.0));
        assert_eq!(a.trace(&TangentVec::new(vec![c(2.0); 3], c(3.0))), c(-3.0));
    }

    #[test]
    fn gram_examples() {
        let g = alg(Family::A, 1, 1.0, 0.0).gram_matrix();
        assert!((g.matrix[(0, 0)] - c(0.25)).norm() < 1e-15);
        assert_eq!(g.matrix[(1, 1)], c(-1.0));
        assert_eq!(g.matrix[(0, 1)], c(0.0));
        assert!((g.determinant - c(-0.25)).norm() < 1e-15);
        assert!(g.nondegenerate);
        for spec in crate::roots::desk_systems() {
            let a = alg(spec.family(), spec.rank(), 0.83, 0.29);
            assert!(a.gram_matrix().nondegenerate, "{spec}");
        }
    }

    #[test]
    fn frobenius_condition_and_associativity() {
        for (f, n) in [(Family::A, 3), (Family::B, 3), (Family::G, 2), (Family::D, 4)] {
            let a = alg(f, n, 0.7, 0.3);
            let mut smp = Sampler::new(9, 0);
            let p = smp.point(n);
            let k = a.product_bound(&p).unwrap();
            let am = a.metric_bound();
            for _ in 0..10 {
                let (x, y, z) = (smp.tangent(n), smp.tangent(n), smp.tangent(n));
                let s = x.norm_inf() * y.norm_inf() * z.norm_inf();
                let lhs = a.metric(&a.product(&p, &x, &y).unwrap(), &z);
                let rhs = a.metric(&x, &a.product(&p, &y, &z).unwrap());
                assert!((lhs - rhs).norm() <= 1e-10 * s * k * am);
                let l = a.product(&p, &a.product(&p, &x, &y).unwrap(), &z).unwrap();
                let r = a.product(&p, &x, &a.product(&p, &y, &z).unwrap()).unwrap();
                assert!(l.sub(&r).norm_inf() <= 1e-9 * s * k * k, "{f}{n}");
            }
        }
    }

    #[test]
    fn horizontal_cubic_matches_closed_form() {
        let a = alg(Family::A, 3, 0.6, -0.45);
        let mut smp = Sampler::new(3, 0);
        let p = smp.point(3);
        let (x, y, z) = (smp.horizontal(3), smp.horizontal(3), smp.horizontal(3));
        let t = a.cubic(&p, &x, &y, &z).unwrap();
        let closed = a
            .horizontal_cubic_closed_form(&p, &x.h_part, &y.h_part, &z.h_part)
            .unwrap();
        assert!((t - closed).norm() < 1e-12 * (1.0 + t.norm()));
    }

    #[test]
    fn weyl_action_examples() {
        let a = alg(Family::B, 3, 0.7, 0.3);
        let d = a.datum().clone();
        let mut smp = Sampler::new(11, 0);
        let p = smp.point(3);
        let e = TangentVec::identity(3);
        for r in d.simple_roots() {
            let (_, we) = weyl_act(&d, r, &p, &e).unwrap();
            assert_eq!(we, e);
            let x = smp.tangent(3);
            let (p1, x1) = weyl_act(&d, r, &p, &x).unwrap();
            let (p2, x2) = weyl_act(&d, r, &p1, &x1).unwrap();
            for (a, b) in p2.x.iter().zip(&p.x) {
                assert!((a - b).norm() < 1e-14);
            }
            assert_eq!(p2.s, p.s);
            assert!(x2.sub(&x).norm_inf() < 1e-14);
        }
    }


    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn product_is_commutative_and_frobenius(sys in 0usize..16, seed in 0u64..1000) {
            let s = crate::roots::desk_systems()[sys];
            let a = FiberAlgebra::new(
                Arc::new(build_root_system(s)),
                Multiplicity::real(0.7, 0.3),
            )
            .unwrap();
            let n = s.rank();
            let mut smp = Sampler::new(seed, 0);
            let p = smp.point(n);
            let (x, y, z) = (smp.tangent(n), smp.tangent(n), smp.tangent(n));
            let xy = a.product(&p, &x, &y).unwrap();
            proptest::prop_assert_eq!(&xy, &a.product(&p, &y, &x).unwrap());
            let k = a.product_bound(&p).unwrap();
            let bound = 1e-10 * a.metric_bound() * k * x.norm_inf() * y.norm_inf() * z.norm_inf();
            let yz = a.product(&p, &y, &z).unwrap();
            proptest::prop_assert!((a.metric(&xy, &z) - a.metric(&x, &yz)).norm() <= bound);
        }
    }
}
