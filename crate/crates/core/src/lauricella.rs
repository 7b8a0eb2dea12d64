//! The weighted configuration on `C^{n+1}`: the form `a(z, w) = sum mu_i z^i w^i`,
//! the hyperplane `sum mu_i z^i = 0`, and the projected coordinatewise
//! product. Everything here is exact over `Q`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self as rat, q, Q, QVec};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSystem {
    weights: QVec,
    mu_total: Q,
}

/// A basis triple `(r, s, t)` where `a(b(e_r, e_s), e_t)` and
/// `a(e_r, b(e_s, e_t))` differ.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryWitness {
    pub indices: (usize, usize, usize),
    pub lhs: Q,
    pub rhs: Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryVerdict {
    pub symmetric: bool,
    pub triples_checked: usize,
    pub witness: Option<SymmetryWitness>,
}

/// Square matrix over `Q`, row-major.
pub type QMatrix = Vec<QVec>;

impl WeightedSystem {
    pub fn new(weights: QVec) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidWeights(format!(
                "need at least 2 weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidWeights(format!("weight {} is not positive", rat::format_q(w))));
        }
        let mu_total = weights.iter().sum();
        Ok(Self { weights, mu_total })
    }

    /// Parses a comma-separated list such as `1,2,3` or `1/2,3/4,1`.
    pub fn parse(s: &str) -> Result<Self> {
        let weights = s
            .split(',')
            .map(|p| rat::parse_q(p).ok_or_else(|| Error::InvalidWeights(format!("cannot parse {p:?}"))))
            .collect::<Result<QVec>>()?;
        Self::new(weights)
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn mu_total(&self) -> &Q {
        &self.mu_total
    }

    pub fn ambient_dim(&self) -> usize {
        self.weights.len()
    }

    fn check_len(&self, v: &[Q]) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_hyperplane(&self, v: &[Q]) -> Result<()> {
        self.check_len(v)?;
        let r = self.diagonal_pairing(v);
        if !r.is_zero() {
            return Err(Error::NotInHyperplane(rat::format_q(&r)));
        }
        Ok(())
    }

    fn diagonal_pairing(&self, v: &[Q]) -> Q {
        rat::dot(&self.weights, v)
    }

    pub fn weighted_metric(&self, z: &[Q], w: &[Q]) -> Result<Q> {
        self.check_len(z)?;
        self.check_len(w)?;
        Ok(self.metric(z, w))
    }

    fn metric(&self, z: &[Q], w: &[Q]) -> Q {
        self.weights
            .iter()
            .zip(z.iter().zip(w))
            .fold(Q::zero(), |acc, (m, (a, b))| acc + m * a * b)
    }

    /// `eps_N = sum eps_i`.
    pub fn diagonal(&self) -> QVec {
        vec![q(1); self.ambient_dim()]
    }

    /// `v_{i,j} = mu_j eps_i - mu_i eps_j` (0-based indices).
    pub fn normal_vector(&self, i: usize, j: usize) -> Result<QVec> {
        let n = self.ambient_dim();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidWeights(format!("invalid index pair ({i}, {j})")));
        }
        let mut v = rat::zeros(n);
        v[i] = self.weights[j].clone();
        v[j] = -self.weights[i].clone();
        Ok(v)
    }

    /// `{v_{i,i+1}}`, a basis of the hyperplane.
    pub fn hyperplane_basis(&self) -> Vec<QVec> {
        (0..self.ambient_dim() - 1)
            .map(|i| self.normal_vector(i, i + 1).expect("adjacent indices"))
            .collect()
    }

    /// Coordinatewise product.
    pub fn b_tilde(&self, z: &[Q], w: &[Q]) -> QVec {
        z.iter().zip(w).map(|(a, b)| a * b).collect()
    }

    /// `a`-orthogonal projection onto the hyperplane along `eps_N`.
    pub fn project(&self, u: &[Q]) -> QVec {
        let c = self.diagonal_pairing(u) / &self.mu_total;
        u.iter().map(|x| x - &c).collect()
    }

    /// `b(z, w) = pi(b~(z, w))` for `z, w` in the hyperplane.
    pub fn b_weighted(&self, z: &[Q], w: &[Q]) -> Result<QVec> {
        self.check_hyperplane(z)?;
        self.check_hyperplane(w)?;
        Ok(self.project(&self.b_tilde(z, w)))
    }

    /// Matrix of `w -> pi(z o w)` on the ambient space.
    pub fn b_operator(&self, z: &[Q]) -> Result<QMatrix> {
        self.check_hyperplane(z)?;
        let n = self.ambient_dim();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let col = &self.weights[j] * &z[j] / &self.mu_total;
                        if i == j {
                            &z[j] - col
                        } else {
                            -col
                        }
                    })
                    .collect()
            })
            .collect())
    }

    /// `mu_j eps_i (x) z_i - mu_i eps_j (x) z_j - (mu_i mu_j / mu_N) eps_N (x) (z_i - z_j)`.
    pub fn b_ij_formula(&self, i: usize, j: usize) -> Result<QMatrix> {
        let n = self.ambient_dim();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidWeights(format!("invalid index pair ({i}, {j})")));
        }
        let (mi, mj) = (&self.weights[i], &self.weights[j]);
        let c = mi * mj / &self.mu_total;
        let mut m = vec![rat::zeros(n); n];
        for (r, row) in m.iter_mut().enumerate() {
            row[i] -= &c;
            row[j] += &c;
            if r == i {
                row[i] += mj;
            }
            if r == j {
                row[j] -= mi;
            }
        }
        Ok(m)
    }

    /// Exhaustive exact comparison of `a(b(e_r, e_s), e_t)` with
    /// `a(e_r, b(e_s, e_t))` over the hyperplane basis.
    pub fn symmetry_test(&self) -> SymmetryVerdict {
        let basis = self.hyperplane_basis();
        let mut checked = 0;
        for (r, er) in basis.iter().enumerate() {
            for (s, es) in basis.iter().enumerate() {
                let brs = self.b_weighted(er, es).expect("basis lies in hyperplane");
                for (t, et) in basis.iter().enumerate() {
                    let bst = self.b_weighted(es, et).expect("basis lies in hyperplane");
                    let lhs = self.metric(&brs, et);
                    let rhs = self.metric(er, &bst);
                    checked += 1;
                    if lhs != rhs {
                        return SymmetryVerdict {
                            symmetric: false,
                            triples_checked: checked,
                            witness: Some(SymmetryWitness {
                                indices: (r, s, t),
                                lhs,
                                rhs,
                            }),
                        };
                    }
                }
            }
        }
        SymmetryVerdict {
            symmetric: true,
            triples_checked: checked,
            witness: None,
        }
    }

    /// `[b_z, b_w] + mu_N^{-1}(z (x) a_w - w (x) a_z)` applied to the
    /// hyperplane basis; returns the largest entry magnitude.
    pub fn commutator_check(&self, z: &[Q], w: &[Q]) -> Result<Q> {
        self.check_hyperplane(z)?;
        self.check_hyperplane(w)?;
        let mut worst = Q::zero();
        for u in self.hyperplane_basis() {
            let bzbw = self.b_weighted(z, &self.b_weighted(w, &u)?)?;
            let bwbz = self.b_weighted(w, &self.b_weighted(z, &u)?)?;
            let aw = self.metric(w, &u);
            let az = self.metric(z, &u);
            let corr = rat::sub(&rat::scale(&aw, z), &rat::scale(&az, w));
            let corr = rat::scale(&self.mu_total.recip(), &corr);
            let total = rat::add(&rat::sub(&bzbw, &bwbz), &corr);
            let m = rat::max_abs(&total);
            if m > worst {
                worst = m;
            }
        }
        Ok(worst)
    }

    /// `f~(z) = sum mu_i (z^i)^3`.
    pub fn cubic_form(&self, z: &[Q]) -> Result<Q> {
        self.check_len(z)?;
        Ok(self
            .weights
            .iter()
            .zip(z)
            .fold(Q::zero(), |acc, (m, x)| acc + m * x * x * x))
    }

    /// `a(b~(z, z), z) - f~(z)`.
    pub fn cubic_identity_defect(&self, z: &[Q]) -> Result<Q> {
        Ok(self.metric(&self.b_tilde(z, z), z) - self.cubic_form(z)?)
    }
}

/// The type `A_n` equivariant map `1/2 sum_{i<j} (x_i - x_j)(y_i - y_j) alpha'`
/// with unit coefficient, in `eps` coordinates on `sum z^i = 0`.
pub fn type_a_b_map(x: &[Q], y: &[Q]) -> QVec {
    let m = x.len();
    let shift = Q::new(2.into(), (m as i64).into());
    let mut out = rat::zeros(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let c = (&x[i] - &x[j]) * (&y[i] - &y[j]) / q(2);
            out[i] += &c;
            out[j] += &c;
            for o in out.iter_mut() {
                *o -= &c * &shift;
            }
        }
    }
    out
}

/// For equal weights: the rational `c` with `b_weighted = c * type_a_b_map`,
/// fixed on the first basis pair and then confirmed on every basis pair.
/// `None` if no single constant fits.
pub fn equal_weight_ratio(sys: &WeightedSystem) -> Option<Q> {
    let basis = sys.hyperplane_basis();
    let first_b = type_a_b_map(&basis[0], &basis[0]);
    let first_w = sys.b_weighted(&basis[0], &basis[0]).ok()?;
    let idx = first_b.iter().position(|v| !v.is_zero())?;
    let c = &first_w[idx] / &first_b[idx];
    for x in &basis {
        for y in &basis {
            let w = sys.b_weighted(x, y).ok()?;
            if w != rat::scale(&c, &type_a_b_map(x, y)) {
                return None;
            }
        }
    }
    Some(c)
}
