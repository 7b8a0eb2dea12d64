//! Reduced irreducible root systems in Bourbaki coordinates.
//!
//! Everything here is exact. Positive roots come from closing the simple
//! roots under simple reflections, so no per-type root tables are kept.
//! `A_n` and `G_2` live in the hyperplane `sum z^i = 0` of `R^{n+1}` and
//! `R^3`; `E_6` and `E_7` live in the Bourbaki subspaces of `R^8`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self as rat, q, q_frac, Q, QVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }

    /// Whether the Weyl group acts transitively on the roots.
    pub fn simply_laced(self) -> bool {
        matches!(self, Family::A | Family::D | Family::E)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" => Ok(Family::E),
            "F" => Ok(Family::F),
            "G" => Ok(Family::G),
            other => Err(Error::Config(format!("unknown root system family '{other}'"))),
        }
    }
}

/// A family letter together with a rank satisfying the classification
/// constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RootSystemSpec {
    family: Family,
    rank: usize,
}

impl RootSystemSpec {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let constraint = match family {
            Family::A if rank < 1 => Some("A_n requires n >= 1"),
            Family::B if rank < 2 => Some("B_n requires n >= 2"),
            Family::C if rank < 3 => Some("C_n requires n >= 3"),
            Family::D if rank < 4 => Some("D_n requires n >= 4"),
            Family::E if !(6..=8).contains(&rank) => Some("E_n requires n in {6, 7, 8}"),
            Family::F if rank != 4 => Some("F_n requires n = 4"),
            Family::G if rank != 2 => Some("G_n requires n = 2"),
            _ => None,
        };
        match constraint {
            Some(constraint) => Err(Error::InvalidRootSystem {
                family: family.letter(),
                rank,
                constraint,
            }),
            None => Ok(Self { family, rank }),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ambient_dim(&self) -> usize {
        match self.family {
            Family::A => self.rank + 1,
            Family::E => 8,
            Family::G => 3,
            _ => self.rank,
        }
    }
}

impl fmt::Display for RootSystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

impl FromStr for RootSystemSpec {
    type Err = Error;

    /// Parses labels such as `A3`, `e8`, `G2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        let family: Family = head.parse()?;
        let rank = tail
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad rank in system label '{s}'")))?;
        Self::new(family, rank)
    }
}

/// The W-invariant multiplicity parameter. `k` is carried by the orbit of
/// the first simple root, `k_prime` by the other orbit; for `A_n` `k_prime`
/// instead scales the equivariant bilinear map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multiplicity {
    pub k: Complex64,
    pub k_prime: Complex64,
}

impl Multiplicity {
    pub fn new(k: Complex64, k_prime: Complex64) -> Self {
        Self { k, k_prime }
    }

    pub fn real(k: f64, k_prime: f64) -> Self {
        Self::new(Complex64::new(k, 0.0), Complex64::new(k_prime, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRoot {
    pub vector: QVec,
    pub coroot: QVec,
    /// Expansion in the simple roots; also the coefficients of the linear
    /// form `alpha` in the coweight basis.
    pub simple_coeffs: Vec<i64>,
    /// `alpha_i(coroot)` for each simple root, i.e. the coroot in the
    /// coweight basis.
    pub coroot_coweight: Vec<i64>,
    /// 0 for the Weyl orbit of the first simple root, 1 otherwise.
    pub orbit: u8,
}

#[derive(Debug, Clone)]
pub struct RootDatum {
    spec: RootSystemSpec,
    simple_roots: Vec<QVec>,
    positive_roots: Vec<PositiveRoot>,
    fundamental_coweights: Vec<QVec>,
    coweight_gram: Vec<QVec>,
    cartan: Vec<Vec<i64>>,
    lookup: BTreeMap<QVec, (usize, bool)>,
}

fn bourbaki_simple_roots(spec: RootSystemSpec) -> Vec<QVec> {
    let n = spec.rank;
    let m = spec.ambient_dim();
    let e = |i: usize| rat::unit(m, i);
    let chain = |len: usize| -> Vec<QVec> { (0..len).map(|i| rat::sub(&e(i), &e(i + 1))).collect() };
    match spec.family {
        Family::A => chain(n),
        Family::B => {
            let mut s = chain(n - 1);
            s.push(e(n - 1));
            s
        }
        Family::C => {
            let mut s = chain(n - 1);
            s.push(rat::scale(&q(2), &e(n - 1)));
            s
        }
        Family::D => {
            let mut s = chain(n - 1);
            s.push(rat::add(&e(n - 2), &e(n - 1)));
            s
        }
        Family::E => {
            let half = q_frac(1, 2);
            // alpha_1 = (e1 + e8 - e2 - ... - e7) / 2
            let mut a1 = rat::zeros(8);
            for (i, x) in a1.iter_mut().enumerate() {
                *x = if i == 0 || i == 7 { half.clone() } else { -half.clone() };
            }
            let mut s = vec![a1, rat::add(&e(0), &e(1))];
            // alpha_k = e_{k-1} - e_{k-2} for k = 3..8
            for k in 3..=8 {
                s.push(rat::sub(&e(k - 2), &e(k - 3)));
            }
            s.truncate(n);
            s
        }
        Family::F => {
            let half = q_frac(1, 2);
            vec![
                rat::sub(&e(1), &e(2)),
                rat::sub(&e(2), &e(3)),
                e(3),
                vec![half.clone(), -half.clone(), -half.clone(), -half],
            ]
        }
        Family::G => vec![
            rat::sub(&e(0), &e(1)),
            vec![q(-2), q(1), q(1)],
        ],
    }
}

fn reflect_raw(root: &[Q], v: &[Q]) -> QVec {
    let c = q(2) * rat::dot(v, root) / rat::dot(root, root);
    rat::sub(v, &rat::scale(&c, root))
}

/// Breadth-first closure of `seeds` under the reflections in `simple`.
fn reflection_closure(simple: &[QVec], seeds: &[QVec]) -> BTreeSet<QVec> {
    let mut seen: BTreeSet<QVec> = seeds.iter().cloned().collect();
    let mut queue: VecDeque<QVec> = seeds.iter().cloned().collect();
    while let Some(v) = queue.pop_front() {
        for s in simple {
            let w = reflect_raw(s, &v);
            if seen.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    seen
}

pub fn build_root_system(spec: RootSystemSpec) -> RootDatum {
    let simple = bourbaki_simple_roots(spec);
    let n = spec.rank;

    let simple_gram: Vec<QVec> = simple
        .iter()
        .map(|a| simple.iter().map(|b| rat::dot(a, b)).collect())
        .collect();
    let gram_inv = rat::inverse(&simple_gram).expect("simple roots are linearly independent");

    // p_j = sum_k (G^{-1})_{kj} alpha_k, so (alpha_i, p_j) = delta_ij and p_j
    // lies in the span of the roots.
    let m = spec.ambient_dim();
    let coweights: Vec<QVec> = (0..n)
        .map(|j| {
            (0..n).fold(rat::zeros(m), |acc, k| {
                rat::add(&acc, &rat::scale(&gram_inv[k][j], &simple[k]))
            })
        })
        .collect();
    let coweight_gram: Vec<QVec> = coweights
        .iter()
        .map(|a| coweights.iter().map(|b| rat::dot(a, b)).collect())
        .collect();

    let all_roots = reflection_closure(&simple, &simple);
    let orbit0 = reflection_closure(&simple, &simple[..1]);

    let coroot_of = |r: &QVec| rat::scale(&(q(2) / rat::dot(r, r)), r);
    let mut positive_roots = Vec::new();
    for r in &all_roots {
        let rhs: QVec = simple.iter().map(|s| rat::dot(s, r)).collect();
        let coeffs = rat::solve(&simple_gram, &rhs).expect("root lies in the span");
        if coeffs.iter().any(Signed::is_negative) {
            continue;
        }
        let coroot = coroot_of(r);
        positive_roots.push(PositiveRoot {
            simple_coeffs: coeffs
                .iter()
                .map(|c| rat::to_i64(c).expect("root coefficients are integers"))
                .collect(),
            coroot_coweight: simple
                .iter()
                .map(|s| rat::to_i64(&rat::dot(s, &coroot)).expect("Cartan integers"))
                .collect(),
            orbit: if orbit0.contains(r) { 0 } else { 1 },
            vector: r.clone(),
            coroot,
        });
    }
    // Order by height, then lexicographically by coefficients.
    positive_roots.sort_by(|a, b| {
        let ha: i64 = a.simple_coeffs.iter().sum();
        let hb: i64 = b.simple_coeffs.iter().sum();
        ha.cmp(&hb).then_with(|| b.simple_coeffs.cmp(&a.simple_coeffs))
    });

    let mut lookup = BTreeMap::new();
    for (i, r) in positive_roots.iter().enumerate() {
        lookup.insert(r.vector.clone(), (i, true));
        lookup.insert(rat::neg(&r.vector), (i, false));
    }

    let cartan = simple
        .iter()
        .map(|a| {
            simple
                .iter()
                .map(|b| rat::to_i64(&rat::dot(a, &coroot_of(b))).expect("Cartan integers"))
                .collect()
        })
        .collect();

    RootDatum {
        spec,
        simple_roots: simple,
        positive_roots,
        fundamental_coweights: coweights,
        coweight_gram,
        cartan,
        lookup,
    }
}

impl RootDatum {
    pub fn spec(&self) -> RootSystemSpec {
        self.spec
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    pub fn ambient_dim(&self) -> usize {
        self.spec.ambient_dim()
    }

    pub fn simple_roots(&self) -> &[QVec] {
        &self.simple_roots
    }

    pub fn positive_roots(&self) -> &[PositiveRoot] {
        &self.positive_roots
    }

    pub fn fundamental_coweights(&self) -> &[QVec] {
        &self.fundamental_coweights
    }

    /// `(p_i, p_j)`: the inner product in the coweight basis.
    pub fn coweight_gram(&self) -> &[QVec] {
        &self.coweight_gram
    }

    /// `cartan[i][j] = alpha_i(alpha_j^vee)`.
    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    /// Looks up a (possibly negative) root; returns the index of the
    /// positive root and whether `v` is that root (`true`) or its negative.
    pub fn find_root(&self, v: &[Q]) -> Option<(usize, bool)> {
        self.lookup.get(v).copied()
    }

    fn require_root(&self, v: &[Q]) -> Result<(usize, bool)> {
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: v.len(),
            });
        }
        self.find_root(v)
            .ok_or_else(|| Error::NotARoot(format!("{:?}", rat::format_qvec(v))))
    }

    /// All roots, positive ones first.
    pub fn all_roots(&self) -> Vec<QVec> {
        let mut out: Vec<QVec> = self.positive_roots.iter().map(|r| r.vector.clone()).collect();
        out.extend(self.positive_roots.iter().map(|r| rat::neg(&r.vector)));
        out
    }

    pub fn coroot(&self, root: &[Q]) -> Result<QVec> {
        let (idx, positive) = self.require_root(root)?;
        let c = &self.positive_roots[idx].coroot;
        Ok(if positive { c.clone() } else { rat::neg(c) })
    }

    /// `s_root(v) = v - 2 (v, root)/(root, root) root`.
    pub fn reflect(&self, root: &[Q], v: &[Q]) -> Result<QVec> {
        self.require_root(root)?;
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: v.len(),
            });
        }
        Ok(reflect_raw(root, v))
    }

    /// Matrix of `s_root` acting on coweight coordinates:
    /// `M[i][j] = alpha_i(s_root p_j) = delta_ij - beta(p_j) alpha_i(beta^vee)`.
    pub fn reflection_matrix(&self, root: &[Q]) -> Result<Vec<Vec<i64>>> {
        let (idx, _) = self.require_root(root)?;
        let r = &self.positive_roots[idx];
        let n = self.rank();
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| i64::from(i == j) - r.simple_coeffs[j] * r.coroot_coweight[i])
                    .collect()
            })
            .collect())
    }

    /// Orbit label of a root: 0 for the orbit of `alpha_1`, 1 otherwise.
    pub fn orbit_of(&self, root: &[Q]) -> Result<u8> {
        let (idx, _) = self.require_root(root)?;
        Ok(self.positive_roots[idx].orbit)
    }

    pub fn orbit_count(&self) -> usize {
        let ids: BTreeSet<u8> = self.positive_roots.iter().map(|r| r.orbit).collect();
        ids.len()
    }

    /// Coweight coordinates `alpha_i(v)` of an ambient vector.
    pub fn to_coweight_coords(&self, v: &[Q]) -> QVec {
        self.simple_roots.iter().map(|a| rat::dot(a, v)).collect()
    }

    /// Ambient vector `sum_i x_i p_i`.
    pub fn from_coweight_coords(&self, x: &[Q]) -> QVec {
        x.iter()
            .zip(&self.fundamental_coweights)
            .fold(rat::zeros(self.ambient_dim()), |acc, (c, p)| {
                rat::add(&acc, &rat::scale(c, p))
            })
    }

    /// Checks every structural invariant exactly; returns a description of
    /// each violation (empty when the datum is sound).
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.rank();
        let roots = self.all_roots();
        let root_set: BTreeSet<&QVec> = roots.iter().collect();

        for r in &self.positive_roots {
            if rat::dot(&r.vector, &r.coroot) != q(2) {
                bad.push(format!("(alpha, alpha^vee) != 2 for {:?}", rat::format_qvec(&r.vector)));
            }
            for s in &self.positive_roots {
                if !rat::dot(&r.vector, &s.coroot).is_integer() {
                    bad.push("non-integral pairing alpha(beta^vee)".into());
                }
            }
        }
        for s in &self.simple_roots {
            for r in &roots {
                if !root_set.contains(&reflect_raw(s, r)) {
                    bad.push("a simple reflection does not preserve the root set".into());
                }
            }
        }
        let expected = expected_positive_root_count(self.spec);
        if self.positive_roots.len() != expected {
            bad.push(format!(
                "positive root count {} != {expected}",
                self.positive_roots.len()
            ));
        }
        if self.cartan != standard_cartan(self.spec) {
            bad.push("Cartan matrix differs from the Dynkin diagram".into());
        }
        let expected_orbits = if self.spec.family.simply_laced() { 1 } else { 2 };
        if self.orbit_count() != expected_orbits {
            bad.push(format!("orbit count {} != {expected_orbits}", self.orbit_count()));
        }
        for i in 0..n {
            for j in 0..n {
                let pairing = rat::dot(&self.simple_roots[i], &self.fundamental_coweights[j]);
                let want = if i == j { Q::one() } else { Q::zero() };
                if pairing != want {
                    bad.push(format!("alpha_{}(p_{}) != delta", i + 1, j + 1));
                }
            }
        }
        bad
    }

    pub fn dump(&self) -> RootDump {
        let fmt = |v: &QVec| rat::format_qvec(v);
        RootDump {
            system: self.spec.to_string(),
            family: self.spec.family.letter().to_string(),
            rank: self.rank(),
            ambient_dim: self.ambient_dim(),
            simple_roots: self.simple_roots.iter().map(fmt).collect(),
            positive_roots: self.positive_roots.iter().map(|r| fmt(&r.vector)).collect(),
            coroots: self.positive_roots.iter().map(|r| fmt(&r.coroot)).collect(),
            coweights: self.fundamental_coweights.iter().map(fmt).collect(),
            orbit_ids: self.positive_roots.iter().map(|r| r.orbit).collect(),
            cartan: self.cartan.clone(),
        }
    }
}

/// Standard positive-root counts.
pub fn expected_positive_root_count(spec: RootSystemSpec) -> usize {
    let n = spec.rank;
    match spec.family {
        Family::A => n * (n + 1) / 2,
        Family::B | Family::C => n * n,
        Family::D => n * (n - 1),
        Family::E => match n {
            6 => 36,
            7 => 63,
            _ => 120,
        },
        Family::F => 24,
        Family::G => 6,
    }
}

/// `k` on the orbit of `alpha_1`, `k_prime` on the other orbit.
pub fn multiplicity_of(datum: &RootDatum, kappa: &Multiplicity, root: &[Q]) -> Result<Complex64> {
    Ok(match datum.orbit_of(root)? {
        0 => kappa.k,
        _ => kappa.k_prime,
    })
}

/// JSON shape of the `roots` dump. All coordinates are exact rational
/// strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootDump {
    pub system: String,
    pub family: String,
    pub rank: usize,
    pub ambient_dim: usize,
    pub simple_roots: Vec<Vec<String>>,
    pub positive_roots: Vec<Vec<String>>,
    pub coroots: Vec<Vec<String>>,
    pub coweights: Vec<Vec<String>>,
    pub orbit_ids: Vec<u8>,
    pub cartan: Vec<Vec<i64>>,
}

/// Cartan matrix read off the Dynkin diagram in Bourbaki numbering, with
/// entry `(i, j)` equal to `alpha_i(alpha_j^vee)`.
pub fn standard_cartan(spec: RootSystemSpec) -> Vec<Vec<i64>> {
    let n = spec.rank;
    // (i, j, bond, long node); 0-based
    let mut edges: Vec<(usize, usize, i64, Option<usize>)> = Vec::new();
    let chain = |edges: &mut Vec<(usize, usize, i64, Option<usize>)>, len: usize| {
        for i in 0..len.saturating_sub(1) {
            edges.push((i, i + 1, 1, None));
        }
    };
    match spec.family {
        Family::A => chain(&mut edges, n),
        Family::B => {
            chain(&mut edges, n - 1);
            edges.push((n - 2, n - 1, 2, Some(n - 2)));
        }
        Family::C => {
            chain(&mut edges, n - 1);
            edges.push((n - 2, n - 1, 2, Some(n - 1)));
        }
        Family::D => {
            chain(&mut edges, n - 1);
            edges.push((n - 3, n - 1, 1, None));
        }
        Family::E => {
            edges.push((0, 2, 1, None));
            edges.push((1, 3, 1, None));
            for i in 2..n - 1 {
                edges.push((i, i + 1, 1, None));
            }
        }
        Family::F => {
            edges.push((0, 1, 1, None));
            edges.push((1, 2, 2, Some(1)));
            edges.push((2, 3, 1, None));
        }
        Family::G => edges.push((0, 1, 3, Some(1))),
    }
    let mut c = vec![vec![0i64; n]; n];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 2;
    }
    for (i, j, bond, long) in edges {
        let (lo, sh) = match long {
            Some(l) if l == i => (i, j),
            Some(_) => (j, i),
            None => (i, j),
        };
        c[lo][sh] = -bond;
        c[sh][lo] = -1;
    }
    c
}

/// The desk-scale set of systems exercised by the verification matrix.
pub fn desk_systems() -> Vec<RootSystemSpec> {
    use Family::*;
    [
        (A, 1),
        (A, 2),
        (A, 3),
        (A, 4),
        (B, 2),
        (B, 3),
        (B, 4),
        (C, 3),
        (C, 4),
        (D, 4),
        (D, 5),
        (E, 6),
        (E, 7),
        (E, 8),
        (F, 4),
        (G, 2),
    ]
    .into_iter()
    .map(|(f, r)| RootSystemSpec::new(f, r).expect("desk systems are valid"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn datum(f: Family, n: usize) -> RootDatum {
        build_root_system(RootSystemSpec::new(f, n).unwrap())
    }

    fn v(xs: &[i64]) -> QVec {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn rank_constraints_are_enforced() {
        for (f, n) in [
            (Family::A, 0),
            (Family::B, 1),
            (Family::C, 2),
            (Family::D, 3),
            (Family::E, 5),
            (Family::E, 9),
            (Family::F, 3),
            (Family::G, 3),
        ] {
            let err = RootSystemSpec::new(f, n).unwrap_err();
            assert!(matches!(err, Error::InvalidRootSystem { .. }), "{f}{n}");
            assert!(err.to_string().contains("requires"));
        }
        assert!("C2".parse::<RootSystemSpec>().is_err());
        assert_eq!("e7".parse::<RootSystemSpec>().unwrap().to_string(), "E7");
    }

    #[test]
    fn a2_positive_roots() {
        let d = datum(Family::A, 2);
        let got: BTreeSet<QVec> = d.positive_roots().iter().map(|r| r.vector.clone()).collect();
        let want: BTreeSet<QVec> = [v(&[1, -1, 0]), v(&[0, 1, -1]), v(&[1, 0, -1])].into();
        assert_eq!(got, want);
    }

    #[test]
    fn g2_has_two_orbits_of_three() {
        let d = datum(Family::G, 2);
        assert_eq!(d.positive_roots().len(), 6);
        let short = d.positive_roots().iter().filter(|r| r.orbit == 0).count();
        assert_eq!(short, 3);
        assert_eq!(d.orbit_count(), 2);
    }

    #[test]
    fn d4_single_orbit() {
        let d = datum(Family::D, 4);
        assert_eq!(d.positive_roots().len(), 12);
        assert_eq!(d.orbit_count(), 1);
    }

    #[test]
    fn reflection_examples() {
        let d = datum(Family::B, 3);
        let a = v(&[1, -1, 0]);
        assert_eq!(d.reflect(&a, &a).unwrap(), rat::neg(&a));
        let orth = v(&[0, 0, 1]);
        assert_eq!(d.reflect(&a, &orth).unwrap(), orth);
        let x = vec![q_frac(3, 7), q_frac(-2, 5), q(4)];
        let twice = d.reflect(&a, &d.reflect(&a, &x).unwrap()).unwrap();
        assert_eq!(twice, x);
        assert!(matches!(d.reflect(&v(&[1, 1, 1]), &x), Err(Error::NotARoot(_))));
    }

    #[test]
    fn multiplicity_examples() {
        let kappa = Multiplicity::real(1.5, -0.25);
        let b3 = datum(Family::B, 3);
        assert_eq!(multiplicity_of(&b3, &kappa, &v(&[1, -1, 0])).unwrap(), kappa.k);
        assert_eq!(multiplicity_of(&b3, &kappa, &v(&[0, 0, 1])).unwrap(), kappa.k_prime);
        assert_eq!(multiplicity_of(&b3, &kappa, &v(&[0, 0, -1])).unwrap(), kappa.k_prime);

        let a4 = datum(Family::A, 4);
        for r in a4.all_roots() {
            assert_eq!(multiplicity_of(&a4, &kappa, &r).unwrap(), kappa.k);
        }

        let g2 = datum(Family::G, 2);
        let long = g2.simple_roots()[1].clone();
        let short = g2.simple_roots()[0].clone();
        assert_eq!(multiplicity_of(&g2, &kappa, &short).unwrap(), kappa.k);
        assert_eq!(multiplicity_of(&g2, &kappa, &long).unwrap(), kappa.k_prime);
    }

    #[test]
    fn coweights_live_in_the_root_span() {
        // For A_n the coweights must sit in the hyperplane sum z = 0.
        let d = datum(Family::A, 3);
        for p in d.fundamental_coweights() {
            assert!(p.iter().fold(Q::zero(), |a, x| a + x).is_zero());
        }
        // A_1: p_1 = alpha / 2, (p_1, p_1) = 1/2.
        let a1 = datum(Family::A, 1);
        assert_eq!(a1.fundamental_coweights()[0], vec![q_frac(1, 2), q_frac(-1, 2)]);
        assert_eq!(a1.coweight_gram()[0][0], q_frac(1, 2));
    }

    #[test]
    fn reflection_matrix_agrees_with_ambient_reflection() {
        let d = datum(Family::F, 4);
        for r in d.positive_roots() {
            let m = d.reflection_matrix(&r.vector).unwrap();
            for (j, p) in d.fundamental_coweights().iter().enumerate() {
                let image = d.to_coweight_coords(&reflect_raw(&r.vector, p));
                let col: QVec = (0..4).map(|i| q(m[i][j])).collect();
                assert_eq!(image, col);
            }
        }
    }

    #[test]
    fn desk_systems_are_sound() {
        for spec in desk_systems() {
            let d = build_root_system(spec);
            assert!(d.invariant_violations().is_empty(), "{spec}: {:?}", d.invariant_violations());
        }
    }

    #[test]
    fn orbit_labels_are_weyl_invariant() {
        for spec in desk_systems() {
            let d = build_root_system(spec);
            for s in d.simple_roots() {
                for r in d.all_roots() {
                    let image = d.reflect(s, &r).unwrap();
                    assert_eq!(d.orbit_of(&image).unwrap(), d.orbit_of(&r).unwrap());
                }
            }
        }
    }


    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn reflections_preserve_roots_and_orbits(sys in 0usize..16, i in 0usize..8, j in 0usize..200) {
            let d = build_root_system(desk_systems()[sys]);
            let simple = &d.simple_roots()[i % d.rank()];
            let all = d.all_roots();
            let r = &all[j % all.len()];
            let image = d.reflect(simple, r).unwrap();
            proptest::prop_assert!(d.find_root(&image).is_some());
            proptest::prop_assert_eq!(d.orbit_of(&image).unwrap(), d.orbit_of(r).unwrap());
        }
    }
}
