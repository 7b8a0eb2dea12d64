//! The verification suite: one configuration in, one deterministic report out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{
    curvature, curvature_scale, derivative_operator, derivative_operator_fd, dilatation_check, dual_form_matrix,
    mult_operator, r_double_prime, r_prime, torsion_residual,
};
use crate::error::{Error, Result};
use crate::fiber::{weyl_act, BasePoint, FiberAlgebra, TangentVec};
use crate::potential::PotentialContext;
use crate::roots::{build_root_system, desk_systems, Multiplicity, RootDatum, RootSystemSpec};
use crate::sampling::Sampler;
use crate::tolerances as tol;

type C64 = Complex64;

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = "frobtor";

/// Vector triples per point for the cheap algebra checks.
pub const DEFAULT_TRIPLES: usize = 20;
/// Vector pairs per point for the connection and potential checks.
const HEAVY_SAMPLES: usize = 3;
const MAX_RESAMPLES: usize = 100;

pub const CURVATURE_MU_COMPLEX: C64 = C64::new(0.37, 0.2);

/// Every check name with its default tolerance, in report order.
pub const CHECKS: &[(&str, f64)] = &[
    ("associativity", tol::ASSOCIATIVITY),
    ("commutativity", 0.0),
    ("connection_fd_derivative", tol::CONNECTION_FD),
    ("cubic_b_symmetry", tol::CUBIC_B_SYMMETRY),
    ("curvature_mu_0", tol::CURVATURE),
    ("curvature_mu_1", tol::CURVATURE),
    ("curvature_mu_complex", tol::CURVATURE),
    ("curvature_recomposition", tol::RECOMPOSITION),
    ("dilatation", tol::DILATATION),
    ("dual_form_consistency", tol::DUAL_FORM),
    ("frobenius_condition", tol::FROBENIUS_CONDITION),
    ("gram_nondegenerate", 1.0 / tol::GRAM_DET),
    ("identity", 0.0),
    ("metric_perturbation_separation", 1.0 / tol::PERTURBATION_SEPARATION),
    ("potential_fd_third_derivative", tol::POTENTIAL_FD),
    ("potential_product_consistency", tol::POTENTIAL_PRODUCT),
    ("r_double_prime", tol::CURVATURE),
    ("r_prime", tol::CURVATURE),
    ("root_datum_invariants", 0.0),
    ("t_symmetry", tol::CUBIC_SYMMETRY),
    ("torsion_free", tol::TORSION),
    ("wdvv", tol::WDVV),
    ("weyl_equivariance", tol::WEYL_EQUIVARIANCE),
];

/// Checks that need a nondegenerate metric.
const NEEDS_NONDEGENERATE: &[&str] = &["gram_nondegenerate", "metric_perturbation_separation", "wdvv"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: RootSystemSpec,
    pub kappa: Multiplicity,
    pub points: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub triples: usize,
    pub tol_overrides: BTreeMap<String, f64>,
    /// Multiplies the tabulated metric scalar. Only for exercising failure
    /// paths.
    pub metric_scale: f64,
}

impl RunConfig {
    pub fn new(system: RootSystemSpec, kappa: Multiplicity) -> Self {
        Self {
            system,
            kappa,
            points: 8,
            seed: 42,
            fd_step: tol::CONNECTION_FD_STEP,
            triples: DEFAULT_TRIPLES,
            tol_overrides: BTreeMap::new(),
            metric_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("points must be at least 1".into()));
        }
        if self.triples == 0 {
            return Err(Error::Config("triples must be at least 1".into()));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::Config(format!("fd step {} must be positive", self.fd_step)));
        }
        if !self.metric_scale.is_finite() {
            return Err(Error::Config("metric scale must be finite".into()));
        }
        for (k, v) in [("k", self.kappa.k), ("k'", self.kappa.k_prime)] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Config(format!("{k} must be finite")));
            }
        }
        for (name, v) in &self.tol_overrides {
            if !CHECKS.iter().any(|(c, _)| c == name) {
                return Err(Error::Config(format!("unknown check {name:?}")));
            }
            if !(*v >= 0.0) {
                return Err(Error::Config(format!("tolerance for {name} must be non-negative")));
            }
        }
        Ok(())
    }

    fn tolerance(&self, name: &str) -> f64 {
        self.tol_overrides.get(name).copied().unwrap_or_else(|| {
            CHECKS
                .iter()
                .find(|(c, _)| *c == name)
                .map(|(_, t)| *t)
                .expect("registered check")
        })
    }
}

/// Parses `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim();
    let bad = || Error::Config(format!("cannot parse complex number {s:?}"));
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 || z.im.is_sign_negative() {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaRecord {
    pub k: String,
    pub k_prime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicFitRecord {
    pub d_kappa: String,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub system: String,
    pub kappa: KappaRecord,
    pub metric_scalar: String,
    pub c_kappa: String,
    pub degenerate: bool,
    pub points: usize,
    pub seed: u64,
    /// Best fit of `T_b` to a multiple of `sum alpha^3`, for reference only.
    pub cubic_fit: CubicFitRecord,
    pub checks: Vec<CheckRecord>,
    pub overall: String,
}

impl VerificationReport {
    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    /// 0 all pass, 1 any failure, 2 degenerate metric without failures.
    pub fn exit_code(&self) -> i32 {
        if self.any_failed() {
            1
        } else if self.degenerate {
            2
        } else {
            0
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} k={} k'={} degenerate={} points={} seed={}",
            self.system, self.kappa.k, self.kappa.k_prime, self.degenerate, self.points, self.seed
        );
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::NotApplicable => "n/a",
            };
            let resid = c.max_residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            let _ = writeln!(s, "  {:<32} {:<5} {:>10}  tol {:.1e}", c.name, status, resid, c.tolerance);
        }
        let _ = writeln!(s, "overall: {}", self.overall);
        s
    }
}

/// Max that lets NaN win, so a broken residual can never pass.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Default)]
struct Maxima(BTreeMap<&'static str, f64>);

impl Maxima {
    fn record(&mut self, name: &'static str, v: f64) {
        let e = self.0.entry(name).or_insert(0.0);
        *e = nan_max(*e, v);
    }

    fn merge(mut self, other: Maxima) -> Maxima {
        for (k, v) in other.0 {
            self.record(k, v);
        }
        self
    }
}

struct Suite<'a> {
    cfg: &'a RunConfig,
    alg: FiberAlgebra,
    pot: PotentialContext,
    perturbed: FiberAlgebra,
    reflections: Vec<Vec<Vec<i64>>>,
}

impl Suite<'_> {
    fn draw_point(&self, smp: &mut Sampler) -> Result<BasePoint> {
        let n = self.alg.rank();
        for _ in 0..MAX_RESAMPLES {
            let p = smp.point(n);
            if self.alg.check_point(&p).is_ok() {
                return Ok(p);
            }
        }
        Err(Error::Config(format!("no admissible point after {MAX_RESAMPLES} draws")))
    }

    fn run_point(&self, index: usize) -> Result<Maxima> {
        let n = self.alg.rank();
        let alg = &self.alg;
        let mut smp = Sampler::new(self.cfg.seed, index as u64);
        let p = self.draw_point(&mut smp)?;
        let mut m = Maxima::default();
        let k = alg.product_bound(&p)?;
        let a = alg.metric_bound();
        let f = alg.trig_factors(&p)?;
        let prod = |x: &TangentVec, y: &TangentVec| alg.product_with(&f, x, y);
        let e = TangentVec::identity(n);

        for _ in 0..self.cfg.triples {
            let (x, y, z) = (smp.tangent(n), smp.tangent(n), smp.tangent(n));
            let s3 = x.norm_inf() * y.norm_inf() * z.norm_inf();
            let xy = prod(&x, &y);
            let yz = prod(&y, &z);
            m.record("commutativity", xy.sub(&prod(&y, &x)).norm_inf());
            m.record("identity", prod(&e, &x).sub(&x).norm_inf());
            let fc = (alg.metric(&xy, &z) - alg.metric(&x, &yz)).norm();
            m.record("frobenius_condition", ratio(fc, a * k * s3));
            let assoc = prod(&xy, &z).sub(&prod(&x, &yz)).norm_inf();
            m.record("associativity", ratio(assoc, k * k * s3));

            let t = alg.metric(&xy, &z);
            let perms = [
                alg.metric(&prod(&x, &z), &y),
                alg.metric(&yz, &x),
                alg.metric(&prod(&y, &x), &z),
                alg.metric(&prod(&z, &x), &y),
                alg.metric(&prod(&z, &y), &x),
            ];
            let asym = perms.iter().map(|o| (t - o).norm()).fold(0.0, f64::max);
            m.record("t_symmetry", ratio(asym, a * k * s3));

            for (refl, root) in self.reflections.iter().zip(alg.datum().simple_roots()) {
                let norm = refl
                    .iter()
                    .map(|r| r.iter().map(|v| v.unsigned_abs() as f64).sum::<f64>())
                    .fold(0.0, f64::max);
                let (wp, wx) = weyl_act(alg.datum(), root, &p, &x)?;
                let (_, wy) = weyl_act(alg.datum(), root, &p, &y)?;
                let (_, wxy) = weyl_act(alg.datum(), root, &p, &xy)?;
                let moved = alg.product(&wp, &wx, &wy)?;
                let r = moved.sub(&wxy).norm_inf();
                m.record("weyl_equivariance", ratio(r, k * norm.powi(3) * x.norm_inf() * y.norm_inf()));
            }
        }

        for _ in 0..HEAVY_SAMPLES.min(self.cfg.triples) {
            let (x, y, z) = (smp.tangent(n), smp.tangent(n), smp.tangent(n));
            let (xn, yn) = (x.norm_inf(), y.norm_inf());

            let dual = dual_form_matrix(alg, &p, &x)?;
            let mult = mult_operator(alg, &p, &x)?;
            m.record("dual_form_consistency", ratio(dual.sub(&mult).max_abs(), k * xn));
            m.record("dilatation", ratio(dilatation_check(alg, &p, &x)?, k * xn));
            m.record("torsion_free", ratio(torsion_residual(alg, &p, &x, &y)?, k * xn * yn));

            let one = C64::new(1.0, 0.0);
            let s1 = curvature_scale(alg, &p, one, &x, &y)?;
            let r0 = curvature(alg, &p, C64::zero(), &x, &y)?;
            m.record("curvature_mu_0", ratio(r0.norm(), s1));
            m.record("curvature_mu_1", ratio(curvature(alg, &p, one, &x, &y)?.norm(), s1));
            let mu = CURVATURE_MU_COMPLEX;
            let sc = curvature_scale(alg, &p, mu, &x, &y)?;
            let rc = curvature(alg, &p, mu, &x, &y)?;
            m.record("curvature_mu_complex", ratio(rc.norm(), sc));
            let rp = r_prime(alg, &p, &x, &y)?;
            let rpp = r_double_prime(alg, &p, &x, &y)?;
            m.record("r_prime", ratio(rp.norm(), s1));
            m.record("r_double_prime", ratio(rpp.norm(), s1));
            let recomposed = rp.scale(mu).add(&rpp.scale(mu * mu));
            m.record("curvature_recomposition", ratio(rc.sub(&recomposed).norm(), sc));

            let kd = alg.derivative_bound(&p)?;
            let exact = derivative_operator(alg, &p, &z, &y)?;
            let fd = derivative_operator_fd(alg, &p, &z, &y, self.cfg.fd_step)?;
            let dscale = (n + 1) as f64 * kd * z.norm_inf() * yn;
            m.record("connection_fd_derivative", ratio(exact.sub(&fd).norm(), dscale));

            let t = self.pot.third_derivative(&p, &x, &y, &z)?;
            let ts = self.pot.third_derivative_scale(&p, &x, &y, &z)?;
            let cubic = alg.metric(&prod(&x, &y), &z);
            m.record("potential_product_consistency", ratio((t - cubic).norm(), ts));
            let fdt = self.pot.fd_third_derivative(&p, &x, &y, &z)?;
            m.record("potential_fd_third_derivative", ratio((t - fdt).norm(), ts));

            if n > 1 {
                let sp = curvature_scale(&self.perturbed, &p, one, &x, &y)?;
                let rpert = curvature(&self.perturbed, &p, one, &x, &y)?.norm();
                m.record("perturbed_curvature", ratio(rpert, sp));
            }
        }

        if !alg.degenerate() {
            if let Some(w) = self.pot.wdvv_residual(&p)? {
                m.record("wdvv", w);
            }
        }
        Ok(m)
    }
}

/// Runs every check for `cfg` and assembles the report.
pub fn run_suite(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let datum = Arc::new(build_root_system(cfg.system));
    run_suite_with(cfg, datum)
}

/// [`run_suite`] for an already built root datum.
pub fn run_suite_with(cfg: &RunConfig, datum: Arc<RootDatum>) -> Result<VerificationReport> {
    cfg.validate()?;
    let table = crate::fiber::metric_scalar(&datum, &cfg.kappa);
    let alg = FiberAlgebra::with_metric_scalar(datum.clone(), cfg.kappa, table * cfg.metric_scale)?;
    let perturbed = FiberAlgebra::with_metric_scalar(
        datum.clone(),
        cfg.kappa,
        alg.metric_scalar() * tol::PERTURBATION_FACTOR,
    )?;
    let reflections = datum
        .simple_roots()
        .iter()
        .map(|r| datum.reflection_matrix(r))
        .collect::<Result<Vec<_>>>()?;
    let suite = Suite {
        cfg,
        pot: PotentialContext::new(alg.clone()),
        alg,
        perturbed,
        reflections,
    };

    let per_point: Vec<Result<Maxima>> = (0..cfg.points).into_par_iter().map(|i| suite.run_point(i)).collect();
    let mut maxima = Maxima::default();
    for r in per_point {
        maxima = maxima.merge(r?);
    }
    let mut values = maxima.0;

    values.insert("root_datum_invariants", datum.invariant_violations().len() as f64);
    let (asym, scale) = suite.pot.trilinear_b_asymmetry();
    values.insert("cubic_b_symmetry", ratio(asym, scale));
    let gram = suite.alg.gram_matrix();
    values.insert("gram_nondegenerate", gram.scale / gram.determinant.norm());
    if let Some(pert) = values.remove("perturbed_curvature") {
        let base = values.get("curvature_mu_1").copied().unwrap_or(f64::NAN);
        values.insert("metric_perturbation_separation", base.max(f64::EPSILON) / pert);
    }

    let degenerate = suite.alg.degenerate();
    let checks: Vec<CheckRecord> = CHECKS
        .iter()
        .map(|(name, _)| {
            let tolerance = cfg.tolerance(name);
            let skip = degenerate && NEEDS_NONDEGENERATE.contains(name);
            match values.get(name).filter(|_| !skip) {
                Some(&v) => CheckRecord {
                    name: name.to_string(),
                    max_residual: Some(v),
                    tolerance,
                    status: if v <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail },
                },
                None => CheckRecord {
                    name: name.to_string(),
                    max_residual: None,
                    tolerance,
                    status: CheckStatus::NotApplicable,
                },
            }
        })
        .collect();

    let fit = suite.pot.fit_d_kappa();
    let mut report = VerificationReport {
        schema: SCHEMA,
        tool: TOOL.to_string(),
        version: crate::VERSION.to_string(),
        system: cfg.system.to_string(),
        kappa: KappaRecord {
            k: format_complex(cfg.kappa.k),
            k_prime: format_complex(cfg.kappa.k_prime),
        },
        metric_scalar: format_complex(suite.alg.metric_scalar()),
        c_kappa: format_complex(suite.alg.c_kappa()),
        degenerate,
        points: cfg.points,
        seed: cfg.seed,
        cubic_fit: CubicFitRecord {
            d_kappa: format_complex(fit.d_kappa),
            relative_residual: fit.relative_residual,
        },
        checks,
        overall: String::new(),
    };
    report.overall = match report.exit_code() {
        0 => "pass",
        1 => "fail",
        _ => "degenerate",
    }
    .to_string();
    Ok(report)
}

/// The multiplicity parameters of the default verification matrix.
pub fn desk_kappas() -> Vec<Multiplicity> {
    vec![
        Multiplicity::real(1.0, 0.0),
        Multiplicity::real(0.7, 0.3),
        Multiplicity::new(C64::new(1.0, 0.5), C64::new(0.2, 0.0)),
    ]
}

/// Every desk system crossed with every desk multiplicity.
pub fn desk_matrix() -> Vec<(RootSystemSpec, Multiplicity)> {
    desk_systems()
        .into_iter()
        .flat_map(|s| desk_kappas().into_iter().map(move |k| (s, k)))
        .collect()
}
