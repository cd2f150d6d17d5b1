//! Numeric verification of the modular and elliptic functional equations at
//! sample points of the upper half-plane.
//!
//! The exact series from the other modules are evaluated in f64; every
//! residual is compared against max(tol, 10 x the summed truncation-tail
//! estimates), so honest truncation error never produces a spurious failure.
//! Transformation constants are fitted by least squares on one subset of the
//! sample points and required to be stable on a disjoint subset before they
//! are trusted.

use num::complex::Complex64;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jacobi::JacobiSeries;
use crate::lattice::{
    automorphism_trace, phi_evaluator, twisted_character, EvenLattice, LatticeVector, PhiEvaluator,
};
use crate::qseries::NumericEval;
use crate::rat::{rat_int, rat_to_string, Rat};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_ORDER: i64 = 30;
pub const MIN_IM_TAU: f64 = 0.8;
pub const MAX_ABS_IM_Z: f64 = 0.5;
/// Evaluations with a larger tail estimate raise `PrecisionLoss`.
pub const PRECISION_WARN: f64 = 1e-3;

/// A point (tau, z) with Im(tau) above the configured minimum, so that
/// truncation-tail estimates stay meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub tau: Complex64,
    pub z: Complex64,
}

impl SamplePoint {
    pub fn new(tau: Complex64, z: Complex64) -> Self {
        SamplePoint { tau, z }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau.im < MIN_IM_TAU {
            return Err(Error::HypothesisViolated(format!(
                "Im(tau) = {} below the sample minimum {MIN_IM_TAU}",
                self.tau.im
            )));
        }
        if self.z.im.abs() > MAX_ABS_IM_Z {
            return Err(Error::HypothesisViolated(format!(
                "|Im(z)| = {} above the sample bound {MAX_ABS_IM_Z}",
                self.z.im.abs()
            )));
        }
        Ok(())
    }
}

impl Serialize for SamplePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SamplePoint", 2)?;
        st.serialize_field("tau", &[self.tau.re, self.tau.im])?;
        st.serialize_field("z", &[self.z.re, self.z.im])?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SamplePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Dto {
            tau: [f64; 2],
            #[serde(default)]
            z: [f64; 2],
        }
        let dto = Dto::deserialize(d)?;
        Ok(SamplePoint {
            tau: Complex64::new(dto.tau[0], dto.tau[1]),
            z: Complex64::new(dto.z[0], dto.z[1]),
        })
    }
}

/// Default sample set: both tau and -1/tau stay well inside the high-Im
/// region, so order-30 truncation tails are far below the tolerance.
pub fn default_sample_points() -> Vec<SamplePoint> {
    let taus = [
        Complex64::new(0.0, 1.0),
        Complex64::new(0.3, 1.1),
        Complex64::new(-0.25, 0.95),
    ];
    let zs = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.2, 0.0),
        Complex64::new(0.1, 0.05),
    ];
    let mut out = Vec::new();
    for tau in taus {
        for z in zs {
            out.push(SamplePoint::new(tau, z));
        }
    }
    out
}

/// The three default tau values with z = 0, for checks without an elliptic
/// variable.
pub fn default_tau_points() -> Vec<SamplePoint> {
    default_sample_points()
        .into_iter()
        .filter(|p| p.z.norm() == 0.0)
        .collect()
}

/// The default grid extended with further z-values until at least `n` points
/// are available; the S-fit for r modules consumes r^2 + 3 + r of them.
pub fn sample_points_for(n: usize) -> Vec<SamplePoint> {
    let mut points = default_sample_points();
    let taus = [
        Complex64::new(0.0, 1.0),
        Complex64::new(0.3, 1.1),
        Complex64::new(-0.25, 0.95),
    ];
    let mut k = 0u32;
    while points.len() < n {
        let z = Complex64::new(
            -0.22 + 0.017 * f64::from(k),
            0.04 - 0.013 * f64::from(k % 7),
        );
        for tau in taus {
            points.push(SamplePoint::new(tau, z));
        }
        k += 1;
    }
    points
}

/// Nine distinct tau values with z = 0. Fitting a transformation matrix from
/// z-independent data needs tau variation; the 3x3 grid of
/// `default_sample_points` repeats each tau three times and would make the
/// stability subsets singular.
pub fn default_fit_points() -> Vec<SamplePoint> {
    [
        (0.0, 1.0),
        (0.3, 1.1),
        (-0.25, 0.95),
        (0.1, 1.15),
        (-0.15, 1.05),
        (0.05, 0.9),
        (0.35, 0.95),
        (-0.2, 1.1),
        (0.2, 0.85),
    ]
    .iter()
    .map(|&(re, im)| SamplePoint::new(Complex64::new(re, im), Complex64::new(0.0, 0.0)))
    .collect()
}

/// Modular generators exercised by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gamma {
    S,
    T,
}

impl Gamma {
    pub fn apply(&self, tau: Complex64) -> Complex64 {
        match self {
            Gamma::S => -1.0 / tau,
            Gamma::T => tau + 1.0,
        }
    }

    /// Matrix entries (a, b, c, d).
    pub fn entries(&self) -> (i64, i64, i64, i64) {
        match self {
            Gamma::S => (0, -1, 1, 0),
            Gamma::T => (1, 1, 0, 1),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "S" | "s" => Ok(Gamma::S),
            "T" | "t" => Ok(Gamma::T),
            other => Err(Error::Parse(format!(
                "unknown generator '{other}' (expected S or T)"
            ))),
        }
    }
}

impl std::fmt::Display for Gamma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", if *self == Gamma::S { "S" } else { "T" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodInfo {
    pub required: i64,
    pub smallest: i64,
}

/// Structured result of one functional-equation check. Serializes to
/// { "equation", "verdict", "residuals", "fitted", "order", "tol" }.
#[derive(Debug, Clone)]
pub struct TransformReport {
    pub equation: String,
    pub points: Vec<SamplePoint>,
    pub residuals: Vec<f64>,
    pub tol: f64,
    pub order: i64,
    pub verdict: Verdict,
    /// Fitted (or exactly known) transformation matrix a_ij.
    pub matrix: Option<Vec<Vec<Complex64>>>,
    /// Exact exponent classes mod 1 behind a diagonal T-multiplier.
    pub t_exponent_classes: Option<Vec<Rat>>,
    /// Module permutation realizing the elliptic identity.
    pub permutation: Option<Vec<usize>>,
    pub period: Option<PeriodInfo>,
    /// Max entrywise deviation of the fit across disjoint point subsets.
    pub stability: Option<f64>,
}

impl TransformReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// chi(gamma) for a single-module check.
    pub fn chi(&self) -> Option<Complex64> {
        match &self.matrix {
            Some(m) if m.len() == 1 => Some(m[0][0]),
            _ => None,
        }
    }
}

impl Serialize for TransformReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut fitted = serde_json::Map::new();
        if let Some(m) = &self.matrix {
            let rows: Vec<Vec<[f64; 2]>> = m
                .iter()
                .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
                .collect();
            fitted.insert("a".into(), serde_json::json!(rows));
            if m.len() == 1 {
                fitted.insert("chi".into(), serde_json::json!([m[0][0].re, m[0][0].im]));
            }
        }
        if let Some(cls) = &self.t_exponent_classes {
            let strs: Vec<String> = cls.iter().map(rat_to_string).collect();
            fitted.insert("t_exponent_classes".into(), serde_json::json!(strs));
        }
        if let Some(p) = &self.permutation {
            fitted.insert("permutation".into(), serde_json::json!(p));
        }
        if let Some(p) = &self.period {
            fitted.insert("period_required".into(), serde_json::json!(p.required));
            fitted.insert("period_smallest".into(), serde_json::json!(p.smallest));
        }
        if let Some(d) = self.stability {
            fitted.insert("stability".into(), serde_json::json!(d));
        }
        let mut st = s.serialize_struct("TransformReport", 6)?;
        st.serialize_field("equation", &self.equation)?;
        st.serialize_field(
            "verdict",
            if self.verdict == Verdict::Pass { "pass" } else { "fail" },
        )?;
        st.serialize_field("residuals", &self.residuals)?;
        st.serialize_field("fitted", &fitted)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("tol", &self.tol)?;
        st.end()
    }
}

/// Evaluate a Jacobi series at a validated sample point; errors out when the
/// tail estimate exceeds the precision-warning threshold.
pub fn eval_jacobi(series: &JacobiSeries, point: &SamplePoint) -> Result<NumericEval> {
    point.validate()?;
    let ev = series.eval(point.tau, point.z);
    if ev.error > PRECISION_WARN {
        return Err(Error::PrecisionLoss { estimate: ev.error, limit: PRECISION_WARN });
    }
    Ok(ev)
}

fn budget(tol: f64, errors: f64) -> f64 {
    tol.max(10.0 * errors)
}

/// exp(2 pi i w) for real w.
fn phase(w: f64) -> Complex64 {
    let a = 2.0 * std::f64::consts::PI * w;
    Complex64::new(a.cos(), a.sin())
}

/// Solve the least-squares system A x = b (complex) via normal equations.
fn least_squares(a: &[Vec<Complex64>], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let rows = a.len();
    let cols = a[0].len();
    assert_eq!(rows, b.len());
    let mut m = vec![vec![Complex64::new(0.0, 0.0); cols + 1]; cols];
    for i in 0..cols {
        for j in 0..cols {
            for p in 0..rows {
                m[i][j] += a[p][i].conj() * a[p][j];
            }
        }
        for p in 0..rows {
            m[i][cols] += a[p][i].conj() * b[p];
        }
    }
    // Gaussian elimination with partial pivoting
    for c in 0..cols {
        let (pivot, mag) = (c..cols)
            .map(|r| (r, m[r][c].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if mag < 1e-14 {
            // e.g. conjugate cosets can carry identical characters, making
            // the matrix unrecoverable from character values alone
            return Err(Error::HypothesisViolated(
                "sample matrix is singular: module characters are linearly dependent \
                 at the sample points, so the transformation matrix cannot be fitted"
                    .into(),
            ));
        }
        m.swap(c, pivot);
        let inv = 1.0 / m[c][c];
        for j in c..=cols {
            m[c][j] *= inv;
        }
        for r in 0..cols {
            if r != c && m[r][c].norm() > 0.0 {
                let f = m[r][c];
                for j in c..=cols {
                    let v = m[c][j];
                    m[r][j] -= f * v;
                }
            }
        }
    }
    Ok((0..cols).map(|i| m[i][cols]).collect())
}

fn common_weight(series: &[JacobiSeries]) -> Result<i64> {
    let k = series[0]
        .weight_i64()
        .ok_or_else(|| Error::HypothesisViolated("numeric checks need integer weight".into()))?;
    for s in series {
        if s.weight_i64() != Some(k) {
            return Err(Error::HypothesisViolated("modules must share one weight".into()));
        }
    }
    Ok(k)
}

fn common_index(series: &[JacobiSeries]) -> Result<Rat> {
    let m = series[0].index().clone();
    for s in series {
        if s.index() != &m {
            return Err(Error::HypothesisViolated("modules must share one index".into()));
        }
    }
    Ok(m)
}

fn order_of(series: &[JacobiSeries]) -> i64 {
    series
        .iter()
        .filter_map(|s| s.trunc().map(|t| t / s.den()))
        .min()
        .unwrap_or(0)
}

/// Verify the modular transformation law of a vector of Jacobi series under
/// S or T. For T the diagonal multiplier is read off exactly from the
/// exponent classes and then confirmed numerically; for S the matrix
/// a_ij(S) is fitted by least squares on r^2 + 3 points, required to be
/// stable on a disjoint subset, and verified at every point.
pub fn check_modular_transform(
    series: &[JacobiSeries],
    gamma: Gamma,
    points: &[SamplePoint],
    tol: f64,
) -> Result<TransformReport> {
    if series.is_empty() {
        return Err(Error::HypothesisViolated("no modules supplied".into()));
    }
    let r = series.len();
    let k = common_weight(series)?;
    let m = common_index(series)?;
    let m_f = crate::rat::rat_to_f64(&m);
    for p in points {
        p.validate()?;
        if gamma == Gamma::S && (-1.0 / p.tau).im < MIN_IM_TAU {
            return Err(Error::HypothesisViolated(format!(
                "Im(S tau) = {} below the sample minimum for tau = {}",
                (-1.0 / p.tau).im,
                p.tau
            )));
        }
    }
    let equation = format!("modular-{gamma}");
    let order = order_of(series);

    match gamma {
        Gamma::T => {
            let mut classes = Vec::with_capacity(r);
            for s in series {
                let cls = s.exponent_class_mod_1().ok_or_else(|| {
                    Error::HypothesisViolated(
                        "exponents are not in a single class mod 1; T-multiplier is not diagonal"
                            .into(),
                    )
                })?;
                classes.push(cls);
            }
            let mut matrix = vec![vec![Complex64::new(0.0, 0.0); r]; r];
            for (i, cls) in classes.iter().enumerate() {
                matrix[i][i] = phase(crate::rat::rat_to_f64(cls));
            }
            let mut residuals = Vec::new();
            let mut pass = true;
            for p in points {
                for (i, s) in series.iter().enumerate() {
                    let lhs = s.eval(p.tau + 1.0, p.z);
                    let rhs = s.eval(p.tau, p.z);
                    let resid = (lhs.value - matrix[i][i] * rhs.value).norm();
                    pass &= resid < budget(tol, lhs.error + rhs.error);
                    residuals.push(resid);
                }
            }
            Ok(TransformReport {
                equation,
                points: points.to_vec(),
                residuals,
                tol,
                order,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
                matrix: Some(matrix),
                t_exponent_classes: Some(classes),
                permutation: None,
                period: None,
                stability: Some(0.0),
            })
        }
        Gamma::S => {
            let n_fit = r * r + 3;
            if points.len() < n_fit + r {
                return Err(Error::HypothesisViolated(format!(
                    "S-fit needs at least {} points ({} supplied)",
                    n_fit + r,
                    points.len()
                )));
            }
            // tabulate J_j(tau, z), the transformed values, and the
            // multiplier-stripped right-hand sides
            let mut rows: Vec<Vec<Complex64>> = Vec::new();
            let mut row_errs: Vec<f64> = Vec::new();
            let mut lhs_vals: Vec<Vec<Complex64>> = vec![Vec::new(); r];
            let mut lhs_errs: Vec<Vec<f64>> = vec![Vec::new(); r];
            let mut targets: Vec<Vec<Complex64>> = vec![Vec::new(); r];
            let automorphy = |p: &SamplePoint| -> Complex64 {
                p.tau.powi(k as i32)
                    * (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * m_f * p.z * p.z / p.tau)
                        .exp()
            };
            for p in points {
                let mut row = Vec::with_capacity(r);
                let mut err = 0.0;
                for s in series {
                    let ev = s.eval(p.tau, p.z);
                    row.push(ev.value);
                    err += ev.error;
                }
                rows.push(row);
                row_errs.push(err);
                let s_tau = -1.0 / p.tau;
                let s_z = p.z / p.tau;
                let auto = automorphy(p);
                for (i, s) in series.iter().enumerate() {
                    let ev = s.eval(s_tau, s_z);
                    lhs_vals[i].push(ev.value);
                    lhs_errs[i].push(ev.error);
                    targets[i].push(ev.value / auto);
                }
            }
            let fit = |range: std::ops::Range<usize>| -> Result<Vec<Vec<Complex64>>> {
                let a: Vec<Vec<Complex64>> = range.clone().map(|p| rows[p].clone()).collect();
                let mut mat = Vec::with_capacity(r);
                for t in targets.iter() {
                    let b: Vec<Complex64> = range.clone().map(|p| t[p]).collect();
                    mat.push(least_squares(&a, &b)?);
                }
                Ok(mat)
            };
            let fit_a = fit(0..n_fit)?;
            let fit_b = fit(n_fit..points.len())?;
            let mut stability = 0.0f64;
            for i in 0..r {
                for j in 0..r {
                    stability = stability.max((fit_a[i][j] - fit_b[i][j]).norm());
                }
            }
            let matrix = fit(0..points.len())?;
            let mut residuals = Vec::new();
            let mut pass = stability < tol;
            for (pi, p) in points.iter().enumerate() {
                let auto = automorphy(p);
                for i in 0..r {
                    let mut rhs = Complex64::new(0.0, 0.0);
                    for j in 0..r {
                        rhs += matrix[i][j] * rows[pi][j];
                    }
                    let resid = (lhs_vals[i][pi] - auto * rhs).norm();
                    let errs = lhs_errs[i][pi] + auto.norm() * row_errs[pi];
                    pass &= resid < budget(tol, errs);
                    residuals.push(resid);
                }
            }
            Ok(TransformReport {
                equation,
                points: points.to_vec(),
                residuals,
                tol,
                order,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
                matrix: Some(matrix),
                t_exponent_classes: None,
                permutation: None,
                period: None,
                stability: Some(stability),
            })
        }
    }
}

/// Verify the elliptic transformation law numerically for an integer shift
/// (u, v), detecting the module permutation empirically (identity first).
pub fn check_elliptic_transform(
    series: &[JacobiSeries],
    u: i64,
    v: i64,
    points: &[SamplePoint],
    tol: f64,
) -> Result<TransformReport> {
    if series.is_empty() {
        return Err(Error::HypothesisViolated("no modules supplied".into()));
    }
    let r = series.len();
    let m = common_index(series)?;
    let m_f = crate::rat::rat_to_f64(&m);
    for p in points {
        p.validate()?;
    }
    let order = order_of(series);
    let multiplier = |p: &SamplePoint| -> Complex64 {
        // e^(-2 pi i m (u^2 tau + 2 u z))
        (Complex64::new(0.0, -2.0 * std::f64::consts::PI)
            * m_f
            * ((u * u) as f64 * p.tau + 2.0 * (u as f64) * p.z))
            .exp()
    };

    // worst-case residual for every (source, candidate target) pair
    let mut worst = vec![vec![0.0f64; r]; r];
    let mut budgets = vec![vec![f64::INFINITY; r]; r];
    for p in points {
        let shifted_z = p.z + (u as f64) * p.tau + (v as f64);
        let mult = multiplier(p);
        for (i, s) in series.iter().enumerate() {
            let lhs = s.eval(p.tau, shifted_z);
            for (j, t) in series.iter().enumerate() {
                let rhs = t.eval(p.tau, p.z);
                let resid = (lhs.value - mult * rhs.value).norm();
                worst[i][j] = worst[i][j].max(resid);
                budgets[i][j] = budgets[i][j].min(budget(tol, lhs.error + mult.norm() * rhs.error));
            }
        }
    }
    let identity_ok = (0..r).all(|i| worst[i][i] < budgets[i][i]);
    let perm: Vec<usize> = if identity_ok {
        (0..r).collect()
    } else {
        let mut used = vec![false; r];
        let mut perm = Vec::with_capacity(r);
        for i in 0..r {
            let best = (0..r)
                .filter(|j| !used[*j] && worst[i][*j] < budgets[i][*j])
                .min_by(|a, b| worst[i][*a].total_cmp(&worst[i][*b]));
            match best {
                Some(j) => {
                    used[j] = true;
                    perm.push(j);
                }
                None => return Err(Error::PermutationMismatch),
            }
        }
        perm
    };
    let mut residuals = Vec::new();
    for p in points {
        let shifted_z = p.z + (u as f64) * p.tau + (v as f64);
        let mult = multiplier(p);
        for (i, s) in series.iter().enumerate() {
            let lhs = s.eval(p.tau, shifted_z);
            let rhs = series[perm[i]].eval(p.tau, p.z);
            residuals.push((lhs.value - mult * rhs.value).norm());
        }
    }
    let pass = (0..r).all(|i| worst[i][perm[i]] < budgets[i][perm[i]]);
    Ok(TransformReport {
        equation: format!("elliptic-u{u}-v{v}"),
        points: points.to_vec(),
        residuals,
        tol,
        order,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        matrix: None,
        t_exponent_classes: None,
        permutation: Some(perm),
        period: None,
        stability: None,
    })
}

/// Verify that the S-transform of the exponential-automorphism trace equals
/// the twisted-sector character, and report the exact translation period of
/// the trace (it must divide 24 R).
pub fn check_twisted_s_transform(
    lattice: &EvenLattice,
    h: &LatticeVector,
    r_order: i64,
    points: &[SamplePoint],
    tol: f64,
    order: i64,
) -> Result<TransformReport> {
    if !lattice.is_unimodular() {
        return Err(Error::HypothesisViolated(
            "twisted S-transform check needs a unimodular lattice".into(),
        ));
    }
    let trace = automorphism_trace(lattice, h, r_order, order)?;
    let twist = h.scale(&(rat_int(1) / rat_int(r_order)));
    let twisted = twisted_character(lattice, &twist, order)?;

    let required = 24 * r_order;
    let smallest = trace.translation_period();
    let period_ok = required % smallest == 0;

    let mut residuals = Vec::new();
    let mut pass = period_ok;
    for p in points {
        p.validate()?;
        let s_tau = -1.0 / p.tau;
        if s_tau.im < MIN_IM_TAU {
            return Err(Error::HypothesisViolated(format!(
                "Im(S tau) = {} below the sample minimum",
                s_tau.im
            )));
        }
        let lhs = trace.eval(s_tau);
        let rhs = twisted.eval(p.tau);
        let resid = (lhs.value - rhs.value).norm();
        pass &= resid < budget(tol, lhs.error + rhs.error);
        residuals.push(resid);
    }
    Ok(TransformReport {
        equation: format!("twisted-s-transform-R{r_order}"),
        points: points.to_vec(),
        residuals,
        tol,
        order,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        matrix: None,
        t_exponent_classes: None,
        permutation: None,
        period: Some(PeriodInfo { required, smallest }),
        stability: None,
    })
}

/// Verify the two-parameter trace recursion
/// Phi_i(u, v, gamma tau) = sum_j a_ij(gamma) Phi_j(au + cv, bu + dv, tau)
/// at the given points, reusing a transformation matrix fitted elsewhere.
/// This is the strongest cross-check that the fitted matrix does not depend
/// on (u, v).
#[allow(clippy::too_many_arguments)]
pub fn check_phi_recursion(
    lattice: &EvenLattice,
    u: &LatticeVector,
    v: &LatticeVector,
    gamma: Gamma,
    matrix: &[Vec<Complex64>],
    points: &[SamplePoint],
    tol: f64,
    order: i64,
) -> Result<TransformReport> {
    let modules = lattice.discriminant_group();
    let r = modules.len();
    if matrix.len() != r || matrix.iter().any(|row| row.len() != r) {
        return Err(Error::HypothesisViolated(format!(
            "matrix must be {r} x {r} for this lattice"
        )));
    }
    let (a, b, c, d) = gamma.entries();
    let mapped_u = u.scale(&rat_int(a)).add(&v.scale(&rat_int(c)));
    let mapped_v = u.scale(&rat_int(b)).add(&v.scale(&rat_int(d)));

    let lhs_eval: Vec<PhiEvaluator> = modules
        .iter()
        .map(|m| phi_evaluator(lattice, m, u, v, order))
        .collect::<Result<_>>()?;
    let rhs_eval: Vec<PhiEvaluator> = modules
        .iter()
        .map(|m| phi_evaluator(lattice, m, &mapped_u, &mapped_v, order))
        .collect::<Result<_>>()?;

    let mut residuals = Vec::new();
    let mut pass = true;
    for p in points {
        p.validate()?;
        let g_tau = gamma.apply(p.tau);
        if g_tau.im < MIN_IM_TAU {
            return Err(Error::HypothesisViolated(format!(
                "Im(gamma tau) = {} below the sample minimum",
                g_tau.im
            )));
        }
        for i in 0..r {
            let lhs = lhs_eval[i].eval(g_tau);
            let mut rhs = Complex64::new(0.0, 0.0);
            let mut err = lhs.error;
            for j in 0..r {
                let ev = rhs_eval[j].eval(p.tau);
                rhs += matrix[i][j] * ev.value;
                err += matrix[i][j].norm() * ev.error;
            }
            let resid = (lhs.value - rhs).norm();
            pass &= resid < budget(tol, err);
            residuals.push(resid);
        }
    }
    Ok(TransformReport {
        equation: format!("phi-recursion-{gamma}"),
        points: points.to_vec(),
        residuals,
        tol,
        order,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        matrix: Some(matrix.to_vec()),
        t_exponent_classes: None,
        permutation: None,
        period: None,
        stability: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{phi_0_1, phi_minus2_1};
    use crate::lattice::{character, CosetModule};
    use crate::rat::rat;
    use num::Zero;

    fn e8_char(order: i64) -> JacobiSeries {
        let e8 = EvenLattice::e8();
        let vac = CosetModule {
            representative: LatticeVector::zero(8),
            conformal_weight: Rat::zero(),
        };
        character(&e8, &vac, &LatticeVector::from_i64(&[1, 0, 0, 0, 0, 0, 0, 0]), order)
            .unwrap()
    }

    #[test]
    fn sample_point_validation() {
        assert!(SamplePoint::new(Complex64::new(0.0, 1.0), Complex64::new(0.2, 0.0))
            .validate()
            .is_ok());
        assert!(SamplePoint::new(Complex64::new(0.0, 0.5), Complex64::new(0.0, 0.0))
            .validate()
            .is_err());
        assert!(SamplePoint::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.7))
            .validate()
            .is_err());
        for p in default_sample_points().into_iter().chain(default_fit_points()) {
            p.validate().unwrap();
            assert!((-1.0 / p.tau).im >= MIN_IM_TAU, "tau = {}", p.tau);
        }
        assert_eq!(default_tau_points().len(), 3);
        assert_eq!(default_fit_points().len(), 9);
    }

    #[test]
    fn generators_pass_modular_checks() {
        // weak Jacobi forms on the full group: chi(S) = chi(T) = 1
        let points = default_sample_points();
        for gen in [phi_minus2_1(12), phi_0_1(12)] {
            let series = [gen];
            let t = check_modular_transform(&series, Gamma::T, &points, 1e-6).unwrap();
            assert!(t.passed(), "T failed: residuals {:?}", t.residuals);
            assert_eq!(t.t_exponent_classes.as_ref().unwrap()[0], rat(0, 1));
            let s = check_modular_transform(&series, Gamma::S, &points, 1e-6).unwrap();
            assert!(s.passed(), "S failed: residuals {:?}", s.residuals);
            let chi = s.chi().unwrap();
            assert!((chi - Complex64::new(1.0, 0.0)).norm() < 1e-6, "chi(S) = {chi}");
        }
    }

    #[test]
    fn e8_character_t_class() {
        let series = [e8_char(10)];
        let rep =
            check_modular_transform(&series, Gamma::T, &default_sample_points(), 1e-6).unwrap();
        assert!(rep.passed());
        let cls = &rep.t_exponent_classes.as_ref().unwrap()[0];
        // exponents are -1/3 mod 1, i.e. class 2/3; chi(T)^3 = 1 exactly
        assert_eq!(cls, &rat(2, 3));
        assert!((cls * rat_int(3)).is_integer());
    }

    #[test]
    fn elliptic_shift_of_generators() {
        let points = default_sample_points();
        let series = [phi_0_1(12)];
        // v-shift is exact periodicity; u = 1 exercises the multiplier
        for (u, v) in [(0i64, 1i64), (1, 0)] {
            let rep = check_elliptic_transform(&series, u, v, &points, 1e-6).unwrap();
            assert!(rep.passed(), "u={u} v={v}: {:?}", rep.residuals);
            assert_eq!(rep.permutation.as_ref().unwrap(), &vec![0]);
        }
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0)],
        ];
        let x_true = [Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0)];
        let b: Vec<Complex64> = a
            .iter()
            .map(|row| row[0] * x_true[0] + row[1] * x_true[1])
            .collect();
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - x_true[0]).norm() < 1e-12);
        assert!((x[1] - x_true[1]).norm() < 1e-12);
    }

    #[test]
    fn report_json_schema() {
        let series = [phi_0_1(8)];
        let rep =
            check_modular_transform(&series, Gamma::T, &default_sample_points(), 1e-6).unwrap();
        let js = serde_json::to_value(&rep).unwrap();
        for key in ["equation", "verdict", "residuals", "fitted", "order", "tol"] {
            assert!(js.get(key).is_some(), "missing {key}");
        }
        assert_eq!(js["verdict"], "pass");
        assert_eq!(js["order"], 8);
    }

    #[test]
    fn eval_jacobi_flags_precision_loss() {
        // order-1 truncation at the minimum Im tau leaves a visible tail
        let series = phi_0_1(1);
        let p = SamplePoint::new(Complex64::new(0.0, MIN_IM_TAU), Complex64::new(0.2, 0.0));
        match eval_jacobi(&series, &p) {
            Err(Error::PrecisionLoss { .. }) => {}
            other => panic!("expected precision loss, got {other:?}"),
        }
        let fine = eval_jacobi(&phi_0_1(12), &p).unwrap();
        assert!(fine.error < 1e-9);
    }
}
