//! Characters of lattice VOAs and their irreducible modules, twisted-sector
//! characters, trace functions of exponential automorphisms, and the
//! two-parameter trace evaluator behind the modular recursion checks.
//!
//! For the module attached to the coset L + gamma, the character with
//! elliptic variable in the h-direction is
//!
//!   (sum over lambda in L+gamma of q^(<l,l>/2) zeta^(<h,lambda>)) / eta^rank,
//!
//! a Jacobi series of weight 0 and index <h,h>/2. Everything before the
//! final numeric evaluation is exact.

use std::collections::BTreeMap;

use num::complex::Complex64;
use num::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::jacobi::JacobiSeries;
use crate::lattice::{CosetModule, EvenLattice, LatticeVector};
use crate::qseries::{q_power, NumericEval, QSeries, EXP_DEN};
use crate::rat::{isqrt_i128, lcm_i64, rat, rat_floor, rat_int, rat_to_string, Rat};

/// Twist vectors of order beyond this are rejected as effectively infinite.
pub const MAX_TWIST_ORDER: i64 = 1_000_000;

fn check_dim(lattice: &EvenLattice, v: &LatticeVector, what: &str) -> Result<()> {
    if v.dim() != lattice.rank() {
        return Err(Error::Parse(format!(
            "{what} has dimension {}, lattice rank is {}",
            v.dim(),
            lattice.rank()
        )));
    }
    Ok(())
}

/// The coset theta series with elliptic variable in the h-direction:
/// sum over L+gamma of q^(<l,l>/2) zeta^(<h,l>), weight rank/2, index <h,h>/2.
pub fn theta_series(
    lattice: &EvenLattice,
    module: &CosetModule,
    h: &LatticeVector,
    order: i64,
) -> Result<JacobiSeries> {
    check_dim(lattice, h, "h")?;
    check_dim(lattice, &module.representative, "coset representative")?;
    check_character_precondition(lattice, module, h)?;

    let rank = lattice.rank() as i64;
    let gamma = &module.representative;
    let d = gamma.denominator()?;
    let den = lcm_i64(EXP_DEN, 2 * d * d);

    // cover every exponent <l,l>/2 <= order + rank/24
    let bound = rat_int(2 * order) + rat(rank, 12);
    let bound_scaled = rat_floor(&(&bound * rat_int(d * d)))
        .to_i128()
        .ok_or_else(|| Error::Parse("truncation order too large".into()))?;

    let w = lattice.gram_times(h);
    let w_int: Vec<i64> = w
        .iter()
        .map(|c| crate::rat::numer_i64(c).expect("precondition gives integral G*h"))
        .collect();
    let hh = lattice.norm(h);

    // dense accumulation grid: norm_scaled in 0..=bound_scaled,
    // |r_num| <= rmax by Cauchy-Schwarz (w^T mu)^2 <= <h,h> * norm_scaled
    let ns_max = bound_scaled.max(0) as usize;
    let rmax = isqrt_i128(
        rat_floor(&(&hh * rat_int(bound_scaled as i64)))
            .to_i128()
            .unwrap_or(0)
            .max(0),
    ) as usize;
    let width = 2 * rmax + 1;
    let mut counts = vec![0i64; (ns_max + 1) * width];

    lattice.visit_coset(gamma, &bound, &mut |mu, norm_scaled, dd| {
        debug_assert_eq!(dd, d);
        let mut r_num: i128 = 0;
        for (wi, mi) in w_int.iter().zip(mu) {
            r_num += (*wi as i128) * (*mi as i128);
        }
        let idx = norm_scaled as usize * width + (r_num + rmax as i128) as usize;
        counts[idx] += 1;
    })?;

    let mut layers: BTreeMap<i64, crate::jacobi::Layer> = BTreeMap::new();
    let key_factor = den / (2 * d * d);
    for ns in 0..=ns_max {
        for off in 0..width {
            let c = counts[ns * width + off];
            if c == 0 {
                continue;
            }
            let r_num = off as i64 - rmax as i64;
            assert!(r_num % d == 0, "pairing <h,lambda> must be integral");
            layers
                .entry(ns as i64 * key_factor)
                .or_default()
                .insert(r_num / d, rat_int(c));
        }
    }
    let trunc = rat_floor(&(&bound / rat_int(2) * rat_int(den)))
        .to_i64()
        .unwrap()
        + 1;
    Ok(JacobiSeries::from_coeffs(
        rat(rank, 2),
        hh / rat_int(2),
        den,
        layers,
        Some(trunc),
    ))
}

fn check_character_precondition(
    lattice: &EvenLattice,
    module: &CosetModule,
    h: &LatticeVector,
) -> Result<()> {
    if module.is_vacuum() {
        // only the vacuum character is requested: <h, L> in Z suffices
        if !lattice.dual_contains(h) {
            return Err(Error::IntegralityViolation(format!(
                "h = {h} does not pair integrally with the lattice"
            )));
        }
    } else if !lattice.contains(h) {
        return Err(Error::IntegralityViolation(format!(
            "h = {h} must lie in the lattice when non-vacuum modules are involved"
        )));
    }
    Ok(())
}

/// Character of the module M attached to `module`, with elliptic variable in
/// the h-direction: the coset theta over eta^rank. Weight 0, index <h,h>/2;
/// q-exponents lie in (conformal weight) - rank/24 + Z>=0.
pub fn character(
    lattice: &EvenLattice,
    module: &CosetModule,
    h: &LatticeVector,
    order: i64,
) -> Result<JacobiSeries> {
    let theta = theta_series(lattice, module, h, order)?;
    let rank = lattice.rank() as i64;
    let eta_inv = crate::qseries::eta(order + 2).pow(-rank)?;
    let eta_wrapped = JacobiSeries::from_qseries(&eta_inv, rat(-rank, 2), Rat::zero());
    Ok(theta.mul(&eta_wrapped).truncate(order * theta.den()))
}

/// Report of the index-integrality check: <h,h>/2 must be congruent mod Z to
/// some conformal weight, and must be an integer when L is unimodular.
#[derive(Debug, Clone)]
pub struct IndexReport {
    pub half_norm: Rat,
    pub unimodular: bool,
    pub integral: bool,
    pub matched_coset: Option<usize>,
    pub conformal_weights: Vec<Rat>,
    pub passed: bool,
}

impl std::fmt::Display for IndexReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "<h,h>/2 = {} ({}integral), matched coset: {:?}, {}",
            rat_to_string(&self.half_norm),
            if self.integral { "" } else { "not " },
            self.matched_coset,
            if self.passed { "pass" } else { "FAIL" }
        )
    }
}

/// Check <h,h>/2 against the conformal weights of the discriminant group.
pub fn index_integrality(lattice: &EvenLattice, h: &LatticeVector) -> Result<IndexReport> {
    check_dim(lattice, h, "h")?;
    if !lattice.dual_contains(h) {
        return Err(Error::IntegralityViolation(format!(
            "h = {h} does not pair integrally with the lattice"
        )));
    }
    let half_norm = lattice.norm(h) / rat_int(2);
    let unimodular = lattice.is_unimodular();
    let integral = half_norm.is_integer();
    let cosets = lattice.discriminant_group();
    let conformal_weights: Vec<Rat> = cosets.iter().map(|c| c.conformal_weight.clone()).collect();
    let matched_coset = conformal_weights
        .iter()
        .position(|lam| (&half_norm - lam).is_integer());
    let passed = if unimodular { integral } else { matched_coset.is_some() };
    Ok(IndexReport { half_norm, unimodular, integral, matched_coset, conformal_weights, passed })
}

/// Twisted-sector character for the automorphism attached to `a`: the theta
/// series of the shifted coset L + a over eta^rank. Exponents live on the
/// lcm(24, 2R^2) grid where R is the order of the twist.
pub fn twisted_character(
    lattice: &EvenLattice,
    a: &LatticeVector,
    order: i64,
) -> Result<QSeries> {
    check_dim(lattice, a, "a")?;
    let r_order = a.denominator()?;
    if r_order > MAX_TWIST_ORDER {
        return Err(Error::InfiniteOrder(MAX_TWIST_ORDER as u64));
    }
    let rank = lattice.rank() as i64;
    let den = lcm_i64(EXP_DEN, 2 * r_order * r_order);
    let bound = rat_int(2 * order) + rat(rank, 12);
    let bound_scaled = rat_floor(&(&bound * rat_int(r_order * r_order)))
        .to_i128()
        .ok_or_else(|| Error::Parse("truncation order too large".into()))?;
    let mut counts = vec![0i64; bound_scaled.max(0) as usize + 1];
    lattice.visit_coset(a, &bound, &mut |_mu, norm_scaled, _d| {
        counts[norm_scaled as usize] += 1;
    })?;
    let key_factor = den / (2 * r_order * r_order);
    let mut coeffs = BTreeMap::new();
    for (ns, c) in counts.iter().enumerate() {
        if *c != 0 {
            coeffs.insert(ns as i64 * key_factor, rat_int(*c));
        }
    }
    let trunc = rat_floor(&(&bound / rat_int(2) * rat_int(den))).to_i64().unwrap() + 1;
    let theta = QSeries::from_coeffs(den, coeffs, Some(trunc));
    let eta_inv = crate::qseries::eta(order + 2).pow(-rank)?;
    Ok(theta.mul(&eta_inv).truncate(order * den))
}

/// q-series with coefficients in the R-th cyclotomic field, stored as exact
/// rational vectors indexed by residue class mod R.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclotomicSeries {
    r_order: i64,
    den: i64,
    /// key -> coefficient vector: coeffs[j] multiplies e^(2 pi i j / R)
    coeffs: BTreeMap<i64, Vec<Rat>>,
    trunc: Option<i64>,
}

impl CyclotomicSeries {
    /// Specialize a Jacobi series at zeta = e^(2 pi i / R): group the
    /// zeta-exponents by residue class mod R.
    pub fn from_character(series: &JacobiSeries, r_order: i64) -> Result<Self> {
        if r_order < 1 {
            return Err(Error::HypothesisViolated("R must be >= 1".into()));
        }
        let mut coeffs: BTreeMap<i64, Vec<Rat>> = BTreeMap::new();
        for (key, layer) in series.layers() {
            let v = coeffs
                .entry(*key)
                .or_insert_with(|| vec![Rat::zero(); r_order as usize]);
            for (r, c) in layer {
                v[r.rem_euclid(r_order) as usize] += c;
            }
        }
        coeffs.retain(|_, v| v.iter().any(|c| !c.is_zero()));
        Ok(CyclotomicSeries { r_order, den: series.den(), coeffs, trunc: series.trunc() })
    }

    pub fn r_order(&self) -> i64 {
        self.r_order
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Vec<Rat>> {
        &self.coeffs
    }

    /// Residue-class vector at q^(key/den), zero vector if absent.
    pub fn residue_vector(&self, key: i64) -> Vec<Rat> {
        if let Some(t) = self.trunc {
            assert!(key < t, "coefficient at key {key} unknown: truncated at {t}");
        }
        self.coeffs
            .get(&key)
            .cloned()
            .unwrap_or_else(|| vec![Rat::zero(); self.r_order as usize])
    }

    /// Smallest positive N with every exponent times N integral.
    pub fn translation_period(&self) -> i64 {
        let mut period = 1i64;
        for k in self.coeffs.keys() {
            let g = num::integer::gcd(k.rem_euclid(self.den), self.den);
            period = lcm_i64(period, self.den / g);
        }
        period
    }

    pub fn eval(&self, tau: Complex64) -> NumericEval {
        assert!(tau.im > 0.0, "evaluation requires Im(tau) > 0");
        let omega = |j: usize| q_power(Complex64::new(1.0, 0.0), j as i64, self.r_order);
        let mut value = Complex64::new(0.0, 0.0);
        for (key, v) in &self.coeffs {
            let mut c = Complex64::new(0.0, 0.0);
            for (j, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    c += crate::qseries::rat_c64(x) * omega(j);
                }
            }
            value += c * q_power(tau, *key, self.den);
        }
        let error = match self.trunc {
            None => 0.0,
            Some(t) => {
                let qabs = (-2.0 * std::f64::consts::PI * tau.im).exp();
                let geo = 1.0 / (1.0 - qabs);
                match self.coeffs.iter().next_back() {
                    Some((key, v)) => {
                        let mag: f64 = v
                            .iter()
                            .map(|x| crate::rat::rat_to_f64(&x.abs()))
                            .sum();
                        mag * qabs.powf(*key as f64 / self.den as f64) * geo
                    }
                    None => qabs.powf(t as f64 / self.den as f64) * geo,
                }
            }
        };
        NumericEval { value, error }
    }
}

/// Trace of g = e^(2 pi i h(0)/R) on the VOA: the specialization of the
/// vacuum character at zeta = e^(2 pi i / R), kept exact over the R-th
/// cyclotomic field.
pub fn automorphism_trace(
    lattice: &EvenLattice,
    h: &LatticeVector,
    r_order: i64,
    order: i64,
) -> Result<CyclotomicSeries> {
    check_dim(lattice, h, "h")?;
    if !lattice.contains(h) {
        return Err(Error::IntegralityViolation(format!("h = {h} must lie in the lattice")));
    }
    if r_order < 1 {
        return Err(Error::HypothesisViolated("R must be >= 1".into()));
    }
    let vacuum = CosetModule {
        representative: LatticeVector::zero(lattice.rank()),
        conformal_weight: Rat::zero(),
    };
    let chi = character(lattice, &vacuum, h, order)?;
    CyclotomicSeries::from_character(&chi, r_order)
}

/// Exact data of the two-parameter trace
/// Tr_M e^(2 pi i(v(0) + <u,v>/2)) q^(L(0) + u(0) + <u,u>/2 - c/24):
/// a finite table of (theta exponent, phase) pairs with multiplicities, plus
/// the eta^(-rank) factor applied at evaluation time.
#[derive(Debug, Clone)]
pub struct PhiEvaluator {
    /// (norm_scaled, phase numerator) -> multiplicity; the theta exponent is
    /// norm_scaled / q_den and the phase is e^(2 pi i phase_num / phase_den).
    terms: BTreeMap<(i64, i64), i64>,
    q_den: i64,
    phase_den: i64,
    rank: i64,
    /// exponents below trunc_key / q_den are complete
    trunc_key: i64,
    eta_order: i64,
}

impl PhiEvaluator {
    pub fn table(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.terms
    }

    pub fn q_den(&self) -> i64 {
        self.q_den
    }

    pub fn phase_den(&self) -> i64 {
        self.phase_den
    }

    /// Exponents of the theta table are complete below this bound.
    pub fn trunc_exponent(&self) -> Rat {
        rat(self.trunc_key, self.q_den)
    }

    /// Lowest q-exponent of the full trace, including the eta prefactor.
    pub fn min_exponent(&self) -> Option<Rat> {
        self.terms
            .keys()
            .map(|(ns, _)| rat(*ns, self.q_den))
            .min()
            .map(|e| e - rat(self.rank, 24))
    }

    pub fn eval(&self, tau: Complex64) -> NumericEval {
        assert!(tau.im > 0.0, "evaluation requires Im(tau) > 0");
        let mut theta = Complex64::new(0.0, 0.0);
        let mut last_key: Option<i64> = None;
        let mut last_mag = 0.0;
        for ((ns, phase), count) in &self.terms {
            let term = q_power(tau, *ns, self.q_den)
                * q_power(Complex64::new(1.0, 0.0), *phase, self.phase_den)
                * (*count as f64);
            theta += term;
            if last_key != Some(*ns) {
                if last_key.is_some_and(|k| k < *ns) {
                    last_mag = 0.0;
                }
                last_key = Some(*ns);
            }
            last_mag += term.norm();
        }
        let eta = crate::qseries::eta(self.eta_order).eval(tau);
        let eta_pow = eta.value.powi(-self.rank as i32);
        let value = theta * eta_pow;
        let qabs = (-2.0 * std::f64::consts::PI * tau.im).exp();
        let geo = 1.0 / (1.0 - qabs);
        let theta_err = last_mag * geo;
        let eta_rel = (self.rank as f64) * eta.error / eta.value.norm().max(f64::MIN_POSITIVE);
        let error = theta_err * eta_pow.norm() + value.norm() * eta_rel;
        NumericEval { value, error }
    }
}

/// Build the evaluator for the module attached to `module` and rational
/// vectors u, v. Exponents complete through q^order.
pub fn phi_evaluator(
    lattice: &EvenLattice,
    module: &CosetModule,
    u: &LatticeVector,
    v: &LatticeVector,
    order: i64,
) -> Result<PhiEvaluator> {
    check_dim(lattice, u, "u")?;
    check_dim(lattice, v, "v")?;
    check_dim(lattice, &module.representative, "coset representative")?;
    let rank = lattice.rank() as i64;

    // complete the square: exponent <l,l>/2 + <u,l> + <u,u>/2 = <nu,nu>/2
    // with nu = l + u running over L + (gamma + u)
    let shift = module.representative.add(u);
    let d = shift.denominator()?;
    let q_den = 2 * d * d;

    // phase: <v,l> + <u,v>/2 = <v,nu> - <u,v>/2
    let wv = lattice.gram_times(v);
    let mut dw = 1i64;
    for c in &wv {
        dw = lcm_i64(dw, crate::rat::denom_i64(c)?);
    }
    let wv_scaled: Vec<i64> = wv
        .iter()
        .map(|c| crate::rat::numer_i64(&(c * rat_int(dw))))
        .collect::<Result<_>>()?;
    let half_uv = lattice.pairing(u, v) / rat_int(2);
    let dc = crate::rat::denom_i64(&half_uv)?;
    let phase_den = lcm_i64(lcm_i64(dw * d, dc), 1);
    let const_num = crate::rat::numer_i64(&(&half_uv * rat_int(phase_den)))?;
    let pair_factor = phase_den / (dw * d);

    let bound = rat_int(2 * order) + rat(rank, 12);
    let mut terms: BTreeMap<(i64, i64), i64> = BTreeMap::new();
    lattice.visit_coset(&shift, &bound, &mut |mu, norm_scaled, _d| {
        let mut dot: i128 = 0;
        for (wi, mi) in wv_scaled.iter().zip(mu) {
            dot += (*wi as i128) * (*mi as i128);
        }
        let phase_num = dot * pair_factor as i128 - const_num as i128;
        let key = (norm_scaled as i64, phase_num as i64);
        *terms.entry(key).or_insert(0) += 1;
    })?;
    let trunc_key = rat_floor(&(&bound / rat_int(2) * rat_int(q_den))).to_i64().unwrap() + 1;
    Ok(PhiEvaluator { terms, q_den, phase_den, rank, trunc_key, eta_order: order + 4 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vacuum(lattice: &EvenLattice) -> CosetModule {
        CosetModule {
            representative: LatticeVector::zero(lattice.rank()),
            conformal_weight: Rat::zero(),
        }
    }

    fn e8_root() -> LatticeVector {
        LatticeVector::from_i64(&[1, 0, 0, 0, 0, 0, 0, 0])
    }

    #[test]
    fn e8_character_leading_terms() {
        let e8 = EvenLattice::e8();
        let chi = character(&e8, &vacuum(&e8), &e8_root(), 6).unwrap();
        assert_eq!(chi.index(), &rat_int(1));
        assert_eq!(chi.weight(), &rat_int(0));
        // leading term q^(-1/3) from lambda = 0 over the eta prefactor
        let key = |n24: i64| n24; // den is 24 here
        assert_eq!(chi.den(), 24);
        assert_eq!(chi.coeff(key(-8), 0), rat_int(1));
        assert_eq!(chi.coeff(key(-8), 1), rat_int(0));
        assert_eq!(chi.coeff(key(-8), -1), rat_int(0));
        // q^(2/3) = key 16: the roots; pairing +-2 only from +-h
        assert_eq!(chi.coeff(key(16), 2), rat_int(1));
        assert_eq!(chi.coeff(key(16), -2), rat_int(1));
        assert_eq!(chi.coeff(key(16), 1), rat_int(56));
        assert_eq!(chi.coeff(key(16), 0), rat_int(126 + 8));
    }

    #[test]
    fn character_precondition() {
        let e8 = EvenLattice::e8();
        let bad = e8_root().scale(&rat(1, 2));
        assert!(matches!(
            character(&e8, &vacuum(&e8), &bad, 4),
            Err(Error::IntegralityViolation(_))
        ));
        // A1: h = alpha/2 is dual (pairs integrally) but not in L
        let a1 = EvenLattice::a1();
        let half = LatticeVector(vec![rat(1, 2)]);
        assert!(a1.dual_contains(&half));
        assert!(!a1.contains(&half));
    }

    #[test]
    fn a1_dual_vector_character() {
        // h = alpha/2 pairs integrally with A1 (G h = [1]), so the vacuum
        // character exists with index <h,h>/2 = 1/4.
        let a1 = EvenLattice::a1();
        let h = LatticeVector(vec![rat(1, 2)]);
        assert!(a1.dual_contains(&h));
        let chi = character(&a1, &vacuum(&a1), &h, 4).unwrap();
        assert_eq!(chi.index(), &rat(1, 4));
        // non-vacuum module with fractional h is rejected
        let m = &a1.discriminant_group()[1];
        assert!(character(&a1, m, &h, 4).is_err());
    }

    #[test]
    fn theta_cancels_eta_power() {
        let e8 = EvenLattice::e8();
        let theta = theta_series(&e8, &vacuum(&e8), &e8_root(), 5).unwrap();
        let chi = character(&e8, &vacuum(&e8), &e8_root(), 5).unwrap();
        let back = chi.mul_eta_power(8).unwrap();
        assert!(back.same_table(&theta.truncate(back.trunc().unwrap())));
        assert_eq!(back.weight(), &rat_int(4));
    }

    #[test]
    fn index_integrality_reports() {
        let e8 = EvenLattice::e8();
        let rep = index_integrality(&e8, &e8_root()).unwrap();
        assert!(rep.passed && rep.integral && rep.unimodular);
        assert_eq!(rep.half_norm, rat_int(1));
        let rep2 = index_integrality(&e8, &e8_root().scale(&rat_int(2))).unwrap();
        assert_eq!(rep2.half_norm, rat_int(4));
        let a1 = EvenLattice::a1();
        let alpha = LatticeVector::from_i64(&[1]);
        let rep3 = index_integrality(&a1, &alpha).unwrap();
        assert!(rep3.passed);
        assert_eq!(rep3.matched_coset, Some(0)); // <a,a>/2 = 1 = 0 mod Z
        let half = LatticeVector(vec![rat(1, 2)]);
        let rep4 = index_integrality(&a1, &half).unwrap();
        assert!(rep4.passed);
        assert_eq!(rep4.matched_coset, Some(1)); // 1/4 matches lambda = 1/4
    }

    #[test]
    fn twisted_character_integral_shift_matches_untwisted() {
        let e8 = EvenLattice::e8();
        let tw = twisted_character(&e8, &e8_root(), 5).unwrap();
        let un = twisted_character(&e8, &LatticeVector::zero(8), 5).unwrap();
        assert_eq!(tw, un);
    }

    #[test]
    fn twisted_character_exponent_grid() {
        let e8 = EvenLattice::e8();
        let a = e8_root().scale(&rat(1, 2));
        let tw = twisted_character(&e8, &a, 4).unwrap();
        // exponents lie in -1/12 + (1/2)Z: min norm of L + h/2 is 1/2
        let min_key = tw.min_key().unwrap();
        assert_eq!(rat(min_key, tw.den()), rat(1, 4) - rat(1, 3));
        let period = tw.translation_period();
        assert_eq!(period, 12);
    }

    #[test]
    fn automorphism_trace_r1_collapses_zeta() {
        let e8 = EvenLattice::e8();
        let tr = automorphism_trace(&e8, &e8_root(), 1, 5).unwrap();
        let chi = character(&e8, &vacuum(&e8), &e8_root(), 5).unwrap();
        let collapsed = chi.collapse_z();
        for (key, v) in tr.coeffs() {
            assert_eq!(v.len(), 1);
            assert_eq!(v[0], collapsed.coeff(*key));
        }
        assert_eq!(tr.translation_period(), 3); // exponents in -1/3 + Z
    }

    #[test]
    fn automorphism_trace_r2_signs() {
        let e8 = EvenLattice::e8();
        let tr = automorphism_trace(&e8, &e8_root(), 2, 5).unwrap();
        // q^(2/3) layer: roots grouped by pairing parity:
        // even: 126 + 2 (pairings 0, +-2) plus 8 from the eta convolution;
        // odd: 112 (pairings +-1).
        let v = tr.residue_vector(16);
        assert_eq!(v[0], rat_int(126 + 2 + 8));
        assert_eq!(v[1], rat_int(112));
        // eval agrees with the phase-collapsed sum
        let tau = Complex64::new(0.21, 1.3);
        let direct = tr.eval(tau);
        let chi = character(&e8, &vacuum(&e8), &e8_root(), 5).unwrap();
        let mut by_hand = Complex64::new(0.0, 0.0);
        for (key, layer) in chi.layers() {
            for (r, c) in layer {
                let sign = if r.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                by_hand += crate::qseries::rat_c64(c) * sign * q_power(tau, *key, chi.den());
            }
        }
        assert!((direct.value - by_hand).norm() < 1e-12);
    }

    #[test]
    fn phi_at_zero_is_partition_character() {
        // u = v = 0: the evaluator reproduces the z = 0 character numerically
        let e8 = EvenLattice::e8();
        let zero = LatticeVector::zero(8);
        let phi = phi_evaluator(&e8, &vacuum(&e8), &zero, &zero, 8).unwrap();
        let chi = character(&e8, &vacuum(&e8), &e8_root(), 8).unwrap();
        let tau = Complex64::new(0.1, 1.1);
        let a = phi.eval(tau);
        let b = chi.eval(tau, Complex64::new(0.0, 0.0));
        assert!((a.value - b.value).norm() < 1e-9, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn phi_formal_table_matches_character_theta() {
        // u = 0, v = h: the (exponent, phase) table is exactly the theta
        // table of the character, phases being the zeta-exponents.
        let e8 = EvenLattice::e8();
        let h = e8_root();
        let zero = LatticeVector::zero(8);
        let phi = phi_evaluator(&e8, &vacuum(&e8), &zero, &h, 6).unwrap();
        let theta = theta_series(&e8, &vacuum(&e8), &h, 6).unwrap();
        // q_den = 2, phase_den = 1 for this data
        for ((ns, phase), count) in phi.table() {
            let n_key = ns * theta.den() / phi.q_den();
            let r = phase / phi.phase_den();
            assert_eq!(theta.coeff(n_key, r), rat_int(*count), "at ns={ns} phase={phase}");
        }
        let total_theta: i64 = phi.table().values().sum();
        let total: Rat = theta
            .layers()
            .values()
            .flat_map(|l| l.values().cloned())
            .sum();
        assert_eq!(total, rat_int(total_theta));
    }

    #[test]
    fn phi_lowest_exponent_completes_square() {
        // u = root: exponents <l+u,l+u>/2 - 1/3, minimal at l = -u
        let e8 = EvenLattice::e8();
        let phi = phi_evaluator(&e8, &vacuum(&e8), &e8_root(), &LatticeVector::zero(8), 5).unwrap();
        assert_eq!(phi.min_exponent().unwrap(), rat(-1, 3));
    }
}
