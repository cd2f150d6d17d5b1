//! Weak Jacobi forms as two-variable expansions sum c(n,r) q^n zeta^r.
//!
//! Coefficients are exact rationals; the q-exponent n lives on a fractional
//! grid (key/den, default den 24) and the zeta-exponent r is an integer.
//! Each q-layer holds finitely many r. Truncation applies to n only and is
//! tracked exactly, as for `QSeries`.

mod structure;
mod theta;

pub use structure::{
    codimension_sum, dim_jacobi, dim_weak_jacobi, structure_map, x_power_basis, LeadingPolynomial,
};
pub use theta::{phi_0_1, phi_minus2_1};

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;
use num::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qseries::{q_power, rat_c64, NumericEval, QSeries, EXP_DEN};
use crate::rat::{lcm_i64, parse_rat, rat_to_string, Rat};

pub type Layer = BTreeMap<i64, Rat>;

/// Sparse exact two-variable expansion. See the module docs.
#[derive(Debug, Clone)]
pub struct JacobiSeries {
    weight: Rat,
    index: Rat,
    den: i64,
    layers: BTreeMap<i64, Layer>,
    trunc: Option<i64>,
    /// Advisory tag: accumulated power of the eta multiplier (in-memory only,
    /// not serialized).
    eta_multiplier: i64,
}

/// Support classification of the stored coefficients against the weak and
/// true Jacobi bounds, always "to truncation".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// Every stored c(n,r) satisfies r^2 <= 4mn.
    TrueToTruncation,
    /// Weak bound holds but some coefficient violates the true bound.
    WeakOnly { witness: (i64, i64) },
    /// Some coefficient violates n >= 0 or r^2 <= m^2 + 4mn.
    ViolatesWeakBound { witness: (i64, i64) },
}

/// Outcome of the constant-layer criterion (valid for weight >= 4 and
/// index 1..=4): such a weak form is a true Jacobi form exactly when its
/// q^0 layer is concentrated at r = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CriterionDecision {
    Jacobi,
    NotJacobi { witness_r: i64 },
    /// The q^0 layer passed but a stored coefficient violates the true
    /// bound: the input cannot be a weak Jacobi form of the claimed type.
    Inconsistent { witness: (i64, i64) },
}

/// Result of the exact coefficient-level elliptic symmetry scan.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub shifts: Vec<i64>,
    pub pairs_checked: usize,
    pub violation: Option<SymmetryViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryViolation {
    pub u: i64,
    pub n_key: i64,
    pub r: i64,
}

impl SymmetryReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

impl JacobiSeries {
    pub fn zero(weight: Rat, index: Rat, den: i64, trunc: Option<i64>) -> Self {
        assert!(den >= 1);
        assert!(!index.is_negative(), "index must be >= 0");
        JacobiSeries { weight, index, den, layers: BTreeMap::new(), trunc, eta_multiplier: 0 }
    }

    /// The exact constant series c (weight 0, index 0).
    pub fn constant(c: Rat) -> Self {
        let mut s = JacobiSeries::zero(Rat::zero(), Rat::zero(), EXP_DEN, None);
        s.set_coeff(0, 0, c);
        s
    }

    pub fn from_coeffs(
        weight: Rat,
        index: Rat,
        den: i64,
        coeffs: BTreeMap<i64, Layer>,
        trunc: Option<i64>,
    ) -> Self {
        let mut s = JacobiSeries::zero(weight, index, den, trunc);
        for (n, layer) in coeffs {
            for (r, c) in layer {
                s.set_coeff(n, r, c);
            }
        }
        s
    }

    /// View a one-variable series as a Jacobi series concentrated at r = 0.
    pub fn from_qseries(q: &QSeries, weight: Rat, index: Rat) -> Self {
        let mut s = JacobiSeries::zero(weight, index, q.den(), q.trunc());
        for (k, c) in q.iter() {
            s.set_coeff(*k, 0, c.clone());
        }
        s
    }

    pub fn weight(&self) -> &Rat {
        &self.weight
    }

    /// Weight as i64 when integral.
    pub fn weight_i64(&self) -> Option<i64> {
        if self.weight.is_integer() {
            num::ToPrimitive::to_i64(&self.weight.to_integer())
        } else {
            None
        }
    }

    pub fn index(&self) -> &Rat {
        &self.index
    }

    /// Index as i64 when integral.
    pub fn index_i64(&self) -> Option<i64> {
        if self.index.is_integer() {
            num::ToPrimitive::to_i64(&self.index.to_integer())
        } else {
            None
        }
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn eta_multiplier(&self) -> i64 {
        self.eta_multiplier
    }

    pub fn layers(&self) -> &BTreeMap<i64, Layer> {
        &self.layers
    }

    pub fn is_zero(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn min_key(&self) -> Option<i64> {
        self.layers.keys().next().copied()
    }

    pub fn num_terms(&self) -> usize {
        self.layers.values().map(|l| l.len()).sum()
    }

    /// All n-exponents integral?
    pub fn has_integer_exponents(&self) -> bool {
        self.layers.keys().all(|k| k % self.den == 0)
    }

    /// Coefficient c(key/den, r). Panics when the layer is beyond truncation.
    pub fn coeff(&self, n_key: i64, r: i64) -> Rat {
        if let Some(t) = self.trunc {
            assert!(n_key < t, "coefficient at key {n_key} unknown: truncated at {t}");
        }
        self.layers
            .get(&n_key)
            .and_then(|l| l.get(&r))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Coefficient c(n, r) at an integer q-power n.
    pub fn coeff_nr(&self, n: i64, r: i64) -> Rat {
        self.coeff(n * self.den, r)
    }

    fn set_coeff(&mut self, n_key: i64, r: i64, c: Rat) {
        if let Some(t) = self.trunc {
            if n_key >= t {
                return;
            }
        }
        let layer = self.layers.entry(n_key).or_default();
        if c.is_zero() {
            layer.remove(&r);
        } else {
            layer.insert(r, c);
        }
        if self.layers.get(&n_key).is_some_and(|l| l.is_empty()) {
            self.layers.remove(&n_key);
        }
    }

    pub fn rescale(&self, new_den: i64) -> JacobiSeries {
        assert!(new_den % self.den == 0);
        let f = new_den / self.den;
        JacobiSeries {
            weight: self.weight.clone(),
            index: self.index.clone(),
            den: new_den,
            layers: self.layers.iter().map(|(k, l)| (k * f, l.clone())).collect(),
            trunc: self.trunc.map(|t| t * f),
            eta_multiplier: self.eta_multiplier,
        }
    }

    pub fn truncate(&self, t: i64) -> JacobiSeries {
        let new_t = match self.trunc {
            Some(cur) => cur.min(t),
            None => t,
        };
        JacobiSeries {
            weight: self.weight.clone(),
            index: self.index.clone(),
            den: self.den,
            layers: self
                .layers
                .iter()
                .filter(|(k, _)| **k < new_t)
                .map(|(k, l)| (*k, l.clone()))
                .collect(),
            trunc: Some(new_t),
            eta_multiplier: self.eta_multiplier,
        }
    }

    pub fn neg(&self) -> JacobiSeries {
        let mut out = self.clone();
        for layer in out.layers.values_mut() {
            for c in layer.values_mut() {
                *c = -c.clone();
            }
        }
        out
    }

    pub fn scalar_mul(&self, c: &Rat) -> JacobiSeries {
        if c.is_zero() {
            return JacobiSeries {
                weight: self.weight.clone(),
                index: self.index.clone(),
                den: self.den,
                layers: BTreeMap::new(),
                trunc: self.trunc,
                eta_multiplier: self.eta_multiplier,
            };
        }
        let mut out = self.clone();
        for layer in out.layers.values_mut() {
            for v in layer.values_mut() {
                *v = &*v * c;
            }
        }
        out
    }

    /// Addition requires equal weight and index unless one side is zero.
    pub fn add(&self, other: &JacobiSeries) -> JacobiSeries {
        let d = lcm_i64(self.den, other.den);
        let a = self.rescale(d);
        let b = other.rescale(d);
        let trunc = match (a.trunc, b.trunc) {
            (None, None) => None,
            (Some(t), None) | (None, Some(t)) => Some(t),
            (Some(s), Some(t)) => Some(s.min(t)),
        };
        let weight = if a.is_zero() { b.weight.clone() } else { a.weight.clone() };
        let index = if a.is_zero() { b.index.clone() } else { a.index.clone() };
        let mut out = JacobiSeries::zero(weight, index, d, trunc);
        out.eta_multiplier = self.eta_multiplier;
        for (n, layer) in a.layers.iter().chain(b.layers.iter()) {
            for (r, c) in layer {
                let cur = out.layers.get(n).and_then(|l| l.get(r)).cloned().unwrap_or_else(Rat::zero);
                out.set_coeff(*n, *r, cur + c.clone());
            }
        }
        out
    }

    pub fn sub(&self, other: &JacobiSeries) -> JacobiSeries {
        self.add(&other.neg())
    }

    /// Product: weights and indices add; truncation follows the same rule as
    /// for one-variable series, on the q-exponent.
    pub fn mul(&self, other: &JacobiSeries) -> JacobiSeries {
        let d = lcm_i64(self.den, other.den);
        let a = self.rescale(d);
        let b = other.rescale(d);
        let weight = &a.weight + &b.weight;
        let index = &a.index + &b.index;

        if (a.layers.is_empty() && a.trunc.is_none()) || (b.layers.is_empty() && b.trunc.is_none())
        {
            return JacobiSeries::zero(weight, index, d, None);
        }
        let min_or_trunc = |s: &JacobiSeries| s.min_key().or(s.trunc);
        let trunc = match (a.trunc, b.trunc) {
            (None, None) => None,
            _ => {
                let mut bound: Option<i64> = None;
                if let (Some(t), Some(m)) = (a.trunc, min_or_trunc(&b)) {
                    bound = Some(t + m);
                }
                if let (Some(t), Some(m)) = (b.trunc, min_or_trunc(&a)) {
                    bound = Some(bound.map_or(t + m, |x| x.min(t + m)));
                }
                match bound {
                    Some(x) => Some(x),
                    None => return JacobiSeries::zero(weight, index, d, None),
                }
            }
        };

        let mut out = JacobiSeries::zero(weight, index, d, trunc);
        out.eta_multiplier = self.eta_multiplier + other.eta_multiplier;
        for (na, la) in &a.layers {
            for (nb, lb) in &b.layers {
                let n = na + nb;
                if let Some(t) = trunc {
                    if n >= t {
                        break;
                    }
                }
                for (ra, ca) in la {
                    for (rb, cb) in lb {
                        let r = ra + rb;
                        let cur = out
                            .layers
                            .get(&n)
                            .and_then(|l| l.get(&r))
                            .cloned()
                            .unwrap_or_else(Rat::zero);
                        out.set_coeff(n, r, cur + ca * cb);
                    }
                }
            }
        }
        out
    }

    /// Multiply by a one-variable series (acting at r = 0).
    pub fn mul_qseries(&self, q: &QSeries) -> JacobiSeries {
        self.mul(&JacobiSeries::from_qseries(q, Rat::zero(), Rat::zero()))
    }

    /// Nonnegative integer power.
    pub fn pow(&self, e: u32) -> JacobiSeries {
        let mut acc = JacobiSeries::constant(Rat::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coefficientwise product with eta^e: the weight increases by e/2 and
    /// the multiplier note records the accumulated exponent.
    pub fn mul_eta_power(&self, e: i64) -> Result<JacobiSeries> {
        if e == 0 {
            return Ok(self.clone());
        }
        let order = match self.trunc {
            Some(t) => {
                let lo = self.min_key().unwrap_or(0).min(0);
                (t - lo) / self.den + 2
            }
            None => {
                let hi = self.layers.keys().next_back().copied().unwrap_or(0);
                let lo = self.min_key().unwrap_or(0).min(0);
                (hi - lo) / self.den + 2
            }
        };
        let eta_pow = crate::qseries::eta(order.max(2)).pow(e)?;
        let mut out = self.mul_qseries(&eta_pow);
        out.weight = &self.weight + crate::rat::rat(e, 2);
        out.eta_multiplier = self.eta_multiplier + e;
        Ok(out)
    }

    /// All stored q-exponents congruent to a single class mod 1? Returns the
    /// class in [0, 1) if so; it determines the diagonal T-multiplier.
    pub fn exponent_class_mod_1(&self) -> Option<Rat> {
        let mut keys = self.layers.keys();
        let first = *keys.next()?;
        let class = first.rem_euclid(self.den);
        for k in keys {
            if k.rem_euclid(self.den) != class {
                return None;
            }
        }
        Some(crate::rat::rat(class, self.den))
    }

    /// The q^0 layer (empty if none). Panics when truncated before q^0.
    pub fn constant_layer(&self) -> Layer {
        if let Some(t) = self.trunc {
            assert!(t > 0, "q^0 layer unknown: truncated at {t}/{}", self.den);
        }
        self.layers.get(&0).cloned().unwrap_or_default()
    }

    /// Collapse zeta -> 1, giving the one-variable series of row sums.
    pub fn collapse_z(&self) -> QSeries {
        let mut coeffs = BTreeMap::new();
        for (n, layer) in &self.layers {
            let s: Rat = layer.values().cloned().sum();
            if !s.is_zero() {
                coeffs.insert(*n, s);
            }
        }
        QSeries::from_coeffs(self.den, coeffs, self.trunc)
    }

    /// Scan the stored support against the weak (n >= 0, r^2 <= m^2 + 4mn)
    /// and true (r^2 <= 4mn) bounds. Requires integer index >= 1 and integer
    /// n-exponents; verdicts are relative to the truncation order.
    pub fn classify(&self) -> Result<Classification> {
        let m = self.index_i64().ok_or_else(|| {
            Error::HypothesisViolated("classification needs an integer index".into())
        })?;
        if m < 1 {
            return Err(Error::HypothesisViolated(format!(
                "classification needs index >= 1, got {m}"
            )));
        }
        if !self.has_integer_exponents() {
            return Err(Error::HypothesisViolated(
                "classification needs integer q-exponents".into(),
            ));
        }
        let mut weak_witness: Option<(i64, i64)> = None;
        for (key, layer) in &self.layers {
            let n = key / self.den;
            for r in layer.keys() {
                let r2 = (*r as i128) * (*r as i128);
                if n < 0 || r2 > (m as i128) * (m as i128) + 4 * (m as i128) * (n as i128) {
                    return Ok(Classification::ViolatesWeakBound { witness: (n, *r) });
                }
                if weak_witness.is_none() && r2 > 4 * (m as i128) * (n as i128) {
                    weak_witness = Some((n, *r));
                }
            }
        }
        Ok(match weak_witness {
            Some(witness) => Classification::WeakOnly { witness },
            None => Classification::TrueToTruncation,
        })
    }

    /// Constant-layer criterion for weight >= 4, index 1..=4.
    pub fn jacobi_criterion(&self) -> Result<CriterionDecision> {
        let k = self.weight_i64().ok_or_else(|| {
            Error::HypothesisViolated("criterion needs an integer weight".into())
        })?;
        let m = self.index_i64().ok_or_else(|| {
            Error::HypothesisViolated("criterion needs an integer index".into())
        })?;
        if k < 4 || !(1..=4).contains(&m) {
            return Err(Error::HypothesisViolated(format!(
                "criterion applies for weight >= 4 and 1 <= index <= 4, got weight {k} index {m}"
            )));
        }
        for (r, _) in self.constant_layer() {
            if r != 0 {
                return Ok(CriterionDecision::NotJacobi { witness_r: r });
            }
        }
        Ok(match self.classify()? {
            Classification::TrueToTruncation => CriterionDecision::Jacobi,
            Classification::WeakOnly { witness } | Classification::ViolatesWeakBound { witness } => {
                CriterionDecision::Inconsistent { witness }
            }
        })
    }

    /// Exact elliptic symmetry at coefficient level: c(n, r) must equal
    /// c(n + ru + m u^2, r + 2mu) wherever both sides are below truncation.
    /// Both the image and the preimage of every stored entry are checked.
    pub fn elliptic_coefficient_symmetry(&self, shifts: &[i64]) -> Result<SymmetryReport> {
        let m = self.index_i64().ok_or_else(|| {
            Error::HypothesisViolated("symmetry scan needs an integer index".into())
        })?;
        if m <= 0 {
            return Err(Error::HypothesisViolated(format!(
                "symmetry scan needs index > 0, got {m}"
            )));
        }
        let known = |key: i64| self.trunc.is_none_or(|t| key < t);
        let mut pairs = 0usize;
        let mut violation = None;
        'outer: for &u in shifts {
            for (key, layer) in &self.layers {
                for (r, c) in layer {
                    for dir in [1i64, -1] {
                        let uu = u * dir;
                        let key2 = key + self.den * (r * uu + m * uu * uu);
                        let r2 = r + 2 * m * uu;
                        if !known(key2) {
                            continue;
                        }
                        pairs += 1;
                        let other = self
                            .layers
                            .get(&key2)
                            .and_then(|l| l.get(&r2))
                            .cloned()
                            .unwrap_or_else(Rat::zero);
                        if other != *c {
                            violation = Some(SymmetryViolation { u: uu, n_key: *key, r: *r });
                            break 'outer;
                        }
                    }
                }
            }
        }
        Ok(SymmetryReport { shifts: shifts.to_vec(), pairs_checked: pairs, violation })
    }

    /// Evaluate at (tau, z). Error estimate: magnitude of the last stored
    /// q-layer at the point, times the geometric tail factor 1/(1-|q|).
    pub fn eval(&self, tau: Complex64, z: Complex64) -> NumericEval {
        assert!(tau.im > 0.0, "evaluation requires Im(tau) > 0");
        let zeta = |r: i64| q_power(z, r, 1);
        let mut value = Complex64::new(0.0, 0.0);
        for (key, layer) in &self.layers {
            let mut lv = Complex64::new(0.0, 0.0);
            for (r, c) in layer {
                lv += rat_c64(c) * zeta(*r);
            }
            value += q_power(tau, *key, self.den) * lv;
        }
        let error = match self.trunc {
            None => 0.0,
            Some(t) => {
                let qabs = (-2.0 * std::f64::consts::PI * tau.im).exp();
                let geo = 1.0 / (1.0 - qabs);
                match self.layers.iter().next_back() {
                    Some((key, layer)) => {
                        let mut mag = 0.0;
                        for (r, c) in layer {
                            mag += crate::rat::rat_to_f64(&c.abs()) * zeta(*r).norm();
                        }
                        mag * qabs.powf(*key as f64 / self.den as f64) * geo
                    }
                    None => qabs.powf(t as f64 / self.den as f64) * geo,
                }
            }
        };
        NumericEval { value, error }
    }

    /// Semantic equality of the coefficient tables (weight, index and the
    /// multiplier note are ignored).
    pub fn same_table(&self, other: &JacobiSeries) -> bool {
        let d = lcm_i64(self.den, other.den);
        let a = self.rescale(d);
        let b = other.rescale(d);
        a.layers == b.layers && a.trunc == b.trunc
    }
}

impl PartialEq for JacobiSeries {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight && self.index == other.index && self.same_table(other)
    }
}

impl fmt::Display for JacobiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "JacobiSeries(weight {}, index {}, {} terms",
            rat_to_string(&self.weight),
            rat_to_string(&self.index),
            self.num_terms()
        )?;
        if let Some(t) = self.trunc {
            write!(f, ", O(q^({}/{}))", t, self.den)?;
        }
        write!(f, ")")
    }
}

// --- JSON form ---------------------------------------------------------
// { "weight": k, "index": "p/q", "den": 24,
//   "terms": [[n_key, r, "p/q"], ...], "trunc": n_key }

#[derive(Serialize, Deserialize)]
struct JacobiJson {
    weight: serde_json::Value,
    index: String,
    den: i64,
    terms: Vec<(i64, i64, String)>,
    trunc: Option<i64>,
}

impl Serialize for JacobiSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let weight = if self.weight.is_integer() {
            serde_json::Value::from(
                num::ToPrimitive::to_i64(&self.weight.to_integer()).unwrap_or_default(),
            )
        } else {
            serde_json::Value::from(rat_to_string(&self.weight))
        };
        let mut terms = Vec::new();
        for (n, layer) in &self.layers {
            for (r, c) in layer {
                terms.push((*n, *r, rat_to_string(c)));
            }
        }
        let dto = JacobiJson {
            weight,
            index: rat_to_string(&self.index),
            den: self.den,
            terms,
            trunc: self.trunc,
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JacobiSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = JacobiJson::deserialize(deserializer)?;
        if dto.den < 1 {
            return Err(D::Error::custom("den must be positive"));
        }
        let weight = match &dto.weight {
            serde_json::Value::Number(n) => {
                let v = n.as_i64().ok_or_else(|| D::Error::custom("bad weight"))?;
                crate::rat::rat_int(v)
            }
            serde_json::Value::String(s) => {
                parse_rat(s).map_err(|e| D::Error::custom(e.to_string()))?
            }
            _ => return Err(D::Error::custom("weight must be a number or 'p/q'")),
        };
        let index = parse_rat(&dto.index).map_err(|e| D::Error::custom(e.to_string()))?;
        if index.is_negative() {
            return Err(D::Error::custom("index must be >= 0"));
        }
        let mut s = JacobiSeries::zero(weight, index, dto.den, dto.trunc);
        for (n, r, c) in dto.terms {
            let c = parse_rat(&c).map_err(|e| D::Error::custom(e.to_string()))?;
            s.set_coeff(n, r, c);
        }
        Ok(s)
    }
}
