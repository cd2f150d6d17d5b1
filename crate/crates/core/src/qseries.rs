//! Truncated Laurent series in one variable q with exact rational coefficients.
//!
//! Exponents live on a fixed fractional grid: a term with key `k` in a series
//! of denominator `den` is the monomial `c * q^(k/den)`. The default grid is
//! 1/24, which houses the Dedekind eta function (leading power q^(1/24)) and
//! the q^(-c/24) prefactors of characters. Twisted traces may use finer grids.
//!
//! Invariants:
//! - no stored coefficient is zero;
//! - all stored keys are `< trunc` when `trunc` is finite;
//! - `trunc = None` means the series is exact (a Laurent polynomial).
//!
//! Truncation is tracked, not assumed: every operation computes the exact
//! order to which its result is trustworthy.

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;
use num::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rat::{lcm_i64, parse_rat, rat_to_string, Rat};

/// Default exponent denominator: every exponent arising from eta powers,
/// q^(-c/24) prefactors and even-lattice theta series lies in (1/24)Z.
pub const EXP_DEN: i64 = 24;

/// Numeric evaluation result: a value plus a truncation-tail estimate.
#[derive(Debug, Clone, Copy)]
pub struct NumericEval {
    pub value: Complex64,
    pub error: f64,
}

impl NumericEval {
    /// True when the tail estimate stays below `limit`.
    pub fn is_reliable(&self, limit: f64) -> bool {
        self.error <= limit
    }
}

/// Sparse exact q-series. See the module docs for the exponent convention.
#[derive(Debug, Clone)]
pub struct QSeries {
    den: i64,
    coeffs: BTreeMap<i64, Rat>,
    /// Terms with key >= trunc are unknown, not zero. `None` = exact.
    trunc: Option<i64>,
}

impl QSeries {
    pub fn zero(den: i64, trunc: Option<i64>) -> Self {
        assert!(den >= 1, "exponent denominator must be positive");
        QSeries { den, coeffs: BTreeMap::new(), trunc }
    }

    /// The exact constant series `c`.
    pub fn constant(c: Rat) -> Self {
        let mut s = QSeries::zero(EXP_DEN, None);
        s.set_coeff(0, c);
        s
    }

    pub fn one() -> Self {
        QSeries::constant(Rat::one())
    }

    /// Exact monomial `c * q^(num/den)`.
    pub fn monomial(c: Rat, num: i64, den: i64) -> Self {
        let mut s = QSeries::zero(den, None);
        s.set_coeff(num, c);
        s
    }

    /// Build from a raw key -> coefficient map; zero entries and keys at or
    /// beyond the truncation are dropped.
    pub fn from_coeffs(den: i64, coeffs: BTreeMap<i64, Rat>, trunc: Option<i64>) -> Self {
        let mut s = QSeries::zero(den, trunc);
        for (k, v) in coeffs {
            s.set_coeff(k, v);
        }
        s
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    /// Truncation bound as an exponent, if finite.
    pub fn trunc_exponent(&self) -> Option<Rat> {
        self.trunc.map(|t| crate::rat::rat(t, self.den))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact and identically zero (no unknown tail).
    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.trunc.is_none()
    }

    /// Smallest stored exponent key, if any term is present.
    pub fn min_key(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_key(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Coefficient of q^(key/den). Panics if the key is at or beyond the
    /// truncation bound (that coefficient is unknown).
    pub fn coeff(&self, key: i64) -> Rat {
        if let Some(t) = self.trunc {
            assert!(key < t, "coefficient at key {key} unknown: truncated at {t}");
        }
        self.coeffs.get(&key).cloned().unwrap_or_else(Rat::zero)
    }

    /// Coefficient of the integer power q^n.
    pub fn coeff_qn(&self, n: i64) -> Rat {
        self.coeff(n * self.den)
    }

    fn set_coeff(&mut self, key: i64, v: Rat) {
        if let Some(t) = self.trunc {
            if key >= t {
                return;
            }
        }
        if v.is_zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, v);
        }
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&i64, &Rat)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Same series on a finer grid; `new_den` must be a multiple of `den`.
    pub fn rescale(&self, new_den: i64) -> QSeries {
        assert!(new_den % self.den == 0, "new denominator must refine the old one");
        let f = new_den / self.den;
        let coeffs = self.coeffs.iter().map(|(k, v)| (k * f, v.clone())).collect();
        QSeries { den: new_den, coeffs, trunc: self.trunc.map(|t| t * f) }
    }

    /// Drop the grid to the coarsest denominator that still holds every
    /// stored exponent (and the truncation bound).
    pub fn reduce_den(&self) -> QSeries {
        let mut g = self.den;
        for k in self.coeffs.keys() {
            g = num::integer::gcd(g, *k);
        }
        if let Some(t) = self.trunc {
            g = num::integer::gcd(g, t);
        }
        if g <= 1 || self.den % g != 0 {
            return self.clone();
        }
        let coeffs = self.coeffs.iter().map(|(k, v)| (k / g, v.clone())).collect();
        QSeries { den: self.den / g, coeffs, trunc: self.trunc.map(|t| t / g) }
    }

    fn common_den(&self, other: &QSeries) -> i64 {
        lcm_i64(self.den, other.den)
    }

    /// Restrict the truncation bound to `min(current, t)` (key units).
    pub fn truncate(&self, t: i64) -> QSeries {
        let new_t = match self.trunc {
            Some(cur) => cur.min(t),
            None => t,
        };
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| **k < new_t)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        QSeries { den: self.den, coeffs, trunc: Some(new_t) }
    }

    pub fn neg(&self) -> QSeries {
        let coeffs = self.coeffs.iter().map(|(k, v)| (*k, -v.clone())).collect();
        QSeries { den: self.den, coeffs, trunc: self.trunc }
    }

    pub fn scalar_mul(&self, c: &Rat) -> QSeries {
        if c.is_zero() {
            return QSeries::zero(self.den, self.trunc);
        }
        let coeffs = self.coeffs.iter().map(|(k, v)| (*k, v * c)).collect();
        QSeries { den: self.den, coeffs, trunc: self.trunc }
    }

    /// Multiply by q^(num/den): shifts every exponent and the truncation.
    pub fn shift(&self, num: i64, den: i64) -> QSeries {
        let d = lcm_i64(self.den, den);
        let s = self.rescale(d);
        let off = num * (d / den);
        let coeffs = s.coeffs.into_iter().map(|(k, v)| (k + off, v)).collect();
        QSeries { den: d, coeffs, trunc: s.trunc.map(|t| t + off) }
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let d = self.common_den(other);
        let a = self.rescale(d);
        let b = other.rescale(d);
        let trunc = match (a.trunc, b.trunc) {
            (None, None) => None,
            (Some(t), None) | (None, Some(t)) => Some(t),
            (Some(s), Some(t)) => Some(s.min(t)),
        };
        let mut out = QSeries::zero(d, trunc);
        for (k, v) in a.coeffs {
            out.set_coeff(k, v);
        }
        for (k, v) in b.coeffs {
            let cur = out.coeffs.get(&k).cloned().unwrap_or_else(Rat::zero);
            out.set_coeff(k, cur + v);
        }
        out
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.neg())
    }

    /// Product. The result's truncation is the exact order to which the
    /// product is known: min(trunc_a + minexp_b, trunc_b + minexp_a), with an
    /// empty side contributing its own truncation bound as "minexp".
    pub fn mul(&self, other: &QSeries) -> QSeries {
        if self.is_exact_zero() || other.is_exact_zero() {
            return QSeries::zero(self.common_den(other), None);
        }
        let d = self.common_den(other);
        let a = self.rescale(d);
        let b = other.rescale(d);

        let min_or_trunc = |s: &QSeries| s.min_key().or(s.trunc);
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
                // One side truncated, the other an exact zero polynomial:
                // the product is exactly zero.
                match bound {
                    Some(x) => Some(x),
                    None => return QSeries::zero(d, None),
                }
            }
        };

        let mut acc: BTreeMap<i64, Rat> = BTreeMap::new();
        for (ka, ca) in &a.coeffs {
            for (kb, cb) in &b.coeffs {
                let k = ka + kb;
                if let Some(t) = trunc {
                    if k >= t {
                        break; // kb ascending, all further terms overflow too
                    }
                }
                let term = ca * cb;
                let entry = acc.entry(k).or_insert_with(Rat::zero);
                *entry += term;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        QSeries { den: d, coeffs: acc, trunc }
    }

    /// Multiplicative inverse. Requires a nonzero leading coefficient; exact
    /// inputs must be monomials (anything else has an infinite inverse).
    pub fn invert(&self) -> Result<QSeries> {
        let m0 = self.min_key().ok_or(Error::NonInvertible)?;
        let c0 = self.coeffs[&m0].clone();
        if self.trunc.is_none() {
            if self.coeffs.len() == 1 {
                return Ok(QSeries::monomial(c0.recip(), -m0, self.den));
            }
            return Err(Error::HypothesisViolated(
                "cannot invert an exact multi-term series; truncate it first".into(),
            ));
        }
        let t = self.trunc.unwrap();
        // Normalize to u = self / (c0 q^(m0/den)), constant term 1, known to
        // relative order t - m0; invert by the usual convolution recurrence.
        let rel = t - m0;
        let mut u: BTreeMap<i64, Rat> = BTreeMap::new();
        for (k, v) in &self.coeffs {
            u.insert(k - m0, v / &c0);
        }
        let mut inv: BTreeMap<i64, Rat> = BTreeMap::new();
        inv.insert(0, Rat::one());
        for n in 1..rel {
            // c[n] = -sum_{0 < k <= n} u[k] c[n-k]
            let mut s = Rat::zero();
            for (k, uk) in u.range(1..=n) {
                if let Some(c) = inv.get(&(n - k)) {
                    s += uk * c;
                }
            }
            if !s.is_zero() {
                inv.insert(n, -s);
            }
        }
        // Un-normalize: divide by c0, shift exponents by -m0. Inverse is
        // trustworthy to relative order rel, i.e. absolute order t - 2*m0.
        let coeffs = inv
            .into_iter()
            .map(|(k, v)| (k - m0, v / &c0))
            .collect();
        Ok(QSeries { den: self.den, coeffs, trunc: Some(t - 2 * m0) })
    }

    /// Integer power, negative exponents via inversion.
    pub fn pow(&self, e: i64) -> Result<QSeries> {
        if e == 0 {
            return Ok(QSeries::one());
        }
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc: Option<QSeries> = None;
        let mut sq = base;
        loop {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq),
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            sq = sq.mul(&sq);
        }
        Ok(acc.unwrap())
    }

    /// All stored exponents congruent to a single class mod 1? Returns the
    /// class as a rational in [0, 1) if so.
    pub fn exponent_class_mod_1(&self) -> Option<Rat> {
        let mut keys = self.coeffs.keys();
        let first = *keys.next()?;
        let class = first.rem_euclid(self.den);
        for k in keys {
            if k.rem_euclid(self.den) != class {
                return None;
            }
        }
        Some(crate::rat::rat(class, self.den))
    }

    /// Smallest positive integer N with e*N integral for every stored
    /// exponent e; the series is then invariant under tau -> tau + N.
    pub fn translation_period(&self) -> i64 {
        let mut period = 1i64;
        for k in self.coeffs.keys() {
            let g = num::integer::gcd(k.rem_euclid(self.den), self.den);
            period = lcm_i64(period, self.den / g);
        }
        period
    }

    /// Evaluate at a point of the upper half-plane. The error estimate is the
    /// magnitude of the last retained term times the geometric tail factor
    /// 1/(1-|q|); exact series report zero error.
    pub fn eval(&self, tau: Complex64) -> NumericEval {
        assert!(tau.im > 0.0, "evaluation requires Im(tau) > 0");
        let mut value = Complex64::new(0.0, 0.0);
        for (k, c) in &self.coeffs {
            value += rat_c64(c) * q_power(tau, *k, self.den);
        }
        let error = match self.trunc {
            None => 0.0,
            Some(t) => {
                let qabs = (-2.0 * std::f64::consts::PI * tau.im).exp();
                let geo = 1.0 / (1.0 - qabs);
                match self.max_key() {
                    Some(k) => {
                        let c = &self.coeffs[&k];
                        let mag = crate::rat::rat_to_f64(&c.abs())
                            * qabs.powf(k as f64 / self.den as f64);
                        mag * geo
                    }
                    // Nothing stored: bound the unknown tail from the
                    // truncation exponent with unit coefficient scale.
                    None => qabs.powf(t as f64 / self.den as f64) * geo,
                }
            }
        };
        NumericEval { value, error }
    }

    /// Semantic equality: same exponents, coefficients and truncation bound,
    /// regardless of grid denominator.
    pub fn same_series(&self, other: &QSeries) -> bool {
        let d = self.common_den(other);
        let a = self.rescale(d);
        let b = other.rescale(d);
        a.coeffs == b.coeffs && a.trunc == b.trunc
    }
}

impl PartialEq for QSeries {
    fn eq(&self, other: &Self) -> bool {
        self.same_series(other)
    }
}

impl Eq for QSeries {}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *k == 0 {
                write!(f, "{}", rat_to_string(c))?;
            } else if k % self.den == 0 {
                write!(f, "{}*q^{}", rat_to_string(c), k / self.den)?;
            } else {
                write!(f, "{}*q^({}/{})", rat_to_string(c), k, self.den)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(t) = self.trunc {
            if t % self.den == 0 {
                write!(f, " + O(q^{})", t / self.den)?;
            } else {
                write!(f, " + O(q^({}/{}))", t, self.den)?;
            }
        }
        Ok(())
    }
}

/// exp(2 pi i (num/den) tau)
pub(crate) fn q_power(tau: Complex64, num: i64, den: i64) -> Complex64 {
    let w = 2.0 * std::f64::consts::PI * (num as f64 / den as f64);
    let scale = (-w * tau.im).exp();
    Complex64::new(scale * (w * tau.re).cos(), scale * (w * tau.re).sin())
}

pub(crate) fn rat_c64(x: &Rat) -> Complex64 {
    Complex64::new(crate::rat::rat_to_f64(x), 0.0)
}

/// Dedekind eta to the given integer q-order: q^(1/24) prod_{n>=1} (1 - q^n),
/// expanded with the pentagonal-number theorem. Exponents are 1/24 mod 1.
pub fn eta(order: i64) -> QSeries {
    assert!(order >= 1, "eta needs truncation order >= 1");
    let trunc = order * EXP_DEN;
    let mut coeffs = BTreeMap::new();
    let mut k: i64 = 0;
    loop {
        // generalized pentagonal numbers k(3k-1)/2 for k = 0, 1, -1, 2, -2, ...
        let mut hit = false;
        for kk in [k, -k] {
            let p = kk * (3 * kk - 1) / 2;
            let key = p * EXP_DEN + 1; // shift by q^(1/24)
            if key < trunc {
                hit = true;
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                coeffs.insert(key, crate::rat::rat_int(sign));
            }
            if kk == 0 {
                break;
            }
        }
        if !hit && k > 0 {
            break;
        }
        k += 1;
    }
    QSeries { den: EXP_DEN, coeffs, trunc: Some(trunc) }
}

// --- JSON form: { "den": 24, "terms": [[key, "p/q"], ...], "trunc": key } ---

#[derive(Serialize, Deserialize)]
struct QSeriesJson {
    den: i64,
    terms: Vec<(i64, String)>,
    trunc: Option<i64>,
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dto = QSeriesJson {
            den: self.den,
            terms: self
                .coeffs
                .iter()
                .map(|(k, v)| (*k, rat_to_string(v)))
                .collect(),
            trunc: self.trunc,
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = QSeriesJson::deserialize(deserializer)?;
        if dto.den < 1 {
            return Err(D::Error::custom("den must be positive"));
        }
        let mut s = QSeries::zero(dto.den, dto.trunc);
        for (k, c) in dto.terms {
            let c = parse_rat(&c).map_err(|e| D::Error::custom(e.to_string()))?;
            s.set_coeff(k, c);
        }
        Ok(s)
    }
}
