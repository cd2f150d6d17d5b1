//! Classical level-1 holomorphic modular forms.
//!
//! Eisenstein series from the divisor-sum formula with exact Bernoulli
//! numbers, the discriminant Delta = (E4^3 - E6^2)/1728, the standard
//! dimension formula for M_k, and echelonized monomial bases in E4, E6.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::RatMat;
use crate::qseries::{QSeries, EXP_DEN};
use crate::rat::{rat, rat_int, Rat};

/// A holomorphic modular form of even weight on SL2(Z), held as its
/// q-expansion (integer exponents >= 0).
#[derive(Debug, Clone, PartialEq)]
pub struct ModularForm {
    weight: i64,
    expansion: QSeries,
}

impl ModularForm {
    /// Wrap an expansion, checking the type invariants: even weight,
    /// no negative and no fractional exponents.
    pub fn new(weight: i64, expansion: QSeries) -> Result<Self> {
        if weight % 2 != 0 || weight < 0 {
            return Err(Error::BadWeight(weight));
        }
        for (k, _) in expansion.iter() {
            if *k < 0 || k % expansion.den() != 0 {
                return Err(Error::HypothesisViolated(format!(
                    "modular form expansion has a bad exponent {}/{}",
                    k,
                    expansion.den()
                )));
            }
        }
        Ok(ModularForm { weight, expansion })
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn expansion(&self) -> &QSeries {
        &self.expansion
    }

    pub fn coeff(&self, n: i64) -> Rat {
        self.expansion.coeff_qn(n)
    }

    pub fn is_zero(&self) -> bool {
        self.expansion.is_zero()
    }

    /// The constant 1 viewed as the weight-0 form.
    pub fn one() -> Self {
        ModularForm { weight: 0, expansion: QSeries::one() }
    }

    pub fn zero(weight: i64, order: i64) -> Self {
        ModularForm { weight, expansion: QSeries::zero(EXP_DEN, Some(order * EXP_DEN)) }
    }

    pub fn mul(&self, other: &ModularForm) -> ModularForm {
        ModularForm {
            weight: self.weight + other.weight,
            expansion: self.expansion.mul(&other.expansion),
        }
    }

    pub fn add(&self, other: &ModularForm) -> Result<ModularForm> {
        if self.weight != other.weight && !self.is_zero() && !other.is_zero() {
            return Err(Error::WeightMismatch {
                slot: 0,
                expected: self.weight,
                got: other.weight,
            });
        }
        Ok(ModularForm {
            weight: self.weight.max(other.weight),
            expansion: self.expansion.add(&other.expansion),
        })
    }

    pub fn scalar_mul(&self, c: &Rat) -> ModularForm {
        ModularForm { weight: self.weight, expansion: self.expansion.scalar_mul(c) }
    }
}

/// Bernoulli numbers B_0..B_n (B_1 = -1/2), by the defining recurrence.
pub fn bernoulli(n: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rat::one());
            continue;
        }
        // sum_{j=0}^{m} C(m+1, j) B_j = 0  =>  solve for B_m
        let mut s = Rat::zero();
        let mut binom = Rat::one(); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            s += &binom * bj;
            // C(m+1, j+1) = C(m+1, j) * (m+1-j)/(j+1)
            binom *= rat((m + 1 - j) as i64, (j + 1) as i64);
        }
        // after the loop binom = C(m+1, m)
        b.push(-s / binom);
    }
    b
}

/// sigma_k(n): sum of k-th powers of the divisors of n.
fn divisor_power_sum(k: u32, n: i64) -> Rat {
    let mut s = Rat::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += rat_int(d).pow(k as i32);
            let e = n / d;
            if e != d {
                s += rat_int(e).pow(k as i32);
            }
        }
        d += 1;
    }
    s
}

/// Normalized Eisenstein series E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n.
pub fn eisenstein(k: i64, order: i64) -> Result<ModularForm> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::BadWeight(k));
    }
    let b = bernoulli(k as usize);
    let factor = -rat_int(2 * k) / b[k as usize].clone();
    let mut coeffs = std::collections::BTreeMap::new();
    coeffs.insert(0, Rat::one());
    for n in 1..order {
        coeffs.insert(n * EXP_DEN, &factor * divisor_power_sum((k - 1) as u32, n));
    }
    ModularForm::new(k, QSeries::from_coeffs(EXP_DEN, coeffs, Some(order * EXP_DEN)))
}

/// Delta = (E4^3 - E6^2)/1728, the weight-12 cusp form with leading term q.
pub fn delta(order: i64) -> ModularForm {
    let e4 = eisenstein(4, order).expect("weight 4 is valid");
    let e6 = eisenstein(6, order).expect("weight 6 is valid");
    let num = e4.mul(&e4).mul(&e4).expansion().sub(e6.mul(&e6).expansion());
    let expansion = num.scalar_mul(&rat(1, 1728));
    ModularForm::new(12, expansion).expect("Delta is a valid weight-12 form")
}

/// dim M_k for level 1: 0 for negative or odd k, else the standard floor
/// formula with the k = 2 mod 12 correction.
pub fn dim_modular_forms(k: i64) -> i64 {
    if k < 0 || k % 2 != 0 {
        return 0;
    }
    if k.rem_euclid(12) == 2 {
        k / 12
    } else {
        k / 12 + 1
    }
}

/// Monomials E4^a E6^b of weight k (4a + 6b = k), in descending a.
fn weight_monomials(k: i64, order: i64) -> Vec<(i64, i64, ModularForm)> {
    let mut out = Vec::new();
    if k == 0 {
        out.push((0, 0, ModularForm::one()));
        return out;
    }
    let e4 = eisenstein(4, order).expect("E4");
    let e6 = eisenstein(6, order).expect("E6");
    let mut a = k / 4;
    while a >= 0 {
        let rem = k - 4 * a;
        if rem >= 0 && rem % 6 == 0 {
            let b = rem / 6;
            let mut f = ModularForm::one();
            for _ in 0..a {
                f = f.mul(&e4);
            }
            for _ in 0..b {
                f = f.mul(&e6);
            }
            out.push((a, b, f));
        }
        a -= 1;
    }
    out
}

/// A basis of M_k: monomials in E4, E6 reduced to a linearly independent set
/// whose coefficient matrix through q^dim has full rank.
pub fn modular_form_basis(k: i64, order: i64) -> Result<Vec<ModularForm>> {
    if k < 0 || k % 2 != 0 {
        return Err(Error::BadWeight(k));
    }
    let dim = dim_modular_forms(k) as usize;
    if dim == 0 {
        return Ok(Vec::new());
    }
    let need = (dim as i64).max(1);
    let order = order.max(need + 1);
    let monos = weight_monomials(k, order);
    // Select a maximal independent subset greedily, checking exact rank on
    // the first `dim` coefficients. Forms of weight k are determined by those.
    let mut chosen: Vec<ModularForm> = Vec::new();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for (_, _, f) in monos {
        let row: Vec<Rat> = (0..need).map(|n| f.coeff(n)).collect();
        rows.push(row);
        if RatMat::from_rows(rows.clone()).rank() == rows.len() {
            chosen.push(f);
            if chosen.len() == dim {
                break;
            }
        } else {
            rows.pop();
        }
    }
    debug_assert_eq!(chosen.len(), dim);
    Ok(chosen)
}
