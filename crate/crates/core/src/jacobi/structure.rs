//! The structure map from tuples of modular forms to weak Jacobi forms, the
//! q^0-layer polynomial calculus in x = zeta + 1/zeta, and the dimension and
//! codimension formulas for weak versus true Jacobi forms.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::jacobi::{JacobiSeries, Layer};
use crate::linalg::RatMat;
use crate::modular::{dim_modular_forms, eisenstein, ModularForm};
use crate::rat::{rat_int, Rat};

/// The q^0 layer of an even-weight Jacobi series, written as a polynomial in
/// x = zeta + 1/zeta. `coeffs[d]` is the coefficient of x^d.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingPolynomial {
    coeffs: Vec<Rat>,
}

impl LeadingPolynomial {
    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        LeadingPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        LeadingPolynomial { coeffs: Vec::new() }
    }

    /// The monomial x^d.
    pub fn x_power(d: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); d + 1];
        coeffs[d] = Rat::one();
        LeadingPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> Rat {
        self.coeffs.get(d).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mul(&self, other: &LeadingPolynomial) -> LeadingPolynomial {
        if self.is_zero() || other.is_zero() {
            return LeadingPolynomial::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        LeadingPolynomial::from_coeffs(out)
    }

    /// (x + a)^d, expanded.
    pub fn binomial(a: &Rat, d: usize) -> LeadingPolynomial {
        let base = LeadingPolynomial::from_coeffs(vec![a.clone(), Rat::one()]);
        let mut out = LeadingPolynomial::from_coeffs(vec![Rat::one()]);
        for _ in 0..d {
            out = out.mul(&base);
        }
        out
    }

    /// Expand back into a symmetric zeta-layer.
    pub fn to_layer(&self) -> Layer {
        let mut layer = Layer::new();
        for (d, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // x^d = sum_k C(d,k) zeta^(d-2k)
            let mut binom = Rat::one();
            for k in 0..=d {
                let r = d as i64 - 2 * k as i64;
                let e = layer.entry(r).or_insert_with(Rat::zero);
                *e += c * &binom;
                binom *= rat_int((d - k) as i64);
                binom /= rat_int((k + 1) as i64);
            }
        }
        layer.retain(|_, v| !v.is_zero());
        layer
    }
}

impl std::fmt::Display for LeadingPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match d {
                0 => write!(f, "{}", crate::rat::rat_to_string(c))?,
                1 => write!(f, "{}*x", crate::rat::rat_to_string(c))?,
                _ => write!(f, "{}*x^{}", crate::rat::rat_to_string(c), d)?,
            }
        }
        Ok(())
    }
}

impl JacobiSeries {
    /// The q^0 layer as a polynomial in x = zeta + 1/zeta. Fails when the
    /// layer is not symmetric under zeta <-> 1/zeta.
    pub fn leading_polynomial(&self) -> Result<LeadingPolynomial> {
        let mut layer = self.constant_layer();
        for (r, c) in &layer {
            let mirror = layer.get(&-r).cloned().unwrap_or_else(Rat::zero);
            if mirror != *c {
                return Err(Error::NotPolynomialInX(*r));
            }
        }
        // A symmetric Laurent layer reduces completely against the x^d
        // expansions, top degree down.
        let max_d = layer.keys().map(|r| r.abs()).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Rat::zero(); max_d + 1];
        for d in (0..=max_d).rev() {
            let c = layer.get(&(d as i64)).cloned().unwrap_or_else(Rat::zero);
            if c.is_zero() {
                continue;
            }
            coeffs[d] = c.clone();
            for (rr, v) in LeadingPolynomial::x_power(d).to_layer() {
                let e = layer.entry(rr).or_insert_with(Rat::zero);
                *e -= &c * &v;
            }
            layer.retain(|_, v| !v.is_zero());
        }
        debug_assert!(layer.is_empty(), "symmetric layer failed to reduce");
        Ok(LeadingPolynomial::from_coeffs(coeffs))
    }
}

/// Map (f_0, ..., f_m) of weights k, k+2, ..., k+2m to the weak Jacobi form
/// sum f_i phi_{-2,1}^i phi_{0,1}^(m-i) of weight k and index m. Zero slots
/// are allowed with any recorded weight.
pub fn structure_map(
    forms: &[ModularForm],
    weight: i64,
    index: i64,
    order: i64,
) -> Result<JacobiSeries> {
    if index < 0 || forms.len() != (index + 1) as usize {
        return Err(Error::HypothesisViolated(format!(
            "need exactly index+1 = {} forms, got {}",
            index + 1,
            forms.len()
        )));
    }
    for (i, f) in forms.iter().enumerate() {
        let expected = weight + 2 * i as i64;
        if !f.is_zero() && f.weight() != expected {
            return Err(Error::WeightMismatch { slot: i, expected, got: f.weight() });
        }
    }
    let m = index as usize;
    let mut result = JacobiSeries::zero(
        rat_int(weight),
        rat_int(index),
        crate::qseries::EXP_DEN,
        Some(order * crate::qseries::EXP_DEN),
    );
    if m == 0 {
        // empty product of generators: the forms themselves at r = 0
        let f = &forms[0];
        return Ok(result.add(&JacobiSeries::from_qseries(
            f.expansion(),
            rat_int(weight),
            rat_int(0),
        )));
    }
    let gen_order = order + 1;
    let phi_m2 = super::theta::phi_minus2_1(gen_order);
    let phi_0 = super::theta::phi_0_1(gen_order);
    // powers phi_m2^i and phi_0^(m-i), built incrementally
    let mut pow_m2 = vec![JacobiSeries::constant(Rat::one())];
    for i in 1..=m {
        pow_m2.push(pow_m2[i - 1].mul(&phi_m2));
    }
    let mut pow_0 = vec![JacobiSeries::constant(Rat::one())];
    for i in 1..=m {
        pow_0.push(pow_0[i - 1].mul(&phi_0));
    }
    for (i, f) in forms.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let f_wrapped = JacobiSeries::from_qseries(
            f.expansion(),
            rat_int(weight + 2 * i as i64),
            Rat::zero(),
        );
        let term = pow_m2[i].mul(&pow_0[m - i]).mul(&f_wrapped);
        result = result.add(&term);
    }
    debug_assert!(result.is_zero() || result.weight() == &rat_int(weight));
    debug_assert!(result.is_zero() || result.index() == &rat_int(index));
    Ok(result)
}

/// dim of weak Jacobi forms of even weight k and index m, via the linear
/// isomorphism with M_k + M_(k+2) + ... + M_(k+2m).
pub fn dim_weak_jacobi(weight: i64, index: i64) -> Result<i64> {
    if weight % 2 != 0 {
        return Err(Error::HypothesisViolated(format!(
            "dimension formula needs even weight, got {weight}"
        )));
    }
    if index < 0 {
        return Err(Error::HypothesisViolated(format!("index must be >= 0, got {index}")));
    }
    Ok((0..=index).map(|i| dim_modular_forms(weight + 2 * i)).sum())
}

/// sum_{nu=0}^{m} ceil(nu^2 / 4m): the codimension of true Jacobi forms
/// inside weak ones (weight >= 3). Equals m for 1 <= m <= 4.
pub fn codimension_sum(index: i64) -> Result<i64> {
    if index < 1 {
        return Err(Error::HypothesisViolated(format!("index must be >= 1, got {index}")));
    }
    Ok((0..=index).map(|nu| (nu * nu + 4 * index - 1) / (4 * index)).sum())
}

/// dim of true Jacobi forms of weight k >= 3 and index m >= 1.
pub fn dim_jacobi(weight: i64, index: i64) -> Result<i64> {
    if weight < 3 {
        return Err(Error::HypothesisViolated(format!(
            "true-Jacobi dimension formula needs weight >= 3, got {weight}"
        )));
    }
    Ok(dim_weak_jacobi(weight, index)? - codimension_sum(index)?)
}

/// Weak Jacobi forms Q_0, ..., Q_m of weight k >= 4 (even) and index m >= 1
/// with leading polynomial exactly x^i, produced by exact linear algebra on
/// the leading polynomials of E_i phi_{-2,1}^i phi_{0,1}^(m-i).
pub fn x_power_basis(weight: i64, index: i64, order: i64) -> Result<Vec<JacobiSeries>> {
    if weight < 4 || weight % 2 != 0 {
        return Err(Error::HypothesisViolated(format!(
            "x-power basis needs even weight >= 4, got {weight}"
        )));
    }
    if index < 1 {
        return Err(Error::HypothesisViolated(format!("index must be >= 1, got {index}")));
    }
    let m = index as usize;
    let images = eisenstein_images(weight, index, order)?;
    let mut rows = Vec::with_capacity(m + 1);
    for p in &images {
        let lead = p.leading_polynomial()?;
        rows.push((0..=m).map(|d| lead.coeff(d)).collect::<Vec<_>>());
    }
    let mat = RatMat::from_rows(rows);
    let inv = mat
        .inverse()
        .expect("leading polynomials (x-2)^i (x+10)^(m-i) form a basis");
    let mut out = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut q = JacobiSeries::zero(
            rat_int(weight),
            rat_int(index),
            crate::qseries::EXP_DEN,
            Some(order * crate::qseries::EXP_DEN),
        );
        for (i, p) in images.iter().enumerate() {
            let c = inv[(j, i)].clone();
            if !c.is_zero() {
                q = q.add(&p.scalar_mul(&c));
            }
        }
        out.push(q);
    }
    Ok(out)
}

/// The images P(E_i) = E_i phi_{-2,1}^i phi_{0,1}^(m-i) for i = 0..=m.
pub fn eisenstein_images(weight: i64, index: i64, order: i64) -> Result<Vec<JacobiSeries>> {
    let m = index as usize;
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let k_i = weight + 2 * i as i64;
        let e_i = if k_i == 0 { ModularForm::one() } else { eisenstein(k_i, order + 1)? };
        let mut slots = Vec::with_capacity(m + 1);
        for s in 0..=m {
            if s == i {
                slots.push(e_i.clone());
            } else {
                slots.push(ModularForm::zero(weight + 2 * s as i64, order + 1));
            }
        }
        out.push(structure_map(&slots, weight, index, order)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{phi_0_1, phi_minus2_1};
    use crate::rat::rat;

    #[test]
    fn leading_polynomials_of_generators() {
        let pm2 = phi_minus2_1(4).leading_polynomial().unwrap();
        assert_eq!(pm2.coeffs(), &[rat_int(-2), rat_int(1)]); // x - 2
        let p0 = phi_0_1(4).leading_polynomial().unwrap();
        assert_eq!(p0.coeffs(), &[rat_int(10), rat_int(1)]); // x + 10
    }

    #[test]
    fn leading_polynomial_of_product() {
        let p = phi_minus2_1(4).mul(&phi_0_1(4));
        let lead = p.leading_polynomial().unwrap();
        // (x-2)(x+10) = x^2 + 8x - 20
        assert_eq!(lead.coeffs(), &[rat_int(-20), rat_int(8), rat_int(1)]);
    }

    #[test]
    fn leading_polynomial_rejects_asymmetry() {
        let mut coeffs = std::collections::BTreeMap::new();
        let mut layer = Layer::new();
        layer.insert(1, rat_int(1)); // zeta alone, no 1/zeta partner
        coeffs.insert(0, layer);
        let s = JacobiSeries::from_coeffs(Rat::zero(), rat_int(1), 24, coeffs, Some(24));
        assert!(matches!(s.leading_polynomial(), Err(Error::NotPolynomialInX(_))));
    }

    #[test]
    fn binomial_round_trip() {
        let p = LeadingPolynomial::binomial(&rat_int(-2), 2); // (x-2)^2
        assert_eq!(p.coeffs(), &[rat_int(4), rat_int(-4), rat_int(1)]);
        let layer = p.to_layer();
        // (zeta - 2 + 1/zeta)^2 = zeta^2 - 4 zeta + 6 - 4/zeta + 1/zeta^2
        assert_eq!(layer[&2], rat_int(1));
        assert_eq!(layer[&1], rat_int(-4));
        assert_eq!(layer[&0], rat_int(6));
    }

    #[test]
    fn structure_map_constant() {
        let ones = [ModularForm::one()];
        let s = structure_map(&ones, 0, 0, 5).unwrap();
        assert_eq!(s.coeff_nr(0, 0), rat_int(1));
        assert_eq!(s.num_terms(), 1);
    }

    #[test]
    fn structure_map_pure_powers() {
        // (0, ..., 0, 1) with k = -2m gives phi_{-2,1}^m, leading (x-2)^m
        for m in 1..=3i64 {
            let mut forms = Vec::new();
            for s in 0..m {
                forms.push(ModularForm::zero(-2 * m + 2 * s, 8));
            }
            forms.push(ModularForm::one());
            let p = structure_map(&forms, -2 * m, m, 6).unwrap();
            let lead = p.leading_polynomial().unwrap();
            let expect = LeadingPolynomial::binomial(&rat_int(-2), m as usize);
            assert_eq!(lead, expect, "m = {m}");
        }
    }

    #[test]
    fn structure_map_weight_check() {
        let e4 = eisenstein(4, 6).unwrap();
        let bad = structure_map(&[e4.clone(), e4.clone()], 4, 1, 5);
        assert!(matches!(bad, Err(Error::WeightMismatch { slot: 1, .. })));
        let wrong_len = structure_map(&[e4], 4, 2, 5);
        assert!(wrong_len.is_err());
    }

    #[test]
    fn structure_map_e4_slot0() {
        // (E4, 0) with k=4, m=1 -> E4 * phi_{0,1}: c(0,0) = 10
        let e4 = eisenstein(4, 8).unwrap();
        let z6 = ModularForm::zero(6, 8);
        let p = structure_map(&[e4, z6], 4, 1, 6).unwrap();
        assert_eq!(p.coeff_nr(0, 0), rat_int(10));
        assert_eq!(p.coeff_nr(0, 1), rat_int(1));
    }

    #[test]
    fn eisenstein_image_leading_polynomials() {
        for (k, m) in [(4i64, 1i64), (4, 2), (6, 2), (4, 3)] {
            let images = eisenstein_images(k, m, 4).unwrap();
            for (i, p) in images.iter().enumerate() {
                let lead = p.leading_polynomial().unwrap();
                let expect = LeadingPolynomial::binomial(&rat_int(-2), i)
                    .mul(&LeadingPolynomial::binomial(&rat_int(10), m as usize - i));
                assert_eq!(lead, expect, "k={k} m={m} i={i}");
            }
        }
    }

    #[test]
    fn x_power_basis_leading_terms() {
        for (k, m) in [(4i64, 1i64), (4, 2), (6, 1)] {
            let basis = x_power_basis(k, m, 5).unwrap();
            assert_eq!(basis.len(), (m + 1) as usize);
            for (i, q) in basis.iter().enumerate() {
                let lead = q.leading_polynomial().unwrap();
                assert_eq!(lead, LeadingPolynomial::x_power(i), "k={k} m={m} i={i}");
            }
        }
    }

    #[test]
    fn change_of_basis_invertible_up_to_6() {
        for m in 1..=6usize {
            let rows: Vec<Vec<Rat>> = (0..=m)
                .map(|i| {
                    let p = LeadingPolynomial::binomial(&rat_int(-2), i)
                        .mul(&LeadingPolynomial::binomial(&rat_int(10), m - i));
                    (0..=m).map(|d| p.coeff(d)).collect()
                })
                .collect();
            let det = RatMat::from_rows(rows).det();
            assert!(!det.is_zero(), "m = {m}");
        }
    }

    #[test]
    fn dimension_formulas() {
        assert_eq!(codimension_sum(1).unwrap(), 1);
        assert_eq!(codimension_sum(2).unwrap(), 2);
        assert_eq!(codimension_sum(3).unwrap(), 3);
        assert_eq!(codimension_sum(4).unwrap(), 4);
        assert_eq!(codimension_sum(5).unwrap(), 6);
        assert_eq!(dim_weak_jacobi(4, 1).unwrap(), 2);
        assert_eq!(dim_weak_jacobi(4, 4).unwrap(), 6);
        assert_eq!(dim_jacobi(10, 1).unwrap(), dim_weak_jacobi(10, 1).unwrap() - 1);
        assert!(dim_jacobi(2, 1).is_err());
        assert!(dim_weak_jacobi(5, 1).is_err());
        assert!(codimension_sum(0).is_err());
    }

    #[test]
    fn ceil_arithmetic_in_codimension() {
        // ceil(nu^2/4m) spot checks: m=5 gives 0,1,1,1,1,2
        let m = 5i64;
        let terms: Vec<i64> = (0..=m).map(|nu| (nu * nu + 4 * m - 1) / (4 * m)).collect();
        assert_eq!(terms, vec![0, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn structure_map_outputs_satisfy_symmetry_and_weak_bound() {
        let e4 = eisenstein(4, 8).unwrap();
        let e6 = eisenstein(6, 8).unwrap();
        let p = structure_map(&[e4, e6.scalar_mul(&rat(3, 7))], 4, 1, 6).unwrap();
        let rep = p.elliptic_coefficient_symmetry(&[-2, -1, 0, 1, 2]).unwrap();
        assert!(rep.passed());
        let class = p.classify().unwrap();
        assert!(!matches!(class, crate::jacobi::Classification::ViolatesWeakBound { .. }));
    }
}
