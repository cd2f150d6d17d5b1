//! The weight -2 and weight 0 index-1 generators, built from Jacobi theta
//! series.
//!
//! The intermediate theta factors carry half-integer zeta-powers; they are
//! expanded on an internal zeta^(1/2) grid and the final quotients are
//! asserted to land on integer powers of q and zeta.

use std::collections::BTreeMap;

use num::Zero;

use crate::jacobi::JacobiSeries;
use crate::qseries::{QSeries, EXP_DEN};
use crate::rat::{rat_int, Rat};

/// Bivariate expansion with q-exponents on the 1/24 grid and zeta-exponents
/// on the 1/2 grid (keyed by 2r). Truncation is always finite here.
#[derive(Debug, Clone)]
struct HalfZeta {
    layers: BTreeMap<i64, BTreeMap<i64, Rat>>,
    trunc: i64,
}

impl HalfZeta {
    fn zero(trunc: i64) -> Self {
        HalfZeta { layers: BTreeMap::new(), trunc }
    }

    fn add_term(&mut self, n_key: i64, r2: i64, c: Rat) {
        if n_key >= self.trunc || c.is_zero() {
            return;
        }
        let layer = self.layers.entry(n_key).or_default();
        let cur = layer.entry(r2).or_insert_with(Rat::zero);
        *cur += c;
        if cur.is_zero() {
            layer.remove(&r2);
        }
        if layer.is_empty() {
            self.layers.remove(&n_key);
        }
    }

    fn min_key(&self) -> Option<i64> {
        self.layers.keys().next().copied()
    }

    fn mul(&self, other: &HalfZeta) -> HalfZeta {
        let ma = self.min_key().unwrap_or(self.trunc);
        let mb = other.min_key().unwrap_or(other.trunc);
        let trunc = (self.trunc + mb).min(other.trunc + ma);
        let mut out = HalfZeta::zero(trunc);
        for (na, la) in &self.layers {
            for (nb, lb) in &other.layers {
                let n = na + nb;
                if n >= trunc {
                    break;
                }
                for (ra, ca) in la {
                    for (rb, cb) in lb {
                        out.add_term(n, ra + rb, ca * cb);
                    }
                }
            }
        }
        out
    }

    fn mul_qseries(&self, q: &QSeries) -> HalfZeta {
        let q = q.rescale(EXP_DEN.max(q.den()));
        assert!(q.den() == EXP_DEN, "expected a series on the 1/24 grid");
        let ma = self.min_key().unwrap_or(self.trunc);
        let mb = q.min_key().unwrap_or_else(|| q.trunc().expect("finite"));
        let qt = q.trunc().expect("theta quotient factors are truncated");
        let trunc = (self.trunc + mb).min(qt + ma);
        let mut out = HalfZeta::zero(trunc);
        for (na, la) in &self.layers {
            for (nb, cb) in q.iter() {
                let n = na + nb;
                if n >= trunc {
                    break;
                }
                for (ra, ca) in la {
                    out.add_term(n, *ra, ca * cb);
                }
            }
        }
        out
    }

    /// Convert to a `JacobiSeries`, asserting integer q- and zeta-powers.
    fn into_jacobi(self, weight: i64, index: i64) -> JacobiSeries {
        let mut coeffs: BTreeMap<i64, crate::jacobi::Layer> = BTreeMap::new();
        for (n, layer) in self.layers {
            assert!(n % EXP_DEN == 0, "fractional q-power survived: {n}/{EXP_DEN}");
            for (r2, c) in layer {
                assert!(r2 % 2 == 0, "half-integer zeta power survived: {r2}/2");
                coeffs.entry(n).or_default().insert(r2 / 2, c);
            }
        }
        JacobiSeries::from_coeffs(rat_int(weight), rat_int(index), EXP_DEN, coeffs, Some(self.trunc))
    }
}

/// theta_2-like sum: q^((2n+1)^2/8) zeta^((2n+1)/2), with optional
/// alternating sign (-1)^n.
fn odd_theta(trunc: i64, alternating: bool) -> HalfZeta {
    let mut t = HalfZeta::zero(trunc);
    let mut n: i64 = 0;
    loop {
        let mut any = false;
        for m in [n, -n - 1] {
            let odd = 2 * m + 1;
            let key = 3 * odd * odd; // (2m+1)^2/8 on the /24 grid
            if key < trunc {
                any = true;
                let sign = if alternating && m.rem_euclid(2) == 1 { -1 } else { 1 };
                t.add_term(key, odd, rat_int(sign));
            }
        }
        if !any {
            break;
        }
        n += 1;
    }
    t
}

/// theta_3 / theta_4 sums: (+-1)^n q^(n^2/2) zeta^n.
fn even_theta(trunc: i64, alternating: bool) -> HalfZeta {
    let mut t = HalfZeta::zero(trunc);
    let mut n: i64 = 0;
    loop {
        let key = 12 * n * n; // n^2/2 on the /24 grid
        if key >= trunc {
            break;
        }
        let sign = if alternating && n.rem_euclid(2) == 1 { -1 } else { 1 };
        t.add_term(key, 2 * n, rat_int(sign));
        if n > 0 {
            t.add_term(key, -2 * n, rat_int(sign));
        }
        n += 1;
    }
    t
}

fn collapse_to_qseries(t: &HalfZeta) -> QSeries {
    let mut coeffs = BTreeMap::new();
    for (n, layer) in &t.layers {
        let s: Rat = layer.values().cloned().sum();
        if !s.is_zero() {
            coeffs.insert(*n, s);
        }
    }
    QSeries::from_coeffs(EXP_DEN, coeffs, Some(t.trunc))
}

/// Restriction of a theta factor to z = 0 (all zeta powers collapse to 1).
fn theta_at_zero(trunc: i64, odd: bool, alternating: bool) -> QSeries {
    let t = if odd { odd_theta(trunc, alternating) } else { even_theta(trunc, alternating) };
    collapse_to_qseries(&t)
}

/// The weight -2, index 1 generator: -theta_1(tau,z)^2 / eta^6, with q^0
/// layer exactly zeta - 2 + 1/zeta.
pub fn phi_minus2_1(order: i64) -> JacobiSeries {
    assert!(order >= 1);
    // theta_1 = -i * T with T real-rational; -theta_1^2 = T^2.
    let slack = 2 * EXP_DEN;
    let trunc = order * EXP_DEN;
    let t = odd_theta(trunc + slack + 6, true);
    let t2 = t.mul(&t);
    let eta6_inv = crate::qseries::eta(order + 4).pow(-6).expect("eta is invertible");
    let quot = t2.mul_qseries(&eta6_inv);
    quot.into_jacobi(-2, 1).truncate(trunc)
}

/// The weight 0, index 1 generator:
/// 4 [ (theta_2(z)/theta_2)^2 + (theta_3(z)/theta_3)^2 + (theta_4(z)/theta_4)^2 ],
/// with q^0 layer exactly zeta + 10 + 1/zeta.
pub fn phi_0_1(order: i64) -> JacobiSeries {
    assert!(order >= 1);
    let trunc = order * EXP_DEN;
    let t = trunc + 3 * EXP_DEN;

    let mut total: Option<JacobiSeries> = None;
    for (odd, alternating) in [(true, false), (false, false), (false, true)] {
        let num = if odd { odd_theta(t, false) } else { even_theta(t, alternating) };
        let num2 = num.mul(&num);
        let den2 = theta_at_zero(t, odd, alternating)
            .pow(2)
            .expect("square of a theta nullwert");
        let inv = den2.invert().expect("theta nullwert squares are invertible");
        let term = num2.mul_qseries(&inv);
        // Individual quotients can carry half-integer q-powers; they cancel
        // in the sum, so convert after adding on the shared grid.
        let jac = half_zeta_to_fractional_jacobi(term);
        total = Some(match total {
            None => jac,
            Some(acc) => acc.add(&jac),
        });
    }
    let sum = total.expect("three quotient terms").scalar_mul(&rat_int(4));
    assert!(
        sum.has_integer_exponents(),
        "half-integer q-powers must cancel in the generator sum"
    );
    sum.truncate(trunc)
}

/// Like `into_jacobi` but tolerating fractional q-powers (they cancel later);
/// still requires integer zeta-powers, which hold for each squared quotient.
fn half_zeta_to_fractional_jacobi(t: HalfZeta) -> JacobiSeries {
    let mut coeffs: BTreeMap<i64, crate::jacobi::Layer> = BTreeMap::new();
    for (n, layer) in t.layers {
        for (r2, c) in layer {
            assert!(r2 % 2 == 0, "squared theta quotients have integer zeta powers");
            coeffs.entry(n).or_default().insert(r2 / 2, c);
        }
    }
    JacobiSeries::from_coeffs(rat_int(0), rat_int(1), EXP_DEN, coeffs, Some(t.trunc))
}
