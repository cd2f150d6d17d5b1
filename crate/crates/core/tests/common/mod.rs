//! Independent oracles for the integration tests.
//!
//! Everything here is deliberately naive: dense vectors, plain convolution,
//! direct product expansion. None of it shares code with the library's
//! sparse-series, pentagonal-number or lattice-enumeration paths, so
//! agreement is evidence, not tautology.

#![allow(dead_code)]

use std::collections::BTreeMap;

use jacform::rat::{rat_int, Rat};
use num::{One, Zero};

/// Dense polynomial in q: value[n] is the coefficient of q^n.
pub type Dense = Vec<Rat>;

pub fn dense_one(len: usize) -> Dense {
    let mut v = vec![Rat::zero(); len];
    v[0] = Rat::one();
    v
}

pub fn dense_mul(a: &Dense, b: &Dense, len: usize) -> Dense {
    let mut out = vec![Rat::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// prod_{n=1}^{len-1} (1 - q^n), multiplied out term by term.
pub fn euler_product(len: usize) -> Dense {
    let mut out = dense_one(len);
    for n in 1..len {
        let mut factor = dense_one(len);
        factor[n] = -Rat::one();
        out = dense_mul(&out, &factor, len);
    }
    out
}

/// prod (1 - q^n)^(-e) for e >= 1: colored partition generating function,
/// multiplied out via the expansion (1 - q^n)^(-e) = sum C(j+e-1, e-1) q^(nj).
pub fn euler_product_inverse_pow(e: usize, len: usize) -> Dense {
    let mut out = dense_one(len);
    for n in 1..len {
        let mut factor = vec![Rat::zero(); len];
        let mut j = 0;
        let mut binom = Rat::one(); // C(j+e-1, e-1)
        while n * j < len {
            factor[n * j] = binom.clone();
            binom = binom * rat_int((j + e) as i64) / rat_int((j + 1) as i64);
            j += 1;
        }
        out = dense_mul(&out, &factor, len);
    }
    out
}

/// sigma_k(n) by direct divisor enumeration.
pub fn divisor_power_sum(k: u32, n: i64) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d.pow(k)).sum()
}

/// Bivariate dense series on the half-integer q-grid: key (2n, r) holds the
/// coefficient of q^n zeta^r.
#[derive(Debug, Clone, PartialEq)]
pub struct Biv {
    pub terms: BTreeMap<(i64, i64), Rat>,
    /// exclusive bound on 2n
    pub len2: i64,
}

impl Biv {
    pub fn one(len2: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), Rat::one());
        Biv { terms, len2 }
    }

    pub fn term(len2: i64, entries: &[(i64, i64, Rat)]) -> Self {
        let mut terms = BTreeMap::new();
        for (n2, r, c) in entries {
            if *n2 < len2 && !c.is_zero() {
                terms.insert((*n2, *r), c.clone());
            }
        }
        Biv { terms, len2 }
    }

    pub fn mul(&self, other: &Biv) -> Biv {
        let len2 = self.len2.min(other.len2);
        let mut out: BTreeMap<(i64, i64), Rat> = BTreeMap::new();
        for ((na, ra), ca) in &self.terms {
            for ((nb, rb), cb) in &other.terms {
                let n = na + nb;
                if n >= len2 {
                    break;
                }
                let e = out.entry((n, ra + rb)).or_insert_with(Rat::zero);
                *e += ca * cb;
            }
        }
        out.retain(|_, v| !v.is_zero());
        Biv { terms: out, len2 }
    }

    pub fn add(&self, other: &Biv) -> Biv {
        let len2 = self.len2.min(other.len2);
        let mut out = self.terms.clone();
        out.retain(|(n, _), _| *n < len2);
        for ((n, r), c) in &other.terms {
            if *n < len2 {
                let e = out.entry((*n, *r)).or_insert_with(Rat::zero);
                *e += c;
            }
        }
        out.retain(|_, v| !v.is_zero());
        Biv { terms: out, len2 }
    }

    pub fn scale(&self, c: &Rat) -> Biv {
        let mut out = self.terms.clone();
        for v in out.values_mut() {
            *v = &*v * c;
        }
        out.retain(|_, v| !v.is_zero());
        Biv { terms: out, len2: self.len2 }
    }

    /// Coefficient of q^n zeta^r at integer n.
    pub fn coeff(&self, n: i64, r: i64) -> Rat {
        self.terms.get(&(2 * n, r)).cloned().unwrap_or_else(Rat::zero)
    }
}

/// prod_{n >= 1} (1 + s x zeta)(1 + s x / zeta) / (1 + s x)^2 with
/// x = q^n (or q^(n - 1/2) when `half_shift`), s = +-1. One power of each
/// factor; the theta-quotient oracles square the result.
fn apply_triple_factors(mut acc: Biv, sign: i64, half_shift: bool, len2: i64) -> Biv {
    let mut n = 1i64;
    loop {
        let e2 = if half_shift { 2 * n - 1 } else { 2 * n };
        if e2 >= len2 {
            break;
        }
        let s = rat_int(sign);
        // (1 + s x zeta)(1 + s x / zeta) = 1 + s x (zeta + 1/zeta) + x^2
        let f = Biv::term(
            len2,
            &[
                (0, 0, Rat::one()),
                (e2, 1, s.clone()),
                (e2, -1, s.clone()),
                (2 * e2, 0, Rat::one()),
            ],
        );
        acc = acc.mul(&f);
        // (1 + s x)^(-2) = sum_j (j+1) (-s)^j x^j
        let mut inv = BTreeMap::new();
        let mut j = 0i64;
        while j * e2 < len2 {
            let neg_s_pow = if sign == 1 {
                if j % 2 == 0 { 1 } else { -1 }
            } else {
                1
            };
            inv.insert((j * e2, 0i64), rat_int((j + 1) * neg_s_pow));
            j += 1;
        }
        acc = acc.mul(&Biv { terms: inv, len2 });
        n += 1;
    }
    acc
}

/// Product-formula oracle for the weight -2, index 1 generator:
/// (zeta - 2 + 1/zeta) prod (1 - q^n zeta)^2 (1 - q^n / zeta)^2 (1 - q^n)^(-4).
pub fn phi_minus2_1_oracle(order: i64) -> Biv {
    let len2 = 2 * order;
    let mut acc = Biv::term(
        len2,
        &[
            (0, 1, Rat::one()),
            (0, 0, rat_int(-2)),
            (0, -1, Rat::one()),
        ],
    );
    let mut n = 1i64;
    while 2 * n < len2 {
        let e2 = 2 * n;
        // (1 - q^n zeta)^2 = 1 - 2 q^n zeta + q^(2n) zeta^2, same for 1/zeta
        let f_plus = Biv::term(
            len2,
            &[
                (0, 0, Rat::one()),
                (e2, 1, rat_int(-2)),
                (2 * e2, 2, Rat::one()),
            ],
        );
        let f_minus = Biv::term(
            len2,
            &[
                (0, 0, Rat::one()),
                (e2, -1, rat_int(-2)),
                (2 * e2, -2, Rat::one()),
            ],
        );
        acc = acc.mul(&f_plus).mul(&f_minus);
        // (1 - q^n)^(-4) = sum C(j+3,3) q^(nj)
        let mut inv = BTreeMap::new();
        let mut j = 0i64;
        while j * e2 < len2 {
            let c = (j + 1) * (j + 2) * (j + 3) / 6;
            inv.insert((j * e2, 0i64), rat_int(c));
            j += 1;
        }
        acc = acc.mul(&Biv { terms: inv, len2 });
        n += 1;
    }
    acc
}

/// Product-formula oracle for the weight 0, index 1 generator via the three
/// even theta quotients:
/// 4 [ (th2(z)/th2)^2 + (th3(z)/th3)^2 + (th4(z)/th4)^2 ].
pub fn phi_0_1_oracle(order: i64) -> Biv {
    let len2 = 2 * order;
    // (th2(z)/th2(0))^2 = (zeta + 2 + 1/zeta)/4 * prod [(1+q^n zeta)(1+q^n/zeta)/(1+q^n)^2]^2
    let lead2 = Biv::term(
        len2,
        &[
            (0, 1, jacform::rat::rat(1, 4)),
            (0, 0, jacform::rat::rat(2, 4)),
            (0, -1, jacform::rat::rat(1, 4)),
        ],
    );
    let t2 = {
        let once = apply_triple_factors(Biv::one(len2), 1, false, len2);
        lead2.mul(&once).mul(&once)
    };
    // (th3(z)/th3(0))^2: factors at exponents n - 1/2 with + signs
    let t3 = {
        let once = apply_triple_factors(Biv::one(len2), 1, true, len2);
        once.mul(&once)
    };
    // (th4(z)/th4(0))^2: factors at exponents n - 1/2 with - signs
    let t4 = {
        let once = apply_triple_factors(Biv::one(len2), -1, true, len2);
        once.mul(&once)
    };
    t2.add(&t3).add(&t4).scale(&rat_int(4))
}
