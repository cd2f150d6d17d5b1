//! Exact enumeration of short vectors in a shifted lattice.
//!
//! Bound propagation over a rational Cholesky-style completion of the Gram
//! form, scaled once so that every comparison in the search tree is integer
//! arithmetic. No floating point anywhere, so the enumeration is complete:
//! a vector is emitted if and only if its exact norm is within the bound.

use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{EvenLattice, LatticeVector};
use crate::rat::{isqrt_i128, rat_floor, rat_int, Rat};

/// Scaled completion data for Q(x) = sum q_ii (x_i + sum_{j>i} q_ij x_j)^2.
struct Completion {
    /// a[i] = lam * q_ii
    a: Vec<i128>,
    /// b[i][j] = lam * q_ij (j > i; lower entries unused)
    b: Vec<Vec<i128>>,
    lam: i128,
}

fn completion(lattice: &EvenLattice) -> Result<Completion> {
    let n = lattice.rank();
    let mut w: Vec<Vec<Rat>> = lattice
        .gram()
        .iter()
        .map(|row| row.iter().map(|&x| rat_int(x)).collect())
        .collect();
    let mut q = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        let pivot = w[i][i].clone();
        assert!(pivot.is_positive(), "positive definiteness guarantees positive pivots");
        q[i][i] = pivot.clone();
        for j in i + 1..n {
            q[i][j] = &w[i][j] / &pivot;
        }
        for r in i + 1..n {
            for c in i + 1..n {
                let corr = &w[r][i] * &w[i][c] / &pivot;
                w[r][c] = &w[r][c] - &corr;
            }
        }
    }
    let mut lam = num::BigInt::one();
    for i in 0..n {
        for j in i..n {
            lam = num::integer::lcm(lam, q[i][j].denom().clone());
        }
    }
    let lam_i = lam
        .to_i128()
        .filter(|v| *v < (1i128 << 40))
        .ok_or_else(|| Error::InvalidLattice("completion denominator too large".into()))?;
    let to_scaled = |x: &Rat| -> Result<i128> {
        (x * Rat::from_integer(lam.clone()))
            .to_integer()
            .to_i128()
            .filter(|v| v.abs() < (1i128 << 50))
            .ok_or_else(|| Error::InvalidLattice("completion coefficients too large".into()))
    };
    let mut a = Vec::with_capacity(n);
    let mut b = vec![vec![0i128; n]; n];
    for i in 0..n {
        a.push(to_scaled(&q[i][i])?);
        for j in i + 1..n {
            b[i][j] = to_scaled(&q[i][j])?;
        }
    }
    Ok(Completion { a, b, lam: lam_i })
}

struct Search<'a> {
    gram: &'a [Vec<i64>],
    comp: Completion,
    d: i64,
    g: Vec<i64>,
    mu: Vec<i64>,
    /// partial exact norms: norm[i] = sum over pairs with both indices >= i
    partial_norm: Vec<i128>,
    visit: &'a mut dyn FnMut(&[i64], i128, i64),
}

impl Search<'_> {
    fn run(&mut self, level: usize, budget: i128) {
        let n = self.mu.len();
        let i = level - 1;
        let lam = self.comp.lam;
        // s = sum_{j>i} b[i][j] mu_j, folded with the coset offset
        let mut s: i128 = 0;
        for j in level..n {
            s = s
                .checked_add(
                    self.comp.b[i][j]
                        .checked_mul(self.mu[j] as i128)
                        .expect("enumeration overflow"),
                )
                .expect("enumeration overflow");
        }
        let a = self.comp.a[i];
        let k_abs = isqrt_i128(budget / a);
        let c1 = lam.checked_mul(self.d as i128).expect("enumeration overflow");
        let c0 = lam
            .checked_mul(self.g[i] as i128)
            .and_then(|v| v.checked_add(s))
            .expect("enumeration overflow");
        // mu_i = g_i + d*k with |c1*k + c0| <= k_abs
        let lo = div_ceil_i128(-k_abs - c0, c1);
        let hi = div_floor_i128(k_abs - c0, c1);
        for k in lo..=hi {
            let v = c1 * k + c0;
            let val = a.checked_mul(v * v).expect("enumeration overflow");
            if val > budget {
                continue; // isqrt edge
            }
            let mu_i = self.g[i] + self.d * k as i64;
            self.mu[i] = mu_i;
            // exact scaled norm update: G_ii mu_i^2 + 2 mu_i sum_{j>i} G_ij mu_j
            let mut dot: i128 = 0;
            for j in level..n {
                dot += (self.gram[i][j] as i128) * (self.mu[j] as i128);
            }
            let contrib = (self.gram[i][i] as i128) * (mu_i as i128) * (mu_i as i128)
                + 2 * (mu_i as i128) * dot;
            self.partial_norm[i] = self.partial_norm[level] + contrib;
            if i == 0 {
                (self.visit)(&self.mu, self.partial_norm[0], self.d);
            } else {
                self.run(i, budget - val);
            }
        }
    }
}

fn div_floor_i128(a: i128, b: i128) -> i128 {
    let (q, r) = (a / b, a % b);
    if r != 0 && (r < 0) != (b < 0) {
        q - 1
    } else {
        q
    }
}

fn div_ceil_i128(a: i128, b: i128) -> i128 {
    -div_floor_i128(-a, b)
}

/// Visit every vector mu/d of L + shift with norm <= bound. The visitor
/// receives the scaled integer coordinates mu = d*(c + shift), the scaled
/// norm <mu,mu> = d^2 * norm, and the denominator d.
pub(crate) fn visit_coset(
    lattice: &EvenLattice,
    shift: &LatticeVector,
    bound: &Rat,
    visit: &mut dyn FnMut(&[i64], i128, i64),
) -> Result<()> {
    let n = lattice.rank();
    if shift.dim() != n {
        return Err(Error::Parse(format!(
            "shift has dimension {}, lattice rank is {n}",
            shift.dim()
        )));
    }
    if bound.is_negative() {
        return Ok(());
    }
    let d = shift.denominator()?;
    let g = shift.scaled_i64(d)?;
    let comp = completion(lattice)?;
    // R_top = floor(bound * lam^3 * d^2); all tree values are integers over
    // that common denominator, so the floor is exact.
    let lam = comp.lam;
    let scale = Rat::from_integer(num::BigInt::from(lam))
        .pow(3)
        * rat_int(d)
        * rat_int(d);
    let r_top = rat_floor(&(bound * &scale))
        .to_i128()
        .filter(|v| *v < (1i128 << 100))
        .ok_or_else(|| Error::InvalidLattice("enumeration bound too large".into()))?;
    if r_top < 0 {
        return Ok(());
    }
    let mut search = Search {
        gram: lattice.gram(),
        comp,
        d,
        g,
        mu: vec![0; n],
        partial_norm: vec![0; n + 1],
        visit,
    };
    search.run(n, r_top);
    Ok(())
}
