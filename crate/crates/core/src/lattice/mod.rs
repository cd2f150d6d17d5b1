//! Even positive-definite lattices, their discriminant groups and coset
//! modules.
//!
//! A lattice is held as its integer Gram matrix in a fixed basis; vectors are
//! rational coordinate tuples in that basis. The discriminant group L*/L
//! indexes the irreducible modules of the associated VOA; its coset
//! representatives carry a conformal weight, half the minimal coset norm.

mod enumerate;
mod voa;

pub use voa::{
    automorphism_trace, character, index_integrality, phi_evaluator, theta_series,
    twisted_character, CyclotomicSeries, IndexReport, PhiEvaluator,
};

use std::fmt;

use num::{One, Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::RatMat;
use crate::rat::{lcm_i64, parse_rat, rat, rat_int, rat_to_string, Rat};

/// Rational coordinate vector in the lattice basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeVector(pub Vec<Rat>);

impl LatticeVector {
    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![Rat::zero(); rank])
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| rat_int(c)).collect())
    }

    /// Parse comma-separated rational coordinates like "1,0,-1/2"; a
    /// trailing alphabetic tag (e.g. "basis") is tolerated.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_end_matches(|c: char| c.is_ascii_alphabetic());
        let coords: Result<Vec<Rat>> = s.split(',').map(parse_rat).collect();
        Ok(LatticeVector(coords?))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        assert_eq!(self.dim(), other.dim());
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| -a.clone()).collect())
    }

    pub fn scale(&self, c: &Rat) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * c).collect())
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denominator(&self) -> Result<i64> {
        let mut d = 1i64;
        for c in &self.0 {
            d = lcm_i64(d, crate::rat::denom_i64(c)?);
        }
        Ok(d)
    }

    /// Coordinates scaled by `d` as integers; `d` must clear denominators.
    pub fn scaled_i64(&self, d: i64) -> Result<Vec<i64>> {
        self.0
            .iter()
            .map(|c| crate::rat::numer_i64(&(c * rat_int(d))))
            .collect()
    }

    /// Componentwise reduction mod 1 into [0, 1).
    pub fn reduce_mod_1(&self) -> LatticeVector {
        LatticeVector(
            self.0
                .iter()
                .map(|c| c - Rat::from_integer(crate::rat::rat_floor(c)))
                .collect(),
        )
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(rat_to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One irreducible module of the lattice VOA: a coset of L in L* together
/// with its conformal weight (half the minimal norm in the coset).
#[derive(Debug, Clone, PartialEq)]
pub struct CosetModule {
    pub representative: LatticeVector,
    pub conformal_weight: Rat,
}

impl CosetModule {
    pub fn is_vacuum(&self) -> bool {
        self.representative.is_zero()
    }
}

/// Even positive-definite integral lattice, defined by its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenLattice {
    gram: Vec<Vec<i64>>,
    rank: usize,
}

#[derive(Deserialize)]
struct LatticeJson {
    gram: Vec<Vec<i64>>,
}

impl EvenLattice {
    /// Validate and wrap a Gram matrix: symmetric, even diagonal, positive
    /// definite (all leading principal minors positive, checked exactly).
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let rank = gram.len();
        if rank == 0 {
            return Err(Error::InvalidLattice("empty Gram matrix".into()));
        }
        if gram.iter().any(|row| row.len() != rank) {
            return Err(Error::InvalidLattice("Gram matrix is not square".into()));
        }
        for i in 0..rank {
            if gram[i][i] % 2 != 0 {
                return Err(Error::InvalidLattice(format!(
                    "diagonal entry gram[{i}][{i}] = {} is odd",
                    gram[i][i]
                )));
            }
            for j in 0..rank {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidLattice(format!(
                        "Gram matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        for k in 1..=rank {
            let minor = RatMat::from_rows(
                (0..k)
                    .map(|i| (0..k).map(|j| rat_int(gram[i][j])).collect())
                    .collect(),
            )
            .det();
            if !minor.is_positive() {
                return Err(Error::InvalidLattice(format!(
                    "leading principal minor of size {k} is not positive"
                )));
            }
        }
        Ok(EvenLattice { gram, rank })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let dto: LatticeJson =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("lattice JSON: {e}")))?;
        EvenLattice::new(dto.gram)
    }

    /// Built-in lattices: "E8", "A1", and the orthogonal sum "A1+E8".
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "E8" => Ok(EvenLattice::e8()),
            "A1" => Ok(EvenLattice::a1()),
            "A1+E8" | "E8+A1" => Ok(EvenLattice::a1().direct_sum(&EvenLattice::e8())),
            other => Err(Error::Parse(format!(
                "unknown lattice '{other}' (expected E8, A1, A1+E8, or a JSON file)"
            ))),
        }
    }

    /// The E8 root lattice via its Cartan matrix (Bourbaki numbering).
    pub fn e8() -> Self {
        let gram = vec![
            vec![2, 0, -1, 0, 0, 0, 0, 0],
            vec![0, 2, 0, -1, 0, 0, 0, 0],
            vec![-1, 0, 2, -1, 0, 0, 0, 0],
            vec![0, -1, -1, 2, -1, 0, 0, 0],
            vec![0, 0, 0, -1, 2, -1, 0, 0],
            vec![0, 0, 0, 0, -1, 2, -1, 0],
            vec![0, 0, 0, 0, 0, -1, 2, -1],
            vec![0, 0, 0, 0, 0, 0, -1, 2],
        ];
        EvenLattice::new(gram).expect("E8 Cartan matrix is valid")
    }

    /// The A1 root lattice: Gram matrix `[[2]]`.
    pub fn a1() -> Self {
        EvenLattice::new(vec![vec![2]]).expect("A1 is valid")
    }

    pub fn direct_sum(&self, other: &EvenLattice) -> EvenLattice {
        let n = self.rank + other.rank;
        let mut gram = vec![vec![0i64; n]; n];
        for i in 0..self.rank {
            gram[i][..self.rank].copy_from_slice(&self.gram[i]);
        }
        for i in 0..other.rank {
            for j in 0..other.rank {
                gram[self.rank + i][self.rank + j] = other.gram[i][j];
            }
        }
        EvenLattice::new(gram).expect("direct sum of valid lattices is valid")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    fn gram_rat(&self) -> RatMat {
        RatMat::from_rows(
            self.gram
                .iter()
                .map(|row| row.iter().map(|&x| rat_int(x)).collect())
                .collect(),
        )
    }

    pub fn det(&self) -> Rat {
        self.gram_rat().det()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det() == rat_int(1)
    }

    /// Bilinear form <a, b> = a^T G b, exact.
    pub fn pairing(&self, a: &LatticeVector, b: &LatticeVector) -> Rat {
        assert_eq!(a.dim(), self.rank);
        assert_eq!(b.dim(), self.rank);
        let mut s = Rat::zero();
        for i in 0..self.rank {
            if a.0[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                if self.gram[i][j] != 0 && !b.0[j].is_zero() {
                    s += &a.0[i] * rat_int(self.gram[i][j]) * &b.0[j];
                }
            }
        }
        s
    }

    pub fn norm(&self, a: &LatticeVector) -> Rat {
        self.pairing(a, a)
    }

    /// G*v as a rational vector.
    pub fn gram_times(&self, v: &LatticeVector) -> Vec<Rat> {
        (0..self.rank)
            .map(|i| {
                let mut s = Rat::zero();
                for j in 0..self.rank {
                    if self.gram[i][j] != 0 {
                        s += rat_int(self.gram[i][j]) * &v.0[j];
                    }
                }
                s
            })
            .collect()
    }

    /// Membership in L: integer coordinates.
    pub fn contains(&self, v: &LatticeVector) -> bool {
        v.dim() == self.rank && v.is_integral()
    }

    /// Membership in the dual L*: G*v integral.
    pub fn dual_contains(&self, v: &LatticeVector) -> bool {
        v.dim() == self.rank && self.gram_times(v).iter().all(|c| c.is_integer())
    }

    /// Complete set of coset representatives of L*/L with conformal weights.
    /// The zero coset (the VOA itself) comes first; the rest are sorted by
    /// conformal weight, then lexicographically.
    pub fn discriminant_group(&self) -> Vec<CosetModule> {
        let n = self.rank;
        // Column-triangularize G over the integers: column operations
        // preserve the column lattice G Z^n, so representatives of
        // Z^n / G Z^n are the boxes 0 <= y_i < h_ii.
        let mut h: Vec<Vec<i128>> = (0..n)
            .map(|i| (0..n).map(|j| self.gram[i][j] as i128).collect())
            .collect();
        for i in 0..n {
            loop {
                let mut j_nz: Option<usize> = None;
                for j in i + 1..n {
                    if h[i][j] != 0 {
                        j_nz = Some(j);
                        break;
                    }
                }
                let Some(j) = j_nz else { break };
                if h[i][i] == 0 || h[i][j].abs() < h[i][i].abs() {
                    for row in h.iter_mut() {
                        row.swap(i, j);
                    }
                    continue;
                }
                let f = h[i][j] / h[i][i];
                for row in h.iter_mut() {
                    let v = row[i];
                    row[j] -= f * v;
                }
            }
            if h[i][i] < 0 {
                for row in h.iter_mut() {
                    row[i] = -row[i];
                }
            }
        }
        let g_inv = self.gram_rat().inverse().expect("Gram matrix is nonsingular");
        let mut cosets: Vec<CosetModule> = Vec::new();
        let mut y = vec![0i128; n];
        'outer: loop {
            let yv: Vec<Rat> = y.iter().map(|&v| rat_int(v as i64)).collect();
            let gamma = LatticeVector(g_inv.mul_vec(&yv)).reduce_mod_1();
            let conformal_weight = self.minimal_coset_norm(&gamma) / rat_int(2);
            cosets.push(CosetModule { representative: gamma, conformal_weight });
            // mixed-radix increment over the box
            let mut i = 0;
            loop {
                if i == n {
                    break 'outer;
                }
                y[i] += 1;
                if y[i] < h[i][i] {
                    break;
                }
                y[i] = 0;
                i += 1;
            }
        }
        cosets.sort_by(|a, b| {
            (!a.is_vacuum(), &a.conformal_weight, &a.representative.0)
                .cmp(&(!b.is_vacuum(), &b.conformal_weight, &b.representative.0))
        });
        cosets
    }

    /// Minimal norm over the coset L + shift, by complete enumeration inside
    /// an exact box bound.
    pub fn minimal_coset_norm(&self, shift: &LatticeVector) -> Rat {
        // Reduce coordinates into [-1/2, 1/2]: that vector lies in the coset,
        // so its norm bounds the minimum and makes the enumeration complete.
        let mut reduced = shift.reduce_mod_1();
        for c in reduced.0.iter_mut() {
            if &*c * rat_int(2) > Rat::one() {
                *c -= Rat::one();
            }
        }
        let bound = self.norm(&reduced);
        if bound.is_zero() {
            return Rat::zero();
        }
        let mut best = bound.clone();
        enumerate::visit_coset(self, shift, &bound, &mut |_mu, norm_scaled, d| {
            let norm = rat_int(norm_scaled as i64) / rat_int(d * d);
            if norm < best {
                best = norm;
            }
        })
        .expect("minimal norm enumeration");
        best
    }

    /// All vectors of L + shift with norm <= bound, exact and complete,
    /// sorted lexicographically.
    pub fn enumerate_vectors(
        &self,
        shift: &LatticeVector,
        bound: &Rat,
    ) -> Result<Vec<LatticeVector>> {
        let mut out = Vec::new();
        enumerate::visit_coset(self, shift, bound, &mut |mu, _norm, d| {
            out.push(LatticeVector(mu.iter().map(|&c| rat(c, d)).collect()));
        })?;
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    /// Visitor-based coset enumeration used by the character builders:
    /// `visit(mu, norm_scaled, d)` receives each vector of L + shift scaled
    /// by the coset denominator d (lambda = mu/d) together with its scaled
    /// norm <mu,mu> = d^2 <lambda,lambda>.
    pub fn visit_coset(
        &self,
        shift: &LatticeVector,
        bound: &Rat,
        visit: &mut dyn FnMut(&[i64], i128, i64),
    ) -> Result<()> {
        enumerate::visit_coset(self, shift, bound, visit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_grams() {
        assert!(matches!(
            EvenLattice::new(vec![vec![1]]),
            Err(Error::InvalidLattice(_))
        )); // odd diagonal
        assert!(matches!(
            EvenLattice::new(vec![vec![2, 1], vec![0, 2]]),
            Err(Error::InvalidLattice(_))
        )); // asymmetric
        assert!(matches!(
            EvenLattice::new(vec![vec![-2]]),
            Err(Error::InvalidLattice(_))
        )); // not positive definite
        assert!(matches!(
            EvenLattice::new(vec![vec![2, 2], vec![2, 2]]),
            Err(Error::InvalidLattice(_))
        )); // singular
    }

    #[test]
    fn e8_is_even_unimodular() {
        let e8 = EvenLattice::e8();
        assert_eq!(e8.rank(), 8);
        assert_eq!(e8.det(), rat_int(1));
        assert!(e8.is_unimodular());
    }

    #[test]
    fn a1_discriminant_group() {
        let a1 = EvenLattice::a1();
        assert_eq!(a1.det(), rat_int(2));
        let cosets = a1.discriminant_group();
        assert_eq!(cosets.len(), 2);
        assert!(cosets[0].is_vacuum());
        assert_eq!(cosets[0].conformal_weight, rat_int(0));
        assert_eq!(cosets[1].representative.0, vec![rat(1, 2)]);
        assert_eq!(cosets[1].conformal_weight, rat(1, 4));
    }

    #[test]
    fn e8_discriminant_group_is_trivial() {
        let cosets = EvenLattice::e8().discriminant_group();
        assert_eq!(cosets.len(), 1);
        assert!(cosets[0].is_vacuum());
        assert_eq!(cosets[0].conformal_weight, rat_int(0));
    }

    #[test]
    fn a1_plus_e8_has_two_cosets() {
        let l = EvenLattice::from_name("A1+E8").unwrap();
        assert_eq!(l.rank(), 9);
        assert_eq!(l.det(), rat_int(2));
        let cosets = l.discriminant_group();
        assert_eq!(cosets.len(), 2);
        assert_eq!(cosets[1].conformal_weight, rat(1, 4));
    }

    #[test]
    fn pairing_and_membership() {
        let e8 = EvenLattice::e8();
        let h = LatticeVector::from_i64(&[1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(e8.norm(&h), rat_int(2)); // simple roots have norm 2
        assert!(e8.contains(&h));
        assert!(e8.dual_contains(&h));
        let half = h.scale(&rat(1, 2));
        assert!(!e8.contains(&half));
        assert!(!e8.dual_contains(&half)); // E8 is self-dual
    }

    #[test]
    fn vector_parsing() {
        let v = LatticeVector::parse("1,0,-1/2").unwrap();
        assert_eq!(v.0, vec![rat_int(1), rat_int(0), rat(-1, 2)]);
        let tagged = LatticeVector::parse("1,0,0,0,0,0,0,0basis").unwrap();
        assert_eq!(tagged.dim(), 8);
        assert!(LatticeVector::parse("1,,2").is_err());
        assert_eq!(v.denominator().unwrap(), 2);
        assert_eq!(v.scaled_i64(2).unwrap(), vec![2, 0, -1]);
    }
}
