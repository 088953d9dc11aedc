//! Finite-order lattice isometries and their spectral bookkeeping.
//!
//! An [`Isometry`] carries both the ambient matrix (acting on row vectors on
//! the right) and its restriction to a lattice basis. The restriction's
//! characteristic polynomial is a product of cyclotomics; rewriting it as
//! `prod_d (x^d - 1)^(m_d)` feeds the twisted character, and the eigenvalue
//! multiplicities `r_j` at `exp(2 pi i j / order)` feed the conformal weight
//! of the twisted sector.

use crate::lattice::Lattice;
use crate::linalg::{solve_xa_eq_b, IntMatrix};
use crate::{int, Error, Int, Rat, Result};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

const ORDER_BOUND: u32 = 10_000;

/// Integer polynomial, coefficients ascending, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntPoly {
    coeffs: Vec<Int>,
}

impl IntPoly {
    pub fn from_coeffs(mut coeffs: Vec<Int>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        IntPoly { coeffs: vec![Int::one()] }
    }

    /// `x^d - 1`.
    pub fn x_pow_minus_one(d: u32) -> Self {
        let mut c = vec![Int::zero(); d as usize + 1];
        c[0] = -Int::one();
        c[d as usize] = Int::one();
        IntPoly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return IntPoly::zero();
        }
        let mut out = vec![Int::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::from_coeffs(out)
    }

    /// Long division by a monic divisor; `None` if the remainder is nonzero.
    pub fn div_exact(&self, divisor: &IntPoly) -> Option<IntPoly> {
        let dd = divisor.degree()?;
        assert!(divisor.coeffs[dd].is_one(), "divisor must be monic");
        if self.coeffs.is_empty() {
            return Some(IntPoly::zero());
        }
        let nd = self.degree()?;
        if nd < dd {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Int::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd].clone();
            if c.is_zero() {
                continue;
            }
            quot[k] = c.clone();
            for (i, dcf) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &c * dcf;
            }
        }
        if rem.iter().any(|r| !r.is_zero()) {
            return None;
        }
        Some(IntPoly::from_coeffs(quot))
    }

    pub fn eval_int(&self, x: &Int) -> Int {
        let mut acc = Int::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// k-th cyclotomic polynomial, by dividing `x^k - 1` through the
    /// cyclotomics of the proper divisors.
    pub fn cyclotomic(k: u32) -> IntPoly {
        assert!(k >= 1);
        let mut phi = IntPoly::x_pow_minus_one(k);
        for d in divisors(k) {
            if d < k {
                phi = phi
                    .div_exact(&IntPoly::cyclotomic(d))
                    .expect("x^k - 1 is divisible by the cyclotomics of divisors");
            }
        }
        phi
    }
}

pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

pub fn moebius(n: u32) -> i64 {
    assert!(n >= 1);
    let mut m = n;
    let mut factors = 0;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
            factors += 1;
        }
        p += 1;
    }
    if m > 1 {
        factors += 1;
    }
    if factors % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Faddeev-LeVerrier characteristic polynomial `det(x I - A)`; every division
/// is exact over the integers.
pub fn char_poly(a: &IntMatrix) -> IntPoly {
    let n = a.rows();
    assert_eq!(n, a.cols(), "characteristic polynomial needs a square matrix");
    let mut coeffs = vec![Int::zero(); n + 1];
    coeffs[n] = Int::one();
    let mut m = IntMatrix::identity(n);
    for k in 1..=n {
        let am = a.mul(&m);
        let mut tr = Int::zero();
        for i in 0..n {
            tr += &am[(i, i)];
        }
        let c = -tr / int(k as i64);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = am[(i, j)].clone();
            }
            m[(i, i)] += &c;
        }
        coeffs[n - k] = c;
    }
    IntPoly::from_coeffs(coeffs)
}

/// Finite-order isometry of a lattice, stored as the ambient matrix together
/// with its restriction to the lattice's stored basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Isometry {
    ambient: IntMatrix,
    basis_action: IntMatrix,
    order: u32,
}

fn matrix_order(a: &IntMatrix) -> Result<u32> {
    let n = a.rows();
    let id = IntMatrix::identity(n);
    let mut pw = a.clone();
    for k in 1..=ORDER_BOUND {
        if pw == id {
            return Ok(k);
        }
        pw = pw.mul(a);
    }
    Err(Error::Hypothesis(format!("isometry order exceeds {ORDER_BOUND}")))
}

impl Isometry {
    /// Bind an ambient matrix to a lattice. Requires that it preserve the
    /// ambient form, map the lattice onto itself, and have finite order.
    pub fn new(l: &Lattice, ambient: IntMatrix) -> Result<Self> {
        let n = l.ambient_dim();
        if ambient.rows() != n || ambient.cols() != n {
            return Err(Error::Shape(format!(
                "ambient matrix is {}x{} but the space has dimension {n}",
                ambient.rows(),
                ambient.cols()
            )));
        }
        let p = ambient.to_rat();
        let g = l.ambient_gram();
        if p.mul(g).mul(&p.transpose()) != *g {
            return Err(Error::Hypothesis("matrix does not preserve the ambient form".into()));
        }
        let b = l.basis().to_rat();
        let image = b.mul(&p);
        let s = solve_xa_eq_b(&b, &image)
            .ok_or_else(|| Error::Hypothesis("matrix does not preserve the lattice span".into()))?;
        if !s.is_integral() {
            return Err(Error::Hypothesis("matrix does not map the lattice into itself".into()));
        }
        let (_, basis_action) = s.clear_denominators();
        let order = matrix_order(&basis_action)?;
        Ok(Isometry { ambient, basis_action, order })
    }

    pub fn ambient(&self) -> &IntMatrix {
        &self.ambient
    }

    /// Action on stored-basis coordinates (row vectors, acting on the right).
    pub fn basis_action(&self) -> &IntMatrix {
        &self.basis_action
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.basis_action.rows()
    }

    /// Image of an ambient rational vector.
    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        let n = self.ambient.rows();
        assert_eq!(v.len(), n);
        let mut out = vec![Rat::zero(); n];
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..n {
                let a = &self.ambient[(i, j)];
                if a.is_zero() {
                    continue;
                }
                out[j] += &v[i] * Rat::from_integer(a.clone());
            }
        }
        out
    }

    /// `self^k`, with `k` reduced modulo the order.
    pub fn power(&self, k: i64) -> Isometry {
        let e = k.rem_euclid(self.order as i64) as u32;
        let n = self.ambient.rows();
        let r = self.basis_action.rows();
        let mut amb = IntMatrix::identity(n);
        let mut act = IntMatrix::identity(r);
        for _ in 0..e {
            amb = amb.mul(&self.ambient);
            act = act.mul(&self.basis_action);
        }
        let order = if e == 0 { 1 } else { self.order / gcd_u32(self.order, e) };
        Isometry { ambient: amb, basis_action: act, order }
    }

    /// The same ambient matrix bound to another (stable) lattice.
    pub fn rebind(&self, l: &Lattice) -> Result<Isometry> {
        Isometry::new(l, self.ambient.clone())
    }

    /// `v - apply(v)` as an ambient map, useful for radical computations.
    pub fn one_minus_ambient(&self) -> IntMatrix {
        IntMatrix::identity(self.ambient.rows()).sub(&self.ambient)
    }
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

/// The Coxeter element of `sqrt(2) A_{p-1}`, acting diagonally on the d-th
/// power: ambient coordinates rotate cyclically within each block of p, so
/// `beta_i -> beta_(i+1)` and `beta_(p-1) -> -(beta_1 + ... + beta_(p-1))`.
pub fn coxeter_sigma(p: u32, d: usize, l: &Lattice) -> Result<Isometry> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::Parameter(format!("p must be odd and at least 3, got {p}")));
    }
    let pu = p as usize;
    let n = pu * d;
    if l.ambient_dim() != n {
        return Err(Error::Shape(format!(
            "lattice has ambient dimension {} but p = {p}, d = {d} needs {n}",
            l.ambient_dim()
        )));
    }
    let mut perm = IntMatrix::zero(n, n);
    for block in 0..d {
        for i in 0..pu {
            perm[(block * pu + i, block * pu + (i + 1) % pu)] = Int::one();
        }
    }
    Isometry::new(l, perm)
}

/// Spectral data of a finite-order isometry: cyclotomic exponents `n_k`,
/// the exponents `m_d` of `det(x - sigma) = prod_d (x^d - 1)^(m_d)`, and the
/// multiplicity `r[j]` of the eigenvalue `exp(2 pi i j / order)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpectralData {
    pub order: u32,
    pub rank: usize,
    pub char_poly: IntPoly,
    pub n_k: BTreeMap<u32, i64>,
    pub m_d: BTreeMap<u32, i64>,
    pub r: Vec<i64>,
}

impl SpectralData {
    pub fn new(iso: &Isometry) -> Result<Self> {
        let cp = char_poly(iso.basis_action());
        let order = iso.order();
        let rank = iso.rank();

        let mut n_k = BTreeMap::new();
        let mut rem = cp.clone();
        for k in divisors(order) {
            let phi = IntPoly::cyclotomic(k);
            let mut e = 0i64;
            while let Some(q) = rem.div_exact(&phi) {
                rem = q;
                e += 1;
            }
            if e > 0 {
                n_k.insert(k, e);
            }
        }
        if !rem.is_one() {
            return Err(Error::Inconsistency(
                "characteristic polynomial is not a product of cyclotomics of the order's divisors"
                    .into(),
            ));
        }

        let mut m_d = BTreeMap::new();
        for d in divisors(order) {
            let mut m = 0i64;
            for (&k, &nk) in &n_k {
                if k % d == 0 {
                    m += moebius(k / d) * nk;
                }
            }
            if m != 0 {
                m_d.insert(d, m);
            }
        }

        // Cross-check: prod_d (x^d - 1)^(m_d) rebuilds det(x - sigma).
        let mut numer = IntPoly::one();
        let mut denom = IntPoly::one();
        for (&d, &m) in &m_d {
            let f = IntPoly::x_pow_minus_one(d);
            for _ in 0..m.unsigned_abs() {
                if m > 0 {
                    numer = numer.mul(&f);
                } else {
                    denom = denom.mul(&f);
                }
            }
        }
        if cp.mul(&denom) != numer {
            return Err(Error::Inconsistency(
                "cyclotomic refactorization disagrees with the characteristic polynomial".into(),
            ));
        }

        let mut r = vec![0i64; order as usize];
        for j in 0..order {
            for (&d, &m) in &m_d {
                if (j as u64 * d as u64) % order as u64 == 0 {
                    r[j as usize] += m;
                }
            }
        }
        if r.iter().sum::<i64>() != rank as i64 {
            return Err(Error::Inconsistency(
                "eigenvalue multiplicities do not sum to the rank".into(),
            ));
        }
        if r.iter().any(|&x| x < 0) {
            return Err(Error::Inconsistency("negative eigenvalue multiplicity".into()));
        }

        Ok(SpectralData { order, rank, char_poly: cp, n_k, m_d, r })
    }

    /// No eigenvalue 1: the twisted-sector machinery requires this.
    pub fn is_fixed_point_free(&self) -> bool {
        self.r[0] == 0
    }

    /// Conformal weight of the twisted Heisenberg module:
    /// `rho = (1 / 4 order^2) * sum_j j (order - j) r_j`.
    pub fn rho(&self) -> Rat {
        let ord = int(self.order as i64);
        let mut acc = Int::zero();
        for (j, &rj) in self.r.iter().enumerate() {
            let ji = int(j as i64);
            acc += ji.clone() * (&ord - &ji) * int(rj);
        }
        Rat::new(acc, int(4) * &ord * &ord)
    }

    /// `det(1 - sigma)`, the characteristic polynomial at 1. For fixed-point
    /// free isometries this equals `prod_d d^(m_d)`.
    pub fn det_one_minus(&self) -> Int {
        self.char_poly.eval_int(&Int::one())
    }

    /// `prod_d d^(m_d)` as an exact rational (negative exponents allowed).
    pub fn eigen_index_product(&self) -> Rat {
        let mut num = Int::one();
        let mut den = Int::one();
        for (&d, &m) in &self.m_d {
            let base = int(d as i64);
            let mut pw = Int::one();
            for _ in 0..m.unsigned_abs() {
                pw *= &base;
            }
            if m >= 0 {
                num *= pw;
            } else {
                den *= pw;
            }
        }
        Rat::new(num, den)
    }
}
