//! Binary and p-ary codes that describe how copies of `sqrt(2) A_{p-1}` glue
//! into larger lattices.
//!
//! The discriminant group of `N = sqrt(2) A_{p-1}` splits as
//! `k x l = (Z/2)^(p-1) x (Z/p)`, so a subgroup `E` of `(k x l)^d` splits as
//! `C x D` with `C` binary and `D` p-ary (the group orders are coprime). The
//! glued lattice `L_(C x D) = N^d + Z-span of glue vectors` is controlled by
//! the pair: integrality by self-orthogonality of both codes, evenness by the
//! quadratic refinement `q` on the binary side, lattice duality by code
//! duality.

use crate::lattice::{build_n, build_n_power, coset_min_norm, gamma_vector, Coset, Lattice};
use crate::linalg::IntMatrix;
use crate::{int, rat, Budget, Error, Int, Rat, Result};
use num_traits::{One, Zero};
use std::collections::{BTreeSet, HashMap};
use std::sync::{LazyLock, Mutex};

/// Hard ceiling on the binary length `(p-1) d`; beyond this, exhaustive code
/// searches are hopeless no matter the budget.
pub const MAX_BINARY_LENGTH: usize = 24;

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_p(p: u32) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Parameter(format!("p must be an odd prime, got {p}")));
    }
    Ok(())
}

/// Matrix over the prime field F_q, entries reduced into `[0, q)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct FpMatrix {
    q: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

fn inv_mod(a: u32, q: u32) -> u32 {
    // Fermat: a^(q-2) mod q.
    let mut acc: u64 = 1;
    let mut base = a as u64 % q as u64;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q as u64;
        }
        base = base * base % q as u64;
        e >>= 1;
    }
    acc as u32
}

impl FpMatrix {
    pub fn zero(q: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { q, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(q: u32, n: usize) -> Self {
        let mut m = Self::zero(q, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(q: u32, rows: &[Vec<u32>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&v| v % q));
        }
        FpMatrix { q, rows: rows.len(), cols, data }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.q, other.q);
        assert_eq!(self.cols, other.rows);
        let q = self.q as u64;
        let mut out = FpMatrix::zero(self.q, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entry(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] =
                        ((out.data[idx] as u64 + a * other.entry(k, j) as u64) % q) as u32;
                }
            }
        }
        out
    }

    /// Reduced row echelon form with zero rows dropped: the canonical basis
    /// of the row space.
    pub fn rref(&self) -> FpMatrix {
        let q = self.q as u64;
        let mut m: Vec<Vec<u64>> =
            (0..self.rows).map(|i| self.row(i).iter().map(|&v| v as u64).collect()).collect();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            let Some(src) = (pivot_row..m.len()).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(pivot_row, src);
            let inv = inv_mod(m[pivot_row][col] as u32, self.q) as u64;
            for v in m[pivot_row].iter_mut() {
                *v = *v * inv % q;
            }
            for r in 0..m.len() {
                if r != pivot_row && m[r][col] != 0 {
                    let f = m[r][col];
                    for c in 0..self.cols {
                        let sub = f * m[pivot_row][c] % q;
                        m[r][c] = (m[r][c] + q - sub) % q;
                    }
                }
            }
            pivot_row += 1;
            if pivot_row == m.len() {
                break;
            }
        }
        let rows: Vec<Vec<u32>> = m[..pivot_row]
            .iter()
            .map(|r| r.iter().map(|&v| v as u32).collect())
            .collect();
        let mut out = FpMatrix::from_rows(self.q, &rows);
        out.cols = self.cols;
        if rows.is_empty() {
            out = FpMatrix::zero(self.q, 0, self.cols);
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.rref().rows
    }

    fn pivot_cols(&self) -> Vec<usize> {
        // Assumes self is already in RREF.
        (0..self.rows)
            .map(|i| (0..self.cols).find(|&j| self.entry(i, j) != 0).expect("nonzero RREF row"))
            .collect()
    }

    /// Basis of `{ v : self * v^T = 0 }` as rows.
    pub fn right_kernel(&self) -> FpMatrix {
        let r = self.rref();
        let pivots = r.pivot_cols();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut rows = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (self.q - r.entry(i, f)) % self.q;
            }
            rows.push(v);
        }
        if rows.is_empty() {
            FpMatrix::zero(self.q, 0, self.cols)
        } else {
            FpMatrix::from_rows(self.q, &rows)
        }
    }

    /// Reduce `v` against the row space; returns the residue.
    fn reduce(&self, v: &[u32]) -> Vec<u32> {
        // Assumes self is in RREF.
        let q = self.q as u64;
        let mut w: Vec<u64> = v.iter().map(|&x| (x % self.q) as u64).collect();
        for i in 0..self.rows {
            let pc = (0..self.cols).find(|&j| self.entry(i, j) != 0).unwrap();
            if w[pc] != 0 {
                let f = w[pc];
                for c in 0..self.cols {
                    let sub = f * self.entry(i, c) as u64 % q;
                    w[c] = (w[c] + q - sub) % q;
                }
            }
        }
        w.iter().map(|&x| x as u32).collect()
    }

    pub fn row_space_contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Every vector of the row space, by odometer over coefficients.
    pub fn row_space_elements(&self) -> Vec<Vec<u32>> {
        let r = self.rref();
        assert!(
            (r.q as f64).powi(r.rows as i32) <= 2e6,
            "row space too large to list"
        );
        let q = r.q as u64;
        let mut out = Vec::new();
        let mut coeff = vec![0u32; r.rows];
        loop {
            let mut v = vec![0u64; r.cols];
            for (i, &c) in coeff.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for j in 0..r.cols {
                    v[j] = (v[j] + c as u64 * r.entry(i, j) as u64) % q;
                }
            }
            out.push(v.iter().map(|&x| x as u32).collect());
            let mut k = 0;
            loop {
                if k == r.rows {
                    return out;
                }
                coeff[k] += 1;
                if coeff[k] < r.q {
                    break;
                }
                coeff[k] = 0;
                k += 1;
            }
        }
    }
}

/// Path-graph adjacency form on `(Z/2)^(p-1)`, repeated over d blocks. This
/// is the polarization of the quadratic refinement `qform_k`.
pub fn adjacency_form(p: u32, d: usize) -> FpMatrix {
    let b = (p - 1) as usize;
    let n = b * d;
    let mut m = FpMatrix::zero(2, n, n);
    for blk in 0..d {
        for i in 0..b - 1 {
            m.data[(blk * b + i) * n + blk * b + i + 1] = 1;
            m.data[(blk * b + i + 1) * n + blk * b + i] = 1;
        }
    }
    m
}

/// `u . v` under the adjacency form, in F_2.
pub fn inner_k(p: u32, d: usize, u: &[u32], v: &[u32]) -> u32 {
    let b = (p - 1) as usize;
    assert_eq!(u.len(), b * d);
    assert_eq!(v.len(), b * d);
    let mut acc = 0u32;
    for blk in 0..d {
        for i in 0..b - 1 {
            acc ^= (u[blk * b + i] & v[blk * b + i + 1]) ^ (u[blk * b + i + 1] & v[blk * b + i]);
        }
    }
    acc & 1
}

/// Quadratic refinement on the binary side: `q(u) = sum u_i - sum u_i u_(i+1)`
/// per block, in F_2. Its polarization is [`inner_k`]; the glue coset of `u`
/// has even norms exactly when `q(u) = 0`.
pub fn qform_k(p: u32, d: usize, u: &[u32]) -> u32 {
    let b = (p - 1) as usize;
    assert_eq!(u.len(), b * d);
    let mut acc = 0u32;
    for blk in 0..d {
        for i in 0..b {
            acc ^= u[blk * b + i];
            if i + 1 < b {
                acc ^= u[blk * b + i] & u[blk * b + i + 1];
            }
        }
    }
    acc & 1
}

/// `a . b = -2 sum a_i b_i` in F_p, the pairing the glue vectors `a gamma`
/// inherit from the lattice.
pub fn inner_l(p: u32, a: &[u32], b: &[u32]) -> u32 {
    assert_eq!(a.len(), b.len());
    let q = p as u64;
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc = (acc + *x as u64 * *y as u64) % q;
    }
    (acc * (2 * q - 2) % q) as u32
}

/// Binary code `C` inside `(Z/2)^((p-1) d)`, stored by its canonical RREF
/// generator matrix.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CodeC {
    p: u32,
    d: usize,
    gens: FpMatrix,
}

/// p-ary code `D` inside `(Z/p)^d`, stored by its canonical RREF generator
/// matrix.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CodeD {
    p: u32,
    d: usize,
    gens: FpMatrix,
}

impl CodeC {
    pub fn new(p: u32, d: usize, gens: &[Vec<u32>]) -> Result<Self> {
        check_p(p)?;
        let n = (p - 1) as usize * d;
        for g in gens {
            if g.len() != n {
                return Err(Error::Shape(format!(
                    "binary generator has length {} but the code lives in length {n}",
                    g.len()
                )));
            }
        }
        let m = if gens.is_empty() {
            FpMatrix::zero(2, 0, n)
        } else {
            FpMatrix::from_rows(2, gens).rref()
        };
        Ok(CodeC { p, d, gens: m })
    }

    pub fn trivial(p: u32, d: usize) -> Result<Self> {
        Self::new(p, d, &[])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn length(&self) -> usize {
        (self.p - 1) as usize * self.d
    }

    pub fn dim(&self) -> usize {
        self.gens.rows()
    }

    pub fn size(&self) -> Int {
        Int::one() << self.dim()
    }

    pub fn generators(&self) -> &FpMatrix {
        &self.gens
    }

    pub fn contains(&self, u: &[u32]) -> bool {
        u.len() == self.length() && self.gens.row_space_contains(u)
    }

    pub fn elements(&self) -> Vec<Vec<u32>> {
        self.gens.row_space_elements()
    }

    /// Dual under the adjacency form.
    pub fn dual(&self) -> CodeC {
        if self.dim() == 0 {
            let all = FpMatrix::identity(2, self.length());
            return CodeC { p: self.p, d: self.d, gens: all.rref() };
        }
        let form = adjacency_form(self.p, self.d);
        let kernel = self.gens.mul(&form).right_kernel().rref();
        CodeC { p: self.p, d: self.d, gens: kernel }
    }

    /// All pairwise adjacency-form products vanish. (The form is alternating,
    /// so single vectors are always self-paired to zero.)
    pub fn is_self_orthogonal(&self) -> bool {
        let k = self.dim();
        (0..k).all(|i| {
            (i..k).all(|j| inner_k(self.p, self.d, self.gens.row(i), self.gens.row(j)) == 0)
        })
    }

    /// The quadratic refinement vanishes on the whole code; equivalently the
    /// generators are q-isotropic and pairwise orthogonal.
    pub fn is_isotropic(&self) -> bool {
        let k = self.dim();
        (0..k).all(|i| qform_k(self.p, self.d, self.gens.row(i)) == 0) && self.is_self_orthogonal()
    }

    pub fn is_self_dual(&self) -> bool {
        *self == self.dual()
    }

    /// Closed under the diagonal Coxeter action on the binary side.
    pub fn is_sigma_invariant(&self) -> Result<bool> {
        let act = sigma_code_matrix(self.p, self.d)?;
        for i in 0..self.dim() {
            let g = FpMatrix::from_rows(2, &[self.gens.row(i).to_vec()]);
            let img = g.mul(&act);
            if !self.contains(img.row(0)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl CodeD {
    pub fn new(p: u32, d: usize, gens: &[Vec<u32>]) -> Result<Self> {
        check_p(p)?;
        for g in gens {
            if g.len() != d {
                return Err(Error::Shape(format!(
                    "p-ary generator has length {} but the code lives in length {d}",
                    g.len()
                )));
            }
        }
        let m = if gens.is_empty() {
            FpMatrix::zero(p, 0, d)
        } else {
            FpMatrix::from_rows(p, gens).rref()
        };
        Ok(CodeD { p, d, gens: m })
    }

    pub fn trivial(p: u32, d: usize) -> Result<Self> {
        Self::new(p, d, &[])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.gens.rows()
    }

    pub fn size(&self) -> Int {
        let mut s = Int::one();
        for _ in 0..self.dim() {
            s *= int(self.p as i64);
        }
        s
    }

    pub fn generators(&self) -> &FpMatrix {
        &self.gens
    }

    pub fn contains(&self, a: &[u32]) -> bool {
        a.len() == self.d && self.gens.row_space_contains(a)
    }

    pub fn elements(&self) -> Vec<Vec<u32>> {
        self.gens.row_space_elements()
    }

    /// Dual under the `-2 sum a_i b_i` pairing; `-2` is a unit, so this is
    /// the standard dual.
    pub fn dual(&self) -> CodeD {
        if self.dim() == 0 {
            let all = FpMatrix::identity(self.p, self.d);
            return CodeD { p: self.p, d: self.d, gens: all.rref() };
        }
        CodeD { p: self.p, d: self.d, gens: self.gens.right_kernel().rref() }
    }

    pub fn is_self_orthogonal(&self) -> bool {
        let k = self.dim();
        (0..k).all(|i| (i..k).all(|j| inner_l(self.p, self.gens.row(i), self.gens.row(j)) == 0))
    }

    pub fn is_self_dual(&self) -> bool {
        *self == self.dual()
    }
}

/// Subgroup of `(k x l)^d` given by mixed generators `(u | a)`. Because the
/// two factors have coprime exponents, the subgroup always splits as the
/// product of its projections.
#[derive(Clone, Debug)]
pub struct SubmoduleE {
    p: u32,
    d: usize,
    gens: Vec<(Vec<u32>, Vec<u32>)>,
}

impl SubmoduleE {
    pub fn new(p: u32, d: usize, gens: Vec<(Vec<u32>, Vec<u32>)>) -> Result<Self> {
        check_p(p)?;
        let n = (p - 1) as usize * d;
        for (u, a) in &gens {
            if u.len() != n || a.len() != d {
                return Err(Error::Shape(format!(
                    "mixed generator has shape ({}, {}) but expected ({n}, {d})",
                    u.len(),
                    a.len()
                )));
            }
        }
        Ok(SubmoduleE { p, d, gens })
    }

    /// Project onto the binary and p-ary factors.
    pub fn split(&self) -> Result<(CodeC, CodeD)> {
        let us: Vec<Vec<u32>> = self.gens.iter().map(|(u, _)| u.clone()).collect();
        let asv: Vec<Vec<u32>> = self.gens.iter().map(|(_, a)| a.clone()).collect();
        Ok((CodeC::new(self.p, self.d, &us)?, CodeD::new(self.p, self.d, &asv)?))
    }
}

/// Coxeter action on binary glue coordinates: the basis action of the Coxeter
/// element reduced mod 2, one block per copy of N.
pub fn sigma_code_matrix(p: u32, d: usize) -> Result<FpMatrix> {
    check_p(p)?;
    let n1 = build_n(p)?;
    let sigma = crate::isometry::coxeter_sigma(p, 1, &n1)?;
    let b = (p - 1) as usize;
    let act = sigma.basis_action();
    let n = b * d;
    let mut m = FpMatrix::zero(2, n, n);
    for blk in 0..d {
        for i in 0..b {
            for j in 0..b {
                let e = &act[(i, j)];
                let bit = ((e % int(2)) + int(2)) % int(2);
                if bit.is_one() {
                    m.data[(blk * b + i) * n + blk * b + j] = 1;
                }
            }
        }
    }
    Ok(m)
}

/// Glue vector `beta_(u, a) = (1/2) sum u_i beta_i + sum a_j gamma_j` as an
/// ambient vector of `(Q^(p d), 2 Id)`.
pub fn beta_vector(p: u32, d: usize, u: &[u32], a: &[u32]) -> Result<Vec<Rat>> {
    check_p(p)?;
    let b = (p - 1) as usize;
    let pu = p as usize;
    if u.len() != b * d || a.len() != d {
        return Err(Error::Shape(format!(
            "glue word has shape ({}, {}) but expected ({}, {d})",
            u.len(),
            a.len(),
            b * d
        )));
    }
    let gamma = gamma_vector(p)?;
    let mut v = vec![Rat::zero(); pu * d];
    for blk in 0..d {
        for i in 0..b {
            if u[blk * b + i] % 2 == 1 {
                // beta_i = eps_i - eps_(i+1), halved.
                v[blk * pu + i] += rat(1, 2);
                v[blk * pu + i + 1] -= rat(1, 2);
            }
        }
        let aj = (a[blk] % p) as i64;
        if aj != 0 {
            for (t, g) in gamma.iter().enumerate() {
                v[blk * pu + t] += rat(aj, 1) * g;
            }
        }
    }
    Ok(v)
}

/// The glued lattice `L_(C x D)`: `N^d` joined with the glue vectors of the
/// generators of both codes. Checks `[L : N^d] = |C| |D|`.
pub fn lattice_from_codes(c: &CodeC, dc: &CodeD) -> Result<Lattice> {
    if c.p() != dc.p() || c.d() != dc.d() {
        return Err(Error::Parameter("codes have mismatched p or d".into()));
    }
    let (p, d) = (c.p(), c.d());
    let base = build_n_power(p, d)?;
    let mut l = base.clone();
    let zero_a = vec![0u32; d];
    let zero_u = vec![0u32; (p - 1) as usize * d];
    let mut glue_rows: Vec<Vec<Rat>> = Vec::new();
    for i in 0..c.dim() {
        glue_rows.push(beta_vector(p, d, c.generators().row(i), &zero_a)?);
    }
    for i in 0..dc.dim() {
        glue_rows.push(beta_vector(p, d, &zero_u, dc.generators().row(i))?);
    }
    if !glue_rows.is_empty() {
        let denom = int(2 * p as i64);
        let rows: Vec<Vec<Int>> = glue_rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        let scaled = x * Rat::from_integer(denom.clone());
                        debug_assert!(scaled.is_integer());
                        scaled.to_integer()
                    })
                    .collect()
            })
            .collect();
        let glue =
            Lattice::from_generators(base.ambient_gram().clone(), denom, IntMatrix::from_rows(&rows))?;
        l = l.join(&glue)?;
    }
    let index = l.quotient_by(&base)?.order;
    if index != c.size() * dc.size() {
        return Err(Error::Inconsistency(format!(
            "glue index {index} does not match |C| |D| = {}",
            c.size() * dc.size()
        )));
    }
    Ok(l)
}

static BLOCK_WEIGHTS: LazyLock<Mutex<HashMap<(u32, u32, u32), Rat>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Minimum norm of the glue coset `N + beta_(u, a)` for a single block,
/// memoized across calls.
fn block_weight(p: u32, u_bits: u32, a: u32, budget: &mut Budget) -> Result<Rat> {
    let key = (p, u_bits, a % p);
    if let Some(w) = BLOCK_WEIGHTS.lock().unwrap().get(&key) {
        return Ok(w.clone());
    }
    let b = (p - 1) as usize;
    let u: Vec<u32> = (0..b).map(|i| (u_bits >> i) & 1).collect();
    let shift = beta_vector(p, 1, &u, &[a % p])?;
    let n = build_n(p)?;
    let coset = Coset::new(n, &shift)?;
    let w = coset_min_norm(&coset, None, budget)?;
    BLOCK_WEIGHTS.lock().unwrap().insert(key, w.clone());
    Ok(w)
}

/// Weight of a glue word: the sum over blocks of the minimum norms of the
/// block cosets `N + beta_(u, a)`.
pub fn word_weight(p: u32, d: usize, u: &[u32], a: &[u32], budget: &mut Budget) -> Result<Rat> {
    check_p(p)?;
    let b = (p - 1) as usize;
    if u.len() != b * d || a.len() != d {
        return Err(Error::Shape("glue word has the wrong shape".into()));
    }
    let mut total = Rat::zero();
    for blk in 0..d {
        let mut bits = 0u32;
        for i in 0..b {
            if u[blk * b + i] % 2 == 1 {
                bits |= 1 << i;
            }
        }
        total += block_weight(p, bits, a[blk] % p, budget)?;
    }
    Ok(total)
}

/// Predicates a code search can demand. For binary codes `isotropic` refers
/// to the quadratic refinement; for p-ary codes it is the same condition as
/// `self_orthogonal`.
#[derive(Clone, Copy, Default, Debug)]
pub struct CodeFilter {
    pub sigma_invariant: bool,
    pub self_orthogonal: bool,
    pub isotropic: bool,
    pub self_dual: bool,
}

/// All subspaces of `F_q^n` in RREF form, one callback per subspace.
fn enumerate_subspaces(
    q: u32,
    n: usize,
    budget: &mut Budget,
    emit: &mut dyn FnMut(FpMatrix) -> Result<()>,
) -> Result<()> {
    budget.charge("code enumeration")?;
    emit(FpMatrix::zero(q, 0, n))?;
    for r in 1..=n {
        let mut pivots: Vec<usize> = (0..r).collect();
        loop {
            // Free positions: (row i, col j) with j > pivots[i], j not a pivot.
            let free: Vec<(usize, usize)> = (0..r)
                .flat_map(|i| {
                    let pv = pivots.clone();
                    (pv[i] + 1..n)
                        .filter(move |j| !pv.contains(j))
                        .map(move |j| (i, j))
                })
                .collect();
            let mut assignment = vec![0u32; free.len()];
            loop {
                budget.charge("code enumeration")?;
                let mut m = FpMatrix::zero(q, r, n);
                for i in 0..r {
                    m.data[i * n + pivots[i]] = 1;
                }
                for (slot, &(i, j)) in free.iter().enumerate() {
                    m.data[i * n + j] = assignment[slot];
                }
                emit(m)?;
                let mut k = 0;
                loop {
                    if k == assignment.len() {
                        break;
                    }
                    assignment[k] += 1;
                    if assignment[k] < q {
                        break;
                    }
                    assignment[k] = 0;
                    k += 1;
                }
                if assignment.iter().all(|&x| x == 0) {
                    break;
                }
            }
            // Next pivot combination in lexicographic order.
            let mut i = r;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if pivots[i] < n - (r - i) {
                    pivots[i] += 1;
                    for t in i + 1..r {
                        pivots[t] = pivots[t - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    pivots.clear();
                    break;
                }
            }
            if pivots.is_empty() {
                break;
            }
        }
    }
    Ok(())
}

/// All subspaces of `(Z/2)^((p-1) d)` closed under the Coxeter code action,
/// by closing spans under the action and saturating with one extra vector at
/// a time.
fn enumerate_invariant_binary(p: u32, d: usize, budget: &mut Budget) -> Result<Vec<FpMatrix>> {
    let n = (p - 1) as usize * d;
    let act = sigma_code_matrix(p, d)?;
    let order = p as usize;
    let closure = |base: &FpMatrix, extra: Option<&[u32]>, budget: &mut Budget| -> Result<FpMatrix> {
        budget.charge("invariant code search")?;
        let mut rows: Vec<Vec<u32>> = (0..base.rows()).map(|i| base.row(i).to_vec()).collect();
        if let Some(v) = extra {
            let mut w = v.to_vec();
            for _ in 0..order {
                rows.push(w.clone());
                let m = FpMatrix::from_rows(2, &[w.clone()]).mul(&act);
                w = m.row(0).to_vec();
            }
        }
        if rows.is_empty() {
            return Ok(FpMatrix::zero(2, 0, n));
        }
        let mut out = FpMatrix::from_rows(2, &rows).rref();
        out.cols = n;
        if out.rows == 0 {
            out = FpMatrix::zero(2, 0, n);
        }
        Ok(out)
    };
    let zero = FpMatrix::zero(2, 0, n);
    let mut seen: BTreeSet<FpMatrix> = BTreeSet::new();
    seen.insert(zero.clone());
    let mut queue = vec![zero];
    while let Some(v) = queue.pop() {
        for bits in 1u64..(1u64 << n) {
            budget.charge("invariant code search")?;
            let w: Vec<u32> = (0..n).map(|i| ((bits >> i) & 1) as u32).collect();
            if v.row_space_contains(&w) {
                continue;
            }
            let bigger = closure(&v, Some(&w), budget)?;
            if seen.insert(bigger.clone()) {
                queue.push(bigger);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

fn guard_length(p: u32, d: usize) -> Result<()> {
    check_p(p)?;
    let n = (p - 1) as usize * d;
    if n > MAX_BINARY_LENGTH {
        return Err(Error::Resource(format!(
            "binary length {n} exceeds the search ceiling {MAX_BINARY_LENGTH}"
        )));
    }
    Ok(())
}

/// Binary codes satisfying the filter, sorted by dimension then generators.
pub fn enumerate_c_codes(
    p: u32,
    d: usize,
    filter: &CodeFilter,
    budget: &mut Budget,
) -> Result<Vec<CodeC>> {
    guard_length(p, d)?;
    let n = (p - 1) as usize * d;
    let mut found: Vec<CodeC> = Vec::new();
    let consider = |gens: FpMatrix, found: &mut Vec<CodeC>| -> Result<()> {
        let code = CodeC { p, d, gens };
        if filter.self_orthogonal && !code.is_self_orthogonal() {
            return Ok(());
        }
        if filter.isotropic && !code.is_isotropic() {
            return Ok(());
        }
        if filter.self_dual && !code.is_self_dual() {
            return Ok(());
        }
        found.push(code);
        Ok(())
    };
    if filter.sigma_invariant {
        for gens in enumerate_invariant_binary(p, d, budget)? {
            consider(gens, &mut found)?;
        }
    } else {
        let mut sink = |gens: FpMatrix| consider(gens, &mut found);
        enumerate_subspaces(2, n, budget, &mut sink)?;
    }
    found.sort_by(|a, b| (a.dim(), &a.gens).cmp(&(b.dim(), &b.gens)));
    Ok(found)
}

/// p-ary codes satisfying the filter. The Coxeter action is trivial on this
/// side, so `sigma_invariant` never excludes anything; `isotropic` means
/// `self_orthogonal`.
pub fn enumerate_d_codes(
    p: u32,
    d: usize,
    filter: &CodeFilter,
    budget: &mut Budget,
) -> Result<Vec<CodeD>> {
    guard_length(p, d)?;
    let mut found: Vec<CodeD> = Vec::new();
    let mut sink = |gens: FpMatrix| -> Result<()> {
        let code = CodeD { p, d, gens };
        if (filter.self_orthogonal || filter.isotropic) && !code.is_self_orthogonal() {
            return Ok(());
        }
        if filter.self_dual && !code.is_self_dual() {
            return Ok(());
        }
        found.push(code);
        Ok(())
    };
    enumerate_subspaces(p, d, budget, &mut sink)?;
    found.sort_by(|a, b| (a.dim(), &a.gens).cmp(&(b.dim(), &b.gens)));
    Ok(found)
}
