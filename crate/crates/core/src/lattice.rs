//! Rational lattices stored denominator-cleared: `L = (1/denom) * rowspan(basis)`
//! inside an ambient quadratic space `(Q^n, G0)`. The family this crate is
//! built for takes `G0 = 2*Id`, which realizes `sqrt(2) A_{p-1}` with entirely
//! rational coordinates via `beta_i = eps_i - eps_{i+1}`.
//!
//! Bases are kept as constructed (so `build_n(p)` really carries the beta
//! rows); equality compares canonical forms (minimal denominator, HNF basis),
//! which makes "equal as sets" a plain `==`.

use crate::linalg::{
    self, det_rat, hnf, lattice_intersect, quotient, AbelianQuotient, IntMatrix, RatMatrix,
};
use crate::qseries::QSeries;
use crate::{int, rat, Budget, Error, Int, Rat, Result};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Full-row-rank lattice in an ambient rational quadratic space.
#[derive(Clone, Debug)]
pub struct Lattice {
    ambient_gram: RatMatrix,
    denom: Int,
    basis: IntMatrix,
    gram: RatMatrix,
    canon_denom: Int,
    canon_basis: IntMatrix,
}

/// Integrality trio of a lattice.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Parity {
    pub integral: bool,
    pub even: bool,
    pub unimodular: bool,
}

/// Inner product of ambient row vectors under a symmetric Gram matrix.
pub fn ambient_inner(g: &RatMatrix, x: &[Rat], y: &[Rat]) -> Rat {
    assert_eq!(g.rows(), x.len());
    assert_eq!(g.cols(), y.len());
    let mut acc = Rat::zero();
    for i in 0..x.len() {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..y.len() {
            if y[j].is_zero() {
                continue;
            }
            acc += &x[i] * &g[(i, j)] * &y[j];
        }
    }
    acc
}

fn check_symmetric(g: &RatMatrix) -> Result<()> {
    if g.rows() != g.cols() {
        return Err(Error::Shape("ambient Gram matrix must be square".into()));
    }
    for i in 0..g.rows() {
        for j in 0..i {
            if g[(i, j)] != g[(j, i)] {
                return Err(Error::Parameter("ambient Gram matrix must be symmetric".into()));
            }
        }
    }
    Ok(())
}

/// Canonicalize `(denom, rows)`: HNF basis, then divide out the common factor
/// between the denominator and the matrix content.
fn canonical_pair(denom: &Int, rows: &IntMatrix) -> (Int, IntMatrix) {
    let h = hnf(rows).nonzero_rows();
    let mut content = Int::zero();
    for r in h.iter_rows() {
        for v in r {
            content = content.gcd(v);
        }
    }
    let g = denom.gcd(&content);
    if g <= Int::one() {
        return (denom.clone(), h);
    }
    let rows: Vec<Vec<Int>> =
        h.iter_rows().map(|r| r.iter().map(|v| v / &g).collect()).collect();
    let reduced = if rows.is_empty() { IntMatrix::zero(0, h.cols()) } else { IntMatrix::from_rows(&rows) };
    (denom / &g, reduced)
}

impl Lattice {
    /// Lattice with the given basis rows kept verbatim. Rows must be
    /// independent; use [`Lattice::from_generators`] for arbitrary spans.
    pub fn from_basis(ambient_gram: RatMatrix, denom: Int, basis: IntMatrix) -> Result<Self> {
        check_symmetric(&ambient_gram)?;
        if basis.cols() != ambient_gram.rows() {
            return Err(Error::Shape(format!(
                "basis has {} columns but the ambient space has dimension {}",
                basis.cols(),
                ambient_gram.rows()
            )));
        }
        if !denom.is_positive() {
            return Err(Error::Parameter("denominator must be positive".into()));
        }
        if basis.rank() != basis.rows() {
            return Err(Error::RankDeficient("lattice basis rows are dependent".into()));
        }
        let b = basis.to_rat();
        let scale = Rat::one() / Rat::from_integer(denom.clone());
        let mut gram = b.mul(&ambient_gram).mul(&b.transpose());
        for i in 0..gram.rows() {
            for j in 0..gram.cols() {
                let v = &gram[(i, j)] * &scale * &scale;
                gram[(i, j)] = v;
            }
        }
        let (canon_denom, canon_basis) = canonical_pair(&denom, &basis);
        Ok(Lattice { ambient_gram, denom, basis, gram, canon_denom, canon_basis })
    }

    /// Lattice spanned by possibly dependent generator rows.
    pub fn from_generators(ambient_gram: RatMatrix, denom: Int, gens: IntMatrix) -> Result<Self> {
        let basis = hnf(&gens).nonzero_rows();
        Self::from_basis(ambient_gram, denom, basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_gram.rows()
    }

    pub fn ambient_gram(&self) -> &RatMatrix {
        &self.ambient_gram
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn denom(&self) -> &Int {
        &self.denom
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// Gram matrix of the stored basis.
    pub fn gram(&self) -> &RatMatrix {
        &self.gram
    }

    pub fn det_gram(&self) -> Rat {
        det_rat(&self.gram)
    }

    /// Basis rows as ambient rational vectors.
    pub fn basis_vectors(&self) -> Vec<Vec<Rat>> {
        let d = Rat::from_integer(self.denom.clone());
        self.basis
            .iter_rows()
            .map(|r| r.iter().map(|v| Rat::from_integer(v.clone()) / d.clone()).collect())
            .collect()
    }

    fn canon_gram(&self) -> RatMatrix {
        let b = self.canon_basis.to_rat();
        let scale = Rat::one() / Rat::from_integer(self.canon_denom.clone());
        let mut g = b.mul(&self.ambient_gram).mul(&b.transpose());
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let v = &g[(i, j)] * &scale * &scale;
                g[(i, j)] = v;
            }
        }
        g
    }

    /// Rational coordinates of an ambient vector in the *canonical* basis;
    /// `None` when it falls outside the rational span.
    pub fn span_coords(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        if v.len() != self.ambient_dim() {
            return None;
        }
        let b = self.canon_basis.to_rat();
        let target = RatMatrix::from_rows(&[v
            .iter()
            .map(|x| x * Rat::from_integer(self.canon_denom.clone()))
            .collect::<Vec<_>>()]);
        let x = linalg::solve_xa_eq_b(&b, &target)?;
        Some((0..x.cols()).map(|j| x[(0, j)].clone()).collect())
    }

    /// Does the lattice contain this ambient vector?
    pub fn contains(&self, v: &[Rat]) -> bool {
        match self.span_coords(v) {
            Some(c) => c.iter().all(Rat::is_integer),
            None => false,
        }
    }

    /// Scale the integer basis onto a common denominator `target`.
    fn scaled_basis(&self, target: &Int) -> IntMatrix {
        let f = target / &self.canon_denom;
        debug_assert!((target % &self.canon_denom).is_zero());
        self.canon_basis.scale(&f)
    }

    fn require_same_space(&self, other: &Lattice) -> Result<()> {
        if self.ambient_gram != other.ambient_gram {
            return Err(Error::Parameter(
                "lattices live in different ambient quadratic spaces".into(),
            ));
        }
        Ok(())
    }

    /// Smallest lattice containing both operands.
    pub fn join(&self, other: &Lattice) -> Result<Lattice> {
        self.require_same_space(other)?;
        let d = self.canon_denom.lcm(&other.canon_denom);
        let stacked = self.scaled_basis(&d).stack(&other.scaled_basis(&d));
        Lattice::from_generators(self.ambient_gram.clone(), d, stacked)
    }

    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        self.require_same_space(other)?;
        let d = self.canon_denom.lcm(&other.canon_denom);
        let meet = lattice_intersect(&self.scaled_basis(&d), &other.scaled_basis(&d))?;
        Lattice::from_generators(self.ambient_gram.clone(), d, meet)
    }

    /// Finite quotient `self / sub`.
    pub fn quotient_by(&self, sub: &Lattice) -> Result<AbelianQuotient> {
        self.require_same_space(sub)?;
        let d = self.canon_denom.lcm(&sub.canon_denom);
        quotient(&self.scaled_basis(&d), &sub.scaled_basis(&d))
    }

    /// Is `sub` a sublattice of `self`?
    pub fn contains_lattice(&self, sub: &Lattice) -> bool {
        sub.basis_vectors().iter().all(|v| self.contains(v))
    }

    /// Image under an integer ambient map `v -> v * s`.
    pub fn apply_ambient(&self, s: &IntMatrix) -> Result<Lattice> {
        Lattice::from_generators(self.ambient_gram.clone(), self.denom.clone(), self.basis.mul(s))
    }

    /// Dual lattice inside the rational span (basis `gram^{-1} * basis`).
    pub fn dual_lattice(&self) -> Lattice {
        let inv = self.gram.inverse().expect("lattice Gram matrix is invertible");
        let b = self.basis.to_rat();
        let scale = Rat::one() / Rat::from_integer(self.denom.clone());
        let mut dual_rows = inv.mul(&b);
        for i in 0..dual_rows.rows() {
            for j in 0..dual_rows.cols() {
                let v = &dual_rows[(i, j)] * &scale;
                dual_rows[(i, j)] = v;
            }
        }
        let (d, rows) = dual_rows.clear_denominators();
        Lattice::from_basis(self.ambient_gram.clone(), d, rows)
            .expect("dual basis inherits full row rank")
    }

    /// Discriminant group `dual / self` (finite for integral lattices and,
    /// more generally, whenever the dual contains the lattice).
    pub fn discriminant_group(&self) -> Result<AbelianQuotient> {
        self.dual_lattice().quotient_by(self)
    }

    pub fn parity_report(&self) -> Parity {
        let integral = self.gram.is_integral();
        let even = integral
            && (0..self.gram.rows()).all(|i| self.gram[(i, i)].to_integer().is_even());
        let unimodular = integral && self.det_gram().abs() == Rat::one();
        Parity { integral, even, unimodular }
    }

    /// Orthogonal direct sum; ambient spaces concatenate.
    pub fn orthogonal_sum(&self, other: &Lattice) -> Lattice {
        let (n1, n2) = (self.ambient_dim(), other.ambient_dim());
        let mut g = RatMatrix::zero(n1 + n2, n1 + n2);
        for i in 0..n1 {
            for j in 0..n1 {
                g[(i, j)] = self.ambient_gram[(i, j)].clone();
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                g[(n1 + i, n1 + j)] = other.ambient_gram[(i, j)].clone();
            }
        }
        let d = self.denom.lcm(&other.denom);
        let (r1, r2) = (self.basis.rows(), other.basis.rows());
        let mut b = IntMatrix::zero(r1 + r2, n1 + n2);
        let f1 = &d / &self.denom;
        let f2 = &d / &other.denom;
        for i in 0..r1 {
            for j in 0..n1 {
                b[(i, j)] = &self.basis[(i, j)] * &f1;
            }
        }
        for i in 0..r2 {
            for j in 0..n2 {
                b[(r1 + i, n1 + j)] = &other.basis[(i, j)] * &f2;
            }
        }
        Lattice::from_basis(g, d, b).expect("block-diagonal basis keeps full rank")
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_gram == other.ambient_gram
            && self.canon_denom == other.canon_denom
            && self.canon_basis == other.canon_basis
    }
}

impl Eq for Lattice {}

/// Coset `lattice + shift`, canonicalized: the shift is stored as rational
/// coordinates in the canonical basis, reduced into `[0, 1)` per coordinate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Coset {
    lattice: Lattice,
    shift_coords: Vec<Rat>,
}

impl Coset {
    /// `lattice + shift`; the shift must lie in the rational span.
    pub fn new(lattice: Lattice, shift: &[Rat]) -> Result<Self> {
        let coords = lattice
            .span_coords(shift)
            .ok_or_else(|| Error::Parameter("coset shift is outside the lattice span".into()))?;
        let reduced = coords.into_iter().map(|c| &c - c.floor()).collect();
        Ok(Coset { lattice, shift_coords: reduced })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Canonical shift in lattice-basis coordinates.
    pub fn shift_coords(&self) -> &[Rat] {
        &self.shift_coords
    }

    /// Canonical shift as an ambient vector.
    pub fn shift_vector(&self) -> Vec<Rat> {
        let n = self.lattice.ambient_dim();
        let mut v = vec![Rat::zero(); n];
        let d = Rat::from_integer(self.lattice.canon_denom.clone());
        for (i, c) in self.shift_coords.iter().enumerate() {
            for j in 0..n {
                v[j] += c * Rat::from_integer(self.lattice.canon_basis[(i, j)].clone()) / d.clone();
            }
        }
        v
    }

    pub fn is_trivial(&self) -> bool {
        self.shift_coords.iter().all(Rat::is_zero)
    }
}

/// Unit-lower-triangular LDL^T factorization of a positive definite rational
/// Gram matrix: returns `(diag, lower)` with `lower[j][i]` for `j > i`.
fn ldlt(gram: &RatMatrix) -> Result<(Vec<Rat>, Vec<Vec<Rat>>)> {
    let n = gram.rows();
    let mut dd = vec![Rat::zero(); n];
    let mut ll = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        let mut di = gram[(i, i)].clone();
        for k in 0..i {
            di -= &ll[i][k] * &ll[i][k] * &dd[k];
        }
        if !di.is_positive() {
            return Err(Error::Parameter("Gram matrix is not positive definite".into()));
        }
        dd[i] = di;
        for j in i + 1..n {
            let mut v = gram[(j, i)].clone();
            for k in 0..i {
                v -= &ll[j][k] * &ll[i][k] * &dd[k];
            }
            ll[j][i] = v / dd[i].clone();
        }
    }
    Ok((dd, ll))
}

enum SearchMode {
    /// Record every vector with `Q <= bound` as a (norm -> count) histogram.
    Collect(BTreeMap<Rat, u64>),
    /// Track the strict minimum; the bound shrinks as better vectors appear.
    Minimize(Option<Rat>),
}

struct Enumerator<'b> {
    dd: Vec<Rat>,
    ll: Vec<Vec<Rat>>,
    shift: Vec<Rat>,
    bound: Rat,
    mode: SearchMode,
    budget: &'b mut Budget,
}

impl<'b> Enumerator<'b> {
    /// Depth-first over levels `n-1 .. 0`; `x[j] = c_j + shift_j` for levels
    /// already assigned, `used` is the norm contribution of those levels.
    fn search(&mut self, level: isize, x: &mut Vec<Rat>, used: Rat) -> Result<()> {
        if level < 0 {
            match &mut self.mode {
                SearchMode::Collect(counts) => {
                    *counts.entry(used).or_insert(0) += 1;
                }
                SearchMode::Minimize(best) => {
                    let improves = best.as_ref().map_or(true, |b| used < *b);
                    if improves {
                        self.bound = used.clone();
                        *best = Some(used);
                    }
                }
            }
            return Ok(());
        }
        let i = level as usize;
        let mut off = self.shift[i].clone();
        for j in i + 1..self.dd.len() {
            off += &self.ll[j][i] * &x[j];
        }
        let allowance = &self.bound - &used;
        let center = (-off.clone()).round().to_integer();
        // The admissible c_i form a contiguous interval around -off; walk out
        // from the nearest integer in both directions.
        for direction in [0i64, 1] {
            let mut m = if direction == 0 { center.clone() } else { &center - 1 };
            loop {
                self.budget.charge("lattice vector enumeration")?;
                let t = Rat::from_integer(m.clone()) + &off;
                let contrib = &self.dd[i] * &t * &t;
                if contrib > allowance || (&used + &contrib) > self.bound {
                    break;
                }
                x[i] = Rat::from_integer(m.clone()) + &self.shift[i];
                self.search(level - 1, x, &used + &contrib)?;
                if direction == 0 {
                    m += 1;
                } else {
                    m -= 1;
                }
            }
        }
        Ok(())
    }
}

fn quadratic_value(gram: &RatMatrix, v: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for i in 0..v.len() {
        if v[i].is_zero() {
            continue;
        }
        for j in 0..v.len() {
            if v[j].is_zero() {
                continue;
            }
            acc += &v[i] * &gram[(i, j)] * &v[j];
        }
    }
    acc
}

fn run_search(
    gram: &RatMatrix,
    shift: &[Rat],
    bound: &Rat,
    mode: SearchMode,
    budget: &mut Budget,
) -> Result<SearchMode> {
    let (dd, ll) = ldlt(gram)?;
    let n = dd.len();
    let mut e = Enumerator { dd, ll, shift: shift.to_vec(), bound: bound.clone(), mode, budget };
    let mut x = vec![Rat::zero(); n];
    e.search(n as isize - 1, &mut x, Rat::zero())?;
    Ok(e.mode)
}

/// Exact minimum of `<x,x>` over a coset, by Fincke-Pohst over the rational
/// LDL^T factorization with a shrinking radius. `bound_hint` seeds the search
/// radius; a hint below the true minimum only costs a second pass.
pub fn coset_min_norm(c: &Coset, bound_hint: Option<&Rat>, budget: &mut Budget) -> Result<Rat> {
    let gram = c.lattice.canon_gram();
    if gram.rows() == 0 {
        return Ok(Rat::zero());
    }
    let shift = c.shift_coords();
    let shift_norm = quadratic_value(&gram, shift);
    let radius = match bound_hint {
        Some(h) if *h < shift_norm => h.clone(),
        _ => shift_norm.clone(),
    };
    match run_search(&gram, shift, &radius, SearchMode::Minimize(None), budget)? {
        SearchMode::Minimize(Some(min)) => Ok(min),
        SearchMode::Minimize(None) => {
            // Hint was below the minimum; the shift itself is achievable.
            match run_search(&gram, shift, &shift_norm, SearchMode::Minimize(None), budget)? {
                SearchMode::Minimize(Some(min)) => Ok(min),
                _ => unreachable!("the canonical shift realizes its own norm"),
            }
        }
        _ => unreachable!(),
    }
}

/// Histogram of coset vector norms up to and including `bound`.
pub fn coset_norm_histogram(
    c: &Coset,
    bound: &Rat,
    budget: &mut Budget,
) -> Result<BTreeMap<Rat, u64>> {
    let gram = c.lattice.canon_gram();
    if gram.rows() == 0 {
        let mut m = BTreeMap::new();
        if !bound.is_negative() {
            m.insert(Rat::zero(), 1);
        }
        return Ok(m);
    }
    match run_search(&gram, c.shift_coords(), bound, SearchMode::Collect(BTreeMap::new()), budget)? {
        SearchMode::Collect(counts) => Ok(counts),
        _ => unreachable!(),
    }
}

/// Theta coefficients of the lattice: the series `sum_x q^(<x,x>/2)` with all
/// exponents `<= max_exponent` exact.
pub fn theta_coeffs(l: &Lattice, max_exponent: &Rat, budget: &mut Budget) -> Result<QSeries> {
    let zero_shift = vec![Rat::zero(); l.ambient_dim()];
    let coset = Coset::new(l.clone(), &zero_shift)?;
    let bound = max_exponent * rat(2, 1);
    let histogram = coset_norm_histogram(&coset, &bound, budget)?;
    let two = int(2);
    let denom_big = l.canon_gram().denominator_lcm() * &two;
    let denom = denom_big.to_i64().ok_or_else(|| {
        Error::Parameter("theta exponent denominator exceeds machine range".into())
    })?;
    let trunc = max_exponent + rat(1, denom);
    let terms: Vec<(Rat, Rat)> = histogram
        .into_iter()
        .map(|(norm, count)| (norm / rat(2, 1), Rat::from_integer(int(count as i64))))
        .collect();
    Ok(QSeries::from_terms(denom, &terms, &trunc))
}

/// `sqrt(2) A_{p-1}` realized in `(Q^p, 2*Id)` with basis rows
/// `beta_i = eps_i - eps_{i+1}`; requires odd `p >= 3`.
pub fn build_n(p: u32) -> Result<Lattice> {
    build_n_power(p, 1)
}

/// Orthogonal d-th power of `sqrt(2) A_{p-1}` in `(Q^(p d), 2*Id)`.
pub fn build_n_power(p: u32, d: usize) -> Result<Lattice> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::Parameter(format!("p must be odd and at least 3, got {p}")));
    }
    if d == 0 {
        return Err(Error::Parameter("d must be at least 1".into()));
    }
    let (pu, n) = (p as usize, p as usize * d);
    let mut g = RatMatrix::zero(n, n);
    for i in 0..n {
        g[(i, i)] = rat(2, 1);
    }
    let mut b = IntMatrix::zero((pu - 1) * d, n);
    for block in 0..d {
        for i in 0..pu - 1 {
            let row = block * (pu - 1) + i;
            b[(row, block * pu + i)] = Int::one();
            b[(row, block * pu + i + 1)] = -Int::one();
        }
    }
    Lattice::from_basis(g, Int::one(), b)
}

/// The order-p glue vector `gamma = (1/p)(eps_1 + ... + eps_p) - eps_p`:
/// orthogonal to `beta_1 .. beta_{p-2}`, pairing 2 with `beta_{p-1}`, and of
/// norm `2(p-1)/p`.
pub fn gamma_vector(p: u32) -> Result<Vec<Rat>> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::Parameter(format!("p must be odd and at least 3, got {p}")));
    }
    let pu = p as usize;
    let mut v = vec![rat(1, p as i64); pu];
    v[pu - 1] -= Rat::one();
    Ok(v)
}

/// `gamma` embedded in block `block` of the d-fold ambient space.
pub fn gamma_in_block(p: u32, d: usize, block: usize) -> Result<Vec<Rat>> {
    if block >= d {
        return Err(Error::Parameter(format!("block {block} out of range for d = {d}")));
    }
    let g = gamma_vector(p)?;
    let pu = p as usize;
    let mut v = vec![Rat::zero(); pu * d];
    v[block * pu..(block + 1) * pu].clone_from_slice(&g);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zn(n: usize) -> Lattice {
        Lattice::from_basis(RatMatrix::identity(n), Int::one(), IntMatrix::identity(n)).unwrap()
    }

    fn scaled_zn(n: usize, k: i64) -> Lattice {
        let mut b = IntMatrix::zero(n, n);
        for i in 0..n {
            b[(i, i)] = int(k);
        }
        Lattice::from_basis(RatMatrix::identity(n), Int::one(), b).unwrap()
    }

    #[test]
    fn build_n_gram_is_doubled_cartan() {
        let n3 = build_n(3).unwrap();
        assert_eq!(n3.rank(), 2);
        assert_eq!(n3.ambient_dim(), 3);
        assert_eq!(n3.gram()[(0, 0)], rat(4, 1));
        assert_eq!(n3.gram()[(0, 1)], rat(-2, 1));
        assert_eq!(n3.gram()[(1, 1)], rat(4, 1));
        let n5 = build_n(5).unwrap();
        assert_eq!(n5.rank(), 4);
        assert_eq!(n5.det_gram(), rat(80, 1));
        for i in 0..4usize {
            for j in 0..4usize {
                let expect = match i.abs_diff(j) {
                    0 => rat(4, 1),
                    1 => rat(-2, 1),
                    _ => rat(0, 1),
                };
                assert_eq!(n5.gram()[(i, j)], expect);
            }
        }
    }

    #[test]
    fn build_n_rejects_bad_p() {
        assert!(matches!(build_n(4), Err(Error::Parameter(_))));
        assert!(matches!(build_n(1), Err(Error::Parameter(_))));
        assert!(matches!(build_n_power(3, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn discriminant_group_orders() {
        // |N_dual / N| = 2^(p-1) p.
        let q3 = build_n(3).unwrap().discriminant_group().unwrap();
        assert_eq!(q3.order, int(12));
        assert_eq!(q3.divisors, vec![int(2), int(6)]);
        let q5 = build_n(5).unwrap().discriminant_group().unwrap();
        assert_eq!(q5.order, int(80));
        // d = 2 squares the order.
        let q32 = build_n_power(3, 2).unwrap().discriminant_group().unwrap();
        assert_eq!(q32.order, int(144));
    }

    #[test]
    fn gamma_pairings_match_construction() {
        for p in [3u32, 5, 7] {
            let n = build_n(p).unwrap();
            let g = gamma_vector(p).unwrap();
            let betas = n.basis_vectors();
            let gram = n.ambient_gram();
            assert_eq!(ambient_inner(gram, &g, &g), rat(2 * (p as i64 - 1), p as i64));
            for (i, beta) in betas.iter().enumerate() {
                let expect = if i + 2 == p as usize { rat(2, 1) } else { rat(0, 1) };
                assert_eq!(ambient_inner(gram, &g, beta), expect, "p={p} i={i}");
            }
            // beta_0 = -sum beta_i pairs to -2.
            let mut beta0 = vec![Rat::zero(); p as usize];
            for beta in &betas {
                for (a, b) in beta0.iter_mut().zip(beta) {
                    *a -= b;
                }
            }
            assert_eq!(ambient_inner(gram, &g, &beta0), rat(-2, 1));
            // gamma is in the span of N but not in N.
            assert!(n.span_coords(&g).is_some());
            assert!(!n.contains(&g));
        }
    }

    #[test]
    fn dual_is_an_involution() {
        let n3 = build_n(3).unwrap();
        assert_eq!(n3.dual_lattice().dual_lattice(), n3);
        let z4 = zn(4);
        assert_eq!(z4.dual_lattice(), z4);
    }

    #[test]
    fn parity_frozen_examples() {
        let n3 = build_n(3).unwrap();
        assert_eq!(
            n3.parity_report(),
            Parity { integral: true, even: true, unimodular: false }
        );
        // The dual has thirds in its Gram matrix.
        let dual = n3.dual_lattice();
        let pd = dual.parity_report();
        assert!(!pd.integral && !pd.even && !pd.unimodular);
        assert_eq!(dual.gram()[(0, 0)].denom(), &int(3));
        let z8 = zn(8);
        assert_eq!(
            z8.parity_report(),
            Parity { integral: true, even: false, unimodular: true }
        );
    }

    #[test]
    fn join_and_intersect_against_hand_values() {
        let two = scaled_zn(2, 2);
        let three = scaled_zn(2, 3);
        assert_eq!(two.join(&three).unwrap(), zn(2));
        assert_eq!(two.intersect(&three).unwrap(), scaled_zn(2, 6));
        let q = zn(2).quotient_by(&scaled_zn(2, 2)).unwrap();
        assert_eq!(q.order, int(4));
        assert!(matches!(
            scaled_zn(2, 2).quotient_by(&zn(2)),
            Err(Error::NotContained(_))
        ));
    }

    #[test]
    fn coset_shift_is_canonicalized() {
        let n3 = build_n(3).unwrap();
        let g = gamma_vector(3).unwrap();
        let c1 = Coset::new(n3.clone(), &g).unwrap();
        // gamma + beta_1 is the same coset.
        let beta1 = n3.basis_vectors()[0].clone();
        let shifted: Vec<Rat> = g.iter().zip(&beta1).map(|(a, b)| a + b).collect();
        let c2 = Coset::new(n3.clone(), &shifted).unwrap();
        assert_eq!(c1, c2);
        // A vector outside the span is rejected.
        let off = vec![Rat::one(), Rat::zero(), Rat::zero()];
        assert!(matches!(Coset::new(n3, &off), Err(Error::Parameter(_))));
    }

    /// Coordinates of an ambient vector in the *stored* basis.
    fn stored_coords(l: &Lattice, v: &[Rat]) -> Vec<Rat> {
        let b = l.basis().to_rat();
        let row: Vec<Rat> =
            v.iter().map(|x| x * Rat::from_integer(l.denom().clone())).collect();
        let x = linalg::solve_xa_eq_b(&b, &RatMatrix::from_rows(&[row])).unwrap();
        (0..x.cols()).map(|j| x[(0, j)].clone()).collect()
    }

    /// Independent oracle: exhaustive box scan in basis coordinates.
    fn brute_min_norm(l: &Lattice, shift: &[Rat], reach: i64) -> Rat {
        let gram = l.gram().clone();
        let coords = stored_coords(l, shift);
        let r = l.rank();
        let mut best: Option<Rat> = None;
        let mut idx = vec![-reach; r];
        loop {
            let v: Vec<Rat> = (0..r)
                .map(|i| Rat::from_integer(int(idx[i])) + &coords[i])
                .collect();
            let q = quadratic_value(&gram, &v);
            if best.as_ref().map_or(true, |b| q < *b) {
                best = Some(q);
            }
            let mut k = 0;
            loop {
                if k == r {
                    return best.unwrap();
                }
                idx[k] += 1;
                if idx[k] <= reach {
                    break;
                }
                idx[k] = -reach;
                k += 1;
            }
        }
    }

    #[test]
    fn coset_min_norm_frozen_values() {
        let n3 = build_n(3).unwrap();
        let g = gamma_vector(3).unwrap();
        let coset = Coset::new(n3.clone(), &g).unwrap();
        let mut budget = Budget::new(None);
        // Oracle agreement, then the frozen value 4/3.
        assert_eq!(brute_min_norm(&n3, &g, 4), rat(4, 3));
        assert_eq!(coset_min_norm(&coset, None, &mut budget).unwrap(), rat(4, 3));
        assert_eq!(
            coset_min_norm(&coset, Some(&rat(4, 3)), &mut budget).unwrap(),
            rat(4, 3)
        );
        // A hint below the minimum still returns the correct answer.
        assert_eq!(
            coset_min_norm(&coset, Some(&rat(1, 2)), &mut budget).unwrap(),
            rat(4, 3)
        );

        // N + beta_1/2 has minimum norm 1.
        let half_beta: Vec<Rat> =
            n3.basis_vectors()[0].iter().map(|v| v / rat(2, 1)).collect();
        let coset2 = Coset::new(n3.clone(), &half_beta).unwrap();
        assert_eq!(brute_min_norm(&n3, &half_beta, 4), rat(1, 1));
        assert_eq!(coset_min_norm(&coset2, None, &mut budget).unwrap(), rat(1, 1));

        // The trivial coset has minimum 0.
        let zero = vec![Rat::zero(); 3];
        let c0 = Coset::new(n3, &zero).unwrap();
        assert_eq!(coset_min_norm(&c0, None, &mut budget).unwrap(), rat(0, 1));
    }

    /// Independent oracle: count norms by box scan.
    fn brute_histogram(l: &Lattice, bound: &Rat, reach: i64) -> BTreeMap<Rat, u64> {
        let gram = l.gram().clone();
        let r = l.rank();
        let mut out: BTreeMap<Rat, u64> = BTreeMap::new();
        let mut idx = vec![-reach; r];
        loop {
            let v: Vec<Rat> = (0..r).map(|i| Rat::from_integer(int(idx[i]))).collect();
            let q = quadratic_value(&gram, &v);
            if q <= *bound {
                *out.entry(q).or_insert(0) += 1;
            }
            let mut k = 0;
            loop {
                if k == r {
                    return out;
                }
                idx[k] += 1;
                if idx[k] <= reach {
                    break;
                }
                idx[k] = -reach;
                k += 1;
            }
        }
    }

    #[test]
    fn theta_frozen_values_and_oracle() {
        let mut budget = Budget::new(None);
        let n3 = build_n(3).unwrap();
        let theta = theta_coeffs(&n3, &rat(3, 1), &mut budget).unwrap();
        assert_eq!(theta.coeff(&rat(0, 1)).unwrap(), rat(1, 1));
        assert_eq!(theta.coeff(&rat(1, 1)).unwrap(), rat(0, 1));
        // Six vectors of norm 4: +-beta_1, +-beta_2, +-(beta_1+beta_2).
        assert_eq!(theta.coeff(&rat(2, 1)).unwrap(), rat(6, 1));
        let brute = brute_histogram(&n3, &rat(6, 1), 5);
        for (norm, count) in brute {
            let e = norm / rat(2, 1);
            assert_eq!(
                theta.coeff(&e).unwrap(),
                Rat::from_integer(int(count as i64)),
                "exponent {e}"
            );
        }

        let z2 = zn(2);
        let tz = theta_coeffs(&z2, &rat(2, 1), &mut budget).unwrap();
        assert_eq!(tz.coeff(&rat(1, 2)).unwrap(), rat(4, 1));
        assert_eq!(tz.coeff(&rat(1, 1)).unwrap(), rat(4, 1));
        assert_eq!(tz.coeff(&rat(3, 2)).unwrap(), rat(0, 1));
        assert_eq!(tz.coeff(&rat(2, 1)).unwrap(), rat(4, 1));
    }

    #[test]
    fn theta_multiplies_over_orthogonal_sums() {
        let mut budget = Budget::new(None);
        let z1 = zn(1);
        let sum = z1.orthogonal_sum(&z1);
        assert_eq!(sum, zn(2));
        let t1 = theta_coeffs(&z1, &rat(4, 1), &mut budget).unwrap();
        let t2 = theta_coeffs(&sum, &rat(4, 1), &mut budget).unwrap();
        let prod = t1.mul(&t1);
        for n in 0..8 {
            let e = rat(n, 2);
            assert_eq!(prod.coeff(&e).unwrap(), t2.coeff(&e).unwrap(), "exponent {e}");
        }
    }

    #[test]
    fn enumeration_respects_budget() {
        let n3 = build_n_power(3, 2).unwrap();
        let mut tiny = Budget::new(Some(3));
        assert!(matches!(
            theta_coeffs(&n3, &rat(8, 1), &mut tiny),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn non_positive_definite_gram_is_rejected() {
        let mut g = RatMatrix::identity(2);
        g[(1, 1)] = rat(-1, 1);
        let l = Lattice::from_basis(g, Int::one(), IntMatrix::identity(2)).unwrap();
        let mut budget = Budget::new(None);
        assert!(matches!(
            theta_coeffs(&l, &rat(2, 1), &mut budget),
            Err(Error::Parameter(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Enumerator agrees with an exhaustive box scan on Z^3 with random
        /// rational shifts.
        #[test]
        fn histogram_matches_box_oracle(
            nums in proptest::collection::vec(-3i64..4, 3),
            dens in proptest::collection::vec(1i64..4, 3),
            bound_num in 1i64..7,
        ) {
            let l = zn(3);
            let shift: Vec<Rat> =
                nums.iter().zip(&dens).map(|(&n, &d)| rat(n, d)).collect();
            let coset = Coset::new(l.clone(), &shift).unwrap();
            let bound = rat(bound_num, 1);
            let mut budget = Budget::new(None);
            let fast = coset_norm_histogram(&coset, &bound, &mut budget).unwrap();
            // Box oracle over the canonical representative.
            let canon = coset.shift_vector();
            let reach = 5;
            let mut slow: BTreeMap<Rat, u64> = BTreeMap::new();
            for a in -reach..=reach {
                for b in -reach..=reach {
                    for c in -reach..=reach {
                        let v = [
                            rat(a, 1) + &canon[0],
                            rat(b, 1) + &canon[1],
                            rat(c, 1) + &canon[2],
                        ];
                        let q = &v[0]*&v[0] + &v[1]*&v[1] + &v[2]*&v[2];
                        if q <= bound {
                            *slow.entry(q).or_insert(0) += 1;
                        }
                    }
                }
            }
            prop_assert_eq!(fast, slow);
        }

        /// Dual of dual returns the original lattice.
        #[test]
        fn dual_dual_roundtrip(e in proptest::collection::vec(-4i64..5, 4)) {
            let b = IntMatrix::from_rows(&[
                vec![int(e[0]), int(e[1])],
                vec![int(e[2]), int(e[3])],
            ]);
            prop_assume!(b.rank() == 2);
            let l = Lattice::from_basis(RatMatrix::identity(2), int(2), b).unwrap();
            prop_assert_eq!(l.dual_lattice().dual_lattice(), l);
        }

        /// min norm equals the smallest histogram key.
        #[test]
        fn min_is_histogram_floor(
            nums in proptest::collection::vec(-2i64..3, 2),
            dens in proptest::collection::vec(1i64..4, 2),
        ) {
            let n3 = build_n(3).unwrap();
            // Shift = rational combination of basis vectors.
            let bv = n3.basis_vectors();
            let mut shift = vec![Rat::zero(); 3];
            for i in 0..2 {
                for j in 0..3 {
                    let t = rat(nums[i], dens[i]) * &bv[i][j];
                    shift[j] += t;
                }
            }
            let coset = Coset::new(n3, &shift).unwrap();
            let mut budget = Budget::new(None);
            let min = coset_min_norm(&coset, None, &mut budget).unwrap();
            let hist = coset_norm_histogram(&coset, &(&min + rat(2, 1)), &mut budget).unwrap();
            prop_assert_eq!(hist.keys().next().unwrap(), &min);
        }
    }
}
