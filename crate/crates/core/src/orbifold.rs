//! Orbifold invariants of a glued lattice under a fixed-point-free power of
//! the Coxeter isometry: the radical of the twisted commutator, twisted
//! module counts and dimensions, exact quantum dimensions, the group-like
//! fusion criterion, and the census of irreducible modules of the fixed
//! subalgebra.
//!
//! Everything here is exact. Quantum dimensions live in quadratic extensions
//! of Q and are normalized to `coeff * sqrt(squarefree)`. Wherever two
//! formulas compute the same quantity, both are evaluated and compared; a
//! mismatch surfaces as [`Error::Inconsistency`] instead of a silent pick.

use crate::cocycle;
use crate::codes::{is_prime, lattice_from_codes, word_weight, CodeC, CodeD};
use crate::isometry::{coxeter_sigma, Isometry, SpectralData};
use crate::lattice::{Lattice, Parity};
use crate::linalg::AbelianQuotient;
use crate::{int, rat, Budget, Error, Int, Rat, Result};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

fn int_pow(base: u32, exp: usize) -> Int {
    let mut out = Int::one();
    for _ in 0..exp {
        out *= int(base as i64);
    }
    out
}

fn check_pair(c: &CodeC, dcode: &CodeD) -> Result<()> {
    if c.p() != dcode.p() || c.d() != dcode.d() {
        return Err(Error::Parameter("codes have mismatched p or d".into()));
    }
    Ok(())
}

/// The twisted-sector hypotheses on a code pair: both codes even (so the
/// glue lattice is even) and the binary code closed under the Coxeter action
/// (so the isometry descends to the glue).
fn require_even_invariant(c: &CodeC, dcode: &CodeD) -> Result<()> {
    if !c.is_isotropic() {
        return Err(Error::Hypothesis(
            "the binary code is not even: the quadratic refinement does not vanish on it".into(),
        ));
    }
    if !dcode.is_self_orthogonal() {
        return Err(Error::Hypothesis(
            "the p-ary code is not even (self-orthogonal)".into(),
        ));
    }
    if !c.is_sigma_invariant()? {
        return Err(Error::Hypothesis(
            "the binary code is not closed under the Coxeter action".into(),
        ));
    }
    Ok(())
}

fn check_twist_power(p: u32, s: u32) -> Result<()> {
    if s == 0 || s >= p {
        return Err(Error::Parameter(format!(
            "twist power must lie in 1..={}, got {s}",
            p - 1
        )));
    }
    Ok(())
}

/// Radical of the twisted commutator, `{a in L : c_sigma(a, .) = 0 mod 2p}`,
/// computed as `((1 - sigma^s) L_dual) cap L` and cross-checked against the
/// kernel of the commutator matrix.
pub fn radical(l: &Lattice, sigma_s: &Isometry) -> Result<Lattice> {
    let definitional = cocycle::commutator_radical(l, sigma_s)?;
    let moved_dual = l.dual_lattice().apply_ambient(&sigma_s.one_minus_ambient())?;
    let intersected = moved_dual.intersect(l)?;
    if intersected != definitional {
        return Err(Error::Inconsistency(
            "radical routes disagree: (1 - sigma^s) L_dual cap L vs commutator kernel".into(),
        ));
    }
    Ok(intersected)
}

/// The radical together with its structural subquotients.
#[derive(Clone, Debug)]
pub struct RadicalData {
    pub radical: Lattice,
    /// `R / (1 - sigma^s) L`; its order counts the twisted modules.
    pub quot_d: AbelianQuotient,
    /// `(1 - sigma^s) L_dual / R`.
    pub quot_c: AbelianQuotient,
    /// `L_dual / (1 - sigma^s) L_dual`.
    pub coker: AbelianQuotient,
}

impl RadicalData {
    pub fn new(l: &Lattice, sigma_s: &Isometry) -> Result<Self> {
        let rad = radical(l, sigma_s)?;
        let one_minus = sigma_s.one_minus_ambient();
        let moved = l.apply_ambient(&one_minus)?;
        let dual = l.dual_lattice();
        let moved_dual = dual.apply_ambient(&one_minus)?;
        let quot_d = rad.quotient_by(&moved)?;
        let quot_c = moved_dual.quotient_by(&rad)?;
        let coker = dual.quotient_by(&moved_dual)?;
        Ok(RadicalData { radical: rad, quot_d, quot_c, coker })
    }
}

/// Dimension of every irreducible twisted module: the radical index
/// `[L : R]` is a perfect square with root `dim T`.
pub fn twisted_dim(l: &Lattice, radical: &Lattice) -> Result<Int> {
    let index = l.quotient_by(radical)?.order;
    let root = index.sqrt();
    if &root * &root != index {
        return Err(Error::Inconsistency(format!(
            "radical index {index} is not a perfect square"
        )));
    }
    Ok(root)
}

/// Exact value `coeff * sqrt(squarefree)` with a positive rational `coeff`
/// and a squarefree positive integer under the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QdimExact {
    pub coeff: Rat,
    pub squarefree: Int,
}

impl QdimExact {
    /// Positive square root of a positive rational, normalized by pulling
    /// every square factor out of the root.
    pub fn sqrt_of(squared: &Rat) -> Result<QdimExact> {
        if !squared.is_positive() {
            return Err(Error::Parameter(format!(
                "cannot take a positive square root of {squared}"
            )));
        }
        let mut rest = squared.numer() * squared.denom();
        let mut outside = Int::one();
        let mut p = int(2);
        loop {
            let pp = &p * &p;
            if pp > rest {
                break;
            }
            while (&rest % &pp).is_zero() {
                rest /= &pp;
                outside *= &p;
            }
            p += Int::one();
        }
        Ok(QdimExact {
            coeff: Rat::new(outside, squared.denom().clone()),
            squarefree: rest,
        })
    }

    pub fn squared(&self) -> Rat {
        &self.coeff * &self.coeff * Rat::from_integer(self.squarefree.clone())
    }

    pub fn is_one(&self) -> bool {
        self.coeff.is_one() && self.squarefree.is_one()
    }

    pub fn to_f64(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        let s = self.squarefree.to_f64().unwrap_or(f64::NAN);
        c * s.sqrt()
    }
}

impl fmt::Display for QdimExact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.squarefree.is_one() {
            write!(f, "{}", self.coeff)
        } else if self.coeff.is_one() {
            write!(f, "sqrt({})", self.squarefree)
        } else {
            write!(f, "{} sqrt({})", self.coeff, self.squarefree)
        }
    }
}

/// Quantum dimension of an irreducible twisted module over the lattice
/// algebra: `v * dim_T / sqrt(prod_d d^(m_d))` with `v^2 = |L_dual / L|`.
/// For a fixed-point-free power of odd prime order the same value must equal
/// `sqrt(p^(-rank/(p-1)) * |L_dual / R|)`; both are computed and compared.
pub fn qdim_exact(l: &Lattice, spec: &SpectralData, dim_t: &Int) -> Result<QdimExact> {
    if !l.parity_report().even {
        return Err(Error::Hypothesis("quantum dimensions need an even lattice".into()));
    }
    let disc = l.discriminant_group()?.order;
    let dt2 = dim_t * dim_t;
    let main = Rat::from_integer(&disc * &dt2) / spec.eigen_index_product();
    let qdim = QdimExact::sqrt_of(&main)?;
    if is_prime(spec.order) && spec.is_fixed_point_free() && spec.rank % (spec.order as usize - 1) == 0 {
        let corollary = Rat::new(disc * dt2, int_pow(spec.order, spec.rank / (spec.order as usize - 1)));
        if qdim.squared() != corollary {
            return Err(Error::Inconsistency(
                "quantum dimension formulas disagree: eigenvalue-index product vs prime-power corollary"
                    .into(),
            ));
        }
    }
    Ok(qdim)
}

/// `qdim^2 = p^(-rank/(p-1)) |L_dual / R|` for a fixed-point-free isometry
/// of odd prime order: the radical route, independent of the code data.
pub fn qdim_squared_from_radical(l: &Lattice, radical: &Lattice, p: u32) -> Result<Rat> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Hypothesis(format!("order {p} is not an odd prime")));
    }
    let ell = l.rank();
    if ell % (p as usize - 1) != 0 {
        return Err(Error::Hypothesis(format!(
            "rank {ell} is not a multiple of p - 1 = {}",
            p - 1
        )));
    }
    let idx = l.dual_lattice().quotient_by(radical)?.order;
    Ok(Rat::new(idx, int_pow(p, ell / (p as usize - 1))))
}

/// `qdim^2 = |C_dual| / |C|` read off the binary code alone.
pub fn qdim_squared_from_code(c: &CodeC) -> Rat {
    let dual_dim = c.length() - c.dim();
    if dual_dim >= c.dim() {
        Rat::from_integer(Int::one() << (dual_dim - c.dim()))
    } else {
        Rat::new(Int::one(), Int::one() << (c.dim() - dual_dim))
    }
}

/// Group-like fusion criterion: under the evenness and invariance
/// hypotheses, the orbifold of the glue has group-like fusion exactly when
/// the binary code is self-dual.
pub fn group_like_fusion(c: &CodeC, dcode: &CodeD) -> Result<bool> {
    check_pair(c, dcode)?;
    require_even_invariant(c, dcode)?;
    Ok(c.is_self_dual())
}

fn guard_enumeration(q: u32, dim: usize, what: &str) -> Result<()> {
    let mut size = 1u64;
    for _ in 0..dim {
        size = size.saturating_mul(q as u64);
        if size > 200_000 {
            return Err(Error::Resource(format!(
                "{what} has {q}^{dim} elements, too many to enumerate"
            )));
        }
    }
    Ok(())
}

/// Coset representatives of a subgroup inside a listed group, by linear scan.
fn transversal(
    elements: &[Vec<u32>],
    modulus: u32,
    in_sub: &dyn Fn(&[u32]) -> bool,
    budget: &mut Budget,
) -> Result<Vec<Vec<u32>>> {
    let mut reps: Vec<Vec<u32>> = Vec::new();
    for e in elements {
        budget.charge("coset transversal")?;
        let known = reps.iter().any(|r| {
            let diff: Vec<u32> =
                e.iter().zip(r).map(|(x, y)| (x + modulus - y) % modulus).collect();
            in_sub(&diff)
        });
        if !known {
            reps.push(e.clone());
        }
    }
    Ok(reps)
}

/// Lowest conformal weight of the module attached to the dual coset
/// `L + beta(u0, a0)`: half the minimum coset norm, taken over the
/// block-factorized code words rather than the glued lattice directly.
pub fn coset_weight(
    c: &CodeC,
    dcode: &CodeD,
    u0: &[u32],
    a0: &[u32],
    budget: &mut Budget,
) -> Result<Rat> {
    check_pair(c, dcode)?;
    guard_enumeration(2, c.dim(), "the binary code")?;
    guard_enumeration(c.p(), dcode.dim(), "the p-ary code")?;
    let (p, d) = (c.p(), c.d());
    let d_words = dcode.elements();
    let mut best: Option<Rat> = None;
    for u in c.elements() {
        let uu: Vec<u32> = u.iter().zip(u0).map(|(x, y)| (x + y) % 2).collect();
        for a in &d_words {
            budget.charge("coset weight")?;
            let aa: Vec<u32> = a.iter().zip(a0).map(|(x, y)| (x + y) % p).collect();
            let w = word_weight(p, d, &uu, &aa, budget)?;
            if best.as_ref().map_or(true, |b| w < *b) {
                best = Some(w);
            }
        }
    }
    Ok(best.expect("a code always contains the zero word") / rat(2, 1))
}

/// Lowest conformal weights of all dual cosets of the glued lattice, sorted
/// with multiplicity: one entry per irreducible module of the lattice
/// algebra. Requires self-orthogonal codes so that the cosets make sense.
pub fn untwisted_weights(c: &CodeC, dcode: &CodeD, budget: &mut Budget) -> Result<Vec<Rat>> {
    check_pair(c, dcode)?;
    if !c.is_self_orthogonal() || !dcode.is_self_orthogonal() {
        return Err(Error::Hypothesis(
            "dual cosets need self-orthogonal codes on both sides".into(),
        ));
    }
    let cd = c.dual();
    let dd = dcode.dual();
    guard_enumeration(2, cd.dim(), "the binary dual code")?;
    guard_enumeration(c.p(), dd.dim(), "the p-ary dual code")?;
    let reps_c = transversal(&cd.elements(), 2, &|v| c.contains(v), budget)?;
    let reps_d = transversal(&dd.elements(), c.p(), &|v| dcode.contains(v), budget)?;
    let mut out = Vec::with_capacity(reps_c.len() * reps_d.len());
    for u0 in &reps_c {
        for a0 in &reps_d {
            out.push(coset_weight(c, dcode, u0, a0, budget)?);
        }
    }
    out.sort();
    Ok(out)
}

/// Census of the irreducible modules of the fixed subalgebra of the glue.
/// Counts are assembled from independently computed pieces: the dual-coset
/// transversal, the radical subquotient, and the sector arithmetic.
#[derive(Clone, Debug)]
pub struct IrrCensus {
    pub p: u32,
    pub d: usize,
    /// Dimension of the p-ary code.
    pub r: usize,
    /// `|D_dual / D|`, counted as dual cosets.
    pub untwisted_modules: Int,
    /// Twisted modules per sector, from the radical subquotient.
    pub twisted_per_sector: Int,
    pub sectors: u32,
    /// Every module upstairs splits into this many pieces.
    pub components: u32,
    /// Total count `p^(d - 2r + 2)`.
    pub order: Int,
    /// The fusion group, elementary abelian of the same order.
    pub group: AbelianQuotient,
    pub untwisted_weights: Vec<Rat>,
    pub twisted_weight: Rat,
    /// All weights lie in `(1/p) Z` modulo `Z`.
    pub weights_ok: bool,
    pub weights_mod_z: Vec<Rat>,
}

pub fn irr_census(c: &CodeC, dcode: &CodeD, budget: &mut Budget) -> Result<IrrCensus> {
    check_pair(c, dcode)?;
    require_even_invariant(c, dcode)?;
    if !c.is_self_dual() {
        return Err(Error::Hypothesis("the census needs a self-dual binary code".into()));
    }
    let (p, d) = (c.p(), c.d());
    if p == 3 && d % 3 != 0 {
        return Err(Error::Hypothesis(
            "the census at p = 3 needs d divisible by 3".into(),
        ));
    }
    let r = dcode.dim();
    // Self-orthogonality already forces 2r <= d; keep the subtraction safe.
    if 2 * r > d {
        return Err(Error::Hypothesis("p-ary code dimension exceeds d/2".into()));
    }

    let weights = untwisted_weights(c, dcode, budget)?;
    let untwisted_modules = int(weights.len() as i64);
    let expected_untwisted = int_pow(p, d - 2 * r);
    if untwisted_modules != expected_untwisted {
        return Err(Error::Inconsistency(format!(
            "counted {untwisted_modules} dual cosets but |D_dual / D| = {expected_untwisted}"
        )));
    }
    // The trivial coset carries the algebra itself at weight zero; every
    // other module sits strictly above it.
    if weights[0] != Rat::zero() || weights.iter().skip(1).any(|w| !w.is_positive()) {
        return Err(Error::Inconsistency(
            "dual coset weights have the wrong sign pattern".into(),
        ));
    }

    let l = lattice_from_codes(c, dcode)?;
    let sigma = coxeter_sigma(p, d, &l)?;
    let spec = SpectralData::new(&sigma)?;
    if !spec.is_fixed_point_free() {
        return Err(Error::Inconsistency(
            "the Coxeter action on the glue is not fixed-point-free".into(),
        ));
    }
    let data = RadicalData::new(&l, &sigma)?;
    let twisted_per_sector = data.quot_d.order.clone();
    if twisted_per_sector != expected_untwisted {
        return Err(Error::Inconsistency(format!(
            "radical subquotient has order {twisted_per_sector}, expected {expected_untwisted}"
        )));
    }
    let twisted_weight = rat(d as i64 * (p as i64 - 1) * (p as i64 + 1), 24 * p as i64);
    if spec.rho() != twisted_weight {
        return Err(Error::Inconsistency(
            "twisted ground weight disagrees with the eigenvalue formula".into(),
        ));
    }

    let order = &untwisted_modules * int(p as i64)
        + int(p as i64 - 1) * &twisted_per_sector * int(p as i64);
    let formula = int_pow(p, d - 2 * r + 2);
    if order != formula {
        return Err(Error::Inconsistency(format!(
            "assembled census order {order} differs from p^(d - 2r + 2) = {formula}"
        )));
    }
    let group = AbelianQuotient::homocyclic(p as i64, d - 2 * r + 2);

    let mut classes: BTreeSet<Rat> = BTreeSet::new();
    for w in &weights {
        classes.insert(w - w.floor());
    }
    classes.insert(&twisted_weight - twisted_weight.floor());
    let weights_ok = classes.iter().all(|w| (w * rat(p as i64, 1)).is_integer());
    let weights_mod_z: Vec<Rat> = classes.into_iter().collect();

    Ok(IrrCensus {
        p,
        d,
        r,
        untwisted_modules,
        twisted_per_sector,
        sectors: p - 1,
        components: p,
        order,
        group,
        untwisted_weights: weights,
        twisted_weight,
        weights_ok,
        weights_mod_z,
    })
}

/// Comparison of the computed radical against its code-theoretic
/// description: the radical equals the glue of `(C, D_dual)` moved by
/// `1 - sigma^s`, and the subquotients match `D_dual/D`, `C_dual/C`, and
/// `(Z/p)^d` as elementary-divisor chains.
#[derive(Clone, Debug)]
pub struct RadicalCheck {
    pub radical_matches_glue: bool,
    pub quot_d: AbelianQuotient,
    pub quot_d_expected: AbelianQuotient,
    pub quot_c: AbelianQuotient,
    pub quot_c_expected: AbelianQuotient,
    pub coker: AbelianQuotient,
    pub coker_expected: AbelianQuotient,
}

impl RadicalCheck {
    pub fn all_match(&self) -> bool {
        self.radical_matches_glue
            && self.quot_d == self.quot_d_expected
            && self.quot_c == self.quot_c_expected
            && self.coker == self.coker_expected
    }
}

pub fn radical_data_check(c: &CodeC, dcode: &CodeD, s: u32) -> Result<RadicalCheck> {
    check_pair(c, dcode)?;
    require_even_invariant(c, dcode)?;
    let (p, d) = (c.p(), c.d());
    check_twist_power(p, s)?;
    let l = lattice_from_codes(c, dcode)?;
    let sigma = coxeter_sigma(p, d, &l)?.power(s as i64);
    let data = RadicalData::new(&l, &sigma)?;
    let moved_glue =
        lattice_from_codes(c, &dcode.dual())?.apply_ambient(&sigma.one_minus_ambient())?;
    Ok(RadicalCheck {
        radical_matches_glue: moved_glue == data.radical,
        quot_d: data.quot_d,
        quot_d_expected: AbelianQuotient::homocyclic(p as i64, d - 2 * dcode.dim()),
        quot_c: data.quot_c,
        quot_c_expected: AbelianQuotient::homocyclic(2, c.length() - 2 * c.dim()),
        coker: data.coker,
        coker_expected: AbelianQuotient::homocyclic(p as i64, d),
    })
}

/// Everything the twisted sector `sigma^s` of a glued pair determines,
/// assembled for one power `s`.
#[derive(Clone, Debug)]
pub struct OrbifoldReport {
    pub p: u32,
    pub d: usize,
    pub s: u32,
    pub parity: Parity,
    pub disc: AbelianQuotient,
    pub m_d: BTreeMap<u32, i64>,
    pub r_multiplicities: Vec<i64>,
    pub radical: Lattice,
    pub radical_quotient: AbelianQuotient,
    pub num_twisted_irreps: Int,
    pub dim_t: Int,
    pub rho_twisted: Rat,
    pub qdim: QdimExact,
    pub group_like: bool,
    pub census: Option<IrrCensus>,
    pub census_obstruction: Option<String>,
    pub weights_mod_z: Vec<Rat>,
}

pub fn orbifold_report(
    c: &CodeC,
    dcode: &CodeD,
    s: u32,
    budget: &mut Budget,
) -> Result<OrbifoldReport> {
    check_pair(c, dcode)?;
    require_even_invariant(c, dcode)?;
    let (p, d) = (c.p(), c.d());
    check_twist_power(p, s)?;
    let l = lattice_from_codes(c, dcode)?;
    let parity = l.parity_report();
    if !parity.even {
        return Err(Error::Inconsistency("even codes produced a non-even lattice".into()));
    }
    let disc = l.discriminant_group()?;
    let sigma = coxeter_sigma(p, d, &l)?.power(s as i64);
    let spec = SpectralData::new(&sigma)?;
    if !spec.is_fixed_point_free() {
        return Err(Error::Inconsistency("the Coxeter power has fixed vectors".into()));
    }
    let data = RadicalData::new(&l, &sigma)?;
    let radical_quotient = l.quotient_by(&data.radical)?;
    let dim_t = twisted_dim(&l, &data.radical)?;
    let qdim = qdim_exact(&l, &spec, &dim_t)?;
    let group_like = c.is_self_dual();
    let (census, census_obstruction) = match irr_census(c, dcode, budget) {
        Ok(census) => (Some(census), None),
        Err(Error::Hypothesis(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    let untwisted = untwisted_weights(c, dcode, budget)?;
    let mut classes: BTreeSet<Rat> = BTreeSet::new();
    for w in &untwisted {
        classes.insert(w - w.floor());
    }
    let rho = spec.rho();
    classes.insert(&rho - rho.floor());
    Ok(OrbifoldReport {
        p,
        d,
        s,
        parity,
        disc,
        m_d: spec.m_d.clone(),
        r_multiplicities: spec.r.clone(),
        radical: data.radical,
        radical_quotient,
        num_twisted_irreps: data.quot_d.order,
        dim_t,
        rho_twisted: rho,
        qdim,
        group_like,
        census,
        census_obstruction,
        weights_mod_z: classes.into_iter().collect(),
    })
}
