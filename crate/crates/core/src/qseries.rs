//! Truncated series in `q^{1/D}` with exact rational coefficients, plus the
//! specific series this crate cares about: eta products, theta functions
//! (built in [`crate::lattice`]), and twisted characters. Floating point
//! enters only at evaluation time, on the imaginary axis `tau = i y`.
//!
//! A series carries an explicit exclusive truncation exponent: coefficients
//! at exponents strictly below it are exact, everything at or above it is
//! unknown. Arithmetic propagates truncations pessimistically, so a result
//! never claims more precision than its inputs support.

use crate::isometry::SpectralData;
use crate::lattice::{theta_coeffs, Lattice};
use crate::{Budget, Error, Int, Rat, Result};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Series `sum c_n q^(n/denom)` with `n` ranging over integers below `trunc`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QSeries {
    denom: i64,
    coeffs: BTreeMap<i64, Rat>,
    trunc: i64,
}

impl QSeries {
    pub fn zero(denom: i64, trunc: &Rat) -> Self {
        assert!(denom >= 1);
        QSeries { denom, coeffs: BTreeMap::new(), trunc: Self::to_num(denom, trunc) }
    }

    pub fn one(denom: i64, trunc: &Rat) -> Self {
        let mut s = Self::zero(denom, trunc);
        if s.trunc > 0 {
            s.coeffs.insert(0, Rat::one());
        }
        s
    }

    /// `coeff * q^exponent`, truncated at `trunc`.
    pub fn monomial(denom: i64, exponent: &Rat, coeff: Rat, trunc: &Rat) -> Self {
        let mut s = Self::zero(denom, trunc);
        let e = Self::to_num(denom, exponent);
        if e < s.trunc && !coeff.is_zero() {
            s.coeffs.insert(e, coeff);
        }
        s
    }

    /// Build a series from explicit `(exponent, coefficient)` pairs.
    pub fn from_terms(denom: i64, terms: &[(Rat, Rat)], trunc: &Rat) -> Self {
        let mut s = Self::zero(denom, trunc);
        for (e, c) in terms {
            let n = Self::to_num(denom, e);
            if n < s.trunc && !c.is_zero() {
                let entry = s.coeffs.entry(n).or_insert_with(Rat::zero);
                *entry += c;
            }
        }
        s.coeffs.retain(|_, c| !c.is_zero());
        s
    }

    fn to_num(denom: i64, exponent: &Rat) -> i64 {
        let scaled = exponent * Rat::from_integer(Int::from(denom));
        assert!(
            scaled.is_integer(),
            "exponent {exponent} not representable with denominator {denom}"
        );
        scaled.to_integer().to_i64().expect("exponent numerator out of range")
    }

    pub fn denom_exponent(&self) -> i64 {
        self.denom
    }

    /// Exclusive truncation bound as an exponent.
    pub fn truncation(&self) -> Rat {
        crate::rat(self.trunc, self.denom)
    }

    /// Exponent of the lowest nonzero known term.
    pub fn leading_exponent(&self) -> Option<Rat> {
        self.coeffs.keys().next().map(|&n| crate::rat(n, self.denom))
    }

    /// Coefficient at `exponent`; `None` when the exponent is at or beyond
    /// the truncation (unknown), zero when it is known and absent.
    pub fn coeff(&self, exponent: &Rat) -> Option<Rat> {
        let scaled = exponent * Rat::from_integer(Int::from(self.denom));
        if !scaled.is_integer() {
            // Not on this series' exponent grid: known zero if below trunc.
            return if *exponent < self.truncation() { Some(Rat::zero()) } else { None };
        }
        let n = scaled.to_integer().to_i64()?;
        if n >= self.trunc {
            return None;
        }
        Some(self.coeffs.get(&n).cloned().unwrap_or_else(Rat::zero))
    }

    /// Known coefficients as `(exponent, coefficient)` pairs in ascending order.
    pub fn terms(&self) -> impl Iterator<Item = (Rat, &Rat)> + '_ {
        self.coeffs.iter().map(move |(&n, c)| (crate::rat(n, self.denom), c))
    }

    /// Re-express on a finer exponent grid; `new_denom` must be a multiple.
    pub fn rescale(&self, new_denom: i64) -> QSeries {
        assert!(new_denom % self.denom == 0, "denominator must refine the old grid");
        let f = new_denom / self.denom;
        QSeries {
            denom: new_denom,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n * f, c.clone())).collect(),
            trunc: self.trunc * f,
        }
    }

    fn aligned(&self, other: &QSeries) -> (QSeries, QSeries) {
        let d = self.denom.lcm(&other.denom);
        (self.rescale(d), other.rescale(d))
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let (mut a, b) = self.aligned(other);
        a.trunc = a.trunc.min(b.trunc);
        for (n, c) in b.coeffs {
            if n < a.trunc {
                let e = a.coeffs.entry(n).or_insert_with(Rat::zero);
                *e += c;
            }
        }
        a.coeffs.retain(|&n, c| n < a.trunc && !c.is_zero());
        a
    }

    pub fn neg(&self) -> QSeries {
        QSeries {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, -c.clone())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> QSeries {
        if c.is_zero() {
            return QSeries { denom: self.denom, coeffs: BTreeMap::new(), trunc: self.trunc };
        }
        QSeries {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&n, v)| (n, v * c)).collect(),
            trunc: self.trunc,
        }
    }

    /// Shift every exponent by `delta` (multiplication by `q^delta`).
    pub fn shift(&self, delta: &Rat) -> QSeries {
        let d = Self::to_num(self.denom, delta);
        QSeries {
            denom: self.denom,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n + d, c.clone())).collect(),
            trunc: self.trunc + d,
        }
    }

    fn leading_or_trunc(&self) -> i64 {
        self.coeffs.keys().next().copied().unwrap_or(self.trunc)
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let (a, b) = self.aligned(other);
        // Unknown tails start at a.trunc resp. b.trunc; the first unknown
        // product exponent is the smaller of trunc + other's leading.
        let cutoff = (a.trunc + b.leading_or_trunc()).min(b.trunc + a.leading_or_trunc());
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for (&n, cn) in &a.coeffs {
            for (&m, cm) in &b.coeffs {
                if n + m >= cutoff {
                    break;
                }
                let e = coeffs.entry(n + m).or_insert_with(Rat::zero);
                *e += cn * cm;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        QSeries { denom: a.denom, coeffs, trunc: cutoff }
    }

    /// Multiplicative inverse. The leading known coefficient must be nonzero;
    /// the result is exact to the same relative precision.
    pub fn inverse(&self) -> Result<QSeries> {
        let Some((&lead, c0)) = self.coeffs.iter().next() else {
            return Err(Error::Parameter("cannot invert a series with no known nonzero term".into()));
        };
        let rel = self.trunc - lead; // number of known relative exponent steps
        // Normalize to constant term 1: f = c0 q^lead (1 + g).
        let inv_c0 = Rat::one() / c0.clone();
        let mut f_rel: BTreeMap<i64, Rat> = BTreeMap::new();
        for (&n, c) in &self.coeffs {
            f_rel.insert(n - lead, c * &inv_c0);
        }
        let mut h: BTreeMap<i64, Rat> = BTreeMap::new();
        h.insert(0, Rat::one());
        for n in 1..rel {
            let mut acc = Rat::zero();
            for (&k, fk) in f_rel.range(1..=n) {
                if let Some(hn) = h.get(&(n - k)) {
                    acc += fk * hn;
                }
            }
            if !acc.is_zero() {
                h.insert(n, -acc);
            }
        }
        let coeffs: BTreeMap<i64, Rat> =
            h.into_iter().map(|(n, c)| (n - lead, c * &inv_c0)).collect();
        Ok(QSeries { denom: self.denom, coeffs, trunc: rel - lead })
    }

    /// Integer power, negative allowed (via [`QSeries::inverse`]).
    pub fn pow(&self, k: i64) -> Result<QSeries> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        if k == 0 {
            let rel = self.trunc - self.leading_or_trunc();
            return Ok(QSeries::one(self.denom, &crate::rat(rel, self.denom)));
        }
        let mut result: Option<QSeries> = None;
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result.unwrap())
    }

    /// Evaluate at a numeric `q` (the only place floats appear).
    pub fn eval_q(&self, q: f64) -> f64 {
        let d = self.denom as f64;
        self.coeffs
            .iter()
            .map(|(&n, c)| c.to_f64().unwrap_or(f64::NAN) * q.powf(n as f64 / d))
            .sum()
    }

    /// Evaluate at `tau = i y` on the imaginary axis, i.e. `q = exp(-2 pi y)`.
    pub fn eval_at_y(&self, y: f64) -> f64 {
        self.eval_q(EvalPoint::new(y).q)
    }
}

/// A point `tau = i y` on the imaginary axis with its nome precomputed.
#[derive(Clone, Copy, Debug)]
pub struct EvalPoint {
    pub y: f64,
    pub q: f64,
}

impl EvalPoint {
    pub fn new(y: f64) -> Self {
        assert!(y > 0.0, "evaluation point must have y > 0");
        EvalPoint { y, q: (-2.0 * std::f64::consts::PI * y).exp() }
    }
}

/// Dedekind eta `q^(1/24) prod_{n>=1} (1 - q^n)`, exact below `trunc`.
pub fn eta_series(trunc: &Rat) -> QSeries {
    eta_scaled_series(1, trunc)
}

/// Eta with rescaled argument `tau / scale`: a series in `q^(1/(24*scale))`,
/// namely `q^(1/(24 scale)) prod_{n>=1} (1 - q^(n/scale))`.
pub fn eta_scaled_series(scale: i64, trunc: &Rat) -> QSeries {
    assert!(scale >= 1);
    let denom = 24 * scale;
    let t_num = (trunc * Rat::from_integer(Int::from(denom))).ceil().to_integer();
    let t_num = t_num.to_i64().expect("truncation out of range");
    // Product part needs relative precision t_num - 1 (the leading shift is
    // one grid step); factors with exponent beyond that cannot contribute.
    let rel = crate::rat(t_num - 1, denom);
    let mut acc = QSeries::one(denom, &rel);
    let mut n = 1i64;
    while crate::rat(n, scale) < rel {
        let factor = QSeries::one(denom, &rel)
            .sub(&QSeries::monomial(denom, &crate::rat(n, scale), Rat::one(), &rel));
        acc = acc.mul(&factor);
        n += 1;
    }
    acc.shift(&crate::rat(1, denom))
}

/// Numeric `prod_{n>=1} (1 - q^n)` (eta without its fractional power),
/// truncated once factors stop moving the sum at double precision.
pub fn euler_product(q: f64) -> f64 {
    assert!(q.abs() < 1.0);
    let mut acc = 1.0;
    let mut qn = q;
    while qn.abs() > 1e-300 {
        let next = acc * (1.0 - qn);
        if next == acc {
            break;
        }
        acc = next;
        qn *= q;
    }
    acc
}

/// Numeric eta at `tau = i y`.
pub fn eta_eval(y: f64) -> f64 {
    let q = EvalPoint::new(y).q;
    q.powf(1.0 / 24.0) * euler_product(q)
}

/// Residual of the modular identity `eta(i/y) = sqrt(y) eta(i y)` at a point.
pub fn eta_transform_residual(y: f64) -> f64 {
    (eta_eval(1.0 / y) - y.sqrt() * eta_eval(y)).abs()
}

/// Truncation (as a lattice norm bound) for the theta series inside the
/// character-ratio evaluator.
pub const QDIM_TRUNC_NORM: i64 = 24;

/// Truncation (as a lattice norm bound) for the theta transformation check.
pub const TRANSFORM_TRUNC_NORM: i64 = 60;

pub const DEFAULT_Y_SCHEDULE: [f64; 4] = [1.0, 0.8, 0.6, 0.5];

fn require_fixed_point_free(spec: &SpectralData) -> Result<()> {
    if spec.r.first().map_or(true, |&r0| r0 != 0) {
        return Err(Error::Hypothesis(
            "the twisted character needs a fixed-point-free isometry (no eigenvalue 1)".into(),
        ));
    }
    Ok(())
}

/// Graded trace of the twisted free-boson module: the product formula
/// `q^(rho - rank/24) / prod_{i=1}^{p-1} prod_{n>=0} (1 - q^(i/p + n))^(r_{p-i})`.
pub fn twisted_char(spec: &SpectralData, trunc: &Rat) -> Result<QSeries> {
    require_fixed_point_free(spec)?;
    let p = spec.order as i64;
    let denom = 24i64.lcm(&(2 * p * p));
    let lead = spec.rho() - crate::rat(spec.rank as i64, 24);
    let rel = trunc - &lead;
    if rel <= Rat::zero() {
        return Err(Error::Parameter(
            "truncation does not reach the leading exponent".into(),
        ));
    }
    let mut acc = QSeries::one(denom, &rel);
    for i in 1..p {
        let mult = spec.r[(p - i) as usize];
        if mult == 0 {
            continue;
        }
        let mut n = 0i64;
        loop {
            let e = crate::rat(i, p) + crate::rat(n, 1);
            if e >= rel {
                break;
            }
            let factor = QSeries::one(denom, &rel)
                .sub(&QSeries::monomial(denom, &e, Rat::one(), &rel));
            acc = acc.mul(&factor.pow(-mult)?);
            n += 1;
        }
    }
    Ok(acc.shift(&lead))
}

/// The same character as an eta quotient `prod_{d | order} eta(tau/d)^(-m_d)`;
/// the fractional eta prefactors cancel against `q^(rho - rank/24)` exactly.
pub fn twisted_char_eta_route(spec: &SpectralData, trunc: &Rat) -> Result<QSeries> {
    require_fixed_point_free(spec)?;
    let lead = spec.rho() - crate::rat(spec.rank as i64, 24);
    let rel = trunc - &lead;
    if rel <= Rat::zero() {
        return Err(Error::Parameter(
            "truncation does not reach the leading exponent".into(),
        ));
    }
    let mut acc: Option<QSeries> = None;
    for (&d, &m) in &spec.m_d {
        if m == 0 {
            continue;
        }
        let t_d = crate::rat(1, 24 * d as i64) + &rel;
        let f = eta_scaled_series(d as i64, &t_d).pow(-m)?;
        acc = Some(match acc {
            None => f,
            Some(a) => a.mul(&f),
        });
    }
    let series =
        acc.ok_or_else(|| Error::Hypothesis("the isometry has an empty spectrum".into()))?;
    if series.leading_exponent().as_ref() != Some(&lead) {
        return Err(Error::Inconsistency(
            "eta-quotient leading exponent disagrees with the ground weight".into(),
        ));
    }
    Ok(series)
}

/// Graded dimension of the lattice algebra, `Theta_L / eta^rank`.
pub fn lattice_character(l: &Lattice, trunc: &Rat, budget: &mut Budget) -> Result<QSeries> {
    let ell = l.rank() as i64;
    let lead = crate::rat(-ell, 24);
    let rel = trunc - &lead;
    if rel <= Rat::zero() {
        return Err(Error::Parameter(
            "truncation does not reach the leading exponent".into(),
        ));
    }
    let theta = theta_coeffs(l, &rel.ceil(), budget)?;
    let eta_inv = eta_series(&(crate::rat(1, 24) + &rel)).pow(-ell)?;
    Ok(theta.mul(&eta_inv))
}

/// Result of the transformed character-ratio evaluation.
#[derive(Clone, Debug)]
pub struct NumericQdim {
    /// The certified limit of the ratio.
    pub value: f64,
    /// Difference of the last two schedule evaluations.
    pub error_estimate: f64,
    /// The transformed ratio along the schedule, approaching `value`.
    pub schedule_values: Vec<f64>,
}

/// Numerically evaluates the limit of `dim_T * Z_twisted(iy) / Z_lattice(iy)`
/// as `y -> 0+` through the S-transformed factorization: the ratio splits
/// into a closed prefactor `dim_T * v / sqrt(prod d^(m_d))` times a
/// correction series in `exp(-2 pi / y)` with constant term exactly one, so
/// the limit is the prefactor. The schedule evaluations certify that the
/// correction decays: their distances to the limit must shrink monotonically,
/// and the error estimate is the difference of the last two evaluations.
pub fn numeric_qdim_detailed(
    l: &Lattice,
    spec: &SpectralData,
    dim_t: &Int,
    y_schedule: &[f64],
    budget: &mut Budget,
) -> Result<NumericQdim> {
    require_fixed_point_free(spec)?;
    if spec.rank != l.rank() {
        return Err(Error::Parameter("spectral data does not match the lattice rank".into()));
    }
    if !l.parity_report().even {
        return Err(Error::Hypothesis("the character ratio needs an even lattice".into()));
    }
    if y_schedule.len() < 2 {
        return Err(Error::Parameter("the y schedule needs at least two points".into()));
    }
    if y_schedule[0] <= 0.0 || y_schedule.windows(2).any(|w| w[1] <= 0.0 || w[1] >= w[0]) {
        return Err(Error::Parameter(
            "the y schedule must be positive and strictly decreasing".into(),
        ));
    }

    let radicand =
        Rat::from_integer(dim_t * dim_t) * l.det_gram() / spec.eigen_index_product();
    let value = radicand.to_f64().unwrap_or(f64::NAN).sqrt();

    // The eta prefactors of the correction cancel exactly when the eta
    // exponents resolve the rank; everything else is checked numerically.
    let weighted: i64 = spec.m_d.iter().map(|(&d, &m)| d as i64 * m).sum();
    if weighted != spec.rank as i64 {
        return Err(Error::Inconsistency(
            "eta exponents do not resolve the rank; the correction prefactor would not cancel"
                .into(),
        ));
    }
    let trunc = crate::rat(QDIM_TRUNC_NORM, 2);
    let theta_dual = theta_coeffs(&l.dual_lattice(), &trunc, budget)?;
    if theta_dual.coeff(&Rat::zero()) != Some(Rat::one()) {
        return Err(Error::Inconsistency(
            "dual theta series must start with the zero vector".into(),
        ));
    }

    // Truncation certificate at the largest scheduled point (slowest decay):
    // only the theta factor is truncated, the Euler products converge.
    let q_max = EvalPoint::new(1.0 / y_schedule[0]).q;
    let tail = q_max.powf(theta_dual.truncation().to_f64().unwrap_or(0.0));
    if tail > 1e-9 {
        return Err(Error::Resource(format!(
            "series truncation only bounds the correction tail by {tail:.3e} at the largest scheduled point"
        )));
    }

    // Correction factor P(q)^rank prod_d P(q^d)^(-m_d) / Theta_dual(q),
    // evaluated factor by factor: every piece is a convergent positive
    // quantity, so no truncated series is ever inverted.
    let correction_at = |q: f64| -> f64 {
        let mut acc = euler_product(q).powi(l.rank() as i32);
        for (&d, &m) in &spec.m_d {
            if m != 0 {
                acc *= euler_product(q.powi(d as i32)).powi(-m as i32);
            }
        }
        acc / theta_dual.eval_q(q)
    };
    let schedule_values: Vec<f64> =
        y_schedule.iter().map(|&y| value * correction_at(EvalPoint::new(1.0 / y).q)).collect();
    let mut last_dist = f64::INFINITY;
    for v in &schedule_values {
        let dist = (v - value).abs();
        if dist > last_dist {
            return Err(Error::Resource(format!(
                "schedule evaluations move away from the limit: distance grew to {dist:.3e}"
            )));
        }
        last_dist = dist;
    }
    let n = schedule_values.len();
    let error_estimate = (schedule_values[n - 1] - schedule_values[n - 2]).abs();
    Ok(NumericQdim { value, error_estimate, schedule_values })
}

pub fn numeric_qdim(
    l: &Lattice,
    spec: &SpectralData,
    dim_t: &Int,
    y_schedule: &[f64],
    budget: &mut Budget,
) -> Result<f64> {
    Ok(numeric_qdim_detailed(l, spec, dim_t, y_schedule, budget)?.value)
}

/// Residual of `Theta_L(iy) = y^(-rank/2) v^(-1) Theta_dual(i/y)` with both
/// sides evaluated from series truncated at norm [`TRANSFORM_TRUNC_NORM`].
pub fn transform_check(l: &Lattice, y: f64, budget: &mut Budget) -> Result<f64> {
    if !(0.5..=2.0).contains(&y) {
        return Err(Error::Parameter("the transform check wants y in [0.5, 2]".into()));
    }
    let bound = crate::rat(TRANSFORM_TRUNC_NORM, 2);
    let theta_l = theta_coeffs(l, &bound, budget)?;
    let theta_dual = theta_coeffs(&l.dual_lattice(), &bound, budget)?;
    let v = l.det_gram().to_f64().unwrap_or(f64::NAN).sqrt();
    let lhs = theta_l.eval_at_y(y);
    let rhs = y.powf(-(l.rank() as f64) / 2.0) / v * theta_dual.eval_at_y(1.0 / y);
    Ok((lhs - rhs).abs())
}
