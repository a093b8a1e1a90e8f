//! Exact symbolic algebra of multi-site qudit Weyl monomials.
//!
//! A single-site Weyl operator is `W(k,l) = e^{-iπkl/d} D^k S^l` where `D` is the
//! clock (`D|t> = ω^t |t>`) and `S` the shift (`S|t> = |t+1>`), `ω = e^{2πi/d}`.
//! This normalization is the one for which
//! `W(k,l) W(m,n) = e^{iπ(kn-lm)/d} W(k+m, l+n)` holds for all integer labels, so
//! `W(d,0) = 1` while `W(k+d,l) = (-1)^l W(k,l)`. Labels are stored reduced to
//! `[0,d)` and the sign produced by the reduction is folded into the phase, which
//! lives in `Z_{2d}` (the phase `q` stands for `e^{iπq/d}`).

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{LabError, Result};

pub type C64 = Complex64;

/// `e^{2πi num/den}`, exact at quarter turns so equal inputs cancel bit-for-bit.
pub(crate) fn unit_root(num: i64, den: u32) -> C64 {
    let den_i = den as i64;
    let n = num.rem_euclid(den_i);
    if (4 * n) % den_i == 0 {
        return match 4 * n / den_i {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, 2.0 * PI * n as f64 / den as f64)
}

pub(crate) fn check_dim(d: u32) -> Result<()> {
    if d < 2 {
        Err(LabError::InvalidDimension(d))
    } else {
        Ok(())
    }
}

fn check_same(a: u32, b: u32) -> Result<()> {
    if a != b {
        Err(LabError::DimensionMismatch { left: a, right: b })
    } else {
        Ok(())
    }
}

/// Element of `Z_{2d}` standing for the scalar `e^{iπq/d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseExp {
    q: u32,
    d: u32,
}

impl PhaseExp {
    pub fn new(q: i64, d: u32) -> Self {
        let m = 2 * d as i64;
        Self {
            q: q.rem_euclid(m) as u32,
            d,
        }
    }

    pub fn one(d: u32) -> Self {
        Self { q: 0, d }
    }

    pub fn q(self) -> u32 {
        self.q
    }

    pub fn d(self) -> u32 {
        self.d
    }

    pub fn mul(self, other: PhaseExp) -> Result<PhaseExp> {
        check_same(self.d, other.d)?;
        Ok(PhaseExp::new(self.q as i64 + other.q as i64, self.d))
    }

    pub fn inv(self) -> PhaseExp {
        PhaseExp::new(-(self.q as i64), self.d)
    }

    pub fn value(self) -> C64 {
        unit_root(self.q as i64, 2 * self.d)
    }
}

/// Clock/shift exponents `(k, l)` at one site, both reduced to `[0, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub k: u32,
    pub l: u32,
}

impl Label {
    pub fn is_identity(self) -> bool {
        self.k == 0 && self.l == 0
    }
}

/// Reduce integer labels to `[0,d)`; returns the reduced label and the phase
/// exponent (units of `π/d`) picked up on the way.
fn reduce_label(k: i64, l: i64, d: u32) -> (Label, i64) {
    let di = d as i64;
    let kr = k.rem_euclid(di);
    let lr = l.rem_euclid(di);
    let q = -(k * l - kr * lr);
    (
        Label {
            k: kr as u32,
            l: lr as u32,
        },
        q,
    )
}

pub type SiteLabels = Vec<(i64, Label)>;

/// A phase times a finite product of single-site Weyl operators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylMonomial {
    d: u32,
    sites: SiteLabels,
    phase: PhaseExp,
}

impl WeylMonomial {
    /// Identity monomial. Panics when `d < 2`.
    pub fn identity(d: u32) -> Self {
        assert!(d >= 2, "local dimension must be at least 2");
        Self {
            d,
            sites: Vec::new(),
            phase: PhaseExp::one(d),
        }
    }

    /// `W_site(k, l)` with arbitrary integer labels, reduced via the bilinear rule.
    pub fn single(d: u32, site: i64, k: i64, l: i64) -> Result<Self> {
        check_dim(d)?;
        let (label, q) = reduce_label(k, l, d);
        let sites = if label.is_identity() {
            Vec::new()
        } else {
            vec![(site, label)]
        };
        Ok(Self {
            d,
            sites,
            phase: PhaseExp::new(q, d),
        })
    }

    /// Ordered product `Π W_x(k_x, l_x)` (in iteration order) times `e^{iπq/d}`.
    pub fn from_labels<I>(d: u32, labels: I, q: i64) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, i64, i64)>,
    {
        let mut out = Self::identity_checked(d)?.with_phase(q);
        for (site, k, l) in labels {
            out = out.mul(&Self::single(d, site, k, l)?)?;
        }
        Ok(out)
    }

    fn identity_checked(d: u32) -> Result<Self> {
        check_dim(d)?;
        Ok(Self::identity(d))
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn sites(&self) -> &[(i64, Label)] {
        &self.sites
    }

    pub fn phase(&self) -> PhaseExp {
        self.phase
    }

    pub fn with_phase(mut self, q: i64) -> Self {
        self.phase = PhaseExp::new(q, self.d);
        self
    }

    /// Same labels, phase reset to zero.
    pub fn stripped(&self) -> Self {
        Self {
            d: self.d,
            sites: self.sites.clone(),
            phase: PhaseExp::one(self.d),
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn label_at(&self, site: i64) -> Label {
        self.sites
            .binary_search_by_key(&site, |(x, _)| *x)
            .map(|i| self.sites[i].1)
            .unwrap_or(Label { k: 0, l: 0 })
    }

    /// Smallest and largest occupied site.
    pub fn support(&self) -> Option<(i64, i64)> {
        match (self.sites.first(), self.sites.last()) {
            (Some(a), Some(b)) => Some((a.0, b.0)),
            _ => None,
        }
    }

    /// Total shift charge `Σ_x l_x mod d`.
    pub fn total_charge(&self) -> u32 {
        (self.sites.iter().map(|(_, lab)| lab.l as u64).sum::<u64>() % self.d as u64) as u32
    }

    pub fn mul(&self, other: &WeylMonomial) -> Result<WeylMonomial> {
        check_same(self.d, other.d)?;
        let d = self.d;
        let di = d as i64;
        let mut q = self.phase.q as i64 + other.phase.q as i64;
        let mut sites = Vec::with_capacity(self.sites.len() + other.sites.len());
        let (mut i, mut j) = (0, 0);
        while i < self.sites.len() || j < other.sites.len() {
            let take_a = j >= other.sites.len()
                || (i < self.sites.len() && self.sites[i].0 < other.sites[j].0);
            let take_b = i >= self.sites.len()
                || (j < other.sites.len() && other.sites[j].0 < self.sites[i].0);
            if take_a {
                sites.push(self.sites[i]);
                i += 1;
            } else if take_b {
                sites.push(other.sites[j]);
                j += 1;
            } else {
                let (x, a) = self.sites[i];
                let b = other.sites[j].1;
                let (k, l) = (a.k as i64, a.l as i64);
                let (m, n) = (b.k as i64, b.l as i64);
                q += k * n - l * m;
                let (lab, dq) = reduce_label(k + m, l + n, d);
                q += dq;
                if !lab.is_identity() {
                    sites.push((x, lab));
                }
                i += 1;
                j += 1;
            }
        }
        debug_assert!(sites.iter().all(|(_, lab)| (lab.k as i64) < di && (lab.l as i64) < di));
        Ok(WeylMonomial {
            d,
            sites,
            phase: PhaseExp::new(q, d),
        })
    }

    /// Inverse (= adjoint, monomials are unitary).
    pub fn adjoint(&self) -> WeylMonomial {
        let d = self.d;
        let mut q = -(self.phase.q as i64);
        let sites = self
            .sites
            .iter()
            .map(|&(x, lab)| {
                let (nl, dq) = reduce_label(-(lab.k as i64), -(lab.l as i64), d);
                q += dq;
                (x, nl)
            })
            .collect();
        WeylMonomial {
            d,
            sites,
            phase: PhaseExp::new(q, d),
        }
    }

    /// `c` with `a·b = e^{2πic/d} b·a`.
    pub fn commutation_phase(&self, other: &WeylMonomial) -> Result<u32> {
        check_same(self.d, other.d)?;
        let di = self.d as i64;
        let mut c = 0i64;
        for &(x, a) in &self.sites {
            let b = other.label_at(x);
            c += a.k as i64 * b.l as i64 - a.l as i64 * b.k as i64;
        }
        Ok(c.rem_euclid(di) as u32)
    }

    pub fn shifted(&self, n: i64) -> WeylMonomial {
        WeylMonomial {
            d: self.d,
            sites: self.sites.iter().map(|&(x, lab)| (x + n, lab)).collect(),
            phase: self.phase,
        }
    }
}

impl fmt::Display for WeylMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase.q != 0 {
            write!(f, "e^(iπ{}/{})", self.phase.q, self.d)?;
        }
        if self.sites.is_empty() {
            return write!(f, "1");
        }
        for (x, lab) in &self.sites {
            write!(f, "W{}({},{})", x, lab.k, lab.l)?;
        }
        Ok(())
    }
}

/// Finite complex combination of phase-stripped Weyl monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    d: u32,
    terms: BTreeMap<SiteLabels, C64>,
}

impl AlgebraElement {
    pub fn zero(d: u32) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(d: u32) -> Self {
        Self::scalar(d, C64::new(1.0, 0.0))
    }

    pub fn scalar(d: u32, c: C64) -> Self {
        let mut out = Self::zero(d);
        out.add_term(Vec::new(), c);
        out
    }

    pub fn from_monomial(m: &WeylMonomial) -> Self {
        Self::from_scaled(m, C64::new(1.0, 0.0))
    }

    pub fn from_scaled(m: &WeylMonomial, c: C64) -> Self {
        let mut out = Self::zero(m.d);
        out.add_term(m.sites.clone(), c * m.phase.value());
        out
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no term is stored (exact zero).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: SiteLabels, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == C64::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    /// `(monomial with zero phase, coefficient)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (WeylMonomial, C64)> + '_ {
        self.terms.iter().map(move |(k, c)| {
            (
                WeylMonomial {
                    d: self.d,
                    sites: k.clone(),
                    phase: PhaseExp::one(self.d),
                },
                *c,
            )
        })
    }

    /// Coefficient of the phase-stripped monomial with these labels.
    pub fn coefficient(&self, m: &WeylMonomial) -> C64 {
        self.terms
            .get(&m.sites)
            .map(|c| *c * m.phase.inv().value())
            .unwrap_or_default()
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        check_same(self.d, other.d)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> AlgebraElement {
        let mut out = Self::zero(self.d);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), *v * c);
        }
        out
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        check_same(self.d, other.d)?;
        let mut out = Self::zero(self.d);
        for (ka, ca) in &self.terms {
            let a = WeylMonomial {
                d: self.d,
                sites: ka.clone(),
                phase: PhaseExp::one(self.d),
            };
            for (kb, cb) in &other.terms {
                let b = WeylMonomial {
                    d: self.d,
                    sites: kb.clone(),
                    phase: PhaseExp::one(self.d),
                };
                let p = a.mul(&b)?;
                out.add_term(p.sites, *ca * *cb * p.phase.value());
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> AlgebraElement {
        let mut out = Self::zero(self.d);
        for (m, c) in self.terms() {
            let a = m.adjoint();
            out.add_term(a.sites.clone(), c.conj() * a.phase.value());
        }
        out
    }

    /// `A·B − B·A`.
    pub fn commutator(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> AlgebraElement {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() > tol);
        out
    }

    /// Largest coefficient deviation between two elements.
    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        let mut m: f64 = 0.0;
        for (k, c) in &self.terms {
            let o = other.terms.get(k).copied().unwrap_or_default();
            m = m.max((*c - o).norm());
        }
        for (k, c) in &other.terms {
            if !self.terms.contains_key(k) {
                m = m.max(c.norm());
            }
        }
        m
    }

    /// Total shift charges present among the terms.
    pub fn charges(&self) -> BTreeSet<u32> {
        self.terms().map(|(m, _)| m.total_charge()).collect()
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.charges().iter().all(|&c| c == 0)
    }

    /// Smallest and largest site touched by any term.
    pub fn support(&self) -> Option<(i64, i64)> {
        self.terms()
            .filter_map(|(m, _)| m.support())
            .fold(None, |acc, (lo, hi)| match acc {
                None => Some((lo, hi)),
                Some((a, b)) => Some((a.min(lo), b.max(hi))),
            })
    }

    pub fn shifted(&self, n: i64) -> AlgebraElement {
        let mut out = Self::zero(self.d);
        for (k, c) in &self.terms {
            out.add_term(k.iter().map(|&(x, lab)| (x + n, lab)).collect(), *c);
        }
        out
    }
}

/// Rank-one unit `|r><s|` at `site` as a `d`-term Weyl expansion:
/// `|r><s| = (1/d) Σ_k e^{-iπ(2ks + kl)/d} W(k,l)`, `l = r − s mod d`.
pub fn matrix_unit(d: u32, r: u32, s: u32, site: i64) -> Result<AlgebraElement> {
    check_dim(d)?;
    for idx in [r, s] {
        if idx >= d {
            return Err(LabError::IndexOutOfRange {
                index: idx as i64,
                bound: d as i64,
            });
        }
    }
    let di = d as i64;
    let l = (r as i64 - s as i64).rem_euclid(di);
    let mut out = AlgebraElement::zero(d);
    for k in 0..di {
        let m = WeylMonomial::single(d, site, k, l)?.with_phase(-(2 * k * s as i64 + k * l));
        out = out.add(&AlgebraElement::from_scaled(&m, C64::new(1.0 / d as f64, 0.0)))?;
    }
    Ok(out)
}

/// Multiplies every monomial by `e^{iαc}`, `c ∈ [0,d)` its total shift charge.
pub fn gauge_rotate(a: &AlgebraElement, alpha: f64) -> AlgebraElement {
    let mut out = AlgebraElement::zero(a.d);
    for (k, c) in &a.terms {
        let charge = (k.iter().map(|(_, lab)| lab.l as u64).sum::<u64>() % a.d as u64) as f64;
        out.add_term(k.clone(), *c * C64::from_polar(1.0, alpha * charge));
    }
    out
}

/// Relabels every site `x → x + n`.
pub fn lattice_shift(a: &AlgebraElement, n: i64) -> AlgebraElement {
    a.shifted(n)
}

/// Local dimension and string exponents `(j₊, j₋)` of the dressing automorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GradingParams {
    d: u32,
    j_plus: u32,
    j_minus: u32,
}

impl GradingParams {
    pub fn new(d: u32, j_plus: i64, j_minus: i64) -> Result<Self> {
        check_dim(d)?;
        let di = d as i64;
        Ok(Self {
            d,
            j_plus: j_plus.rem_euclid(di) as u32,
            j_minus: j_minus.rem_euclid(di) as u32,
        })
    }

    /// `j₊ = 1, j₋ = 0`: one-sided strings, the parafermionic choice.
    pub fn parafermionic(d: u32) -> Result<Self> {
        Self::new(d, 1, 0)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn j_plus(&self) -> u32 {
        self.j_plus
    }

    pub fn j_minus(&self) -> u32 {
        self.j_minus
    }

    /// `(j₊ − j₋) mod d`.
    pub fn grading_offset(&self) -> u32 {
        (self.j_plus as i64 - self.j_minus as i64).rem_euclid(self.d as i64) as u32
    }
}
