//! One-particle layer: hopping symbols, Fourier-multiplier evolution on a torus grid,
//! sup-norm decay, fractional shifts and sector translations.
//!
//! Convention: `f̂(p) = Σ_x f(x) e^{2πipx}` on the grid `p = m/N`. A hopping acts by
//! convolution in position space, so evolution multiplies `f̂` by `e^{iĥ(p)t}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use faer::{Mat, Side};
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{LabError, Result};
use crate::weyl::{check_dim, unit_root, C64};

/// Hermiticity tolerance for hopping amplitudes.
const HERMITIAN_TOL: f64 = 1e-12;

/// Translation-invariant hopping amplitudes `h(x)` with `h(−x) = conj h(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hopping {
    coeffs: BTreeMap<i64, C64>,
}

impl Hopping {
    pub fn new<I: IntoIterator<Item = (i64, C64)>>(entries: I) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (x, c) in entries {
            *coeffs.entry(x).or_insert(C64::default()) += c;
        }
        coeffs.retain(|_, c: &mut C64| *c != C64::default());
        for (&x, &c) in &coeffs {
            let mirror = coeffs.get(&-x).copied().unwrap_or_default();
            if (mirror - c.conj()).norm() > HERMITIAN_TOL {
                return Err(LabError::NotHermitian { offset: x });
            }
        }
        Ok(Self { coeffs })
    }

    /// `(κ/2)(δ_{x,1} + δ_{x,−1})`, whose symbol is `κ cos 2πp`.
    pub fn cosine(kappa: f64) -> Self {
        let c = C64::new(kappa / 2.0, 0.0);
        Self::new([(1, c), (-1, c)]).expect("symmetric real hopping")
    }

    /// `iκ(δ_{x,1} − δ_{x,−1})`, whose symbol is `−2κ sin 2πp`.
    pub fn sine(kappa: f64) -> Self {
        Self::new([(1, C64::new(0.0, kappa)), (-1, C64::new(0.0, -kappa))]).expect("antisymmetric imaginary hopping")
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, C64> {
        &self.coeffs
    }

    pub fn get(&self, x: i64) -> C64 {
        self.coeffs.get(&x).copied().unwrap_or_default()
    }

    /// Largest `|x|` with `h(x) ≠ 0`.
    pub fn reach(&self) -> i64 {
        self.coeffs.keys().map(|x| x.abs()).max().unwrap_or(0)
    }

    /// `max x − min x` over the support.
    pub fn diameter(&self) -> i64 {
        match (self.coeffs.keys().next(), self.coeffs.keys().next_back()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    /// `ĥ(p)` at an arbitrary point.
    pub fn symbol_at(&self, p: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&x, &c)| c * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * p * x as f64))
            .sum::<C64>()
            .re
    }
}

/// `ĥ(m/N)` for `m = 0..N`.
pub fn symbol(h: &Hopping, n: usize) -> Result<Vec<f64>> {
    let needed = (2 * h.diameter()).max(1) as usize;
    if n < needed {
        return Err(LabError::GridTooSmall { n, needed });
    }
    let mut col = vec![C64::default(); n];
    for (&x, &c) in h.coeffs() {
        col[x.rem_euclid(n as i64) as usize] += c;
    }
    let fft = FftPlanner::new().plan_fft(n, FftDirection::Inverse);
    fft.process(&mut col);
    let out: Vec<f64> = col.iter().map(|z| z.re).collect();
    debug_assert!(col.iter().all(|z| z.im.abs() < 1e-9));
    Ok(out)
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (
        planner.plan_fft(n, FftDirection::Inverse),
        planner.plan_fft(n, FftDirection::Forward),
    )
}

/// Amplitudes `f(x, j)` on an `N`-site torus, one component per charge `j ∈ Z_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneParticleVector {
    d: u32,
    n: usize,
    comps: Vec<Vec<C64>>,
}

impl OneParticleVector {
    pub fn zeros(d: u32, n: usize) -> Result<Self> {
        check_dim(d)?;
        if n == 0 {
            return Err(LabError::GridTooSmall { n, needed: 1 });
        }
        Ok(Self {
            d,
            n,
            comps: vec![vec![C64::default(); n]; d as usize],
        })
    }

    /// Builds from `(site, charge, amplitude)` triples; sites wrap around the torus.
    pub fn from_entries<I: IntoIterator<Item = (i64, i64, C64)>>(d: u32, n: usize, entries: I) -> Result<Self> {
        let mut v = Self::zeros(d, n)?;
        for (x, j, c) in entries {
            let slot = v.slot(x);
            v.comps[j.rem_euclid(d as i64) as usize][slot] += c;
        }
        Ok(v)
    }

    pub fn delta(d: u32, n: usize, x: i64, j: i64) -> Result<Self> {
        Self::from_entries(d, n, [(x, j, C64::new(1.0, 0.0))])
    }

    /// Inverse of [`Self::momentum`].
    pub fn from_momentum(d: u32, comps: Vec<Vec<C64>>) -> Result<Self> {
        check_dim(d)?;
        if comps.len() != d as usize {
            return Err(LabError::InvalidArgument(format!("expected {d} charge components, got {}", comps.len())));
        }
        let n = comps[0].len();
        if n == 0 || comps.iter().any(|c| c.len() != n) {
            return Err(LabError::InvalidArgument("momentum components must share a nonempty grid".into()));
        }
        let (_, fwd) = plans(n);
        let scale = 1.0 / n as f64;
        let comps = comps
            .into_iter()
            .map(|mut c| {
                fwd.process(&mut c);
                c.iter_mut().for_each(|z| *z *= scale);
                c
            })
            .collect();
        Ok(Self { d, n, comps })
    }

    fn slot(&self, x: i64) -> usize {
        x.rem_euclid(self.n as i64) as usize
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn grid(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: i64, j: i64) -> C64 {
        self.comps[j.rem_euclid(self.d as i64) as usize][self.slot(x)]
    }

    pub fn component(&self, j: usize) -> &[C64] {
        &self.comps[j]
    }

    /// Nonzero entries in `(charge, site)` order; sites in `0..N`.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        self.comps.iter().enumerate().flat_map(|(j, c)| {
            c.iter()
                .enumerate()
                .filter(|(_, z)| **z != C64::default())
                .map(move |(x, z)| (x as i64, j as i64, *z))
        })
    }

    /// `f̂_j(m/N)` per charge.
    pub fn momentum(&self) -> Vec<Vec<C64>> {
        let (inv, _) = plans(self.n);
        self.comps
            .iter()
            .map(|c| {
                let mut c = c.clone();
                inv.process(&mut c);
                c
            })
            .collect()
    }

    pub fn l2_norm(&self) -> f64 {
        self.comps.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .zip(other.comps.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max deviation restricted to one charge component.
    pub fn component_diff(&self, other: &Self, j: usize) -> f64 {
        self.comps[j]
            .iter()
            .zip(&other.comps[j])
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `f(x) → f(x − n)` on every charge.
    pub fn lattice_shift(&self, n: i64) -> Self {
        let mut out = self.clone();
        let r = n.rem_euclid(self.n as i64) as usize;
        out.comps.iter_mut().for_each(|c| c.rotate_right(r));
        out
    }

    fn map_momentum(&self, mut f: impl FnMut(usize, usize, &mut C64)) -> Self {
        let mut mom = self.momentum();
        for (j, c) in mom.iter_mut().enumerate() {
            for (m, z) in c.iter_mut().enumerate() {
                f(j, m, z);
            }
        }
        Self::from_momentum(self.d, mom).expect("shape preserved")
    }
}

fn check_grid(f: &OneParticleVector, symbol: &[f64]) -> Result<()> {
    if symbol.len() != f.grid() {
        return Err(LabError::InvalidArgument(format!(
            "symbol has {} samples but the vector lives on {} sites",
            symbol.len(),
            f.grid()
        )));
    }
    Ok(())
}

/// Multiplies every charge component by `e^{iĥ(p)t}`.
pub fn evolve(f: &OneParticleVector, h: &Hopping, t: f64) -> Result<OneParticleVector> {
    let s = symbol(h, f.grid())?;
    evolve_symbol(f, &s, t)
}

pub fn evolve_symbol(f: &OneParticleVector, symbol: &[f64], t: f64) -> Result<OneParticleVector> {
    check_grid(f, symbol)?;
    Ok(f.map_momentum(|_, m, z| *z *= C64::from_polar(1.0, symbol[m] * t)))
}

/// Evolution with a separate hopping per charge component.
pub fn evolve_charged(f: &OneParticleVector, hs: &[Hopping], t: f64) -> Result<OneParticleVector> {
    if hs.len() != f.d() as usize {
        return Err(LabError::InvalidArgument(format!(
            "need one hopping per charge ({}), got {}",
            f.d(),
            hs.len()
        )));
    }
    let symbols = hs.iter().map(|h| symbol(h, f.grid())).collect::<Result<Vec<_>>>()?;
    Ok(f.map_momentum(|j, m, z| *z *= C64::from_polar(1.0, symbols[j][m] * t)))
}

/// Sup-norm series and its fitted power law.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    /// `(t, sup_{x,j} |f_t(x,j)|)`, sorted by `t`.
    pub series: Vec<(f64, f64)>,
    /// Least-squares slope of `log sup` against `log t` over the window.
    pub exponent: Option<f64>,
    pub window: (f64, f64),
}

/// Times below this are never used in the power-law fit.
pub const FIT_MIN_TIME: f64 = 5.0;

pub fn sup_decay(f: &OneParticleVector, h: &Hopping, times: &[f64], window: (f64, f64)) -> Result<DecayReport> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidArgument("time grid must be strictly increasing".into()));
    }
    let s = symbol(h, f.grid())?;
    let mom = f.momentum();
    let n = f.grid();
    let series: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let (_, fwd) = plans(n);
            let mut sup = 0.0f64;
            for c in &mom {
                let mut buf: Vec<C64> = c.iter().zip(&s).map(|(z, e)| z * C64::from_polar(1.0, e * t)).collect();
                fwd.process(&mut buf);
                sup = buf.iter().map(|z| z.norm() / n as f64).fold(sup, f64::max);
            }
            (t, sup)
        })
        .collect();
    let lo = window.0.max(FIT_MIN_TIME);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, v)| *t >= lo && *t <= window.1 && *v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    Ok(DecayReport {
        series,
        exponent: fit_slope(&pts),
        window: (lo, window.1),
    })
}

/// Ordinary least-squares slope; `None` below two distinct abscissae.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Continuous translation by `α ∈ [0,1)` combined with the sector rotation
/// `e^{2πiαj/d}`. Momenta are taken in `[−1/2, 1/2)` so that `R_α R_β = R_{α+β}` and
/// `R_1` is the unit lattice shift times `e^{2πij/d}`.
fn fractional_part_shift(f: &OneParticleVector, alpha: f64) -> OneParticleVector {
    let n = f.grid();
    let d = f.d() as f64;
    f.map_momentum(|j, m, z| {
        let p = if 2 * m >= n { m as f64 / n as f64 - 1.0 } else { m as f64 / n as f64 };
        let phase = 2.0 * std::f64::consts::PI * alpha * (p + j as f64 / d);
        *z *= C64::from_polar(1.0, phase);
    })
}

/// `U_δ = T^{⌊δ⌋} · e^{2πi·twist·⌊δ⌋·j/d} · R_{δ−⌊δ⌋}`.
///
/// With `twist = 1` the family is a one-parameter group; with `twist = 0` composing
/// across an integer crossing picks up `e^{2πij/d}` on charge `j`.
pub fn fractional_shift(f: &OneParticleVector, delta: f64, twist: i64) -> OneParticleVector {
    let whole = delta.floor();
    let frac = delta - whole;
    let whole = whole as i64;
    let mut out = f.lattice_shift(whole);
    let d = f.d();
    for (j, c) in out.comps.iter_mut().enumerate() {
        let tw = unit_root(twist * whole * j as i64, d);
        c.iter_mut().for_each(|z| *z *= tw);
    }
    if frac != 0.0 {
        out = fractional_part_shift(&out, frac);
    }
    out
}

/// Cyclic translation of the momentum samples: `f̂(p) → f̂(p + (j−k)/d)`.
pub fn sector_translate(f: &OneParticleVector, j: i64, k: i64) -> Result<OneParticleVector> {
    let n = f.grid();
    let d = f.d() as usize;
    if !n.is_multiple_of(d) {
        return Err(LabError::GridNotDivisible { n, by: d });
    }
    let step = ((j - k).rem_euclid(d as i64) as usize) * (n / d);
    let mut mom = f.momentum();
    mom.iter_mut().for_each(|c| c.rotate_left(step));
    OneParticleVector::from_momentum(f.d(), mom)
}

/// `‖T_{j,k} e^{iĥt} f − e^{iĥt} T_{j,k} f‖_max`.
pub fn translate_evolve_defect(f: &OneParticleVector, h: &Hopping, t: f64, j: i64, k: i64) -> Result<f64> {
    let a = sector_translate(&evolve(f, h, t)?, j, k)?;
    let b = evolve(&sector_translate(f, j, k)?, h, t)?;
    Ok(a.max_abs_diff(&b))
}

/// Values of the original and the `k`-blocked symbol at the rational points `l/k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaReport {
    pub k: usize,
    /// `ĥ(l/k)` for `l = 0..k`, sorted.
    pub original: Vec<f64>,
    /// Eigenvalues of the `k×k` blocked symbol at zero block momentum, sorted.
    pub blocked: Vec<f64>,
    pub deviation: f64,
    pub coincide: bool,
}

/// The blocked hopping has matrix entries `H_{ab}(X) = h(kX + b − a)` and block symbol
/// `Σ_X H(X) e^{2πiqX}`; only `q = 0` is evaluated.
pub fn sigma_constraint_check(h: &Hopping, k: usize) -> Result<SigmaReport> {
    if k == 0 {
        return Err(LabError::InvalidArgument("block size must be at least 1".into()));
    }
    let mut original: Vec<f64> = (0..k).map(|l| h.symbol_at(l as f64 / k as f64)).collect();
    original.sort_by(f64::total_cmp);
    let block = Mat::<C64>::from_fn(k, k, |a, b| {
        h.coeffs()
            .iter()
            .filter(|(&x, _)| (x - (b as i64 - a as i64)).rem_euclid(k as i64) == 0)
            .map(|(_, &c)| c)
            .sum()
    });
    let mut blocked = block
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LabError::Numerical(format!("{e:?}")))?;
    blocked.sort_by(f64::total_cmp);
    let deviation = original
        .iter()
        .zip(&blocked)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(SigmaReport {
        k,
        original,
        blocked,
        deviation,
        coincide: deviation < 1e-10,
    })
}
