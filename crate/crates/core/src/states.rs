//! The tracial state and dynamical correlations.

use rayon::prelude::*;

use crate::dense::realize;
use crate::dynamics::QuadraticModel;
use crate::error::{LabError, Result};
use crate::weyl::{AlgebraElement, WeylMonomial, C64};

/// `ω(A)`: the coefficient of the identity monomial.
pub fn trace_state(a: &AlgebraElement) -> C64 {
    a.coefficient(&WeylMonomial::identity(a.d()))
}

/// `ω(A τ_t B) − ω(A) ω(B)` on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    pub a: String,
    pub b: String,
    pub series: Vec<(f64, C64)>,
}

fn describe(a: &AlgebraElement) -> String {
    let mut parts: Vec<String> = a
        .terms()
        .map(|(m, c)| format!("({:+e}{:+e}i){}", c.re, c.im, m))
        .collect();
    if parts.is_empty() {
        parts.push("0".into());
    }
    parts.join(" + ")
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

pub fn two_point(a: &AlgebraElement, b: &AlgebraElement, model: &QuadraticModel, times: &[f64]) -> Result<CorrelationSeries> {
    check_times(times)?;
    let chain = model.chain();
    let ae = model.in_eigenbasis(&realize(a, chain)?)?;
    let be = model.in_eigenbasis(&realize(b, chain)?)?;
    let e = model.energies()?;
    let n = chain.dim();
    let offset = trace_state(a) * trace_state(b);
    // ω(A e^{iHt} B e^{−iHt}) = (1/D) Σ_{ij} A_{ji} e^{i(E_i−E_j)t} B_{ij} in the eigenbasis.
    let series = times
        .par_iter()
        .map(|&t| {
            let phases: Vec<C64> = e.iter().map(|v| C64::from_polar(1.0, v * t)).collect();
            let mut acc = C64::default();
            for j in 0..n {
                let pj = phases[j].conj();
                for i in 0..n {
                    acc += ae[(j, i)] * phases[i] * be[(i, j)] * pj;
                }
            }
            (t, acc / n as f64 - offset)
        })
        .collect();
    Ok(CorrelationSeries {
        a: describe(a),
        b: describe(b),
        series,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringReport {
    pub correlation: CorrelationSeries,
    /// Running maximum of `|value|` over the remaining window.
    pub envelope: Vec<(f64, f64)>,
    /// Envelope divided by `|value(0)|`; empty when the first value vanishes.
    pub ratio: Vec<(f64, f64)>,
    /// Largest grid time inside the light-cone guard.
    pub window_end: f64,
}

/// Sites carrying a nonzero shift label; clock strings are excluded. Falls back to the
/// full support for pure clock elements.
pub fn active_support(a: &AlgebraElement) -> Option<(i64, i64)> {
    let mut range: Option<(i64, i64)> = None;
    for (m, _) in a.terms() {
        for &(x, l) in m.sites() {
            if l.l != 0 {
                range = Some(range.map_or((x, x), |(lo, hi)| (lo.min(x), hi.max(x))));
            }
        }
    }
    range.or_else(|| a.support())
}

/// Clustering of the truncated correlation, restricted to the pre-recurrence window.
pub fn clustering_report(a: &AlgebraElement, b: &AlgebraElement, model: &QuadraticModel, times: &[f64]) -> Result<ClusteringReport> {
    let (alo, ahi) = active_support(a).unwrap_or((0, 0));
    let (blo, bhi) = active_support(b).unwrap_or((0, 0));
    let guard = model.guard_time(alo.min(blo), ahi.max(bhi), 1);
    let inside: Vec<f64> = times.iter().copied().filter(|&t| t <= guard).collect();
    let correlation = two_point(a, b, model, &inside)?;
    let mut envelope: Vec<(f64, f64)> = correlation.series.iter().map(|(t, v)| (*t, v.norm())).collect();
    let mut run = 0.0f64;
    for p in envelope.iter_mut().rev() {
        run = run.max(p.1);
        p.1 = run;
    }
    let first = correlation.series.first().map(|p| p.1.norm()).unwrap_or(0.0);
    let ratio = if first > 0.0 {
        envelope.iter().map(|(t, v)| (*t, v / first)).collect()
    } else {
        Vec::new()
    };
    Ok(ClusteringReport {
        window_end: inside.last().copied().unwrap_or(0.0),
        correlation,
        envelope,
        ratio,
    })
}
