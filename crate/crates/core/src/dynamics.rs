//! Heisenberg dynamics of the quadratic dressed-hopping Hamiltonian on an open chain.
//!
//! `H = Σ_z Σ_x h(x) W̄_z(0,1) W̄_{z+x}(0,−1) + h.c.` over all pairs inside the chain.
//! Dense evolution goes through one cached eigendecomposition of `H`.

use std::sync::OnceLock;

use faer::{Mat, Side};
use rayon::prelude::*;

use crate::dense::{gauge_unitary, op_norm, realize, realize_monomial, weyl_decompose, ChainSpec, DenseOperator};
use crate::dressing::{dressed_label, dressed_weyl};
use crate::error::{LabError, Result};
use crate::one_particle::{Hopping, OneParticleVector};
use crate::weyl::{unit_root, AlgebraElement, GradingParams, WeylMonomial, C64};

/// Coefficients below this are dropped from oracle decompositions.
pub const DECOMPOSE_TOL: f64 = 1e-12;

struct Spectrum {
    vectors: Mat<C64>,
    values: Vec<f64>,
}

pub struct QuadraticModel {
    chain: ChainSpec,
    params: GradingParams,
    hopping: Hopping,
    hamiltonian: AlgebraElement,
    dense: DenseOperator,
    spectrum: OnceLock<Spectrum>,
}

impl std::fmt::Debug for QuadraticModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadraticModel")
            .field("chain", &self.chain)
            .field("params", &self.params)
            .field("hopping", &self.hopping)
            .field("terms", &self.hamiltonian.len())
            .finish()
    }
}

fn i_unit() -> C64 {
    C64::new(0.0, 1.0)
}

/// Builds `H` symbolically and densely.
pub fn build_hamiltonian(hopping: &Hopping, params: &GradingParams, chain: &ChainSpec) -> Result<QuadraticModel> {
    if params.d() != chain.d() {
        return Err(LabError::DimensionMismatch {
            left: params.d(),
            right: chain.d(),
        });
    }
    if hopping.diameter() >= chain.len() as i64 {
        return Err(LabError::SupportTooLarge {
            reach: hopping.diameter(),
            len: chain.len(),
        });
    }
    let d = params.d();
    let len = chain.len() as i64;
    let raising: Vec<WeylMonomial> = (0..len).map(|z| dressed_weyl(z, 1, params, chain)).collect::<Result<_>>()?;
    let mut h = AlgebraElement::zero(d);
    for z in 0..len {
        for (&x, &c) in hopping.coeffs() {
            let y = z + x;
            if !(0..len).contains(&y) {
                continue;
            }
            let term = raising[z as usize].mul(&raising[y as usize].adjoint())?;
            let t = AlgebraElement::from_scaled(&term, c);
            h = h.add(&t)?.add(&t.adjoint())?;
        }
    }
    let h = h.pruned(0.0);
    let dense = realize(&h, chain)?;
    Ok(QuadraticModel {
        chain: *chain,
        params: *params,
        hopping: hopping.clone(),
        hamiltonian: h,
        dense,
        spectrum: OnceLock::new(),
    })
}

impl QuadraticModel {
    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn params(&self) -> &GradingParams {
        &self.params
    }

    pub fn hopping(&self) -> &Hopping {
        &self.hopping
    }

    pub fn hamiltonian(&self) -> &AlgebraElement {
        &self.hamiltonian
    }

    pub fn dense(&self) -> &DenseOperator {
        &self.dense
    }

    /// `‖[H, G]‖` for the global gauge unitary `G`.
    pub fn gauge_defect(&self) -> Result<f64> {
        op_norm(&self.dense.commutator(&gauge_unitary(&self.chain))?)
    }

    fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let eig = self
            .dense
            .mat()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| LabError::Numerical(format!("{e:?}")))?;
        let values = eig.S().column_vector().iter().map(|z| z.re).collect();
        let s = Spectrum {
            vectors: eig.U().to_owned(),
            values,
        };
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// Eigenvalues of `H` in nondecreasing order.
    pub fn energies(&self) -> Result<&[f64]> {
        Ok(&self.spectrum()?.values)
    }

    /// `U† M U` with `U` the eigenvectors of `H`.
    pub fn in_eigenbasis(&self, m: &DenseOperator) -> Result<Mat<C64>> {
        self.to_eigenbasis(m.mat())
    }

    /// Light-cone speed `8 Σ_x |x|·|h(x)|`; each bond enters `H` four times
    /// (both orientations and their adjoints).
    pub fn light_cone_speed(&self) -> f64 {
        8.0 * self
            .hopping
            .coeffs()
            .iter()
            .map(|(&x, c)| x.abs() as f64 * c.norm())
            .sum::<f64>()
    }

    /// Longest time for which a cone from `[lo, hi]` stays at least `margin` sites
    /// inside the chain; infinite for `h = 0`.
    pub fn guard_time(&self, lo: i64, hi: i64, margin: i64) -> f64 {
        let room = lo.min(self.chain.len() as i64 - 1 - hi) - margin;
        let v = self.light_cone_speed();
        if room < 0 {
            0.0
        } else if v == 0.0 {
            f64::INFINITY
        } else {
            room as f64 / v
        }
    }

    fn to_eigenbasis(&self, m: &Mat<C64>) -> Result<Mat<C64>> {
        let u = &self.spectrum()?.vectors;
        Ok(u.adjoint() * m * u)
    }

    fn back_from_eigenbasis(&self, m: &Mat<C64>) -> Result<Mat<C64>> {
        let u = &self.spectrum()?.vectors;
        Ok(u * m * u.adjoint())
    }

    /// `e^{iHt} M e^{−iHt}` for a matrix already in the eigenbasis.
    fn rotate(&self, m: &Mat<C64>, t: f64) -> Result<Mat<C64>> {
        let e = &self.spectrum()?.values;
        let phases: Vec<C64> = e.iter().map(|v| C64::from_polar(1.0, v * t)).collect();
        Ok(Mat::from_fn(m.nrows(), m.ncols(), |i, j| phases[i] * m[(i, j)] * phases[j].conj()))
    }

    /// `τ_t(M) = e^{iHt} M e^{−iHt}`.
    pub fn evolve_dense(&self, m: &DenseOperator, t: f64) -> Result<DenseOperator> {
        if m.chain() != self.chain {
            return Err(LabError::InvalidArgument("operator lives on a different chain".into()));
        }
        if t == 0.0 {
            return Ok(m.clone());
        }
        let rotated = self.rotate(&self.to_eigenbasis(m.mat())?, t)?;
        DenseOperator::from_mat(self.chain, self.back_from_eigenbasis(&rotated)?)
    }
}

pub fn heisenberg_evolve(a: &AlgebraElement, model: &QuadraticModel, t: f64) -> Result<DenseOperator> {
    model.evolve_dense(&realize(a, &model.chain)?, t)
}

/// `‖[τ_t A, B]‖` over a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorSeries {
    pub series: Vec<(f64, f64)>,
    pub a_gauge_invariant: bool,
    pub b_gauge_invariant: bool,
}

impl CommutatorSeries {
    /// Running maximum of the series from each time onward, i.e. the decreasing envelope.
    pub fn envelope(&self) -> Vec<(f64, f64)> {
        let mut out = self.series.clone();
        let mut run = 0.0f64;
        for p in out.iter_mut().rev() {
            run = run.max(p.1);
            p.1 = run;
        }
        out
    }

    pub fn peak(&self) -> f64 {
        self.series.iter().map(|p| p.1).fold(0.0, f64::max)
    }
}

pub fn commutator_decay(
    a: &AlgebraElement,
    b: &AlgebraElement,
    model: &QuadraticModel,
    times: &[f64],
) -> Result<CommutatorSeries> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidArgument("time grid must be strictly increasing".into()));
    }
    let chain = model.chain;
    let a_eig = model.to_eigenbasis(realize(a, &chain)?.mat())?;
    let b_eig = model.to_eigenbasis(realize(b, &chain)?.mat())?;
    let series = times
        .par_iter()
        .map(|&t| {
            let at = model.rotate(&a_eig, t)?;
            let c = &at * &b_eig - &b_eig * &at;
            Ok((t, op_norm(&DenseOperator::from_mat(chain, c)?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommutatorSeries {
        series,
        a_gauge_invariant: a.is_gauge_invariant(),
        b_gauge_invariant: b.is_gauge_invariant(),
    })
}

/// Status of one printed-formula comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Match,
    Mismatch,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Match => "MATCH",
            RowStatus::Mismatch => "MISMATCH",
        }
    }
}

/// A printed right-hand side against the dense decomposition of the true left-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct PrintedRow {
    pub label: String,
    pub oracle: AlgebraElement,
    pub printed: AlgebraElement,
    /// Largest coefficient difference.
    pub deviation: f64,
    pub status: RowStatus,
}

impl PrintedRow {
    pub fn compare(label: impl Into<String>, oracle: AlgebraElement, printed: AlgebraElement) -> Self {
        let printed = printed.pruned(DECOMPOSE_TOL);
        let deviation = oracle.max_abs_diff(&printed);
        let status = if deviation < 1e-10 {
            RowStatus::Match
        } else {
            RowStatus::Mismatch
        };
        Self {
            label: label.into(),
            oracle,
            printed,
            deviation,
            status,
        }
    }
}

fn oracle_of(m: &DenseOperator) -> Result<AlgebraElement> {
    weyl_decompose(m, DECOMPOSE_TOL)
}

fn elem(m: &WeylMonomial) -> AlgebraElement {
    AlgebraElement::from_monomial(m)
}

fn cos_turn(num: f64) -> C64 {
    C64::new((2.0 * std::f64::consts::PI * num).cos(), 0.0)
}

/// Dense oracles for the three bilinear commutators and the generator on `W̄_o(0,1)`.
///
/// `o` is the origin site, `o + x` the far end of the bilinear and `o + z` the probe for
/// the first row. The generator rows use the model's hopping and compare against the
/// printed two-term form at offset `±reach(h)`, with both the `cos(2πj₊/d)` and
/// `cos(2πj₊)` coefficients; they are skipped when `o ± reach` leaves the chain.
pub fn printed_commutator_oracle(model: &QuadraticModel, origin: i64, x: i64, z: i64) -> Result<Vec<PrintedRow>> {
    let chain = &model.chain;
    let p = &model.params;
    let d = p.d();
    if x <= 0 || !chain.contains(origin - x) || !chain.contains(origin + x) {
        return Err(LabError::InvalidArgument(format!(
            "origin {origin} and offset {x} must leave o±x inside the chain"
        )));
    }
    let jp = p.j_plus() as i64;
    let jm = p.j_minus() as i64;
    let w0 = dressed_weyl(origin, 1, p, chain)?;
    let wx = dressed_weyl(origin + x, 1, p, chain)?;
    let bilinear = w0.adjoint().mul(&wx)?;
    let dense_bilinear = realize_monomial(&bilinear, chain)?;
    let mut rows = Vec::new();

    if z > 0 && z < x {
        let wz = dressed_weyl(origin + z, 1, p, chain)?;
        let lhs = dense_bilinear.commutator(&realize_monomial(&wz, chain)?)?;
        let clock = WeylMonomial::single(d, origin + z, jp + jm, 0)?;
        let printed = elem(&clock)
            .commutator(&elem(&wz))?
            .scale(unit_root(jp + jm, d));
        rows.push(PrintedRow::compare("bilinear_interior", oracle_of(&lhs)?, printed));
    }

    let lhs = dense_bilinear.commutator(&realize_monomial(&w0, chain)?)?;
    let printed = elem(&WeylMonomial::single(d, origin + x, jm, 0)?.mul(&wx)?).scale(cos_turn(jp as f64 / d as f64));
    rows.push(PrintedRow::compare("bilinear_origin", oracle_of(&lhs)?, printed));

    let sym = dense_bilinear.add(&dense_bilinear.adjoint())?;
    let lhs = sym.commutator(&realize_monomial(&wx, chain)?)?;
    let printed = elem(&WeylMonomial::single(d, origin + x, -jm, 0)?.mul(&w0)?).scale(cos_turn(-(jp as f64) / d as f64));
    rows.push(PrintedRow::compare("bilinear_end", oracle_of(&lhs)?, printed));

    let gen = model.dense.commutator(&realize_monomial(&w0, chain)?)?.scale(i_unit());
    let oracle = oracle_of(&gen)?;
    let reach = model.hopping.reach().max(1);
    if !chain.contains(origin - reach) || !chain.contains(origin + reach) {
        return Ok(rows);
    }
    let pair = elem(&dressed_label(origin + reach, 2 * jp, 1, p, chain)?)
        .add(&elem(&dressed_label(origin - reach, 2 * jp, 1, p, chain)?))?;
    rows.push(PrintedRow::compare(
        "generator_integer_turn",
        oracle.clone(),
        pair.scale(cos_turn(jp as f64)),
    ));
    rows.push(PrintedRow::compare(
        "generator_fractional_turn",
        oracle,
        pair.scale(cos_turn(jp as f64 / d as f64)),
    ));
    Ok(rows)
}

/// `W̄(f) = Σ f(x,j) W̄_x(j,1)` for a vector whose support lies in the chain.
pub fn smeared(f: &OneParticleVector, params: &GradingParams, chain: &ChainSpec) -> Result<AlgebraElement> {
    if f.d() != params.d() {
        return Err(LabError::DimensionMismatch {
            left: f.d(),
            right: params.d(),
        });
    }
    let mut out = AlgebraElement::zero(params.d());
    for (x, j, c) in f.entries() {
        if !chain.contains(x) {
            return Err(LabError::SiteOutsideChain {
                site: x,
                len: chain.len(),
            });
        }
        out = out.add(&AlgebraElement::from_scaled(&dressed_label(x, j, 1, params, chain)?, c))?;
    }
    Ok(out)
}

/// Projection of `i[H, W̄(f)]` onto `span{W̄_x(j,1)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanResidual {
    /// `‖D − P D‖_HS / ‖D‖_HS`, zero when `D = 0`.
    pub residual: f64,
    /// `(x, j, coefficient)` of the projection, nonzero entries only.
    pub coefficients: Vec<(i64, i64, C64)>,
}

pub fn span_residual(model: &QuadraticModel, f: &OneParticleVector) -> Result<SpanResidual> {
    let chain = &model.chain;
    let p = &model.params;
    let a = realize(&smeared(f, p, chain)?, chain)?;
    let deriv = model.dense.commutator(&a)?.scale(i_unit());
    let norm = deriv.frobenius_norm();
    if norm == 0.0 {
        return Ok(SpanResidual {
            residual: 0.0,
            coefficients: Vec::new(),
        });
    }
    let dim = chain.dim() as f64;
    let mut rest = deriv.clone();
    let mut coefficients = Vec::new();
    for x in 0..chain.len() as i64 {
        for j in 0..p.d() as i64 {
            let b = realize_monomial(&dressed_label(x, j, 1, p, chain)?, chain)?;
            let n = b.dim();
            let mut ip = C64::default();
            for c in 0..n {
                for r in 0..n {
                    ip += b.get(r, c).conj() * deriv.get(r, c);
                }
            }
            let coeff = ip / dim;
            if coeff.norm() > DECOMPOSE_TOL {
                rest = rest.sub(&b.scale(coeff))?;
                coefficients.push((x, j, coeff));
            }
        }
    }
    Ok(SpanResidual {
        residual: rest.frobenius_norm() / norm,
        coefficients,
    })
}

/// One-particle hopping reproducing the bulk generator on charge `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasifreeGenerator {
    pub charge: i64,
    pub hopping: Hopping,
    /// Coefficient mass of `i[H, W̄_y(j,1)]` outside `span{W̄_{y+u}(j,1)}`.
    pub leakage: f64,
}

/// Reads off `i[H, W̄_y(j,1)] = Σ_u K(u) W̄_{y+u}(j,1)` at a bulk site and sets `g = −iK`.
///
/// Evolving the coefficient vector with `g` then reproduces `τ_t W̄(f)` in the bulk.
pub fn quasifree_generator(model: &QuadraticModel, charge: i64) -> Result<QuasifreeGenerator> {
    let chain = &model.chain;
    let p = &model.params;
    let reach = model.hopping.reach();
    let y = chain.len() as i64 / 2;
    if y - reach < 0 || y + reach >= chain.len() as i64 {
        return Err(LabError::SupportTooLarge {
            reach,
            len: chain.len(),
        });
    }
    let w = elem(&dressed_label(y, charge, 1, p, chain)?);
    let mut rest = model.hamiltonian.commutator(&w)?.scale(i_unit()).pruned(DECOMPOSE_TOL);
    let mut entries = Vec::new();
    for u in -2 * reach..=2 * reach {
        if !chain.contains(y + u) {
            continue;
        }
        let target = dressed_label(y + u, charge, 1, p, chain)?;
        let k = rest.coefficient(&target);
        if k.norm() > DECOMPOSE_TOL {
            rest = rest.sub(&AlgebraElement::from_scaled(&target, k))?;
            entries.push((u, -i_unit() * k));
        }
    }
    let leakage = rest.terms().map(|(_, c)| c.norm()).sum();
    let hopping = Hopping::new(entries).map_err(|e| LabError::Numerical(format!("generator is not hermitian: {e}")))?;
    Ok(QuasifreeGenerator {
        charge,
        hopping,
        leakage,
    })
}

/// Both sides of the spin-operator reconstruction
/// `W_x(1,0) = e^{2πi/d} W̄_x(0,1) · (W_x(1,0) W̄_x(0,−1))` under evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinReconstruction {
    pub site: i64,
    pub t: f64,
    /// `τ_t(W_x(1,0))` against `e^{2πi/d} τ_t(A) τ_t(B)`.
    pub deviation: f64,
    /// Same with the factors in the opposite order and the matching phase.
    pub swapped_deviation: f64,
    /// Deviation when `B` is replaced by the relabelled `W̄_x(1,−1)`.
    pub relabelled_deviation: f64,
}

pub fn reconstruct_spin_evolution(model: &QuadraticModel, site: i64, t: f64) -> Result<SpinReconstruction> {
    let chain = &model.chain;
    let p = &model.params;
    let d = p.d();
    if site <= 0 || site + 1 >= chain.len() as i64 {
        return Err(LabError::InvalidArgument(format!("site {site} is not interior")));
    }
    let spin = WeylMonomial::single(d, site, 1, 0)?;
    let a = dressed_weyl(site, 1, p, chain)?;
    let b = spin.mul(&dressed_weyl(site, 1, p, chain)?.adjoint())?;
    let relabelled = dressed_label(site, 1, -1, p, chain)?;
    let ev = |m: &WeylMonomial| model.evolve_dense(&realize_monomial(m, chain)?, t);
    let lhs = ev(&spin)?;
    let ta = ev(&a)?;
    let tb = ev(&b)?;
    let rhs = ta.mul(&tb)?.scale(unit_root(1, d));
    // A B = e^{2πic/d} B A.
    let c = a.commutation_phase(&b)? as i64;
    let swapped = tb.mul(&ta)?.scale(unit_root(1 + c, d));
    let rel = ta.mul(&ev(&relabelled)?)?.scale(unit_root(1, d));
    Ok(SpinReconstruction {
        site,
        t,
        deviation: lhs.max_abs_diff(&rhs),
        swapped_deviation: lhs.max_abs_diff(&swapped),
        relabelled_deviation: lhs.max_abs_diff(&rel),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::GaugeProject;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn majorana_model(len: usize, kappa: f64) -> QuadraticModel {
        let chain = ChainSpec::new(2, len).unwrap();
        let p = GradingParams::new(2, 1, 0).unwrap();
        build_hamiltonian(&Hopping::sine(kappa), &p, &chain).unwrap()
    }

    /// `Σ_z X_z Y_{z+1}` assembled from Kronecker products.
    fn xy_chain(len: usize) -> Mat<C64> {
        let x = Mat::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let y = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        let id = Mat::<C64>::identity(2, 2);
        let n = 1 << len;
        let mut total = Mat::<C64>::zeros(n, n);
        for z in 0..len - 1 {
            let mut acc = Mat::<C64>::identity(1, 1);
            for s in 0..len {
                let f = if s == z {
                    &x
                } else if s == z + 1 {
                    &y
                } else {
                    &id
                };
                acc = Mat::from_fn(acc.nrows() * 2, acc.ncols() * 2, |i, j| acc[(i / 2, j / 2)] * f[(i % 2, j % 2)]);
            }
            total = &total + &acc;
        }
        total
    }

    #[test]
    fn qubit_model_is_xy_chain() {
        let kappa = 0.3;
        let model = majorana_model(5, kappa);
        let xy = DenseOperator::from_mat(*model.chain(), xy_chain(5)).unwrap();
        let expected = xy.scale(c(-4.0 * kappa, 0.0));
        assert!(model.dense().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn zero_hopping_gives_zero() {
        let chain = ChainSpec::new(3, 3).unwrap();
        let h = Hopping::new([]).unwrap();
        let m = build_hamiltonian(&h, &GradingParams::new(3, 1, 1).unwrap(), &chain).unwrap();
        assert!(m.hamiltonian().is_zero());
    }

    #[test]
    fn hamiltonian_is_hermitian_and_gauge_invariant() {
        let chain = ChainSpec::new(3, 5).unwrap();
        let h = Hopping::new([(1, c(0.4, 0.3)), (-1, c(0.4, -0.3)), (2, c(0.0, 0.2)), (-2, c(0.0, -0.2))]).unwrap();
        let m = build_hamiltonian(&h, &GradingParams::new(3, 1, 2).unwrap(), &chain).unwrap();
        assert!(m.hamiltonian().adjoint().max_abs_diff(m.hamiltonian()) < 1e-15);
        assert!(m.hamiltonian().is_gauge_invariant());
        assert!(m.gauge_defect().unwrap() < 1e-12);
    }

    #[test]
    fn support_must_fit() {
        let chain = ChainSpec::new(2, 3).unwrap();
        let h = Hopping::new([(3, c(1.0, 0.0)), (-3, c(1.0, 0.0))]).unwrap();
        assert!(matches!(
            build_hamiltonian(&h, &GradingParams::new(2, 1, 0).unwrap(), &chain),
            Err(LabError::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn evolution_is_unitary_group() {
        let chain = ChainSpec::new(3, 4).unwrap();
        let p = GradingParams::new(3, 1, 1).unwrap();
        let m = build_hamiltonian(&Hopping::cosine(1.0), &p, &chain).unwrap();
        let a = AlgebraElement::from_monomial(&WeylMonomial::single(3, 1, 0, 1).unwrap());
        let a0 = heisenberg_evolve(&a, &m, 0.0).unwrap();
        assert!(a0.max_abs_diff(&realize(&a, &chain).unwrap()) < 1e-15);
        let a1 = heisenberg_evolve(&a, &m, 0.7).unwrap();
        assert!((op_norm(&a1).unwrap() - 1.0).abs() < 1e-10);
        let a2 = m.evolve_dense(&a1, 1.1).unwrap();
        assert!(a2.max_abs_diff(&heisenberg_evolve(&a, &m, 1.8).unwrap()) < 1e-10);
        let proj = heisenberg_evolve(&a.gauge_project(), &m, 0.9).unwrap();
        let after = heisenberg_evolve(&a, &m, 0.9).unwrap().gauge_project();
        assert!(proj.max_abs_diff(&after) < 1e-10);
    }

    #[test]
    fn qubit_generator_closes() {
        let model = majorana_model(6, 0.25);
        let g0 = quasifree_generator(&model, 0).unwrap();
        assert!(g0.leakage < 1e-12);
        // g(u) = 4(h(−u) − h(u)) for the charge-0 Majoranas.
        assert!((g0.hopping.get(1) - c(0.0, -2.0)).norm() < 1e-12);
        let g1 = quasifree_generator(&model, 1).unwrap();
        assert!(g1.hopping.coeffs().is_empty());
        assert!(g1.leakage < 1e-12);
    }

    #[test]
    fn qubit_span_residual_vanishes() {
        let model = majorana_model(6, 0.25);
        let f = OneParticleVector::from_entries(2, 6, [(2, 0, c(1.0, 0.0)), (3, 1, c(0.0, 0.5))]).unwrap();
        let r = span_residual(&model, &f).unwrap();
        assert!(r.residual < 1e-10);
        let zero = build_hamiltonian(&Hopping::new([]).unwrap(), model.params(), model.chain()).unwrap();
        assert_eq!(span_residual(&zero, &f).unwrap().residual, 0.0);
    }

    #[test]
    fn spin_reconstruction_phase() {
        let chain = ChainSpec::new(3, 4).unwrap();
        let p = GradingParams::new(3, 1, 1).unwrap();
        let m = build_hamiltonian(&Hopping::cosine(1.0), &p, &chain).unwrap();
        for t in [0.0, 1.0] {
            let r = reconstruct_spin_evolution(&m, 1, t).unwrap();
            assert!(r.deviation < 1e-10);
            assert!(r.swapped_deviation < 1e-10);
            assert!(r.relabelled_deviation > 0.1);
        }
    }

    #[test]
    fn disjoint_invariant_pair_starts_commuting() {
        let chain = ChainSpec::new(2, 6).unwrap();
        let p = GradingParams::new(2, 1, 0).unwrap();
        let m = build_hamiltonian(&Hopping::sine(0.25), &p, &chain).unwrap();
        let a = AlgebraElement::from_monomial(&WeylMonomial::single(2, 1, 1, 0).unwrap());
        let b = AlgebraElement::from_monomial(&WeylMonomial::single(2, 4, 1, 0).unwrap());
        let s = commutator_decay(&a, &b, &m, &[0.0, 0.5, 1.0]).unwrap();
        assert!(s.series[0].1 < 1e-14);
        assert!(s.a_gauge_invariant && s.b_gauge_invariant);
        assert_eq!(s, commutator_decay(&a, &b, &m, &[0.0, 0.5, 1.0]).unwrap());
    }

    #[test]
    fn equal_exponents_freeze_dressed_generators() {
        // With j₊ = j₋ the dressed raising operators commute with each other and so with H.
        let chain = ChainSpec::new(3, 5).unwrap();
        let p = GradingParams::new(3, 1, 1).unwrap();
        let m = build_hamiltonian(&Hopping::cosine(1.0), &p, &chain).unwrap();
        let rows = printed_commutator_oracle(&m, 2, 2, 1).unwrap();
        assert_eq!(rows.len(), 5);
        let gen = rows.iter().find(|r| r.label == "generator_integer_turn").unwrap();
        assert!(gen.oracle.is_zero());
        assert_eq!(gen.status, RowStatus::Mismatch);

        let p = GradingParams::new(3, 1, 0).unwrap();
        let m = build_hamiltonian(&Hopping::cosine(1.0), &p, &chain).unwrap();
        let rows = printed_commutator_oracle(&m, 2, 2, 1).unwrap();
        assert!(!rows[3].oracle.is_zero());
    }
}
