//! Brute-force dense realization on a finite chain.
//!
//! Basis convention: site 0 is the slowest-varying tensor index, so the basis
//! index of `|t_0, …, t_{L-1}>` is `Σ_x t_x d^{L-1-x}`. Basis labels run over
//! `0..d` (the all-zero vector plays the role of the reference state).

use faer::Mat;

use crate::error::{LabError, Result};
use crate::weyl::{check_dim, unit_root, AlgebraElement, Label, WeylMonomial, C64};

pub const DEFAULT_CAP: usize = 4096;

/// Exact SVD is used up to this dimension; power iteration above it.
const EXACT_NORM_LIMIT: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainSpec {
    d: u32,
    len: usize,
    cap: usize,
}

impl ChainSpec {
    pub fn new(d: u32, len: usize) -> Result<Self> {
        Self::with_cap(d, len, DEFAULT_CAP)
    }

    pub fn with_cap(d: u32, len: usize, cap: usize) -> Result<Self> {
        check_dim(d)?;
        if len == 0 {
            return Err(LabError::InvalidArgument("chain needs at least one site".into()));
        }
        let dim = (d as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        if dim > cap as u128 {
            return Err(LabError::CapExceeded { dim, cap });
        }
        Ok(Self { d, len, cap })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        (self.d as usize).pow(self.len as u32)
    }

    pub fn contains(&self, site: i64) -> bool {
        site >= 0 && (site as usize) < self.len
    }

    fn stride(&self, site: usize) -> usize {
        (self.d as usize).pow((self.len - 1 - site) as u32)
    }

    /// Basis label at `site` of basis index `index`.
    pub fn digit(&self, index: usize, site: usize) -> u32 {
        ((index / self.stride(site)) % self.d as usize) as u32
    }

    /// Total shift charge `Σ t_x mod d` of a basis state.
    pub fn basis_charge(&self, index: usize) -> u32 {
        let d = self.d as usize;
        let mut i = index;
        let mut s = 0usize;
        for _ in 0..self.len {
            s += i % d;
            i /= d;
        }
        (s % d) as u32
    }
}

/// Complex matrix of size `d^L` tied to its chain.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    chain: ChainSpec,
    mat: Mat<C64>,
}

impl DenseOperator {
    pub fn from_mat(chain: ChainSpec, mat: Mat<C64>) -> Result<Self> {
        let n = chain.dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(LabError::InvalidArgument(format!(
                "matrix is {}x{}, chain needs {n}x{n}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { chain, mat })
    }

    pub fn identity(chain: ChainSpec) -> Self {
        let n = chain.dim();
        Self {
            chain,
            mat: Mat::identity(n, n),
        }
    }

    pub fn zeros(chain: ChainSpec) -> Self {
        let n = chain.dim();
        Self {
            chain,
            mat: Mat::zeros(n, n),
        }
    }

    pub fn chain(&self) -> ChainSpec {
        self.chain
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    fn same_chain(&self, other: &DenseOperator) -> Result<()> {
        if self.chain.d != other.chain.d || self.chain.len != other.chain.len {
            return Err(LabError::InvalidArgument("operators live on different chains".into()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_chain(other)?;
        Ok(Self {
            chain: self.chain,
            mat: &self.mat * &other.mat,
        })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_chain(other)?;
        Ok(Self {
            chain: self.chain,
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_chain(other)?;
        Ok(Self {
            chain: self.chain,
            mat: &self.mat - &other.mat,
        })
    }

    pub fn scale(&self, c: C64) -> DenseOperator {
        let n = self.dim();
        Self {
            chain: self.chain,
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] * c),
        }
    }

    pub fn adjoint(&self) -> DenseOperator {
        Self {
            chain: self.chain,
            mat: self.mat.adjoint().to_owned(),
        }
    }

    pub fn commutator(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_chain(other)?;
        Ok(Self {
            chain: self.chain,
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// `tr(M)/d^L`.
    pub fn normalized_trace(&self) -> C64 {
        self.trace() / self.dim() as f64
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm_l2()
    }
}

/// Single-site generators `(W(1,0), W(0,1)) = (D, S)`: `D` is the diagonal
/// clock `diag(ω^t)`, `S` the cyclic shift `|t> → |t+1>`; `D·S = ω S·D`.
pub fn clock_shift(d: u32) -> Result<(DenseOperator, DenseOperator)> {
    let chain = ChainSpec::new(d, 1)?;
    let n = d as usize;
    let clock = Mat::from_fn(n, n, |i, j| {
        if i == j {
            unit_root(i as i64, d)
        } else {
            C64::default()
        }
    });
    let shift = Mat::from_fn(n, n, |i, j| {
        if i == (j + 1) % n {
            C64::new(1.0, 0.0)
        } else {
            C64::default()
        }
    });
    Ok((
        DenseOperator { chain, mat: clock },
        DenseOperator { chain, mat: shift },
    ))
}

fn check_support(m: &WeylMonomial, chain: &ChainSpec) -> Result<()> {
    if m.d() != chain.d {
        return Err(LabError::DimensionMismatch {
            left: m.d(),
            right: chain.d,
        });
    }
    for &(x, _) in m.sites() {
        if !chain.contains(x) {
            return Err(LabError::SiteOutsideChain {
                site: x,
                len: chain.len,
            });
        }
    }
    Ok(())
}

/// Column action of a monomial: basis state `t` goes to `target[t]` with
/// phase exponent `exps[t]` (units of `π/d`).
fn monomial_action(m: &WeylMonomial, chain: &ChainSpec) -> (Vec<usize>, Vec<i64>) {
    let d = chain.d as usize;
    let di = chain.d as i64;
    let n = chain.dim();
    let mut target = Vec::with_capacity(n);
    let mut exps = Vec::with_capacity(n);
    let base = m.phase().q() as i64;
    for t in 0..n {
        let mut row = t;
        let mut e = base;
        for &(x, Label { k, l }) in m.sites() {
            let stride = chain.stride(x as usize);
            let digit = (t / stride) % d;
            let nd = (digit + l as usize) % d;
            row = row - digit * stride + nd * stride;
            e += -(k as i64) * l as i64 + 2 * k as i64 * nd as i64;
        }
        target.push(row);
        exps.push(e.rem_euclid(2 * di));
    }
    (target, exps)
}

pub fn realize_monomial(m: &WeylMonomial, chain: &ChainSpec) -> Result<DenseOperator> {
    realize(&AlgebraElement::from_monomial(m), chain)
}

/// Tensor-product embedding of an algebra element on the chain.
pub fn realize(a: &AlgebraElement, chain: &ChainSpec) -> Result<DenseOperator> {
    if a.d() != chain.d {
        return Err(LabError::DimensionMismatch {
            left: a.d(),
            right: chain.d,
        });
    }
    let n = chain.dim();
    let mut mat = Mat::<C64>::zeros(n, n);
    let two_d = 2 * chain.d;
    for (m, c) in a.terms() {
        check_support(&m, chain)?;
        let (target, exps) = monomial_action(&m, chain);
        for t in 0..n {
            mat[(target[t], t)] += c * unit_root(exps[t], two_d);
        }
    }
    Ok(DenseOperator { chain: *chain, mat })
}

/// Largest singular value.
pub fn op_norm(m: &DenseOperator) -> Result<f64> {
    if m.dim() <= EXACT_NORM_LIMIT {
        let sv = m
            .mat
            .singular_values()
            .map_err(|e| LabError::Numerical(format!("{e:?}")))?;
        return Ok(sv.first().copied().unwrap_or(0.0));
    }
    Ok(power_norm(&m.mat))
}

/// Power iteration on `M†M` from a fixed start vector.
fn power_norm(m: &Mat<C64>) -> f64 {
    let n = m.ncols();
    let mut v = Mat::<C64>::from_fn(n, 1, |i, _| C64::new(1.0 + (i % 7) as f64 * 1e-3, 0.0));
    let mut prev = 0.0;
    let mut est = 0.0;
    for _ in 0..5000 {
        let nv = v.norm_l2();
        if nv == 0.0 {
            return 0.0;
        }
        v = Mat::from_fn(n, 1, |i, _| v[(i, 0)] / nv);
        let w = m * &v;
        est = w.norm_l2();
        v = m.adjoint() * &w;
        if (est - prev).abs() <= 1e-12 * est.max(1e-300) {
            break;
        }
        prev = est;
    }
    est
}

/// Global gauge unitary `G = Π_x W_x(1,0)`, diagonal with entries `ω^{Σ t_x}`.
pub fn gauge_unitary(chain: &ChainSpec) -> DenseOperator {
    let n = chain.dim();
    let mat = Mat::from_fn(n, n, |i, j| {
        if i == j {
            unit_root(chain.basis_charge(i) as i64, chain.d)
        } else {
            C64::default()
        }
    });
    DenseOperator { chain: *chain, mat }
}

/// Averaging over the global gauge action, for symbolic and dense operators.
pub trait GaugeProject {
    fn gauge_project(&self) -> Self;
}

impl GaugeProject for AlgebraElement {
    /// Keeps the monomials of total shift charge 0.
    fn gauge_project(&self) -> Self {
        let mut out = AlgebraElement::zero(self.d());
        for (m, c) in self.terms() {
            if m.total_charge() == 0 {
                out = out
                    .add(&AlgebraElement::from_scaled(&m, c))
                    .expect("same dimension");
            }
        }
        out
    }
}

impl GaugeProject for DenseOperator {
    /// `(1/d) Σ_j G^j M G^{-j}`; `G` is diagonal so this is an entrywise average.
    fn gauge_project(&self) -> Self {
        let chain = self.chain;
        let d = chain.d;
        let n = self.dim();
        let charges: Vec<i64> = (0..n).map(|i| chain.basis_charge(i) as i64).collect();
        let mat = Mat::from_fn(n, n, |a, b| {
            let avg: C64 = (0..d as i64)
                .map(|j| unit_root(j * (charges[a] - charges[b]), d))
                .sum::<C64>()
                / d as f64;
            self.mat[(a, b)] * avg
        });
        DenseOperator { chain, mat }
    }
}

/// Spectral projectors of `G`: `H_c = (1/d) Σ_m ω^{-mc} G^m`, `c = 0..d`.
pub fn sector_decompose(chain: &ChainSpec) -> Vec<DenseOperator> {
    let d = chain.d;
    let n = chain.dim();
    (0..d as i64)
        .map(|c| {
            let mat = Mat::from_fn(n, n, |i, j| {
                if i != j {
                    return C64::default();
                }
                let g = chain.basis_charge(i) as i64;
                (0..d as i64).map(|m| unit_root(m * (g - c), d)).sum::<C64>() / d as f64
            });
            DenseOperator { chain: *chain, mat }
        })
        .collect()
}

/// Rank of an orthogonal projector, read off its trace.
pub fn projector_rank(p: &DenseOperator) -> usize {
    p.trace().re.round() as usize
}

/// Full expansion of a dense operator in the Weyl basis: the coefficient of the
/// zero-phase monomial `W` is `tr(W† M)/d^L`. Coefficients with modulus at most
/// `tol` are dropped.
pub fn weyl_decompose(m: &DenseOperator, tol: f64) -> Result<AlgebraElement> {
    let chain = m.chain;
    let d = chain.d as usize;
    let di = chain.d as i64;
    let len = chain.len;
    let n = chain.dim();
    let mut out = AlgebraElement::zero(chain.d);
    let digits = |idx: usize| -> Vec<usize> { (0..len).map(|x| chain.digit(idx, x) as usize).collect() };
    let compose = |ds: &[usize]| -> usize { ds.iter().fold(0, |acc, &v| acc * d + v) };
    let mut u = vec![C64::default(); n];
    for shift_idx in 0..n {
        let ls = digits(shift_idx);
        for s in 0..n {
            let sd = digits(s);
            let src: Vec<usize> = sd.iter().zip(&ls).map(|(&a, &b)| (a + d - b) % d).collect();
            u[s] = m.mat[(s, compose(&src))];
        }
        // Σ_s ω^{-k·s} u(s), one digit at a time.
        for x in 0..len {
            let stride = chain.stride(x);
            let mut next = vec![C64::default(); n];
            for (idx, slot) in next.iter_mut().enumerate() {
                let kx = (idx / stride) % d;
                let base = idx - kx * stride;
                let mut acc = C64::default();
                for sx in 0..d {
                    acc += u[base + sx * stride] * unit_root(-((kx * sx) as i64), chain.d);
                }
                *slot = acc;
            }
            u = next;
        }
        for (k_idx, val) in u.iter().enumerate() {
            let ks = digits(k_idx);
            let kl: i64 = ks.iter().zip(&ls).map(|(&a, &b)| (a * b) as i64).sum();
            let coeff = *val * unit_root(kl, 2 * chain.d) / n as f64;
            if coeff.norm() > tol {
                let sites = (0..len)
                    .filter(|&x| ks[x] != 0 || ls[x] != 0)
                    .map(|x| (x as i64, ks[x] as i64, ls[x] as i64));
                let mono = WeylMonomial::from_labels(chain.d, sites, 0)?;
                debug_assert_eq!(mono.phase().q() as i64 % (2 * di), 0);
                out = out.add(&AlgebraElement::from_scaled(&mono, coeff))?;
            }
        }
    }
    Ok(out)
}

/// Outcome of regrouping `k` adjacent sites into block sites of dimension `d^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockReport {
    pub k: usize,
    pub local_dim: usize,
    pub blocks: usize,
    /// Order of the blocked clock group (`d^k`).
    pub blocked_gauge_order: usize,
    /// Max entry deviation between the blocked and unblocked realizations.
    pub realization_deviation: f64,
    /// Monomials supported in a single block that were tested.
    pub spanning_set_size: usize,
    /// Max deviation of `P_A P_{A(k)} M − P_{A(k)} M` over that set.
    pub containment_deviation: f64,
    /// Same quantity over monomials straddling two neighbouring blocks.
    pub cross_block_deviation: Option<f64>,
}

/// Blocked form of an element: the same matrix assembled block by block.
#[derive(Clone, Debug)]
pub struct BlockedOperator {
    pub k: usize,
    pub local_dim: usize,
    pub blocks: usize,
    pub mat: Mat<C64>,
}

fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

fn single_site_matrix(d: u32, lab: Label) -> Mat<C64> {
    let n = d as usize;
    let (k, l) = (lab.k as i64, lab.l as i64);
    let mut m = Mat::<C64>::zeros(n, n);
    for t in 0..n {
        let nd = (t + lab.l as usize) % n;
        m[(nd, t)] = unit_root(-k * l + 2 * k * nd as i64, 2 * d);
    }
    m
}

/// Regroups the chain into blocks of `k` sites and assembles `a` as a sum of
/// Kronecker products of block-local matrices.
pub fn block_element(a: &AlgebraElement, k: usize, chain: &ChainSpec) -> Result<BlockedOperator> {
    if k == 0 || !chain.len.is_multiple_of(k) {
        return Err(LabError::BlockMismatch { len: chain.len, k });
    }
    let d = chain.d;
    let blocks = chain.len / k;
    let local_dim = (d as usize).pow(k as u32);
    let n = chain.dim();
    let mut mat = Mat::<C64>::zeros(n, n);
    for (m, c) in a.terms() {
        check_support(&m, chain)?;
        let mut full = Mat::<C64>::identity(1, 1);
        for b in 0..blocks {
            let mut local = Mat::<C64>::identity(1, 1);
            for x in b * k..(b + 1) * k {
                local = kron(&local, &single_site_matrix(d, m.label_at(x as i64)));
            }
            full = kron(&full, &local);
        }
        mat += Mat::from_fn(n, n, |i, j| full[(i, j)] * c);
    }
    Ok(BlockedOperator {
        k,
        local_dim,
        blocks,
        mat,
    })
}

/// `(1/d^k) Σ_m Gb^m M Gb^{-m}` with `Gb` the product of block clocks.
fn blocked_gauge_project(m: &DenseOperator, k: usize) -> DenseOperator {
    let chain = m.chain;
    let d = chain.d as usize;
    let order = d.pow(k as u32);
    let blocks = chain.len / k;
    let n = chain.dim();
    let charge = |idx: usize| -> i64 {
        let mut s = 0usize;
        let mut i = idx;
        for _ in 0..blocks {
            s += i % order;
            i /= order;
        }
        (s % order) as i64
    };
    let charges: Vec<i64> = (0..n).map(charge).collect();
    let mat = Mat::from_fn(n, n, |a, b| {
        let avg: C64 = (0..order as i64)
            .map(|j| unit_root(j * (charges[a] - charges[b]), order as u32))
            .sum::<C64>()
            / order as f64;
        m.mat[(a, b)] * avg
    });
    DenseOperator { chain, mat }
}

fn containment_defect(m: &DenseOperator, k: usize) -> f64 {
    let fine = blocked_gauge_project(m, k);
    fine.gauge_project().max_abs_diff(&fine)
}

fn monomials_on(d: u32, sites: &[i64]) -> Result<Vec<WeylMonomial>> {
    let per = (d as usize) * (d as usize);
    let total = per.pow(sites.len() as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let mut labels = Vec::with_capacity(sites.len());
        for &x in sites {
            let v = c % per;
            c /= per;
            labels.push((x, (v / d as usize) as i64, (v % d as usize) as i64));
        }
        out.push(WeylMonomial::from_labels(d, labels, 0)?);
    }
    Ok(out)
}

/// Regroups `k` adjacent sites, checks that the blocked realization of `a` is the
/// same matrix, and verifies `P_{A(k)} ≤ P_A` on the single-block Weyl monomials.
pub fn block_sites(a: &AlgebraElement, k: usize, chain: &ChainSpec) -> Result<(BlockedOperator, BlockReport)> {
    let blocked = block_element(a, k, chain)?;
    let direct = realize(a, chain)?;
    let n = chain.dim();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            dev = dev.max((blocked.mat[(i, j)] - direct.mat[(i, j)]).norm());
        }
    }
    let d = chain.d;
    let mut spanning = 0usize;
    let mut containment: f64 = 0.0;
    for b in 0..blocked.blocks {
        let sites: Vec<i64> = ((b * k) as i64..((b + 1) * k) as i64).collect();
        for m in monomials_on(d, &sites)? {
            let dm = realize_monomial(&m, chain)?;
            containment = containment.max(containment_defect(&dm, k));
            spanning += 1;
        }
    }
    let cross = if blocked.blocks >= 2 && 2 * k <= 4 {
        let sites: Vec<i64> = (0..(2 * k) as i64).collect();
        let mut worst: f64 = 0.0;
        for m in monomials_on(d, &sites)? {
            let dm = realize_monomial(&m, chain)?;
            worst = worst.max(containment_defect(&dm, k));
        }
        Some(worst)
    } else {
        None
    };
    let report = BlockReport {
        k,
        local_dim: blocked.local_dim,
        blocks: blocked.blocks,
        blocked_gauge_order: blocked.local_dim,
        realization_deviation: dev,
        spanning_set_size: spanning,
        containment_deviation: containment,
        cross_block_deviation: cross,
    };
    Ok((blocked, report))
}
