//! Experiment configs and the deterministic commands behind the CLI.
//!
//! Config format: UTF-8, one `key = value` per line, `#` starts a comment. Lists are
//! comma separated; hopping entries are `offset=complex` with complex numbers written
//! as `0.5`, `2i`, `0.1-0.2i`. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{
    block_sites, op_norm, realize, realize_monomial, sector_decompose, ChainSpec, DenseOperator, DEFAULT_CAP,
};
use crate::dressing::{
    dressed_commutation_report, dressed_label, dressed_matrix_unit, dressed_weyl, exchange_exponent,
    printed_pair_product, shift_covariance_defect,
};
use crate::dynamics::{
    build_hamiltonian, commutator_decay, printed_commutator_oracle, quasifree_generator, reconstruct_spin_evolution,
    span_residual, CommutatorSeries, QuadraticModel, RowStatus,
};
use crate::error::{LabError, Result};
use crate::one_particle::{evolve_charged, Hopping, OneParticleVector};
use crate::weyl::{matrix_unit, unit_root, AlgebraElement, GradingParams, WeylMonomial, C64};

/// A config that could not be parsed or validated.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn cfg_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub d: u32,
    pub len: usize,
    pub j_plus: i64,
    pub j_minus: i64,
    pub hopping: Vec<(i64, C64)>,
    /// Momentum grid size.
    pub grid: usize,
    pub t_start: f64,
    pub t_stop: f64,
    pub t_count: usize,
    /// Block size for `block`.
    pub block_k: usize,
    /// Distance between the left anchors of the observable pair in `decay`.
    pub separation: usize,
    pub output: Option<String>,
    /// CSV files aggregated by `report`.
    pub inputs: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            d: 3,
            len: 5,
            j_plus: 1,
            j_minus: 0,
            hopping: vec![(-1, C64::new(0.5, 0.0)), (1, C64::new(0.5, 0.0))],
            grid: 1024,
            t_start: 0.0,
            t_stop: 2.0,
            t_count: 11,
            block_k: 1,
            separation: 2,
            output: None,
            inputs: Vec::new(),
        }
    }
}

const KEYS: [&str; 14] = [
    "name",
    "d",
    "L",
    "j_plus",
    "j_minus",
    "hopping",
    "N",
    "t_start",
    "t_stop",
    "t_count",
    "block_k",
    "separation",
    "output",
    "inputs",
];

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // Split at the last sign that is not the leading one or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => t.parse::<f64>().ok(),
    };
    match split {
        Some(i) => Some(C64::new(body[..i].parse().ok()?, imag(&body[i..])?)),
        None => Some(C64::new(0.0, imag(body)?)),
    }
}

pub fn format_complex(c: C64) -> String {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => format!("{}", c.re),
        (true, false) => format!("{}i", c.im),
        _ => {
            let sign = if c.im.is_sign_negative() { '-' } else { '+' };
            format!("{}{}{}i", c.re, sign, c.im.abs())
        }
    }
}

fn parse_num<T: std::str::FromStr>(v: &str, line: usize, key: &str) -> std::result::Result<T, ConfigError> {
    v.parse().map_err(|_| cfg_err(line, format!("cannot parse {key} = {v:?}")))
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected key = value, got {body:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(cfg_err(line, format!("unknown key {key:?}")));
            }
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(cfg_err(line, format!("key {key:?} already set on line {prev}")));
            }
            match key {
                "name" => cfg.name = value.to_string(),
                "d" => cfg.d = parse_num(value, line, key)?,
                "L" => cfg.len = parse_num(value, line, key)?,
                "j_plus" => cfg.j_plus = parse_num(value, line, key)?,
                "j_minus" => cfg.j_minus = parse_num(value, line, key)?,
                "N" => cfg.grid = parse_num(value, line, key)?,
                "t_start" => cfg.t_start = parse_num(value, line, key)?,
                "t_stop" => cfg.t_stop = parse_num(value, line, key)?,
                "t_count" => cfg.t_count = parse_num(value, line, key)?,
                "block_k" => cfg.block_k = parse_num(value, line, key)?,
                "separation" => cfg.separation = parse_num(value, line, key)?,
                "output" => cfg.output = (!value.is_empty()).then(|| value.to_string()),
                "inputs" => cfg.inputs = split_list(value).map(String::from).collect(),
                "hopping" => {
                    let mut entries = Vec::new();
                    for item in split_list(value) {
                        let (x, c) = item
                            .split_once('=')
                            .ok_or_else(|| cfg_err(line, format!("hopping entry {item:?} needs offset=amplitude")))?;
                        let x: i64 = parse_num(x.trim(), line, "hopping offset")?;
                        let c = parse_complex(c).ok_or_else(|| cfg_err(line, format!("bad amplitude {c:?}")))?;
                        entries.push((x, c));
                    }
                    entries.sort_by_key(|e| e.0);
                    if entries.windows(2).any(|w| w[0].0 == w[1].0) {
                        return Err(cfg_err(line, "repeated hopping offset"));
                    }
                    cfg.hopping = entries;
                }
                _ => unreachable!(),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> std::result::Result<(), ConfigError> {
        if self.d < 2 {
            return Err(cfg_err(0, "d must be at least 2"));
        }
        if self.len == 0 {
            return Err(cfg_err(0, "L must be positive"));
        }
        if self.t_count == 0 || self.t_stop < self.t_start || (self.t_count > 1 && self.t_stop == self.t_start) {
            return Err(cfg_err(0, "time grid needs t_count ≥ 1 and t_stop > t_start"));
        }
        if self.grid == 0 || self.block_k == 0 {
            return Err(cfg_err(0, "N and block_k must be positive"));
        }
        Hopping::new(self.hopping.iter().copied()).map_err(|e| cfg_err(0, e.to_string()))?;
        Ok(())
    }

    /// Canonical text form; parsing it returns an equal config.
    pub fn to_canonical(&self) -> String {
        let hop: Vec<String> = self
            .hopping
            .iter()
            .map(|(x, c)| format!("{x}={}", format_complex(*c)))
            .collect();
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "d = {}", self.d);
        let _ = writeln!(s, "L = {}", self.len);
        let _ = writeln!(s, "j_plus = {}", self.j_plus);
        let _ = writeln!(s, "j_minus = {}", self.j_minus);
        let _ = writeln!(s, "hopping = {}", hop.join(", "));
        let _ = writeln!(s, "N = {}", self.grid);
        let _ = writeln!(s, "t_start = {}", self.t_start);
        let _ = writeln!(s, "t_stop = {}", self.t_stop);
        let _ = writeln!(s, "t_count = {}", self.t_count);
        let _ = writeln!(s, "block_k = {}", self.block_k);
        let _ = writeln!(s, "separation = {}", self.separation);
        let _ = writeln!(s, "output = {}", self.output.as_deref().unwrap_or(""));
        let _ = writeln!(s, "inputs = {}", self.inputs.join(", "));
        s
    }

    pub fn params(&self) -> Result<GradingParams> {
        GradingParams::new(self.d, self.j_plus, self.j_minus)
    }

    pub fn hopping(&self) -> Result<Hopping> {
        Hopping::new(self.hopping.iter().copied())
    }

    pub fn chain(&self, cap: usize) -> Result<ChainSpec> {
        ChainSpec::with_cap(self.d, self.len, cap)
    }

    pub fn times(&self) -> Vec<f64> {
        if self.t_count == 1 {
            return vec![self.t_start];
        }
        let step = (self.t_stop - self.t_start) / (self.t_count - 1) as f64;
        (0..self.t_count).map(|i| self.t_start + step * i as f64).collect()
    }

    pub fn model(&self, cap: usize) -> Result<QuadraticModel> {
        build_hamiltonian(&self.hopping()?, &self.params()?, &self.chain(cap)?)
    }
}

/// Runtime knobs that are not part of the physics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub cap: usize,
    /// Seeds only the random sampling in `verify`.
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CAP,
            seed: 0,
        }
    }
}

/// A finished command: CSV bytes plus the number of assertion-tier failures.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub csv: Vec<u8>,
    pub failures: usize,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn payload(a: &AlgebraElement) -> String {
    let parts: Vec<String> = a
        .terms()
        .map(|(m, c)| format!("({})*{}", format_complex(c), m))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn write_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| LabError::InvalidArgument(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| LabError::InvalidArgument(format!("csv: {e}")))
}

/// Status of one verify row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum VerifyStatus {
    /// Exact integer or exact-tolerance agreement.
    Exact,
    Match,
    Mismatch,
    /// An internal consistency check failed.
    Fail,
}

impl VerifyStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyStatus::Exact => "EXACT",
            VerifyStatus::Match => "MATCH",
            VerifyStatus::Mismatch => "MISMATCH",
            VerifyStatus::Fail => "FAIL",
        }
    }
}

impl From<RowStatus> for VerifyStatus {
    fn from(s: RowStatus) -> Self {
        match s {
            RowStatus::Match => VerifyStatus::Match,
            RowStatus::Mismatch => VerifyStatus::Mismatch,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub relation: String,
    pub params: String,
    pub status: VerifyStatus,
    pub deviation: f64,
    pub payload: String,
}

fn row(relation: &str, params: String, status: VerifyStatus, deviation: f64, payload: String) -> VerifyRow {
    VerifyRow {
        relation: relation.into(),
        params,
        status,
        deviation,
        payload,
    }
}

fn exact_or_fail(ok: bool) -> VerifyStatus {
    if ok {
        VerifyStatus::Exact
    } else {
        VerifyStatus::Fail
    }
}

fn match_or_not(ok: bool) -> VerifyStatus {
    if ok {
        VerifyStatus::Match
    } else {
        VerifyStatus::Mismatch
    }
}

fn random_monomial(rng: &mut ChaCha8Rng, chain: &ChainSpec) -> Result<WeylMonomial> {
    let d = chain.d() as i64;
    let mut labels = Vec::new();
    for x in 0..chain.len() as i64 {
        if rng.gen_bool(0.6) {
            labels.push((x, rng.gen_range(0..d), rng.gen_range(0..d)));
        }
    }
    WeylMonomial::from_labels(chain.d(), labels, rng.gen_range(0..2 * d))
}

/// The relation suite. Rows are returned in a fixed order.
pub fn verify_rows(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<VerifyRow>> {
    let p = cfg.params()?;
    let d = p.d();
    let di = d as i64;
    let chain = cfg.chain(opts.cap)?;
    let symbolic_chain = ChainSpec::with_cap(d, cfg.len, usize::MAX)?;
    let len = cfg.len as i64;
    let base = format!("d={d};L={};j+={};j-={}", cfg.len, p.j_plus(), p.j_minus());
    let mut rows = Vec::new();

    // Weyl product law: symbolic product against dense multiplication.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for s in 0..20 {
        let a = random_monomial(&mut rng, &chain)?;
        let b = random_monomial(&mut rng, &chain)?;
        let sym = realize_monomial(&a.mul(&b)?, &chain)?;
        let dense = realize_monomial(&a, &chain)?.mul(&realize_monomial(&b, &chain)?)?;
        let dev = sym.max_abs_diff(&dense);
        rows.push(row(
            "weyl_product",
            format!("{base};sample={s}"),
            exact_or_fail(dev < 1e-12),
            dev,
            format!("{a} * {b} = {}", a.mul(&b)?),
        ));
    }
    let clock_d = WeylMonomial::single(d, 0, di, 0)?;
    rows.push(row(
        "weyl_clock_order",
        base.clone(),
        exact_or_fail(clock_d.is_scalar() && clock_d.phase().q() == 0),
        0.0,
        clock_d.to_string(),
    ));
    let lhs = WeylMonomial::from_labels(d, [(0, 1, 0), (0, 0, 1), (0, 0, -1)], 0)?;
    let printed = WeylMonomial::single(d, 0, 0, 1)?.with_phase(2);
    let dev = realize_monomial(&lhs, &chain)?.max_abs_diff(&realize_monomial(&printed, &chain)?);
    rows.push(row(
        "weyl_printed_identity",
        base.clone(),
        match_or_not(dev < 1e-12),
        dev,
        lhs.to_string(),
    ));

    // Shift-covariance defect.
    if cfg.len >= 3 {
        let x = (len - 2).min(3);
        let rep = shift_covariance_defect(1, x, &p, &chain)?;
        let params = format!("{base};origin=1;x={x}");
        rows.push(row(
            "shift_defect_dense",
            params.clone(),
            exact_or_fail(rep.dense_deviation < 1e-12),
            rep.dense_deviation,
            rep.defect.to_string(),
        ));
        let dev = realize_monomial(&rep.defect, &chain)?.max_abs_diff(&realize_monomial(&rep.printed, &chain)?);
        rows.push(row(
            "shift_defect_printed",
            params,
            match_or_not(rep.printed_matches),
            dev,
            format!("oracle {} ; printed {} ; boundary {}", rep.defect, rep.printed, rep.boundary),
        ));
    }

    // Dressed pair product against its printed expansion.
    if cfg.len >= 3 {
        let (x, y) = (1, 2);
        let prod = dressed_weyl(x, 1, &p, &chain)?.mul(&dressed_weyl(y, 1, &p, &chain)?)?;
        let printed = printed_pair_product(x, y, &p, &chain)?;
        let dev = realize_monomial(&prod, &chain)?.max_abs_diff(&realize_monomial(&printed, &chain)?);
        rows.push(row(
            "pair_product_printed",
            format!("{base};x={x};y={y}"),
            match_or_not(dev < 1e-12),
            dev,
            format!(
                "oracle {} ; printed {} ; correction {}",
                prod,
                printed,
                prod.mul(&printed.adjoint())?
            ),
        ));
    }

    // Exchange phase of dressed generators: integer arithmetic over all pairs.
    for x in 0..len {
        for y in x + 1..len {
            let e = exchange_exponent(x, y, &p, &symbolic_chain)?;
            let status = if e == 1 {
                VerifyStatus::Exact
            } else {
                VerifyStatus::Mismatch
            };
            rows.push(row(
                "dressed_exchange",
                format!("{base};x={x};y={y}"),
                status,
                (unit_root(e as i64, d) - unit_root(1, d)).norm(),
                format!("exponent={e}"),
            ));
        }
    }
    // Dense confirmation of the symbolic exponent.
    if cfg.len >= 2 {
        let (x, y) = (0, len - 1);
        let a = realize_monomial(&dressed_weyl(x, 1, &p, &chain)?, &chain)?;
        let b = realize_monomial(&dressed_weyl(y, 1, &p, &chain)?, &chain)?;
        let e = exchange_exponent(x, y, &p, &chain)? as i64;
        let dev = a.mul(&b)?.max_abs_diff(&b.mul(&a)?.scale(unit_root(e, d)));
        rows.push(row(
            "dressed_exchange_dense",
            format!("{base};x={x};y={y}"),
            exact_or_fail(dev < 1e-12),
            dev,
            format!("exponent={e}"),
        ));
    }

    // Dressed matrix-unit exchange rule.
    if cfg.len >= 3 {
        for (x, y) in [(0i64, 2i64), (2, 0)] {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        for n in 0..d {
                            let rep = dressed_commutation_report(x, y, j, k, l, n, &p, &chain)?;
                            let params = format!("{base};x={x};y={y};j={j};k={k};l={l};n={n}");
                            let Some(phase) = rep.oracle_phase else {
                                rows.push(row("unit_exchange_dense", params, VerifyStatus::Fail, rep.residual, "no single phase".into()));
                                continue;
                            };
                            let consistent = (phase - rep.symbolic_phase).norm() < 1e-10;
                            rows.push(row(
                                "unit_exchange_printed",
                                params,
                                if consistent {
                                    match_or_not(rep.printed_matches)
                                } else {
                                    VerifyStatus::Fail
                                },
                                (phase - rep.printed_phase).norm(),
                                format!("oracle_phase={} printed_phase={}", format_complex(phase), format_complex(rep.printed_phase)),
                            ));
                        }
                    }
                }
            }
        }
    }

    // Norms.
    for x in 0..len {
        let mut worst = 0.0f64;
        for r in 0..d {
            for s in 0..d {
                let u = realize(&dressed_matrix_unit(x, r, s, &p, &chain)?, &chain)?;
                worst = worst.max((op_norm(&u)? - 1.0).abs());
            }
        }
        for (k, l) in [(1, 0), (0, 1)] {
            let w = realize_monomial(&dressed_label(x, k, l, &p, &chain)?, &chain)?;
            worst = worst.max((op_norm(&w)? - 1.0).abs());
        }
        rows.push(row(
            "dressed_norms",
            format!("{base};x={x}"),
            match_or_not(worst < 1e-10),
            worst,
            "max |norm-1| over dressed units and generators".into(),
        ));
    }

    // Sector structure of matrix units at site 0.
    let sectors = sector_decompose(&chain);
    for j in 0..d {
        for k in 0..d {
            let m = realize(&matrix_unit(d, j, k, 0)?, &chain)?;
            let mut true_dev = 0.0f64;
            let mut printed_dev = 0.0f64;
            for (l, pl) in sectors.iter().enumerate() {
                let mp = m.mul(pl)?;
                let target = (l as i64 + j as i64 - k as i64).rem_euclid(di) as usize;
                true_dev = true_dev.max(sectors[target].mul(&mp)?.max_abs_diff(&mp));
                let printed = if k as usize == l {
                    sectors[j as usize].mul(&mp)?
                } else {
                    DenseOperator::zeros(chain)
                };
                printed_dev = printed_dev.max(printed.max_abs_diff(&mp));
            }
            let params = format!("{base};j={j};k={k}");
            rows.push(row(
                "sector_shift",
                params.clone(),
                exact_or_fail(true_dev < 1e-12),
                true_dev,
                format!("H_l -> H_(l+{j}-{k})"),
            ));
            rows.push(row(
                "sector_shift_printed",
                params,
                match_or_not(printed_dev < 1e-12),
                printed_dev,
                format!("H_l -> delta_({k},l) H_{j}"),
            ));
        }
    }

    // Bilinear commutators and the generator against their printed forms.
    let origin = len / 2;
    let x = 2.min(origin).min(len - 1 - origin);
    if x >= 1 {
        let model = build_hamiltonian(&cfg.hopping()?, &p, &chain)?;
        for r in printed_commutator_oracle(&model, origin, x, 1)? {
            rows.push(row(
                &format!("{}_printed", r.label),
                format!("{base};origin={origin};x={x};z=1"),
                r.status.into(),
                r.deviation,
                format!("oracle {} ; printed {}", payload(&r.oracle), payload(&r.printed)),
            ));
        }
    }
    Ok(rows)
}

pub fn cmd_verify(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Outcome> {
    let rows = verify_rows(cfg, opts)?;
    let failures = rows.iter().filter(|r| r.status == VerifyStatus::Fail).count();
    let table: Vec<Vec<String>> = rows
        .into_iter()
        .map(|r| vec![r.relation, r.params, r.status.as_str().into(), num(r.deviation), r.payload])
        .collect();
    Ok(Outcome {
        csv: write_csv(&["relation_id", "params", "status", "deviation", "oracle_payload"], &table)?,
        failures,
    })
}

/// One row of the evolve table.
type EvolveKey = (String, i64, i64, u64);

/// Dense coefficients of `τ_t W̄_c(0,1)` on `W̄_x(j,1)` next to the one-particle
/// prediction, plus the closure residual and the spin reconstruction.
pub fn cmd_evolve(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Outcome> {
    let model = cfg.model(opts.cap)?;
    let chain = *model.chain();
    let p = *model.params();
    let d = p.d();
    let len = chain.len() as i64;
    let center = len / 2;
    let times = cfg.times();
    let mut rows: BTreeMap<EvolveKey, (f64, f64)> = BTreeMap::new();
    let key = |kind: &str, x: i64, j: i64, t: f64| (kind.to_string(), x, j, t.to_bits());

    let start = AlgebraElement::from_monomial(&dressed_weyl(center, 1, &p, &chain)?);
    let dim = chain.dim() as f64;
    let basis: Vec<(i64, i64, DenseOperator)> = (0..len)
        .flat_map(|x| (0..d as i64).map(move |j| (x, j)))
        .map(|(x, j)| Ok((x, j, realize_monomial(&dressed_label(x, j, 1, &p, &chain)?, &chain)?)))
        .collect::<Result<_>>()?;
    let a0 = realize(&start, &chain)?;
    for &t in &times {
        let at = model.evolve_dense(&a0, t)?;
        for (x, j, b) in &basis {
            let n = b.dim();
            let mut ip = C64::default();
            for c in 0..n {
                for r in 0..n {
                    ip += b.get(r, c).conj() * at.get(r, c);
                }
            }
            let v = ip / dim;
            rows.insert(key("dense", *x, *j, t), (v.re, v.im));
        }
    }

    let f0 = OneParticleVector::delta(d, cfg.grid, center, 0)?;
    if chain.len() >= 3 {
        let residual = span_residual(&model, &f0)?;
        rows.insert(key("span_residual", center, 0, 0.0), (residual.residual, 0.0));
    }
    let generators: Result<Vec<_>> = (0..d as i64).map(|j| quasifree_generator(&model, j)).collect();
    if let Ok(gens) = generators {
        let leak = gens.iter().map(|g| g.leakage).fold(0.0, f64::max);
        rows.insert(key("closure_leakage", center, 0, 0.0), (leak, 0.0));
        if leak < 1e-10 {
            let hs: Vec<Hopping> = gens.into_iter().map(|g| g.hopping).collect();
            for &t in &times {
                let ft = evolve_charged(&f0, &hs, t)?;
                for x in 0..len {
                    for j in 0..d as i64 {
                        let v = ft.get(x, j);
                        rows.insert(key("one_particle", x, j, t), (v.re, v.im));
                    }
                }
            }
        }
    }
    if chain.len() >= 3 {
        for &t in &times {
            let r = reconstruct_spin_evolution(&model, center, t)?;
            rows.insert(key("spin_reconstruction", center, 0, t), (r.deviation, r.swapped_deviation));
        }
    }
    let table: Vec<Vec<String>> = rows
        .into_iter()
        .map(|((kind, x, j, t), (re, im))| vec![kind, x.to_string(), j.to_string(), num(f64::from_bits(t)), num(re), num(im)])
        .collect();
    Ok(Outcome {
        csv: write_csv(&["kind", "site", "charge", "t", "re", "im"], &table)?,
        failures: 0,
    })
}

/// Observable pairs of the decay contrast.
pub struct DecayPairs {
    pub left: i64,
    pub right: i64,
    pub invariant: (AlgebraElement, AlgebraElement),
    pub bare: (AlgebraElement, AlgebraElement),
}

/// Gauge-invariant dressed bilinears on `[a, a+1]`, `[b, b+1]` and bare `W_a(0,1)`,
/// `W_b(0,1)` with `b − a` = separation, centred in the chain. Separation 1 makes the
/// bilinears overlap on one site.
pub fn decay_pairs(cfg: &ExperimentConfig, chain: &ChainSpec) -> Result<DecayPairs> {
    let p = cfg.params()?;
    let sep = cfg.separation as i64;
    let len = chain.len() as i64;
    if sep < 1 || sep + 2 > len {
        return Err(LabError::InvalidArgument(format!(
            "separation {sep} needs 1 ≤ separation ≤ L − 2"
        )));
    }
    let a = (len - sep - 2 + 1) / 2;
    let b = a + sep;
    let bil = |x: i64| -> Result<AlgebraElement> {
        Ok(AlgebraElement::from_monomial(
            &dressed_weyl(x, 1, &p, chain)?.mul(&dressed_weyl(x + 1, 1, &p, chain)?.adjoint())?,
        ))
    };
    let bare = |x: i64| -> Result<AlgebraElement> { Ok(AlgebraElement::from_monomial(&WeylMonomial::single(p.d(), x, 0, 1)?)) };
    Ok(DecayPairs {
        left: a,
        right: b,
        invariant: (bil(a)?, bil(b)?),
        bare: (bare(a)?, bare(b)?),
    })
}

pub fn decay_series(cfg: &ExperimentConfig, opts: RunOptions) -> Result<(CommutatorSeries, CommutatorSeries)> {
    let model = cfg.model(opts.cap)?;
    let pairs = decay_pairs(cfg, model.chain())?;
    let times = cfg.times();
    let inv = commutator_decay(&pairs.invariant.0, &pairs.invariant.1, &model, &times)?;
    let bare = commutator_decay(&pairs.bare.0, &pairs.bare.1, &model, &times)?;
    Ok((inv, bare))
}

pub fn cmd_decay(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Outcome> {
    let (inv, bare) = decay_series(cfg, opts)?;
    let mut table = Vec::new();
    for (name, s) in [("bare", &bare), ("gauge_invariant", &inv)] {
        for ((t, v), (_, e)) in s.series.iter().zip(s.envelope()) {
            table.push(vec![name.to_string(), num(*t), num(*v), num(e)]);
        }
    }
    Ok(Outcome {
        csv: write_csv(&["pair", "t", "norm", "envelope"], &table)?,
        failures: 0,
    })
}

pub fn cmd_block(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Outcome> {
    let p = cfg.params()?;
    let chain = cfg.chain(opts.cap)?;
    let k = cfg.block_k;
    let len = chain.len() as i64;
    let mut elements: Vec<(String, AlgebraElement)> = Vec::new();
    for x in 0..len {
        let w = dressed_weyl(x, 1, &p, &chain)?;
        elements.push((format!("dressed_{x}"), AlgebraElement::from_monomial(&w)));
        if x + 1 < len {
            let b = w.mul(&dressed_weyl(x + 1, 1, &p, &chain)?.adjoint())?;
            elements.push((format!("bilinear_{x}"), AlgebraElement::from_monomial(&b)));
        }
    }
    let mut table = Vec::new();
    let mut failures = 0;
    for (name, e) in &elements {
        let (_, rep) = block_sites(e, k, &chain)?;
        if rep.realization_deviation > 1e-15 || rep.containment_deviation > 1e-12 {
            failures += 1;
        }
        table.push(vec![
            name.clone(),
            rep.k.to_string(),
            rep.local_dim.to_string(),
            rep.blocks.to_string(),
            rep.blocked_gauge_order.to_string(),
            num(rep.realization_deviation),
            rep.spanning_set_size.to_string(),
            num(rep.containment_deviation),
            rep.cross_block_deviation.map(num).unwrap_or_default(),
        ]);
    }
    table.sort();
    Ok(Outcome {
        csv: write_csv(
            &[
                "element",
                "k",
                "local_dim",
                "blocks",
                "blocked_gauge_order",
                "realization_deviation",
                "spanning_set_size",
                "containment_deviation",
                "cross_block_deviation",
            ],
            &table,
        )?,
        failures,
    })
}

/// Summary of prior CSVs: row counts, status tallies and numeric column maxima.
pub fn cmd_report(cfg: &ExperimentConfig, base: Option<&std::path::Path>) -> Result<Outcome> {
    let mut summary: BTreeMap<(String, String), String> = BTreeMap::new();
    for input in &cfg.inputs {
        let path = match base {
            Some(b) => b.join(input),
            None => PathBuf::from(input),
        };
        let mut rd = csv::Reader::from_path(&path)
            .map_err(|e| LabError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let header: Vec<String> = rd
            .headers()
            .map_err(|e| LabError::InvalidArgument(format!("{input}: {e}")))?
            .iter()
            .map(String::from)
            .collect();
        let mut count = 0usize;
        let mut maxima: BTreeMap<String, f64> = BTreeMap::new();
        let mut statuses: BTreeMap<String, usize> = BTreeMap::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| LabError::InvalidArgument(format!("{input}: {e}")))?;
            count += 1;
            for (h, v) in header.iter().zip(rec.iter()) {
                if h == "status" {
                    *statuses.entry(v.to_string()).or_default() += 1;
                } else if let Ok(x) = v.parse::<f64>() {
                    let m = maxima.entry(h.clone()).or_insert(0.0);
                    *m = m.max(x.abs());
                }
            }
        }
        let file = input.clone();
        summary.insert((file.clone(), "columns".into()), header.join(";"));
        summary.insert((file.clone(), "rows".into()), count.to_string());
        for (h, m) in maxima {
            summary.insert((file.clone(), format!("max_abs:{h}")), num(m));
        }
        for (s, c) in statuses {
            summary.insert((file.clone(), format!("status:{s}")), c.to_string());
        }
    }
    let failures = summary
        .iter()
        .filter(|((_, k), _)| k == "status:FAIL")
        .map(|(_, v)| v.parse::<usize>().unwrap_or(0))
        .sum();
    let table: Vec<Vec<String>> = summary.into_iter().map(|((f, k), v)| vec![f, k, v]).collect();
    Ok(Outcome {
        csv: write_csv(&["file", "key", "value"], &table)?,
        failures,
    })
}
