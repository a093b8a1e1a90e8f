//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `UNATTAINABLE` are evaluated literally and reported, but do not
//! fail the run; every other failing criterion exits non-zero.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use grading_lab::dense::{op_norm, realize, realize_monomial, sector_decompose, projector_rank, ChainSpec, GaugeProject};
use grading_lab::dressing::{dressed_matrix_unit, dressed_weyl};
use grading_lab::dynamics::smeared;
use grading_lab::lab::{cmd_block, cmd_decay, cmd_verify, ExperimentConfig, RunOptions};
use grading_lab::one_particle::{evolve, evolve_charged, fractional_shift, sup_decay, Hopping, OneParticleVector};
use grading_lab::weyl::matrix_unit;
use grading_lab::{AlgebraElement, GradingParams, WeylMonomial, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNATTAINABLE: &[u32] = &[1];
const CAP: usize = 4096;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn preset(name: &str) -> ExperimentConfig {
    let path = root().join("presets").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ExperimentConfig::parse(&text).unwrap()
}

fn all_presets() -> Vec<(String, ExperimentConfig)> {
    let mut names: Vec<String> = std::fs::read_dir(root().join("presets"))
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".conf"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), preset(&n))).collect()
}

fn opts() -> RunOptions {
    RunOptions { cap: CAP, seed: 0 }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed <= limit
}

fn c1_exchange_phases() -> Verdict {
    let start = Instant::now();
    let len = 10usize;
    let mut checked = 0usize;
    let mut wrong = 0usize;
    let mut companion_wrong = 0usize;
    for d in 2..=5u32 {
        let chain = ChainSpec::with_cap(d, len, usize::MAX).unwrap();
        let pairs = |p: &GradingParams, bad: &mut usize, count: &mut usize| {
            let w: Vec<WeylMonomial> = (0..len as i64).map(|x| dressed_weyl(x, 1, p, &chain).unwrap()).collect();
            for x in 0..len {
                for y in x + 1..len {
                    *count += 1;
                    if w[x].commutation_phase(&w[y]).unwrap() != 1 {
                        *bad += 1;
                    }
                }
            }
        };
        for j in 1..d as i64 {
            pairs(&GradingParams::new(d, j, j).unwrap(), &mut wrong, &mut checked);
        }
        let mut companion = 0usize;
        for jm in 0..d as i64 {
            pairs(&GradingParams::new(d, jm + 1, jm).unwrap(), &mut companion_wrong, &mut companion);
        }
    }
    let elapsed = start.elapsed();
    let pass = wrong == 0 && within(Duration::from_secs(10), elapsed);
    verdict(
        pass,
        format!(
            "j+=j-: {wrong}/{checked} pairs without phase 2pi/d; companion j+-j-=1: {companion_wrong} wrong; {:.2?}",
            elapsed
        ),
    )
}

fn random_monomial(rng: &mut ChaCha8Rng, d: u32, len: i64) -> WeylMonomial {
    let mut labels = Vec::new();
    for x in 0..len {
        if rng.gen_bool(0.7) {
            labels.push((x, rng.gen_range(0..d as i64), rng.gen_range(0..d as i64)));
        }
    }
    WeylMonomial::from_labels(d, labels, rng.gen_range(0..2 * d as i64)).unwrap()
}

fn c2_homomorphism() -> Verdict {
    let start = Instant::now();
    let chain = ChainSpec::new(3, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let a = random_monomial(&mut rng, 3, 5);
        let b = random_monomial(&mut rng, 3, 5);
        let sym = realize_monomial(&a.mul(&b).unwrap(), &chain).unwrap();
        let dense = realize_monomial(&a, &chain).unwrap().mul(&realize_monomial(&b, &chain).unwrap()).unwrap();
        worst = worst.max(sym.max_abs_diff(&dense));
    }
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-12 && within(Duration::from_secs(30), elapsed),
        format!("max deviation {worst:.2e} over 200 pairs; {elapsed:.2?}"),
    )
}

fn c3_norms() -> Verdict {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for d in [2u32, 3] {
        for len in 1..=6usize {
            let chain = ChainSpec::new(d, len).unwrap();
            for (jp, jm) in [(1, 0), (1, 1)] {
                let p = GradingParams::new(d, jp, jm).unwrap();
                for x in 0..len as i64 {
                    let mut ops: Vec<AlgebraElement> = Vec::new();
                    for r in 0..d {
                        for s in 0..d {
                            ops.push(dressed_matrix_unit(x, r, s, &p, &chain).unwrap());
                        }
                    }
                    for s in 1..d as i64 {
                        ops.push(AlgebraElement::from_monomial(&dressed_weyl(x, s, &p, &chain).unwrap()));
                    }
                    for op in ops {
                        let n = op_norm(&realize(&op, &chain).unwrap()).unwrap();
                        worst = worst.max((n - 1.0).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    verdict(worst < 1e-10, format!("max |norm - 1| = {worst:.2e} over {count} operators"))
}

fn c4_sectors() -> Verdict {
    let d = 3u32;
    let chain = ChainSpec::new(d, 3).unwrap();
    let p = GradingParams::new(d, 1, 0).unwrap();
    let projectors = sector_decompose(&chain);
    let ranks: usize = projectors.iter().map(projector_rank).sum();
    let mut worst = 0.0f64;
    for x in 0..3i64 {
        for j in 0..d {
            for k in 0..d {
                let units = [
                    matrix_unit(d, j, k, x).unwrap(),
                    dressed_matrix_unit(x, j, k, &p, &chain).unwrap(),
                ];
                for u in units {
                    let m = realize(&u, &chain).unwrap();
                    for l in 0..d as i64 {
                        let target = (l + j as i64 - k as i64).rem_euclid(d as i64) as usize;
                        let src = m.mul(&projectors[l as usize]).unwrap();
                        let mapped = projectors[target].mul(&src).unwrap();
                        worst = worst.max(mapped.max_abs_diff(&src));
                    }
                }
            }
        }
    }
    let full = chain.dim();
    verdict(
        worst < 1e-12 && ranks == full,
        format!("H_l -> H_(l+j-k) deviation {worst:.2e}; rank sum {ranks} of {full}"),
    )
}

fn c5_free_fermion() -> Verdict {
    let start = Instant::now();
    let cfg = preset("free_fermion_d2.conf");
    let model = cfg.model(CAP).unwrap();
    let chain = *model.chain();
    let p = *model.params();
    let len = chain.len() as i64;
    let n = cfg.grid;
    let f = OneParticleVector::from_entries(
        2,
        n,
        [(4, 0, C64::new(1.0, 0.0)), (5, 1, C64::new(0.0, 0.5))],
    )
    .unwrap();
    let hs: Vec<Hopping> = (0..2)
        .map(|j| grading_lab::dynamics::quasifree_generator(&model, j).unwrap())
        .map(|g| g.hopping)
        .collect();
    let a0 = realize(&smeared(&f, &p, &chain).unwrap(), &chain).unwrap();
    let guard = model.guard_time(4, 5, 1);
    let mut worst = 0.0f64;
    for t in cfg.times() {
        assert!(t <= guard, "t = {t} beyond guard {guard}");
        let ft = evolve_charged(&f, &hs, t).unwrap();
        let inside = OneParticleVector::from_entries(2, n, ft.entries().filter(|&(x, _, _)| (0..len).contains(&x))).unwrap();
        let predicted = realize(&smeared(&inside, &p, &chain).unwrap(), &chain).unwrap();
        worst = worst.max(model.evolve_dense(&a0, t).unwrap().max_abs_diff(&predicted));
    }
    let residual = grading_lab::dynamics::span_residual(&model, &f).unwrap().residual;
    let elapsed = start.elapsed();
    verdict(
        worst < 1e-8 && residual < 1e-10 && within(Duration::from_secs(120), elapsed),
        format!("dense vs one-particle {worst:.2e} (t <= {}, guard {guard:.1}); span residual {residual:.2e}; {elapsed:.2?}", cfg.t_stop),
    )
}

/// `J_n(z) = (1/π) ∫_0^π cos(nτ − z sin τ) dτ`, composite Simpson rule.
fn bessel_j(n: i64, z: f64) -> f64 {
    let m = 4000usize;
    let step = PI / m as f64;
    let g = |tau: f64| (n as f64 * tau - z * tau.sin()).cos();
    let mut acc = g(0.0) + g(PI);
    for i in 1..m {
        acc += g(i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * step / 3.0 / PI
}

fn c6_quasifree_decay() -> Verdict {
    let kappa = 1.0;
    let h = Hopping::cosine(kappa);
    let n = 1024usize;
    let f = OneParticleVector::delta(2, n, 0, 0).unwrap();
    let times: Vec<f64> = (0..=90).map(|i| 10.0 + i as f64).collect();
    let report = sup_decay(&f, &h, &times, (10.0, 100.0)).unwrap();
    let exponent = report.exponent.unwrap_or(f64::NAN);
    let mut l2 = 0.0f64;
    let mut bessel = 0.0f64;
    for &t in &[0.5, 3.0, 17.0, 60.0] {
        let ft = evolve(&f, &h, t).unwrap();
        l2 = l2.max((ft.l2_norm() - 1.0).abs());
        for x in -80..=80i64 {
            // Hopping κ/2 on both neighbours: |f_t(x)| = |J_x(κt)|.
            bessel = bessel.max((ft.get(x.rem_euclid(n as i64), 0).norm() - bessel_j(x, kappa * t).abs()).abs());
        }
    }
    verdict(
        (-0.5..=-0.30).contains(&exponent) && l2 < 1e-12 && bessel < 1e-8,
        format!("exponent {exponent:.4} on [10,100]; l2 drift {l2:.2e}; Bessel deviation {bessel:.2e}"),
    )
}

fn c7_fractional_shift() -> Verdict {
    let n = 64usize;
    let f = OneParticleVector::from_entries(
        2,
        n,
        [(7, 0, C64::new(0.6, -0.8)), (20, 1, C64::new(1.0, 0.0)), (21, 0, C64::new(0.0, 0.3))],
    )
    .unwrap();
    let twisted = fractional_shift(&fractional_shift(&f, 0.5, 1), 0.5, 1).max_abs_diff(&fractional_shift(&f, 1.0, 1));
    let half = fractional_shift(&fractional_shift(&f, 0.5, 0), 0.5, 0);
    let whole = fractional_shift(&f, 1.0, 0);
    let neutral = half.component_diff(&whole, 0);
    let charged = half.component_diff(&whole, 1);
    verdict(
        twisted < 1e-12 && neutral < 1e-12 && (charged - 2.0).abs() < 1e-12,
        format!("twisted {twisted:.2e}; untwisted charge-0 {neutral:.2e}, charge-1 {charged:.15}"),
    )
}

fn c8_gauge_invariance() -> Verdict {
    let mut worst_defect = 0.0f64;
    let mut worst_projection = 0.0f64;
    let mut names = Vec::new();
    for (name, cfg) in all_presets() {
        let model = cfg.model(CAP).unwrap();
        let chain = *model.chain();
        let p = *model.params();
        worst_defect = worst_defect.max(model.gauge_defect().unwrap());
        let c = chain.len() as i64 / 2;
        let a = AlgebraElement::from_monomial(&dressed_weyl(c, 1, &p, &chain).unwrap())
            .add(&AlgebraElement::from_scaled(
                &dressed_weyl(c, 1, &p, &chain).unwrap().mul(&dressed_weyl(c - 1, 1, &p, &chain).unwrap().adjoint()).unwrap(),
                C64::new(0.3, 0.7),
            ))
            .unwrap()
            .add(&AlgebraElement::from_scaled(&WeylMonomial::single(p.d(), 0, 1, 0).unwrap(), C64::new(-0.4, 0.0)))
            .unwrap();
        let dense = realize(&a, &chain).unwrap();
        let t = cfg.times().last().copied().unwrap_or(1.0).max(0.5);
        let lhs = model.evolve_dense(&dense, t).unwrap().gauge_project();
        let rhs = model.evolve_dense(&dense.gauge_project(), t).unwrap();
        worst_projection = worst_projection.max(lhs.max_abs_diff(&rhs));
        names.push(name);
    }
    verdict(
        worst_defect < 1e-12 && worst_projection < 1e-10,
        format!("{} presets: max ||[H,G]|| {worst_defect:.2e}; projection defect {worst_projection:.2e}", names.len()),
    )
}

fn read_table(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(bytes).records().map(|r| r.unwrap()).collect()
}

fn envelopes(rows: &[csv::StringRecord], pair: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| &r[0] == pair)
        .map(|r| (r[1].parse().unwrap(), r[3].parse().unwrap()))
        .collect()
}

fn c9_abelianness() -> Verdict {
    let start = Instant::now();
    let cfg = preset("decay_d3_equal.conf");
    let live = read_table(&cmd_decay(&cfg, opts()).unwrap().csv);
    let frozen = read_table(&std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/decay_d3_equal.csv")).unwrap());
    let (inv, bare) = (envelopes(&live, "gauge_invariant"), envelopes(&live, "bare"));
    let (inv0, bare0) = (envelopes(&frozen, "gauge_invariant"), envelopes(&frozen, "bare"));
    let drift = bare
        .iter()
        .zip(&bare0)
        .chain(inv.iter().zip(&inv0))
        .map(|(a, b)| if a.0 == b.0 { (a.1 - b.1).abs() } else { f64::INFINITY })
        .fold(0.0, f64::max);
    let ordered = inv.len() == bare.len() && !inv.is_empty() && inv.iter().zip(&bare).all(|(i, b)| i.1 < 0.5 * b.1);
    let max_ratio = inv.iter().zip(&bare).map(|(i, b)| i.1 / b.1).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    verdict(
        ordered && drift < 1e-9 && within(Duration::from_secs(300), elapsed),
        format!("max invariant/bare envelope ratio {max_ratio:.2e} over {} times; drift from frozen {drift:.2e}; {elapsed:.2?}", inv.len()),
    )
}

fn c10_printed_audit() -> Verdict {
    let mut audited = 0usize;
    let mut bad = 0usize;
    let mut fails = 0usize;
    let mut missing = Vec::new();
    for name in ["verify_d3.conf", "verify_d2_equal.conf"] {
        let out = cmd_verify(&preset(name), opts()).unwrap();
        let rows = read_table(&out.csv);
        fails += rows.iter().filter(|r| &r[2] == "FAIL").count() + out.failures;
        for family in ["pair_product_printed", "unit_exchange_printed", "bilinear_", "generator_"] {
            let fam: Vec<_> = rows.iter().filter(|r| r[0].starts_with(family)).collect();
            if fam.is_empty() {
                missing.push(format!("{name}:{family}"));
            }
            for r in fam {
                audited += 1;
                if !matches!(&r[2], "MATCH" | "MISMATCH") || r[4].trim().is_empty() {
                    bad += 1;
                }
            }
        }
    }
    verdict(
        bad == 0 && fails == 0 && missing.is_empty(),
        format!("{audited} audited rows, {bad} unlabeled; {fails} exact-tier failures; missing families {missing:?}"),
    )
}

fn c11_blocking() -> Verdict {
    let out = cmd_block(&preset("block_d2.conf"), opts()).unwrap();
    let rows = read_table(&out.csv);
    let col = |r: &csv::StringRecord, i: usize| -> f64 { r[i].parse().unwrap_or(f64::NAN) };
    let realization = rows.iter().map(|r| col(r, 5)).fold(0.0, f64::max);
    let containment = rows.iter().map(|r| col(r, 7)).fold(0.0, f64::max);
    let spanning = rows.iter().map(|r| col(r, 6)).fold(0.0, f64::max);
    verdict(
        !rows.is_empty() && realization <= 1e-15 && containment <= 1e-12 && out.failures == 0,
        format!("{} elements: realization {realization:.2e}; containment {containment:.2e} on {spanning} monomials", rows.len()),
    )
}

fn c12_determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_grading-lab");
    let dir = tempfile::tempdir().unwrap();
    let presets = root().join("presets");
    let mut runs = vec![
        ("verify", presets.join("verify_d3.conf")),
        ("evolve", presets.join("evolve_d3.conf")),
        ("decay", presets.join("decay_d3_equal.conf")),
        ("block", presets.join("block_d2.conf")),
    ];
    let mut inputs = Vec::new();
    for (cmd, conf) in runs.clone() {
        let path = dir.path().join(format!("{cmd}.csv"));
        let status = Command::new(bin).args([cmd, "--config"]).arg(&conf).arg("--out").arg(&path).status().unwrap();
        assert!(status.success(), "{cmd} failed");
        inputs.push(path.display().to_string());
    }
    let report = dir.path().join("report.conf");
    std::fs::write(&report, format!("inputs = {}\n", inputs.join(", "))).unwrap();
    runs.push(("report", report));
    let mut differing = Vec::new();
    for (cmd, conf) in &runs {
        let once = || Command::new(bin).args([*cmd, "--config"]).arg(conf).output().unwrap();
        let (a, b) = (once(), once());
        if !a.status.success() || a.stdout.is_empty() || a.stdout != b.stdout {
            differing.push(*cmd);
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} commands rerun; differing or failing: {differing:?}", runs.len()),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Verdict); 12] = [
        (1, c1_exchange_phases),
        (2, c2_homomorphism),
        (3, c3_norms),
        (4, c4_sectors),
        (5, c5_free_fermion),
        (6, c6_quasifree_decay),
        (7, c7_fractional_shift),
        (8, c8_gauge_invariance),
        (9, c9_abelianness),
        (10, c10_printed_audit),
        (11, c11_blocking),
        (12, c12_determinism),
    ];
    faer::set_global_parallelism(faer::Par::Seq);
    let mut unexpected = Vec::new();
    for (id, check) in criteria {
        let v = check();
        let tag = match (v.pass, UNATTAINABLE.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => {
                unexpected.push(id);
                "FAIL"
            }
        };
        println!("criterion {id:>2}: {tag} | {}", v.detail);
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
