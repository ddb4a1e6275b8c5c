//! Acceptance run: one PASS/FAIL line per primary criterion.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ropuf_core::analysis::poisson_binomial::{pmf_dftcf, pmf_dp};
use ropuf_core::analysis::selection::evaluate_members;
use ropuf_core::analysis::{
    binary_entropy, binomial_tail, block_error_probability_dftcf, block_error_probability_dp,
    cs_point, cs_region_mgl, fcs_region, finite_length_point, gv_dimension, q_function,
    required_min_distance, select_transform, CodeRates, SelectionMode, DEFAULT_GRID,
};
use ropuf_core::extraction::{equalized_coefficients, extract_dataset};
use ropuf_core::fcs::{enroll, reconstruct, simulate, ErrorSource, Reconstruction, SecretKey};
use ropuf_core::{
    build_code, enumerate_base_matrices, estimate_error_profile, extract_bits, fit_equalization,
    generate_synthetic, quantizer_boundaries, uniqueness, BitSequence, CoefficientErrorProfile,
    DecodeOutcome, SignMatrix, SyntheticModel, TransformCatalog,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn ropuf(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ropuf"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "ropuf {args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn catalog_count(dir: &Path) -> Outcome {
    let start = Instant::now();
    ropuf(dir, &["search-transforms", "--out", "catalog.json"])?;
    let elapsed = start.elapsed();
    let text = std::fs::read_to_string(dir.join("catalog.json")).map_err(|e| e.to_string())?;
    // Loading validates orthogonality and distinctness of every member.
    let catalog = TransformCatalog::from_json(&text).map_err(|e| e.to_string())?;
    let seeds = enumerate_base_matrices().len();
    let has_dwht = catalog.dwht_id().is_some();
    check(
        catalog.len() == 12288 && seeds == 768 && has_dwht && within(elapsed, Duration::from_secs(300)),
        format!(
            "{} members, {seeds} seeds, DWHT present: {has_dwht}, {:.1}s",
            catalog.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn code_analysis(dir: &Path) -> Outcome {
    let start = Instant::now();
    let d = required_min_distance(255, 0.0149, 1e-9).map_err(|e| e.to_string())?;
    let gv = gv_dimension(255, d).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let cli = ropuf(dir, &["analyze-code", "--n", "255", "--p-max", "0.0149", "--target", "1e-9"])?;
    let cli_ok = cli.contains("required d_min: 41") && cli.contains("GV dimension: 98");
    check(
        d == 41 && gv == 98 && cli_ok && within(elapsed, Duration::from_secs(1)),
        format!("d_min {d}, GV dimension {gv}, CLI agrees: {cli_ok}, {:.3}ms", elapsed.as_secs_f64() * 1e3),
    )
}

fn bch_flagship() -> Outcome {
    let start = Instant::now();
    let code = build_code(8, 18).map_err(|e| e.to_string())?;
    let deg = code.generator().len() - 1;
    let mut rng = ChaCha20Rng::seed_from_u64(1001);
    let mut random_ok = 0;
    for _ in 0..100_000 {
        let msg = BitSequence::from_bools((0..131).map(|_| rng.random::<bool>()));
        let mut r = code.encode(&msg).map_err(|e| e.to_string())?;
        let w = rng.random_range(0..=18);
        sample(&mut rng, 255, w).into_iter().for_each(|i| r.flip(i));
        if code.decode(&r).map_err(|e| e.to_string())?.message() == Some(&msg) {
            random_ok += 1;
        }
    }
    let small = build_code(4, 2).map_err(|e| e.to_string())?;
    let mut exhaustive = (0, 0);
    for m in 0u32..128 {
        let msg = BitSequence::new((0..7).map(|b| (m >> b & 1) as u8).collect()).unwrap();
        let c = small.encode(&msg).map_err(|e| e.to_string())?;
        let mut patterns: Vec<Vec<usize>> = vec![vec![]];
        patterns.extend((0..15).map(|i| vec![i]));
        patterns.extend((0..15).flat_map(|i| (i + 1..15).map(move |j| vec![i, j])));
        for p in patterns {
            let mut r = c.clone();
            p.iter().for_each(|&i| r.flip(i));
            exhaustive.1 += 1;
            if matches!(small.decode(&r), Ok(DecodeOutcome::Corrected { ref message, .. }) if message == &msg) {
                exhaustive.0 += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        (code.n(), code.k()) == (255, 131)
            && deg == 124
            && random_ok == 100_000
            && exhaustive.0 == exhaustive.1
            && within(elapsed, Duration::from_secs(120)),
        format!(
            "({}, {}), deg g = {deg}, random {random_ok}/100000, BCH(15,7) {}/{}, {:.1}s",
            code.n(),
            code.k(),
            exhaustive.0,
            exhaustive.1,
            elapsed.as_secs_f64()
        ),
    )
}

fn poisson_binomial() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(1002);
    let mut worst_pmf: f64 = 0.0;
    for _ in 0..100 {
        let p: Vec<f64> = (0..255).map(|_| rng.random_range(0.0..0.5)).collect();
        let a = pmf_dftcf(&p);
        let b = pmf_dp(&p);
        worst_pmf = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(worst_pmf, f64::max);
    }
    let mut worst_binomial: f64 = 0.0;
    for &p in &[0.0088, 0.0149, 0.05, 0.2] {
        for &t in &[5, 18, 30] {
            let exact = binomial_tail(255, p, t).map_err(|e| e.to_string())?;
            let profile = vec![p; 255];
            let cf = block_error_probability_dftcf(&profile, t).map_err(|e| e.to_string())?;
            let dp = block_error_probability_dp(&profile, t).map_err(|e| e.to_string())?;
            worst_binomial = worst_binomial.max((cf - exact).abs()).max((dp - exact).abs());
        }
    }

    let model = SyntheticModel {
        sigma_e: 0.008,
        ..SyntheticModel::default()
    };
    let ds = generate_synthetic(&model, 2000, 4, 1003).map_err(|e| e.to_string())?;
    let t = SignMatrix::sylvester(16).unwrap();
    let eq = fit_equalization(&ds, &t).map_err(|e| e.to_string())?;
    let q = quantizer_boundaries(1).unwrap();
    let st = estimate_error_profile(&ds, &t, &eq, &q).map_err(|e| e.to_string())?;
    let st_tail = block_error_probability_dp(&st.p, 18).map_err(|e| e.to_string())?;
    let st_bound = binomial_tail(255, st.p_max, 18).map_err(|e| e.to_string())?;

    let code = build_code(8, 18).unwrap();
    let inflated = CoefficientErrorProfile::constant(0.05, 255).unwrap();
    let analytic = block_error_probability_dp(&inflated.p, 18).map_err(|e| e.to_string())?;
    let report = simulate(&code, &ErrorSource::Profile(&inflated), 1_000_000, 1004).map_err(|e| e.to_string())?;

    check(
        worst_pmf <= 1e-13
            && worst_binomial <= 1e-12
            && st.p_max <= 0.0149
            && st_tail <= st_bound
            && report.block_error.contains(analytic),
        format!(
            "DFT-CF vs DP {worst_pmf:.2e}; constant-p vs binomial {worst_binomial:.2e}; \
             ST profile p_max {:.4}: tail {st_tail:.3e} <= bound {st_bound:.3e}; \
             p=0.05 simulated {:.5} [{:.5}, {:.5}] vs analytic {analytic:.5}",
            st.p_max, report.block_error.rate, report.block_error.lower, report.block_error.upper
        ),
    )
}

fn rate_regions(dir: &Path) -> Outcome {
    let p = 0.0088;
    let fcs = fcs_region(p, DEFAULT_GRID).map_err(|e| e.to_string())?;
    let best = fcs.max_secret_key_rate().ok_or("empty region")?;
    let finite = finite_length_point(255, p, 1e-9).map_err(|e| e.to_string())?;
    let rates = CodeRates { n: 255, k: 131 };
    let start = cs_point(p, 0.0).map_err(|e| e.to_string())?;
    let h = binary_entropy(p).map_err(|e| e.to_string())?;
    let cs = cs_region_mgl(p, DEFAULT_GRID).map_err(|e| e.to_string())?;
    let dominates = cs.points.iter().all(|pt| pt.r_ell <= 1.0 - pt.r_s + 1e-15);
    let endpoint = (start.r_s - (1.0 - h)).abs().max((start.r_ell - h).abs());
    let cli = ropuf(dir, &["rate-region", "--p", "0.0088", "--eps", "1e-9", "--n", "255", "--out", "rates"])?;
    let cli_ok = cli.contains("(131/255, 124/255)");
    check(
        (best.r_s - 0.9268).abs() <= 0.001
            && (finite.r_s - 0.703).abs() <= 0.005
            && rates.secret_key_rate() == (131, 255)
            && rates.privacy_leakage_rate() == (124, 255)
            && cli_ok
            && endpoint <= 1e-12
            && dominates,
        format!(
            "max R_s {:.5}, finite-length R_s {:.5}, BCH point (131/255, 124/255) printed: {cli_ok}, \
             CS endpoint error {endpoint:.1e}, CS dominates FCS: {dominates}",
            best.r_s, finite.r_s
        ),
    )
}

fn end_to_end() -> Outcome {
    let model = SyntheticModel {
        sigma_e: 0.0,
        ..SyntheticModel::default()
    };
    let ds = generate_synthetic(&model, 100, 2, 1005).map_err(|e| e.to_string())?;
    let t = SignMatrix::sylvester(16).unwrap();
    let eq = fit_equalization(&ds, &t).map_err(|e| e.to_string())?;
    let q = quantizer_boundaries(1).unwrap();
    let code = build_code(8, 18).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1006);
    let mut recovered = 0;
    for d in 0..100 {
        let key = SecretKey::random(131, &mut rng);
        let x = extract_bits(ds.enrollment(d), &t, &eq, &q).map_err(|e| e.to_string())?;
        let helper = enroll(&code, &key, &x).map_err(|e| e.to_string())?;
        let y = extract_bits(ds.array(d, 1), &t, &eq, &q).map_err(|e| e.to_string())?;
        if reconstruct(&code, &y, &helper).map_err(|e| e.to_string())? == Reconstruction::Key(key) {
            recovered += 1;
        }
    }

    // Exhaustive joint distribution of (S, W) for Hamming(7,4).
    let hamming = build_code(3, 1).unwrap();
    let bits = |v: u32, len: usize| BitSequence::new((0..len).map(|b| (v >> b & 1) as u8).collect()).unwrap();
    let mut joint: HashMap<(u32, Vec<u8>), f64> = HashMap::new();
    let mut ws: HashMap<Vec<u8>, f64> = HashMap::new();
    for s in 0u32..16 {
        for x in 0u32..128 {
            let helper = enroll(&hamming, &SecretKey::new(bits(s, 4)), &bits(x, 7)).map_err(|e| e.to_string())?;
            let w = helper.w.into_inner();
            *joint.entry((s, w.clone())).or_default() += 1.0;
            *ws.entry(w).or_default() += 1.0;
        }
    }
    let total = 2048.0;
    let mi: f64 = joint
        .iter()
        .map(|((_, w), &c)| c / total * (c * total / (128.0 * ws[w])).log2())
        .sum();
    check(
        recovered == 100 && mi == 0.0,
        format!("σ_e = 0: {recovered}/100 keys; Hamming(7,4) I(S;W) = {mi}"),
    )
}

fn ks_p_value(mut sample: Vec<f64>) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let d = sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - q_function(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..100)
        .map(|j| {
            let j = f64::from(j);
            let sign = if j as u32 % 2 == 1 { 1.0 } else { -1.0 };
            2.0 * sign * (-2.0 * j * j * lambda * lambda).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

fn pipeline_statistics() -> Outcome {
    let ds = generate_synthetic(&SyntheticModel::default(), 500, 1, 1007).map_err(|e| e.to_string())?;
    let t = SignMatrix::sylvester(16).unwrap();
    let eq = fit_equalization(&ds, &t).map_err(|e| e.to_string())?;
    let z: Vec<Vec<f64>> = (0..ds.devices())
        .map(|d| equalized_coefficients(ds.enrollment(d), &t, &eq))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let ks_pass = (1..256)
        .filter(|&i| ks_p_value(z.iter().map(|row| row[i]).collect()) >= 0.01)
        .count();
    let q = quantizer_boundaries(1).unwrap();
    let seqs = extract_dataset(&ds, 0, &t, &eq, &q).map_err(|e| e.to_string())?;
    let ones = seqs.iter().map(|s| s.weight()).sum::<usize>() as f64 / (seqs.len() * 255) as f64;
    let (u_mean, u_var) = uniqueness(&seqs).map_err(|e| e.to_string())?;
    check(
        ks_pass as f64 >= 0.95 * 255.0 && (ones - 0.5).abs() <= 0.01 && (u_mean - 0.5).abs() <= 0.01,
        format!(
            "KS pass {ks_pass}/255; ones fraction {ones:.4} over {} devices; uniqueness {u_mean:.4} (variance {u_var:.2e})",
            seqs.len()
        ),
    )
}

fn selection(dir: &Path) -> Outcome {
    let text = std::fs::read_to_string(dir.join("catalog.json")).map_err(|e| e.to_string())?;
    let catalog = TransformCatalog::from_json(&text).map_err(|e| e.to_string())?;
    let ds = generate_synthetic(&SyntheticModel::default(), 100, 3, 1008).map_err(|e| e.to_string())?;
    let q = quantizer_boundaries(1).unwrap();
    let start = Instant::now();
    let result = select_transform(&catalog, &ds, &q, SelectionMode::Full).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let dwht = catalog.dwht_id().ok_or("no DWHT member")?;
    let dwht_pmax = evaluate_members(&catalog, &[dwht], &ds, &q).map_err(|e| e.to_string())?[0]
        .profile
        .p_max;
    check(
        result.profile.p_max <= dwht_pmax
            && result.evaluated == 12288
            && within(elapsed, Duration::from_secs(1800)),
        format!(
            "selected {} with p_max {:.4e} vs DWHT {dwht_pmax:.4e}, {} members in {:.1}s",
            result.transform_id,
            result.profile.p_max,
            result.evaluated,
            elapsed.as_secs_f64()
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let dir = dir.path();
    let criteria: Vec<Criterion<'_>> = vec![
        ("catalog count", Box::new(|| catalog_count(dir))),
        ("code analysis", Box::new(|| code_analysis(dir))),
        ("BCH flagship", Box::new(bch_flagship)),
        ("Poisson-binomial engine", Box::new(poisson_binomial)),
        ("rate regions", Box::new(|| rate_regions(dir))),
        ("end-to-end FCS", Box::new(end_to_end)),
        ("pipeline statistics", Box::new(pipeline_statistics)),
        ("selection sanity", Box::new(|| selection(dir))),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
