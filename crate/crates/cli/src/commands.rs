use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use ropuf_core::analysis::selection::evaluate_members;
use ropuf_core::analysis::{
    binomial_tail, block_error_probability_dftcf, block_error_probability_dp, cs_point,
    cs_region_mgl, fcs_region, finite_length_point, gv_dimension, required_min_distance,
    select_transform, AnalysisError, CodeRates, RatePoint, SelectionMode,
};
use ropuf_core::extraction::extract_dataset;
use ropuf_core::fcs::{self, ErrorSource, HelperData, Reconstruction, SecretKey};
use ropuf_core::ro_data::{reference, RoDataError, RO_COUNT};
use ropuf_core::{
    build_code, extract_bits, fit_equalization, generate_synthetic, quantizer_boundaries,
    randomness_smoke, uniqueness, BchCode, CoefficientErrorProfile, EqualizationProfile,
    QuantizerSpec, RoArrayDataset, SignMatrix, SyntheticModel, TransformCatalog,
};
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{ensure_dir, json_line, manifest_path_for, sha256_ref, Run};
use crate::{
    data_err, AnalyzeCodeArgs, CliError, CodeArg, EnrollArgs, EvalArgs, GenDataArgs,
    RateRegionArgs, ReconstructArgs, SearchArgs, SelectArgs, SimulateArgs, TransformArgs,
};

fn load_dataset(run: &mut Run, path: &Path) -> Result<RoArrayDataset, CliError> {
    let text = run.read(path)?;
    RoArrayDataset::read_csv(text.as_bytes())
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_catalog(run: &mut Run, path: &Path) -> Result<TransformCatalog, CliError> {
    let text = run.read(path)?;
    TransformCatalog::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Selected member and its id; without a catalog the Walsh-Hadamard matrix
/// is used and no id is recorded.
fn resolve_transform(
    run: &mut Run,
    args: &TransformArgs,
) -> Result<(SignMatrix, Option<usize>), CliError> {
    match (&args.catalog, args.transform_id) {
        (None, Some(_)) => Err(CliError::Usage("--transform-id requires --catalog".into())),
        (None, None) => Ok((SignMatrix::sylvester(16).map_err(data_err)?, None)),
        (Some(path), id) => {
            let catalog = load_catalog(run, path)?;
            let id = match id {
                Some(id) => id,
                None => catalog
                    .dwht_id()
                    .ok_or_else(|| CliError::Data("catalog has no Walsh-Hadamard member".into()))?,
            };
            let entry = catalog
                .get(id)
                .ok_or_else(|| CliError::Data(format!("catalog has no member {id}")))?;
            Ok((entry.matrix.clone(), Some(id)))
        }
    }
}

fn quantizer(bits: u8) -> Result<QuantizerSpec, CliError> {
    quantizer_boundaries(bits).map_err(|e| CliError::Usage(e.to_string()))
}

fn code(arg: CodeArg) -> Result<BchCode, CliError> {
    build_code(arg.m, arg.t).map_err(|e| CliError::Usage(format!("--code {},{}: {e}", arg.m, arg.t)))
}

fn analysis_err(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::ProbabilityOutOfRange(_) | AnalysisError::InvalidParameter(_) => {
            CliError::Usage(e.to_string())
        }
        other => data_err(other),
    }
}

/// Array of `device` (0-based) at the 1-based `measurement`.
fn measurement_array(ds: &RoArrayDataset, device: usize, measurement: usize) -> Result<&[f64], CliError> {
    if device >= ds.devices() {
        return Err(CliError::Data(format!(
            "device {device} out of range: dataset has {} devices",
            ds.devices()
        )));
    }
    if measurement == 0 || measurement > ds.measurements() {
        return Err(CliError::Data(format!(
            "measurement {measurement} out of range 1..={}",
            ds.measurements()
        )));
    }
    Ok(ds.array(device, measurement - 1))
}

pub fn search_transforms(args: &SearchArgs) -> Result<(), CliError> {
    let mut run = Run::new("search-transforms", args, None);
    let catalog = ropuf_core::build_catalog();
    run.write(&args.out, catalog.to_json().as_bytes())?;
    run.finish(&manifest_path_for(&args.out))?;
    println!("{} unique orthogonal transforms", catalog.len());
    if let Some(id) = catalog.dwht_id() {
        println!("Walsh-Hadamard member: id {id}");
    }
    Ok(())
}

pub fn gen_data(args: &GenDataArgs) -> Result<(), CliError> {
    let mut run = Run::new("gen-data", args, Some(args.seed));
    let model = SyntheticModel {
        sigma_x: args.sigma_x,
        rho: args.rho,
        sigma_e: args.sigma_e,
        mu0: args.mu0,
    };
    let ds = generate_synthetic(&model, args.devices, args.measurements, args.seed).map_err(|e| match e {
        RoDataError::InvalidModel(m) => CliError::Usage(m),
        other => data_err(other),
    })?;
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).map_err(data_err)?;
    run.write(&args.out, &buf)?;
    run.finish(&manifest_path_for(&args.out))?;
    println!(
        "wrote {} devices × {} measurements to {}",
        ds.devices(),
        ds.measurements(),
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalSummary {
    transform_id: Option<usize>,
    bits_per_coeff: u8,
    devices: usize,
    measurements: usize,
    response_bits: usize,
    ones_fraction: f64,
    uniqueness_mean: Option<f64>,
    uniqueness_variance: Option<f64>,
    randomness_pass_rate: f64,
    p_max: Option<f64>,
    p_mean: Option<f64>,
    reference: serde_json::Value,
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let mut run = Run::new("eval", args, None);
    let ds = load_dataset(&mut run, &args.dataset)?;
    let (t, id) = resolve_transform(&mut run, &args.transform)?;
    let q = quantizer(args.bits_per_coeff)?;
    let eq = fit_equalization(&ds, &t).map_err(data_err)?;
    let seqs = extract_dataset(&ds, 0, &t, &eq, &q).map_err(data_err)?;
    let n = seqs[0].len();
    let ones: usize = seqs.iter().map(|s| s.weight()).sum();
    let (u_mean, u_var) = match uniqueness(&seqs) {
        Ok((m, v)) => (Some(m), Some(v)),
        Err(_) => (None, None),
    };
    let passed = seqs
        .iter()
        .map(randomness_smoke)
        .collect::<Result<Vec<_>, _>>()
        .map_err(data_err)?
        .iter()
        .filter(|r| r.passed())
        .count();

    ensure_dir(&args.out)?;
    run.write(&args.out.join("equalization.json"), eq.to_json().as_bytes())?;
    let profile = if ds.measurements() >= 2 && args.bits_per_coeff == 1 {
        let p = ropuf_core::estimate_error_profile(&ds, &t, &eq, &q).map_err(data_err)?;
        run.write(&args.out.join("profile.json"), p.to_json().as_bytes())?;
        run.write(&args.out.join("profile.csv"), p.to_csv().as_bytes())?;
        Some(p)
    } else {
        None
    };
    let summary = EvalSummary {
        transform_id: id,
        bits_per_coeff: args.bits_per_coeff,
        devices: ds.devices(),
        measurements: ds.measurements(),
        response_bits: n,
        ones_fraction: ones as f64 / (n * seqs.len()) as f64,
        uniqueness_mean: u_mean,
        uniqueness_variance: u_var,
        randomness_pass_rate: passed as f64 / seqs.len() as f64,
        p_max: profile.as_ref().map(|p| p.p_max),
        p_mean: profile.as_ref().map(|p| p.p_mean),
        reference: json!({
            "p_max": reference::P_MAX_ST,
            "p_mean": reference::P_MEAN_ST,
            "uniqueness_mean": reference::UNIQUENESS_MEAN_ST,
            "uniqueness_variance": reference::UNIQUENESS_VARIANCE_ST,
        }),
    };
    run.write(&args.out.join("summary.json"), &json_line(&summary))?;
    run.finish(&args.out.join("manifest.json"))?;

    println!("ones fraction: {:.4}", summary.ones_fraction);
    if let (Some(m), Some(v)) = (u_mean, u_var) {
        println!("uniqueness: mean {m:.4}, variance {v:.3e}");
    }
    println!("randomness smoke pass rate: {:.3}", summary.randomness_pass_rate);
    if let Some(p) = &profile {
        println!("p_max {:.4e}, p_mean {:.4e}", p.p_max, p.p_mean);
    }
    Ok(())
}

pub fn select(args: &SelectArgs) -> Result<(), CliError> {
    let mut run = Run::new("select", args, args.seed);
    let ds = load_dataset(&mut run, &args.dataset)?;
    let catalog = load_catalog(&mut run, &args.catalog)?;
    let q = quantizer(1)?;
    let mode = match (args.subset, args.seed) {
        (Some(count), Some(seed)) => SelectionMode::Subset { count, seed },
        (Some(_), None) => return Err(CliError::Usage("--subset requires --seed".into())),
        (None, _) => SelectionMode::Full,
    };
    let result = select_transform(&catalog, &ds, &q, mode).map_err(data_err)?;
    let dwht = match catalog.dwht_id() {
        Some(id) => evaluate_members(&catalog, &[id], &ds, &q)
            .map_err(data_err)?
            .pop()
            .map(|c| (id, c.profile.p_max)),
        None => None,
    };
    let winner = &catalog.get(result.transform_id).expect("selected from catalog").matrix;
    let eq = fit_equalization(&ds, winner).map_err(data_err)?;

    ensure_dir(&args.out)?;
    let summary = json!({
        "transform_id": result.transform_id,
        "p_max": result.profile.p_max,
        "p_mean": result.profile.p_mean,
        "mode": result.mode,
        "evaluated": result.evaluated,
        "dwht_id": dwht.map(|d| d.0),
        "dwht_p_max": dwht.map(|d| d.1),
    });
    run.write(&args.out.join("selection.json"), &json_line(&summary))?;
    run.write(&args.out.join("profile.json"), result.profile.to_json().as_bytes())?;
    run.write(&args.out.join("equalization.json"), eq.to_json().as_bytes())?;
    run.finish(&args.out.join("manifest.json"))?;

    println!(
        "selected transform {} (p_max {:.4e}, p_mean {:.4e}) from {} members",
        result.transform_id, result.profile.p_max, result.profile.p_mean, result.evaluated
    );
    if let Some((id, p)) = dwht {
        println!("Walsh-Hadamard member {id}: p_max {p:.4e}");
    }
    Ok(())
}

pub fn enroll(args: &EnrollArgs) -> Result<(), CliError> {
    let mut run = Run::new("enroll", args, Some(args.seed));
    let ds = load_dataset(&mut run, &args.dataset)?;
    let (t, id) = resolve_transform(&mut run, &args.transform)?;
    let q = quantizer(args.bits_per_coeff)?;
    let code = code(args.code)?;
    if code.n() != (RO_COUNT - 1) * usize::from(args.bits_per_coeff) {
        return Err(CliError::Usage(format!(
            "code length {} does not match {} response bits",
            code.n(),
            (RO_COUNT - 1) * usize::from(args.bits_per_coeff)
        )));
    }
    let x_array = measurement_array(&ds, args.device, args.measurement)?;

    let (eq, profile_ref) = match &args.equalization {
        Some(path) => {
            let text = run.read(path)?;
            let eq = EqualizationProfile::from_json(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            (eq, sha256_ref(text.as_bytes()))
        }
        None => {
            let eq = fit_equalization(&ds, &t).map_err(data_err)?;
            let text = eq.to_json();
            let mut path = args.out.as_os_str().to_owned();
            path.push(".equalization.json");
            run.write(Path::new(&path), text.as_bytes())?;
            (eq, sha256_ref(text.as_bytes()))
        }
    };
    let x = extract_bits(x_array, &t, &eq, &q).map_err(data_err)?;
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let key = SecretKey::random(code.k(), &mut rng);
    let mut helper = fcs::enroll(&code, &key, &x).map_err(data_err)?.with_profile_ref(profile_ref);
    if let Some(id) = id {
        helper = helper.with_transform(id);
    }
    run.write(&args.out, helper.to_json().as_bytes())?;
    run.finish(&manifest_path_for(&args.out))?;
    println!("{}", key.to_hex());
    Ok(())
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<(), CliError> {
    let mut run = Run::new("reconstruct", args, None);
    let ds = load_dataset(&mut run, &args.dataset)?;
    let helper_text = run.read(&args.helper)?;
    let helper = HelperData::from_json(&helper_text)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.helper.display())))?;
    let code = BchCode::from_descriptor(&helper.code).map_err(data_err)?;
    let eq_text = run.read(&args.equalization)?;
    if let Some(expected) = &helper.profile_ref {
        if &sha256_ref(eq_text.as_bytes()) != expected {
            return Err(CliError::Data(format!(
                "{} does not match the helper's profile_ref {expected}",
                args.equalization.display()
            )));
        }
    }
    let eq = EqualizationProfile::from_json(&eq_text)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.equalization.display())))?;
    let transform_args = TransformArgs {
        catalog: args.catalog.clone(),
        transform_id: helper.transform_id,
    };
    if helper.transform_id.is_some() && args.catalog.is_none() {
        return Err(CliError::Usage("helper data names a catalog member; pass --catalog".into()));
    }
    let (t, _) = resolve_transform(&mut run, &transform_args)?;
    if code.n() % (RO_COUNT - 1) != 0 || code.n() / (RO_COUNT - 1) > 8 {
        return Err(CliError::Data(format!(
            "code length {} is not a whole number of bits per coefficient",
            code.n()
        )));
    }
    let q = quantizer((code.n() / (RO_COUNT - 1)) as u8)?;
    let y = extract_bits(measurement_array(&ds, args.device, args.measurement)?, &t, &eq, &q)
        .map_err(data_err)?;
    match fcs::reconstruct(&code, &y, &helper).map_err(data_err)? {
        Reconstruction::Key(key) => {
            if let Some(out) = &args.out {
                run.write(out, format!("{}\n", key.to_hex()).as_bytes())?;
                run.finish(&manifest_path_for(out))?;
            }
            println!("{}", key.to_hex());
            Ok(())
        }
        Reconstruction::Failure => Err(CliError::DecodeFailure),
    }
}

pub fn analyze_code(args: &AnalyzeCodeArgs) -> Result<(), CliError> {
    let mut run = Run::new("analyze-code", args, None);
    let profile = match &args.profile {
        Some(path) => {
            let text = run.read(path)?;
            Some(
                CoefficientErrorProfile::from_json(&text)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let p_max = match (&profile, args.p_max) {
        (Some(p), _) => p.p_max,
        (None, Some(p)) => p,
        (None, None) => return Err(CliError::Usage("pass --p-max or --profile".into())),
    };
    if let Some(p) = &profile {
        if p.p.len() != args.n {
            return Err(CliError::Data(format!(
                "profile has {} entries, --n is {}",
                p.p.len(),
                args.n
            )));
        }
    }
    let d = required_min_distance(args.n, p_max, args.target).map_err(analysis_err)?;
    let gv = gv_dimension(args.n, d).map_err(analysis_err)?;
    let t = args.t.unwrap_or((d - 1) / 2);
    if t > args.n {
        return Err(CliError::Usage(format!("--t {t} exceeds n = {}", args.n)));
    }
    let bound = binomial_tail(args.n, p_max, t).map_err(analysis_err)?;
    let (dftcf, dp) = match &profile {
        Some(p) => (
            Some(block_error_probability_dftcf(&p.p, t).map_err(analysis_err)?),
            Some(block_error_probability_dp(&p.p, t).map_err(analysis_err)?),
        ),
        None => (None, None),
    };
    let report = json!({
        "n": args.n,
        "p_max": p_max,
        "target": args.target,
        "required_d_min": d,
        "gv_dimension": gv,
        "t": t,
        "block_error_binomial_bound": bound,
        "block_error_dftcf": dftcf,
        "block_error_dp": dp,
    });
    if let Some(out) = &args.out {
        run.write(out, &json_line(&report))?;
        run.finish(&manifest_path_for(out))?;
    }
    println!("required d_min: {d}");
    println!("GV dimension: {gv}");
    println!("block error at t = {t}: {bound:.4e} (binomial at p_max)");
    if let (Some(a), Some(b)) = (dftcf, dp) {
        println!("block error at t = {t}: {a:.4e} (DFT-CF), {b:.4e} (DP)");
    }
    Ok(())
}

fn point_json(p: RatePoint) -> serde_json::Value {
    json!({ "r_s": p.r_s, "r_ell": p.r_ell })
}

pub fn rate_region(args: &RateRegionArgs) -> Result<(), CliError> {
    let mut run = Run::new("rate-region", args, None);
    let fcs = fcs_region(args.p, args.grid).map_err(analysis_err)?;
    let cs = cs_region_mgl(args.p, args.grid).map_err(analysis_err)?;
    let finite = finite_length_point(args.n, args.p, args.eps).map_err(analysis_err)?;
    let start = cs_point(args.p, 0.0).map_err(analysis_err)?;
    let code = code(args.code)?;
    let rates = CodeRates {
        n: code.n(),
        k: code.k(),
    };
    let best = fcs.max_secret_key_rate().expect("non-empty region");
    let (s_num, s_den) = rates.secret_key_rate();
    let (l_num, l_den) = rates.privacy_leakage_rate();
    let bch = rates.point();

    ensure_dir(&args.out)?;
    run.write(&args.out.join("fcs_region.csv"), fcs.to_csv().as_bytes())?;
    run.write(&args.out.join("cs_region.csv"), cs.to_csv().as_bytes())?;
    let summary = json!({
        "p": args.p,
        "eps": args.eps,
        "n": args.n,
        "fcs_max": point_json(best),
        "cs_alpha_zero": point_json(start),
        "finite_length": point_json(finite),
        "bch": {
            "n": rates.n,
            "k": rates.k,
            "t": code.t(),
            "r_s": format!("{s_num}/{s_den}"),
            "r_ell": format!("{l_num}/{l_den}"),
            "r_s_value": bch.r_s,
            "r_ell_value": bch.r_ell,
        },
    });
    run.write(&args.out.join("summary.json"), &json_line(&summary))?;
    run.finish(&args.out.join("manifest.json"))?;

    println!("max R_s: {:.6} (R_l = {:.6})", best.r_s, best.r_ell);
    println!(
        "finite-length point (n = {}, eps = {:e}): R_s = {:.6}",
        args.n, args.eps, finite.r_s
    );
    println!(
        "BCH({},{}) point: ({s_num}/{s_den}, {l_num}/{l_den}) = ({:.3}, {:.3})",
        rates.n, rates.k, bch.r_s, bch.r_ell
    );
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut run = Run::new("simulate", args, Some(args.seed));
    let code = code(args.code)?;
    let report = match (&args.profile, args.p, &args.dataset) {
        (Some(path), None, None) => {
            let text = run.read(path)?;
            let profile = CoefficientErrorProfile::from_json(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            fcs::simulate(&code, &ErrorSource::Profile(&profile), args.trials, args.seed)
        }
        (None, Some(p), None) => {
            let profile = CoefficientErrorProfile::constant(p, code.n())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            fcs::simulate(&code, &ErrorSource::Profile(&profile), args.trials, args.seed)
        }
        (None, None, Some(path)) => {
            let ds = load_dataset(&mut run, path)?;
            let (t, _) = resolve_transform(&mut run, &args.transform)?;
            let eq = fit_equalization(&ds, &t).map_err(data_err)?;
            let q = quantizer(args.bits_per_coeff)?;
            let source = ErrorSource::Dataset {
                dataset: &ds,
                transform: &t,
                equalization: &eq,
                quantizer: &q,
            };
            fcs::simulate(&code, &source, args.trials, args.seed)
        }
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --profile, --p or --dataset".into(),
            ))
        }
    }
    .map_err(data_err)?;
    if let Some(out) = &args.out {
        run.write(out, &json_line(&report))?;
        run.finish(&manifest_path_for(out))?;
    }
    let rate = |r: &fcs::RateEstimate| format!("{:.4e} [{:.4e}, {:.4e}]", r.rate, r.lower, r.upper);
    println!("trials: {}", report.trials);
    println!("block error: {}", rate(&report.block_error));
    println!("decode failure: {}", rate(&report.decode_failure));
    println!("wrong key: {}", rate(&report.wrong_key));
    Ok(())
}
