use std::path::PathBuf;

use fishnet::mc::count_prepeak_failures;
use fishnet::models::{
    bundle_series_cdf, calibrate_params, sigma_transition, weakest_link_cdf, CalibrationOptions, ModelKind,
};
use fishnet::numeric::log_grid;
use fishnet::report::{cdf_table, curve_table, eta_table, hist_table, models_table, samples_table, Table};
use fishnet::solver::Solver;
use fishnet::{build_mesh, run_batch, DamageState, EmpiricalDistribution, FishnetMesh, ModelParams, RunConfig, StrengthDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, ModelsConfig};
use crate::output::Outputs;
use crate::plot::{figure_from_csv, render, Csv};
use crate::{CliError, PlotArgs, RunArgs, SampleArgs};

struct Loaded {
    config: ExperimentConfig,
    out: PathBuf,
}

fn load(args: &RunArgs) -> Result<Loaded, CliError> {
    let mut config = ExperimentConfig::load(&args.config)?.normalized()?;
    if let Some(s) = config.sampling.as_mut() {
        if let Some(n) = args.samples {
            s.count = n;
        }
        if let Some(seed) = args.seed {
            s.seed = seed;
        }
    }
    let out = match (&args.out, &config.output) {
        (Some(p), _) => p.clone(),
        (None, Some(o)) => PathBuf::from(&o.directory),
        (None, None) => return Err(CliError::Config("missing key output.directory (or pass --out)".into())),
    };
    Ok(Loaded { config, out })
}

fn threads(args: &RunArgs, config: &ExperimentConfig) -> Result<usize, CliError> {
    if let Some(t) = args.threads.or(config.sampling.as_ref().and_then(|s| s.threads)) {
        return Ok(t);
    }
    match std::env::var("FISHNET_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("FISHNET_THREADS must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// Config echo for the manifest; the thread count never affects results and is left out.
fn echo(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    if let Some(s) = c.sampling.as_mut() {
        s.threads = None;
    }
    c.output = None;
    c
}

fn manifest(outputs: &mut Outputs, command: &str, config: &ExperimentConfig, extra: serde_json::Value) -> Result<(), CliError> {
    let mut files = outputs.names();
    files.push("run-manifest.json".into());
    let value = json!({
        "tool": "fishnet",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": echo(config),
        "details": extra,
        "files": files,
    });
    outputs.json("run-manifest.json", &value)
}

fn run_config(config: &ExperimentConfig, threads: usize) -> Result<RunConfig, CliError> {
    let g = config.geometry()?;
    let s = config.sampling()?;
    if s.count == 0 {
        return Err(CliError::Config("sampling.count must be at least 1".into()));
    }
    Ok(RunConfig {
        record_curves: s.record_curves,
        threads,
        ..RunConfig::new(g.to_geometry(), config.distribution()?.build()?, s.count, s.seed)
    })
}

/// Model constants from `[models]`: calibrated on a mesh, or the first
/// listed `(η_a, ν₁)` pair.
fn model_sets(m: &ModelsConfig, p1: &StrengthDistribution, n_links: usize) -> Result<(Vec<ModelParams>, Option<serde_json::Value>), CliError> {
    let second = |p: ModelParams| -> Result<ModelParams, CliError> {
        match (m.eta_b, m.nu2, m.eta2) {
            (None, None, None) => Ok(p),
            (eb, n2, e2) => p
                .with_second_failure(eb.unwrap_or(p.eta_b), n2.unwrap_or(p.nu2), e2.unwrap_or(p.eta2))
                .map_err(|e| CliError::Config(format!("models: {e}"))),
        }
    };
    if m.calibrate {
        if !m.eta_a.is_empty() || !m.nu1.is_empty() {
            return Err(CliError::Config("models.calibrate excludes explicit eta_a/nu1 lists".into()));
        }
        let [rows, cols] = m.calibration_mesh;
        let mesh = build_mesh(fishnet::FishnetGeometry::new(rows, cols)).map_err(|e| CliError::Config(e.to_string()))?;
        let c = calibrate_params(&mesh, p1, &CalibrationOptions::default())?;
        let params = second(c.params.with_links(n_links)?)?;
        let json = serde_json::to_value(&c).map_err(fishnet::Error::from)?;
        return Ok((vec![params], Some(json)));
    }
    if m.eta_a.is_empty() {
        return Err(CliError::Config("missing key models.eta_a (or set models.calibrate)".into()));
    }
    if m.nu1.is_empty() {
        return Err(CliError::Config("missing key models.nu1 (or set models.calibrate)".into()));
    }
    let mut sets = Vec::new();
    for &eta in &m.eta_a {
        for &nu in &m.nu1 {
            let p = ModelParams::new(n_links, nu, eta).map_err(|e| CliError::Config(format!("models: {e}")))?;
            sets.push(second(p)?);
        }
    }
    Ok((sets, None))
}

pub fn simulate(args: &RunArgs) -> Result<String, CliError> {
    let Loaded { config, out } = load(args)?;
    let rc = run_config(&config, threads(args, &config)?)?;
    let n_links = rc.geometry.link_count();
    let (params, models) = match &config.models {
        Some(m) => {
            let n = m.n_links.unwrap_or(n_links);
            let (sets, _) = model_sets(m, &rc.distribution, n)?;
            (sets[0], fishnet::report::MODEL_COLUMNS.to_vec())
        }
        None => (
            ModelParams::new(n_links, 1, 1.0)?,
            vec![ModelKind::WeakestLink, ModelKind::Bundle],
        ),
    };
    let bins = config.sampling()?.hist_bins;
    if bins < 2 {
        return Err(CliError::Config("sampling.hist_bins must be at least 2".into()));
    }
    let records = run_batch(&rc)?;
    let e = EmpiricalDistribution::from_records(&records)?;
    let mu_p = count_prepeak_failures(&records)?;

    let mut o = Outputs::create(&out)?;
    o.table("samples.csv", &samples_table(&records))?;
    o.table("cdf.csv", &cdf_table(&e, &rc.distribution, &params, &models))?;
    o.table("hist.csv", &hist_table(&e, bins)?)?;
    if rc.record_curves {
        for r in &records {
            o.table(&format!("curves/{}.csv", r.sample_id), &curve_table(r))?;
        }
    }
    let details = json!({
        "master_seed": rc.master_seed,
        "sample_count": rc.sample_count,
        "model_params": params,
        "mean_peak_stress": e.mean(),
        "mean_prepeak_failures": mu_p,
    });
    manifest(&mut o, "simulate", &config, details)?;
    let summary = format!(
        "simulate: {} samples on {}x{}, mean peak {:.4}, mean pre-peak failures {:.3} -> {}",
        rc.sample_count,
        rc.geometry.rows,
        rc.geometry.cols,
        e.mean(),
        mu_p,
        o.dir().display()
    );
    o.commit();
    Ok(summary)
}

#[derive(Serialize)]
struct TransitionEntry {
    file: String,
    params: ModelParams,
    sigma_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

pub fn models(args: &RunArgs) -> Result<String, CliError> {
    let Loaded { config, out } = load(args)?;
    let p1 = config.distribution()?.build()?;
    let m = config.models()?;
    let n_links = match (m.n_links, &config.geometry) {
        (Some(n), _) => n,
        (None, Some(g)) => g.rows * g.cols,
        (None, None) => return Err(CliError::Config("missing key models.n_links".into())),
    };
    if n_links == 0 {
        return Err(CliError::Config("models.n_links must be positive".into()));
    }
    let lo = match m.sigma_min {
        Some(v) => v,
        None => p1.inverse_cdf(1e-12)?,
    };
    let hi = match m.sigma_max {
        Some(v) => v,
        None => p1.inverse_cdf(1.0 - 1e-6)?,
    };
    if !(lo > 0.0 && hi > lo) || m.points < 2 {
        return Err(CliError::Config(format!(
            "models grid needs 0 < sigma_min < sigma_max and points >= 2, got [{lo}, {hi}] with {}",
            m.points
        )));
    }
    let (sets, calibration) = model_sets(m, &p1, n_links)?;
    let grid = log_grid(lo, hi, m.points);

    let mut o = Outputs::create(&out)?;
    let mut transitions = Vec::new();
    for (k, p) in sets.iter().enumerate() {
        let file = if k == 0 { "models.csv".to_string() } else { format!("models_set{k}.csv") };
        o.table(&file, &models_table(&p1, p, &grid))?;
        let (sigma_t, note) = match sigma_transition(&p1, p.eta_a, p.nu1) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e.to_string())),
        };
        transitions.push(TransitionEntry {
            file,
            params: *p,
            sigma_t,
            note,
        });
    }
    o.json("sigma_T.json", &transitions)?;
    if let Some(c) = &calibration {
        o.json("calibration.json", c)?;
    }
    manifest(&mut o, "models", &config, json!({ "n_links": n_links, "sets": sets.len() }))?;
    let summary = format!(
        "models: {} parameter set(s), {} stresses on [{lo:.4}, {hi:.4}] -> {}",
        sets.len(),
        grid.len(),
        o.dir().display()
    );
    o.commit();
    Ok(summary)
}

fn damage_links(spec: &str, mesh: &FishnetMesh) -> Result<Vec<usize>, CliError> {
    let (m, n) = (mesh.rows(), mesh.cols());
    let bad = |msg: String| CliError::Config(format!("eta.damage: {msg}"));
    let spec = spec.trim();
    if spec == "none" {
        return Ok(Vec::new());
    }
    if spec == "center" {
        return Ok(vec![mesh.link_id(m / 2, n / 2)]);
    }
    if let Some(k) = spec.strip_prefix("slit:") {
        let k: usize = k.trim().parse().map_err(|_| bad(format!("bad slit length {k:?}")))?;
        if k == 0 || k >= m {
            return Err(bad(format!("slit length must be in 1..{m}, got {k}")));
        }
        let r0 = m / 2 - k / 2;
        return Ok((r0..r0 + k).map(|r| mesh.link_id(r, n / 2)).collect());
    }
    if let Some(list) = spec.strip_prefix("links:") {
        let links = list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad(format!("bad link id {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(l) = links.iter().find(|&&l| l >= mesh.link_count()) {
            return Err(bad(format!("link {l} out of range")));
        }
        return Ok(links);
    }
    Err(bad(format!("expected none, center, slit:k or links:a,b,..., got {spec:?}")))
}

pub fn eta(args: &RunArgs) -> Result<String, CliError> {
    let Loaded { config, out } = load(args)?;
    let g = config.geometry()?.to_geometry();
    let spec = config
        .eta
        .as_ref()
        .ok_or_else(|| CliError::Config("missing table [eta]".into()))?;
    let mesh = build_mesh(g).map_err(|e| CliError::Config(e.to_string()))?;
    let failed = damage_links(&spec.damage, &mesh)?;
    let damage = DamageState::from_links(mesh.link_count(), &failed)?;
    let field = Solver::new(&mesh).solve(damage.mask())?;
    let survivors: Vec<f64> = (0..mesh.link_count())
        .filter(|&l| !damage.is_failed(l))
        .map(|l| field.eta[l])
        .collect();
    let eta_max = survivors.iter().copied().fold(f64::MIN, f64::max);
    let eta_min = survivors.iter().copied().fold(f64::MAX, f64::min);
    let threshold = CalibrationOptions::default().threshold;
    let amplified = survivors.iter().filter(|&&e| e >= threshold).count();
    let calibration = match &config.distribution {
        Some(d) => Some(serde_json::to_value(calibrate_params(&mesh, &d.build()?, &CalibrationOptions::default())?).map_err(fishnet::Error::from)?),
        None => None,
    };
    let summary_json = json!({
        "damage": failed,
        "eta_max": eta_max,
        "eta_min": eta_min,
        "amplified_links": amplified,
        "threshold": threshold,
        "calibration": calibration,
    });

    let mut o = Outputs::create(&out)?;
    o.table("eta.csv", &eta_table(&mesh, &field))?;
    o.json("calibration.json", &summary_json)?;
    manifest(&mut o, "eta", &config, json!({ "damage": spec.damage }))?;
    let summary = format!(
        "eta: {} failed link(s) on {}x{}, eta_max {eta_max:.4}, eta_min {eta_min:.4}, {amplified} links >= {threshold} -> {}",
        failed.len(),
        g.rows,
        g.cols,
        o.dir().display()
    );
    o.commit();
    Ok(summary)
}

pub fn shape_sweep(args: &RunArgs) -> Result<String, CliError> {
    let Loaded { config, out } = load(args)?;
    let p1 = config.distribution()?.build()?;
    let sweep = config.sweep()?;
    let sampling = config.sampling()?;
    let threads = threads(args, &config)?;
    if sweep.shapes.is_empty() {
        return Err(CliError::Config("sweep.shapes is empty".into()));
    }
    if sweep.points < 2 {
        return Err(CliError::Config("sweep.points must be at least 2".into()));
    }
    if let Some([m, n]) = sweep.shapes.iter().find(|[m, n]| m * n != sweep.n_links) {
        return Err(CliError::Config(format!(
            "shape {m}x{n} does not hold {} links",
            sweep.n_links
        )));
    }
    let mut curves = Vec::new();
    for &[m, n] in &sweep.shapes {
        let rc = RunConfig {
            threads,
            ..RunConfig::new(fishnet::FishnetGeometry::new(m, n), p1.clone(), sampling.count, sampling.seed)
        };
        if rc.sample_count == 0 {
            return Err(CliError::Config("sampling.count must be at least 1".into()));
        }
        curves.push(EmpiricalDistribution::from_records(&run_batch(&rc)?)?);
    }
    let lo = curves.iter().map(|e| e.min()).fold(f64::MAX, f64::min);
    let hi = curves.iter().map(|e| e.max()).fold(f64::MIN, f64::max);
    let grid = if hi > lo { log_grid(lo, hi, sweep.points) } else { vec![lo] };
    let mut headers: Vec<String> = vec!["sigma".into()];
    headers.extend(sweep.shapes.iter().map(|[m, n]| format!("Pf_{m}x{n}")));
    headers.push("Pf_chain_model".into());
    headers.push("Pf_bundle_model".into());
    let mut t = Table::new(headers);
    for &s in &grid {
        let mut row = vec![Some(s)];
        row.extend(curves.iter().map(|e| Some(e.cdf(s))));
        row.push(Some(weakest_link_cdf(&p1, sweep.n_links, s)));
        row.push(Some(bundle_series_cdf(&p1, sweep.n_links, s)));
        t.push(row);
    }
    let means: Vec<serde_json::Value> = sweep
        .shapes
        .iter()
        .zip(&curves)
        .map(|([m, n], e)| json!({ "rows": m, "cols": n, "mean_peak_stress": e.mean() }))
        .collect();

    let mut o = Outputs::create(&out)?;
    o.table("transition.csv", &t)?;
    manifest(
        &mut o,
        "shape-sweep",
        &config,
        json!({ "master_seed": sampling.seed, "sample_count": sampling.count, "shapes": means }),
    )?;
    let summary = format!(
        "shape-sweep: {} shapes of {} links, {} samples each -> {}",
        sweep.shapes.len(),
        sweep.n_links,
        sampling.count,
        o.dir().display()
    );
    o.commit();
    Ok(summary)
}

pub fn plot(args: &PlotArgs) -> Result<String, CliError> {
    let csv = Csv::read(&args.input)?;
    let fig = figure_from_csv(&csv, args.linear)?;
    let svg = render(&fig);
    let out = args.out.clone().unwrap_or_else(|| args.input.with_extension("svg"));
    std::fs::write(&out, svg)?;
    Ok(format!("plot: {} series -> {}", fig.series.len(), out.display()))
}

/// Two-sided KS critical value at the 99% level.
fn ks_critical(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn sample_dist(args: &SampleArgs) -> Result<String, CliError> {
    let config = ExperimentConfig::load(&args.config)?.normalized()?;
    let p1 = config.distribution()?.build()?;
    if args.count < 2 {
        return Err(CliError::Config("--count must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut v: Vec<f64> = (0..args.count).map(|_| p1.sample(&mut rng)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (k, &x) in v.iter().enumerate() {
        let c = p1.cdf(x)?;
        d = d.max((c - k as f64 / n).abs()).max(((k + 1) as f64 / n - c).abs());
    }
    let crit = ks_critical(args.count);
    let line = format!(
        "sample-dist: {} draws of {}, KS D = {d:.6}, 99% critical {crit:.6}",
        args.count,
        p1.family()
    );
    if d < crit {
        Ok(format!("{line}, pass"))
    } else {
        Err(CliError::Run(fishnet::Error::Internal(format!("{line}, fail"))))
    }
}
