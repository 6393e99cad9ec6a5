//! Subcommand implementations. Each returns whether the run succeeded.

use std::f64::consts::PI;
use std::io::Write;

use anyhow::{bail, Context, Result};
use s3radon::harmonics::HarmonicOdf;
use s3radon::io::{fmt_f64, load_model, model_to_json, read_samples, write_samples};
use s3radon::kernels::{kernel_coeff, kernel_double_radon, kernel_radon, kernel_value};
use s3radon::reconstruction::{
    center_dictionary, evaluate_odf, fit_harmonic, fit_rbf, forward_w, synthesize_samples,
    synthesize_samples_quadrature, DesignGrid, OdfModel,
};
use s3radon::transforms::{radon_hr, w_transform};
use s3radon::verify::{errored, run_criterion, run_suite, VerifyConfig};
use s3radon::{KernelKind, KernelSpec};
use serde_json::json;

use crate::config::{parse_grid, sink, RunConfig};
use crate::{Common, FitArgs, Kernel, KernelArgs, Method, SimulateArgs, Table, TransformArgs, VerifyArgs};

fn kernel_spec(kind: Kernel, kappa: f64) -> Result<KernelSpec> {
    let kind = match kind {
        Kernel::Dlvp => KernelKind::DeLaValleePoussin,
        Kernel::AbelPoisson => KernelKind::AbelPoisson,
    };
    Ok(KernelSpec::new(kind, kappa)?)
}

fn load(path: &std::path::Path) -> Result<OdfModel> {
    load_model(path).with_context(|| format!("loading model {}", path.display()))
}

pub fn simulate(common: &Common, a: &SimulateArgs) -> Result<bool> {
    let mut cfg = RunConfig::new("simulate", common)?;
    cfg.set_file("model-sha256", &a.model)?;
    let model = load(&a.model)?;
    let design = match (&a.grid, a.samples) {
        (Some(g), _) => {
            cfg.set("grid", g);
            let (nh, nr, nrho) = parse_grid(g)?;
            DesignGrid::product(nh, nr, nrho)
        }
        (None, Some(n)) => {
            cfg.set("samples", n);
            DesignGrid::random(n, common.seed)
        }
        (None, None) => bail!("simulate needs --grid or --samples"),
    };
    cfg.set_f64("noise", a.noise);
    cfg.set("quadrature", a.quadrature);
    let noise_seed = common.seed.wrapping_add(1);
    let records = if a.quadrature {
        let f = |q| evaluate_odf(&model, q);
        synthesize_samples_quadrature(&f, &design, a.noise, noise_seed, &cfg.rules)?
    } else {
        synthesize_samples(&model, &design, a.noise, noise_seed)?
    };
    let mut out = sink(common.output.as_deref())?;
    write_samples(&mut out, &records, cfg.unit, &cfg.header())?;
    out.flush()?;
    Ok(true)
}

pub fn transform(common: &Common, a: &TransformArgs) -> Result<bool> {
    let mut cfg = RunConfig::new("transform", common)?;
    cfg.set_file("model-sha256", &a.model)?;
    cfg.set("grid", &a.grid);
    cfg.set("quadrature", a.quadrature);
    let model = load(&a.model)?;
    let (nh, nr, nrho) = parse_grid(&a.grid)?;
    let design = DesignGrid::product(nh, nr, nrho);
    let f = |q| evaluate_odf(&model, q);

    let mut out = sink(common.output.as_deref())?;
    for line in cfg.header() {
        writeln!(out, "# {line}")?;
    }
    let col = match cfg.unit {
        s3radon::io::AngleUnit::Degrees => "rho_deg",
        s3radon::io::AngleUnit::Radians => "rho_rad",
    };
    writeln!(out, "hx,hy,hz,rx,ry,rz,{col},radon,w")?;
    for &(h, r, rho) in &design.probes {
        let radon = radon_hr(&f, h, r, &cfg.rules);
        let w = if a.quadrature { w_transform(&f, h, r, rho, &cfg.rules)? } else { forward_w(&model, h, r, rho)? };
        let fields = [h.x, h.y, h.z, r.x, r.y, r.z, cfg.unit.from_radians(rho), radon, w];
        let line: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(true)
}

pub fn fit(common: &Common, a: &FitArgs) -> Result<bool> {
    let mut cfg = RunConfig::new("fit", common)?;
    cfg.set_file("input-sha256", &a.input)?;
    cfg.set_f64("ridge", a.ridge);
    let file = std::fs::File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let samples = read_samples(std::io::BufReader::new(file))
        .with_context(|| format!("reading samples {}", a.input.display()))?;
    if samples.is_empty() {
        bail!("{} holds no samples", a.input.display());
    }

    let (model, report) = match a.method {
        Method::Rbf => {
            let spec = kernel_spec(a.kernel, a.kappa)?;
            let centers = match &a.dictionary {
                Some(p) => {
                    cfg.set_file("dictionary-sha256", p)?;
                    match load(p)? {
                        OdfModel::Rbf(m) => m.components().iter().map(|c| c.center).collect(),
                        _ => bail!("dictionary {} is not an rbf model", p.display()),
                    }
                }
                None => {
                    cfg.set("centers", a.centers);
                    center_dictionary(a.centers, common.seed)?
                }
            };
            cfg.set("kernel", format!("{:?}", spec.kind()));
            cfg.set_f64("kappa", spec.kappa());
            cfg.set("nonneg", a.nonneg);
            let fit = fit_rbf(&samples, &centers, &spec, a.ridge, a.nonneg)?;
            let Some(mixture) = fit.mixture else {
                bail!("fitted weights sum to zero; no normalized model exists");
            };
            let report = json!({
                "method": "rbf",
                "samples": samples.len(),
                "unknowns": centers.len(),
                "residual_rms": fit.residual_rms,
                "condition": fit.condition,
                "ridge": a.ridge,
                "regularization": "tikhonov ridge on the weights",
                "nonneg": a.nonneg,
                "weight_scale": fit.scale,
                "weights": mixture.components().iter().map(|c| c.weight).collect::<Vec<_>>(),
            });
            (OdfModel::Rbf(mixture), report)
        }
        Method::Harmonic => {
            cfg.set("degree", a.degree);
            let fit = fit_harmonic(&samples, a.degree, a.ridge)?;
            let report = json!({
                "method": "harmonic",
                "samples": samples.len(),
                "degree": a.degree,
                "unknowns": fit.table.len(),
                "residual_rms": fit.residual_rms,
                "condition": fit.condition,
                "ridge": a.ridge,
                "regularization": "tikhonov ridge on the coefficients",
            });
            (OdfModel::Harmonic(HarmonicOdf::new(fit.table)), report)
        }
    };
    let mut report = report;
    report["config_sha256"] = json!(cfg.hash());

    let mut out = sink(common.output.as_deref())?;
    writeln!(out, "{}", model_to_json(&model)?)?;
    out.flush()?;
    let text = serde_json::to_string_pretty(&report)?;
    match &a.report {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))?,
        None => eprintln!("{text}"),
    }
    Ok(true)
}

pub fn kernels(common: &Common, a: &KernelArgs) -> Result<bool> {
    let mut cfg = RunConfig::new("kernels", common)?;
    let specs = a.kappa.iter().map(|&k| kernel_spec(a.kernel, k)).collect::<Result<Vec<_>>>()?;
    cfg.set("kernel", format!("{:?}", a.kernel));
    cfg.set("kappa", a.kappa.iter().map(|k| format!("{k:e}")).collect::<Vec<_>>().join(","));
    cfg.set("table", format!("{:?}", a.table));
    let mut out = sink(common.output.as_deref())?;
    match a.table {
        Table::Coeffs => {
            cfg.set("degree", a.degree);
            for line in cfg.header() {
                writeln!(out, "# {line}")?;
            }
            writeln!(out, "kappa,l,a_l")?;
            for s in &specs {
                for l in 0..=a.degree {
                    writeln!(out, "{},{l},{}", fmt_f64(s.kappa()), fmt_f64(kernel_coeff(s, l)))?;
                }
            }
        }
        Table::Values => {
            if a.points < 2 {
                bail!("--points must be at least 2");
            }
            cfg.set("points", a.points);
            cfg.set_f64("eta2", a.eta2);
            for line in cfg.header() {
                writeln!(out, "# {line}")?;
            }
            let eta2 = cfg.unit.to_radians(a.eta2);
            if !(0.0..=PI).contains(&eta2) {
                bail!("--eta2 must lie in [0, pi]");
            }
            let col = match cfg.unit {
                s3radon::io::AngleUnit::Degrees => "angle_deg",
                s3radon::io::AngleUnit::Radians => "angle_rad",
            };
            writeln!(out, "kappa,{col},value,radon,double_radon")?;
            for s in &specs {
                for i in 0..a.points {
                    let t = PI * i as f64 / (a.points - 1) as f64;
                    let vals = [
                        s.kappa(),
                        cfg.unit.from_radians(t),
                        kernel_value(s, t),
                        kernel_radon(s, t),
                        kernel_double_radon(s, t, eta2),
                    ];
                    let line: Vec<String> = vals.iter().map(|&x| fmt_f64(x)).collect();
                    writeln!(out, "{}", line.join(","))?;
                }
            }
        }
    }
    out.flush()?;
    Ok(true)
}

pub fn verify(common: &Common, a: &VerifyArgs) -> Result<bool> {
    let mut cfg = RunConfig::new("verify", common)?;
    if let Some(t) = a.tol_identity {
        if !(t > 0.0 && t.is_finite()) {
            bail!("--tol-identity must be positive");
        }
        cfg.set_f64("tol-identity", t);
    }
    cfg.set("abel-grid", a.abel_grid);
    let vcfg = VerifyConfig {
        rules: cfg.rules.clone(),
        tol_identity: a.tol_identity,
        seed: common.seed,
        abel_grid: a.abel_grid,
    };
    let results = if a.criteria.is_empty() {
        run_suite(&vcfg)
    } else {
        a.criteria.iter().map(|&n| run_criterion(n, &vcfg).unwrap_or_else(|e| errored(Some(n), &e))).collect()
    };
    let mut out = sink(common.output.as_deref())?;
    for line in cfg.header() {
        writeln!(out, "# {line}")?;
    }
    for r in &results {
        writeln!(out, "{}", r.line())?;
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    writeln!(out, "summary: {} checks, {} failed", results.len(), failed)?;
    out.flush()?;
    Ok(failed == 0)
}
