use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::calculus::RemainderOperator;
use crate::cli::config::RunConfig;
use crate::cli::{atomic_write, Cli, Command, ExperimentArgs};
use crate::decompose::{
    bernstein_check, elementary_decompose, four_way_split, reconstruction_error, spectral_support_check,
    Component,
};
use crate::error::{config, Error, Result};
use crate::lab::report::{to_json, validate_report};
use crate::lab::{
    resolution_sweep, run_experiment, write_report, write_sweep, EstimateReport, ExperimentConfig,
    SlopeConfig, SweepReport, TheoremTag, Variant,
};
use crate::operators::{default_width, random_band_limited, wave_packet, ApplyPlan};
use crate::spectral::{sobolev_norm, Field, FilterBank, Grid, GridSpec};
use crate::symbols::seminorms::{composite_norm, seminorm, sobolev_index, Family, NormVariant};
use crate::symbols::{build_symbol, DerivMethod, SharedSymbol};

/// Tolerance of the partition-of-unity check.
pub const PARTITION_TOLERANCE: f64 = 1e-12;
/// Tolerance of the four-way reconstruction.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

const DEFAULT_OUT: &str = "paracalc-out";

struct Ctx {
    cfg: RunConfig,
    seed: Option<u64>,
    grid: Option<GridSpec>,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Ctx> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let grid = match &cli.grid {
            Some(text) => Some(GridSpec::parse(text)?),
            None => cfg.grid,
        };
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(Ctx {
            seed: cli.seed.or(cfg.seed),
            grid,
            out,
            quiet: cli.quiet,
            cfg,
        })
    }

    fn grid(&self) -> Result<Arc<Grid>> {
        Grid::new(self.grid.unwrap_or_else(|| GridSpec::with_default_period(1, 1024)))
    }

    fn symbol(&self, grid: &Arc<Grid>, id: &str) -> Result<SharedSymbol> {
        build_symbol(grid, &self.cfg.resolve_symbol(id))
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.out.join(name);
        atomic_write(&path, &to_json(value)?)?;
        Ok(path)
    }
}

/// File-name friendly form of a symbol id.
fn slug(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Runs the parsed command; `Ok(false)` means a pass flag came out false.
pub fn run(cli: &Cli) -> Result<bool> {
    let ctx = Ctx::new(cli)?;
    match &cli.command {
        Command::PartitionCheck => partition_check(&ctx),
        Command::Decompose(a) => decompose(&ctx, a),
        Command::Seminorms(a) => seminorms(&ctx, a),
        Command::Apply(a) => apply(&ctx, a),
        Command::Commutator(a) => commutator(&ctx, a),
        Command::Experiment(a) => experiment(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
        Command::Verify(a) => verify(&ctx, &a.reports, a.rerun),
    }
}

fn partition_check(ctx: &Ctx) -> Result<bool> {
    let grid = ctx.grid()?;
    let bank = FilterBank::new(grid.clone())?;
    let deviation = bank.partition_deviation();
    let pass = deviation <= PARTITION_TOLERANCE;
    let report = json!({
        "grid": grid.spec(),
        "p_max": bank.p_max(),
        "deviation": deviation,
        "tolerance": PARTITION_TOLERANCE,
        "pass": pass,
    });
    let path = ctx.write_json("partition.json", &report)?;
    ctx.say(format!(
        "partition-check deviation={deviation:.3e} pass={pass} -> {}",
        path.display()
    ));
    Ok(pass)
}

fn decompose(ctx: &Ctx, a: &crate::cli::DecomposeArgs) -> Result<bool> {
    let block = ctx.cfg.decompose.clone().unwrap_or(crate::cli::DecomposeBlock {
        symbol: "dn".into(),
        n_cut: vec![4],
        k: Vec::new(),
    });
    let id = a.symbol.clone().unwrap_or(block.symbol);
    let cuts = if a.n_cut.is_empty() { block.n_cut } else { a.n_cut.clone() };
    let ks = if a.k_sweep.is_empty() { block.k } else { a.k_sweep.clone() };
    if cuts.is_empty() {
        return Err(config("no cut-off parameter given"));
    }
    let grid = ctx.grid()?;
    let sym = ctx.symbol(&grid, &id)?;
    let mut splits = Vec::new();
    let mut pass = true;
    for n_cut in cuts {
        let split = four_way_split(sym.clone(), n_cut)?;
        let recon = split.reconstruction_error();
        let support = spectral_support_check(&split);
        let mut stats = BTreeMap::new();
        for which in Component::ALL {
            let c = split.component(which);
            let sup = seminorm(c.as_ref(), Family::M { k: 0, l: 0 }, DerivMethod::Auto)?;
            let l2 = seminorm(c.as_ref(), Family::N { k: 0, s: 0.0 }, DerivMethod::Auto)?;
            stats.insert(which.name().to_string(), json!({ "M_0_0": sup, "N_0_0": l2 }));
        }
        let bernstein = match a.bernstein {
            Some(order) => Some(serde_json::to_value(bernstein_check(&split, order)?)?),
            None => None,
        };
        let ok = recon <= RECONSTRUCTION_TOLERANCE && support.pass;
        pass &= ok;
        ctx.say(format!(
            "decompose {id} N={n_cut} reconstruction={recon:.3e} support_outside={:.3e} pass={ok}",
            support.max_outside_fraction
        ));
        splits.push(json!({
            "n_cut": n_cut,
            "reconstruction_error": recon,
            "reconstruction_tolerance": RECONSTRUCTION_TOLERANCE,
            "support": support,
            "components": stats,
            "bernstein": bernstein,
            "pass": ok,
        }));
    }
    let mut elementary = Vec::new();
    let mut archive = None;
    for (i, k) in ks.iter().enumerate() {
        let es = elementary_decompose(sym.as_ref(), *k)?;
        let err = reconstruction_error(&es, sym.as_ref());
        ctx.say(format!("decompose {id} K={k} elementary_error={err:.4e}"));
        elementary.push(json!({ "k": k, "box_size": es.box_size(), "error": err }));
        if i + 1 == ks.len() {
            let path = ctx.out.join(format!("{}-K{k}.pces", slug(&id)));
            es.save(&path)?;
            archive = Some(path);
        }
    }
    let errors: Vec<f64> = elementary
        .iter()
        .filter_map(|e| e["error"].as_f64())
        .collect();
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let report = json!({
        "symbol": id,
        "grid": grid.spec(),
        "splits": splits,
        "elementary": elementary,
        "elementary_monotone": monotone,
        "archive": archive,
        "pass": pass,
    });
    let path = ctx.write_json(&format!("decompose-{}.json", slug(&id)), &report)?;
    ctx.say(format!("-> {}", path.display()));
    if !pass {
        return Err(Error::Numerical(format!(
            "four-way split of {id} failed its reconstruction or support contract"
        )));
    }
    Ok(true)
}

fn seminorms(ctx: &Ctx, a: &crate::cli::SeminormArgs) -> Result<bool> {
    let grid = ctx.grid()?;
    let id = a.symbol.clone().unwrap_or_else(|| "dn".into());
    let sym = ctx.symbol(&grid, &id)?;
    let k = a.k.unwrap_or_else(|| sobolev_index(grid.dim()));
    let families = [
        Family::N { k, s: a.s },
        Family::M { k, l: a.l },
        Family::LowN { k, s: a.s },
        Family::LowM { k },
    ];
    let mut values = BTreeMap::new();
    let mut unavailable = BTreeMap::new();
    for f in families {
        match seminorm(sym.as_ref(), f, DerivMethod::Auto) {
            Ok(v) => {
                values.insert(f.descriptor(), v);
            }
            Err(e @ (Error::ClassViolation(_) | Error::Capability(_))) => {
                unavailable.insert(f.descriptor(), e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    let norms = [
        ("H^s", NormVariant::Hs { s: a.s }),
        ("H^s_reg", NormVariant::HsReg { s: a.s }),
        ("L^inf", NormVariant::Inf),
    ];
    for (name, v) in norms {
        match composite_norm(sym.as_ref(), v) {
            Ok(x) => {
                values.insert(name.to_string(), x);
            }
            Err(e @ (Error::ClassViolation(_) | Error::Capability(_))) => {
                unavailable.insert(name.to_string(), e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    for (name, v) in &values {
        ctx.say(format!("{id} {name} = {v:.6e}"));
    }
    for (name, why) in &unavailable {
        ctx.say(format!("{id} {name} unavailable: {why}"));
    }
    let report = json!({
        "symbol": id,
        "order": sym.order(),
        "regularity": sym.regularity().to_string(),
        "grid": grid.spec(),
        "values": values,
        "unavailable": unavailable,
    });
    let path = ctx.write_json(&format!("seminorms-{}.json", slug(&id)), &report)?;
    ctx.say(format!("-> {}", path.display()));
    Ok(true)
}

fn probe_field(grid: &Arc<Grid>, spec: &str, decay: f64, seed: u64) -> Result<Field> {
    let spec = spec.trim();
    if spec == "random" {
        return Ok(random_band_limited(grid, decay, seed, 0));
    }
    if let Some(j) = spec.strip_prefix("packet:") {
        let j: i32 = j
            .trim()
            .parse()
            .map_err(|_| config(format!("bad packet exponent `{j}`")))?;
        return wave_packet(grid, j, [1.0, 0.0], default_width(grid));
    }
    Err(config(format!("unknown probe `{spec}`; use random or packet:<j>")))
}

fn apply(ctx: &Ctx, a: &crate::cli::ApplyArgs) -> Result<bool> {
    let grid = ctx.grid()?;
    let id = a.symbol.clone().unwrap_or_else(|| "dn".into());
    let sym = ctx.symbol(&grid, &id)?;
    let m = sym.order();
    let u = probe_field(&grid, &a.probe, m + grid.dim() as f64 / 2.0 + 1.0, ctx.seed.unwrap_or(0))?;
    let built = Instant::now();
    let plan = match a.mode.as_str() {
        "auto" => ApplyPlan::auto(sym.clone())?,
        "dense" => ApplyPlan::dense(sym.clone())?,
        "elementary" => ApplyPlan::elementary(Arc::new(elementary_decompose(sym.as_ref(), a.k)?)),
        other => return Err(config(format!("unknown mode `{other}`; use auto, dense or elementary"))),
    };
    let setup = built.elapsed().as_secs_f64();
    let started = Instant::now();
    let v = plan.apply(&u)?;
    let elapsed = started.elapsed().as_secs_f64();
    let mut report = json!({
        "symbol": id,
        "grid": grid.spec(),
        "probe": a.probe,
        "mode": plan.mode().to_string(),
        "input_l2": u.l2_norm(),
        "output_l2": v.l2_norm(),
        "output_h_minus_m": sobolev_norm(&v, -m),
    });
    ctx.say(format!(
        "apply {id} mode={} |u|_2={:.6e} |Op u|_2={:.6e}",
        plan.mode(),
        u.l2_norm(),
        v.l2_norm()
    ));
    if a.stats {
        let dense = ApplyPlan::dense(sym)?.apply(&u)?;
        let diff = v.sub(&dense)?.l2_norm() / dense.l2_norm().max(f64::MIN_POSITIVE);
        report["stats"] = json!({
            "cost_flops": plan.cost(),
            "setup_seconds": setup,
            "apply_seconds": elapsed,
            "relative_deviation_from_dense": diff,
        });
        ctx.say(format!(
            "  cost={:.3e} flops setup={setup:.3}s apply={elapsed:.3}s deviation_from_dense={diff:.3e}",
            plan.cost()
        ));
    }
    let path = ctx.write_json(&format!("apply-{}.json", slug(&id)), &report)?;
    ctx.say(format!("-> {}", path.display()));
    Ok(true)
}

fn commutator(ctx: &Ctx, a: &crate::cli::CommutatorArgs) -> Result<bool> {
    let grid = ctx.grid()?;
    let id1 = a.sigma1.clone().unwrap_or_else(|| "japanese:m=1".into());
    let id2 = a.sigma2.clone().unwrap_or_else(|| "func:a".into());
    let s1 = ctx.symbol(&grid, &id1)?;
    let s2 = ctx.symbol(&grid, &id2)?;
    let order = s1.order() + s2.order();
    let u = probe_field(&grid, &a.probe, order + grid.dim() as f64 / 2.0 + 1.0, ctx.seed.unwrap_or(0))?;
    let op = RemainderOperator::new(s1, s2, a.n)?;
    let bracket = op.commutator(&u)?;
    let (rem, parts) = op.apply_with_terms(&u)?;
    let reference: f64 = parts.iter().map(|f| f.l2_norm()).sum();
    let degenerate = rem.l2_norm() <= crate::lab::slope::DEGENERATE_RELATIVE * reference;
    let report = json!({
        "sigma1": id1,
        "sigma2": id2,
        "n": a.n,
        "grid": grid.spec(),
        "probe": a.probe,
        "commutator_l2": bracket.l2_norm(),
        "remainder_l2": rem.l2_norm(),
        "reference_l2": reference,
        "degenerate": degenerate,
    });
    ctx.say(format!(
        "commutator |[A,B]u|_2={:.6e} |R_n u|_2={:.6e} degenerate={degenerate}",
        bracket.l2_norm(),
        rem.l2_norm()
    ));
    let path = ctx.write_json("commutator.json", &report)?;
    ctx.say(format!("-> {}", path.display()));
    Ok(true)
}

fn parse_slope(text: &str) -> Result<SlopeConfig> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| config(format!("slope window `{text}` is not j_min..j_max")))?;
    let p = |v: &str| {
        v.trim()
            .parse::<i32>()
            .map_err(|_| config(format!("bad slope bound `{v}`")))
    };
    Ok(SlopeConfig {
        j_min: p(lo)?,
        j_max: p(hi)?,
        expected: None,
        tolerance: crate::lab::config::default_tolerance(),
    })
}

/// Experiment configurations selected by the flags and the config file.
fn experiment_configs(ctx: &Ctx, a: &ExperimentArgs) -> Result<Vec<ExperimentConfig>> {
    let mut out = match &a.tag {
        Some(tag) => {
            let theorem: TheoremTag = tag.parse()?;
            let mut c = ExperimentConfig::new(a.id.clone().unwrap_or_else(|| theorem.to_string()), theorem);
            c.grid = ctx.grid;
            if let (Some(_), Some(_)) = (a.m1, &a.sigma1) {
                return Err(config("--m1 and --sigma1 are mutually exclusive"));
            }
            if let Some(m1) = a.m1 {
                c.sigma1 = format!("japanese:m={m1}");
            }
            if let Some(s1) = &a.sigma1 {
                c.sigma1 = s1.clone();
            }
            c.sigma2 = a.sigma2.clone();
            if matches!(theorem, TheoremTag::ThIII3 | TheoremTag::ThIV1) && c.sigma2.is_none() {
                c.sigma2 = Some("func:a".into());
            }
            if let Some(v) = &a.variant {
                c.variant = Some(v.parse::<Variant>()?);
            }
            if let Some(n) = a.n {
                c.n = n;
            }
            if let Some(s) = a.s {
                c.s = s;
            }
            c.t0 = a.t0;
            c.s0 = a.s0;
            if let Some(e) = a.epsilon {
                c.epsilon = e;
            }
            if let Some(p) = a.probes {
                c.probes = p;
            }
            if let Some(sl) = &a.slope {
                c.slope = Some(parse_slope(sl)?);
            }
            vec![c]
        }
        None => {
            if ctx.cfg.experiments.is_empty() {
                return Err(config("no theorem tag given and the config lists no experiments"));
            }
            ctx.cfg
                .experiments
                .iter()
                .cloned()
                .map(|mut c| {
                    if c.grid.is_none() {
                        c.grid = ctx.cfg.grid;
                    }
                    c
                })
                .collect()
        }
    };
    for c in &mut out {
        if let Some(seed) = ctx.seed {
            c.seed = seed;
        }
        c.sigma1 = ctx.cfg.resolve_symbol(&c.sigma1);
        c.sigma2 = c.sigma2.as_ref().map(|s| ctx.cfg.resolve_symbol(s));
    }
    Ok(out)
}

fn summary(r: &EstimateReport) -> String {
    let mut line = format!(
        "{} {}{} c_emp={:.6e} degenerate={} pass={}",
        r.id,
        r.theorem,
        r.variant.map(|v| format!(".{v}")).unwrap_or_default(),
        r.c_emp,
        r.degenerate,
        r.pass
    );
    if let Some(n) = r.naive_c {
        line.push_str(&format!(" naive={n:.6e}"));
    }
    if let Some(f) = &r.slope {
        line.push_str(&format!(
            " slope={:.4} expected={:.4} stderr={:.2e}",
            f.slope, f.expected, f.stderr
        ));
    }
    line
}

fn experiment(ctx: &Ctx, a: &ExperimentArgs) -> Result<bool> {
    let configs = experiment_configs(ctx, a)?;
    let results: Vec<Result<EstimateReport>> = configs.par_iter().map(run_experiment).collect();
    let mut pass = true;
    for r in results {
        let r = r?;
        let paths = write_report(&r, &ctx.out)?;
        ctx.say(format!("{} -> {}", summary(&r), paths[0].display()));
        pass &= r.pass;
    }
    Ok(pass)
}

fn sweep(ctx: &Ctx, a: &crate::cli::SweepArgs) -> Result<bool> {
    let configs = experiment_configs(ctx, &a.experiment)?;
    let n_pts = if !a.n_pts.is_empty() {
        a.n_pts.clone()
    } else if let Some(s) = &ctx.cfg.sweep {
        s.n_pts.clone()
    } else {
        return Err(config("sweep needs --n-pts or a sweep block in the config"));
    };
    let mut pass = true;
    for c in &configs {
        let sw = resolution_sweep(c, &n_pts)?;
        let paths = write_sweep(&sw, &ctx.out)?;
        for r in &sw.reports {
            ctx.say(summary(r));
        }
        ctx.say(format!(
            "sweep {} stability={:.6} pass={} -> {}",
            sw.id,
            sw.stability,
            sw.pass,
            paths.last().map(|p| p.display().to_string()).unwrap_or_default()
        ));
        pass &= sw.pass;
    }
    Ok(pass)
}

fn verify_one(report: &EstimateReport, rerun: bool) -> Result<()> {
    validate_report(report)?;
    if rerun {
        let fresh = run_experiment(&report.config)?;
        if to_json(&fresh)? != to_json(report)? {
            return Err(Error::Numerical(format!(
                "report {} differs from a fresh run of its configuration",
                report.id
            )));
        }
    }
    Ok(())
}

fn verify(ctx: &Ctx, paths: &[PathBuf], rerun: bool) -> Result<bool> {
    for path in paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)?;
        if value.get("reports").is_some() {
            let sw: SweepReport = serde_json::from_value(value)?;
            for r in &sw.reports {
                verify_one(r, rerun)?;
            }
            let again = SweepReport::new(sw.id.clone(), sw.reports.clone());
            if to_json(&again)? != to_json(&sw)? {
                return Err(Error::Numerical(format!(
                    "sweep {} summary disagrees with its reports",
                    sw.id
                )));
            }
        } else {
            let r: EstimateReport = serde_json::from_value(value)?;
            verify_one(&r, rerun)?;
        }
        ctx.say(format!("ok {}", display(path)));
    }
    Ok(true)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
