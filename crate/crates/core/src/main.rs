//! Command-line front end: parse model specs, run the verification
//! experiments, and emit deterministic CSV plus human-readable reports.
//!
//! Exit codes: 0 = all checks pass, 1 = some check failed, 2 = input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bmsymp::desing;
use bmsymp::error::{Error, Result};
use bmsymp::forms::{Harmonic, PolyTrig, ScalarField, TrigPoly};
use bmsymp::model::LaurentModel;
use bmsymp::moment::{self, MomentCase};
use bmsymp::profile::{build_odd_profile, Profile, ProfileParity, TailMode};
use bmsymp::spec::{parse_model_spec, RunConfig};
use bmsymp::volume;

#[derive(Parser)]
#[command(name = "bmsymp", about = "b^m-symplectic desingularization toolkit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Model-spec file (JSON document)
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for CSV files
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the eps ladder with a single value
    #[arg(long)]
    eps: Option<f64>,
    /// Override grid resolution as NX,NTHETA
    #[arg(long)]
    grid: Option<String>,
    /// Max derivative order for convergence sweeps
    #[arg(long)]
    jmax: Option<usize>,
    /// Override the odd-case tail mode: corrected | paper-literal
    #[arg(long)]
    tail_mode: Option<String>,
    /// Check tolerance override where applicable
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct MomentArgs {
    #[command(flatten)]
    common: Common,
    /// Slab half-width λ for the f_ε moment component
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Leaf moment for the foliation case, as KIND:ANGLE:FREQ (e.g. sin:2:1)
    #[arg(long)]
    leaf: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the profile and run its structural validation
    Profile(Common),
    /// Validate the Laurent data and the profile
    Validate(Common),
    /// Even case: symplecticity of the desingularized form over the grid
    CheckSymplectic(Common),
    /// Odd case: fold structure at the critical hypersurface
    CheckFolded(Common),
    /// Coincidence with the singular form outside the band
    Coincide(Common),
    /// Bivector convergence sweep over the eps ladder
    Converge(Common),
    /// Volumes: complement/inside/total plus predicted expansion
    Volume(Common),
    /// Fit the volume expansion and compare leading-constant candidates
    Fit(Common),
    /// Scan for zeros of the top power along x
    FoldLocus(Common),
    /// Moment-map images
    MomentImage(MomentArgs),
}

fn fmt(v: f64) -> String {
    format!("{:.16e}", v)
}

fn write_csv(out: &Path, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    let mut body = String::with_capacity(rows.len() * 64 + header.len() + 1);
    body.push_str(header);
    body.push('\n');
    for r in rows {
        body.push_str(r);
        body.push('\n');
    }
    fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(path)
}

struct Loaded {
    model: LaurentModel,
    profile: Profile,
    cfg: RunConfig,
}

fn load(common: &Common) -> Result<Loaded> {
    let text = fs::read_to_string(&common.spec)
        .map_err(|e| Error::Spec(format!("{}: {e}", common.spec.display())))?;
    let (model, mut profile, mut cfg) = parse_model_spec(&text)?;
    if let Some(tm) = &common.tail_mode {
        let mode = match tm.as_str() {
            "corrected" => TailMode::Corrected,
            "paper-literal" => TailMode::PaperLiteral,
            other => return Err(Error::Spec(format!("--tail-mode: unknown mode '{other}'"))),
        };
        if profile.parity() != ProfileParity::Odd {
            return Err(Error::Spec("--tail-mode applies only to odd m".into()));
        }
        profile = build_odd_profile(profile.k(), profile.junction_order(), mode)?;
    }
    if let Some(g) = &common.grid {
        let parts: Vec<&str> = g.split(',').collect();
        let parse = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Spec(format!("--grid: bad integer '{s}'")))
        };
        match parts.as_slice() {
            [nx, nt] => {
                cfg.grid.x_points = parse(nx)?;
                cfg.grid.theta_points = parse(nt)?;
            }
            _ => return Err(Error::Spec("--grid expects NX,NTHETA".into())),
        }
    }
    if let Some(eps) = common.eps {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidEps(eps));
        }
        cfg.eps_ladder = vec![eps];
    }
    Ok(Loaded { model, profile, cfg })
}

// Outer |x| grid for coincidence checks: symmetric, clear of the band.
fn outer_grid(band: f64, x_max: f64, points: usize) -> Vec<f64> {
    let lo = 1.2 * band;
    let mut xs = Vec::with_capacity(2 * points);
    for i in 0..points {
        let x = lo + (x_max - lo) * i as f64 / (points - 1) as f64;
        xs.push(x);
        xs.push(-x);
    }
    xs
}

fn cmd_profile(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let report = l.profile.validate(common.tol.unwrap_or(1e-9));
    print!("{report}");
    Ok(report.pass())
}

fn cmd_validate(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let m = l.model.validate(l.cfg.grid.theta_points, common.tol.unwrap_or(1e-6));
    let p = l.profile.validate(1e-9);
    print!("{m}{p}");
    Ok(m.pass() && p.pass())
}

fn cmd_check_symplectic(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let mut pass = true;
    for &eps in &l.cfg.eps_ladder {
        let r = desing::check_symplectic(&l.model, &l.profile, eps, &l.cfg.grid)?;
        print!("{r}");
        pass &= r.pass();
    }
    Ok(pass)
}

fn cmd_check_folded(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let mut pass = true;
    for &eps in &l.cfg.eps_ladder {
        let r = desing::check_folded(&l.model, &l.profile, eps, l.cfg.grid.theta_points)?;
        print!("{r}");
        pass &= r.pass();
    }
    Ok(pass)
}

fn cmd_coincide(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let mut pass = true;
    for &eps in &l.cfg.eps_ladder {
        let band = desing::coincidence_band(&l.profile, eps);
        let xs = outer_grid(band, l.cfg.grid.x_max, 25);
        let r = desing::check_coincidence(&l.model, &l.profile, eps, &xs, l.cfg.grid.theta_points)?;
        print!("{r}");
        pass &= r.pass();
    }
    Ok(pass)
}

fn cmd_converge(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let k = l.profile.k();
    let j_max = common.jmax.unwrap_or(2 * k - 1);
    let table = desing::convergence_report(&l.profile, &l.cfg.eps_ladder, j_max)?;
    let rows: Vec<String> = table
        .rows
        .iter()
        .map(|(eps, j, sup)| format!("{},{},{}", fmt(*eps), j, fmt(*sup)))
        .collect();
    write_csv(&common.out, "converge.csv", "eps,j,sup_norm", &rows)?;
    let slope_rows: Vec<String> = table
        .slopes
        .iter()
        .map(|(j, s)| format!("{},{}", j, fmt(*s)))
        .collect();
    write_csv(&common.out, "converge_slopes.csv", "j,slope", &slope_rows)?;
    let mut pass = true;
    for &(j, slope) in &table.slopes {
        let floor = 0.9 * (2 * k - j) as f64;
        let ok = slope >= floor;
        pass &= ok;
        println!(
            "  {} slope j={j}: {:.4} (floor {:.2})",
            if ok { "ok  " } else { "FAIL" },
            slope,
            floor
        );
    }
    println!("[{}] bivector convergence k={k}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn cmd_volume(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let predicted = volume::predicted_expansion(&l.model, &l.profile)?;
    let mut rows = Vec::new();
    for &eps in &l.cfg.eps_ladder {
        let c = volume::volume_complement(&l.model, &l.profile, eps)?;
        let i = volume::volume_inside(&l.model, &l.profile, eps)?;
        let t = volume::volume_total(&l.model, &l.profile, eps)?;
        let p = predicted.eval(eps);
        rows.push(format!("{},{},{},{},{}", fmt(eps), fmt(c), fmt(i), fmt(t), fmt(p)));
    }
    write_csv(
        &common.out,
        "volume.csv",
        "eps,volume_complement,volume_inside,volume_total,predicted_total",
        &rows,
    )?;
    run_fit_comparison(&l, common.tol.unwrap_or(0.01))
}

fn cmd_fit(common: &Common) -> Result<bool> {
    let l = load(common)?;
    run_fit_comparison(&l, common.tol.unwrap_or(0.01))
}

// Fit over the ladder and adjudicate the leading coefficient against the
// two closed-form candidates; passes iff the fit matches the derived
// (exact-antiderivative) value within `rel_tol`.
fn run_fit_comparison(l: &Loaded, rel_tol: f64) -> Result<bool> {
    let k = l.profile.k();
    if l.cfg.eps_ladder.len() < k + 2 {
        return Err(Error::IllConditioned(format!(
            "fit needs at least {} ladder values, spec has {}",
            k + 2,
            l.cfg.eps_ladder.len()
        )));
    }
    let samples = volume::volume_samples(&l.model, &l.profile, &l.cfg.eps_ladder)?;
    let fit = volume::fit_expansion(&samples, k)?;
    let predicted = volume::predicted_expansion(&l.model, &l.profile)?;
    let lc = volume::leading_constants(&l.model, &l.profile)?;
    println!("fitted coefficients (residual {:.3e}):", fit.residual);
    for (i, &d) in fit.d.iter().enumerate() {
        let power = if i == 0 { 0 } else { 2 * i - 1 };
        println!(
            "  d_{i} (eps^-{power}): fitted {: >24} predicted {: >24}",
            fmt(d),
            fmt(predicted.d[i])
        );
    }
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    let to_derived = rel(fit.leading(), lc.derived);
    let to_published = rel(fit.leading(), lc.published);
    println!("leading coefficient d_{k}: fitted {}", fmt(fit.leading()));
    println!(
        "  derived candidate   4*Z = {}  (rel. dev. {:.3e}){}",
        fmt(lc.derived),
        to_derived,
        if to_derived <= rel_tol { "  <-- matches" } else { "" }
    );
    println!(
        "  published candidate 2(2+1/(2k-1))*Z = {}  (rel. dev. {:.3e}){}",
        fmt(lc.published),
        to_published,
        if to_published <= rel_tol { "  <-- matches" } else { "" }
    );
    if to_published > rel_tol {
        println!("  note: published constant deviates from the fitted volume data");
    }
    let pass = to_derived <= rel_tol;
    println!("[{}] volume expansion fit", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn cmd_fold_locus(common: &Common) -> Result<bool> {
    let l = load(common)?;
    let mut pass = true;
    let mut rows = Vec::new();
    for &eps in &l.cfg.eps_ladder {
        let span = (2.0 * eps).min(0.999);
        let n_scan = 400;
        let xs: Vec<f64> = (0..=n_scan)
            .map(|i| -span + 2.0 * span * i as f64 / n_scan as f64)
            .collect();
        let thetas = vec![0.0; l.model.dim() - 1];
        let roots = desing::fold_locus(&l.model, &l.profile, eps, &xs, &thetas)?;
        println!("eps={eps}: {} fold root(s)", roots.len());
        for r in &roots {
            println!(
                "  x = {: >24}  |d top/dx| = {: >24}  transversal: {}",
                fmt(r.x),
                fmt(r.slope),
                r.transversal
            );
            rows.push(format!("{},{},{},{}", fmt(eps), fmt(r.x), fmt(r.slope), r.transversal));
            pass &= r.transversal;
        }
    }
    write_csv(&common.out, "fold_locus.csv", "eps,x,slope,transversal", &rows)?;
    println!("[{}] fold locus transversality", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn parse_leaf(s: &str) -> Result<ScalarField> {
    let parts: Vec<&str> = s.split(':').collect();
    let err = || Error::Spec(format!("--leaf: expected KIND:ANGLE:FREQ, got '{s}'"));
    if parts.len() != 3 {
        return Err(err());
    }
    let angle: usize = parts[1].parse().map_err(|_| err())?;
    let freq: u32 = parts[2].parse().map_err(|_| err())?;
    let h = match parts[0] {
        "sin" => Harmonic::Sin(freq),
        "cos" => Harmonic::Cos(freq),
        _ => return Err(err()),
    };
    Ok(ScalarField::PolyTrig(PolyTrig::from_trig(TrigPoly::harmonic(angle, h, 1.0))))
}

fn cmd_moment(args: &MomentArgs) -> Result<bool> {
    let l = load(&args.common)?;
    let mut rows = Vec::new();
    match &args.leaf {
        Some(leaf) => {
            let field = parse_leaf(leaf)?;
            // the leaf image has no eps-dependence; emit one row per ladder
            // entry so the CSV itself witnesses the independence
            let img = moment::moment_image_case1(&l.model, &field, l.cfg.grid.theta_points)?;
            for &eps in &l.cfg.eps_ladder {
                rows.push(format!("{},{},{},case1", fmt(eps), fmt(img.lower), fmt(img.upper)));
            }
            println!("leaf moment image: [{}, {}]", fmt(img.lower), fmt(img.upper));
        }
        None => {
            for &eps in &l.cfg.eps_ladder {
                let img = moment::moment_image_case2(&l.profile, eps, args.lambda)?;
                debug_assert_eq!(img.case, MomentCase::Case2);
                rows.push(format!("{},{},{},case2", fmt(eps), fmt(img.lower), fmt(img.upper)));
                println!("eps={eps}: image [{}, {}]", fmt(img.lower), fmt(img.upper));
            }
        }
    }
    write_csv(&args.common.out, "moment.csv", "eps,lower,upper,case_tag", &rows)?;
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Profile(c) => cmd_profile(c),
        Cmd::Validate(c) => cmd_validate(c),
        Cmd::CheckSymplectic(c) => cmd_check_symplectic(c),
        Cmd::CheckFolded(c) => cmd_check_folded(c),
        Cmd::Coincide(c) => cmd_coincide(c),
        Cmd::Converge(c) => cmd_converge(c),
        Cmd::Volume(c) => cmd_volume(c),
        Cmd::Fit(c) => cmd_fit(c),
        Cmd::FoldLocus(c) => cmd_fold_locus(c),
        Cmd::MomentImage(a) => cmd_moment(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
