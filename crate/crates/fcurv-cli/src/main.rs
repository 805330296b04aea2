//! `fcurv`: generate self-similar test images, measure Minkowski functionals
//! of their parallel sets, and estimate fractal dimension and curvatures.
//!
//! The stages communicate through files so expensive dilation profiles are
//! cached and the estimators can be re-run cheaply:
//! `generate` writes a PBM image plus a metadata sidecar, `measure` turns an
//! image into a profile CSV, `estimate` turns a profile CSV into estimates.
//!
//! Exit codes: 0 ok, 2 usage error, 3 data error, 4 numeric failure.

use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use fcurv::estimators::{gamma_estimates, joint_regression, sausage_dimension, UseFlags};
use fcurv::ifs::{
    arithmetic_class, catalog, default_n_points, ifs_from_text, rasterize, ArithmeticClass,
    IteratedFunctionSystem, SampleSetId, RNG_ALGORITHM,
};
use fcurv::minkowski::{measure_profile, profile_from_csv, profile_to_csv, FunctionalProfile};
use fcurv::raster::{
    default_r_max, default_radii, load_pbm, optimal_area_radii, quick_radii, save_pbm,
    RadiusSchedule, SchedulePolicy, DEFAULT_R_MIN, DEFAULT_STEP,
};
use fcurv::theory::{
    curvature_integral, eta, reference_curvatures, rescale_curvature, PiecewisePoly, ReferenceSet,
    TheoreticalCurvatures,
};

#[derive(Parser)]
#[command(
    name = "fcurv",
    version,
    about = "fractal curvature analysis of binary images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a self-similar set to a PBM image by the chaos game
    Generate(GenerateArgs),
    /// Measure Minkowski functionals of the dilated image over a radius schedule
    Measure(MeasureArgs),
    /// Estimate dimension and fractal curvatures from a profile CSV
    Estimate(EstimateArgs),
    /// Print exact fractal curvatures of reference sets or user scaling functions
    Theory(TheoryArgs),
    /// Print optimal-area dilation radii
    Radii(RadiiArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// catalog set name: gasket, carpet, tree, dust, koch, modcarpet,
    /// tripet, triangle, sheared-gasket
    #[arg(long, conflicts_with = "ifs")]
    set: Option<String>,
    /// IFS description file: one `ratio rotation_deg reflect tx ty` per line
    #[arg(long)]
    ifs: Option<PathBuf>,
    /// image side in pixels (square image)
    #[arg(long, default_value_t = 1024)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// chaos-game points; default 50 (w h)^(s/2) capped at 1e8
    #[arg(long)]
    n_points: Option<u64>,
    #[arg(long, default_value_t = 100)]
    burn_in: u64,
    /// output PBM path; a `.meta` sidecar is written next to it
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct MeasureArgs {
    /// input PBM image (P1 or P4)
    #[arg(long, short)]
    image: PathBuf,
    /// output profile CSV
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_R_MIN)]
    r_min: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    /// maximum dilation radius; default max(0.06 min(w,h), 20)
    #[arg(long)]
    r_max: Option<f64>,
    /// use the optimal-area quick radii instead of the geometric ladder
    #[arg(long, default_value_t = false)]
    quick_evaluate: bool,
    /// stop once the dilation has at most 2 components plus holes
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    brk: bool,
    /// cap the rayon worker count
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    /// input profile CSV from `measure`
    #[arg(long, short)]
    profile: PathBuf,
    /// output estimates CSV
    #[arg(long, short)]
    out: PathBuf,
    /// include the Euler-number data set y0 in the regression
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    use_euler: bool,
    /// include the boundary-length data set y1
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    use_bdlength: bool,
    /// include the area data set y2
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    use_area: bool,
    /// drop this many trailing samples before estimating
    #[arg(long, default_value_t = 0)]
    trim: usize,
    /// write gnuplot-ready columns `x y0 y1 y2` to this file
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryArgs {
    /// reference set: gasket, carpet, modcarpet, triangle, window, gate
    #[arg(long, conflicts_with_all = ["rk0", "rk1", "rk2"])]
    set: Option<String>,
    /// scaling-function CSV for k = 0 (rows `b_lo,b_hi,c0,c1,c2`)
    #[arg(long, requires_all = ["rk1", "rk2", "ratios"])]
    rk0: Option<PathBuf>,
    #[arg(long)]
    rk1: Option<PathBuf>,
    #[arg(long)]
    rk2: Option<PathBuf>,
    /// comma-separated similarity ratios for the user-supplied functions
    #[arg(long)]
    ratios: Option<String>,
    /// rescale the curvatures to a set enlarged by this factor
    #[arg(long)]
    rescale: Option<f64>,
    /// optional output CSV (otherwise printed)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RadiiArgs {
    /// largest radius to include
    #[arg(long, default_value_t = 20.0)]
    max: f64,
    /// thin to multiplicative spacing of about 1.5
    #[arg(long, default_value_t = false)]
    quick: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Measure(args) => cmd_measure(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Theory(args) => cmd_theory(args),
        Command::Radii(args) => cmd_radii(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<fcurv::Error>() {
        match e {
            fcurv::Error::InvalidInput(_) | fcurv::Error::NotAvailable(_) => 2,
            fcurv::Error::PbmParse { .. }
            | fcurv::Error::Io { .. }
            | fcurv::Error::Format { .. }
            | fcurv::Error::EmptyForeground => 3,
            fcurv::Error::DegenerateGeometry(_)
            | fcurv::Error::InsufficientData(_)
            | fcurv::Error::SingularDesign
            | fcurv::Error::Divergence(_) => 4,
        }
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        3
    } else {
        2
    }
}

fn sig(v: f64) -> String {
    format!("{:.11e}", v)
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).map_err(|e| anyhow::Error::from(fcurv::Error::io(path, e)))
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| anyhow::Error::from(fcurv::Error::io(path, e)))
}

fn resolve_ifs(
    set: &Option<String>,
    file: &Option<PathBuf>,
) -> anyhow::Result<IteratedFunctionSystem> {
    match (set, file) {
        (Some(name), None) => match SampleSetId::parse(name) {
            Some(id) => Ok(catalog(id)),
            None => {
                let names: Vec<&str> = SampleSetId::ALL.iter().map(|id| id.name()).collect();
                Err(fcurv::Error::InvalidInput(format!(
                    "unknown set {name:?}; available sets: {}",
                    names.join(", ")
                ))
                .into())
            }
        },
        (None, Some(path)) => {
            let text = read_file(path)?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
            Ok(ifs_from_text(&text, name)?)
        }
        _ => Err(
            fcurv::Error::InvalidInput("exactly one of --set or --ifs is required".into()).into(),
        ),
    }
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<()> {
    let ifs = resolve_ifs(&args.set, &args.ifs)?;
    let s = ifs.dimension()?;
    let n_points = args
        .n_points
        .unwrap_or_else(|| default_n_points(args.size, args.size, s));
    let rendered = rasterize(
        &ifs,
        args.size,
        args.size,
        args.seed,
        args.burn_in,
        n_points,
    )?;
    save_pbm(&rendered.image, &args.out)?;

    let class = arithmetic_class(&ifs.ratios(), 1e-9)?;
    let mut meta = String::new();
    if let Some(name) = &ifs.name {
        writeln!(meta, "set={name}")?;
    }
    writeln!(meta, "seed={}", args.seed)?;
    writeln!(meta, "width={}", args.size)?;
    writeln!(meta, "height={}", args.size)?;
    writeln!(meta, "n_points={n_points}")?;
    writeln!(meta, "burn_in={}", args.burn_in)?;
    writeln!(meta, "s={}", sig(s))?;
    match class {
        ArithmeticClass::Arithmetic { h } => {
            writeln!(meta, "arithmetic=arithmetic")?;
            writeln!(meta, "h={}", sig(h))?;
        }
        ArithmeticClass::NonArithmetic => writeln!(meta, "arithmetic=non-arithmetic")?,
    }
    writeln!(meta, "rng={RNG_ALGORITHM}")?;
    writeln!(meta, "scale={}", sig(rendered.transform.scale))?;
    writeln!(meta, "offset_x={}", sig(rendered.transform.offset[0]))?;
    writeln!(meta, "offset_y={}", sig(rendered.transform.offset[1]))?;
    writeln!(meta, "black_pixels={}", rendered.image.foreground_count())?;
    writeln!(meta, "plotted_points={}", rendered.plotted_points)?;
    let meta_path = sidecar_path(&args.out);
    write_file(&meta_path, &meta)?;
    eprintln!(
        "wrote {} ({} black pixels) and {}",
        args.out.display(),
        rendered.image.foreground_count(),
        meta_path.display()
    );
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".meta");
    PathBuf::from(os)
}

fn cmd_measure(args: MeasureArgs) -> anyhow::Result<()> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let img = load_pbm(&args.image)?;
    let schedule = if args.quick_evaluate {
        let r_max = args
            .r_max
            .unwrap_or_else(|| default_r_max(img.width(), img.height()));
        RadiusSchedule::from_radii(quick_radii(r_max), SchedulePolicy::QuickOptimalArea)?
    } else {
        default_radii(img.width(), img.height(), args.r_min, args.step, args.r_max)?
    };
    let field = fcurv::raster::distance_transform(&img)?;
    let profile = measure_profile(&field, &schedule, args.brk)?;
    if args.brk && !profile.truncated_by_break {
        eprintln!(
            "warning: the break condition N+Q <= 2 never fired; the largest radii \
             might already have grown too big for the dilation to keep fractal structure"
        );
    }
    if !args.brk && profile.break_condition_met {
        eprintln!(
            "warning: N+Q <= 2 was reached but --brk=false kept measuring; the dilation \
             radius might already have grown too big"
        );
    }
    write_file(&args.out, &profile_to_csv(&profile))?;
    eprintln!(
        "measured {} radii{} -> {}",
        profile.samples.len(),
        if profile.truncated_by_break {
            " (schedule cut by the break condition)"
        } else {
            ""
        },
        args.out.display()
    );
    Ok(())
}

fn estimates_csv(profile: &FunctionalProfile, flags: UseFlags) -> anyhow::Result<(String, String)> {
    let fit = joint_regression(profile, flags)?;
    let curv = gamma_estimates(profile, fit.s_hat)?;
    let sausage = sausage_dimension(profile).ok();

    let mut csv = String::from("estimator,value,aux\n");
    let mut used = Vec::new();
    if flags.euler {
        used.push("euler");
    }
    if flags.bdlength {
        used.push("bdlength");
    }
    if flags.area {
        used.push("area");
    }
    writeln!(csv, "s_hat,{},{}", sig(fit.s_hat), used.join("+"))?;
    for k in 0..3 {
        match fit.d_hat[k] {
            Some(d) => writeln!(csv, "d_hat_{k},{},", sig(d))?,
            None => writeln!(csv, "d_hat_{k},,excluded")?,
        }
    }
    writeln!(csv, "residual,{},mean squared error", sig(fit.residual))?;
    writeln!(csv, "m,{},samples", fit.m)?;
    if let Some(s) = sausage {
        writeln!(csv, "sausage_dimension,{},area-only slope", sig(s))?;
    }
    for k in 0..3 {
        writeln!(
            csv,
            "gamma_{k},{},s_used={}",
            sig(curv.gamma[k]),
            sig(curv.s_used)
        )?;
    }
    match (curv.xi0, curv.xi1) {
        (Some(x0), Some(x1)) => {
            writeln!(csv, "xi_0,{},", sig(x0))?;
            writeln!(csv, "xi_1,{},", sig(x1))?;
        }
        _ => {
            writeln!(csv, "xi_0,,undefined (gamma_2 <= 0)")?;
            writeln!(csv, "xi_1,,undefined (gamma_2 <= 0)")?;
        }
    }

    let mut plot = String::from("# x y0 y1 y2\n");
    let fmt_opt = |v: Option<f64>| v.map(sig).unwrap_or_else(|| "nan".into());
    for s in &profile.samples {
        writeln!(
            plot,
            "{} {} {} {}",
            sig(s.x),
            fmt_opt(s.y0),
            fmt_opt(s.y1),
            fmt_opt(s.y2)
        )?;
    }
    Ok((csv, plot))
}

fn cmd_estimate(args: EstimateArgs) -> anyhow::Result<()> {
    let flags = UseFlags {
        euler: args.use_euler,
        bdlength: args.use_bdlength,
        area: args.use_area,
    };
    let mut profile = profile_from_csv(&read_file(&args.profile)?)?;
    if args.trim > 0 {
        let keep = profile.samples.len().saturating_sub(args.trim);
        if keep < 2 {
            return Err(fcurv::Error::InsufficientData(format!(
                "trimming {} of {} samples leaves fewer than 2",
                args.trim,
                profile.samples.len()
            ))
            .into());
        }
        profile.samples.truncate(keep);
    }
    let (csv, plot) = estimates_csv(&profile, flags)?;
    write_file(&args.out, &csv)?;
    if let Some(path) = &args.plot_data {
        write_file(path, &plot)?;
    }
    print!("{csv}");
    Ok(())
}

fn theory_output(t: &TheoreticalCurvatures, label: &str, rescale: Option<f64>) -> String {
    let mut out = String::from("set,s,eta,x0,x1,x2,xi0,xi1,lambda\n");
    let lambda = rescale.unwrap_or(1.0);
    let x: Vec<f64> =
        t.x.iter()
            .map(|&c| rescale_curvature(c, lambda, t.s))
            .collect();
    let xi = t.specific();
    out.push_str(&format!(
        "{label},{},{},{},{},{},{},{},{}\n",
        sig(t.s),
        sig(t.eta),
        sig(x[0]),
        sig(x[1]),
        sig(x[2]),
        xi.map(|v| sig(v[0])).unwrap_or_default(),
        xi.map(|v| sig(v[1])).unwrap_or_default(),
        sig(lambda),
    ));
    out
}

fn cmd_theory(args: TheoryArgs) -> anyhow::Result<()> {
    let (t, label) = if let Some(name) = &args.set {
        let set = [
            ReferenceSet::SierpinskiGasket,
            ReferenceSet::SierpinskiCarpet,
            ReferenceSet::ModifiedCarpet,
            ReferenceSet::TriangleDelta,
            ReferenceSet::Window,
            ReferenceSet::Gate,
        ]
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| {
            fcurv::Error::NotAvailable(format!(
                "{name:?}; sets with published curvatures: gasket, carpet, modcarpet, \
                 triangle, window, gate"
            ))
        })?;
        (reference_curvatures(set)?, set.name().to_string())
    } else if let (Some(p0), Some(p1), Some(p2), Some(ratios)) =
        (&args.rk0, &args.rk1, &args.rk2, &args.ratios)
    {
        let parse_poly = |p: &PathBuf| -> anyhow::Result<PiecewisePoly> {
            Ok(PiecewisePoly::from_csv(&read_file(p)?)?)
        };
        let r0 = parse_poly(p0)?;
        let r1 = parse_poly(p1)?;
        let r2 = parse_poly(p2)?;
        let ratios: Vec<f64> = ratios
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| fcurv::Error::InvalidInput(format!("ratio {s:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let s = fcurv::ifs::similarity_dimension(&ratios)?;
        let eta = eta(&ratios, s)?;
        let t = TheoreticalCurvatures {
            s,
            eta,
            x: [
                curvature_integral(&r0, s, 0, eta)?,
                curvature_integral(&r1, s, 1, eta)?,
                curvature_integral(&r2, s, 2, eta)?,
            ],
        };
        (t, "user".to_string())
    } else {
        return Err(fcurv::Error::InvalidInput(
            "pass --set NAME, or --rk0/--rk1/--rk2 CSVs with --ratios".into(),
        )
        .into());
    };
    let out = theory_output(&t, &label, args.rescale);
    if let Some(path) = &args.out {
        write_file(path, &out)?;
    }
    print!("{out}");
    Ok(())
}

fn cmd_radii(args: RadiiArgs) -> anyhow::Result<()> {
    let radii = if args.quick {
        quick_radii(args.max)
    } else {
        optimal_area_radii(args.max)
    };
    println!("r");
    for r in radii {
        println!("{}", sig(r));
    }
    Ok(())
}
