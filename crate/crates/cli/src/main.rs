//! `ballavg`: generate test functions, evaluate ball-average difference
//! functionals, fit smoothness slopes, extract pointwise gradient
//! certificates, and run the invariant check suites.
//!
//! Exit codes: 0 success, 2 usage or parameter-domain error, 3 numerical
//! invariant failure.

mod check;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ballavg::analysis::{
    equivalence_study, estimate_alpha_with_norm, standard_corpus, SlopeStatistic,
};
use ballavg::functionals::{
    area_functional, difference_functional, fourier_tl_norm, g_functional, gstar_functional,
    NormReport,
};
use ballavg::grid::{
    lp_norm, make_ladder, read_gf1, write_gf1, GridFunction, QExp, ScaleLadder, SpaceParams,
};
use ballavg::kernels::build_filter_bank;
use ballavg::pointwise::{
    extract_gradient, hl_maximal, verify_implications, GradientConstants, GradientVariant,
};
use ballavg::synth::{generate, GeneratorKind, GeneratorSpec};
use ballavg::Error;

#[derive(Parser)]
#[command(name = "ballavg", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a test function and write it as GF1.
    Synth(SynthArgs),
    /// Evaluate a norm functional on a GF1 file.
    Norm(NormArgs),
    /// Equivalence-ratio study over a corpus manifest.
    Equiv(EquivArgs),
    /// Fit the smoothness exponent from scale decay.
    Slope(SlopeArgs),
    /// Extract (and optionally verify) a pointwise gradient certificate.
    Gradient(GradientArgs),
    /// Hardy-Littlewood maximal field over the ladder window set.
    Maximal(MaximalArgs),
    /// Run the numerical invariant suites.
    Check(CheckArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// weierstrass | mode | bandlimited | poly | cusp | gaussian
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Samples per axis (power of two).
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    terms: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    mode: Option<u32>,
    #[arg(long, default_value_t = 0.0)]
    phase: f64,
    #[arg(long)]
    max_mode: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long, default_value_t = 0.03125)]
    window: f64,
    #[arg(long, default_value_t = 0.5)]
    center: f64,
    #[arg(long)]
    width: Option<f64>,
    /// Output GF1 path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NormArgs {
    /// Input GF1 path.
    #[arg(long)]
    input: PathBuf,
    /// g | area | area-tilde | gstar | fourier | difference
    #[arg(long)]
    functional: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    /// Secondary exponent; a number or `inf`.
    #[arg(long)]
    q: String,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 2)]
    k_min: i32,
    /// Optional GF1 output of the per-point field.
    #[arg(long)]
    field: Option<PathBuf>,
}

#[derive(Args)]
struct EquivArgs {
    /// Manifest path with one generator spec per line, or `default`.
    #[arg(long, default_value = "default")]
    manifest: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: String,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Comma-separated resolutions, e.g. 512,1024,2048.
    #[arg(long, default_value = "512,1024")]
    resolutions: String,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_table: Option<PathBuf>,
}

#[derive(Args)]
struct SlopeArgs {
    #[arg(long)]
    input: PathBuf,
    /// ball | higher | difference
    #[arg(long, default_value = "ball")]
    statistic: String,
    #[arg(long, default_value_t = 2)]
    ell: u32,
    #[arg(long, default_value_t = 2)]
    k_min: i32,
    /// Cap the finest fitted rung (defaults to the grid limit).
    #[arg(long)]
    k_max: Option<i32>,
    /// Use the L^p flavor of the statistic instead of the sup norm.
    #[arg(long)]
    lp: Option<f64>,
}

#[derive(Args)]
struct GradientArgs {
    #[arg(long)]
    input: PathBuf,
    /// sup-point | sup-nbhd | ball-sup | ball-avg | ball-ravg | point-ctr | hajlasz
    #[arg(long)]
    variant: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    big_c: f64,
    #[arg(long, default_value_t = 1.0)]
    tilde_c: f64,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 2)]
    k_min: i32,
    /// Output path for the certificate (key=value header + GF1).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-derive and check every implied inequality; exit 3 on violations.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct MaximalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    k_min: i32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// all | multiplier | calderon | reconstruction | squarefn | chains
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Perturb the ball-average profile; calderon and reconstruction must then fail.
    #[arg(long)]
    inject_fault: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.cmd {
        Cmd::Synth(args) => cmd_synth(args),
        Cmd::Norm(args) => cmd_norm(args),
        Cmd::Equiv(args) => cmd_equiv(args),
        Cmd::Slope(args) => cmd_slope(args),
        Cmd::Gradient(args) => cmd_gradient(args),
        Cmd::Maximal(args) => cmd_maximal(args),
        Cmd::Check(args) => cmd_check(args),
    }
}

fn require<T>(opt: Option<T>, what: &str, kind: &str) -> Result<T, Error> {
    opt.ok_or_else(|| Error::ParamDomain(format!("--{what} is required for kind {kind}")))
}

fn cmd_synth(args: SynthArgs) -> Result<i32, Error> {
    let kind = match args.kind.as_str() {
        "weierstrass" => GeneratorKind::Weierstrass {
            alpha0: require(args.alpha0, "alpha0", "weierstrass")?,
            terms: require(args.terms, "terms", "weierstrass")?,
            seed: args.seed,
        },
        "mode" => GeneratorKind::SingleMode {
            mode: require(args.mode, "mode", "mode")?,
            phase: args.phase,
        },
        "bandlimited" => GeneratorKind::Bandlimited {
            max_mode: require(args.max_mode, "max-mode", "bandlimited")?,
            exponent: args.exponent,
            seed: args.seed,
        },
        "poly" => GeneratorKind::PolyPatch {
            degree: require(args.degree, "degree", "poly")?,
            window: args.window,
        },
        "cusp" => GeneratorKind::Cusp {
            alpha0: require(args.alpha0, "alpha0", "cusp")?,
            center: args.center,
            width: args.width,
        },
        "gaussian" => GeneratorKind::Gaussian {
            width: require(args.width, "width", "gaussian")?,
        },
        other => {
            return Err(Error::ParamDomain(format!(
                "unknown kind {other:?}; expected weierstrass|mode|bandlimited|poly|cusp|gaussian"
            )))
        }
    };
    let spec = GeneratorSpec::new(kind, args.dim, args.n);
    let f = generate(&spec)?;
    let file = File::create(&args.out)?;
    write_gf1(&f, BufWriter::new(file))?;
    println!("{spec}");
    println!("sup_norm={}", f.sup_norm());
    println!("l2_norm={}", lp_norm(&f, 2.0));
    println!("out={}", args.out.display());
    Ok(0)
}

fn load_gf1(path: &PathBuf) -> Result<GridFunction, Error> {
    read_gf1(BufReader::new(File::open(path)?))
}

fn ladder_for(f: &GridFunction, k_min: i32) -> Result<ScaleLadder, Error> {
    make_ladder(f.samples_per_axis(), k_min)
}

fn cmd_norm(args: NormArgs) -> Result<i32, Error> {
    let f = load_gf1(&args.input)?;
    let q = QExp::parse(&args.q)?;
    let params = SpaceParams::new(args.alpha, args.p, q);
    let ladder = ladder_for(&f, args.k_min)?;
    let bank = build_filter_bank()?;
    let report: NormReport = match args.functional.as_str() {
        "g" => g_functional(&f, &params, &ladder)?,
        "area" => {
            let r = args.r.unwrap_or(1.0);
            if let QExp::Finite(qv) = q {
                if r >= qv {
                    return Err(Error::ParamDomain(format!(
                        "the area functional with an inner r-average requires r in [1, q); \
                         got r={r}, q={qv} (use area-tilde for r = q)"
                    )));
                }
            }
            area_functional(&f, &params, &ladder, r, args.beta)?
        }
        "area-tilde" => {
            let qv = match q {
                QExp::Finite(qv) => qv,
                QExp::Infinity => {
                    return Err(Error::ParamDomain(
                        "area-tilde sets r = q and requires finite q in (1, infinity)".into(),
                    ))
                }
            };
            area_functional(&f, &params, &ladder, qv, args.beta)?
        }
        "gstar" => {
            if let QExp::Finite(qv) = q {
                let needed = qv / qv.min(args.p);
                if args.lambda <= needed {
                    eprintln!(
                        "warning: the forward control of the g*_lambda functional needs \
                         lambda in (q/min(q,p), infinity) = ({needed}, infinity); \
                         lambda={} only satisfies the reverse hypothesis lambda > 1",
                        args.lambda
                    );
                }
            }
            gstar_functional(&f, &params, &ladder, args.lambda)?
        }
        "fourier" => fourier_tl_norm(&f, &params, &ladder, &bank)?,
        "difference" => difference_functional(&f, &params, &ladder)?,
        other => {
            return Err(Error::ParamDomain(format!(
                "unknown functional {other:?}; expected g|area|area-tilde|gstar|fourier|difference"
            )))
        }
    };
    print!("{}", report.to_text());
    if let Some(path) = args.field {
        write_gf1(&report.pointwise, BufWriter::new(File::create(path)?))?;
    }
    Ok(0)
}

fn cmd_equiv(args: EquivArgs) -> Result<i32, Error> {
    let corpus: Vec<GeneratorSpec> = if args.manifest == "default" {
        standard_corpus()
    } else {
        let text = std::fs::read_to_string(&args.manifest)?;
        let mut specs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            specs.push(line.parse()?);
        }
        specs
    };
    if corpus.is_empty() {
        return Err(Error::ParamDomain("corpus manifest is empty".into()));
    }
    let resolutions: Result<Vec<usize>, _> = args
        .resolutions
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect();
    let resolutions =
        resolutions.map_err(|_| Error::ParamDomain("cannot parse --resolutions".into()))?;
    let q = QExp::parse(&args.q)?;
    let params = SpaceParams::new(args.alpha, args.p, q).with_lambda(args.lambda);
    let report = equivalence_study(&corpus, &params, &resolutions)?;
    let table = report.to_table();
    print!("{table}");
    if let Some(path) = args.out_csv {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(report.to_csv().as_bytes())?;
    }
    if let Some(path) = args.out_table {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(table.as_bytes())?;
    }
    let bad_ratio = report
        .entries
        .iter()
        .any(|e| e.ratio.is_some_and(|r| !r.is_finite()));
    Ok(if bad_ratio { 3 } else { 0 })
}

fn cmd_slope(args: SlopeArgs) -> Result<i32, Error> {
    let f = load_gf1(&args.input)?;
    let statistic = match args.statistic.as_str() {
        "ball" => SlopeStatistic::BallAverage,
        "higher" => SlopeStatistic::HigherAverage(args.ell),
        "difference" => SlopeStatistic::FirstDifference,
        other => {
            return Err(Error::ParamDomain(format!(
                "unknown statistic {other:?}; expected ball|higher|difference"
            )))
        }
    };
    let ladder = match args.k_max {
        None => ladder_for(&f, args.k_min)?,
        Some(k_max) => {
            let grid_max = f.samples_per_axis().trailing_zeros() as i32 - 1;
            if k_max > grid_max {
                return Err(Error::ParamDomain(format!(
                    "--k-max {k_max} exceeds the grid limit {grid_max}"
                )));
            }
            make_ladder(1usize << (k_max + 1), args.k_min)?
        }
    };
    let fit = estimate_alpha_with_norm(&f, &ladder, statistic, args.lp)?;
    print!("{}", fit.to_text());
    Ok(0)
}

fn cmd_gradient(args: GradientArgs) -> Result<i32, Error> {
    let f = load_gf1(&args.input)?;
    let variant = match args.variant.as_str() {
        "sup-point" => GradientVariant::SupPoint,
        "sup-nbhd" => GradientVariant::SupNbhd,
        "ball-sup" => GradientVariant::BallSup,
        "ball-avg" => GradientVariant::BallAvg,
        "ball-ravg" => GradientVariant::BallRavg(args.r),
        "point-ctr" => GradientVariant::PointCtr,
        "hajlasz" => GradientVariant::Hajlasz,
        other => {
            return Err(Error::ParamDomain(format!(
                "unknown variant {other:?}"
            )))
        }
    };
    let ladder = ladder_for(&f, args.k_min)?;
    let constants = GradientConstants {
        c: args.c,
        cap_c: args.big_c,
        tilde_c: args.tilde_c,
    };
    let cand = extract_gradient(&f, args.alpha, &ladder, variant, constants)?;
    println!("variant={}", cand.variant.tag());
    println!("alpha={}", cand.alpha);
    println!("g_sup={}", cand.g.sup_norm());
    println!("g_l2={}", lp_norm(&cand.g, 2.0));
    if let Some(path) = &args.out {
        cand.write(BufWriter::new(File::create(path)?))?;
        println!("out={}", path.display());
    }
    if args.verify {
        let report = verify_implications(&f, &cand, &ladder)?;
        print!("{}", report.to_text());
        if report.total_violations() > 0 {
            return Ok(3);
        }
    }
    Ok(0)
}

fn cmd_maximal(args: MaximalArgs) -> Result<i32, Error> {
    let f = load_gf1(&args.input)?;
    let ladder = ladder_for(&f, args.k_min)?;
    let m = hl_maximal(&f, &ladder)?;
    println!("maximal_sup={}", m.field().sup_norm());
    println!("maximal_l2={}", lp_norm(m.field(), 2.0));
    println!("input_l2={}", lp_norm(&f, 2.0));
    write_gf1(m.field(), BufWriter::new(File::create(&args.out)?))?;
    println!("out={}", args.out.display());
    Ok(0)
}

fn cmd_check(args: CheckArgs) -> Result<i32, Error> {
    let known = ["all", "multiplier", "calderon", "reconstruction", "squarefn", "chains"];
    if !known.contains(&args.suite.as_str()) {
        return Err(Error::ParamDomain(format!(
            "unknown suite {:?}; expected one of {known:?}",
            args.suite
        )));
    }
    let cfg = check::CheckConfig {
        trials: args.trials,
        inject_fault: args.inject_fault,
    };
    let outcomes = check::run_suites(&args.suite, &cfg);
    let mut all_pass = true;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("suite={} status={status} {}", o.name, o.detail);
        all_pass &= o.passed;
    }
    Ok(if all_pass { 0 } else { 3 })
}
