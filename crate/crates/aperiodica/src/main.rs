//! Command-line front end: generation, patch statistics, autocorrelation,
//! diffraction, symmetry checks, hull distances and torus averaging.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 computation error
//! (the message names the failing operation). Outputs are deterministic
//! for a fixed configuration and seed; `--reproducible` additionally
//! suppresses the timestamp comment in CSV headers.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aperiodica::autocorr::{autocorr, Estimator};
use aperiodica::cps::{builtin, CutProjectScheme};
use aperiodica::diffraction::{peak_scan, refine_peak, scan_module, symmetry_check};
use aperiodica::error::Error;
use aperiodica::hull::{
    hull_metric, torus_grid, ww_uniform_test, Cocycle, TorusSystem, TrigPolynomial,
};
use aperiodica::patches::{entropy_estimate, patch_census};
use aperiodica::pointset::PointSet;
use aperiodica::sequence::{fibonacci_word, random_word, seq_to_delone, MarkedWord};
use aperiodica::{geom, report};

#[derive(Parser)]
#[command(
    name = "aperiodica",
    version,
    about = "Aperiodic point sets: generation, patch statistics, diffraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point set and write it in the text format.
    Gen(GenArgs),
    /// Patch census at a fixed patch radius.
    Patches(PatchesArgs),
    /// Patch-counting entropy over a list of radii.
    Entropy(EntropyArgs),
    /// Autocorrelation coefficients.
    Autocorr(AutocorrArgs),
    /// Diffraction peaks: measured amplitudes and closed-form intensities.
    Diffract(DiffractArgs),
    /// Peak-intensity symmetry check under an isometry.
    Symmetry(SymmetryArgs),
    /// Hull-metric distance between two point-set files.
    Hulldist(HulldistArgs),
    /// Uniform averaging of twisted translates on the scheme torus.
    Ww(WwArgs),
}

/// Where points come from: exactly one of these.
#[derive(Args)]
struct Source {
    /// JSON scheme configuration file.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Built-in scheme name: fibonacci | octagonal.
    #[arg(long)]
    builtin: Option<String>,
    /// Sequence tiling spec: "fibonacci:n=2000" or
    /// "random:la=1.0,lb=1.41421356,n=2000[,pa=0.5]".
    #[arg(long)]
    sequence: Option<String>,
    /// Seed for random sequence sources.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Output {
    /// Output CSV (or point file for gen).
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG plot.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Suppress the timestamp comment for byte-reproducible output.
    #[arg(long)]
    reproducible: bool,
    /// Worker threads (fallback: APERIODICA_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    source: Source,
    /// Region radius for scheme sources.
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PatchesArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    /// Patch radius S of the census.
    #[arg(long)]
    patch_radius: f64,
    /// Measure class frequencies in the centered ball of this radius
    /// instead of over the whole censused region.
    #[arg(long)]
    s_avg: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1000.0)]
    radius: f64,
    /// Comma-separated census radii, increasing.
    #[arg(long, default_value = "5,10,20,40")]
    s_list: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AutocorrArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1000.0)]
    radius: f64,
    /// Averaging radius n (anchored needs n + s_max <= radius).
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 5.0)]
    s_max: f64,
    /// anchored | pairs.
    #[arg(long, default_value = "anchored")]
    estimator: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DiffractArgs {
    #[command(flatten)]
    source: Source,
    /// Averaging radius S (also the sample region radius).
    #[arg(long, default_value_t = 1e4)]
    radius: f64,
    /// Physical frequency cutoff of the Fourier module.
    #[arg(long, default_value_t = 40.0)]
    kmax: f64,
    /// Internal frequency cutoff of the Fourier module.
    #[arg(long, default_value_t = 30.0)]
    kintmax: f64,
    /// Also scan a uniform grid [0, kmax] with this step (1D schemes).
    #[arg(long)]
    grid_step: Option<f64>,
    /// Golden-section refinement of grid candidates around local maxima.
    #[arg(long)]
    refine: bool,
    /// Report the Cesaro average of |c_S|^2 over the S sequence instead of
    /// the final value.
    #[arg(long)]
    cesaro: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SymmetryArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 200.0)]
    radius: f64,
    #[arg(long, default_value_t = 12.0)]
    kmax: f64,
    #[arg(long, default_value_t = 8.0)]
    kintmax: f64,
    /// Rotation angle in degrees (2D schemes).
    #[arg(long)]
    rotation_deg: Option<f64>,
    /// Use V = -I (exact conjugation symmetry).
    #[arg(long)]
    neg: bool,
    /// Check only the strongest peaks.
    #[arg(long, default_value_t = 20)]
    top: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct HulldistArgs {
    /// First point-set file (text format).
    #[arg(long)]
    a: PathBuf,
    /// Second point-set file (text format).
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    eps_grid: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct WwArgs {
    #[command(flatten)]
    source: Source,
    /// Cocycle frequency (comma-separated for N > 1).
    #[arg(long)]
    xi: String,
    /// JSON terms file: [{"q":[1,0],"re":1.0,"im":0.0}, ...].
    #[arg(long)]
    terms: PathBuf,
    #[arg(long, default_value_t = 1000.0)]
    nmax: f64,
    /// Omega grid points per torus dimension.
    #[arg(long)]
    omega_per_dim: Option<usize>,
    /// Midpoint quadrature step (default: exact closed form in 1D).
    #[arg(long)]
    quad_step: Option<f64>,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version are successful exits; everything else is an
            // invalid configuration
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let config_line: String = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(cli, &config_line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(msg)) => {
            eprintln!("aperiodica: invalid config: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Compute { operation, source }) => {
            eprintln!("aperiodica: {operation} failed: {source}");
            ExitCode::from(2)
        }
    }
}

enum RunError {
    Config(String),
    Compute { operation: &'static str, source: Error },
}

trait OpContext<T> {
    fn in_op(self, operation: &'static str) -> Result<T, RunError>;
}

impl<T> OpContext<T> for Result<T, Error> {
    fn in_op(self, operation: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Compute { operation, source })
    }
}

fn run(cli: Cli, config_line: &str) -> Result<(), RunError> {
    match cli.command {
        Command::Gen(args) => {
            init_threads(&args.output)?;
            let (points, scheme) = resolve_points(&args.source, args.radius)?;
            if let Some(s) = &scheme {
                print_warnings(s);
            }
            if points.is_empty() {
                eprintln!("aperiodica: warning: the window selected no lattice points");
            }
            write_file(&args.output.out, &points.to_text())?;
            Ok(())
        }
        Command::Patches(args) => {
            init_threads(&args.output)?;
            let (points, _) = resolve_points(&args.source, args.radius)?;
            let census = patch_census(&points, args.patch_radius).in_op("patch_census")?;
            let body = match args.s_avg {
                // frequency from the centered averaging ball per class
                Some(s_avg) => {
                    let mut rows = String::from("S,class_id,count,frequency\n");
                    for (id, class) in census.classes.iter().enumerate() {
                        let (nu, _) = aperiodica::patches::patch_frequency(
                            &points,
                            &class.representative,
                            &[],
                            s_avg,
                        )
                        .in_op("patch_frequency")?;
                        use std::fmt::Write as _;
                        let _ = writeln!(
                            rows,
                            "{},{},{},{}",
                            census.radius, id, class.count, nu
                        );
                    }
                    rows
                }
                None => {
                    let censused_volume = geom::ball_volume(
                        points.dim(),
                        (points.region().inradius() - args.patch_radius).max(1e-300),
                    );
                    report::census_csv(&census, censused_volume)
                }
            };
            write_csv(&args.output, config_line, &body)?;
            Ok(())
        }
        Command::Entropy(args) => {
            init_threads(&args.output)?;
            let s_list = parse_f64_list(&args.s_list)?;
            let (points, _) = resolve_points(&args.source, args.radius)?;
            let rows = entropy_estimate(&points, &s_list).in_op("entropy_estimate")?;
            let full: Vec<(f64, usize, f64)> = rows
                .iter()
                .map(|&(s, h)| {
                    let n = patch_census(&points, s)
                        .map(|c| c.class_count())
                        .unwrap_or(0);
                    (s, n, h)
                })
                .collect();
            write_csv(&args.output, config_line, &report::entropy_csv(&full))?;
            Ok(())
        }
        Command::Autocorr(args) => {
            init_threads(&args.output)?;
            let estimator = match args.estimator.as_str() {
                "anchored" => Estimator::Anchored,
                "pairs" | "pairs-in-ball" => Estimator::PairsInBall,
                other => {
                    return Err(RunError::Config(format!("unknown estimator '{other}'")))
                }
            };
            let (points, _) = resolve_points(&args.source, args.radius)?;
            let comb = autocorr(&points, args.n, args.s_max, estimator).in_op("autocorr")?;
            write_csv(&args.output, config_line, &report::comb_csv(&comb, points.dim()))?;
            Ok(())
        }
        Command::Diffract(args) => {
            init_threads(&args.output)?;
            let scheme = resolve_scheme(&args.source)?;
            print_warnings(&scheme);
            let points = scheme
                .model_set_points(args.radius)
                .in_op("model_set_points")?;
            let s_list = vec![args.radius / 4.0, args.radius / 2.0, args.radius];
            let module = scheme.fourier_module(args.kmax, args.kintmax);
            let mut peaks = scan_module(
                &points,
                &scheme,
                &module,
                args.kmax,
                args.kintmax,
                &s_list,
            )
            .in_op("scan_module")?;
            if let Some(step) = args.grid_step {
                if scheme.phys_dim() != 1 {
                    return Err(RunError::Config(
                        "--grid-step requires a one-dimensional scheme".into(),
                    ));
                }
                let count = (args.kmax / step).floor() as usize;
                let grid: Vec<Vec<f64>> =
                    (0..=count).map(|i| vec![i as f64 * step]).collect();
                let mut scanned = peak_scan(&points, &grid, &s_list).in_op("peak_scan")?;
                if args.refine {
                    for e in &mut scanned.entries {
                        let (xi, intensity) =
                            refine_peak(&points, e.xi[0], step, args.radius)
                                .in_op("refine_peak")?;
                        e.xi = vec![xi];
                        e.intensity_bt = intensity;
                    }
                }
                peaks.entries.extend(scanned.entries);
            }
            if args.cesaro {
                for e in &mut peaks.entries {
                    e.intensity_bt =
                        e.bt_history.iter().sum::<f64>() / e.bt_history.len() as f64;
                }
            }
            let mut body = report::peaks_csv(&peaks, scheme.phys_dim());
            if let Some(tail) = peaks.tail_bound {
                body = format!("# window transform tail at kintmax: {tail}\n{body}");
            }
            write_csv(&args.output, config_line, &body)?;
            if let Some(svg_path) = &args.output.svg {
                let svg = match scheme.phys_dim() {
                    1 => report::svg_stem_plot(&peaks, "diffraction"),
                    2 => report::svg_disk_plot(&peaks, "diffraction"),
                    d => {
                        return Err(RunError::Config(format!(
                            "no plot emitter for dimension {d}"
                        )))
                    }
                };
                write_file(svg_path, &svg)?;
            }
            Ok(())
        }
        Command::Symmetry(args) => {
            init_threads(&args.output)?;
            let scheme = resolve_scheme(&args.source)?;
            let points = scheme
                .model_set_points(args.radius)
                .in_op("model_set_points")?;
            let module = scheme.fourier_module(args.kmax, args.kintmax);
            let peaks = scan_module(
                &points,
                &scheme,
                &module,
                args.kmax,
                args.kintmax,
                &[args.radius],
            )
            .in_op("scan_module")?;
            let top: Vec<aperiodica::diffraction::PeakEntry> = peaks
                .top_by_intensity(args.top)
                .into_iter()
                .cloned()
                .collect();
            let dim = scheme.phys_dim();
            let v = match (args.rotation_deg, args.neg) {
                (Some(_), true) | (None, false) => {
                    return Err(RunError::Config(
                        "pick exactly one of --rotation-deg and --neg".into(),
                    ))
                }
                (Some(deg), false) => {
                    if dim != 2 {
                        return Err(RunError::Config(
                            "--rotation-deg requires a two-dimensional scheme".into(),
                        ));
                    }
                    let a = deg.to_radians();
                    nalgebra::DMatrix::from_row_slice(
                        2,
                        2,
                        &[a.cos(), -a.sin(), a.sin(), a.cos()],
                    )
                }
                (None, true) => -nalgebra::DMatrix::<f64>::identity(dim, dim),
            };
            let rep = symmetry_check(&points, &top, &v, args.radius).in_op("symmetry_check")?;
            println!("max intensity discrepancy: {}", rep.max_discrepancy);
            write_csv(&args.output, config_line, &report::symmetry_csv(&rep.rows, dim))?;
            Ok(())
        }
        Command::Hulldist(args) => {
            let pa = read_points(&args.a)?;
            let pb = read_points(&args.b)?;
            let d = hull_metric(&pa, &pb, args.eps_grid).in_op("hull_metric")?;
            println!("d = {d}");
            let body = format!("a,b,eps_grid,distance\n{},{},{},{d}\n",
                args.a.display(), args.b.display(), args.eps_grid);
            write_csv(&args.output, config_line, &body)?;
            Ok(())
        }
        Command::Ww(args) => {
            init_threads(&args.output)?;
            let scheme = resolve_scheme(&args.source)?;
            let xi = parse_f64_list(&args.xi)?;
            if xi.len() != scheme.phys_dim() {
                return Err(RunError::Config(format!(
                    "--xi needs {} components",
                    scheme.phys_dim()
                )));
            }
            let terms_json = std::fs::read_to_string(&args.terms)
                .map_err(|e| RunError::Config(format!("cannot read terms file: {e}")))?;
            let f = TrigPolynomial::from_json(&terms_json)
                .map_err(|e| RunError::Config(format!("bad terms file: {e}")))?;
            if f.terms.iter().any(|(q, _)| q.len() != scheme.total_dim()) {
                return Err(RunError::Config(format!(
                    "every term needs a q of length {}",
                    scheme.total_dim()
                )));
            }
            let ts = TorusSystem::from_scheme(&scheme);
            let per_dim = args.omega_per_dim.unwrap_or_else(|| {
                (100f64.powf(1.0 / scheme.total_dim() as f64)).round().max(2.0) as usize
            });
            let grid = torus_grid(scheme.total_dim(), per_dim);
            let mut n_list = Vec::new();
            let mut n = args.nmax;
            while n >= 1.0 {
                n_list.push(n);
                n /= 10.0;
            }
            n_list.reverse();
            let rows = ww_uniform_test(
                &ts,
                &f,
                &Cocycle::character(xi),
                &grid,
                &n_list,
                args.quad_step,
            )
            .in_op("ww_uniform_test")?;
            write_csv(&args.output, config_line, &report::ww_csv(&rows))?;
            Ok(())
        }
    }
}

fn init_threads(output: &Output) -> Result<(), RunError> {
    let threads = output.threads.or_else(|| {
        std::env::var("APERIODICA_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n == 0 {
            return Err(RunError::Config("--threads must be positive".into()));
        }
        // a later init in the same process is fine to ignore
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn resolve_scheme(source: &Source) -> Result<CutProjectScheme, RunError> {
    match (&source.scheme, &source.builtin, &source.sequence) {
        (Some(path), None, None) => {
            let json = std::fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("cannot read scheme file: {e}")))?;
            CutProjectScheme::from_json(&json)
                .map_err(|e| RunError::Config(format!("bad scheme file: {e}")))
        }
        (None, Some(name), None) => {
            builtin(name).map_err(|e| RunError::Config(e.to_string()))
        }
        (None, None, Some(_)) => Err(RunError::Config(
            "this command needs a cut-and-project scheme, not a sequence source".into(),
        )),
        _ => Err(RunError::Config(
            "pick exactly one of --scheme, --builtin, --sequence".into(),
        )),
    }
}

fn resolve_points(
    source: &Source,
    radius: f64,
) -> Result<(PointSet, Option<CutProjectScheme>), RunError> {
    match (&source.scheme, &source.builtin, &source.sequence) {
        (None, None, Some(spec)) => {
            let points = sequence_points(spec, source.seed)?;
            Ok((points, None))
        }
        (None, None, None) => Err(RunError::Config(
            "pick exactly one of --scheme, --builtin, --sequence".into(),
        )),
        _ => {
            let scheme = resolve_scheme(source)?;
            let points = scheme.model_set_points(radius).in_op("model_set_points")?;
            Ok((points, Some(scheme)))
        }
    }
}

fn sequence_points(spec: &str, seed: Option<u64>) -> Result<PointSet, RunError> {
    let (kind, params) = spec
        .split_once(':')
        .ok_or_else(|| RunError::Config(format!("bad sequence spec '{spec}'")))?;
    let mut map = BTreeMap::new();
    for pair in params.split(',') {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| RunError::Config(format!("bad sequence parameter '{pair}'")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get_f64 = |key: &str, default: Option<f64>| -> Result<f64, RunError> {
        match map.get(key) {
            Some(v) => v
                .parse()
                .map_err(|_| RunError::Config(format!("bad value for '{key}'"))),
            None => default.ok_or_else(|| {
                RunError::Config(format!("sequence spec needs '{key}='"))
            }),
        }
    };
    let n = get_f64("n", Some(2000.0))? as usize;
    match kind {
        "fibonacci" => {
            let tau = aperiodica::cps::TAU;
            let word = fibonacci_word(n);
            let marked = MarkedWord::new(word, n / 2);
            let lengths = BTreeMap::from([('a', tau), ('b', 1.0)]);
            seq_to_delone(&marked, &lengths).in_op("seq_to_delone")
        }
        "random" => {
            let seed = seed.ok_or_else(|| {
                RunError::Config("random sequences need --seed".into())
            })?;
            let la = get_f64("la", Some(1.0))?;
            let lb = get_f64("lb", Some(std::f64::consts::SQRT_2))?;
            let pa = get_f64("pa", Some(0.5))?;
            let word = random_word(n, seed, pa);
            let lengths = BTreeMap::from([('a', la), ('b', lb)]);
            seq_to_delone(&word, &lengths).in_op("seq_to_delone")
        }
        other => Err(RunError::Config(format!("unknown sequence kind '{other}'"))),
    }
}

fn read_points(path: &PathBuf) -> Result<PointSet, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    PointSet::from_text(&text)
        .map_err(|e| RunError::Config(format!("bad point file {}: {e}", path.display())))
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, RunError> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| RunError::Config(format!("bad number '{w}'")))
        })
        .collect()
}

fn print_warnings(scheme: &CutProjectScheme) {
    for w in scheme.warnings() {
        eprintln!("aperiodica: warning: {w}");
    }
}

fn timestamp() -> String {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{now}")
}

fn write_csv(output: &Output, config_line: &str, body: &str) -> Result<(), RunError> {
    let ts = timestamp();
    let header =
        report::csv_header(config_line, (!output.reproducible).then_some(ts.as_str()));
    write_file(&output.out, &format!("{header}{body}"))
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), RunError> {
    std::fs::write(path, content).map_err(|e| {
        RunError::Compute {
            operation: "write output",
            source: Error::Io(e),
        }
    })
}
