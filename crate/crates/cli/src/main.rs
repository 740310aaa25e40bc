//! `fcvbw`: design, run, analyze and report variable-bandwidth FC filters.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 invalid input
//! (specification, artifact, schedule), 3 design did not converge or the
//! achieved error exceeds the specification, 4 oracle disagreement.

mod specfile;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use fcvbw::artifact::{expand_schedule, fmt_f64, parse_schedule, read_signal, write_signal, DesignArtifact, SignalFormat};
use fcvbw::complexity::{design_complexity, emit_report, general_rates, special_case_rates};
use fcvbw::minimax::{design, verify, DesignOptions, DesignResult};
use fcvbw::oracle::{lptv_convolution_switched, NaiveBlockFilter};
use fcvbw::ptvir::{
    base_response_idft, calibrate_for, desired_response, ptvir_from_base, response_hn, FrequencyGrid, PtvirSet,
};
use fcvbw::spectrum::dft_coefficients;
use fcvbw::{BinSpec, BlockProcessor, Engine, Error, Profile};

#[derive(Parser)]
#[command(name = "fcvbw", version, about = "Variable-bandwidth fast-convolution FIR filters")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Design a filter from a specification file.
    Design {
        spec: PathBuf,
        /// Artifact output path.
        #[arg(short, long, default_value = "design.json")]
        out: PathBuf,
        /// Verification report path.
        #[arg(long, default_value = "verification.json")]
        report: PathBuf,
        #[arg(long = "N")]
        fft_len: Option<usize>,
        #[arg(long = "L")]
        filter_len: Option<usize>,
        #[arg(long = "grid-k")]
        grid_k: Option<usize>,
        #[arg(long = "facets")]
        facets: Option<usize>,
        /// Give up once the order exceeds this multiple of the estimate.
        #[arg(long, default_value_t = 8)]
        max_order_factor: usize,
        /// Dense verification grid as a multiple of the design grid.
        #[arg(long, default_value_t = 4)]
        verify_factor: usize,
    },
    /// Filter a signal with a designed artifact.
    Run {
        artifact: PathBuf,
        input: PathBuf,
        output: PathBuf,
        /// `block_index,b_N` lines.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Initial band centre in bins (default: lowest of the range).
        #[arg(long)]
        b: Option<usize>,
    },
    /// Frequency responses, errors and impulse responses as CSV.
    Analyze {
        artifact: PathBuf,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// `all` or one band centre in bins.
        #[arg(long, default_value = "all")]
        b: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Complexity tables for one or more artifacts.
    Report {
        #[arg(required = true)]
        artifacts: Vec<PathBuf>,
        /// Write the JSON document here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Leave out the published comparison rows.
        #[arg(long)]
        no_literature: bool,
    },
    /// Engine vs naive block filter vs time-varying convolution.
    OracleCheck {
        artifact: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: 1,
            msg: format!("{}: {e}", path.display()),
        }
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } | Error::ExchangeDiverged(_) => 3,
            Error::Lp(_) | Error::AffineMismatch(_) | Error::ShiftRuleNotFound(_) | Error::Nonlinear(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn load_artifact(path: &Path) -> Result<(DesignArtifact, BinSpec, Profile), Failure> {
    let text = String::from_utf8(read(path)?).map_err(|e| Failure::invalid(e.to_string()))?;
    let a = DesignArtifact::from_json(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    let bins = a.bins()?;
    let profile = a.profile::<f64>()?;
    Ok((a, bins, profile))
}

fn cmd_design(
    spec_path: &Path,
    out: &Path,
    report: &Path,
    overrides: (Option<usize>, Option<usize>, Option<usize>, Option<usize>),
    max_order_factor: usize,
    verify_factor: usize,
) -> Outcome {
    let text = String::from_utf8(read(spec_path)?).map_err(|e| Failure::invalid(e.to_string()))?;
    let file = specfile::parse(&text).map_err(|e| Failure::invalid(format!("{}: {e}", spec_path.display())))?;
    let (n, l, k, p) = overrides;
    let defaults = DesignOptions::default();
    let opts = DesignOptions {
        fft_len: n.or(file.fft_len),
        filter_len: l.or(file.filter_len),
        grid_k: k.or(file.grid_k).unwrap_or(defaults.grid_k),
        facets: p.or(file.facets).unwrap_or(defaults.facets),
        max_order_factor,
        verify_factor,
        ..defaults
    };
    let result: DesignResult<f64> = design(&file.spec, &opts)?;
    for a in &result.attempts {
        match a.delta {
            Some(d) => eprintln!("L = {:3}  N = {:4}  delta = {d:.6e}", a.filter_len, a.fft_len),
            None => eprintln!("L = {:3}  N = {:4}  off the bin grid, skipped", a.filter_len, a.fft_len),
        }
    }
    let artifact = DesignArtifact::from_result(&result);
    write(out, artifact.to_json())?;
    let ver = match &result.verification {
        Some(v) => v.clone(),
        None => verify(&result, 4 * result.grid_k)?,
    };
    let doc = json!({
        "delta": ver.delta,
        "per_b_max": ver.per_b_max,
        "per_n_max": ver.per_n_max,
        "pass": ver.pass && result.meets_spec(),
        "passband_max": ver.passband_max,
        "stopband_max": ver.stopband_max,
        "grid_K": ver.grid_k,
        "max_error": ver.max_error,
    });
    write(report, serde_json::to_string_pretty(&doc).expect("json"))?;
    println!(
        "L = {}, N = {}, M = {}, delta = {:.6e} (dense {:.6e}), max error {:.6e}",
        result.bins.filter_len,
        result.bins.fft_len,
        result.bins.block_len,
        result.delta_achieved,
        ver.delta,
        result.max_error
    );
    Ok(if result.meets_spec() { 0 } else { 3 })
}

/// Streams `x` through the engine, switching band centres at block
/// boundaries as listed in `per_block`.
fn run_engine(engine: &mut Engine, x: &[f64], per_block: &[usize]) -> Result<Vec<f64>, Failure> {
    let m = engine.block_len();
    let mut y = Vec::with_capacity(x.len() + m);
    for (j, chunk) in x.chunks(m).enumerate() {
        engine.set_bandwidth(per_block[j])?;
        y.extend(engine.push(chunk));
    }
    y.extend(engine.flush());
    y.truncate(x.len());
    Ok(y)
}

fn cmd_run(
    artifact: &Path,
    input: &Path,
    output: &Path,
    schedule: Option<&Path>,
    format: &str,
    b: Option<usize>,
) -> Outcome {
    let format: SignalFormat = format.parse()?;
    let (_, bins, profile) = load_artifact(artifact)?;
    let x = read_signal(&read(input)?, format)?;
    let initial = b.unwrap_or(bins.band_low);
    bins.check_band(initial)?;
    let switches = match schedule {
        Some(p) => {
            let text = String::from_utf8(read(p)?).map_err(|e| Failure::invalid(e.to_string()))?;
            parse_schedule(&text, &bins)?
        }
        None => Vec::new(),
    };
    let blocks = x.len().div_ceil(bins.block_len);
    let per_block = expand_schedule(initial, &switches, blocks);
    let mut engine = Engine::new(&bins, &profile, initial)?;
    let y = run_engine(&mut engine, &x, &per_block)?;
    write(output, write_signal(&y, format))?;
    Ok(0)
}

fn cmd_analyze(artifact: &Path, grid_k: usize, which: &str, out_dir: &Path) -> Outcome {
    let (_, bins, profile) = load_artifact(artifact)?;
    let centres: Vec<usize> = if which == "all" {
        bins.band_centres().collect()
    } else {
        let b: usize = which
            .parse()
            .map_err(|_| Failure::invalid(format!("--b expects 'all' or an integer, got '{which}'")))?;
        bins.check_band(b)?;
        vec![b]
    };
    fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;
    let grid = FrequencyGrid::<f64>::new(&bins, grid_k)?;
    let rule = calibrate_for::<f64>(bins.fft_len, bins.filter_len)?;
    let mut csv = String::from("b_N,n,omega,abs_H,abs_E\n");
    let mut stop_max = 0.0f64;
    let mut err_max = 0.0f64;
    for &b in &centres {
        let h = dft_coefficients(&bins, &profile, b)?;
        let set: PtvirSet<f64> = ptvir_from_base(&base_response_idft(&h)?, &rule);
        let (_, stop_edge) = fcvbw::ptvir::band_edges::<f64>(&bins, b);
        for n in 0..bins.block_len {
            for &w in &grid.points {
                let hn = response_hn(&set, n, w)?;
                let err = desired_response(w, &bins, b).ok().map(|d| (hn - d).norm());
                if w >= stop_edge {
                    stop_max = stop_max.max(hn.norm());
                }
                if let Some(e) = err {
                    err_max = err_max.max(e);
                }
                csv.push_str(&format!(
                    "{b},{n},{},{},{}\n",
                    fmt_f64(w),
                    fmt_f64(hn.norm()),
                    err.map(fmt_f64).unwrap_or_default()
                ));
            }
        }
        write(&out_dir.join(format!("ptvir_b{b}.csv")), set.to_csv())?;
    }
    write(&out_dir.join("responses.csv"), csv)?;
    let profile_csv: String = profile
        .values()
        .iter()
        .enumerate()
        .map(|(r, v)| format!("{r},{}\n", fmt_f64(*v)))
        .collect();
    write(&out_dir.join("profile.csv"), format!("r,V\n{profile_csv}"))?;
    println!("max |E| = {}", fmt_f64(err_max));
    println!("max stopband |H| = {}", fmt_f64(stop_max));
    Ok(0)
}

fn cmd_report(artifacts: &[PathBuf], json_out: Option<&Path>, no_literature: bool) -> Outcome {
    let mut rows = Vec::new();
    let mut general = Vec::new();
    for p in artifacts {
        let (_, bins, profile) = load_artifact(p)?;
        rows.push((special_case_rates(&bins, Some(&profile)), design_complexity(&bins)));
        general.push(general_rates(&bins));
    }
    let doc = emit_report(&rows, !no_literature);
    let value = json!({
        "designs": doc.designs.iter().map(|(r, d)| json!({"implementation": r, "design": d})).collect::<Vec<_>>(),
        "general": general,
        "literature": doc.literature,
        "literature_design": doc.literature_design,
        "savings": doc.savings,
    });
    let text = serde_json::to_string_pretty(&value).expect("json");
    match json_out {
        Some(p) => {
            write(p, &text)?;
            print!("{}", doc.markdown);
        }
        None => {
            print!("{}", doc.markdown);
            println!("\n{text}");
        }
    }
    Ok(0)
}

fn cmd_oracle_check(artifact: &Path, samples: usize, seed: u64) -> Outcome {
    let (_, bins, profile) = load_artifact(artifact)?;
    let rule = calibrate_for::<f64>(bins.fft_len, bins.filter_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    println!("seed = {seed}, samples per run = {samples}");
    let centres: Vec<usize> = bins.band_centres().collect();
    let mut tables = Vec::new();
    let mut sets = Vec::new();
    for &b in &centres {
        let h = dft_coefficients(&bins, &profile, b)?;
        sets.push(ptvir_from_base(&base_response_idft(&h)?, &rule));
        tables.push(h);
    }
    let blocks = samples.div_ceil(bins.block_len);
    let mut runs: Vec<(String, Vec<usize>)> = (0..centres.len())
        .map(|i| (format!("b_N = {}", centres[i]), vec![i; blocks]))
        .collect();
    // mid-stream switches through the whole range
    let switched: Vec<usize> = (0..blocks).map(|j| (j / 7 * 3) % centres.len()).collect();
    runs.push(("switched".into(), switched));

    let mut worst = 0.0f64;
    for (label, per_block) in &runs {
        let x: Vec<f64> = (0..samples).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b_blocks: Vec<usize> = per_block.iter().map(|&i| centres[i]).collect();
        let mut engine = Engine::new(&bins, &profile, b_blocks[0])?;
        let ye = run_engine(&mut engine, &x, &b_blocks)?;

        let mut naive = NaiveBlockFilter::new(&tables[per_block[0]], bins.block_len)?;
        let mut yn = Vec::with_capacity(blocks * bins.block_len);
        for (j, chunk) in x.chunks(bins.block_len).enumerate() {
            naive.set_coefficients(&tables[per_block[j]])?;
            let mut block = chunk.to_vec();
            block.resize(bins.block_len, 0.0);
            yn.extend(naive.process_block(&block)?);
        }
        yn.truncate(samples);

        let refs: Vec<&PtvirSet<f64>> = sets.iter().collect();
        let yl = lptv_convolution_switched(&refs, per_block, &x);

        let dev = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let (en, el, nl) = (dev(&ye, &yn), dev(&ye, &yl), dev(&yn, &yl));
        worst = worst.max(en).max(el).max(nl);
        println!(
            "{label:>10}: engine-naive {} engine-lptv {} naive-lptv {}",
            fmt_f64(en),
            fmt_f64(el),
            fmt_f64(nl)
        );
    }
    let pass = worst <= 1e-9;
    println!("max deviation {} -> {}", fmt_f64(worst), if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 4 })
}

fn configure_threads() {
    if let Some(n) = std::env::var("FCVBW_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // ignore the error if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Design {
            spec,
            out,
            report,
            fft_len,
            filter_len,
            grid_k,
            facets,
            max_order_factor,
            verify_factor,
        } => cmd_design(
            &spec,
            &out,
            &report,
            (fft_len, filter_len, grid_k, facets),
            max_order_factor,
            verify_factor,
        ),
        Cmd::Run {
            artifact,
            input,
            output,
            schedule,
            format,
            b,
        } => cmd_run(&artifact, &input, &output, schedule.as_deref(), &format, b),
        Cmd::Analyze {
            artifact,
            grid,
            b,
            out_dir,
        } => cmd_analyze(&artifact, grid, &b, &out_dir),
        Cmd::Report {
            artifacts,
            json,
            no_literature,
        } => cmd_report(&artifacts, json.as_deref(), no_literature),
        Cmd::OracleCheck { artifact, samples, seed } => cmd_oracle_check(&artifact, samples, seed),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
