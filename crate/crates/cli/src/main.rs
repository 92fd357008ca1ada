//! `buaf`: compress, decompress and evaluate ECG records with the unwinding codec.

mod plot;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use unwinding_codec::ingest::read_record;
use unwinding_codec::pipeline::{
    compress_record, decompress, evaluate_record, SessionConfig, CSV_HEADER,
};

/// Exit status when every window was processed but some were stored raw.
const EXIT_FALLBACK: u8 = 2;

#[derive(Parser)]
#[command(name = "buaf", version, about = "ECG compression by Blaschke unwinding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress the first lead of a record into a .buaf stream.
    Compress {
        #[command(flatten)]
        session: SessionArgs,
        /// Output directory.
        #[arg(long, env = "BUAF_OUT", default_value = ".")]
        out: PathBuf,
    },
    /// Reconstruct a record from a .buaf stream and write it as CSV.
    Decompress {
        #[arg(long)]
        stream: PathBuf,
        /// Output CSV file; defaults to the stream path with a .csv extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compress, reconstruct and score a record for one or more levels.
    Evaluate {
        #[command(flatten)]
        session: SessionArgs,
        /// Levels to sweep, e.g. "7,8,10" or "7-14"; defaults to --levels.
        #[arg(long, env = "BUAF_SWEEP")]
        sweep: Option<String>,
        /// Windows to plot for each level.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        plot_windows: Vec<usize>,
        /// Output directory for the report and plots.
        #[arg(long, env = "BUAF_OUT", default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct SessionArgs {
    /// Record base path (without extension) or its .hea file.
    #[arg(long, env = "BUAF_RECORD")]
    record: PathBuf,
    /// Decomposition levels.
    #[arg(long, env = "BUAF_LEVELS", default_value_t = 8)]
    levels: usize,
    /// Samples per window.
    #[arg(long, env = "BUAF_WINDOW", default_value_t = 600)]
    window: usize,
    /// Spacing of the search grid in the disk.
    #[arg(long, env = "BUAF_GRID_RES", default_value_t = 0.02)]
    grid_res: f64,
    /// Largest modulus of a grid point.
    #[arg(long, env = "BUAF_RMAX", default_value_t = 0.95)]
    rmax: f64,
    /// Distance kept between extracted zeros and the unit circle.
    #[arg(long, env = "BUAF_DELTA", default_value_t = 0.05)]
    delta: f64,
    /// Store unquantized parameters without entropy coding.
    #[arg(long, env = "BUAF_BYPASS_QUANTIZATION")]
    bypass_quantization: bool,
    /// Worker threads; 0 uses one per core.
    #[arg(long, env = "BUAF_WORKERS", default_value_t = 0)]
    workers: usize,
}

impl SessionArgs {
    fn config(&self, levels: usize) -> SessionConfig {
        SessionConfig {
            n_levels: levels,
            window_len: self.window,
            grid_resolution: self.grid_res,
            r_max: self.rmax,
            delta: self.delta,
            bypass_quantization: self.bypass_quantization,
            worker_count: self.workers,
        }
    }

    fn check_record(&self) -> Result<()> {
        if self.record.as_os_str().is_empty() {
            bail!("--record must not be empty");
        }
        Ok(())
    }
}

fn parse_sweep(spec: &str) -> Result<Vec<usize>> {
    let mut levels = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty level range {part}");
                }
                levels.extend(a..=b);
            }
            None => levels.push(part.parse().with_context(|| format!("bad level {part:?}"))?),
        }
    }
    if levels.is_empty() {
        bail!("no levels in {spec:?}");
    }
    Ok(levels)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn compress(session: &SessionArgs, out: &Path) -> Result<bool> {
    session.check_record()?;
    let record = read_record(&session.record)?;
    let config = session.config(session.levels);
    let compressed = compress_record(&record, &config)?;
    create_dir(out)?;
    let stream_path = out.join(format!("{}.buaf", record.record_id));
    fs::write(&stream_path, compressed.stream.bytes())
        .with_context(|| format!("cannot write {}", stream_path.display()))?;

    let log_path = out.join(format!("{}.timing.csv", record.record_id));
    let mut log = BufWriter::new(fs::File::create(&log_path)?);
    writeln!(log, "window,seconds,levels,roots,low_precision_roots,fallback")?;
    for w in &compressed.logs {
        writeln!(
            log,
            "{},{:.6},{},{},{},{}",
            w.index,
            w.elapsed.as_secs_f64(),
            w.levels,
            w.roots,
            w.low_precision_roots,
            w.fallback.as_deref().unwrap_or("").replace(',', ";")
        )?;
    }
    log.flush()?;

    for w in compressed.logs.iter().filter(|w| w.fallback.is_some()) {
        eprintln!(
            "window {} stored raw: {}",
            w.index,
            w.fallback.as_deref().unwrap_or_default()
        );
    }
    let cr = compressed.n_inp_bits() as f64 / compressed.n_out_bits() as f64;
    println!(
        "{}: {} windows, {} dropped samples, {} bits, CR {cr:.3}, {} raw, {:.2} s",
        stream_path.display(),
        compressed.logs.len(),
        compressed.dropped_samples,
        compressed.n_out_bits(),
        compressed.fallback_count(),
        compressed.elapsed.as_secs_f64()
    );
    Ok(compressed.fallback_count() == 0)
}

fn decompress_cmd(stream: &Path, out: Option<&Path>) -> Result<bool> {
    let bytes = fs::read(stream).with_context(|| format!("cannot read {}", stream.display()))?;
    let decoded = decompress(&bytes)?;
    let out = out.map_or_else(|| stream.with_extension("csv"), Path::to_path_buf);
    let mut w = BufWriter::new(
        fs::File::create(&out).with_context(|| format!("cannot write {}", out.display()))?,
    );
    writeln!(w, "sample,value")?;
    for (i, v) in decoded.signal.iter().enumerate() {
        writeln!(w, "{i},{v:.6}")?;
    }
    w.flush()?;
    println!(
        "{}: {} samples, {} raw windows, {:.3} s",
        out.display(),
        decoded.signal.len(),
        decoded.raw_windows,
        decoded.elapsed.as_secs_f64()
    );
    Ok(decoded.raw_windows == 0)
}

fn evaluate(
    session: &SessionArgs,
    sweep: Option<&str>,
    plot_windows: &[usize],
    out: &Path,
) -> Result<bool> {
    session.check_record()?;
    let levels = match sweep {
        Some(s) => parse_sweep(s)?,
        None => vec![session.levels],
    };
    let record = read_record(&session.record)?;
    create_dir(out)?;
    let report_path = out.join(format!("{}.report.csv", record.record_id));
    let mut report = BufWriter::new(fs::File::create(&report_path)?);
    writeln!(report, "{CSV_HEADER}")?;
    println!("{CSV_HEADER}");
    let mut clean = true;
    for n in levels {
        let r = evaluate_record(&record, &session.config(n))?;
        let row = r.csv_row();
        writeln!(report, "{row}")?;
        println!("{row}");
        clean &= r.fallback_windows == 0;
        for &w in plot_windows {
            let (lo, hi) = (w * session.window, (w + 1) * session.window);
            if hi > r.original.len() {
                eprintln!("window {w} is beyond the record; not plotted");
                continue;
            }
            let title = format!(
                "record {} window {w}, N = {n}: original (black), reconstruction (blue), error (red)",
                record.record_id
            );
            let svg = plot::window_svg(&title, &r.original[lo..hi], &r.reconstructed[lo..hi]);
            fs::write(out.join(format!("{}_N{n}_w{w}.svg", record.record_id)), svg)?;
        }
    }
    report.flush()?;
    Ok(clean)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compress { session, out } => compress(session, out),
        Command::Decompress { stream, out } => decompress_cmd(stream, out.as_deref()),
        Command::Evaluate {
            session,
            sweep,
            plot_windows,
            out,
        } => evaluate(session, sweep.as_deref(), plot_windows, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FALLBACK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
