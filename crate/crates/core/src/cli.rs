//! Command-line front end. Symbol indices in every file refer to the order
//! of the distribution file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};

use crate::codec::{decode, encode, entropy, huffman, read_container, write_container, CodePair};
use crate::codetree::CodeTree;
use crate::error::{Error, Result};
use crate::geometry::envelope_at;
use crate::numeric::{dyadic_grid, format_dist, parse_dist_text, random_dist, ExactScalar, SourceDist};
use crate::solvers::{solve, Method, SolveReport};
use crate::treeopt::N_MAX;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "aifv2", version, about = "Optimal binary AIFV-2 codes")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct an optimal code pair and write t0.tree / t1.tree.
    Solve {
        #[arg(short, long)]
        input: PathBuf,
        /// Directory for the tree files.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "binary-search", value_parser = parse_method)]
        method: Method,
    },
    /// Encode a message with a solved code pair.
    Encode {
        #[arg(long)]
        trees: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Decode a container written by `encode`.
    Decode {
        #[arg(long)]
        trees: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Entropy, optimal AIFV-2 cost and Huffman cost side by side.
    Compare {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value = "binary-search", value_parser = parse_method)]
        method: Method,
    },
    /// Tab-separated samples of E0, E1 and min(E0, E1) on [0, 1].
    Envelope {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve every dyadic distribution on a grid, plus optional random ones.
    Sweep {
        #[arg(long, default_value_t = 5)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        bits: u32,
        #[arg(long, default_value = "binary-search", value_parser = parse_method)]
        method: Method,
        /// Extra random distributions.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>()
        .map_err(|_| format!("unknown method {s:?}; expected binary-search, ellipsoid, iterative or exhaustive"))
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cfg.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::File {
        path: path.display().to_string(),
        source,
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(file_err(path))
}

fn read_dist(path: &Path) -> Result<SourceDist> {
    parse_dist_text(&read_text(path)?)
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_pair(dir: &Path) -> Result<CodePair> {
    let t0 = CodeTree::from_text(&read_text(&dir.join("t0.tree"))?)?;
    let t1 = CodeTree::from_text(&read_text(&dir.join("t1.tree"))?)?;
    CodePair::new(t0, t1)
}

/// Whitespace-separated tokens: decimal indices, or runs of lowercase
/// letters where `a` is symbol 0.
pub fn parse_message(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            if tok.bytes().all(|c| c.is_ascii_digit()) {
                out.push(tok.parse().map_err(|_| Error::Parse {
                    line: line_no + 1,
                    message: format!("bad symbol index {tok:?}"),
                })?);
            } else if tok.bytes().all(|c| c.is_ascii_lowercase()) {
                out.extend(tok.bytes().map(|c| usize::from(c - b'a')));
            } else {
                return Err(Error::Parse {
                    line: line_no + 1,
                    message: format!("bad symbol {tok:?}"),
                });
            }
        }
    }
    Ok(out)
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Solve { input, output, method } => {
            let dist = read_dist(&input)?;
            let report = solve(&dist, method)?;
            if let Some(dir) = output {
                fs::create_dir_all(&dir)?;
                let pair = report.input_order_pair(&dist);
                fs::write(dir.join("t0.tree"), pair.t0().to_text())?;
                fs::write(dir.join("t1.tree"), pair.t1().to_text())?;
            }
            out.write_all(report.render(&dist).as_bytes())?;
        }
        Command::Encode { trees, input, output } => {
            let pair = read_pair(&trees)?;
            let msg = parse_message(&read_text(&input)?)?;
            let bits = encode(&msg, &pair)?;
            fs::write(&output, write_container(pair.alphabet_size(), msg.len(), &bits))?;
            writeln!(out, "symbols: {}", msg.len())?;
            writeln!(out, "bits: {}", bits.len())?;
        }
        Command::Decode { trees, input, output } => {
            let pair = read_pair(&trees)?;
            let (n, count, bits) = read_container(&fs::read(&input).map_err(file_err(&input))?)?;
            if n != pair.alphabet_size() {
                return Err(Error::Container(format!(
                    "container alphabet {n} does not match trees ({})",
                    pair.alphabet_size()
                )));
            }
            let msg = decode(&bits, count, &pair)?;
            let mut text = msg.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
            text.push('\n');
            emit(&text, output.as_deref(), out)?;
        }
        Command::Compare { input, method } => {
            let dist = read_dist(&input)?;
            let report = solve(&dist, method)?;
            let (_, huff) = huffman(&dist);
            let h = entropy(&dist);
            let redundancy = report.cost.to_f64() - h;
            writeln!(out, "entropy: {h:.12}")?;
            writeln!(out, "aifv2: {} ({})", report.cost, report.cost.to_decimal(12))?;
            writeln!(out, "huffman: {} ({})", huff, huff.to_decimal(12))?;
            writeln!(out, "gain: {}", &huff - &report.cost)?;
            writeln!(out, "redundancy: {redundancy:.12}")?;
            let ordered = h <= report.cost.to_f64() + 1e-12 && report.cost <= huff;
            writeln!(out, "ordering holds: {}", ordered)?;
            writeln!(out, "redundancy <= 1/2: {}", redundancy <= 0.5)?;
        }
        Command::Envelope { input, samples, output } => {
            let dist = read_dist(&input)?;
            if samples < 2 {
                return Err(Error::InvalidNumber(format!("samples = {samples} (need at least 2)")));
            }
            let mut text = String::new();
            for k in 0..samples {
                let x = ExactScalar::ratio(k as i64, (samples - 1) as i64)?;
                let e = envelope_at(&x, &dist)?;
                text.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    x.to_decimal(12),
                    e.e0.to_decimal(12),
                    e.e1.to_decimal(12),
                    e.m().to_decimal(12)
                ));
            }
            emit(&text, output.as_deref(), out)?;
        }
        Command::Sweep {
            max_n,
            bits,
            method,
            samples,
            seed,
            output,
        } => {
            if max_n > N_MAX {
                return Err(Error::TooLarge {
                    what: "sweep",
                    n: max_n,
                    cap: N_MAX,
                });
            }
            let mut dists: Vec<SourceDist> = (2..=max_n).flat_map(|n| dyadic_grid(n, bits)).collect();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            for _ in 0..samples {
                let n = rng.gen_range(2..=max_n.max(2));
                if let Ok(d) = random_dist(&mut rng, n, bits) {
                    dists.push(d);
                }
            }
            let text = sweep(&dists, method)?;
            emit(&text, output.as_deref(), out)?;
        }
    }
    Ok(())
}

fn sweep(dists: &[SourceDist], method: Method) -> Result<String> {
    let mut text = String::from("# probs\tcost\thuffman\tentropy\tgain\n");
    let mut strict = 0;
    let mut best: Option<(ExactScalar, String)> = None;
    for dist in dists {
        let report: SolveReport = solve(dist, method)?;
        let (_, huff) = huffman(dist);
        let gain = &huff - &report.cost;
        let probs = format_dist(dist).trim_end().replace('\n', " ");
        if gain.is_positive() {
            strict += 1;
            if best.as_ref().is_none_or(|(g, _)| &gain > g) {
                best = Some((gain.clone(), probs.clone()));
            }
        }
        text.push_str(&format!(
            "{}\t{}\t{}\t{:.12}\t{}\n",
            probs,
            report.cost,
            huff,
            entropy(dist),
            gain
        ));
    }
    text.push_str(&format!("# instances: {}\n# strict improvements: {}\n", dists.len(), strict));
    if let Some((g, p)) = best {
        text.push_str(&format!("# largest gain: {g} at {p}\n"));
    }
    Ok(text)
}
