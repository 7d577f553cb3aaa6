use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use msrcode::{CodeParams, NodeIndex};
use msrcode_cli::commands::{self, PARAMS_FILE};
use msrcode_cli::CliError;

#[derive(Parser)]
#[command(
    name = "msr",
    version,
    about = "Encode, decode and repair files with a high-rate MSR code"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for a valid shift coefficient and write params.txt
    Init {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        t: usize,
        /// Field degree; chosen automatically when omitted
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Split a file into n shards
    Encode {
        input: PathBuf,
        /// Parameter file written by init (defaults to <out-dir>/params.txt)
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Rebuild the file from exactly k shards
    Decode {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(required = true)]
        shards: Vec<PathBuf>,
    },
    /// Rebuild one shard from the d surviving ones
    Repair {
        #[arg(long)]
        manifest: PathBuf,
        /// Failed node as i,theta
        #[arg(long, value_parser = parse_node)]
        node: (usize, usize),
        /// Output shard path (defaults to the canonical name beside the manifest)
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(required = true)]
        helpers: Vec<PathBuf>,
    },
    /// Check that every k shards determine the file
    Verify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print code parameters
    Stats {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 16)]
        m: u32,
    },
}

fn parse_node(s: &str) -> Result<(usize, usize), String> {
    let (i, theta) = s.split_once(',').ok_or("expected i,theta")?;
    let i = i.trim().parse().map_err(|_| format!("bad class {i:?}"))?;
    let theta = theta
        .trim()
        .parse()
        .map_err(|_| format!("bad theta {theta:?}"))?;
    Ok((i, theta))
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Init { q, t, m, out_dir } => {
            let r = commands::init(q, t, m, &out_dir)?;
            println!(
                "q={} t={} m={} reduction_poly={:#x} c0={}",
                r.manifest.q, r.manifest.t, r.manifest.m, r.manifest.reduction_poly, r.manifest.c0
            );
            println!("wrote {}", r.path.display());
        }
        Cmd::Encode {
            input,
            params,
            out_dir,
        } => {
            let params = params.unwrap_or_else(|| out_dir.join(PARAMS_FILE));
            let r = commands::encode(&input, &params, &out_dir)?;
            println!(
                "{} stripes, {} shards, manifest {}",
                r.manifest.stripe_count.unwrap_or(0),
                r.shards.len(),
                r.manifest_path.display()
            );
        }
        Cmd::Decode {
            manifest,
            output,
            shards,
        } => {
            let r = commands::decode(&manifest, &shards, &output)?;
            println!("wrote {} bytes to {}", r.file_length, output.display());
        }
        Cmd::Repair {
            manifest,
            node,
            output,
            helpers,
        } => {
            let failed = NodeIndex {
                class: node.0,
                theta: node.1,
            };
            let output = output.unwrap_or_else(|| {
                manifest
                    .parent()
                    .unwrap_or(std::path::Path::new("."))
                    .join(msrcode_cli::shard::shard_file_name(failed))
            });
            let r = commands::repair(&manifest, failed, &helpers, &output)?;
            println!("{r}");
            println!("wrote {}", output.display());
        }
        Cmd::Verify {
            manifest,
            trials,
            seed,
        } => {
            let r = commands::verify(&manifest, trials, seed)?;
            println!("{r}");
            if !r.passed() {
                return Err(CliError::Verification(format!(
                    "{} does not describe an MDS code",
                    manifest.display()
                )));
            }
        }
        Cmd::Stats { q, t, m } => {
            let p = CodeParams::new(q, t, m)?;
            println!("{}", commands::stats(&p));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
