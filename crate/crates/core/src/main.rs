use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bfn_core::bfn::Figure1Variant;
use bfn_core::cli_io::{
    cmd_bn_growth, cmd_colehopf_check, cmd_figure1, cmd_run, cmd_verify, error_message, exit_code,
    DEFAULT_GRID_N, DEFAULT_NT,
};
use bfn_core::BfnError;

#[derive(Parser)]
#[command(name = "bfn", version, about = "Back-and-forth nudging laboratory for 1-D transport equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Linear,
    Burgers,
}

#[derive(Subcommand)]
enum Command {
    /// Run BFN from a key = value config; writes report.json and profile.csv.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Decrease-rate profiles for a ladder of final times.
    Figure1 {
        #[arg(value_enum)]
        variant: Variant,
        #[arg(long = "T", value_delimiter = ',', default_value = "0.05,0.25,0.5,0.75,1")]
        times: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_N)]
        grid_n: usize,
        #[arg(long, default_value_t = DEFAULT_NT)]
        nt: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the acceptance suite; writes verify.json.
    Verify {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Growth of the viscous Bürgers final-condition coefficients; writes bn.csv.
    BnGrowth {
        #[arg(long = "K", default_value_t = 1.0)]
        k: f64,
        #[arg(long = "Kp", default_value_t = 1.0)]
        kp: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        #[arg(long = "N", default_value_t = 128)]
        n: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// K = 0 forward/backward round trip of viscous Bürgers through Cole-Hopf.
    ColehopfCheck {
        #[arg(long, default_value_t = 0.05)]
        nu: f64,
        #[arg(long = "T", default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value_t = 0.2)]
        amplitude: f64,
        #[arg(long, default_value_t = 32)]
        modes: usize,
        #[arg(long, default_value_t = 300.0)]
        cap: f64,
        #[arg(long, default_value_t = 513)]
        grid_n: usize,
    },
}

fn execute(command: Command) -> Result<ExitCode, BfnError> {
    match command {
        Command::Run { config, out } => {
            let report = cmd_run(&config, &out)?;
            for it in &report.iterations {
                println!(
                    "iteration {}: ||w(0)|| = {:.6e}, ||w(T)|| = {:.6e}, ||w~(0)|| = {:.6e}",
                    it.iteration, it.w0_norm, it.wt_norm, it.wtilde0_norm
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Figure1 {
            variant,
            times,
            grid_n,
            nt,
            out,
        } => {
            let variant = match variant {
                Variant::Linear => Figure1Variant::Linear,
                Variant::Burgers => Figure1Variant::Burgers,
            };
            let name = cmd_figure1(variant, &times, grid_n, nt, &out)?;
            println!("wrote {}", out.join(name).display());
        }
        Command::Verify { out } => {
            let results = cmd_verify(&out)?;
            for r in &results {
                println!("{}", r.line());
            }
            if let Some(first) = results.iter().find(|r| !r.passed) {
                eprintln!("criterion {} failed: {}", first.id, first.name);
                return Ok(ExitCode::from(1));
            }
        }
        Command::BnGrowth { k, kp, nu, t, n, out } => {
            println!("{}", cmd_bn_growth(k, kp, nu, t, n, &out)?);
        }
        Command::ColehopfCheck {
            nu,
            t,
            amplitude,
            modes,
            cap,
            grid_n,
        } => {
            let dev = cmd_colehopf_check(nu, t, amplitude, modes, cap, grid_n)?;
            println!("max relative round-trip deviation: {dev:.6e}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_message(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
