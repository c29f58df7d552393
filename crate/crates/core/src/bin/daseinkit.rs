use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use daseinkit::cli::{self, Command, Overrides};
use daseinkit::interp::Delta0Rule;

#[derive(Parser)]
#[command(
    name = "daseinkit",
    version,
    about = "Contexts, daseinisation and stage-wise checks for finite quantum systems"
)]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    rule: Option<Rule>,
    #[arg(long)]
    full_subcontexts: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Build the context category and write contexts.json.
    Contexts(Common),
    /// Outer and inner daseinisation of every operator at every stage.
    Daseinise(Common),
    /// Internal spectra of the stage-wise interpreted Hamiltonian.
    Spectrum(Common),
    /// Lattice, commutativity, zero-energy and Heyting checks.
    Verify(Common),
    /// Stage membership of products, stage automorphisms and the reflection gauge.
    GaugeCheck(Common),
    /// Interchange law and decoration commutativity.
    Twogroup(Common),
    /// Everything.
    All(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    #[value(name = "joint_atom")]
    JointAtom,
    #[value(name = "spectra_only")]
    SpectraOnly,
}

fn main() -> ExitCode {
    // usage errors exit 1: exit 2 is reserved for failed checks
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, common) = match args.command {
        Sub::Contexts(c) => (Command::Contexts, c),
        Sub::Daseinise(c) => (Command::Daseinise, c),
        Sub::Spectrum(c) => (Command::Spectrum, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::GaugeCheck(c) => (Command::GaugeCheck, c),
        Sub::Twogroup(c) => (Command::TwoGroup, c),
        Sub::All(c) => (Command::All, c),
    };
    let overrides = Overrides {
        rule: common.rule.map(|r| match r {
            Rule::JointAtom => Delta0Rule::JointAtom,
            Rule::SpectraOnly => Delta0Rule::SpectraOnly,
        }),
        full_subcontexts: common.full_subcontexts,
    };
    let outcome = cli::configure_threads().and_then(|()| cli::run(command, &common.config, &common.out, &overrides));
    match outcome {
        Ok(o) => {
            if o.cache_hit {
                eprintln!("contexts: reused {}", o.out_dir.join(cli::CONTEXTS_FILE).display());
            }
            for name in &o.failed {
                eprintln!("FAIL {name}");
            }
            eprintln!("{:?}: {}", o.status, o.out_dir.join(cli::REPORT_FILE).display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
