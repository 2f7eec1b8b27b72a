use std::process::ExitCode;

use clap::Parser;
use dyadic_cli::artifacts::ArtifactError;
use dyadic_cli::config::{Cli, Command};
use dyadic_cli::{cmd_build, cmd_estimate, cmd_export_graph, cmd_verify, Outcome};
use serde_json::json;

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(a) = e.downcast_ref::<ArtifactError>() {
        return match a {
            ArtifactError::Missing(_) => "MissingArtifact",
            ArtifactError::CorruptArtifact { .. } => "CorruptArtifact",
        };
    }
    if e.downcast_ref::<dyadic_core::Error>().is_some() {
        return "Construction";
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return "Io";
    }
    "Operational"
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Build(cfg) => {
            let m = cmd_build(&cfg)?;
            println!("built {} points into {}", m.points, cfg.out.display());
            Ok(Outcome::Pass)
        }
        Command::Verify(args) => {
            let outcome = cmd_verify(&args.dir)?;
            println!("verify: {}", if outcome == Outcome::Pass { "pass" } else { "violations" });
            Ok(outcome)
        }
        Command::Estimate(args) => {
            let est = cmd_estimate(&args.dir, args.workers)?;
            if est.floor {
                println!("estimate: <= {} (every tested p decays)", est.estimate);
            } else {
                println!("estimate: {} in [{}, {}]", est.estimate, est.p_low, est.p_high);
            }
            Ok(Outcome::Pass)
        }
        Command::ExportGraph(args) => {
            let path = cmd_export_graph(&args.dir, args.level, args.scale, args.family, args.output.as_deref())?;
            println!("wrote {}", path.display());
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => ExitCode::from(o.exit_code() as u8),
        Err(e) => {
            let record = json!({"error": error_kind(&e), "message": format!("{e:#}")});
            eprintln!("{record}");
            ExitCode::from(1)
        }
    }
}
