use std::path::PathBuf;
use std::process::ExitCode;

use absls::cli::{
    default_suite, parse_config, render_config, resolve_out_dir, run_suite, verify, SuiteConfig,
};

const USAGE: &str = "\
absls - ABS least-squares solvers and benchmark harness

USAGE:
    absls run <config|--default> [--workers N] [--out DIR] [--seed-offset K]
    absls verify <config|--default> [--seed-offset K]
    absls default-config

SUBCOMMANDS:
    run             generate the suite, run every method on every problem,
                    write results.txt, results.csv and both scoreboards
    verify          run the invariant checks on the configured suite
    default-config  print the built-in desk-scale suite configuration

OPTIONS:
    --workers N      number of parallel problem workers (overrides config)
    --out DIR        output directory (overrides config; env ABSLS_OUT_DIR
                     overrides both)
    --seed-offset K  added to every problem seed
";

struct Args {
    config: Option<String>,
    use_default: bool,
    workers: Option<usize>,
    out: Option<PathBuf>,
    seed_offset: Option<u64>,
}

fn parse_args(mut argv: impl Iterator<Item = String>) -> Result<(String, Args), String> {
    let sub = argv.next().ok_or_else(|| USAGE.to_string())?;
    let mut args = Args {
        config: None,
        use_default: false,
        workers: None,
        out: None,
        seed_offset: None,
    };
    while let Some(arg) = argv.next() {
        match arg.as_str() {
            "--default" => args.use_default = true,
            "--workers" => {
                let v = argv.next().ok_or("--workers needs a value")?;
                args.workers = Some(v.parse().map_err(|_| "--workers needs an integer")?);
            }
            "--out" => {
                let v = argv.next().ok_or("--out needs a value")?;
                args.out = Some(PathBuf::from(v));
            }
            "--seed-offset" => {
                let v = argv.next().ok_or("--seed-offset needs a value")?;
                args.seed_offset = Some(v.parse().map_err(|_| "--seed-offset needs an integer")?);
            }
            other if args.config.is_none() && !other.starts_with('-') => {
                args.config = Some(other.to_string());
            }
            other => return Err(format!("unexpected argument '{other}'\n\n{USAGE}")),
        }
    }
    Ok((sub, args))
}

fn load_config(args: &Args) -> Result<SuiteConfig, String> {
    let mut config = if args.use_default {
        default_suite()
    } else {
        let path = args
            .config
            .as_ref()
            .ok_or(format!("missing config path (or --default)\n\n{USAGE}"))?;
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
        parse_config(&text).map_err(|e| e.to_string())?
    };
    if let Some(w) = args.workers {
        config.workers = w.max(1);
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    if let Some(k) = args.seed_offset {
        config.seed_offset = k;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let (sub, args) = match parse_args(std::env::args().skip(1)) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    match sub.as_str() {
        "default-config" => {
            print!("{}", render_config(&default_suite()));
            ExitCode::SUCCESS
        }
        "run" => {
            let config = match load_config(&args) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("{msg}");
                    return ExitCode::from(1);
                }
            };
            match run_suite(&config) {
                Ok(output) => {
                    for w in &output.warnings {
                        eprintln!("warning: {w}");
                    }
                    let dir = resolve_out_dir(&config);
                    println!(
                        "{} result rows written under {}",
                        output.rows.len(),
                        dir.display()
                    );
                    if output.panics > 0 {
                        eprintln!("{} solver invocation(s) panicked", output.panics);
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        "verify" => {
            let config = match load_config(&args) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("{msg}");
                    return ExitCode::from(1);
                }
            };
            match verify(&config) {
                Ok(report) => {
                    print!("{}", report.render());
                    if report.all_passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(3)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        other => {
            eprintln!("unknown subcommand '{other}'\n\n{USAGE}");
            ExitCode::from(1)
        }
    }
}
