use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::json;

use selfaction_core::config::{RunConfig, CONFIG_ENV, KEYS};
use selfaction_core::mass::is_bracket_failure;
use selfaction_core::report::{self, Cell, Table};
use selfaction_core::verify;
use selfaction_core::Error;

fn cli() -> Command {
    let mut cmd = Command::new("selfaction")
        .about("Self-action spinor solutions: electron series, neutrino mass, proton scan")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .env(CONFIG_ENV)
                .global(true)
                .value_name("FILE")
                .help("key = value configuration file"),
        )
        .subcommand(Command::new("electron").about("Series, figure curves and join report"))
        .subcommand(Command::new("neutrino-mass").about("Closed-form and exact mass solves with the term audit"))
        .subcommand(Command::new("proton-scan").about("Scan of the Yukawa coupling n"))
        .subcommand(
            Command::new("verify")
                .about("Run the acceptance criteria")
                .arg(Arg::new("list").long("list").action(ArgAction::SetTrue).help("list criteria without running"))
                .arg(
                    Arg::new("criterion")
                        .long("criterion")
                        .value_name("ID")
                        .value_parser(clap::value_parser!(u8))
                        .action(ArgAction::Append)
                        .help("run only these criteria"),
                ),
        )
        .subcommand(Command::new("config").about("Print the effective configuration"));
    for (key, help) in KEYS {
        cmd = cmd.arg(Arg::new(*key).long(*key).global(true).value_name("VALUE").help(*help));
    }
    cmd
}

fn load_config(m: &ArgMatches) -> Result<RunConfig> {
    let overrides: BTreeMap<String, String> = KEYS
        .iter()
        .filter_map(|(k, _)| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect();
    let file = m.get_one::<String>("config").map(PathBuf::from);
    Ok(RunConfig::layered(file.as_deref(), &overrides)?)
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    Ok(&cfg.output_dir)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

fn cmd_electron(cfg: &RunConfig) -> Result<()> {
    let run = report::electron_run(cfg)?;
    let dir = output_dir(cfg)?;
    for t in &run.figures {
        println!("wrote {}", t.write(dir)?.display());
    }
    let golden = dir.join("series.golden");
    std::fs::write(&golden, report::golden_text()?)?;
    println!("wrote {}", golden.display());
    let join = json!({
        "order": cfg.order,
        "alpha": cfg.constants.alpha,
        "eta": run.mass.eta_root,
        "beta": run.mass.beta,
        "joins": run.joins,
    });
    println!("wrote {}", write_json(dir, "join_report.json", &join)?.display());
    for j in &run.joins {
        println!(
            "join {:?}: value mismatch {:.3e}, slope mismatch {:.3e}, smooth {}",
            j.family, j.value_mismatch, j.slope_mismatch, j.smooth
        );
    }
    Ok(())
}

fn cmd_neutrino_mass(cfg: &RunConfig) -> Result<()> {
    let run = report::mass_run(cfg)?;
    let dir = output_dir(cfg)?;
    let mut t = Table::new("neutrino_mass", &["mode", "eta_root", "beta", "m_nu_eV", "residual_at_root"]);
    for r in [&run.closed_form, &run.exact] {
        t.push(vec![
            Cell::Text(r.mode.as_str().into()),
            r.eta_root.into(),
            r.beta.into(),
            r.m_nu_ev.into(),
            r.residual_at_root.into(),
        ]);
        println!("{:<16} m_nu = {:.6} eV  eta = {:.6e}  beta = {:.6e}", r.mode.as_str(), r.m_nu_ev, r.eta_root, r.beta);
    }
    println!("relative difference (exact vs closed form): {:+.4e}", run.relative_difference);
    println!("wrote {}", t.write(dir)?.display());
    println!("wrote {}", run.audit_table().write(dir)?.display());
    println!("wrote {}", write_json(dir, "neutrino_mass.json", &serde_json::to_value(&run)?)?.display());
    Ok(())
}

fn cmd_proton_scan(cfg: &RunConfig) -> Result<bool> {
    cfg.scan_ns()?;
    let beta = report::electron_beta(cfg)?;
    let scan = report::proton_run(cfg, beta)?;
    let dir = output_dir(cfg)?;
    println!("wrote {}", report::scan_table(&scan).write(dir)?.display());
    println!("wrote {}", write_json(dir, "proton_report.json", &serde_json::to_value(&scan)?)?.display());
    let ok = scan.rows.iter().filter(|r| r.error.is_none()).count();
    println!("{ok} of {} rows integrated", scan.rows.len());
    if scan.n_calibrated.is_empty() {
        println!("no zero of the condition in n at the target damping");
    }
    for (n, sign) in &scan.n_calibrated {
        println!("condition vanishes at n = {n:.6} (Coulomb sign {sign:+})");
    }
    Ok(ok > 0)
}

fn cmd_verify(cfg: &RunConfig, m: &ArgMatches) -> Result<bool> {
    if m.get_flag("list") {
        for (id, name) in verify::list() {
            println!("{id:>2} {name}");
        }
        return Ok(true);
    }
    let ids: Vec<u8> = match m.get_many::<u8>("criterion") {
        Some(v) => v.copied().collect(),
        None => verify::list().iter().map(|c| c.0).collect(),
    };
    let mut all = true;
    for id in ids {
        let r = verify::run(id, cfg)?;
        println!("{}", r.line());
        all &= r.passed;
    }
    println!("{}", if all { "all criteria passed" } else { "acceptance FAILED" });
    Ok(all)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Parse(_) | Error::InvalidParameter { .. }) => 2,
        Some(err) if is_bracket_failure(err) => 3,
        _ => 1,
    }
}

fn run(m: &ArgMatches) -> Result<bool> {
    let cfg = load_config(m)?;
    match m.subcommand() {
        Some(("electron", _)) => cmd_electron(&cfg).map(|_| true),
        Some(("neutrino-mass", _)) => cmd_neutrino_mass(&cfg).map(|_| true),
        Some(("proton-scan", _)) => cmd_proton_scan(&cfg),
        Some(("verify", sub)) => cmd_verify(&cfg, sub),
        Some(("config", _)) => {
            print!("{}", cfg.to_text());
            Ok(true)
        }
        _ => unreachable!("subcommand is required"),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match run(&matches) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
