//! `matdist`: batch analysis of constitutive laws over a body grid.
//!
//! Subcommands: `run <config> [--out <dir>]`, `catalog list`,
//! `check-iso <config> --jet <file>`. `MATDIST_THREADS` caps the number of
//! worker threads for grid sweeps.

mod config;
mod jetfile;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use matdist_core::dsl::CATALOG_NAMES;
use matdist_core::field::{analyze_grid, BodyGrid, FieldConfig};
use matdist_core::foliation::{label_leaves, FoliationConfig, LeafFamily};
use matdist_core::homogeneity::{solve_homogeneity, HomogeneityOptions};
use matdist_core::material::{is_material_isomorphism, SolverConfig};

use config::{parse_config, Command, RunConfig};

const USAGE: &str = "\
usage:
  matdist run <config> [--out <dir>]
  matdist catalog list
  matdist check-iso <config> --jet <file>
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = match args.first().map(String::as_str) {
        Some("run") => cmd_run(&args[1..]),
        Some("catalog") => cmd_catalog(&args[1..]),
        Some("check-iso") => cmd_check_iso(&args[1..]),
        _ => {
            eprint!("{USAGE}");
            Err(2)
        }
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(c) => ExitCode::from(c),
    }
}

fn thread_count() -> usize {
    std::env::var("MATDIST_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|v| *v >= 1)
        .unwrap_or(1)
}

fn load_config(path: &str) -> Result<RunConfig, u8> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("config {path}: {e}");
        2
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("config {path}: {e}");
        2
    })
}

fn cmd_catalog(args: &[String]) -> Result<(), u8> {
    if args != ["list"] {
        eprint!("{USAGE}");
        return Err(2);
    }
    for name in CATALOG_NAMES {
        println!("{name}");
    }
    Ok(())
}

fn cmd_run(args: &[String]) -> Result<(), u8> {
    let mut config_path = None;
    let mut out_dir = PathBuf::from(".");
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => {
                out_dir = PathBuf::from(it.next().ok_or_else(|| {
                    eprintln!("--out: missing directory");
                    2u8
                })?);
            }
            other if config_path.is_none() => config_path = Some(other.to_string()),
            other => {
                eprintln!("unexpected argument `{other}`");
                return Err(2);
            }
        }
    }
    let config_path = config_path.ok_or_else(|| {
        eprint!("{USAGE}");
        2u8
    })?;
    let cfg = load_config(&config_path)?;

    let grid = BodyGrid::new(cfg.lo.clone(), cfg.hi.clone(), cfg.counts.clone()).map_err(|e| {
        eprintln!("grid: {e}");
        2u8
    })?;
    let field_cfg = FieldConfig {
        solver: SolverConfig {
            seed: cfg.seed,
            rel_tol: cfg.rel_tol,
            ..SolverConfig::default()
        },
        compare_tol: 1e-6,
        threads: thread_count(),
    };
    let field = analyze_grid(&cfg.law, &grid, &field_cfg).map_err(|e| {
        eprintln!("analyze: {e}");
        2u8
    })?;
    let mut warnings = field.warnings.clone();

    let labeling = if cfg.commands.contains(&Command::Foliate) {
        let fol_cfg = FoliationConfig {
            tol_angle: cfg.tol_angle,
            ..FoliationConfig::default()
        };
        let l = label_leaves(&field, LeafFamily::Full, &fol_cfg).map_err(|e| {
            eprintln!("foliate: {e}");
            2u8
        })?;
        warnings.extend(l.warnings.clone());
        Some(l)
    } else {
        None
    };

    let homogeneity = if cfg.commands.contains(&Command::Homogeneity) {
        let opts = HomogeneityOptions {
            degree: cfg.degree,
            tol_hom: cfg.tol_hom,
            seed: cfg.seed,
            ..HomogeneityOptions::default()
        };
        Some(solve_homogeneity(&cfg.law, &grid, &opts).map_err(|e| {
            eprintln!("homogeneity: {e}");
            2u8
        })?)
    } else {
        None
    };

    std::fs::create_dir_all(&out_dir).map_err(|e| {
        eprintln!("output directory {}: {e}", out_dir.display());
        2u8
    })?;
    let write = |name: &str, content: String| -> Result<(), u8> {
        let path = out_dir.join(name);
        std::fs::write(&path, content).map_err(|e| {
            eprintln!("{}: {e}", path.display());
            2u8
        })
    };
    write(
        "report.json",
        report::render_report(&cfg, &field, labeling.as_ref(), homogeneity.as_ref(), &warnings),
    )?;
    write("grid.csv", report::render_grid_csv(&field, labeling.as_ref()))?;
    if let Some(l) = &labeling {
        for leaf in 0..l.leaf_count {
            write(&format!("leaf_{leaf:03}.txt"), report::render_leaf_curve(l, leaf))?;
        }
    }

    println!("classification: {}", field.classification.as_str());
    if !warnings.is_empty() {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        return Err(3);
    }
    Ok(())
}

fn cmd_check_iso(args: &[String]) -> Result<(), u8> {
    let mut config_path = None;
    let mut jet_path = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--jet" => {
                jet_path = Some(it.next().cloned().ok_or_else(|| {
                    eprintln!("--jet: missing file");
                    2u8
                })?);
            }
            other if config_path.is_none() => config_path = Some(other.to_string()),
            other => {
                eprintln!("unexpected argument `{other}`");
                return Err(2);
            }
        }
    }
    let (config_path, jet_path) = match (config_path, jet_path) {
        (Some(c), Some(j)) => (c, j),
        _ => {
            eprint!("{USAGE}");
            return Err(2);
        }
    };
    let cfg = load_config(&config_path)?;
    let jet_text = std::fs::read_to_string(Path::new(&jet_path)).map_err(|e| {
        eprintln!("jet file {jet_path}: {e}");
        2u8
    })?;
    let g = jetfile::parse_jet_file(&jet_text, cfg.n).map_err(|e| {
        eprintln!("{e}");
        2u8
    })?;
    let tol = cfg.rel_tol.max(1e-9);
    let (ok, dev) = is_material_isomorphism(&cfg.law, &g, 64, cfg.seed, tol).map_err(|e| {
        eprintln!("check-iso: {e}");
        2u8
    })?;
    println!(
        "material_isomorphism: {}  max_deviation: {:.3e}  tol: {:.3e}",
        ok, dev, tol
    );
    Ok(())
}
