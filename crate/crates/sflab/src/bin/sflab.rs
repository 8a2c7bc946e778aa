//! Command-line front end: batch verification of the spectral-flow formula
//! and direct access to the individual pipelines.

use clap::{Args, Parser, Subcommand};
use sflab::cli::{
    load_symbol_input, run_verify, write_crossings_csv, write_flux_csv, write_report,
    write_traces_csv, GridOverrides, ScenarioConfig,
};
use sflab::scenario::{assemble_path, assemble_psi};
use sflab::spectralflow::{spectral_flow, spectral_flow_with, FlowOptions};
use sflab::suite::{run_all, SuiteScale};
use sflab::topology::{chern_number, realize_chern, Scenario};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sflab",
    version,
    about = "Spectral flow versus boundary Chern number on the annulus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for reports and CSV traces.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override: interior grid points across the annulus.
    #[arg(long = "grid-nz")]
    grid_nz: Option<usize>,
    /// Override: Fourier mode cutoff M (modes −M..M).
    #[arg(long = "grid-modes")]
    grid_modes: Option<usize>,
    /// Override: path samples.
    #[arg(long = "grid-nt")]
    grid_nt: Option<usize>,
    /// Counting window Λ (0 = automatic).
    #[arg(long, default_value_t = 0.0)]
    tolerance: f64,
    /// Seed for the randomized property batteries.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl CommonArgs {
    fn overrides(&self) -> GridOverrides {
        GridOverrides {
            n_z: self.grid_nz,
            max_mode: self.grid_modes,
            n_t: self.grid_nt,
            window: (self.tolerance > 0.0).then_some(self.tolerance),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a symbol pair (σ₁, σ₂) and print its chiral splitting.
    CheckSymbol {
        /// TOML file with sigma1/sigma2 as rows of [re, im] pairs.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Use the Pauli pair instead of a file.
        #[arg(long)]
        pauli: bool,
        /// Draw a random elliptic symbol of this (even) dimension.
        #[arg(long)]
        random_dim: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Random L ↔ T round trips on the boundary correspondence.
    BoundaryRoundtrip {
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Plaquette Chern number of a torus family.
    Chern {
        #[command(flatten)]
        common: CommonArgs,
        /// Lower band of the two-band lattice model with this mass.
        #[arg(long)]
        qwz: Option<f64>,
        /// Realized loop with this target Chern number.
        #[arg(long, allow_negative_numbers = true)]
        realize: Option<i64>,
        /// Grid for --qwz/--realize.
        #[arg(long, default_value_t = 48)]
        grid: usize,
    },
    /// Spectral flow of the scenario's operator path.
    Sf {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write eigenvalue traces (CSV) in the counting window.
        #[arg(long)]
        traces: bool,
    },
    /// Run both pipelines and compare the integers.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// The full verification battery with a summary table.
    Suite {
        #[command(flatten)]
        common: CommonArgs,
        /// Reduced resolution for a quick pass.
        #[arg(long)]
        fast: bool,
    },
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn load_spec(common: &CommonArgs) -> Result<sflab::scenario::ScenarioSpec, ExitCode> {
    let Some(cfg_path) = &common.config else {
        return Err(input_error("--config is required for this subcommand"));
    };
    let cfg = ScenarioConfig::load(cfg_path).map_err(input_error)?;
    cfg.to_spec(&common.overrides()).map_err(input_error)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::CheckSymbol {
            input,
            pauli,
            random_dim,
            seed,
        } => {
            let (s1, s2) = if pauli {
                sflab::symbol::pauli_pair()
            } else if let Some(dim) = random_dim {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let sym = sflab::symbol::random_elliptic_symbol(&mut rng, dim);
                (sym.sigma1().clone(), sym.sigma2().clone())
            } else if let Some(path) = input {
                match load_symbol_input(&path) {
                    Ok(p) => p,
                    Err(e) => return input_error(e),
                }
            } else {
                return input_error("provide --input, --pauli or --random-dim");
            };
            match sflab::symbol::check_ellipticity(&s1, &s2) {
                Ok(sym) => {
                    let split = sflab::symbol::chiral_split(&sym).expect("validated symbol");
                    println!(
                        "elliptic: dim {}, rank E⁺ = {}, rank E⁻ = {}, Dirac type: {}",
                        sym.dim(),
                        split.e_plus.rank(),
                        split.e_minus.rank(),
                        sflab::symbol::is_dirac(&sym)
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => input_error(e),
            }
        }
        Command::BoundaryRoundtrip { dim, count, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            if dim % 2 != 0 || dim == 0 {
                return input_error("--dim must be positive and even");
            }
            let mut worst_gap: f64 = 0.0;
            for _ in 0..count {
                let sym = sflab::symbol::random_elliptic_symbol(&mut rng, dim);
                let data = match sflab::boundary::ConormalData::from_symbol(&sym) {
                    Ok(d) => d,
                    Err(_) => continue,
                };
                let t = sflab::boundary::BoundaryAutomorphism::new(
                    sflab::linalg::random::random_invertible_hermitian(&mut rng, dim / 2, 0.2),
                );
                let l = match sflab::boundary::condition_from_t(&data, &t) {
                    Ok(l) => l,
                    Err(e) => return input_error(e),
                };
                let t2 = match sflab::boundary::t_from_condition(&data, &l) {
                    Ok(t2) => t2,
                    Err(e) => return input_error(e),
                };
                let l2 = sflab::boundary::condition_from_t(&data, &t2).expect("round trip");
                worst_gap = worst_gap.max(sflab::linalg::gap_distance(l.frame(), l2.frame()));
            }
            println!("{count} round trips at dim {dim}: worst subspace gap {worst_gap:.3e}");
            if worst_gap < 1e-8 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Chern {
            common,
            qwz,
            realize,
            grid,
        } => {
            let scenario: Scenario = if let Some(n) = realize {
                match realize_chern(n, 2, grid, grid) {
                    Ok((_, fam)) => Scenario::single(format!("realize({n})"), fam),
                    Err(e) => return input_error(e),
                }
            } else if let Some(mass) = qwz {
                match sflab::suite::qwz_scenario(mass, grid) {
                    Ok(s) => s,
                    Err(e) => return input_error(e),
                }
            } else {
                let spec = match load_spec(&common) {
                    Ok(s) => s,
                    Err(code) => return code,
                };
                match assemble_psi(&spec) {
                    Ok(s) => s,
                    Err(e) => return input_error(e),
                }
            };
            let mut total = 0i64;
            for (name, fam) in &scenario.components {
                match chern_number(fam) {
                    Ok(c) => {
                        println!(
                            "{name}: chern {} (raw {:+.6}, residual {:.2e})",
                            c.rounded, c.raw, c.residual
                        );
                        total += c.rounded;
                    }
                    Err(e) => {
                        eprintln!("{name}: {e}");
                        return ExitCode::from(1);
                    }
                }
            }
            println!("psi = {total}");
            if let Some(dir) = &common.out {
                match write_flux_csv(&scenario, dir) {
                    Ok(files) => {
                        for f in files {
                            println!("wrote {}", f.display());
                        }
                    }
                    Err(e) => return input_error(e),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Sf { common, traces } => {
            let spec = match load_spec(&common) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let path = match assemble_path(&spec) {
                Ok(p) => p,
                Err(e) => return input_error(e),
            };
            let opts = FlowOptions::default();
            let result = if common.tolerance > 0.0 {
                spectral_flow_with(&path, common.tolerance, opts)
            } else {
                spectral_flow(&path, opts)
            };
            match result {
                Ok(res) => {
                    println!(
                        "sf = {} (level {:+.3e}, window {:.3}, {} crossings, {} subdivisions)",
                        res.value,
                        res.level,
                        res.window,
                        res.crossings.len(),
                        res.subdivisions
                    );
                    for c in &res.crossings {
                        println!(
                            "  crossing in [{:.4}, {:.4}] direction {:+}",
                            c.t_left, c.t_right, c.direction
                        );
                    }
                    if let Some(dir) = &common.out {
                        if let Err(e) = write_crossings_csv(&res, dir) {
                            return input_error(e);
                        }
                        if traces {
                            let width = res.window.min(2.0);
                            if let Err(e) = write_traces_csv(&path, width, dir) {
                                return input_error(e);
                            }
                        }
                        println!("wrote CSVs to {}", dir.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Verify { common } => {
            let spec = match load_spec(&common) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let window = (common.tolerance > 0.0).then_some(common.tolerance);
            match run_verify(&spec, window) {
                Ok(report) => {
                    println!(
                        "{}: sf = {}, psi = {} ⇒ {}",
                        report.scenario,
                        report.sf,
                        report.psi,
                        if report.matches { "MATCH" } else { "MISMATCH" }
                    );
                    if let Some(dir) = &common.out {
                        match write_report(&report, dir) {
                            Ok(p) => println!("wrote {}", p.display()),
                            Err(e) => return input_error(e),
                        }
                    }
                    if report.matches {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Suite { common, fast } => {
            let scale = if fast {
                SuiteScale::fast(common.seed)
            } else {
                SuiteScale::full(common.seed)
            };
            let outcomes = run_all(&scale);
            println!("┌─ verification battery ──────────────────────────────");
            let mut all_pass = true;
            for o in &outcomes {
                println!("│ {}", o.line());
                all_pass &= o.passed;
            }
            println!("└─ {}", if all_pass { "ALL PASS" } else { "FAILURES" });
            if let Some(dir) = &common.out {
                if let Err(e) = std::fs::create_dir_all(dir) {
                    return input_error(e);
                }
                let path = dir.join("suite.json");
                match serde_json::to_string_pretty(&outcomes) {
                    Ok(text) => {
                        if let Err(e) = std::fs::write(&path, text + "\n") {
                            return input_error(e);
                        }
                        println!("wrote {}", path.display());
                    }
                    Err(e) => return input_error(e),
                }
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
