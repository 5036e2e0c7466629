//! `modhad`: construct, verify, decide, search, and explain modular
//! Hadamard matrices.
//!
//! Exit status: 0 when the answer is "exists"/"verified"/"found", 1 when
//! it is "does not exist"/"verification failed"/"no solutions", 2 for
//! usage or file-format errors.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use modhad::{
    catalog, decide, exhaustive, explain, materialize, parse_ledger, parse_matrix,
    write_certificate, write_design, write_matrix, CatalogName, LedgerEntry, Modulus, SearchMode,
    SearchOutcome, SearchSpec, ShardSpec,
};

#[derive(Parser)]
#[command(name = "modhad", version, about = "Modular Hadamard matrix toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OrderModulus {
    /// Matrix order n >= 1
    #[arg(short = 'n', long = "order")]
    order: usize,
    /// Modulus m in {2, 3, 4, 5, 6}
    #[arg(short = 'm', long = "modulus", value_parser = solver_modulus)]
    modulus: u64,
}

fn solver_modulus(s: &str) -> Result<u64, String> {
    let m: u64 = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if (2..=6).contains(&m) {
        Ok(m)
    } else {
        Err(format!(
            "modulus {m} is unsupported (expected 2, 3, 4, 5 or 6)"
        ))
    }
}

fn file_modulus(s: &str) -> Result<u64, String> {
    let m: u64 = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if m == 0 || (2..=6).contains(&m) {
        Ok(m)
    } else {
        Err(format!(
            "modulus {m} is unsupported (expected 0 for exact, or 2..6)"
        ))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide MH(n, m); write the matrix file and print the certificate
    Construct {
        #[command(flatten)]
        nm: OrderModulus,
        /// Output path for the matrix file
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Also write the JSON certificate here
        #[arg(long = "emit-cert")]
        emit_cert: Option<PathBuf>,
    },
    /// Re-check a matrix file against the modulus in its header
    Verify {
        /// Matrix file in the MH text format
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        /// Check against this modulus instead of the header's
        #[arg(long = "modulus", value_parser = file_modulus)]
        modulus: Option<u64>,
    },
    /// Print whether MH(n, m) exists, with the recipe or obstruction
    Decide {
        #[command(flatten)]
        nm: OrderModulus,
        /// Write the JSON certificate here
        #[arg(long = "emit-cert")]
        emit_cert: Option<PathBuf>,
    },
    /// Print the construction recipe or obstruction for MH(n, m)
    Explain {
        #[command(flatten)]
        nm: OrderModulus,
    },
    /// Exhaustively enumerate normalized candidates of small order
    Search {
        /// Matrix order n (the space has 2^((n-1)^2) candidates)
        #[arg(short = 'n', long = "order")]
        order: usize,
        /// Modulus (0 for exact Hadamard search, or 2..6)
        #[arg(short = 'm', long = "modulus", value_parser = file_modulus)]
        modulus: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::FirstWitness)]
        mode: ModeArg,
        /// Worker threads (outcomes do not depend on this)
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Split the space into 2^w shards by the first free row's prefix
        #[arg(long = "shard-bits", default_value_t = 0)]
        shard_bits: u32,
        /// Shard ledger: completed shards are skipped and fresh ones appended
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Write the witness matrix here instead of stdout
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// List the base designs or print one in the DES text format
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Stop at the lexicographically least solution
    FirstWitness,
    /// Count every solution
    CountAll,
    /// Sweep the whole space expecting zero solutions
    ConfirmNone,
}

impl From<ModeArg> for SearchMode {
    fn from(mode: ModeArg) -> SearchMode {
        match mode {
            ModeArg::FirstWitness => SearchMode::FirstWitness,
            ModeArg::CountAll => SearchMode::CountAll,
            ModeArg::ConfirmNone => SearchMode::ConfirmNone,
        }
    }
}

#[derive(Subcommand)]
enum CatalogAction {
    /// One line per catalog design
    List,
    /// Print a catalog design as a DES file
    Show {
        /// One of r13, d26, d21, d16, b11, b11c
        name: String,
        /// Write to a file instead of stdout
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Construct {
            nm,
            output,
            emit_cert,
        } => construct(nm, &output, emit_cert.as_deref()),
        Command::Verify { input, modulus } => verify(&input, modulus),
        Command::Decide { nm, emit_cert } => decide_cmd(nm, emit_cert.as_deref()),
        Command::Explain { nm } => decide_cmd(nm, None),
        Command::Search {
            order,
            modulus,
            mode,
            threads,
            shard_bits,
            resume,
            output,
        } => search(
            order,
            modulus,
            mode.into(),
            threads,
            shard_bits,
            resume.as_deref(),
            output.as_deref(),
        ),
        Command::Catalog { action } => catalog_cmd(action),
    }
}

fn construct(
    nm: OrderModulus,
    output: &Path,
    emit_cert: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let cert = decide(nm.order, nm.modulus)?;
    let cert_text = write_certificate(&cert);
    if let Some(path) = emit_cert {
        fs::write(path, &cert_text).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{cert_text}");
    match cert.recipe() {
        Some(recipe) => {
            let h = materialize(recipe, nm.modulus)
                .context("internal error: a recipe from the decision table failed")?;
            fs::write(output, write_matrix(&h, Modulus::new(nm.modulus)))
                .with_context(|| format!("writing {}", output.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        None => Ok(ExitCode::from(1)),
    }
}

fn verify(input: &Path, modulus: Option<u64>) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let (h, header_m) = parse_matrix(&text).map_err(|e| anyhow!("{}: {e}", input.display()))?;
    let m = modulus.map(Modulus::new).unwrap_or(header_m);
    match h.first_gram_violation(m) {
        None => {
            println!("ok: MH({}, {}) verified", h.order(), m);
            Ok(ExitCode::SUCCESS)
        }
        Some(v) => {
            if m.is_exact() {
                println!(
                    "FAIL: not an MH({0}, 0): rows {1} and {2} have inner product {3}, expected 0",
                    h.order(),
                    v.row_a,
                    v.row_b,
                    v.residue
                );
            } else {
                println!(
                    "FAIL: not an MH({0}, {m}): rows {1} and {2} have Gram residue {3} (mod {m})",
                    h.order(),
                    v.row_a,
                    v.row_b,
                    v.residue
                );
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn decide_cmd(nm: OrderModulus, emit_cert: Option<&Path>) -> anyhow::Result<ExitCode> {
    let cert = decide(nm.order, nm.modulus)?;
    if let Some(path) = emit_cert {
        fs::write(path, write_certificate(&cert))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", explain(&cert));
    Ok(if cert.exists() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn search(
    order: usize,
    modulus: u64,
    mode: SearchMode,
    threads: usize,
    shard_bits: u32,
    resume: Option<&Path>,
    output: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    if order == 0 {
        bail!("the order must be >= 1");
    }
    let modulus = Modulus::new(modulus);
    let outcome = if shard_bits == 0 {
        if resume.is_some() {
            bail!("--resume needs --shard-bits >= 1 (the ledger records per-shard results)");
        }
        let mut spec = SearchSpec::new(order, modulus, mode);
        spec.threads = threads;
        exhaustive(&spec)?
    } else {
        run_sharded(order, modulus, mode, threads, shard_bits, resume)?
    };

    println!("examined {}", outcome.examined);
    println!("solutions {}", outcome.solutions);
    let found = outcome.solutions > 0 || outcome.witness.is_some();
    if let Some(w) = &outcome.witness {
        let text = write_matrix(w, modulus);
        match output {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
            }
            None => print!("{text}"),
        }
    }
    Ok(if found {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_sharded(
    order: usize,
    modulus: Modulus,
    mode: SearchMode,
    threads: usize,
    shard_bits: u32,
    resume: Option<&Path>,
) -> anyhow::Result<SearchOutcome> {
    if resume.is_some() && matches!(mode, SearchMode::FirstWitness) {
        bail!("--resume only supports count-all and confirm-none (ledger lines carry no witness)");
    }
    let free = order - 1;
    if shard_bits as usize > free {
        bail!("--shard-bits {shard_bits} exceeds the {free} prefix bits of the first free row");
    }
    let shard_space = 1u64 << (free * free - shard_bits as usize);
    let shards = 1u64 << shard_bits;

    let mut done: Vec<Option<LedgerEntry>> = vec![None; shards as usize];
    if let Some(path) = resume {
        if path.exists() {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            for entry in parse_ledger(&text).map_err(|e| anyhow!("{}: {e}", path.display()))? {
                if entry.index >= shards {
                    bail!(
                        "{}: shard index {} out of range for {} shards",
                        path.display(),
                        entry.index,
                        shards
                    );
                }
                if entry.examined != shard_space {
                    bail!(
                        "{}: shard {} records {} examined candidates, expected {} (wrong order or shard count?)",
                        path.display(),
                        entry.index,
                        entry.examined,
                        shard_space
                    );
                }
                let slot = &mut done[entry.index as usize];
                if slot.is_some() && *slot != Some(entry) {
                    bail!(
                        "{}: conflicting lines for shard {}",
                        path.display(),
                        entry.index
                    );
                }
                *slot = Some(entry);
            }
        }
    }
    let mut ledger_file = match resume {
        Some(path) => Some(
            fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .with_context(|| format!("opening {}", path.display()))?,
        ),
        None => None,
    };

    let mut examined = 0u64;
    let mut solutions = 0u64;
    let mut witness = None;
    for index in 0..shards {
        let entry = match done[index as usize] {
            Some(entry) => entry,
            None => {
                let mut spec = SearchSpec::new(order, modulus, mode);
                spec.threads = threads;
                spec.shard = Some(ShardSpec {
                    prefix_bits: shard_bits,
                    index,
                });
                let outcome = exhaustive(&spec)?;
                if witness.is_none() {
                    witness = outcome.witness;
                }
                let entry = LedgerEntry {
                    index,
                    examined: outcome.examined,
                    solutions: outcome.solutions,
                };
                if let Some(file) = &mut ledger_file {
                    writeln!(file, "{}", modhad::format_ledger_entry(entry))
                        .context("appending to the shard ledger")?;
                }
                entry
            }
        };
        examined += entry.examined;
        solutions += entry.solutions;
        if matches!(mode, SearchMode::FirstWitness) && witness.is_some() {
            break;
        }
    }
    Ok(SearchOutcome {
        witness,
        examined,
        solutions,
    })
}

fn catalog_cmd(action: CatalogAction) -> anyhow::Result<ExitCode> {
    match action {
        CatalogAction::List => {
            println!(
                "R13   exact (13,4,1)   cyclic design from the difference set {{0,2,3,7}} in Z_13"
            );
            println!("D26   (26,1,2;5)       block design [[R, J-I], [J-I, J-R^T]] over R13");
            println!("D21   exact (21,5,1)   Singer difference set {{3,6,7,12,14}} in Z_21");
            println!("D16   exact (16,6,2)   Menon design from the regular Hadamard matrix (J-2I)4 x (J-2I)4");
            println!("B11   exact (11,5,2)   quadratic residues mod 11");
            println!("B11C  exact (11,6,3)   complement of B11");
            Ok(ExitCode::SUCCESS)
        }
        CatalogAction::Show { name, output } => {
            let name: CatalogName = name.parse().map_err(|e: String| anyhow!(e))?;
            let text = write_design(&catalog(name));
            match output {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
