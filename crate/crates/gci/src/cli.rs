//! Command-line frontend.
//!
//! Exit codes: 0 success/affirmative, 1 negative verdict (oracle false, axiom
//! violated, matrix operation rejected), 2 usage error, 3 input format error.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cicore::{
    canonical_form, enumerate_statements, is_gaussoid, is_semigraphoid, CIStatement,
    CIStructure, GroundSet, PartialCIStructure,
};
use crate::enumeration::{
    enumerate_gaussoids, enumerate_semigraphoids, filter_sharded, Census,
    Summary,
};
use crate::error::{GciError, Result};
use crate::gaussians::{
    adhesive_extension, adhesive_extension_f, ci_structure_of, GlueSpec, SymMatrixF, SymMatrixQ,
};
use crate::oracles::{MeetMode, OracleKind};
use crate::selfadhesion::{is_selfadhesive_at_with, is_selfadhesive_with, SelfadhesionOptions};

#[derive(Parser)]
#[command(
    name = "gci",
    about = "Gaussian conditional independence structures: axioms, oracles, selfadhesion, censuses",
    version
)]
struct Cli {
    /// Worker threads for census and filter stages (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized subcommands (reserved; fixed default)
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxiomSet {
    Gaussoid,
    Semigraphoid,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureFormat {
    Bitstring,
    Statements,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumClass {
    Gaussoid,
    Semigraphoid,
}

#[derive(Args)]
struct PropertyArg {
    /// Property oracle: structural | orientable | meet | meet:joint
    #[arg(long)]
    property: String,
}

impl PropertyArg {
    fn kind(&self) -> Result<OracleKind> {
        match self.property.as_str() {
            "structural" => Ok(OracleKind::Structural),
            "orientable" => Ok(OracleKind::Orientable),
            "meet" => Ok(OracleKind::Meet(MeetMode::Separate)),
            "meet:joint" => Ok(OracleKind::Meet(MeetMode::Joint)),
            other => Err(GciError::Parse(format!("unknown property `{other}`"))),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print all elementary statements over {1,..,n} in canonical order
    Statements {
        #[arg(short)]
        n: usize,
    },
    /// Check axiom membership for structures (bitstrings from FILE or stdin)
    Check {
        #[arg(long, value_enum)]
        axioms: AxiomSet,
        file: Option<PathBuf>,
    },
    /// Run a property oracle on a partial structure file (+/- statement lines)
    Oracle {
        #[arg(short)]
        n: usize,
        #[command(flatten)]
        property: PropertyArg,
        file: PathBuf,
    },
    /// Test selfadhesivity of structures (bitstrings from FILE or stdin)
    Selfadhesion {
        #[command(flatten)]
        property: PropertyArg,
        /// Test only this overlap subset, as concatenated digits (e.g. 13)
        #[arg(long)]
        at: Option<String>,
        /// Skip L = empty (valid when the property is closed under direct sums)
        #[arg(long)]
        skip_empty: bool,
        /// Disable closure/witness fast paths (diagnostics)
        #[arg(long)]
        no_fast_paths: bool,
        file: Option<PathBuf>,
    },
    /// Glue two positive-definite matrices along an overlap
    Adhere {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        overlap: usize,
        /// Use floating-point arithmetic (for irrational inputs)
        #[arg(long)]
        float: bool,
    },
    /// Print the CI structure of a positive-definite rational matrix
    CiStructure {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "bitstring")]
        format: StructureFormat,
    },
    /// Enumerate gaussoids or semigraphoids
    Enumerate {
        #[arg(long, value_enum)]
        class: EnumClass,
        #[arg(short)]
        n: usize,
        #[arg(long)]
        mod_iso: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run census stages over the gaussoid classes (resumable)
    Census {
        #[arg(short)]
        n: usize,
        /// Comma-separated stages: structural,orientable,meet,
        /// selfadhesion:structural,selfadhesion:orientable,selfadhesion:meet
        #[arg(long)]
        stages: String,
        /// Output/resume directory
        #[arg(long)]
        resume: PathBuf,
        /// Run on one deterministic input shard instead of the full census
        #[arg(long)]
        spot_shard: Option<usize>,
    },
    /// Canonicalize structures (bitstrings from FILE or stdin)
    Canon {
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "bitstring")]
        format: StructureFormat,
    },
    /// Check an inference rule against a census file; violators are printed
    VerifyAxiom {
        #[arg(long)]
        census: PathBuf,
        /// Comma-separated premise statements, e.g. "(1,2|35),(2,5|)"
        #[arg(long)]
        premises: String,
        #[arg(long)]
        conclusion: String,
    },
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with status 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(affirmative) => {
            if affirmative {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("gci: {e}");
            match e {
                GciError::Parse(_) | GciError::Io(_) | GciError::CorruptShard(_) => 3,
                GciError::GroundSetOutOfRange(..) | GciError::WrongGroundSet { .. } => 2,
                GciError::NotPositiveDefinite
                | GciError::RestrictionMismatch
                | GciError::SingularBlock
                | GciError::BadOverlap { .. }
                | GciError::NotPolymatroid => 1,
            }
        }
    }
}

fn read_input(file: &Option<PathBuf>) -> Result<String> {
    match file {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn parse_structures(text: &str) -> Result<Vec<CIStructure>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(CIStructure::parse_bitstring)
        .collect()
}

fn parse_subset(s: &str) -> Result<u32> {
    let mut mask = 0u32;
    for c in s.trim().chars() {
        let d = c
            .to_digit(10)
            .filter(|&d| d >= 1)
            .ok_or_else(|| GciError::Parse(format!("bad subset `{s}`")))?;
        mask |= 1 << (d - 1);
    }
    Ok(mask)
}

fn format_structure(l: &CIStructure, format: StructureFormat) -> String {
    match format {
        StructureFormat::Bitstring => l.to_bitstring(),
        StructureFormat::Statements => {
            let stmts: Vec<String> = l.statements().iter().map(|s| s.to_text()).collect();
            stmts.join(" ")
        }
    }
}

fn parse_statement_list(s: &str) -> Result<Vec<CIStatement>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(CIStatement::parse)
        .collect()
}

/// Returns Ok(true) for an affirmative outcome (exit 0), Ok(false) for a
/// negative verdict (exit 1).
fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Statements { n } => {
            GroundSet::new(n)?;
            for s in enumerate_statements(n)? {
                println!("{}", s.to_text());
            }
            Ok(true)
        }
        Command::Check { axioms, file } => {
            let text = read_input(&file)?;
            let structures = parse_structures(&text)?;
            let mut all = true;
            for l in &structures {
                let ok = match axioms {
                    AxiomSet::Gaussoid => is_gaussoid(l),
                    AxiomSet::Semigraphoid => is_semigraphoid(l),
                };
                all &= ok;
                println!("{}\t{}", l.to_bitstring(), ok);
            }
            Ok(all)
        }
        Command::Oracle { n, property, file } => {
            GroundSet::new(n)?;
            let kind = property.kind()?;
            let text = std::fs::read_to_string(&file)?;
            let t = PartialCIStructure::parse(n, &text)?;
            let verdict = crate::oracles::oracle_verdict(kind, &t)?;
            println!("{verdict}");
            Ok(verdict)
        }
        Command::Selfadhesion {
            property,
            at,
            skip_empty,
            no_fast_paths,
            file,
        } => {
            let kind = property.kind()?;
            let opts = SelfadhesionOptions {
                skip_empty,
                fast_paths: !no_fast_paths,
                ..SelfadhesionOptions::default()
            };
            let text = read_input(&file)?;
            let structures = parse_structures(&text)?;
            let at_mask = at.as_deref().map(parse_subset).transpose()?;
            let mut all = true;
            for l in &structures {
                let verdict = match at_mask {
                    Some(mask) => {
                        if mask & !crate::cicore::full_mask(l.n()) != 0 {
                            return Err(GciError::Parse("--at subset outside ground set".into()));
                        }
                        is_selfadhesive_at_with(l, mask, kind, &opts, None)?
                    }
                    None => is_selfadhesive_with(l, kind, &opts)?,
                };
                all &= verdict;
                println!("{}\t{}", l.to_bitstring(), verdict);
            }
            Ok(all)
        }
        Command::Adhere {
            left,
            right,
            overlap,
            float,
        } => {
            if float {
                let a = SymMatrixF::parse(&std::fs::read_to_string(&left)?)?;
                let b = SymMatrixF::parse(&std::fs::read_to_string(&right)?)?;
                let g = GlueSpec::new(a.n(), b.n(), overlap)?;
                let phi = adhesive_extension_f(&a, &b, &g)?;
                let nt = g.n_total();
                println!("{nt}");
                for r in 0..nt {
                    let row: Vec<String> =
                        (0..nt).map(|c| format!("{}", phi.get(r, c))).collect();
                    println!("{}", row.join(" "));
                }
            } else {
                let a = SymMatrixQ::parse(&std::fs::read_to_string(&left)?)?;
                let b = SymMatrixQ::parse(&std::fs::read_to_string(&right)?)?;
                let g = GlueSpec::new(a.n(), b.n(), overlap)?;
                let phi = adhesive_extension(&a, &b, &g)?;
                print!("{}", phi.to_text());
            }
            Ok(true)
        }
        Command::CiStructure { file, format } => {
            let m = SymMatrixQ::parse(&std::fs::read_to_string(&file)?)?;
            let l = ci_structure_of(&m)?;
            println!("{}", format_structure(&l, format));
            Ok(true)
        }
        Command::Enumerate {
            class,
            n,
            mod_iso,
            out,
        } => {
            if n < 2 || n > 5 {
                return Err(GciError::GroundSetOutOfRange(n, 2, 5));
            }
            if matches!(class, EnumClass::Semigraphoid) && n > 4 {
                return Err(GciError::GroundSetOutOfRange(n, 2, 4));
            }
            let census = match class {
                EnumClass::Gaussoid => enumerate_gaussoids(n, mod_iso),
                EnumClass::Semigraphoid => enumerate_semigraphoids(n, mod_iso),
            };
            std::fs::create_dir_all(&out)?;
            let name = match class {
                EnumClass::Gaussoid => "gaussoids",
                EnumClass::Semigraphoid => "semigraphoids",
            };
            census.save(&out.join(format!("{name}.txt")))?;
            let mut summary = Summary::default();
            summary.push(name, census.len());
            summary.save(&out.join("summary.tsv"))?;
            println!("{name}\t{}", census.len());
            Ok(true)
        }
        Command::Census {
            n,
            stages,
            resume,
            spot_shard,
        } => {
            if n < 2 || n > 5 {
                return Err(GciError::GroundSetOutOfRange(n, 2, 5));
            }
            run_census(n, &stages, &resume, spot_shard)?;
            Ok(true)
        }
        Command::Canon { file, format } => {
            let text = read_input(&file)?;
            for l in parse_structures(&text)? {
                println!("{}", format_structure(&canonical_form(&l), format));
            }
            Ok(true)
        }
        Command::VerifyAxiom {
            census,
            premises,
            conclusion,
        } => {
            let text = std::fs::read_to_string(&census)?;
            let members = parse_structures(&text)?;
            let Some(first) = members.first() else {
                return Err(GciError::Parse("empty census file".into()));
            };
            let n = first.n();
            if members.iter().any(|m| m.n() != n) {
                return Err(GciError::Parse("mixed ground-set sizes in census".into()));
            }
            let census = Census::new(n, "census", members);
            let premises = parse_statement_list(&premises)?;
            let conclusion = CIStatement::parse(&conclusion)?;
            let violators =
                crate::enumeration::verify_inference_axiom(&census, &premises, &conclusion);
            for v in &violators {
                println!("{}", v.to_bitstring());
            }
            eprintln!("violators: {}", violators.len());
            Ok(violators.is_empty())
        }
    }
}

/// Staged census pipeline rooted at the gaussoid classes.
fn run_census(n: usize, stages: &str, dir: &Path, spot_shard: Option<usize>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let requested: Vec<String> = stages
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    for s in &requested {
        match s.as_str() {
            "structural" | "orientable" | "meet" | "selfadhesion:structural"
            | "selfadhesion:orientable" | "selfadhesion:meet" | "selfadhesion:meet:joint" => {}
            other => return Err(GciError::Parse(format!("unknown stage `{other}`"))),
        }
    }
    let wants = |s: &str| requested.iter().any(|r| r == s);
    let mut summary = Summary::default();

    // enumeration root
    let gauss_path = dir.join("gaussoids.txt");
    let gaussoids = match spot_shard {
        Some(shard) => {
            let slice = crate::enumeration::gaussoid_spot_shard(n, shard)?;
            slice.save(&gauss_path)?;
            slice
        }
        None => {
            if gauss_path.exists() {
                Census::load(n, "gaussoids", &gauss_path)?
            } else {
                let census = enumerate_gaussoids(n, true);
                census.save(&gauss_path)?;
                census
            }
        }
    };
    eprintln!("gaussoids: {}", gaussoids.len());
    summary.push("gaussoids", gaussoids.len());

    let mut structural: Option<Census> = None;
    let mut orientable: Option<Census> = None;
    if wants("structural")
        || wants("meet")
        || wants("selfadhesion:structural")
        || wants("selfadhesion:meet")
        || wants("selfadhesion:meet:joint")
    {
        let c = filter_sharded(&gaussoids, "structural", "structural", dir)?;
        c.save(&dir.join("structural.txt"))?;
        eprintln!("structural: {}", c.len());
        summary.push("structural", c.len());
        structural = Some(c);
    }
    if wants("orientable")
        || wants("meet")
        || wants("selfadhesion:orientable")
        || wants("selfadhesion:meet")
        || wants("selfadhesion:meet:joint")
    {
        let c = filter_sharded(&gaussoids, "orientable", "orientable", dir)?;
        c.save(&dir.join("orientable.txt"))?;
        eprintln!("orientable: {}", c.len());
        summary.push("orientable", c.len());
        orientable = Some(c);
    }
    let meet = match (&structural, &orientable) {
        (Some(s), Some(o))
            if wants("meet") || wants("selfadhesion:meet") || wants("selfadhesion:meet:joint") =>
        {
            let m = s.intersect(o, "meet");
            m.save(&dir.join("meet.txt"))?;
            eprintln!("meet: {}", m.len());
            summary.push("meet", m.len());
            Some(m)
        }
        _ => None,
    };
    let mut sa_structural: Option<Census> = None;
    if wants("selfadhesion:structural") {
        let input = structural.as_ref().unwrap();
        let c = filter_sharded(input, "sa_structural", "selfadhesion:structural", dir)?;
        c.save(&dir.join("sa_structural.txt"))?;
        eprintln!("sa_structural: {}", c.len());
        summary.push("selfadhesion:structural", c.len());
        sa_structural = Some(c);
    }
    let mut sa_orientable: Option<Census> = None;
    if wants("selfadhesion:orientable") {
        let input = orientable.as_ref().unwrap();
        let c = filter_sharded(input, "sa_orientable", "selfadhesion:orientable", dir)?;
        c.save(&dir.join("sa_orientable.txt"))?;
        eprintln!("sa_orientable: {}", c.len());
        summary.push("selfadhesion:orientable", c.len());
        sa_orientable = Some(c);
    }
    if wants("selfadhesion:meet") {
        let input = meet.as_ref().unwrap();
        let c = filter_sharded(input, "sa_meet", "selfadhesion:meet", dir)?;
        c.save(&dir.join("sa_meet.txt"))?;
        eprintln!("sa_meet: {}", c.len());
        summary.push("selfadhesion:meet", c.len());
    }
    if wants("selfadhesion:meet:joint") {
        let input = meet.as_ref().unwrap();
        let c = filter_sharded(input, "sa_meet_joint", "selfadhesion:meet:joint", dir)?;
        c.save(&dir.join("sa_meet_joint.txt"))?;
        eprintln!("sa_meet_joint: {}", c.len());
        summary.push("selfadhesion:meet:joint", c.len());
    }
    // derived combinations when both sides are on hand
    if let (Some(sa_s), Some(o)) = (&sa_structural, &orientable) {
        let c = sa_s.intersect(o, "sa_structural_and_orientable");
        c.save(&dir.join("sa_structural_and_orientable.txt"))?;
        summary.push("sa_structural_and_orientable", c.len());
    }
    if let (Some(s), Some(sa_o)) = (&structural, &sa_orientable) {
        let c = s.intersect(sa_o, "structural_and_sa_orientable");
        c.save(&dir.join("structural_and_sa_orientable.txt"))?;
        summary.push("structural_and_sa_orientable", c.len());
    }
    if let (Some(sa_s), Some(sa_o)) = (&sa_structural, &sa_orientable) {
        let c = sa_s.intersect(sa_o, "sa_structural_and_sa_orientable");
        c.save(&dir.join("sa_structural_and_sa_orientable.txt"))?;
        summary.push("sa_structural_and_sa_orientable", c.len());
    }
    summary.save(&dir.join("summary.tsv"))?;
    print!("{}", summary.to_tsv());
    Ok(())
}
