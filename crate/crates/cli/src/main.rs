//! Command-line front end: graph generation, embedding construction,
//! verification suites, and the obstruction checks, with deterministic JSON
//! reports. Exit codes: 0 pass, 1 invariant failure, 2 usage or input
//! error, 3 resource budget exceeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use esa_embed::axioms::{run_axiom_suite, NormKind};
use esa_embed::blocks::DEFAULT_BLOCK_BUDGET_LOG2;
use esa_embed::diamond::{embed_diamond, DiamondEmbedder};
use esa_embed::distortion::{distortion_report, DistortionReport};
use esa_embed::embedding::check_structural_laws;
use esa_embed::error::Error;
use esa_embed::graphs::{build_graph, Family, GraphInstance};
use esa_embed::laakso::{embed_laakso, verify_c_conditions};
use esa_embed::obstruction::{
    check_factorization, check_midpoint_family, color_triple, ramsey_bound, reduce_family,
    smallest_factorization_constant, verify_triple_separation, FamilyGenParams,
    RationalEmbedding, RationalEmbeddingJson, ZFamily,
};
use esa_embed::ratio::{format_rat, parse_rat, Rat};
use esa_embed::signvec::SignVector;

#[derive(Parser)]
#[command(name = "esa-embed", version, about = "Embeddings of diamond and Laakso graphs into ESA sequence spaces, with exact verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Diamond,
    Laakso,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Diamond => Family::Diamond,
            FamilyArg::Laakso => Family::Laakso,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    Summing,
    Both,
}

impl NormArg {
    fn kinds(self) -> Vec<NormKind> {
        match self {
            NormArg::L1 => vec![NormKind::L1],
            NormArg::Summing => vec![NormKind::Summing],
            NormArg::Both => vec![NormKind::L1, NormKind::Summing],
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Cap on log2 of the number of blocks an embedding may allocate.
    #[arg(long, default_value_t = DEFAULT_BLOCK_BUDGET_LOG2)]
    budget_log2: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and export it as JSON and/or DOT.
    Generate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the embedding table and export it as JSON.
    Embed {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value = "both")]
        norm: NormArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suites for one instance, or the norm-axiom
    /// suite with --axioms.
    Verify {
        #[arg(long, value_enum, required_unless_present = "axioms")]
        family: Option<FamilyArg>,
        #[arg(long, required_unless_present = "axioms")]
        n: Option<u32>,
        #[arg(long, required_unless_present = "axioms")]
        k: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_BLOCK_BUDGET_LOG2)]
        budget_log2: u32,
        #[arg(long, value_enum, default_value = "both")]
        norm: NormArg,
        /// Run the ESA/SA/IS axiom suite instead of an instance.
        #[arg(long)]
        axioms: bool,
        #[arg(long, default_value_t = 2026)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        vectors: usize,
        #[arg(long, default_value_t = 100)]
        spreadings: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Obstruction checks on embeddings and normal-form families.
    Obstruct {
        #[arg(long, value_enum)]
        check: ObstructCheck,
        /// Input JSON file (embedding for `factor`, vectors for
        /// `midpoints`/`reduce`, a family for `triples`).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Factorization constant, as `p/q`.
        #[arg(long)]
        c: Option<String>,
        /// Interval width for the midpoint check, as `p/q`.
        #[arg(long)]
        eta: Option<String>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_BLOCK_BUDGET_LOG2)]
        budget_log2: u32,
        #[arg(long, default_value_t = 2026)]
        seed: u64,
        /// Number of random families for the `triples` search.
        #[arg(long, default_value_t = 1000)]
        families: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObstructCheck {
    Factor,
    Midpoints,
    Reduce,
    Triples,
    Ramsey,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Resource(_) => 3,
        Error::Reduction { .. } => 1,
        _ => 2,
    }
}

fn write_or_print(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    match out {
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| Error::parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // die quietly on closed pipes instead of panicking mid-report
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Generate { instance, out, dot } => generate(instance, out, dot),
        Command::Embed { instance, norm, out } => embed(instance, norm, out),
        Command::Verify {
            family,
            n,
            k,
            budget_log2,
            norm,
            axioms,
            seed,
            vectors,
            spreadings,
            out,
        } => {
            if axioms {
                verify_axioms(seed, vectors, spreadings, out)
            } else {
                verify_instance(
                    InstanceArgs {
                        family: family.expect("required"),
                        n: n.expect("required"),
                        k: k.expect("required"),
                        budget_log2,
                    },
                    norm,
                    out,
                )
            }
        }
        Command::Obstruct {
            check,
            input,
            c,
            eta,
            family,
            n,
            k,
            budget_log2,
            seed,
            families,
            out,
        } => obstruct(check, input, c, eta, family, n, k, budget_log2, seed, families, out),
    }
}

fn generate(
    instance: InstanceArgs,
    out: Option<PathBuf>,
    dot: Option<PathBuf>,
) -> Result<u8, Error> {
    let g = build_graph(instance.family.into(), instance.n, instance.k)?;
    if let Some(path) = &out {
        let text = serde_json::to_string_pretty(&g.to_json()).expect("serializable graph");
        fs::write(path, text)
            .map_err(|e| Error::parse(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = &dot {
        fs::write(path, g.to_dot())
            .map_err(|e| Error::parse(format!("cannot write {}: {e}", path.display())))?;
    }
    println!(
        "vertices={} edges={} unit={}",
        g.vertex_count(),
        g.edge_count(),
        format_rat(&g.unit())
    );
    Ok(0)
}

fn build_table(
    instance: &InstanceArgs,
) -> Result<(GraphInstance, esa_embed::embedding::EmbeddingTable), Error> {
    match instance.family {
        FamilyArg::Diamond => embed_diamond(instance.n, instance.k, instance.budget_log2),
        FamilyArg::Laakso => {
            let (g, emb) = embed_laakso(instance.n, instance.k, instance.budget_log2)?;
            Ok((g, emb.into_table()))
        }
    }
}

fn embed(instance: InstanceArgs, norm: NormArg, out: Option<PathBuf>) -> Result<u8, Error> {
    let (g, table) = build_table(&instance)?;
    let family_name = match instance.family {
        FamilyArg::Diamond => "diamond",
        FamilyArg::Laakso => "laakso",
    };
    for kind in norm.kinds() {
        println!(
            "scale[{}] = {}",
            kind.name(),
            format_rat(&table.scale(kind))
        );
    }
    if let Some(path) = &out {
        let text = serde_json::to_string_pretty(&table.to_json(family_name, g.n(), g.k()))
            .expect("serializable table");
        fs::write(path, text)
            .map_err(|e| Error::parse(format!("cannot write {}: {e}", path.display())))?;
    }
    println!(
        "vertices={} blocks={} block_len={}",
        table.len(),
        table.layout().block_count(),
        table.layout().block_len()
    );
    Ok(0)
}

fn verify_axioms(
    seed: u64,
    vectors: usize,
    spreadings: usize,
    out: Option<PathBuf>,
) -> Result<u8, Error> {
    let report = run_axiom_suite(seed, vectors, spreadings);
    let passed = report.passed();
    println!(
        "axioms: {} ({} checks, seed {})",
        if passed { "PASS" } else { "FAIL" },
        report.checks_run,
        report.seed
    );
    write_or_print(&out, &serde_json::to_value(&report).expect("serializable"))?;
    Ok(if passed { 0 } else { 1 })
}

#[derive(Serialize)]
struct SuiteLine {
    suite: String,
    passed: bool,
    detail: String,
}

fn verify_instance(instance: InstanceArgs, norm: NormArg, out: Option<PathBuf>) -> Result<u8, Error> {
    let family: Family = instance.family.into();
    let mut suites: Vec<SuiteLine> = Vec::new();
    let mut distortions: Vec<DistortionReport> = Vec::new();

    let (g, table) = build_table(&instance)?;
    let metric = g.metric();

    let structural = check_structural_laws(&g, &metric, &table)?;
    suites.push(SuiteLine {
        suite: "structural-laws".into(),
        passed: structural.passed(),
        detail: format!(
            "{} violations over {} blocks",
            structural.violations.len(),
            structural.blocks_checked
        ),
    });

    if family == Family::Diamond {
        let emb = DiamondEmbedder::new(instance.n, instance.k, instance.budget_log2)?;
        let mut disagreements = 0usize;
        for v in g.vertices() {
            if emb.vertex_formula(v)? != emb.vertex_inductive(v)? {
                disagreements += 1;
            }
        }
        suites.push(SuiteLine {
            suite: "formula-induction-equivalence".into(),
            passed: disagreements == 0,
            detail: format!("{disagreements} disagreements over {} vertices", g.vertex_count()),
        });
    } else {
        let (_, emb) = embed_laakso(instance.n, instance.k, instance.budget_log2)?;
        let report = verify_c_conditions(&g, &metric, &emb)?;
        suites.push(SuiteLine {
            suite: "growth-conditions".into(),
            passed: report.passed(),
            detail: format!(
                "{} violations over {} vertical pairs, {} gate pairs",
                report.violations.len(),
                report.vertical_pairs,
                report.gate_pairs
            ),
        });
    }

    for kind in norm.kinds() {
        let rep = distortion_report(&g, &metric, &table, kind)?;
        suites.push(SuiteLine {
            suite: format!("distortion-{}", kind.name()),
            passed: rep.passed(),
            detail: format!(
                "distortion = {} ({:.4}), scale = {}",
                format_rat(&rep.distortion),
                rep.distortion_approx,
                format_rat(&rep.scale)
            ),
        });
        distortions.push(rep);
    }

    let all = suites.iter().all(|s| s.passed);
    for s in &suites {
        println!(
            "{}: {} ({})",
            s.suite,
            if s.passed { "PASS" } else { "FAIL" },
            s.detail
        );
    }
    let value = json!({
        "family": match family { Family::Diamond => "diamond", Family::Laakso => "laakso" },
        "n": instance.n,
        "k": instance.k,
        "suites": suites,
        "distortion": distortions,
    });
    if out.is_some() {
        write_or_print(&out, &value)?;
    }
    Ok(if all { 0 } else { 1 })
}

#[derive(Serialize, Deserialize)]
struct VectorFamilyJson {
    vectors: Vec<SignVector>,
}

#[derive(Serialize, Deserialize)]
struct ZFamilyJson {
    n: usize,
    alpha: String,
    vectors: Vec<Vec<String>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

fn parse_c(c: &Option<String>) -> Result<Rat, Error> {
    match c {
        Some(s) => parse_rat(s),
        None => Err(Error::parse("--c is required for this check")),
    }
}

#[allow(clippy::too_many_arguments)]
fn obstruct(
    check: ObstructCheck,
    input: Option<PathBuf>,
    c: Option<String>,
    eta: Option<String>,
    family: Option<FamilyArg>,
    n: Option<u32>,
    k: Option<u32>,
    budget_log2: u32,
    seed: u64,
    families: usize,
    out: Option<PathBuf>,
) -> Result<u8, Error> {
    match check {
        ObstructCheck::Ramsey => {
            let bound = ramsey_bound(parse_c(&c)?)?;
            println!("formula: {}", bound.formula);
            write_or_print(&out, &serde_json::to_value(&bound).expect("serializable"))?;
            Ok(0)
        }
        ObstructCheck::Factor => {
            let (emb, g) = match (&input, family, n, k) {
                (Some(path), fam, _, _) => {
                    let fam: Family = fam
                        .map(Into::into)
                        .ok_or_else(|| Error::parse("--family is required with --input"))?;
                    let json: RationalEmbeddingJson = read_json(path)?;
                    let n = n.ok_or_else(|| Error::parse("--n is required with --input"))?;
                    let k = k.ok_or_else(|| Error::parse("--k is required with --input"))?;
                    let g = build_graph(fam, n, k)?;
                    (RationalEmbedding::from_json(&json, fam.base())?, g)
                }
                (None, Some(fam), Some(n), Some(k)) => {
                    let instance = InstanceArgs {
                        family: fam,
                        n,
                        k,
                        budget_log2,
                    };
                    let (g, table) = build_table(&instance)?;
                    let metric = g.metric();
                    let critical = smallest_factorization_constant(&g, &metric, &table)?;
                    let c = match &c {
                        Some(s) => parse_rat(s)?,
                        None => critical + esa_embed::ratio::rat_int(1),
                    };
                    (RationalEmbedding::from_table(&table, c), g)
                }
                _ => {
                    return Err(Error::parse(
                        "factor needs either --input or --family/--n/--k",
                    ))
                }
            };
            let metric = g.metric();
            let report = check_factorization(&emb, &g, &metric)?;
            println!(
                "factorization at C = {}: {}; critical C = {}",
                format_rat(&emb.c),
                if report.passes { "PASS" } else { "FAIL" },
                report
                    .critical_c
                    .map(|r| format_rat(&r))
                    .unwrap_or_else(|| "unsatisfiable".into())
            );
            write_or_print(&out, &serde_json::to_value(&report).expect("serializable"))?;
            Ok(if report.passes { 0 } else { 1 })
        }
        ObstructCheck::Midpoints => {
            let path = input.ok_or_else(|| Error::parse("--input is required"))?;
            let fam: VectorFamilyJson = read_json(&path)?;
            let eta = parse_rat(&eta.ok_or_else(|| Error::parse("--eta is required"))?)?;
            let report = check_midpoint_family(&fam.vectors, eta, parse_c(&c)?)?;
            println!("midpoints: {}", if report.passed() { "PASS" } else { "FAIL" });
            write_or_print(&out, &serde_json::to_value(&report).expect("serializable"))?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        ObstructCheck::Reduce => {
            let path = input.ok_or_else(|| Error::parse("--input is required"))?;
            let fam: VectorFamilyJson = read_json(&path)?;
            let outp = reduce_family(&fam.vectors, parse_c(&c)?)?;
            let zj = ZFamilyJson {
                n: outp.z.n_len(),
                alpha: format_rat(&outp.z.alpha()),
                vectors: outp
                    .z
                    .vectors()
                    .iter()
                    .map(|v| v.iter().map(format_rat).collect())
                    .collect(),
            };
            println!(
                "reduced: N = {}, alpha = {}, approximation gaps = [{}]",
                zj.n,
                zj.alpha,
                outp.approx_l1
                    .iter()
                    .map(format_rat)
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            write_or_print(&out, &serde_json::to_value(&zj).expect("serializable"))?;
            Ok(0)
        }
        ObstructCheck::Triples => {
            if let Some(path) = input {
                let zj: ZFamilyJson = read_json(&path)?;
                let vectors = zj
                    .vectors
                    .iter()
                    .map(|row| row.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                let z = ZFamily::new(vectors, parse_rat(&zj.alpha)?)?;
                let (checked, failures) = triple_sweep(&z)?;
                println!("triples: {} separations checked, {} failures", checked, failures);
                return Ok(if failures == 0 { 0 } else { 1 });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut checked = 0usize;
            let mut failures = 0usize;
            let mut colors: BTreeMap<String, usize> = BTreeMap::new();
            for _ in 0..families {
                let z = esa_embed::obstruction::random_zfamily(&mut rng, FamilyGenParams::default());
                let (c1, f1) = triple_sweep(&z)?;
                checked += c1;
                failures += f1;
                let r = z.r_table()?;
                for i in 0..z.k() {
                    for j in (i + 1)..z.k() {
                        for l in (j + 1)..z.k() {
                            let color = color_triple(&r, i, j, l)?;
                            *colors.entry(format!("{color:?}").to_lowercase()).or_default() += 1;
                        }
                    }
                }
            }
            println!(
                "triples over {families} random families (seed {seed}): {checked} separations, {failures} failures, colors {colors:?}"
            );
            let value = json!({
                "seed": seed,
                "families": families,
                "separations_checked": checked,
                "failures": failures,
                "color_counts": colors,
            });
            if out.is_some() {
                write_or_print(&out, &value)?;
            }
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}

fn triple_sweep(z: &ZFamily) -> Result<(usize, usize), Error> {
    let r = z.r_table()?;
    let alpha_n = z.alpha_n();
    let mut checked = 0usize;
    let mut failures = 0usize;
    for i in 0..z.k() {
        for j in (i + 1)..z.k() {
            for l in (j + 1)..z.k() {
                checked += 1;
                if !verify_triple_separation(&r, alpha_n, i, j, l)?.pass {
                    failures += 1;
                }
            }
        }
    }
    Ok((checked, failures))
}
