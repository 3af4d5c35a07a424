use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tropdiv::clifford::{clifford_theorem_harness, find_g12, G12Wire};
use tropdiv::generate::{gen_hyperelliptic, gen_nonhyperelliptic, random_hyperelliptic, Gluing};
use tropdiv::io::{format_divisor, format_graph, function_to_json, model_to_json, read_divisor, read_model};
use tropdiv::jacobian::format_coords;
use tropdiv::rank::{clifford_check, riemann_roch_report, verify_certificate, CertificateWire};
use tropdiv::reduction::{is_q_reduced, p_reduce_metric, q_reduce};
use tropdiv::report::ExperimentReport;
use tropdiv::{
    abel_jacobi, are_equivalent, equivalence_witness, period_basis, rank_metric, Divisor, Error, Model, PointRef,
    RankMethod, RankOptions,
};

#[derive(Parser)]
#[command(name = "tropdiv", version, about = "Divisors, ranks and Jacobians on metric graphs")]
struct Cli {
    /// Print a JSON report instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Method::Rds)]
    method: Method,
    /// Cap on the number of unit edges when subdividing.
    #[arg(long, global = true, default_value_t = tropdiv::metric_graph::DEFAULT_MAX_SUBDIVISION)]
    max_subdiv: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Subdivide,
    Rds,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// |E| - |V| + 1
    Genus { graph: PathBuf },
    /// The canonical divisor.
    Canonical { graph: PathBuf },
    /// Rank of a divisor given inline or as a file.
    Rank {
        graph: PathBuf,
        divisor: String,
        /// Write a replayable certificate to this file.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// The divisor reduced with respect to a point.
    Reduce {
        graph: PathBuf,
        divisor: String,
        #[arg(long)]
        sink: String,
        /// Treat the model as a finite graph (lengths ignored) and print the firing script.
        #[arg(long)]
        finite: bool,
    },
    IsReduced {
        graph: PathBuf,
        divisor: String,
        #[arg(long)]
        at: String,
        #[arg(long)]
        finite: bool,
    },
    /// Linear equivalence of two divisors.
    Equiv { graph: PathBuf, d1: String, d2: String },
    /// Abel-Jacobi coordinates in the fundamental-cycle chart.
    Aj {
        graph: PathBuf,
        divisor: String,
        #[arg(long)]
        base: String,
    },
    /// A piecewise-linear f with div(f) = D2 - D1.
    Witness { graph: PathBuf, d1: String, d2: String },
    RiemannRoch { graph: PathBuf, divisor: String },
    CliffordCheck { graph: PathBuf, divisor: String },
    /// A certified degree-2 rank-1 divisor, if one is found.
    FindG12 { graph: PathBuf },
    Hyperelliptic { graph: PathBuf },
    /// Seeded campaign checking that special divisors of degree 2r and rank r force a g12.
    CliffordVerify {
        graph: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Generate a model and print it in the text format.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Replay a rank or g12 certificate.
    VerifyCert { graph: PathBuf, cert: PathBuf },
}

#[derive(Subcommand)]
enum GenKind {
    /// Random double cover of a tree.
    Hyperelliptic {
        #[arg(long)]
        genus: usize,
    },
    /// Double cover of a given tree.
    Cover {
        tree: PathBuf,
        /// Comma-separated tree edges that get two copies.
        #[arg(long, value_delimiter = ',')]
        doubled: Vec<String>,
        /// Extra branch vertices, comma-separated.
        #[arg(long, value_delimiter = ',')]
        branch: Vec<String>,
    },
    /// Random cubic graph with no involution having a tree quotient.
    Nonhyperelliptic {
        #[arg(long)]
        genus: usize,
    },
}

struct Outcome {
    text: String,
    report: ExperimentReport,
}

impl Outcome {
    fn new(text: impl Into<String>, report: ExperimentReport) -> Self {
        Outcome {
            text: text.into(),
            report,
        }
    }
}

fn options(cli: &Cli) -> RankOptions {
    let method = match cli.method {
        Method::Subdivide => RankMethod::Subdivide,
        Method::Rds => RankMethod::Rds,
        Method::Both => RankMethod::Both,
    };
    RankOptions {
        max_subdiv: cli.max_subdiv,
        ..RankOptions::default().with_method(method)
    }
}

fn model_and_divisor(graph: &Path, d: &str) -> tropdiv::Result<(Model, Divisor)> {
    let m = read_model(graph)?;
    let d = read_divisor(&m, d)?;
    d.check_on(&m)?;
    Ok((m, d))
}

fn run(cli: &Cli) -> tropdiv::Result<Outcome> {
    let seed = Some(cli.seed);
    Ok(match &cli.command {
        Command::Genus { graph } => {
            let m = read_model(graph)?;
            let mut r = ExperimentReport::new(&m, "genus", None);
            r.check("genus", true, m.genus());
            Outcome::new(m.genus().to_string(), r)
        }
        Command::Canonical { graph } => {
            let m = read_model(graph)?;
            let k = format_divisor(&m, &m.canonical_divisor());
            let mut r = ExperimentReport::new(&m, "canonical", None);
            r.check("canonical", true, &k);
            Outcome::new(k, r)
        }
        Command::Rank { graph, divisor, cert } => {
            let (m, d) = model_and_divisor(graph, divisor)?;
            let mut opts = options(cli);
            if cert.is_some() || cli.json {
                opts = opts.certified();
            }
            let out = rank_metric(&m, &d, &opts)?;
            let mut r = ExperimentReport::new(&m, "rank", None);
            r.check("rank", true, json!({ "divisor": format_divisor(&m, &d), "rank": out.rank }));
            if let Some(c) = &out.certificate {
                let wire = CertificateWire::new(&m, &d, c);
                if let Some(path) = cert {
                    write(path, &serde_json::to_string_pretty(&wire).expect("certificate serialises"))?;
                }
                r.certificate(&wire);
            }
            Outcome::new(out.rank.to_string(), r)
        }
        Command::Reduce { graph, divisor, sink, finite } => {
            let (m, d) = model_and_divisor(graph, divisor)?;
            let p = m.parse_point(sink)?;
            let mut r = ExperimentReport::new(&m, "reduce", None);
            if *finite {
                let out = q_reduce(&m, &d, vertex(&p)?)?;
                let reduced = format_divisor(&m, &out.reduced);
                let script = out.script.to_named(&m);
                r.check("reduce", true, json!({ "reduced": reduced, "script": script }));
                let text = format!("{reduced}\n{}", serde_json::to_string(&script).expect("script serialises"));
                Outcome::new(text, r)
            } else {
                let reduced = format_divisor(&m, &p_reduce_metric(&m, &d, &p)?);
                r.check("reduce", true, json!({ "reduced": reduced }));
                Outcome::new(reduced, r)
            }
        }
        Command::IsReduced { graph, divisor, at, finite } => {
            let (m, d) = model_and_divisor(graph, divisor)?;
            let p = m.parse_point(at)?;
            let reduced = if *finite {
                is_q_reduced(&m, &d, vertex(&p)?)?
            } else {
                p_reduce_metric(&m, &d, &p)? == d
            };
            let mut r = ExperimentReport::new(&m, "is-reduced", None);
            r.check("is-reduced", true, reduced);
            Outcome::new(reduced.to_string(), r)
        }
        Command::Equiv { graph, d1, d2 } => {
            let (m, a) = model_and_divisor(graph, d1)?;
            let b = read_divisor(&m, d2)?;
            let eq = are_equivalent(&m, &a, &b)?;
            let mut r = ExperimentReport::new(&m, "equiv", None);
            r.check("equiv", true, eq);
            Outcome::new(eq.to_string(), r)
        }
        Command::Aj { graph, divisor, base } => {
            let (m, d) = model_and_divisor(graph, divisor)?;
            let base = m.parse_point(base)?;
            let lattice = period_basis(&m)?;
            let v = abel_jacobi(&m, &lattice, &d, &base)?;
            let mut r = ExperimentReport::new(&m, "aj", None);
            r.check("aj", true, &v);
            Outcome::new(format_coords(&v.coords), r)
        }
        Command::Witness { graph, d1, d2 } => {
            let (m, a) = model_and_divisor(graph, d1)?;
            let b = read_divisor(&m, d2)?;
            let f = function_to_json(&m, &equivalence_witness(&m, &a, &b)?);
            let mut r = ExperimentReport::new(&m, "witness", None);
            r.check("witness", true, Value::Null);
            r.certificate(&f);
            Outcome::new(serde_json::to_string_pretty(&f).expect("function serialises"), r)
        }
        Command::RiemannRoch { graph, divisor } => {
            let (m, d) = model_and_divisor(graph, divisor)?;
            let rr = riemann_roch_report(&m, &d, &options(cli))?;
            let text = format!(
                "r(D) = {}, r(K - D) = {}, deg - g + 1 = {}: {}",
                rr.rank,
                rr.dual_rank,
                rr.degree - rr.genus + 1,
                if rr.holds { "holds" } else { "VIOLATED" }
            );
            let mut r = ExperimentReport::new(&m, "riemann-roch", None);
            r.check("riemann-roch", rr.holds, &rr);
            Outcome::new(text, r)
        }
        Command::CliffordCheck { graph, divisor } => {
            let (m, d) = model_and_divisor(graph, divisor)?;
            let c = clifford_check(&m, &d, &options(cli))?;
            let text = format!(
                "deg = {}, r = {}, special = {}: {}",
                c.degree,
                c.rank,
                c.special,
                if c.holds { "holds" } else { "VIOLATED" }
            );
            let mut r = ExperimentReport::new(&m, "clifford-check", None);
            r.check("clifford", c.holds, &c);
            Outcome::new(text, r)
        }
        Command::FindG12 { graph } => {
            let m = read_model(graph)?;
            let mut r = ExperimentReport::new(&m, "find-g12", None);
            match find_g12(&m)? {
                Some(cert) => {
                    let wire = G12Wire::new(&m, &cert);
                    r.check("find-g12", true, &wire.certificate.divisor);
                    r.certificate(&wire);
                    Outcome::new(serde_json::to_string_pretty(&wire).expect("certificate serialises"), r)
                }
                None => {
                    r.check("find-g12", true, Value::Null);
                    Outcome::new("none", r)
                }
            }
        }
        Command::Hyperelliptic { graph } => {
            let m = read_model(graph)?;
            let found = find_g12(&m)?;
            let mut r = ExperimentReport::new(&m, "hyperelliptic", None);
            r.check("hyperelliptic", true, found.is_some());
            if let Some(cert) = &found {
                r.certificate(G12Wire::new(&m, cert));
            }
            Outcome::new(found.is_some().to_string(), r)
        }
        Command::CliffordVerify { graph, trials } => {
            let m = read_model(graph)?;
            let h = clifford_theorem_harness(&m, *trials, cli.seed)?;
            let mut r = ExperimentReport::new(&m, "clifford-verify", seed);
            r.check("clifford-verify", h.passed, &h);
            let mut text = match &h.g12 {
                Some(w) => format!(
                    "g12 {}; multiples checked for r = 2..={}",
                    w.certificate.divisor,
                    h.genus - 2
                ),
                None => {
                    let total: usize = h.campaigns.iter().map(|c| c.bounded).sum();
                    format!("no g12; {total} sampled divisors shown to have rank below r")
                }
            };
            for c in &h.counterexamples {
                text.push_str(&format!("\nCOUNTEREXAMPLE r = {}: {}", c.r, c.divisor));
            }
            Outcome::new(text, r)
        }
        Command::Gen { kind, out } => {
            let m = match kind {
                GenKind::Hyperelliptic { genus } => random_hyperelliptic(*genus, cli.seed)?.model,
                GenKind::Cover { tree, doubled, branch } => {
                    let gluing = Gluing {
                        doubled: doubled.clone(),
                        branch_vertices: branch.clone(),
                    };
                    gen_hyperelliptic(&read_model(tree)?.to_spec(), &gluing)?.model
                }
                GenKind::Nonhyperelliptic { genus } => gen_nonhyperelliptic(*genus, cli.seed)?,
            };
            let mut text = format_graph(&m);
            if let Some(path) = out {
                write(path, &text)?;
                text = format!("wrote {} (genus {})", path.display(), m.genus());
            }
            let mut r = ExperimentReport::new(&m, "gen", seed);
            r.check("gen", true, m.genus());
            r.certificate(model_to_json(&m));
            Outcome::new(text.trim_end(), r)
        }
        Command::VerifyCert { graph, cert } => {
            let m = read_model(graph)?;
            let text = std::fs::read_to_string(cert).map_err(|e| Error::Io(format!("cannot read {}: {e}", cert.display())))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| parse_error(e.to_string()))?;
            let verdict = if value.get("source").is_some() {
                let wire: G12Wire = serde_json::from_value(value).map_err(|e| parse_error(e.to_string()))?;
                wire.decode(&m)?.verify(&m)
            } else {
                let wire: CertificateWire = serde_json::from_value(value).map_err(|e| parse_error(e.to_string()))?;
                let (d, c) = wire.decode(&m)?;
                verify_certificate(&m, &d, &c)
            };
            let mut r = ExperimentReport::new(&m, "verify-cert", None);
            match verdict {
                Ok(()) => {
                    r.check("verify-cert", true, Value::Null);
                    Outcome::new("verified", r)
                }
                Err(Error::CertificateRejected(why)) => {
                    r.check("verify-cert", false, &why);
                    Outcome::new(format!("rejected: {why}"), r)
                }
                Err(e) => return Err(e),
            }
        }
    })
}

fn vertex(p: &PointRef) -> tropdiv::Result<usize> {
    p.vertex()
        .ok_or_else(|| Error::InvalidPoint("--finite needs a vertex".into()))
}

fn parse_error(msg: String) -> Error {
    Error::Parse { line: 0, msg }
}

fn write(path: &Path, text: &str) -> tropdiv::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut out) => {
            if cli.json {
                out.report.timing_ms = Some(start.elapsed().as_millis() as u64);
                out.text = out.report.to_json();
            }
            let _ = writeln!(std::io::stdout(), "{}", out.text);
            if out.report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ (Error::RankMismatch { .. } | Error::MethodsDisagree { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
