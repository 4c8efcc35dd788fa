use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use linkgraph::acceptance::{self, Level};
use linkgraph::csintegral::{exact_linking, integrate_cocycle, integrate_diagram, PolyLink};
use linkgraph::diagrams::{enumerate_chord, enumerate_trivalent, forest_class};
use linkgraph::exactla::rat;
use linkgraph::milnor::{weight_on_chord_diagram, MilnorProduct, PureBraid};
use linkgraph::relations::{
    chord_lie_sign, cocycle_basis, complete_tree_to_cocycle, extend_weight_system, filtration, forest_classes,
    stu_graph_components,
};
use linkgraph::{CanonicalKey, Diagram, LinComb};

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\nschemas: diagram 1, lincomb 1, cocycles 1, polylink 1, estimate 1, check 1"
);

#[derive(Parser)]
#[command(name = "linkgraph", version, long_version = LONG_VERSION)]
#[command(about = "Graph complex, Milnor invariants and configuration space integrals for string links")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Grading {
    /// Order n (edges minus free vertices).
    #[arg(long)]
    order: usize,
    /// Number of segments m.
    #[arg(long)]
    strands: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Chord,
    Trivalent,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    /// Connected diagrams touching every segment.
    Connected,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckLevel {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// List canonical keys of trivalent diagrams.
    Enum {
        #[command(flatten)]
        g: Grading,
        #[arg(long, value_enum, default_value = "trivalent")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "connected")]
        scope: Scope,
        /// Only diagrams with exactly this many free vertices.
        #[arg(long)]
        free: Option<usize>,
        /// Print only the number of diagrams.
        #[arg(long)]
        count: bool,
    },
    /// Basis of the space of cocycles.
    Cocycles {
        #[command(flatten)]
        g: Grading,
    },
    /// Dimensions of the filtration by number of free vertices.
    Filtration {
        #[command(flatten)]
        g: Grading,
    },
    /// Complete a tree part (linear combination JSON, file or inline) to a cocycle.
    CompleteTree {
        #[command(flatten)]
        g: Grading,
        #[arg(long)]
        tree: String,
    },
    /// Components of STU graphs, for one diagram's forest class or for all classes.
    StuGraph {
        /// Canonical key, diagram JSON, or a file holding either.
        #[arg(long, conflicts_with = "all")]
        diagram: Option<String>,
        /// Report every forest class of the given grading.
        #[arg(long, requires_all = ["order", "strands"])]
        all: bool,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        strands: Option<usize>,
    },
    /// Milnor invariant of a pure braid.
    Milnor {
        /// Braid word such as "A(1,3) A(2,3) A(1,3)^-1".
        #[arg(long, allow_hyphen_values = true)]
        braid: String,
        #[arg(long)]
        strands: usize,
        /// Indices such as 1,2:3; products as 1:2*2:3.
        #[arg(long)]
        indices: String,
    },
    /// Weight system of a Milnor invariant on chord diagrams.
    Weights {
        #[command(flatten)]
        g: Grading,
        #[arg(long)]
        indices: String,
        /// Also extend the weights to all trivalent diagrams through STU.
        #[arg(long)]
        extend: bool,
    },
    /// Monte Carlo configuration space integral.
    Integrate {
        /// Diagram: canonical key, diagram JSON, or a file holding either.
        #[arg(long, conflicts_with = "cocycle", required_unless_present = "cocycle")]
        diagram: Option<String>,
        /// Linear combination JSON, file or inline.
        #[arg(long)]
        cocycle: Option<String>,
        /// PolyLink JSON, file or inline.
        #[arg(long, conflicts_with = "braid", required_unless_present = "braid")]
        link: Option<String>,
        /// Braid word to embed instead of a link file.
        #[arg(long, requires = "strands", allow_hyphen_values = true)]
        braid: Option<String>,
        #[arg(long)]
        strands: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also print exact pairwise linking numbers of the link.
        #[arg(long)]
        linking: bool,
    },
    /// Run the acceptance suite.
    Check {
        #[arg(long, value_enum, default_value = "fast")]
        level: CheckLevel,
    },
}

/// A reportable result: JSON body plus its text rendering.
struct Report {
    json: Value,
    text: String,
    ok: bool,
}

impl Report {
    fn new(json: Value, text: impl Into<String>) -> Self {
        Report { json, text: text.into(), ok: true }
    }
}

type Failure = String;

fn fail<E: std::fmt::Display>(e: E) -> Failure {
    e.to_string()
}

/// The argument itself, or the contents of the file it names.
fn inline_or_file(arg: &str) -> Result<String, Failure> {
    let t = arg.trim();
    if t.starts_with('{') || !Path::new(t).is_file() {
        return Ok(t.to_string());
    }
    std::fs::read_to_string(t).map_err(|e| format!("cannot read {t}: {e}"))
}

fn read_diagram(arg: &str) -> Result<Diagram, Failure> {
    let s = inline_or_file(arg)?;
    if s.trim_start().starts_with('{') {
        Diagram::from_json(&s).map_err(fail)
    } else {
        Ok(s.trim().parse::<CanonicalKey>().map_err(fail)?.to_diagram())
    }
}

fn read_comb(arg: &str) -> Result<LinComb, Failure> {
    LinComb::from_json(&inline_or_file(arg)?).map_err(fail)
}

fn keys_json(keys: &[CanonicalKey]) -> Value {
    keys.iter().map(|k| Value::String(k.to_string())).collect()
}

fn run(cmd: &Command, json_out: bool) -> Result<Report, Failure> {
    match cmd {
        Command::Enum { g, kind, scope, free, count } => {
            let max_free = match kind {
                Kind::Chord => 0,
                Kind::Trivalent => g.order,
            };
            let keys: Vec<CanonicalKey> = enumerate_trivalent(g.order, g.strands, max_free)
                .into_iter()
                .filter(|k| matches!(scope, Scope::All) || (k.touches_all_segments() && k.is_connected()))
                .filter(|k| free.is_none_or(|f| k.num_free() == f))
                .collect();
            let text = if *count {
                keys.len().to_string()
            } else {
                keys.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("\n")
            };
            let mut j = json!({ "n": g.order, "m": g.strands, "count": keys.len() });
            if !count {
                j["keys"] = keys_json(&keys);
            }
            Ok(Report::new(j, text))
        }
        Command::Cocycles { g } => {
            let space = cocycle_basis(g.order, g.strands);
            let mut text = format!("dim {}", space.dim());
            for e in space.elements() {
                text.push('\n');
                text.push_str(&e.to_string());
            }
            Ok(Report::new(space.to_json(), text))
        }
        Command::Filtration { g } => {
            let f = filtration(g.order, g.strands);
            let dims = f.dims();
            let text = dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
            let j = json!({ "n": g.order, "m": g.strands, "dims": dims, "quotientDims": f.quotient_dims() });
            Ok(Report::new(j, text))
        }
        Command::CompleteTree { g, tree } => {
            let tree = read_comb(tree)?;
            let c = complete_tree_to_cocycle(g.order, g.strands, &tree).map_err(fail)?;
            let ind: Vec<Value> = c.indeterminacy_elements().iter().map(LinComb::to_json_value).collect();
            let text = format!("{}\nindeterminacy dim {}", c.cocycle, c.indeterminacy.dim());
            let j = json!({ "cocycle": c.cocycle.to_json_value(), "level": c.level, "indeterminacy": ind });
            Ok(Report::new(j, text))
        }
        Command::StuGraph { diagram, all, order, strands } => {
            let classes: Vec<(String, Diagram, usize, usize)> = if *all {
                let (n, m) = (order.unwrap(), strands.unwrap());
                forest_classes(n, m).into_iter().map(|(c, k)| (c, k.to_diagram(), n, m)).collect()
            } else {
                let arg = diagram.as_ref().ok_or("pass --diagram or --all")?;
                let d = read_diagram(arg)?;
                let class = forest_class(&d).map_err(fail)?;
                let (n, m) = (d.order().max(0) as usize, d.m);
                vec![(class, d, n, m)]
            };
            let mut rows = Vec::new();
            let mut lines = Vec::new();
            for (class, d, n, m) in classes {
                let c = stu_graph_components(&d, n, m).map_err(fail)?;
                lines.push(format!("{class}\t{c}"));
                rows.push(json!({ "class": class, "n": n, "m": m, "components": c }));
            }
            Ok(Report::new(json!({ "classes": rows }), lines.join("\n")))
        }
        Command::Milnor { braid, strands, indices } => {
            let b = PureBraid::parse(*strands, braid).map_err(fail)?;
            let p: MilnorProduct = indices.parse().map_err(fail)?;
            let v = p.evaluate(&b).map_err(fail)?;
            let j = json!({ "braid": b.to_string(), "strands": strands, "indices": indices, "mu": v });
            Ok(Report::new(j, v.to_string()))
        }
        Command::Weights { g, indices, extend } => {
            let p: MilnorProduct = indices.parse().map_err(fail)?;
            let mut canonical = LinComb::new();
            let mut lines = Vec::new();
            for k in enumerate_chord(g.order, g.strands) {
                let w = weight_on_chord_diagram(&p, &k.to_diagram(), None).map_err(fail)?;
                let s = chord_lie_sign(&k).map_err(fail)?;
                lines.push(format!("{k}\t{w}"));
                canonical.add_key(k, rat(w * s as i64));
            }
            let mut j = json!({
                "n": g.order,
                "m": g.strands,
                "indices": indices,
                "weights": canonical.to_json_value(),
            });
            if *extend {
                let full = extend_weight_system(g.order, g.strands, &canonical).ok_or("weights violate STU")?;
                lines.push(format!("extension {full}"));
                j["extension"] = full.to_json_value();
            }
            Ok(Report::new(j, lines.join("\n")))
        }
        Command::Integrate { diagram, cocycle, link, braid, strands, samples, seed, linking } => {
            let link = match (link, braid) {
                (Some(l), _) => PolyLink::from_json(&inline_or_file(l)?).map_err(fail)?,
                (None, Some(w)) => PolyLink::from_braid(&PureBraid::parse(strands.unwrap(), w).map_err(fail)?),
                (None, None) => return Err("pass --link or --braid".into()),
            };
            let est = match (diagram, cocycle) {
                (Some(d), _) => integrate_diagram(&read_diagram(d)?, &link, *samples, *seed).map_err(fail)?,
                (None, Some(c)) => integrate_cocycle(&read_comb(c)?, &link, *samples, *seed).map_err(fail)?,
                (None, None) => return Err("pass --diagram or --cocycle".into()),
            };
            let mut j = serde_json::to_value(est).map_err(fail)?;
            let mut text = format!("{} +- {} ({} samples, seed {})", est.value, est.std_error, est.samples, est.seed);
            if *linking {
                let mut lk = serde_json::Map::new();
                for a in 1..=link.num_strands() {
                    for b in a + 1..=link.num_strands() {
                        let v = exact_linking(&link, a, b).map_err(fail)?;
                        text.push_str(&format!("\nlk({a},{b}) = {v}"));
                        lk.insert(format!("{a},{b}"), v.into());
                    }
                }
                j["linking"] = Value::Object(lk);
            }
            Ok(Report::new(j, text))
        }
        Command::Check { level } => {
            let level = match level {
                CheckLevel::Fast => Level::Fast,
                CheckLevel::Full => Level::Full,
            };
            let outcomes = acceptance::run(level, |o| {
                if !json_out {
                    println!("{o}");
                }
            });
            let ok = outcomes.iter().all(|o| o.passed);
            let passed = outcomes.iter().filter(|o| o.passed).count();
            let mut text: Vec<String> = outcomes.iter().map(|o| o.to_string()).collect();
            text.push(format!("{passed} of {} criteria passed", outcomes.len()));
            let j = json!({ "passed": ok, "criteria": outcomes });
            Ok(Report { json: j, text: text.join("\n"), ok })
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let invocation = argv[1..].join(" ");
    match run(&cli.command, cli.json) {
        Ok(r) => {
            if cli.json {
                let mut j = r.json;
                if let Value::Object(map) = &mut j {
                    map.insert("invocation".into(), Value::String(invocation));
                }
                println!("{j}");
            } else {
                eprintln!("# linkgraph {invocation}");
                if matches!(cli.command, Command::Check { .. }) {
                    // Criterion lines were printed as they finished.
                    println!("{}", r.text.lines().last().unwrap_or_default());
                } else {
                    println!("{}", r.text);
                }
            }
            if r.ok {
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
