use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ucq_core::bench::{self, compare, gen_synthetic, load_graph, load_query, GenSpec, RunOptions};
use ucq_core::inference::{rewrite_to_ucq, SchemaClosure};
use ucq_core::mr::ExecConfig;
use ucq_core::planner::{self, plan_choice, Engine};
use ucq_core::query::{compute_stats, Ucq};
use ucq_core::rdf::{write_ntriples, Graph};

#[derive(Parser)]
#[command(
    name = "ucq",
    version,
    about = "Evaluate unions of conjunctive queries over RDF on a simulated MapReduce runtime"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a query and print its branches and structural statistics.
    Parse { query: PathBuf },
    /// Build or inspect a schema closure.
    #[command(subcommand)]
    Closure(ClosureCommand),
    /// Rewrite a query against a schema into a union of conjunctive queries.
    Rewrite {
        query: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Print the workflow an engine would run and its predicted cost.
    Plan {
        query: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_engine, default_value = "ntga")]
        engine: Engine,
    },
    /// Run a query end to end with one engine.
    Run {
        query: PathBuf,
        data: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_engine, default_value = "ntga")]
        engine: Engine,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run every applicable engine, check that they agree and write a report.
    Compare {
        query: PathBuf,
        data: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate a synthetic dataset and schema as N-Triples.
    Gen(GenArgs),
}

#[derive(Subcommand)]
enum ClosureCommand {
    /// Close a schema and write the closure as N-Triples.
    Build {
        schema: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Load a persisted closure and summarize it.
    Load { closure: PathBuf },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    inference: Switch,
    #[arg(long, default_value_t = 4)]
    partitions: usize,
    /// Reject malformed N-Triples lines instead of skipping them.
    #[arg(long)]
    strict: bool,
    /// Seed of the shuffle partitioner.
    #[arg(long, default_value_t = ucq_core::mr::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 40)]
    classes: usize,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 3)]
    fanout: usize,
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 20)]
    properties: usize,
    #[arg(long, default_value_t = 0.2)]
    mvp_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

impl Common {
    fn exec(&self) -> ExecConfig {
        ExecConfig {
            seed: self.seed,
            ..ExecConfig::default()
        }
    }

    fn schema(&self) -> Result<Option<Graph>> {
        match &self.schema {
            Some(p) => Ok(Some(load_graph("schema", p, self.strict)?)),
            None => Ok(None),
        }
    }

    /// The query as the engines will see it.
    fn prepared(&self, query: &Path) -> Result<Ucq> {
        let q = load_query(query)?;
        match (self.inference, self.schema()?) {
            (Switch::On, Some(schema)) => Ok(bench::rewrite(&q, &schema)?),
            _ => Ok(q),
        }
    }
}

fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_ntriples(g, BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Parse { query } => {
            let q = load_query(&query)?;
            println!("{q}");
            println!("{}", serde_json::to_string_pretty(&compute_stats(&q))?);
        }
        Command::Closure(ClosureCommand::Build {
            schema,
            out,
            strict,
        }) => {
            let closure = SchemaClosure::build(&load_graph("schema", &schema, strict)?);
            if closure.ignored() > 0 {
                log::warn!("{} non-schema triples ignored", closure.ignored());
            }
            write_graph(&out, closure.graph())?;
            println!(
                "{} closure triples written to {}",
                closure.graph().len(),
                out.display()
            );
        }
        Command::Closure(ClosureCommand::Load { closure }) => {
            let file =
                File::open(&closure).with_context(|| format!("opening {}", closure.display()))?;
            let c = SchemaClosure::read(BufReader::new(file))?;
            println!("{} closure triples", c.graph().len());
        }
        Command::Rewrite {
            query,
            schema,
            strict,
        } => {
            let q = load_query(&query)?;
            let closure = SchemaClosure::build(&load_graph("schema", &schema, strict)?);
            let u = rewrite_to_ucq(&q, &closure)?;
            println!("# {} branches", u.width());
            println!("{u}");
        }
        Command::Plan {
            query,
            common,
            engine,
        } => {
            let q = common.prepared(&query)?;
            let plan = planner::compile(&q, engine, common.partitions)?;
            print!("{}", plan.describe());
            println!("{}", serde_json::to_string(&plan_choice(&q, engine)?)?);
        }
        Command::Run {
            query,
            data,
            common,
            engine,
            out_dir,
        } => {
            let opts = RunOptions {
                query,
                data,
                schema: common.schema.clone(),
                engine,
                inference: common.inference == Switch::On,
                partitions: common.partitions,
                strict: common.strict,
                out_dir: out_dir.clone(),
                exec: common.exec(),
            };
            let (solutions, stats) = bench::run(&opts)?;
            if out_dir.is_none() {
                print!("{}", solutions.to_tsv());
            }
            eprintln!(
                "{} results, {} jobs, {} source scans",
                solutions.len(),
                stats.jobs_executed,
                stats.total_scans()
            );
        }
        Command::Compare {
            query,
            data,
            common,
            out_dir,
        } => {
            let q = load_query(&query)?;
            let g = load_graph("data", &data, common.strict)?;
            let schema = match common.inference {
                Switch::On => common.schema()?,
                Switch::Off => None,
            };
            let name = query
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let report = compare(
                &name,
                &q,
                &g,
                schema.as_ref(),
                common.partitions,
                &common.exec(),
            )?;
            print!("{}", report.to_csv());
            for (engine, reason) in &report.skipped {
                eprintln!("{engine} skipped: {reason}");
            }
            if let Some(dir) = out_dir {
                report.write_to(&dir)?;
            }
        }
        Command::Gen(a) => {
            let spec = GenSpec {
                classes: a.classes,
                depth: a.depth,
                fanout: a.fanout,
                instances: a.instances,
                properties: a.properties,
                mvp_rate: a.mvp_rate,
                seed: a.seed,
            };
            let (data, schema) = gen_synthetic(&spec);
            fs::create_dir_all(&a.out_dir)?;
            write_graph(&a.out_dir.join("data.nt"), &data)?;
            write_graph(&a.out_dir.join("schema.nt"), &schema)?;
            println!(
                "{} data and {} schema triples written to {}",
                data.len(),
                schema.len(),
                a.out_dir.display()
            );
        }
    }
    Ok(())
}
