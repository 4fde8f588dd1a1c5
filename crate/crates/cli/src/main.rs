use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use setpack_core::auxgraph::build_aux_graph;
use setpack_core::instance::random_instance;
use setpack_core::localsearch::{default_t, greedy_maximalize};
use setpack_core::lowerbound::{generate_gap_instance, GapParams};
use setpack_core::oracle::{naive_canonical_search, Budget};
use setpack_core::report::{format_table, run_bench, solve, Manifest, SolveOptions};
use setpack_core::{Error, Instance, Packing, SearchConfig, Subroutine};

#[derive(Parser)]
#[command(name = "setpack", version, about = "Local search for k-set packing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the local search on one instance and print a report.
    Solve(SolveArgs),
    /// Write a random or lower-bound instance.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Check a packing for canonical improvements of at most t edges.
    Certify(CertifyArgs),
    /// Run every row of a TOML manifest and print a table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Naive,
    Color,
}

impl From<Mode> for Subroutine {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Naive => Subroutine::NaiveEnumeration,
            Mode::Color => Subroutine::ColorCoding,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "color")]
    mode: Mode,
    /// Largest improvement in edges; defaults to 4*ceil(log2 n)+1.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also compute the exact optimum and the ratio.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value = "on")]
    self_loops: Toggle,
    /// Print the report as one JSON object.
    #[arg(long)]
    json: bool,
    /// Leave wall time out of the report.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Distinct uniform random k-subsets of the ground set.
    Random {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        sets: usize,
        #[arg(long)]
        ground: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Instance with a packing of 3n sets that no improvement of size at most
    /// t can grow, next to a packing of kn sets. Writes `<out>.meta` too.
    Gap {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_attempts: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CertifyArgs {
    instance: PathBuf,
    #[arg(long)]
    t: Option<usize>,
    /// Comma-separated set ids; defaults to the greedy packing.
    #[arg(long, value_delimiter = ',')]
    packing: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "on")]
    self_loops: Toggle,
    #[arg(long, default_value_t = 50_000_000)]
    max_nodes: u64,
}

#[derive(Args)]
struct BenchArgs {
    manifest: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write one JSON object per row to this file.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    no_timing: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget(_) => 3,
        _ => 2,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_instance(path: &Path) -> Result<Instance, Error> {
    Instance::read(path).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Error> {
    let instance = read_instance(&args.instance)?;
    let opts = SolveOptions {
        search: SearchConfig {
            t: args.t,
            trials: args.trials,
            seed: args.seed,
            subroutine: args.mode.into(),
            include_self_loops: matches!(args.self_loops, Toggle::On),
            ..SearchConfig::default()
        },
        oracle: args.oracle,
        ..SolveOptions::default()
    };
    let mut report = solve(&instance, &args.instance.display().to_string(), &opts)?;
    if args.no_timing {
        report = report.without_timing();
    }
    if args.json {
        println!("{}", report.to_json_line());
        return Ok(0);
    }
    println!("instance        {}", report.instance);
    println!("digest          {}", report.digest);
    println!("mode            {}", report.mode.as_str());
    println!("k               {}", report.k);
    println!("sets            {}", report.sets);
    println!("t               {}", report.t);
    println!("seed            {}", report.seed);
    println!("packing size    {}", report.packing_size);
    if let Some(opt) = report.optimum {
        println!("optimum         {opt}");
    }
    if let Some(r) = report.ratio {
        println!("ratio           {r:.4}");
    }
    println!("iterations      {}", report.iterations);
    println!("improvements    {}", report.improvements);
    println!("colorings       {}", report.colorings_tried);
    if let Some(ms) = report.wall_time_ms {
        println!("wall time ms    {ms}");
    }
    Ok(0)
}

fn cmd_generate(kind: GenerateKind) -> Result<u8, Error> {
    match kind {
        GenerateKind::Random {
            k,
            sets,
            ground,
            seed,
            out,
        } => {
            let inst = random_instance(k, sets, ground, seed)?;
            inst.write(&out)?;
            println!(
                "wrote {} ({} sets, k = {k})",
                out.display(),
                inst.num_sets()
            );
        }
        GenerateKind::Gap {
            k,
            n,
            t,
            seed,
            max_attempts,
            out,
        } => {
            let mut params = GapParams::new(k, n, t, seed);
            params.max_attempts = max_attempts;
            let gap = generate_gap_instance(&params)?;
            gap.instance.write(&out)?;
            let mut meta = out.clone().into_os_string();
            meta.push(".meta");
            let meta = PathBuf::from(meta);
            write_file(&meta, &gap.metadata())?;
            println!(
                "wrote {} (|S| = {}, |O| = {}, rejections = {})",
                out.display(),
                gap.s_ids().len(),
                gap.o_ids().len(),
                gap.rejections
            );
        }
    }
    Ok(0)
}

fn cmd_certify(args: CertifyArgs) -> Result<u8, Error> {
    let instance = read_instance(&args.instance)?;
    let packing = match args.packing {
        Some(ids) => Packing::new(&instance, ids)?,
        None => greedy_maximalize(&instance, &Packing::empty()),
    };
    let t = args.t.unwrap_or_else(|| default_t(instance.num_sets()));
    let g = build_aux_graph(&instance, &packing, matches!(args.self_loops, Toggle::On))?;
    let found = naive_canonical_search(&g, &instance, t, Budget::nodes(args.max_nodes))?;
    println!("packing size    {}", packing.len());
    println!("maximal         {}", instance.is_maximal(&packing));
    println!("t               {t}");
    match found {
        None => println!("certified       true"),
        Some(c) => {
            let labels: Vec<String> = c
                .edge_indices
                .iter()
                .map(|&e| g.edge(e).label.to_string())
                .collect();
            println!("certified       false");
            println!(
                "improvement     {} sets: {}",
                labels.len(),
                labels.join(",")
            );
        }
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Error> {
    let manifest = Manifest::read(&args.manifest)?;
    let rows = run_bench(&manifest, args.jobs, !args.no_timing)?;
    print!("{}", format_table(&rows));
    if let Some(path) = &args.jsonl {
        let text: String = rows.iter().map(|r| r.to_json_line() + "\n").collect();
        write_file(path, &text)?;
    }
    Ok(if rows.iter().any(|r| r.failed()) {
        1
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Generate { kind } => cmd_generate(kind),
        Command::Certify(a) => cmd_certify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
