use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dgrid::io;
use dgrid::metrics::{self, MetricOptions};
use dgrid::multiscale::{compress, expand_context, CompressedGridJson, ExpansionPlan};
use dgrid::projection::{build_sample, classical_scaling_euclidean, import_projection, BundleManifest};
use dgrid::{dgrid, grid_dims, normalize_columns, pairwise_euclidean, Dataset, GridSpec, Projection};
use serde::Serialize;

use crate::bench;
use crate::service;

/// Largest N for which commands materialize the full dissimilarity matrix.
pub const METRICS_LIMIT: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "dgrid", version, about = "Distance-preserving grid layouts")]
pub struct Cli {
    /// Seed for every random choice; written into each output header.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project a dataset onto the plane.
    Project(ProjectArgs),
    /// Assign a projection to a grid.
    Layout(LayoutArgs),
    /// Score a grid assignment against its dataset.
    Metrics(MetricsArgs),
    /// Compare layout methods over the datasets of a manifest.
    Bench(BenchArgs),
    /// Compress a grid with an R x S mask, optionally expanding one cell.
    Compress(CompressArgs),
    /// Draw the representative sample of a multi-feature collection.
    Sample(SampleArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Mds,
    Import(PathBuf),
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mds" => Ok(Method::Mds),
            _ => match s.strip_prefix("import:") {
                Some(p) if !p.is_empty() => Ok(Method::Import(PathBuf::from(p))),
                _ => Err(format!("unknown method {s:?}; expected mds or import:PATH")),
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    pub dataset: PathBuf,
    #[arg(long, default_value = "mds")]
    pub method: Method,
    /// Skip per-column standardization.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    pub projection: PathBuf,
    /// Target rows:columns ratio; the grid is sized from it.
    #[arg(long, conflicts_with_all = ["rows", "cols"])]
    pub delta: Option<f64>,
    #[arg(long, requires = "cols")]
    pub rows: Option<usize>,
    #[arg(long, requires = "rows")]
    pub cols: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub dataset: PathBuf,
    pub grid: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Fixed energy scale; fitted when absent.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub raw: bool,
    /// Also write per-cell values as CSV.
    #[arg(long)]
    pub per_cell: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "dgrid,random,hungarian,swap")]
    pub methods: Vec<bench::BenchMethod>,
    /// Timing runs per method; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = bench::DEFAULT_SWAP_BUDGET)]
    pub swap_budget: usize,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    pub grid: PathBuf,
    #[arg(short = 'R', long = "mask-rows")]
    pub mask_rows: usize,
    #[arg(short = 'S', long = "mask-cols")]
    pub mask_cols: usize,
    /// Coarse cell to expand, as `I,J`.
    #[arg(long, value_parser = parse_pair)]
    pub expand: Option<(usize, usize)>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Root for manifests and static assets; session snapshots go here too.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected I,J")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Project(a) => project(&a, seed),
        Command::Layout(a) => layout(&a, seed),
        Command::Metrics(a) => metrics(&a, seed),
        Command::Bench(a) => bench::run(&a, seed),
        Command::Compress(a) => compress_cmd(&a, seed),
        Command::Sample(a) => sample(&a, seed),
        Command::Serve(a) => serve(&a),
    }
}

fn header(cmd: &str, seed: u64) -> String {
    format!("# dgrid {cmd} seed={seed}\n")
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_dataset(path: &Path, raw: bool) -> Result<Dataset> {
    let d = io::read_dataset(path)?;
    Ok(if raw { d } else { normalize_columns(&d)? })
}

fn project(a: &ProjectArgs, seed: u64) -> Result<()> {
    let d = load_dataset(&a.dataset, a.raw)?;
    let (p, label) = match &a.method {
        Method::Mds => (classical_scaling_euclidean(&d)?, "mds".to_string()),
        Method::Import(path) => (import_projection(path, Some(d.ids()))?, format!("import:{}", path.display())),
    };
    let mut buf = header(&format!("project method={label}"), seed).into_bytes();
    io::format_projection(&mut buf, &p)?;
    fs::write(&a.out, buf).with_context(|| format!("writing {}", a.out.display()))?;
    println!("N={}", p.len());
    Ok(())
}

fn layout(a: &LayoutArgs, seed: u64) -> Result<()> {
    let p: Projection = io::read_projection(&a.projection)?;
    let spec = match (a.rows, a.cols) {
        (Some(r), Some(s)) => GridSpec::new(r, s)?,
        _ => grid_dims(p.len(), a.delta.unwrap_or(1.0))?,
    };
    let start = Instant::now();
    let g = dgrid(&p, spec)?;
    let seconds = start.elapsed().as_secs_f64();
    write(&a.out, &(header("layout", seed) + &io::format_assignment(&g)?))?;
    println!(
        "r={} s={} N={} empty={} seconds={seconds:.6}",
        spec.rows,
        spec.cols,
        g.len(),
        g.empty_cells()
    );
    Ok(())
}

#[derive(Serialize)]
struct MetricsFile {
    v: u32,
    seed: u64,
    n: usize,
    rows: usize,
    cols: usize,
    #[serde(flatten)]
    report: dgrid::MetricReport,
}

fn metrics(a: &MetricsArgs, seed: u64) -> Result<()> {
    let d = load_dataset(&a.dataset, a.raw)?;
    let g = io::read_assignment(&a.grid)?;
    if d.len() > METRICS_LIMIT {
        bail!("metrics need the full dissimilarity matrix; {} rows exceed the limit {METRICS_LIMIT}", d.len());
    }
    let delta = pairwise_euclidean(&d);
    let mut report = metrics::evaluate(
        &delta,
        &g,
        MetricOptions {
            k: a.k,
            p: a.p,
            c: a.c,
            per_cell: a.per_cell.is_some(),
        },
    )?;
    if let (Some(path), Some(pc)) = (&a.per_cell, report.per_cell.take()) {
        let mut text = header("metrics per-cell", seed) + "row,col,np_k,cc_prime,e_prime\n";
        let field = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for k in 0..pc.rows * pc.cols {
            text += &format!(
                "{},{},{},{},{}\n",
                k / pc.cols,
                k % pc.cols,
                field(pc.np_k[k]),
                field(pc.cc_prime[k]),
                field(pc.e_prime[k])
            );
        }
        write(path, &text)?;
    }
    println!(
        "np_k={} cc_prime={} e_prime={} k={} c={} p={}",
        report.np_k, report.cc_prime, report.e_prime, report.k, report.c, report.p
    );
    let file = MetricsFile {
        v: 1,
        seed,
        n: g.len(),
        rows: g.spec().rows,
        cols: g.spec().cols,
        report,
    };
    write(&a.out, &(serde_json::to_string_pretty(&file)? + "\n"))
}

#[derive(Serialize)]
struct CompressFile {
    v: u32,
    seed: u64,
    #[serde(flatten)]
    grid: CompressedGridJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    expansion: Option<ExpansionPlan>,
}

fn compress_cmd(a: &CompressArgs, seed: u64) -> Result<()> {
    let g = io::read_assignment(&a.grid)?;
    let c = compress(&g, a.mask_rows, a.mask_cols)?;
    let expansion = a.expand.map(|(i, j)| expand_context(&c, i, j)).transpose()?;
    println!("rows={} cols={}", c.rows, c.cols);
    let file = CompressFile {
        v: 1,
        seed,
        grid: c.to_json(),
        expansion,
    };
    write(&a.out, &(serde_json::to_string(&file)? + "\n"))
}

fn sample(a: &SampleArgs, seed: u64) -> Result<()> {
    let m = BundleManifest::read(&a.manifest)?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let mut bundles = m.load_bundles(base)?;
    if m.normalize.unwrap_or(true) {
        for b in &mut bundles {
            b.dataset = normalize_columns(&b.dataset)?;
        }
    }
    let labels = m.load_labels(base)?;
    let ids = build_sample(
        &bundles,
        m.per_set.unwrap_or(200),
        labels.as_ref(),
        m.floor.unwrap_or(0),
        m.seed.unwrap_or(seed),
    )?;
    let mut text = header("sample", m.seed.unwrap_or(seed));
    for id in &ids {
        text.push_str(id);
        text.push('\n');
    }
    write(&a.out, &text)?;
    println!("sample={} of N={}", ids.len(), bundles[0].dataset.len());
    Ok(())
}

fn serve(a: &ServeArgs) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let state = service::AppState::new(a.data_dir.clone());
        state.restore().await?;
        let listener = tokio::net::TcpListener::bind(SocketAddr::new(a.host, a.port))
            .await
            .with_context(|| format!("binding {}:{}", a.host, a.port))?;
        println!("listening on http://{}", listener.local_addr()?);
        service::serve(listener, state, service::shutdown_signal()).await
    })
}
