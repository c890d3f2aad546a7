//! Batch front end over the engine. Every JSON payload is produced by the same
//! `views` functions the HTTP service calls, so outputs match byte for byte.

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use geneweave_core::enrichment::{build_disease_gene_map, cluster_overlay};
use geneweave_core::genemodel::ModelError;
use geneweave_core::highlight::HighlightMode;
use geneweave_core::ingest::{
    parse_cluster_table, parse_disease_table, parse_interaction_table, ClusterDataset, ClusterId, DiseaseDataset,
    GeneId, InteractionDataset, Location,
};
use geneweave_core::views::{self, format_significant, ViewConfig};
use geneweave_service::session::draw_seed;
use geneweave_service::{ServiceConfig, DEFAULT_BODY_LIMIT};

#[derive(Debug, Parser)]
#[command(name = "geneweave", version, about = "Explore gene clusters, interactions and disease associations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Directory served for paths outside the API.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BODY_LIMIT)]
        body_limit: usize,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Parse dataset files and report rows, warnings and errors.
    Validate {
        #[arg(long)]
        cluster: Option<PathBuf>,
        #[arg(long)]
        interactions: Option<PathBuf>,
        #[arg(long)]
        diseases: Option<PathBuf>,
    },
    /// Emit the cluster view, or with --cluster-id that cluster's gene view.
    Layout {
        #[arg(long)]
        cluster: PathBuf,
        #[arg(long)]
        interactions: Option<PathBuf>,
        #[arg(long, requires = "interactions")]
        cluster_id: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        min_overlap: usize,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Print a per-cluster enrichment table for one disease.
    Enrich {
        #[arg(long)]
        cluster: PathBuf,
        #[arg(long)]
        diseases: PathBuf,
        #[arg(long)]
        disease: String,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Emit the disease overlay for the cluster view or one gene view.
    Overlay {
        #[arg(long)]
        cluster: PathBuf,
        #[arg(long)]
        diseases: PathBuf,
        #[arg(long)]
        disease: String,
        #[arg(long)]
        interactions: Option<PathBuf>,
        #[arg(long, requires = "interactions")]
        cluster_id: Option<String>,
        #[arg(long, default_value_t = 1)]
        min_overlap: usize,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Emit a highlight query result for one gene.
    Highlight {
        #[arg(long)]
        cluster: PathBuf,
        #[arg(long)]
        interactions: PathBuf,
        #[arg(long)]
        cluster_id: String,
        #[arg(long)]
        gene: u64,
        /// levels, threshold or top_n
        #[arg(long)]
        mode: String,
        #[arg(long)]
        param: f64,
        #[command(flatten)]
        out: OutArg,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// List disease labels with record counts.
    Diseases {
        #[arg(long)]
        diseases: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParamsArg {
    /// JSON file overriding model, layout and overlay parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub path: Option<PathBuf>,
    pub location: Option<Location>,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
            path: None,
            location: None,
        }
    }

    fn at(mut self, path: &Path) -> Self {
        self.path = Some(path.to_path_buf());
        self
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]", self.code)?;
        if let Some(path) = &self.path {
            write!(f, " {}", path.display())?;
            if let Some(loc) = self.location {
                write!(f, ":{}", loc.line)?;
                if let Some(col) = loc.column {
                    write!(f, ":{col}")?;
                }
            }
        }
        write!(f, ": {}", self.message)
    }
}

impl From<geneweave_core::Error> for CliError {
    fn from(e: geneweave_core::Error) -> Self {
        CliError {
            code: e.code(),
            message: e.to_string(),
            path: None,
            location: e.location(),
        }
    }
}

/// What a command produced. `status` is nonzero when validation found errors.
pub struct Output {
    pub stdout: Vec<u8>,
    pub stderr: String,
    pub status: u8,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new("IO_ERROR", e.to_string()).at(path))
}

fn load<T>(path: &Path, parse: fn(&str) -> Result<T, geneweave_core::ingest::IngestError>) -> Result<T, CliError> {
    parse(&read(path)?).map_err(|e| CliError::from(geneweave_core::Error::from(e)).at(path))
}

fn load_cluster(path: &Path) -> Result<ClusterDataset, CliError> {
    load(path, parse_cluster_table)
}

fn load_interactions(path: &Path) -> Result<InteractionDataset, CliError> {
    load(path, parse_interaction_table)
}

fn load_diseases(path: &Path) -> Result<DiseaseDataset, CliError> {
    load(path, parse_disease_table)
}

fn load_params(arg: &ParamsArg) -> Result<ViewConfig, CliError> {
    match &arg.params {
        None => Ok(ViewConfig::default()),
        Some(path) => serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::new("BAD_PARAMETER", e.to_string()).at(path)),
    }
}

fn resolve(ds: &ClusterDataset, reference: &str) -> Result<ClusterId, CliError> {
    ds.resolve_cluster(reference)
        .ok_or_else(|| geneweave_core::Error::from(ModelError::UnknownCluster(reference.to_string())).into())
}

fn emit(out: &OutArg, bytes: Vec<u8>, stderr: String) -> Result<Output, CliError> {
    match &out.out {
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| CliError::new("IO_ERROR", e.to_string()).at(path))?;
            Ok(Output { stdout: Vec::new(), stderr, status: 0 })
        }
        None => Ok(Output { stdout: bytes, stderr, status: 0 }),
    }
}

pub fn run(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Serve {
            listen,
            static_dir,
            body_limit,
            params,
        } => {
            let config = ServiceConfig {
                view: load_params(&params)?,
                body_limit,
                static_dir,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::new("IO_ERROR", e.to_string()))?;
            eprintln!("listening on http://{listen}");
            runtime
                .block_on(geneweave_service::serve(listen, config))
                .map_err(|e| CliError::new("IO_ERROR", e.to_string()))?;
            Ok(Output {
                stdout: Vec::new(),
                stderr: String::new(),
                status: 0,
            })
        }
        Command::Validate {
            cluster,
            interactions,
            diseases,
        } => validate(cluster.as_deref(), interactions.as_deref(), diseases.as_deref()),
        Command::Layout {
            cluster,
            interactions,
            cluster_id,
            seed,
            min_overlap,
            out,
            params,
        } => {
            let config = load_params(&params)?;
            let ds = load_cluster(&cluster)?;
            let (seed, stderr) = match seed {
                Some(s) => (s, String::new()),
                None => {
                    let s = draw_seed();
                    (s, format!("seed: {s}\n"))
                }
            };
            let bytes = match cluster_id {
                None => views::to_json(&views::cluster_view(&ds, &config, seed, min_overlap, seed)?),
                Some(reference) => {
                    let path = interactions.expect("clap enforces --interactions");
                    let ia = load_interactions(&path)?;
                    let cluster = resolve(&ds, &reference)?;
                    views::to_json(&views::gene_view(&ds, &ia, cluster, &config, seed)?)
                }
            };
            emit(&out, bytes, stderr)
        }
        Command::Enrich {
            cluster,
            diseases,
            disease,
            out,
            params,
        } => {
            let config = load_params(&params)?;
            let ds = load_cluster(&cluster)?;
            let dd = load_diseases(&diseases)?;
            emit(&out, enrichment_table(&ds, &dd, &disease, &config)?.into_bytes(), String::new())
        }
        Command::Overlay {
            cluster,
            diseases,
            disease,
            interactions,
            cluster_id,
            min_overlap,
            out,
            params,
        } => {
            let config = load_params(&params)?;
            let ds = load_cluster(&cluster)?;
            let dd = load_diseases(&diseases)?;
            let dmap = build_disease_gene_map(&dd, &disease).map_err(geneweave_core::Error::from)?;
            let bytes = match cluster_id {
                None => views::to_json(&views::cluster_overlay_view(&ds, &dmap, &config, min_overlap)?),
                Some(reference) => {
                    let ia = load_interactions(&interactions.expect("clap enforces --interactions"))?;
                    let cluster = resolve(&ds, &reference)?;
                    views::to_json(&views::gene_overlay_view(&ds, &ia, cluster, &dmap, &config)?)
                }
            };
            emit(&out, bytes, String::new())
        }
        Command::Highlight {
            cluster,
            interactions,
            cluster_id,
            gene,
            mode,
            param,
            out,
            params,
        } => {
            let config = load_params(&params)?;
            let mode = HighlightMode::parse(&mode, param).map_err(geneweave_core::Error::from)?;
            let ds = load_cluster(&cluster)?;
            let ia = load_interactions(&interactions)?;
            let cluster = resolve(&ds, &cluster_id)?;
            let view = views::highlight_view(&ds, &ia, cluster, GeneId(gene), mode, &config)?;
            emit(&out, views::to_json(&view), String::new())
        }
        Command::Diseases { diseases, out } => {
            let dd = load_diseases(&diseases)?;
            emit(&out, views::to_json(&views::disease_list(&dd)), String::new())
        }
    }
}

fn validate(cluster: Option<&Path>, interactions: Option<&Path>, diseases: Option<&Path>) -> Result<Output, CliError> {
    if cluster.is_none() && interactions.is_none() && diseases.is_none() {
        return Err(CliError::new("USAGE", "give at least one of --cluster, --interactions, --diseases"));
    }
    let mut report = String::new();
    let mut first_error = None;
    let mut record = |result: Result<String, CliError>, path: &Path| match result {
        Ok(line) => writeln!(report, "OK {}: {line}", path.display()).unwrap(),
        Err(e) => {
            writeln!(report, "{e}").unwrap();
            first_error.get_or_insert(e);
        }
    };

    let mut cluster_ds = None;
    if let Some(path) = cluster {
        let result = load_cluster(path).map(|ds| {
            let kind = format!("{:?}", ds.kind()).to_lowercase();
            let line = format!("{} genes, {} clusters, {kind} clustering", ds.genes().len(), ds.cluster_count());
            cluster_ds = Some(ds);
            line
        });
        record(result, path);
    }
    if let Some(path) = interactions {
        let result = load_interactions(path).map(|ia| {
            let mut line = format!("{} rows, {} edges", ia.row_count(), ia.edges().len());
            let loops = ia.self_loops().count();
            if loops > 0 {
                write!(line, "; warning: {loops} self-loop interactions").unwrap();
            }
            if let Some(ds) = &cluster_ds {
                let mut unknown: Vec<GeneId> = ia
                    .edges()
                    .iter()
                    .flat_map(|e| [e.source, e.target])
                    .filter(|g| !ds.contains_gene(*g))
                    .collect();
                unknown.sort();
                unknown.dedup();
                if !unknown.is_empty() {
                    write!(line, "; warning: {} interacting genes not in the cluster dataset", unknown.len()).unwrap();
                }
            }
            line
        });
        record(result, path);
    }
    if let Some(path) = diseases {
        let result = load_diseases(path).map(|dd| {
            format!("{} records, {} diseases", dd.records().len(), dd.disease_counts().len())
        });
        record(result, path);
    }
    Ok(Output {
        stdout: report.into_bytes(),
        status: u8::from(first_error.is_some()),
        stderr: first_error.map(|e| format!("{e}\n")).unwrap_or_default(),
    })
}

/// One row per cluster: name, cluster size n, disease hits k, EASE p-value and
/// color class; ordered by p-value, ties by cluster name.
pub fn enrichment_table(ds: &ClusterDataset, dd: &DiseaseDataset, disease: &str, config: &ViewConfig) -> Result<String, CliError> {
    let dmap = build_disease_gene_map(dd, disease).map_err(geneweave_core::Error::from)?;
    let mut rows: Vec<(f64, &str, u64, u64, String)> = cluster_overlay(ds, &dmap, config.model.membership_threshold, &config.overlay)
        .into_iter()
        .map(|r| {
            let name = ds.cluster_name(r.cluster).unwrap_or_default();
            (r.ease_p, name, r.cluster_size, r.cluster_hits, r.color_class.to_string())
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut table = String::from("cluster\tn\tk\tease_p\tcolor_class\n");
    for (p, name, n, k, class) in rows {
        writeln!(table, "{name}\t{n}\t{k}\t{}\t{class}", format_significant(p)).unwrap();
    }
    Ok(table)
}
