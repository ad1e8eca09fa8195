//! `ontoq` command line.
//!
//! Exit codes: 0 on success, 1 on data errors (parse, cycle, unknown term,
//! startup), 2 on usage errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::annotation::{parse_annotation_file, AnnotationType};
use crate::bridge::parse_bridge_file;
use crate::engine::{load_obo_file, read_text, DataSources, Engine, LoadError};
use crate::ontology::{build_index, LookupError, RelationSet};
use crate::query::{QueryRequest, QueryResult};
use crate::service::{start_service, ServiceConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ontoq", version, about = "Ontology-aware annotation search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// OBO ontology file (repeatable).
    #[arg(long = "obo", value_name = "PATH")]
    pub obo: Vec<PathBuf>,
    /// Annotation TSV file.
    #[arg(long, value_name = "PATH")]
    pub annotations: Option<PathBuf>,
    /// Cross-ontology bridge TSV file (repeatable).
    #[arg(long = "bridges-file", value_name = "PATH")]
    pub bridges_file: Vec<PathBuf>,
    /// Materialize stub terms for dangling references instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

impl DataArgs {
    fn sources(&self) -> DataSources {
        DataSources {
            obo_files: self.obo.clone(),
            annotation_file: self.annotations.clone(),
            bridge_files: self.bridges_file.clone(),
            lenient: self.lenient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Tsv,
    Json,
}

fn parse_relations(s: &str) -> Result<RelationSet, String> {
    RelationSet::parse_list(s)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that ontology, annotation and bridge files load cleanly.
    Validate {
        /// OBO files to check (same as --obo).
        files: Vec<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Run an ontology-aware annotation search.
    Query {
        #[arg(long)]
        term: String,
        /// Follow bridge links into other ontologies.
        #[arg(long)]
        bridges: bool,
        /// Match the query term only, not its descendants.
        #[arg(long)]
        no_descendants: bool,
        /// Ignore post-composed annotations matched through a component.
        #[arg(long)]
        no_composites: bool,
        /// Also return post-composed annotations on ancestors (flagged inferred).
        #[arg(long)]
        ancestor_composites: bool,
        /// Comma-separated relations to follow.
        #[arg(long, value_parser = parse_relations, default_value = "is_a,part_of")]
        relations: RelationSet,
        #[arg(long, value_parser = |s: &str| s.parse::<AnnotationType>())]
        annotation_type: Option<AnnotationType>,
        #[arg(long)]
        object_type: Option<String>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
        format: OutputFormat,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Autocomplete a term name or synonym.
    Complete {
        query: String,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
        /// Restrict matches to one ontology key.
        #[arg(long)]
        ontology: Option<String>,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "ONTOQ_PORT", default_value_t = 8080,
              value_parser = clap::value_parser!(u16).range(1..))]
        port: u16,
        /// Origin allowed by CORS (for the browser UI).
        #[arg(long)]
        cors_origin: Option<String>,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Print corpus counts.
    Stats {
        #[command(flatten)]
        data: DataArgs,
    },
}

/// Renders a search result exactly as the `/search` endpoint does.
pub fn render_json(result: &QueryResult) -> String {
    serde_json::to_string(result).expect("query results serialize")
}

/// One line per annotation:
/// `object_id, object_type, annotation_type, entity, path_kind, via`.
pub fn render_tsv(result: &QueryResult) -> String {
    let mut out = String::new();
    for m in &result.annotations {
        let a = &m.annotation;
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            a.object.id,
            a.object.object_type,
            a.annotation_type,
            a.entity,
            m.explanation.path_kind,
            m.explanation.via_terms.join(","),
        ));
    }
    out
}

fn load(data: &DataArgs, err: &mut dyn Write) -> Result<Engine, i32> {
    let engine = Engine::load(&data.sources()).map_err(|e| {
        let _ = writeln!(err, "{e}");
        match e {
            LoadError::NoOntologies => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    })?;
    for warning in &engine.warnings {
        let _ = writeln!(err, "warning: {warning}");
    }
    Ok(engine)
}

fn validate(files: Vec<PathBuf>, data: DataArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut obo = files;
    obo.extend(data.obo.iter().cloned());
    if obo.is_empty() {
        let _ = writeln!(err, "validate: no OBO files given");
        return EXIT_USAGE;
    }
    let mut parsed = Vec::new();
    let mut failed = false;
    for path in &obo {
        match load_obo_file(path, data.lenient) {
            Ok(doc) => {
                let _ = writeln!(
                    out,
                    "OK {}: {} terms, {} edges",
                    doc.ontology_key,
                    doc.terms.len(),
                    doc.edges.len()
                );
                for warning in &doc.warnings {
                    let _ = writeln!(out, "WARN {warning}");
                }
                parsed.push(doc);
            }
            Err(e) => {
                failed = true;
                for line in e.to_string().lines() {
                    let _ = writeln!(out, "ERROR {line}");
                }
            }
        }
    }
    if failed {
        let _ = writeln!(err, "validation failed");
        return EXIT_FAILURE;
    }
    let index = match build_index(parsed) {
        Ok(index) => index,
        Err(e) => {
            let _ = writeln!(out, "ERROR {e}");
            let _ = writeln!(err, "validation failed");
            return EXIT_FAILURE;
        }
    };

    let mut check =
        |path: &PathBuf, what: &str, f: &dyn Fn(&str, &str) -> Result<usize, String>| {
            let result = read_text(path)
                .map_err(|e| e.to_string())
                .and_then(|text| f(&path.display().to_string(), &text));
            match result {
                Ok(n) => {
                    let _ = writeln!(out, "OK {}: {n} {what}", path.display());
                }
                Err(e) => {
                    failed = true;
                    let _ = writeln!(out, "ERROR {e}");
                }
            }
        };
    if let Some(path) = &data.annotations {
        check(path, "annotations", &|name, text| {
            parse_annotation_file(name, text, &index)
                .map(|(a, _)| a.len())
                .map_err(|e| e.to_string())
        });
    }
    for path in &data.bridges_file {
        check(path, "bridge links", &|name, text| {
            parse_bridge_file(name, text, &index)
                .map(|l| l.len())
                .map_err(|e| e.to_string())
        });
    }
    if failed {
        let _ = writeln!(err, "validation failed");
        return EXIT_FAILURE;
    }
    EXIT_OK
}

/// Runs one invocation, writing to the given streams, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };

    match cli.command {
        Command::Validate { files, data } => validate(files, data, out, err),
        Command::Query {
            term,
            bridges,
            no_descendants,
            no_composites,
            ancestor_composites,
            relations,
            annotation_type,
            object_type,
            format,
            data,
        } => {
            let engine = match load(&data, err) {
                Ok(engine) => engine,
                Err(code) => return code,
            };
            let request = QueryRequest {
                term,
                include_descendants: !no_descendants,
                relations,
                include_composites: !no_composites,
                include_ancestor_composites: ancestor_composites,
                include_bridges: bridges,
                annotation_type_filter: annotation_type,
                object_type_filter: object_type,
            };
            match engine.execute_search(&request) {
                Ok(result) => {
                    let text = match format {
                        OutputFormat::Tsv => render_tsv(&result),
                        OutputFormat::Json => render_json(&result) + "\n",
                    };
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                Err(e @ LookupError::UnknownTerm(_)) => {
                    let _ = writeln!(err, "{e}");
                    EXIT_FAILURE
                }
                Err(e) => {
                    let _ = writeln!(err, "{e}");
                    EXIT_USAGE
                }
            }
        }
        Command::Complete {
            query,
            limit,
            ontology,
            data,
        } => {
            let engine = match load(&data, err) {
                Ok(engine) => engine,
                Err(code) => return code,
            };
            match engine
                .lexicon
                .autocomplete(&query, limit as usize, ontology.as_deref())
            {
                Ok(matches) => {
                    for m in matches {
                        let _ = writeln!(out, "{}\t{}\t{}", m.term, m.display_name, m.tier);
                    }
                    EXIT_OK
                }
                Err(e) => {
                    let _ = writeln!(err, "{e}");
                    EXIT_USAGE
                }
            }
        }
        Command::Stats { data } => {
            let engine = match load(&data, err) {
                Ok(engine) => engine,
                Err(code) => return code,
            };
            let s = engine.stats();
            let _ = writeln!(
                out,
                "terms: {}\nontologies: {}\nannotations: {}\nbridges: {}",
                s.terms, s.ontologies, s.annotations, s.bridges
            );
            EXIT_OK
        }
        Command::Serve {
            port,
            cors_origin,
            data,
        } => {
            if data.obo.is_empty() {
                let _ = writeln!(err, "{}", LoadError::NoOntologies);
                return EXIT_USAGE;
            }
            let config = ServiceConfig {
                port,
                obo_files: data.obo,
                annotation_file: data.annotations,
                bridge_files: data.bridges_file,
                lenient: data.lenient,
                cors_allowed_origin: cors_origin,
            };
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    let _ = writeln!(err, "cannot start runtime: {e}");
                    return EXIT_FAILURE;
                }
            };
            runtime.block_on(async {
                let service = match start_service(&config).await {
                    Ok(service) => service,
                    Err(e) => {
                        let _ = writeln!(err, "{e}");
                        return EXIT_FAILURE;
                    }
                };
                if let Ok(addr) = service.local_addr() {
                    let _ = writeln!(err, "listening on http://{addr}");
                }
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                match service.serve_with_shutdown(shutdown).await {
                    Ok(()) => EXIT_OK,
                    Err(e) => {
                        let _ = writeln!(err, "server error: {e}");
                        EXIT_FAILURE
                    }
                }
            })
        }
    }
}
