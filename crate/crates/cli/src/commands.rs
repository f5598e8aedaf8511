use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, ValueEnum};
use rayon::prelude::*;

use psc_core::complex::io::{read_mesh, write_mesh, MeshIoError};
use psc_core::gslim::SimplifyError;
use psc_core::psc::{read_psc, write_psc, OffsetPrecision, ReplayError, ReverseError};
use psc_core::tokenizer::{
    bpe_apply, bpe_decode, bpe_train as train_vocab, constrained_generate, detokenize as decode_tokens, read_tokens,
    tokenize as encode_tokens, write_tokens, UniformScorer, Vocabulary, BASE_VOCAB, MAX_VOCAB,
};
use psc_core::{
    reconstruct, reverse_log, simplify as run_simplify, CollapseLog, Lod, PenaltyConfig, Point, Psc, SimplicialComplex, Stop, VirtualEdges,
};

use crate::report::{ratio, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Config,
}

impl ErrorKind {
    pub fn code(self) -> u8 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Io => 2,
            ErrorKind::Config => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    /// Partial results to print before the error, if any.
    pub report: Option<Report>,
}

impl CliError {
    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into(), report: None }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    fn io(path: &Path, message: impl std::fmt::Display) -> Self {
        Self::new(ErrorKind::Io, format!("{}: {message}", path.display()))
    }

    fn invalid(path: &Path, message: impl std::fmt::Display) -> Self {
        Self::new(ErrorKind::Validation, format!("{}: {message}", path.display()))
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn load_mesh(path: &Path) -> Result<SimplicialComplex, CliError> {
    read_mesh(path).map_err(|e| match e {
        MeshIoError::UnknownFormat(_) => CliError::config(format!("{}: {e}", path.display())),
        e => CliError::io(path, e),
    })
}

fn save_mesh(path: &Path, c: &SimplicialComplex) -> Result<(), CliError> {
    write_mesh(path, c).map_err(|e| match e {
        MeshIoError::UnknownFormat(_) => CliError::config(format!("{}: {e}", path.display())),
        e => CliError::io(path, e),
    })
}

fn load_psc(path: &Path) -> Result<(Psc, bool), CliError> {
    let bytes = read_bytes(path)?;
    let quantized = bytes.get(6).is_some_and(|f| f & 1 == 1);
    let psc = read_psc(&bytes).map_err(|e| CliError::io(path, e))?;
    Ok((psc, quantized))
}

fn load_tokens(path: &Path) -> Result<Vec<u32>, CliError> {
    read_tokens(&read_bytes(path)?).map_err(|e| CliError::io(path, e))
}

fn load_vocab(path: &Path) -> Result<Vocabulary, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Vocabulary::from_text(&text).map_err(|e| CliError::io(path, e))
}

fn parse_penalties(s: &str) -> Result<PenaltyConfig, CliError> {
    s.parse().map_err(|e: String| CliError::config(format!("--penalties: {e}")))
}

fn parse_virtual_edges(s: &str) -> Result<VirtualEdges, CliError> {
    s.parse().map_err(|e: String| CliError::config(format!("--virtual-edges: {e}")))
}

fn simplify_error(path: &Path, e: SimplifyError) -> CliError {
    match e {
        SimplifyError::UnreachableTarget { .. } => CliError::config(format!("{}: {e}", path.display())),
        SimplifyError::Empty => CliError::io(path, e),
        SimplifyError::Quadric(_) => CliError::invalid(path, e),
    }
}

fn reverse_error(path: &Path, e: ReverseError) -> CliError {
    match e {
        ReverseError::PartialLog(_) => CliError::config(format!("{}: {e}", path.display())),
        e => CliError::invalid(path, e),
    }
}

fn full_log(path: &Path, c: &SimplicialComplex, pc: &PenaltyConfig, mode: VirtualEdges) -> Result<CollapseLog, CliError> {
    let (_, log) = run_simplify(c, pc, mode, Stop::Full).map_err(|e| simplify_error(path, e))?;
    if !log.is_full() {
        return Err(CliError::config(format!(
            "{}: simplification stopped at {} vertices; use --virtual-edges delaunay to bridge components",
            path.display(),
            log.final_vertex_count
        )));
    }
    Ok(log)
}

fn describe(report: &mut Report, prefix: &str, c: &SimplicialComplex) {
    report
        .add(format!("{prefix}vertices"), c.vertex_count())
        .add(format!("{prefix}edges"), c.edge_count())
        .add(format!("{prefix}triangles"), c.triangle_count());
}

/// Simplify a mesh with generalized quadrics.
#[derive(Debug, Args)]
#[command(group(ArgGroup::new("stop").required(true).args(["target_vertices", "full"])))]
pub struct SimplifyArgs {
    /// Mesh to simplify (.obj or .off).
    #[arg(long)]
    input: PathBuf,
    /// Stop once this many vertices remain.
    #[arg(long)]
    target_vertices: Option<usize>,
    /// Simplify all the way to a single vertex.
    #[arg(long)]
    full: bool,
    /// Vertex, boundary-edge and face weights.
    #[arg(long, default_value = "0,1,1")]
    penalties: String,
    /// Extra collapse pairs between unconnected vertices: delaunay, knn[:K] or none.
    #[arg(long, default_value = "delaunay")]
    virtual_edges: String,
    /// Simplified mesh (.obj or .off).
    #[arg(long)]
    output: PathBuf,
    /// Collapse log as JSON.
    #[arg(long)]
    log: Option<PathBuf>,
}

pub fn simplify(a: SimplifyArgs) -> Result<Report, CliError> {
    let pc = parse_penalties(&a.penalties)?;
    let mode = parse_virtual_edges(&a.virtual_edges)?;
    let c = load_mesh(&a.input)?;
    let stop = match a.target_vertices {
        Some(k) => Stop::TargetVertices(k),
        None => Stop::Full,
    };
    let (out, log) = run_simplify(&c, &pc, mode, stop).map_err(|e| simplify_error(&a.input, e))?;
    save_mesh(&a.output, &out)?;
    if let Some(path) = &a.log {
        let json = serde_json::to_vec(&log).map_err(|e| CliError::io(path, e))?;
        write_bytes(path, &json)?;
    }
    let mut r = Report::new();
    r.add("input_vertices", c.vertex_count())
        .add("collapses", log.records.len())
        .add("penalties", &a.penalties)
        .add("virtual_edges", &a.virtual_edges);
    describe(&mut r, "output_", &out);
    if let Some(k) = a.target_vertices {
        if out.vertex_count() > k {
            r.add("note", "no collapse pairs left before the target");
        }
    }
    Ok(r)
}

/// Encode a mesh (or a full collapse log) as a PSC file.
#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Mesh (.obj/.off) or collapse log (.json) from `simplify --full --log`.
    #[arg(long)]
    input: PathBuf,
    /// PSC file to write.
    #[arg(long)]
    output: PathBuf,
    /// Store offsets as binary16, compensating rounding split by split.
    #[arg(long)]
    binary16: bool,
    /// Vertex, boundary-edge and face weights (mesh input only) [default: 0,1,1].
    #[arg(long)]
    penalties: Option<String>,
    /// Virtual edges (mesh input only) [default: delaunay].
    #[arg(long)]
    virtual_edges: Option<String>,
}

pub fn encode(a: EncodeArgs) -> Result<Report, CliError> {
    let is_log = a.input.extension().is_some_and(|e| e == "json");
    let log = if is_log {
        if a.penalties.is_some() || a.virtual_edges.is_some() {
            return Err(CliError::config("--penalties and --virtual-edges apply to mesh input, not to a collapse log"));
        }
        let bytes = read_bytes(&a.input)?;
        serde_json::from_slice::<CollapseLog>(&bytes).map_err(|e| CliError::io(&a.input, e))?
    } else {
        let pc = parse_penalties(a.penalties.as_deref().unwrap_or("0,1,1"))?;
        let mode = parse_virtual_edges(a.virtual_edges.as_deref().unwrap_or("delaunay"))?;
        full_log(&a.input, &load_mesh(&a.input)?, &pc, mode)?
    };
    let precision = if a.binary16 { OffsetPrecision::Binary16 } else { OffsetPrecision::F64 };
    let psc = reverse_log(&log, precision).map_err(|e| reverse_error(&a.input, e))?;
    let bytes = write_psc(&psc, a.binary16);
    write_bytes(&a.output, &bytes)?;
    let mut r = Report::new();
    r.add("vertices", psc.vertex_count())
        .add("splits", psc.splits.len())
        .add("offsets", if a.binary16 { "binary16" } else { "binary64" })
        .add("bytes", bytes.len());
    Ok(r)
}

/// Reconstruct a level of detail from a PSC file.
#[derive(Debug, Args)]
#[command(group(ArgGroup::new("level").required(true).args(["lod", "steps"])))]
pub struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Fraction of the splits to apply, rounded up.
    #[arg(long)]
    lod: Option<f64>,
    /// Number of splits to apply.
    #[arg(long)]
    steps: Option<usize>,
    /// Mesh to write (.obj or .off).
    #[arg(long)]
    output: PathBuf,
}

fn replay_error(path: &Path, e: ReplayError) -> CliError {
    match &e {
        ReplayError::BadLod(_) => CliError::config(format!("{}: {e}", path.display())),
        ReplayError::Split { .. } => CliError::invalid(path, e),
    }
}

pub fn decode(a: DecodeArgs) -> Result<Report, CliError> {
    let lod = match (a.lod, a.steps) {
        (Some(r), _) => Lod::Ratio(r),
        (_, Some(k)) => Lod::Steps(k),
        _ => unreachable!("clap requires one of --lod and --steps"),
    };
    let (psc, _) = load_psc(&a.input)?;
    let steps = lod.steps(psc.splits.len()).map_err(|e| replay_error(&a.input, e))?;
    let c = reconstruct(&psc, lod).map_err(|e| replay_error(&a.input, e))?;
    save_mesh(&a.output, &c)?;
    let mut r = Report::new();
    r.add("splits_total", psc.splits.len()).add("splits_applied", steps);
    describe(&mut r, "", &c);
    Ok(r)
}

/// Check PSC files: format, replay and topological label rules.
#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// PSC files to check.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

pub fn validate(a: ValidateArgs) -> Result<Report, CliError> {
    let results: Vec<(Report, Option<ErrorKind>)> = a
        .inputs
        .par_iter()
        .map(|path| {
            let mut r = Report::new();
            r.add("file", path.display());
            let (psc, _) = match load_psc(path) {
                Ok(p) => p,
                Err(e) => {
                    r.add("status", "unreadable").add("error", &e.message);
                    return (r, Some(e.kind));
                }
            };
            r.add("splits", psc.splits.len());
            match psc.reconstruct_all() {
                Ok(c) => {
                    let v = c.validate();
                    if v.is_valid() {
                        r.add("status", "ok");
                        describe(&mut r, "", &c);
                        (r, None)
                    } else {
                        r.add("status", "invalid").add("error", v.problems.join("; "));
                        (r, Some(ErrorKind::Validation))
                    }
                }
                Err(e) => {
                    r.add("status", "invalid");
                    if let ReplayError::Split { step, source } = &e {
                        r.add("step", step);
                        if let Some(rule) = source.rule() {
                            r.add("rule", format!("R{}", rule.number()));
                        }
                    }
                    r.add("error", &e);
                    (r, Some(ErrorKind::Validation))
                }
            }
        })
        .collect();
    let mut report = Report::new();
    let mut worst: Option<ErrorKind> = None;
    let mut failed = 0;
    for (r, kind) in results {
        report.extend(r);
        if let Some(k) = kind {
            failed += 1;
            worst = match (worst, k) {
                (Some(ErrorKind::Io), _) | (_, ErrorKind::Io) => Some(ErrorKind::Io),
                _ => Some(k),
            };
        }
    }
    match worst {
        None => Ok(report),
        Some(kind) => {
            Err(CliError { kind, message: format!("{failed} of {} files failed validation", a.inputs.len()), report: Some(report) })
        }
    }
}

/// Convert a PSC file to a token file.
#[derive(Debug, Args)]
pub struct TokenizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Token file to write.
    #[arg(long)]
    output: PathBuf,
    /// Merge table from `bpe-train`; without it base tokens are written.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

pub fn tokenize(a: TokenizeArgs) -> Result<Report, CliError> {
    let (psc, quantized) = load_psc(&a.input)?;
    let base = encode_tokens(&psc).map_err(|e| CliError::invalid(&a.input, e))?;
    let mut r = Report::new();
    r.add("splits", psc.splits.len()).add("root", format!("{},{},{}", psc.root.x, psc.root.y, psc.root.z)).add("base_tokens", base.len());
    if !quantized {
        r.add("note", "offsets rounded to binary16; encode --binary16 avoids drift");
    }
    let out = match &a.vocab {
        Some(path) => {
            let vocab = load_vocab(path)?;
            let packed = bpe_apply(&base, &vocab).map_err(|e| CliError::invalid(&a.input, e))?;
            r.add("tokens", packed.len()).add("compression", ratio(packed.len(), base.len()));
            packed
        }
        None => base,
    };
    write_bytes(&a.output, &write_tokens(&out))?;
    Ok(r)
}

fn parse_point(s: &str) -> Result<Point, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("--root: bad point {s:?}")))?;
    match v[..] {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Point::new(x, y, z)),
        _ => Err(CliError::config(format!("--root: expected x,y,z, got {s:?}"))),
    }
}

/// Convert a token file back to a PSC file.
#[derive(Debug, Args)]
pub struct DetokenizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// PSC file to write (offsets stored as binary16).
    #[arg(long)]
    output: PathBuf,
    /// Root position, which token streams do not carry.
    #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
    root: String,
    /// Merge table the tokens were compressed with.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

pub fn detokenize(a: DetokenizeArgs) -> Result<Report, CliError> {
    let root = parse_point(&a.root)?;
    let mut tokens = load_tokens(&a.input)?;
    if let Some(path) = &a.vocab {
        tokens = bpe_decode(&tokens, &load_vocab(path)?).map_err(|e| CliError::invalid(&a.input, e))?;
    }
    let psc = decode_tokens(&tokens, root).map_err(|e| CliError::invalid(&a.input, e))?;
    write_bytes(&a.output, &write_psc(&psc, true))?;
    let mut r = Report::new();
    r.add("base_tokens", tokens.len()).add("splits", psc.splits.len()).add("vertices", psc.vertex_count());
    Ok(r)
}

/// Learn a BPE merge table from token files.
#[derive(Debug, Args)]
pub struct BpeTrainArgs {
    /// Base token files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Total vocabulary size, base tokens included.
    #[arg(long, default_value_t = MAX_VOCAB as usize)]
    vocab: usize,
    /// Merge table to write, one `left right new` line per merge.
    #[arg(long)]
    output: PathBuf,
}

pub fn bpe_train(a: BpeTrainArgs) -> Result<Report, CliError> {
    if a.vocab < BASE_VOCAB as usize || a.vocab > MAX_VOCAB as usize {
        return Err(CliError::config(format!("--vocab must be in {BASE_VOCAB}..={MAX_VOCAB}, got {}", a.vocab)));
    }
    let corpus: Vec<Vec<u32>> = a.inputs.par_iter().map(|p| load_tokens(p)).collect::<Result<_, _>>()?;
    if let Some((i, _)) = corpus.iter().enumerate().find(|(_, s)| s.iter().any(|&t| t >= BASE_VOCAB)) {
        return Err(CliError::invalid(&a.inputs[i], "already BPE-compressed; train on base tokens"));
    }
    let vocab = train_vocab(&corpus, a.vocab).map_err(|e| CliError::config(e.to_string()))?;
    write_bytes(&a.output, vocab.to_text().as_bytes())?;
    let base: usize = corpus.iter().map(Vec::len).sum();
    let packed: usize = corpus
        .par_iter()
        .map(|s| bpe_apply(s, &vocab).map(|p| p.len()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::invalid(&a.output, e))?
        .into_iter()
        .sum();
    let mut r = Report::new();
    r.add("streams", corpus.len())
        .add("merges", vocab.merges().len())
        .add("vocabulary", vocab.size())
        .add("base_tokens", base)
        .add("tokens", packed)
        .add("compression", ratio(packed, base));
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerKind {
    /// Every admissible token scores the same.
    Uniform,
}

/// Sample a valid token stream with the constrained decoder.
#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    scorer: ScorerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper bound on the number of vertex splits.
    #[arg(long, default_value_t = 50)]
    max_splits: usize,
    /// Token file to write.
    #[arg(long)]
    output: PathBuf,
    /// Also write the generated complex as a mesh.
    #[arg(long)]
    mesh: Option<PathBuf>,
}

pub fn generate(a: GenerateArgs) -> Result<Report, CliError> {
    let g = match a.scorer {
        ScorerKind::Uniform => constrained_generate(&mut UniformScorer, a.seed, a.max_splits),
    }
    .map_err(|e| CliError::new(ErrorKind::Validation, e.to_string()))?;
    write_bytes(&a.output, &write_tokens(&g.tokens))?;
    if let Some(path) = &a.mesh {
        save_mesh(path, &g.complex)?;
    }
    let mut r = Report::new();
    r.add("scorer", "uniform")
        .add("seed", a.seed)
        .add("max_splits", a.max_splits)
        .add("splits", g.psc.splits.len())
        .add("tokens", g.tokens.len())
        .add("backtracks", g.backtracks);
    describe(&mut r, "", &g.complex);
    Ok(r)
}

/// Token and size accounting for meshes, PSC files and token files.
#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Meshes (.obj/.off), PSC files or token files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Merge table for post-BPE counts.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Weights used when encoding mesh inputs.
    #[arg(long, default_value = "0,1,1")]
    penalties: String,
    /// Virtual edges used when encoding mesh inputs.
    #[arg(long, default_value = "delaunay")]
    virtual_edges: String,
}

struct FileStats {
    report: Report,
    vertices: usize,
    base: usize,
    packed: Option<usize>,
}

fn file_stats(path: &Path, vocab: Option<&Vocabulary>, pc: &PenaltyConfig, mode: VirtualEdges) -> Result<FileStats, CliError> {
    let bytes = read_bytes(path)?;
    let mut r = Report::new();
    r.add("file", path.display());
    let (psc, base) = if bytes.starts_with(b"PSCT") {
        let mut tokens = read_tokens(&bytes).map_err(|e| CliError::io(path, e))?;
        r.add("kind", "tokens").add("tokens", tokens.len());
        if tokens.iter().any(|&t| t >= BASE_VOCAB) {
            let v = vocab.ok_or_else(|| CliError::config(format!("{}: compressed tokens need --vocab", path.display())))?;
            tokens = bpe_decode(&tokens, v).map_err(|e| CliError::invalid(path, e))?;
        }
        let psc = decode_tokens(&tokens, Point::origin()).map_err(|e| CliError::invalid(path, e))?;
        (psc, tokens)
    } else if bytes.starts_with(b"PSC1") {
        r.add("kind", "psc");
        let psc = read_psc(&bytes).map_err(|e| CliError::io(path, e))?;
        let tokens = encode_tokens(&psc).map_err(|e| CliError::invalid(path, e))?;
        (psc, tokens)
    } else {
        r.add("kind", "mesh");
        let c = load_mesh(path)?;
        let log = full_log(path, &c, pc, mode)?;
        let psc = reverse_log(&log, OffsetPrecision::Binary16).map_err(|e| reverse_error(path, e))?;
        let tokens = encode_tokens(&psc).map_err(|e| CliError::invalid(path, e))?;
        (psc, tokens)
    };
    let c = psc.reconstruct_all().map_err(|e| CliError::invalid(path, e))?;
    describe(&mut r, "", &c);
    r.add("splits", psc.splits.len())
        .add("base_tokens", base.len())
        .add("record_tokens", base.len() - 2)
        .add("base_tokens_per_vertex", ratio(base.len(), c.vertex_count()));
    let packed = match vocab {
        Some(v) => {
            let n = bpe_apply(&base, v).map_err(|e| CliError::invalid(path, e))?.len();
            r.add("bpe_tokens", n).add("bpe_tokens_per_vertex", ratio(n, c.vertex_count()));
            Some(n)
        }
        None => None,
    };
    Ok(FileStats { report: r, vertices: c.vertex_count(), base: base.len(), packed })
}

pub fn stats(a: StatsArgs) -> Result<Report, CliError> {
    let pc = parse_penalties(&a.penalties)?;
    let mode = parse_virtual_edges(&a.virtual_edges)?;
    let vocab = a.vocab.as_deref().map(load_vocab).transpose()?;
    let all: Vec<FileStats> = a.inputs.par_iter().map(|p| file_stats(p, vocab.as_ref(), &pc, mode)).collect::<Result<_, _>>()?;
    let mut r = Report::new();
    let (mut vertices, mut base, mut packed) = (0, 0, 0);
    for s in all {
        vertices += s.vertices;
        base += s.base;
        packed += s.packed.unwrap_or(0);
        r.extend(s.report);
    }
    if a.inputs.len() > 1 {
        r.add("total_files", a.inputs.len())
            .add("total_vertices", vertices)
            .add("total_base_tokens", base)
            .add("total_base_tokens_per_vertex", ratio(base, vertices));
        if vocab.is_some() {
            r.add("total_bpe_tokens", packed).add("total_bpe_tokens_per_vertex", ratio(packed, vertices));
        }
    }
    Ok(r)
}
