//! Command-line front end: structure-constant caches, verification runs,
//! parameter sweeps and report conversion.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::{build, BasisLabel, CartanAlgebra, Family};
use crate::error::{Error, Result};
use crate::mgs::Params;
use crate::scalars::{make_field, Fe, Field};
use crate::superspace::{Monomial, MAX_EVEN};
use crate::verify::{run_suite, structure_dim_formula, Finding, MaxMode, MaxOptions, Status, Suite, SuiteOptions};

pub const REPORT_SCHEMA: u32 = 1;
pub const CACHE_MAGIC: [u8; 8] = *b"CMGSSC\0\0";
pub const CACHE_SCHEMA: u16 = 1;
pub const CACHE_DIR_ENV: &str = "CARTAN_MGS_CACHE_DIR";
pub const DEFAULT_CAP: usize = 5000;

#[derive(Parser, Debug)]
#[command(name = "cartan-mgs", version, about = "Maximal graded subalgebras of W, S, H, K over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the structure-constant cache of one algebra.
    Build(PointArgs),
    /// Run check suites on one algebra.
    Verify(PointArgs),
    /// Run check suites over a grid of parameters.
    Sweep(SweepArgs),
    /// Re-render a saved JSON report.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct PointArgs {
    #[arg(long)]
    family: Family,
    #[arg(short)]
    p: u32,
    #[arg(short)]
    m: usize,
    #[arg(short)]
    n: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    /// Comma-separated families.
    #[arg(long, default_value = "W,S,H,K")]
    family: String,
    /// Values like `5,7` or `5..11`; primes only.
    #[arg(short, allow_hyphen_values = true)]
    p: String,
    #[arg(short, allow_hyphen_values = true)]
    m: String,
    #[arg(short, allow_hyphen_values = true)]
    n: String,
    /// Points whose estimated dimension exceeds this are skipped.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Comma-separated suites, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Sampled)]
    max_mode: ModeArg,
    /// Samples per complement component for sampled maximality.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximality checks per suite.
    #[arg(long, default_value_t = 2)]
    max_checks: usize,
    /// Random basis changes for the equivariance check.
    #[arg(long, default_value_t = 5)]
    automorphisms: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct ReportArgs {
    /// A JSON report written by `verify` or `sweep`.
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Build,
    Verify,
    Sweep,
}

/// The resolved configuration of a run, echoed into its report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub families: Vec<Family>,
    pub p: Vec<u32>,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub suite: SuiteOptions,
    pub cap: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// A single-point configuration with default suite options.
    pub fn point(command: CommandKind, family: Family, p: u32, m: usize, n: usize) -> RunConfig {
        RunConfig {
            command,
            families: vec![family],
            p: vec![p],
            m: vec![m],
            n: vec![n],
            suite: SuiteOptions::default(),
            cap: DEFAULT_CAP,
            output: None,
            format: Format::Json,
        }
    }

    /// Rejects characteristics that are not primes above 3.
    pub fn validate(&self) -> Result<()> {
        for &p in &self.p {
            make_field(p, false)?;
        }
        Ok(())
    }

    /// The cartesian product in the order family, p, m, n.
    pub fn points(&self) -> Vec<Params> {
        let mut out = Vec::new();
        for &family in &self.families {
            for &p in &self.p {
                for &m in &self.m {
                    for &n in &self.n {
                        out.push(Params { family, p, m, n });
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub params: Params,
    pub name: String,
    pub polynomial: String,
}

impl FieldInfo {
    pub fn of(params: Params, f: &Field) -> FieldInfo {
        FieldInfo { params, name: f.name(), polynomial: f.polynomial() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub params: Params,
    pub estimated_dim: Option<i64>,
    pub reason: String,
}

/// Per-suite counts over all findings of a report.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub suite: String,
    pub family: Option<Family>,
    pub matches: usize,
    pub sampled_passes: usize,
    pub documented_failures: usize,
    pub unexpected_failures: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: u64,
    pub points: Vec<(Params, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub fields: Vec<FieldInfo>,
    /// Sorted by claim id, then parameters, then subject.
    pub findings: Vec<Finding>,
    pub skipped: Vec<Skip>,
    pub summary: Vec<SummaryRow>,
    pub timing: Timing,
}

impl Report {
    pub fn new(config: RunConfig) -> Report {
        Report {
            schema: REPORT_SCHEMA,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            fields: Vec::new(),
            findings: Vec::new(),
            skipped: Vec::new(),
            summary: Vec::new(),
            timing: Timing::default(),
        }
    }

    pub fn has_unexpected_failure(&self) -> bool {
        self.findings.iter().any(Finding::is_unexpected_failure)
    }

    /// The findings serialized on their own; stable across runs with the same
    /// configuration.
    pub fn findings_json(&self) -> String {
        serde_json::to_string_pretty(&self.findings).expect("findings serialize")
    }

    /// Sorts the findings and recomputes the summary.
    pub fn finish(&mut self) {
        self.findings.sort_by(|a, b| (&a.claim, a.params, &a.subject).cmp(&(&b.claim, b.params, &b.subject)));
        self.summary = summarize(&self.findings);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Report> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// One row per finding; nested fields are flattened.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            claim: &'a str,
            family: Family,
            p: u32,
            m: usize,
            n: usize,
            subject: &'a str,
            expected: i64,
            computed: i64,
            status: Status,
            documented: bool,
            evidence: &'a str,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for f in &self.findings {
            w.serialize(Row {
                claim: &f.claim,
                family: f.params.family,
                p: f.params.p,
                m: f.params.m,
                n: f.params.n,
                subject: &f.subject,
                expected: f.expected,
                computed: f.computed,
                status: f.status,
                documented: f.documented.is_some(),
                evidence: &f.evidence,
            })
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

fn summarize(findings: &[Finding]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for f in findings {
        let suite = f.claim.split('.').next().unwrap_or("").to_string();
        let family = Some(f.params.family);
        let row = match rows.iter_mut().position(|r| r.suite == suite && r.family == family) {
            Some(i) => &mut rows[i],
            None => {
                rows.push(SummaryRow { suite, family, ..SummaryRow::default() });
                rows.last_mut().expect("just pushed")
            }
        };
        match (f.status, f.documented.is_some()) {
            (Status::Match, _) => row.matches += 1,
            (Status::SampledPass, _) => row.sampled_passes += 1,
            (_, true) => row.documented_failures += 1,
            (_, false) => row.unexpected_failures += 1,
        }
    }
    rows.sort_by(|a, b| (&a.suite, a.family).cmp(&(&b.suite, b.family)));
    rows
}

// ----- commands -----

/// Runs the configured suites on one algebra.
pub fn cmd_verify(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let points = config.points();
    if points.len() != 1 {
        return Err(Error::Parameter(format!("verify takes one parameter point, got {}", points.len())));
    }
    let start = Instant::now();
    let mut report = Report::new(config.clone());
    let pr = points[0];
    let alg = build(pr.family, pr.p, pr.m, pr.n)?;
    report.fields.push(FieldInfo::of(pr, alg.field()));
    report.findings = run_suite(&alg, &config.suite);
    let ms = start.elapsed().as_millis() as u64;
    report.timing = Timing { total_ms: ms, points: vec![(pr, ms)] };
    report.finish();
    Ok(report)
}

/// Estimated dimension used against the sweep cap.
pub fn estimated_dim(pr: &Params) -> i64 {
    structure_dim_formula(pr)
}

/// Runs every point of the grid that fits under the cap; the rest get skip
/// records. The output order does not depend on scheduling.
pub fn cmd_sweep(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut report = Report::new(config.clone());
    enum Outcome {
        Ran(FieldInfo, Vec<Finding>, u64),
        Skipped(Skip),
    }
    let outcomes: Vec<(Params, Outcome)> = config
        .points()
        .into_par_iter()
        .map(|pr| {
            let est = estimated_dim(&pr);
            if est > config.cap as i64 {
                let reason = format!("estimated dimension {est} exceeds cap {}", config.cap);
                return (pr, Outcome::Skipped(Skip { params: pr, estimated_dim: Some(est), reason }));
            }
            let t = Instant::now();
            match build(pr.family, pr.p, pr.m, pr.n) {
                Ok(alg) => {
                    let findings = run_suite(&alg, &config.suite);
                    (pr, Outcome::Ran(FieldInfo::of(pr, alg.field()), findings, t.elapsed().as_millis() as u64))
                }
                Err(e) => (pr, Outcome::Skipped(Skip { params: pr, estimated_dim: Some(est), reason: e.to_string() })),
            }
        })
        .collect();
    for (pr, o) in outcomes {
        match o {
            Outcome::Ran(field, findings, ms) => {
                report.fields.push(field);
                report.findings.extend(findings);
                report.timing.points.push((pr, ms));
            }
            Outcome::Skipped(s) => report.skipped.push(s),
        }
    }
    report.timing.total_ms = start.elapsed().as_millis() as u64;
    report.finish();
    Ok(report)
}

// ----- structure-constant cache -----

/// File name of the cache of one parameter point.
pub fn cache_file_name(pr: &Params) -> String {
    format!("{}_{}_{}_{}.cmgs", pr.family, pr.p, pr.m, pr.n)
}

/// `$CARTAN_MGS_CACHE_DIR`, or `.cartan-mgs-cache` in the working directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".cartan-mgs-cache"))
}

fn put_u8(b: &mut Vec<u8>, v: u8) {
    b.push(v);
}
fn put_u16(b: &mut Vec<u8>, v: u16) {
    b.extend_from_slice(&v.to_le_bytes());
}
fn put_u32(b: &mut Vec<u8>, v: u32) {
    b.extend_from_slice(&v.to_le_bytes());
}
fn put_u64(b: &mut Vec<u8>, v: u64) {
    b.extend_from_slice(&v.to_le_bytes());
}

/// Serializes the header, the basis labels and the nonzero brackets
/// `[e_i, e_j]` for `i <= j`; the rest follow by super-anticommutativity.
///
/// All integers are little-endian. Layout:
/// magic (8), schema u16, family u8, p u32, m u32, n u32, field degree u8,
/// non-residue u32 (0 for a prime field), polynomial (u16 length + UTF-8),
/// dim u32, then per label: kind u8 (0 field, 1 poly, 2 row), var u8,
/// exponents (m bytes), odd mask u16; then the pair count u64 and per pair:
/// i u32, j u32, term count u32, terms (k u32, scalar as `degree` u32s).
pub fn encode_cache(alg: &CartanAlgebra) -> Vec<u8> {
    let f = alg.field();
    let mut b = Vec::new();
    b.extend_from_slice(&CACHE_MAGIC);
    put_u16(&mut b, CACHE_SCHEMA);
    put_u8(&mut b, alg.family().code());
    put_u32(&mut b, alg.p());
    put_u32(&mut b, alg.m() as u32);
    put_u32(&mut b, alg.n() as u32);
    put_u8(&mut b, f.degree() as u8);
    put_u32(&mut b, f.nonresidue().unwrap_or(0));
    let poly = f.polynomial();
    put_u16(&mut b, poly.len() as u16);
    b.extend_from_slice(poly.as_bytes());
    put_u32(&mut b, alg.dim() as u32);
    for label in alg.labels() {
        let (kind, var, mono) = match *label {
            BasisLabel::Field { mono, var } => (0u8, var, mono),
            BasisLabel::Poly { mono } => (1, 0, mono),
            BasisLabel::Row { mono, var } => (2, var, mono),
        };
        put_u8(&mut b, kind);
        put_u8(&mut b, var as u8);
        b.extend_from_slice(&mono.alpha[..alg.m()]);
        put_u16(&mut b, mono.mask);
    }
    let dim = alg.dim();
    let rows: Vec<Vec<(u32, u32, Terms)>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            (i..dim)
                .filter_map(|j| {
                    let t = alg.bracket_basis(i, j);
                    (!t.is_empty()).then_some((i as u32, j as u32, t))
                })
                .collect()
        })
        .collect();
    put_u64(&mut b, rows.iter().map(|r| r.len() as u64).sum());
    for (i, j, terms) in rows.into_iter().flatten() {
        put_u32(&mut b, i);
        put_u32(&mut b, j);
        put_u32(&mut b, terms.len() as u32);
        for (k, c) in terms {
            put_u32(&mut b, k as u32);
            put_u32(&mut b, c.c0);
            if f.degree() == 2 {
                put_u32(&mut b, c.c1);
            }
        }
    }
    b
}

type Terms = Vec<(usize, Fe)>;

/// `(i, j, [e_i, e_j])` with the bracket as (index, coefficient) pairs.
pub type BracketRow = (u32, u32, Vec<(u32, Fe)>);

/// A structure-constant cache read back from disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cache {
    pub params: Params,
    pub field_degree: u8,
    pub nonresidue: Option<u32>,
    pub polynomial: String,
    /// `(kind, var, exponents, odd mask)` per basis vector.
    pub labels: Vec<(u8, u8, Vec<u8>, u16)>,
    pub brackets: Vec<BracketRow>,
}

struct Cursor<'a> {
    b: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        let s = self.b.get(self.at..self.at + k).ok_or_else(|| Error::Format("truncated cache".into()))?;
        self.at += k;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_cache(bytes: &[u8]) -> Result<Cache> {
    let mut c = Cursor { b: bytes, at: 0 };
    if c.take(8)? != CACHE_MAGIC {
        return Err(Error::Format("not a structure-constant cache".into()));
    }
    let schema = c.u16()?;
    if schema != CACHE_SCHEMA {
        return Err(Error::Format(format!("unsupported cache schema {schema}")));
    }
    let family = Family::from_code(c.u8()?).ok_or_else(|| Error::Format("bad family code".into()))?;
    let p = c.u32()?;
    let m = c.u32()? as usize;
    let n = c.u32()? as usize;
    if m > MAX_EVEN {
        return Err(Error::Format(format!("too many even variables: {m}")));
    }
    let field_degree = c.u8()?;
    let t = c.u32()?;
    let len = c.u16()? as usize;
    let polynomial = String::from_utf8(c.take(len)?.to_vec()).map_err(|e| Error::Format(e.to_string()))?;
    let dim = c.u32()? as usize;
    let mut labels = Vec::with_capacity(dim);
    for _ in 0..dim {
        let kind = c.u8()?;
        let var = c.u8()?;
        let alpha = c.take(m)?.to_vec();
        labels.push((kind, var, alpha, c.u16()?));
    }
    let pairs = c.u64()?;
    let mut brackets = Vec::new();
    for _ in 0..pairs {
        let i = c.u32()?;
        let j = c.u32()?;
        let k = c.u32()? as usize;
        let mut terms = Vec::with_capacity(k);
        for _ in 0..k {
            let idx = c.u32()?;
            let c0 = c.u32()?;
            let c1 = if field_degree == 2 { c.u32()? } else { 0 };
            terms.push((idx, Fe { c0, c1 }));
        }
        brackets.push((i, j, terms));
    }
    if c.at != bytes.len() {
        return Err(Error::Format("trailing bytes in cache".into()));
    }
    Ok(Cache { params: Params { family, p, m, n }, field_degree, nonresidue: (t != 0).then_some(t), polynomial, labels, brackets })
}

impl Cache {
    /// The monomial of label `idx`.
    pub fn monomial(&self, idx: usize) -> Monomial {
        let (_, _, alpha, mask) = &self.labels[idx];
        let mut mono = Monomial { alpha: [0; MAX_EVEN], mask: *mask };
        mono.alpha[..alpha.len()].copy_from_slice(alpha);
        mono
    }
}

/// Builds the algebra and writes its cache; returns the path.
pub fn cmd_build(config: &RunConfig) -> Result<PathBuf> {
    config.validate()?;
    let points = config.points();
    if points.len() != 1 {
        return Err(Error::Parameter(format!("build takes one parameter point, got {}", points.len())));
    }
    let pr = points[0];
    let alg = build(pr.family, pr.p, pr.m, pr.n)?;
    let path = match &config.output {
        Some(p) => p.clone(),
        None => cache_dir().join(cache_file_name(&pr)),
    };
    write_file(&path, &encode_cache(&alg))?;
    Ok(path)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

// ----- argument handling -----

/// Parses `5,7`, `2..4` (inclusive) or a mix; the empty string is the
/// empty list.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| Error::Parameter(format!("bad number {t:?}")));
        match item.split_once("..") {
            Some((a, b)) => out.extend(num(a)?..=num(b)?),
            None => out.push(num(item)?),
        }
    }
    Ok(out)
}

fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s.trim() == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|t| t.trim().parse()).collect()
}

fn suite_options(run: &RunArgs) -> Result<SuiteOptions> {
    let mode = match run.max_mode {
        ModeArg::Exhaustive => MaxMode::Exhaustive,
        ModeArg::Sampled => MaxMode::Sampled,
    };
    Ok(SuiteOptions {
        suites: parse_suites(&run.suite)?,
        max: MaxOptions { mode, samples: run.samples, seed: run.seed, ..MaxOptions::default() },
        max_checks: run.max_checks,
        automorphisms: run.automorphisms,
        ..SuiteOptions::default()
    })
}

fn point_config(kind: CommandKind, a: &PointArgs) -> Result<RunConfig> {
    let mut c = RunConfig::point(kind, a.family, a.p, a.m, a.n);
    c.suite = suite_options(&a.run)?;
    c.output = a.run.output.clone();
    c.format = a.run.format;
    Ok(c)
}

fn sweep_config(a: &SweepArgs) -> Result<RunConfig> {
    let small = |s: &str| -> Result<Vec<usize>> { Ok(parse_list(s)?.into_iter().map(|v| v as usize).collect()) };
    let p = parse_list(&a.p)?
        .into_iter()
        .map(|v| u32::try_from(v).map_err(|_| Error::Parameter(format!("prime {v} is too large"))))
        .collect::<Result<Vec<u32>>>()?;
    Ok(RunConfig {
        command: CommandKind::Sweep,
        families: a.family.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<_>>()?,
        p,
        m: small(&a.m)?,
        n: small(&a.n)?,
        suite: suite_options(&a.run)?,
        cap: a.cap,
        output: a.run.output.clone(),
        format: a.run.format,
    })
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn print_summary(report: &Report) {
    for r in &report.summary {
        let fam = r.family.map(|f| f.to_string()).unwrap_or_default();
        eprintln!(
            "{:<11} {:<2} match {:>3}  sampled {:>3}  documented {:>3}  unexpected {:>3}",
            r.suite, fam, r.matches, r.sampled_passes, r.documented_failures, r.unexpected_failures
        );
    }
    for s in &report.skipped {
        eprintln!("skipped {} p={} m={} n={}: {}", s.params.family, s.params.p, s.params.m, s.params.n, s.reason);
    }
    for f in report.findings.iter().filter(|f| f.is_unexpected_failure()) {
        eprintln!("FAIL {} [{}] expected {} computed {}", f.claim, f.subject, f.expected, f.computed);
    }
}

fn finish_report(report: &Report, format: Format, output: Option<&Path>) -> Result<i32> {
    emit(&report.render(format)?, output)?;
    print_summary(report);
    Ok(if report.has_unexpected_failure() { 1 } else { 0 })
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Build(a) => {
            let path = cmd_build(&point_config(CommandKind::Build, &a)?)?;
            eprintln!("wrote {}", path.display());
            Ok(0)
        }
        Command::Verify(a) => {
            let config = point_config(CommandKind::Verify, &a)?;
            let report = cmd_verify(&config)?;
            finish_report(&report, config.format, config.output.as_deref())
        }
        Command::Sweep(a) => {
            let config = sweep_config(&a)?;
            let report = cmd_sweep(&config)?;
            finish_report(&report, config.format, config.output.as_deref())
        }
        Command::Report(a) => {
            let mut text = String::new();
            fs::File::open(&a.input)?.read_to_string(&mut text)?;
            let report = Report::from_json(&text)?;
            finish_report(&report, a.format, a.output.as_deref())
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code:
/// 0 on success, 1 when a finding fails outside the allowlist or a run
/// fails, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parameter(_) => 2,
                _ => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("5,7").unwrap(), vec![5, 7]);
        assert_eq!(parse_list("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_list("").unwrap(), Vec::<u64>::new());
        assert!(parse_list("x").is_err());
    }

    #[test]
    fn non_prime_is_a_usage_error() {
        assert_eq!(run(["cartan-mgs", "verify", "--family", "W", "-p", "4", "-m", "2", "-n", "2"]), 2);
        assert_eq!(run(["cartan-mgs", "verify", "--family", "Q", "-p", "5", "-m", "2", "-n", "2"]), 2);
    }

    #[test]
    fn sweep_points_are_ordered_and_capped() {
        let mut c = RunConfig::point(CommandKind::Sweep, Family::K, 7, 3, 3);
        c.suite.suites = vec![];
        assert_eq!(estimated_dim(&c.points()[0]), 2744);
        c.families = vec![Family::W, Family::S];
        c.p = vec![5, 7];
        c.m = vec![2];
        c.n = vec![2];
        let pts = c.points();
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[0].family, pts[0].p), (Family::W, 5));
        assert_eq!((pts[3].family, pts[3].p), (Family::S, 7));
        c.cap = 700;
        let r = cmd_sweep(&c).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].params.p, 7);
        assert_eq!(r.skipped[0].params.family, Family::W);
    }
}
