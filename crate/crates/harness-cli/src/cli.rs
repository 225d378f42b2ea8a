use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use decomp::{
    check_certificate, desingularize, find_closing_tuple, generation_split, geodesic_amalgam, kurosh,
    restrict_decomposition, validate_desingularization, verify_amalgam, verify_free_product, Certificate, CheckContext,
    DecompError, ReducedTuple, Verdict,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use space_core::{EquivRelation, PointSet};
use treefield::{
    bass_serre_amalgam, bass_serre_free, extract_treeing, from_graphing, is_treefield, ColoredTreeField, Start,
    WitnessKind,
};

use crate::gen::{self, GeneratorConfig};
use crate::instance::{digest, parse_instance, serialize_instance, InstanceError, InstanceFile};

/// A certificate bound to the instance it speaks about.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub instance: String,
    pub digest: String,
    /// Named relation or graphing the certificate is about, when not the declared structure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(flatten)]
    pub certificate: Certificate,
}

pub fn serialize_certificate(c: &CertificateFile) -> String {
    let mut out = serde_json::to_string_pretty(c).expect("plain data serializes");
    out.push('\n');
    out
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "arbor", about = "Tree fields, free products and subrelation decompositions on finite instances")]
struct Cli {
    /// Output format; only json is supported.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate an instance, printing its digest.
    Validate(InOut),
    /// Decide whether the declared factors form a free product.
    VerifyFree(Verify),
    /// Decide whether the two declared factors amalgamate over the declared core.
    VerifyAmalgam(Verify),
    /// Build the tree field of the declared product and test its fibers.
    BassSerre(InOut),
    /// Extract a treeing from a quasi-free action.
    ExtractTreeing(Extract),
    /// Desingularize a sub-relation acting on the free-product tree field.
    Desingularize(WithSub),
    /// Decompose a sub-relation of the declared free product.
    Kurosh(WithSub),
    /// Decompose the restriction of the declared free product to a subset.
    Restrict(Restrict),
    /// Re-check a certificate against its instance.
    Check(Check),
    /// Write a seeded random instance.
    Gen(Gen),
    /// Run one operation over many instances.
    Batch(Batch),
}

#[derive(clap::Args, Debug)]
struct InOut {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct Verify {
    #[command(flatten)]
    io: InOut,
    /// Step bound for the cross-checking tuple search; defaults to twice the space size.
    #[arg(long)]
    max_tuple_len: Option<usize>,
}

#[derive(clap::Args, Debug)]
struct Extract {
    #[command(flatten)]
    io: InOut,
    /// Use the canonical field of this graphing.
    #[arg(long, conflicts_with = "sub")]
    graphing: Option<String>,
    /// Act by this sub-relation on the free-product tree field.
    #[arg(long)]
    sub: Option<String>,
}

#[derive(clap::Args, Debug)]
struct WithSub {
    #[command(flatten)]
    io: InOut,
    #[arg(long)]
    sub: Option<String>,
}

#[derive(clap::Args, Debug)]
struct Restrict {
    #[command(flatten)]
    io: InOut,
    /// Comma-separated points; defaults to the declared subset.
    #[arg(long = "restrict", value_delimiter = ',')]
    set: Option<Vec<usize>>,
}

#[derive(clap::Args, Debug)]
struct Check {
    #[arg(long)]
    cert: PathBuf,
    /// Instance file; defaults to the path recorded in the certificate.
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Free,
    NonFree,
    Amalgam,
    NonAmalgam,
    Treeing,
}

#[derive(clap::Args, Debug)]
struct Gen {
    #[arg(long, value_enum, default_value = "free")]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    size: usize,
    #[arg(long, default_value_t = 2)]
    factors: usize,
    #[arg(long, default_value_t = 6)]
    max_class: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BatchOp {
    VerifyFree,
    VerifyAmalgam,
    Kurosh,
    Restrict,
}

#[derive(clap::Args, Debug)]
struct Batch {
    #[arg(long, value_enum, default_value = "verify-free")]
    op: BatchOp,
    /// Instance files; the report follows this order.
    #[arg(long = "in", num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
}

/// Failures mapped onto exit codes: `Reject` is 1, everything else 2.
enum Fail {
    Reject(String),
    Input(String),
}

impl From<InstanceError> for Fail {
    fn from(e: InstanceError) -> Self {
        Fail::Input(e.to_string())
    }
}

impl From<DecompError> for Fail {
    fn from(e: DecompError) -> Self {
        match e {
            DecompError::NotFreeProduct(t) => Fail::Reject(format!("not a free product: {}", show_tuple(&t))),
            e => Fail::Input(e.to_string()),
        }
    }
}

impl From<treefield::FieldError> for Fail {
    fn from(e: treefield::FieldError) -> Self {
        Fail::Input(e.to_string())
    }
}

impl From<space_core::SpaceError> for Fail {
    fn from(e: space_core::SpaceError) -> Self {
        Fail::Input(e.to_string())
    }
}

type Run = Result<(i32, String), Fail>;

pub fn show_tuple(t: &ReducedTuple) -> String {
    let pts: Vec<String> = t.points.iter().map(usize::to_string).collect();
    let tags: Vec<String> = t.tags.iter().map(usize::to_string).collect();
    format!("({}) tags ({})", pts.join(","), tags.join(","))
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run_command<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: e.to_string() }
            } else {
                Outcome { code: 0, stdout: e.to_string(), stderr: String::new() }
            };
        }
    };
    if cli.format != "json" {
        return Outcome { code: 2, stdout: String::new(), stderr: format!("unsupported format {}\n", cli.format) };
    }
    let result = match cli.command {
        Command::Validate(a) => validate(&a),
        Command::VerifyFree(a) => verify(&a, false),
        Command::VerifyAmalgam(a) => verify(&a, true),
        Command::BassSerre(a) => bass_serre(&a),
        Command::ExtractTreeing(a) => extract(&a),
        Command::Desingularize(a) => desing(&a),
        Command::Kurosh(a) => kurosh_cmd(&a),
        Command::Restrict(a) => restrict(&a),
        Command::Check(a) => check(&a),
        Command::Gen(a) => generate(&a),
        Command::Batch(a) => return batch(&a),
    };
    match result {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(Fail::Reject(msg)) => Outcome { code: 1, stdout: format!("reject: {msg}\n"), stderr: String::new() },
        Err(Fail::Input(msg)) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}

fn load(path: &Path) -> Result<InstanceFile, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

/// Writes to `out` if given, otherwise appends to the report.
fn emit(out: Option<&Path>, text: &str, report: &mut String) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fail::Input(format!("{}: {e}", p.display()))),
        None => {
            report.push_str(text);
            Ok(())
        }
    }
}

fn bind(io: &InOut, inst: &InstanceFile, subject: Option<String>, certificate: Certificate) -> CertificateFile {
    CertificateFile { instance: io.input.display().to_string(), digest: digest(inst), subject, certificate }
}

fn validate(a: &InOut) -> Run {
    let inst = load(&a.input)?;
    let mut report = format!("ok {}\n", digest(&inst));
    emit(a.out.as_deref(), &serialize_instance(&inst), &mut report)?;
    Ok((0, report))
}

fn verify(a: &Verify, amalgam: bool) -> Run {
    let inst = load(&a.io.input)?;
    let r = inst.ambient()?;
    let fs = inst.factors()?;
    let bound = a.max_tuple_len.unwrap_or(2 * inst.size);
    let (verdict, certificate, core) = if amalgam {
        if fs.len() != 2 {
            return Err(Fail::Input("an amalgam needs exactly two factors".into()));
        }
        let core = inst.core()?;
        let v = verify_amalgam(&r, &fs[0], &fs[1], &core)?;
        let c = Certificate::amalgam(&v);
        (v, c, Some(core))
    } else {
        let v = verify_free_product(&r, &fs)?;
        let c = Certificate::free_product(&v);
        (v, c, None)
    };
    let oracle = find_closing_tuple(&fs, core.as_ref(), bound);
    let mut report = String::new();
    let code = match &verdict {
        Verdict::Accept(_) => {
            report.push_str("accept\n");
            0
        }
        Verdict::Reject(t) => {
            report.push_str(&format!("reject: closing tuple {}\n", show_tuple(t)));
            1
        }
    };
    let agrees = verdict.is_accept() == oracle.is_none();
    report.push_str(&format!("tuple search (bound {bound}): {}\n", if agrees { "agrees" } else { "disagrees" }));
    let cert = bind(&a.io, &inst, None, certificate);
    emit(a.io.out.as_deref(), &serialize_certificate(&cert), &mut report)?;
    Ok((code, report))
}

/// The two-factor tree field of the declared structure: the first factor against
/// the join of the others, or the amalgam field when a core is declared.
fn product_field(inst: &InstanceFile) -> Result<(EquivRelation, Vec<EquivRelation>, ColoredTreeField), Fail> {
    let r = inst.ambient()?;
    let fs = inst.factors()?;
    let rest = if fs.len() == 1 { EquivRelation::trivial(r.space()) } else { EquivRelation::join(fs[1..].iter())? };
    let a = match &inst.structure.core {
        Some(_) if fs.len() == 2 => bass_serre_amalgam(&r, &fs[0], &fs[1], &inst.core()?)?,
        _ => bass_serre_free(&r, &fs[0], &rest)?,
    };
    Ok((r, fs, a))
}

fn bass_serre(a: &InOut) -> Run {
    let inst = load(&a.input)?;
    let (_, _, field) = product_field(&inst)?;
    let f = &field.field;
    let mut report = format!("vertices {} edges {}\n", f.vertices().len(), f.edges().len());
    let code = match is_treefield(f) {
        Ok(()) => {
            report.push_str("tree field\n");
            0
        }
        Err(w) => {
            match w.kind {
                WitnessKind::Cycle(vs) => report.push_str(&format!("cycle over {}: vertices {:?}\n", w.base, vs)),
                WitnessKind::Disconnected(u, v) => {
                    report.push_str(&format!("disconnected over {}: {u} and {v}\n", w.base))
                }
            }
            1
        }
    };
    Ok((code, report))
}

fn extract(a: &Extract) -> Run {
    let inst = load(&a.io.input)?;
    let (subject, relation, treeing) = match &a.graphing {
        Some(g) => {
            let (r, field, _) = from_graphing(&inst.graphing(g)?)?;
            (g.clone(), r, extract_treeing(&field)?)
        }
        None => {
            let (name, s) = match (&a.sub, &inst.structure.sub) {
                (None, None) => ("ambient".to_string(), inst.ambient()?),
                (given, _) => inst.sub(given.as_deref())?,
            };
            let (_, _, field) = product_field(&inst)?;
            let acted = field.field.restrict_action(&s)?;
            (name, s, extract_treeing(&acted)?)
        }
    };
    let ok = treeing.is_treeing_of(&relation);
    let mut report = format!("treeing with {} edges\n", treeing.num_edges());
    let cert = bind(&a.io, &inst, Some(subject), Certificate::treeing(&treeing));
    emit(a.io.out.as_deref(), &serialize_certificate(&cert), &mut report)?;
    Ok((if ok { 0 } else { 1 }, report))
}

#[derive(Serialize)]
struct NodeReport {
    parent: Option<usize>,
    color: u8,
    carrier: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct ExtraReport {
    from: usize,
    to: usize,
    phi: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct DesingReport {
    nodes: Vec<NodeReport>,
    extra: Vec<ExtraReport>,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
    trivial_intersections: bool,
    extra_treeing: bool,
    generates: bool,
    geodesic_pairs: usize,
    geodesic_accepted: usize,
}

fn desing(a: &WithSub) -> Run {
    let inst = load(&a.io.input)?;
    let (_, s) = inst.sub(a.sub.as_deref())?;
    let (_, _, field) = product_field(&inst)?;
    let acted = field.field.restrict_action(&s)?;
    let d = desingularize(&acted, Start::Edge(field.edge_section.clone()))?;
    let valid = validate_desingularization(&acted, &d);
    let split = generation_split(&acted, &d)?;
    let (mut pairs, mut accepted) = (0, 0);
    for p in 0..d.node_count() {
        for q in p + 1..d.node_count() {
            match geodesic_amalgam(&acted, &d, p, q) {
                Ok(v) => {
                    pairs += 1;
                    accepted += v.is_accept() as usize;
                }
                Err(DecompError::EmptyIntersection) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    let nodes = (0..d.node_count())
        .map(|i| {
            let n = &d.forest.nodes[i];
            Ok(NodeReport {
                parent: n.parent,
                color: field.color[n.section.image()[0]],
                carrier: n.section.domain().to_vec(),
                classes: d.forest.vertex_relation(&acted, i)?.classes(),
            })
        })
        .collect::<Result<Vec<_>, treefield::FieldError>>()?;
    let extra = d.extra.iter().map(|e| ExtraReport { from: e.from, to: e.to, phi: e.phi.pairs() }).collect();
    let report = DesingReport {
        nodes,
        extra,
        valid: valid.is_ok(),
        violation: valid.err().map(|v| format!("{:?} at {}", v.bullet, v.witness)),
        trivial_intersections: split.trivial_intersections,
        extra_treeing: split.treeing_ok,
        generates: split.generates,
        geodesic_pairs: pairs,
        geodesic_accepted: accepted,
    };
    let ok = report.valid && split.all_passed() && pairs == accepted;
    let mut out = String::new();
    let mut text = serde_json::to_string_pretty(&report).expect("plain data serializes");
    text.push('\n');
    emit(a.io.out.as_deref(), &text, &mut out)?;
    Ok((if ok { 0 } else { 1 }, out))
}

fn kurosh_cmd(a: &WithSub) -> Run {
    let inst = load(&a.io.input)?;
    let (name, s) = inst.sub(a.sub.as_deref())?;
    let k = kurosh(&inst.ambient()?, &inst.factors()?, &s)?;
    let mut report = format!("pieces {} treeing edges {}\n", k.factors.len(), k.treeing.num_edges());
    let cert = bind(&a.io, &inst, Some(name), Certificate::kurosh(&k));
    emit(a.io.out.as_deref(), &serialize_certificate(&cert), &mut report)?;
    Ok((0, report))
}

fn restrict(a: &Restrict) -> Run {
    let inst = load(&a.io.input)?;
    let y = inst.subset(a.set.as_deref())?;
    let d = restrict_decomposition(&inst.ambient()?, &inst.factors()?, &y)?;
    let mut report = format!("pieces {} treeing edges {}\n", d.factors.len(), d.treeing.num_edges());
    let cert = bind(&a.io, &inst, None, Certificate::restriction(&y, &d));
    emit(a.io.out.as_deref(), &serialize_certificate(&cert), &mut report)?;
    Ok((0, report))
}

/// Resolves a named relation, falling back to the relation generated by a named graphing.
fn subject_relation(inst: &InstanceFile, name: &str) -> Result<EquivRelation, Fail> {
    if name == "ambient" && !inst.relations.contains_key(name) {
        return Ok(inst.ambient()?);
    }
    if inst.relations.contains_key(name) {
        return Ok(inst.relation(name)?);
    }
    Ok(inst.graphing(name)?.generated_relation())
}

fn check(a: &Check) -> Run {
    let text = fs::read_to_string(&a.cert).map_err(|e| Fail::Input(format!("{}: {e}", a.cert.display())))?;
    let cert: CertificateFile = serde_json::from_str(&text)
        .map_err(|e| Fail::Input(format!("{}: line {}: {e}", a.cert.display(), e.line())))?;
    let path = match &a.input {
        Some(p) => p.clone(),
        None => {
            let recorded = PathBuf::from(&cert.instance);
            let beside = a.cert.parent().map(|d| d.join(recorded.file_name().unwrap_or_default()));
            match beside {
                Some(b) if !recorded.exists() && b.exists() => b,
                _ => recorded,
            }
        }
    };
    let inst = load(&path)?;
    if digest(&inst) != cert.digest {
        return Err(Fail::Input(format!("digest mismatch for {}", path.display())));
    }
    check_against(&inst, &cert)
}

fn check_against(inst: &InstanceFile, cert: &CertificateFile) -> Run {
    let relation;
    let factors;
    let mut sub = None;
    let mut core = None;
    let mut subset = None;
    match &cert.certificate {
        Certificate::Treeing { .. } => {
            let name =
                cert.subject.as_deref().ok_or_else(|| Fail::Input("treeing certificate without subject".into()))?;
            relation = subject_relation(inst, name)?;
            factors = Vec::new();
        }
        c => {
            relation = inst.ambient()?;
            factors = inst.factors()?;
            match c {
                Certificate::Amalgam { .. } => core = Some(inst.core()?),
                Certificate::Kurosh { .. } => sub = Some(inst.sub(cert.subject.as_deref())?.1),
                Certificate::Restriction { subset: s, .. } => {
                    subset = Some(PointSet::from_points(relation.space(), s.iter().copied())?)
                }
                _ => {}
            }
        }
    }
    let ctx = CheckContext {
        relation: &relation,
        factors: &factors,
        core: core.as_ref(),
        sub: sub.as_ref(),
        subset: subset.as_ref(),
    };
    match check_certificate(&cert.certificate, &ctx) {
        Ok(()) => Ok((0, format!("ok {}\n", cert.certificate.kind()))),
        Err(e) => Err(Fail::Reject(format!("{} certificate fails: {e}", cert.certificate.kind()))),
    }
}

fn generate(a: &Gen) -> Run {
    let cfg =
        GeneratorConfig { seed: a.seed, size: a.size, factors: a.factors, max_class: a.max_class, density: a.density };
    let inst = match a.kind {
        Kind::Free => with_extras(gen::gen_free_product(&cfg), &cfg)?,
        Kind::NonFree => gen::gen_non_free(&cfg),
        Kind::Amalgam => gen::gen_amalgam(&cfg),
        Kind::NonAmalgam => gen::gen_non_amalgam(&cfg),
        Kind::Treeing => {
            let mut inst = InstanceFile::new(a.size.max(1));
            inst.insert_graphing("G", &gen::gen_treeing(&cfg));
            inst
        }
    };
    let mut report = String::new();
    emit(a.out.as_deref(), &serialize_instance(&inst), &mut report)?;
    Ok((0, report))
}

/// Adds a sampled sub-relation `S` and subset to a generated free product.
fn with_extras(mut inst: InstanceFile, cfg: &GeneratorConfig) -> Result<InstanceFile, Fail> {
    let r = inst.ambient()?;
    let s = gen::gen_subrelation(cfg.seed.wrapping_add(1), &r, cfg.density);
    inst.insert_relation("S", &s);
    inst.structure.sub = Some("S".into());
    inst.structure.subset = Some(gen::gen_subset(cfg.seed.wrapping_add(2), r.space(), cfg.density).to_vec());
    Ok(inst)
}

fn batch(a: &Batch) -> Outcome {
    let lines: Vec<(i32, String)> = a
        .inputs
        .par_iter()
        .map(|p| {
            let io = InOut { input: p.clone(), out: None };
            let res = match a.op {
                BatchOp::VerifyFree => verify(&Verify { io, max_tuple_len: None }, false),
                BatchOp::VerifyAmalgam => verify(&Verify { io, max_tuple_len: None }, true),
                BatchOp::Kurosh => kurosh_cmd(&WithSub { io, sub: None }),
                BatchOp::Restrict => restrict(&Restrict { io, set: None }),
            };
            let (code, first) = match res {
                Ok((c, text)) => (c, text.lines().next().unwrap_or_default().to_string()),
                Err(Fail::Reject(m)) => (1, format!("reject: {m}")),
                Err(Fail::Input(m)) => (2, format!("error: {m}")),
            };
            (code, format!("{}\t{code}\t{first}\n", p.display()))
        })
        .collect();
    let code = lines.iter().map(|l| l.0).max().unwrap_or(0);
    Outcome { code, stdout: lines.into_iter().map(|l| l.1).collect(), stderr: String::new() }
}
