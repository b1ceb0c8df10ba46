//! Command-line front end. Exit codes: 0 verified, 1 verification failed or
//! unsettled, 2 invalid input or unmet hypotheses.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::code::{hermitian_base, Duality, LinearCode, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::families::{
    build_family_a, build_family_b, build_family_c, build_quantum, derive_quantum_params, family_b_automorphism,
    quantum_defect, verify_quantum, FamilyAParams, FamilyBParams, FamilyCParams, NonNested, QuantumInput,
    QuantumInstance, QuantumReport, Theorem,
};
use crate::io::{
    parse_duality, CodeDoc, DistanceView, Document, LocalityView, MatDoc, MpDoc, OptimalityView,
    ProfileDoc, Source, SCHEMA,
};
use crate::locality::{
    candidate_profiles, distance_for, is_optimal_lrc_with, rd_bound, search_locality, verify_candidates,
    verify_locality, Construction, RepairProfile,
};
use crate::mpkit::{type_one_matrix, type_two_matrix};

const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Locality search is only attempted on codes this short.
const SEARCH_MAX_LEN: usize = 20;

#[derive(Parser, Debug)]
#[command(name = "lrcforge", version, about = "Build and verify optimal locally repairable codes")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a family code or a quantum construction and write it as JSON.
    Construct(ConstructArgs),
    /// Recompute distance, locality, bound and duality of a code file.
    Verify(VerifyArgs),
    /// Rebuild and verify the reference instances.
    Reproduce(ReproduceArgs),
    /// Emit a τ-OD defining matrix.
    Matrix(MatrixArgs),
    /// Build and verify a quantum construction in one step.
    Quantum(QuantumArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    A,
    B,
    C,
}

#[derive(Args, Debug, Clone, Default)]
struct Params {
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    u: Option<usize>,
    #[arg(long)]
    v: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Number of constituents.
    #[arg(long = "N")]
    big_n: Option<usize>,
}

impl Params {
    fn need(v: Option<usize>, name: &str) -> Result<usize> {
        v.ok_or_else(|| Error::InvalidParameters(format!("--{name} is required")))
    }

    fn quantum_input(&self) -> Result<QuantumInput> {
        Ok(QuantumInput {
            q: Self::need(self.q, "q")?,
            big_n: Self::need(self.big_n, "N")?,
            t: Self::need(self.t, "t")?,
            u: self.u.unwrap_or(0),
            v: self.v.unwrap_or(0),
            s: self.s.unwrap_or(0),
            l: self.l.unwrap_or(0),
            m: self.m.unwrap_or(0),
        })
    }
}

#[derive(Args, Debug)]
struct BudgetArg {
    /// Operation cap for each distance computation.
    #[arg(long, env = "LRCFORGE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("what").required(true).args(["family", "theorem"]))]
struct ConstructArgs {
    #[arg(long, value_enum, ignore_case = true)]
    family: Option<Family>,
    /// mp12, mp22, mpess4, mp32 or mp31.
    #[arg(long)]
    theorem: Option<Theorem>,
    #[command(flatten)]
    params: Params,
    /// Build a quantum construction even if its hypotheses fail.
    #[arg(long)]
    unchecked: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    /// euclidean or hermitian; checks the induced quantum code.
    #[arg(long)]
    duality: Option<String>,
    #[arg(long)]
    profile: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArg,
    /// Subsets examined by the locality search on short codes.
    #[arg(long, default_value_t = 2_000_000)]
    search_cap: u64,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Example {
    #[value(name = "v-a")]
    VA,
    #[value(name = "v-b")]
    VB,
    #[value(name = "v-c")]
    VC,
    #[value(name = "vi-b")]
    ViB,
    #[value(name = "vi-c")]
    ViC,
    All,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(long, value_enum, default_value_t = Example::All)]
    example: Example,
    #[command(flatten)]
    budget: BudgetArg,
    /// Print the full reports as JSON instead of a table.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MatrixType {
    #[value(name = "I")]
    One,
    #[value(name = "II")]
    Two,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    /// Build a τ-OD matrix (the only kind supported).
    #[arg(long = "tau-od", required = true)]
    tau_od: bool,
    #[arg(long = "type", value_enum, ignore_case = true)]
    kind: MatrixType,
    #[arg(long = "N")]
    big_n: usize,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QuantumArgs {
    #[arg(long)]
    theorem: Theorem,
    #[command(flatten)]
    params: Params,
    #[arg(long)]
    unchecked: bool,
    /// Also write the construction as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArg,
    #[arg(long, default_value_t = 0)]
    search_cap: u64,
    #[arg(long)]
    timing: bool,
}

/// Failure of a command, with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PostconditionFailed(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 2, message: format!("{}: {e}", path.display()) }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Construct(a) => construct(a, out, err),
        Command::Verify(a) => verify(a, out),
        Command::Reproduce(a) => reproduce(a, out),
        Command::Matrix(a) => matrix(a, out, err),
        Command::Quantum(a) => quantum(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| io_failure(p, e)),
        None => writeln!(out, "{text}").map_err(|e| Failure { code: 2, message: e.to_string() }),
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports always serialize")
}

fn family_doc(code: &LinearCode, source: Source, construction: Construction, expected: crate::families::LrcParams) -> CodeDoc {
    CodeDoc { construction: Some(construction), source: Some(source), expected: Some(expected), ..CodeDoc::from_code(code) }
}

fn quantum_doc(inst: &QuantumInstance, enforce: bool) -> MpDoc {
    MpDoc {
        construction: Some(inst.construction.clone()),
        source: Some(Source::Theorem { theorem: inst.theorem, input: inst.input.clone(), enforce }),
        duality: Some(inst.duality.as_str().into()),
        tau: inst.tau.as_ref().map(|t| t.one_based()),
        expected: Some(inst.expected),
        violated: inst.violated.clone(),
        ..MpDoc::from_spec(&inst.spec)
    }
}

fn construct(a: ConstructArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let p = &a.params;
    let need = Params::need;
    let (doc, summary) = if let Some(th) = a.theorem {
        let inst = build_quantum(th, &p.quantum_input()?, !a.unchecked)?;
        let summary = format!("{th}: expected {}", inst.expected);
        (Document::Mp(quantum_doc(&inst, !a.unchecked)), summary)
    } else {
        let (code, source, construction, expected) = match a.family.expect("clap requires family or theorem") {
            Family::A => {
                let fp = FamilyAParams::new(need(p.q, "q")?, need(p.u, "u")?, p.v.unwrap_or(0), need(p.t, "t")?);
                (build_family_a(&fp)?, Source::FamilyA(fp.clone()), fp.construction(), fp.expected())
            }
            Family::B => {
                let fp = FamilyBParams::new(
                    need(p.q, "q")?,
                    need(p.s, "s")?,
                    p.l.unwrap_or(0),
                    need(p.v, "v")?,
                    need(p.t, "t")?,
                );
                (build_family_b(&fp)?, Source::FamilyB(fp.clone()), fp.construction(), fp.expected())
            }
            Family::C => {
                let fp = FamilyCParams::new(
                    need(p.q, "q")?,
                    need(p.u, "u")?,
                    p.v.unwrap_or(0),
                    need(p.t, "t")?,
                    need(p.m, "m")?,
                );
                (build_family_c(&fp)?, Source::FamilyC(fp.clone()), fp.construction(), fp.expected())
            }
        };
        let e = expected;
        let summary = format!(
            "[{},{},{}] code over GF({}), (r,δ) = ({},{})",
            e.n,
            e.k,
            e.d,
            code.field().order(),
            e.r,
            e.delta
        );
        (Document::Code(family_doc(&code, source, construction, expected)), summary)
    };
    emit(&doc.to_json(), a.out.as_deref(), out)?;
    let _ = writeln!(err, "{summary}");
    Ok(0)
}

#[derive(Serialize)]
struct VerifyInput {
    code: String,
    r: usize,
    delta: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    duality: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<String>,
    budget: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<Source>,
}

#[derive(Serialize)]
struct Computed {
    n: usize,
    k: usize,
    distance: DistanceView,
}

#[derive(Serialize)]
struct QuantumView {
    duality: &'static str,
    /// `[[n, k, d]]_q, (r,δ)` when `d` is exact.
    params: Option<String>,
    n: usize,
    k: i64,
    d: Option<usize>,
    q: u32,
    dual_containing: bool,
    dim_consistent: bool,
    delta_within_dual_distance: Option<bool>,
    locality: bool,
    equality: Option<bool>,
    defect: Option<i64>,
    classical_optimal: bool,
    agreement: bool,
    optimal: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    reasons: Vec<String>,
}

#[derive(Serialize)]
struct Diff {
    field: &'static str,
    expected: i64,
    computed: Option<i64>,
}

#[derive(Serialize)]
struct VerificationReport {
    schema: &'static str,
    kind: &'static str,
    tool_version: &'static str,
    input: VerifyInput,
    computed: Computed,
    bound: Option<i64>,
    singleton_defect: Option<i64>,
    profile: Option<ProfileDoc>,
    locality: LocalityView,
    optimal_lrc: OptimalityView,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum: Option<QuantumView>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diffs: Vec<Diff>,
    /// verified, failed or unverified.
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

/// Expected values a document carries, as `(field, value)` pairs.
type ExpectedFields = (Vec<(&'static str, i64)>, usize, usize);

fn expected_pairs(doc: &Document) -> Option<ExpectedFields> {
    match doc {
        Document::Code(c) => c.expected.map(|e| {
            (vec![("n", e.n as i64), ("k", e.k as i64), ("d", e.d as i64)], e.r, e.delta)
        }),
        Document::Mp(m) => m.expected.map(|e| {
            (vec![("n", e.n as i64), ("k", e.k), ("d", e.d as i64)], e.r, e.delta)
        }),
        _ => None,
    }
}

fn quantum_base(code: &LinearCode, duality: Duality) -> Result<u32> {
    match duality {
        Duality::Hermitian => hermitian_base(code.field()),
        Duality::Euclidean => Ok(code.field().order()),
    }
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let start = Instant::now();
    let text = fs::read_to_string(&a.code).map_err(|e| io_failure(&a.code, e))?;
    let doc = Document::from_json(&text)?;
    let (code, construction, source, doc_duality) = match &doc {
        Document::Code(c) => (c.to_code()?, c.construction.clone(), c.source.clone(), None),
        Document::Mp(m) => (m.to_spec()?.code(), m.construction.clone(), m.source.clone(), m.duality.clone()),
        _ => return Err(Failure { code: 2, message: "--code must hold a code or an MP spec".into() }),
    };
    let expected = expected_pairs(&doc);
    let r = a.r.or(expected.as_ref().map(|e| e.1));
    let delta = a.delta.or(expected.as_ref().map(|e| e.2));
    let (Some(r), Some(delta)) = (r, delta) else {
        return Err(Failure { code: 2, message: "--r and --delta are required for this file".into() });
    };
    let duality = match a.duality.as_deref().or(doc_duality.as_deref()) {
        Some(s) => Some(parse_duality(s)?),
        None => None,
    };
    let budget = a.budget.budget;

    let mut candidates = match &a.profile {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            match Document::from_json(&text)? {
                Document::Profile(p) => vec![p.to_profile()?.with_params(r, delta)?],
                _ => return Err(Failure { code: 2, message: "--profile must hold a profile".into() }),
            }
        }
        None => candidate_profiles(construction.as_ref().unwrap_or(&Construction::Generic), r, delta)?,
    };
    let (mut profile, mut locality) = verify_candidates(&code, &candidates, budget);
    if profile.is_none() && a.profile.is_none() && code.len() <= SEARCH_MAX_LEN {
        if let Some(found) = search_locality(&code, r, delta, a.search_cap) {
            locality = verify_locality(&code, &found, budget);
            candidates.insert(0, found.clone());
            profile = Some(found);
        }
    }
    let used = profile
        .clone()
        .or_else(|| candidates.first().cloned())
        .map_or_else(|| RepairProfile::new(r, delta, vec![(0..code.len()).collect()]), Ok)?;

    let symmetry = match &source {
        Some(Source::FamilyB(p)) => family_b_automorphism(p).ok(),
        _ => None,
    };
    let distance = match symmetry {
        Some(sigma) if code.is_automorphism(&sigma) => code.distance_with_symmetry(&sigma, budget)?,
        _ => distance_for(&code, Some(&used), budget),
    };
    let optimal = is_optimal_lrc_with(&code, &used, distance.clone(), budget);
    let bound = rd_bound(code.len(), code.dim(), r, delta).ok();
    let singleton_defect = distance.exact_value().map(|d| code.singleton_defect(d));

    let quantum = match duality {
        Some(kind) => {
            let qp = derive_quantum_params(&code, &used, kind, Some(distance.clone()), budget)?;
            let q = quantum_base(&code, kind)?;
            let d = qp.distance.exact_value();
            Some(QuantumView {
                duality: kind.as_str(),
                params: d.map(|d| format!("[[{},{},{}]]_{q}, ({r},{delta})", qp.n, qp.k, d)),
                n: qp.n,
                k: qp.k,
                d,
                q,
                dual_containing: qp.dual_containing,
                dim_consistent: qp.dim_consistent,
                delta_within_dual_distance: qp.delta_within_dual_distance,
                locality: qp.locality.verified,
                equality: qp.equality,
                defect: d.map(|d| quantum_defect(qp.n, qp.k, d, r, delta)),
                classical_optimal: qp.classical.optimal,
                agreement: qp.agreement,
                optimal: qp.optimal,
                reasons: qp.reasons,
            })
        }
        None => None,
    };

    let mut diffs = Vec::new();
    if let Some((pairs, _, _)) = &expected {
        let k_computed = match &doc {
            Document::Mp(_) => 2 * code.dim() as i64 - code.len() as i64,
            _ => code.dim() as i64,
        };
        for &(field, value) in pairs {
            let computed = match field {
                "n" => Some(code.len() as i64),
                "k" => Some(k_computed),
                _ => distance.exact_value().map(|d| d as i64),
            };
            if computed != Some(value) {
                diffs.push(Diff { field, expected: value, computed });
            }
        }
    }

    let settled = !distance.capped()
        && locality.groups.iter().all(|g| !g.distance.capped())
        && quantum.as_ref().is_none_or(|q| q.delta_within_dual_distance.is_some());
    let holds = optimal.optimal && quantum.as_ref().is_none_or(|q| q.optimal) && diffs.is_empty();
    let verdict = match (holds, settled) {
        (true, _) => "verified",
        (false, true) => "failed",
        (false, false) => "unverified",
    };
    let report = VerificationReport {
        schema: SCHEMA,
        kind: "verification-report",
        tool_version: VERSION,
        input: VerifyInput {
            code: a.code.display().to_string(),
            r,
            delta,
            duality: duality.map(Duality::as_str),
            profile: a.profile.as_ref().map(|p| p.display().to_string()),
            budget,
            source,
        },
        computed: Computed { n: code.len(), k: code.dim(), distance: DistanceView::from(&distance) },
        bound,
        singleton_defect,
        profile: profile.as_ref().map(ProfileDoc::from_profile),
        locality: LocalityView::from(&locality),
        optimal_lrc: OptimalityView::from(&optimal),
        quantum,
        diffs,
        verdict,
        elapsed_ms: a.timing.then(|| start.elapsed().as_millis()),
    };
    emit(&pretty(&report), None, out)?;
    Ok(if verdict == "verified" { 0 } else { 1 })
}

#[derive(Serialize)]
struct QuantumReportView {
    schema: &'static str,
    kind: &'static str,
    tool_version: &'static str,
    theorem: Theorem,
    input: QuantumInput,
    enforce: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violated_hypotheses: Vec<String>,
    tau: Option<String>,
    expected: String,
    computed: Option<String>,
    distance: DistanceView,
    profile: Option<ProfileDoc>,
    locality: LocalityView,
    dual_containing: bool,
    dim_consistent: bool,
    delta_within_dual_distance: Option<bool>,
    equality: Option<bool>,
    classical: OptimalityView,
    agreement: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    non_nested: Option<NonNested>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    reasons: Vec<String>,
    verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

fn quantum_view(inst: &QuantumInstance, rep: &QuantumReport, enforce: bool, elapsed: Option<u128>) -> QuantumReportView {
    let p = &rep.params;
    QuantumReportView {
        schema: SCHEMA,
        kind: "quantum-report",
        tool_version: VERSION,
        theorem: inst.theorem,
        input: inst.input.clone(),
        enforce,
        violated_hypotheses: inst.violated.clone(),
        tau: inst.tau.as_ref().map(ToString::to_string),
        expected: rep.expected.to_string(),
        computed: rep.computed.map(|c| c.to_string()),
        distance: DistanceView::from(&p.distance),
        profile: rep.profile.as_ref().map(ProfileDoc::from_profile),
        locality: LocalityView::from(&p.locality),
        dual_containing: p.dual_containing,
        dim_consistent: p.dim_consistent,
        delta_within_dual_distance: p.delta_within_dual_distance,
        equality: p.equality,
        classical: OptimalityView::from(&p.classical),
        agreement: p.agreement,
        non_nested: rep.non_nested,
        reasons: p.reasons.clone(),
        verified: rep.verified,
        elapsed_ms: elapsed,
    }
}

fn quantum(a: QuantumArgs, out: &mut dyn Write) -> CmdResult {
    let start = Instant::now();
    let enforce = !a.unchecked;
    let inst = build_quantum(a.theorem, &a.params.quantum_input()?, enforce)?;
    if let Some(path) = &a.out {
        emit(&Document::Mp(quantum_doc(&inst, enforce)).to_json(), Some(path), out)?;
    }
    let rep = verify_quantum(&inst, a.search_cap, a.budget.budget)?;
    let view = quantum_view(&inst, &rep, enforce, a.timing.then(|| start.elapsed().as_millis()));
    emit(&pretty(&view), None, out)?;
    Ok(if rep.verified { 0 } else { 1 })
}

/// A reference instance with its listed parameters.
pub struct ReferenceExample {
    pub id: &'static str,
    pub theorem: Theorem,
    pub input: QuantumInput,
    /// Parameters as listed, in `QuantumTriple` display form.
    pub listed: &'static str,
    /// The listed field subscript is known to be wrong.
    pub subscript_typo: bool,
}

pub fn reference_examples() -> Vec<ReferenceExample> {
    let input = |q, big_n, t, u, v, s, l, m| QuantumInput { q, big_n, t, u, v, s, l, m };
    vec![
        ReferenceExample {
            id: "v-a",
            theorem: Theorem::Mp12,
            input: input(7, 3, 2, 2, 1, 0, 0, 0),
            listed: "[[36,10,4]]_11, (4,3)",
            subscript_typo: true,
        },
        ReferenceExample {
            id: "v-b",
            theorem: Theorem::Mp22,
            input: input(13, 3, 1, 0, 4, 2, 1, 0),
            listed: "[[84,58,4]]_13, (14,3)",
            subscript_typo: false,
        },
        ReferenceExample {
            id: "v-c",
            theorem: Theorem::Mpess4,
            input: input(11, 2, 2, 3, 1, 0, 0, 0),
            listed: "[[40,14,5]]_11, (7,4)",
            subscript_typo: false,
        },
        ReferenceExample {
            id: "vi-b",
            theorem: Theorem::Mp32,
            input: input(9, 3, 2, 2, 1, 0, 0, 8),
            listed: "[[48,22,4]]_9, (6,3)",
            subscript_typo: false,
        },
        ReferenceExample {
            id: "vi-c",
            theorem: Theorem::Mp31,
            input: input(13, 3, 2, 2, 1, 0, 0, 12),
            listed: "[[72,46,4]]_13, (10,3)",
            subscript_typo: false,
        },
    ]
}

/// Outcome of rebuilding one reference instance.
pub struct Reproduction {
    pub instance: QuantumInstance,
    pub report: QuantumReport,
    /// ok, paper-typo or FAILED.
    pub status: &'static str,
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
}

fn strip_subscript(s: &str) -> String {
    // "[[n,k,d]]_q, (r,δ)" without the "_q".
    match (s.find("]]_"), s.find(", (")) {
        (Some(a), Some(b)) => format!("{}{}", &s[..a + 2], &s[b..]),
        _ => s.to_string(),
    }
}

/// Builds (without enforcing hypotheses) and verifies a reference instance.
pub fn reproduce_example(ex: &ReferenceExample, budget: u64) -> Result<Reproduction> {
    let start = Instant::now();
    let inst = build_quantum(ex.theorem, &ex.input, false)?;
    let report = verify_quantum(&inst, 0, budget)?;
    let computed = report.computed.map(|c| c.to_string()).unwrap_or_default();
    let status = if !report.verified {
        "FAILED"
    } else if computed == ex.listed {
        "ok"
    } else if ex.subscript_typo && strip_subscript(&computed) == strip_subscript(ex.listed) {
        "paper-typo"
    } else {
        "FAILED"
    };
    let mut notes: Vec<String> = inst.violated.iter().map(|v| format!("hypothesis not met: {v}")).collect();
    notes.extend(report.params.reasons.iter().cloned());
    if computed != ex.listed && !computed.is_empty() {
        notes.push(format!("listed as {}", ex.listed));
    }
    Ok(Reproduction { instance: inst, report, status, notes, elapsed_ms: start.elapsed().as_millis() })
}

fn reproduce(a: ReproduceArgs, out: &mut dyn Write) -> CmdResult {
    let wanted = |id: &str| match a.example {
        Example::All => true,
        Example::VA => id == "v-a",
        Example::VB => id == "v-b",
        Example::VC => id == "v-c",
        Example::ViB => id == "vi-b",
        Example::ViC => id == "vi-c",
    };
    let mut rows = Vec::new();
    for ex in reference_examples().into_iter().filter(|e| wanted(e.id)) {
        let r = reproduce_example(&ex, a.budget.budget)?;
        rows.push((ex, r));
    }
    let all_ok = rows.iter().all(|(_, r)| r.status != "FAILED");
    if a.json {
        let views: Vec<_> = rows
            .iter()
            .map(|(ex, r)| {
                serde_json::json!({
                    "example": ex.id,
                    "listed": ex.listed,
                    "status": r.status,
                    "notes": r.notes,
                    "report": quantum_view(&r.instance, &r.report, false, a.timing.then_some(r.elapsed_ms)),
                })
            })
            .collect();
        emit(&pretty(&views), None, out)?;
    } else {
        let mut text = format!("{:<6} {:<8} {:<24} {:<24} {}", "id", "theorem", "listed", "computed", "status");
        if a.timing {
            text.push_str("  time");
        }
        for (ex, r) in &rows {
            let computed = r.report.computed.map(|c| c.to_string()).unwrap_or_else(|| "unsettled".into());
            text.push_str(&format!("\n{:<6} {:<8} {:<24} {:<24} {}", ex.id, ex.theorem.tag(), ex.listed, computed, r.status));
            if a.timing {
                text.push_str(&format!("  {} ms", r.elapsed_ms));
            }
        }
        for (ex, r) in &rows {
            for n in &r.notes {
                text.push_str(&format!("\n  {}: {n}", ex.id));
            }
        }
        emit(&text, None, out)?;
    }
    Ok(if all_ok { 0 } else { 1 })
}

#[derive(Serialize)]
struct MatrixReport {
    schema: &'static str,
    kind: &'static str,
    #[serde(rename = "type")]
    kind_name: &'static str,
    #[serde(rename = "N")]
    big_n: usize,
    q: u32,
    duality: &'static str,
    matrix: MatDoc,
    /// 1-based image of τ.
    tau: Vec<usize>,
    tau_cycles: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<MatDoc>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    l: Option<MatDoc>,
}

fn matrix(a: MatrixArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    debug_assert!(a.tau_od);
    let report = match a.kind {
        MatrixType::Two => {
            let (m, tau) = type_two_matrix(a.q, a.big_n)?;
            MatrixReport {
                schema: SCHEMA,
                kind: "tau-od-matrix",
                kind_name: "II",
                big_n: a.big_n,
                q: a.q,
                duality: Duality::Hermitian.as_str(),
                matrix: MatDoc::from_mat(&m),
                tau: tau.one_based(),
                tau_cycles: tau.to_string(),
                base: None,
                l: None,
            }
        }
        MatrixType::One => {
            let (base, tr) = type_one_matrix(a.q, a.big_n)?;
            MatrixReport {
                schema: SCHEMA,
                kind: "tau-od-matrix",
                kind_name: "I",
                big_n: a.big_n,
                q: a.q,
                duality: Duality::Euclidean.as_str(),
                matrix: MatDoc::from_mat(&tr.transformed),
                tau: tr.tau.one_based(),
                tau_cycles: tr.tau.to_string(),
                base: Some(MatDoc::from_mat(&base)),
                l: Some(MatDoc::from_mat(&tr.l)),
            }
        }
    };
    emit(&pretty(&report), a.out.as_deref(), out)?;
    let _ = writeln!(err, "τ = {}", report.tau_cycles);
    Ok(0)
}
