use clap::{Parser, Subcommand, ValueEnum};
use polyres::branchings::critical_nfold;
use polyres::presentation::{validate_file, CategoryTable, PresentationFile};
use polyres::rewriting::{check_termination, RewriteTrace, Verdict};
use polyres::*;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polyres", version, about = "Rewriting, polygraphic resolutions and their chain complexes")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for verification.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the typing invariants of a presentation file.
    Validate { file: PathBuf },
    /// Normal form of a word.
    Nf {
        file: PathBuf,
        word: String,
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether two words are equal in the presented category.
    Eq { file: PathBuf, w1: String, w2: String },
    /// Termination and confluence report.
    Check { file: PathBuf },
    /// Reduce a convergent presentation.
    Reduce {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Critical branchings of a given order.
    Branchings {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Build the resolution up to a dimension.
    Resolve {
        file: PathBuf,
        #[arg(long)]
        dim: usize,
    },
    /// Homological syzygy generators in a degree.
    Syzygies {
        file: PathBuf,
        #[arg(long)]
        dim: usize,
    },
    /// Check the chain complex and its contracting homotopy.
    Verify {
        file: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        context_len: usize,
    },
    /// Write a builtin presentation: `as`, `epi:M` or `monoid:TABLEFILE`.
    Builtin {
        kind: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

/// A finished command: text or JSON payload plus exit code.
struct Outcome {
    text: String,
    json: String,
    code: u8,
}

impl Outcome {
    fn new(text: String, json: impl Serialize, ok: bool) -> Outcome {
        let json = serde_json::to_string_pretty(&json).expect("serialisable");
        Outcome { text, json, code: if ok { 0 } else { 1 } }
    }
}

/// Input and usage failures exit 2, failed analyses exit 1.
fn exit_code(e: &PolyError) -> u8 {
    match e {
        PolyError::Syntax(_)
        | PolyError::Typing(_)
        | PolyError::MismatchedEndpoints(_)
        | PolyError::NonAssociativeTable(_)
        | PolyError::InvalidTruncation(_)
        | PolyError::DegreeOutOfRange(_) => 2,
        _ => 1,
    }
}

type Out<T> = std::result::Result<T, Failure>;

struct Failure {
    message: String,
    code: u8,
}

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Failure {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { message: message.into(), code: 2 }
}

fn read(path: &PathBuf) -> Out<String> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Out<Polygraph> {
    Ok(parse_polygraph(&read(path)?)?)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Out<String> {
    match out {
        Some(path) => {
            fs::write(path, content).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?;
            Ok(format!("wrote {}", path.display()))
        }
        None => Ok(content.trim_end().to_string()),
    }
}

#[derive(Serialize)]
struct StepJson {
    rule: String,
    position: usize,
    step: String,
    target: String,
}

fn trace_json(p: &Polygraph, t: &RewriteTrace) -> Vec<StepJson> {
    t.steps
        .iter()
        .map(|s| StepJson {
            rule: p.rule(s.rule).name.clone(),
            position: s.position(),
            step: s.render(p),
            target: p.render_word(&s.target(p)),
        })
        .collect()
}

fn cmd_validate(file: &PathBuf) -> Out<Outcome> {
    let parsed: PresentationFile =
        serde_json::from_str(&read(file)?).map_err(|e| input_error(format!("syntax error: {e}")))?;
    let diagnostics = validate_file(&parsed);
    let text = if diagnostics.is_empty() {
        "valid".to_string()
    } else {
        diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
    };
    #[derive(Serialize)]
    struct Report {
        valid: bool,
        diagnostics: Vec<polyres::presentation::Diagnostic>,
    }
    let ok = diagnostics.is_empty();
    Ok(Outcome::new(text, Report { valid: ok, diagnostics }, ok))
}

fn cmd_nf(file: &PathBuf, word: &str, side: SideArg, trace: bool) -> Out<Outcome> {
    let p = load(file)?;
    let w = p.parse_word(word)?;
    let side = match side {
        SideArg::Left => Side::Leftmost,
        SideArg::Right => Side::Rightmost,
    };
    let (nf, t) = normal_form(&p, &w, side)?;
    let mut text = p.render_word(&nf);
    if trace {
        for s in &t.steps {
            text.push_str(&format!("\n  {} ⇒ {}", s.render(&p), p.render_path(&s.target(&p))));
        }
    }
    #[derive(Serialize)]
    struct Report {
        word: String,
        side: Side,
        normal_form: String,
        steps: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        trace: Option<Vec<StepJson>>,
    }
    let report = Report {
        word: p.render_word(&w),
        side,
        normal_form: p.render_word(&nf),
        steps: t.steps.len(),
        trace: trace.then(|| trace_json(&p, &t)),
    };
    Ok(Outcome::new(text, report, true))
}

fn cmd_eq(file: &PathBuf, w1: &str, w2: &str) -> Out<Outcome> {
    let p = load(file)?;
    let (u, v) = (p.parse_word(w1)?, p.parse_word(w2)?);
    let equal = word_problem(&p, &u, &v)?;
    #[derive(Serialize)]
    struct Report {
        left: String,
        right: String,
        equal: bool,
    }
    let report = Report { left: p.render_word(&u), right: p.render_word(&v), equal };
    Ok(Outcome::new(equal.to_string(), report, equal))
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Proved => "proved",
        Verdict::Assumed => "assumed",
        Verdict::Refuted(_) => "refuted",
        Verdict::Unknown => "unknown",
    }
}

fn cmd_check(file: &PathBuf) -> Out<Outcome> {
    let p = load(file)?;
    let term = check_termination(&p);
    #[derive(Serialize)]
    struct TerminationJson {
        method: Option<String>,
        verdict: &'static str,
        detail: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        loop_witness: Option<Vec<StepJson>>,
    }
    #[derive(Serialize)]
    struct JoinJson {
        source: String,
        legs: [String; 2],
        normal_forms: [String; 2],
        joins: bool,
    }
    #[derive(Serialize)]
    struct Report {
        termination: TerminationJson,
        confluent: Option<bool>,
        branchings: Vec<JoinJson>,
    }
    let termination = TerminationJson {
        method: term.method.map(|m| format!("{m:?}").to_lowercase()),
        verdict: verdict_name(&term.verdict),
        detail: term.detail.clone(),
        loop_witness: match &term.verdict {
            Verdict::Refuted(t) => Some(trace_json(&p, t)),
            _ => None,
        },
    };
    let mut text = format!("termination: {} ({})", termination.verdict, termination.detail);
    if !term.usable() {
        let report = Report { termination, confluent: None, branchings: Vec::new() };
        return Ok(Outcome::new(text, report, false));
    }
    let conf = check_confluence(&p)?;
    let branchings: Vec<JoinJson> = conf
        .branchings
        .iter()
        .map(|b| JoinJson {
            source: p.render_word(&b.source),
            legs: [b.legs.0.render(&p), b.legs.1.render(&p)],
            normal_forms: [p.render_word(&b.normal_forms.0), p.render_word(&b.normal_forms.1)],
            joins: b.joins,
        })
        .collect();
    text.push_str(&format!(
        "\nconfluence: {} ({} critical branchings)",
        if conf.confluent { "confluent" } else { "not confluent" },
        branchings.len()
    ));
    for b in branchings.iter().filter(|b| !b.joins) {
        text.push_str(&format!(
            "\n  {}: {} and {} give {} and {}",
            b.source, b.legs[0], b.legs[1], b.normal_forms[0], b.normal_forms[1]
        ));
    }
    let ok = conf.confluent;
    Ok(Outcome::new(text, Report { termination, confluent: Some(ok), branchings }, ok))
}

fn cmd_reduce(file: &PathBuf, out: &Option<PathBuf>) -> Out<Outcome> {
    let p = load(file)?;
    let r = reduce(&p)?;
    let doc = r.to_json();
    let text = write_or_print(out, &doc)?;
    Ok(Outcome { text, json: doc.trim_end().to_string(), code: 0 })
}

fn cmd_branchings(file: &PathBuf, order: usize) -> Out<Outcome> {
    let p = load(file)?;
    let list = critical_nfold(&p, order)?;
    #[derive(Serialize)]
    struct BranchingJson {
        source: String,
        steps: Vec<String>,
        rules: Vec<String>,
        positions: Vec<usize>,
    }
    let out: Vec<BranchingJson> = list
        .iter()
        .map(|b| BranchingJson {
            source: p.render_word(&b.source),
            steps: b.steps.iter().map(|s| s.render(&p)).collect(),
            rules: b.steps.iter().map(|s| p.rule(s.rule).name.clone()).collect(),
            positions: b.steps.iter().map(|s| s.position()).collect(),
        })
        .collect();
    let mut text = format!("{} critical branchings of order {order}", out.len());
    for b in &out {
        text.push_str(&format!("\n  {}: {}", b.source, b.steps.join(", ")));
    }
    #[derive(Serialize)]
    struct Report {
        order: usize,
        count: usize,
        branchings: Vec<BranchingJson>,
    }
    Ok(Outcome::new(text, Report { order, count: out.len(), branchings: out }, true))
}

fn cmd_resolve(file: &PathBuf, dim: usize) -> Out<Outcome> {
    let p = load(file)?;
    let r = build_resolution(&p, dim)?;
    let counts = r.counts();
    let cells: Vec<_> = (3..=dim).flat_map(|d| r.report(d)).collect();
    let mut text = format!("dim 2: {}", p.rules().len());
    for c in &counts {
        text.push_str(&format!("\ndim {}: {}", c.dim, c.count));
    }
    for c in &cells {
        text.push_str(&format!("\n{}\n  source: {}\n  target: {}", c.name, c.source, c.target));
    }
    #[derive(Serialize)]
    struct Report {
        counts: Vec<polyres::resolution::CellCount>,
        cells: Vec<polyres::resolution::CellReport>,
    }
    Ok(Outcome::new(text, Report { counts, cells }, true))
}

fn cmd_syzygies(file: &PathBuf, dim: usize) -> Out<Outcome> {
    let p = load(file)?;
    if dim < 2 {
        return Err(input_error("syzygies start in degree 2"));
    }
    let r = build_resolution(&p, dim + 1)?;
    let gens = syzygy_generators(&r, dim)?;
    let text = if gens.is_empty() {
        "none".to_string()
    } else {
        gens.iter().map(|(n, x)| format!("δ[{n}] = {}", x.render(&p))).collect::<Vec<_>>().join("\n")
    };
    #[derive(Serialize)]
    struct Entry {
        cell: String,
        rendered: String,
        element: polyres::homology::NatElemJson,
    }
    let json: Vec<Entry> = gens
        .iter()
        .map(|(n, x)| Entry { cell: n.clone(), rendered: x.render(&p), element: x.to_json(&p) })
        .collect();
    Ok(Outcome::new(text, json, true))
}

fn cmd_verify(file: &PathBuf, dim: usize, context_len: usize, jobs: Option<usize>) -> Out<Outcome> {
    let p = load(file)?;
    let r = build_resolution(&p, dim)?;
    let report = verify_complex(&r, dim, context_len, jobs)?;
    let mut lines = Vec::new();
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        lines.push(format!("{status} {} degree {}: {}/{} failed", c.name, c.degree, c.failed, c.total));
        for w in &c.witnesses {
            lines.push(format!("  {w}"));
        }
    }
    lines.push(if report.passed() { "all checks passed".into() } else { "verification failed".into() });
    let ok = report.passed();
    Ok(Outcome::new(lines.join("\n"), report, ok))
}

fn parse_builtin(kind: &str) -> Out<Polygraph> {
    if kind == "as" {
        return Ok(builtin(&Builtin::As)?);
    }
    if let Some(m) = kind.strip_prefix("epi:") {
        let m: usize = m.parse().map_err(|_| input_error(format!("bad level in `{kind}`")))?;
        return Ok(builtin(&Builtin::Epi(m))?);
    }
    if let Some(path) = kind.strip_prefix("monoid:") {
        let table: CategoryTable = serde_json::from_str(&read(&PathBuf::from(path))?)
            .map_err(|e| input_error(format!("syntax error in table: {e}")))?;
        return Ok(builtin(&Builtin::ReducedStandard(table))?);
    }
    Err(input_error(format!("unknown builtin `{kind}`; expected as, epi:M or monoid:TABLEFILE")))
}

fn cmd_builtin(kind: &str, out: &Option<PathBuf>) -> Out<Outcome> {
    let p = parse_builtin(kind)?;
    let doc = p.to_json();
    let text = write_or_print(out, &doc)?;
    Ok(Outcome { text, json: doc.trim_end().to_string(), code: 0 })
}

fn run(cli: &Cli) -> Out<Outcome> {
    match &cli.cmd {
        Cmd::Validate { file } => cmd_validate(file),
        Cmd::Nf { file, word, side, trace } => cmd_nf(file, word, *side, *trace),
        Cmd::Eq { file, w1, w2 } => cmd_eq(file, w1, w2),
        Cmd::Check { file } => cmd_check(file),
        Cmd::Reduce { file, out } => cmd_reduce(file, out),
        Cmd::Branchings { file, order } => cmd_branchings(file, *order),
        Cmd::Resolve { file, dim } => cmd_resolve(file, *dim),
        Cmd::Syzygies { file, dim } => cmd_syzygies(file, *dim),
        Cmd::Verify { file, dim, context_len } => cmd_verify(file, *dim, *context_len, cli.jobs),
        Cmd::Builtin { kind, out } => cmd_builtin(kind, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(o) => {
            let body = if cli.json { &o.json } else { &o.text };
            let _ = writeln!(std::io::stdout(), "{body}");
            ExitCode::from(o.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message.lines().next().unwrap_or(""));
            ExitCode::from(f.code)
        }
    }
}
