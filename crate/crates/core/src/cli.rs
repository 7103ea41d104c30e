//! The `causal` command-line front-end. Parsing and dispatch live here so
//! the binary stays a thin wrapper and commands can be driven in-process.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::counterfactual::{evaluate_counterfactual, id_cf_with_cards, CfIdOptions, CfIdentification, CounterfactualTerms};
use crate::error::{invalid, Error, Result};
use crate::graph::{open_path, rootify, vset, Rootification};
use crate::identify::{c_component_expression, c_component_partition, EtaShape};
use crate::intervention::apply;
use crate::io::{ingest, read_json, AdmgFile, Bundle, ModelFile, QueryFile, Samples, TablesFile};
use crate::model::conditionally_independent;
use crate::semantics::Morphism;

#[derive(Debug, Parser)]
#[command(name = "causal", version, about = "Causal models as string diagrams: queries, identification, counterfactuals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the given files against their invariants
    Validate,
    /// Output distribution of the model (or of every variable with --full)
    Joint,
    /// d-separation query on the graph
    Dsep,
    /// Conditional-independence query on the model's output state
    Ci,
    /// Apply the query's interventions in order
    Intervene,
    /// Identify a single-variable intervention from observational data
    EffectId,
    /// Identify a counterfactual from interventional data
    CfId,
    /// Evaluate a counterfactual in an explicit functional model
    CfEval,
    /// DOT text for the graph (or the model's string diagram)
    ExportDot,
    /// Build data tables from CSV samples
    Ingest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootifyArg {
    Rho,
    RhoTilde,
}

impl From<RootifyArg> for Rootification {
    fn from(r: RootifyArg) -> Self {
        match r {
            RootifyArg::Rho => Rootification::Rho,
            RootifyArg::RhoTilde => Rootification::RhoTilde,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Bundle file; the other file flags override its parts
    #[arg(long, global = true)]
    pub bundle: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long, global = true)]
    pub admg: Option<PathBuf>,
    #[arg(long, global = true)]
    pub query: Option<PathBuf>,
    /// Data tables (JSON) for evaluation, or observational CSV samples for ingest
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Interventional CSV samples for ingest, as `X,Y:path`
    #[arg(long = "do-data", global = true)]
    pub do_data: Vec<String>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, value_enum, default_value_t = RootifyArg::RhoTilde)]
    pub rootify: RootifyArg,
    /// joint: every variable instead of the outputs
    #[arg(long, global = true)]
    pub full: bool,
    /// export-dot: draw the model's string diagram
    #[arg(long, global = true)]
    pub diagram: bool,
}

/// What a successful command prints and its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::UnknownName(_) => 2,
        Error::Budget(_) => 3,
        _ => 1,
    }
}

/// Machine-readable error report for stderr.
pub fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::Shape(_) => "shape",
        Error::Index(_) => "index",
        Error::UnknownName(_) => "unknown_name",
        Error::Invalid(_) => "invalid",
        Error::Cycle(_) => "cycle",
        Error::Budget(_) => "budget",
        Error::MissingInterpretation(_) => "missing_interpretation",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    };
    json!({ "error": kind, "message": e.to_string(), "exit_code": exit_code(e) }).to_string()
}

#[derive(Default)]
struct Inputs {
    name: String,
    model: Option<ModelFile>,
    admg: Option<AdmgFile>,
    query: Option<QueryFile>,
    tables: Option<TablesFile>,
}

impl Inputs {
    fn load(o: &Opts, tables_from_data: bool) -> Result<Self> {
        let mut i = Inputs { name: "G".into(), ..Default::default() };
        if let Some(p) = &o.bundle {
            let b: Bundle = read_json(p)?;
            i = Inputs { name: b.name, model: b.model, admg: b.admg, query: b.query, tables: b.tables };
        }
        if let Some(p) = &o.model {
            i.model = Some(read_json(p)?);
        }
        if let Some(p) = &o.admg {
            i.admg = Some(read_json(p)?);
        }
        if let Some(p) = &o.query {
            i.query = Some(read_json(p)?);
        }
        if tables_from_data {
            if let Some(p) = &o.data {
                i.tables = Some(read_json(p)?);
            }
        }
        Ok(i)
    }

    fn model(&self) -> Result<&ModelFile> {
        self.model.as_ref().ok_or_else(|| invalid("this command needs a model (--model or a bundle with one)"))
    }

    fn admg(&self) -> Result<&AdmgFile> {
        self.admg.as_ref().ok_or_else(|| invalid("this command needs an ADMG (--admg or a bundle with one)"))
    }

    fn query(&self) -> Result<&QueryFile> {
        self.query.as_ref().ok_or_else(|| invalid("this command needs a query (--query or a bundle with one)"))
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| invalid(e.to_string()))?;
    run(&cli)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let o = &cli.opts;
    if o.format == Format::Dot && cli.command != Command::ExportDot {
        return Err(invalid("--format dot only applies to export-dot"));
    }
    let inputs = Inputs::load(o, cli.command != Command::Ingest)?;
    match cli.command {
        Command::Validate => validate(&inputs, o),
        Command::Joint => joint(&inputs, o),
        Command::Dsep => dsep(&inputs, o),
        Command::Ci => ci(&inputs, o),
        Command::Intervene => intervene(&inputs, o),
        Command::EffectId => effect_id(&inputs, o),
        Command::CfId => cf_id(&inputs, o),
        Command::CfEval => cf_eval(&inputs, o),
        Command::ExportDot => export_dot(&inputs, o),
        Command::Ingest => ingest_cmd(&inputs, o),
    }
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// One line per nonzero-domain entry: `dom values | cod values, p`.
fn table_text(m: &Morphism) -> String {
    let mut s = String::new();
    let (dom, cod) = (m.dom(), m.cod());
    for d in 0..dom.size() {
        let dt = dom.tuple_of(d);
        for c in 0..cod.size() {
            let ct = cod.tuple_of(c);
            let lhs: Vec<String> = cod.atoms().iter().zip(&ct).map(|(a, v)| format!("{}={}", a.name, v)).collect();
            let rhs: Vec<String> = dom.atoms().iter().zip(&dt).map(|(a, v)| format!("{}={}", a.name, v)).collect();
            if rhs.is_empty() {
                let _ = writeln!(s, "{}  {}", lhs.join(" "), m.get(d, c));
            } else {
                let _ = writeln!(s, "{} | {}  {}", lhs.join(" "), rhs.join(" "), m.get(d, c));
            }
        }
    }
    s
}

fn table_csv(m: &Morphism) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = m.dom().names();
    header.extend(m.cod().names());
    header.push("p".into());
    w.write_record(&header)?;
    for d in 0..m.dom().size() {
        for c in 0..m.cod().size() {
            let mut rec: Vec<String> = m.dom().tuple_of(d).iter().map(|v| v.to_string()).collect();
            rec.extend(m.cod().tuple_of(c).iter().map(|v| v.to_string()));
            rec.push(m.get(d, c).to_string());
            w.write_record(&rec)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn emit_table(m: &Morphism, f: Format) -> Result<String> {
    match f {
        Format::Json => pretty(&serde_json::to_value(m)?),
        Format::Csv => table_csv(m),
        Format::Text => Ok(table_text(m)),
        Format::Dot => Err(invalid("tables have no DOT form")),
    }
}

fn emit_report(v: &Value, text: String, f: Format) -> Result<String> {
    match f {
        Format::Json => pretty(v),
        Format::Text => Ok(text),
        Format::Csv => Err(invalid("this command has no CSV form; use json or text")),
        Format::Dot => Err(invalid("this command has no DOT form")),
    }
}

fn query_names(q: &QueryFile) -> Vec<String> {
    match q {
        QueryFile::Dsep { y, z, w } => y.iter().chain(z).chain(w).cloned().collect(),
        QueryFile::Ci { x, y, z } => x.iter().chain(y).chain(z).cloned().collect(),
        QueryFile::Intervene(list) => list.iter().map(intervention_var).collect(),
        QueryFile::EffectId { x, context, condition_on, .. } => std::iter::once(x).chain(context).chain(condition_on).cloned().collect(),
        QueryFile::Cf(t) | QueryFile::CfEval(t) => {
            t.worlds.iter().flat_map(|w| w.do_.keys().chain(w.cond.keys()).chain(&w.outputs).cloned().collect::<Vec<_>>()).collect()
        }
    }
}

fn intervention_var(s: &crate::intervention::Intervention) -> String {
    use crate::intervention::Intervention as I;
    match s {
        I::Do { var, .. } | I::Break { var, .. } | I::Cut { var } | I::Local { var, .. } | I::WideLocal { var, .. } | I::Trim { var } | I::Pad { var, .. } => var.clone(),
        I::Rewire { phi, .. } => phi.keys().next().cloned().unwrap_or_default(),
    }
}

fn validate(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let mut checked = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    let mut names: Option<BTreeMap<String, usize>> = None;
    if let Some(m) = &i.model {
        checked.push("model");
        let v = m.violations(o.tol);
        if v.is_empty() {
            if let Err(e) = m.to_model() {
                violations.push(format!("model: {}", e));
            }
        }
        violations.extend(v.into_iter().map(|s| format!("model: {}", s)));
        names = Some(m.cards());
    }
    if let Some(a) = &i.admg {
        checked.push("admg");
        if let Err(e) = a.to_admg() {
            violations.push(format!("admg: {}", e));
        }
        names.get_or_insert_with(|| a.cards());
    }
    if let Some(q) = &i.query {
        checked.push("query");
        if let Some(cards) = &names {
            for n in query_names(q) {
                if !cards.contains_key(&n) {
                    violations.push(format!("query: unknown variable `{}`", n));
                }
            }
            if let QueryFile::Cf(t) | QueryFile::CfEval(t) = q {
                if let Err(e) = t.check(cards) {
                    violations.push(format!("query: {}", e));
                }
            }
        }
    }
    if let Some(t) = &i.tables {
        checked.push("tables");
        if let Err(e) = t.to_tables() {
            violations.push(format!("tables: {}", e));
        }
    }
    if checked.is_empty() {
        return Err(invalid("nothing to validate: pass --bundle, --model, --admg, --query or --data"));
    }
    let ok = violations.is_empty();
    let v = json!({ "ok": ok, "checked": checked, "violations": violations });
    let text = if ok { format!("ok ({})\n", checked.join(", ")) } else { violations.iter().map(|s| format!("{}\n", s)).collect() };
    Ok(Outcome { stdout: emit_report(&v, text, o.format)?, code: if ok { 0 } else { 1 } })
}

fn joint(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let m = i.model()?.to_model()?;
    let m = if o.full || m.outputs().is_empty() { m.maximal() } else { m };
    Ok(Outcome::ok(emit_table(&m.channel_of()?, o.format)?))
}

fn dsep(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let QueryFile::Dsep { y, z, w } = i.query()? else { return Err(invalid("dsep needs a `dsep` query")) };
    let dag = match (&i.admg, &i.model) {
        (Some(a), _) => rootify(&a.to_admg()?, Rootification::Rho)?.dag,
        (None, Some(m)) => m.to_model()?.dag(),
        _ => return Err(invalid("dsep needs an ADMG or a model")),
    };
    let path = open_path(&dag, &vset(y), &vset(z), &vset(w))?;
    let v = json!({ "separated": path.is_none(), "open_path": path });
    let text = match &path {
        None => "separated\n".to_string(),
        Some(p) => format!("connected via {}\n", p.join(" - ")),
    };
    Ok(Outcome::ok(emit_report(&v, text, o.format)?))
}

fn ci(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let QueryFile::Ci { x, y, z } = i.query()? else { return Err(invalid("ci needs a `ci` query")) };
    let m = i.model()?.to_model()?;
    let mut keep: Vec<String> = x.iter().chain(y).chain(z).cloned().collect();
    keep.sort();
    keep.dedup();
    let state = m.maximal().output_state()?.marginalize(&keep)?;
    let independent = conditionally_independent(&state, x, y, z, o.tol)?;
    let separated = crate::graph::d_separated(&m.dag(), &vset(x), &vset(y), &vset(z))?;
    let v = json!({ "independent": independent, "d_separated": separated, "tol": o.tol });
    let text = format!("{} (d-separated: {})\n", if independent { "independent" } else { "dependent" }, separated);
    Ok(Outcome::ok(emit_report(&v, text, o.format)?))
}

fn intervene(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let QueryFile::Intervene(list) = i.query()? else { return Err(invalid("intervene needs an `intervene` query")) };
    let mut m = i.model()?.to_model()?;
    for s in list {
        m = apply(&m, s)?;
    }
    let dist = m.channel_of()?;
    let out = match o.format {
        Format::Json => pretty(&json!({ "model": ModelFile::from_model(&m), "distribution": dist }))?,
        f => emit_table(&dist, f)?,
    };
    Ok(Outcome::ok(out))
}

fn effect_id(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let QueryFile::EffectId { x, value, context, eta, condition_on } = i.query()? else {
        return Err(invalid("effect-id needs an `effect_id` query"));
    };
    let file = i.admg()?;
    let admg = file.to_admg()?;
    let cards = file.cards();
    let shape = match (value, eta) {
        (Some(v), None) => EtaShape::Do { value: *v },
        (None, Some(e)) => EtaShape::General { context: context.clone(), eta: e.clone() },
        _ => return Err(invalid("effect_id needs exactly one of `value` and `eta`")),
    };
    let Some(p) = c_component_partition(&admg, x)? else {
        let v = json!({ "status": "undecided", "x": x });
        return Ok(Outcome::ok(emit_report(&v, "undecided\n".into(), o.format)?));
    };
    let mut expr = c_component_expression(&p, &shape, &cards)?;
    if !condition_on.is_empty() {
        expr = expr.conditional(condition_on);
    }
    let value = match &i.tables {
        Some(t) => Some(expr.evaluate(&t.to_tables()?)?),
        None => None,
    };
    let mut v = json!({ "status": "identified", "partition": p, "pretty": expr.to_string(), "expression": expr });
    if let Some(val) = &value {
        v["value"] = serde_json::to_value(val)?;
    }
    let mut text = format!("{}\n", expr);
    if let Some(val) = &value {
        text.push_str(&table_text(val));
    }
    Ok(Outcome::ok(emit_report(&v, text, o.format)?))
}

fn terms_of(q: &QueryFile) -> Result<&CounterfactualTerms> {
    match q {
        QueryFile::Cf(t) | QueryFile::CfEval(t) => Ok(t),
        _ => Err(invalid("this command needs a `cf` or `cf_eval` query")),
    }
}

fn cf_id(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let terms = terms_of(i.query()?)?;
    let file = i.admg()?;
    let opts = CfIdOptions { rootification: o.rootify.into(), seed: o.seed };
    let res = id_cf_with_cards(&file.to_admg()?, terms, &file.cards(), &opts)?;
    let (v, text) = match &res {
        CfIdentification::Identified { expression, .. } => {
            let mut v = json!({ "status": "identifiable", "pretty": expression.to_string(), "expression": expression });
            let mut text = format!("identifiable\n{}\n", expression);
            if let Some(t) = &i.tables {
                let val = expression.evaluate(&t.to_tables()?)?;
                v["value"] = serde_json::to_value(&val)?;
                text.push_str(&table_text(&val));
            }
            (v, text)
        }
        CfIdentification::Fail { reason, detail } => {
            let v = json!({ "status": "fail", "reason": reason, "detail": detail });
            let r = serde_json::to_value(reason)?;
            (v, format!("FAIL {}: {}\n", r.as_str().unwrap_or_default(), detail))
        }
    };
    Ok(Outcome::ok(emit_report(&v, text, o.format)?))
}

fn cf_eval(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let terms = terms_of(i.query()?)?;
    let fcm = i.model()?.to_fcm()?;
    Ok(Outcome::ok(emit_table(&evaluate_counterfactual(&fcm, terms)?, o.format)?))
}

fn export_dot(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let name = &i.name;
    let text = match (&i.admg, &i.model) {
        (Some(a), _) if !o.diagram => a.to_admg()?.to_dot(name),
        (_, Some(m)) => {
            let m = m.to_model()?;
            if o.diagram {
                m.diagram().to_dot()
            } else {
                m.dag().to_dot(name)
            }
        }
        _ => return Err(invalid("export-dot needs an ADMG or a model")),
    };
    Ok(Outcome::ok(text))
}

fn ingest_cmd(i: &Inputs, o: &Opts) -> Result<Outcome> {
    let path = o.data.as_ref().ok_or_else(|| invalid("ingest needs --data with observational samples"))?;
    let obs = Samples::from_path(path)?;
    let mut per_do = Vec::new();
    for spec in &o.do_data {
        let (vars, p) = spec.split_once(':').ok_or_else(|| invalid(format!("--do-data `{}` is not VARS:PATH", spec)))?;
        let vars: Vec<String> = vars.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        per_do.push((vars, Samples::from_path(p)?));
    }
    // a model's unobserved variables have no column, so only its outputs count
    let cards = i.admg.as_ref().map(|a| a.cards()).or_else(|| {
        i.model.as_ref().map(|m| m.cards().into_iter().filter(|(k, _)| m.outputs.contains(k)).collect())
    });
    let t = ingest(&obs, &per_do, cards.as_ref())?;
    Ok(Outcome::ok(pretty(&serde_json::to_value(TablesFile::from_tables(&t))?)?))
}
