use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use orbindex::groups::{parse_permutation_text, WallpaperKind};
use orbindex::index_engine::{decompose, evaluate, Decomposition};
use orbindex::strata::{catalog, catalog_ids, instantiate, ManifoldModel, ModelId, Operator, SpinLift, StrataFile, Twist};
use orbindex::suite::{run_criterion, CRITERIA};
use orbindex::{Error, GroupModel, Representation};

// Output goes through these so a closed pipe ends the process quietly.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

const EXIT_MISMATCH: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_USAGE: u8 = 64;
const DEFAULT_MAX_ORDER: u64 = 360;

#[derive(Parser)]
#[command(name = "orbindex", version, about = "Exact equivariant and orbifold index computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the model catalog, or dump one model's fixed-point data
    Models {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Inspect a group: element classes, cyclic-subgroup classes, rotation centers
    Group(GroupArgs),
    /// Evaluate an index and check it against the oracle
    Compute {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value = "none")]
        twist: String,
        #[arg(long, default_value = "trivial")]
        rho: String,
        #[arg(long, value_enum, default_value_t = GroupingArg::Cyclic)]
        grouping: GroupingArg,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Per-subgroup classes of the operator and the reconstruction check
    Decompose {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Run the verification suite
    Verify {
        #[arg(long, value_parser = ["catalog"])]
        suite: String,
        /// Run a single criterion (1-8)
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        criterion: Option<u8>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// football, torusrot, symprod_s2 or wallpaper
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    /// p1, p2, p3, p4 or p6
    #[arg(long)]
    wallpaper: Option<String>,
    /// Custom strata file (JSON, as printed by `models --format json`)
    #[arg(long, conflicts_with_all = ["model", "n", "wallpaper"])]
    model_file: Option<PathBuf>,
}

#[derive(Args)]
struct OperatorArgs {
    #[arg(long, value_parser = ["derham", "dolbeault", "spin"])]
    operator: String,
    #[arg(long, value_enum)]
    lift: Option<LiftArg>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct GroupSource {
    #[arg(long)]
    wallpaper: Option<String>,
    #[arg(long)]
    cyclic: Option<usize>,
    /// Generator permutations, one per line as 0-based images
    #[arg(long)]
    perm_file: Option<PathBuf>,
}

#[derive(Args)]
struct GroupArgs {
    #[command(flatten)]
    source: GroupSource,
    #[arg(long)]
    classes: bool,
    #[arg(long)]
    cyclic_classes: bool,
    #[arg(long)]
    signature: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupingArg {
    Elements,
    Cyclic,
}

#[derive(Clone, Copy, ValueEnum)]
enum LiftArg {
    Plus,
    Minus,
}

/// Failure of a command, already mapped to an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_verification_failure() { EXIT_MISMATCH } else { EXIT_INVALID };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

fn max_order() -> Result<u64, Failure> {
    match std::env::var("ORBINDEX_MAX_ORDER") {
        Ok(v) => v
            .trim()
            .parse()
            .ok()
            .filter(|&n: &u64| n >= 1)
            .ok_or_else(|| invalid(format!("ORBINDEX_MAX_ORDER must be a positive integer, got '{v}'"))),
        Err(_) => Ok(DEFAULT_MAX_ORDER),
    }
}

fn model_id(args: &ModelArgs) -> Result<Option<ModelId>, Failure> {
    let family = match (&args.model, &args.wallpaper) {
        (None, None) => {
            if args.n.is_some() {
                return Err(invalid("--n needs --model"));
            }
            return Ok(None);
        }
        (None, Some(_)) => "wallpaper",
        (Some(m), _) => m.as_str(),
    };
    let need_n = || args.n.ok_or_else(|| invalid(format!("--model {family} needs --n")));
    let id = match family {
        "football" => ModelId::Football(need_n()?),
        "torusrot" => ModelId::TorusRot(need_n()?),
        "symprod_s2" => ModelId::SymProdS2,
        "wallpaper" => {
            let name = args.wallpaper.as_deref().ok_or_else(|| invalid("--model wallpaper needs --wallpaper"))?;
            ModelId::Wallpaper(WallpaperKind::parse(name)?)
        }
        other => return Err(invalid(format!("unknown model family '{other}'"))),
    };
    if matches!(id, ModelId::TorusRot(1)) {
        return Err(invalid("torusrot(1) is not in the catalog"));
    }
    Ok(Some(id))
}

fn load_model(args: &ModelArgs) -> Result<Option<ManifoldModel>, Failure> {
    if let Some(path) = &args.model_file {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let file: StrataFile =
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        return Ok(Some(ManifoldModel::from_strata_file(&file)?));
    }
    match model_id(args)? {
        Some(id) => Ok(Some(instantiate(&id)?)),
        None => Ok(None),
    }
}

fn require_model(args: &ModelArgs) -> Result<ManifoldModel, Failure> {
    load_model(args)?.ok_or_else(|| invalid("a model is required (--model or --model-file)"))
}

fn operator(args: &OperatorArgs) -> Result<Operator, Failure> {
    let lift = args.lift.map(|l| match l {
        LiftArg::Plus => SpinLift::Plus,
        LiftArg::Minus => SpinLift::Minus,
    });
    if lift.is_some() && args.operator != "spin" {
        return Err(invalid("--lift only applies to --operator spin"));
    }
    Ok(Operator::parse(&args.operator, lift)?)
}

fn check_order(model: &ManifoldModel, op: Operator) -> Result<(), Failure> {
    let cap = max_order()?;
    let needed = model.required_order(op);
    if needed > cap {
        return Err(invalid(format!("{} needs cyclotomic order {needed}, above ORBINDEX_MAX_ORDER = {cap}", model.id)));
    }
    Ok(())
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn cmd_models(args: &ModelArgs, format: Format) -> Result<u8, Failure> {
    match load_model(args)? {
        None => match format {
            Format::Json => {
                let ids: Vec<String> = catalog_ids().iter().map(|i| i.to_string()).collect();
                print_json(&json!({ "families": catalog(), "models": ids }));
            }
            Format::Human => {
                for d in catalog() {
                    outln!("{:<11} dim {}  {}", d.family, d.dimension, d.params);
                    outln!("{:<11} operators: {}; twists: {}", "", d.operators, d.twists);
                }
            }
        },
        Some(model) => match format {
            Format::Json => print_json(&serde_json::to_value(model.to_strata_file()?).expect("strata serialize")),
            Format::Human => out!("{}", model.dump()),
        },
    }
    Ok(0)
}

fn cmd_group(args: &GroupArgs) -> Result<u8, Failure> {
    let src = &args.source;
    let group = if let Some(name) = &src.wallpaper {
        GroupModel::wallpaper(WallpaperKind::parse(name)?)?
    } else if let Some(n) = src.cyclic {
        GroupModel::cyclic(n)?
    } else {
        let path = src.perm_file.as_ref().expect("clap enforces one source");
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        GroupModel::finite(parse_permutation_text(&text)?)
    };
    let show_all = !(args.classes || args.cyclic_classes || args.signature);
    let mut out = serde_json::Map::new();
    out.insert("group".into(), json!(group.to_string()));
    out.insert("order".into(), json!(group.element_order(&group.identity()).map(|_| match &group {
        GroupModel::Finite(g) => Some(g.order()),
        GroupModel::Wallpaper(_) => None,
    })));
    if args.classes || show_all {
        let classes: Vec<Value> = group
            .finite_order_classes()
            .iter()
            .map(|c| json!({ "rep": group.label(&c.rep), "order": c.order, "size": c.size }))
            .collect();
        out.insert("classes".into(), Value::Array(classes));
    }
    if args.cyclic_classes || show_all {
        let classes: Vec<Value> = group
            .cyclic_subgroup_classes()
            .iter()
            .map(|c| {
                json!({
                    "label": c.label,
                    "order": c.order,
                    "generator": group.label(&c.generator),
                    "centralizer_order": c.centralizer.order(),
                    "weyl_orbits": c.weyl_orbits.iter().map(|o| o.powers.clone()).collect::<Vec<_>>(),
                    "element_classes": c.element_classes.len(),
                })
            })
            .collect();
        out.insert("cyclic_classes".into(), Value::Array(classes));
    }
    if args.signature || (show_all && matches!(group, GroupModel::Wallpaper(_))) {
        match &group {
            GroupModel::Wallpaper(w) => {
                out.insert("signature".into(), json!(w.rotation_signature()));
            }
            GroupModel::Finite(_) => return Err(invalid("--signature needs a wallpaper group")),
        }
    }
    match args.format {
        Format::Json => print_json(&Value::Object(out)),
        Format::Human => print_group_human(&out),
    }
    Ok(0)
}

fn print_group_human(out: &serde_json::Map<String, Value>) {
    outln!("{}", out["group"].as_str().unwrap_or_default());
    if let Some(Value::Array(classes)) = out.get("classes") {
        outln!("finite-order element classes: {}", classes.len());
        for c in classes {
            let size = match &c["size"] {
                Value::Null => "infinite".to_string(),
                s => s.to_string(),
            };
            outln!("  {:<24} order {:<3} size {}", c["rep"].as_str().unwrap_or_default(), c["order"], size);
        }
    }
    if let Some(Value::Array(classes)) = out.get("cyclic_classes") {
        outln!("cyclic-subgroup classes: {}", classes.len());
        for c in classes {
            outln!(
                "  {:<24} order {:<3} generator {:<16} Weyl orbits {}",
                c["label"].as_str().unwrap_or_default(),
                c["order"],
                c["generator"].as_str().unwrap_or_default(),
                c["weyl_orbits"]
            );
        }
    }
    if let Some(sig) = out.get("signature") {
        outln!("rotation signature: {sig}");
    }
}

struct ComputeArgs<'a> {
    model: &'a ModelArgs,
    op: &'a OperatorArgs,
    twist: &'a str,
    rho: &'a str,
    grouping: GroupingArg,
    format: Format,
}

fn cmd_compute(a: ComputeArgs) -> Result<u8, Failure> {
    let model = require_model(a.model)?;
    let op = operator(a.op)?;
    check_order(&model, op)?;
    let twist = Twist::parse(a.twist)?;
    let rho = Representation::parse(a.rho)?;
    let e = evaluate(&model, op, &twist, &rho)?;
    let report = match a.grouping {
        GroupingArg::Elements => &e.by_elements,
        GroupingArg::Cyclic => &e.by_cyclic,
    };
    match a.format {
        Format::Json => outln!("{}", report.to_json()),
        Format::Human => out!("{}", report.render_human()),
    }
    Ok(if e.is_ok() { 0 } else { EXIT_MISMATCH })
}

fn decomposition_json(model: &ManifoldModel, op: Operator, d: &Decomposition) -> Value {
    let classes: Vec<Value> = d
        .classes
        .iter()
        .map(|u| {
            let functionals: serde_json::Map<String, Value> = u
                .functionals
                .iter()
                .map(|(k, fs)| {
                    let comps: Vec<Value> = u
                        .components
                        .iter()
                        .zip(fs)
                        .map(|(name, f)| {
                            let values: serde_json::Map<String, Value> = f
                                .iter()
                                .map(|(m, v)| (format!("{m:?}"), json!(v.to_string())))
                                .collect();
                            json!({ "component": name, "values": values })
                        })
                        .collect();
                    (k.to_string(), Value::Array(comps))
                })
                .collect();
            json!({
                "class": u.label,
                "order": u.order,
                "weyl_equivariant": u.is_weyl_equivariant(),
                "functionals": functionals,
            })
        })
        .collect();
    json!({
        "model": model.id.to_string(),
        "operator": op.to_string(),
        "classes": classes,
        "family": d.family.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "representations": d.representations,
        "rows": d.rows,
        "columns": d.columns,
        "rank": d.rank,
        "separating": d.separating,
        "verdict": "ok",
    })
}

fn cmd_decompose(model: &ModelArgs, op: &OperatorArgs, format: Format) -> Result<u8, Failure> {
    let model = require_model(model)?;
    let op = operator(op)?;
    check_order(&model, op)?;
    let d = decompose(&model, op)?;
    match format {
        Format::Json => print_json(&decomposition_json(&model, op, &d)),
        Format::Human => {
            outln!("model {}  operator {op}", model.id);
            for u in &d.classes {
                out!("{}", u.dump());
            }
            outln!("{}", d.verdict());
        }
    }
    Ok(0)
}

fn cmd_verify(criterion: Option<u8>) -> Result<u8, Failure> {
    let ids: Vec<u8> = match criterion {
        Some(c) => vec![c],
        None => CRITERIA.iter().map(|(id, _)| *id).collect(),
    };
    let mut failed = false;
    for id in ids {
        let outcome = run_criterion(id).expect("criterion ids are 1-8");
        outln!("{outcome}");
        for f in outcome.failures.iter().skip(1) {
            outln!("    {f}");
        }
        failed |= !outcome.passed();
    }
    Ok(if failed { EXIT_MISMATCH } else { 0 })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Models { model, format } => cmd_models(model, *format),
        Command::Group(args) => cmd_group(args),
        Command::Compute { model, op, twist, rho, grouping, format } => cmd_compute(ComputeArgs {
            model,
            op,
            twist,
            rho,
            grouping: *grouping,
            format: *format,
        }),
        Command::Decompose { model, op, format } => cmd_decompose(model, op, *format),
        Command::Verify { suite: _, criterion } => cmd_verify(*criterion),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
