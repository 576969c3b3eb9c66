//! `dyadic`: norms, profiles, example generators and claim verification from
//! the command line.
//!
//! Options come from an optional flat `key = value` config file, overridden
//! by flags. The merged configuration is echoed into every output.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use dyadic_core::claims::{verify_claim, ClaimId, Verdict};
use dyadic_core::examples::{make_example, natural_norm, natural_window, ExampleId, ExampleSpec, Params};
use dyadic_core::function::{read_function, write_function};
use dyadic_core::halfspace::{continuous_weak_norm_bounds_with, primitive_profile, SampleOptions};
use dyadic_core::norms::{garo_dyadic, jnp_dyadic, jnp_global, lp_norm, op_norm, profile_norm, weak_lp_norm};
use dyadic_core::profile::build_profile;
use dyadic_core::report;
use dyadic_core::{DyadicCube, DyadicMeasure, Error, Field, Kind, LevelWindow, ProfileParams, ShiftedLatticeFamily, StepFunction};
use rayon::prelude::*;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dyadic", version, about = "Dyadic weak-type norms, profiles and claim checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute one norm of a function file or generated example (JSON).
    Norm(Opts),
    /// Breakpoint table of λ ↦ λ^p W(λ) (CSV), optionally plotted (SVG).
    Profile(Opts),
    /// Run claims and sweep items; exits 1 on any inconsistent verdict.
    Verify(Opts),
    /// Write a generated example as a function file.
    Example(Opts),
    /// Norm of an example across values of one parameter (CSV).
    Sweep(Opts),
}

#[derive(Args, Default)]
#[command(allow_negative_numbers = true)]
struct Opts {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (1 gives byte-identical runs).
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    seed: Option<String>,

    /// Example family E0..E6.
    #[arg(long)]
    example: Option<String>,
    /// Function file.
    #[arg(long)]
    file: Option<String>,
    /// Treat the file as the derivative g of F = ∫g and measure F (1-D, osc, γ1 = 0, γ2 = p).
    #[arg(long)]
    primitive: bool,
    #[arg(long = "N")]
    big_n: Option<String>,
    #[arg(long = "K")]
    big_k: Option<String>,
    #[arg(long = "D")]
    big_d: Option<String>,
    #[arg(long = "M")]
    big_m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Oscillating variant index of E3.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    nk: Option<String>,
    #[arg(long)]
    sep: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    grade: Option<String>,
    #[arg(long)]
    tilde: bool,

    #[arg(long)]
    p: Option<String>,
    /// Sets both exponents.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    gamma1: Option<String>,
    #[arg(long)]
    gamma2: Option<String>,
    /// mean or osc.
    #[arg(long)]
    kind: Option<String>,
    /// op, lp, weak, jn, garo or halfspace.
    #[arg(long)]
    norm: Option<String>,
    /// Comma list of lebesgue, ahlfors=d, doubling=c.
    #[arg(long)]
    measure: Option<String>,
    /// Level window `kmin:kmax`; either side may be empty.
    #[arg(long)]
    window: Option<String>,
    /// Restrict to subcubes of this cube, e.g. `L0:k0:(0)`.
    #[arg(long)]
    within: Option<String>,
    /// Accept results computed on a truncated window.
    #[arg(long)]
    allow_truncation: bool,

    /// Output file (default stdout).
    #[arg(long)]
    out: Option<String>,
    /// CSV side output.
    #[arg(long)]
    csv: Option<String>,
    /// SVG side output.
    #[arg(long)]
    svg: Option<String>,
    #[arg(long)]
    periods: Option<String>,
    #[arg(long)]
    max_rows: Option<String>,

    /// Claims to run (comma list of 1..4 and sweep names), `claims`, `suite` or `all`.
    #[arg(long)]
    claims: Option<String>,
    /// Claim parameter `key=value`, passed to every selected claim that takes it.
    #[arg(long = "set")]
    set: Vec<String>,
    /// Directory for per-claim CSV and SVG files.
    #[arg(long)]
    report_dir: Option<String>,

    /// Parameter varied by `sweep`.
    #[arg(long)]
    param: Option<String>,
    /// Comma list of values for `sweep`.
    #[arg(long)]
    values: Option<String>,
}

impl Opts {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, x: &Option<String>| {
            if let Some(x) = x {
                v.push((k, x.clone()));
            }
        };
        put("threads", &self.threads);
        put("seed", &self.seed);
        put("example", &self.example);
        put("file", &self.file);
        put("N", &self.big_n);
        put("K", &self.big_k);
        put("D", &self.big_d);
        put("M", &self.big_m);
        put("n", &self.n);
        put("alpha", &self.alpha);
        put("k", &self.k);
        put("nk", &self.nk);
        put("sep", &self.sep);
        put("depth", &self.depth);
        put("grade", &self.grade);
        put("p", &self.p);
        put("gamma", &self.gamma);
        put("gamma1", &self.gamma1);
        put("gamma2", &self.gamma2);
        put("kind", &self.kind);
        put("norm", &self.norm);
        put("measure", &self.measure);
        put("window", &self.window);
        put("within", &self.within);
        put("out", &self.out);
        put("csv", &self.csv);
        put("svg", &self.svg);
        put("periods", &self.periods);
        put("max_rows", &self.max_rows);
        put("claims", &self.claims);
        put("report_dir", &self.report_dir);
        put("param", &self.param);
        put("values", &self.values);
        for (k, on) in [("primitive", self.primitive), ("tilde", self.tilde), ("allow_truncation", self.allow_truncation)] {
            if on {
                v.push((k, "true".into()));
            }
        }
        if !self.set.is_empty() {
            v.push(("set", self.set.join(";")));
        }
        v
    }
}

const EXAMPLE_KEYS: [&str; 14] = ["N", "K", "D", "M", "n", "alpha", "k", "nk", "sep", "depth", "grade", "tilde", "p", "gamma"];
const INPUT_KEYS: [&str; 3] = ["example", "file", "primitive"];
const NORM_KEYS: [&str; 9] = ["p", "gamma", "gamma1", "gamma2", "kind", "norm", "measure", "window", "within"];

/// Validated, merged configuration.
struct RunConfig {
    command: &'static str,
    map: BTreeMap<String, String>,
}

impl RunConfig {
    fn load(command: &'static str, opts: &Opts) -> anyhow::Result<RunConfig> {
        let mut map = BTreeMap::new();
        if let Some(path) = &opts.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Parameter(format!("config line {}: expected key = value", i + 1)))?;
                map.insert(k.trim().replace('-', "_"), v.trim().to_string());
            }
        }
        for (k, v) in opts.flags() {
            map.insert(k.to_string(), v);
        }
        let allowed: Vec<&str> = ["threads", "seed"]
            .into_iter()
            .chain(match command {
                "norm" => INPUT_KEYS.iter().chain(EXAMPLE_KEYS.iter()).chain(NORM_KEYS.iter()).chain(["allow_truncation", "out", "csv", "svg"].iter()).copied().collect::<Vec<_>>(),
                "profile" => INPUT_KEYS.iter().chain(EXAMPLE_KEYS.iter()).chain(NORM_KEYS.iter()).chain(["allow_truncation", "out", "svg", "periods", "max_rows"].iter()).copied().collect(),
                "verify" => vec!["claims", "set", "out", "report_dir"],
                "example" => ["example", "out"].iter().chain(EXAMPLE_KEYS.iter()).copied().collect(),
                _ => ["example", "param", "values", "out", "allow_truncation"].iter().chain(EXAMPLE_KEYS.iter()).chain(NORM_KEYS.iter().filter(|k| **k != "norm")).copied().collect(),
            })
            .collect();
        for k in map.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Parameter(format!("option '{k}' does not apply to {command}")).into());
            }
        }
        let cfg = RunConfig { command, map };
        if let Some(t) = cfg.get("threads") {
            let t: usize = t.parse().map_err(|_| Error::Parameter(format!("threads must be a positive integer, got '{t}'")))?;
            if t == 0 {
                return Err(Error::Parameter("threads must be positive".into()).into());
            }
            // Fails only if a pool already exists, which never happens here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        Ok(cfg)
    }

    fn get(&self, k: &str) -> Option<&str> {
        self.map.get(k).map(String::as_str)
    }

    fn flag(&self, k: &str) -> anyhow::Result<bool> {
        match self.get(k) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(Error::Parameter(format!("{k} must be true or false, got '{v}'")).into()),
        }
    }

    fn f64(&self, k: &str) -> anyhow::Result<Option<f64>> {
        self.get(k)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Parameter(format!("cannot parse {k}={v}")).into()))
            .transpose()
    }

    fn usize(&self, k: &str, default: usize) -> anyhow::Result<usize> {
        match self.get(k) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Parameter(format!("cannot parse {k}={v}")).into()),
        }
    }

    fn echo(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.into()));
        for (k, v) in &self.map {
            m.insert(k.clone(), Value::String(v.clone()));
        }
        Value::Object(m)
    }

    fn header(&self, comment: &str) -> String {
        let mut s = format!("{comment} dyadic {}\n", self.command);
        for (k, v) in &self.map {
            s.push_str(&format!("{comment} {k} = {v}\n"));
        }
        s
    }

    fn example_params(&self) -> Params {
        let mut p = Params::new();
        for k in EXAMPLE_KEYS.iter().chain(["seed"].iter()) {
            if let Some(v) = self.get(k) {
                p.insert(k, v);
            }
        }
        p
    }
}

fn parse_measure(s: &str) -> anyhow::Result<DyadicMeasure> {
    let mut mu = DyadicMeasure::lebesgue();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let bad = || Error::Parameter(format!("bad measure component '{part}' (lebesgue, ahlfors=d, doubling=c)"));
        match part.split_once('=') {
            None if part == "lebesgue" => {}
            Some(("ahlfors", v)) => mu = mu.with_ahlfors(v.trim().parse().map_err(|_| bad())?),
            Some(("doubling", v)) => mu = mu.with_doubling(v.trim().parse().map_err(|_| bad())?),
            _ => return Err(bad().into()),
        }
    }
    Ok(mu)
}

fn parse_window(cfg: &RunConfig, default: LevelWindow) -> anyhow::Result<LevelWindow> {
    let mut w = match cfg.get("window") {
        None => default,
        Some(s) => {
            let (a, b) = s.split_once(':').ok_or_else(|| Error::Parameter(format!("window must be kmin:kmax, got '{s}'")))?;
            let side = |t: &str, d: i32| -> anyhow::Result<i32> {
                if t.trim().is_empty() {
                    Ok(d)
                } else {
                    t.trim().parse().map_err(|_| Error::Parameter(format!("bad window bound '{t}'")).into())
                }
            };
            let mut w = LevelWindow::levels(side(a, i32::MIN)?, side(b, i32::MAX)?)?;
            w.within = default.within;
            w
        }
    };
    if let Some(c) = cfg.get("within") {
        w.within = Some(c.parse::<DyadicCube>()?);
    }
    Ok(w)
}

/// Function plus defaults implied by the input (generated example or file).
struct Input {
    f: StepFunction,
    measure: String,
    spec: Option<ExampleSpec>,
}

fn load_input(cfg: &RunConfig) -> anyhow::Result<Input> {
    match (cfg.get("example"), cfg.get("file")) {
        (Some(_), Some(_)) => Err(Error::Parameter("give either example or file, not both".into()).into()),
        (Some(e), None) => {
            let id: ExampleId = e.parse()?;
            let spec = ExampleSpec::from_params(id, &cfg.example_params())?;
            Ok(Input { f: make_example(&spec)?, measure: "lebesgue".into(), spec: Some(spec) })
        }
        (None, Some(path)) => {
            for k in EXAMPLE_KEYS.iter().filter(|k| !["p", "gamma", "n"].contains(k)) {
                if cfg.get(k).is_some() {
                    return Err(Error::Parameter(format!("option '{k}' only applies to examples")).into());
                }
            }
            let text = std::fs::read_to_string(path).with_context(|| format!("reading function file {path}"))?;
            let ff = read_function(&text)?;
            Ok(Input { f: ff.function, measure: ff.measure, spec: None })
        }
        (None, None) => Err(Error::Parameter("an input is required: --example or --file".into()).into()),
    }
}

/// `(kind, γ1, γ2, p)` from flags, falling back to the example's natural norm.
fn norm_params(cfg: &RunConfig, input: &Input) -> anyhow::Result<(Kind, f64, f64, f64)> {
    let nat = input.spec.as_ref().map(natural_norm);
    let kind = match cfg.get("kind") {
        Some(k) => Kind::parse(k)?,
        None => nat.map_or(Kind::Mean, |n| n.0),
    };
    let p = match cfg.f64("p")? {
        Some(p) => p,
        None => nat.map(|n| n.3).ok_or_else(|| Error::Parameter("p is required for function files".into()))?,
    };
    let g = cfg.f64("gamma")?;
    let g1 = cfg.f64("gamma1")?.or(g).or(nat.map(|n| n.1));
    let g2 = cfg.f64("gamma2")?.or(g).or(nat.map(|n| n.2));
    match (g1, g2) {
        (Some(a), Some(b)) => Ok((kind, a, b, p)),
        _ => Err(Error::Parameter("gamma (or gamma1 and gamma2) is required for function files".into()).into()),
    }
}

fn measure_of(cfg: &RunConfig, input: &Input) -> anyhow::Result<DyadicMeasure> {
    parse_measure(cfg.get("measure").unwrap_or(&input.measure))
}

fn default_window(input: &Input) -> LevelWindow {
    input.spec.as_ref().map_or_else(LevelWindow::full, natural_window)
}

fn write_out(path: Option<&str>, text: &str) -> anyhow::Result<()> {
    match path {
        None | Some("-") => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {p}")),
    }
}

fn truncation_gate(cfg: &RunConfig, truncated: bool, what: &str) -> anyhow::Result<()> {
    if truncated && !cfg.flag("allow_truncation")? {
        return Err(Error::Truncation(format!("{what} was computed on a truncated window; pass --allow-truncation to accept it")).into());
    }
    Ok(())
}

fn with_config(cfg: &RunConfig, key: &str, v: Value) -> Value {
    let mut m = Map::new();
    m.insert("config".into(), cfg.echo());
    m.insert(key.into(), v);
    Value::Object(m)
}

fn cmd_norm(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let input = load_input(cfg)?;
    let which = cfg.get("norm").unwrap_or("op");
    if cfg.flag("primitive")? {
        let (kind, g1, g2, p) = norm_params(cfg, &input)?;
        if kind != Kind::Osc || g1 != 0.0 || (g2 - p).abs() > 0.0 || which != "op" {
            return Err(Error::Parameter("primitive inputs support the op norm with kind osc, gamma1 = 0, gamma2 = p".into()).into());
        }
        let r = profile_norm(&primitive_profile(&input.f, p)?, p, "op_osc_primitive");
        write_out(cfg.get("out"), &report::to_text(&with_config(cfg, "result", report::norm_json(&r))))?;
        return Ok(ExitCode::SUCCESS);
    }
    let mu = measure_of(cfg, &input)?;
    let within = cfg.get("within").map(str::parse::<DyadicCube>).transpose()?;
    let r = match which {
        "op" => {
            let (kind, g1, g2, p) = norm_params(cfg, &input)?;
            op_norm(&input.f, &mu, p, g1, g2, kind, &parse_window(cfg, default_window(&input))?)?
        }
        "lp" | "weak" => {
            let p = cfg.f64("p")?.or(input.spec.as_ref().map(|s| s.p)).ok_or_else(|| Error::Parameter("p is required".into()))?;
            if which == "lp" {
                lp_norm(&input.f, &mu, p)?
            } else {
                weak_lp_norm(&input.f, &mu, p)?
            }
        }
        "jn" | "garo" => {
            let p = cfg.f64("p")?.or(input.spec.as_ref().map(|s| s.p)).ok_or_else(|| Error::Parameter("p is required".into()))?;
            match (which, within) {
                ("jn", None) => jnp_global(&input.f, p)?,
                ("jn", Some(q)) => jnp_dyadic(&input.f, &q, p)?,
                (_, q) => garo_dyadic(&input.f, &q.unwrap_or_else(|| input.f.root().clone()), p)?,
            }
        }
        "halfspace" => {
            let (kind, g1, g2, p) = norm_params(cfg, &input)?;
            if g1 != g2 {
                return Err(Error::Parameter("the half-space norm takes a single gamma".into()).into());
            }
            let keep = cfg.get("csv").is_some() || cfg.get("svg").is_some();
            let opts = SampleOptions { keep_samples: keep, ..SampleOptions::default() };
            let fam = ShiftedLatticeFamily::new(input.f.dim());
            let e = continuous_weak_norm_bounds_with(&input.f, &mu, p, g1, kind, &fam, &parse_window(cfg, LevelWindow::full())?, &opts)?;
            truncation_gate(cfg, !e.dyadic_complete, "the lattice bracket")?;
            if let Some(path) = cfg.get("csv") {
                write_out(Some(path), &(cfg.header("#") + &report::samples_csv(&e)))?;
            }
            if let Some(path) = cfg.get("svg") {
                write_out(Some(path), &report::samples_svg(&e, "ln a(x,t)"))?;
            }
            write_out(cfg.get("out"), &report::to_text(&with_config(cfg, "result", report::halfspace_json(&e))))?;
            return Ok(ExitCode::SUCCESS);
        }
        other => return Err(Error::Parameter(format!("unknown norm '{other}' (op, lp, weak, jn, garo, halfspace)")).into()),
    };
    truncation_gate(cfg, r.exactness == dyadic_core::Exactness::Truncated, &r.norm)?;
    if let Some(path) = cfg.get("csv") {
        write_out(Some(path), &(cfg.header("#") + &report::witness_csv(&r.witness)))?;
    }
    write_out(cfg.get("out"), &report::to_text(&with_config(cfg, "result", report::norm_json(&r))))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_profile(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let input = load_input(cfg)?;
    let (kind, g1, g2, p) = norm_params(cfg, &input)?;
    let prof = if cfg.flag("primitive")? {
        if kind != Kind::Osc || g1 != 0.0 || g2 != p {
            return Err(Error::Parameter("primitive inputs support kind osc, gamma1 = 0, gamma2 = p".into()).into());
        }
        primitive_profile(&input.f, p)?
    } else {
        let mu = measure_of(cfg, &input)?;
        let params = ProfileParams::new(g1, g2, p, kind)?;
        build_profile(&Field::new(&input.f, &mu)?, &params, &parse_window(cfg, default_window(&input))?)?
    };
    truncation_gate(cfg, !prof.complete, "the profile")?;
    let periods = cfg.usize("periods", 4)? as u32;
    let max_rows = cfg.usize("max_rows", 10_000)?;
    let mut text = cfg.header("#");
    if let Some(d) = &prof.divergence {
        text.push_str(&format!("# divergent: {}\n", d.reason));
    }
    text.push_str(&report::profile_csv(&prof, p, periods, max_rows));
    write_out(cfg.get("out"), &text)?;
    if let Some(path) = cfg.get("svg") {
        let svg = report::profile_svg(&prof, p, &format!("lambda^p W(lambda), p = {p}"));
        write_out(Some(path), &svg.replacen('\n', &format!("\n<!--\n{}-->\n", cfg.header(" ")), 1))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn selected_claims(cfg: &RunConfig) -> anyhow::Result<Vec<ClaimId>> {
    match cfg.get("claims").unwrap_or("all") {
        "all" => Ok(ClaimId::all()),
        "claims" => Ok(ClaimId::CLAIMS.to_vec()),
        "suite" => Ok(ClaimId::SUITE.to_vec()),
        list => list.split(',').map(|s| s.trim().parse::<ClaimId>().map_err(Into::into)).collect(),
    }
}

fn cmd_verify(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let ids = selected_claims(cfg)?;
    let mut sets: Vec<(String, String)> = Vec::new();
    for item in cfg.get("set").unwrap_or("").split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::Parameter(format!("--set expects key=value, got '{item}'")))?;
        let k = k.trim().to_string();
        if !ids.iter().any(|id| id.keys().contains(&k.as_str())) {
            return Err(Error::Parameter(format!("no selected claim takes parameter '{k}'")).into());
        }
        sets.push((k, v.trim().to_string()));
    }
    let seed = cfg.get("seed");
    let results: Vec<_> = ids
        .par_iter()
        .map(|&id| {
            let mut p = Params::new();
            if let (Some(s), true) = (seed, id.keys().contains(&"seed")) {
                p.insert("seed", s);
            }
            for (k, v) in sets.iter().filter(|(k, _)| id.keys().contains(&k.as_str())) {
                p.insert(k, v);
            }
            (id, verify_claim(id, &p))
        })
        .collect();
    let mut reports = Vec::new();
    for (id, r) in results {
        reports.push(r.map_err(|e| anyhow!(e).context(format!("claim {id}")))?);
    }
    if let Some(dir) = cfg.get("report_dir") {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {dir}"))?;
        for r in &reports {
            let base = Path::new(dir).join(format!("claim-{}", r.claim));
            std::fs::write(base.with_extension("csv"), cfg.header("#") + &report::claim_csv(r))?;
            std::fs::write(base.with_extension("svg"), report::claim_svg(r))?;
        }
    }
    let all_ok = reports.iter().all(|r| r.verdict() == Verdict::Consistent);
    let mut m = Map::new();
    m.insert("config".into(), cfg.echo());
    m.insert("reports".into(), Value::Array(reports.iter().map(report::claim_json).collect()));
    m.insert("verdict".into(), Value::String(if all_ok { "consistent" } else { "inconsistent" }.into()));
    write_out(cfg.get("out"), &report::to_text(&Value::Object(m)))?;
    for r in &reports {
        eprintln!("{:<28} {}", r.claim.name(), r.verdict().name());
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_example(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let id: ExampleId = cfg.get("example").ok_or_else(|| Error::Parameter("--example is required".into()))?.parse()?;
    let spec = ExampleSpec::from_params(id, &cfg.example_params())?;
    let f = make_example(&spec)?;
    write_out(cfg.get("out"), &(cfg.header("#") + &write_function(&f, "lebesgue")))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    let id: ExampleId = cfg.get("example").ok_or_else(|| Error::Parameter("--example is required".into()))?.parse()?;
    let key = cfg.get("param").unwrap_or(id.truncation_key()).to_string();
    if !EXAMPLE_KEYS.contains(&key.as_str()) {
        return Err(Error::Parameter(format!("cannot sweep '{key}' (one of {})", EXAMPLE_KEYS.join(", "))).into());
    }
    let values: Vec<String> = cfg
        .get("values")
        .ok_or_else(|| Error::Parameter("--values is required".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let rows: Vec<anyhow::Result<String>> = values
        .par_iter()
        .map(|v| {
            let mut p = cfg.example_params();
            p.insert(&key, v);
            let spec = ExampleSpec::from_params(id, &p)?;
            let f = make_example(&spec)?;
            let input = Input { f, measure: "lebesgue".into(), spec: Some(spec) };
            let (kind, g1, g2, pp) = norm_params(cfg, &input)?;
            let mu = measure_of(cfg, &input)?;
            let r = op_norm(&input.f, &mu, pp, g1, g2, kind, &parse_window(cfg, default_window(&input))?)?;
            truncation_gate(cfg, r.exactness == dyadic_core::Exactness::Truncated, &r.norm)?;
            let jn = if pp > 1.0 { jnp_global(&input.f, pp)?.value } else { f64::NAN };
            let lp = lp_norm(&input.f, &mu, pp)?.value;
            Ok(format!("{v},{},{},{},{},{}\n", report::float_text(r.value), r.exactness.name(), report::float_text(lp), report::float_text(jn), input.f.node_count()))
        })
        .collect();
    let mut text = cfg.header("#") + &format!("{key},norm,exactness,lp,jn,nodes\n");
    for r in rows {
        text.push_str(&r?);
    }
    write_out(cfg.get("out"), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Truncation(_)) => 3,
        _ => 2,
    }
}

type Runner = fn(&RunConfig) -> anyhow::Result<ExitCode>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts, run): (&'static str, &Opts, Runner) = match &cli.cmd {
        Cmd::Norm(o) => ("norm", o, cmd_norm),
        Cmd::Profile(o) => ("profile", o, cmd_profile),
        Cmd::Verify(o) => ("verify", o, cmd_verify),
        Cmd::Example(o) => ("example", o, cmd_example),
        Cmd::Sweep(o) => ("sweep", o, cmd_sweep),
    };
    match RunConfig::load(name, opts).and_then(|cfg| run(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
