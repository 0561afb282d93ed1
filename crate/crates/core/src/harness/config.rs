//! Flat dotted-key experiment configuration.
//!
//! One `section.key = value` per line; `#` starts a comment. Parsing collects
//! every problem in the document before reporting.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use super::presets::{KernelChoice, Preset, PRESET_IDS};
use crate::grid::{GridSpec, MultiIndex};
use crate::operators::{ASpec, ATerm, Classification, TermKind, VSpec};
use crate::splitting::{Method, SplitConfig};
use crate::subflows::{BFlowControl, BlowupThreshold};

pub const REQUIRED_KEYS: [&str; 5] = ["equation.preset", "grid.n", "split.method", "split.dt", "split.T"];

const OPTIONAL_KEYS: [&str; 25] = [
    "equation.alpha",
    "equation.beta",
    "equation.kernel",
    "equation.a",
    "equation.v",
    "grid.dims",
    "init.kind",
    "init.seed",
    "init.decay",
    "init.zero_mean",
    "init.value",
    "init.path",
    "split.record_every",
    "bflow.substep_cap",
    "bflow.max_substeps",
    "bflow.guard_factor",
    "bflow.guard_absolute",
    "bflow.guard_index",
    "study.dt_count",
    "study.refinement",
    "study.norms",
    "study.methods",
    "admit.trials",
    "admit.seed",
    "output.dir",
];

/// One problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Every problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} problems)", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Equation {
    Preset(Preset),
    /// Explicit `A` and `v` from `equation.a` / `equation.v`.
    Custom { a: ASpec, v: VSpec },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `sin x₁`.
    SinX,
    /// `sin x₁ + cos 2x_dims`.
    TwoMode,
    Constant(f64),
    Random { seed: u64, decay: f64, zero_mean: bool },
    Snapshot(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyParams {
    /// Study steps are `split.dt / 2^j`, `j = 0 … dt_count − 1`.
    pub dt_count: usize,
    pub refinement: u32,
    pub norms: Vec<f64>,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmitParams {
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub equation: Equation,
    /// Preset id, or `custom`.
    pub preset_id: String,
    pub grid: GridSpec,
    pub init: InitialCondition,
    pub split: SplitConfig,
    pub study: StudyParams,
    pub admit: AdmitParams,
    pub output_dir: Option<PathBuf>,
    /// Accepted but questionable settings.
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    /// Replaces every seed in the configuration.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let InitialCondition::Random { seed: s, .. } = &mut self.init {
            *s = seed;
        }
        self.admit.seed = seed;
        self
    }

    /// The step sizes of a `study` run.
    pub fn study_dts(&self) -> Vec<f64> {
        (0..self.study.dt_count)
            .map(|j| self.split.dt / 2f64.powi(j as i32))
            .collect()
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Doc {
    entries: BTreeMap<String, Entry>,
    issues: Vec<ConfigIssue>,
}

impl Doc {
    fn issue(&mut self, line: Option<usize>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn raw(&self, key: &str) -> Option<(String, usize)> {
        self.entries.get(key).map(|e| (e.value.clone(), e.line))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let (value, line) = self.raw(key)?;
        match value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.issue(Some(line), format!("{key}: expected {what}, got `{value}`"));
                None
            }
        }
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        let v: f64 = self.parsed(key, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            let line = self.line_of(key);
            self.issue(line, format!("{key}: value must be finite"));
            None
        }
    }

    fn bool(&mut self, key: &str) -> Option<bool> {
        self.parsed(key, "true or false")
    }
}

fn split_document(text: &str) -> Doc {
    let mut doc = Doc {
        entries: BTreeMap::new(),
        issues: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            doc.issue(Some(line), format!("expected `section.key = value`, got `{content}`"));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if key.split('.').count() != 2 || key.split('.').any(|p| p.is_empty()) {
            doc.issue(Some(line), format!("key `{key}` is not of the form section.key"));
            continue;
        }
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            doc.issue(Some(line), format!("unknown key `{key}`"));
            continue;
        }
        if value.is_empty() {
            doc.issue(Some(line), format!("{key}: missing value"));
            continue;
        }
        if let Some(prev) = doc.entries.get(key) {
            let first = prev.line;
            doc.issue(Some(line), format!("duplicate key `{key}` (first set on line {first})"));
            continue;
        }
        doc.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    doc
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut doc = split_document(text);

    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .copied()
        .filter(|k| !doc.entries.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        let msg = format!("missing required keys: {}", missing.join(", "));
        doc.issue(None, msg);
    }

    let mut warnings = Vec::new();
    let equation = parse_equation(&mut doc, &mut warnings);

    // grid
    let n: Option<usize> = doc.parsed("grid.n", "a positive integer");
    let dims_given: Option<usize> = doc.parsed("grid.dims", "1, 2 or 3");
    let dims = dims_given.or_else(|| equation.as_ref().map(default_dims));
    let mut grid = None;
    if let (Some(n), Some(dims)) = (n, dims) {
        match GridSpec::new(dims, n) {
            Ok(g) => grid = Some(g),
            Err(e) => {
                let line = if dims_given.is_some() && !(1..=3).contains(&dims) {
                    doc.line_of("grid.dims")
                } else {
                    doc.line_of("grid.n")
                };
                doc.issue(line, e.to_string());
            }
        }
    }
    if let (Some(eq), Some(dims)) = (&equation, dims) {
        if (1..=3).contains(&dims) {
            if let Err(msg) = check_equation_dims(eq, dims) {
                let line = doc.line_of("grid.dims").or(doc.line_of("equation.preset"));
                doc.issue(line, msg);
            }
        }
    }

    let init = parse_init(&mut doc);

    // split
    let method = doc.raw("split.method").and_then(|(v, line)| match v.parse::<Method>() {
        Ok(m) => Some(m),
        Err(_) => {
            doc.issue(Some(line), format!("split.method: expected godunov or strang, got `{v}`"));
            None
        }
    });
    let dt = doc.float("split.dt");
    let horizon = doc.float("split.T");
    let record_every: usize = doc.parsed("split.record_every", "a positive integer").unwrap_or(1);
    if record_every == 0 {
        let line = doc.line_of("split.record_every");
        doc.issue(line, "split.record_every must be >= 1");
    }
    if let Some(dt) = dt {
        if !(dt > 0.0) {
            let line = doc.line_of("split.dt");
            doc.issue(line, format!("split.dt must be > 0, got {dt}"));
        }
    }
    if let Some(t) = horizon {
        if !(t > 0.0) {
            let line = doc.line_of("split.T");
            doc.issue(line, format!("split.T must be > 0, got {t}"));
        }
    }
    if let (Some(dt), Some(t)) = (dt, horizon) {
        if dt > 0.0 && t > 0.0 && dt > t * (1.0 + 1e-12) {
            let line = doc.line_of("split.dt");
            doc.issue(line, format!("split.dt = {dt} exceeds split.T = {t}"));
        }
    }

    let bflow = parse_bflow(&mut doc);
    let study = parse_study(&mut doc, method);
    let admit = AdmitParams {
        trials: doc.parsed("admit.trials", "a positive integer").unwrap_or(50),
        seed: doc.parsed("admit.seed", "an unsigned integer").unwrap_or(7),
    };
    if admit.trials == 0 {
        let line = doc.line_of("admit.trials");
        doc.issue(line, "admit.trials must be >= 1");
    }
    let output_dir = doc.raw("output.dir").map(|(v, _)| PathBuf::from(v));

    if !doc.issues.is_empty() {
        doc.issues.sort_by_key(|i| i.line.unwrap_or(0));
        return Err(ConfigError { issues: doc.issues });
    }
    let (equation, grid, method, dt, horizon, init, study) = match (equation, grid, method, dt, horizon, init, study) {
        (Some(e), Some(g), Some(m), Some(dt), Some(t), Some(i), Some(s)) => (e, g, m, dt, t, i, s),
        _ => unreachable!("every missing piece records an issue"),
    };
    let (a, v, preset_id) = match &equation {
        Equation::Preset(p) => (
            p.a_spec().expect("preset parameters validated"),
            p.v_spec(),
            p.id().to_string(),
        ),
        Equation::Custom { a, v } => (a.clone(), v.clone(), "custom".to_string()),
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ExperimentConfig {
        equation,
        preset_id,
        grid,
        init,
        split: SplitConfig {
            method,
            dt,
            horizon,
            a,
            v,
            bflow: bflow.unwrap_or_default(),
            record_every,
        },
        study,
        admit,
        output_dir,
        warnings,
    })
}

fn default_dims(eq: &Equation) -> usize {
    match eq {
        Equation::Preset(p) => p.default_dims(),
        Equation::Custom { a, v } => a.dims().unwrap_or(match v {
            VSpec::Burgers { .. } => 1,
            _ => 2,
        }),
    }
}

fn check_equation_dims(eq: &Equation, dims: usize) -> Result<(), String> {
    match eq {
        Equation::Preset(p) => p.check_dims(dims),
        Equation::Custom { a, v } => {
            if let Some(d) = a.dims() {
                if d != dims {
                    return Err(format!("equation.a uses {d}-entry multi-indices but dims = {dims}"));
                }
            }
            let ok = match v {
                VSpec::Burgers { .. } => dims == 1,
                VSpec::Sqg { .. } => dims == 2,
                VSpec::Convolution(_) => dims >= 2,
                VSpec::Custom(_) => true,
            };
            if ok {
                Ok(())
            } else {
                Err(format!("equation.v = {} is not available with dims = {dims}", v.describe()))
            }
        }
    }
}

fn parse_equation(doc: &mut Doc, warnings: &mut Vec<String>) -> Option<Equation> {
    let (id, line) = doc.raw("equation.preset")?;
    let alpha = doc.float("equation.alpha");
    let beta = doc.float("equation.beta");
    let kernel = match doc.raw("equation.kernel") {
        None => Some(KernelChoice::Gaussian),
        Some((k, l)) => {
            let parsed = KernelChoice::parse(&k);
            if parsed.is_none() {
                doc.issue(Some(l), format!("equation.kernel: expected gaussian or exp, got `{k}`"));
            }
            parsed
        }
    };
    let custom_only = ["equation.a", "equation.v"];
    let preset = match id.as_str() {
        "kdv" => Some(Preset::Kdv),
        "kawahara" => Some(Preset::Kawahara),
        "viscous_burgers" => Some(Preset::ViscousBurgers {
            alpha: alpha.unwrap_or(2.0),
        }),
        "sqg" => Some(Preset::Sqg {
            alpha: alpha.unwrap_or(2.0),
            beta: beta.unwrap_or(2.0),
        }),
        "aggregation" => kernel.map(|kernel| Preset::Aggregation {
            alpha: alpha.unwrap_or(2.0),
            kernel,
        }),
        "custom" => {
            for key in ["equation.alpha", "equation.beta", "equation.kernel"] {
                if let Some(l) = doc.line_of(key) {
                    doc.issue(Some(l), format!("{key} applies to presets only; use equation.a / equation.v"));
                }
            }
            return parse_custom(doc, warnings);
        }
        other => {
            doc.issue(
                Some(line),
                format!(
                    "equation.preset: unknown preset `{other}` (expected one of {}, or custom)",
                    PRESET_IDS.join(", ")
                ),
            );
            return None;
        }
    };
    for key in custom_only {
        if let Some(l) = doc.line_of(key) {
            doc.issue(Some(l), format!("{key} requires equation.preset = custom"));
        }
    }
    let preset = preset?;
    let unused = |key: &str| match preset {
        Preset::Kdv | Preset::Kawahara => key != "equation.preset",
        Preset::ViscousBurgers { .. } => key == "equation.beta" || key == "equation.kernel",
        Preset::Sqg { .. } => key == "equation.kernel",
        Preset::Aggregation { .. } => key == "equation.beta",
    };
    for key in ["equation.alpha", "equation.beta", "equation.kernel"] {
        if unused(key) {
            if let Some(l) = doc.line_of(key) {
                doc.issue(Some(l), format!("{key} does not apply to preset {}", preset.id()));
            }
        }
    }
    if let Err(e) = preset.validate() {
        let l = doc.line_of("equation.alpha").or(doc.line_of("equation.beta")).or(Some(line));
        doc.issue(l, e.to_string());
        return None;
    }
    if let Preset::Aggregation {
        kernel: KernelChoice::Exp,
        ..
    } = preset
    {
        warnings.push(
            "aggregation with the exp kernel can collapse in finite time; expect the blow-up guard to trip".into(),
        );
    }
    Some(Equation::Preset(preset))
}

fn parse_custom(doc: &mut Doc, warnings: &mut Vec<String>) -> Option<Equation> {
    let a = match doc.raw("equation.a") {
        None => {
            let line = doc.line_of("equation.preset");
            doc.issue(line, "equation.preset = custom requires equation.a");
            None
        }
        Some((text, line)) => match parse_a(&text) {
            Ok(a) => Some(a),
            Err(msg) => {
                doc.issue(Some(line), format!("equation.a: {msg}"));
                None
            }
        },
    };
    let v = match doc.raw("equation.v") {
        None => {
            let line = doc.line_of("equation.preset");
            doc.issue(line, "equation.preset = custom requires equation.v");
            None
        }
        Some((text, line)) => match parse_v(&text) {
            Ok(v) => Some(v),
            Err(msg) => {
                doc.issue(Some(line), format!("equation.v: {msg}"));
                None
            }
        },
    };
    let (a, v) = (a?, v?);
    if a.classification() == Classification::Rejected {
        let line = doc.line_of("equation.a");
        doc.issue(
            line,
            format!("equation.a = {} has Re σ > 0 somewhere and is not admissible", a.describe()),
        );
        return None;
    }
    if matches!(v, VSpec::Burgers { .. }) {
        for t in a.terms() {
            if let TermKind::FractionalLaplacian { alpha } | TermKind::Mixed { alpha, .. } = t.kind {
                if alpha < 1.0 {
                    warnings.push(format!(
                        "fractional order {alpha} < 1 with Burgers velocity; well-posedness needs alpha >= 1"
                    ));
                }
            }
        }
    }
    Some(Equation::Custom { a, v })
}

/// Parses `c*D(l1,…)`, `c*L(α)` and `c*M(α|l1,…)` terms separated by `;`.
pub fn parse_a(text: &str) -> Result<ASpec, String> {
    let mut terms = Vec::new();
    for raw in text.split(';') {
        let term = raw.trim();
        if term.is_empty() {
            continue;
        }
        let (coef, body) = match term.split_once('*') {
            Some((c, b)) => (
                c.trim().parse::<f64>().map_err(|_| format!("bad coefficient in `{term}`"))?,
                b.trim(),
            ),
            None => (1.0, term),
        };
        let (head, args) = body
            .strip_suffix(')')
            .and_then(|b| b.split_once('('))
            .ok_or_else(|| format!("expected D(..), L(..) or M(..) in `{term}`"))?;
        let multi = |s: &str| -> Result<MultiIndex, String> {
            s.split(',')
                .map(|x| x.trim().parse::<u32>().map_err(|_| format!("bad multi-index in `{term}`")))
                .collect::<Result<Vec<_>, _>>()
                .map(MultiIndex::new)
        };
        let alpha = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad fractional order in `{term}`"));
        let kind = match head.trim() {
            "D" => TermKind::Derivative(multi(args)?),
            "L" => TermKind::FractionalLaplacian { alpha: alpha(args)? },
            "M" => {
                let (a, l) = args
                    .split_once('|')
                    .ok_or_else(|| format!("expected M(alpha|l1,..) in `{term}`"))?;
                TermKind::Mixed {
                    alpha: alpha(a)?,
                    l: multi(l)?,
                }
            }
            other => return Err(format!("unknown term type `{other}` in `{term}`")),
        };
        terms.push(ATerm::new(coef, kind));
    }
    if terms.is_empty() {
        return Err("no terms".into());
    }
    ASpec::new(terms).map_err(|e| e.to_string())
}

/// Parses `burgers(a)`, `sqg(beta)` or `aggregation(gaussian|exp)`.
pub fn parse_v(text: &str) -> Result<VSpec, String> {
    let t = text.trim();
    let (head, arg) = t
        .strip_suffix(')')
        .and_then(|b| b.split_once('('))
        .ok_or_else(|| format!("expected burgers(a), sqg(beta) or aggregation(kernel), got `{t}`"))?;
    let num = || arg.trim().parse::<f64>().map_err(|_| format!("bad number in `{t}`"));
    match head.trim() {
        "burgers" => Ok(VSpec::Burgers { a: num()? }),
        "sqg" => {
            let beta = num()?;
            if !(1.0..=2.0).contains(&beta) {
                return Err(format!("sqg beta must lie in [1, 2], got {beta}"));
            }
            Ok(VSpec::Sqg { beta })
        }
        "aggregation" => KernelChoice::parse(arg.trim())
            .map(|k| VSpec::Convolution(k.kernel()))
            .ok_or_else(|| format!("unknown kernel `{}`", arg.trim())),
        other => Err(format!("unknown velocity `{other}`")),
    }
}

fn parse_init(doc: &mut Doc) -> Option<InitialCondition> {
    let kind = doc.raw("init.kind").map(|(v, l)| (v, Some(l)));
    let (kind, line) = kind.unwrap_or_else(|| ("sin_x".into(), None));
    let seed: Option<u64> = doc.parsed("init.seed", "an unsigned integer");
    let decay = doc.float("init.decay");
    let zero_mean = doc.bool("init.zero_mean");
    let value = doc.float("init.value");
    let path = doc.raw("init.path").map(|(p, _)| PathBuf::from(p));
    let mut allowed: &[&str] = &[];
    let init = match kind.as_str() {
        "sin_x" => Some(InitialCondition::SinX),
        "two_mode" => Some(InitialCondition::TwoMode),
        "constant" => {
            allowed = &["init.value"];
            match value {
                Some(c) => Some(InitialCondition::Constant(c)),
                None => {
                    if doc.line_of("init.value").is_none() {
                        doc.issue(line, "init.kind = constant requires init.value");
                    }
                    None
                }
            }
        }
        "random" => {
            allowed = &["init.seed", "init.decay", "init.zero_mean"];
            let decay = decay.unwrap_or(6.0);
            if !(decay > 0.0) {
                let l = doc.line_of("init.decay");
                doc.issue(l, format!("init.decay must be > 0, got {decay}"));
            }
            Some(InitialCondition::Random {
                seed: seed.unwrap_or(0),
                decay,
                zero_mean: zero_mean.unwrap_or(false),
            })
        }
        "snapshot" => {
            allowed = &["init.path"];
            match path {
                Some(p) => Some(InitialCondition::Snapshot(p)),
                None => {
                    doc.issue(line, "init.kind = snapshot requires init.path");
                    None
                }
            }
        }
        other => {
            doc.issue(
                line,
                format!("init.kind: expected sin_x, two_mode, constant, random or snapshot, got `{other}`"),
            );
            return None;
        }
    };
    for key in ["init.seed", "init.decay", "init.zero_mean", "init.value", "init.path"] {
        if !allowed.contains(&key) {
            if let Some(l) = doc.line_of(key) {
                doc.issue(Some(l), format!("{key} does not apply to init.kind = {kind}"));
            }
        }
    }
    init
}

fn parse_bflow(doc: &mut Doc) -> Option<BFlowControl> {
    let defaults = BFlowControl::default();
    let cap = doc.float("bflow.substep_cap").unwrap_or(defaults.substep_cap);
    let max_substeps = doc
        .parsed("bflow.max_substeps", "a positive integer")
        .unwrap_or(defaults.max_substeps);
    let factor = doc.float("bflow.guard_factor");
    let absolute = doc.float("bflow.guard_absolute");
    let index = doc.float("bflow.guard_index").unwrap_or(defaults.guard_index);
    let blowup = match (factor, absolute) {
        (Some(_), Some(_)) => {
            let line = doc.line_of("bflow.guard_absolute");
            doc.issue(line, "set only one of bflow.guard_factor and bflow.guard_absolute");
            return None;
        }
        (Some(f), None) => BlowupThreshold::RelativeToInitial(f),
        (None, Some(a)) => BlowupThreshold::Absolute(a),
        (None, None) => defaults.blowup,
    };
    let ctrl = BFlowControl {
        substep_cap: cap,
        max_substeps,
        blowup,
        guard_index: index,
    };
    if let Err(e) = ctrl.validate() {
        let line = ["bflow.substep_cap", "bflow.max_substeps", "bflow.guard_factor", "bflow.guard_absolute", "bflow.guard_index"]
            .iter()
            .find_map(|k| doc.line_of(k));
        doc.issue(line, e.to_string());
        return None;
    }
    Some(ctrl)
}

fn parse_study(doc: &mut Doc, method: Option<Method>) -> Option<StudyParams> {
    let dt_count: usize = doc.parsed("study.dt_count", "a positive integer").unwrap_or(5);
    let refinement: u32 = doc.parsed("study.refinement", "a positive integer").unwrap_or(6);
    if dt_count < 3 {
        let line = doc.line_of("study.dt_count");
        doc.issue(line, format!("study.dt_count must be >= 3 for a rate fit, got {dt_count}"));
    }
    if refinement < 4 {
        let line = doc.line_of("study.refinement");
        doc.issue(line, format!("study.refinement must be >= 4, got {refinement}"));
    }
    let norms = match doc.raw("study.norms") {
        None => vec![0.0],
        Some((text, line)) => {
            let parsed: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) if !v.is_empty() && v.iter().all(|s| s.is_finite() && *s >= 0.0) => v,
                _ => {
                    doc.issue(
                        Some(line),
                        format!("study.norms: expected comma-separated indices >= 0, got `{text}`"),
                    );
                    return None;
                }
            }
        }
    };
    let methods = match doc.raw("study.methods") {
        None => vec![method?],
        Some((text, line)) => {
            let parsed: Result<Vec<Method>, _> = text.split(',').map(|s| s.trim().parse::<Method>()).collect();
            match parsed {
                Ok(v) if !v.is_empty() => v,
                _ => {
                    doc.issue(
                        Some(line),
                        format!("study.methods: expected a comma-separated list of godunov/strang, got `{text}`"),
                    );
                    return None;
                }
            }
        }
    };
    Some(StudyParams {
        dt_count,
        refinement,
        norms,
        methods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Kernel;

    const KDV: &str = "equation.preset = kdv\ngrid.n = 256\nsplit.method = strang\nsplit.dt = 0.0625\nsplit.T = 0.5\n";

    #[test]
    fn kdv_example() {
        let cfg = parse_config(KDV).unwrap();
        assert_eq!(cfg.equation, Equation::Preset(Preset::Kdv));
        assert_eq!(cfg.grid, GridSpec::new(1, 256).unwrap());
        assert_eq!(cfg.split.a, ASpec::derivative(1.0, MultiIndex::axis(1, 0, 3)).unwrap());
        assert_eq!(cfg.split.v, VSpec::Burgers { a: 1.0 });
        assert_eq!(cfg.split.method, Method::Strang);
        assert_eq!(cfg.split.steps(), 8);
        assert_eq!(cfg.init, InitialCondition::SinX);
    }

    #[test]
    fn sqg_in_one_dimension_is_rejected() {
        let text = "equation.preset = sqg\ngrid.dims = 1\ngrid.n = 64\nsplit.method = strang\nsplit.dt = 0.1\nsplit.T = 1\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert_eq!(err.issues[0].line, Some(2));
        assert!(err.issues[0].message.contains("requires dims = 2"));
    }

    #[test]
    fn empty_document_lists_required_keys() {
        let err = parse_config("").unwrap_err();
        let text = err.to_string();
        for key in REQUIRED_KEYS {
            assert!(text.contains(key), "{text}");
        }
    }

    #[test]
    fn every_violation_is_reported() {
        let text = "# header\nequation.preset = kdv\ngrid.n = 100\nsplit.method = leapfrog\nsplit.dt = x\nsplit.T = 1\nsplit.colour = red\nnot a line\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.issues.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![Some(3), Some(4), Some(5), Some(7), Some(8)]);
    }

    #[test]
    fn custom_grammar() {
        let a = parse_a("-1*D(3); 1*D(5); 0.1*L(1.5); 2*M(0.5|1)").unwrap();
        assert_eq!(a.terms().len(), 4);
        assert_eq!(a.describe(), "-1*D(3) + 1*D(5) + 0.1*L(1.5) + 2*M(0.5|1)");
        assert!(parse_a("1*Q(2)").is_err());
        assert_eq!(parse_v("sqg(1.5)").unwrap(), VSpec::Sqg { beta: 1.5 });
        assert_eq!(parse_v("aggregation(exp)").unwrap(), VSpec::Convolution(Kernel::ExpAbs));
        assert!(parse_v("sqg(3)").is_err());
    }

    #[test]
    fn custom_low_order_diffusion_warns() {
        let text = "equation.preset = custom\nequation.a = 1*L(0.5)\nequation.v = burgers(1)\ngrid.n = 64\nsplit.method = godunov\nsplit.dt = 0.1\nsplit.T = 1\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.grid.dims(), 1);
        assert_eq!(cfg.warnings.len(), 1);
        let bad = text.replace("1*L(0.5)", "-1*D(2)");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn seed_override_and_study_dts() {
        let text = format!("{KDV}init.kind = random\ninit.seed = 3\nstudy.dt_count = 3\nstudy.methods = godunov, strang\n");
        let cfg = parse_config(&text).unwrap().with_seed(11);
        assert!(matches!(cfg.init, InitialCondition::Random { seed: 11, .. }));
        assert_eq!(cfg.admit.seed, 11);
        assert_eq!(cfg.study_dts(), vec![0.0625, 0.03125, 0.015625]);
        assert_eq!(cfg.study.methods, vec![Method::Godunov, Method::Strang]);
    }

    #[test]
    fn duplicates_and_misplaced_keys() {
        let text = format!("{KDV}grid.n = 128\nequation.alpha = 1.5\ninit.value = 2\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues.len(), 3, "{err}");
    }
}
