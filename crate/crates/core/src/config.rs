//! Run and sweep configuration in a flat `key = value` text format.
//!
//! One key per line; `#` starts a comment. Unknown keys are rejected.
//! [`RunConfig::to_text`] writes every key in a fixed order with
//! round-trip float formatting, so parse → write → parse is lossless.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Potential, Transmission};
use crate::stepper::NewtonConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Robin,
    Limit,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Robin => "robin",
            ModelKind::Limit => "limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `1` for `x > 1/2`, `−1` otherwise.
    StepX,
    /// `sin(4πx) cos(4πy)`
    SineProduct,
    /// Independent uniform draws on `[lo, hi]` per node.
    UniformRandom { lo: f64, hi: f64, seed: u64 },
}

impl InitialData {
    fn parse(text: &str) -> Option<Self> {
        match text {
            "step_x" => return Some(InitialData::StepX),
            "sine_product" => return Some(InitialData::SineProduct),
            _ => {}
        }
        let args = text.strip_prefix("uniform_random(")?.strip_suffix(')')?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return None;
        }
        Some(InitialData::UniformRandom {
            lo: parts[0].parse().ok()?,
            hi: parts[1].parse().ok()?,
            seed: parts[2].parse().ok()?,
        })
    }

    fn render(&self) -> String {
        match self {
            InitialData::StepX => "step_x".into(),
            InitialData::SineProduct => "sine_product".into(),
            InitialData::UniformRandom { lo, hi, seed } => format!("uniform_random({lo:?}, {hi:?}, {seed})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub n_cells: usize,
    pub tau: f64,
    pub n_steps: usize,
    pub eps: f64,
    pub delta: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k_penalty: f64,
    pub potential_f: Potential,
    pub potential_g: Potential,
    pub transmission: String,
    pub initial_data: InitialData,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
    pub vtk: bool,
    pub newton: NewtonConfig,
}

/// Reference solution a sweep is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Limit,
    /// Robin run with a small penalty, for transmissions without a limit model.
    Robin { k: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub k_list: Vec<f64>,
    pub reference: Reference,
}

const RUN_KEYS: &[&str] = &[
    "model",
    "n_cells",
    "tau",
    "n_steps",
    "eps",
    "delta",
    "kappa",
    "alpha",
    "beta",
    "K",
    "potential_F",
    "potential_G",
    "transmission",
    "initial_data",
    "output_dir",
    "snapshot_every",
    "vtk",
    "newton_abs_tol",
    "newton_rel_tol",
    "newton_max_iters",
    "newton_max_halvings",
    "newton_step_tol",
];
const SWEEP_KEYS: &[&str] = &["K_list", "reference"];

struct Entries {
    items: Vec<(usize, String, String)>,
}

impl Entries {
    fn parse(text: &str, allowed: &[&[&str]]) -> Result<Self> {
        let mut items: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(line_no, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !allowed.iter().any(|set| set.contains(&key)) {
                return Err(Error::config(line_no, format!("unknown key `{key}`")));
            }
            if items.iter().any(|(_, k, _)| k == key) {
                return Err(Error::config(line_no, format!("duplicate key `{key}`")));
            }
            items.push((line_no, key.to_string(), value.to_string()));
        }
        Ok(Entries { items })
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.items
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(line, _, v)| (*line, v.as_str()))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(line, format!("cannot parse `{v}` for `{key}`"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::config(0, format!("missing required key `{key}`")))
    }

    fn line_of(&self, key: &str) -> usize {
        self.raw(key).map_or(0, |(l, _)| l)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let entries = Entries::parse(text, &[RUN_KEYS])?;
        Self::from_entries(&entries)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn from_entries(e: &Entries) -> Result<Self> {
        let model = match e.require::<String>("model")?.as_str() {
            "robin" => ModelKind::Robin,
            "limit" => ModelKind::Limit,
            other => return Err(Error::config(e.line_of("model"), format!("unknown model `{other}`"))),
        };
        let potential = |key: &str| -> Result<Potential> {
            match e.raw(key) {
                None => Ok(Potential::DoubleWell),
                Some((line, v)) => {
                    Potential::from_label(v).ok_or_else(|| Error::config(line, format!("unknown potential `{v}`")))
                }
            }
        };
        let initial_data = {
            let (line, v) = e
                .raw("initial_data")
                .ok_or_else(|| Error::config(0, "missing required key `initial_data`"))?;
            InitialData::parse(v).ok_or_else(|| Error::config(line, format!("unknown initial data `{v}`")))?
        };
        let defaults = NewtonConfig::default();
        let newton = NewtonConfig {
            abs_tol: e.get("newton_abs_tol")?.unwrap_or(defaults.abs_tol),
            rel_tol: e.get("newton_rel_tol")?.unwrap_or(defaults.rel_tol),
            max_iters: e.get("newton_max_iters")?.unwrap_or(defaults.max_iters),
            max_halvings: e.get("newton_max_halvings")?.unwrap_or(defaults.max_halvings),
            step_tol: e.get("newton_step_tol")?.unwrap_or(defaults.step_tol),
        };
        let config = RunConfig {
            model,
            n_cells: e.require("n_cells")?,
            tau: e.require("tau")?,
            n_steps: e.require("n_steps")?,
            eps: e.require("eps")?,
            delta: e.require("delta")?,
            kappa: e.require("kappa")?,
            alpha: e.get("alpha")?.unwrap_or(1.0),
            beta: e.get("beta")?.unwrap_or(0.0),
            k_penalty: match model {
                ModelKind::Robin => e.require("K")?,
                ModelKind::Limit => e.get("K")?.unwrap_or(1.0),
            },
            potential_f: potential("potential_F")?,
            potential_g: potential("potential_G")?,
            transmission: e.get("transmission")?.unwrap_or_else(|| "affine".to_string()),
            initial_data,
            output_dir: e.get::<String>("output_dir")?.unwrap_or_else(|| "out".into()).into(),
            snapshot_every: e.get("snapshot_every")?.unwrap_or(0),
            vtk: e.get("vtk")?.unwrap_or(false),
            newton,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::config(0, msg));
        if self.n_cells == 0 {
            return bad("n_cells must be at least 1".into());
        }
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1".into());
        }
        if Transmission::from_label(&self.transmission, self.alpha, self.beta).is_none() {
            return bad(format!("unknown transmission `{}`", self.transmission));
        }
        if let InitialData::UniformRandom { lo, hi, .. } = self.initial_data {
            if !(lo <= hi) {
                return bad(format!("uniform_random needs lo <= hi, got {lo} > {hi}"));
            }
        }
        self.newton.validate().or_else(|e| bad(e.to_string()))?;
        let params = self.params();
        match self.model {
            ModelKind::Robin => params.check_robin(),
            ModelKind::Limit => params.check_limit(),
        }
        .or_else(|e| bad(e.to_string()))
    }

    pub fn transmission(&self) -> Transmission {
        Transmission::from_label(&self.transmission, self.alpha, self.beta)
            .unwrap_or(Transmission::Affine {
                alpha: self.alpha,
                beta: self.beta,
            })
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            eps: self.eps,
            delta: self.delta,
            kappa: self.kappa,
            k_penalty: self.k_penalty,
            tau: self.tau,
            alpha: self.alpha,
            beta: self.beta,
            potential_f: self.potential_f,
            potential_g: self.potential_g,
            transmission: self.transmission(),
        }
    }

    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_keys(&mut s);
        s
    }

    fn write_keys(&self, s: &mut String) {
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("model", self.model.label().into());
        kv("n_cells", self.n_cells.to_string());
        kv("tau", format!("{:?}", self.tau));
        kv("n_steps", self.n_steps.to_string());
        kv("eps", format!("{:?}", self.eps));
        kv("delta", format!("{:?}", self.delta));
        kv("kappa", format!("{:?}", self.kappa));
        kv("alpha", format!("{:?}", self.alpha));
        kv("beta", format!("{:?}", self.beta));
        kv("K", format!("{:?}", self.k_penalty));
        kv("potential_F", self.potential_f.label().into());
        kv("potential_G", self.potential_g.label().into());
        kv("transmission", self.transmission.clone());
        kv("initial_data", self.initial_data.render());
        kv("output_dir", self.output_dir.display().to_string());
        kv("snapshot_every", self.snapshot_every.to_string());
        kv("vtk", self.vtk.to_string());
        kv("newton_abs_tol", format!("{:?}", self.newton.abs_tol));
        kv("newton_rel_tol", format!("{:?}", self.newton.rel_tol));
        kv("newton_max_iters", self.newton.max_iters.to_string());
        kv("newton_max_halvings", self.newton.max_halvings.to_string());
        kv("newton_step_tol", format!("{:?}", self.newton.step_tol));
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let entries = Entries::parse(text, &[RUN_KEYS, SWEEP_KEYS])?;
        let base = RunConfig::from_entries(&entries)?;
        let (line, list) = entries
            .raw("K_list")
            .ok_or_else(|| Error::config(0, "missing required key `K_list`"))?;
        let k_list = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config(line, format!("cannot parse K value `{}`", s.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let reference = match entries.raw("reference") {
            None | Some((_, "limit")) => Reference::Limit,
            Some((line, v)) => {
                let k = v
                    .strip_prefix("robin(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::config(line, format!("unknown reference `{v}`")))?;
                Reference::Robin { k }
            }
        };
        let config = SweepConfig {
            base,
            k_list,
            reference,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::config(0, msg.to_string()));
        if self.base.model != ModelKind::Robin {
            return bad("sweep base run must use model = robin");
        }
        if self.k_list.is_empty() {
            return bad("K_list is empty");
        }
        if self.k_list.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return bad("K_list entries must be positive");
        }
        if self.k_list.windows(2).any(|w| w[1] >= w[0]) {
            return bad("K_list must be strictly descending");
        }
        match self.reference {
            Reference::Limit if self.base.transmission != "affine" => {
                bad("a limit reference requires affine transmission")
            }
            Reference::Robin { k } if !(k > 0.0) => bad("reference K must be positive"),
            _ => self.base.validate(),
        }
    }

    /// Configuration of the run with penalty `k`.
    pub fn robin_run(&self, k: f64) -> RunConfig {
        RunConfig {
            k_penalty: k,
            snapshot_every: 0,
            vtk: false,
            ..self.base.clone()
        }
    }

    /// Configuration of the reference run on the same grid and time step.
    pub fn reference_run(&self) -> RunConfig {
        match self.reference {
            Reference::Limit => RunConfig {
                model: ModelKind::Limit,
                ..self.robin_run(self.base.k_penalty)
            },
            Reference::Robin { k } => self.robin_run(k),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.base.write_keys(&mut s);
        let list: Vec<String> = self.k_list.iter().map(|k| format!("{k:?}")).collect();
        let _ = writeln!(s, "K_list = {}", list.join(", "));
        let reference = match self.reference {
            Reference::Limit => "limit".to_string(),
            Reference::Robin { k } => format!("robin({k:?})"),
        };
        let _ = writeln!(s, "reference = {reference}");
        s
    }
}
