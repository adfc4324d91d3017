//! Config-driven scenarios behind the `nmep` binary.
//!
//! Physical inputs in a config are ratios to the bath width Λ
//! (`model.lambda`), times are in units of `1/Λ`.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::array;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    analytic_qubit_trajectory, decoherence_record, evolve_reduced, first_vanishing_time, DynamicsModel,
    Trajectory,
};
use crate::environment::{correlation_quadrature, exponents_for, CorrelationSpec, QuadratureOptions, SpectralDensity};
use crate::error::{Error, Result};
use crate::heom::HeomModel;
use crate::linalg::{eigenvalues, re, ComplexMatrix, JordanOptions, PropagatorOptions, C64, ONE, ZERO};
use crate::plot::{render_svg, sweep_panels, Panel, Series};
use crate::pseudomode::{evolve_amplitudes, BosonicNetwork, PseudomodeModel};
use crate::spectral::{
    detect_ep, fit_line, locate_ep_1d, log_grid, network_generator, perturbation_scaling, puiseux_constants,
    qubit_generator, spread, sweep_spectrum, DegeneracyKind, EpCriterion, EpReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    Sweep,
    EpFind,
    Dynamics,
    Sensitivity,
    Validate,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Sweep => "sweep",
            Action::EpFind => "ep-find",
            Action::Dynamics => "dynamics",
            Action::Sensitivity => "sensitivity",
            Action::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    #[default]
    SpinBoson,
    BosonicNetwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    #[default]
    Pmeom,
    Heom,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    #[default]
    Lorentzian,
    Bandgap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// `|+⟩⟨+|`
    #[default]
    Coherent,
    Excited,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub system: SystemKind,
    #[serde(default)]
    pub mapping: Mapping,
    #[serde(default)]
    pub density: Density,
    /// Bath width Λ, the unit of every other physical input.
    pub lambda: Option<f64>,
    /// Γ/Λ
    pub gamma: Option<f64>,
    #[serde(default)]
    pub q: f64,
    /// ω0/Λ
    #[serde(default)]
    pub omega0: f64,
    /// χ/Λ, network only.
    pub chi: Option<f64>,
    /// Markovian damping of the network's output mode instead of a pseudomode.
    #[serde(default)]
    pub markov: bool,
    /// Exponent file replacing the spectral density (dynamics and validate).
    pub correlation: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    /// Must match the subcommand when given.
    pub kind: Option<Action>,
    /// Swept or located parameter: `gamma`, `q` or `chi`.
    pub parameter: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub bracket: Option<[f64; 2]>,
    #[serde(default)]
    pub initial: InitialState,
    pub t_max: Option<f64>,
    pub t_points: Option<usize>,
    /// Γ/Λ values of the validation grid.
    pub gammas: Option<Vec<f64>>,
    /// q values of the validation grid.
    pub qs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericConfig {
    pub tol_cluster: f64,
    pub tol_rank: f64,
    pub rtol: f64,
    pub atol: f64,
    pub tier: usize,
    pub n_max: usize,
    /// Absolute tolerance of EP location, in units of Λ.
    pub locate_tol: f64,
    /// `|Im λ|/Λ` above which a spectrum counts as complex.
    pub complex_threshold: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_points: usize,
    /// Detuning range for the vanishing-time fit.
    pub vanish_eps_min: f64,
    pub vanish_eps_max: f64,
    /// Acceptance threshold for trajectory cross-checks.
    pub validate_tol: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            tol_cluster: 1e-4,
            tol_rank: 1e-8,
            rtol: 1e-10,
            atol: 1e-13,
            tier: 2,
            n_max: 1,
            locate_tol: 1e-11,
            complex_threshold: 1e-6,
            eps_min: 1e-6,
            eps_max: 1e-3,
            eps_points: 13,
            vanish_eps_min: 1e-4,
            vanish_eps_max: 1e-2,
            validate_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub action: ActionConfig,
    #[serde(default)]
    pub numeric: NumericConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn cfg_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = message
                .split('`')
                .nth(1)
                .map(|f| f.to_string())
                .unwrap_or_else(|| "<document>".into());
            let line = e
                .span()
                .map(|s| text[..s.start].lines().count().max(1))
                .map_or(String::new(), |l| format!(" (line {l})"));
            cfg_err(&field, format!("{message}{line}"))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn lambda(&self) -> Result<f64> {
        match self.model.lambda {
            Some(l) if l > 0.0 && l.is_finite() => Ok(l),
            Some(l) => Err(cfg_err("model.lambda", format!("must be positive, got {l}"))),
            None => Err(cfg_err("model.lambda", "missing bath width")),
        }
    }

    fn gamma(&self) -> Result<f64> {
        match self.model.gamma {
            Some(g) if g > 0.0 && g.is_finite() => Ok(g),
            Some(g) => Err(cfg_err("model.gamma", format!("must be positive, got {g}"))),
            None => Err(cfg_err("model.gamma", "missing coupling Γ/Λ")),
        }
    }

    /// Spectral density at `Γ/Λ = gamma`, `q` (ratios).
    fn density_at(&self, gamma: f64, q: f64) -> Result<SpectralDensity> {
        let l = self.lambda()?;
        let w0 = self.model.omega0 * l;
        let j = match self.model.density {
            Density::Lorentzian => SpectralDensity::lorentzian(gamma * l, l, w0),
            Density::Bandgap => SpectralDensity::bandgap(gamma * l, l, w0, q),
        };
        j.map_err(|e| match e {
            Error::Parameter { name, reason } => cfg_err(&format!("model.{name}"), reason),
            Error::DegenerateEnvironment(m) => cfg_err("model.q", m),
            other => other,
        })
    }

    fn correlation(&self) -> Result<CorrelationSpec> {
        match &self.model.correlation {
            Some(p) => {
                let path = self.base_dir.join(p);
                CorrelationSpec::from_text(&fs::read_to_string(path)?)
                    .map_err(|e| cfg_err("model.correlation", e.to_string()))
            }
            None => exponents_for(&self.density_at(self.gamma()?, self.model.q)?),
        }
    }

    /// Checks every field the action will read.
    pub fn validate(&self, action: Action) -> Result<()> {
        if let Some(k) = self.action.kind {
            if k != action {
                return Err(cfg_err(
                    "action.kind",
                    format!("config is for `{}`, invoked as `{}`", k.name(), action.name()),
                ));
            }
        }
        self.lambda()?;
        let n = &self.numeric;
        for (name, v) in [
            ("numeric.tol_cluster", n.tol_cluster),
            ("numeric.tol_rank", n.tol_rank),
            ("numeric.rtol", n.rtol),
            ("numeric.atol", n.atol),
            ("numeric.locate_tol", n.locate_tol),
            ("numeric.complex_threshold", n.complex_threshold),
            ("numeric.eps_min", n.eps_min),
            ("numeric.eps_max", n.eps_max),
            ("numeric.validate_tol", n.validate_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(cfg_err(name, format!("must be positive, got {v}")));
            }
        }
        if n.eps_max / n.eps_min < 100.0 - 1e-9 {
            return Err(cfg_err("numeric.eps_max", "perturbation grid must span two decades"));
        }
        if n.n_max == 0 {
            return Err(cfg_err("numeric.n_max", "must be at least 1"));
        }
        if self.model.correlation.is_some() && !matches!(action, Action::Dynamics | Action::Validate) {
            return Err(cfg_err(
                "model.correlation",
                format!("explicit exponents are not supported by `{}`", action.name()),
            ));
        }
        if self.model.correlation.is_none() && action != Action::Validate {
            self.gamma()?;
            self.density_at(self.gamma()?, self.model.q)?;
        }
        if self.model.system == SystemKind::BosonicNetwork
            && self.model.chi.is_none()
            && !matches!(action, Action::Sweep | Action::EpFind | Action::Sensitivity)
        {
            return Err(cfg_err("model.chi", "network coupling χ/Λ missing"));
        }
        if let (Some(a), Some(b)) = (self.action.from, self.action.to) {
            if !(a < b) {
                return Err(cfg_err("action.to", "must exceed action.from"));
            }
        }
        if let Some([a, b]) = self.action.bracket {
            if !(a < b) {
                return Err(cfg_err("action.bracket", "need [lo, hi] with lo < hi"));
            }
        }
        Ok(())
    }

    fn jordan(&self) -> JordanOptions {
        JordanOptions {
            tol_cluster: self.numeric.tol_cluster,
            tol_rank: self.numeric.tol_rank,
            ..Default::default()
        }
    }

    fn propagator(&self) -> PropagatorOptions {
        PropagatorOptions {
            rtol: self.numeric.rtol,
            atol: self.numeric.atol,
            ..Default::default()
        }
    }

    fn network(&self, chi: f64, gamma: f64) -> Result<BosonicNetwork> {
        let l = self.lambda()?;
        let w0 = self.model.omega0 * l;
        Ok(if self.model.markov {
            BosonicNetwork::two_mode(chi * l, w0, None, gamma * l)
        } else {
            let spec = exponents_for(&self.density_at(gamma, self.model.q)?)?;
            BosonicNetwork::two_mode(chi * l, w0, Some(spec), 0.0)
        })
    }

    fn initial_state(&self) -> ComplexMatrix {
        match self.action.initial {
            InitialState::Coherent => array![[re(0.5), re(0.5)], [re(0.5), re(0.5)]],
            InitialState::Excited => array![[ZERO, ZERO], [ZERO, ONE]],
        }
    }

    fn times(&self) -> Result<Vec<f64>> {
        let l = self.lambda()?;
        let tmax = self.action.t_max.unwrap_or(10.0);
        let n = self.action.t_points.unwrap_or(201);
        if !(tmax > 0.0) || n < 2 {
            return Err(cfg_err("action.t_max", "need t_max > 0 and t_points ≥ 2"));
        }
        Ok((0..n).map(|k| tmax / l * k as f64 / (n - 1) as f64).collect())
    }
}

/// Where outputs go and in which formats.
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub action: Action,
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

struct Sink<'a> {
    opts: &'a RunOptions,
    files: Vec<PathBuf>,
    lines: Vec<String>,
}

impl Sink<'_> {
    fn wants(&self, f: Format) -> bool {
        self.opts.formats.contains(&f)
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.opts.out_dir.join(name);
        fs::write(&p, body)?;
        self.files.push(p);
        Ok(())
    }

    fn csv(&mut self, name: &str, body: impl FnOnce() -> String) -> Result<()> {
        if self.wants(Format::Csv) {
            self.write(&format!("{name}.csv"), &body())?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        if self.wants(Format::Json) {
            let body = serde_json::to_string_pretty(v).map_err(|e| Error::dim(e.to_string()))?;
            self.write(&format!("{name}.json"), &body)?;
        }
        Ok(())
    }

    fn svg(&mut self, name: &str, panels: impl FnOnce() -> Vec<Panel>) -> Result<()> {
        if self.wants(Format::Svg) {
            let body = render_svg(&panels())?;
            self.write(&format!("{name}.svg"), &body)?;
        }
        Ok(())
    }

    fn say(&mut self, line: String) {
        log::info!("{line}");
        self.lines.push(line);
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    action: Action,
    config: &'a ScenarioConfig,
    formats: &'a [Format],
    files: Vec<String>,
}

/// Runs one action, writing artifacts and a `manifest.json` into the
/// output directory.
pub fn run(cfg: &ScenarioConfig, action: Action, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate(action)?;
    fs::create_dir_all(&opts.out_dir)?;
    let mut sink = Sink {
        opts,
        files: Vec::new(),
        lines: Vec::new(),
    };
    let outcome = match action {
        Action::Sweep => run_sweep(cfg, &mut sink),
        Action::EpFind => run_ep_find(cfg, &mut sink),
        Action::Dynamics => run_dynamics(cfg, &mut sink),
        Action::Sensitivity => run_sensitivity(cfg, &mut sink),
        Action::Validate => run_validate(cfg, &mut sink),
    };
    let manifest = Manifest {
        tool: "nmep",
        version: env!("CARGO_PKG_VERSION"),
        action,
        config: cfg,
        formats: &opts.formats,
        files: sink
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::dim(e.to_string()))?;
    sink.write("manifest.json", &body)?;
    outcome?;
    Ok(RunSummary {
        action,
        files: sink.files,
        lines: sink.lines,
    })
}

fn grid(cfg: &ScenarioConfig, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let a = cfg.action.from.unwrap_or(lo);
    let b = cfg.action.to.unwrap_or(hi);
    let n = cfg.action.points.unwrap_or(n).max(2);
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn parameter<'a>(cfg: &'a ScenarioConfig, default: &'a str, allowed: &[&str]) -> Result<&'a str> {
    let p = cfg.action.parameter.as_deref().unwrap_or(default);
    if allowed.contains(&p) {
        Ok(p)
    } else {
        Err(cfg_err("action.parameter", format!("`{p}` not one of {allowed:?}")))
    }
}

/// Generator as a function of the named ratio parameter.
fn builder<'a>(cfg: &'a ScenarioConfig, name: &'a str) -> Result<Box<dyn Fn(f64) -> Result<ComplexMatrix> + Sync + 'a>> {
    let g0 = cfg.gamma()?;
    let q0 = cfg.model.q;
    Ok(match (cfg.model.system, name) {
        (SystemKind::SpinBoson, "gamma") => Box::new(move |g| qubit_generator(&cfg.density_at(g, q0)?)),
        (SystemKind::SpinBoson, "q") => Box::new(move |q| qubit_generator(&cfg.density_at(g0, q)?)),
        (SystemKind::BosonicNetwork, "chi") => Box::new(move |c| network_generator(&cfg.network(c, g0)?)),
        (SystemKind::BosonicNetwork, "gamma") => {
            let c0 = cfg.model.chi.ok_or_else(|| cfg_err("model.chi", "network coupling χ/Λ missing"))?;
            Box::new(move |g| network_generator(&cfg.network(c0, g)?))
        }
        (_, other) => return Err(cfg_err("action.parameter", format!("`{other}` cannot be varied for this system"))),
    })
}

fn run_sweep(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let l = cfg.lambda()?;
    let (name, lo, hi) = match cfg.model.system {
        SystemKind::SpinBoson => (parameter(cfg, "gamma", &["gamma", "q"])?, 0.05, 1.0),
        SystemKind::BosonicNetwork => (parameter(cfg, "chi", &["chi", "gamma"])?, 0.01, 0.6),
    };
    let b = builder(cfg, name)?;
    let values = grid(cfg, lo, hi, 96);
    let table = sweep_spectrum(name, &b, &values);
    if !table.failed.is_empty() {
        sink.say(format!("eigensolver failed at {} grid points", table.failed.len()));
    }
    match table.complex_onset(cfg.numeric.complex_threshold * l) {
        Some(p) => sink.say(format!("complex eigenvalues from {name}/Λ = {p}")),
        None => sink.say("spectrum stays real on the grid".into()),
    }
    sink.csv("sweep", || table.to_csv())?;
    sink.json("sweep", &table)?;
    sink.svg("sweep", || sweep_panels(&table, l, &format!("{name}/Λ")))?;
    Ok(())
}

#[derive(Serialize)]
struct EpFindResult {
    parameter: String,
    value: f64,
    analytic: Option<f64>,
    reports: Vec<EpReport>,
}

fn locate(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<EpFindResult> {
    let l = cfg.lambda()?;
    let tol = cfg.numeric.locate_tol;
    let threshold = EpCriterion::RealToComplex {
        threshold: cfg.numeric.complex_threshold * l,
    };
    let (name, criterion, default_bracket, analytic) = match cfg.model.system {
        SystemKind::SpinBoson => {
            let q = if cfg.model.density == Density::Bandgap { cfg.model.q } else { 0.0 };
            ("gamma", threshold, [0.05, 1.0], Some((1.0 - q) / 2.0))
        }
        SystemKind::BosonicNetwork if cfg.model.markov => {
            ("chi", threshold, [0.01, 1.0], Some(cfg.gamma()? / 2.0))
        }
        SystemKind::BosonicNetwork => {
            let g = cfg.gamma()?;
            let exact = ((g - 16.0 / 27.0).abs() < 1e-12).then(|| 1.0 / (3.0 * 3f64.sqrt()));
            ("chi", EpCriterion::Coalescence { size: 3 }, [0.05, 0.5], exact)
        }
    };
    let b = builder(cfg, name)?;
    let [lo, hi] = cfg.action.bracket.unwrap_or(default_bracket);
    let value = locate_ep_1d(&b, (lo, hi), criterion, tol)?;
    if let Some(a) = analytic {
        if (value - a).abs() > 1e-6 {
            log::warn!("located {name}/Λ = {value} differs from the analytic condition {a}");
        }
    }
    // the located point carries a residual error of about `tol`, which splits
    // an order-n cluster by ~tol^{1/n}; widen clustering until it regroups
    let m = b(value)?;
    let mut jopts = cfg.jordan();
    let mut reports = Vec::new();
    for attempt in 0..3 {
        reports = detect_ep(&m, &jopts)?
            .into_iter()
            .filter(|r| r.kind != DegeneracyKind::Simple)
            .collect::<Vec<EpReport>>();
        if reports.iter().any(|r| r.kind == DegeneracyKind::Exceptional) {
            break;
        }
        if attempt < 2 {
            jopts.tol_cluster *= 10.0;
            log::warn!("no exceptional cluster found; retrying with tol_cluster = {:e}", jopts.tol_cluster);
        }
    }
    for r in &mut reports {
        r.parameter = Some(value);
    }
    sink.say(format!("{name}/Λ = {value:.12}"));
    for r in &reports {
        sink.say(format!(
            "  {:?} at λ/Λ = {:.9}{:+.9}i, chains {:?}",
            r.kind,
            r.lambda.re / l,
            r.lambda.im / l,
            r.chain_lengths
        ));
    }
    Ok(EpFindResult {
        parameter: name.into(),
        value,
        analytic,
        reports,
    })
}

fn run_ep_find(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let res = locate(cfg, sink)?;
    sink.csv("ep", || {
        let mut s = String::from("parameter,value,re_lambda,im_lambda,order,chains\n");
        for r in &res.reports {
            let chains: Vec<String> = r.chain_lengths.iter().map(|c| c.to_string()).collect();
            s += &format!(
                "{},{:.17e},{:.17e},{:.17e},{},{}\n",
                res.parameter,
                res.value,
                r.lambda.re,
                r.lambda.im,
                r.order,
                chains.join(" ")
            );
        }
        s
    })?;
    let text: String = res.reports.iter().map(|r| r.to_text() + "\n").collect();
    sink.write("ep.txt", &text)?;
    sink.json("ep", &res)?;
    Ok(())
}

fn run_dynamics(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let l = cfg.lambda()?;
    let times = cfg.times()?;
    let popts = cfg.propagator();
    if cfg.model.system == SystemKind::BosonicNetwork {
        let chi = cfg.model.chi.ok_or_else(|| cfg_err("model.chi", "network coupling χ/Λ missing"))?;
        let h = crate::pseudomode::effective_nhh(&cfg.network(chi, cfg.gamma()?)?)?;
        let mut v0 = crate::linalg::ComplexVector::zeros(h.nrows());
        v0[0] = ONE;
        let amps = evolve_amplitudes(&h, &v0, &times, &popts)?;
        let n = h.nrows();
        sink.csv("amplitudes", || {
            let mut s = String::from("t");
            for k in 0..n {
                s += &format!(",pop_{k}");
            }
            s.push('\n');
            for (t, v) in times.iter().zip(&amps) {
                s += &format!("{t:.17e}");
                for z in v.iter() {
                    s += &format!(",{:.17e}", z.norm_sqr());
                }
                s.push('\n');
            }
            s
        })?;
        sink.svg("amplitudes", || {
            vec![Panel {
                title: "mode populations".into(),
                xlabel: "Λt".into(),
                ylabel: "|c_k|²".into(),
                series: (0..n)
                    .map(|k| Series {
                        name: format!("mode {k}"),
                        points: times.iter().zip(&amps).map(|(t, v)| (t * l, v[k].norm_sqr())).collect(),
                    })
                    .collect(),
                log_x: false,
            }]
        })?;
        sink.say(format!("evolved {} amplitudes over {} times", n, times.len()));
        return Ok(());
    }

    let spec = cfg.correlation()?;
    let rho0 = cfg.initial_state();
    let mut trajectories: Vec<(&str, Trajectory)> = Vec::new();
    if matches!(cfg.model.mapping, Mapping::Pmeom | Mapping::Both) {
        let mut m = PseudomodeModel::qubit_rwa(spec.clone());
        m.n_max = cfg.numeric.n_max;
        trajectories.push(("pmeom", evolve_reduced(&DynamicsModel::Pseudomode(m), &rho0, &times, &popts)?));
    }
    if matches!(cfg.model.mapping, Mapping::Heom | Mapping::Both) {
        let m = HeomModel::qubit_rwa(spec.clone(), cfg.numeric.tier);
        trajectories.push(("heom", evolve_reduced(&DynamicsModel::Heom(m), &rho0, &times, &popts)?));
    }
    let record = if cfg.model.correlation.is_none() && cfg.model.omega0 == 0.0 {
        let q = if cfg.model.density == Density::Bandgap { cfg.model.q } else { 0.0 };
        Some(decoherence_record(cfg.gamma()? * l, l, q, &times)?)
    } else {
        None
    };
    for (name, tr) in &trajectories {
        sink.csv(&format!("trajectory_{name}"), || tr.to_csv())?;
        sink.json(&format!("trajectory_{name}"), &TrajectoryJson::from(tr))?;
        let phys = tr.physicality()?;
        sink.say(format!(
            "{name}: trace error {:.2e}, min eigenvalue {:.2e}",
            phys.trace_error, phys.min_eigenvalue
        ));
    }
    if let Some(rec) = &record {
        sink.csv("decoherence", || rec.to_csv())?;
        sink.json("decoherence", rec)?;
        sink.say(format!("|G(t)| {}", if rec.oscillatory { "oscillates" } else { "decays monotonically" }));
    }
    sink.svg("dynamics", || {
        let mut series = Vec::new();
        if let Some(rec) = &record {
            series.push(Series {
                name: "|G| analytic".into(),
                points: rec.times.iter().zip(&rec.values).map(|(t, g)| (t * l, g.norm())).collect(),
            });
        }
        for (name, tr) in &trajectories {
            let c0 = tr.states[0][[1, 0]];
            let p0 = tr.states[0][[1, 1]];
            let (label, f): (&str, Box<dyn Fn(&ComplexMatrix) -> f64>) = if c0.norm() > 0.0 {
                ("coherence", Box::new(move |s| (s[[1, 0]] / c0).norm()))
            } else {
                ("population", Box::new(move |s| (s[[1, 1]] / p0).re))
            };
            series.push(Series {
                name: format!("{name} {label}"),
                points: tr.times.iter().zip(&tr.states).map(|(t, s)| (t * l, f(s))).collect(),
            });
        }
        vec![Panel {
            title: "qubit dynamics".into(),
            xlabel: "Λt".into(),
            ylabel: "ratio to initial value".into(),
            series,
            log_x: false,
        }]
    })?;
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    source: crate::dynamics::Source,
    rtol: f64,
    atol: f64,
    times: &'a [f64],
    /// Row-major `[re, im]` entries per time.
    states: Vec<Vec<C64>>,
}

impl<'a> From<&'a Trajectory> for TrajectoryJson<'a> {
    fn from(t: &'a Trajectory) -> Self {
        TrajectoryJson {
            source: t.source,
            rtol: t.rtol,
            atol: t.atol,
            times: &t.times,
            states: t.states.iter().map(|s| s.iter().copied().collect()).collect(),
        }
    }
}

#[derive(Serialize)]
struct SensitivityResult {
    observable: String,
    eps: Vec<f64>,
    values: Vec<f64>,
    exponent: f64,
    coefficient: f64,
    residual: f64,
    puiseux: Vec<C64>,
}

fn run_sensitivity(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let l = cfg.lambda()?;
    let n = &cfg.numeric;
    let res = match cfg.model.system {
        SystemKind::SpinBoson => {
            let eps = log_grid(n.vanish_eps_min, n.vanish_eps_max, n.eps_points);
            let inv: Vec<f64> = eps
                .iter()
                .map(|e| Ok(1.0 / first_vanishing_time(0.5 * l * (1.0 + e), l)?))
                .collect::<Result<_>>()?;
            let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
            let ly: Vec<f64> = inv.iter().map(|v| (v / l).ln()).collect();
            let (a, b, r) = fit_line(&lx, &ly);
            SensitivityResult {
                observable: "inverse first vanishing time / Λ".into(),
                eps,
                values: inv.iter().map(|v| v / l).collect(),
                exponent: b,
                coefficient: a.exp(),
                residual: r,
                puiseux: vec![],
            }
        }
        SystemKind::BosonicNetwork => {
            let found = locate(cfg, sink)?;
            let chi = found.value;
            let order = if cfg.model.markov { 2 } else { 3 };
            let g = cfg.gamma()?;
            let h0 = network_generator(&cfg.network(chi, g)?)?;
            let ev = eigenvalues(&h0)?;
            let lambda_ep = tightest_mean(&ev, order);
            let b = |e: f64| network_generator(&cfg.network(chi * (1.0 + e), g)?);
            let eps = log_grid(n.eps_min, n.eps_max, n.eps_points);
            let fit = perturbation_scaling(b, lambda_ep, order, &eps)?;
            let puiseux = if order == 3 {
                puiseux_constants(b, lambda_ep, order, &eps)?.iter().map(|x| x / l).collect()
            } else {
                vec![]
            };
            SensitivityResult {
                observable: "eigenvalue splitting / Λ".into(),
                eps: fit.eps,
                values: fit.splittings.iter().map(|s| s / l).collect(),
                exponent: fit.exponent,
                coefficient: fit.coefficient / l,
                residual: fit.residual,
                puiseux,
            }
        }
    };
    sink.say(format!(
        "{}: exponent {:.4}, coefficient {:.4}, residual {:.2e}",
        res.observable, res.exponent, res.coefficient, res.residual
    ));
    sink.csv("sensitivity", || {
        let mut s = String::from("eps,value\n");
        for (e, v) in res.eps.iter().zip(&res.values) {
            s += &format!("{e:.17e},{v:.17e}\n");
        }
        s
    })?;
    sink.json("sensitivity", &res)?;
    sink.svg("sensitivity", || {
        vec![Panel {
            title: format!("{} (exponent {:.3})", res.observable, res.exponent),
            xlabel: "log10 ε".into(),
            ylabel: "log10 value".into(),
            series: vec![Series {
                name: "measured".into(),
                points: res.eps.iter().zip(&res.values).map(|(e, v)| (e.log10(), v.log10())).collect(),
            }],
            log_x: false,
        }]
    })?;
    Ok(())
}

fn tightest_mean(ev: &[C64], size: usize) -> C64 {
    let mut best = (ev[0], f64::INFINITY);
    for z in ev {
        let mut near = ev.to_vec();
        near.sort_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()));
        near.truncate(size);
        let s = spread(&near);
        if s < best.1 {
            best = (near.iter().sum::<C64>() / size as f64, s);
        }
    }
    best.0
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn run_validate(cfg: &ScenarioConfig, sink: &mut Sink) -> Result<()> {
    let checks = validation_checks(cfg)?;
    for c in &checks {
        sink.say(format!(
            "{} {}: {:.3e} (tol {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.deviation,
            c.tolerance
        ));
    }
    sink.csv("validate", || {
        let mut s = String::from("check,deviation,tolerance,pass\n");
        for c in &checks {
            s += &format!("{},{:.17e},{:e},{}\n", c.name, c.deviation, c.tolerance, c.pass);
        }
        s
    })?;
    sink.json("validate", &checks)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    }
}

/// Pseudomode vs hierarchy vs closed form over a (Γ, q) grid, plus the
/// exponent-sum correlation function against direct quadrature.
pub fn validation_checks(cfg: &ScenarioConfig) -> Result<Vec<Check>> {
    let l = cfg.lambda()?;
    let tol = cfg.numeric.validate_tol;
    let times = cfg.times()?;
    let popts = cfg.propagator();
    let rho0 = cfg.initial_state();
    let mut checks = Vec::new();
    let check = |name: String, dev: f64, tol: f64| Check {
        name,
        deviation: dev,
        tolerance: tol,
        pass: dev <= tol,
    };

    if cfg.model.correlation.is_some() {
        let spec = cfg.correlation()?;
        let a = evolve_reduced(&DynamicsModel::Pseudomode(PseudomodeModel::qubit_rwa(spec.clone())), &rho0, &times, &popts)?;
        let b = evolve_reduced(&DynamicsModel::Heom(HeomModel::qubit_rwa(spec, cfg.numeric.tier)), &rho0, &times, &popts)?;
        checks.push(check("pmeom-vs-heom".into(), a.max_deviation(&b)?, tol));
        return Ok(checks);
    }

    let gammas = cfg.action.gammas.clone().unwrap_or_else(|| vec![0.3, 0.5, 0.8]);
    let qs = cfg.action.qs.clone().unwrap_or_else(|| vec![0.0, 0.25, 0.5]);
    for &g in &gammas {
        for &q in &qs {
            let j = if q == 0.0 {
                SpectralDensity::lorentzian(g * l, l, 0.0)
            } else {
                SpectralDensity::bandgap(g * l, l, 0.0, q)
            }
            .map_err(|e| cfg_err("action.qs", e.to_string()))?;
            let spec = exponents_for(&j)?;
            let pm = evolve_reduced(&DynamicsModel::Pseudomode(PseudomodeModel::qubit_rwa(spec.clone())), &rho0, &times, &popts)?;
            let he = evolve_reduced(&DynamicsModel::Heom(HeomModel::qubit_rwa(spec, cfg.numeric.tier)), &rho0, &times, &popts)?;
            let an = analytic_qubit_trajectory(g * l, l, q, &rho0, &times)?;
            let tag = format!("gamma={g},q={q}");
            checks.push(check(format!("pmeom-vs-heom[{tag}]"), pm.max_deviation(&he)?, tol));
            checks.push(check(format!("pmeom-vs-analytic[{tag}]"), pm.max_deviation(&an)?, tol));
            checks.push(check(format!("heom-vs-analytic[{tag}]"), he.max_deviation(&an)?, tol));
        }
    }

    let g = cfg.model.gamma.unwrap_or(0.5);
    let w0 = if cfg.model.omega0 == 0.0 { 100.0 } else { cfg.model.omega0 };
    let j = SpectralDensity::lorentzian(g * l, l, w0 * l).map_err(|e| cfg_err("model.gamma", e.to_string()))?;
    let spec = exponents_for(&j)?;
    let c0 = spec.value(0.0).norm();
    let mut dev = 0.0f64;
    for k in 0..=20 {
        let t = 10.0 / l * k as f64 / 20.0;
        let direct = correlation_quadrature(&j, t, true, &QuadratureOptions::default())?;
        dev = dev.max((direct - spec.value(t)).norm() / c0);
    }
    checks.push(check(format!("correlation-quadrature[omega0={w0}]"), dev, 1e-6));
    Ok(checks)
}
