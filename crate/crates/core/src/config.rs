//! Experiment configuration: defaults, a flat sectioned text format, JSON
//! round trip, and construction of models and kernels from it.
//!
//! Text format, one assignment per line, `#` starts a comment:
//!
//! ```text
//! seed = 7
//! [model]
//! name = birth-death
//! betas = constant:1/3
//! [run]
//! a = auto
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::criteria::{threshold_for, ASearch, GridSpec, Method};
use crate::error::{Error, Result};
use crate::kernels::{
    parse_real, BesselKernel, BetaSpec, BirthDeathKernel, Intensity, KppKernel, MatrixKernel, MeanFieldKernel,
    MeanFieldLaw, SharedKernel,
};
use crate::numerics::{PowerIteration, Quadrature};
use crate::sim::{CascadeModel, GwConfig, InitialState, SiblingCoupling, TreeShape};

/// Model names understood by `[model] name`.
pub const MODEL_NAMES: &[&str] = &["yule", "alpha", "birth-death", "bessel", "kpp", "mean-field", "cycle"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    /// Generation scaling of the `alpha` model.
    pub alpha: f64,
    /// Birth-death `β` list: `constant:c`, `geometric:r` or `1,b2,b3,…`.
    pub betas: String,
    /// Truncation level of the birth-death chain; number of states of `cycle`.
    pub j: usize,
    /// Mean-field law: `point:v`, `exponential:rate`, `uniform:lo:hi` or `atoms:v1,v2|w1,w2`.
    pub law: String,
    /// `x`, `x^2`, `1+x^2` or a constant (mean-field and cycle only).
    pub intensity: String,
    /// `stationary` or a state.
    pub initial: String,
    /// Global intensity factor `c` in `λ → cλ`.
    pub scale: f64,
    /// `binary`, or Galton-Watson offspring weights `p0,p1,p2,…`.
    pub offspring: String,
    /// `independent` or `joint`.
    pub siblings: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t: f64,
    pub n: u32,
    pub budget: u64,
    pub trials: u64,
    /// A positive number, or `auto` for the smallest passing `a`.
    pub a: String,
    pub method: String,
    /// `auto` or `lo:hi:N`.
    pub grid: String,
    pub b: f64,
    /// Mean offspring for the criterion threshold `1/μ`; `auto` reads it off the tree.
    pub mu: String,
    pub max_events: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub quad_rel_tol: f64,
    pub quad_abs_tol: f64,
    pub quad_max_depth: u32,
    pub eigen_tol: f64,
    pub eigen_max_iter: usize,
    pub a_lo: f64,
    pub a_hi: f64,
    pub a_rel_tol: f64,
}

/// Where results go. Never serialized: reports must not depend on it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputConfig {
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub threads: Option<usize>,
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub model: ModelConfig,
    pub run: RunConfig,
    pub numerics: NumericsConfig,
    #[serde(skip)]
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let q = Quadrature::default();
        let p = PowerIteration::default();
        let s = ASearch::default();
        ExperimentConfig {
            seed: None,
            model: ModelConfig {
                name: "yule".into(),
                alpha: 2.0,
                betas: "constant:1/3".into(),
                j: 50,
                law: "point:1".into(),
                intensity: "x".into(),
                initial: "stationary".into(),
                scale: 1.0,
                offspring: "binary".into(),
                siblings: "independent".into(),
            },
            run: RunConfig {
                t: 10.0,
                n: 25,
                budget: 1_000_000,
                trials: 100,
                a: "1".into(),
                method: "spectral_radius".into(),
                grid: "auto".into(),
                b: 1.0,
                mu: "auto".into(),
                max_events: 0,
            },
            numerics: NumericsConfig {
                quad_rel_tol: q.rel_tol,
                quad_abs_tol: q.abs_tol,
                quad_max_depth: q.max_depth,
                eigen_tol: p.tol,
                eigen_max_iter: p.max_iter,
                a_lo: s.lo,
                a_hi: s.hi,
                a_rel_tol: s.rel_tol,
            },
            output: OutputConfig::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn real(key: &str, value: &str) -> Result<f64> {
    parse_real(value).map_err(|_| Error::Config(format!("{key}: not a number: {value:?}")))
}

impl ExperimentConfig {
    /// Sets one key. `section` is `""` for top-level keys.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let m = &mut self.model;
        let r = &mut self.run;
        let n = &mut self.numerics;
        let o = &mut self.output;
        match (section, key) {
            ("", "seed") => self.seed = Some(parse(key, v)?),
            ("model", "name") => m.name = v.into(),
            ("model", "alpha") => m.alpha = real(key, v)?,
            ("model", "betas") => m.betas = v.into(),
            ("model", "j") => m.j = parse(key, v)?,
            ("model", "law") => m.law = v.into(),
            ("model", "intensity") => m.intensity = v.into(),
            ("model", "initial") => m.initial = v.into(),
            ("model", "scale") => m.scale = real(key, v)?,
            ("model", "offspring") => m.offspring = v.into(),
            ("model", "siblings") => m.siblings = v.into(),
            ("run", "t") => r.t = real(key, v)?,
            ("run", "n") => r.n = parse(key, v)?,
            ("run", "budget") => r.budget = real(key, v).and_then(|x| whole(key, x))?,
            ("run", "trials") => r.trials = real(key, v).and_then(|x| whole(key, x))?,
            ("run", "a") => r.a = v.into(),
            ("run", "method") => r.method = v.into(),
            ("run", "grid") => r.grid = v.into(),
            ("run", "b") => r.b = real(key, v)?,
            ("run", "mu") => r.mu = v.into(),
            ("run", "max_events") => r.max_events = parse(key, v)?,
            ("numerics", "quad_rel_tol") => n.quad_rel_tol = real(key, v)?,
            ("numerics", "quad_abs_tol") => n.quad_abs_tol = real(key, v)?,
            ("numerics", "quad_max_depth") => n.quad_max_depth = parse(key, v)?,
            ("numerics", "eigen_tol") => n.eigen_tol = real(key, v)?,
            ("numerics", "eigen_max_iter") => n.eigen_max_iter = parse(key, v)?,
            ("numerics", "a_lo") => n.a_lo = real(key, v)?,
            ("numerics", "a_hi") => n.a_hi = real(key, v)?,
            ("numerics", "a_rel_tol") => n.a_rel_tol = real(key, v)?,
            ("output", "out") => o.out = Some(v.into()),
            ("output", "csv") => o.csv = Some(v.into()),
            ("output", "threads") => o.threads = Some(parse(key, v)?),
            ("output", "strict") => o.strict = parse(key, v)?,
            _ => {
                let name = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
                return Err(Error::Config(format!("unknown config key {name:?}")));
            }
        }
        Ok(())
    }

    /// Applies `section.key=value` (or `key=value` for top-level keys).
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
        let (section, key) = path.trim().rsplit_once('.').unwrap_or(("", path.trim()));
        self.set(section, key, value)
    }

    /// Applies the flat text format on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(&section, key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Reads a config file: JSON (a resolved config, or a whole report) or the flat text format.
    /// Output settings already in `self` are kept.
    pub fn load(&mut self, text: &str) -> Result<()> {
        if text.trim_start().starts_with('{') {
            let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("bad JSON config: {e}")))?;
            let v = match v.get("config") {
                Some(inner) if v.get("command").is_some() => inner.clone(),
                _ => v,
            };
            let output = std::mem::take(&mut self.output);
            *self = serde_json::from_value(v).map_err(|e| Error::Config(format!("bad JSON config: {e}")))?;
            self.output = output;
            Ok(())
        } else {
            self.apply_text(text)
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config is serializable")
    }

    /// The seed; an error if it was never resolved.
    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("no seed".into()))
    }

    pub fn quadrature(&self) -> Quadrature {
        let n = &self.numerics;
        Quadrature { rel_tol: n.quad_rel_tol, abs_tol: n.quad_abs_tol, max_depth: n.quad_max_depth }
    }

    pub fn power(&self) -> PowerIteration {
        PowerIteration { tol: self.numerics.eigen_tol, max_iter: self.numerics.eigen_max_iter }
    }

    pub fn a_search(&self) -> ASearch {
        let n = &self.numerics;
        ASearch { lo: n.a_lo, hi: n.a_hi, rel_tol: n.a_rel_tol }
    }

    pub fn grid(&self) -> Result<Option<GridSpec>> {
        match self.run.grid.as_str() {
            "auto" => Ok(None),
            g => g.parse().map(Some),
        }
    }

    pub fn method(&self) -> Result<Method> {
        Method::parse(&self.run.method)
    }

    /// `Some(a)`, or `None` for `auto`.
    pub fn a(&self) -> Result<Option<f64>> {
        match self.run.a.as_str() {
            "auto" => Ok(None),
            s => {
                let a = real("a", s)?;
                if a >= 0.0 && a.is_finite() {
                    Ok(Some(a))
                } else {
                    Err(Error::Config(format!("a must be a non-negative number or auto, got {s:?}")))
                }
            }
        }
    }

    pub fn offspring(&self) -> Result<Option<GwConfig>> {
        match self.model.offspring.as_str() {
            "binary" => Ok(None),
            s => {
                let w = s.split(',').map(|p| real("offspring", p)).collect::<Result<Vec<_>>>()?;
                GwConfig::new(w).map(Some)
            }
        }
    }

    /// Mean offspring: `run.mu` if given, else the tree's.
    pub fn mu(&self) -> Result<f64> {
        match self.run.mu.as_str() {
            "auto" => Ok(self.offspring()?.map_or(2.0, |g| g.mean())),
            s => real("mu", s),
        }
    }

    pub fn threshold(&self) -> Result<f64> {
        threshold_for(self.mu()?)
    }

    pub fn initial(&self) -> Result<InitialState> {
        match self.model.initial.as_str() {
            "stationary" => Ok(InitialState::Stationary),
            s => real("initial", s).map(InitialState::State),
        }
    }

    fn intensity(&self) -> Result<Intensity> {
        Ok(match self.model.intensity.as_str() {
            "x" => Intensity::Identity,
            "x^2" => Intensity::Square,
            "1+x^2" => Intensity::OnePlusSquare,
            s => Intensity::Constant(real("intensity", s)?),
        })
    }

    fn law(&self) -> Result<MeanFieldLaw> {
        let s = self.model.law.as_str();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let bad = || Error::Config(format!("law: cannot parse {s:?}"));
        let list = |t: &str| t.split(',').map(|p| real("law", p)).collect::<Result<Vec<f64>>>();
        Ok(match kind {
            "point" => MeanFieldLaw::PointMass(real("law", rest)?),
            "exponential" => MeanFieldLaw::Exponential { rate: real("law", rest)? },
            "uniform" => {
                let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
                MeanFieldLaw::Uniform { lo: real("law", lo)?, hi: real("law", hi)? }
            }
            "atoms" => {
                let (v, w) = rest.split_once('|').ok_or_else(bad)?;
                MeanFieldLaw::Atoms { values: list(v)?, weights: list(w)? }
            }
            _ => return Err(bad()),
        })
    }

    /// The Markov kernel of the model; `None` for models without one.
    pub fn kernel(&self) -> Result<Option<SharedKernel>> {
        let m = &self.model;
        Ok(Some(match m.name.as_str() {
            "yule" | "alpha" => return Ok(None),
            "birth-death" => Arc::new(BirthDeathKernel::new(m.betas.parse::<BetaSpec>()?, m.j)?),
            "bessel" => Arc::new(BesselKernel::new()),
            "kpp" => Arc::new(KppKernel::new()?),
            "mean-field" => Arc::new(MeanFieldKernel::new(self.law()?, self.intensity()?)?),
            "cycle" => Arc::new(MatrixKernel::cycle(m.j, self.intensity()?)?),
            other => {
                return Err(Error::Config(format!("unknown model {other:?}; expected one of {}", MODEL_NAMES.join(", "))))
            }
        }))
    }

    /// Like `kernel`, but models without a kernel are an error.
    pub fn require_kernel(&self) -> Result<SharedKernel> {
        self.kernel()?.ok_or_else(|| {
            Error::Config(format!("model {:?} has no Markov kernel; this command needs one", self.model.name))
        })
    }

    pub fn cascade(&self) -> Result<CascadeModel> {
        let m = &self.model;
        let base = match m.name.as_str() {
            "yule" => CascadeModel::yule(),
            "alpha" => CascadeModel::generation_scaled(m.alpha)?,
            _ => CascadeModel::markov(self.require_kernel()?, self.initial()?),
        };
        let siblings = match m.siblings.as_str() {
            "independent" => SiblingCoupling::Independent,
            "joint" => SiblingCoupling::Joint,
            s => return Err(Error::Config(format!("siblings must be independent or joint, got {s:?}"))),
        };
        let tree = self.offspring()?.map_or(TreeShape::Binary, TreeShape::GaltonWatson);
        let model = base.with_scale(m.scale).with_siblings(siblings).with_tree(tree);
        model.validate()?;
        Ok(model)
    }
}

fn whole(key: &str, x: f64) -> Result<u64> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 {
        Ok(x as u64)
    } else {
        Err(Error::Config(format!("{key} must be a non-negative integer, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format_and_comments() {
        let mut c = ExperimentConfig::default();
        c.apply_text("seed = 7 # fixed\n\n[model]\nname = birth-death\nbetas = geometric:0.5\n[run]\nbudget = 1e4\n")
            .unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.model.betas, "geometric:0.5");
        assert_eq!(c.run.budget, 10_000);
        assert!(c.kernel().unwrap().is_some());
    }

    #[test]
    fn unknown_key_and_bad_value() {
        let mut c = ExperimentConfig::default();
        assert!(matches!(c.apply_text("[run]\nhorizon = 3"), Err(Error::Config(_))));
        assert!(matches!(c.apply_text("[run]\nn = -3"), Err(Error::Config(_))));
        assert!(matches!(c.set_assignment("run.budget=0.5"), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip_drops_output() {
        let mut c = ExperimentConfig::default();
        c.set_assignment("seed=11").unwrap();
        c.set_assignment("run.a=auto").unwrap();
        c.set_assignment("output.csv=/tmp/x").unwrap();
        let text = serde_json::to_string(&c.to_json()).unwrap();
        assert!(!text.contains("/tmp/x"));
        let mut back = ExperimentConfig::default();
        back.load(&text).unwrap();
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn model_construction() {
        let mut c = ExperimentConfig::default();
        for (name, law) in [("mean-field", "atoms:1,2|0.5,0.5"), ("mean-field", "uniform:0:1"), ("cycle", "point:1")] {
            c.model.name = name.into();
            c.model.law = law.into();
            c.model.j = 4;
            c.cascade().unwrap();
        }
        c.model.name = "yule".into();
        c.model.offspring = "0.6,0.4".into();
        assert!((c.mu().unwrap() - 0.4).abs() < 1e-15);
        assert!(c.threshold().is_err());
        c.model.name = "nope".into();
        assert!(c.cascade().is_err());
    }
}
