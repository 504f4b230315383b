//! Declarative scenario files (TOML). Unknown keys are errors.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shiftcert::certify::Model;
use shiftcert::coeffs::TailFlag;
use shiftcert::inner::Atom;
use shiftcert::shifts::TruncationWindow;
use shiftcert::{CoeffVector, Complex64, InnerFn, SingularMeasure, WeightSequence};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub weight: WeightSpec,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(default)]
    pub vector: VectorSpec,
    pub truncation: Truncation,
    #[serde(default = "default_xi_grid")]
    pub xi_grid: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub block: Option<BlockSpec>,
    pub weights_make: Option<WeightsMakeSpec>,
}

fn default_xi_grid() -> usize {
    64
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant,
    Geometric { base: f64 },
    ExpPower { scale: f64, power: f64 },
    ExpSqrt,
    Polynomial { power: f64 },
    LogExp { beta: f64 },
    LogLogPower { a: f64 },
    Bergman { alpha: f64 },
}

impl WeightSpec {
    pub fn build(&self) -> WeightSequence {
        use shiftcert::weights::Preset;
        match *self {
            WeightSpec::Constant => WeightSequence::constant(),
            WeightSpec::Geometric { base } => WeightSequence::geometric(base),
            WeightSpec::ExpPower { scale, power } => WeightSequence::preset(Preset::ExpPower { scale, power }),
            WeightSpec::ExpSqrt => WeightSequence::exp_sqrt(),
            WeightSpec::Polynomial { power } => WeightSequence::polynomial(power),
            WeightSpec::LogExp { beta } => WeightSequence::log_exp(beta),
            WeightSpec::LogLogPower { a } => WeightSequence::log_log_power(a),
            WeightSpec::Bergman { alpha } => WeightSequence::bergman(alpha),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub angle: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSpec {
    /// `g = χ^{-1}`.
    #[default]
    ChiMinusOne,
    Monomial { index: i64 },
    /// `g^(k) = exp(-rate √k)` for `0 <= k < len`.
    ExpSqrtDecay { rate: f64, len: usize },
    Coefficients {
        offset: i64,
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

impl VectorSpec {
    pub fn build(&self) -> Result<CoeffVector, String> {
        Ok(match self {
            VectorSpec::ChiMinusOne => CoeffVector::monomial(-1),
            VectorSpec::Monomial { index } => CoeffVector::monomial(*index),
            VectorSpec::ExpSqrtDecay { rate, len } => {
                let v: Vec<f64> = (0..*len).map(|k| (-rate * (k as f64).sqrt()).exp()).collect();
                CoeffVector::from_real(0, &v, TailFlag::Closed)
            }
            VectorSpec::Coefficients { offset, re, im } => {
                if !im.is_empty() && im.len() != re.len() {
                    return Err("vector.im must be empty or as long as vector.re".into());
                }
                let v = re.iter().enumerate().map(|(i, r)| Complex64::new(*r, im.get(i).copied().unwrap_or(0.0))).collect();
                CoeffVector::new(*offset, v, TailFlag::Closed)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Bilateral,
    Unilateral,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(default = "default_model")]
    pub model: ModelSpec,
    pub n_coeffs: usize,
    pub window_lo: i64,
    pub window_hi: i64,
}

fn default_model() -> ModelSpec {
    ModelSpec::Bilateral
}

impl Truncation {
    pub fn model(&self) -> Model {
        match self.model {
            ModelSpec::Bilateral => Model::Bilateral,
            ModelSpec::Unilateral => Model::Unilateral,
        }
    }

    pub fn window(&self) -> Result<TruncationWindow, String> {
        TruncationWindow::new(self.window_lo, self.window_hi).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tail_tol: f64,
    pub residual_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tail_tol: 1e-8, residual_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub alpha: f64,
    pub windows: Vec<usize>,
    pub n_max: usize,
    #[serde(default = "one")]
    pub coupling_scale: f64,
    #[serde(default = "default_eig_window")]
    pub eig_window: usize,
    #[serde(default = "default_rings")]
    pub eig_rings: usize,
    #[serde(default = "default_rays")]
    pub eig_rays: usize,
    #[serde(default = "default_rmax")]
    pub eig_rmax: f64,
    #[serde(default = "default_phi_degree")]
    pub phi_degree: usize,
    /// Skip hypothesis gates (controls only).
    #[serde(default)]
    pub ungated: bool,
}

fn one() -> f64 {
    1.0
}
fn default_eig_window() -> usize {
    100
}
fn default_rings() -> usize {
    4
}
fn default_rays() -> usize {
    8
}
fn default_rmax() -> f64 {
    0.9
}
fn default_phi_degree() -> usize {
    50
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsMakeSpec {
    /// `β_n = (n+1)^beta_power` for `n < len`.
    Dominated { beta_power: f64, len: usize },
    /// `ε_n = (n+1)^{-eps_power}` for `n < len`.
    Summable { eps_power: f64, len: usize },
    Step { breakpoints: Vec<i64> },
}

/// A parsed scenario with the SHA-256 of its file bytes.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub scenario: Scenario,
    pub hash: String,
    pub path: String,
}

impl Scenario {
    pub fn parse(text: &str, path: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse { path: path.into(), message: parse_message(text, &e) })?;
        s.validate().map_err(|message| ScenarioError::Invalid { path: path.into(), message })?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err("id must be nonempty and use only [A-Za-z0-9_-]".into());
        }
        if !(self.tolerances.tail_tol > 0.0) || !(self.tolerances.residual_tol > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if self.xi_grid == 0 {
            return Err("xi_grid must be positive".into());
        }
        self.truncation.window()?;
        self.measure()?;
        self.vector.build()?;
        if let Some(b) = &self.block {
            if b.windows.is_empty() || b.windows.contains(&0) || b.n_max == 0 {
                return Err("block.windows must be nonempty and positive, block.n_max >= 1".into());
            }
        }
        Ok(())
    }

    pub fn measure(&self) -> Result<SingularMeasure, String> {
        let atoms = self.measure.atoms.iter().map(|a| Atom { angle: a.angle, mass: a.mass }).collect();
        SingularMeasure::new(atoms).map_err(|e| e.to_string())
    }

    pub fn inner(&self) -> InnerFn {
        InnerFn::new(self.measure().expect("validated"))
    }

    pub fn g(&self) -> CoeffVector {
        self.vector.build().expect("validated")
    }
}

/// Tagged tables are buffered by serde, so toml reports their unknown keys at
/// the table header. Locate the key itself inside that table.
fn parse_message(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message();
    let field = msg.strip_prefix("unknown field `").and_then(|r| r.split('`').next());
    let (Some(field), Some(span)) = (field, e.span()) else {
        return e.to_string();
    };
    let first = text[..span.start.min(text.len())].matches('\n').count();
    for (i, line) in text.lines().enumerate().skip(first) {
        let t = line.trim_start();
        if i > first && t.starts_with('[') {
            break;
        }
        let key = t.split('=').next().unwrap_or("").trim().trim_matches('"');
        if t.contains('=') && key == field {
            let col = line.len() - t.len() + 1;
            return format!("TOML parse error at line {}, column {col}\n{}\n{msg}", i + 1, line);
        }
    }
    e.to_string()
}

pub fn load(path: &Path) -> Result<Loaded, ScenarioError> {
    let p = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| ScenarioError::Io { path: p.clone(), source })?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| ScenarioError::Parse { path: p.clone(), message: e.to_string() })?;
    let scenario = Scenario::parse(&text, &p)?;
    Ok(Loaded { scenario, hash: hex::encode(Sha256::digest(&bytes)), path: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
id = "t"
[weight]
preset = "log_exp"
beta = 0.5
[truncation]
n_coeffs = 10
window_lo = -20
window_hi = 20
"#;

    #[test]
    fn minimal_defaults() {
        let s = Scenario::parse(MIN, "t.toml").unwrap();
        assert_eq!(s.xi_grid, 64);
        assert!(s.measure.atoms.is_empty());
        assert_eq!(s.g().support().collect::<Vec<_>>(), vec![-1]);
    }

    #[test]
    fn unknown_key_is_line_precise() {
        let bad = MIN.replace("beta = 0.5", "beta = 0.5\nbetta = 1.0");
        let e = Scenario::parse(&bad, "t.toml").unwrap_err().to_string();
        assert!(e.contains("line 6"), "{e}");
        assert!(e.contains("betta"), "{e}");
        let bad = format!("{MIN}\nxi_gird = 3\n");
        assert!(Scenario::parse(&bad, "t.toml").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = format!("{MIN}\n[tolerances]\ntail_tol = -1.0\nresidual_tol = 1e-6\n");
        assert!(matches!(Scenario::parse(&bad, "t.toml"), Err(ScenarioError::Invalid { .. })));
        let bad = format!("{MIN}\n[measure]\natoms = [{{ angle = 0.0, mass = -1.0 }}]\n");
        assert!(Scenario::parse(&bad, "t.toml").is_err());
        let bad = MIN.replace("preset = \"log_exp\"", "preset = \"nope\"");
        assert!(Scenario::parse(&bad, "t.toml").is_err());
    }
}
