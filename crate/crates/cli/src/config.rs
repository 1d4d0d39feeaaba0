//! Job configuration: a single human-editable TOML document with one flat
//! section per concern. Every field has a default; `crlmix print-config`
//! dumps the fully documented template.

use crate::{CliError, CliResult};
use crlmix::prior::{
    baseline_prior, AtomsPrior, Direction, ModelSpec, NigParams, NiwParams, Variant, WeightsPrior,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub job: JobSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub predict: PredictSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub elicit: ElicitSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JobSection {
    /// Input path: a dataset CSV for fit/compare, a draws file for
    /// curves/predict.
    pub input: Option<PathBuf>,
    /// Output directory (default `./crlmix-out`).
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Z-score the covariate columns (intercept excluded); the transform is
    /// recorded in the job manifest and reused for grid construction.
    #[serde(default)]
    pub standardize: bool,
    /// Name of the response column.
    #[serde(default = "default_y_column")]
    pub y_column: String,
}

fn default_y_column() -> String {
    "y".to_string()
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection { standardize: false, y_column: default_y_column() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `general`, `common-weights` or `common-atoms`.
    #[serde(default = "default_variant")]
    pub variant: String,
    /// Stick-breaking truncation level.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Use the baseline prior for anything not explicitly overridden.
    #[serde(default = "default_true")]
    pub baseline: bool,
    /// Regression-atom hyperparameters applied to every category stage.
    pub atoms: Option<AtomsBlock>,
    /// Per-stage regression-atom hyperparameters (length `C-1`).
    pub atoms_per_category: Option<Vec<AtomsBlock>>,
    /// Scalar-atom hyperparameters (common-atoms variant).
    pub atoms_scalar: Option<ScalarAtomsBlock>,
    pub atoms_scalar_per_category: Option<Vec<ScalarAtomsBlock>>,
    /// Weight-process hyperparameters.
    pub weights: Option<WeightsBlock>,
}

fn default_variant() -> String {
    "general".to_string()
}

fn default_truncation() -> usize {
    50
}

fn default_true() -> bool {
    true
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            variant: "general".to_string(),
            truncation: 50,
            baseline: true,
            atoms: None,
            atoms_per_category: None,
            atoms_scalar: None,
            atoms_scalar_per_category: None,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomsBlock {
    pub mu0: Vec<f64>,
    /// Row-major positive-definite matrix.
    pub lambda0: Vec<Vec<f64>>,
    pub kappa0: f64,
    pub nu0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarAtomsBlock {
    pub mu0: f64,
    pub nu0: f64,
    pub a0: f64,
    pub b0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WeightsBlock {
    pub gamma0: Option<Vec<f64>>,
    pub gamma_cov0: Option<Vec<Vec<f64>>>,
    pub a_alpha: Option<f64>,
    pub b_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_thin")]
    pub thin: u64,
    #[serde(default)]
    pub parallel_categories: bool,
}

fn default_iterations() -> u64 {
    30_000
}

fn default_burn_in() -> u64 {
    10_000
}

fn default_thin() -> u64 {
    5
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { iterations: 30_000, burn_in: 10_000, thin: 5, parallel_categories: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// 1-based index of the covariate to sweep (among non-intercept columns).
    #[serde(default = "default_one")]
    pub covariate: usize,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Bounds in original units; default: the observed range.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

fn default_one() -> usize {
    1
}

fn default_points() -> usize {
    50
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { covariate: 1, points: 50, lo: None, hi: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PredictSection {
    /// Covariate rows in original units, intercept excluded.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// `example1` (three-component mixture, one covariate), `example2`
    /// (latent probit, one covariate) or `example3` (two covariates,
    /// non-linear logits).
    #[serde(default = "default_design")]
    pub design: String,
    #[serde(default = "default_sim_n")]
    pub n: usize,
    /// Full parameter overrides; defaults are used when absent.
    pub example1: Option<crlmix::simdata::MixtureDesign>,
    pub example2: Option<crlmix::simdata::ProbitDesign>,
    pub example3: Option<crlmix::simdata::SurfaceDesign>,
}

fn default_design() -> String {
    "example2".to_string()
}

fn default_sim_n() -> usize {
    100
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { design: "example2".to_string(), n: 100, example1: None, example2: None, example3: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElicitSection {
    /// `baseline` or `monotone`.
    #[serde(default = "default_elicit_kind")]
    pub kind: String,
    #[serde(default = "default_elicit_c")]
    pub c: usize,
    #[serde(default = "default_elicit_p")]
    pub p: usize,
    /// Calibration numbers (a1, a2, a3, a4) for the monotone solver.
    #[serde(default = "default_elicit_a")]
    pub a: Vec<f64>,
    /// `increasing` or `decreasing`.
    #[serde(default = "default_elicit_direction")]
    pub direction: String,
    pub kappa0: Option<f64>,
    pub nu0: Option<f64>,
}

fn default_elicit_kind() -> String {
    "baseline".to_string()
}

fn default_elicit_c() -> usize {
    3
}

fn default_elicit_p() -> usize {
    2
}

fn default_elicit_a() -> Vec<f64> {
    vec![10.0, 10.0, 6.0, 2.0]
}

fn default_elicit_direction() -> String {
    "decreasing".to_string()
}

impl Default for ElicitSection {
    fn default() -> Self {
        ElicitSection {
            kind: "baseline".to_string(),
            c: 3,
            p: 2,
            a: vec![10.0, 10.0, 6.0, 2.0],
            direction: "decreasing".to_string(),
            kappa0: None,
            nu0: None,
        }
    }
}

impl JobConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn variant(&self) -> CliResult<Variant> {
        match self.model.variant.as_str() {
            "general" => Ok(Variant::General),
            "common-weights" => Ok(Variant::CommonWeights),
            "common-atoms" => Ok(Variant::CommonAtoms),
            other => Err(CliError::Config(format!(
                "unknown model variant '{other}' (expected general | common-weights | common-atoms)"
            ))),
        }
    }

    /// Assembles the model specification for a dataset with `c` categories
    /// and `p` design columns: the baseline prior with any explicit
    /// hyperparameter blocks layered on top.
    pub fn build_model(&self, c: usize, p: usize) -> CliResult<ModelSpec> {
        self.build_model_for_variant(self.variant()?, c, p)
    }

    pub fn build_model_for_variant(&self, variant: Variant, c: usize, p: usize) -> CliResult<ModelSpec> {
        let mut spec = baseline_prior(c, p, variant).map_err(CliError::from_setup)?;
        spec.truncation = self.model.truncation;
        let m = &self.model;
        if !m.baseline
            && m.atoms.is_none()
            && m.atoms_per_category.is_none()
            && m.atoms_scalar.is_none()
            && m.atoms_scalar_per_category.is_none()
            && m.weights.is_none()
        {
            return Err(CliError::Config(
                "baseline = false but no hyperparameter blocks were given".to_string(),
            ));
        }

        match (&mut spec.atoms, variant) {
            (AtomsPrior::Regression(per_j), Variant::General | Variant::CommonWeights) => {
                if let Some(block) = &m.atoms {
                    let niw = block.to_niw(p)?;
                    for slot in per_j.iter_mut() {
                        *slot = niw.clone();
                    }
                }
                if let Some(blocks) = &m.atoms_per_category {
                    if blocks.len() != c - 1 {
                        return Err(CliError::Config(format!(
                            "atoms_per_category needs {} blocks, got {}",
                            c - 1,
                            blocks.len()
                        )));
                    }
                    for (slot, block) in per_j.iter_mut().zip(blocks) {
                        *slot = block.to_niw(p)?;
                    }
                }
            }
            (AtomsPrior::Scalar(per_j), Variant::CommonAtoms) => {
                if let Some(block) = &m.atoms_scalar {
                    for slot in per_j.iter_mut() {
                        *slot = block.to_nig();
                    }
                }
                if let Some(blocks) = &m.atoms_scalar_per_category {
                    if blocks.len() != c - 1 {
                        return Err(CliError::Config(format!(
                            "atoms_scalar_per_category needs {} blocks, got {}",
                            c - 1,
                            blocks.len()
                        )));
                    }
                    for (slot, block) in per_j.iter_mut().zip(blocks) {
                        *slot = block.to_nig();
                    }
                }
            }
            _ => unreachable!("baseline_prior pairs blocks with the variant"),
        }

        if let Some(w) = &m.weights {
            match &mut spec.weights {
                WeightsPrior::Lsbp { gamma0, gamma_cov0 } => {
                    if let Some(g0) = &w.gamma0 {
                        if g0.len() != p {
                            return Err(CliError::Config(format!("gamma0 must have length {p}")));
                        }
                        *gamma0 = DVector::from_column_slice(g0);
                    }
                    if let Some(cov) = &w.gamma_cov0 {
                        *gamma_cov0 = rows_to_matrix(cov, p, "gamma_cov0")?;
                    }
                }
                WeightsPrior::Dp { a_alpha, b_alpha } => {
                    if let Some(a) = w.a_alpha {
                        *a_alpha = a;
                    }
                    if let Some(b) = w.b_alpha {
                        *b_alpha = b;
                    }
                }
            }
        }

        spec.validate().map_err(CliError::from_setup)?;
        Ok(spec)
    }

    pub fn run_config(&self, seed: u64) -> CliResult<crlmix::RunConfig> {
        let cfg = crlmix::RunConfig::new(self.run.iterations, self.run.burn_in, self.run.thin, seed)
            .with_parallel_categories(self.run.parallel_categories);
        cfg.validate().map_err(CliError::from_setup)?;
        Ok(cfg)
    }

    pub fn elicit_direction(&self) -> CliResult<Direction> {
        match self.elicit.direction.as_str() {
            "increasing" => Ok(Direction::Increasing),
            "decreasing" => Ok(Direction::Decreasing),
            other => Err(CliError::Config(format!(
                "unknown direction '{other}' (expected increasing | decreasing)"
            ))),
        }
    }
}

impl AtomsBlock {
    fn to_niw(&self, p: usize) -> CliResult<NiwParams> {
        if self.mu0.len() != p {
            return Err(CliError::Config(format!("atoms.mu0 must have length {p}")));
        }
        Ok(NiwParams {
            mu0: DVector::from_column_slice(&self.mu0),
            lambda0: rows_to_matrix(&self.lambda0, p, "atoms.lambda0")?,
            kappa0: self.kappa0,
            nu0: self.nu0,
        })
    }
}

impl ScalarAtomsBlock {
    fn to_nig(&self) -> NigParams {
        NigParams { mu0: self.mu0, nu0: self.nu0, a0: self.a0, b0: self.b0 }
    }
}

fn rows_to_matrix(rows: &[Vec<f64>], p: usize, what: &str) -> CliResult<DMatrix<f64>> {
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(CliError::Config(format!("{what} must be a {p}x{p} matrix")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(p, p, &flat))
}

/// The documented default configuration dumped by `print-config`.
pub const CONFIG_TEMPLATE: &str = r#"# crlmix job configuration. Every key is optional; the values shown are the
# defaults. Flags --seed, --threads and --output override [job] entries.

[job]
# input = "data.csv"        # dataset CSV (fit/compare) or draws file (curves/predict)
# output = "crlmix-out"     # output directory, one per job
# seed = 17
# threads = 1

[data]
standardize = false         # z-score covariates; transform recorded in the manifest
y_column = "y"

[model]
variant = "general"         # general | common-weights | common-atoms
truncation = 50             # stick-breaking truncation level L
baseline = true             # baseline prior for everything not overridden below

# [model.atoms]             # regression atoms (general / common-weights), all stages
# mu0 = [0.0, 0.0]
# lambda0 = [[100.0, 0.0], [0.0, 100.0]]
# kappa0 = 4.0
# nu0 = 4.0

# [model.atoms_scalar]      # scalar atoms (common-atoms)
# mu0 = 0.0
# nu0 = 2.0
# a0 = 2.0
# b0 = 5.0

# [model.weights]           # stick-breaking (gamma*) or DP mass (a/b_alpha)
# gamma0 = [0.0, 0.0]
# gamma_cov0 = [[100.0, 0.0], [0.0, 100.0]]
# a_alpha = 2.0
# b_alpha = 1.0

[run]
iterations = 30000
burn_in = 10000
thin = 5
parallel_categories = false

[grid]
covariate = 1               # which covariate a first-order curve sweeps
points = 50
# lo = -10.0                # bounds in original units; default: observed range
# hi = 10.0

[predict]
rows = []                   # covariate rows (original units, no intercept)

[simulate]
design = "example2"         # example1 | example2 | example3
n = 100
# [simulate.example2]       # full parameter override for the chosen design
# intercept = 0.0
# slope = 0.3
# cutoffs = [-1.5, 1.5]
# x_range = [-10.0, 10.0]

[elicit]
kind = "baseline"           # baseline | monotone
c = 3
p = 2
a = [10.0, 10.0, 6.0, 2.0]  # monotone solver calibration (a1, a2, a3, a4)
direction = "decreasing"
# kappa0 = 4.0              # default: p + 2
# nu0 = 4.0
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_parses_to_defaults() {
        let cfg: JobConfig = toml::from_str(CONFIG_TEMPLATE).unwrap();
        assert_eq!(cfg.model.truncation, 50);
        assert_eq!(cfg.run.iterations, 30_000);
        assert!(cfg.model.baseline);
        assert_eq!(cfg.data.y_column, "y");
    }

    #[test]
    fn variant_strings_resolve() {
        let mut cfg = JobConfig::default();
        for (s, v) in [
            ("general", Variant::General),
            ("common-weights", Variant::CommonWeights),
            ("common-atoms", Variant::CommonAtoms),
        ] {
            cfg.model.variant = s.to_string();
            assert_eq!(cfg.variant().unwrap(), v);
        }
        cfg.model.variant = "bogus".to_string();
        assert!(cfg.variant().is_err());
    }

    #[test]
    fn model_overrides_apply() {
        let text = r#"
[model]
variant = "common-weights"
truncation = 25
baseline = true
[model.weights]
a_alpha = 3.0
b_alpha = 2.0
"#;
        let cfg: JobConfig = toml::from_str(text).unwrap();
        let spec = cfg.build_model(3, 2).unwrap();
        assert_eq!(spec.truncation, 25);
        match spec.weights {
            WeightsPrior::Dp { a_alpha, b_alpha } => {
                assert_eq!(a_alpha, 3.0);
                assert_eq!(b_alpha, 2.0);
            }
            _ => panic!("expected DP weights"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<JobConfig>("[model]\nbogus_key = 1\n").is_err());
    }
}
