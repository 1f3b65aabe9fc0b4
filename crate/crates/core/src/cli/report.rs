use serde::Serialize;
use serde_json::Value;

use crate::action::{FixedPointClass, ValidationReport, WeightData};
use crate::error::Error;
use crate::extend::{InjectivityDomain, SaturationResult};
use crate::linalg;
use crate::linearize::{ConjugacyReport, Normalization, Reconstruction};

use super::format::Document;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// Every configuration and tolerance the command ran with.
    pub settings: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightsRecord {
    pub weights: Vec<i64>,
    /// Columns are eigenvectors, rows of `[re, im]` pairs.
    pub basis: Vec<Vec<[f64; 2]>>,
    pub residual: f64,
}

impl From<&WeightData> for WeightsRecord {
    fn from(w: &WeightData) -> Self {
        WeightsRecord {
            weights: w.weights.clone(),
            basis: linalg::to_rows(&w.basis)
                .into_iter()
                .map(|row| row.into_iter().map(|c| [c.re, c.im]).collect())
                .collect(),
            residual: w.residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitRecord {
    pub max_degree: u32,
    pub fit_residual: f64,
    pub condition: f64,
    pub grid_points: usize,
}

impl FitRecord {
    pub fn new(max_degree: u32, r: &Reconstruction) -> Self {
        FitRecord {
            max_degree,
            fit_residual: r.fit_residual,
            condition: r.condition,
            grid_points: r.grid_points,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionRecord {
    pub y: Vec<[f64; 2]>,
    #[serde(flatten)]
    pub result: SaturationResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: String,
    pub provenance: Provenance,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<FixedPointClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearizer: Option<Document>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjugacy: Option<ConjugacyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<InjectivityDomain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<Vec<ExtensionRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

impl Report {
    pub fn new(command: &'static str, input: String, seed: u64, settings: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            input,
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                seed,
                settings,
            },
            passed: false,
            validation: None,
            weights: None,
            classification: None,
            linearizer: None,
            fit: None,
            normalization: None,
            conjugacy: None,
            domain: None,
            extension: None,
            error: None,
        }
    }

    pub fn fail(&mut self, err: &Error, exit_code: i32) {
        self.passed = false;
        self.error = Some(ErrorRecord {
            kind: error_kind(err),
            message: err.to_string(),
            exit_code,
        });
    }

    /// Pretty JSON. Non-finite numbers have no JSON form and come out as `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Input(_) => "input",
        Error::Domain(_) => "domain",
        Error::NotAPeriodicFlow { .. } => "not_a_periodic_flow",
        Error::NilpotentPartDetected(_) => "nilpotent_part_detected",
        Error::SuspectWeight { .. } => "suspect_weight",
        Error::WeightsUnreliable { .. } => "weights_unreliable",
        Error::IntegrationFailure { .. } => "integration_failure",
        Error::DegreeTooHighForGrid { .. } => "degree_too_high_for_grid",
        Error::DegenerateLinearizer(_) => "degenerate_linearizer",
        Error::NotDicritical(_) => "not_dicritical",
        Error::OrbitNeverEntersDomain { .. } => "orbit_never_enters_domain",
    }
}
