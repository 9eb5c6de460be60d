//! Measure specifiers, file loading, and the usage-error type.

use cantor_core::measures::{
    CylinderAssignment, FiniteTree, MeasureError, MeasureOracle, PeriodicPoint,
};
use cantor_core::mltests::{MlTest, TestFamily};
use cantor_core::rational::DyadicRational;
use cantor_core::settling::StageEnumeration;
use cantor_core::transforms::{MonotoneFunctional, TransformError};
use std::fmt;
use std::fs;

/// Anything that should terminate the process with exit code 2.
#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn usage(message: String) -> Self {
        CliError(message)
    }

    fn in_file(path: &str, detail: impl fmt::Display) -> Self {
        CliError(format!("{path}: {detail}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        CliError(e.to_string())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError(e.to_string())
    }
}

impl From<cantor_core::mltests::TestError> for CliError {
    fn from(e: cantor_core::mltests::TestError) -> Self {
        CliError(e.to_string())
    }
}

impl From<cantor_core::settling::SettlingError> for CliError {
    fn from(e: cantor_core::settling::SettlingError) -> Self {
        CliError(e.to_string())
    }
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))
}

/// Resolve a measure specifier: `lebesgue`, `dirac:<point>`,
/// `bernoulli:<dyadic>`, or a path to a `measure v1` file.
pub fn load_measure(spec: &str) -> Result<MeasureOracle, CliError> {
    if spec == "lebesgue" {
        return Ok(MeasureOracle::lebesgue());
    }
    if let Some(point) = spec.strip_prefix("dirac:") {
        let point: PeriodicPoint = point
            .parse()
            .map_err(|e| CliError::usage(format!("dirac point: {e}")))?;
        return Ok(MeasureOracle::dirac(point));
    }
    if let Some(p) = spec.strip_prefix("bernoulli:") {
        let p: DyadicRational = p
            .parse()
            .map_err(|e| CliError::usage(format!("bernoulli parameter: {e}")))?;
        return MeasureOracle::bernoulli(p).map_err(CliError::from);
    }
    Ok(MeasureOracle::from_assignment(load_assignment(spec)?))
}

pub fn load_assignment(path: &str) -> Result<CylinderAssignment, CliError> {
    CylinderAssignment::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

pub fn load_functional(path: &str) -> Result<MonotoneFunctional, CliError> {
    MonotoneFunctional::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

pub fn load_test(path: &str) -> Result<MlTest, CliError> {
    MlTest::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

pub fn load_family(path: &str) -> Result<TestFamily, CliError> {
    TestFamily::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

pub fn load_tree(path: &str) -> Result<FiniteTree, CliError> {
    FiniteTree::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))
}

pub fn load_enumeration(path: &str) -> Result<StageEnumeration, CliError> {
    StageEnumeration::parse(&read(path)?).map_err(|e| CliError::in_file(path, e))
}
