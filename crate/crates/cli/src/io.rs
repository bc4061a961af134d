//! Measure and family files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sperner_lab::{AntichainFamily, Measure, SubsetMask};

use crate::CliError;

/// `{"p": [...], "name": "..."}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// `{"n": 3, "members": ["0x1", "0x6"]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub n: usize,
    pub members: Vec<String>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        // serde_json's message already ends in "at line L column C".
        CliError::Usage(format!("{}: {e}", path.display()))
    })
}

pub fn load_measure(path: &Path) -> Result<Measure, CliError> {
    let file: MeasureFile = parse(path, &read(path)?)?;
    let measure = Measure::new(file.p).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(match file.name {
        Some(name) => measure.with_name(name),
        None => measure,
    })
}

pub fn load_family(path: &Path) -> Result<AntichainFamily, CliError> {
    let file: FamilyFile = parse(path, &read(path)?)?;
    let members = file
        .members
        .iter()
        .map(|m| SubsetMask::parse_hex(file.n, m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    AntichainFamily::new(file.n, members).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

impl From<&AntichainFamily> for FamilyFile {
    fn from(f: &AntichainFamily) -> Self {
        FamilyFile {
            n: f.n(),
            members: f.members().iter().map(|m| m.to_string()).collect(),
        }
    }
}
