//! JSON model configuration files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Fugacities, InteractionMatrix, ModelSpec, Region};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    pub side_length: f64,
    pub types: Vec<TypeConfig>,
    pub interaction: InteractionConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TypeConfig {
    pub name: String,
    pub fugacity: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub preset: Preset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    HardSphere,
    WidomRowlinson,
    Matrix,
}

impl ModelConfig {
    /// Parses and validates a configuration, naming the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ModelConfig = serde_json::from_str(text).map_err(|e| Error::invalid(json_field(&e), e.to_string()))?;
        config.to_model()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_model(&self) -> Result<ModelSpec> {
        if self.types.is_empty() {
            return Err(Error::invalid("types", "at least one particle type is required"));
        }
        let region = Region::new(self.dimension, self.side_length)?;
        let fugacities = Fugacities::new(self.types.iter().map(|t| t.fugacity).collect())?;
        let q = self.types.len();
        let i = &self.interaction;
        let unused = |name: &str, present: bool| -> Result<()> {
            if present {
                Err(Error::invalid(format!("interaction.{name}"), format!("not used by preset {:?}", i.preset)))
            } else {
                Ok(())
            }
        };
        let interaction = match i.preset {
            Preset::HardSphere => {
                unused("radii", i.radii.is_some())?;
                unused("matrix", i.matrix.is_some())?;
                if q != 1 {
                    return Err(Error::invalid("types", format!("hard_sphere needs exactly one type, got {q}")));
                }
                let r = i.radius.ok_or_else(|| Error::invalid("interaction.radius", "missing"))?;
                check_radius("interaction.radius", r)?;
                InteractionMatrix::new(1, vec![2.0 * r])?
            }
            Preset::WidomRowlinson => {
                unused("matrix", i.matrix.is_some())?;
                let radii = match (&i.radius, &i.radii) {
                    (Some(_), Some(_)) => {
                        return Err(Error::invalid("interaction.radius", "give either radius or radii, not both"))
                    }
                    (Some(r), None) => {
                        check_radius("interaction.radius", *r)?;
                        vec![*r; q]
                    }
                    (None, Some(radii)) => {
                        if radii.len() != q {
                            return Err(Error::invalid(
                                "interaction.radii",
                                format!("{} radii given for {q} types", radii.len()),
                            ));
                        }
                        for (k, &r) in radii.iter().enumerate() {
                            check_radius(&format!("interaction.radii[{k}]"), r)?;
                        }
                        radii.clone()
                    }
                    (None, None) => return Err(Error::invalid("interaction.radii", "missing")),
                };
                let mut entries = vec![0.0; q * q];
                for a in 0..q {
                    for b in 0..q {
                        if a != b {
                            entries[a * q + b] = radii[a] + radii[b];
                        }
                    }
                }
                InteractionMatrix::new(q, entries)?
            }
            Preset::Matrix => {
                unused("radius", i.radius.is_some())?;
                unused("radii", i.radii.is_some())?;
                let rows = i.matrix.as_ref().ok_or_else(|| Error::invalid("interaction.matrix", "missing"))?;
                if rows.len() != q {
                    return Err(Error::invalid(
                        "interaction.matrix",
                        format!("{} rows given for {q} types", rows.len()),
                    ));
                }
                InteractionMatrix::from_rows(rows)?
            }
        };
        ModelSpec::new(region, interaction, fugacities)
    }

    pub fn type_names(&self) -> Vec<String> {
        self.types.iter().map(|t| t.name.clone()).collect()
    }
}

fn check_radius(field: &str, r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be a non-negative finite number, got {r}")))
    }
}

/// Best-effort field name for serde errors.
fn json_field(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for marker in ["missing field `", "unknown field `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    for field in ["dimension", "side_length", "types", "interaction", "preset", "fugacity", "name"] {
        if msg.contains(field) {
            return field.to_string();
        }
    }
    format!("config (line {}, column {})", e.line(), e.column())
}
