//! Back-annotation inputs for the structural profiler: per-component
//! costs and the technology coefficients of the sbox cascade delay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Costs of one library component. Powers are split into static and
/// dynamic contributions; `total = static + dynamic`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentCosts {
    pub area: f64,
    pub power_static: f64,
    pub power_dynamic: f64,
    /// Combinatorial delay through the component, in ns.
    pub critical_path: f64,
}

/// Component library back-annotation, keyed by component type. SBoxes
/// are library members too, under their width-specific reserved types
/// (`sbox1x2_32`, `sbox2x1_32`, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentAnnotation {
    pub components: BTreeMap<String, ComponentCosts>,
}

#[derive(Debug, Error, PartialEq)]
pub enum AnnotationError {
    #[error("negative value annotated for `{component}`")]
    NegativeValue { component: String },
    #[error("technology row for bit width {0} duplicated")]
    DuplicateTechRow(u32),
    #[error("technology coefficient f({0}) is negative")]
    NegativeTechCoefficient(u32),
}

impl ComponentAnnotation {
    pub fn get(&self, component_type: &str) -> Option<&ComponentCosts> {
        self.components.get(component_type)
    }

    pub fn insert(&mut self, component_type: &str, costs: ComponentCosts) {
        self.components.insert(component_type.to_string(), costs);
    }

    pub fn check(&self) -> Result<(), AnnotationError> {
        for (name, c) in &self.components {
            if c.area < 0.0
                || c.power_static < 0.0
                || c.power_dynamic < 0.0
                || c.critical_path < 0.0
            {
                return Err(AnnotationError::NegativeValue { component: name.clone() });
            }
        }
        Ok(())
    }
}

/// One `(bit width -> f, g)` row of the cascade-delay model
/// `cp = f(b) * ln(n) + g(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechRow {
    pub bit_width: u32,
    pub f: f64,
    pub g: f64,
}

/// Technology-dependent cascade coefficients, exact-match by width.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TechnologyModel {
    pub rows: Vec<TechRow>,
}

impl TechnologyModel {
    pub fn lookup(&self, bit_width: u32) -> Option<(f64, f64)> {
        self.rows
            .iter()
            .find(|r| r.bit_width == bit_width)
            .map(|r| (r.f, r.g))
    }

    pub fn check(&self) -> Result<(), AnnotationError> {
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.rows {
            if !seen.insert(r.bit_width) {
                return Err(AnnotationError::DuplicateTechRow(r.bit_width));
            }
            if r.f < 0.0 {
                return Err(AnnotationError::NegativeTechCoefficient(r.bit_width));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotation_json_round_trips() {
        let mut ann = ComponentAnnotation::default();
        ann.insert(
            "acc",
            ComponentCosts { area: 3.0, power_static: 1.0, power_dynamic: 2.0, critical_path: 4.5 },
        );
        let text = serde_json::to_string(&ann).unwrap();
        let back: ComponentAnnotation = serde_json::from_str(&text).unwrap();
        assert_eq!(ann, back);
        assert!(ann.check().is_ok());
    }

    #[test]
    fn negative_values_are_rejected() {
        let mut ann = ComponentAnnotation::default();
        ann.insert(
            "bad",
            ComponentCosts { area: -1.0, power_static: 0.0, power_dynamic: 0.0, critical_path: 0.0 },
        );
        assert_eq!(ann.check(), Err(AnnotationError::NegativeValue { component: "bad".into() }));
    }

    #[test]
    fn tech_lookup_is_exact_match() {
        let tech = TechnologyModel {
            rows: vec![
                TechRow { bit_width: 8, f: 0.4, g: 1.0 },
                TechRow { bit_width: 32, f: 0.8, g: 1.5 },
            ],
        };
        assert!(tech.check().is_ok());
        assert_eq!(tech.lookup(32), Some((0.8, 1.5)));
        assert_eq!(tech.lookup(16), None);
    }

    #[test]
    fn duplicate_tech_rows_are_rejected() {
        let tech = TechnologyModel {
            rows: vec![
                TechRow { bit_width: 8, f: 0.4, g: 1.0 },
                TechRow { bit_width: 8, f: 0.5, g: 1.1 },
            ],
        };
        assert_eq!(tech.check(), Err(AnnotationError::DuplicateTechRow(8)));
    }
}
