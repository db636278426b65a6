//! Declarative experiment files.

use serde::{Deserialize, Serialize};

use crate::engine::{BetaSchedule, HalpernProblem};
use crate::error::{Error, Result};
use crate::geom::{ModelSpace, SpacePoint};
use crate::mapping::{AlphaRule, Mapping, WSchedule};
use crate::prox::{Cap, ConvexFunction, ConvexSet, Penalty, SolverSettings};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub space: SpaceSpec,
    pub mappings: Vec<MappingSpec>,
    pub alpha: AlphaSpec,
    pub beta: BetaSpec,
    pub u: Vec<f64>,
    pub x1: Vec<f64>,
    pub max_iters: usize,
    pub stop_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    /// Settings for the resolvent solves.
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    UnitSphere {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region: Option<RegionSpec>,
    },
    Segment {
        lo: f64,
        hi: f64,
    },
}

/// Restricts the sphere to a closed cap, which bounds its diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Cap { center: Vec<f64>, radius: f64 },
    Intersection { caps: Vec<CapSpec>, witness: Vec<f64> },
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedTerm {
    pub weight: f64,
    pub function: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Indicator { set: SetSpec },
    Distance { center: Vec<f64> },
    WeightedSum { terms: Vec<WeightedTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MappingSpec {
    Identity,
    CapProjection {
        center: Vec<f64>,
        radius: f64,
    },
    Resolvent {
        penalty: Penalty,
        function: FunctionSpec,
        /// Overrides the top-level solver settings for this mapping.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        solver: Option<SolverSettings>,
    },
    GeodesicContraction {
        p: Vec<f64>,
        lambda: f64,
    },
    SegmentNegation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSpec {
    Constant {
        values: Vec<f64>,
        a: f64,
    },
    /// `low` when `n + i` is even, `high` otherwise.
    Alternating {
        low: f64,
        high: f64,
        a: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaSpec {
    PowerLaw { q: f64 },
    Constant { value: f64 },
    List { values: Vec<f64> },
}

/// How `P_F u` is obtained: given outright as `target`, or computed by
/// grid search and refinement over the declared fixed sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub target: Option<Vec<f64>>,
    /// A point of the common fixed set, used when intersecting caps.
    pub witness: Option<Vec<f64>>,
    /// Points of the global grid.
    pub grid_resolution: usize,
    /// Spacing (radians) the local grids are refined to.
    pub resolution: f64,
    pub refine_tolerance: f64,
    pub max_refine_iters: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            target: None,
            witness: None,
            grid_resolution: 20_000,
            resolution: 1e-7,
            refine_tolerance: 1e-12,
            max_refine_iters: 100_000,
        }
    }
}

impl OracleSpec {
    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            coarse_grid_resolution: self.grid_resolution,
            refine_tolerance: self.refine_tolerance,
            max_refine_iters: self.max_refine_iters,
            zoom_resolution: Some(self.resolution),
        }
    }
}

/// Output file names, relative to the output directory. Unset names are
/// derived from the config file name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub trace: Option<String>,
    pub summary: Option<String>,
    pub oracle: Option<String>,
}

/// A config turned into live objects.
#[derive(Debug, Clone)]
pub struct BuiltExperiment {
    pub space: ModelSpace,
    pub mappings: Vec<Mapping>,
    pub w_schedule: WSchedule,
    pub beta: BetaSchedule,
    pub u: SpacePoint,
    pub x1: SpacePoint,
}

impl BuiltExperiment {
    pub fn problem(
        &self,
        oracle_target: Option<SpacePoint>,
        max_iters: usize,
        stop_tolerance: f64,
        stride: usize,
    ) -> HalpernProblem {
        HalpernProblem {
            space: self.space.clone(),
            mappings: self.mappings.clone(),
            w_schedule: self.w_schedule.clone(),
            beta: self.beta.clone(),
            u: self.u.clone(),
            x1: self.x1.clone(),
            oracle_target,
            max_iters,
            stop_tolerance,
            stride,
        }
    }
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Config(format!("{name}: {e}")))
}

impl ExperimentConfig {
    /// Parses and checks the schema version. Syntax errors carry the line
    /// and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema: unsupported version {}, expected {SCHEMA_VERSION}",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_space(&self) -> Result<ModelSpace> {
        field("space", self.space.build())
    }

    pub fn build(&self) -> Result<BuiltExperiment> {
        let space = self.build_space()?;
        field("solver", self.solver.validate())?;
        let mappings = self
            .mappings
            .iter()
            .enumerate()
            .map(|(i, m)| field(&format!("mappings[{i}]"), m.build(&space, &self.solver)))
            .collect::<Result<Vec<_>>>()?;
        if mappings.is_empty() {
            return Err(Error::Config("mappings: at least one mapping is required".into()));
        }
        let w_schedule = field("alpha", self.alpha.build(mappings.len()))?;
        let beta = field("beta", self.beta.build())?;
        let u = field("u", point(&space, &self.u))?;
        let x1 = field("x1", point(&space, &self.x1))?;
        if !(self.stop_tolerance >= 0.0 && self.stop_tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "stop_tolerance: {} is not a nonnegative number",
                self.stop_tolerance
            )));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride: must be at least 1".into()));
        }
        Ok(BuiltExperiment {
            space,
            mappings,
            w_schedule,
            beta,
            u,
            x1,
        })
    }
}

/// Sphere coordinates are rescaled to unit length.
pub fn point(space: &ModelSpace, coords: &[f64]) -> Result<SpacePoint> {
    space.point_from_direction(coords.to_vec())
}

impl SpaceSpec {
    pub fn build(&self) -> Result<ModelSpace> {
        match self {
            SpaceSpec::UnitSphere { dim, region } => {
                let s = ModelSpace::sphere(*dim)?;
                match region {
                    None => Ok(s),
                    Some(r) => {
                        let c = point(&s, &r.center)?;
                        s.with_region(c, r.radius)
                    }
                }
            }
            SpaceSpec::Segment { lo, hi } => ModelSpace::segment(*lo, *hi),
        }
    }
}

fn cap(space: &ModelSpace, center: &[f64], radius: f64) -> Result<Cap> {
    Cap::new(space, point(space, center)?, radius)
}

impl SetSpec {
    pub fn build(&self, space: &ModelSpace) -> Result<ConvexSet> {
        match self {
            SetSpec::Cap { center, radius } => Ok(ConvexSet::Cap(cap(space, center, *radius)?)),
            SetSpec::Intersection { caps, witness } => {
                let caps = caps
                    .iter()
                    .map(|c| cap(space, &c.center, c.radius))
                    .collect::<Result<Vec<_>>>()?;
                ConvexSet::intersection(space, caps, point(space, witness)?)
            }
            SetSpec::Interval { lo, hi } => ConvexSet::interval(space, *lo, *hi),
        }
    }
}

impl FunctionSpec {
    pub fn build(&self, space: &ModelSpace) -> Result<ConvexFunction> {
        match self {
            FunctionSpec::Indicator { set } => Ok(ConvexFunction::indicator_of(set.build(space)?)),
            FunctionSpec::Distance { center } => ConvexFunction::distance_to(space, point(space, center)?),
            FunctionSpec::WeightedSum { terms } => {
                let parts = terms
                    .iter()
                    .map(|t| Ok((t.weight, t.function.build(space)?)))
                    .collect::<Result<Vec<_>>>()?;
                ConvexFunction::weighted_sum(space, &parts)
            }
        }
    }
}

impl MappingSpec {
    pub fn build(&self, space: &ModelSpace, solver: &SolverSettings) -> Result<Mapping> {
        match self {
            MappingSpec::Identity => Ok(Mapping::identity()),
            MappingSpec::CapProjection { center, radius } => {
                Ok(Mapping::cap_projection(space, cap(space, center, *radius)?))
            }
            MappingSpec::Resolvent {
                penalty,
                function,
                solver: own,
            } => Mapping::resolvent(
                space,
                function.build(space)?,
                *penalty,
                own.clone().unwrap_or_else(|| solver.clone()),
            ),
            MappingSpec::GeodesicContraction { p, lambda } => {
                Mapping::geodesic_contraction(space, point(space, p)?, *lambda)
            }
            MappingSpec::SegmentNegation => Mapping::segment_negation(space),
        }
    }
}

impl AlphaSpec {
    pub fn build(&self, r: usize) -> Result<WSchedule> {
        match self {
            AlphaSpec::Constant { values, a } => {
                if values.len() != r {
                    return Err(Error::InvalidArgument(format!(
                        "{} values for {r} mappings",
                        values.len()
                    )));
                }
                WSchedule::new(r, *a, AlphaRule::Constant(values.clone()))
            }
            AlphaSpec::Alternating { low, high, a } => {
                WSchedule::new(r, *a, AlphaRule::Alternating { low: *low, high: *high })
            }
        }
    }
}

impl BetaSpec {
    pub fn build(&self) -> Result<BetaSchedule> {
        match self {
            BetaSpec::PowerLaw { q } => BetaSchedule::power_law(*q),
            BetaSpec::Constant { value } => BetaSchedule::constant(*value),
            BetaSpec::List { values } => BetaSchedule::list(values.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_CAPS: &str = r#"{
        "schema": 1,
        "space": {"kind": "unit_sphere", "dim": 2},
        "mappings": [
            {"kind": "cap_projection", "center": [0.3428978074554514, 0, 0.9393727128473789], "radius": 0.5},
            {"kind": "cap_projection", "center": [-0.1714489037277257, 0.296958, 0.9393727128473789], "radius": 0.5},
            {"kind": "cap_projection", "center": [-0.1714489037277257, -0.296958, 0.9393727128473789], "radius": 0.5}
        ],
        "alpha": {"kind": "constant", "values": [0.5, 0.5, 0.5], "a": 0.4},
        "beta": {"kind": "power_law", "q": 0.5},
        "u": [0.5, 0.2, 0.8],
        "x1": [-0.3, -0.4, 0.85],
        "max_iters": 1000,
        "stop_tolerance": 1e-6
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::from_json(THREE_CAPS).unwrap();
        let built = cfg.build().unwrap();
        assert_eq!(built.mappings.len(), 3);
        assert_eq!(built.w_schedule.r(), 3);
        assert!((built.u.coords().iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(cfg.stride, 1);
        assert!(cfg.oracle.is_none());
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = THREE_CAPS.replace("\"max_iters\"", "\"max_iter\": 3, \"max_iters\"");
        let err = ExperimentConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("max_iter"), "{err}");
        assert!(err.contains("line"), "{err}");
        let bad = THREE_CAPS.replace("\"q\": 0.5", "\"q\": 0.5, \"p\": 1");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn rejects_bad_schema_and_a() {
        let bad = THREE_CAPS.replace("\"schema\": 1", "\"schema\": 2");
        assert!(ExperimentConfig::from_json(&bad)
            .unwrap_err()
            .to_string()
            .contains("schema"));
        let bad = THREE_CAPS.replace("\"a\": 0.4", "\"a\": 0.6");
        let err = ExperimentConfig::from_json(&bad)
            .unwrap()
            .build()
            .unwrap_err()
            .to_string();
        assert!(err.contains("a must lie in (0, 1/2)"), "{err}");
    }

    #[test]
    fn builds_every_mapping_kind() {
        let text = r#"{
            "schema": 1,
            "space": {"kind": "unit_sphere", "dim": 2, "region": {"center": [0, 0, 1], "radius": 0.7}},
            "mappings": [
                {"kind": "identity"},
                {"kind": "geodesic_contraction", "p": [0, 0, 1], "lambda": 0.3},
                {"kind": "resolvent", "penalty": "log_cos",
                 "function": {"kind": "weighted_sum", "terms": [
                    {"weight": 1.0, "function": {"kind": "indicator", "set": {"kind": "intersection",
                        "caps": [{"center": [0, 0, 1], "radius": 0.4}, {"center": [0.1, 0, 1], "radius": 0.4}],
                        "witness": [0, 0, 1]}}},
                    {"weight": 2.0, "function": {"kind": "distance", "center": [0, 0, 1]}}]},
                 "solver": {"coarse_grid_resolution": 100}}
            ],
            "alpha": {"kind": "alternating", "low": 0.3, "high": 0.7, "a": 0.2},
            "beta": {"kind": "list", "values": [0.5, 0.25]},
            "u": [0, 0.1, 1],
            "x1": [0, 0, 1],
            "max_iters": 10,
            "stop_tolerance": 0,
            "oracle": {"grid_resolution": 500},
            "output": {"trace": "t.csv"}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let built = cfg.build().unwrap();
        assert_eq!(built.mappings.len(), 3);
        assert_eq!(cfg.oracle.unwrap().resolution, 1e-7);

        let seg = r#"{
            "schema": 1,
            "space": {"kind": "segment", "lo": -0.7, "hi": 0.7},
            "mappings": [{"kind": "segment_negation"}],
            "alpha": {"kind": "constant", "values": [0.5], "a": 0.25},
            "beta": {"kind": "constant", "value": 0.9},
            "u": [0.5], "x1": [0.9],
            "max_iters": 10, "stop_tolerance": 1e-4
        }"#;
        let err = ExperimentConfig::from_json(seg)
            .unwrap()
            .build()
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("config: x1"), "{err}");
    }
}
