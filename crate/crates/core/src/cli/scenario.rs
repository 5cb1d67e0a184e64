//! Scenario files: a TOML declaration of a metric, an optional field and
//! soliton constant, named points and pairs, sampling settings and tasks.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{BallOptions, BoundOptions};
use crate::domain::{ChartDomain, DomainShape};
use crate::geodesics::DistanceOptions;
use crate::metric::{MetricModel, OneForm, RiemannianKind, SPHERE_CHART_RADIUS};
use crate::sampling::{random_points_in_ball, SamplePlan};
use crate::soliton::{SolitonProblem, VectorFieldModel};
use crate::tensors::verify_structure;

/// Task names in the order `tasks` lists them.
pub const TASKS: [(&str, &str); 8] = [
    ("tensors", "F, fundamental tensor, inverse and Cartan tensor at a point-direction; structure axioms"),
    ("curvature", "spray, nonlinear connection, reduced curvature, Ricci scalar and Chern coefficients"),
    ("geodesic", "unit-speed geodesic from a point and direction, written as CSV"),
    ("distance", "forward and backward distances for point pairs"),
    ("soliton-check", "soliton residual on the sampling grid and its classification"),
    ("lemma-check", "Ricci integral along minimal geodesics against 2(n-1) + H_p + H_q"),
    ("bound-verify", "diameter bound for point pairs, after the soliton hypothesis gate"),
    ("sweep", "diameter bound over seeded random pairs"),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioError {
    pub key: String,
    pub message: String,
}

impl ScenarioError {
    fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { key: key.into(), message: message.to_string() }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "`{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    AllSpace {
        #[serde(default)]
        margin: Option<f64>,
    },
    Ball {
        radius: f64,
        #[serde(default)]
        margin: Option<f64>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default)]
        margin: Option<f64>,
    },
}

impl DomainSpec {
    fn build(&self, n: usize) -> ChartDomain {
        let (shape, margin) = match self {
            Self::AllSpace { margin } => (DomainShape::AllSpace, margin),
            Self::Ball { radius, margin } => (DomainShape::Ball { radius: *radius }, margin),
            Self::Box { lower, upper, margin } => (DomainShape::Box { lower: lower.clone(), upper: upper.clone() }, margin),
        };
        ChartDomain { dimension: n, shape, margin: margin.unwrap_or(ChartDomain::DEFAULT_MARGIN) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean {
        dimension: usize,
    },
    /// Unit sphere in the stereographic chart.
    Sphere {
        dimension: usize,
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        chart_radius: Option<f64>,
    },
    PoincareBall {
        dimension: usize,
    },
    Funk {
        dimension: usize,
    },
    /// Constant Riemannian metric.
    Riemannian {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        domain: Option<DomainSpec>,
    },
    /// `F = √(a(y, y)) + (b + B x)·y`; `a` defaults to the identity.
    Randers {
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
        b: Vec<f64>,
        #[serde(default)]
        b_linear: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        domain: Option<DomainSpec>,
    },
}

impl MetricSpec {
    pub fn build(&self) -> crate::Result<MetricModel> {
        let m = match self {
            Self::Euclidean { dimension } => MetricModel::euclidean(*dimension),
            Self::Sphere { dimension, radius, chart_radius } => MetricModel::riemannian(
                ChartDomain::ball(*dimension, chart_radius.unwrap_or(SPHERE_CHART_RADIUS)),
                RiemannianKind::Sphere { radius: radius.unwrap_or(1.0) },
            )?,
            Self::PoincareBall { dimension } => MetricModel::poincare_ball(*dimension),
            Self::Funk { dimension } => MetricModel::funk(*dimension),
            Self::Riemannian { matrix, domain } => {
                let n = matrix.len();
                let domain = domain.as_ref().map_or_else(|| ChartDomain::all_space(n), |d| d.build(n));
                MetricModel::riemannian(domain, RiemannianKind::Constant { matrix: matrix.clone() })?
            }
            Self::Randers { a, b, b_linear, domain } => {
                let n = b.len();
                let a = a.clone().unwrap_or_else(|| {
                    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
                });
                let domain = domain.as_ref().map_or_else(|| ChartDomain::all_space(n), |d| d.build(n));
                MetricModel::randers(
                    domain,
                    RiemannianKind::Constant { matrix: a },
                    OneForm { constant: b.clone(), linear: b_linear.clone() },
                )?
            }
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSource {
    Named,
    Random,
    #[default]
    All,
}

fn random_source() -> PairSource {
    PairSource::Random
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Tensors {
        point: String,
        direction: Vec<f64>,
    },
    Curvature {
        point: String,
        direction: Vec<f64>,
    },
    Geodesic {
        point: String,
        direction: Vec<f64>,
        length: f64,
    },
    Distance {
        #[serde(default)]
        pairs: PairSource,
    },
    SolitonCheck {
        /// Expected label, e.g. `shrinking` or `shrinking-inequality`.
        #[serde(default)]
        expect: Option<String>,
    },
    LemmaCheck {
        #[serde(default)]
        pairs: PairSource,
    },
    BoundVerify {
        #[serde(default)]
        pairs: PairSource,
    },
    Sweep {
        #[serde(default = "random_source")]
        pairs: PairSource,
    },
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Tensors { .. } => "tensors",
            Self::Curvature { .. } => "curvature",
            Self::Geodesic { .. } => "geodesic",
            Self::Distance { .. } => "distance",
            Self::SolitonCheck { .. } => "soliton-check",
            Self::LemmaCheck { .. } => "lemma-check",
            Self::BoundVerify { .. } => "bound-verify",
            Self::Sweep { .. } => "sweep",
        }
    }

    fn needs_problem(&self) -> bool {
        matches!(self, Self::SolitonCheck { .. } | Self::BoundVerify { .. } | Self::Sweep { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPairs {
    pub count: usize,
    /// Points are drawn uniformly from `|x| ≤ radius` inside the chart.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub geodesic_step: f64,
    pub plan: SamplePlan,
    pub ball: BallOptions,
    pub distance: DistanceOptions,
    pub field_norm_directions: Option<usize>,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            geodesic_step: 1e-3,
            plan: SamplePlan::default(),
            ball: BallOptions::default(),
            distance: DistanceOptions::default(),
            field_norm_directions: None,
        }
    }
}

impl Sampling {
    pub fn bound_options(&self) -> BoundOptions {
        BoundOptions {
            ball: self.ball.clone(),
            distance: self.distance.clone(),
            plan: self.plan.clone(),
            field_norm_directions: self.field_norm_directions,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub metric: MetricSpec,
    #[serde(default)]
    pub field: Option<VectorFieldModel>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub points: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    #[serde(default)]
    pub random_pairs: Option<RandomPairs>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

/// A scenario with its metric built and all references checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub metric: MetricModel,
    pub problem: Option<SolitonProblem>,
    pub named_pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub random_pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Resolved {
    pub fn point(&self, name: &str) -> &[f64] {
        &self.scenario.points[name]
    }

    pub fn pairs(&self, source: PairSource) -> Vec<(Vec<f64>, Vec<f64>)> {
        match source {
            PairSource::Named => self.named_pairs.clone(),
            PairSource::Random => self.random_pairs.clone(),
            PairSource::All => self.named_pairs.iter().chain(&self.random_pairs).cloned().collect(),
        }
    }
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let span = e.span().map(|s| text[..s.start].lines().count().max(1));
        let key = match span {
            Some(line) => format!("line {line}"),
            None => String::new(),
        };
        ScenarioError::new(key, message)
    })
}

/// Build the metric, check every reference, and draw the seeded random pairs.
pub fn resolve(scenario: Scenario, seed_override: Option<u64>) -> Result<Resolved, ScenarioError> {
    let mut scenario = scenario;
    if let Some(seed) = seed_override {
        scenario.seed = seed;
    }
    let metric = scenario.metric.build().map_err(|e| ScenarioError::new("metric", e))?;
    let n = metric.dimension();

    for (name, x) in &scenario.points {
        let key = format!("points.{name}");
        if x.len() != n {
            return Err(ScenarioError::new(key, format!("expected {n} coordinates, got {}", x.len())));
        }
        metric.domain.check(x).map_err(|e| ScenarioError::new(key, e))?;
    }
    let lookup = |key: String, name: &str| -> Result<Vec<f64>, ScenarioError> {
        scenario
            .points
            .get(name)
            .cloned()
            .ok_or_else(|| ScenarioError::new(key, format!("unknown point `{name}`")))
    };
    let mut named_pairs = Vec::new();
    for (k, [a, b]) in scenario.pairs.iter().enumerate() {
        named_pairs.push((lookup(format!("pairs[{k}]"), a)?, lookup(format!("pairs[{k}]"), b)?));
    }
    for (k, task) in scenario.tasks.iter().enumerate() {
        let key = format!("tasks[{k}]");
        if let TaskSpec::Tensors { point, direction }
        | TaskSpec::Curvature { point, direction }
        | TaskSpec::Geodesic { point, direction, .. } = task
        {
            lookup(format!("{key}.point"), point)?;
            if direction.len() != n {
                return Err(ScenarioError::new(format!("{key}.direction"), format!("expected {n} components")));
            }
        }
        if let TaskSpec::Geodesic { length, .. } = task {
            if !(*length > 0.0) {
                return Err(ScenarioError::new(format!("{key}.length"), "must be positive"));
            }
        }
        if task.needs_problem() && scenario.lambda.is_none() {
            return Err(ScenarioError::new("lambda", format!("required by task `{}`", task.name())));
        }
    }

    let field = scenario.field.clone().unwrap_or(VectorFieldModel::Zero);
    field.validate(n).map_err(|e| ScenarioError::new("field", e))?;
    let problem = scenario.lambda.map(|lambda| SolitonProblem { metric: metric.clone(), field, lambda });

    let structure = verify_structure(&metric, &scenario.sampling.plan);
    if !structure.passed() {
        return Err(ScenarioError::new(
            "metric",
            format!("structure check failed: {}", structure.failures.first().cloned().unwrap_or_default()),
        ));
    }

    let random_pairs = match &scenario.random_pairs {
        Some(spec) => {
            let pts = random_points_in_ball(&metric, spec.radius, 2 * spec.count, scenario.seed);
            if pts.len() < 2 * spec.count {
                return Err(ScenarioError::new("random_pairs.radius", "ball does not meet the chart"));
            }
            pts.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect()
        }
        None => Vec::new(),
    };
    Ok(Resolved { scenario, metric, problem, named_pairs, random_pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [metric]
        family = "euclidean"
        dimension = 2

        [points]
        p = [0.0, 0.0]
        q = [3.0, 4.0]
    "#;

    #[test]
    fn parses_minimal_scenario() {
        let s = parse(MINIMAL).unwrap();
        let r = resolve(s, None).unwrap();
        assert_eq!(r.metric.dimension(), 2);
        assert_eq!(r.point("q"), &[3.0, 4.0]);
        assert!(r.scenario.tasks.is_empty());
    }

    #[test]
    fn unknown_task_names_the_valid_ones() {
        let text = format!("{MINIMAL}\n[[tasks]]\ntask = \"flow\"\n");
        let err = parse(&text).unwrap_err();
        for (name, _) in TASKS {
            assert!(err.message.contains(name), "{err}");
        }
    }

    #[test]
    fn misspelled_key_is_named() {
        let text = MINIMAL.replace("dimension", "dimensoin");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("dimensoin"), "{err}");
        let text = format!("lamda = 1.0\n{MINIMAL}");
        assert!(parse(&text).unwrap_err().to_string().contains("lamda"));
    }

    #[test]
    fn references_must_resolve() {
        let text = format!("pairs = [[\"p\", \"r\"]]\n{MINIMAL}");
        let err = resolve(parse(&text).unwrap(), None).unwrap_err();
        assert_eq!(err.key, "pairs[0]");
        let text = format!("{MINIMAL}\n[[tasks]]\ntask = \"sweep\"\n");
        assert_eq!(resolve(parse(&text).unwrap(), None).unwrap_err().key, "lambda");
        let text = MINIMAL.replace("q = [3.0, 4.0]", "q = [3.0]");
        assert_eq!(resolve(parse(&text).unwrap(), None).unwrap_err().key, "points.q");
    }

    #[test]
    fn invalid_randers_is_rejected() {
        let text = "[metric]\nfamily = \"randers\"\nb = [1.2, 0.0]\n";
        let err = resolve(parse(text).unwrap(), None).unwrap_err();
        assert_eq!(err.key, "metric");
    }

    #[test]
    fn random_pairs_follow_the_seed() {
        let text = format!("{MINIMAL}\n[random_pairs]\ncount = 5\nradius = 2.0\n");
        let a = resolve(parse(&text).unwrap(), Some(3)).unwrap();
        let b = resolve(parse(&text).unwrap(), Some(3)).unwrap();
        let c = resolve(parse(&text).unwrap(), Some(4)).unwrap();
        assert_eq!(a.random_pairs.len(), 5);
        assert_eq!(a.random_pairs, b.random_pairs);
        assert_ne!(a.random_pairs, c.random_pairs);
        assert_eq!(a.pairs(PairSource::All).len(), 5);
    }
}
