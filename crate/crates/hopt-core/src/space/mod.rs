//! Mixed-variable hyperparameter design spaces.
//!
//! A [`DesignSpace`] holds continuous, integer, and categorical parameters,
//! optionally conditional on a categorical parent (for example a kernel
//! degree that only exists when the kernel is polynomial). A [`Subspace`]
//! is a per-parameter restriction of a space used by the recursive shrinking
//! search; categorical parameters are never restricted.

mod lhs;
mod presets;

pub use lhs::{lhs_sample, uniform_sample};
pub use presets::{baseline_initial, space_for};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::util::fmt_f64;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("design space has no parameters")]
    Empty,
    #[error("duplicate parameter name `{0}`")]
    DuplicateParam(String),
    #[error("parameter `{name}`: lower bound {lower} is not below upper bound {upper}")]
    BadBounds { name: String, lower: f64, upper: f64 },
    #[error("parameter `{name}`: bounds must be finite")]
    NonFiniteBounds { name: String },
    #[error("parameter `{name}`: integer lower bound {lower} exceeds upper bound {upper}")]
    BadIntBounds { name: String, lower: i64, upper: i64 },
    #[error("parameter `{name}`: empty category list")]
    EmptyCategories { name: String },
    #[error("parameter `{name}`: duplicate category `{category}`")]
    DuplicateCategory { name: String, category: String },
    #[error("parameter `{name}`: condition references unknown parameter `{parent}`")]
    UnknownConditionParent { name: String, parent: String },
    #[error("parameter `{name}`: condition may not reference the parameter itself")]
    SelfCondition { name: String },
    #[error("parameter `{name}`: condition lists no accepted parent values")]
    EmptyCondition { name: String },
    #[error("parameter `{name}`: condition value `{value}` is not a category of `{parent}`")]
    BadConditionValue { name: String, parent: String, value: String },
    #[error("normalization range [{min}, {max}] is degenerate")]
    DegenerateRange { min: f64, max: f64 },
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("point rejected: {0}")]
    InvalidPoint(String),
    #[error("space config: {0}")]
    Config(String),
}

/// Maps a raw value into [0, 1] linearly over `[v_min, v_max]`.
pub fn normalize(v: f64, v_min: f64, v_max: f64) -> Result<f64, SpaceError> {
    if !(v_min < v_max) {
        return Err(SpaceError::DegenerateRange { min: v_min, max: v_max });
    }
    Ok((v - v_min) / (v_max - v_min))
}

/// Inverse of [`normalize`]; maps a unit-interval value back to raw scale.
pub fn denormalize(u: f64, v_min: f64, v_max: f64) -> f64 {
    v_min + u * (v_max - v_min)
}

/// A single hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl ParamValue {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Cat(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(s) => Some(s),
            _ => None,
        }
    }

    /// Canonical text form used in CSV output: full-precision for reals,
    /// plain digits for integers, the label itself for categories.
    pub fn csv_cell(&self) -> String {
        match self {
            ParamValue::Real(v) => fmt_f64(*v),
            ParamValue::Int(v) => v.to_string(),
            ParamValue::Cat(s) => s.clone(),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Cat(s) => write!(f, "{s}"),
        }
    }
}

/// Domain of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    Continuous { lower: f64, upper: f64 },
    Integer { lower: i64, upper: i64 },
    Categorical { categories: Vec<String> },
}

/// Activation rule for a conditional parameter: the parameter exists in a
/// point only when `parent` takes one of `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub parent: String,
    pub values: Vec<ParamValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
}

impl ParamSpec {
    pub fn continuous(name: &str, lower: f64, upper: f64) -> Self {
        ParamSpec {
            name: name.into(),
            kind: ParamKind::Continuous { lower, upper },
            condition: None,
        }
    }

    pub fn integer(name: &str, lower: i64, upper: i64) -> Self {
        ParamSpec {
            name: name.into(),
            kind: ParamKind::Integer { lower, upper },
            condition: None,
        }
    }

    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        ParamSpec {
            name: name.into(),
            kind: ParamKind::Categorical {
                categories: categories.iter().map(|s| s.to_string()).collect(),
            },
            condition: None,
        }
    }

    /// Restricts this parameter to exist only when `parent` takes one of
    /// the given category labels.
    pub fn when(mut self, parent: &str, values: &[&str]) -> Self {
        self.condition = Some(Condition {
            parent: parent.into(),
            values: values.iter().map(|v| ParamValue::Cat(v.to_string())).collect(),
        });
        self
    }
}

/// One evaluated or candidate hyperparameter configuration. Conditional
/// parameters are present exactly when their condition holds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HpPoint {
    values: BTreeMap<String, ParamValue>,
}

impl HpPoint {
    pub fn new() -> Self {
        HpPoint { values: BTreeMap::new() }
    }

    pub fn from_pairs(pairs: &[(&str, ParamValue)]) -> Self {
        HpPoint {
            values: pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    pub fn set(&mut self, name: &str, value: ParamValue) {
        self.values.insert(name.to_string(), value);
    }

    pub fn remove(&mut self, name: &str) {
        self.values.remove(name);
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.get(name)
    }

    pub fn real(&self, name: &str) -> Result<f64, SpaceError> {
        self.get(name)
            .and_then(ParamValue::as_real)
            .ok_or_else(|| SpaceError::InvalidPoint(format!("missing real parameter `{name}`")))
    }

    pub fn int(&self, name: &str) -> Result<i64, SpaceError> {
        self.get(name)
            .and_then(ParamValue::as_int)
            .ok_or_else(|| SpaceError::InvalidPoint(format!("missing integer parameter `{name}`")))
    }

    pub fn cat(&self, name: &str) -> Result<&str, SpaceError> {
        self.get(name)
            .and_then(ParamValue::as_cat)
            .ok_or_else(|| SpaceError::InvalidPoint(format!("missing categorical parameter `{name}`")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl fmt::Display for HpPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.values {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    params: Vec<ParamSpec>,
}

impl DesignSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self, SpaceError> {
        if params.is_empty() {
            return Err(SpaceError::Empty);
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &params {
            if !seen.insert(p.name.clone()) {
                return Err(SpaceError::DuplicateParam(p.name.clone()));
            }
            match &p.kind {
                ParamKind::Continuous { lower, upper } => {
                    if !lower.is_finite() || !upper.is_finite() {
                        return Err(SpaceError::NonFiniteBounds { name: p.name.clone() });
                    }
                    if !(lower < upper) {
                        return Err(SpaceError::BadBounds {
                            name: p.name.clone(),
                            lower: *lower,
                            upper: *upper,
                        });
                    }
                }
                ParamKind::Integer { lower, upper } => {
                    if lower > upper {
                        return Err(SpaceError::BadIntBounds {
                            name: p.name.clone(),
                            lower: *lower,
                            upper: *upper,
                        });
                    }
                }
                ParamKind::Categorical { categories } => {
                    if categories.is_empty() {
                        return Err(SpaceError::EmptyCategories { name: p.name.clone() });
                    }
                    let mut cats = std::collections::BTreeSet::new();
                    for c in categories {
                        if !cats.insert(c) {
                            return Err(SpaceError::DuplicateCategory {
                                name: p.name.clone(),
                                category: c.clone(),
                            });
                        }
                    }
                }
            }
        }
        for p in &params {
            if let Some(cond) = &p.condition {
                if cond.parent == p.name {
                    return Err(SpaceError::SelfCondition { name: p.name.clone() });
                }
                if cond.values.is_empty() {
                    return Err(SpaceError::EmptyCondition { name: p.name.clone() });
                }
                let parent = params
                    .iter()
                    .find(|q| q.name == cond.parent)
                    .ok_or_else(|| SpaceError::UnknownConditionParent {
                        name: p.name.clone(),
                        parent: cond.parent.clone(),
                    })?;
                if let ParamKind::Categorical { categories } = &parent.kind {
                    for v in &cond.values {
                        let ok = v
                            .as_cat()
                            .map(|label| categories.iter().any(|c| c == label))
                            .unwrap_or(false);
                        if !ok {
                            return Err(SpaceError::BadConditionValue {
                                name: p.name.clone(),
                                parent: cond.parent.clone(),
                                value: v.to_string(),
                            });
                        }
                    }
                }
            }
        }
        Ok(DesignSpace { params })
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn has_categorical(&self) -> bool {
        self.params
            .iter()
            .any(|p| matches!(p.kind, ParamKind::Categorical { .. }))
    }

    /// True when `spec`'s condition (if any) holds in `point`. A missing
    /// parent value (itself inactive or absent) deactivates the child.
    pub fn is_active(&self, point: &HpPoint, spec: &ParamSpec) -> bool {
        match &spec.condition {
            None => true,
            Some(cond) => match point.get(&cond.parent) {
                Some(v) => cond.values.iter().any(|w| w == v),
                None => false,
            },
        }
    }

    /// Checks that every active parameter is present inside its full domain,
    /// every inactive parameter is absent, and no unknown names appear.
    pub fn validate_point(&self, point: &HpPoint) -> Result<(), SpaceError> {
        for (name, _) in point.iter() {
            if self.get(name).is_none() {
                return Err(SpaceError::UnknownParam(name.to_string()));
            }
        }
        for spec in &self.params {
            let active = self.is_active(point, spec);
            match (active, point.get(&spec.name)) {
                (true, None) => {
                    return Err(SpaceError::InvalidPoint(format!(
                        "active parameter `{}` is unassigned",
                        spec.name
                    )))
                }
                (false, Some(_)) => {
                    return Err(SpaceError::InvalidPoint(format!(
                        "inactive parameter `{}` is assigned",
                        spec.name
                    )))
                }
                (false, None) => {}
                (true, Some(value)) => match (&spec.kind, value) {
                    (ParamKind::Continuous { lower, upper }, ParamValue::Real(v)) => {
                        if !v.is_finite() || v < lower || v > upper {
                            return Err(SpaceError::InvalidPoint(format!(
                                "`{}` = {v} outside [{lower}, {upper}]",
                                spec.name
                            )));
                        }
                    }
                    (ParamKind::Integer { lower, upper }, ParamValue::Int(v)) => {
                        if v < lower || v > upper {
                            return Err(SpaceError::InvalidPoint(format!(
                                "`{}` = {v} outside {lower}:{upper}",
                                spec.name
                            )));
                        }
                    }
                    (ParamKind::Categorical { categories }, ParamValue::Cat(c)) => {
                        if !categories.iter().any(|k| k == c) {
                            return Err(SpaceError::InvalidPoint(format!(
                                "`{}` = `{c}` is not a listed category",
                                spec.name
                            )));
                        }
                    }
                    _ => {
                        return Err(SpaceError::InvalidPoint(format!(
                            "`{}` has a value of the wrong type",
                            spec.name
                        )))
                    }
                },
            }
        }
        Ok(())
    }

    /// The unrestricted subspace covering the whole design space.
    pub fn full_subspace(&self) -> Subspace {
        Subspace {
            domains: self
                .params
                .iter()
                .map(|p| match &p.kind {
                    ParamKind::Continuous { lower, upper } => {
                        SubDomain::Continuous { lower: *lower, upper: *upper }
                    }
                    ParamKind::Integer { lower, upper } => {
                        SubDomain::Integer { lower: *lower, upper: *upper }
                    }
                    ParamKind::Categorical { .. } => SubDomain::Categorical,
                })
                .collect(),
        }
    }

    /// Header cells for point columns in CSV output (parameter names in
    /// declaration order).
    pub fn csv_headers(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    /// Point cells matching [`DesignSpace::csv_headers`]; inactive
    /// parameters render as `NA`.
    pub fn csv_cells(&self, point: &HpPoint) -> Vec<String> {
        self.params
            .iter()
            .map(|p| match point.get(&p.name) {
                Some(v) => v.csv_cell(),
                None => "NA".to_string(),
            })
            .collect()
    }

    /// Encodes a point as one numeric feature per parameter, in declaration
    /// order: numeric parameters normalized over their full bounds,
    /// categorical parameters as their category index, and inactive
    /// parameters as a sentinel (-1 numeric, `categories.len()` categorical)
    /// so the surrogate can separate them from real values.
    pub fn encode_for_surrogate(&self, point: &HpPoint) -> Vec<f64> {
        self.params
            .iter()
            .map(|spec| match point.get(&spec.name) {
                None => match &spec.kind {
                    ParamKind::Categorical { categories } => categories.len() as f64,
                    _ => -1.0,
                },
                Some(value) => match (&spec.kind, value) {
                    (ParamKind::Continuous { lower, upper }, v) => {
                        let v = v.as_real().unwrap_or(*lower);
                        (v - lower) / (upper - lower)
                    }
                    (ParamKind::Integer { lower, upper }, v) => {
                        let v = v.as_real().unwrap_or(*lower as f64);
                        if upper > lower {
                            (v - *lower as f64) / (*upper - *lower) as f64
                        } else {
                            0.5
                        }
                    }
                    (ParamKind::Categorical { categories }, ParamValue::Cat(c)) => categories
                        .iter()
                        .position(|k| k == c)
                        .map(|i| i as f64)
                        .unwrap_or(categories.len() as f64),
                    (ParamKind::Categorical { categories }, _) => categories.len() as f64,
                },
            })
            .collect()
    }
}

/// Domain restriction for one parameter inside a [`Subspace`]. Categorical
/// parameters carry no restriction: every category stays available at every
/// shrink depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubDomain {
    Continuous { lower: f64, upper: f64 },
    Integer { lower: i64, upper: i64 },
    Categorical,
}

/// A per-parameter restriction of a [`DesignSpace`], aligned with the
/// space's parameter order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    domains: Vec<SubDomain>,
}

impl Subspace {
    pub fn domains(&self) -> &[SubDomain] {
        &self.domains
    }

    /// Centers a window of half-width `r_p` times the current width on the
    /// best point, intersected with the current domain. Integer bounds round
    /// outward so the window never loses every integer; categorical domains
    /// pass through untouched. Parameters inactive in `best` keep their
    /// current domain.
    pub fn shrink(&self, space: &DesignSpace, best: &HpPoint, r_p: f64) -> Subspace {
        debug_assert!(r_p > 0.0, "shrink rate must be positive");
        let domains = space
            .params()
            .iter()
            .zip(&self.domains)
            .map(|(spec, dom)| match dom {
                SubDomain::Continuous { lower, upper } => {
                    let center = match best.get(&spec.name).and_then(ParamValue::as_real) {
                        Some(c) => c,
                        None => return dom.clone(),
                    };
                    let width = upper - lower;
                    let lo = (center - r_p * width).max(*lower);
                    let hi = (center + r_p * width).min(*upper);
                    SubDomain::Continuous { lower: lo, upper: hi }
                }
                SubDomain::Integer { lower, upper } => {
                    let center = match best.get(&spec.name).and_then(ParamValue::as_int) {
                        Some(c) => c,
                        None => return dom.clone(),
                    };
                    let width = (upper - lower) as f64;
                    let raw_lo = center as f64 - r_p * width;
                    let raw_hi = center as f64 + r_p * width;
                    let mut lo = (raw_lo.floor() as i64).max(*lower);
                    let mut hi = (raw_hi.ceil() as i64).min(*upper);
                    if lo > hi {
                        // Defensive: a center outside the current domain can
                        // produce an empty window; snap to the nearest integer.
                        let snapped = center.clamp(*lower, *upper);
                        lo = snapped;
                        hi = snapped;
                    }
                    SubDomain::Integer { lower: lo, upper: hi }
                }
                SubDomain::Categorical => SubDomain::Categorical,
            })
            .collect();
        Subspace { domains }
    }

    /// True when every domain of `other` lies inside the matching domain
    /// of `self`.
    pub fn contains(&self, other: &Subspace) -> bool {
        self.domains.len() == other.domains.len()
            && self
                .domains
                .iter()
                .zip(&other.domains)
                .all(|(a, b)| match (a, b) {
                    (
                        SubDomain::Continuous { lower: al, upper: au },
                        SubDomain::Continuous { lower: bl, upper: bu },
                    ) => al <= bl && bu <= au,
                    (
                        SubDomain::Integer { lower: al, upper: au },
                        SubDomain::Integer { lower: bl, upper: bu },
                    ) => al <= bl && bu <= au,
                    (SubDomain::Categorical, SubDomain::Categorical) => true,
                    _ => false,
                })
    }

    /// True when every active value of `point` lies inside this subspace.
    pub fn contains_point(&self, space: &DesignSpace, point: &HpPoint) -> bool {
        space
            .params()
            .iter()
            .zip(&self.domains)
            .all(|(spec, dom)| match point.get(&spec.name) {
                None => true,
                Some(v) => match dom {
                    SubDomain::Continuous { lower, upper } => v
                        .as_real()
                        .map(|x| x >= *lower && x <= *upper)
                        .unwrap_or(false),
                    SubDomain::Integer { lower, upper } => v
                        .as_int()
                        .map(|x| x >= *lower && x <= *upper)
                        .unwrap_or(false),
                    SubDomain::Categorical => matches!(v, ParamValue::Cat(_)),
                },
            })
    }
}

/// Column-wise min/max scaler attached to datasets so raw engineering
/// units can be recovered after optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Normalizer {
    /// Builds a scaler from explicit per-column bounds.
    pub fn from_bounds(mins: Vec<f64>, maxs: Vec<f64>) -> Result<Self, SpaceError> {
        assert_eq!(mins.len(), maxs.len(), "bound arrays must align");
        for (lo, hi) in mins.iter().zip(&maxs) {
            if !(lo < hi) {
                return Err(SpaceError::DegenerateRange { min: *lo, max: *hi });
            }
        }
        Ok(Normalizer { mins, maxs })
    }

    /// Fits per-column bounds from raw rows. Constant columns are rejected:
    /// min-max scaling has no inverse for them.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, SpaceError> {
        assert!(!rows.is_empty(), "cannot fit a scaler to zero rows");
        let cols = rows[0].len();
        let mut mins = vec![f64::INFINITY; cols];
        let mut maxs = vec![f64::NEG_INFINITY; cols];
        for row in rows {
            for (j, v) in row.iter().enumerate() {
                mins[j] = mins[j].min(*v);
                maxs[j] = maxs[j].max(*v);
            }
        }
        Normalizer::from_bounds(mins, maxs)
    }

    pub fn cols(&self) -> usize {
        self.mins.len()
    }

    pub fn normalize_col(&self, col: usize, v: f64) -> f64 {
        (v - self.mins[col]) / (self.maxs[col] - self.mins[col])
    }

    pub fn denormalize_col(&self, col: usize, u: f64) -> f64 {
        denormalize(u, self.mins[col], self.maxs[col])
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, v)| self.normalize_col(j, *v))
            .collect()
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, u)| self.denormalize_col(j, *u))
            .collect()
    }
}

/// On-disk form of a design space: a `[[param]]` table per parameter with
/// kind, bounds or categories, and an optional condition.
#[derive(Debug, Serialize, Deserialize)]
struct SpaceFile {
    param: Vec<ParamSpec>,
}

/// Parses a design space from its TOML text form.
pub fn space_from_toml(text: &str) -> Result<DesignSpace, SpaceError> {
    let file: SpaceFile =
        toml::from_str(text).map_err(|e| SpaceError::Config(e.to_string()))?;
    DesignSpace::new(file.param)
}

/// Renders a design space to TOML accepted by [`space_from_toml`].
pub fn space_to_toml(space: &DesignSpace) -> String {
    let file = SpaceFile { param: space.params.clone() };
    toml::to_string_pretty(&file).expect("space serialization cannot fail")
}
