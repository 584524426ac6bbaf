//! Versioned JSON schema for generating-function scenarios, so that every
//! run is reproducible from a config file.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use jetops_core::expr::{Rect, SymMatrix};
use jetops_core::grid::TailModel;
use jetops_core::selector::Field;
use jetops_core::{ops, GfExpr, GridFunction};

/// Serializable expression tree mirroring the core combinators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExprSpec {
    /// Polynomial of one base variable, low-degree-first coefficients.
    Poly { coeffs: Vec<f64> },
    /// `Σ qᵢ q_{n+i}` on a 2n-dimensional base.
    BasePairing { n: usize },
    /// Quadratic form of `dim` fiber variables, row-major matrix data.
    Quadratic { dim: usize, data: Vec<f64> },
    /// Sampled 1-D base function with a polynomial tail model.
    Sampled {
        x0: f64,
        step: f64,
        values: Vec<f64>,
        tail_coeffs: Vec<f64>,
        tail_index: usize,
    },
    Transform { child: Box<ExprSpec> },
    Slice { child: Box<ExprSpec>, kept: Vec<usize> },
    Contour { child: Box<ExprSpec>, kept: Vec<usize> },
    Product { left: Box<ExprSpec>, right: Box<ExprSpec> },
    Sum { left: Box<ExprSpec>, right: Box<ExprSpec> },
    Convolution { left: Box<ExprSpec>, right: Box<ExprSpec> },
    Stabilize { child: Box<ExprSpec>, form_dim: usize, form_data: Vec<f64> },
    /// Rewrite of a sum-of-transforms through the splitting change of fiber
    /// variables, yielding the transform-of-convolution form.
    SumConvShuffle { child: Box<ExprSpec> },
    /// One-parameter deformation joining the stabilized transform-of-sum to
    /// the convolution-of-transforms.
    Path { left: Box<ExprSpec>, right: Box<ExprSpec>, t: f64 },
    /// Override the tracked fiber Morse index and perturbation bound.
    WithIndex { child: Box<ExprSpec>, iota: usize, bound: f64 },
}

impl ExprSpec {
    pub fn build(&self) -> Result<GfExpr> {
        Ok(match self {
            ExprSpec::Poly { coeffs } => GfExpr::poly1d(coeffs.clone()),
            ExprSpec::BasePairing { n } => GfExpr::base_pairing(*n),
            ExprSpec::Quadratic { dim, data } => {
                GfExpr::quadratic_form(SymMatrix::new(*dim, data.clone())?)
            }
            ExprSpec::Sampled { x0, step, values, tail_coeffs, tail_index } => {
                let g = GridFunction::new(
                    *x0,
                    *step,
                    values.clone(),
                    TailModel::poly(tail_coeffs.clone(), *tail_index),
                )?;
                GfExpr::sampled_tail(g)
            }
            ExprSpec::Transform { child } => ops::transform_t(&child.build()?),
            ExprSpec::Slice { child, kept } => ops::slice_gf(&child.build()?, kept)?,
            ExprSpec::Contour { child, kept } => ops::contour_gf(&child.build()?, kept)?,
            ExprSpec::Product { left, right } => ops::product_gf(&left.build()?, &right.build()?),
            ExprSpec::Sum { left, right } => ops::sum_gf(&left.build()?, &right.build()?)?,
            ExprSpec::Convolution { left, right } => {
                ops::convolution_gf(&left.build()?, &right.build()?)?
            }
            ExprSpec::Stabilize { child, form_dim, form_data } => {
                ops::stabilize(&child.build()?, SymMatrix::new(*form_dim, form_data.clone())?)?
            }
            ExprSpec::SumConvShuffle { child } => ops::fiber_diffeo_sum_conv(&child.build()?)?,
            ExprSpec::Path { left, right, t } => {
                ops::deformation_path(&left.build()?, &right.build()?, *t)?
            }
            ExprSpec::WithIndex { child, iota, bound } => {
                child.build()?.with_fiber_index(*iota, *bound)?
            }
        })
    }
}

/// Uniform 1-D grid request.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridRange {
    pub fn points(&self) -> Vec<f64> {
        jetops_core::front::linspace(self.min, self.max, self.count)
    }
    pub fn step(&self) -> f64 {
        if self.count > 1 {
            (self.max - self.min) / (self.count - 1) as f64
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSpec {
    pub fn rect(&self) -> Result<Rect> {
        Ok(Rect::new(self.lo.clone(), self.hi.clone())?)
    }
}

fn default_schema() -> u32 {
    1
}

fn default_field() -> String {
    "z2".into()
}

/// A full scenario file: the expression, the grids it is evaluated on and
/// the knobs every operation needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub name: String,
    pub gf: ExprSpec,
    /// Base grid; for 2-D bases the same range is used on both axes.
    pub base_grid: GridRange,
    pub fiber_box: Option<BoxSpec>,
    /// Fiber scan / cell step.
    pub step: f64,
    #[serde(default = "default_field")]
    pub field: String,
    /// Morse-index override when the expression does not track one.
    #[serde(default)]
    pub index: Option<usize>,
}

impl Scenario {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).context("parsing scenario JSON")?;
        if s.schema != 1 {
            bail!("unsupported scenario schema version {}", s.schema);
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build_gf(&self) -> Result<GfExpr> {
        self.gf.build()
    }

    pub fn field(&self) -> Result<Field> {
        match self.field.as_str() {
            "z2" => Ok(Field::Z2),
            "q" => Ok(Field::Q),
            other => Err(anyhow!("unknown field {other:?}; expected \"z2\" or \"q\"")),
        }
    }

    pub fn fiber_rect(&self, fiber_dim: usize) -> Result<Rect> {
        match &self.fiber_box {
            Some(b) => b.rect(),
            None => Ok(Rect::centered(fiber_dim.max(1), 3.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_roundtrip_builds_the_same_expression() {
        let s = Scenario {
            schema: 1,
            name: "transformed double well".into(),
            gf: ExprSpec::Transform {
                child: Box::new(ExprSpec::Poly { coeffs: vec![0.0, 0.0, -3.0, 0.0, 1.0] }),
            },
            base_grid: GridRange { min: -2.0, max: 2.0, count: 11 },
            fiber_box: Some(BoxSpec { lo: vec![-2.0], hi: vec![2.0] }),
            step: 0.05,
            field: "z2".into(),
            index: None,
        };
        let text = s.to_json().unwrap();
        let back = Scenario::from_json(&text).unwrap();
        let f1 = s.build_gf().unwrap();
        let f2 = back.build_gf().unwrap();
        for i in 0..20 {
            let q = -1.9 + 0.2 * i as f64;
            let w = 0.3 * (i as f64) - 2.7;
            assert_eq!(f1.eval(&[q], &[w]).unwrap(), f2.eval(&[q], &[w]).unwrap());
        }
    }

    #[test]
    fn schema_version_is_enforced() {
        let bad = r#"{"schema": 2, "name": "x", "gf": {"kind": "poly", "coeffs": [0.0]},
                      "base_grid": {"min": 0.0, "max": 1.0, "count": 2}, "step": 0.1}"#;
        assert!(Scenario::from_json(bad).is_err());
    }
}
