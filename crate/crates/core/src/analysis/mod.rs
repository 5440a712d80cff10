//! Integrals, Shapley values and verification queries on piecewise-linear
//! functions.

mod integrate;
mod shap;
mod verify;

pub use integrate::{
    all_sectors, determinant, integrate_1d, integrate_box, integrate_by_decomposition, simplex_volume,
    triangulate_cell, InputBox, Simplex,
};
pub use shap::{shap, shap_all};
pub use verify::{counterfactual_explain, feature_contribution, robustness_check, Counterfactual, Metric};

use crate::geometry::GeometryError;
use crate::pwl::PwlError;
use crate::query::{NormalizeError, QueryError, QueryParseError};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("expected dimension {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("box side {0} is empty")]
    EmptyBox(usize),
    #[error("point lies outside the box")]
    OutsideBox,
    #[error("feature index {0} out of range")]
    FeatureIndex(usize),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("cell is not full-dimensional")]
    NotFullDimensional,
    #[error("no counterfactual in box")]
    NoCounterfactual,
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

impl From<QueryParseError> for AnalysisError {
    fn from(e: QueryParseError) -> Self {
        AnalysisError::Query(e.into())
    }
}

impl From<NormalizeError> for AnalysisError {
    fn from(e: NormalizeError) -> Self {
        AnalysisError::Query(e.into())
    }
}
