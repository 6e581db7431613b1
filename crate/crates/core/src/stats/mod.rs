//! Dense symmetric linear algebra: covariance estimation, the Mahalanobis
//! norm, least-squares polynomial fits and PCA.

mod covariance;
mod pca;
mod polyfit;

pub use covariance::{
    cholesky_lower, covariance, covariance_of, mahalanobis_norm, sample_covariance,
    symmetric_eigen, CovarianceMatrix, REGULARIZATION_EPSILON,
};
pub use pca::{pca_project, pca_select, pca_select_with, retention_threshold, PcaResult, PcaRule};
pub use polyfit::{polyfit, quad_polyfit, DetrendBasis, PolyFit, QuadFit};
