//! Dimensionality reduction: Extended Sammon Projection and the PCA
//! baseline, both with out-of-sample transforms and versioned
//! serialization.

pub mod esp;
pub mod pca;

pub use esp::{
    configuration_stress, esp_fit, esp_transform, esp_transform_matrix, pairwise_distances,
    sammon_stress, stress_and_gradient, EspModel, EspModelDoc, EspOptions, DISTANCE_EPS,
};
pub use pca::{pca_fit, pca_transform, PcaModel, PcaModelDoc};
