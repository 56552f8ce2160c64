//! Witness-complex persistent homology for scalar time series.
//!
//! A window of samples is reconstructed by delay coordinates, a subset of
//! the reconstructed points is kept as landmarks, and every point votes as a
//! witness for the simplices spanned by its nearly-nearest landmarks. The
//! resulting filtration is reduced over Z/2 to a persistence diagram, which is
//! summarized by its persistent rank function and compared against a class
//! mean for membership tests.

pub mod classify;
pub mod embed;
pub mod error;
pub mod filtration;
pub mod homology;
pub mod ingest;
pub mod model;
pub mod prf;
pub mod spectrum;
pub mod synth;

pub use classify::{
    roc, train_fft, train_prf, FftModel, Membership, MembershipModel, PipelineConfig, PrfModel, RocCurve, RocPoint,
};
pub use embed::{
    delay_embed, distances, select_landmarks, suggest_tau, DelayParams, DistanceMatrix, LandmarkSet, LandmarkStrategy,
    PointCloud,
};
pub use error::{Error, Result};
pub use filtration::{
    build_filtration, cech_complex, epsilon_max_rule, CechComplex, FilteredSimplex, Simplex, WitnessFiltration,
};
pub use homology::{betti_at, persistence, PersistenceDiagram, PersistencePoint};
pub use ingest::{read_csv, read_wav, windows, TimeSeries, WindowSpec};
pub use model::ClassifierModel;
pub use prf::{l2_distance, mean_prf, prf, PrfGrid};
pub use spectrum::fft_features;
pub use synth::{synthesize, ToneKind, ToneSpec};
