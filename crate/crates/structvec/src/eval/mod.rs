//! Measurement protocols: analogy tests, nearest neighbors, drift timelines,
//! word-similarity correlations, the Burrows' Delta baseline, and the grid
//! search driver.

pub mod analogy;
pub mod burrows;
pub mod grid;
pub mod neighbors;
pub mod similarity;
pub mod stats;

pub use analogy::{
    analogy_accuracy, analogy_ranks, cross_slice_accuracy, evaluate_analogies,
    evaluate_cross_slice, AnalogyOutcome, AnalogyProtocol, AnalogySection, AnalogyTestSet,
    CrossSliceAnalogySet, CrossSliceTest, SectionOutcome,
};
pub use burrows::{burrows_delta, BurrowsOutcome};
pub use grid::{grid_search, pow2_grid, CellScore, GridCell, GridOutcome, GRID_NS};
pub use neighbors::{
    auto_drift_neighbors, cosine, drift_timeline, nearest_neighbors, TimelineTable,
};
pub use similarity::{similarity_correlation, CorrelationMethod, SimilarityDataset};
pub use stats::{pearson, spearman};
