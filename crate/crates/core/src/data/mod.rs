//! Dataset construction: synthetic manifolds, k-NN geodesics, MNIST.

pub mod dataset;
pub mod graph;
pub mod idx;
pub mod swissroll;

pub use dataset::{subsample, LabeledDataset};
pub use graph::{
    euclidean_target, geodesic_distances, geodesic_distances_with, knn_graph, NeighborGraph,
    ShortestPaths,
};
pub use idx::{read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, IdxImages};
pub use swissroll::{generate_swissroll, PointCloud};
