//! Reference solvers: classical (Torgerson) MDS and unit-weight SMACOF.

pub mod classical;
pub mod eigen;
pub mod smacof;

pub use classical::{classical_mds, double_center, ClassicalMds, GramMatrix};
pub use eigen::{symmetric_eig, SymmetricEigen};
pub use smacof::{guttman_step, run_smacof, SmacofRun, SmacofState};
