pub mod error;
pub mod experiments;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod network;
pub mod seed;
pub mod skipgram;
pub mod sparse;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use network::{dilate, unfold, DilatedMatrix, DynamicEmbedding, DynamicNetwork, UnfoldedMatrix};
pub use sparse::CsrMatrix;
