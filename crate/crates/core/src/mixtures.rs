//! Built-in file-size mixtures over four file types: an 8 KB document, a
//! 1 MB image, a 3 MB audio file and a 20 MB video clip.

use crate::capacity::FileSizeDistribution;
use crate::error::{Error, Result};
use crate::units::{KB, MB};

pub const MIX_3_2: &str = "mix-3.2";
pub const MIX_5_08: &str = "mix-5.08";

pub const FILE_SIZES: [f64; 4] = [8.0 * KB, MB, 3.0 * MB, 20.0 * MB];

/// `(id, probabilities over FILE_SIZES, description)`.
pub const MIXTURES: &[(&str, [f64; 4], &str)] = &[
    (MIX_3_2, [0.3, 0.3, 0.3, 0.1], "mean 3.2024 MB"),
    (MIX_5_08, [0.26, 0.27, 0.27, 0.2], "mean 5.08208 MB"),
];

pub fn mixture(id: &str) -> Result<FileSizeDistribution> {
    let (_, probs, _) = MIXTURES
        .iter()
        .find(|(name, _, _)| *name == id)
        .ok_or_else(|| Error::UnknownMixture(id.to_string()))?;
    let pairs: Vec<_> = FILE_SIZES.iter().copied().zip(probs.iter().copied()).collect();
    FileSizeDistribution::from_pairs(&pairs)
}
