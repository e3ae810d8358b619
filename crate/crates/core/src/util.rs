//! Small shared helpers.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

/// Hash map with a fixed (unseeded) hasher. Std's default random seed makes
/// iteration order vary between runs; decoder tie-breaking and output
/// ordering must be byte-identical across reruns, so anything whose
/// iteration order can reach an output uses this.
pub type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;
