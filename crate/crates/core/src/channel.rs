//! Labels shared by the radial and basis layers.

use serde::{Deserialize, Serialize};

/// The three electronic manifolds of the photoassociation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manifold {
    /// Box-discretized scattering continuum of the ground asymptote.
    Scattering,
    /// Electronically excited intermediate level.
    Intermediate,
    /// Weakly bound target level sharing the ground asymptote.
    Target,
}

impl Manifold {
    pub fn name(&self) -> &'static str {
        match self {
            Manifold::Scattering => "scattering",
            Manifold::Intermediate => "intermediate",
            Manifold::Target => "target",
        }
    }
}

impl std::fmt::Display for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Radial channel identity: which curve family, and the rotational quantum numbers
/// entering the centrifugal term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelLabel {
    pub manifold: Manifold,
    pub j: i32,
    pub omega: i32,
}

impl std::fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} J={} Ω={}", self.manifold, self.j, self.omega)
    }
}
