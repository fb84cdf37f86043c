use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Species {
    A,
    B,
    Alpha,
    Beta,
    Abstract,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

/// A generator of the free *-algebra.
///
/// Self-adjoint generators (such as the effective identity token) are their own adjoint and
/// never carry a dagger.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: Arc<str>,
    pub species: Species,
    pub mode: u8,
    pub dagger: bool,
    pub statistics: Statistics,
    pub eps: u8,
    pub self_adjoint: bool,
}

impl Generator {
    fn ladder(name: String, species: Species, mode: u8, statistics: Statistics, eps: u8) -> Self {
        Self {
            name: Arc::from(name.as_str()),
            species,
            mode,
            dagger: false,
            statistics,
            eps,
            self_adjoint: false,
        }
    }

    /// Annihilator `a_mode`.
    pub fn a(mode: u8, statistics: Statistics) -> Self {
        Self::ladder(format!("a{mode}"), Species::A, mode, statistics, 0)
    }

    /// Annihilator `b_mode`.
    pub fn b(mode: u8, statistics: Statistics) -> Self {
        Self::ladder(format!("b{mode}"), Species::B, mode, statistics, 0)
    }

    /// Full matrix variable `α_mode`, ε-grade 0.
    pub fn alpha(mode: u8, statistics: Statistics) -> Self {
        Self::ladder(format!("alpha{mode}"), Species::Alpha, mode, statistics, 0)
    }

    /// Full matrix variable `β_mode`, ε-grade 0.
    pub fn beta(mode: u8, statistics: Statistics) -> Self {
        Self::ladder(format!("beta{mode}"), Species::Beta, mode, statistics, 0)
    }

    /// Anticommuting part `𝒜_mode` of `α_mode`, ε-grade 1.
    pub fn cal_a(mode: u8, statistics: Statistics) -> Self {
        Self::ladder(format!("A{mode}"), Species::Alpha, mode, statistics, 1)
    }

    /// Anticommuting part `ℬ_mode` of `β_mode`, ε-grade 1.
    pub fn cal_b(mode: u8, statistics: Statistics) -> Self {
        Self::ladder(format!("B{mode}"), Species::Beta, mode, statistics, 1)
    }

    pub fn abstract_gen(name: &str, eps: u8, statistics: Statistics, self_adjoint: bool) -> Self {
        Self {
            name: Arc::from(name),
            species: Species::Abstract,
            mode: 0,
            dagger: false,
            statistics,
            eps,
            self_adjoint,
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut g = self.clone();
        if !g.self_adjoint {
            g.dagger = !g.dagger;
        }
        g
    }

    pub fn dag(&self) -> Self {
        self.adjoint()
    }

    pub fn is_fermionic(&self) -> bool {
        self.statistics == Statistics::Fermionic
    }

    fn key(&self) -> (bool, Species, u8, &str, Statistics, u8, bool) {
        (
            !self.dagger,
            self.species,
            self.mode,
            &self.name,
            self.statistics,
            self.eps,
            self.self_adjoint,
        )
    }
}

impl Ord for Generator {
    /// Normal-form order: daggered first, then species, mode and name.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Generator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.dagger {
            f.write_str("†")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_flips_only_dagger() {
        let g = Generator::cal_a(2, Statistics::Fermionic);
        let h = g.adjoint();
        assert!(h.dagger);
        assert_eq!(h.eps, g.eps);
        assert_eq!(h.statistics, g.statistics);
        assert_eq!(h.adjoint(), g);
    }

    #[test]
    fn daggered_sort_first() {
        let s = Statistics::Bosonic;
        let mut v = vec![Generator::a(1, s), Generator::b(2, s).dag(), Generator::a(2, s).dag(), Generator::b(1, s)];
        v.sort();
        let names: Vec<String> = v.iter().map(|g| g.to_string()).collect();
        assert_eq!(names, ["a2†", "b2†", "a1", "b1"]);
    }
}
