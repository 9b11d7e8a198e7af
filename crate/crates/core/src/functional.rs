use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::point::PointT;
use crate::poly::MuntzPolynomial;

/// Slack allowed on `sum |weight| <= 1` for weights typed in decimal.
const WEIGHT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(flatten)]
    pub point: PointT,
    pub weight: f64,
}

/// `mu(f) = sum_i w_i f(x_i)`, a finite combination of point evaluations.
///
/// `sum |w_i| <= 1` bounds its norm on `C[0, 1]`, hence on every Muntz space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Atom>", into = "Vec<Atom>")]
pub struct DiscreteFunctional {
    atoms: Vec<Atom>,
}

impl TryFrom<Vec<Atom>> for DiscreteFunctional {
    type Error = MuntzError;

    fn try_from(atoms: Vec<Atom>) -> Result<Self> {
        DiscreteFunctional::new(atoms)
    }
}

impl From<DiscreteFunctional> for Vec<Atom> {
    fn from(f: DiscreteFunctional) -> Self {
        f.atoms
    }
}

impl DiscreteFunctional {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| !a.weight.is_finite()) {
            return Err(MuntzError::invalid(format!("atom weight {} is not finite", a.weight)));
        }
        let total: f64 = atoms.iter().map(|a| a.weight.abs()).sum();
        if total > 1.0 + WEIGHT_SLACK {
            return Err(MuntzError::invalid(format!("sum of |weights| is {total}, must be <= 1")));
        }
        Ok(DiscreteFunctional { atoms })
    }

    /// Builds from `(x, weight)` pairs.
    pub fn from_x_weights(pairs: &[(f64, f64)]) -> Result<Self> {
        let atoms = pairs
            .iter()
            .map(|&(x, weight)| Ok(Atom { point: PointT::from_x(x)?, weight }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::from_x_weights(&[(x, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    pub fn apply(&self, f: &MuntzPolynomial) -> f64 {
        self.apply_with(|p| f.eval(p))
    }

    pub fn apply_with(&self, mut f: impl FnMut(PointT) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(a.point)).sum()
    }
}
