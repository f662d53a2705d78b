use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The model domain Ω whose Bergman space is being restricted.
///
/// `UnitDisc` and `UnitBall { dim: 1 }` describe the same domain and produce
/// identical numerics everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params")]
pub enum AmbientDomain {
    UnitDisc,
    UnitBall { n: usize },
    Polydisc { radii: Vec<f64> },
}

impl AmbientDomain {
    pub fn ball(n: usize) -> Self {
        AmbientDomain::UnitBall { n }
    }

    pub fn polydisc(radii: impl Into<Vec<f64>>) -> Self {
        AmbientDomain::Polydisc {
            radii: radii.into(),
        }
    }

    /// Complex dimension.
    pub fn dim(&self) -> usize {
        match self {
            AmbientDomain::UnitDisc => 1,
            AmbientDomain::UnitBall { n } => *n,
            AmbientDomain::Polydisc { radii } => radii.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AmbientDomain::UnitDisc => Ok(()),
            AmbientDomain::UnitBall { n } if *n >= 1 => Ok(()),
            AmbientDomain::UnitBall { .. } => Err(Error::invalid("ball dimension must be >= 1")),
            AmbientDomain::Polydisc { radii } => {
                if radii.is_empty() {
                    return Err(Error::invalid("polydisc needs at least one radius"));
                }
                if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(Error::invalid("polydisc radii must be positive and finite"));
                }
                Ok(())
            }
        }
    }

    /// Radius of the ambient disc when the domain is planar.
    pub fn planar_radius(&self) -> Option<f64> {
        match self {
            AmbientDomain::UnitDisc | AmbientDomain::UnitBall { n: 1 } => Some(1.0),
            AmbientDomain::Polydisc { radii } if radii.len() == 1 => Some(radii[0]),
            _ => None,
        }
    }

    /// Planar radius, or an error naming the operation that needs n = 1.
    pub(crate) fn require_planar(&self, what: &str) -> Result<f64> {
        self.planar_radius()
            .ok_or_else(|| Error::unsupported(format!("{what} is only available for planar ambient domains")))
    }

    /// Every ambient domain in the catalog is a complete Reinhardt domain.
    pub fn is_reinhardt(&self) -> bool {
        true
    }

    pub(crate) fn check_point(&self, z: &[Complex64]) -> Result<()> {
        let n = self.dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Open-set membership.
    pub fn contains(&self, z: &[Complex64]) -> Result<bool> {
        self.check_point(z)?;
        Ok(self.contains_unchecked(z))
    }

    pub(crate) fn contains_unchecked(&self, z: &[Complex64]) -> bool {
        match self {
            AmbientDomain::UnitDisc | AmbientDomain::UnitBall { .. } => {
                z.iter().map(|w| w.norm_sqr()).sum::<f64>() < 1.0
            }
            AmbientDomain::Polydisc { radii } => z.iter().zip(radii).all(|(w, r)| w.norm() < *r),
        }
    }

    /// Membership in the closure.
    pub(crate) fn closure_contains(&self, z: &[Complex64]) -> bool {
        match self {
            AmbientDomain::UnitDisc | AmbientDomain::UnitBall { .. } => {
                z.iter().map(|w| w.norm_sqr()).sum::<f64>() <= 1.0
            }
            AmbientDomain::Polydisc { radii } => z.iter().zip(radii).all(|(w, r)| w.norm() <= *r),
        }
    }

    /// Parses the CLI shorthand: `disc`, `ball:N`, `polydisc:r1,r2,...`.
    pub fn parse_shorthand(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()));
        }
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let amb = match (head, tail) {
            ("disc", None) => AmbientDomain::UnitDisc,
            ("ball", Some(n)) => AmbientDomain::UnitBall {
                n: n.trim().parse().map_err(|_| Error::Parse(format!("bad ball dimension `{n}`")))?,
            },
            ("bidisc", None) => AmbientDomain::polydisc(vec![1.0, 1.0]),
            ("polydisc", Some(list)) => {
                let radii = list
                    .split(',')
                    .map(|r| r.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad radius `{r}`"))))
                    .collect::<Result<Vec<_>>>()?;
                AmbientDomain::Polydisc { radii }
            }
            _ => return Err(Error::Parse(format!("unknown ambient domain `{s}`"))),
        };
        amb.validate()?;
        Ok(amb)
    }
}

/// Exponent vector α of a monomial z^α.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All multi-indices of dimension `n` with total degree `< order`, in graded
/// lexicographic order: ascending degree, and within a degree descending in
/// the first coordinate, then the second, and so on.
///
/// For `n = 1` this is simply `0, 1, ..., order - 1`.
pub fn graded_lex(n: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..order as u32 {
        let mut cur = vec![0u32; n];
        push_degree(&mut out, &mut cur, 0, d);
    }
    out
}

fn push_degree(out: &mut Vec<MultiIndex>, cur: &mut [u32], pos: usize, remaining: u32) {
    let n = cur.len();
    if pos + 1 == n {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    for first in (0..=remaining).rev() {
        cur[pos] = first;
        push_degree(out, cur, pos + 1, remaining - first);
    }
    cur[pos] = 0;
}
