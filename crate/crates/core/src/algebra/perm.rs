//! Permutations of `{0, .., degree-1}` and closure of a generating set.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A permutation stored as its image list; `(g * h)(x) = g(h(x))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || seen[x] {
                return Err(Error::InvalidAlgebra(format!(
                    "{images:?} is not a permutation"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    /// Parses 1-based cycle notation such as `"(1 2 3)(4 5)"`; `"()"` is the
    /// identity. The result has the given degree, or the largest point
    /// mentioned when `degree` is `None`.
    pub fn from_cycles(text: &str, degree: Option<usize>) -> Result<Self> {
        let bad = || Error::InvalidAlgebra(format!("cannot parse cycle notation {text:?}"));
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(bad)?;
            let close = body.find(')').ok_or_else(bad)?;
            let points = body[..close]
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().ok().filter(|&x| x >= 1).map(|x| x - 1))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(bad)?;
            cycles.push(points);
            rest = body[close + 1..].trim_start();
        }
        let max_point = cycles.iter().flatten().map(|&x| x + 1).max().unwrap_or(0);
        let degree = degree.unwrap_or(max_point);
        if max_point > degree {
            return Err(bad());
        }
        // Cycles compose right to left, matching `Mul`.
        let mut perm = Permutation::identity(degree);
        for cycle in cycles.iter().rev() {
            let mut images: Vec<usize> = (0..degree).collect();
            for (i, &x) in cycle.iter().enumerate() {
                images[x] = cycle[(i + 1) % cycle.len()];
            }
            perm = &Permutation::from_images(images)? * &perm;
        }
        Ok(perm)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }
}

impl std::ops::Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        assert_eq!(self.degree(), rhs.degree(), "permutation degree mismatch");
        Permutation {
            images: rhs.images.iter().map(|&x| self.images[x]).collect(),
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.degree()];
        let mut wrote = false;
        for start in 0..self.degree() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            write!(f, "(")?;
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}", x + 1)?;
                first = false;
                x = self.images[x];
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

/// Enumerates the group generated by `generators` by orbit closure from the
/// identity. The identity is always element 0; the rest follow breadth-first
/// discovery order.
pub fn enumerate_group(generators: &[Permutation], bound: usize) -> Result<Vec<Permutation>> {
    let degree = generators.first().map_or(0, Permutation::degree);
    if generators.iter().any(|g| g.degree() != degree) {
        return Err(Error::InvalidAlgebra(
            "generators have different degrees".into(),
        ));
    }
    let mut elements = vec![Permutation::identity(degree)];
    let mut index: HashMap<Permutation, usize> = HashMap::new();
    index.insert(elements[0].clone(), 0);
    let mut next = 0;
    while next < elements.len() {
        for g in generators {
            let h = g * &elements[next];
            if !index.contains_key(&h) {
                if elements.len() == bound {
                    return Err(Error::GroupTooLarge { bound });
                }
                index.insert(h.clone(), elements.len());
                elements.push(h);
            }
        }
        next += 1;
    }
    Ok(elements)
}
