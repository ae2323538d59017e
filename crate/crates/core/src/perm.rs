//! Permutation algebra on `{1..l}`.
//!
//! Storage is 0-based; the `*_one_based` constructors and accessors convert
//! at the boundary. Composition is rightmost-first: `p.compose(&q)` applies
//! `q`, then `p`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// A bijection on `{0..l}`; `map[k]` is the image of `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self {
            map: (0..len).collect(),
        }
    }

    pub fn from_zero_based(map: Vec<usize>) -> Result<Self> {
        let len = map.len();
        let mut seen = vec![false; len];
        for &v in &map {
            if v >= len {
                return Err(Error::NotABijection {
                    len,
                    reason: format!("image {} out of range", v + 1),
                });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::NotABijection {
                    len,
                    reason: format!("image {} repeated", v + 1),
                });
            }
        }
        Ok(Self { map })
    }

    /// Builds from images in `1..=l`, e.g. `[4, 2, 1, 3]` for 1→4, 2→2, 3→1, 4→3.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let len = images.len();
        let map = images
            .iter()
            .map(|&v| {
                v.checked_sub(1).ok_or_else(|| Error::NotABijection {
                    len,
                    reason: "image 0 is not in 1..=l".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_zero_based(map)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|v| v + 1).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(k, &v)| k == v)
    }

    /// Image of `k` (0-based).
    #[inline]
    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    /// `self · other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(Permutation {
            map: other.map.iter().map(|&k| self.map[k]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (k, &v) in self.map.iter().enumerate() {
            inv[v] = k;
        }
        Permutation { map: inv }
    }

    /// Disjoint cycle decomposition, fixed points included. Each cycle starts
    /// at its smallest element and cycles are ordered by that element.
    pub fn cycles(&self) -> Vec<Cycle> {
        let mut covered = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if covered[start] {
                continue;
            }
            let mut elements = vec![start];
            covered[start] = true;
            let mut k = self.map[start];
            while k != start {
                covered[k] = true;
                elements.push(k);
                k = self.map[k];
            }
            out.push(Cycle { elements });
        }
        out
    }

    /// Factors the permutation into transpositions listed in application
    /// order: applying them one after another to the identity yields `self`.
    pub fn factor_into_walks(&self) -> Vec<Transposition> {
        self.cycles().iter().flat_map(|c| c.to_transpositions()).collect()
    }

    /// `t_k · ... · t_1 · identity` for `ts = [t_1, ..., t_k]`.
    pub fn from_transpositions(len: usize, ts: &[Transposition]) -> Result<Permutation> {
        let mut p = Permutation::identity(len);
        for t in ts {
            t.check(len)?;
            for v in p.map.iter_mut() {
                *v = t.apply(*v);
            }
        }
        Ok(p)
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation with fixed points, e.g. `[1,4,3][2]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles() {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// An orbit `(x, τ(x), τ²(x), ...)` of a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cycle {
    elements: Vec<usize>,
}

impl Cycle {
    pub fn from_one_based(elements: &[usize]) -> Result<Self> {
        let len = elements.iter().copied().max().unwrap_or(0);
        let mut zero = Vec::with_capacity(elements.len());
        for &e in elements {
            let e0 = e.checked_sub(1).ok_or_else(|| Error::NotABijection {
                len,
                reason: "cycle element 0 is not in 1..=l".into(),
            })?;
            if zero.contains(&e0) {
                return Err(Error::NotABijection {
                    len,
                    reason: format!("cycle element {e} repeated"),
                });
            }
            zero.push(e0);
        }
        Ok(Self { elements: zero })
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.elements.iter().map(|e| e + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Writes `[x, c1, ..., cj]` as `[x, c1], [x, c2], ..., [x, cj]` in
    /// application order, i.e. the product `[x, cj] · ... · [x, c1]`.
    /// A fixed point yields an empty list.
    pub fn to_transpositions(&self) -> Vec<Transposition> {
        let Some((&head, rest)) = self.elements.split_first() else {
            return Vec::new();
        };
        rest.iter().map(|&e| Transposition { a: head, b: e }).collect()
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, e) in self.elements.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e + 1)?;
        }
        write!(f, "]")
    }
}

/// A 2-cycle exchanging positions `a` and `b` of the pooled sample (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transposition {
    pub a: usize,
    pub b: usize,
}

impl Transposition {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::NotABijection {
                len: a.max(b) + 1,
                reason: format!("transposition needs distinct indices, got {} twice", a + 1),
            });
        }
        Ok(Self { a, b })
    }

    pub fn from_one_based(a: usize, b: usize) -> Result<Self> {
        match (a.checked_sub(1), b.checked_sub(1)) {
            (Some(a), Some(b)) => Self::new(a, b),
            _ => Err(Error::IndexOutOfRange {
                what: "transposition",
                index: 0,
                len: a.max(b),
            }),
        }
    }

    #[inline]
    pub fn apply(&self, k: usize) -> usize {
        if k == self.a {
            self.b
        } else if k == self.b {
            self.a
        } else {
            k
        }
    }

    /// Exchanges the two positions in `values`.
    #[inline]
    pub fn apply_to<T>(&self, values: &mut [T]) {
        values.swap(self.a, self.b);
    }

    pub fn as_permutation(&self, len: usize) -> Result<Permutation> {
        self.check(len)?;
        let mut p = Permutation::identity(len);
        p.map.swap(self.a, self.b);
        Ok(p)
    }

    fn check(&self, len: usize) -> Result<()> {
        for idx in [self.a, self.b] {
            if idx >= len {
                return Err(Error::IndexOutOfRange {
                    what: "transposition",
                    index: idx + 1,
                    len,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Transposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.a + 1, self.b + 1)
    }
}

/// Between-group exchange of `x[i]` and `y[j]` (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Walk {
    pub i: usize,
    pub j: usize,
}

impl Walk {
    /// Draws `i` uniformly from `0..m` and then `j` uniformly from `0..n`.
    pub fn sample(rng: &mut RandomStream, m: usize, n: usize) -> Result<Walk> {
        if m == 0 || n == 0 {
            return Err(Error::GroupTooSmall {
                group: if m == 0 { "x" } else { "y" },
                len: 0,
                min: 1,
            });
        }
        Ok(Self::sample_unchecked(rng, m, n))
    }

    #[inline]
    pub(crate) fn sample_unchecked(rng: &mut RandomStream, m: usize, n: usize) -> Walk {
        let i = rng.index(m);
        let j = rng.index(n);
        Walk { i, j }
    }

    /// Position pair in the pooled ordering `(x_1..x_m, y_1..y_n)`.
    pub fn as_transposition(&self, m: usize) -> Transposition {
        Transposition {
            a: self.i,
            b: m + self.j,
        }
    }
}
