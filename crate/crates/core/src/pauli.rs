//! N-site Pauli strings in the two-mask encoding, their dense matrices,
//! collective spin operators and the Pauli-basis expansion of dense operators.
//!
//! Site `i` is bit `i` of both masks and of every computational-basis index.
//! Bit value 0 is the `σ^z = +1` state. A string acts on a basis state as
//!
//! ```text
//! Q|w⟩ = i^{|x ∧ z|} (−1)^{|z ∧ w|} |w ⊕ x⟩
//! ```
//!
//! which is the convention `Y = i X Z` per site. Strings print with site 0 leftmost.

use std::fmt;
use std::str::FromStr;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, zero, DenseOperator};

/// Largest chain for full-space dense operators.
pub const MAX_DENSE_SITES: usize = 16;

/// Largest chain for exhaustive 4^N Pauli projections.
pub const MAX_PAULI_PROJECTION_SITES: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_sites: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn new(n_sites: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        if n_sites == 0 || n_sites > 63 {
            return Err(Error::InvalidParameter {
                name: "n_sites",
                reason: format!("{n_sites} is outside 1..=63"),
            });
        }
        let outside = !((1u64 << n_sites) - 1);
        if (x_mask | z_mask) & outside != 0 {
            return Err(Error::InvalidParameter {
                name: "mask",
                reason: format!("bits set beyond site {}", n_sites - 1),
            });
        }
        Ok(Self {
            n_sites,
            x_mask,
            z_mask,
        })
    }

    pub fn identity(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, 0, 0)
    }

    /// A single non-identity factor at `site`.
    pub fn single(n_sites: usize, site: usize, pauli: Pauli) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::InvalidParameter {
                name: "site",
                reason: format!("site {site} outside a chain of {n_sites}"),
            });
        }
        let bit = 1u64 << site;
        let (x, z) = match pauli {
            Pauli::I => (0, 0),
            Pauli::X => (bit, 0),
            Pauli::Y => (bit, bit),
            Pauli::Z => (0, bit),
        };
        Self::new(n_sites, x, z)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// Number of non-identity sites, the operator size r(Q).
    pub fn size(&self) -> usize {
        (self.x_mask | self.z_mask).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn site(&self, site: usize) -> Pauli {
        let x = self.x_mask >> site & 1 == 1;
        let z = self.z_mask >> site & 1 == 1;
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Image of computational basis state `w`: `(phase, target)` with `Q|w⟩ = phase |target⟩`.
    pub fn apply_to_basis(&self, w: usize) -> (c64, usize) {
        let target = w ^ self.x_mask as usize;
        let y_count = (self.x_mask & self.z_mask).count_ones();
        let sign_count = (self.z_mask & w as u64).count_ones();
        (phase(y_count + 2 * sign_count), target)
    }

    /// Every string on `n_sites` sites, ordered by `(x_mask, z_mask)`.
    pub fn all(n_sites: usize) -> impl Iterator<Item = PauliString> {
        let d = 1u64 << n_sites;
        (0..d).flat_map(move |x| {
            (0..d).map(move |z| PauliString {
                n_sites,
                x_mask: x,
                z_mask: z,
            })
        })
    }
}

/// `i^k`.
fn phase(k: u32) -> c64 {
    match k % 4 {
        0 => c64::new(1.0, 0.0),
        1 => c64::new(0.0, 1.0),
        2 => c64::new(-1.0, 0.0),
        _ => c64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for site in 0..self.n_sites {
            let c = match self.site(site) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(Error::PauliParse("empty string".into()));
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (site, c) in chars.iter().enumerate() {
            if site >= 63 {
                return Err(Error::PauliParse("more than 63 sites".into()));
            }
            let bit = 1u64 << site;
            match c.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                'Z' => z |= bit,
                other => return Err(Error::PauliParse(format!("unexpected character {other:?}"))),
            }
        }
        PauliString::new(chars.len(), x, z)
    }
}

pub(crate) fn check_dense_capacity(what: &'static str, n_sites: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::InvalidParameter {
            name: "n_sites",
            reason: "chain must have at least one site".into(),
        });
    }
    if n_sites > MAX_DENSE_SITES {
        return Err(Error::Capacity {
            what,
            n_sites,
            limit: MAX_DENSE_SITES,
        });
    }
    Ok(())
}

/// Dense `2^N × 2^N` matrix of a Pauli string.
pub fn pauli_matrix(p: &PauliString) -> Result<DenseOperator> {
    check_dense_capacity("pauli_matrix", p.n_sites)?;
    let d = 1usize << p.n_sites;
    let mut m = DenseOperator::zeros(d);
    for w in 0..d {
        let (ph, target) = p.apply_to_basis(w);
        m.set(target, w, ph);
    }
    Ok(m)
}

/// `S_α = ½ Σ_i σ_i^α` on `n_sites` sites.
pub fn collective_spin(axis: Axis, n_sites: usize) -> Result<DenseOperator> {
    check_dense_capacity("collective_spin", n_sites)?;
    let d = 1usize << n_sites;
    let mut m = DenseOperator::zeros(d);
    for site in 0..n_sites {
        let p = PauliString::single(n_sites, site, axis.pauli())?;
        for w in 0..d {
            let (ph, target) = p.apply_to_basis(w);
            let cur = m.get(target, w);
            m.set(target, w, cur + ph * 0.5);
        }
    }
    Ok(m)
}

/// Coefficient of `q` in the orthonormal Pauli expansion of `a`: `tr(Q A) / 2^N`.
pub fn pauli_coefficient(a: &DenseOperator, q: &PauliString) -> Result<c64> {
    let d = 1usize << q.n_sites;
    check_dim(d, a.dim())?;
    // tr(QA) = Σ_w ⟨w⊕x|Q|w⟩ A[w, w⊕x]
    let mut acc = zero();
    for w in 0..d {
        let (ph, target) = q.apply_to_basis(w);
        acc += ph * a.get(w, target);
    }
    Ok(acc / d as f64)
}

/// All 4^N Pauli coefficients of a dense operator.
///
/// Indexed by `(x_mask << N) | z_mask`, matching [`PauliString::all`]. For each
/// X-pattern the coefficients over all Z-patterns are a Walsh-Hadamard transform
/// of the shifted diagonal `w ↦ A[w, w⊕x]`, so the whole expansion costs
/// `O(4^N · N)` instead of `O(8^N)`.
pub fn pauli_decomposition(a: &DenseOperator) -> Result<Vec<c64>> {
    let d = a.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidParameter {
            name: "operator",
            reason: format!("dimension {d} is not 2^N"),
        });
    }
    let n = d.trailing_zeros() as usize;
    if n > MAX_PAULI_PROJECTION_SITES {
        return Err(Error::Capacity {
            what: "pauli_decomposition",
            n_sites: n,
            limit: MAX_PAULI_PROJECTION_SITES,
        });
    }
    let mut out = vec![zero(); d * d];
    let mut buf = vec![zero(); d];
    for x in 0..d {
        for (w, b) in buf.iter_mut().enumerate() {
            *b = a.get(w, w ^ x);
        }
        walsh_hadamard(&mut buf);
        for (z, &v) in buf.iter().enumerate() {
            let y_count = (x & z).count_ones();
            out[(x << n) | z] = phase(y_count) * v / d as f64;
        }
    }
    Ok(out)
}

/// In-place unnormalized transform `v[z] ← Σ_w (−1)^{|z∧w|} v[w]`.
fn walsh_hadamard(v: &mut [c64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = v[i];
                let b = v[i + h];
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}
