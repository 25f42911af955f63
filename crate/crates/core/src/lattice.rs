//! Torus and infinite-lattice geometry.
//!
//! The torus `T_{r,d}` is identified with the centered box
//! `{-floor(r/2), ..., ceil(r/2) - 1}^d` of `Z^d`. Bonds of the torus are
//! represented by one lattice lift: the unique r-equivalent lattice bond whose
//! lexicographically smaller endpoint lies in the box.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{PercError, Result};

/// Inline coordinate storage; dimensions up to 8 never allocate.
pub type Coords = SmallVec<[i32; 8]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    NearestNeighbor,
    /// Range-`range` percolation: `x ~ y` iff `0 < ||x - y||_inf <= range`.
    SpreadOut {
        range: u32,
    },
}

/// A site of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexZ(pub Coords);

/// A site of the torus, always stored in the centered fundamental domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VertexT(Coords);

impl VertexZ {
    pub fn new(coords: &[i32]) -> Self {
        VertexZ(Coords::from_slice(coords))
    }

    pub fn origin(dim: usize) -> Self {
        VertexZ(smallvec::smallvec![0; dim])
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sup_norm(&self) -> u32 {
        sup_norm(&self.0)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }
}

impl VertexT {
    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    /// Lifts the torus vertex to its representative inside the box.
    pub fn to_lattice(&self) -> VertexZ {
        VertexZ(self.0.clone())
    }
}

impl fmt::Display for VertexZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

pub(crate) fn sup_norm(c: &[i32]) -> u32 {
    c.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
}

/// Serialized form of a [`TorusSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecFields {
    pub dim: usize,
    pub side: u32,
    pub model: Model,
}

/// Dimension, side length and adjacency model of a torus, together with the
/// matching infinite lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpecFields", into = "SpecFields")]
pub struct TorusSpec {
    dim: usize,
    side: u32,
    model: Model,
    /// Neighbor offsets in lexicographic order.
    offsets: Vec<Coords>,
    /// Indices into `offsets` of the lexicographically positive offsets.
    forward: Vec<usize>,
}

impl PartialEq for TorusSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.side == other.side && self.model == other.model
    }
}

impl TryFrom<SpecFields> for TorusSpec {
    type Error = PercError;

    fn try_from(f: SpecFields) -> Result<Self> {
        TorusSpec::new(f.dim, f.side, f.model)
    }
}

impl From<TorusSpec> for SpecFields {
    fn from(s: TorusSpec) -> Self {
        s.fields()
    }
}

const MAX_OFFSETS: u64 = 1 << 20;

impl TorusSpec {
    pub fn new(dim: usize, side: u32, model: Model) -> Result<Self> {
        if dim == 0 {
            return Err(PercError::InvalidSpec("dimension must be positive".into()));
        }
        if side > i32::MAX as u32 / 4 {
            return Err(PercError::InvalidSpec(format!(
                "side length {side} too large"
            )));
        }
        let range = match model {
            Model::NearestNeighbor => {
                if side < 3 {
                    return Err(PercError::InvalidSpec(format!(
                        "nearest-neighbor torus needs r >= 3, got r = {side}"
                    )));
                }
                1
            }
            Model::SpreadOut { range } => {
                if range == 0 {
                    return Err(PercError::InvalidSpec(
                        "spread-out range must be positive".into(),
                    ));
                }
                if (side as u64) < 2 * range as u64 + 1 {
                    return Err(PercError::InvalidSpec(format!(
                        "spread-out torus needs r >= 2L+1 = {}, got r = {side}",
                        2 * range as u64 + 1
                    )));
                }
                range
            }
        };
        let offsets = match model {
            Model::NearestNeighbor => {
                let mut v = Vec::with_capacity(2 * dim);
                for i in 0..dim {
                    for s in [-1, 1] {
                        let mut c: Coords = smallvec::smallvec![0; dim];
                        c[i] = s;
                        v.push(c);
                    }
                }
                v.sort();
                v
            }
            Model::SpreadOut { .. } => {
                let width = 2 * range as u64 + 1;
                let count = width
                    .checked_pow(dim as u32)
                    .filter(|&c| c <= MAX_OFFSETS)
                    .ok_or_else(|| {
                        PercError::InvalidSpec(format!(
                            "degree (2L+1)^d - 1 too large for d = {dim}, L = {range}"
                        ))
                    })?;
                let mut v = Vec::with_capacity(count as usize - 1);
                let r = range as i32;
                let mut c: Coords = smallvec::smallvec![-r; dim];
                // odometer in lexicographic order
                loop {
                    if c.iter().any(|&x| x != 0) {
                        v.push(c.clone());
                    }
                    let mut done = true;
                    for i in (0..dim).rev() {
                        if c[i] < r {
                            c[i] += 1;
                            done = false;
                            break;
                        }
                        c[i] = -r;
                    }
                    if done {
                        break;
                    }
                }
                v
            }
        };
        let forward = offsets
            .iter()
            .enumerate()
            .filter(|(_, o)| is_lex_positive(o))
            .map(|(i, _)| i)
            .collect();
        Ok(TorusSpec {
            dim,
            side,
            model,
            offsets,
            forward,
        })
    }

    pub fn nearest_neighbor(dim: usize, side: u32) -> Result<Self> {
        Self::new(dim, side, Model::NearestNeighbor)
    }

    pub fn spread_out(dim: usize, side: u32, range: u32) -> Result<Self> {
        Self::new(dim, side, Model::SpreadOut { range })
    }

    pub fn fields(&self) -> SpecFields {
        SpecFields {
            dim: self.dim,
            side: self.side,
            model: self.model,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Largest coordinate step of a single bond.
    pub fn range(&self) -> u32 {
        match self.model {
            Model::NearestNeighbor => 1,
            Model::SpreadOut { range } => range,
        }
    }

    /// Degree Omega of every vertex.
    pub fn degree(&self) -> usize {
        self.offsets.len()
    }

    /// Volume `V = r^d` (saturating at `u64::MAX`).
    pub fn volume(&self) -> u64 {
        (self.side as u64).saturating_pow(self.dim as u32)
    }

    /// Number of torus bonds, `V * Omega / 2`.
    pub fn bond_count(&self) -> u64 {
        self.volume().saturating_mul(self.forward.len() as u64)
    }

    pub fn offsets(&self) -> &[Coords] {
        &self.offsets
    }

    /// Offsets whose first nonzero coordinate is positive; exactly half of them.
    pub fn forward_offsets(&self) -> impl Iterator<Item = &Coords> + '_ {
        self.forward.iter().map(move |&i| &self.offsets[i])
    }

    pub(crate) fn forward_count(&self) -> usize {
        self.forward.len()
    }

    /// `floor(r/2)`, so the fundamental domain is `[-lo, r - lo)` per coordinate.
    pub fn domain_low(&self) -> i32 {
        (self.side / 2) as i32
    }

    #[inline]
    pub fn wrap_coord(&self, c: i64) -> i32 {
        let r = self.side as i64;
        let h = self.domain_low() as i64;
        ((c + h).rem_euclid(r) - h) as i32
    }

    #[inline]
    pub fn coord_in_domain(&self, c: i32) -> bool {
        let h = self.domain_low();
        c >= -h && c < self.side as i32 - h
    }

    pub fn in_domain(&self, c: &[i32]) -> bool {
        c.len() == self.dim && c.iter().all(|&x| self.coord_in_domain(x))
    }

    /// Torus vertex with the given coordinates, which must already lie in the
    /// fundamental domain.
    pub fn torus_vertex(&self, coords: &[i32]) -> Result<VertexT> {
        if !self.in_domain(coords) {
            return Err(PercError::InvalidArgument(format!(
                "{coords:?} is not in the fundamental domain of T_{{{},{}}}",
                self.side, self.dim
            )));
        }
        Ok(VertexT(Coords::from_slice(coords)))
    }

    pub fn torus_origin(&self) -> VertexT {
        VertexT(smallvec::smallvec![0; self.dim])
    }

    /// Representative of the residue class of `x` in the fundamental domain.
    pub fn canonical_class(&self, x: &VertexZ) -> VertexT {
        VertexT(x.0.iter().map(|&c| self.wrap_coord(c as i64)).collect())
    }

    /// The `Omega` torus neighbors of `x`, in lexicographic offset order.
    pub fn torus_neighbors(&self, x: &VertexT) -> Vec<VertexT> {
        self.offsets
            .iter()
            .map(|o| {
                VertexT(
                    x.0.iter()
                        .zip(o)
                        .map(|(&a, &b)| self.wrap_coord(a as i64 + b as i64))
                        .collect(),
                )
            })
            .collect()
    }

    /// The `Omega` lattice neighbors of `x`, in lexicographic order.
    pub fn zd_neighbors(&self, x: &VertexZ) -> Result<Vec<VertexZ>> {
        self.offsets
            .iter()
            .map(|o| step(&x.0, o).map(VertexZ))
            .collect()
    }

    /// Whether `x` and `y` are joined by a bond of `Z^d` under this model.
    pub fn lattice_adjacent(&self, x: &[i32], y: &[i32]) -> bool {
        if x.len() != self.dim || y.len() != self.dim {
            return false;
        }
        match self.model {
            Model::NearestNeighbor => {
                let l1: u64 = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| (a as i64 - b as i64).unsigned_abs())
                    .sum();
                l1 == 1
            }
            Model::SpreadOut { range } => {
                let sup = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| (a as i64 - b as i64).unsigned_abs())
                    .max()
                    .unwrap_or(0);
                sup > 0 && sup <= range as u64
            }
        }
    }

    /// Whether two lattice bonds are r-equivalent (reflexive).
    pub fn bond_equiv(&self, b1: &BondKey, b2: &BondKey) -> bool {
        let r = self.side as i64;
        let mut shift = Vec::with_capacity(self.dim);
        for (&a1, &a2) in b1.lo.iter().zip(b2.lo.iter()) {
            let s = a1 as i64 - a2 as i64;
            if s % r != 0 {
                return false;
            }
            shift.push(s);
        }
        b1.hi
            .iter()
            .zip(b2.hi.iter())
            .zip(&shift)
            .all(|((&c1, &c2), &s)| c1 as i64 - c2 as i64 == s)
    }

    /// Canonical representative of the r-equivalence class of `b`: the lift
    /// whose lower endpoint lies in the fundamental domain.
    pub fn bond_canonical(&self, b: &BondKey) -> BondKey {
        let mut lo = Coords::with_capacity(self.dim);
        let mut hi = Coords::with_capacity(self.dim);
        for (&a, &c) in b.lo.iter().zip(b.hi.iter()) {
            let w = self.wrap_coord(a as i64);
            let shift = w as i64 - a as i64;
            lo.push(w);
            hi.push((c as i64 + shift) as i32);
        }
        BondKey { lo, hi }
    }
}

fn is_lex_positive(o: &[i32]) -> bool {
    o.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

#[inline]
pub(crate) fn step(x: &[i32], o: &[i32]) -> Result<Coords> {
    let mut out = Coords::with_capacity(x.len());
    for (&a, &b) in x.iter().zip(o) {
        match a.checked_add(b) {
            Some(v) => out.push(v),
            None => return Err(PercError::CoordinateOverflow(x.to_vec())),
        }
    }
    Ok(out)
}

/// An undirected lattice bond, stored with its lexicographically smaller
/// endpoint first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondKey {
    lo: Coords,
    hi: Coords,
}

impl BondKey {
    /// Normalized bond between two adjacent lattice sites.
    pub fn new(x: &VertexZ, y: &VertexZ, spec: &TorusSpec) -> Result<Self> {
        if !spec.lattice_adjacent(&x.0, &y.0) {
            return Err(PercError::InvalidArgument(format!(
                "{x} and {y} are not adjacent"
            )));
        }
        Ok(Self::from_coords(&x.0, &y.0))
    }

    /// Normalizes without checking adjacency.
    pub(crate) fn from_coords(x: &[i32], y: &[i32]) -> Self {
        match x.cmp(y) {
            Ordering::Greater => BondKey {
                lo: Coords::from_slice(y),
                hi: Coords::from_slice(x),
            },
            _ => BondKey {
                lo: Coords::from_slice(x),
                hi: Coords::from_slice(y),
            },
        }
    }

    pub fn lo(&self) -> &[i32] {
        &self.lo
    }

    pub fn hi(&self) -> &[i32] {
        &self.hi
    }

    pub fn endpoints(&self) -> (VertexZ, VertexZ) {
        (VertexZ(self.lo.clone()), VertexZ(self.hi.clone()))
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Little-endian byte encoding: `d` as `u32`, then every coordinate of the
    /// lower endpoint followed by the upper one, each as `i32`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 8 * self.lo.len());
        out.extend_from_slice(&(self.lo.len() as u32).to_le_bytes());
        for c in self.lo.iter().chain(self.hi.iter()) {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out
    }
}

impl fmt::Display for BondKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:?}, {:?}}}", self.lo.as_slice(), self.hi.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn v(c: &[i32]) -> VertexZ {
        VertexZ::new(c)
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(TorusSpec::nearest_neighbor(2, 2).is_err());
        assert!(TorusSpec::nearest_neighbor(0, 5).is_err());
        assert!(TorusSpec::spread_out(1, 4, 2).is_err());
        assert!(TorusSpec::spread_out(1, 5, 2).is_ok());
        assert!(TorusSpec::spread_out(2, 5, 0).is_err());
    }

    #[test]
    fn degree_and_volume() {
        let s = TorusSpec::nearest_neighbor(7, 4).unwrap();
        assert_eq!(s.degree(), 14);
        assert_eq!(s.volume(), 16384);
        assert_eq!(s.bond_count(), 16384 * 7);
        let s = TorusSpec::spread_out(2, 5, 2).unwrap();
        assert_eq!(s.degree(), 24);
        assert_eq!(s.forward_count(), 12);
    }

    #[test]
    fn torus_neighbors_nn_small() {
        let s = TorusSpec::nearest_neighbor(2, 3).unwrap();
        let x = s.torus_vertex(&[0, 0]).unwrap();
        let got: HashSet<_> = s
            .torus_neighbors(&x)
            .into_iter()
            .map(|v| v.coords().to_vec())
            .collect();
        let want: HashSet<_> = [[1, 0], [-1, 0], [0, 1], [0, -1]]
            .iter()
            .map(|c| c.to_vec())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn torus_neighbors_spread_out_line() {
        let s = TorusSpec::spread_out(1, 5, 2).unwrap();
        let x = s.torus_vertex(&[0]).unwrap();
        let got: Vec<_> = s
            .torus_neighbors(&x)
            .into_iter()
            .map(|v| v.coords()[0])
            .collect();
        assert_eq!(got, vec![-2, -1, 1, 2]);
    }

    #[test]
    fn torus_neighbors_wrap() {
        let s = TorusSpec::nearest_neighbor(2, 3).unwrap();
        let x = s.torus_vertex(&[1, 1]).unwrap();
        let n: Vec<_> = s
            .torus_neighbors(&x)
            .into_iter()
            .map(|v| v.coords().to_vec())
            .collect();
        assert!(n.contains(&vec![-1, 1]));
        assert!(n.contains(&vec![1, -1]));
        assert!(n.iter().all(|c| s.in_domain(c)));
    }

    #[test]
    fn zd_neighbors_counts() {
        let s = TorusSpec::nearest_neighbor(2, 3).unwrap();
        assert_eq!(s.zd_neighbors(&v(&[0, 0])).unwrap().len(), 4);
        let s = TorusSpec::spread_out(2, 3, 1).unwrap();
        let n = s.zd_neighbors(&v(&[5, 5])).unwrap();
        assert_eq!(n.len(), 8);
        assert!(n.iter().all(|w| w.0.iter().all(|&c| (4..=6).contains(&c))));
        assert!(!n.contains(&v(&[5, 5])));
    }

    #[test]
    fn zd_neighbors_overflow_is_checked() {
        let s = TorusSpec::nearest_neighbor(1, 3).unwrap();
        assert!(matches!(
            s.zd_neighbors(&v(&[i32::MAX])),
            Err(PercError::CoordinateOverflow(_))
        ));
    }

    #[test]
    fn canonical_class_examples() {
        let s = TorusSpec::nearest_neighbor(1, 3).unwrap();
        assert_eq!(s.canonical_class(&v(&[5])).coords(), &[-1]);
        let s = TorusSpec::nearest_neighbor(2, 4).unwrap();
        assert_eq!(s.canonical_class(&v(&[-4, 7])).coords(), &[0, -1]);
        assert_eq!(s.canonical_class(&v(&[0, 0])).coords(), &[0, 0]);
    }

    #[test]
    fn bond_equivalence_examples() {
        let s = TorusSpec::nearest_neighbor(1, 3).unwrap();
        let b = |a: i32, c: i32| BondKey::new(&v(&[a]), &v(&[c]), &s).unwrap();
        assert!(s.bond_equiv(&b(0, 1), &b(3, 4)));
        assert!(!s.bond_equiv(&b(0, 1), &b(1, 2)));
        assert!(s.bond_equiv(&b(0, 1), &b(0, 1)));
        assert_eq!(s.bond_canonical(&b(3, 4)), b(0, 1));
        assert_eq!(s.bond_canonical(&b(0, 1)), b(0, 1));
        assert_eq!(s.bond_canonical(&b(-2, -1)), b(1, 2));
    }

    #[test]
    fn canonical_torus_bond_count() {
        for spec in [
            TorusSpec::nearest_neighbor(1, 3).unwrap(),
            TorusSpec::nearest_neighbor(2, 3).unwrap(),
            TorusSpec::nearest_neighbor(3, 4).unwrap(),
            TorusSpec::spread_out(2, 5, 2).unwrap(),
        ] {
            let h = spec.domain_low();
            let r = spec.side() as i32;
            let mut classes = HashSet::new();
            // every bond incident to a box vertex, in every direction
            let mut c: Coords = smallvec::smallvec![-h; spec.dim()];
            loop {
                for o in spec.offsets() {
                    let y = step(&c, o).unwrap();
                    classes.insert(spec.bond_canonical(&BondKey::from_coords(&c, &y)));
                }
                let mut i = 0;
                while i < spec.dim() {
                    c[i] += 1;
                    if c[i] < r - h {
                        break;
                    }
                    c[i] = -h;
                    i += 1;
                }
                if i == spec.dim() {
                    break;
                }
            }
            assert_eq!(classes.len() as u64, spec.bond_count());
        }
    }

    #[test]
    fn spec_serde_roundtrip() {
        let s = TorusSpec::spread_out(3, 5, 2).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: TorusSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.degree(), 124);
        let bad = r#"{"dim":1,"side":2,"model":{"kind":"nearest_neighbor"}}"#;
        assert!(serde_json::from_str::<TorusSpec>(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spec() -> impl Strategy<Value = TorusSpec> {
            prop_oneof![
                (1usize..5, 3u32..8).prop_map(|(d, r)| TorusSpec::nearest_neighbor(d, r).unwrap()),
                (1usize..4, 1u32..3, 0u32..3).prop_map(|(d, l, extra)| TorusSpec::spread_out(
                    d,
                    2 * l + 1 + extra,
                    l
                )
                .unwrap()),
            ]
        }

        fn bond_in(spec: &TorusSpec, base: Vec<i32>, oi: usize) -> BondKey {
            let base: Vec<i32> = base.into_iter().take(spec.dim()).collect();
            let o = &spec.offsets()[oi % spec.degree()];
            let y = step(&base, o).unwrap();
            BondKey::from_coords(&base, &y)
        }

        proptest! {
            #[test]
            fn neighbor_counts_match_degree(s in spec(), x in proptest::collection::vec(-50i32..50, 4)) {
                let x = VertexZ::new(&x[..s.dim()]);
                let zn = s.zd_neighbors(&x).unwrap();
                prop_assert_eq!(zn.len(), s.degree());
                prop_assert_eq!(zn.iter().collect::<HashSet<_>>().len(), s.degree());
                let t = s.canonical_class(&x);
                let tn = s.torus_neighbors(&t);
                prop_assert_eq!(tn.iter().collect::<HashSet<_>>().len(), s.degree());
            }

            #[test]
            fn canonical_class_idempotent_and_periodic(s in spec(), x in proptest::collection::vec(-50i32..50, 4), z in proptest::collection::vec(-3i32..3, 4)) {
                let x = &x[..s.dim()];
                let c = s.canonical_class(&VertexZ::new(x));
                prop_assert!(s.in_domain(c.coords()));
                prop_assert_eq!(s.canonical_class(&c.to_lattice()), c.clone());
                let shifted: Vec<i32> = x.iter().zip(&z).map(|(&a, &k)| a + k * s.side() as i32).collect();
                prop_assert_eq!(s.canonical_class(&VertexZ::new(&shifted)), c);
            }

            #[test]
            fn bond_equiv_is_equivalence_and_matches_canonical(
                s in spec(),
                a in proptest::collection::vec(-9i32..9, 4),
                b in proptest::collection::vec(-9i32..9, 4),
                c in proptest::collection::vec(-9i32..9, 4),
                oa in 0usize..1000, ob in 0usize..1000, oc in 0usize..1000,
                z in proptest::collection::vec(-2i32..2, 4),
            ) {
                let b1 = bond_in(&s, a.clone(), oa);
                // force a fair share of equivalent pairs
                let shifted: Vec<i32> = a.iter().zip(&z).map(|(&x, &k)| x + k * s.side() as i32).collect();
                let b2 = if ob % 2 == 0 { bond_in(&s, shifted, oa) } else { bond_in(&s, b, ob) };
                let b3 = bond_in(&s, c, oc);
                prop_assert!(s.bond_equiv(&b1, &b1));
                prop_assert_eq!(s.bond_equiv(&b1, &b2), s.bond_equiv(&b2, &b1));
                if s.bond_equiv(&b1, &b2) && s.bond_equiv(&b2, &b3) {
                    prop_assert!(s.bond_equiv(&b1, &b3));
                }
                let k1 = s.bond_canonical(&b1);
                prop_assert!(s.bond_equiv(&b1, &k1));
                prop_assert_eq!(s.bond_canonical(&k1), k1.clone());
                prop_assert_eq!(k1 == s.bond_canonical(&b2), s.bond_equiv(&b1, &b2));
            }
        }
    }
}
