//! The paraboloid `P = {(g, g.g)}` in `F^n`, Galilean maps, the lines
//! `l(y) = {x : y.x = y.y}` in `F^2`, and incidence counting.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::report::{LemmaReport, Verdict, Witness};
use crate::sampling;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 16;

/// Sum tables are only materialized below this many entries.
const SUM_TABLE_LIMIT: usize = 1 << 22;

/// Lookup tables over the ambient space are materialized; keep them bounded.
const SPACE_LIMIT: usize = 1 << 26;

pub fn add_vectors(field: &FieldSpec, x: &[FieldElement], y: &[FieldElement]) -> Vec<FieldElement> {
    x.iter().zip(y).map(|(&a, &b)| field.add(a, b)).collect()
}

pub fn sub_vectors(field: &FieldSpec, x: &[FieldElement], y: &[FieldElement]) -> Vec<FieldElement> {
    x.iter().zip(y).map(|(&a, &b)| field.sub(a, b)).collect()
}

pub fn neg_vector(field: &FieldSpec, x: &[FieldElement]) -> Vec<FieldElement> {
    x.iter().map(|&a| field.neg(a)).collect()
}

/// `F^dim` with a fixed lexicographic enumeration (first coordinate most
/// significant).
#[derive(Clone, Debug)]
pub struct VectorSpace {
    field: Arc<FieldSpec>,
    dim: usize,
    size: usize,
}

impl VectorSpace {
    pub fn new(field: Arc<FieldSpec>, dim: usize) -> Result<Self> {
        let size = (field.order() as u128)
            .checked_pow(dim as u32)
            .filter(|&s| s <= usize::MAX as u128 / 8)
            .ok_or(Error::EnumerationTooLarge { required: u128::MAX, cap: u64::MAX })?;
        Ok(VectorSpace { field, dim, size: size as usize })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn index_of(&self, v: &[FieldElement]) -> usize {
        debug_assert_eq!(v.len(), self.dim);
        let q = self.field.order() as usize;
        v.iter().fold(0, |acc, e| acc * q + e.index() as usize)
    }

    pub fn vector(&self, mut index: usize) -> Vec<FieldElement> {
        let q = self.field.order() as usize;
        let mut v = vec![self.field.zero(); self.dim];
        for slot in v.iter_mut().rev() {
            *slot = self.field.elem((index % q) as u32);
            index /= q;
        }
        v
    }

    pub fn vectors(&self) -> impl Iterator<Item = Vec<FieldElement>> + '_ {
        (0..self.size).map(move |i| self.vector(i))
    }

    /// Index of `vector(a) + vector(b)`.
    pub fn add_indices(&self, a: usize, b: usize) -> usize {
        let q = self.field.order() as usize;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.dim {
            let s = self.field.add(self.field.elem((a % q) as u32), self.field.elem((b % q) as u32));
            out += s.index() as usize * place;
            place *= q;
            a /= q;
            b /= q;
        }
        out
    }

    /// Index of `-vector(a)`.
    pub fn neg_index(&self, a: usize) -> usize {
        let q = self.field.order() as usize;
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.dim {
            out += self.field.neg(self.field.elem((a % q) as u32)).index() as usize * place;
            place *= q;
            a /= q;
        }
        out
    }

    pub fn sub_indices(&self, a: usize, b: usize) -> usize {
        self.add_indices(a, self.neg_index(b))
    }
}

/// A point `(g, g.g)` of the paraboloid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParaboloidPoint {
    base: Vec<FieldElement>,
    height: FieldElement,
}

impl ParaboloidPoint {
    pub fn new(field: &FieldSpec, base: Vec<FieldElement>) -> Self {
        let height = field.dot(&base, &base);
        ParaboloidPoint { base, height }
    }

    /// Interprets a vector of `F^n` as a point of `P`, if it lies on it.
    pub fn from_coords(field: &FieldSpec, x: &[FieldElement]) -> Option<Self> {
        on_paraboloid(field, x).then(|| ParaboloidPoint { base: x[..x.len() - 1].to_vec(), height: x[x.len() - 1] })
    }

    pub fn base(&self) -> &[FieldElement] {
        &self.base
    }

    pub fn height(&self) -> FieldElement {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.base.len() + 1
    }

    pub fn coords(&self) -> Vec<FieldElement> {
        let mut v = self.base.clone();
        v.push(self.height);
        v
    }
}

/// True iff the last coordinate equals the dot square of the others.
pub fn on_paraboloid(field: &FieldSpec, x: &[FieldElement]) -> bool {
    match x.split_last() {
        Some((&last, base)) => field.dot(base, base) == last,
        None => false,
    }
}

/// `g_delta(g, t) = (g + delta, t + 2 g.delta + delta.delta)`.
pub fn galilean(field: &FieldSpec, delta: &[FieldElement], pt: &ParaboloidPoint) -> Result<ParaboloidPoint> {
    if delta.len() != pt.base.len() {
        return Err(Error::DimensionMismatch { expected: pt.base.len(), got: delta.len() });
    }
    let two = field.from_int(2);
    let base = add_vectors(field, &pt.base, delta);
    let cross = field.mul(two, field.dot(&pt.base, delta));
    let height = field.add(field.add(pt.height, cross), field.dot(delta, delta));
    Ok(ParaboloidPoint { base, height })
}

/// The full paraboloid in `F^n` together with lookup tables.
///
/// Points are enumerated in the order of their base vector `g` in
/// `F^{n-1}`, so point `i` has base `base_space().vector(i)`; point 0 is the
/// origin.
pub struct Paraboloid {
    field: Arc<FieldSpec>,
    dim: usize,
    space: VectorSpace,
    base_space: VectorSpace,
    points: Vec<ParaboloidPoint>,
    space_index: Vec<u32>,
    lookup: Vec<u32>,
    sums: OnceLock<Vec<u32>>,
}

impl std::fmt::Debug for Paraboloid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Paraboloid").field("field", &self.field).field("dim", &self.dim).finish()
    }
}

const ABSENT: u32 = u32::MAX;

impl Paraboloid {
    pub fn new(field: Arc<FieldSpec>, dim: usize) -> Result<Self> {
        Self::with_cap(field, dim, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(field: Arc<FieldSpec>, dim: usize, cap: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let required = (field.order() as u128).pow(dim as u32 - 1);
        if required > cap as u128 {
            return Err(Error::EnumerationTooLarge { required, cap });
        }
        let space = VectorSpace::new(field.clone(), dim)?;
        if space.size() > SPACE_LIMIT {
            return Err(Error::EnumerationTooLarge { required: space.size() as u128, cap: SPACE_LIMIT as u64 });
        }
        let base_space = VectorSpace::new(field.clone(), dim - 1)?;
        let mut points = Vec::with_capacity(base_space.size());
        let mut space_index = Vec::with_capacity(base_space.size());
        let mut lookup = vec![ABSENT; space.size()];
        for (i, base) in base_space.vectors().enumerate() {
            let pt = ParaboloidPoint::new(&field, base);
            let idx = space.index_of(&pt.coords());
            lookup[idx] = i as u32;
            space_index.push(idx as u32);
            points.push(pt);
        }
        Ok(Paraboloid { field, dim, space, base_space, points, space_index, lookup, sums: OnceLock::new() })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<FieldSpec> {
        self.field.clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|P| = q^(n-1)`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn space(&self) -> &VectorSpace {
        &self.space
    }

    pub fn base_space(&self) -> &VectorSpace {
        &self.base_space
    }

    pub fn points(&self) -> &[ParaboloidPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &ParaboloidPoint {
        &self.points[i]
    }

    /// Index in `F^n` of point `i`.
    #[inline]
    pub fn space_index(&self, i: usize) -> usize {
        self.space_index[i] as usize
    }

    /// Paraboloid index of the vector with index `x` in `F^n`, if on `P`.
    #[inline]
    pub fn locate(&self, x: usize) -> Option<usize> {
        match self.lookup[x] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    pub fn locate_coords(&self, x: &[FieldElement]) -> Option<usize> {
        self.locate(self.space.index_of(x))
    }

    pub fn full(&self) -> Subset {
        Subset::from_sorted(self, (0..self.len() as u32).collect())
    }

    pub fn empty_subset(&self) -> Subset {
        Subset::from_sorted(self, Vec::new())
    }

    /// `F^n` index of `P_i + P_j`.
    #[inline]
    pub fn sum_index(&self, i: usize, j: usize) -> usize {
        match self.sum_table() {
            Some(t) => t[i * self.len() + j] as usize,
            None => self.space.add_indices(self.space_index(i), self.space_index(j)),
        }
    }

    fn sum_table(&self) -> Option<&Vec<u32>> {
        let n = self.len();
        if n * n > SUM_TABLE_LIMIT {
            return None;
        }
        Some(self.sums.get_or_init(|| {
            let mut t = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    t.push(self.space.add_indices(self.space_index(i), self.space_index(j)) as u32);
                }
            }
            t
        }))
    }

    /// Index of `g_delta(P_i)`.
    pub fn galilean_index(&self, delta: &[FieldElement], i: usize) -> Result<usize> {
        let image = galilean(&self.field, delta, &self.points[i])?;
        Ok(self.base_space.index_of(image.base()))
    }

    /// `g_delta(S)`.
    pub fn galilean_subset(&self, delta: &[FieldElement], s: &Subset) -> Result<Subset> {
        self.check(s)?;
        let mut members = s
            .members()
            .iter()
            .map(|&i| self.galilean_index(delta, i as usize).map(|j| j as u32))
            .collect::<Result<Vec<_>>>()?;
        members.sort_unstable();
        Ok(Subset::from_sorted(self, members))
    }

    pub(crate) fn check(&self, s: &Subset) -> Result<()> {
        if s.order != self.field.order() {
            return Err(Error::FieldMismatch { left: self.field.order(), right: s.order });
        }
        if s.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: s.dim });
        }
        Ok(())
    }
}

/// Full paraboloid for `(spec, n)`.
pub fn paraboloid(field: Arc<FieldSpec>, n: usize) -> Result<Paraboloid> {
    Paraboloid::new(field, n)
}

/// A subset of a paraboloid, stored as sorted point indices.
///
/// The canonical encoding is the bit mask with bit `i` set iff point `i` is a
/// member, written as lowercase hex with a `0x` prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subset {
    order: u32,
    dim: usize,
    universe: usize,
    members: Vec<u32>,
}

impl Subset {
    fn from_sorted(par: &Paraboloid, members: Vec<u32>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Subset { order: par.field.order(), dim: par.dim, universe: par.len(), members }
    }

    pub fn from_indices(par: &Paraboloid, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<u32> = Vec::new();
        for i in indices {
            if i >= par.len() {
                return Err(Error::DimensionMismatch { expected: par.len(), got: i });
            }
            members.push(i as u32);
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self::from_sorted(par, members))
    }

    pub fn from_flags(par: &Paraboloid, flags: &[bool]) -> Result<Self> {
        if flags.len() != par.len() {
            return Err(Error::DimensionMismatch { expected: par.len(), got: flags.len() });
        }
        let members = (0..flags.len() as u32).filter(|&i| flags[i as usize]).collect();
        Ok(Self::from_sorted(par, members))
    }

    /// Subset from the low `|P|` bits of `bits`; requires `|P| <= 64`.
    pub fn from_bits(par: &Paraboloid, bits: u64) -> Result<Self> {
        if par.len() > 64 || (par.len() < 64 && bits >> par.len() != 0) {
            return Err(Error::DimensionMismatch { expected: par.len(), got: 64 });
        }
        let members = (0..par.len() as u32).filter(|&i| bits >> i & 1 == 1).collect();
        Ok(Self::from_sorted(par, members))
    }

    pub fn from_mask_hex(par: &Paraboloid, hex: &str) -> Result<Self> {
        let bits = parse_mask_hex(hex, par.len())?;
        Ok(Self::from_sorted(par, bits))
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Order of the underlying field.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&(i as u32)).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.members.iter().all(|&i| other.contains(i as usize))
    }

    pub fn flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.universe];
        for &i in &self.members {
            f[i as usize] = true;
        }
        f
    }

    pub fn mask_words(&self) -> Vec<u64> {
        mask_words(&self.members, self.universe)
    }

    pub fn mask_hex(&self) -> String {
        format_mask_hex(&self.members, self.universe)
    }

    /// Numeric order of the canonical bit masks.
    pub fn cmp_mask(&self, other: &Subset) -> Ordering {
        cmp_masks(&self.mask_words(), &other.mask_words())
    }

    pub fn same_space(&self, other: &Subset) -> Result<()> {
        if self.order != other.order {
            return Err(Error::FieldMismatch { left: self.order, right: other.order });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }
}

pub(crate) fn mask_words(members: &[u32], universe: usize) -> Vec<u64> {
    let mut words = vec![0u64; universe.div_ceil(64).max(1)];
    for &i in members {
        words[i as usize / 64] |= 1 << (i % 64);
    }
    words
}

pub(crate) fn cmp_masks(a: &[u64], b: &[u64]) -> Ordering {
    let len = a.len().max(b.len());
    for k in (0..len).rev() {
        let x = a.get(k).copied().unwrap_or(0);
        let y = b.get(k).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

pub(crate) fn format_mask_hex(members: &[u32], universe: usize) -> String {
    let words = mask_words(members, universe);
    let mut s = String::from("0x");
    let mut started = false;
    for &w in words.iter().rev() {
        if started {
            write!(s, "{w:016x}").unwrap();
        } else if w != 0 {
            write!(s, "{w:x}").unwrap();
            started = true;
        }
    }
    if !started {
        s.push('0');
    }
    s
}

/// Decodes a hex mask into sorted member indices below `universe`.
pub(crate) fn parse_mask_hex(hex: &str, universe: usize) -> Result<Vec<u32>> {
    let digits = hex.trim().trim_start_matches("0x");
    if digits.is_empty() {
        return Err(Error::Parse(format!("empty mask {hex:?}")));
    }
    let mut members = Vec::new();
    for (pos, ch) in digits.chars().rev().enumerate() {
        let v = ch.to_digit(16).ok_or_else(|| Error::Parse(format!("bad hex digit {ch:?} in {hex:?}")))?;
        for bit in 0..4 {
            if v >> bit & 1 == 1 {
                let i = pos * 4 + bit;
                if i >= universe {
                    return Err(Error::Parse(format!("mask {hex} has bit {i} beyond {universe}")));
                }
                members.push(i as u32);
            }
        }
    }
    members.sort_unstable();
    Ok(members)
}

/// A vector of `F^2`.
pub type PlanePoint = [FieldElement; 2];

pub fn plane_index(field: &FieldSpec, x: PlanePoint) -> usize {
    x[0].index() as usize * field.order() as usize + x[1].index() as usize
}

pub fn plane_point(field: &FieldSpec, index: usize) -> PlanePoint {
    let q = field.order() as usize;
    [field.elem((index / q) as u32), field.elem((index % q) as u32)]
}

/// All of `F^2` in enumeration order.
pub fn plane_points(field: &FieldSpec) -> Vec<PlanePoint> {
    let q = field.order() as usize;
    (0..q * q).map(|i| plane_point(field, i)).collect()
}

/// An affine line `{x in F^2 : normal.x = offset}`.
///
/// The normal is scaled so its first nonzero coordinate is one, which makes
/// the representation unique.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    normal: PlanePoint,
    offset: FieldElement,
}

impl Line {
    pub fn new(field: &FieldSpec, normal: PlanePoint, offset: FieldElement) -> Result<Self> {
        let lead = if !normal[0].is_zero() {
            normal[0]
        } else if !normal[1].is_zero() {
            normal[1]
        } else {
            return Err(Error::ZeroLine);
        };
        let s = field.inv(lead)?;
        Ok(Line { normal: [field.mul(s, normal[0]), field.mul(s, normal[1])], offset: field.mul(s, offset) })
    }

    /// `l(y) = {x : y.x = y.y}` for `y != 0`.
    pub fn of(field: &FieldSpec, y: PlanePoint) -> Result<Self> {
        Self::new(field, y, field.dot(&y, &y))
    }

    pub fn normal(&self) -> PlanePoint {
        self.normal
    }

    pub fn offset(&self) -> FieldElement {
        self.offset
    }

    pub fn contains(&self, field: &FieldSpec, x: PlanePoint) -> bool {
        field.dot(&self.normal, &x) == self.offset
    }

    pub fn points(&self, field: &FieldSpec) -> Vec<PlanePoint> {
        plane_points(field).into_iter().filter(|&x| self.contains(field, x)).collect()
    }
}

pub fn line_of(field: &FieldSpec, y: PlanePoint) -> Result<Line> {
    Line::of(field, y)
}

/// All `q^2 + q` affine lines: normals `(1, b)` for `b` in enumeration order,
/// then `(0, 1)`; offsets in enumeration order within each normal.
pub fn all_lines(field: &FieldSpec) -> Vec<Line> {
    let mut normals: Vec<PlanePoint> = field.elements().map(|b| [field.one(), b]).collect();
    normals.push([field.zero(), field.one()]);
    normals.into_iter().flat_map(|nrm| field.elements().map(move |c| Line { normal: nrm, offset: c })).collect()
}

/// Points and lines in `F^2`.
#[derive(Clone, Debug)]
pub struct IncidenceInstance {
    pub points: Vec<PlanePoint>,
    pub lines: Vec<Line>,
}

impl IncidenceInstance {
    /// Deduplicates both sets.
    pub fn new(points: Vec<PlanePoint>, lines: Vec<Line>) -> Self {
        let mut points = points;
        points.sort();
        points.dedup();
        let mut seen = std::collections::HashSet::new();
        let lines = lines.into_iter().filter(|l| seen.insert(*l)).collect();
        IncidenceInstance { points, lines }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Incidences {
    pub count: u64,
    pub bound: f64,
    pub holds: bool,
}

/// `min(|P|^(1/2)|L| + |P|, |P||L|^(1/2) + |L|)`.
pub fn incidence_bound(points: usize, lines: usize) -> f64 {
    let (p, l) = (points as f64, lines as f64);
    (p.sqrt() * l + p).min(p * l.sqrt() + l)
}

pub fn count_incidences(field: &FieldSpec, inst: &IncidenceInstance) -> Incidences {
    let count = inst.lines.iter().map(|l| inst.points.iter().filter(|&&x| l.contains(field, x)).count() as u64).sum();
    let bound = incidence_bound(inst.points.len(), inst.lines.len());
    Incidences { count, bound, holds: count as f64 <= bound + 1e-9 }
}

/// Incidence bound on the full plane plus `trials` seeded random
/// sub-instances.
pub fn lemma1_check(field: &FieldSpec, trials: u64, seed: u64) -> LemmaReport {
    let points = plane_points(field);
    let lines = all_lines(field);
    let mut report = LemmaReport::new("lemma1");
    report.instances.push(format!("F_{}: full plane + {trials} random sub-instances", field.order()));
    let all_p: Vec<u32> = (0..points.len() as u32).collect();
    let all_l: Vec<u32> = (0..lines.len() as u32).collect();
    let mut eval = |pm: Vec<u32>, lm: Vec<u32>, trial: Option<u64>| {
        let inst = IncidenceInstance::new(
            pm.iter().map(|&i| points[i as usize]).collect(),
            lm.iter().map(|&i| lines[i as usize]).collect(),
        );
        let inc = count_incidences(field, &inst);
        let ratio = if inc.bound > 0.0 { inc.count as f64 / inc.bound } else { 0.0 };
        report.observe(ratio, inc.holds, || {
            let mut w = Witness::new("lemma1", field, None, Some(seed));
            w.put("points", format_mask_hex(&pm, points.len()));
            w.put("lines", format_mask_hex(&lm, lines.len()));
            if let Some(t) = trial {
                w.put("trial", t.to_string());
            }
            w.detail = format!("count={} bound={}", inc.count, inc.bound);
            w
        });
    };
    eval(all_p, all_l, None);
    for t in 0..trials {
        let mut rng = sampling::rng(seed, t);
        let pm = sampling::random_members(&mut rng, points.len());
        let lm = sampling::random_members(&mut rng, lines.len());
        eval(pm, lm, Some(t));
    }
    report.finish(true);
    report
}

/// Replays a single incidence instance from its encodings.
pub fn lemma1_instance(field: &FieldSpec, points_hex: &str, lines_hex: &str) -> Result<Incidences> {
    let points = plane_points(field);
    let lines = all_lines(field);
    let pm = parse_mask_hex(points_hex, points.len())?;
    let lm = parse_mask_hex(lines_hex, lines.len())?;
    let inst = IncidenceInstance::new(
        pm.iter().map(|&i| points[i as usize]).collect(),
        lm.iter().map(|&i| lines[i as usize]).collect(),
    );
    Ok(count_incidences(field, &inst))
}

/// Whether `y -> l(y)` is injective on nonzero `y in F^2`, comparing lines as
/// point sets.
///
/// Asserted when `-1` is not a square; otherwise the first colliding pair is
/// reported.
pub fn lines_distinct_check(field: &FieldSpec) -> LemmaReport {
    let asserted = !field.minus_one_is_square();
    let mut report = LemmaReport::new("lines-distinct");
    report.instances.push(format!("F_{}: all nonzero y in F^2", field.order()));
    let mut seen: HashMap<Vec<usize>, PlanePoint> = HashMap::new();
    let mut collision = None;
    for y in plane_points(field).into_iter().skip(1) {
        let line = Line::of(field, y).expect("nonzero y");
        let set: Vec<usize> = line.points(field).into_iter().map(|x| plane_index(field, x)).collect();
        match seen.get(&set) {
            Some(&prev) => {
                collision = Some((prev, y));
                break;
            }
            None => {
                seen.insert(set, y);
            }
        }
        report.checked += 1;
    }
    match collision {
        Some((a, b)) => {
            report.witness = Some(lines_witness(field, a, b));
            report.verdict = if asserted { Verdict::Fail } else { Verdict::ReportOnly };
            report.worst_ratio = 1.0;
        }
        None => {
            report.verdict = if asserted { Verdict::Pass } else { Verdict::ReportOnly };
        }
    }
    report.metric("collision_found", collision.is_some() as u8 as f64);
    report
}

fn lines_witness(field: &FieldSpec, a: PlanePoint, b: PlanePoint) -> Witness {
    let mut w = Witness::new("lines-distinct", field, None, None);
    w.put("y", format!("{},{}", a[0].index(), a[1].index()));
    w.put("y_prime", format!("{},{}", b[0].index(), b[1].index()));
    w.detail = "l(y) = l(y') as point sets".into();
    w
}

/// Whether `l(y)` and `l(y')` coincide as point sets.
pub fn lines_coincide(field: &FieldSpec, y: PlanePoint, y_prime: PlanePoint) -> Result<bool> {
    let a = Line::of(field, y)?.points(field);
    let b = Line::of(field, y_prime)?.points(field);
    Ok(a == b)
}

/// Whether `d, -d in P` for some `d != 0`.
///
/// Asserted absent for `n = 2`, and for `n = 3` when `-1` is not a square.
pub fn minus_d_check(par: &Paraboloid) -> LemmaReport {
    let field = par.field();
    let asserted = par.dim() == 2 || (par.dim() == 3 && !field.minus_one_is_square());
    let mut report = LemmaReport::new("minus-d");
    report.instances.push(format!("F_{}, n={}: all d in P \\ {{0}}", field.order(), par.dim()));
    let mut found = None;
    for i in 1..par.len() {
        report.checked += 1;
        let neg = par.space().neg_index(par.space_index(i));
        if par.locate(neg).is_some() {
            found = Some(i);
            break;
        }
    }
    report.verdict = match (found, asserted) {
        (None, true) => Verdict::Pass,
        (Some(_), true) => Verdict::Fail,
        _ => Verdict::ReportOnly,
    };
    if let Some(i) = found {
        let mut w = Witness::new("minus-d", field, Some(par.dim()), None);
        w.put("d", i.to_string());
        w.detail = "d and -d both on P".into();
        report.witness = Some(w);
        report.worst_ratio = 1.0;
    }
    report.metric("witness_found", found.is_some() as u8 as f64);
    report
}

/// Both sides of the Galilean counting identity for fixed `b = P_b`:
/// `#{(a, d, c) : a - d = c - b}` counted by a literal sum over `c in P`, and
/// `#{(a', d') : a' - d' in P}` after mapping `A, B` by `g_{-nu}`.
pub fn claim_counts(par: &Paraboloid, a: &Subset, bset: &Subset, b: usize) -> Result<(u64, u64)> {
    par.check(a)?;
    par.check(bset)?;
    let space = par.space();
    let f = par.field();
    let b_idx = par.space_index(b);
    let mut shifted = vec![0u32; space.size()];
    for c in 0..par.len() {
        shifted[space.sub_indices(par.space_index(c), b_idx)] += 1;
    }
    let mut lhs = 0u64;
    for &ai in a.members() {
        for &di in bset.members() {
            let diff = space.sub_indices(par.space_index(ai as usize), par.space_index(di as usize));
            lhs += shifted[diff] as u64;
        }
    }
    let minus_nu: Vec<FieldElement> = par.point(b).base().iter().map(|&x| f.neg(x)).collect();
    let a2 = par.galilean_subset(&minus_nu, a)?;
    let b2 = par.galilean_subset(&minus_nu, bset)?;
    let mut rhs = 0u64;
    for &ai in a2.members() {
        for &di in b2.members() {
            let diff = space.sub_indices(par.space_index(ai as usize), par.space_index(di as usize));
            rhs += par.locate(diff).is_some() as u64;
        }
    }
    Ok((lhs, rhs))
}

/// The Galilean identity for every `b in P` over `trials` seeded pairs.
pub fn claim_check(par: &Paraboloid, trials: u64, seed: u64) -> Result<LemmaReport> {
    use rayon::prelude::*;
    let mut report = LemmaReport::new("claim");
    report.instances.push(format!("F_{}, n={}: every b in P, {trials} random (A, B)", par.field().order(), par.dim()));
    let outcomes: Vec<Result<(Subset, Subset, Option<(usize, u64, u64)>)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng(seed, t);
            let a = sampling::random_subset(par, &mut rng);
            let b = sampling::random_subset(par, &mut rng);
            let mut bad = None;
            for bp in 0..par.len() {
                let (l, r) = claim_counts(par, &a, &b, bp)?;
                if l != r {
                    bad = Some((bp, l, r));
                    break;
                }
            }
            Ok((a, b, bad))
        })
        .collect();
    for out in outcomes {
        let (a, b, bad) = out?;
        report.observe(bad.is_some() as u8 as f64, bad.is_none(), || {
            let mut w = Witness::new("claim", par.field(), Some(par.dim()), Some(seed));
            w.put("A", a.mask_hex());
            w.put("B", b.mask_hex());
            if let Some((bp, l, r)) = bad {
                w.put("b", bp.to_string());
                w.detail = format!("lhs={l} rhs={r}");
            }
            w
        });
    }
    report.finish(true);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    fn f(p: u64) -> Arc<FieldSpec> {
        Arc::new(make_field(p, 1).unwrap())
    }

    #[test]
    fn paraboloid_sizes() {
        assert_eq!(Paraboloid::new(f(3), 3).unwrap().len(), 9);
        assert_eq!(Paraboloid::new(f(3), 4).unwrap().len(), 27);
        let p7 = Paraboloid::new(f(7), 2).unwrap();
        assert_eq!(p7.len(), 7);
        for pt in p7.points() {
            let g = pt.base()[0];
            assert_eq!(pt.height(), p7.field().mul(g, g));
        }
        assert!(matches!(Paraboloid::with_cap(f(3), 4, 26), Err(Error::EnumerationTooLarge { required: 27, cap: 26 })));
        assert_eq!(Paraboloid::new(f(3), 1).unwrap_err(), Error::InvalidDimension(1));
    }

    #[test]
    fn extension_field_paraboloid() {
        let f9 = Arc::new(make_field(3, 2).unwrap());
        let par = Paraboloid::new(f9.clone(), 3).unwrap();
        assert_eq!(par.len(), 81);
        for pt in par.points() {
            assert!(on_paraboloid(&f9, &pt.coords()));
        }
    }

    #[test]
    fn on_paraboloid_examples() {
        let fl = f(3);
        let v = |xs: [i64; 3]| xs.map(|x| fl.from_int(x));
        assert!(on_paraboloid(&fl, &v([1, 1, 2])));
        assert!(!on_paraboloid(&fl, &v([1, 1, 0])));
        assert!(on_paraboloid(&fl, &v([0, 0, 0])));
    }

    #[test]
    fn galilean_examples() {
        let fl = f(3);
        let pt = ParaboloidPoint::new(&fl, vec![fl.from_int(1), fl.from_int(1)]);
        assert_eq!(pt.height(), fl.from_int(2));
        let image = galilean(&fl, &[fl.from_int(1), fl.from_int(0)], &pt).unwrap();
        assert_eq!(image.base(), &[fl.from_int(2), fl.from_int(1)]);
        assert_eq!(image.height(), fl.from_int(2));
        assert_eq!(galilean(&fl, &[fl.zero(), fl.zero()], &pt).unwrap(), pt);
        assert!(galilean(&fl, &[fl.zero()], &pt).is_err());
    }

    #[test]
    fn galilean_preserves_paraboloid_and_inverts() {
        for p in [3, 7] {
            let par = Paraboloid::new(f(p), 3).unwrap();
            let fl = par.field();
            for delta in par.base_space().vectors() {
                let minus = neg_vector(fl, &delta);
                let mut hit = vec![false; par.len()];
                for pt in par.points() {
                    let img = galilean(fl, &delta, pt).unwrap();
                    assert!(on_paraboloid(fl, &img.coords()));
                    hit[par.base_space().index_of(img.base())] = true;
                    assert_eq!(&galilean(fl, &minus, &img).unwrap(), pt);
                }
                assert!(hit.into_iter().all(|h| h), "g_delta is onto");
            }
        }
    }

    #[test]
    fn subset_masks_roundtrip() {
        let par = Paraboloid::new(f(3), 4).unwrap();
        let s = Subset::from_indices(&par, [0, 5, 26, 5]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.mask_hex(), "0x4000021");
        assert_eq!(Subset::from_mask_hex(&par, &s.mask_hex()).unwrap(), s);
        assert_eq!(par.empty_subset().mask_hex(), "0x0");
        assert!(Subset::from_mask_hex(&par, "0x8000000").is_err());
        assert!(Subset::from_indices(&par, [27]).is_err());
        let bits = Subset::from_bits(&par, 0b101).unwrap();
        assert_eq!(bits.members(), &[0, 2]);
        assert_eq!(bits.cmp_mask(&s), Ordering::Less);
    }

    #[test]
    fn locate_and_sums() {
        let par = Paraboloid::new(f(5), 3).unwrap();
        let fl = par.field();
        for i in 0..par.len() {
            assert_eq!(par.locate(par.space_index(i)), Some(i));
            for j in (0..par.len()).step_by(7) {
                let direct = add_vectors(fl, &par.point(i).coords(), &par.point(j).coords());
                assert_eq!(par.sum_index(i, j), par.space().index_of(&direct));
            }
        }
    }

    #[test]
    fn line_examples() {
        let fl = f(3);
        let l = line_of(&fl, [fl.one(), fl.zero()]).unwrap();
        let pts = l.points(&fl);
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|x| x[0] == fl.one()));
        let l2 = line_of(&fl, [fl.from_int(2), fl.zero()]).unwrap();
        assert_ne!(pts, l2.points(&fl));
        assert!(l2.points(&fl).iter().all(|x| x[0] == fl.from_int(2)));
        assert_eq!(line_of(&fl, [fl.zero(), fl.zero()]), Err(Error::ZeroLine));
        for y in plane_points(&fl).into_iter().skip(1) {
            assert!(line_of(&fl, y).unwrap().contains(&fl, y));
        }
    }

    #[test]
    fn all_lines_are_distinct_and_cover() {
        let fl = f(5);
        let lines = all_lines(&fl);
        assert_eq!(lines.len(), 30);
        let sets: std::collections::HashSet<Vec<PlanePoint>> = lines.iter().map(|l| l.points(&fl)).collect();
        assert_eq!(sets.len(), 30);
        assert!(sets.iter().all(|s| s.len() == 5));
    }

    #[test]
    fn lines_distinct_small_fields() {
        for p in [3, 7, 11] {
            let r = lines_distinct_check(&f(p));
            assert_eq!(r.verdict, Verdict::Pass, "p={p}");
            assert_eq!(r.checked, (p * p - 1) as u64);
        }
        let r = lines_distinct_check(&f(5));
        assert_eq!(r.verdict, Verdict::ReportOnly);
        let w = r.witness.expect("collision in F_5");
        let parse = |s: &str| {
            let v: Vec<i64> = s.split(',').map(|x| x.parse().unwrap()).collect();
            let fl = f(5);
            [fl.from_int(v[0]), fl.from_int(v[1])]
        };
        let (y, yp) = (parse(&w.encodings["y"]), parse(&w.encodings["y_prime"]));
        assert_ne!(y, yp);
        assert!(lines_coincide(&f(5), y, yp).unwrap());
        let fl = f(5);
        let diff = sub_vectors(&fl, &y, &yp);
        assert!(fl.dot(&diff, &diff).is_zero(), "y - y' is isotropic");
    }

    #[test]
    fn incidence_examples() {
        let fl = f(3);
        let full = IncidenceInstance::new(plane_points(&fl), all_lines(&fl));
        let inc = count_incidences(&fl, &full);
        assert_eq!(inc.count, 36);
        assert!((inc.bound - (9.0 * 12f64.sqrt() + 12.0)).abs() < 1e-12);
        assert!((inc.bound - 43.18).abs() < 0.01);
        assert!(inc.holds);

        let empty = IncidenceInstance::new(vec![], all_lines(&fl));
        let inc = count_incidences(&fl, &empty);
        assert_eq!(inc.count, 0);
        assert!(inc.holds);

        let x = [fl.one(), fl.one()];
        let one = IncidenceInstance::new(vec![x], vec![line_of(&fl, x).unwrap()]);
        let inc = count_incidences(&fl, &one);
        assert_eq!(inc.count, 1);
        assert!(inc.bound >= 2.0);
        assert!(inc.holds);
    }

    #[test]
    fn lemma1_random_f5() {
        let r = lemma1_check(&f(5), 200, 3);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.checked, 201);
        assert!(r.worst_ratio <= 1.0);
    }

    #[test]
    fn minus_d_exclusion() {
        for p in [3, 7, 11] {
            let par = Paraboloid::new(f(p), 3).unwrap();
            assert_eq!(minus_d_check(&par).verdict, Verdict::Pass);
        }
        let r = minus_d_check(&Paraboloid::new(f(5), 3).unwrap());
        assert_eq!(r.verdict, Verdict::ReportOnly);
        assert!(r.witness.is_some());
        // In F^4 an isotropic base vector always exists.
        let r = minus_d_check(&Paraboloid::new(f(3), 4).unwrap());
        assert_eq!(r.verdict, Verdict::ReportOnly);
        assert!(r.witness.is_some());
    }

    #[test]
    fn claim_identity_f3() {
        let par = Paraboloid::new(f(3), 3).unwrap();
        let report = claim_check(&par, 5, 11).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let full = par.full();
        for b in 0..par.len() {
            let (l, r) = claim_counts(&par, &full, &full, b).unwrap();
            assert_eq!(l, r);
            // a - d + b in P for all a, d in P: count = sum over (a, d).
            assert!(l <= (par.len() * par.len()) as u64);
        }
    }
}
