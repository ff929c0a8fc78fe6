//! Exact additive-energy counts, the quadruple form, `M(a)`, the
//! delta-function expansion and the set-energy lemmas.
//!
//! Integer counts are accumulated over the canonical index of `x` in `F^n`;
//! floating point appears only where the object is a genuine character sum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::fourier::{ExtensionOperator, SpaceFunction, SurfaceFunction};
use crate::geometry::{Paraboloid, Subset};
use crate::report::{LemmaReport, Witness};
use crate::sampling;

/// Relative tolerance shared by every float-vs-exact comparison here.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

fn relative_error(value: f64, reference: f64) -> f64 {
    let diff = (value - reference).abs();
    if reference == 0.0 {
        diff
    } else {
        diff / reference.abs()
    }
}

/// `Lambda(A, B)`, together with the sizes of its operands.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyCount {
    pub value: u64,
    pub a_len: usize,
    pub b_len: usize,
}

impl EnergyCount {
    /// `min(|A|^2 |B|, |A| |B|^2)`.
    pub fn trivial_bound(&self) -> u64 {
        let (a, b) = (self.a_len as u64, self.b_len as u64);
        (a * a * b).min(a * b * b)
    }
}

/// `r(x) = #{(a, b) in A x B : a + b = x}` for every `x` in `F^n`.
pub fn representation_counts(par: &Paraboloid, a: &Subset, b: &Subset) -> Result<Vec<u32>> {
    par.check(a)?;
    par.check(b)?;
    let mut r = vec![0u32; par.space().size()];
    for &i in a.members() {
        for &j in b.members() {
            r[par.sum_index(i as usize, j as usize)] += 1;
        }
    }
    Ok(r)
}

/// `Lambda(A, B) = sum_x r(x)^2`.
pub fn additive_energy(par: &Paraboloid, a: &Subset, b: &Subset) -> Result<EnergyCount> {
    let value = if a.is_empty() || b.is_empty() {
        par.check(a)?;
        par.check(b)?;
        0
    } else {
        representation_counts(par, a, b)?.iter().map(|&c| (c as u64) * (c as u64)).sum()
    };
    Ok(EnergyCount { value, a_len: a.len(), b_len: b.len() })
}

/// `Lambda(A, B)` by the four nested loops over `(a, b, c, d)`, comparing
/// coordinates of `a + b` and `c + d` directly.
pub fn additive_energy_brute_force(par: &Paraboloid, a: &Subset, b: &Subset) -> Result<u64> {
    par.check(a)?;
    par.check(b)?;
    let f = par.field();
    let coords = |s: &Subset| -> Vec<Vec<FieldElement>> {
        s.members().iter().map(|&i| par.point(i as usize).coords()).collect()
    };
    let (ac, bc) = (coords(a), coords(b));
    let mut count = 0u64;
    for x in &ac {
        for y in &bc {
            for z in &ac {
                for w in &bc {
                    let equal = (0..par.dim()).all(|k| f.add(x[k], y[k]) == f.add(z[k], w[k]));
                    count += equal as u64;
                }
            }
        }
    }
    Ok(count)
}

/// `sum_x |sum_{a + b = x} f(a) f(b)|^2`, the quadruple sum
/// `sum_{a+b=c+d} f(a) f(b) conj(f(c)) conj(f(d))` over `P`.
pub fn quadruple_form(par: &Paraboloid, f: &SurfaceFunction) -> Result<f64> {
    if f.len() != par.len() {
        return Err(Error::DimensionMismatch { expected: par.len(), got: f.len() });
    }
    let v = f.values();
    let mut acc = vec![Complex64::new(0.0, 0.0); par.space().size()];
    for (i, &fi) in v.iter().enumerate() {
        if fi == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &fj) in v.iter().enumerate() {
            acc[par.sum_index(i, j)] += fi * fj;
        }
    }
    Ok(acc.iter().map(|c| c.norm_sqr()).sum())
}

/// `sum_x |g(x) h(x)|^2` for two functions on `F^n`.
pub fn product_l2_squared(g: &SpaceFunction, h: &SpaceFunction) -> f64 {
    g.values().iter().zip(h.values()).map(|(x, y)| (x * y).norm_sqr()).sum()
}

/// Both evaluations of `||(chi_A dsigma)^v (chi_B dsigma)^v||_2^2`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearL2 {
    pub energy: EnergyCount,
    /// `q^n / |P|^4 * Lambda(A, B)`.
    pub exact: f64,
    /// Direct summation over `x in F^n`.
    pub direct: f64,
}

impl BilinearL2 {
    pub fn relative_error(&self) -> f64 {
        relative_error(self.direct, self.exact)
    }
}

pub fn bilinear_scale(par: &Paraboloid) -> f64 {
    par.space().size() as f64 / (par.len() as f64).powi(4)
}

pub fn bilinear_l2_parts(par: &Paraboloid, ext: &ExtensionOperator, a: &Subset, b: &Subset) -> Result<BilinearL2> {
    let energy = additive_energy(par, a, b)?;
    let direct = product_l2_squared(&ext.apply_subset(a)?, &ext.apply_subset(b)?);
    Ok(BilinearL2 { energy, exact: bilinear_scale(par) * energy.value as f64, direct })
}

/// `||(chi_A dsigma)^v (chi_B dsigma)^v||_2^2` via the exact count, after
/// confirming the direct float sum agrees to `1e-9` relative.
pub fn bilinear_l2(par: &Paraboloid, a: &Subset, b: &Subset) -> Result<f64> {
    let ext = ExtensionOperator::new(par)?;
    bilinear_l2_with(par, &ext, a, b)
}

pub fn bilinear_l2_with(par: &Paraboloid, ext: &ExtensionOperator, a: &Subset, b: &Subset) -> Result<f64> {
    let parts = bilinear_l2_parts(par, ext, a, b)?;
    let err = parts.relative_error();
    if err > RELATIVE_TOLERANCE {
        return Err(Error::Consistency(format!(
            "bilinear norm: direct {} vs exact {} (relative error {err:e})",
            parts.direct, parts.exact
        )));
    }
    Ok(parts.exact)
}

/// The bilinear identity over `trials` seeded pairs.
pub fn bilinear_identity_check(par: &Paraboloid, trials: u64, seed: u64) -> Result<LemmaReport> {
    let ext = ExtensionOperator::new(par)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng(seed, t);
            let a = sampling::random_subset(par, &mut rng);
            let b = sampling::random_subset(par, &mut rng);
            let parts = bilinear_l2_parts(par, &ext, &a, &b)?;
            Ok((a, b, parts))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport::new("bilinear-identity");
    report.instances.push(format!("F_{}, n={}: {trials} random (A, B)", par.field().order(), par.dim()));
    for (t, (a, b, parts)) in results.into_iter().enumerate() {
        let err = parts.relative_error();
        report.observe(err, err <= RELATIVE_TOLERANCE, || {
            let mut w = Witness::new("bilinear-identity", par.field(), Some(par.dim()), Some(seed));
            w.put("A", a.mask_hex());
            w.put("B", b.mask_hex());
            w.put("trial", t.to_string());
            w.detail = format!("direct={} exact={}", parts.direct, parts.exact);
            w
        });
    }
    report.finish(true);
    Ok(report)
}

/// Every subset of `P` with at most `max_size` members, by size and then in
/// lexicographic order of members.
pub fn subsets_up_to(par: &Paraboloid, max_size: usize) -> Vec<Subset> {
    fn rec(par: &Paraboloid, start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Subset>) {
        if left == 0 {
            out.push(Subset::from_indices(par, cur.iter().copied()).expect("in range"));
            return;
        }
        for i in start..par.len() {
            cur.push(i);
            rec(par, i + 1, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 0..=max_size.min(par.len()) {
        rec(par, 0, k, &mut Vec::new(), &mut out);
    }
    out
}

fn energy_oracle_observe(
    report: &mut LemmaReport,
    par: &Paraboloid,
    seed: Option<u64>,
    pairs: Vec<(&Subset, &Subset, u64, u64)>,
) {
    for (a, b, fast, slow) in pairs {
        report.observe(fast.abs_diff(slow) as f64, fast == slow, || {
            let mut w = Witness::new("energy-oracle", par.field(), Some(par.dim()), seed);
            w.put("A", a.mask_hex());
            w.put("B", b.mask_hex());
            w.detail = format!("r2={fast} brute={slow}");
            w
        });
    }
}

fn energy_pair(par: &Paraboloid, a: &Subset, b: &Subset) -> Result<(u64, u64)> {
    Ok((additive_energy(par, a, b)?.value, additive_energy_brute_force(par, a, b)?))
}

/// The r^2 formula against the four-loop oracle on every pair of subsets of
/// size at most `max_size`.
pub fn energy_oracle_exhaustive(par: &Paraboloid, max_size: usize, pair_cap: u64) -> Result<LemmaReport> {
    let subsets = subsets_up_to(par, max_size);
    let pairs = (subsets.len() as u128).pow(2);
    if pairs > pair_cap as u128 {
        return Err(Error::BudgetTooSmall { required: pairs, budget: pair_cap });
    }
    let values = subsets
        .par_iter()
        .map(|a| subsets.iter().map(|b| energy_pair(par, a, b)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport::new("energy-oracle");
    report.instances.push(format!("F_{}, n={}: all pairs with |A|, |B| <= {max_size}", par.field().order(), par.dim()));
    let flat = subsets
        .iter()
        .zip(&values)
        .flat_map(|(a, row)| subsets.iter().zip(row).map(move |(b, &(x, y))| (a, b, x, y)))
        .collect();
    energy_oracle_observe(&mut report, par, None, flat);
    report.metric("pairs", pairs as f64);
    report.finish(true);
    Ok(report)
}

/// The r^2 formula against the four-loop oracle on seeded pairs with sizes
/// drawn uniformly from `0..=max_size`.
pub fn energy_oracle_random(par: &Paraboloid, max_size: usize, trials: u64, seed: u64) -> Result<LemmaReport> {
    use rand::Rng;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng(seed, t);
            let ka = rng.gen_range(0..=max_size);
            let kb = rng.gen_range(0..=max_size);
            let a = sampling::random_subset_of_size(par, &mut rng, ka);
            let b = sampling::random_subset_of_size(par, &mut rng, kb);
            let (x, y) = energy_pair(par, &a, &b)?;
            Ok((a, b, x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport::new("energy-oracle");
    report.instances.push(format!(
        "F_{}, n={}: {trials} random pairs with |A|, |B| <= {max_size}",
        par.field().order(),
        par.dim()
    ));
    energy_oracle_observe(&mut report, par, Some(seed), results.iter().map(|(a, b, x, y)| (a, b, *x, *y)).collect());
    report.metric("pairs", trials as f64);
    report.finish(true);
    Ok(report)
}

/// `2 min(|A|^(1/2) |B|^2 + |A| |B|, |A| |B|^(3/2) + |B|^2)`, the bound on
/// `Lambda(A, B)` after the common factor `q^3 / |P|^4`.
pub fn lemma2_count_bound(a_len: usize, b_len: usize) -> f64 {
    let (a, b) = (a_len as f64, b_len as f64);
    2.0 * (a.sqrt() * b * b + a * b).min(a * b * b.sqrt() + b * b)
}

/// The bound on `||(chi_A dsigma)^v (chi_B dsigma)^v||_2^2`.
pub fn lemma2_bound(par: &Paraboloid, a_len: usize, b_len: usize) -> f64 {
    bilinear_scale(par) * lemma2_count_bound(a_len, b_len)
}

pub fn lemma2_applies(field: &FieldSpec, n: usize) -> bool {
    n == 3 && !field.minus_one_is_square()
}

fn lemma2_precondition(par: &Paraboloid) -> Result<()> {
    if par.dim() != 3 {
        return Err(Error::Precondition(format!("the bilinear energy bound needs n = 3, got n = {}", par.dim())));
    }
    if par.field().minus_one_is_square() {
        return Err(Error::Precondition(format!("-1 is a square in F_{}", par.field().order())));
    }
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Instance {
    pub parts: BilinearL2,
    pub bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

fn lemma2_from_parts(par: &Paraboloid, parts: BilinearL2) -> Lemma2Instance {
    let bound = lemma2_bound(par, parts.energy.a_len, parts.energy.b_len);
    let ratio = if bound > 0.0 { parts.exact / bound } else { 0.0 };
    let holds = parts.exact <= bound * (1.0 + RELATIVE_TOLERANCE) && parts.relative_error() <= RELATIVE_TOLERANCE;
    Lemma2Instance { parts, bound, ratio, holds }
}

pub fn lemma2_instance(par: &Paraboloid, ext: &ExtensionOperator, a: &Subset, b: &Subset) -> Result<Lemma2Instance> {
    lemma2_precondition(par)?;
    Ok(lemma2_from_parts(par, bilinear_l2_parts(par, ext, a, b)?))
}

fn lemma2_observe(
    report: &mut LemmaReport,
    par: &Paraboloid,
    seed: Option<u64>,
    a: &Subset,
    b: &Subset,
    inst: &Lemma2Instance,
) {
    report.observe(inst.ratio, inst.holds, || {
        let mut w = Witness::new("lemma2", par.field(), Some(par.dim()), seed);
        w.put("A", a.mask_hex());
        w.put("B", b.mask_hex());
        w.detail = format!(
            "energy={} exact={} direct={} bound={}",
            inst.parts.energy.value, inst.parts.exact, inst.parts.direct, inst.bound
        );
        w
    });
}

/// Every pair of subsets of `P`; needs `|P| <= 16`.
pub fn lemma2_exhaustive(par: &Paraboloid) -> Result<LemmaReport> {
    lemma2_precondition(par)?;
    if par.len() > 16 {
        return Err(Error::BudgetTooSmall { required: 1u128 << (2 * par.len()), budget: 1 << 32 });
    }
    let ext = ExtensionOperator::new(par)?;
    let total = 1u64 << par.len();
    let subsets: Vec<Subset> = (0..total).map(|m| Subset::from_bits(par, m)).collect::<Result<_>>()?;
    let tables: Vec<SpaceFunction> = subsets.iter().map(|s| ext.apply_subset(s)).collect::<Result<_>>()?;
    let scale = bilinear_scale(par);
    let rows = (0..subsets.len())
        .into_par_iter()
        .map(|i| {
            (0..subsets.len())
                .map(|j| {
                    let energy = additive_energy(par, &subsets[i], &subsets[j])?;
                    let direct = product_l2_squared(&tables[i], &tables[j]);
                    Ok(lemma2_from_parts(par, BilinearL2 { energy, exact: scale * energy.value as f64, direct }))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport::new("lemma2");
    report.instances.push(format!("F_{}, n=3: all {} subset pairs", par.field().order(), total * total));
    let mut max_error = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        for (j, inst) in row.iter().enumerate() {
            max_error = max_error.max(inst.parts.relative_error());
            lemma2_observe(&mut report, par, None, &subsets[i], &subsets[j], inst);
        }
    }
    report.metric("max_identity_error", max_error);
    report.finish(true);
    Ok(report)
}

pub fn lemma2_random(par: &Paraboloid, trials: u64, seed: u64) -> Result<LemmaReport> {
    lemma2_precondition(par)?;
    let ext = ExtensionOperator::new(par)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng(seed, t);
            let a = sampling::random_subset(par, &mut rng);
            let b = sampling::random_subset(par, &mut rng);
            let inst = lemma2_instance(par, &ext, &a, &b)?;
            Ok((a, b, inst))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport::new("lemma2");
    report.instances.push(format!("F_{}, n=3: {trials} random subset pairs", par.field().order()));
    let mut max_error = 0.0f64;
    for (a, b, inst) in &results {
        max_error = max_error.max(inst.parts.relative_error());
        lemma2_observe(&mut report, par, Some(seed), a, b, inst);
    }
    report.metric("max_identity_error", max_error);
    report.finish(true);
    Ok(report)
}

/// `|F|^-1 sum_s e(s t)`, real part.
pub fn delta_via_characters(field: &FieldSpec, t: FieldElement) -> f64 {
    let s: Complex64 = field.elements().map(|s| field.character(field.mul(s, t))).sum();
    s.re / field.order() as f64
}

/// `a.b - a.d - b.d + d.d` on base vectors.
pub fn energy_phase(field: &FieldSpec, a: &[FieldElement], b: &[FieldElement], d: &[FieldElement]) -> FieldElement {
    let ab = field.dot(a, b);
    let ad = field.dot(a, d);
    let bd = field.dot(b, d);
    let dd = field.dot(d, d);
    field.add(field.sub(field.sub(ab, ad), bd), dd)
}

/// Both sides of the delta expansion: the exact count
/// `#{(a, b, d) in A x B x B : a + b - d in P}` and
/// `sum delta(a.b - a.d - b.d + d.d)` with `delta` expanded in characters.
pub fn delta_expansion(par: &Paraboloid, a: &Subset, b: &Subset) -> Result<(u64, f64)> {
    par.check(a)?;
    par.check(b)?;
    let space = par.space();
    let mut exact = 0u64;
    for &ai in a.members() {
        for &bi in b.members() {
            let s = par.sum_index(ai as usize, bi as usize);
            for &di in b.members() {
                exact += par.locate(space.sub_indices(s, par.space_index(di as usize))).is_some() as u64;
            }
        }
    }
    let f = par.field();
    let mut via = 0.0;
    for &ai in a.members() {
        let av = par.point(ai as usize).base();
        for &bi in b.members() {
            let bv = par.point(bi as usize).base();
            for &di in b.members() {
                via += delta_via_characters(f, energy_phase(f, av, bv, par.point(di as usize).base()));
            }
        }
    }
    Ok((exact, via))
}

pub fn delta_expansion_check(par: &Paraboloid, trials: u64, seed: u64) -> Result<LemmaReport> {
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng(seed, t);
            let a = sampling::random_subset(par, &mut rng);
            let b = sampling::random_subset(par, &mut rng);
            let (exact, via) = delta_expansion(par, &a, &b)?;
            Ok((a, b, exact, via))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport::new("delta-expansion");
    report.instances.push(format!("F_{}, n={}: {trials} random (A, B)", par.field().order(), par.dim()));
    for (a, b, exact, via) in results {
        let err = relative_error(via, exact as f64);
        report.observe(err, err <= RELATIVE_TOLERANCE, || {
            let mut w = Witness::new("delta-expansion", par.field(), Some(par.dim()), Some(seed));
            w.put("A", a.mask_hex());
            w.put("B", b.mask_hex());
            w.detail = format!("exact={exact} characters={via}");
            w
        });
    }
    report.finish(true);
    Ok(report)
}

/// `M(a)` with respect to `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MValue {
    pub value: f64,
    pub base_point: Vec<u32>,
    pub operand_len: usize,
}

fn m_precondition(par: &Paraboloid, base: &[FieldElement], b: &Subset) -> Result<()> {
    par.check(b)?;
    if par.dim() < 4 {
        return Err(Error::Precondition(format!("M(a) is defined for n >= 4, got n = {}", par.dim())));
    }
    if base.len() != par.dim() - 1 {
        return Err(Error::DimensionMismatch { expected: par.dim() - 1, got: base.len() });
    }
    if !base.iter().all(|&x| par.field().contains(x)) {
        return Err(Error::FieldMismatch { left: par.field().order(), right: base[0].order() });
    }
    Ok(())
}

/// `M(a) = sum_d |sum_{b in B, s != 0} e(s (a.b - a.d - b.d + d.d))|^2` by
/// direct evaluation of every character.
pub fn m_quantity(par: &Paraboloid, base: &[FieldElement], b: &Subset) -> Result<MValue> {
    m_precondition(par, base, b)?;
    let f = par.field();
    let nonzero: Vec<FieldElement> = f.elements().skip(1).collect();
    let mut value = 0.0;
    for d in par.base_space().vectors() {
        let mut inner = Complex64::new(0.0, 0.0);
        for &bi in b.members() {
            let t = energy_phase(f, base, par.point(bi as usize).base(), &d);
            for &s in &nonzero {
                inner += f.character(f.mul(s, t));
            }
        }
        value += inner.norm_sqr();
    }
    Ok(MValue { value, base_point: base.iter().map(|x| x.index()).collect(), operand_len: b.len() })
}

/// `M(a)` as the integer `sum_d (q N(d) - |B|)^2`, where
/// `N(d) = #{b in B : a + b - d in P}` with `a`, `d` lifted to `P`.
pub fn m_quantity_exact(par: &Paraboloid, base: &[FieldElement], b: &Subset) -> Result<u64> {
    m_precondition(par, base, b)?;
    let q = par.field().order() as i64;
    let space = par.space();
    let ai = par.base_space().index_of(base);
    let partial: Vec<usize> = b.members().iter().map(|&bi| par.sum_index(ai, bi as usize)).collect();
    let mut total = 0u64;
    for d in 0..par.len() {
        let dx = par.space_index(d);
        let n = partial.iter().filter(|&&s| par.locate(space.sub_indices(s, dx)).is_some()).count() as i64;
        let v = q * n - b.len() as i64;
        total += (v * v) as u64;
    }
    Ok(total)
}

/// `q^((n+2)/2) |B|^2 + q^n |B|`.
pub fn m_even_bound(q: u32, n: usize, b_len: usize) -> f64 {
    let (q, b) = (q as f64, b_len as f64);
    q.powf((n as f64 + 2.0) / 2.0) * b * b + q.powi(n as i32) * b
}

/// `q^n |B| + q^((n+1)/2) |B|^2`.
pub fn m_odd_bound(q: u32, n: usize, b_len: usize) -> f64 {
    let (q, b) = (q as f64, b_len as f64);
    q.powi(n as i32) * b + q.powf((n as f64 + 1.0) / 2.0) * b * b
}

/// `M(a)` for every `a in F^(n-1)` by both routes. Agreement to `1e-9` is
/// asserted; the sup ratios against the two bound forms are report-only.
pub fn m_quantity_report(par: &Paraboloid, b: &Subset, label: &str) -> Result<LemmaReport> {
    let bases: Vec<Vec<FieldElement>> = par.base_space().vectors().collect();
    let values = bases
        .par_iter()
        .map(|a| Ok((m_quantity(par, a, b)?.value, m_quantity_exact(par, a, b)?)))
        .collect::<Result<Vec<_>>>()?;
    let q = par.field().order();
    let (even, odd) = (m_even_bound(q, par.dim(), b.len()), m_odd_bound(q, par.dim(), b.len()));
    let mut report = LemmaReport::new("m-quantity");
    report.instances.push(format!("F_{}, n={}: every base point, B = {label} (|B| = {})", q, par.dim(), b.len()));
    let mut max_m = 0u64;
    for (a, &(direct, exact)) in bases.iter().zip(&values) {
        max_m = max_m.max(exact);
        let err = relative_error(direct, exact as f64);
        report.observe(err, err <= RELATIVE_TOLERANCE, || {
            let mut w = Witness::new("m-quantity", par.field(), Some(par.dim()), None);
            w.put("B", b.mask_hex());
            w.put("a", par.base_space().index_of(a).to_string());
            w.detail = format!("direct={direct} exact={exact}");
            w
        });
    }
    let ratio = |bound: f64| if bound > 0.0 { max_m as f64 / bound } else { 0.0 };
    report.metric("max_m", max_m as f64);
    report.metric("sup_ratio_even_bound", ratio(even));
    report.metric("sup_ratio_odd_bound", ratio(odd));
    report.metric("condition", lemma3_condition(par.field(), par.dim()) as u8 as f64);
    report.finish(true);
    Ok(report)
}

/// `n >= 4` even, or `n` odd with `p = 3 mod 4` and `m (n - 1)` not a
/// multiple of 4.
pub fn lemma3_condition(field: &FieldSpec, n: usize) -> bool {
    if n < 4 {
        return false;
    }
    if n % 2 == 0 {
        return true;
    }
    field.characteristic() % 4 == 3 && (field.degree() as usize * (n - 1)) % 4 != 0
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Ratio {
    pub energy: EnergyCount,
    pub bound_value: f64,
    pub ratio: f64,
}

/// `q^e |A| |B|^(3/2) + q^((n-2)/2) |A| |B| + q^-1 |A| |B|^2` with
/// `e = (n-2)/4`, or `(n-3)/4` when `sharper_odd` is set.
pub fn lemma3_bound(q: u32, n: usize, a_len: usize, b_len: usize, sharper_odd: bool) -> f64 {
    let (q, a, b, n) = (q as f64, a_len as f64, b_len as f64, n as f64);
    let e = if sharper_odd { (n - 3.0) / 4.0 } else { (n - 2.0) / 4.0 };
    q.powf(e) * a * b * b.sqrt() + q.powf((n - 2.0) / 2.0) * a * b + a * b * b / q
}

pub fn lemma3_ratio(par: &Paraboloid, a: &Subset, b: &Subset) -> Result<Lemma3Ratio> {
    lemma3_ratio_with(par, a, b, false)
}

pub fn lemma3_ratio_with(par: &Paraboloid, a: &Subset, b: &Subset, sharper_odd: bool) -> Result<Lemma3Ratio> {
    let energy = additive_energy(par, a, b)?;
    let bound_value = lemma3_bound(par.field().order(), par.dim(), a.len(), b.len(), sharper_odd);
    let ratio = if bound_value > 0.0 { energy.value as f64 / bound_value } else { 0.0 };
    Ok(Lemma3Ratio { energy, bound_value, ratio })
}

/// Sup of `lemma3_ratio` over `trials` seeded pairs; never asserted.
pub fn lemma3_check(par: &Paraboloid, trials: u64, seed: u64, sharper_odd: bool) -> Result<LemmaReport> {
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = sampling::rng(seed, t);
            let a = sampling::random_subset(par, &mut rng);
            let b = sampling::random_subset(par, &mut rng);
            let r = lemma3_ratio_with(par, &a, &b, sharper_odd)?;
            Ok((a, b, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = LemmaReport::new("lemma3");
    report.instances.push(format!(
        "F_{}, n={}: {trials} random (A, B){}",
        par.field().order(),
        par.dim(),
        if sharper_odd { ", exponent (n-3)/4" } else { "" }
    ));
    for (a, b, r) in &results {
        report.observe(r.ratio, r.ratio.is_finite(), || {
            let mut w = Witness::new("lemma3", par.field(), Some(par.dim()), Some(seed));
            w.put("A", a.mask_hex());
            w.put("B", b.mask_hex());
            w.detail = format!("energy={} bound={}", r.energy.value, r.bound_value);
            w
        });
    }
    report.metric("condition", lemma3_condition(par.field(), par.dim()) as u8 as f64);
    report.finish(false);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::fourier::{Exponent, LqNorm};
    use crate::report::Verdict;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, prop_oneof, proptest, Just, ProptestConfig, Strategy};
    use std::sync::Arc;

    fn par(p: u64, m: u32, n: usize) -> Paraboloid {
        Paraboloid::new(Arc::new(make_field(p, m).unwrap()), n).unwrap()
    }

    #[test]
    fn energy_trivial_examples() {
        let pr = par(3, 1, 3);
        let e = pr.empty_subset();
        let full = pr.full();
        assert_eq!(additive_energy(&pr, &e, &full).unwrap().value, 0);
        let a = Subset::from_indices(&pr, [4]).unwrap();
        let b = Subset::from_indices(&pr, [7]).unwrap();
        assert_eq!(additive_energy(&pr, &a, &b).unwrap().value, 1);
        let fast = additive_energy(&pr, &full, &full).unwrap().value;
        assert_eq!(fast, additive_energy_brute_force(&pr, &full, &full).unwrap());
        let other = par(5, 1, 3);
        assert!(additive_energy(&pr, &other.full(), &full).is_err());
    }

    #[test]
    fn quadruple_form_reductions() {
        let pr = par(3, 1, 3);
        let a = Subset::from_indices(&pr, [0, 2, 5, 6]).unwrap();
        let q = quadruple_form(&pr, &SurfaceFunction::indicator(&a)).unwrap();
        assert_eq!(q, additive_energy(&pr, &a, &a).unwrap().value as f64);
        assert_eq!(quadruple_form(&pr, &SurfaceFunction::zeros(9)).unwrap(), 0.0);
    }

    #[test]
    fn quadruple_form_matches_l4_norm() {
        for p in [3, 7] {
            let pr = par(p, 1, 3);
            let ext = ExtensionOperator::new(&pr).unwrap();
            let mut rng = sampling::rng(11, p);
            let f = SurfaceFunction::new(sampling::random_complex_vec(&mut rng, pr.len())).unwrap();
            let l4 = ext.apply(&f).unwrap().lq_norm(Exponent::integer(4).unwrap()).powi(4);
            let via = bilinear_scale(&pr) * quadruple_form(&pr, &f).unwrap();
            assert!(relative_error(via, l4) < 1e-9);
        }
    }

    #[test]
    fn bilinear_examples() {
        let pr = par(3, 1, 3);
        let e = pr.empty_subset();
        assert_eq!(bilinear_l2(&pr, &e, &e).unwrap(), 0.0);
        let a = Subset::from_indices(&pr, [3]).unwrap();
        let b = Subset::from_indices(&pr, [5]).unwrap();
        let v = bilinear_l2(&pr, &a, &b).unwrap();
        assert!((v - 27.0 / 9f64.powi(4)).abs() < 1e-15);
        let full = pr.full();
        let expect = 27.0 / 9f64.powi(4) * additive_energy_brute_force(&pr, &full, &full).unwrap() as f64;
        assert!(relative_error(bilinear_l2(&pr, &full, &full).unwrap(), expect) < 1e-12);
    }

    #[test]
    fn lemma2_preconditions_and_small_runs() {
        assert!(matches!(lemma2_random(&par(5, 1, 3), 3, 0), Err(Error::Precondition(_))));
        assert!(matches!(lemma2_random(&par(3, 1, 4), 3, 0), Err(Error::Precondition(_))));
        let pr = par(7, 1, 3);
        let r = lemma2_random(&pr, 40, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let ext = ExtensionOperator::new(&pr).unwrap();
        let inst = lemma2_instance(&pr, &ext, &pr.empty_subset(), &pr.full()).unwrap();
        assert!(inst.holds);
        assert_eq!(inst.ratio, 0.0);
    }

    #[test]
    fn delta_examples() {
        let f7 = make_field(7, 1).unwrap();
        assert!((delta_via_characters(&f7, f7.zero()) - 1.0).abs() < 1e-12);
        assert!(delta_via_characters(&f7, f7.from_int(3)).abs() < 1e-12);
        let f9 = make_field(3, 2).unwrap();
        for t in f9.elements().skip(1) {
            assert!(delta_via_characters(&f9, t).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_expansion_matches_counts() {
        let pr = par(3, 1, 4);
        let r = delta_expansion_check(&pr, 10, 4).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let (exact, via) = delta_expansion(&pr, &pr.full(), &pr.full()).unwrap();
        assert!((via - exact as f64).abs() < 1e-9 * exact as f64);
    }

    #[test]
    fn m_quantity_routes_agree() {
        let pr = par(3, 1, 4);
        let f = pr.field();
        let e = pr.empty_subset();
        let a0 = vec![f.zero(); 3];
        assert_eq!(m_quantity(&pr, &a0, &e).unwrap().value, 0.0);
        assert_eq!(m_quantity_exact(&pr, &a0, &e).unwrap(), 0);
        let mut rng = sampling::rng(0, 0);
        let single = sampling::random_subset_of_size(&pr, &mut rng, 1);
        for a in pr.base_space().vectors() {
            let d = m_quantity(&pr, &a, &single).unwrap().value;
            let x = m_quantity_exact(&pr, &a, &single).unwrap();
            assert!(relative_error(d, x as f64) < 1e-9);
        }
        let p3 = par(3, 1, 3);
        assert!(matches!(m_quantity(&p3, &[f.zero(); 2], &p3.empty_subset()), Err(Error::Precondition(_))));
        let r = m_quantity_report(&pr, &pr.full(), "P").unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.metric_value("sup_ratio_even_bound").unwrap().is_finite());
    }

    #[test]
    fn lemma3_conditions() {
        let f3 = make_field(3, 1).unwrap();
        let f5 = make_field(5, 1).unwrap();
        let f9 = make_field(3, 2).unwrap();
        assert!(lemma3_condition(&f3, 4));
        assert!(lemma3_condition(&f5, 6));
        assert!(!lemma3_condition(&f3, 3));
        assert!(!lemma3_condition(&f3, 5));
        assert!(!lemma3_condition(&f5, 7));
        assert!(lemma3_condition(&f3, 7));
        assert!(!lemma3_condition(&f9, 7));
        let pr = par(3, 1, 4);
        let r = lemma3_ratio(&pr, &pr.full(), &pr.empty_subset()).unwrap();
        assert_eq!(r.ratio, 0.0);
        let rep = lemma3_check(&pr, 20, 1, false).unwrap();
        assert_eq!(rep.verdict, Verdict::ReportOnly);
        assert!(rep.worst_ratio.is_finite());
    }

    #[test]
    fn subset_enumeration_counts() {
        let pr = par(3, 1, 3);
        assert_eq!(subsets_up_to(&pr, 5).len(), 382);
        assert_eq!(subsets_up_to(&pr, 9).len(), 512);
    }

    fn arb_pair() -> impl Strategy<Value = (u64, u64, u64)> {
        (prop_oneof![Just(3u64), Just(7u64)], any::<u64>(), any::<u64>())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn energy_respects_trivial_bounds_and_symmetry((p, s, t) in arb_pair()) {
            let pr = par(p, 1, 3);
            let mut rng = sampling::rng(s, t);
            let a = sampling::random_subset(&pr, &mut rng);
            let b = sampling::random_subset(&pr, &mut rng);
            let e = additive_energy(&pr, &a, &b).unwrap();
            prop_assert!(e.value <= e.trivial_bound());
            prop_assert_eq!(e.value, additive_energy(&pr, &b, &a).unwrap().value);
            if a.len() <= 8 && b.len() <= 8 {
                prop_assert_eq!(e.value, additive_energy_brute_force(&pr, &a, &b).unwrap());
            }
        }

        #[test]
        fn energy_is_monotone(s in any::<u64>(), extra in 0usize..27) {
            let pr = par(3, 1, 4);
            let mut rng = sampling::rng(s, 0);
            let a = sampling::random_subset(&pr, &mut rng);
            let b = sampling::random_subset(&pr, &mut rng);
            let bigger = Subset::from_indices(&pr, a.members().iter().map(|&i| i as usize).chain([extra])).unwrap();
            prop_assert!(additive_energy(&pr, &a, &b).unwrap().value <= additive_energy(&pr, &bigger, &b).unwrap().value);
        }

        #[test]
        fn bilinear_cross_check_never_trips(s in any::<u64>()) {
            let pr = par(3, 1, 3);
            let mut rng = sampling::rng(s, 1);
            let a = sampling::random_subset(&pr, &mut rng);
            let b = sampling::random_subset(&pr, &mut rng);
            prop_assert!(bilinear_l2(&pr, &a, &b).is_ok());
        }
    }
}
