//! The catalogue of verifiable statements, shared by the CLI and the
//! acceptance suite, and replay of witnesses.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::energy;
use crate::error::{Error, Result};
use crate::estimates;
use crate::field::{FieldSpec, DEFAULT_ORDER_CAP};
use crate::fourier::{self, Exponent, ExponentPair, ExtensionOperator, SpaceTransform};
use crate::geometry::{self, Paraboloid, Subset, VectorSpace, DEFAULT_ENUMERATION_CAP};
use crate::report::{LemmaReport, Verdict, Witness};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    FourierInversion,
    BilinearIdentity,
    Lemma1,
    Lemma2,
    Lemma3,
    Claim,
    LinesDistinct,
    MinusD,
    DyadicSandwich,
    EnergyOracle,
    DeltaExpansion,
    Theorem1,
    MQuantity,
}

impl CheckKind {
    pub const ALL: [CheckKind; 13] = [
        CheckKind::FourierInversion,
        CheckKind::BilinearIdentity,
        CheckKind::Lemma1,
        CheckKind::Lemma2,
        CheckKind::Lemma3,
        CheckKind::Claim,
        CheckKind::LinesDistinct,
        CheckKind::MinusD,
        CheckKind::DyadicSandwich,
        CheckKind::EnergyOracle,
        CheckKind::DeltaExpansion,
        CheckKind::Theorem1,
        CheckKind::MQuantity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::FourierInversion => "fourier-inversion",
            CheckKind::BilinearIdentity => "bilinear-identity",
            CheckKind::Lemma1 => "lemma1",
            CheckKind::Lemma2 => "lemma2",
            CheckKind::Lemma3 => "lemma3",
            CheckKind::Claim => "claim",
            CheckKind::LinesDistinct => "lines-distinct",
            CheckKind::MinusD => "minus-d",
            CheckKind::DyadicSandwich => "dyadic-sandwich",
            CheckKind::EnergyOracle => "energy-oracle",
            CheckKind::DeltaExpansion => "delta-expansion",
            CheckKind::Theorem1 => "theorem1",
            CheckKind::MQuantity => "m-quantity",
        }
    }

    pub fn default_trials(self) -> u64 {
        match self {
            CheckKind::FourierInversion => 100,
            CheckKind::BilinearIdentity | CheckKind::DeltaExpansion => 50,
            CheckKind::Lemma1 => 1000,
            CheckKind::Lemma2 | CheckKind::Lemma3 | CheckKind::Theorem1 => 10_000,
            CheckKind::Claim => 20,
            CheckKind::DyadicSandwich => 100,
            CheckKind::EnergyOracle => 20_000,
            CheckKind::LinesDistinct | CheckKind::MinusD | CheckKind::MQuantity => 0,
        }
    }

    /// Whether the check needs a dimension.
    pub fn uses_dimension(self) -> bool {
        !matches!(self, CheckKind::Lemma1 | CheckKind::LinesDistinct)
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Parse(format!("unknown check {s:?}")))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exhaustive,
    Random,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "random" => Ok(Mode::Random),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Random => "random",
        })
    }
}

/// Parameters of one verification run.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub p: u64,
    pub m: u32,
    pub n: usize,
    pub trials: Option<u64>,
    pub seed: u64,
    pub mode: Option<Mode>,
    pub cap: u64,
    pub exponent: Option<Exponent>,
    /// Subset-size limit for the energy oracle.
    pub max_size: usize,
    /// Pair limit for exhaustive energy-oracle runs.
    pub pair_cap: u64,
    /// Use the exponent `(n-3)/4` in the Lemma 3 bound.
    pub sharper_odd: bool,
}

impl CheckConfig {
    pub fn new(p: u64, m: u32, n: usize) -> Self {
        CheckConfig {
            p,
            m,
            n,
            trials: None,
            seed: 0,
            mode: None,
            cap: DEFAULT_ORDER_CAP,
            exponent: None,
            max_size: 5,
            pair_cap: 1 << 24,
            sharper_odd: false,
        }
    }

    pub fn trials(mut self, t: u64) -> Self {
        self.trials = Some(t);
        self
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seed = s;
        self
    }

    pub fn mode(mut self, m: Mode) -> Self {
        self.mode = Some(m);
        self
    }

    pub fn field(&self) -> Result<Arc<FieldSpec>> {
        Ok(Arc::new(FieldSpec::with_cap(self.p, self.m, self.cap)?))
    }

    pub fn paraboloid(&self) -> Result<Paraboloid> {
        Paraboloid::with_cap(self.field()?, self.n, self.cap.max(DEFAULT_ENUMERATION_CAP))
    }
}

/// Runs one catalogued check.
pub fn run_check(kind: CheckKind, cfg: &CheckConfig) -> Result<LemmaReport> {
    let trials = cfg.trials.unwrap_or(kind.default_trials());
    let seed = cfg.seed;
    match kind {
        CheckKind::FourierInversion => {
            let space = VectorSpace::new(cfg.field()?, cfg.n)?;
            fourier::inversion_check(&space, trials, seed)
        }
        CheckKind::BilinearIdentity => energy::bilinear_identity_check(&cfg.paraboloid()?, trials, seed),
        CheckKind::Lemma1 => Ok(geometry::lemma1_check(&*cfg.field()?, trials, seed)),
        CheckKind::Lemma2 => {
            let par = cfg.paraboloid()?;
            let mode = cfg.mode.unwrap_or(if par.len() <= 9 { Mode::Exhaustive } else { Mode::Random });
            match mode {
                Mode::Exhaustive => energy::lemma2_exhaustive(&par),
                Mode::Random => energy::lemma2_random(&par, trials, seed),
            }
        }
        CheckKind::Lemma3 => energy::lemma3_check(&cfg.paraboloid()?, trials, seed, cfg.sharper_odd),
        CheckKind::Claim => geometry::claim_check(&cfg.paraboloid()?, trials, seed),
        CheckKind::LinesDistinct => Ok(geometry::lines_distinct_check(&*cfg.field()?)),
        CheckKind::MinusD => Ok(geometry::minus_d_check(&cfg.paraboloid()?)),
        CheckKind::DyadicSandwich => {
            let p = match cfg.exponent {
                Some(p) => p,
                None => ExponentPair::theorem_pair(cfg.n)?.p,
            };
            estimates::dyadic_sandwich_check(&cfg.paraboloid()?, p, trials, seed)
        }
        CheckKind::EnergyOracle => {
            let par = cfg.paraboloid()?;
            match cfg.mode.unwrap_or(Mode::Exhaustive) {
                Mode::Exhaustive => energy::energy_oracle_exhaustive(&par, cfg.max_size, cfg.pair_cap),
                Mode::Random => energy::energy_oracle_random(&par, cfg.max_size, trials, seed),
            }
        }
        CheckKind::DeltaExpansion => energy::delta_expansion_check(&cfg.paraboloid()?, trials, seed),
        CheckKind::Theorem1 => estimates::theorem1_check(&cfg.paraboloid()?, trials, seed),
        CheckKind::MQuantity => {
            let par = cfg.paraboloid()?;
            energy::m_quantity_report(&par, &par.full(), "P")
        }
    }
}

fn witness_field(w: &Witness, cap: u64) -> Result<Arc<FieldSpec>> {
    Ok(Arc::new(FieldSpec::with_cap(w.p as u64, w.m, cap)?))
}

fn witness_paraboloid(w: &Witness, cap: u64) -> Result<Paraboloid> {
    let n = w.n.ok_or_else(|| Error::Parse(format!("witness for {} lacks n", w.check)))?;
    Paraboloid::with_cap(witness_field(w, cap)?, n, cap.max(DEFAULT_ENUMERATION_CAP))
}

fn witness_seed(w: &Witness) -> Result<u64> {
    w.seed.ok_or_else(|| Error::Parse(format!("witness for {} lacks a seed", w.check)))
}

fn parse_u64(w: &Witness, key: &str) -> Result<u64> {
    w.get(key)?.parse().map_err(|_| Error::Parse(format!("witness key {key:?} is not an integer")))
}

fn parse_plane_point(field: &FieldSpec, s: &str) -> Result<geometry::PlanePoint> {
    let (a, b) = s.split_once(',').ok_or_else(|| Error::Parse(format!("bad plane point {s:?}")))?;
    let parse = |t: &str| -> Result<_> {
        let i: u32 = t.trim().parse().map_err(|_| Error::Parse(format!("bad plane point {s:?}")))?;
        field.element(i)
    };
    Ok([parse(a)?, parse(b)?])
}

fn subsets(par: &Paraboloid, w: &Witness) -> Result<(Subset, Subset)> {
    Ok((Subset::from_mask_hex(par, w.get("A")?)?, Subset::from_mask_hex(par, w.get("B")?)?))
}

/// Re-evaluates the single instance recorded in `w`. The returned report
/// has one instance; its verdict is `Fail` exactly when the instance
/// violates the statement.
pub fn replay(w: &Witness, cap: u64) -> Result<LemmaReport> {
    if w.check == SEARCH_CHECK {
        return replay_search(w, cap);
    }
    let kind: CheckKind = w.check.parse()?;
    let mut report = LemmaReport::new(kind.name());
    report.instances.push(format!("replay of {}", kind.name()));
    let mut asserted = true;
    let (ratio, holds, detail) = match kind {
        CheckKind::FourierInversion => {
            let n = w.n.ok_or_else(|| Error::Parse("witness lacks n".into()))?;
            let space = VectorSpace::new(witness_field(w, cap)?, n)?;
            let f = fourier::random_space_function(&space, witness_seed(w)?, parse_u64(w, "trial")?);
            let err = fourier::inversion_error(&SpaceTransform::new(&space)?, &f)?;
            (err, err <= 1e-9, format!("relative error {err:e}"))
        }
        CheckKind::BilinearIdentity => {
            let par = witness_paraboloid(w, cap)?;
            let (a, b) = subsets(&par, w)?;
            let parts = energy::bilinear_l2_parts(&par, &ExtensionOperator::new(&par)?, &a, &b)?;
            let err = parts.relative_error();
            (err, err <= energy::RELATIVE_TOLERANCE, format!("direct={} exact={}", parts.direct, parts.exact))
        }
        CheckKind::Lemma1 => {
            let inc = geometry::lemma1_instance(&*witness_field(w, cap)?, w.get("points")?, w.get("lines")?)?;
            let ratio = if inc.bound > 0.0 { inc.count as f64 / inc.bound } else { 0.0 };
            (ratio, inc.holds, format!("count={} bound={}", inc.count, inc.bound))
        }
        CheckKind::Lemma2 => {
            let par = witness_paraboloid(w, cap)?;
            let (a, b) = subsets(&par, w)?;
            let inst = energy::lemma2_instance(&par, &ExtensionOperator::new(&par)?, &a, &b)?;
            (inst.ratio, inst.holds, format!("energy={} bound={}", inst.parts.energy.value, inst.bound))
        }
        CheckKind::Lemma3 => {
            asserted = false;
            let par = witness_paraboloid(w, cap)?;
            let (a, b) = subsets(&par, w)?;
            let r = energy::lemma3_ratio(&par, &a, &b)?;
            (r.ratio, r.ratio.is_finite(), format!("energy={} bound={}", r.energy.value, r.bound_value))
        }
        CheckKind::Claim => {
            let par = witness_paraboloid(w, cap)?;
            let (a, b) = subsets(&par, w)?;
            let points: Vec<usize> = match w.get("b") {
                Ok(s) => vec![s.parse().map_err(|_| Error::Parse("bad b".into()))?],
                Err(_) => (0..par.len()).collect(),
            };
            let mut bad = None;
            for bp in points {
                let (l, r) = geometry::claim_counts(&par, &a, &b, bp)?;
                if l != r {
                    bad = Some((bp, l, r));
                    break;
                }
            }
            let detail = bad.map_or("counts agree".to_string(), |(bp, l, r)| format!("b={bp} lhs={l} rhs={r}"));
            (bad.is_some() as u8 as f64, bad.is_none(), detail)
        }
        CheckKind::LinesDistinct => {
            let field = witness_field(w, cap)?;
            asserted = !field.minus_one_is_square();
            let y = parse_plane_point(&field, w.get("y")?)?;
            let z = parse_plane_point(&field, w.get("y_prime")?)?;
            let same = y != z && geometry::lines_coincide(&field, y, z)?;
            (same as u8 as f64, !same, format!("lines coincide: {same}"))
        }
        CheckKind::MinusD => {
            let par = witness_paraboloid(w, cap)?;
            asserted = par.dim() == 2 || (par.dim() == 3 && !par.field().minus_one_is_square());
            let d = parse_u64(w, "d")? as usize;
            if d == 0 || d >= par.len() {
                return Err(Error::Parse(format!("point index {d} out of range")));
            }
            let both = par.locate(par.space().neg_index(par.space_index(d))).is_some();
            (both as u8 as f64, !both, format!("-d on P: {both}"))
        }
        CheckKind::DyadicSandwich => {
            let par = witness_paraboloid(w, cap)?;
            let report = estimates::dyadic_sandwich_check_one(
                &par,
                w.get("p")?.parse()?,
                witness_seed(w)?,
                parse_u64(w, "trial")?,
            )?;
            (report.0, report.1, format!("violation={:e}", report.0))
        }
        CheckKind::EnergyOracle => {
            let par = witness_paraboloid(w, cap)?;
            let (a, b) = subsets(&par, w)?;
            let x = energy::additive_energy(&par, &a, &b)?.value;
            let y = energy::additive_energy_brute_force(&par, &a, &b)?;
            (x.abs_diff(y) as f64, x == y, format!("r2={x} brute={y}"))
        }
        CheckKind::DeltaExpansion => {
            let par = witness_paraboloid(w, cap)?;
            let (a, b) = subsets(&par, w)?;
            let (exact, via) = energy::delta_expansion(&par, &a, &b)?;
            let err = if exact == 0 { via.abs() } else { (via - exact as f64).abs() / exact as f64 };
            (err, err <= energy::RELATIVE_TOLERANCE, format!("exact={exact} characters={via}"))
        }
        CheckKind::Theorem1 => {
            let par = witness_paraboloid(w, cap)?;
            let r = estimates::theorem1_instance(&par, w.get("argmax")?)?;
            let c = estimates::paper_constant_3d();
            (r / c, r <= c, format!("ratio={r}"))
        }
        CheckKind::MQuantity => {
            let par = witness_paraboloid(w, cap)?;
            let b = Subset::from_mask_hex(&par, w.get("B")?)?;
            let a = par.base_space().vector(parse_u64(w, "a")? as usize);
            let direct = energy::m_quantity(&par, &a, &b)?.value;
            let exact = energy::m_quantity_exact(&par, &a, &b)?;
            let err = if exact == 0 { direct.abs() } else { (direct - exact as f64).abs() / exact as f64 };
            (err, err <= energy::RELATIVE_TOLERANCE, format!("direct={direct} exact={exact}"))
        }
    };
    let mut replayed = w.clone();
    replayed.detail = detail;
    report.observe(ratio, holds || !asserted, || replayed);
    report.finish(asserted);
    if !holds && !asserted {
        report.verdict = Verdict::ReportOnly;
    }
    Ok(report)
}

/// Check name carried by constant-search witnesses.
pub const SEARCH_CHECK: &str = "estimate-constant";

/// Re-evaluates a search argmax and compares it with the recorded ratio.
fn replay_search(w: &Witness, cap: u64) -> Result<LemmaReport> {
    let par = witness_paraboloid(w, cap)?;
    let pair: ExponentPair = w.get("pair")?.parse()?;
    let f = estimates::Argmax::decode(w.get("argmax")?)?.function(&par)?;
    let ratio = estimates::restriction_ratio(&ExtensionOperator::new(&par)?, &f, pair)?;
    let recorded: f64 = w.get("best_ratio")?.parse().map_err(|_| Error::Parse("bad best_ratio".into()))?;
    let err = (ratio - recorded).abs() / recorded.abs().max(f64::MIN_POSITIVE);
    let mut report = LemmaReport::new(SEARCH_CHECK);
    report.instances.push(format!("replay of {SEARCH_CHECK}"));
    let mut replayed = w.clone();
    replayed.detail = format!("ratio={ratio} recorded={recorded}");
    report.observe(err, err <= energy::RELATIVE_TOLERANCE, || replayed);
    report.metric("ratio", ratio);
    report.finish(true);
    Ok(report)
}
