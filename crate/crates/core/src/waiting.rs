//! Passenger waiting times under the four synchronization rules.
//!
//! Tables are indexed `[journey][rule]`: rows J1..J4, columns S1..S4.
//! `W = Wb + Wt` splits into waiting before boarding and waiting in transit;
//! `Wmin` is `W` with the best `l` substituted per column.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Float, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::scalar::{format_rational, Rational};

/// Circular passenger journeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Journey {
    /// R1 → R1
    J1,
    /// R1 → R2 → R1
    J2,
    /// R2 → R1 → R2
    J3,
    /// R2 → R2
    J4,
}

impl Journey {
    pub const ALL: [Journey; 4] = [Journey::J1, Journey::J2, Journey::J3, Journey::J4];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Synchronization rules: P1 or P2, split at `l = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// P1 with `l <= n`.
    S1,
    /// P1 with `l > n`.
    S2,
    /// P2 with `l <= n`.
    S3,
    /// P2 with `l > n`.
    S4,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::S1, Rule::S2, Rule::S3, Rule::S4];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Canonical `l` for the rule: `n` on the synchronized side, `n + 1` otherwise.
    pub fn canonical_l(self, n: u64) -> usize {
        match self {
            Rule::S1 | Rule::S3 => n as usize,
            Rule::S2 | Rule::S4 => n as usize + 1,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index() + 1)
    }
}

impl fmt::Display for Journey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{}", self.index() + 1)
    }
}

/// A 4×4 table of exact rationals, `[journey][rule]`.
pub type Table = [[Rational; 4]; 4];

fn zero_table() -> Table {
    std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero()))
}

fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn rat_u(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

struct Params {
    t1: Rational,
    n: Rational,
    r: Rational,
    l: Rational,
}

impl Params {
    fn new(cfg: &NetworkConfig, l: u64) -> Self {
        Self::at(cfg.t1(), cfg.n(), cfg.r(), l)
    }

    fn at(t1: &Rational, n: u64, r: &Rational, l: u64) -> Self {
        Params {
            t1: t1.clone(),
            n: rat_u(n),
            r: r.clone(),
            l: rat_u(l),
        }
    }

    fn l1(&self) -> Rational {
        &self.l + rat(1)
    }

    /// `((n+1)T1 + r) / (2(l+1))`
    fn half_sync(&self) -> Rational {
        ((&self.n + rat(1)) * &self.t1 + &self.r) / (rat(2) * self.l1())
    }

    /// `((l+1)T1 + r) / (2(l+1))`
    fn half_p2(&self) -> Rational {
        (self.l1() * &self.t1 + &self.r) / (rat(2) * self.l1())
    }
}

/// Waiting before boarding.
pub fn boarding_table(cfg: &NetworkConfig, l: u64) -> Table {
    let p = Params::new(cfg, l);
    let mut w = zero_table();
    for row in &mut w[..2] {
        *row = [p.half_sync(), &p.t1 / rat(2), p.half_p2(), p.half_p2()];
    }
    w
}

/// Waiting in transit.
pub fn transit_table(cfg: &NetworkConfig, l: u64) -> Table {
    let p = Params::new(cfg, l);
    let (t1, n, r, l) = (&p.t1, &p.n, &p.r, &p.l);
    let l1 = p.l1();
    let mut w = zero_table();
    w[0] = [((n - l) * t1 + r) / &l1, rat(0), r / &l1, r / &l1];
    w[1] = [
        rat(0),
        t1 - r,
        (n - l) * r / &l1,
        (t1 + (t1 - r) * (l - (n + rat(1)))) / &l1,
    ];
    w[2] = [p.half_sync(), t1 / rat(2), p.half_p2(), p.half_p2()];
    w
}

/// Total waiting time, evaluated from its own closed forms.
pub fn total_table(cfg: &NetworkConfig, l: u64) -> Table {
    total_table_at(cfg.t1(), cfg.n(), cfg.r(), l)
}

/// [`total_table`] for explicit `(T1, n, r)`; `r` is not range-checked.
pub fn total_table_at(t1: &Rational, n: u64, r: &Rational, l: u64) -> Table {
    let p = Params::at(t1, n, r, l);
    let (t1, n, r, l) = (&p.t1, &p.n, &p.r, &p.l);
    let den = rat(2) * p.l1();
    let mut w = zero_table();
    w[0] = [
        ((rat(3) * n - rat(2) * l + rat(1)) * t1 + rat(3) * r) / &den,
        t1 / rat(2),
        (p.l1() * t1 + rat(3) * r) / &den,
        (p.l1() * t1 + rat(3) * r) / &den,
    ];
    w[1] = [
        p.half_sync(),
        rat(3) * t1 / rat(2) - r,
        (p.l1() * t1 + (rat(2) * n - rat(2) * l + rat(1)) * r) / &den,
        w24(t1, n, r, l),
    ];
    w[2] = [p.half_sync(), t1 / rat(2), p.half_p2(), p.half_p2()];
    w
}

/// `((3l - 2n + 1)T1 + (2n - 2l + 3)r) / (2(l+1))`
fn w24(t1: &Rational, n: &Rational, r: &Rational, l: &Rational) -> Rational {
    ((rat(3) * l - rat(2) * n + rat(1)) * t1 + (rat(2) * n - rat(2) * l + rat(3)) * r)
        / (rat(2) * (l + rat(1)))
}

/// Total waiting on journey J2 under P2, as a function of `l`.
pub fn w24_at(cfg: &NetworkConfig, l: u64) -> Rational {
    let p = Params::new(cfg, l);
    w24(&p.t1, &p.n, &p.r, &p.l)
}

/// The entry (J1, S4) of `Wmin` in its commonly tabulated closed form,
/// `T1/2 + r/(2(n+2))`. Substituting `l = n + 1` into the total table gives
/// `T1/2 + 3r/(2(n+2))` instead, which is what [`waiting_tables`] uses.
pub fn tabulated_wmin_j1_s4(cfg: &NetworkConfig) -> Rational {
    cfg.t1() / rat(2) + cfg.r() / (rat(2) * (rat_u(cfg.n()) + rat(2)))
}

/// All four tables for one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaitingTables {
    pub t1: Rational,
    pub n: u64,
    pub r: Rational,
    /// `l` used for `wb`, `wt` and `w`.
    pub l: u64,
    pub wb: Table,
    pub wt: Table,
    pub w: Table,
    pub wmin: Table,
    /// The `l` substituted into each column of `wmin`; `None` where the
    /// column does not depend on `l`.
    pub wmin_l: [Option<u64>; 4],
}

impl WaitingTables {
    pub fn wmin_entry(&self, journey: Journey, rule: Rule) -> &Rational {
        &self.wmin[journey.index()][rule.index()]
    }
}

/// `Wmin` columns: S1 and S3 at `l = n`, S2 is `l`-free, S4 at `l = n + 1`.
pub fn wmin_table(cfg: &NetworkConfig) -> Table {
    wmin_at(cfg.t1(), cfg.n(), cfg.r())
}

/// [`wmin_table`] for explicit `(T1, n, r)`, e.g. to sample `r` over `[0, T1]`.
pub fn wmin_at(t1: &Rational, n: u64, r: &Rational) -> Table {
    let at_n = total_table_at(t1, n, r, n);
    let at_n1 = total_table_at(t1, n, r, n + 1);
    std::array::from_fn(|j| {
        [
            at_n[j][0].clone(),
            at_n[j][1].clone(),
            at_n[j][2].clone(),
            at_n1[j][3].clone(),
        ]
    })
}

pub fn waiting_tables(cfg: &NetworkConfig, l: u64) -> Result<WaitingTables> {
    if l == 0 {
        return Err(Error::InvalidConfig(
            "synchronization parameter l must be at least 1".into(),
        ));
    }
    if cfg.n() == 0 {
        return Err(Error::Domain("waiting tables need n >= 1".into()));
    }
    let n = cfg.n();
    Ok(WaitingTables {
        t1: cfg.t1().clone(),
        n,
        r: cfg.r().clone(),
        l,
        wb: boarding_table(cfg, l),
        wt: transit_table(cfg, l),
        w: total_table(cfg, l),
        wmin: wmin_table(cfg),
        wmin_l: [Some(n), None, Some(n), Some(n + 1)],
    })
}

/// Position of `r` relative to the critical remainders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    BelowRc,
    AtRc,
    Between,
    AtRs,
    AboveRs,
}

impl Regime {
    pub fn tag(self) -> &'static str {
        match self {
            Regime::BelowRc => "BELOW_RC",
            Regime::AtRc => "AT_RC",
            Regime::Between => "BETWEEN",
            Regime::AtRs => "AT_RS",
            Regime::AboveRs => "ABOVE_RS",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalParams {
    /// Where the slope of `w24(l)` changes sign: `(2n+2)/(2n+5) · T1`.
    pub r_c: Rational,
    /// Above this, S2 is best for every journey: `(2n+2)/(2n+3) · T1`.
    pub r_s: Rational,
    pub regime: Regime,
}

pub fn r_c(t1: &Rational, n: u64) -> Rational {
    rat_u(2 * n + 2) / rat_u(2 * n + 5) * t1
}

pub fn r_s(t1: &Rational, n: u64) -> Rational {
    subcritical_ratio(n) * t1
}

/// `r_s / T1 = (2n+2)/(2n+3)`.
pub fn subcritical_ratio(n: u64) -> Rational {
    rat_u(2 * n + 2) / rat_u(2 * n + 3)
}

pub fn classify(r: &Rational, r_c: &Rational, r_s: &Rational) -> Regime {
    use std::cmp::Ordering::*;
    match (r.cmp(r_c), r.cmp(r_s)) {
        (Less, _) => Regime::BelowRc,
        (Equal, _) => Regime::AtRc,
        (Greater, Less) => Regime::Between,
        (_, Equal) => Regime::AtRs,
        (_, Greater) => Regime::AboveRs,
    }
}

pub fn critical_params(cfg: &NetworkConfig) -> Result<CriticalParams> {
    if cfg.n() == 0 {
        return Err(Error::Domain("critical remainders need n >= 1".into()));
    }
    let rc = r_c(cfg.t1(), cfg.n());
    let rs = r_s(cfg.t1(), cfg.n());
    let regime = classify(cfg.r(), &rc, &rs);
    Ok(CriticalParams {
        r_c: rc,
        r_s: rs,
        regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeSign {
    Increasing,
    Decreasing,
    Constant,
}

/// Direction of `w24` as `l` grows; the sign of `r_c - r`.
pub fn w24_slope_sign(cfg: &NetworkConfig) -> SlopeSign {
    let rc = r_c(cfg.t1(), cfg.n());
    match cfg.r().cmp(&rc) {
        std::cmp::Ordering::Less => SlopeSign::Increasing,
        std::cmp::Ordering::Greater => SlopeSign::Decreasing,
        std::cmp::Ordering::Equal => SlopeSign::Constant,
    }
}

/// Passengers (or passenger rates) per journey.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandProfile {
    counts: [Rational; 4],
}

impl DemandProfile {
    pub fn new(counts: [Rational; 4]) -> Result<Self> {
        if counts.iter().any(Signed::is_negative) {
            return Err(Error::InvalidConfig("demand must be nonnegative".into()));
        }
        if counts.iter().all(Zero::is_zero) {
            return Err(Error::InvalidConfig("total demand must be positive".into()));
        }
        Ok(DemandProfile { counts })
    }

    pub fn from_counts(counts: [u64; 4]) -> Result<Self> {
        Self::new(counts.map(rat_u))
    }

    pub fn count(&self, journey: Journey) -> &Rational {
        &self.counts[journey.index()]
    }

    pub fn total(&self) -> Rational {
        self.counts.iter().sum()
    }
}

/// Mean waiting time per passenger under each rule, over `Wmin`.
pub fn average_waiting(tables: &WaitingTables, demand: &DemandProfile) -> [Rational; 4] {
    average_over(&tables.wmin, demand)
}

fn average_over(wmin: &Table, demand: &DemandProfile) -> [Rational; 4] {
    let total = demand.total();
    std::array::from_fn(|rule| {
        let weighted: Rational = Journey::ALL
            .iter()
            .map(|&j| demand.count(j) * &wmin[j.index()][rule])
            .sum();
        weighted / &total
    })
}

/// Below `r_s`, S1 beats S2 on average iff
/// `n2 > r(3 n1 + n3) / ((2n+3)(r_s - r))`.
pub fn s1_preference_holds(cfg: &NetworkConfig, demand: &DemandProfile) -> Result<bool> {
    let params = critical_params(cfg)?;
    let r = cfg.r();
    if *r >= params.r_s {
        return Err(Error::Domain(format!(
            "S1 preference test needs r < r_s (r = {}, r_s = {})",
            format_rational(r),
            format_rational(&params.r_s)
        )));
    }
    Ok(demand.count(Journey::J2) > &s1_threshold(cfg, demand, &params.r_s))
}

fn s1_threshold(cfg: &NetworkConfig, demand: &DemandProfile, rs: &Rational) -> Rational {
    let r = cfg.r();
    let mix = rat(3) * demand.count(Journey::J1) + demand.count(Journey::J3);
    r * mix / (rat_u(2 * cfg.n() + 3) * (rs - r))
}

/// Which branch of the decision procedure selected the rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    /// `r > r_s`: S2 is best for every journey.
    AboveRs,
    /// `r < r_s` and the demand threshold for S1 is exceeded.
    S1Preference,
    /// Smallest average waiting time, lowest rule index on ties.
    Exhaustive,
}

impl Reason {
    pub fn describe(self) -> &'static str {
        match self {
            Reason::AboveRs => "r > r_s",
            Reason::S1Preference => "S1 demand threshold",
            Reason::Exhaustive => "exhaustive comparison",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recommendation {
    pub rule: Rule,
    pub l: usize,
    pub reason: Reason,
    /// Mean waiting per rule, S1..S4.
    pub averages: [Rational; 4],
    /// Other rules whose mean waiting equals the chosen one.
    pub ties: Vec<Rule>,
    pub critical: CriticalParams,
    pub rationale: String,
}

pub fn recommend(cfg: &NetworkConfig, demand: &DemandProfile) -> Result<Recommendation> {
    let critical = critical_params(cfg)?;
    let averages = average_over(&wmin_table(cfg), demand);
    let r = cfg.r();

    let (rule, reason) = if *r > critical.r_s {
        (Rule::S2, Reason::AboveRs)
    } else if *r < critical.r_s && s1_preference_holds(cfg, demand)? {
        (Rule::S1, Reason::S1Preference)
    } else {
        let best = Rule::ALL
            .into_iter()
            .min_by(|a, b| averages[a.index()].cmp(&averages[b.index()]))
            .expect("four rules");
        (best, Reason::Exhaustive)
    };
    let ties = Rule::ALL
        .into_iter()
        .filter(|&o| o != rule && averages[o.index()] == averages[rule.index()])
        .collect();
    let l = rule.canonical_l(cfg.n());
    let rationale = match reason {
        Reason::AboveRs => format!(
            "r = {} exceeds r_s = {}: {} minimizes waiting on every journey",
            format_rational(r),
            format_rational(&critical.r_s),
            rule
        ),
        Reason::S1Preference => format!(
            "r = {} is below r_s = {} and n2 = {} exceeds the threshold {}",
            format_rational(r),
            format_rational(&critical.r_s),
            format_rational(demand.count(Journey::J2)),
            format_rational(&s1_threshold(cfg, demand, &critical.r_s))
        ),
        Reason::Exhaustive => format!(
            "{} has the smallest mean waiting time {}",
            rule,
            format_rational(&averages[rule.index()])
        ),
    };
    Ok(Recommendation {
        rule,
        l,
        reason,
        averages,
        ties,
        critical,
        rationale,
    })
}

/// Sampler for the probability that `r < r_s` with arbitrary travel times:
/// `T1` uniform on `(0, 1]` and `T2 = T1 · u` with `u` uniform on `[1, spread]`.
/// The event only depends on `u`, so `T1` is never drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingScheme {
    pub spread: f64,
}

impl Default for SamplingScheme {
    fn default() -> Self {
        SamplingScheme { spread: 10.0 }
    }
}

/// Monte Carlo estimate of `P(r < r_s)`, as the exact fraction of hits.
pub fn subcritical_probability(samples: u64, seed: u64) -> Result<Rational> {
    subcritical_probability_with(samples, seed, SamplingScheme::default())
}

pub fn subcritical_probability_with(
    samples: u64,
    seed: u64,
    scheme: SamplingScheme,
) -> Result<Rational> {
    if samples == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    if !(scheme.spread.is_finite() && scheme.spread > 1.0) {
        return Err(Error::InvalidConfig(
            "spread must be a finite number above 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let u: f64 = rng.gen_range(1.0..=scheme.spread);
        if ratio_is_subcritical(u) {
            hits += 1;
        }
    }
    Ok(rat_u(hits) / rat_u(samples))
}

/// Exact test of `frac(u) < (2n+2)/(2n+3)` with `n = floor(u)`, for `u >= 1`.
fn ratio_is_subcritical(u: f64) -> bool {
    let (mantissa, exponent, _) = Float::integer_decode(u);
    if exponent >= 0 {
        return true;
    }
    let shift = (-exponent) as u32;
    let n = (mantissa >> shift) as u128;
    let frac = (mantissa & ((1u64 << shift) - 1)) as u128;
    frac * (2 * n + 3) < (2 * n + 2) << shift
}
