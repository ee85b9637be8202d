//! System matrices for the two-route network.
//!
//! Route R1 has travel time `T1`, route R2 has `T2 >= T1`, and we write
//! `T2 = n·T1 + r` with `0 <= r < T1`. The partially synchronized rules turn
//! a delayed recursion on `x1` into a unit-delay system by adding `l`
//! artificial states; the state vector is ordered `(x1, z_l, …, z_1)`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::MaxPlusMatrix;
use crate::scalar::{format_rational, MaxPlusScalar, Rational};

/// Travel times and the quotient/remainder split `T2 = n·T1 + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkConfig {
    t1: Rational,
    t2: Rational,
    n: u64,
    r: Rational,
}

impl NetworkConfig {
    /// Splits `T2 = n·T1 + r` with `0 <= r < T1`. Requires `0 < T1 <= T2`.
    pub fn decompose(t1: Rational, t2: Rational) -> Result<Self> {
        if t1 <= Rational::zero() {
            return Err(Error::InvalidConfig(format!(
                "T1 must be positive, got {}",
                format_rational(&t1)
            )));
        }
        if t2 < t1 {
            return Err(Error::InvalidConfig(format!(
                "expected T1 <= T2, got T1 = {} and T2 = {}",
                format_rational(&t1),
                format_rational(&t2)
            )));
        }
        let quotient = (&t2 / &t1).floor().to_integer();
        let n = quotient
            .to_u64()
            .ok_or_else(|| Error::InvalidConfig("T2/T1 is too large".into()))?;
        let r = &t2 - &t1 * Rational::from_integer(quotient);
        Ok(NetworkConfig { t1, t2, n, r })
    }

    pub fn t1(&self) -> &Rational {
        &self.t1
    }

    pub fn t2(&self) -> &Rational {
        &self.t2
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub(crate) fn n_rat(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.n))
    }
}

/// Which timetable rule a [`SyncModel`] encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    /// Each bus runs its own loop.
    M1,
    /// Both buses wait for each other at every meeting.
    M2,
    /// `x1(k) = T1 x1(k-1) ⊕ T1 T2 x1(k-(l+1))`.
    P1 { l: usize },
    /// `x1(k) = T1 x1(k-1) ⊕ r T1^(l+1) x1(k-(l+1))`.
    P2 { l: usize },
    /// `m` buses on R2 with headway `delta`.
    FastLoop { m: usize, delta: Rational },
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::M1 => "m1",
            ModelKind::M2 => "m2",
            ModelKind::P1 { .. } => "p1",
            ModelKind::P2 { .. } => "p2",
            ModelKind::FastLoop { .. } => "fast",
        }
    }
}

/// A model together with its system matrix and state names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncModel {
    pub kind: ModelKind,
    pub matrix: MaxPlusMatrix,
    pub state_labels: Vec<String>,
}

impl SyncModel {
    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    /// Artificial states carry no physical departure.
    pub fn is_artificial(&self, state: usize) -> bool {
        self.state_labels[state].starts_with('z')
    }
}

fn fin(q: Rational) -> MaxPlusScalar {
    MaxPlusScalar::Finite(q)
}

/// `diag(T1, T2)`.
pub fn build_m1(cfg: &NetworkConfig) -> SyncModel {
    let mut a = MaxPlusMatrix::bottom(2, 2);
    a.set(0, 0, fin(cfg.t1.clone()));
    a.set(1, 1, fin(cfg.t2.clone()));
    SyncModel {
        kind: ModelKind::M1,
        matrix: a,
        state_labels: vec!["x1".into(), "x2".into()],
    }
}

/// `[[T1, T2], [T1, T2]]`.
pub fn build_m2(cfg: &NetworkConfig) -> SyncModel {
    let mut a = MaxPlusMatrix::bottom(2, 2);
    for i in 0..2 {
        a.set(i, 0, fin(cfg.t1.clone()));
        a.set(i, 1, fin(cfg.t2.clone()));
    }
    SyncModel {
        kind: ModelKind::M2,
        matrix: a,
        state_labels: vec!["x1".into(), "x2".into()],
    }
}

fn require_l(l: usize) -> Result<()> {
    if l == 0 {
        Err(Error::InvalidConfig(
            "synchronization parameter l must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// Companion-style matrix shared by both partial rules: self-loop `T1` on x1,
/// `x1 ← z_l` with weight `T1 + r`, and a chain `z_i ← z_{i-1}`, `z_1 ← x1`
/// with weight `step`.
fn delayed_chain(cfg: &NetworkConfig, l: usize, step: Rational) -> (MaxPlusMatrix, Vec<String>) {
    let dim = l + 1;
    let mut a = MaxPlusMatrix::bottom(dim, dim);
    a.set(0, 0, fin(cfg.t1.clone()));
    a.set(0, 1, fin(&cfg.t1 + &cfg.r));
    for i in 1..l {
        a.set(i, i + 1, fin(step.clone()));
    }
    a.set(l, 0, fin(step));
    let mut labels = vec!["x1".to_string()];
    labels.extend((1..=l).rev().map(|i| format!("z{i}")));
    (a, labels)
}

/// Rule P1: the `l` artificial edges share `n·T1` equally.
pub fn build_p1(cfg: &NetworkConfig, l: usize) -> Result<SyncModel> {
    require_l(l)?;
    let step = cfg.n_rat() * &cfg.t1 / Rational::from_integer(BigInt::from(l));
    let (matrix, state_labels) = delayed_chain(cfg, l, step);
    Ok(SyncModel {
        kind: ModelKind::P1 { l },
        matrix,
        state_labels,
    })
}

/// Rule P2: every artificial edge carries `T1`.
pub fn build_p2(cfg: &NetworkConfig, l: usize) -> Result<SyncModel> {
    require_l(l)?;
    let (matrix, state_labels) = delayed_chain(cfg, l, cfg.t1.clone());
    Ok(SyncModel {
        kind: ModelKind::P2 { l },
        matrix,
        state_labels,
    })
}

/// Closed-form eigenvalue of P1: `T1` if `l > n`, else `((n+1)T1 + r)/(l+1)`.
pub fn lambda1_p1(cfg: &NetworkConfig, l: usize) -> Rational {
    if l as u64 > cfg.n {
        cfg.t1.clone()
    } else {
        ((cfg.n_rat() + Rational::from_integer(1.into())) * &cfg.t1 + &cfg.r)
            / Rational::from_integer(BigInt::from(l + 1))
    }
}

/// Closed-form eigenvalue of P2: `((l+1)T1 + r)/(l+1)`.
pub fn lambda1_p2(cfg: &NetworkConfig, l: usize) -> Rational {
    let len = Rational::from_integer(BigInt::from(l + 1));
    (&len * &cfg.t1 + &cfg.r) / len
}

/// Loop of `m` buses: `y_i(k) = δ y_{i-1}(k-1)`, `y_1(k) = δ y_m(k-1)`.
pub fn build_fast_loop(m: usize, delta: Rational) -> Result<SyncModel> {
    if m == 0 {
        return Err(Error::InvalidConfig(
            "fast loop needs at least one bus".into(),
        ));
    }
    if delta <= Rational::zero() {
        return Err(Error::InvalidConfig("headway must be positive".into()));
    }
    let mut a = MaxPlusMatrix::bottom(m, m);
    for i in 1..m {
        a.set(i, i - 1, fin(delta.clone()));
    }
    a.set(0, m - 1, fin(delta.clone()));
    Ok(SyncModel {
        kind: ModelKind::FastLoop { m, delta },
        matrix: a,
        state_labels: (1..=m).map(|i| format!("y{i}")).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::mat;
    use crate::scalar::{int, ratio};
    use crate::spectral::{cyclicity, elementary_cycles, is_irreducible, max_cycle_mean_karp};

    const NEG: &str = "-inf";

    fn cfg(t1: Rational, t2: Rational) -> NetworkConfig {
        NetworkConfig::decompose(t1, t2).unwrap()
    }

    fn karp(m: &SyncModel) -> Rational {
        max_cycle_mean_karp(&m.matrix)
            .unwrap()
            .into_finite()
            .unwrap()
    }

    #[test]
    fn decomposition() {
        let c = cfg(int(3), ratio(26, 3));
        assert_eq!((c.n(), c.r().clone()), (2, ratio(8, 3)));
        let c = cfg(int(3), ratio(25, 3));
        assert_eq!((c.n(), c.r().clone()), (2, ratio(7, 3)));
        let c = cfg(int(3), int(6));
        assert_eq!((c.n(), c.r().clone()), (2, int(0)));
        let c = cfg(int(3), int(3));
        assert_eq!((c.n(), c.r().clone()), (1, int(0)));
    }

    #[test]
    fn decomposition_rejects_bad_input() {
        assert!(NetworkConfig::decompose(int(0), int(3)).is_err());
        assert!(NetworkConfig::decompose(int(-1), int(3)).is_err());
        assert!(NetworkConfig::decompose(int(4), int(3)).is_err());
    }

    #[test]
    fn m1_and_m2() {
        let c = cfg(int(3), ratio(26, 3));
        let m1 = build_m1(&c);
        assert_eq!(m1.matrix, mat(&[&["3", NEG], &[NEG, "26/3"]]));
        assert!(!is_irreducible(&m1.matrix).unwrap());
        assert_eq!(karp(&m1), ratio(26, 3));

        let m2 = build_m2(&c);
        assert_eq!(m2.matrix, mat(&[&["3", "26/3"], &["3", "26/3"]]));
        assert!(is_irreducible(&m2.matrix).unwrap());
        assert_eq!(karp(&m2), ratio(26, 3));
        let mut means: Vec<Rational> = elementary_cycles(&m2.matrix)
            .unwrap()
            .iter()
            .map(|c| c.mean())
            .collect();
        means.sort();
        assert_eq!(means, vec![int(3), ratio(35, 6), ratio(26, 3)]);

        let eq = cfg(int(3), int(3));
        assert_eq!(build_m1(&eq).matrix, mat(&[&["3", NEG], &[NEG, "3"]]));
        assert_eq!(karp(&build_m1(&eq)), int(3));
        assert_eq!(karp(&build_m2(&eq)), int(3));
    }

    #[test]
    fn p1_matrix_and_eigenvalue() {
        let c = cfg(int(3), ratio(25, 3));
        let p1 = build_p1(&c, 2).unwrap();
        assert_eq!(
            p1.matrix,
            mat(&[&["3", "16/3", NEG], &[NEG, NEG, "3"], &["3", NEG, NEG]])
        );
        assert_eq!(p1.state_labels, vec!["x1", "z2", "z1"]);
        assert_eq!(lambda1_p1(&c, 2), ratio(34, 9));
        assert_eq!(karp(&p1), ratio(34, 9));
        for l in 3..=5 {
            assert_eq!(karp(&build_p1(&c, l).unwrap()), int(3));
            assert_eq!(lambda1_p1(&c, l), int(3));
        }
        let zero_r = cfg(int(3), int(6));
        assert_eq!(karp(&build_p1(&zero_r, 2).unwrap()), int(3));
        assert!(build_p1(&c, 0).is_err());
    }

    #[test]
    fn p1_synchronized_branch_is_smallest_at_l_equal_n() {
        let c = cfg(int(3), ratio(25, 3));
        let at_n = lambda1_p1(&c, c.n() as usize);
        for l in 1..c.n() as usize {
            assert!(lambda1_p1(&c, l) > at_n);
        }
    }

    #[test]
    fn p2_matrix_and_eigenvalue() {
        let c = cfg(int(3), ratio(25, 3));
        let p2 = build_p2(&c, 2).unwrap();
        assert_eq!(p2.matrix, build_p1(&c, 2).unwrap().matrix);
        assert_eq!(lambda1_p2(&c, 5), ratio(61, 18));
        for l in [1, 2, 5] {
            assert_eq!(karp(&build_p2(&c, l).unwrap()), lambda1_p2(&c, l));
        }
        let c = cfg(int(3), ratio(26, 3));
        assert_eq!(lambda1_p2(&c, 2), ratio(35, 9));
        let big = 1_000_000;
        assert_eq!(lambda1_p2(&c, big) - int(3), c.r() / int(big as i64 + 1));
        let zero_r = cfg(int(3), int(6));
        for l in 1..6 {
            assert_eq!(lambda1_p2(&zero_r, l), int(3));
        }
        assert!(build_p2(&c, 0).is_err());
    }

    #[test]
    fn p_models_are_irreducible() {
        let c = cfg(int(2), ratio(15, 2));
        for l in 1..6 {
            assert!(is_irreducible(&build_p1(&c, l).unwrap().matrix).unwrap());
            assert!(is_irreducible(&build_p2(&c, l).unwrap().matrix).unwrap());
        }
    }

    #[test]
    fn fast_loop() {
        let f = build_fast_loop(3, ratio(1, 2)).unwrap();
        assert_eq!(karp(&f), ratio(1, 2));
        assert_eq!(f.state_labels, vec!["y1", "y2", "y3"]);
        let one = build_fast_loop(1, int(2)).unwrap();
        assert_eq!(one.matrix, mat(&[&["2"]]));
        assert_eq!(karp(&one), int(2));
        assert_eq!(
            cyclicity(&build_fast_loop(4, int(1)).unwrap().matrix).unwrap(),
            4
        );
        assert!(build_fast_loop(0, int(1)).is_err());
        assert!(build_fast_loop(2, int(0)).is_err());
    }

    #[test]
    fn every_row_has_a_predecessor() {
        let c = cfg(int(3), ratio(26, 3));
        let models = vec![
            build_m1(&c),
            build_m2(&c),
            build_p1(&c, 4).unwrap(),
            build_p2(&c, 1).unwrap(),
            build_fast_loop(5, ratio(1, 3)).unwrap(),
        ];
        for m in models {
            for i in 0..m.dimension() {
                assert!(m.matrix.row(i).iter().any(MaxPlusScalar::is_finite));
            }
        }
    }
}
