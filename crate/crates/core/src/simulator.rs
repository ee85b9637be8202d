//! Event iteration `X(k+1) = A ⊗ X(k)` and departure timetables.

use std::collections::VecDeque;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::matrix::MaxPlusMatrix;
use crate::network::SyncModel;
use crate::scalar::{MaxPlusScalar, Rational};
use crate::spectral::{component_cycle_means, cyclicity};

/// Full history of a run: `steps[k]` is the column `X(k)`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTrajectory {
    pub model: SyncModel,
    pub steps: Vec<MaxPlusMatrix>,
    /// `departures[i][k]` is `x_i(k)`.
    pub departures: Vec<Vec<MaxPlusScalar>>,
}

impl EventTrajectory {
    pub fn x0(&self) -> &MaxPlusMatrix {
        &self.steps[0]
    }

    /// Number of iterations `K`.
    pub fn horizon(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn times(&self, state: usize) -> &[MaxPlusScalar] {
        &self.departures[state]
    }
}

/// Iterates the model `k_steps` times from `x0`.
pub fn run(model: &SyncModel, x0: &MaxPlusMatrix, k_steps: usize) -> Result<EventTrajectory> {
    let dim = model.dimension();
    if x0.dims() != (dim, 1) {
        return Err(Error::DimensionMismatch {
            op: "run",
            left: model.matrix.dims(),
            right: x0.dims(),
        });
    }
    if k_steps == 0 {
        return Err(Error::InvalidConfig("need at least one step".into()));
    }
    let mut steps = Vec::with_capacity(k_steps + 1);
    steps.push(x0.clone());
    for _ in 0..k_steps {
        let next = model.matrix.otimes(steps.last().expect("non-empty"))?;
        steps.push(next);
    }
    let departures = (0..dim)
        .map(|i| steps.iter().map(|x| x.get(i, 0).clone()).collect())
        .collect();
    Ok(EventTrajectory {
        model: model.clone(),
        steps,
        departures,
    })
}

/// Initial column for timetables starting at time 0: every physical bus
/// departs at 0 and artificial states start at bottom, so no event before
/// time 0 feeds a delayed term.
pub fn seed_for_zero_start(model: &SyncModel) -> MaxPlusMatrix {
    let values = (0..model.dimension())
        .map(|i| {
            if model.is_artificial(i) {
                MaxPlusScalar::Bottom
            } else {
                MaxPlusScalar::unit()
            }
        })
        .collect();
    MaxPlusMatrix::column(values).expect("model has at least one state")
}

/// Asymptotic rate of `state`: `(x(K) - x(K - c)) / c`, where `c` is the lcm
/// of the cyclicities of the cyclic components upstream of the state.
pub fn growth_rate(traj: &EventTrajectory, state: usize) -> Result<Rational> {
    let a = &traj.model.matrix;
    let dim = a.rows();
    if state >= dim {
        return Err(Error::Domain(format!("state {state} out of range")));
    }
    // Nodes that can reach `state`: j is a predecessor of i iff A_ij is finite.
    let mut upstream = vec![false; dim];
    upstream[state] = true;
    let mut queue = VecDeque::from([state]);
    while let Some(i) = queue.pop_front() {
        for j in 0..dim {
            if a.get(i, j).is_finite() && !upstream[j] {
                upstream[j] = true;
                queue.push_back(j);
            }
        }
    }
    let mut period = 0usize;
    for (comp, _) in component_cycle_means(a)? {
        if comp.iter().any(|&v| upstream[v]) {
            let c = cyclicity(&a.submatrix(&comp))?;
            period = if period == 0 { c } else { period.lcm(&c) };
        }
    }
    if period == 0 {
        return Err(Error::Domain(format!(
            "state {} is not reached by any cycle",
            traj.model.state_labels[state]
        )));
    }
    let k = traj.horizon();
    if k < period {
        return Err(Error::Domain(format!(
            "horizon {k} is shorter than the period {period}"
        )));
    }
    let times = traj.times(state);
    match (times[k].as_finite(), times[k - period].as_finite()) {
        (Some(late), Some(early)) => {
            Ok((late - early) / Rational::from_integer(BigInt::from(period)))
        }
        _ => Err(Error::Domain(format!(
            "state {} has no events near the horizon",
            traj.model.state_labels[state]
        ))),
    }
}

/// Options for [`write_timetable_csv`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Adds a `decimal` column with this many fractional digits.
    pub decimals: Option<usize>,
    /// Also lists the artificial `z` states.
    pub include_artificial: bool,
}

/// Writes `k,state,time[,decimal]` rows, ordered by `k` then state.
pub fn write_timetable_csv<W: Write>(
    traj: &EventTrajectory,
    opts: CsvOptions,
    out: &mut W,
) -> io::Result<()> {
    match opts.decimals {
        Some(_) => writeln!(out, "k,state,time,decimal")?,
        None => writeln!(out, "k,state,time")?,
    }
    let states: Vec<usize> = (0..traj.model.dimension())
        .filter(|&i| opts.include_artificial || !traj.model.is_artificial(i))
        .collect();
    for k in 0..=traj.horizon() {
        for &i in &states {
            let t = &traj.departures[i][k];
            let label = &traj.model.state_labels[i];
            match opts.decimals {
                Some(d) => writeln!(out, "{k},{label},{t},{}", t.to_decimal(d))?,
                None => writeln!(out, "{k},{label},{t}")?,
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_fast_loop, build_m1, build_m2, build_p1, build_p2, NetworkConfig};
    use crate::scalar::{int, ratio};

    fn cfg(t1: Rational, t2: Rational) -> NetworkConfig {
        NetworkConfig::decompose(t1, t2).unwrap()
    }

    fn x1_times(model: &SyncModel, events: usize) -> Vec<String> {
        let traj = run(model, &seed_for_zero_start(model), events - 1).unwrap();
        traj.times(0).iter().map(ToString::to_string).collect()
    }

    #[test]
    fn timetable_s2() {
        let c = cfg(int(3), ratio(26, 3));
        for l in [3, 4] {
            let p1 = build_p1(&c, l).unwrap();
            assert_eq!(x1_times(&p1, 6), ["0", "3", "6", "9", "12", "15"]);
        }
    }

    #[test]
    fn timetable_s3() {
        let p2 = build_p2(&cfg(int(3), ratio(26, 3)), 2).unwrap();
        assert_eq!(x1_times(&p2, 6), ["0", "3", "6", "35/3", "44/3", "53/3"]);
        let p2 = build_p2(&cfg(int(3), ratio(25, 3)), 2).unwrap();
        assert_eq!(x1_times(&p2, 6), ["0", "3", "6", "34/3", "43/3", "52/3"]);
    }

    #[test]
    fn seeds() {
        let p2 = build_p2(&cfg(int(3), ratio(25, 3)), 2).unwrap();
        let x0 = seed_for_zero_start(&p2);
        assert_eq!(x0.to_string(), "3 1\n0\n-inf\n-inf\n");
        let fast = build_fast_loop(2, int(1)).unwrap();
        let traj = run(&fast, &seed_for_zero_start(&fast), 3).unwrap();
        for i in 0..2 {
            let got: Vec<String> = traj.times(i).iter().map(ToString::to_string).collect();
            assert_eq!(got, ["0", "1", "2", "3"]);
        }
    }

    #[test]
    fn run_checks_dimensions() {
        let m2 = build_m2(&cfg(int(3), int(5)));
        let bad = MaxPlusMatrix::column(vec![MaxPlusScalar::unit(); 3]).unwrap();
        assert!(run(&m2, &bad, 4).is_err());
        assert!(run(&m2, &seed_for_zero_start(&m2), 0).is_err());
    }

    #[test]
    fn growth_rates() {
        let p2 = build_p2(&cfg(int(3), ratio(25, 3)), 2).unwrap();
        let traj = run(&p2, &seed_for_zero_start(&p2), 30).unwrap();
        assert_eq!(growth_rate(&traj, 0).unwrap(), ratio(34, 9));

        let p1 = build_p1(&cfg(int(3), ratio(25, 3)), 4).unwrap();
        let traj = run(&p1, &seed_for_zero_start(&p1), 30).unwrap();
        assert_eq!(growth_rate(&traj, 0).unwrap(), int(3));

        let fast = build_fast_loop(3, ratio(1, 2)).unwrap();
        let traj = run(&fast, &seed_for_zero_start(&fast), 30).unwrap();
        assert_eq!(growth_rate(&traj, 2).unwrap(), ratio(1, 2));

        let m1 = build_m1(&cfg(int(3), ratio(26, 3)));
        let traj = run(&m1, &seed_for_zero_start(&m1), 10).unwrap();
        assert_eq!(growth_rate(&traj, 0).unwrap(), int(3));
        assert_eq!(growth_rate(&traj, 1).unwrap(), ratio(26, 3));
        assert!(growth_rate(&traj, 2).is_err());
    }

    #[test]
    fn growth_rate_needs_a_cycle() {
        let model = SyncModel {
            kind: crate::network::ModelKind::M1,
            matrix: crate::matrix::mat(&[&["-inf", "-inf"], &["1", "-inf"]]),
            state_labels: vec!["x1".into(), "x2".into()],
        };
        let traj = run(&model, &seed_for_zero_start(&model), 4).unwrap();
        assert!(growth_rate(&traj, 1).is_err());
    }

    #[test]
    fn csv_output() {
        let p2 = build_p2(&cfg(int(3), ratio(25, 3)), 2).unwrap();
        let traj = run(&p2, &seed_for_zero_start(&p2), 3).unwrap();
        let mut buf = Vec::new();
        write_timetable_csv(&traj, CsvOptions::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "k,state,time\n0,x1,0\n1,x1,3\n2,x1,6\n3,x1,34/3\n"
        );
        let mut buf = Vec::new();
        let opts = CsvOptions {
            decimals: Some(2),
            include_artificial: true,
        };
        write_timetable_csv(&traj, opts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("k,state,time,decimal\n0,x1,0,0.00\n0,z2,-inf,-inf\n0,z1,-inf,-inf\n")
        );
        assert!(text.ends_with("3,x1,34/3,11.33\n3,z2,9,9.00\n3,z1,9,9.00\n"));
    }
}
