//! CSV traces of iteration runs.
//!
//! One row per tick and processor, `t, processor, activated, value,
//! dist_to_fixpoint`, for ticks `1..=T`, then a summary row
//! `summary,,,converged_at=N,` (or `converged_at=none`).

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::iteration::Trajectory;

pub const TRACE_HEADER: [&str; 5] = ["t", "processor", "activated", "value", "dist_to_fixpoint"];

/// Renders a trajectory. `value(i, v)` formats processor `i`'s value and
/// `dist(x)` the distance of state `x` to the fixed point; without `dist`
/// the column stays empty.
pub fn write_trace<V, W>(
    out: W,
    traj: &Trajectory<V>,
    value: impl Fn(usize, &V) -> String,
    dist: Option<&dyn Fn(&[V]) -> String>,
) -> io::Result<()>
where
    V: Clone,
    W: Write,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for t in 1..=traj.ticks() {
        let state = traj.state(t);
        let d = dist.map(|f| f(state)).unwrap_or_default();
        for (i, v) in state.iter().enumerate() {
            let active = if traj.activated(t, i) { "1" } else { "0" };
            w.write_record([
                t.to_string().as_str(),
                &i.to_string(),
                active,
                &value(i, v),
                &d,
            ])?;
        }
    }
    let converged = match traj.converged_at() {
        Some(at) => format!("converged_at={at}"),
        None => "converged_at=none".to_string(),
    };
    w.write_record(["summary", "", "", converged.as_str(), ""])?;
    w.flush()
}

/// [`write_trace`] into a file at `path`.
pub fn emit_trace<V: Clone>(
    path: &Path,
    traj: &Trajectory<V>,
    value: impl Fn(usize, &V) -> String,
    dist: Option<&dyn Fn(&[V]) -> String>,
) -> io::Result<()> {
    write_trace(File::create(path)?, traj, value, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::{run_async, run_sync, DecomposedOperator, Schedule};

    fn halve() -> DecomposedOperator<u8> {
        DecomposedOperator::from_map(vec![vec![0, 1, 2, 3]], |x: &[u8]| vec![x[0] / 2])
    }

    fn render(traj: &Trajectory<u8>, with_dist: bool) -> String {
        let mut buf = Vec::new();
        let dist = |x: &[u8]| x[0].to_string();
        let d: Option<&dyn Fn(&[u8]) -> String> = if with_dist { Some(&dist) } else { None };
        write_trace(&mut buf, traj, |_, v| v.to_string(), d).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn sync_trace() {
        let traj = run_sync(&halve(), &[3], 10).unwrap();
        assert_eq!(
            render(&traj, true),
            "t,processor,activated,value,dist_to_fixpoint\n\
             1,0,1,1,1\n2,0,1,0,0\n3,0,1,0,0\nsummary,,,converged_at=2,\n"
        );
        let last_data = render(&traj, true)
            .lines()
            .rev()
            .nth(1)
            .unwrap()
            .to_string();
        assert!(last_data.ends_with(",0"));
        assert!(render(&traj, false).contains("\n1,0,1,1,\n"));
    }

    #[test]
    fn empty_horizon() {
        let schedule = Schedule::synchronous(1, 0).unwrap();
        let traj = run_async(&halve(), &[3], &schedule).unwrap();
        assert_eq!(
            render(&traj, true),
            "t,processor,activated,value,dist_to_fixpoint\nsummary,,,converged_at=none,\n"
        );
    }

    #[test]
    fn file_output() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let traj = run_sync(&halve(), &[2], 10).unwrap();
        emit_trace(&path, &traj, |_, v| v.to_string(), None).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.ends_with("summary,,,converged_at=2,\n"));
        assert!(emit_trace(
            &dir.path().join("missing/trace.csv"),
            &traj,
            |_, v| v.to_string(),
            None
        )
        .is_err());
    }
}
