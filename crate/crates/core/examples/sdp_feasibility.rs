//! Solves a small LMI with the barrier solver and prints its iteration
//! trace. The problem asks for p with `2ap < 0` and `p >= 1`.

use esc_sat::sdp::{check_solution, LmiBlock, LmiProblem, Solver};
use nalgebra::DMatrix;

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

fn main() -> esc_sat::Result<()> {
    for a in [-1.0, 1.0] {
        let mut pb = LmiProblem::new(1);
        pb.add_block(LmiBlock::negative_definite(
            "lyapunov",
            scalar(0.0),
            vec![scalar(2.0 * a)],
        ))?;
        pb.add_block(LmiBlock::positive_semidefinite(
            "floor",
            scalar(-1.0),
            vec![scalar(1.0)],
        ))?;
        let mut solver = Solver::default();
        let sol = solver.solve(&pb)?;
        println!(
            "a = {a:+}: {} after {} iterations, slack {:.3e}, p = {:.4}",
            sol.status, sol.iterations, sol.slack, sol.x[0]
        );
        for c in check_solution(&pb, &sol.x)? {
            println!("    {:<9} extreme eigenvalue {:+.3e}", c.label, c.extreme);
        }
        if a < 0.0 {
            let mut csv = Vec::new();
            solver.write_trace_csv(&mut csv)?;
            let text = String::from_utf8_lossy(&csv);
            for line in text.lines().take(6) {
                println!("    {line}");
            }
        }
    }
    Ok(())
}
