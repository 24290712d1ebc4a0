//! Minimal C interface over the Clarabel interior-point solver.
//!
//! Problem form (Clarabel native):
//!   minimize    q'x
//!   subject to  A x + s = b,  s in K
//! where K is a product of cones given as (tag, dim) pairs in order.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

pub const CONE_ZERO: i32 = 0;
pub const CONE_NONNEG: i32 = 1;
pub const CONE_SOC: i32 = 2;
pub const CONE_PSD_TRIANGLE: i32 = 3;

pub const STATUS_OPTIMAL: i32 = 0;
pub const STATUS_PRIMAL_INFEASIBLE: i32 = 1;
pub const STATUS_DUAL_INFEASIBLE: i32 = 2;
pub const STATUS_ALMOST_OPTIMAL: i32 = 3;
pub const STATUS_NUMERICAL_FAILURE: i32 = 4;

#[repr(C)]
pub struct ConeSpec {
    pub tag: i32,
    pub dim: usize, // matrix side length for PSD_TRIANGLE, cone dimension otherwise
}

/// Solves one conic program. Returns 0 on success (including infeasible
/// certificates), nonzero on malformed input. `x_out` must hold `n` doubles.
///
/// # Safety
/// All pointers must be valid for the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn pushplan_clarabel_solve(
    n: usize,
    m: usize,
    a_colptr: *const usize,  // n+1 entries
    a_rowval: *const usize,  // nnz entries
    a_nzval: *const f64,     // nnz entries
    nnz: usize,
    q: *const f64,           // n entries
    b: *const f64,           // m entries
    cones: *const ConeSpec,
    ncones: usize,
    tol: f64,
    max_iter: u32,
    verbose: bool,
    x_out: *mut f64,
    obj_out: *mut f64,
    status_out: *mut i32,
    iterations_out: *mut u32,
) -> i32 {
    let colptr = std::slice::from_raw_parts(a_colptr, n + 1).to_vec();
    let rowval = std::slice::from_raw_parts(a_rowval, nnz).to_vec();
    let nzval = std::slice::from_raw_parts(a_nzval, nnz).to_vec();
    let q = std::slice::from_raw_parts(q, n).to_vec();
    let b = std::slice::from_raw_parts(b, m).to_vec();
    let cone_specs = std::slice::from_raw_parts(cones, ncones);

    let mut k: Vec<SupportedConeT<f64>> = Vec::with_capacity(ncones);
    let mut cone_total = 0usize;
    for c in cone_specs {
        cone_total += match c.tag {
            CONE_ZERO => {
                k.push(SupportedConeT::ZeroConeT(c.dim));
                c.dim
            }
            CONE_NONNEG => {
                k.push(SupportedConeT::NonnegativeConeT(c.dim));
                c.dim
            }
            CONE_SOC => {
                k.push(SupportedConeT::SecondOrderConeT(c.dim));
                c.dim
            }
            CONE_PSD_TRIANGLE => {
                k.push(SupportedConeT::PSDTriangleConeT(c.dim));
                c.dim * (c.dim + 1) / 2
            }
            _ => return 1,
        };
    }
    if cone_total != m {
        return 2;
    }

    let a = CscMatrix::new(m, n, colptr, rowval, nzval);
    let p = CscMatrix::<f64>::zeros((n, n));

    let settings = match DefaultSettingsBuilder::default()
        .verbose(verbose)
        .max_iter(max_iter)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .build()
    {
        Ok(s) => s,
        Err(_) => return 3,
    };

    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &k, settings);
    solver.solve();

    let status = match solver.solution.status {
        SolverStatus::Solved => STATUS_OPTIMAL,
        SolverStatus::PrimalInfeasible => STATUS_PRIMAL_INFEASIBLE,
        SolverStatus::DualInfeasible => STATUS_DUAL_INFEASIBLE,
        SolverStatus::AlmostSolved => STATUS_ALMOST_OPTIMAL,
        SolverStatus::AlmostPrimalInfeasible => STATUS_PRIMAL_INFEASIBLE,
        SolverStatus::AlmostDualInfeasible => STATUS_DUAL_INFEASIBLE,
        _ => STATUS_NUMERICAL_FAILURE,
    };

    *status_out = status;
    *obj_out = solver.solution.obj_val;
    *iterations_out = solver.solution.iterations;
    let xs = std::slice::from_raw_parts_mut(x_out, n);
    if solver.solution.x.len() == n {
        xs.copy_from_slice(&solver.solution.x);
    } else {
        for v in xs.iter_mut() {
            *v = f64::NAN;
        }
    }
    0
}
