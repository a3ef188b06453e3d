//! Default numerical tolerances, gathered in one overridable record.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Minimal distance of an evaluation point from a pole of `S2`.
    pub pole_distance: f64,
    /// Closure tolerance for the `β ↦ -conj(β)` pole-set symmetry.
    pub pole_closure: f64,
    /// Allowed deviation of `|S2(0)|` from one.
    pub sign_class: f64,
    /// Relative change that stops the `‖S2‖` boundary refinement.
    pub norm_refinement: f64,
    /// Distance to the `|θ| → ∞` limit that stops the θ-range extension.
    pub norm_tail: f64,
    /// Maximal step of the phase unwrapping path.
    pub phase_step: f64,
    /// Relative tolerance of the adaptive quadrature.
    pub quadrature: f64,
    /// Relative change that stops the trace-norm grid refinement.
    pub trace_refinement: f64,
    /// Bisection tolerance in `s` for `s_min`.
    pub bisection: f64,
    /// Support threshold for wavefunction entries.
    pub support: f64,
    /// Threshold for numerical rank computations (relative to the largest singular value).
    pub rank: f64,
    /// Symmetry tolerance accepted by the Møller maps.
    pub symmetric_input: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pole_distance: 1e-12,
            pole_closure: 1e-12,
            sign_class: 1e-10,
            norm_refinement: 1e-6,
            norm_tail: 1e-8,
            phase_step: 0.01,
            quadrature: 1e-12,
            trace_refinement: 1e-8,
            bisection: 1e-6,
            support: 1e-14,
            rank: 1e-8,
            symmetric_input: 1e-10,
        }
    }
}
