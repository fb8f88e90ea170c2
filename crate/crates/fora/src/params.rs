use crate::error::{ForaError, Result};

/// Accuracy/failure parameters of an approximate PPR query: for every node
/// with true score above `delta`, the estimate is within relative error
/// `epsilon` with probability at least `1 - p_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub p_f: f64,
}

impl QueryParams {
    /// Validates all fields. `alpha`, `epsilon`, `delta`, and `p_f` must lie
    /// strictly inside (0, 1); degenerate `delta >= 1` or `epsilon >= 1`
    /// would make the guarantee vacuous and are rejected.
    pub fn new(alpha: f64, epsilon: f64, delta: f64, p_f: f64) -> Result<Self> {
        let check = |name: &'static str, value: f64| -> Result<()> {
            if value.is_finite() && value > 0.0 && value < 1.0 {
                Ok(())
            } else {
                Err(ForaError::InvalidParameter {
                    name,
                    value,
                    expected: "a value strictly inside (0, 1)",
                })
            }
        };
        check("alpha", alpha)?;
        check("epsilon", epsilon)?;
        check("delta", delta)?;
        check("p_f", p_f)?;
        Ok(Self {
            alpha,
            epsilon,
            delta,
            p_f,
        })
    }

    /// Conventional defaults for a graph with `n` nodes: alpha 0.2,
    /// epsilon 0.5, delta 1/n, p_f 1/n.
    pub fn defaults_for(n: usize) -> Result<Self> {
        let inv_n = 1.0 / n as f64;
        Self::new(0.2, 0.5, inv_n, inv_n)
    }
}
