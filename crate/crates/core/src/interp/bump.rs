use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// `2a^3 - 3a^2 + 1` on `[0, 1]`, zero beyond.
    #[default]
    CubicSmoothstep,
}

/// Radial profile `g: R+ -> R` with `g(0) = 1` and `g(a) = 0` for `a >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub kind: BumpKind,
    /// Certified `max |g'|`.
    pub lip_g: f64,
}

impl Default for BumpFunction {
    fn default() -> Self {
        Self::cubic()
    }
}

impl BumpFunction {
    pub fn cubic() -> Self {
        // |g'(a)| = 6a(1 - a), maximal at a = 1/2
        Self {
            kind: BumpKind::CubicSmoothstep,
            lip_g: 1.5,
        }
    }

    pub fn value(&self, a: f64) -> f64 {
        match self.kind {
            BumpKind::CubicSmoothstep => {
                if a >= 1.0 {
                    0.0
                } else {
                    let a = a.max(0.0);
                    (2.0 * a - 3.0) * a * a + 1.0
                }
            }
        }
    }

    pub fn derivative(&self, a: f64) -> f64 {
        match self.kind {
            BumpKind::CubicSmoothstep => {
                if !(0.0..1.0).contains(&a) {
                    0.0
                } else {
                    6.0 * a * (a - 1.0)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let g = BumpFunction::cubic();
        assert_eq!(g.value(0.0), 1.0);
        assert_eq!(g.value(1.0), 0.0);
        assert_eq!(g.value(3.5), 0.0);
        assert_eq!(g.value(0.5), 0.5);
    }

    #[test]
    fn lip_matches_grid_maximum() {
        let g = BumpFunction::cubic();
        let steps = 100_000;
        let grid_max = (0..=steps)
            .map(|i| g.derivative(i as f64 / steps as f64).abs())
            .fold(0.0, f64::max);
        assert!((grid_max - 1.5).abs() < 1e-12);
        // difference quotients never exceed lip_g
        let mut prev = g.value(0.0);
        for i in 1..=steps {
            let cur = g.value(i as f64 / steps as f64);
            assert!((cur - prev).abs() * steps as f64 <= g.lip_g + 1e-9);
            assert!(cur <= prev, "not monotone at step {i}");
            prev = cur;
        }
    }
}
