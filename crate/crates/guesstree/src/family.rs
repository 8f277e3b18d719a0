//! Paired vector families with unit cross-overlap.
//!
//! For an index set of size `N` this builds two families of real vectors
//! `mu_0..mu_{N-1}` and `nu_0..nu_{N-1}` in dimension `N` satisfying
//!
//! * `<mu_i, nu_j> = 1 - delta_{ij}`  (zero on the diagonal, one off it),
//! * `|mu_i|^2 = |nu_j|^2 = 2(N-1)/N <= 2`.
//!
//! Certificate vectors tensor one family indexed by the blocks at a tree
//! vertex with another indexed by output labels; the two identities above
//! are the only facts the feasibility argument needs, so inner products can
//! be evaluated in closed form without touching coordinates. The dense
//! coordinates exist for oracle cross-checks.

/// The `mu`/`nu` pair family for an index set of size `N`.
///
/// `N = 1` degenerates to the zero pair: a single index can never differ
/// from itself, so the cross-overlap is identically zero and the zero vector
/// realizes it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossFamily {
    n: usize,
    theta: f64,
    scale: f64,
}

impl CrossFamily {
    /// Builds the family for index-set size `n >= 1`.
    pub fn new(n: usize) -> CrossFamily {
        assert!(n >= 1, "family needs a nonempty index set");
        if n == 1 {
            return CrossFamily {
                n,
                theta: 0.0,
                scale: 0.0,
            };
        }
        let nf = n as f64;
        // theta^2 = 1/2 - sqrt(n-1)/n, nonnegative because (n-2)^2 >= 0.
        let theta_sq = (0.5 - (nf - 1.0).sqrt() / nf).max(0.0);
        CrossFamily {
            n,
            theta: theta_sq.sqrt(),
            scale: (2.0 * (nf - 1.0) / nf).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Squared norm of every vector in either family: `2(N-1)/N`.
    pub fn norm_sq(&self) -> f64 {
        self.scale * self.scale
    }

    /// Closed-form `<mu_i, nu_j>`: `1 - delta_{ij}` for `N >= 2`, `0` for `N = 1`.
    pub fn cross_inner(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        if self.n == 1 || i == j {
            0.0
        } else {
            1.0
        }
    }

    /// Dense coordinates of `mu_i`.
    pub fn mu(&self, i: usize) -> Vec<f64> {
        assert!(i < self.n);
        if self.n == 1 {
            return vec![0.0];
        }
        let off =
            self.scale * (1.0 - self.theta * self.theta).sqrt() / ((self.n as f64) - 1.0).sqrt();
        let mut v = vec![off; self.n];
        v[i] = -self.theta * self.scale;
        v
    }

    /// Dense coordinates of `nu_i`.
    pub fn nu(&self, i: usize) -> Vec<f64> {
        assert!(i < self.n);
        if self.n == 1 {
            return vec![0.0];
        }
        let off = self.scale * self.theta / ((self.n as f64) - 1.0).sqrt();
        let mut v = vec![off; self.n];
        v[i] = self.scale * (1.0 - self.theta * self.theta).sqrt();
        v
    }
}

/// Squared norm `2(N-1)/N` as a plain function of the index-set size, for
/// callers that never materialize a family.
pub fn norm_sq_for(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        let nf = n as f64;
        2.0 * (nf - 1.0) / nf
    }
}
