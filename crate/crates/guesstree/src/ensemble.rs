//! Certificates for randomized tree families.
//!
//! A family `{(p_z, tree_z)}` induces, for every pair of inputs, the Gram
//! value `gram(x, y) = sum_z p_z [l_z(x) = l_z(y)]`, where `l_z` is the leaf
//! label member `z` gives. Tensoring each member's certificate vectors with
//! an orthonormal member register (scaled by `sqrt(p_z)`) yields vectors
//! satisfying the state-generation constraint
//!
//! ```text
//!   sum over j with x_j != y_j of <u_{x,j}, w_{y,j}>  =  1 - gram(x, y).
//! ```
//!
//! Cross-member terms vanish on the register, so the left side is just the
//! probability-weighted average of the members' pair sums — each of which
//! is exactly 0 or 1 — and for uniform families the whole check runs in
//! integers. A family that answers `f` correctly on at least 90% of members
//! for every input turns the state-generation solution into an evaluation
//! algorithm with constant success, which is what
//! [`EnsembleCertificate::success_probability`] certifies.

use num_rational::Ratio;

use crate::certificate::{CertError, Certificate, FamilyMode, VerifyMode, WeightSchedule};
use crate::metrics::TreeFamily;
use crate::model::{evaluate_path, FunctionSpec, Label};

/// One member's certificate plus its sampling probability.
pub struct MemberCertificate {
    pub name: String,
    pub prob: f64,
    pub certificate: Certificate,
    /// Leaf labels this member produces, aligned with the domain.
    pub labels: Vec<Label>,
}

/// A state-generation certificate for a whole randomized family.
pub struct EnsembleCertificate {
    members: Vec<MemberCertificate>,
    /// The target function's labels, aligned with the domain.
    target: Vec<Label>,
    uniform: bool,
    input_count: usize,
}

/// Result of a state-generation sweep.
#[derive(Clone, Debug)]
pub struct StateGenReport {
    pub pairs_checked: u64,
    pub max_residual: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// Whether residuals were computed over integers (uniform weights).
    pub exact: bool,
    pub mode: VerifyMode,
}

/// Per-input agreement of the family with its target function.
#[derive(Clone, Debug)]
pub struct SuccessReport {
    pub per_input: Vec<f64>,
    pub min: f64,
    pub argmin: usize,
    /// `min - 0.9`: nonnegative when the family meets the 90% floor that
    /// the evaluation reading of the certificate needs.
    pub margin: f64,
}

impl SuccessReport {
    pub fn meets_floor(&self) -> bool {
        self.margin >= -1e-12
    }
}

/// Probability-weighted norm sums.
#[derive(Clone, Debug)]
pub struct EnsembleObjective {
    pub value: f64,
    pub u_max: f64,
    pub w_max: f64,
    pub per_input: Vec<(f64, f64)>,
}

impl EnsembleCertificate {
    /// Builds one certificate per member against that member's *own* leaf
    /// labels (members may deviate from the target function), in a label
    /// space wide enough for everyone.
    pub fn build(
        family: &TreeFamily,
        f: &FunctionSpec,
        schedule: WeightSchedule,
        mode: FamilyMode,
    ) -> Result<EnsembleCertificate, CertError> {
        // Collect every member's labels first to size the shared space.
        let mut all_labels: Vec<Vec<Label>> = Vec::with_capacity(family.len());
        let mut m_total = f.m();
        for member in family.members() {
            let mut labels = Vec::with_capacity(f.len());
            for x in f.inputs() {
                let t = evaluate_path(member.tree.as_ref(), x)?;
                m_total = m_total.max(t.label + 1);
                labels.push(t.label);
            }
            all_labels.push(labels);
        }

        let mut members = Vec::with_capacity(family.len());
        for (member, labels) in family.members().iter().zip(all_labels) {
            let member_spec =
                FunctionSpec::new(f.n(), f.ell(), m_total, f.inputs().to_vec(), labels.clone())
                    .expect("member table over a valid domain");
            let certificate = Certificate::for_function(
                member.tree.as_ref(),
                &member_spec,
                schedule.clone(),
                mode,
            )?;
            members.push(MemberCertificate {
                name: member.name.clone(),
                prob: member.weight,
                certificate,
                labels,
            });
        }

        Ok(EnsembleCertificate {
            members,
            target: (0..f.len()).map(|i| f.label(i)).collect(),
            uniform: family.is_uniform(),
            input_count: f.len(),
        })
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn member(&self, z: usize) -> &MemberCertificate {
        &self.members[z]
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    /// `sum_z p_z [l_z(x) = l_z(y)]`.
    pub fn gram(&self, x: usize, y: usize) -> f64 {
        self.members
            .iter()
            .map(|m| {
                if m.labels[x] == m.labels[y] {
                    m.prob
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Left-hand side of the state-generation constraint for `(x, y)`.
    pub fn pair_sum(&self, x: usize, y: usize) -> f64 {
        self.members
            .iter()
            .map(|m| m.prob * m.certificate.pair_sum(x, y))
            .sum()
    }

    /// Exact residual numerator over `K` for uniform families: member pair
    /// sums and Gram entries are 0/1 integers, so
    /// `|pair_sum - (1 - gram)| = |agree + hit - K| / K`.
    fn residual_exact(&self, x: usize, y: usize) -> Ratio<i64> {
        let k = self.members.len() as i64;
        let mut hit = 0i64; // members whose pair sum is 1
        let mut agree = 0i64; // members with l_z(x) = l_z(y)
        for m in &self.members {
            if m.certificate.pair_sum(x, y) == 1.0 {
                hit += 1;
            }
            if m.labels[x] == m.labels[y] {
                agree += 1;
            }
        }
        Ratio::new((hit + agree - k).abs(), k)
    }

    fn residual_float(&self, x: usize, y: usize) -> f64 {
        (self.pair_sum(x, y) - (1.0 - self.gram(x, y))).abs()
    }

    /// Checks `pair_sum = 1 - gram` over ordered pairs.
    pub fn verify_state_generation(&self, mode: VerifyMode) -> StateGenReport {
        let n = self.input_count;
        let exact = self.uniform;
        let residual = |x: usize, y: usize| -> f64 {
            if exact {
                let r = self.residual_exact(x, y);
                *r.numer() as f64 / *r.denom() as f64
            } else {
                self.residual_float(x, y)
            }
        };
        let mut max_residual = 0.0f64;
        let mut worst = None;
        let mut pairs = 0u64;
        match &mode {
            VerifyMode::Exhaustive => {
                for x in 0..n {
                    for y in 0..n {
                        let r = residual(x, y);
                        pairs += 1;
                        if r > max_residual {
                            max_residual = r;
                            worst = Some((x, y));
                        }
                    }
                }
            }
            VerifyMode::Sampled { pairs: count, seed } => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                for _ in 0..*count {
                    let x = rng.gen_range(0..n);
                    let y = rng.gen_range(0..n);
                    let r = residual(x, y);
                    pairs += 1;
                    if r > max_residual {
                        max_residual = r;
                        worst = Some((x, y));
                    }
                }
            }
        }
        StateGenReport {
            pairs_checked: pairs,
            max_residual,
            worst_pair: worst,
            exact,
            mode,
        }
    }

    /// Per-input probability that a member reproduces the target label.
    pub fn success_probability(&self) -> SuccessReport {
        let mut per_input = vec![0.0f64; self.input_count];
        for m in &self.members {
            for (x, &l) in m.labels.iter().enumerate() {
                if l == self.target[x] {
                    per_input[x] += m.prob;
                }
            }
        }
        let (mut min, mut argmin) = (f64::INFINITY, 0);
        for (x, &p) in per_input.iter().enumerate() {
            if p < min {
                min = p;
                argmin = x;
            }
        }
        SuccessReport {
            per_input,
            min,
            argmin,
            margin: min - 0.9,
        }
    }

    /// Exact per-input success as a rational, for uniform families.
    pub fn success_exact(&self, x: usize) -> Ratio<i64> {
        assert!(self.uniform, "exact success needs uniform weights");
        let hits = self
            .members
            .iter()
            .filter(|m| m.labels[x] == self.target[x])
            .count() as i64;
        Ratio::new(hits, self.members.len() as i64)
    }

    /// Probability-weighted squared-norm sums and their maxima.
    pub fn objective(&self) -> EnsembleObjective {
        let mut per_input = vec![(0.0f64, 0.0f64); self.input_count];
        for m in &self.members {
            let obj = m.certificate.objective();
            for (acc, (u, w)) in per_input.iter_mut().zip(obj.per_input) {
                acc.0 += m.prob * u;
                acc.1 += m.prob * w;
            }
        }
        let mut u_max = 0.0f64;
        let mut w_max = 0.0f64;
        for &(u, w) in &per_input {
            u_max = u_max.max(u);
            w_max = w_max.max(w);
        }
        EnsembleObjective {
            value: u_max.max(w_max),
            u_max,
            w_max,
            per_input,
        }
    }

    /// The full Gram matrix, for spectral sanity checks.
    pub fn gram_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.input_count)
            .map(|x| (0..self.input_count).map(|y| self.gram(x, y)).collect())
            .collect()
    }
}
