//! The continuous hard-constraint point process and its approximability conditions.

use serde::Serialize;

use crate::error::{Error, Result};

/// The cube `[0, ℓ)^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    dimension: usize,
    side_length: f64,
}

impl Region {
    pub fn new(dimension: usize, side_length: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(Error::invalid("side_length", format!("must be a positive finite number, got {side_length}")));
        }
        Ok(Region { dimension, side_length })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn volume(&self) -> f64 {
        self.side_length.powi(self.dimension as i32)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dimension && point.iter().all(|&c| (0.0..self.side_length).contains(&c))
    }
}

/// Symmetric `q × q` matrix of minimum pair distances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteractionMatrix {
    q: usize,
    entries: Vec<f64>,
}

impl InteractionMatrix {
    /// Builds from row-major entries.
    pub fn new(q: usize, entries: Vec<f64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("interaction", "needs at least one particle type"));
        }
        if entries.len() != q * q {
            return Err(Error::invalid(
                "interaction.matrix",
                format!("expected {} entries for {q} types, got {}", q * q, entries.len()),
            ));
        }
        for i in 0..q {
            for j in 0..q {
                let v = entries[i * q + j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(
                        format!("interaction.matrix[{i}][{j}]"),
                        format!("must be a non-negative finite number, got {v}"),
                    ));
                }
                if v != entries[j * q + i] {
                    return Err(Error::invalid(
                        format!("interaction.matrix[{i}][{j}]"),
                        format!("matrix is not symmetric: {v} vs {}", entries[j * q + i]),
                    ));
                }
            }
        }
        Ok(InteractionMatrix { q, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let q = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != q {
                return Err(Error::invalid(
                    format!("interaction.matrix[{i}]"),
                    format!("row has {} entries, expected {q}", row.len()),
                ));
            }
        }
        Self::new(q, rows.concat())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.q + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Smallest strictly positive entry, `+∞` when all entries vanish.
    pub fn lambda_min(&self) -> f64 {
        self.entries
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_unconstrained(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Fugacities(Vec<f64>);

impl Fugacities {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    format!("types[{i}].fugacity"),
                    format!("must be a non-negative finite number, got {v}"),
                ));
            }
        }
        Ok(Fugacities(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// A hard-constraint point process `(V, Λ, λ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSpec {
    region: Region,
    interaction: InteractionMatrix,
    fugacities: Fugacities,
}

impl ModelSpec {
    pub fn new(region: Region, interaction: InteractionMatrix, fugacities: Fugacities) -> Result<Self> {
        if interaction.q() != fugacities.len() {
            return Err(Error::invalid(
                "types",
                format!(
                    "{} fugacities given but the interaction matrix has {} types",
                    fugacities.len(),
                    interaction.q()
                ),
            ));
        }
        Ok(ModelSpec { region, interaction, fugacities })
    }

    /// Single-type hard spheres of radius `r` (interaction distance `2r`).
    pub fn hard_sphere(d: usize, side_length: f64, r: f64, fugacity: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid("interaction.radius", format!("must be non-negative, got {r}")));
        }
        Self::new(
            Region::new(d, side_length)?,
            InteractionMatrix::new(1, vec![2.0 * r])?,
            Fugacities::new(vec![fugacity])?,
        )
    }

    /// Widom–Rowlinson mixture: equal types never interact, types `i ≠ j`
    /// keep distance `r_i + r_j`.
    pub fn widom_rowlinson(d: usize, side_length: f64, radii: &[f64], fugacities: &[f64]) -> Result<Self> {
        let q = radii.len();
        for (i, &r) in radii.iter().enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::invalid(format!("interaction.radii[{i}]"), format!("must be non-negative, got {r}")));
            }
        }
        let mut entries = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..q {
                if i != j {
                    entries[i * q + j] = radii[i] + radii[j];
                }
            }
        }
        Self::new(
            Region::new(d, side_length)?,
            InteractionMatrix::new(q, entries)?,
            Fugacities::new(fugacities.to_vec())?,
        )
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn interaction(&self) -> &InteractionMatrix {
        &self.interaction
    }

    pub fn fugacities(&self) -> &Fugacities {
        &self.fugacities
    }

    pub fn dimension(&self) -> usize {
        self.region.dimension
    }

    pub fn q(&self) -> usize {
        self.interaction.q
    }

    pub fn volume(&self) -> f64 {
        self.region.volume()
    }

    /// Same process with other fugacities.
    pub fn with_fugacities(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.region.clone(), self.interaction.clone(), Fugacities::new(values)?)
    }

    pub fn volume_exclusion_matrix(&self) -> VolumeExclusionMatrix {
        volume_exclusion_matrix(self)
    }
}

/// `Θ(i, j) = vol(B_{Λ(i,j)})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeExclusionMatrix {
    q: usize,
    entries: Vec<f64>,
}

impl VolumeExclusionMatrix {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.q + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Induced 1-norm (maximum absolute row sum; the matrix is symmetric).
    pub fn l1_norm(&self) -> f64 {
        self.entries
            .chunks(self.q)
            .map(|row| row.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Lebesgue volume of a `d`-ball of radius `r`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    unit_ball_volume(d) * r.powi(d as i32)
}

fn unit_ball_volume(d: usize) -> f64 {
    // V_d = V_{d-2} * 2π / d with V_0 = 1, V_1 = 2
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

pub fn volume_exclusion_matrix(model: &ModelSpec) -> VolumeExclusionMatrix {
    let d = model.dimension();
    let entries = model
        .interaction
        .entries
        .iter()
        .map(|&l| if l == 0.0 { 0.0 } else { ball_volume(d, l) })
        .collect();
    VolumeExclusionMatrix { q: model.q(), entries }
}

/// `ln` of the trivial bound `Z ≤ exp(Σ_i λ(i) vol(V))`.
pub fn log_z_upper_bound(model: &ModelSpec) -> f64 {
    model.fugacities.sum() * model.volume()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformConditionReport {
    pub satisfied: bool,
    /// `λ_max`
    pub lhs: f64,
    /// `e / ‖Θ‖₁`
    pub rhs: f64,
}

impl UniformConditionReport {
    pub fn describe(&self) -> String {
        let rel = if self.satisfied { "<" } else { "≥" };
        let verdict = if self.satisfied { "holds" } else { "fails" };
        format!("condition λ_max < e/‖Θ‖₁ {verdict}: {} {rel} {}", self.lhs, self.rhs)
    }
}

/// Checks `λ_max < e / ‖Θ‖₁`.
pub fn check_uniform_condition(model: &ModelSpec) -> Result<UniformConditionReport> {
    let norm = volume_exclusion_matrix(model).l1_norm();
    if norm == 0.0 {
        return Err(Error::Unconstrained);
    }
    let lhs = model.fugacities.lambda_max();
    let rhs = std::f64::consts::E / norm;
    Ok(UniformConditionReport { satisfied: lhs < rhs, lhs, rhs })
}

/// Outcome of the clique-condition search.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CliqueCondition {
    /// `witness(i) > Σ_j Θ(i,j) witness(j) λ(j)` holds for all `i`.
    Feasible { witness: Vec<f64>, spectral_radius: f64 },
    /// No witness was found. This does not prove that none exists.
    NotCertified { spectral_radius: f64 },
}

impl CliqueCondition {
    pub fn witness(&self) -> Option<&[f64]> {
        match self {
            CliqueCondition::Feasible { witness, .. } => Some(witness),
            CliqueCondition::NotCertified { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, CliqueCondition::Feasible { .. })
    }
}

const CLIQUE_SLACK: f64 = 1e-9;
const POWER_ITERATIONS: usize = 10_000;

/// Searches for `f > 0` with `f(i) > Σ_j Θ(i,j) f(j) λ(j)` for every type `i`.
///
/// Such `f` exists iff the spectral radius of `M(i,j) = Θ(i,j) λ(j)` is below
/// one, in which case `f = (I - M)^{-1} 1` works. The candidate is verified
/// directly with a relative slack before it is returned.
pub fn check_clique_condition(model: &ModelSpec) -> CliqueCondition {
    let q = model.q();
    let theta = volume_exclusion_matrix(model);
    let lambda = model.fugacities.values();
    let m: Vec<f64> = (0..q * q).map(|k| theta.entries[k] * lambda[k % q]).collect();
    let spectral_radius = spectral_radius(&m, q);

    let candidate = if q == 2 && theta.get(0, 0) == 0.0 && theta.get(1, 1) == 0.0 {
        Some(two_type_witness(m[1], m[2]))
    } else {
        solve_shifted(&m, q)
    };

    match candidate {
        Some(f) if certifies(&m, q, &f) => CliqueCondition::Feasible { witness: f, spectral_radius },
        _ => CliqueCondition::NotCertified { spectral_radius },
    }
}

/// Witness for two types with no self-interaction; `b = Θ(1,2)λ(2)`, `a = Θ(2,1)λ(1)`.
fn two_type_witness(b: f64, a: f64) -> Vec<f64> {
    let p = a * b;
    let f2 = if p > 0.0 {
        let beta = (1.0 / p - 1.0) / 2.0;
        (1.0 + beta) * a
    } else if a > 0.0 {
        2.0 * a
    } else if b > 0.0 {
        1.0 / (2.0 * b)
    } else {
        1.0
    };
    vec![1.0, f2]
}

fn certifies(m: &[f64], q: usize, f: &[f64]) -> bool {
    (0..q).all(|i| {
        let mf: f64 = (0..q).map(|j| m[i * q + j] * f[j]).sum();
        f[i].is_finite() && f[i] > 0.0 && f[i] > (1.0 + CLIQUE_SLACK) * mf
    })
}

/// Solves `(I - M) f = 1` by Gaussian elimination with partial pivoting.
fn solve_shifted(m: &[f64], q: usize) -> Option<Vec<f64>> {
    let mut a: Vec<f64> = (0..q * q)
        .map(|k| if k / q == k % q { 1.0 - m[k] } else { -m[k] })
        .collect();
    let mut b = vec![1.0; q];
    for col in 0..q {
        let pivot = (col..q).max_by(|&x, &y| a[x * q + col].abs().total_cmp(&a[y * q + col].abs()))?;
        if a[pivot * q + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..q {
                a.swap(pivot * q + k, col * q + k);
            }
            b.swap(pivot, col);
        }
        for row in col + 1..q {
            let factor = a[row * q + col] / a[col * q + col];
            if factor != 0.0 {
                for k in col..q {
                    a[row * q + k] -= factor * a[col * q + k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut f = vec![0.0; q];
    for row in (0..q).rev() {
        let s: f64 = (row + 1..q).map(|k| a[row * q + k] * f[k]).sum();
        f[row] = (b[row] - s) / a[row * q + row];
    }
    Some(f)
}

/// Power-iteration estimate of the spectral radius of a non-negative matrix.
fn spectral_radius(m: &[f64], q: usize) -> f64 {
    if m.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    // A small positive shift keeps the iteration from oscillating on
    // bipartite (periodic) patterns such as Widom–Rowlinson.
    let shift = 1.0;
    let mut x = vec![1.0 / q as f64; q];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let y: Vec<f64> = (0..q)
            .map(|i| shift * x[i] + (0..q).map(|j| m[i * q + j] * x[j]).sum::<f64>())
            .collect();
        let norm: f64 = y.iter().sum();
        let next = norm - shift;
        x = y.iter().map(|v| v / norm).collect();
        if (next - estimate).abs() <= 1e-14 * next.abs().max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}
