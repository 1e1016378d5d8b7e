//! Two coupled SQUIDs: eigenpairs, matrix elements and computational states.

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::fgh::{kinetic_matrix, solve_1d, Spectrum1D};
use super::grid::FghGrid;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{find_wells, potential_2d, ModelScales, WellLabel, WorkingParams};

pub const DEFAULT_STATES: usize = 20;
pub const DEFAULT_BASIS_STATES: usize = 10;
pub const DEFAULT_DOMINANCE_THRESHOLD: f64 = 0.5;
pub const MAX_BOUNDARY_AMPLITUDE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Dense eigensolve of the N²×N² grid Hamiltonian.
    Full2d,
    /// Hamiltonian projected on products of the lowest 1D eigenstates.
    #[default]
    Product,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full2d" => Ok(Backend::Full2d),
            "product" => Ok(Backend::Product),
            other => Err(Error::config("backend", format!("expected full2d or product, got `{other}`"))),
        }
    }
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Full2d => "full2d",
            Backend::Product => "product",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectroOptions {
    pub grid: FghGrid,
    pub states: usize,
    pub backend: Backend,
    pub basis_states: usize,
    pub dominance_threshold: f64,
}

impl Default for SpectroOptions {
    fn default() -> Self {
        SpectroOptions {
            grid: FghGrid::default(),
            states: DEFAULT_STATES,
            backend: Backend::Product,
            basis_states: DEFAULT_BASIS_STATES,
            dominance_threshold: DEFAULT_DOMINANCE_THRESHOLD,
        }
    }
}

/// Computational basis states in the order |00⟩, |01⟩, |10⟩, |11⟩; bit 0 is
/// the low-flux well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CompState {
    S00,
    S01,
    S10,
    S11,
}

impl CompState {
    pub const ALL: [CompState; 4] = [CompState::S00, CompState::S01, CompState::S10, CompState::S11];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn well(self) -> WellLabel {
        WellLabel::ALL[self.index()]
    }

    pub fn ket(self) -> &'static str {
        ["|00>", "|01>", "|10>", "|11>"][self.index()]
    }

    pub fn bits(self) -> &'static str {
        ["00", "01", "10", "11"][self.index()]
    }

    /// The state the CNOT drive is meant to swap with, if any.
    pub fn cnot_partner(self) -> Option<CompState> {
        match self {
            CompState::S10 => Some(CompState::S11),
            CompState::S11 => Some(CompState::S10),
            _ => None,
        }
    }
}

impl std::str::FromStr for CompState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('|').trim_end_matches('>');
        match t {
            "00" => Ok(CompState::S00),
            "01" => Ok(CompState::S01),
            "10" => Ok(CompState::S10),
            "11" => Ok(CompState::S11),
            _ => Err(Error::config("initial", format!("expected one of 00, 01, 10, 11, got `{s}`"))),
        }
    }
}

/// Spectroscopic data of the coupled qubits at one working point.
#[derive(Debug, Clone)]
pub struct SpectroTable {
    pub wp: WorkingParams,
    pub rho: f64,
    /// K lowest eigenenergies, ascending, ħω_LC.
    pub energies: Vec<f64>,
    /// (m|x1|n).
    pub x1: Mat<f64>,
    /// (m|x2|n).
    pub x2: Mat<f64>,
    /// O[m,n] = ρ (m|(x2 − x_e2) + κ(x1 − x_e1)|n): drive coupling per unit x_m.
    pub coupling: Mat<f64>,
    /// Probability mass of each state in the LL, LH, HL, HH quadrants.
    pub well_weights: Vec<[f64; 4]>,
    /// Eigenstate index of |00⟩, |01⟩, |10⟩, |11⟩.
    pub computational: Option<[usize; 4]>,
    pub saddle: [f64; 2],
}

impl SpectroTable {
    /// Table with prescribed energies and coupling, for model studies.
    pub fn synthetic(energies: Vec<f64>, coupling: Mat<f64>, rho: f64, computational: Option<[usize; 4]>) -> Self {
        let k = energies.len();
        assert_eq!(coupling.nrows(), k);
        assert_eq!(coupling.ncols(), k);
        SpectroTable {
            wp: WorkingParams { x_e1: 0.5, x_e2: 0.5, kappa: 0.0 },
            rho,
            energies,
            x1: Mat::zeros(k, k),
            x2: Mat::zeros(k, k),
            coupling,
            well_weights: vec![[0.25; 4]; k],
            computational,
            saddle: [0.5, 0.5],
        }
    }

    pub fn states(&self) -> usize {
        self.energies.len()
    }

    pub fn computational_map(&self) -> Result<[usize; 4]> {
        self.computational.ok_or(Error::ComputationalBasisUndefined { well: "any", threshold: f64::NAN })
    }

    pub fn index_of(&self, c: CompState) -> Result<usize> {
        Ok(self.computational_map()?[c.index()])
    }

    pub fn comp_energy(&self, c: CompState) -> Result<f64> {
        Ok(self.energies[self.index_of(c)?])
    }

    /// ΔẼ_ij = |Ẽ_j − Ẽ_i| between computational states.
    pub fn comp_spacing(&self, a: CompState, b: CompState) -> Result<f64> {
        Ok((self.comp_energy(b)? - self.comp_energy(a)?).abs())
    }

    /// CNOT drive frequency ΔẼ_34.
    pub fn cnot_frequency(&self) -> Result<f64> {
        self.comp_spacing(CompState::S10, CompState::S11)
    }

    /// Spacings (1,2),(1,3),(1,4),(2,3),(2,4),(3,4).
    pub fn comp_spacings(&self) -> Result<[f64; 6]> {
        use CompState::*;
        Ok([
            self.comp_spacing(S00, S01)?,
            self.comp_spacing(S00, S10)?,
            self.comp_spacing(S00, S11)?,
            self.comp_spacing(S01, S10)?,
            self.comp_spacing(S01, S11)?,
            self.comp_spacing(S10, S11)?,
        ])
    }

    /// Dominant quadrant of each state.
    pub fn labels(&self) -> Vec<WellLabel> {
        self.well_weights
            .iter()
            .map(|w| {
                let mut best = 0;
                for q in 1..4 {
                    if w[q] > w[best] {
                        best = q;
                    }
                }
                WellLabel::ALL[best]
            })
            .collect()
    }
}

/// Lowest state whose weight in each well reaches the threshold.
fn computational_from_weights(weights: &[[f64; 4]], threshold: f64) -> Result<[usize; 4]> {
    let mut map = [0usize; 4];
    for (q, label) in WellLabel::ALL.iter().enumerate() {
        map[q] = weights
            .iter()
            .position(|w| w[q] >= threshold)
            .ok_or(Error::ComputationalBasisUndefined { well: label.name(), threshold })?;
    }
    for a in 0..4 {
        for b in a + 1..4 {
            if map[a] == map[b] {
                return Err(Error::ComputationalBasisUndefined { well: WellLabel::ALL[b].name(), threshold });
            }
        }
    }
    Ok(map)
}

/// Eigenpairs and matrix elements, requiring a well-defined computational basis.
pub fn solve_coupled(s: &ModelScales, wp: &WorkingParams, opts: &SpectroOptions) -> Result<SpectroTable> {
    let mut table = spectrum(s, wp, opts, true)?;
    table.computational = Some(computational_from_weights(&table.well_weights, opts.dominance_threshold)?);
    Ok(table)
}

/// Like [`solve_coupled`] but leaves `computational` as `None` when the
/// states are too delocalised to label. Potentials without four wells are
/// accepted too; their quadrants are split at the bias point.
pub fn solve_spectrum(s: &ModelScales, wp: &WorkingParams, opts: &SpectroOptions) -> Result<SpectroTable> {
    spectrum(s, wp, opts, false)
}

fn spectrum(s: &ModelScales, wp: &WorkingParams, opts: &SpectroOptions, four_wells: bool) -> Result<SpectroTable> {
    wp.validate()?;
    let saddle = match find_wells(wp, s) {
        Ok(wells) => {
            opts.grid.check_wells(&wells)?;
            wells.saddle
        }
        Err(Error::FourWellLost { .. }) if !four_wells => [wp.x_e1, wp.x_e2],
        Err(e) => return Err(e),
    };
    let mut table = match opts.backend {
        Backend::Full2d => solve_full2d(s, wp, opts, saddle)?,
        Backend::Product => solve_product(s, wp, opts, saddle)?,
    };
    table.computational = computational_from_weights(&table.well_weights, opts.dominance_threshold).ok();
    Ok(table)
}

fn coupling_from_positions(x1: &Mat<f64>, x2: &Mat<f64>, wp: &WorkingParams, rho: f64) -> Mat<f64> {
    let k = x1.nrows();
    Mat::from_fn(k, k, |m, n| {
        let delta = if m == n { 1.0 } else { 0.0 };
        rho * ((x2[(m, n)] - wp.x_e2 * delta) + wp.kappa * (x1[(m, n)] - wp.x_e1 * delta))
    })
}

fn solve_product(s: &ModelScales, wp: &WorkingParams, opts: &SpectroOptions, saddle: [f64; 2]) -> Result<SpectroTable> {
    let nb = opts.basis_states;
    if nb < 2 || nb > opts.grid.points {
        return Err(Error::Grid(format!("basis size {nb} not in [2, {}]", opts.grid.points)));
    }
    let dim = nb * nb;
    let k = opts.states.min(dim);
    let q1 = solve_1d(s, wp.x_e1, &opts.grid, nb)?;
    let q2 = solve_1d(s, wp.x_e2, &opts.grid, nb)?;
    check_boundary(q1.boundary_amplitude.max(q2.boundary_amplitude))?;

    let shift = |sp: &Spectrum1D, x_e: f64| {
        Mat::from_fn(nb, nb, |i, j| sp.position[(i, j)] - if i == j { x_e } else { 0.0 })
    };
    let d1 = shift(&q1, wp.x_e1);
    let d2 = shift(&q2, wp.x_e2);
    let g = s.rho * wp.kappa;
    let h = Mat::from_fn(dim, dim, |a, b| {
        let (i, j) = (a / nb, a % nb);
        let (ip, jp) = (b / nb, b % nb);
        let diag = if a == b { q1.energies[i] + q2.energies[j] } else { 0.0 };
        diag + g * d1[(i, ip)] * d2[(j, jp)]
    });
    let (values, mut vectors) = linalg::symmetric_eigen(h.as_ref())?;
    linalg::fix_column_signs(&mut vectors);

    // coefficient matrix of state m: C_m[i][j] = vectors[(i*nb + j, m)]
    let coeff = |m: usize| Mat::from_fn(nb, nb, |i, j| vectors[(i * nb + j, m)]);
    let coeffs: Vec<Mat<f64>> = (0..k).map(coeff).collect();
    // (A ⊗ B) acting on C gives A·C·Bᵀ
    let sandwich = |a: &Mat<f64>, b: &Mat<f64>, m: usize, n: usize| -> f64 {
        let cm = &coeffs[m];
        let cn = &coeffs[n];
        let mut acc = 0.0;
        for i in 0..nb {
            for ip in 0..nb {
                if a[(i, ip)] == 0.0 {
                    continue;
                }
                for j in 0..nb {
                    let mut inner = 0.0;
                    for jp in 0..nb {
                        inner += b[(j, jp)] * cn[(ip, jp)];
                    }
                    acc += cm[(i, j)] * a[(i, ip)] * inner;
                }
            }
        }
        acc
    };
    let eye = Mat::<f64>::identity(nb, nb);
    let sym = |a: &Mat<f64>, b: &Mat<f64>| {
        let mut out = Mat::<f64>::zeros(k, k);
        for m in 0..k {
            for n in m..k {
                let v = sandwich(a, b, m, n);
                out[(m, n)] = v;
                out[(n, m)] = v;
            }
        }
        out
    };
    let x1 = sym(&q1.position, &eye);
    let x2 = sym(&eye, &q2.position);

    let p1 = q1.left_projector(saddle[0]);
    let p2 = q2.left_projector(saddle[1]);
    let comp = |p: &Mat<f64>| Mat::from_fn(nb, nb, |i, j| if i == j { 1.0 } else { 0.0 } - p[(i, j)]);
    let (h1, h2) = (comp(&p1), comp(&p2));
    let well_weights = (0..k)
        .map(|m| {
            [
                sandwich(&p1, &p2, m, m),
                sandwich(&p1, &h2, m, m),
                sandwich(&h1, &p2, m, m),
                sandwich(&h1, &h2, m, m),
            ]
        })
        .collect();
    let coupling = coupling_from_positions(&x1, &x2, wp, s.rho);
    Ok(SpectroTable {
        wp: *wp,
        rho: s.rho,
        energies: values[..k].to_vec(),
        x1,
        x2,
        coupling,
        well_weights,
        computational: None,
        saddle,
    })
}

fn solve_full2d(s: &ModelScales, wp: &WorkingParams, opts: &SpectroOptions, saddle: [f64; 2]) -> Result<SpectroTable> {
    let n = opts.grid.points;
    let dim = n * n;
    let k = opts.states.min(dim);
    let t = kinetic_matrix(&opts.grid, s.rho);
    let xs = opts.grid.coordinates();
    let h = Mat::from_fn(dim, dim, |a, b| {
        let (i, j) = (a / n, a % n);
        let (ip, jp) = (b / n, b % n);
        let mut v = 0.0;
        if j == jp {
            v += t[(i, ip)];
        }
        if i == ip {
            v += t[(j, jp)];
        }
        if a == b {
            v += potential_2d(xs[i], xs[j], wp, s);
        }
        v
    });
    let (values, mut vectors) = linalg::symmetric_eigen(h.as_ref())?;
    drop(h);
    linalg::fix_column_signs(&mut vectors);

    let boundary = (0..k)
        .map(|m| {
            let mut worst = 0.0f64;
            for i in 0..n {
                for (a, b) in [(0, i), (n - 1, i), (i, 0), (i, n - 1)] {
                    worst = worst.max(vectors[(a * n + b, m)].abs());
                }
            }
            worst
        })
        .fold(0.0, f64::max);
    check_boundary(boundary)?;

    let x1_grid: Vec<f64> = (0..dim).map(|a| xs[a / n]).collect();
    let x2_grid: Vec<f64> = (0..dim).map(|a| xs[a % n]).collect();
    let x1 = linalg::weighted_gram(vectors.as_ref(), &x1_grid, k);
    let x2 = linalg::weighted_gram(vectors.as_ref(), &x2_grid, k);
    let well_weights = (0..k)
        .map(|m| {
            let mut w = [0.0; 4];
            for a in 0..dim {
                let high1 = xs[a / n] > saddle[0];
                let high2 = xs[a % n] > saddle[1];
                let v = vectors[(a, m)];
                w[WellLabel::from_sides(high1, high2).index()] += v * v;
            }
            w
        })
        .collect();
    let coupling = coupling_from_positions(&x1, &x2, wp, s.rho);
    Ok(SpectroTable {
        wp: *wp,
        rho: s.rho,
        energies: values[..k].to_vec(),
        x1,
        x2,
        coupling,
        well_weights,
        computational: None,
        saddle,
    })
}

fn check_boundary(amplitude: f64) -> Result<()> {
    if amplitude > MAX_BOUNDARY_AMPLITUDE {
        return Err(Error::Grid(format!(
            "wavefunction amplitude {amplitude:e} at the window boundary exceeds {MAX_BOUNDARY_AMPLITUDE:e}"
        )));
    }
    Ok(())
}
