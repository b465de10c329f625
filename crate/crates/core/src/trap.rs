//! Trap model: electrode geometry, drive parameters, and the reduction to a
//! dimensionless planar-crystal potential.
//!
//! An oblate Paul trap confines ions radially with an RF pseudopotential and
//! axially with DC ring and end-cap electrodes. At fixed voltages the static
//! problem is characterized by two dimensionless stiffnesses `beta_1` (in
//! plane, equal along both axes by azimuthal symmetry) and `beta_3` (axial),
//! both in units of the axial pseudopotential frequency `omega_psi3`, plus a
//! length scale at which the Coulomb energy between neighbours matches the
//! trap energy. All crystal, mode, and coupling computations downstream work
//! in these reduced units.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{ATOMIC_MASS, COULOMB, ELEMENTARY_CHARGE};

#[derive(Debug, Error)]
pub enum TrapError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be nonzero")]
    Zero { name: &'static str },
    #[error("voltage grid step must be positive and min <= max")]
    BadGrid,
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, TrapError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(TrapError::NonPositive { name, value })
    }
}

/// A single trapped ion species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    mass: f64,   // kg
    charge: f64, // C
}

impl IonSpecies {
    pub fn new(mass_kg: f64, charge_c: f64) -> Result<Self, TrapError> {
        Ok(Self {
            mass: require_positive("mass", mass_kg)?,
            charge: require_positive("charge", charge_c)?,
        })
    }

    /// Species from mass in atomic mass units and charge in elementary charges.
    pub fn from_amu(mass_amu: f64, charge_e: f64) -> Result<Self, TrapError> {
        Self::new(mass_amu * ATOMIC_MASS, charge_e * ELEMENTARY_CHARGE)
    }

    /// Singly ionized ytterbium-171.
    pub fn ytterbium_171() -> Self {
        Self::from_amu(171.0, 1.0).expect("constants are positive")
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }
}

/// Electrode geometry. Lengths in meters.
///
/// The end caps are modeled by a quadratic field profile with curvature
/// lengths `a` (axial) and `c` (radial), a linear-gradient length `b_t`
/// for the top cap, and a constant offset `d`. The bottom cap mirrors the
/// top one, so its gradient length is `-b_t` by construction. `d` shifts
/// the potential energy zero only and never enters any observable; it is
/// retained so a fitted electrode profile can be recorded in full.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapGeometry {
    r_o: f64,
    a: f64,
    b_t: f64,
    c: f64,
    d: f64,
}

impl TrapGeometry {
    pub fn new(r_o: f64, a: f64, b_t: f64, c: f64, d: f64) -> Result<Self, TrapError> {
        require_positive("r_o", r_o)?;
        require_positive("a", a)?;
        require_positive("c", c)?;
        if b_t == 0.0 || !b_t.is_finite() {
            return Err(TrapError::Zero { name: "b_t" });
        }
        if !d.is_finite() {
            return Err(TrapError::Zero { name: "d" });
        }
        Ok(Self { r_o, a, b_t, c, d })
    }

    pub fn r_o(&self) -> f64 {
        self.r_o
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b_t(&self) -> f64 {
        self.b_t
    }
    /// Bottom-cap gradient length; the mirror of the top cap.
    pub fn b_b(&self) -> f64 {
        -self.b_t
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
}

impl Default for TrapGeometry {
    /// Fitted constants for the reference electrode stack.
    fn default() -> Self {
        Self::new(512e-6, 524e-6, 761e-6, 704e-6, 0.812).expect("valid defaults")
    }
}

/// RF drive and DC electrode voltages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    v_rf: f64,     // RF amplitude, V
    omega_rf: f64, // RF angular frequency, rad/s
    pub v_ring: f64,
    pub v_top: f64,
    pub v_bottom: f64,
}

impl DriveConfig {
    pub fn new(
        v_rf: f64,
        omega_rf: f64,
        v_ring: f64,
        v_top: f64,
        v_bottom: f64,
    ) -> Result<Self, TrapError> {
        Ok(Self {
            v_rf: require_positive("v_rf", v_rf)?,
            omega_rf: require_positive("omega_rf", omega_rf)?,
            v_ring,
            v_top,
            v_bottom,
        })
    }

    pub fn v_rf(&self) -> f64 {
        self.v_rf
    }
    pub fn omega_rf(&self) -> f64 {
        self.omega_rf
    }

    pub fn with_dc(mut self, v_ring: f64, v_top: f64, v_bottom: f64) -> Self {
        self.v_ring = v_ring;
        self.v_top = v_top;
        self.v_bottom = v_bottom;
        self
    }
}

impl Default for DriveConfig {
    /// 500 V RF at 2 pi x 35 MHz with all DC electrodes grounded.
    fn default() -> Self {
        Self::new(500.0, 2.0 * std::f64::consts::PI * 35e6, 0.0, 0.0, 0.0).expect("valid defaults")
    }
}

/// Squared secular frequencies per field family, (rad/s)^2, stored signed so
/// anti-confining voltages keep their sign through every downstream formula.
///
/// Radial (`*_1`) and axial (`*_3`) entries obey the fixed geometric ratios
/// `psi_3 = 4 psi_1`, `ring_3 = 2 ring_1`, `cap_3/cap_1 = (c/a)^2`; the second
/// radial axis equals the first by symmetry and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapFrequencies {
    pub psi_1_sq: f64,
    pub psi_3_sq: f64,
    pub ring_1_sq: f64,
    pub ring_3_sq: f64,
    pub top_1_sq: f64,
    pub top_3_sq: f64,
    pub bottom_1_sq: f64,
    pub bottom_3_sq: f64,
}

/// Secular frequencies of each field contribution for one ion.
pub fn derive_frequencies(
    species: &IonSpecies,
    geom: &TrapGeometry,
    drive: &DriveConfig,
) -> TrapFrequencies {
    let m = species.mass();
    let q = species.charge();
    let ro_sq = geom.r_o() * geom.r_o();
    let a_sq = geom.a() * geom.a();
    let c_sq = geom.c() * geom.c();

    // pseudopotential: omega_psi1 = sqrt(2) q V_rf / (m Omega_rf r_o^2)
    let w_psi1 = std::f64::consts::SQRT_2 * q * drive.v_rf() / (m * drive.omega_rf() * ro_sq);
    let psi_1_sq = w_psi1 * w_psi1;

    // DC families are linear in voltage; signed squares
    let ring_1_sq = 2.0 * q * drive.v_ring / (m * ro_sq);
    let top_1_sq = 2.0 * q * drive.v_top / (m * c_sq);
    let top_3_sq = 2.0 * q * drive.v_top / (m * a_sq);
    let bottom_1_sq = 2.0 * q * drive.v_bottom / (m * c_sq);
    let bottom_3_sq = 2.0 * q * drive.v_bottom / (m * a_sq);

    TrapFrequencies {
        psi_1_sq,
        psi_3_sq: 4.0 * psi_1_sq,
        ring_1_sq,
        ring_3_sq: 2.0 * ring_1_sq,
        top_1_sq,
        top_3_sq,
        bottom_1_sq,
        bottom_3_sq,
    }
}

/// Reduced description of the trap seen by a planar crystal.
///
/// Squared stiffnesses are stored signed; `stable` records whether both
/// `beta_1^2` and `beta_3^2` are positive. Lengths in crystal coordinates are
/// in units of `length_scale`, energies in units of `k_e q^2 / length_scale`,
/// and mode frequencies in units of `omega_psi3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionlessTrap {
    pub beta1_sq: f64,
    pub beta3_sq: f64,
    pub beta_r3_sq: f64,
    pub beta_t3_sq: f64,
    pub beta_b3_sq: f64,
    /// Axial offset of the top-cap gradient, units of `length_scale`.
    pub x_offset_top: f64,
    pub x_offset_bottom: f64,
    /// Equilibrium height of the crystal plane, units of `length_scale`.
    pub plane_z: f64,
    /// Coulomb-balance length, m.
    pub length_scale: f64,
    /// Axial pseudopotential frequency, rad/s.
    pub omega_psi3: f64,
    pub stable: bool,
}

impl DimensionlessTrap {
    /// In-plane stiffness (both axes by symmetry); NaN when radially unstable.
    pub fn beta_1(&self) -> f64 {
        self.beta1_sq.sqrt()
    }
    pub fn beta_2(&self) -> f64 {
        self.beta_1()
    }
    /// Axial stiffness; NaN when axially unstable.
    pub fn beta_3(&self) -> f64 {
        self.beta3_sq.sqrt()
    }

    /// Scale-free trap built directly from squared stiffnesses, for synthetic
    /// setups and tests. The balance is carried entirely by the ring channel
    /// (`beta_r3_sq = 1 - beta_3^2`, zero caps): both that subtraction and
    /// the axial identity `beta_3^2 = 1 - beta_r3^2 + beta_t3^2 + beta_b3^2`
    /// are then exact in f64, with zero gradient offsets and the plane at
    /// z = 0.
    pub fn from_betas(beta1_sq: f64, beta3_sq: f64) -> Self {
        Self {
            beta1_sq,
            beta3_sq,
            beta_r3_sq: 1.0 - beta3_sq,
            beta_t3_sq: 0.0,
            beta_b3_sq: 0.0,
            x_offset_top: 0.0,
            x_offset_bottom: 0.0,
            plane_z: 0.0,
            length_scale: 1.0,
            omega_psi3: 1.0,
            stable: beta1_sq > 0.0 && beta3_sq > 0.0,
        }
    }
}

/// Collapse a physical configuration to the dimensionless trap.
pub fn build_dimensionless(
    species: &IonSpecies,
    geom: &TrapGeometry,
    drive: &DriveConfig,
) -> DimensionlessTrap {
    let f = derive_frequencies(species, geom, drive);
    let w3_sq = f.psi_3_sq;

    let beta1_sq = (f.psi_1_sq + f.ring_1_sq - f.top_1_sq - f.bottom_1_sq) / w3_sq;
    let beta_r3_sq = f.ring_3_sq / w3_sq;
    let beta_t3_sq = f.top_3_sq / w3_sq;
    let beta_b3_sq = f.bottom_3_sq / w3_sq;
    let beta3_sq = 1.0 - beta_r3_sq + beta_t3_sq + beta_b3_sq;

    let m = species.mass();
    let q = species.charge();
    let length_scale = (COULOMB * q * q / (m * w3_sq)).cbrt();

    let a_sq = geom.a() * geom.a();
    let x_offset_top = a_sq / (2.0 * length_scale * geom.b_t());
    let x_offset_bottom = a_sq / (2.0 * length_scale * geom.b_b());
    // balance of the axial linear gradients against the net axial stiffness
    let plane_z = (-beta_t3_sq * x_offset_top - beta_b3_sq * x_offset_bottom) / beta3_sq;

    DimensionlessTrap {
        beta1_sq,
        beta3_sq,
        beta_r3_sq,
        beta_t3_sq,
        beta_b3_sq,
        x_offset_top,
        x_offset_bottom,
        plane_z,
        length_scale,
        omega_psi3: w3_sq.sqrt(),
        stable: beta1_sq > 0.0 && beta3_sq > 0.0,
    }
}

/// Rectangular DC voltage grid: ring voltage on one axis, symmetric end-cap
/// voltage on the other.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageGrid {
    pub v_ring: Vec<f64>,
    pub v_endcap: Vec<f64>,
}

impl VoltageGrid {
    pub fn from_ranges(
        ring: (f64, f64, f64),
        endcap: (f64, f64, f64),
    ) -> Result<Self, TrapError> {
        Ok(Self {
            v_ring: grid_axis(ring)?,
            v_endcap: grid_axis(endcap)?,
        })
    }

    /// Default scan: 0..=100 V at 1 V resolution on both axes.
    pub fn default_scan() -> Self {
        Self::from_ranges((0.0, 100.0, 1.0), (0.0, 100.0, 1.0)).expect("valid defaults")
    }
}

fn grid_axis((min, max, step): (f64, f64, f64)) -> Result<Vec<f64>, TrapError> {
    if !(step > 0.0) || !(min <= max) || !min.is_finite() || !max.is_finite() {
        return Err(TrapError::BadGrid);
    }
    let n = ((max - min) / step).floor() as usize;
    Ok((0..=n).map(|i| min + step * i as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityPoint {
    pub v_ring: f64,
    pub v_endcap: f64,
    pub beta1_sq: f64,
    pub beta3_sq: f64,
    pub stable: bool,
}

/// Stability classification over a DC voltage grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub grid: VoltageGrid,
    /// Row-major over (v_ring, v_endcap): index = i_ring * n_endcap + i_endcap.
    pub points: Vec<StabilityPoint>,
}

/// Classify planar-crystal stability over a grid of (V_ring, V_endcap) with
/// V_top = V_bottom = V_endcap and the RF drive taken from `drive`.
pub fn stability_scan(
    species: &IonSpecies,
    geom: &TrapGeometry,
    drive: &DriveConfig,
    grid: VoltageGrid,
) -> StabilityMap {
    let mut points = Vec::with_capacity(grid.v_ring.len() * grid.v_endcap.len());
    for &vr in &grid.v_ring {
        for &ve in &grid.v_endcap {
            let d = drive.with_dc(vr, ve, ve);
            let t = build_dimensionless(species, geom, &d);
            points.push(StabilityPoint {
                v_ring: vr,
                v_endcap: ve,
                beta1_sq: t.beta1_sq,
                beta3_sq: t.beta3_sq,
                stable: t.stable,
            });
        }
    }
    StabilityMap { grid, points }
}

impl StabilityMap {
    fn dims(&self) -> (usize, usize) {
        (self.grid.v_ring.len(), self.grid.v_endcap.len())
    }

    fn stable_at(&self, i: usize, j: usize) -> bool {
        self.points[i * self.grid.v_endcap.len() + j].stable
    }

    /// Whether the stable cells form a single 4-connected region with no
    /// enclosed unstable holes.
    pub fn simply_connected(&self) -> bool {
        let (nr, ne) = self.dims();
        if nr == 0 || ne == 0 {
            return true;
        }
        let stable_count = self.points.iter().filter(|p| p.stable).count();
        if stable_count == 0 {
            return true;
        }

        // one flood fill over stable cells
        let start = self.points.iter().position(|p| p.stable).unwrap();
        let reached = self.flood(start, true);
        if reached != stable_count {
            return false;
        }

        // unstable cells must all reach the boundary (no holes)
        let unstable_count = self.points.len() - stable_count;
        if unstable_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.points.len()];
        let mut stack = Vec::new();
        for i in 0..nr {
            for j in 0..ne {
                if (i == 0 || j == 0 || i == nr - 1 || j == ne - 1) && !self.stable_at(i, j) {
                    let idx = i * ne + j;
                    if !seen[idx] {
                        seen[idx] = true;
                        stack.push((i, j));
                    }
                }
            }
        }
        let mut reached_unstable = stack.len();
        while let Some((i, j)) = stack.pop() {
            for (ni, nj) in neighbors(i, j, nr, ne) {
                let idx = ni * ne + nj;
                if !seen[idx] && !self.stable_at(ni, nj) {
                    seen[idx] = true;
                    reached_unstable += 1;
                    stack.push((ni, nj));
                }
            }
        }
        reached_unstable == unstable_count
    }

    fn flood(&self, start: usize, want_stable: bool) -> usize {
        let (nr, ne) = self.dims();
        let mut seen = vec![false; self.points.len()];
        seen[start] = true;
        let mut stack = vec![(start / ne, start % ne)];
        let mut count = 1;
        while let Some((i, j)) = stack.pop() {
            for (ni, nj) in neighbors(i, j, nr, ne) {
                let idx = ni * ne + nj;
                if !seen[idx] && self.stable_at(ni, nj) == want_stable {
                    seen[idx] = true;
                    count += 1;
                    stack.push((ni, nj));
                }
            }
        }
        count
    }
}

fn neighbors(i: usize, j: usize, nr: usize, ne: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out = Vec::with_capacity(4);
    if i > 0 {
        out.push((i - 1, j));
    }
    if j > 0 {
        out.push((i, j - 1));
    }
    if i + 1 < nr {
        out.push((i + 1, j));
    }
    if j + 1 < ne {
        out.push((i, j + 1));
    }
    out.into_iter()
}
