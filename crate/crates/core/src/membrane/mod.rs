//! Eigenmodes of uniform and radially loaded circular membranes.
//!
//! A loaded membrane is a stack of concentric rings of constant surface
//! density under one uniform tension. Within ring `i` the radial factor of
//! an order-`m` mode is `A_i J_m(k_i r) + B_i Y_m(k_i r)` with
//! `k_i = 2πf √(σ_i / T)`. The central disc is regular (`B_0 = 0`), the
//! displacement and slope are continuous at every ring boundary, and the
//! rim is clamped. Each boundary is crossed with the closed-form inverse of
//! the 2×2 Bessel matrix (its determinant is the Wronskian), so the
//! characteristic function is the rim displacement `u(R; f)`.

mod bessel;
mod profile;

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bessel::{bessel_j, bessel_y, bessel_zero, wronskian, MAX_ORDER, MAX_ZERO_INDEX};
pub use profile::{RadialDensityProfile, Ring};

use crate::error::{Error, Result};
use crate::format::sig9;
use bessel::{j_and_derivative, CylinderFunctions};

/// Relative bracket width at which root bisection stops.
pub const ROOT_REL_TOL: f64 = 1e-9;
/// Bisection steps allowed per bracketed root.
pub const MAX_BISECTIONS: usize = 200;
/// Scan steps per estimated mode spacing.
const STEPS_PER_SPACING: f64 = 20.0;

/// One membrane mode: `m` nodal diameters, `n − 1` interior nodal circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub m: u32,
    pub n: u32,
    pub frequency_hz: f64,
}

/// Modes of one profile, sorted by ascending frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    profile_fingerprint: u64,
    modes: Vec<Mode>,
}

impl ModeTable {
    pub fn new(profile_fingerprint: u64, mut modes: Vec<Mode>) -> Result<Self> {
        modes.sort_by(|a, b| {
            a.frequency_hz
                .total_cmp(&b.frequency_hz)
                .then((a.m, a.n).cmp(&(b.m, b.n)))
        });
        let mut seen = std::collections::HashSet::new();
        for mode in &modes {
            if !seen.insert((mode.m, mode.n)) {
                return Err(Error::InvalidInput(format!("duplicate mode ({}, {})", mode.m, mode.n)));
            }
        }
        Ok(Self {
            profile_fingerprint,
            modes,
        })
    }

    pub fn profile_fingerprint(&self) -> u64 {
        self.profile_fingerprint
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.frequency_hz).collect()
    }

    pub fn find(&self, m: u32, n: u32) -> Option<&Mode> {
        self.modes.iter().find(|mode| mode.m == m && mode.n == n)
    }

    /// Keeps the `count` lowest modes.
    pub fn truncated(&self, count: usize) -> Self {
        Self {
            profile_fingerprint: self.profile_fingerprint,
            modes: self.modes.iter().take(count).copied().collect(),
        }
    }

    /// CSV with header `m,n,frequency_hz`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,frequency_hz\n");
        for mode in &self.modes {
            let _ = writeln!(out, "{},{},{}", mode.m, mode.n, sig9(mode.frequency_hz));
        }
        out
    }

    /// As [`to_csv`](Self::to_csv) plus each frequency over the lowest one.
    pub fn to_csv_with_ratios(&self) -> String {
        let lowest = self.modes.first().map_or(1.0, |m| m.frequency_hz);
        let mut out = String::from("m,n,frequency_hz,ratio\n");
        for mode in &self.modes {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                mode.m,
                mode.n,
                sig9(mode.frequency_hz),
                sig9(mode.frequency_hz / lowest)
            );
        }
        out
    }
}

/// Modes of a uniform membrane: `f(m, n) = j_mn / (2πR) · √(T/σ)`.
pub fn uniform_modes(radius: f64, tension: f64, density: f64, m_max: u32, n_max: u32) -> Result<ModeTable> {
    let profile = RadialDensityProfile::uniform(radius, tension, density)?;
    if m_max > 8 || n_max > 8 || n_max == 0 {
        return Err(Error::InvalidInput(format!(
            "uniform_modes supports m_max <= 8 and 1 <= n_max <= 8, got ({m_max}, {n_max})"
        )));
    }
    let speed = (tension / density).sqrt();
    let mut modes = Vec::with_capacity(((m_max + 1) * n_max) as usize);
    for m in 0..=m_max {
        for n in 1..=n_max {
            modes.push(Mode {
                m,
                n,
                frequency_hz: bessel_zero(m, n) / (2.0 * PI * radius) * speed,
            });
        }
    }
    ModeTable::new(profile.fingerprint(), modes)
}

/// Eigenmodes of a ring-loaded membrane: the `n_max` lowest roots for each
/// order `0..=m_max`, all of which must lie below `f_ceiling`.
pub fn composite_modes(profile: &RadialDensityProfile, m_max: u32, n_max: u32, f_ceiling: f64) -> Result<ModeTable> {
    if m_max > MAX_ORDER || n_max == 0 || n_max > MAX_ZERO_INDEX {
        return Err(Error::InvalidInput(format!(
            "composite_modes supports m_max <= {MAX_ORDER} and 1 <= n_max <= {MAX_ZERO_INDEX}"
        )));
    }
    if !(f_ceiling > 0.0) {
        return Err(Error::NonPositiveFrequency(f_ceiling));
    }
    let per_order: Vec<Result<Vec<Mode>>> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let solver = OrderSolver::new(profile, m);
            let roots = solver.roots(n_max as usize, f_ceiling)?;
            if roots.len() < n_max as usize {
                return Err(Error::InsufficientCeiling {
                    order: m,
                    found: roots.len(),
                    wanted: n_max as usize,
                    ceiling_hz: f_ceiling,
                });
            }
            Ok(to_modes(m, &roots))
        })
        .collect();
    let mut modes = Vec::new();
    for order in per_order {
        modes.extend(order?);
    }
    ModeTable::new(profile.fingerprint(), modes)
}

/// A ceiling high enough that every order `m <= m_max` has at least
/// `n_max` roots below it: mass loading only lowers frequencies, so the
/// uniform membrane at the lightest density bounds every loaded mode.
pub fn guaranteed_ceiling(profile: &RadialDensityProfile, m_max: u32, n_max: u32) -> f64 {
    let lightest = (profile.tension() / profile.min_density()).sqrt();
    let highest = (0..=m_max.min(MAX_ORDER))
        .map(|m| bessel_zero(m, n_max.clamp(1, MAX_ZERO_INDEX)))
        .fold(0.0, f64::max);
    highest / (2.0 * PI * profile.membrane_radius()) * lightest * (1.0 + 1e-6)
}

/// The `count` lowest modes over all orders.
///
/// Order `m` contributes at most `count − m` candidates because modes rise
/// strictly with both `m` and `n`. Orders are solved in sequence and each
/// later order only searches below the current `count`-th candidate.
pub fn lowest_modes(profile: &RadialDensityProfile, count: usize) -> Result<ModeTable> {
    if count == 0 || count > MAX_ORDER as usize + 1 {
        return Err(Error::InvalidInput(format!(
            "lowest_modes supports 1..={} modes, got {count}",
            MAX_ORDER + 1
        )));
    }
    let mut found: Vec<Mode> = Vec::with_capacity(2 * count);
    for m in 0..count as u32 {
        let wanted = count - m as usize;
        let bound = guaranteed_ceiling_for(profile, m, wanted as u32);
        let (ceiling, cut) = if found.len() >= count {
            let kth = found[count - 1].frequency_hz;
            if kth < bound {
                (kth, true)
            } else {
                (bound, false)
            }
        } else {
            (bound, false)
        };
        let roots = OrderSolver::new(profile, m).roots(wanted, ceiling)?;
        if roots.len() < wanted && !cut {
            return Err(Error::InsufficientCeiling {
                order: m,
                found: roots.len(),
                wanted,
                ceiling_hz: ceiling,
            });
        }
        if roots.is_empty() {
            break;
        }
        found.extend(to_modes(m, &roots));
        found.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    }
    found.truncate(count);
    ModeTable::new(profile.fingerprint(), found)
}

fn guaranteed_ceiling_for(profile: &RadialDensityProfile, m: u32, n: u32) -> f64 {
    let lightest = (profile.tension() / profile.min_density()).sqrt();
    bessel_zero(m, n) / (2.0 * PI * profile.membrane_radius()) * lightest * (1.0 + 1e-6)
}

fn to_modes(m: u32, roots: &[f64]) -> Vec<Mode> {
    roots
        .iter()
        .enumerate()
        .map(|(i, &f)| Mode {
            m,
            n: i as u32 + 1,
            frequency_hz: f,
        })
        .collect()
}

/// Radial displacement of `mode` sampled at `samples` equally spaced radii
/// on `[0, R]`, scaled so that the largest magnitude is 1.
pub fn mode_shape(profile: &RadialDensityProfile, table: &ModeTable, mode: &Mode, samples: usize) -> Result<Vec<f64>> {
    if table.profile_fingerprint() != profile.fingerprint() {
        return Err(Error::ProfileMismatch);
    }
    if samples < 64 {
        return Err(Error::InvalidInput(format!(
            "mode_shape needs at least 64 samples, got {samples}"
        )));
    }
    if !table.modes().iter().any(|m| m == mode) {
        return Err(Error::InvalidInput(format!(
            "mode ({}, {}) is not in the table",
            mode.m, mode.n
        )));
    }
    let solver = OrderSolver::new(profile, mode.m);
    let frequency = solver.polish(mode.frequency_hz);
    let coefficients = solver.coefficients(frequency);
    let radius = profile.membrane_radius();
    let omega = 2.0 * PI * frequency;
    let m = mode.m as usize;

    let mut region = 0;
    let mut shape: Vec<f64> = (0..samples)
        .map(|i| {
            let r = radius * i as f64 / (samples - 1) as f64;
            while region + 1 < solver.radii.len() && r > solver.radii[region] {
                region += 1;
            }
            let k = omega * solver.slowness[region];
            let (a, b) = coefficients[region];
            if r == 0.0 {
                return if m == 0 { a } else { 0.0 };
            }
            if b == 0.0 {
                a * bessel_j(mode.m, k * r)
            } else {
                let c = CylinderFunctions::new(m, k * r);
                a * c.j[m] + b * c.y[m]
            }
        })
        .collect();
    let peak = shape.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if peak > 0.0 {
        for v in shape.iter_mut() {
            *v /= peak;
        }
    }
    Ok(shape)
}

/// Number of sign changes strictly inside the sampled interval.
pub fn interior_sign_changes(shape: &[f64]) -> usize {
    let scale = shape.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let floor = 1e-7 * scale;
    let inner = &shape[..shape.len().saturating_sub(1)];
    let mut last = 0.0;
    let mut changes = 0;
    for &v in inner {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            changes += 1;
        }
        last = v.signum();
    }
    changes
}

/// Groups of two or more modes whose frequencies agree within
/// `1 ± rel_tol`. Groups are formed greedily from the low end of the table.
pub fn find_degeneracies(table: &ModeTable, rel_tol: f64) -> Result<Vec<Vec<Mode>>> {
    if !(rel_tol > 0.0 && rel_tol <= 0.05) {
        return Err(Error::InvalidInput(format!(
            "rel_tol must lie in (0, 0.05], got {rel_tol}"
        )));
    }
    let modes = table.modes();
    let mut groups = Vec::new();
    let mut i = 0;
    while i < modes.len() {
        let anchor = modes[i].frequency_hz;
        let mut j = i + 1;
        while j < modes.len() && modes[j].frequency_hz <= anchor * (1.0 + rel_tol) {
            j += 1;
        }
        if j - i >= 2 {
            groups.push(modes[i..j].to_vec());
        }
        i = j;
    }
    Ok(groups)
}

/// Characteristic function and root search for one azimuthal order.
pub(crate) struct OrderSolver {
    m: u32,
    /// Outer radius of each ring, metres.
    radii: Vec<f64>,
    /// `√(σ_i / T)` per ring, so that `k_i = ω · slowness_i`.
    slowness: Vec<f64>,
    scan_step: f64,
}

impl OrderSolver {
    pub fn new(profile: &RadialDensityProfile, m: u32) -> Self {
        let tension = profile.tension();
        let radii: Vec<f64> = profile.boundaries().collect();
        let slowness = profile
            .rings()
            .iter()
            .map(|r| (r.surface_density / tension).sqrt())
            .collect();
        let gap = (bessel_zero(m, 2) - bessel_zero(m, 1)).min(PI);
        let spacing = gap / (2.0 * PI * profile.membrane_radius()) * (tension / profile.max_density()).sqrt();
        Self {
            m,
            radii,
            slowness,
            scan_step: spacing / STEPS_PER_SPACING,
        }
    }

    /// Rim displacement for unit amplitude of the regular central solution.
    pub fn characteristic(&self, frequency: f64) -> f64 {
        let m = self.m as usize;
        let omega = 2.0 * PI * frequency;
        let k0 = omega * self.slowness[0];
        let (j, jp) = j_and_derivative(m, k0 * self.radii[0]);
        let (mut u, mut du) = (j, k0 * jp);
        for i in 1..self.radii.len() {
            let (a, b) = self.cross(i, omega, u, du);
            let k = omega * self.slowness[i];
            let outer = CylinderFunctions::new(m, k * self.radii[i]);
            u = a * outer.j[m] + b * outer.y[m];
            du = k * (a * outer.jp[m] + b * outer.yp[m]);
        }
        u
    }

    /// Coefficients `(A_i, B_i)` of ring `i` matching `(u, du)` at its
    /// inner radius.
    fn cross(&self, i: usize, omega: f64, u: f64, du: f64) -> (f64, f64) {
        let m = self.m as usize;
        let k = omega * self.slowness[i];
        let r = self.radii[i - 1];
        let c = CylinderFunctions::new(m, k * r);
        let scale = 0.5 * PI * r;
        (
            scale * (k * c.yp[m] * u - c.y[m] * du),
            scale * (c.j[m] * du - k * c.jp[m] * u),
        )
    }

    fn coefficients(&self, frequency: f64) -> Vec<(f64, f64)> {
        let m = self.m as usize;
        let omega = 2.0 * PI * frequency;
        let mut out = vec![(1.0, 0.0)];
        let k0 = omega * self.slowness[0];
        let (j, jp) = j_and_derivative(m, k0 * self.radii[0]);
        let (mut u, mut du) = (j, k0 * jp);
        for i in 1..self.radii.len() {
            let (a, b) = self.cross(i, omega, u, du);
            out.push((a, b));
            let k = omega * self.slowness[i];
            let outer = CylinderFunctions::new(m, k * self.radii[i]);
            u = a * outer.j[m] + b * outer.y[m];
            du = k * (a * outer.jp[m] + b * outer.yp[m]);
        }
        out
    }

    /// Up to `count` lowest roots below `ceiling`, ascending.
    pub fn roots(&self, count: usize, ceiling: f64) -> Result<Vec<f64>> {
        let mut roots = Vec::with_capacity(count);
        let step = self.scan_step;
        let mut prev2: Option<(f64, f64)> = None;
        let mut prev = (step, self.eval(step)?);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        }
        while roots.len() < count && prev.0 < ceiling {
            let f = (prev.0 + step).min(ceiling);
            let d = self.eval(f)?;
            if d == 0.0 {
                roots.push(f);
            } else if prev.1 != 0.0 && d.signum() != prev.1.signum() {
                roots.push(self.bisect(prev.0, f, prev.1)?);
            } else if let Some(p2) = prev2 {
                let dip = prev.1.abs() < p2.1.abs() && prev.1.abs() < d.abs();
                if dip && p2.1.signum() == d.signum() {
                    roots.extend(self.refine(p2, (f, d))?);
                }
            }
            prev2 = Some(prev);
            prev = (f, d);
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        roots.truncate(count);
        Ok(roots)
    }

    /// Rescans a window whose end points share a sign with a 4× finer step,
    /// to split a pair of roots closer than one scan step.
    fn refine(&self, lo: (f64, f64), hi: (f64, f64)) -> Result<Vec<f64>> {
        let substeps = 8;
        let width = (hi.0 - lo.0) / substeps as f64;
        let mut out = Vec::new();
        let mut prev = lo;
        for s in 1..=substeps {
            let f = if s == substeps { hi.0 } else { lo.0 + width * s as f64 };
            let d = if s == substeps { hi.1 } else { self.eval(f)? };
            if d == 0.0 {
                out.push(f);
            } else if prev.1 != 0.0 && d.signum() != prev.1.signum() {
                out.push(self.bisect(prev.0, f, prev.1)?);
            }
            prev = (f, d);
        }
        Ok(out)
    }

    fn eval(&self, frequency: f64) -> Result<f64> {
        let d = self.characteristic(frequency);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Convergence {
                order: self.m,
                near_hz: frequency,
                iterations: 0,
            })
        }
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, mut d_lo: f64) -> Result<f64> {
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= ROOT_REL_TOL * lo {
                return Ok(0.5 * (lo + hi));
            }
            let mid = 0.5 * (lo + hi);
            let d = self.eval(mid)?;
            if d == 0.0 {
                return Ok(mid);
            }
            if d.signum() == d_lo.signum() {
                lo = mid;
                d_lo = d;
            } else {
                hi = mid;
            }
        }
        Err(Error::Convergence {
            order: self.m,
            near_hz: 0.5 * (lo + hi),
            iterations: MAX_BISECTIONS,
        })
    }

    /// Tightens a tabulated root to full floating-point resolution.
    fn polish(&self, frequency: f64) -> f64 {
        let width = 4.0 * ROOT_REL_TOL * frequency;
        let (mut lo, mut hi) = (frequency - width, frequency + width);
        let mut d_lo = self.characteristic(lo);
        let d_hi = self.characteristic(hi);
        if d_lo.signum() == d_hi.signum() {
            return frequency;
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            let d = self.characteristic(mid);
            if d == 0.0 {
                return mid;
            }
            if d.signum() == d_lo.signum() {
                lo = mid;
                d_lo = d;
            } else {
                hi = mid;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_uniform() -> RadialDensityProfile {
        RadialDensityProfile::uniform(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn uniform_fundamental_value() {
        let table = uniform_modes(1.0, 1.0, 1.0, 2, 2).unwrap();
        let f = table.modes()[0];
        assert_eq!((f.m, f.n), (0, 1));
        assert!((f.frequency_hz - 2.404826 / (2.0 * PI)).abs() < 1e-6);
        assert!((f.frequency_hz - 0.38274).abs() < 1e-5);
    }

    #[test]
    fn quadrupled_tension_doubles_frequencies() {
        let a = uniform_modes(0.3, 100.0, 0.2, 4, 3).unwrap();
        let b = uniform_modes(0.3, 400.0, 0.2, 4, 3).unwrap();
        for (x, y) in a.modes().iter().zip(b.modes()) {
            assert_eq!((x.m, x.n), (y.m, y.n));
            assert!((y.frequency_hz / x.frequency_hz - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_ratio_series() {
        let table = uniform_modes(1.0, 1.0, 1.0, 8, 8).unwrap();
        let f = table.frequencies();
        let ratios: Vec<f64> = f.iter().map(|x| x / f[0]).collect();
        for want in [1.0, 1.59, 2.14, 2.30, 2.65, 3.16, 3.50] {
            assert!(ratios.iter().any(|r| (r - want).abs() <= 0.005), "no ratio near {want}");
        }
    }

    #[test]
    fn single_ring_matches_uniform() {
        let profile = unit_uniform();
        let ceiling = guaranteed_ceiling(&profile, 4, 4);
        let comp = composite_modes(&profile, 4, 4, ceiling).unwrap();
        let uni = uniform_modes(1.0, 1.0, 1.0, 4, 4).unwrap();
        for mode in uni.modes() {
            let c = comp.find(mode.m, mode.n).unwrap();
            let rel = (c.frequency_hz - mode.frequency_hz).abs() / mode.frequency_hz;
            assert!(rel < 1e-8, "({}, {}) rel {rel}", mode.m, mode.n);
        }
    }

    #[test]
    fn insufficient_ceiling_reports_count() {
        let profile = unit_uniform();
        // between the first and second (0, n) roots
        let ceiling = 0.5 * (bessel_zero(0, 1) + bessel_zero(0, 2)) / (2.0 * PI);
        match composite_modes(&profile, 0, 3, ceiling) {
            Err(Error::InsufficientCeiling { found, wanted, .. }) => {
                assert_eq!((found, wanted), (1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lowest_modes_agree_with_full_solve() {
        let profile = RadialDensityProfile::two_region(0.1, 1500.0, 0.2, 0.45, 5.0).unwrap();
        let full = composite_modes(&profile, 8, 8, guaranteed_ceiling(&profile, 8, 8)).unwrap();
        let low = lowest_modes(&profile, 9).unwrap();
        for (a, b) in low.modes().iter().zip(full.modes()) {
            assert_eq!((a.m, a.n), (b.m, b.n));
            assert!((a.frequency_hz - b.frequency_hz).abs() <= 1e-12 * b.frequency_hz);
        }
    }

    #[test]
    fn shapes_have_expected_nodal_circles() {
        let profile = unit_uniform();
        let table = uniform_modes(1.0, 1.0, 1.0, 3, 3).unwrap();
        for mode in table.modes() {
            let shape = mode_shape(&profile, &table, mode, 512).unwrap();
            assert_eq!(interior_sign_changes(&shape), mode.n as usize - 1);
            assert!(shape.last().unwrap().abs() < 1e-9);
            let peak = shape.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            assert!((peak - 1.0).abs() < 1e-15);
            if mode.m > 0 {
                assert_eq!(shape[0], 0.0);
            }
        }
    }

    #[test]
    fn second_axisymmetric_mode_matches_sampled_bessel() {
        // sign changes of J_0(j_02 r) sampled on the same grid
        let table = uniform_modes(1.0, 1.0, 1.0, 0, 2).unwrap();
        let mode = *table.find(0, 2).unwrap();
        let k = bessel_zero(0, 2);
        let direct: Vec<f64> = (0..200).map(|i| bessel_j(0, k * i as f64 / 199.0)).collect();
        let shape = mode_shape(&unit_uniform(), &table, &mode, 200).unwrap();
        assert_eq!(interior_sign_changes(&direct), 1);
        assert_eq!(interior_sign_changes(&shape), 1);
    }

    #[test]
    fn loaded_shapes_clamp_at_rim() {
        let profile = RadialDensityProfile::two_region(1.0, 1.0, 1.0, 0.4, 6.0).unwrap();
        let table = lowest_modes(&profile, 8).unwrap();
        for mode in table.modes() {
            let shape = mode_shape(&profile, &table, mode, 256).unwrap();
            assert!(shape.last().unwrap().abs() < 1e-9, "{mode:?}");
            assert_eq!(interior_sign_changes(&shape), mode.n as usize - 1, "{mode:?}");
        }
    }

    #[test]
    fn shape_rejects_foreign_table() {
        let table = uniform_modes(1.0, 1.0, 1.0, 1, 1).unwrap();
        let other = RadialDensityProfile::uniform(1.0, 2.0, 1.0).unwrap();
        let mode = table.modes()[0];
        assert!(matches!(
            mode_shape(&other, &table, &mode, 64),
            Err(Error::ProfileMismatch)
        ));
        assert!(mode_shape(&unit_uniform(), &table, &mode, 10).is_err());
    }

    #[test]
    fn degeneracy_grouping() {
        let table = ModeTable::new(0, vec![]).unwrap();
        assert!(find_degeneracies(&table, 0.001).unwrap().is_empty());

        let modes = [100.0, 100.05, 250.0]
            .iter()
            .enumerate()
            .map(|(i, &f)| Mode {
                m: i as u32,
                n: 1,
                frequency_hz: f,
            })
            .collect();
        let table = ModeTable::new(0, modes).unwrap();
        let groups = find_degeneracies(&table, 0.001).unwrap();
        assert_eq!(groups.len(), 1);
        let fs: Vec<f64> = groups[0].iter().map(|m| m.frequency_hz).collect();
        assert_eq!(fs, vec![100.0, 100.05]);

        assert!(find_degeneracies(&table, 0.0).is_err());
        assert!(find_degeneracies(&table, 0.06).is_err());
    }

    #[test]
    fn uniform_membrane_has_no_degeneracies() {
        let table = uniform_modes(1.0, 1.0, 1.0, 8, 8).unwrap();
        // closest pair of tabulated zeros, checked directly
        let mut zeros: Vec<f64> = (0..=8).flat_map(|m| (1..=8).map(move |n| bessel_zero(m, n))).collect();
        zeros.sort_by(f64::total_cmp);
        let closest = zeros
            .windows(2)
            .map(|w| w[1] / w[0] - 1.0)
            .fold(f64::INFINITY, f64::min);
        assert!(closest > 0.001);
        assert!(find_degeneracies(&table, 0.001).unwrap().is_empty());
    }

    #[test]
    fn duplicate_modes_rejected() {
        let mode = Mode {
            m: 0,
            n: 1,
            frequency_hz: 1.0,
        };
        assert!(ModeTable::new(0, vec![mode, mode]).is_err());
    }

    #[test]
    fn csv_export() {
        let table = uniform_modes(1.0, 1.0, 1.0, 1, 1).unwrap();
        let csv = table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("m,n,frequency_hz"));
        assert_eq!(lines.next(), Some("0,1,0.382739875"));
        assert!(table
            .to_csv_with_ratios()
            .starts_with("m,n,frequency_hz,ratio\n0,1,0.382739875,1.00000000\n"));
    }
}
