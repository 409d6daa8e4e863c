use std::fmt;
use std::sync::Arc;

use super::{Distortion, Map, JUMP_TOL};
use crate::error::{Error, Result};
use crate::quadrature::integrate;

const TABLE: usize = 256;

/// A spectral weighting function: a density φ on (0,1) plus point masses,
/// of total mass one.
#[derive(Clone)]
pub struct SpectralWeight {
    density: Option<Map>,
    atoms: Vec<(f64, f64)>,
    breaks: Vec<f64>,
    nodes: Arc<Vec<f64>>,
    cum: Arc<Vec<f64>>,
    label: String,
}

impl fmt::Debug for SpectralWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralWeight")
            .field("label", &self.label)
            .field("atoms", &self.atoms)
            .finish()
    }
}

impl SpectralWeight {
    /// `breaks` are the interior points where the density is not smooth.
    pub fn new(label: impl Into<String>, density: Option<Map>, breaks: &[f64], atoms: &[(f64, f64)]) -> Result<Self> {
        let mut breaks: Vec<f64> = breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut atoms: Vec<(f64, f64)> = atoms.to_vec();
        if atoms.iter().any(|&(w, m)| !(0.0..=1.0).contains(&w) || m < 0.0 || !m.is_finite()) {
            return Err(Error::domain("spectral atoms need locations in [0,1] and nonnegative mass"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut nodes: Vec<f64> = (0..=TABLE).map(|k| k as f64 / TABLE as f64).collect();
        nodes.extend(&breaks);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let mut cum = vec![0.0; nodes.len()];
        if let Some(d) = &density {
            for k in 1..nodes.len() {
                let piece = integrate(|w| d(w), nodes[k - 1], nodes[k], 1e-14, 40).value;
                if piece < -1e-12 || piece.is_nan() {
                    return Err(Error::domain("spectral density must be nonnegative"));
                }
                cum[k] = cum[k - 1] + piece;
            }
        }
        let mass = cum.last().unwrap() + atoms.iter().map(|a| a.1).sum::<f64>();
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::domain(format!("spectral weight has mass {mass}, not 1")));
        }
        Ok(SpectralWeight {
            density,
            atoms,
            breaks,
            nodes: Arc::new(nodes),
            cum: Arc::new(cum),
            label: label.into(),
        })
    }

    /// φ = (1/(1−p))·1(w > p).
    pub fn tvar(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(format!("tvar level {p} outside [0,1)")));
        }
        let d: Map = Arc::new(move |w| if w > p { 1.0 / (1.0 - p) } else { 0.0 });
        Self::new(format!("spectral_tvar:{p}"), Some(d), &[p], &[])
    }

    /// φ = δ_p.
    pub fn point_mass(p: f64) -> Result<Self> {
        Self::new(format!("spectral_delta:{p}"), None, &[], &[(p, 1.0)])
    }

    pub fn from_density(label: impl Into<String>, density: impl Fn(f64) -> f64 + Send + Sync + 'static, breaks: &[f64]) -> Result<Self> {
        Self::new(label, Some(Arc::new(density)), breaks, &[])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn density(&self, w: f64) -> f64 {
        match &self.density {
            Some(d) if w > 0.0 && w < 1.0 => d(w),
            _ => 0.0,
        }
    }

    /// ∫_0^t φ(w) dw, excluding atoms.
    pub fn continuous_cumulative(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let Some(d) = &self.density else { return 0.0 };
        let k = self.nodes.partition_point(|&x| x <= t).max(1) - 1;
        let base = self.cum[k];
        if t <= self.nodes[k] {
            return base;
        }
        base + integrate(|w| d(w), self.nodes[k], t, 1e-14, 30).value
    }

    /// Right-continuous cumulative weight: the density integral plus the
    /// atoms located at or before t.
    pub fn cumulative(&self, t: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 <= t + JUMP_TOL).map(|a| a.1).sum();
        (self.continuous_cumulative(t) + atoms).min(1.0)
    }
}

impl Distortion {
    /// The spectral weight with φ(q) = g′(1−q); jumps of g at u become
    /// atoms at 1 − u.
    pub fn to_spectral(&self) -> Result<SpectralWeight> {
        let g = self.clone();
        let d: Map = Arc::new(move |q| g.density(1.0 - q));
        let breaks: Vec<f64> = self.nonsmooth_points().iter().map(|u| 1.0 - u).collect();
        let atoms: Vec<(f64, f64)> = self.jumps().iter().map(|j| ((1.0 - j.at).clamp(0.0, 1.0), j.height())).collect();
        SpectralWeight::new(format!("spectral({})", self.label()), Some(d), &breaks, &atoms)
    }

    /// Total mass of dφ: density integral plus jump heights.
    pub fn spectral_mass(&self) -> f64 {
        self.ac_mass() + self.jumps().iter().map(|j| j.height()).sum::<f64>()
    }
}
