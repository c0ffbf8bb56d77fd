/// Parameters controlling the split evaluation of the singular integral.
///
/// The radial line per direction is split into inner ball `[0, h]`, dyadic
/// annuli `[h 2^k, h 2^{k+1}]` handled by adaptive Gauss–Kronrod panels, and
/// an analytic tail beyond the far radius. Every evaluation reports an error
/// estimate assembled from the same split.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureScheme {
    /// Inner radius `h`. For C² fields the inner ball uses the Taylor-driven
    /// second-difference estimate at scale `h`; callers working near a
    /// boundary shrink it to a fraction of the distance.
    pub inner_radius: f64,
    /// Cap on the number of dyadic annuli between `h` and the far radius.
    pub max_annuli: usize,
    /// Adaptive evaluation budget per annulus (function evaluations).
    pub nodes_radial: usize,
    /// Requested sphere-rule size (exact node count is rule-dependent).
    pub nodes_angular: usize,
    /// Optional truncation radius; the dropped tail is bounded analytically
    /// and folded into the error estimate.
    pub far_radius: Option<f64>,
    /// Target absolute tolerance for one operator evaluation.
    pub tol: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme {
            inner_radius: 1.0 / 64.0,
            max_annuli: 60,
            nodes_radial: 600,
            nodes_angular: 64,
            far_radius: None,
            tol: 1e-6,
        }
    }
}

impl QuadratureScheme {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_inner_radius(mut self, h: f64) -> Self {
        self.inner_radius = h;
        self
    }

    pub fn with_angular(mut self, nodes: usize) -> Self {
        self.nodes_angular = nodes;
        self
    }

    /// Halve every scale: used by the error-estimate honesty checks and the
    /// refinement monotonicity tests.
    pub fn refined(&self) -> Self {
        QuadratureScheme {
            inner_radius: self.inner_radius / 2.0,
            max_annuli: self.max_annuli + 4,
            nodes_radial: self.nodes_radial * 2,
            nodes_angular: self.nodes_angular * 2,
            far_radius: self.far_radius,
            tol: self.tol / 2.0,
        }
    }

    /// Hash of the discretization-relevant parameters, used as cache key.
    pub fn cache_key(&self, dim: usize, s: f64) -> u64 {
        // FNV-1a over the exact bit patterns; deterministic across runs.
        let mut h: u64 = 0xcbf29ce484222325;
        let mut write = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        write(dim as u64);
        write(s.to_bits());
        write(self.inner_radius.to_bits());
        write(self.max_annuli as u64);
        write(self.nodes_radial as u64);
        write(self.nodes_angular as u64);
        write(self.far_radius.unwrap_or(f64::NAN).to_bits());
        write(self.tol.to_bits());
        h
    }
}
